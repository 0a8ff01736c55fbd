use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use quatsig_core::beam::relative_response_db;
use quatsig_core::verify::{algebra_checks, gradient_checks, qlms_checks};
use quatsig_core::{
    beampattern, load_series_csv, normalize_series, run_beamformer, run_prediction,
    save_series_csv, synth_wind, write_pattern_csv, ArrayConfig, FdConfig, FilterConfig,
    LearningCurve, Mode, PredictionRun, Scene, SynthConfig,
};

use crate::config::{ConfigFile, DoaList};
use crate::report::{content_hash, io_error, RunReport};
use crate::{Algo, BeamformArgs, CliError, GradcheckArgs, PredictArgs};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 100;

pub const PREDICT_MU: f64 = 2.5e-4;
pub const PREDICT_LEN: usize = 16;
pub const PREDICT_STEP: usize = 2;

pub const BEAM_SENSORS: usize = 10;
pub const BEAM_SPACING: f64 = 0.5;
pub const BEAM_MU: f64 = 1e-6;
pub const BEAM_SNAPSHOTS: usize = 120_000;
pub const BEAM_RUNS: usize = 100;
pub const BEAM_SNR_DB: f64 = 20.0;
pub const BEAM_SIR_DB: f64 = 0.0;
pub const BEAM_INTERFERERS: [f64; 2] = [30.0, -20.0];

/// Largest change of the smoothed error over the final window still
/// counted as converged, in dB.
pub const CONVERGENCE_SLACK_DB: f64 = 1.0;

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| io_error(Path::new("<stdout>"), source))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| io_error(dir, source))
}

fn settings_hash(settings: &[(&str, String)]) -> String {
    let text: String = settings.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    content_hash([text.as_bytes()])
}

pub fn cmd_gradcheck(args: &GradcheckArgs, out: &mut dyn Write) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = ConfigFile::load(args.config.as_deref(), &["trials", "seed", "h0"])?;
    let trials = cfg.resolve("trials", args.trials, DEFAULT_TRIALS)?;
    let seed = cfg.resolve("seed", args.seed, DEFAULT_SEED)?;
    let h0 = cfg.resolve("h0", args.h0, FdConfig::DEFAULT_H0)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let fd = FdConfig::new(h0)?;

    let mut report = RunReport::default();
    report.push("command", "gradcheck");
    report.push("trials", trials);
    report.push("seed", seed);
    report.push("h0", h0);

    let checks: Vec<_> = algebra_checks(trials, seed)
        .into_iter()
        .chain(gradient_checks(trials, seed.wrapping_add(1), fd)?)
        .chain(qlms_checks(trials, seed.wrapping_add(2), fd)?)
        .collect();
    let mut failed = Vec::new();
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        report.push(
            c.name,
            format!(
                "max_error={:.3e} tolerance={:.0e} trials={} {verdict}",
                c.max_error, c.tolerance, c.trials
            ),
        );
        if !c.passed() {
            failed.push(c.name);
        }
    }
    report.push(
        "checks_passed",
        format!("{}/{}", checks.len() - failed.len(), checks.len()),
    );
    report.elapsed = start.elapsed();
    emit(out, &report.render())?;
    if failed.is_empty() {
        Ok(report)
    } else {
        Err(CliError::ChecksFailed {
            failed: failed.len(),
            names: failed.join("; "),
        })
    }
}

const PREDICT_KEYS: &[&str] = &[
    "input", "synth", "mu", "len", "step", "algo", "seed", "samples", "out",
];

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = ConfigFile::load(args.config.as_deref(), PREDICT_KEYS)?;
    let input: Option<PathBuf> = cfg.resolve_opt("input", args.input.clone())?;
    let synth = cfg.resolve("synth", args.synth.then_some(true), false)?;
    let mu = cfg.resolve("mu", args.mu, PREDICT_MU)?;
    let len = cfg.resolve("len", args.len, PREDICT_LEN)?;
    let step = cfg.resolve("step", args.step, PREDICT_STEP)?;
    let algo = cfg.resolve("algo", args.algo, Algo::Both)?;
    let seed = cfg.resolve("seed", args.seed, DEFAULT_SEED)?;
    let samples = cfg.resolve("samples", args.samples, SynthConfig::default().length)?;
    let out_dir = cfg.resolve("out", args.out.clone(), PathBuf::from("quatsig-predict"))?;

    let (raw, input_bytes, source) = match (&input, synth) {
        (Some(_), true) => return Err(CliError::Usage("--input and --synth are exclusive".into())),
        (None, false) => {
            return Err(CliError::Usage(
                "one of --input FILE or --synth is required".into(),
            ))
        }
        (Some(p), false) => {
            let bytes = fs::read(p).map_err(|source| {
                CliError::Signal(quatsig_core::SignalError::Io {
                    path: p.display().to_string(),
                    source,
                })
            })?;
            (load_series_csv(p)?, bytes, p.display().to_string())
        }
        (None, true) => {
            let sc = SynthConfig {
                length: samples,
                seed,
                ..SynthConfig::default()
            };
            let s = synth_wind(&sc)?;
            let desc = format!("{sc:?}");
            (s, desc.into_bytes(), "synthetic".to_string())
        }
    };
    let series = normalize_series(&raw)?;
    let algos: &[(Mode, &str)] = match algo {
        Algo::Qlms => &[(Mode::Plain, "qlms")],
        Algo::Aqlms => &[(Mode::Augmented, "aqlms")],
        Algo::Both => &[(Mode::Plain, "qlms"), (Mode::Augmented, "aqlms")],
    };
    let runs: Vec<(&str, PredictionRun)> = algos
        .iter()
        .map(|&(mode, name)| {
            let fc = FilterConfig::new(len, mu, mode, step)?;
            Ok((name, run_prediction(&series, &fc)?))
        })
        .collect::<Result<_, CliError>>()?;

    let settings = [
        ("algo", format!("{algo:?}").to_lowercase()),
        ("len", len.to_string()),
        ("mu", mu.to_string()),
        ("samples", series.len().to_string()),
        ("seed", seed.to_string()),
        ("source", source.clone()),
        ("step", step.to_string()),
    ];
    let mut report = RunReport::default();
    report.push("command", "predict");
    for (k, v) in &settings {
        report.push(*k, v);
    }
    report.push("input_sha256", content_hash([input_bytes.as_slice()]));
    report.push("config_sha256", settings_hash(&settings));
    report.push("steps", runs[0].1.cost.len());
    for (name, run) in &runs {
        report.push(format!("gain_{name}_db"), format!("{:.4}", run.gain_db));
        report.push(
            format!("final_mse_{name}_db"),
            format!("{:.4}", run.final_mse_db),
        );
    }

    ensure_dir(&out_dir)?;
    let series_path = out_dir.join("series.csv");
    save_series_csv(&series_path, &series)?;
    report.files.push(series_path);
    for (name, run) in &runs {
        let path = out_dir.join(format!("curve_{name}.csv"));
        run.learning_curve().write_csv(&path)?;
        report.files.push(path);
    }
    let pred_path = out_dir.join("predictions.csv");
    fs::write(&pred_path, predictions_csv(&runs)).map_err(|e| io_error(&pred_path, e))?;
    report.files.push(pred_path);

    report.elapsed = start.elapsed();
    report.write_to(&out_dir)?;
    emit(out, &report.render())?;
    Ok(report)
}

fn predictions_csv(runs: &[(&str, PredictionRun)]) -> String {
    let mut s = String::from("n,target_vx,target_vy,target_vz");
    for (name, _) in runs {
        write!(s, ",{name}_vx,{name}_vy,{name}_vz").unwrap();
    }
    s.push('\n');
    let first = &runs[0].1;
    for (t, (&n, target)) in first.index.iter().zip(&first.target).enumerate() {
        write!(s, "{n},{},{},{}", target.i(), target.j(), target.k()).unwrap();
        for (_, run) in runs {
            let p = run.prediction[t];
            write!(s, ",{},{},{}", p.i(), p.j(), p.k()).unwrap();
        }
        s.push('\n');
    }
    s
}

const BEAM_KEYS: &[&str] = &[
    "sensors",
    "spacing",
    "mu",
    "snapshots",
    "runs",
    "snr",
    "sir",
    "interferers",
    "seed",
    "out",
];

/// Converged when the final smoothed error is below 0 dB and has moved by
/// at most [`CONVERGENCE_SLACK_DB`] over the last window.
pub fn is_converged(curve: &LearningCurve, window: usize) -> bool {
    let n = curve.len();
    if n < 2 * window || window == 0 {
        return false;
    }
    let last = curve.rows[n - 1].smoothed_db;
    let prev = curve.rows[n - 1 - window].smoothed_db;
    last.is_finite()
        && prev.is_finite()
        && last < 0.0
        && (last - prev).abs() <= CONVERGENCE_SLACK_DB
}

fn doa_key(doa: f64) -> String {
    format!("null_depth_{doa}deg_db")
}

pub fn cmd_beamform(args: &BeamformArgs, out: &mut dyn Write) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = ConfigFile::load(args.config.as_deref(), BEAM_KEYS)?;
    let sensors = cfg.resolve("sensors", args.sensors, BEAM_SENSORS)?;
    let spacing = cfg.resolve("spacing", args.spacing, BEAM_SPACING)?;
    let mu = cfg.resolve("mu", args.mu, BEAM_MU)?;
    let snapshots = cfg.resolve("snapshots", args.snapshots, BEAM_SNAPSHOTS)?;
    let runs = cfg.resolve("runs", args.runs, BEAM_RUNS)?;
    let snr = cfg.resolve("snr", args.snr, BEAM_SNR_DB)?;
    let sir = cfg.resolve("sir", args.sir, BEAM_SIR_DB)?;
    let interferers = cfg.resolve(
        "interferers",
        args.interferers.clone(),
        DoaList(BEAM_INTERFERERS.to_vec()),
    )?;
    let seed = cfg.resolve("seed", args.seed, DEFAULT_SEED)?;
    let out_dir = cfg.resolve("out", args.out.clone(), PathBuf::from("quatsig-beamform"))?;
    if runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if !snr.is_finite() || !sir.is_finite() {
        return Err(CliError::Usage("--snr and --sir must be finite".into()));
    }

    let array = ArrayConfig::new(sensors, spacing)?;
    let scene = Scene::with_interferers(array, 0.0, &interferers.0, snr, sir, 0.0, 0.0, seed)?;
    let result = run_beamformer(&scene, mu, snapshots, runs)?;

    let settings = [
        ("interferers", interferers.to_string()),
        ("mu", mu.to_string()),
        ("runs", runs.to_string()),
        ("seed", seed.to_string()),
        ("sensors", sensors.to_string()),
        ("sir", sir.to_string()),
        ("snapshots", snapshots.to_string()),
        ("snr", snr.to_string()),
        ("spacing", spacing.to_string()),
    ];
    let mut report = RunReport::default();
    report.push("command", "beamform");
    for (k, v) in &settings {
        report.push(*k, v);
    }
    report.push("config_sha256", settings_hash(&settings));
    report.push("window", result.window);
    let converged = is_converged(&result.curve, result.window);
    match result.steady_state_db() {
        Some(db) => report.push("steady_state_error_db", format!("{db:.4}")),
        None => report.push("steady_state_error_db", "n/a"),
    }
    report.push("converged", converged);

    ensure_dir(&out_dir)?;
    let curve_path = out_dir.join("curve_beamform.csv");
    result.curve.write_csv(&curve_path)?;
    report.files.push(curve_path);

    if snapshots > 0 {
        let wr = result
            .response_weights()
            .expect("weights present after adaptation");
        for (src, doa) in scene.interferers().zip(&interferers.0) {
            let depth = relative_response_db(&array, &wr, src, scene.desired())?;
            report.push(doa_key(*doa), format!("{depth:.4}"));
        }
        let pattern = beampattern(&array, &wr, 0.0, 0.0)?;
        let pattern_path = out_dir.join("beampattern.csv");
        write_pattern_csv(&pattern_path, &pattern)?;
        report.files.push(pattern_path);
    }

    report.elapsed = start.elapsed();
    report.write_to(&out_dir)?;
    emit(out, &report.render())?;
    Ok(report)
}
