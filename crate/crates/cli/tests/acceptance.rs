//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use quatsig_cli::commands::{
    BEAM_INTERFERERS, BEAM_MU, BEAM_RUNS, BEAM_SENSORS, BEAM_SIR_DB, BEAM_SNAPSHOTS, BEAM_SNR_DB,
    BEAM_SPACING, PREDICT_LEN, PREDICT_MU, PREDICT_STEP,
};
use quatsig_core::beam::{relative_response_db, Snapshots};
use quatsig_core::{
    grad_q, grad_qstar, grad_wstar, normalize_series, run_beamformer, run_prediction,
    simulate_snapshots, synth_wind, ArrayConfig, FdConfig, FilterConfig, Mode, QVector, Quaternion,
    Scene, SynthConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn rq(rng: &mut ChaCha8Rng, s: f64) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-s..s),
        rng.gen_range(-s..s),
        rng.gen_range(-s..s),
        rng.gen_range(-s..s),
    )
    .unwrap()
}

fn rv(rng: &mut ChaCha8Rng, len: usize) -> QVector {
    QVector::new((0..len).map(|_| rq(rng, 1.0)).collect()).unwrap()
}

/// Hamilton product written out from i² = j² = k² = ijk = −1.
fn ham(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

fn diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = rq(&mut rng, 10.0);
        let q = rq(&mut rng, 10.0);
        let pq = p * q;
        worst = worst.max(diff(pq.to_array(), ham(p.to_array(), q.to_array())));
        let rhs = p.norm() * q.norm();
        worst = worst.max((pq.norm() - rhs).abs() / rhs);
        worst = worst.max(pq.conj().max_abs_diff(q.conj() * p.conj()));
        worst = worst.max((p + i * p * i + j * p * j + k * p * k).max_abs_diff(p.conj() * -2.0));
        let [a, ..] = p.to_array();
        worst = worst
            .max((p - i * p * i - j * p * j - k * p * k).max_abs_diff(Quaternion::ONE * (4.0 * a)));
        let pc = p.conj().to_array();
        let inv_sum = p.involution(quatsig_core::Axis::I)
            + p.involution(quatsig_core::Axis::J)
            + p.involution(quatsig_core::Axis::K);
        worst = worst.max(diff(pc, ((inv_sum - p) * 0.5).to_array()));
    }
    let t = start.elapsed();
    check(
        worst <= 1e-12 && t < Duration::from_secs(1),
        format!("1000 pairs, max error {worst:.2e} <= 1e-12, {t:.2?}"),
        format!("max error {worst:.2e}, runtime {t:.2?}"),
    )
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let cfg = FdConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = rq(&mut rng, 3.0);
        let e1 = grad_q(|x| x, q, cfg).map_err(|e| e.to_string())?;
        let e2 = grad_qstar(|x| x, q, cfg).map_err(|e| e.to_string())?;
        let e3 = grad_qstar(|x| x * x.conj(), q, cfg).map_err(|e| e.to_string())?;
        worst = worst
            .max(e1.max_abs_diff(Quaternion::ONE))
            .max(e2.max_abs_diff(Quaternion::ONE * -0.5))
            .max(e3.max_abs_diff(q * 0.5));
    }
    let t = start.elapsed();
    check(
        worst <= 1e-6 && t < Duration::from_secs(1),
        format!("100 points, max error {worst:.2e} <= 1e-6, {t:.2?}"),
        format!("max error {worst:.2e}, runtime {t:.2?}"),
    )
}

fn qlms_gradient() -> Outcome {
    let start = Instant::now();
    let cfg = FdConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let dot = |w: &QVector, x: &QVector| -> Quaternion {
        w.iter().zip(x.iter()).map(|(a, b)| *a * *b).sum()
    };
    let mut worst: f64 = 0.0;
    for len in [1usize, 2, 4] {
        for _ in 0..100 {
            let (w, x, d) = (rv(&mut rng, len), rv(&mut rng, len), rq(&mut rng, 1.0));
            let g = grad_wstar(
                |v| {
                    let e = d - dot(v, &x);
                    e * e.conj()
                },
                &w,
                cfg,
            )
            .map_err(|e| e.to_string())?;
            let e = d - dot(&w, &x);
            for m in 0..len {
                worst = worst.max(g[m].max_abs_diff(e * x[m].conj() * -0.5));
            }
        }
    }
    let mut worst_terms: f64 = 0.0;
    for len in [1usize, 3] {
        for _ in 0..100 {
            let (w, x, d) = (rv(&mut rng, len), rv(&mut rng, len), rq(&mut rng, 1.0));
            let y = dot(&w, &x);
            // x^H w* = (w^T x)*
            let t2 = grad_wstar(|v| d * dot(v, &x).conj(), &w, cfg).map_err(|e| e.to_string())?;
            let t3 = grad_wstar(|v| dot(v, &x) * d.conj(), &w, cfg).map_err(|e| e.to_string())?;
            let t4 = grad_wstar(|v| dot(v, &x) * dot(v, &x).conj(), &w, cfg)
                .map_err(|e| e.to_string())?;
            for m in 0..len {
                let xc = x[m].conj();
                worst_terms = worst_terms
                    .max(t2[m].max_abs_diff(d * xc))
                    .max(t3[m].max_abs_diff(d * xc * -0.5))
                    .max(t4[m].max_abs_diff(y * xc * 0.5));
            }
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-5 && worst_terms <= 1e-5 && t < Duration::from_secs(5),
        format!("cost gradient {worst:.2e}, term gradients {worst_terms:.2e} <= 1e-5, {t:.2?}"),
        format!("cost gradient {worst:.2e}, term gradients {worst_terms:.2e}, runtime {t:.2?}"),
    )
}

fn prediction() -> Outcome {
    let start = Instant::now();
    let raw = synth_wind(&SynthConfig::default()).map_err(|e| e.to_string())?;
    if raw.len() != 10_000 {
        return Err(format!("series has {} samples", raw.len()));
    }
    let series = normalize_series(&raw).map_err(|e| e.to_string())?;
    let mut gains = Vec::new();
    let mut mses = Vec::new();
    for mode in [Mode::Plain, Mode::Augmented] {
        let cfg = FilterConfig::new(PREDICT_LEN, PREDICT_MU, mode, PREDICT_STEP)
            .map_err(|e| e.to_string())?;
        let run = run_prediction(&series, &cfg).map_err(|e| e.to_string())?;
        let tail = run.cost.len() / 4;
        let from = run.cost.len() - tail;
        let sig: f64 = run.target[from..].iter().map(|s| s.norm_sqr()).sum();
        let err: f64 = run.target[from..]
            .iter()
            .zip(&run.prediction[from..])
            .map(|(s, p)| (*s - *p).norm_sqr())
            .sum();
        let gain = 10.0 * (sig / err).log10();
        if (gain - run.gain_db).abs() > 1e-9 {
            return Err(format!(
                "reported gain {} vs recomputed {gain}",
                run.gain_db
            ));
        }
        gains.push(gain);
        mses.push(10.0 * (err / tail as f64).log10());
    }
    let t = start.elapsed();
    check(
        gains.iter().all(|g| *g >= 3.0) && mses[1] <= mses[0] + 1.0 && t < Duration::from_secs(10),
        format!(
            "gains QLMS {:.2} dB, AQLMS {:.2} dB; MSE {:.2} vs {:.2} dB, {t:.2?}",
            gains[0], gains[1], mses[0], mses[1]
        ),
        format!("gains {gains:?}, MSE {mses:?}, runtime {t:.2?}"),
    )
}

fn default_scene(seed: u64) -> Scene {
    let arr = ArrayConfig::new(BEAM_SENSORS, BEAM_SPACING).unwrap();
    Scene::with_interferers(
        arr,
        0.0,
        &BEAM_INTERFERERS,
        BEAM_SNR_DB,
        BEAM_SIR_DB,
        0.0,
        0.0,
        seed,
    )
    .unwrap()
}

/// Least-squares solve of `min Σ|d − Σ w_m x_m|²` as a real 4M system.
fn wiener_weights(snaps: &Snapshots) -> QVector {
    let m = snaps.inputs[0].len();
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let dim = 4 * m;
    let mut r = DMatrix::<f64>::zeros(dim, dim);
    let mut p = DVector::<f64>::zeros(dim);
    for (x, d) in snaps.inputs.iter().zip(&snaps.reference) {
        let mut a = DMatrix::<f64>::zeros(4, dim);
        for s in 0..m {
            for (k, u) in basis.iter().enumerate() {
                let col = (*u * x[s]).to_array();
                for row in 0..4 {
                    a[(row, 4 * s + k)] = col[row];
                }
            }
        }
        r += a.transpose() * &a;
        p += a.transpose() * DVector::from_row_slice(&d.to_array());
    }
    let sol = r.cholesky().expect("positive definite").solve(&p);
    QVector::new(
        (0..m)
            .map(|s| {
                Quaternion::new(sol[4 * s], sol[4 * s + 1], sol[4 * s + 2], sol[4 * s + 3]).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn beamforming() -> (Outcome, Outcome) {
    let start = Instant::now();
    let scene = default_scene(1);
    let run = match run_beamformer(&scene, BEAM_MU, BEAM_SNAPSHOTS, BEAM_RUNS) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err("no converged beamformer".into())),
    };
    let t = start.elapsed();
    let ss = run.steady_state_db().unwrap_or(f64::NAN);
    let c5 = check(
        (ss - -10.0).abs() <= 3.0 && t < Duration::from_secs(300),
        format!("{BEAM_RUNS} runs x {BEAM_SNAPSHOTS} snapshots: steady state {ss:.2} dB (target -10 +/- 3), {t:.2?}"),
        format!("steady state {ss:.2} dB, runtime {t:.2?}"),
    );

    let arr = scene.array;
    let desired = *scene.desired();
    let lms = run.response_weights().unwrap();
    let wiener = wiener_weights(&simulate_snapshots(&default_scene(7), 20_000)).conj();
    let mut lines = Vec::new();
    let mut ok = true;
    for (src, doa) in scene.interferers().zip(BEAM_INTERFERERS) {
        let l = relative_response_db(&arr, &lms, src, &desired).unwrap();
        let w = relative_response_db(&arr, &wiener, src, &desired).unwrap();
        ok &= l <= -15.0 && w <= -15.0;
        lines.push(format!("{doa} deg: LMS {l:.1} dB, Wiener {w:.1} dB"));
    }
    let msg = lines.join("; ");
    (c5, check(ok, format!("{msg} (<= -15)"), msg))
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_quatsig"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Result<(), String> {
    for n in names {
        let (x, y) = (fs::read(a.join(n)), fs::read(b.join(n)));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => return Err(format!("{n} differs between reruns")),
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = |s: &str| tmp.path().join(s);

    let g1 = run_cli(&["gradcheck", "--seed", "7", "--trials", "20"], "1")?;
    let g2 = run_cli(&["gradcheck", "--seed", "7", "--trials", "20"], "2")?;
    if g1 != g2 {
        return Err("gradcheck output differs".into());
    }

    for (name, threads) in [("p1", "1"), ("p2", "3")] {
        let out = dir(name);
        run_cli(
            &[
                "predict",
                "--synth",
                "--seed",
                "5",
                "--samples",
                "3000",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        )?;
    }
    same_files(
        &dir("p1"),
        &dir("p2"),
        &[
            "series.csv",
            "curve_qlms.csv",
            "curve_aqlms.csv",
            "predictions.csv",
        ],
    )?;

    for (name, threads) in [("b1", "1"), ("b2", "3")] {
        let out = dir(name);
        run_cli(
            &[
                "beamform",
                "--seed",
                "42",
                "--runs",
                "10",
                "--snapshots",
                "4000",
                "--mu",
                "2e-5",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        )?;
    }
    same_files(
        &dir("b1"),
        &dir("b2"),
        &["curve_beamform.csv", "beampattern.csv"],
    )?;
    Ok("gradcheck, predict and beamform reruns are byte-identical (1 vs 3 threads)".into())
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "algebra identities", algebra()),
        (2, "gradient identities", gradients()),
        (3, "QLMS gradient oracle", qlms_gradient()),
        (4, "prediction with QLMS/AQLMS", prediction()),
    ];
    let (c5, c6) = beamforming();
    results.push((5, "beamformer steady-state error", c5));
    results.push((6, "interferer nulls", c6));
    results.push((7, "CLI determinism", determinism()));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS [{n}] {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {msg}");
            }
        }
    }
    println!(
        "acceptance: {}/{} passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
