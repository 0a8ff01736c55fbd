//! Three-component velocity series as pure quaternions (`v_x i + v_y j + v_z k`).
//!
//! Covers CSV ingestion (`t,vx,vy,vz`), mean removal and scaling, and a
//! seeded synthetic wind-like generator used when no measured data is at
//! hand.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::quat::Quaternion;

pub const VELOCITY_HEADER: &str = "t,vx,vy,vz";

/// Variance of the (x, y, z) components relative to x in synthetic series.
pub const COMPONENT_VARIANCE_RATIO: [f64; 3] = [1.0, 0.6, 0.3];

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: time {t} does not increase (previous {prev})")]
    NonMonotonicTime { line: usize, t: f64, prev: f64 },
    #[error("need at least 2 rows, found {rows}")]
    TooFewRows { rows: usize },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid synthesis configuration: {0}")]
    Config(String),
}

/// Uniformly sampled pure-quaternion series.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    samples: Vec<Quaternion>,
    dt: f64,
}

impl QSeries {
    pub fn new(samples: Vec<Quaternion>, dt: f64) -> Result<Self, SignalError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SignalError::InvalidSeries(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if let Some(n) = samples.iter().position(|q| q.re() != 0.0 || !q.is_finite()) {
            return Err(SignalError::InvalidSeries(format!(
                "sample {n} is not a finite pure quaternion"
            )));
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[Quaternion] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reads a velocity CSV. The `t,vx,vy,vz` header line is skipped when
/// present; line numbers in errors are physical file lines (1-based).
pub fn load_series_csv(path: &Path) -> Result<QSeries, SignalError> {
    let text = fs::read_to_string(path).map_err(|source| SignalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<QSeries, SignalError> {
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || (line_no == 1 && line == VELOCITY_HEADER) {
            continue;
        }
        let bad = |reason: String| SignalError::MalformedRow {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let mut vals = [0.0; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("`{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(bad(format!("`{f}` is not finite")));
            }
        }
        if let Some(&prev) = times.last() {
            if vals[0] <= prev {
                return Err(SignalError::NonMonotonicTime {
                    line: line_no,
                    t: vals[0],
                    prev,
                });
            }
        }
        times.push(vals[0]);
        samples.push(Quaternion::pure(vals[1], vals[2], vals[3]).map_err(|e| bad(e.to_string()))?);
    }
    if samples.len() < 2 {
        return Err(SignalError::TooFewRows {
            rows: samples.len(),
        });
    }
    QSeries::new(samples, times[1] - times[0])
}

/// Writes `t = n·dt` and the three components with 17 significant digits.
pub fn save_series_csv(path: &Path, series: &QSeries) -> Result<(), SignalError> {
    let io_err = |source| SignalError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    (|| -> io::Result<()> {
        writeln!(out, "{VELOCITY_HEADER}")?;
        for (n, q) in series.samples.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                n as f64 * series.dt,
                q.i(),
                q.j(),
                q.k()
            )?;
        }
        out.flush()
    })()
    .map_err(io_err)
}

/// Overall deviation below which a series is treated as constant.
pub const DEGENERATE_DEVIATION: f64 = 1e-12;

/// Removes the per-component mean and divides by the shared deviation
/// `sqrt(mean |s − mean|²)`. A (numerically) constant series is returned
/// centred but unscaled.
pub fn normalize_series(s: &QSeries) -> Result<QSeries, SignalError> {
    let n = s.len();
    if n < 2 {
        return Err(SignalError::InvalidSeries(format!(
            "normalization needs at least 2 samples, found {n}"
        )));
    }
    let mut mean = [0.0; 3];
    for q in &s.samples {
        mean[0] += q.i();
        mean[1] += q.j();
        mean[2] += q.k();
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred: Vec<[f64; 3]> = s
        .samples
        .iter()
        .map(|q| [q.i() - mean[0], q.j() - mean[1], q.k() - mean[2]])
        .collect();
    let dev = (centred
        .iter()
        .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let scale = if dev < DEGENERATE_DEVIATION { 1.0 } else { dev };
    let samples = centred
        .iter()
        .map(|v| Quaternion::pure(v[0] / scale, v[1] / scale, v[2] / scale))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| SignalError::InvalidSeries(e.to_string()))?;
    QSeries::new(samples, s.dt)
}

/// Synthetic turbulence-like velocity generator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub length: usize,
    pub seed: u64,
    pub dt: f64,
    /// Sinusoids per component.
    pub oscillators: usize,
    /// Frequency band in Hz, inside `(0, 0.5/dt)`.
    pub band: (f64, f64),
    /// Power of the AR(1) noise relative to the tonal part.
    pub noise_ratio: f64,
    /// AR(1) pole of the noise part, in `[0, 1)`.
    pub ar_coeff: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 10_000,
            seed: 1,
            dt: 1.0,
            oscillators: 4,
            band: (0.002, 0.02),
            noise_ratio: 0.1,
            ar_coeff: 0.95,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        let err = |m: String| Err(SignalError::Config(m));
        if self.length == 0 {
            return err("length must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        let nyquist = 0.5 / self.dt;
        let (lo, hi) = self.band;
        if !(lo > 0.0 && lo <= hi && hi < nyquist) {
            return err(format!("band ({lo}, {hi}) must lie inside (0, {nyquist})"));
        }
        if self.oscillators == 0 && self.noise_ratio == 0.0 {
            return err("need at least one oscillator or a noise part".into());
        }
        if !(self.noise_ratio >= 0.0 && self.noise_ratio.is_finite()) {
            return err(format!(
                "noise ratio must be non-negative, got {}",
                self.noise_ratio
            ));
        }
        if !(0.0..1.0).contains(&self.ar_coeff) {
            return err(format!(
                "AR coefficient must lie in [0, 1), got {}",
                self.ar_coeff
            ));
        }
        Ok(())
    }
}

/// One sinusoid `cos(2π f t + phase)` of the tonal part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub freq: f64,
    pub phase: f64,
}

fn draw_tones(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> [Vec<Tone>; 3] {
    let mut comp = || {
        (0..cfg.oscillators)
            .map(|_| Tone {
                freq: rng.gen_range(cfg.band.0..=cfg.band.1),
                phase: rng.gen_range(0.0..2.0 * PI),
            })
            .collect::<Vec<_>>()
    };
    [comp(), comp(), comp()]
}

/// Tones used by [`synth_wind`] for this configuration.
pub fn tone_plan(cfg: &SynthConfig) -> Result<[Vec<Tone>; 3], SignalError> {
    cfg.validate()?;
    Ok(draw_tones(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)))
}

/// Per component: unit-power random-phase sinusoids plus unit-variance
/// AR(1) noise weighted by `noise_ratio`, scaled so the component variances
/// follow [`COMPONENT_VARIANCE_RATIO`].
pub fn synth_wind(cfg: &SynthConfig) -> Result<QSeries, SignalError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tones = draw_tones(cfg, &mut rng);

    let tone_amp = if cfg.oscillators > 0 {
        (2.0 / cfg.oscillators as f64).sqrt()
    } else {
        0.0
    };
    let tone_power = if cfg.oscillators > 0 { 1.0 } else { 0.0 };
    let total = tone_power + cfg.noise_ratio;
    let innovation = (1.0 - cfg.ar_coeff * cfg.ar_coeff).sqrt();

    let mut comps = [
        vec![0.0; cfg.length],
        vec![0.0; cfg.length],
        vec![0.0; cfg.length],
    ];
    for (c, out) in comps.iter_mut().enumerate() {
        let gain = (COMPONENT_VARIANCE_RATIO[c] / total).sqrt();
        let noise_gain = cfg.noise_ratio.sqrt();
        // Stationary start for the AR(1) state.
        let mut ar: f64 = rng.sample(StandardNormal);
        for (n, v) in out.iter_mut().enumerate() {
            let t = n as f64 * cfg.dt;
            let tonal: f64 = tones[c]
                .iter()
                .map(|tone| (2.0 * PI * tone.freq * t + tone.phase).cos())
                .sum::<f64>()
                * tone_amp;
            let z: f64 = rng.sample(StandardNormal);
            ar = cfg.ar_coeff * ar + innovation * z;
            *v = gain * (tonal + noise_gain * ar);
        }
    }
    let samples = (0..cfg.length)
        .map(|n| Quaternion::pure(comps[0][n], comps[1][n], comps[2][n]))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| SignalError::Config(e.to_string()))?;
    QSeries::new(samples, cfg.dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::pure(x, y, z).unwrap()
    }

    #[test]
    fn parse_direct_mapping() {
        let s = parse_series("t,vx,vy,vz\n0,1,2,3\n1,0,0,0\n").unwrap();
        assert_eq!(s.samples(), &[p(1.0, 2.0, 3.0), p(0.0, 0.0, 0.0)]);
        assert_eq!(s.dt(), 1.0);
        let crlf = parse_series("t,vx,vy,vz\r\n0,1,2,3\r\n0.5,0,0,0\r\n").unwrap();
        assert_eq!(crlf.dt(), 0.5);
    }

    #[test]
    fn parse_errors_name_lines() {
        assert!(matches!(
            parse_series("0,1,2\n1,0,0,0\n"),
            Err(SignalError::MalformedRow { line: 1, .. })
        ));
        assert!(matches!(
            parse_series("t,vx,vy,vz\n0,1,2,3\n1,x,0,0\n"),
            Err(SignalError::MalformedRow { line: 3, .. })
        ));
        assert!(matches!(
            parse_series("t,vx,vy,vz\n0,1,2,3\n0,0,0,0\n"),
            Err(SignalError::NonMonotonicTime { line: 3, .. })
        ));
        assert!(matches!(
            parse_series("t,vx,vy,vz\n0,1,2,3\n"),
            Err(SignalError::TooFewRows { rows: 1 })
        ));
        assert!(matches!(
            load_series_csv(Path::new("/nonexistent/velocity.csv")),
            Err(SignalError::Io { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let s = QSeries::new(vec![p(1.0, 0.0, 0.0), p(3.0, 0.0, 0.0)], 1.0).unwrap();
        let n = normalize_series(&s).unwrap();
        assert_eq!(n.samples(), &[p(-1.0, 0.0, 0.0), p(1.0, 0.0, 0.0)]);

        let c = QSeries::new(vec![p(0.5, -2.0, 1.0); 10], 1.0).unwrap();
        let n = normalize_series(&c).unwrap();
        assert!(n.samples().iter().all(|q| q.norm() == 0.0));

        let one = QSeries::new(vec![p(1.0, 0.0, 0.0)], 1.0).unwrap();
        assert!(normalize_series(&one).is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(QSeries::new(vec![Quaternion::ONE], 1.0).is_err());
        assert!(QSeries::new(vec![], 0.0).is_err());
    }

    #[test]
    fn synth_config_errors() {
        let bad = |f: fn(&mut SynthConfig)| {
            let mut c = SynthConfig::default();
            f(&mut c);
            synth_wind(&c)
        };
        assert!(matches!(bad(|c| c.length = 0), Err(SignalError::Config(_))));
        assert!(bad(|c| c.band = (0.0, 0.1)).is_err());
        assert!(bad(|c| c.band = (0.1, 0.5)).is_err());
        assert!(bad(|c| c.band = (0.2, 0.1)).is_err());
        assert!(bad(|c| c.ar_coeff = 1.0).is_err());
    }

    #[test]
    fn synth_is_deterministic_and_pure() {
        let cfg = SynthConfig {
            length: 2000,
            ..SynthConfig::default()
        };
        let a = synth_wind(&cfg).unwrap();
        let b = synth_wind(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.samples().iter().all(|q| q.re() == 0.0));
        let other = synth_wind(&SynthConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a, other);
    }
}
