//! Crossed-dipole uniform linear array: quaternion steering vectors,
//! snapshot simulation and the reference-signal QLMS beamformer.
//!
//! Sensors sit on the y axis with spacing `d`; each location carries an
//! x- and a y-oriented dipole. Sources arrive from the y-z plane, so the
//! azimuth is one of `φ = ±π/2` and the elevation `θ ∈ [0, π/2]`.
//!
//! The complex unit of the per-dipole phasors is embedded as the quaternion
//! unit `j`, and the two sub-arrays combine as `S_q = S_x + i·S_y` with `i`
//! on the left.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::adaptive::{FilterConfig, FilterError, FilterState, Mode};
use crate::curve::{CurveError, LearningCurve};
use crate::quat::{QVector, Quaternion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("azimuth must be exactly +π/2 or −π/2, got {0}")]
    InvalidPhi(f64),
    #[error("{name} = {value} is outside {range}")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("length mismatch: weights {weights} vs steering {steering}")]
    LengthMismatch { weights: usize, steering: usize },
    #[error("run {run}: {source}")]
    Run { run: usize, source: FilterError },
}

/// Sign of the azimuth `φ = ±π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiBranch {
    Plus,
    Minus,
}

impl PhiBranch {
    pub fn from_angle(phi: f64) -> Result<Self, BeamError> {
        if phi == FRAC_PI_2 {
            Ok(Self::Plus)
        } else if phi == -FRAC_PI_2 {
            Ok(Self::Minus)
        } else {
            Err(BeamError::InvalidPhi(phi))
        }
    }

    pub fn angle(self) -> f64 {
        self.sign() * FRAC_PI_2
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    sensors: usize,
    spacing: f64,
}

impl ArrayConfig {
    /// `spacing` is the inter-sensor distance in wavelengths (`d/λ`).
    pub fn new(sensors: usize, spacing: f64) -> Result<Self, BeamError> {
        if sensors == 0 {
            return Err(BeamError::Scene(
                "array needs at least one sensor pair".into(),
            ));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(BeamError::Scene(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { sensors, spacing })
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<(), BeamError> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(BeamError::AngleOutOfRange { name, value, range })
    }
}

fn check_theta(theta: f64) -> Result<(), BeamError> {
    check_range("theta", theta, 0.0, FRAC_PI_2, "[0, π/2]")
}

/// Element `m` is `exp(−j·2π·m·(d/λ)·sinθ·sinφ)`.
pub fn spatial_steering(
    array: &ArrayConfig,
    theta: f64,
    phi: f64,
) -> Result<Vec<Complex64>, BeamError> {
    let branch = PhiBranch::from_angle(phi)?;
    check_theta(theta)?;
    Ok(spatial_steering_branch(array, theta, branch))
}

fn spatial_steering_branch(array: &ArrayConfig, theta: f64, branch: PhiBranch) -> Vec<Complex64> {
    let psi = 2.0 * PI * array.spacing * theta.sin() * branch.sign();
    (0..array.sensors)
        .map(|m| Complex64::from_polar(1.0, -(m as f64) * psi))
        .collect()
}

/// `[−cosγ, cosθ·sinγ·e^{jη}]` for `φ = π/2`, negated for `φ = −π/2`.
pub fn polarization_coherent(
    theta: f64,
    phi: f64,
    gamma: f64,
    eta: f64,
) -> Result<[Complex64; 2], BeamError> {
    let branch = PhiBranch::from_angle(phi)?;
    check_theta(theta)?;
    check_range("gamma", gamma, 0.0, FRAC_PI_2, "[0, π/2]")?;
    check_range("eta", eta, -PI, PI, "[−π, π]")?;
    Ok(polarization_branch(theta, branch, gamma, eta))
}

fn polarization_branch(theta: f64, branch: PhiBranch, gamma: f64, eta: f64) -> [Complex64; 2] {
    let s = branch.sign();
    [
        Complex64::new(-s * gamma.cos(), 0.0),
        Complex64::from_polar(s * theta.cos() * gamma.sin(), eta),
    ]
}

/// Embeds `re + im·j` (complex) as the quaternion `re + im·j`.
pub fn embed(z: Complex64) -> Quaternion {
    Quaternion::from_complex_j(z.re, z.im).expect("finite complex value")
}

/// A far-field narrowband source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceDesc {
    pub theta: f64,
    pub phi: PhiBranch,
    pub gamma: f64,
    pub eta: f64,
    pub power: f64,
    pub desired: bool,
}

impl SourceDesc {
    pub fn new(
        theta: f64,
        phi: f64,
        gamma: f64,
        eta: f64,
        power: f64,
        desired: bool,
    ) -> Result<Self, BeamError> {
        let phi = PhiBranch::from_angle(phi)?;
        check_theta(theta)?;
        check_range("gamma", gamma, 0.0, FRAC_PI_2, "[0, π/2]")?;
        check_range("eta", eta, -PI, PI, "[−π, π]")?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(BeamError::Scene(format!(
                "source power must be positive, got {power}"
            )));
        }
        Ok(Self {
            theta,
            phi,
            gamma,
            eta,
            power,
            desired,
        })
    }

    /// Maps a signed direction in degrees to `θ = |angle|`,
    /// `φ = sign(angle)·π/2` (zero maps to `+π/2`).
    pub fn from_signed_doa(
        doa_deg: f64,
        gamma: f64,
        eta: f64,
        power: f64,
        desired: bool,
    ) -> Result<Self, BeamError> {
        let (theta, phi) = signed_doa(doa_deg);
        Self::new(theta, phi, gamma, eta, power, desired)
    }
}

/// `(θ, φ)` for a signed direction in degrees.
pub fn signed_doa(doa_deg: f64) -> (f64, f64) {
    let phi = if doa_deg < 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 };
    (doa_deg.abs().to_radians(), phi)
}

/// `S_q = S_x + i·S_y` for one source.
pub fn quaternion_steering(array: &ArrayConfig, src: &SourceDesc) -> QVector {
    steering_from_parts(array, src.theta, src.phi, src.gamma, src.eta)
}

fn steering_from_parts(
    array: &ArrayConfig,
    theta: f64,
    phi: PhiBranch,
    gamma: f64,
    eta: f64,
) -> QVector {
    let sc = spatial_steering_branch(array, theta, phi);
    let [px, py] = polarization_branch(theta, phi, gamma, eta);
    let elems = sc
        .iter()
        .map(|s| embed(px * s) + Quaternion::I * embed(py * s))
        .collect();
    QVector::new(elems).expect("finite steering vector")
}

/// `S_q` for an explicit direction and polarization.
pub fn steering_at(
    array: &ArrayConfig,
    theta: f64,
    phi: f64,
    gamma: f64,
    eta: f64,
) -> Result<QVector, BeamError> {
    let src = SourceDesc::new(theta, phi, gamma, eta, 1.0, false)?;
    Ok(quaternion_steering(array, &src))
}

/// `r = wᴴ S_q = Σ_m w_m* S_q,m`.
pub fn array_response(w: &QVector, sq: &QVector) -> Result<Quaternion, BeamError> {
    if w.len() != sq.len() {
        return Err(BeamError::LengthMismatch {
            weights: w.len(),
            steering: sq.len(),
        });
    }
    Ok(w.iter().zip(sq).map(|(w, s)| w.conj() * *s).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub array: ArrayConfig,
    pub sources: Vec<SourceDesc>,
    /// Total noise variance per sensor, split evenly over the four
    /// quaternion components.
    pub noise_power: f64,
    pub seed: u64,
}

impl Scene {
    pub fn new(
        array: ArrayConfig,
        sources: Vec<SourceDesc>,
        noise_power: f64,
        seed: u64,
    ) -> Result<Self, BeamError> {
        let desired = sources.iter().filter(|s| s.desired).count();
        if desired != 1 {
            return Err(BeamError::Scene(format!(
                "exactly one desired source required, found {desired}"
            )));
        }
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(BeamError::Scene(format!(
                "noise power must be non-negative, got {noise_power}"
            )));
        }
        Ok(Self {
            array,
            sources,
            noise_power,
            seed,
        })
    }

    /// Unit-power desired source plus interferers at signed DOAs; all share
    /// the polarization `(gamma, eta)`. `SNR = P_d/σ²`, `SIR = P_d/P_int`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_interferers(
        array: ArrayConfig,
        desired_doa_deg: f64,
        interferer_doas_deg: &[f64],
        snr_db: f64,
        sir_db: f64,
        gamma: f64,
        eta: f64,
        seed: u64,
    ) -> Result<Self, BeamError> {
        let mut sources = vec![SourceDesc::from_signed_doa(
            desired_doa_deg,
            gamma,
            eta,
            1.0,
            true,
        )?];
        let p_int = 10f64.powf(-sir_db / 10.0);
        for &doa in interferer_doas_deg {
            sources.push(SourceDesc::from_signed_doa(doa, gamma, eta, p_int, false)?);
        }
        Self::new(array, sources, 10f64.powf(-snr_db / 10.0), seed)
    }

    pub fn desired(&self) -> &SourceDesc {
        self.sources
            .iter()
            .find(|s| s.desired)
            .expect("validated scene")
    }

    pub fn interferers(&self) -> impl Iterator<Item = &SourceDesc> {
        self.sources.iter().filter(|s| !s.desired)
    }
}

/// Infinite stream of `(snapshot, reference)` pairs for one scene and RNG
/// sub-stream.
pub struct SnapshotStream {
    steering: Vec<QVector>,
    amplitude: Vec<f64>,
    desired: usize,
    noise_std: f64,
    rng: ChaCha8Rng,
    symbols: Vec<Quaternion>,
}

impl SnapshotStream {
    /// `stream` selects an independent sub-stream of the scene seed.
    pub fn new(scene: &Scene, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        rng.set_stream(stream);
        Self {
            steering: scene
                .sources
                .iter()
                .map(|s| quaternion_steering(&scene.array, s))
                .collect(),
            amplitude: scene.sources.iter().map(|s| s.power.sqrt()).collect(),
            desired: scene
                .sources
                .iter()
                .position(|s| s.desired)
                .expect("validated scene"),
            noise_std: (scene.noise_power / 4.0).sqrt(),
            rng,
            symbols: vec![Quaternion::ZERO; scene.sources.len()],
        }
    }

    /// Writes the next snapshot into `x` and returns the reference symbol.
    pub fn next_into(&mut self, x: &mut [Quaternion]) -> Quaternion {
        let unit = std::f64::consts::FRAC_1_SQRT_2;
        for (sym, amp) in self.symbols.iter_mut().zip(&self.amplitude) {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            *sym = embed(Complex64::new(re, im) * (unit * amp));
        }
        for (m, xm) in x.iter_mut().enumerate() {
            let mut acc = Quaternion::ZERO;
            for (sq, sym) in self.steering.iter().zip(&self.symbols) {
                acc += sq[m] * *sym;
            }
            if self.noise_std > 0.0 {
                let mut n = [0.0; 4];
                for v in n.iter_mut() {
                    *v = self.noise_std * self.rng.sample::<f64, _>(StandardNormal);
                }
                acc += Quaternion::from_array(n).expect("finite noise");
            }
            *xm = acc;
        }
        self.symbols[self.desired]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshots {
    pub inputs: Vec<QVector>,
    pub reference: Vec<Quaternion>,
}

/// `N` snapshots `x[n] = Σ_src S_q(src)·s_src[n] + noise` with the desired
/// symbols as reference. Symbols are circular complex Gaussian in the
/// `(1, j)` plane with the source power as variance.
pub fn simulate_snapshots(scene: &Scene, n: usize) -> Snapshots {
    simulate_stream(scene, 0, n)
}

fn simulate_stream(scene: &Scene, stream: u64, n: usize) -> Snapshots {
    let mut gen = SnapshotStream::new(scene, stream);
    let mut out = Snapshots::default();
    let mut x = vec![Quaternion::ZERO; scene.array.sensors];
    for _ in 0..n {
        let d = gen.next_into(&mut x);
        out.inputs
            .push(QVector::new(x.clone()).expect("finite snapshot"));
        out.reference.push(d);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternPoint {
    pub theta_deg: f64,
    pub phi: PhiBranch,
    pub response_db: f64,
}

/// Grid step of [`beampattern`] in degrees.
pub const PATTERN_STEP_DEG: f64 = 0.5;

/// `20·log10 |wᴴ S_q(θ, φ)|` on a θ grid for both azimuth branches, with
/// the polarization of `(gamma, eta)`.
pub fn beampattern(
    array: &ArrayConfig,
    w: &QVector,
    gamma: f64,
    eta: f64,
) -> Result<Vec<PatternPoint>, BeamError> {
    let steps = (90.0 / PATTERN_STEP_DEG).round() as usize;
    let mut out = Vec::with_capacity(2 * (steps + 1));
    for phi in [PhiBranch::Plus, PhiBranch::Minus] {
        for s in 0..=steps {
            let theta_deg = s as f64 * PATTERN_STEP_DEG;
            let sq = steering_from_parts(array, theta_deg.to_radians(), phi, gamma, eta);
            let r = array_response(w, &sq)?;
            out.push(PatternPoint {
                theta_deg,
                phi,
                response_db: 20.0 * r.norm().log10(),
            });
        }
    }
    Ok(out)
}

pub const PATTERN_HEADER: &str = "theta_deg,phi_sign,response_db";

pub fn write_pattern_csv(path: &Path, points: &[PatternPoint]) -> Result<(), CurveError> {
    let io_err = |source| CurveError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    (|| -> io::Result<()> {
        writeln!(out, "{PATTERN_HEADER}")?;
        for p in points {
            writeln!(out, "{},{},{}", p.theta_deg, p.phi.sign(), p.response_db)?;
        }
        out.flush()
    })()
    .map_err(io_err)
}

pub fn read_pattern_csv(path: &Path) -> Result<Vec<PatternPoint>, CurveError> {
    let text = fs::read_to_string(path).map_err(|source| CurveError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    if !matches!(lines.next(), Some((_, h)) if h.trim_end_matches('\r') == PATTERN_HEADER) {
        return Err(CurveError::Malformed {
            line: 1,
            reason: format!("expected header `{PATTERN_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| CurveError::Malformed {
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        }
        let theta_deg: f64 = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
        let phi = match fields[1] {
            "1" => PhiBranch::Plus,
            "-1" => PhiBranch::Minus,
            other => return Err(bad(format!("phi_sign must be 1 or -1, got `{other}`"))),
        };
        let response_db = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
        out.push(PatternPoint {
            theta_deg,
            phi,
            response_db,
        });
    }
    Ok(out)
}

/// Result of a Monte-Carlo beamforming experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformRun {
    /// Run-averaged `|e|²` with the windowed normalized error in dB.
    pub curve: LearningCurve,
    /// Run-averaged `|d|²`.
    pub reference_power: Vec<f64>,
    /// Run-averaged final filter weights (output `y = Σ w_m x_m`).
    pub filter_weights: Option<QVector>,
    pub window: usize,
}

impl BeamformRun {
    /// Weights in the array-response convention: `wᴴ x` equals the filter
    /// output `Σ w_m x_m`, i.e. the element-wise conjugate of the filter
    /// weights.
    pub fn response_weights(&self) -> Option<QVector> {
        self.filter_weights.as_ref().map(QVector::conj)
    }

    /// Normalized error over the last window, in dB.
    pub fn steady_state_db(&self) -> Option<f64> {
        self.curve.last_smoothed_db()
    }
}

/// Relative response `20·log10(|r(doa)| / |r(reference)|)` in dB.
pub fn relative_response_db(
    array: &ArrayConfig,
    response_weights: &QVector,
    doa: &SourceDesc,
    reference: &SourceDesc,
) -> Result<f64, BeamError> {
    let r = array_response(response_weights, &quaternion_steering(array, doa))?;
    let r0 = array_response(response_weights, &quaternion_steering(array, reference))?;
    Ok(20.0 * (r.norm() / r0.norm()).log10())
}

/// Runs processed concurrently per reduction batch. Fixed so the summation
/// order never depends on the thread count.
const RUN_BATCH: usize = 8;

struct RunTrace {
    cost: Vec<f64>,
    reference: Vec<f64>,
    weights: Vec<Quaternion>,
}

fn single_run(scene: &Scene, mu: f64, n: usize, run: usize) -> Result<RunTrace, BeamError> {
    let m = scene.array.sensors;
    let cfg = FilterConfig::new(m, mu, Mode::Plain, 0)
        .map_err(|source| BeamError::Run { run, source })?;
    let mut state = FilterState::new(&cfg);
    let mut gen = SnapshotStream::new(scene, run as u64);
    let mut x = vec![Quaternion::ZERO; m];
    let mut cost = Vec::with_capacity(n);
    let mut reference = Vec::with_capacity(n);
    for _ in 0..n {
        let d = gen.next_into(&mut x);
        let rec = state
            .step(&x, d)
            .map_err(|source| BeamError::Run { run, source })?;
        cost.push(rec.cost);
        reference.push(d.norm_sqr());
    }
    Ok(RunTrace {
        cost,
        reference,
        weights: state.weights().to_vec(),
    })
}

/// Reference-signal QLMS beamformer averaged over `runs` independent runs.
///
/// Each run owns an RNG sub-stream of the scene seed selected by its run
/// index, adapts a spatial QLMS filter (one snapshot per input vector) from
/// zero weights, and records `|e[n]|²` and `|d[n]|²`. The smoothed track is
/// `10·log10(⟨|e|²⟩/⟨|d|²⟩)` over a trailing window of `max(1, N/100)`.
pub fn run_beamformer(
    scene: &Scene,
    mu: f64,
    n: usize,
    runs: usize,
) -> Result<BeamformRun, BeamError> {
    if runs == 0 {
        return Err(BeamError::Scene("at least one run required".into()));
    }
    let m = scene.array.sensors;
    let mut cost = vec![0.0; n];
    let mut reference = vec![0.0; n];
    let mut weights = vec![Quaternion::ZERO; m];

    let indices: Vec<usize> = (0..runs).collect();
    for batch in indices.chunks(RUN_BATCH) {
        let traces: Vec<RunTrace> = batch
            .par_iter()
            .map(|&run| single_run(scene, mu, n, run))
            .collect::<Result<_, _>>()?;
        for t in traces {
            cost.iter_mut().zip(&t.cost).for_each(|(a, b)| *a += b);
            reference
                .iter_mut()
                .zip(&t.reference)
                .for_each(|(a, b)| *a += b);
            weights
                .iter_mut()
                .zip(&t.weights)
                .for_each(|(a, b)| *a += *b);
        }
    }
    let scale = 1.0 / runs as f64;
    cost.iter_mut().for_each(|c| *c *= scale);
    reference.iter_mut().for_each(|c| *c *= scale);
    weights.iter_mut().for_each(|w| *w = *w * scale);

    let window = (n / 100).max(1);
    let curve = LearningCurve::from_costs((0..n).collect(), cost, &reference, window);
    Ok(BeamformRun {
        curve,
        reference_power: reference,
        filter_weights: Some(QVector::new(weights).expect("finite averaged weights")),
        window,
    })
}
