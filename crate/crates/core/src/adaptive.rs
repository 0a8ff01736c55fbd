//! Quaternion LMS (QLMS) and augmented QLMS (AQLMS) adaptive filters.
//!
//! Conventions, fixed everywhere in this module:
//!
//! ```text
//! y[n]   = Σ_m w_m x_m            (+ Σ_m g_m x_m*  in augmented mode)
//! e[n]   = d[n] − y[n]
//! w_m   += μ · e[n] · x_m*
//! g_m   += μ · e[n] · x_m          (augmented mode)
//! ```
//!
//! The weight stays on the left of the input and the error on the left of
//! the conjugated input. The update direction is `−∇_{w*} J₀` with
//! `J₀ = e e*` and `∇_{w*} J₀ = −½ e x*`; the factor ½ is absorbed into `μ`.

use thiserror::Error;

use crate::curve::{ratio_db, LearningCurve};
use crate::quat::{dot_t, QVector, Quaternion};
use crate::signal::QSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("invalid filter configuration: {0}")]
    Config(String),
    #[error("input length {got} does not match filter length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{op} called on a filter in {mode:?} mode")]
    WrongMode { op: &'static str, mode: Mode },
    #[error("filter diverged at iteration {iteration}: non-finite weight")]
    Diverged { iteration: u64 },
    #[error(
        "series of length {len} is too short for filter length {taps} and prediction step {step}"
    )]
    SeriesTooShort {
        len: usize,
        taps: usize,
        step: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Strictly linear QLMS on `x`.
    Plain,
    /// Widely linear AQLMS on `[x; x*]`.
    Augmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    taps: usize,
    mu: f64,
    mode: Mode,
    prediction_step: usize,
}

impl FilterConfig {
    /// `mu = 0` is accepted and freezes the weights.
    pub fn new(
        taps: usize,
        mu: f64,
        mode: Mode,
        prediction_step: usize,
    ) -> Result<Self, FilterError> {
        if taps == 0 {
            return Err(FilterError::Config(
                "filter length must be at least 1".into(),
            ));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(FilterError::Config(format!(
                "step size must be finite and non-negative, got {mu}"
            )));
        }
        Ok(Self {
            taps,
            mu,
            mode,
            prediction_step,
        })
    }

    pub fn taps(&self) -> usize {
        self.taps
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn prediction_step(&self) -> usize {
        self.prediction_step
    }
}

/// Output, error and instantaneous cost `J₀ = |e|²` of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub y: Quaternion,
    pub e: Quaternion,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    mode: Mode,
    mu: f64,
    w: Vec<Quaternion>,
    g: Vec<Quaternion>,
    iteration: u64,
}

impl FilterState {
    /// All-zero weights.
    pub fn new(cfg: &FilterConfig) -> Self {
        let g = match cfg.mode {
            Mode::Plain => Vec::new(),
            Mode::Augmented => vec![Quaternion::ZERO; cfg.taps],
        };
        Self {
            mode: cfg.mode,
            mu: cfg.mu,
            w: vec![Quaternion::ZERO; cfg.taps],
            g,
            iteration: 0,
        }
    }

    /// Starts from the given weights; `g` is required in augmented mode and
    /// ignored otherwise.
    pub fn with_weights(
        cfg: &FilterConfig,
        w: QVector,
        g: Option<QVector>,
    ) -> Result<Self, FilterError> {
        let mut state = Self::new(cfg);
        if w.len() != cfg.taps {
            return Err(FilterError::LengthMismatch {
                expected: cfg.taps,
                got: w.len(),
            });
        }
        state.w = w.into_vec();
        if cfg.mode == Mode::Augmented {
            let g = g.ok_or_else(|| {
                FilterError::Config("augmented mode needs initial g weights".into())
            })?;
            if g.len() != cfg.taps {
                return Err(FilterError::LengthMismatch {
                    expected: cfg.taps,
                    got: g.len(),
                });
            }
            state.g = g.into_vec();
        }
        Ok(state)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn weights(&self) -> &[Quaternion] {
        &self.w
    }

    /// Conjugate-part weights (empty in plain mode).
    pub fn conj_weights(&self) -> &[Quaternion] {
        &self.g
    }

    /// `h_a = [wᵀ gᵀ]ᵀ`; equal to `w` in plain mode.
    pub fn augmented_weights(&self) -> Vec<Quaternion> {
        self.w.iter().chain(&self.g).copied().collect()
    }

    /// Current filter output for `x` without adapting.
    pub fn output(&self, x: &[Quaternion]) -> Result<Quaternion, FilterError> {
        self.check_len(x)?;
        Ok(match self.mode {
            Mode::Plain => dot_t(&self.w, x),
            Mode::Augmented => augmented_output(&self.w, &self.g, x),
        })
    }

    /// One adaptation step in whichever mode the state was built for.
    pub fn step(&mut self, x: &[Quaternion], d: Quaternion) -> Result<StepRecord, FilterError> {
        self.check_len(x)?;
        let rec = match self.mode {
            Mode::Plain => {
                let y = dot_t(&self.w, x);
                let e = d - y;
                for (w, x) in self.w.iter_mut().zip(x) {
                    *w += (e * x.conj()) * self.mu;
                }
                StepRecord {
                    y,
                    e,
                    cost: e.norm_sqr(),
                }
            }
            Mode::Augmented => {
                let y = augmented_output(&self.w, &self.g, x);
                let e = d - y;
                for (w, x) in self.w.iter_mut().zip(x) {
                    *w += (e * x.conj()) * self.mu;
                }
                for (g, x) in self.g.iter_mut().zip(x) {
                    *g += (e * *x) * self.mu;
                }
                StepRecord {
                    y,
                    e,
                    cost: e.norm_sqr(),
                }
            }
        };
        self.iteration += 1;
        if !(self.w.iter().all(|q| q.is_finite()) && self.g.iter().all(|q| q.is_finite())) {
            return Err(FilterError::Diverged {
                iteration: self.iteration - 1,
            });
        }
        Ok(rec)
    }

    fn check_len(&self, x: &[Quaternion]) -> Result<(), FilterError> {
        if x.len() != self.w.len() {
            return Err(FilterError::LengthMismatch {
                expected: self.w.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// `h_aᵀ x_a` accumulated in block order: all `w_m x_m`, then all `g_m x_m*`.
fn augmented_output(w: &[Quaternion], g: &[Quaternion], x: &[Quaternion]) -> Quaternion {
    w.iter()
        .zip(x)
        .map(|(w, x)| *w * *x)
        .chain(g.iter().zip(x).map(|(g, x)| *g * x.conj()))
        .sum()
}

/// QLMS iteration; the state must be in [`Mode::Plain`].
pub fn qlms_step(
    state: &mut FilterState,
    x: &QVector,
    d: Quaternion,
) -> Result<StepRecord, FilterError> {
    if state.mode != Mode::Plain {
        return Err(FilterError::WrongMode {
            op: "qlms_step",
            mode: state.mode,
        });
    }
    state.step(x.as_slice(), d)
}

/// AQLMS iteration; the state must be in [`Mode::Augmented`].
pub fn aqlms_step(
    state: &mut FilterState,
    x: &QVector,
    d: Quaternion,
) -> Result<StepRecord, FilterError> {
    if state.mode != Mode::Augmented {
        return Err(FilterError::WrongMode {
            op: "aqlms_step",
            mode: state.mode,
        });
    }
    state.step(x.as_slice(), d)
}

/// Per-step trace and summary of a prediction run.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRun {
    /// Sample index `n` of each step (the target is `s[n]`).
    pub index: Vec<usize>,
    pub cost: Vec<f64>,
    pub target: Vec<Quaternion>,
    pub prediction: Vec<Quaternion>,
    /// `10·log10(Σ|s|² / Σ|e|²)` over the final quarter of the steps.
    pub gain_db: f64,
    /// `10·log10(mean |e|²)` over the final quarter of the steps.
    pub final_mse_db: f64,
    pub state: FilterState,
}

impl PredictionRun {
    pub fn learning_curve(&self) -> LearningCurve {
        let reference: Vec<f64> = self.target.iter().map(|q| q.norm_sqr()).collect();
        let window = (self.cost.len() / 100).max(1);
        LearningCurve::from_costs(self.index.clone(), self.cost.clone(), &reference, window)
    }
}

/// Runs a `cfg.prediction_step`-ahead predictor over `series`.
///
/// At sample `n` the input is `[s[n−Δ], s[n−Δ−1], …, s[n−Δ−L+1]]` and the
/// reference is `s[n]`, for every `n` with a full input window.
pub fn run_prediction(series: &QSeries, cfg: &FilterConfig) -> Result<PredictionRun, FilterError> {
    let s = series.samples();
    let (taps, step) = (cfg.taps, cfg.prediction_step);
    if s.len() <= taps + step {
        return Err(FilterError::SeriesTooShort {
            len: s.len(),
            taps,
            step,
        });
    }
    let first = taps - 1 + step;
    let steps = s.len() - first;

    let mut state = FilterState::new(cfg);
    let mut index = Vec::with_capacity(steps);
    let mut cost = Vec::with_capacity(steps);
    let mut target = Vec::with_capacity(steps);
    let mut prediction = Vec::with_capacity(steps);
    let mut x = vec![Quaternion::ZERO; taps];

    for n in first..s.len() {
        let newest = n - step;
        for (m, slot) in x.iter_mut().enumerate() {
            *slot = s[newest - m];
        }
        let rec = state.step(&x, s[n])?;
        index.push(n);
        cost.push(rec.cost);
        target.push(s[n]);
        prediction.push(rec.y);
    }

    let tail = (steps / 4).max(1);
    let sig: f64 = target[steps - tail..].iter().map(|q| q.norm_sqr()).sum();
    let err: f64 = cost[steps - tail..].iter().sum();
    Ok(PredictionRun {
        index,
        cost,
        target,
        prediction,
        gain_db: ratio_db(sig, err),
        final_mse_db: 10.0 * (err / tail as f64).log10(),
        state,
    })
}
