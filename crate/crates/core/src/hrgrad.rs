//! Numeric quaternion gradient operators.
//!
//! For `f(q) = f_a + i f_b + j f_c + k f_d` the gradients with respect to `q`
//! and `q*` are built from the four real-coordinate partials:
//!
//! ```text
//! ∂f/∂q  = ¼ (∂f/∂q_a − (∂f/∂q_b) i − (∂f/∂q_c) j − (∂f/∂q_d) k)
//! ∂f/∂q* = ¼ (∂f/∂q_a + (∂f/∂q_b) i + (∂f/∂q_c) j + (∂f/∂q_d) k)
//! ```
//!
//! The partials are quaternions in general, so the imaginary units multiply
//! them from the right. Partials are estimated with central differences;
//! these operators are the reference against which analytic gradients
//! (e.g. the QLMS update direction) are checked.

use thiserror::Error;

use crate::quat::{QVector, Quaternion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradError {
    #[error("function is not finite at probe point {probe} (value {value})")]
    NonFinite { probe: String, value: Quaternion },
    #[error("finite-difference base step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// Central-difference settings. The step actually used at a point `q` is
/// `h0 · (1 + |q|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    h0: f64,
}

impl FdConfig {
    pub const DEFAULT_H0: f64 = 1e-5;

    pub fn new(h0: f64) -> Result<Self, GradError> {
        if h0 > 0.0 && h0.is_finite() {
            Ok(Self { h0 })
        } else {
            Err(GradError::InvalidStep(h0))
        }
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    fn step_at(&self, q: Quaternion) -> f64 {
        self.h0 * (1.0 + q.norm())
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            h0: Self::DEFAULT_H0,
        }
    }
}

const BASIS: [Quaternion; 4] = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];

fn eval_checked<T: std::fmt::Display>(
    value: Quaternion,
    probe: impl FnOnce() -> T,
) -> Result<Quaternion, GradError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GradError::NonFinite {
            probe: probe().to_string(),
            value,
        })
    }
}

/// `(∂f/∂q_a, ∂f/∂q_b, ∂f/∂q_c, ∂f/∂q_d)` by central differences.
pub fn numeric_partials<F>(f: F, q: Quaternion, cfg: FdConfig) -> Result<[Quaternion; 4], GradError>
where
    F: Fn(Quaternion) -> Quaternion,
{
    let h = cfg.step_at(q);
    let mut out = [Quaternion::ZERO; 4];
    for (dir, slot) in BASIS.iter().zip(out.iter_mut()) {
        let plus = q + *dir * h;
        let minus = q - *dir * h;
        let fp = eval_checked(f(plus), || plus)?;
        let fm = eval_checked(f(minus), || minus)?;
        *slot = (fp - fm) * (0.5 / h);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Sign {
    Minus,
    Plus,
}

fn combine(p: &[Quaternion; 4], sign: Sign) -> Quaternion {
    let s = match sign {
        Sign::Minus => -1.0,
        Sign::Plus => 1.0,
    };
    (p[0] + (p[1] * Quaternion::I + p[2] * Quaternion::J + p[3] * Quaternion::K) * s) * 0.25
}

/// `∂f/∂q`.
pub fn grad_q<F>(f: F, q: Quaternion, cfg: FdConfig) -> Result<Quaternion, GradError>
where
    F: Fn(Quaternion) -> Quaternion,
{
    Ok(combine(&numeric_partials(f, q, cfg)?, Sign::Minus))
}

/// `∂f/∂q*`.
pub fn grad_qstar<F>(f: F, q: Quaternion, cfg: FdConfig) -> Result<Quaternion, GradError>
where
    F: Fn(Quaternion) -> Quaternion,
{
    Ok(combine(&numeric_partials(f, q, cfg)?, Sign::Plus))
}

fn vector_gradient<F>(f: F, w: &QVector, cfg: FdConfig, sign: Sign) -> Result<QVector, GradError>
where
    F: Fn(&QVector) -> Quaternion,
{
    let mut probe = w.clone();
    let mut out = Vec::with_capacity(w.len());
    for m in 0..w.len() {
        let wm = w[m];
        let h = cfg.step_at(wm);
        let mut partials = [Quaternion::ZERO; 4];
        for (dir, slot) in BASIS.iter().zip(partials.iter_mut()) {
            probe[m] = wm + *dir * h;
            let fp = eval_checked(f(&probe), || format!("w[{m}] = {}", probe[m]))?;
            probe[m] = wm - *dir * h;
            let fm = eval_checked(f(&probe), || format!("w[{m}] = {}", probe[m]))?;
            *slot = (fp - fm) * (0.5 / h);
        }
        probe[m] = wm;
        out.push(combine(&partials, sign));
    }
    // Every element is a finite combination of finite evaluations.
    Ok(QVector::new(out).expect("finite gradient"))
}

/// `∂f/∂w`, element `m` being the scalar gradient with respect to `w_m`.
pub fn grad_w<F>(f: F, w: &QVector, cfg: FdConfig) -> Result<QVector, GradError>
where
    F: Fn(&QVector) -> Quaternion,
{
    vector_gradient(f, w, cfg, Sign::Minus)
}

/// `∂f/∂w*`.
pub fn grad_wstar<F>(f: F, w: &QVector, cfg: FdConfig) -> Result<QVector, GradError>
where
    F: Fn(&QVector) -> Quaternion,
{
    vector_gradient(f, w, cfg, Sign::Plus)
}
