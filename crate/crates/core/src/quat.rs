//! Quaternion algebra over `f64`.
//!
//! A quaternion is written `q = a + b i + c j + d k` with the Hamilton rules
//! `i² = j² = k² = ijk = −1`. Multiplication is not commutative, so every
//! product in this crate is written in the order it is meant.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("non-finite quaternion component(s): ({0}, {1}, {2}, {3})")]
    NonFinite(f64, f64, f64, f64),
    #[error("invalid involution axis `{0}` (expected one of i, j, k)")]
    InvalidAxis(String),
    #[error(
        "involution family is inconsistent: imaginary residue {residue:e} exceeds {tolerance:e}"
    )]
    InconsistentFamily { residue: f64, tolerance: f64 },
    #[error("quaternion vector must have at least one element")]
    EmptyVector,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One element of the quaternion algebra.
///
/// Values built through [`Quaternion::new`] are guaranteed finite. The
/// arithmetic operators do not re-check; use [`Quaternion::is_finite`] where
/// overflow is possible (e.g. divergent adaptive filters).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::raw(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::raw(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::raw(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::raw(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::raw(0.0, 0.0, 0.0, 1.0);

    const fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, AlgebraError> {
        if a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() {
            Ok(Self::raw(a, b, c, d))
        } else {
            Err(AlgebraError::NonFinite(a, b, c, d))
        }
    }

    /// Real scalar embedded as `x + 0i + 0j + 0k`.
    pub fn real(x: f64) -> Result<Self, AlgebraError> {
        Self::new(x, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `x i + y j + z k`.
    pub fn pure(x: f64, y: f64, z: f64) -> Result<Self, AlgebraError> {
        Self::new(0.0, x, y, z)
    }

    /// Complex number `re + im·j` embedded in the `(1, j)` plane.
    pub fn from_complex_j(re: f64, im: f64) -> Result<Self, AlgebraError> {
        Self::new(re, 0.0, im, 0.0)
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self, AlgebraError> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.a
    }
    #[inline]
    pub fn i(self) -> f64 {
        self.b
    }
    #[inline]
    pub fn j(self) -> f64 {
        self.c
    }
    #[inline]
    pub fn k(self) -> f64 {
        self.d
    }

    /// Vector (imaginary) part as a pure quaternion.
    pub fn vector_part(self) -> Self {
        Self::raw(0.0, self.b, self.c, self.d)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::raw(self.a, -self.b, -self.c, -self.d)
    }

    /// `|q|² = q q*`.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.a.abs().max(d.b.abs()).max(d.c.abs()).max(d.d.abs())
    }

    /// Closed-form involution `q^axis = −axis·q·axis`.
    pub fn involution(self, axis: Axis) -> Self {
        match axis {
            Axis::I => Self::raw(self.a, self.b, -self.c, -self.d),
            Axis::J => Self::raw(self.a, -self.b, self.c, -self.d),
            Axis::K => Self::raw(self.a, -self.b, -self.c, self.d),
        }
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.a, self.b, self.c, self.d)
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, r: Self) -> Self {
        Self::raw(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, r: Self) -> Self {
        Self::raw(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, r: Self) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::raw(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Hamilton product `self · r`.
impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, r: Self) -> Self {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (r.a, r.b, r.c, r.d);
        Self::raw(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::raw(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, q| acc + q)
    }
}

fn check(q: Quaternion) -> Result<Quaternion, AlgebraError> {
    Quaternion::new(q.a, q.b, q.c, q.d)
}

/// Checked Hamilton product `pq`.
pub fn hamilton_product(p: Quaternion, q: Quaternion) -> Result<Quaternion, AlgebraError> {
    check(check(p)? * check(q)?)
}

pub fn conjugate(q: Quaternion) -> Result<Quaternion, AlgebraError> {
    Ok(check(q)?.conj())
}

/// The three quaternion involutions `q^i`, `q^j`, `q^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    I,
    J,
    K,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::I, Axis::J, Axis::K];

    pub fn unit(self) -> Quaternion {
        match self {
            Axis::I => Quaternion::I,
            Axis::J => Quaternion::J,
            Axis::K => Quaternion::K,
        }
    }
}

impl FromStr for Axis {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "i" => Ok(Axis::I),
            "j" => Ok(Axis::J),
            "k" => Ok(Axis::K),
            other => Err(AlgebraError::InvalidAxis(other.to_string())),
        }
    }
}

pub fn involution(q: Quaternion, axis: Axis) -> Result<Quaternion, AlgebraError> {
    Ok(check(q)?.involution(axis))
}

/// Residue above which an involution family is rejected.
pub const FAMILY_TOLERANCE: f64 = 1e-9;

/// Recovers `(q_a, q_b, q_c, q_d)` from `q` and its three involutions using
/// the quarter-sum reconstruction formulas.
pub fn components_from_involutions(
    q: Quaternion,
    qi: Quaternion,
    qj: Quaternion,
    qk: Quaternion,
) -> Result<(f64, f64, f64, f64), AlgebraError> {
    for v in [q, qi, qj, qk] {
        check(v)?;
    }
    // 1/(4u) = −u/4 for a unit imaginary u.
    let qa = (q + qi + qj + qk) * 0.25;
    let qb = -Quaternion::I * (q + qi - qj - qk) * 0.25;
    let qc = -Quaternion::J * (q - qi + qj - qk) * 0.25;
    let qd = -Quaternion::K * (q - qi - qj + qk) * 0.25;

    let residue = [qa, qb, qc, qd]
        .iter()
        .map(|p| p.vector_part().norm())
        .fold(0.0, f64::max);
    if residue > FAMILY_TOLERANCE {
        return Err(AlgebraError::InconsistentFamily {
            residue,
            tolerance: FAMILY_TOLERANCE,
        });
    }
    Ok((qa.a, qb.a, qc.a, qd.a))
}

/// Fixed-length vector of quaternions (`w`, `x[n]`, steering vectors, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct QVector(Vec<Quaternion>);

impl QVector {
    pub fn new(elems: Vec<Quaternion>) -> Result<Self, AlgebraError> {
        if elems.is_empty() {
            return Err(AlgebraError::EmptyVector);
        }
        for q in &elems {
            check(*q)?;
        }
        Ok(Self(elems))
    }

    pub fn zeros(len: usize) -> Result<Self, AlgebraError> {
        Self::new(vec![Quaternion::ZERO; len])
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, Quaternion> {
        self.0.iter_mut()
    }

    pub fn into_vec(self) -> Vec<Quaternion> {
        self.0
    }

    /// Element-wise conjugate `x*` (no transpose).
    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|q| q.conj()).collect())
    }

    /// Left scalar multiple `s·v` element-wise.
    pub fn scale_left(&self, s: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| s * q).collect())
    }

    /// Right scalar multiple `v·s` element-wise.
    pub fn scale_right(&self, s: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| q * s).collect())
    }

    /// `selfᵀ x = Σ self_m x_m`.
    pub fn dot_t(&self, x: &QVector) -> Result<Quaternion, AlgebraError> {
        self.same_len(x)?;
        Ok(dot_t(&self.0, &x.0))
    }

    /// `selfᴴ x = Σ self_m* x_m`.
    pub fn dot_h(&self, x: &QVector) -> Result<Quaternion, AlgebraError> {
        self.same_len(x)?;
        Ok(self.0.iter().zip(&x.0).map(|(w, s)| w.conj() * *s).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }

    pub fn max_abs_diff(&self, other: &QVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.max_abs_diff(*b))
            .fold(0.0, f64::max)
    }

    fn same_len(&self, x: &QVector) -> Result<(), AlgebraError> {
        if self.len() != x.len() {
            return Err(AlgebraError::LengthMismatch {
                left: self.len(),
                right: x.len(),
            });
        }
        Ok(())
    }
}

/// Unchecked `Σ w_m x_m` over equal-length slices.
#[inline]
pub(crate) fn dot_t(w: &[Quaternion], x: &[Quaternion]) -> Quaternion {
    w.iter().zip(x).map(|(w, x)| *w * *x).sum()
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    fn index(&self, m: usize) -> &Quaternion {
        &self.0[m]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, m: usize) -> &mut Quaternion {
        &mut self.0[m]
    }
}

impl<'a> IntoIterator for &'a QVector {
    type Item = &'a Quaternion;
    type IntoIter = std::slice::Iter<'a, Quaternion>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
