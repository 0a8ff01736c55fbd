//! Randomized numerical checks of the algebra, the gradient operators and
//! the QLMS/AQLMS update rules. Each check reports its worst error against
//! a fixed tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adaptive::{aqlms_step, FilterConfig, FilterState, Mode};
use crate::hrgrad::{grad_q, grad_qstar, grad_wstar, numeric_partials, FdConfig, GradError};
use crate::quat::{components_from_involutions, dot_t, Axis, QVector, Quaternion};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub trials: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

pub const ALGEBRA_TOL: f64 = 1e-12;
pub const GRAD_TOL: f64 = 1e-6;
pub const QLMS_TOL: f64 = 1e-5;

fn rand_q(rng: &mut ChaCha8Rng, scale: f64) -> Quaternion {
    let mut v = [0.0; 4];
    v.iter_mut().for_each(|c| *c = rng.gen_range(-scale..scale));
    Quaternion::from_array(v).expect("finite")
}

fn rand_v(rng: &mut ChaCha8Rng, len: usize) -> QVector {
    QVector::new((0..len).map(|_| rand_q(rng, 1.0)).collect()).expect("finite")
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    max_error: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            trials: 0,
            max_error: 0.0,
        }
    }

    fn record(&mut self, err: f64) {
        // NaN must count as a failure.
        self.max_error = if err.is_nan() {
            f64::INFINITY
        } else {
            self.max_error.max(err)
        };
    }

    fn trial(&mut self) {
        self.trials += 1;
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            trials: self.trials,
            max_error: self.max_error,
            tolerance: self.tolerance,
        }
    }
}

/// `p·r` via the 4×4 real matrix of left multiplication by `p`.
fn matrix_product(p: Quaternion, r: Quaternion) -> Quaternion {
    let [a, b, c, d] = p.to_array();
    let m = [[a, -b, -c, -d], [b, a, -d, c], [c, d, a, -b], [d, -c, b, a]];
    let v = r.to_array();
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
    Quaternion::from_array(out).expect("finite")
}

/// Product, norm, conjugation and involution identities over `trials`
/// random pairs with components in `[-10, 10]`.
pub fn algebra_checks(trials: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut product = Tracker::new("hamilton product vs matrix form", ALGEBRA_TOL);
    let mut norm = Tracker::new("norm multiplicativity (relative)", ALGEBRA_TOL);
    let mut anti = Tracker::new("conj(pq) = conj(q) conj(p)", ALGEBRA_TOL);
    let mut sum1 = Tracker::new("q + iqi + jqj + kqk = -2q*", ALGEBRA_TOL);
    let mut sum2 = Tracker::new("q - iqi - jqj - kqk = 4q_a", ALGEBRA_TOL);
    let mut auto = Tracker::new("involutions are automorphisms", ALGEBRA_TOL);
    let mut recon = Tracker::new("components from involutions", ALGEBRA_TOL);
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);

    for _ in 0..trials {
        let p = rand_q(&mut rng, 10.0);
        let r = rand_q(&mut rng, 10.0);
        let pr = p * r;

        product.trial();
        product.record(pr.max_abs_diff(matrix_product(p, r)));

        norm.trial();
        let rhs = p.norm() * r.norm();
        norm.record((pr.norm() - rhs).abs() / rhs.max(f64::MIN_POSITIVE));

        anti.trial();
        anti.record(pr.conj().max_abs_diff(r.conj() * p.conj()));

        sum1.trial();
        sum1.record((p + i * p * i + j * p * j + k * p * k).max_abs_diff(p.conj() * -2.0));
        sum2.trial();
        sum2.record(
            (p - i * p * i - j * p * j - k * p * k).max_abs_diff(Quaternion::ONE * (4.0 * p.re())),
        );

        auto.trial();
        for axis in Axis::ALL {
            let u = axis.unit();
            auto.record(p.involution(axis).max_abs_diff(-(u * p * u)));
            auto.record(p.involution(axis).involution(axis).max_abs_diff(p));
            auto.record(
                pr.involution(axis)
                    .max_abs_diff(p.involution(axis) * r.involution(axis)),
            );
        }

        recon.trial();
        match components_from_involutions(
            p,
            p.involution(Axis::I),
            p.involution(Axis::J),
            p.involution(Axis::K),
        ) {
            Ok((a, b, c, d)) => {
                let [pa, pb, pc, pd] = p.to_array();
                recon.record(
                    (a - pa)
                        .abs()
                        .max((b - pb).abs())
                        .max((c - pc).abs())
                        .max((d - pd).abs()),
                );
            }
            Err(_) => recon.record(f64::INFINITY),
        }
    }
    [product, norm, anti, sum1, sum2, auto, recon]
        .into_iter()
        .map(Tracker::finish)
        .collect()
}

/// Closed-form gradients, real-linearity, the real-coordinate product rule
/// and the conjugate symmetry of gradients of real functions.
pub fn gradient_checks(
    trials: usize,
    seed: u64,
    cfg: FdConfig,
) -> Result<Vec<CheckResult>, GradError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = Quaternion::ONE * -0.5;
    let mut gq = Tracker::new("d q / d q = 1", GRAD_TOL);
    let mut gqs = Tracker::new("d q / d q* = -1/2", GRAD_TOL);
    let mut gcq = Tracker::new("d q* / d q = -1/2", GRAD_TOL);
    let mut gcqs = Tracker::new("d q* / d q* = 1", GRAD_TOL);
    let mut gnorm = Tracker::new("d (q q*) / d q* = q/2", GRAD_TOL);
    let mut linear = Tracker::new("real-linearity of d/dq", GRAD_TOL);
    let mut product = Tracker::new("product rule for real coordinates", GRAD_TOL);
    let mut realf = Tracker::new("real f: d/dq* = conj(d/dq)", GRAD_TOL);

    for _ in 0..trials {
        let p = rand_q(&mut rng, 3.0);
        gq.trial();
        gq.record(grad_q(|q| q, p, cfg)?.max_abs_diff(Quaternion::ONE));
        gqs.trial();
        gqs.record(grad_qstar(|q| q, p, cfg)?.max_abs_diff(half));
        gcq.trial();
        gcq.record(grad_q(|q| q.conj(), p, cfg)?.max_abs_diff(half));
        gcqs.trial();
        gcqs.record(grad_qstar(|q| q.conj(), p, cfg)?.max_abs_diff(Quaternion::ONE));
        gnorm.trial();
        gnorm.record(grad_qstar(|q| q * q.conj(), p, cfg)?.max_abs_diff(p * 0.5));

        let (a, b, c, d) = (
            rand_q(&mut rng, 1.0),
            rand_q(&mut rng, 1.0),
            rand_q(&mut rng, 1.0),
            rand_q(&mut rng, 1.0),
        );
        let p = rand_q(&mut rng, 1.5);
        let f = move |q: Quaternion| a * q * b + c * q.conj();
        let g = move |q: Quaternion| q * d * q + a;
        let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));

        linear.trial();
        let combined = grad_q(|q| f(q) * alpha + g(q) * beta, p, cfg)?;
        let separate = grad_q(f, p, cfg)? * alpha + grad_q(g, p, cfg)? * beta;
        linear.record(combined.max_abs_diff(separate));

        product.trial();
        let dfg = numeric_partials(|q| f(q) * g(q), p, cfg)?;
        let df = numeric_partials(f, p, cfg)?;
        let dg = numeric_partials(g, p, cfg)?;
        for n in 0..4 {
            product.record(dfg[n].max_abs_diff(f(p) * dg[n] + df[n] * g(p)));
        }

        realf.trial();
        let h = move |q: Quaternion| Quaternion::ONE * ((q * b).norm_sqr() + q.re() * 0.5);
        realf.record(grad_qstar(h, p, cfg)?.max_abs_diff(grad_q(h, p, cfg)?.conj()));
    }
    Ok([gq, gqs, gcq, gcqs, gnorm, linear, product, realf]
        .into_iter()
        .map(Tracker::finish)
        .collect())
}

/// Numeric `∇_{w*} J₀` of `J₀ = |d − wᵀx|²` against `−½ e x*` at filter
/// lengths 1, 2 and 4, the expanded-cost term gradients at lengths 1 and 3,
/// and the block form of the augmented update.
pub fn qlms_checks(trials: usize, seed: u64, cfg: FdConfig) -> Result<Vec<CheckResult>, GradError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full = Tracker::new("grad_w* J0 = -1/2 e x*", QLMS_TOL);
    let mut t1 = Tracker::new("grad_w* (d d*) = 0", QLMS_TOL);
    let mut t2 = Tracker::new("grad_w* (d x^H w*) = d x*", QLMS_TOL);
    let mut t3 = Tracker::new("grad_w* (w^T x d*) = -1/2 d x*", QLMS_TOL);
    let mut t4 = Tracker::new("grad_w* (w^T x x^H w*) = 1/2 w^T x x*", QLMS_TOL);
    let mut block = Tracker::new("augmented block update (bitwise)", 0.0);

    for len in [1usize, 2, 4] {
        for _ in 0..trials {
            let (w, x, d) = (
                rand_v(&mut rng, len),
                rand_v(&mut rng, len),
                rand_q(&mut rng, 1.0),
            );
            let cost = |v: &QVector| {
                let e = d - dot_t(v.as_slice(), x.as_slice());
                e * e.conj()
            };
            let numeric = grad_wstar(cost, &w, cfg)?;
            let e = d - dot_t(w.as_slice(), x.as_slice());
            full.trial();
            for m in 0..len {
                full.record(numeric[m].max_abs_diff((e * x[m].conj()) * -0.5));
            }
        }
    }

    for len in [1usize, 3] {
        for _ in 0..trials {
            let (w, x, d) = (
                rand_v(&mut rng, len),
                rand_v(&mut rng, len),
                rand_q(&mut rng, 1.0),
            );
            let xh = x.conj();
            let y = dot_t(w.as_slice(), x.as_slice());
            let g1 = grad_wstar(|_| d * d.conj(), &w, cfg)?;
            let g2 = grad_wstar(|v| d * dot_t(xh.as_slice(), v.conj().as_slice()), &w, cfg)?;
            let g3 = grad_wstar(|v| dot_t(v.as_slice(), x.as_slice()) * d.conj(), &w, cfg)?;
            let g4 = grad_wstar(
                |v| dot_t(v.as_slice(), x.as_slice()) * dot_t(xh.as_slice(), v.conj().as_slice()),
                &w,
                cfg,
            )?;
            for t in [&mut t1, &mut t2, &mut t3, &mut t4] {
                t.trial();
            }
            for m in 0..len {
                let dx = d * x[m].conj();
                t1.record(g1[m].norm());
                t2.record(g2[m].max_abs_diff(dx));
                t3.record(g3[m].max_abs_diff(dx * -0.5));
                t4.record(g4[m].max_abs_diff((y * x[m].conj()) * 0.5));
            }
        }
    }

    for _ in 0..trials {
        let len = rng.gen_range(1..5);
        let mu = rng.gen_range(0.0..0.1);
        let fc = FilterConfig::new(len, mu, Mode::Augmented, 0).expect("valid config");
        let mut st =
            FilterState::with_weights(&fc, rand_v(&mut rng, len), Some(rand_v(&mut rng, len)))
                .expect("matching lengths");
        let (x, d) = (rand_v(&mut rng, len), rand_q(&mut rng, 1.0));
        let h = st.augmented_weights();
        let xa: Vec<Quaternion> = x
            .iter()
            .copied()
            .chain(x.iter().map(|v| v.conj()))
            .collect();
        let ea = d - dot_t(&h, &xa);
        block.trial();
        match aqlms_step(&mut st, &x, d) {
            Ok(_) => {
                for (got, (h, xa)) in st.augmented_weights().iter().zip(h.iter().zip(&xa)) {
                    block.record(got.max_abs_diff(*h + (ea * xa.conj()) * mu));
                }
            }
            Err(_) => block.record(f64::INFINITY),
        }
    }

    Ok([full, t1, t2, t3, t4, block]
        .into_iter()
        .map(Tracker::finish)
        .collect())
}
