//! Evaluable probability generating functions.
//!
//! A [`PgfHandle`] wraps a closed-form evaluation `z -> G(z)` on the closed
//! unit disk plus an optional attached mean. Infinite-support laws stay in
//! closed form; coefficients are only materialized on request through
//! [`crate::fft::extract_coefficients`].

use alloc::sync::Arc;
use core::fmt;

use num_complex::Complex64;

use crate::error::{diagnostic, invalid, Result};
use crate::pmf::Pmf;

/// Tolerance on `|G(1) - 1|` for a proper PGF.
pub const PROPER_TOL: f64 = 1e-10;

/// Below this distance from 1 the equilibrium transform returns its limit.
pub const EQUILIBRIUM_LIMIT_RADIUS: f64 = 1e-8;

type EvalFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// An immutable, shareable generating function.
#[derive(Clone)]
pub struct PgfHandle {
    eval: Arc<EvalFn>,
    mean: Option<f64>,
}

impl fmt::Debug for PgfHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PgfHandle")
            .field("mean", &self.mean)
            .finish_non_exhaustive()
    }
}

impl PgfHandle {
    /// Wraps an evaluation function. `mean` may be `f64::INFINITY`.
    pub fn new<F>(eval: F, mean: Option<f64>) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            mean,
        }
    }

    /// The identity PGF `z`, i.e. the point mass at one.
    pub fn identity() -> Self {
        Self::new(|z| z, Some(1.0))
    }

    /// PGF of the geometric law on `{1, 2, ...}` with success probability `p`.
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid!("geometric parameter {p} outside (0, 1]"));
        }
        let q = 1.0 - p;
        Ok(Self::new(move |z| z * p / (1.0 - z * q), Some(1.0 / p)))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// Evaluates at a real point.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }

    /// The attached analytic mean, if any.
    pub fn attached_mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    /// Checks `|G(1) - 1| < PROPER_TOL`.
    pub fn check_proper(&self) -> Result<()> {
        let at_one = self.eval(Complex64::new(1.0, 0.0));
        if (at_one - 1.0).norm() < PROPER_TOL {
            Ok(())
        } else {
            Err(diagnostic!("G(1) = {at_one}, not a proper PGF"))
        }
    }
}

/// `G(z) = sum_k w_k z^(k + offset)`, with the mean attached.
pub fn pgf_from_pmf(pmf: &Pmf) -> PgfHandle {
    let mean = pmf.mean();
    let offset = pmf.support_offset() as i32;
    let weights: alloc::vec::Vec<f64> = pmf.weights().to_vec();
    PgfHandle::new(
        move |z| {
            // Horner from the top coefficient.
            let poly = weights
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &w| acc * z + w);
            poly * z.powi(offset)
        },
        Some(mean),
    )
}

/// The equilibrium transform `U^e(z) = (1 - U(z)) / (E[U] (1 - z))`.
///
/// The removable singularity at `z = 1` is replaced by its limit `1` within
/// [`EQUILIBRIUM_LIMIT_RADIUS`].
pub fn equilibrium_pgf(u: &PgfHandle) -> Result<PgfHandle> {
    let mean = match u.attached_mean() {
        Some(m) => m,
        None => pgf_mean(u)?,
    };
    if !(mean.is_finite() && mean > 0.0) {
        return Err(invalid!("equilibrium transform needs a finite positive mean, got {mean}"));
    }
    let inner = u.clone();
    Ok(PgfHandle::new(
        move |z| {
            let w = Complex64::new(1.0, 0.0) - z;
            if w.norm() < EQUILIBRIUM_LIMIT_RADIUS {
                Complex64::new(1.0, 0.0)
            } else {
                (1.0 - inner.eval(z)) / (w * mean)
            }
        },
        None,
    ))
}

/// `G'(1-)` by a Richardson-extrapolated one-sided difference, unless an
/// analytic mean is attached.
pub fn pgf_mean(g: &PgfHandle) -> Result<f64> {
    if let Some(m) = g.attached_mean() {
        return Ok(m);
    }
    let one = g.eval_real(1.0);
    let slope = |h: f64| (one - g.eval_real(1.0 - h)) / h;
    let richardson = |h: f64| 2.0 * slope(h / 2.0) - slope(h);
    let coarse = richardson(1e-4);
    let fine = richardson(5e-5);
    if !(coarse.is_finite() && fine.is_finite()) {
        return Err(diagnostic!("mean estimate is not finite"));
    }
    if (coarse - fine).abs() > 1e-6 * fine.abs().max(1e-300) {
        return Err(diagnostic!(
            "mean estimate did not settle: {coarse} vs {fine}"
        ));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn point_and_two_point_laws() {
        let g = pgf_from_pmf(&Pmf::point(1));
        assert_eq!(g.eval_real(0.3), 0.3);
        assert_eq!(g.attached_mean(), Some(1.0));

        let g = pgf_from_pmf(&Pmf::uniform(1, 2).unwrap());
        assert!((g.eval_real(0.5) - (0.5 + 0.25) / 2.0).abs() < 1e-15);
        assert_eq!(g.attached_mean(), Some(1.5));
    }

    #[test]
    fn truncated_geometric_matches_closed_form() {
        let p: f64 = 0.5;
        let weights: vec::Vec<f64> = (1..=60).map(|k| p * (1.0 - p).powi(k - 1)).collect();
        let tail = 1.0 - weights.iter().sum::<f64>();
        let g = pgf_from_pmf(&Pmf::with_truncation(1, weights, tail).unwrap());
        let oracle = p * 0.5 / (1.0 - (1.0 - p) * 0.5);
        assert!((g.eval_real(0.5) - oracle).abs() < 1e-12);
        assert!((oracle - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_examples() {
        let e = equilibrium_pgf(&PgfHandle::identity()).unwrap();
        for x in [0.0, 0.3, 0.9, 1.0] {
            assert!((e.eval_real(x) - 1.0).abs() < 1e-14);
        }
        let z2 = PgfHandle::new(|z| z * z, Some(2.0));
        let e = equilibrium_pgf(&z2).unwrap();
        for x in [0.0, 0.25, 0.8] {
            assert!((e.eval_real(x) - (1.0 + x) / 2.0).abs() < 1e-14);
        }
        // Geometric on {1,2,...}: U^e(z) = p / (1 - q z).
        let e = equilibrium_pgf(&PgfHandle::geometric(0.4).unwrap()).unwrap();
        assert!((e.eval_real(0.5) - 0.4 / 0.7).abs() < 1e-14);
        assert!((e.eval(c(1.0)) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn equilibrium_rejects_degenerate_mean() {
        let zero = PgfHandle::new(|_| Complex64::new(1.0, 0.0), Some(0.0));
        assert!(equilibrium_pgf(&zero).is_err());
        let inf = PgfHandle::new(|z| z, Some(f64::INFINITY));
        assert!(equilibrium_pgf(&inf).is_err());
    }

    #[test]
    fn numerical_means() {
        let strip = |g: PgfHandle| {
            let inner = g.clone();
            PgfHandle::new(move |z| inner.eval(z), None)
        };
        assert!((pgf_mean(&strip(PgfHandle::identity())).unwrap() - 1.0).abs() < 1e-9);
        let half = PgfHandle::new(|z| (z + 1.0) / 2.0, None);
        assert!((pgf_mean(&half).unwrap() - 0.5).abs() < 1e-9);
        let geo = strip(PgfHandle::geometric(0.25).unwrap());
        assert!((pgf_mean(&geo).unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn proper_check() {
        assert!(PgfHandle::identity().check_proper().is_ok());
        assert!(PgfHandle::new(|z| z * 0.5, None).check_proper().is_err());
    }
}
