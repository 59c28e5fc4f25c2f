//! Exponential multiple vacations with binomial (synchronized) reneging.
//!
//! During a vacation customers arrive at rate `lambda_v`; abandonment epochs
//! form a Poisson(`xi`) process and at each one every waiting customer leaves
//! independently with probability `p`. The vacation ends at rate `gamma`
//! once at least one customer is present.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::{mean_by_extraction, positive, TransferLaw, TRANSFER_GRID};
use crate::error::{diagnostic, invalid, Error, Result};
use crate::fft::{extract_series, pmf_from_extraction, ExtractOptions};
use crate::pgf::PgfHandle;
use crate::series::{MAX_TERMS, REL_STOP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialReneging {
    pub lambda_v: f64,
    /// Rate of abandonment epochs.
    pub xi: f64,
    /// Vacation exit rate.
    pub gamma: f64,
    /// Probability that a waiting customer leaves at an abandonment epoch.
    pub p: f64,
}

impl BinomialReneging {
    pub fn validate(&self) -> Result<()> {
        positive("vacation arrival rate", self.lambda_v)?;
        positive("abandonment rate", self.xi)?;
        positive("exit rate", self.gamma)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid!("reneging probability {} outside [0, 1]", self.p));
        }
        Ok(())
    }

    /// Unnormalized partial PGF of the vacation-mode count.
    pub fn g0(&self, z: Complex64) -> Complex64 {
        binomial_reneging_g0(self, z, REL_STOP).expect("terms decay geometrically on the disk")
    }

    /// `H(0) = G0(0) / G0(1)`, the vacation-mode probability of an empty system.
    pub fn empty_fraction(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        (self.g0(Complex64::new(0.0, 0.0)) / self.g0(one)).re
    }

    /// `E[B0] = 1 / (gamma (1 - H(0)))`: exits occur at rate `gamma` while
    /// the vacation-mode system is nonempty.
    pub fn expected_duration(&self) -> Result<f64> {
        self.validate()?;
        Ok(1.0 / (self.gamma * (1.0 - self.empty_fraction())))
    }

    /// `G0'(1)` in the normalization of [`binomial_reneging_g0`].
    fn g0_derivative_at_one(&self) -> Result<f64> {
        let s = self.gamma + self.xi;
        let c = self.xi / s;
        let q = 1.0 - self.p;
        let mut total = 0.0;
        let mut inner = 0.0;
        let mut weight = 1.0;
        for j in 0..MAX_TERMS {
            inner += self.lambda_v * q.powi(j as i32) / s;
            weight *= c;
            let term = weight * inner;
            total += term;
            if j >= 2 && term <= REL_STOP * total {
                return Ok(total);
            }
        }
        Err(Error::Divergent {
            what: "reneging G0'(1)".into(),
            terms: MAX_TERMS,
        })
    }

    /// Transfer law `(G0(z) - G0(0)) / (G0(1) - G0(0))` with its exact mean.
    pub fn transfer_law(&self) -> Result<TransferLaw> {
        self.validate()?;
        let m = *self;
        let zero = self.g0(Complex64::new(0.0, 0.0)).re;
        let one = self.g0(Complex64::new(1.0, 0.0)).re;
        let mean = self.g0_derivative_at_one()? / (one - zero);
        psi_from_g0(move |z| m.g0(z), Some(mean))
    }

    /// Normalized vacation-mode law `H` on `0..=k_max`.
    pub fn normalized_g0_pmf(&self, k_max: usize) -> Result<Vec<f64>> {
        let m = *self;
        let one = self.g0(Complex64::new(1.0, 0.0));
        let opts = ExtractOptions::for_n_max(k_max).with_grid(TRANSFER_GRID.max(4 * (k_max + 1)));
        let ex = extract_series(|z| m.g0(z) / one, k_max, opts)?;
        Ok(pmf_from_extraction(ex)?.dense(k_max + 1))
    }
}

/// `sum_(j>=0) prod_(k=0..=j) xi / (gamma + xi + lambda_v (1-p)^k (1 - z))`,
/// summed until the current term is below `tol` times the running sum.
pub fn binomial_reneging_g0(m: &BinomialReneging, z: Complex64, tol: f64) -> Result<Complex64> {
    let q = 1.0 - m.p;
    let w = Complex64::new(1.0, 0.0) - z;
    let mut product = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qk = 1.0;
    for _ in 0..MAX_TERMS {
        product *= m.xi / (w * (m.lambda_v * qk) + (m.gamma + m.xi));
        sum += product;
        qk *= q;
        if product.norm() <= tol * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::Divergent {
        what: "reneging G0".into(),
        terms: MAX_TERMS,
    })
}

/// `Psi(z) = (G0(z) - G0(0)) / (G0(1) - G0(0))`; the normalizing constant of
/// `G0` cancels. Without a supplied mean it is computed from coefficients.
pub fn psi_from_g0<F>(g0: F, mean: Option<f64>) -> Result<TransferLaw>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
{
    let at_zero = g0(Complex64::new(0.0, 0.0));
    let at_one = g0(Complex64::new(1.0, 0.0));
    let span = at_one - at_zero;
    if !(span.re > 0.0 && span.im.abs() <= 1e-12 * span.re) {
        return Err(diagnostic!("G0(1) - G0(0) = {span} is not positive"));
    }
    let psi = PgfHandle::new(move |z| (g0(z) - at_zero) / span, None);
    let mean = match mean {
        Some(m) => m,
        None => mean_by_extraction(&psi)?,
    };
    TransferLaw::from_pgf(psi, mean)
}
