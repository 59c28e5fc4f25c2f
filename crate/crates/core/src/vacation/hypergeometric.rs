//! Transfer laws whose successive-probability ratio is a rational function.
//!
//! If `P(Y = j + 1) / P(Y = j) = scale * prod(j + a_i) / prod(j + b_i)` then
//! `Psi(z)` is `z` times a generalized hypergeometric series. The law is
//! built from the ratio recurrence; the roots may be complex as long as they
//! combine to real ratios.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::TransferLaw;
use crate::error::{diagnostic, invalid, Error, Result};
use crate::pmf::Pmf;
use crate::series::{MAX_TERMS, REL_STOP};

#[derive(Debug, Clone, PartialEq)]
pub struct HypergeometricRatio {
    /// Roots `a_i` of the numerator factors `(j + a_i)`.
    pub numerator_roots: Vec<Complex64>,
    /// Roots `b_i` of the denominator factors `(j + b_i)`.
    pub denominator_roots: Vec<Complex64>,
    /// Constant factor of the ratio.
    pub scale: f64,
}

impl HypergeometricRatio {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(invalid!("ratio scale must be nonnegative, got {}", self.scale));
        }
        for j in 1..64 {
            self.ratio(j)?;
        }
        Ok(())
    }

    /// `P(Y = j + 1) / P(Y = j)` for `j >= 1`; must be real and nonnegative.
    pub fn ratio(&self, j: usize) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(0.0);
        }
        let x = Complex64::new(j as f64, 0.0);
        let num: Complex64 = self.numerator_roots.iter().map(|a| x + a).product();
        let den: Complex64 = self.denominator_roots.iter().map(|b| x + b).product();
        if den.norm() == 0.0 {
            return Err(invalid!("ratio has a pole at j = {j}"));
        }
        let r = num / den * self.scale;
        if r.im.abs() > 1e-12 * r.norm().max(1e-300) {
            return Err(diagnostic!("ratio at j = {j} is not real: {r}"));
        }
        if r.re < 0.0 {
            return Err(invalid!("ratio at j = {j} is negative: {}", r.re));
        }
        Ok(r.re)
    }

    /// Parameters `(upper, lower, x)` with `Psi(z) = z F(upper; lower; x z) / F(upper; lower; x)`.
    pub fn series_parameters(&self) -> (Vec<Complex64>, Vec<Complex64>, f64) {
        let one = Complex64::new(1.0, 0.0);
        let mut upper: Vec<Complex64> = self.numerator_roots.iter().map(|a| a + one).collect();
        upper.push(one);
        let lower = self.denominator_roots.iter().map(|b| b + one).collect();
        (upper, lower, self.scale)
    }
}

/// `psi_1 = 1`, `psi_(j+1) = R(j) psi_j`, normalized.
pub fn hypergeometric_psi(h: &HypergeometricRatio) -> Result<TransferLaw> {
    h.validate()?;
    let mut weights = alloc::vec![0.0, 1.0];
    let mut total = 1.0;
    let mut term = 1.0;
    let mut converged = false;
    for j in 1..MAX_TERMS {
        term *= h.ratio(j)?;
        if term == 0.0 {
            converged = true;
            break;
        }
        weights.push(term);
        total += term;
        if !total.is_finite() || (j > 10_000 && h.ratio(j)? >= 1.0) {
            break;
        }
        if j >= 8 && term <= REL_STOP * total && h.ratio(j + 1)? < 1.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Divergent {
            what: "hypergeometric transfer law".into(),
            terms: weights.len(),
        });
    }
    TransferLaw::from_pmf(Pmf::from_unnormalized(0, weights)?)
}

/// Generalized hypergeometric series `sum_i prod (upper)_i / prod (lower)_i z^i / i!`.
pub fn hypergeometric_pfq(upper: &[Complex64], lower: &[Complex64], z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for i in 0..MAX_TERMS {
        let n = i as f64;
        let num: Complex64 = upper.iter().map(|a| a + n).product();
        let den: Complex64 = lower.iter().map(|b| b + n).product();
        if den.norm() == 0.0 {
            return Err(invalid!("lower parameter is a nonpositive integer"));
        }
        term = term * num / den * z / (n + 1.0);
        sum += term;
        if term.norm() <= REL_STOP * sum.norm() && i >= 4 {
            return Ok(sum);
        }
        if !sum.re.is_finite() {
            break;
        }
    }
    Err(Error::Divergent {
        what: "hypergeometric series".into(),
        terms: MAX_TERMS,
    })
}
