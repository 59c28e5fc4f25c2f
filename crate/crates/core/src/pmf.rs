//! Finite probability mass functions on a contiguous integer support.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Tolerance on `sum(weights) + truncation_mass == 1`.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// A probability mass function `P(X = offset + k) = weights[k]`.
///
/// When the law was cut off (for instance after coefficient extraction of an
/// infinite-support PGF) the missing mass is kept in `truncation_mass` rather
/// than renormalized away.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    support_offset: usize,
    weights: Vec<f64>,
    truncation_mass: f64,
}

impl Pmf {
    /// A complete law: weights must be nonnegative and sum to one.
    pub fn new(support_offset: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_truncation(support_offset, weights, 0.0)
    }

    /// A law whose weights sum to `1 - truncation_mass`.
    pub fn with_truncation(
        support_offset: usize,
        weights: Vec<f64>,
        truncation_mass: f64,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid!("pmf needs at least one weight"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(invalid!("pmf weight {i} is {w}"));
        }
        if !(0.0..=1.0).contains(&truncation_mass) {
            return Err(invalid!("truncation mass {truncation_mass} outside [0, 1]"));
        }
        let total: f64 = weights.iter().sum::<f64>() + truncation_mass;
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(invalid!("pmf mass sums to {total}, expected 1"));
        }
        Ok(Self {
            support_offset,
            weights,
            truncation_mass,
        })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_unnormalized(support_offset: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(invalid!("cannot normalize weights with total {total}"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::new(support_offset, weights)
    }

    /// Point mass at `k`.
    pub fn point(k: usize) -> Self {
        Self {
            support_offset: k,
            weights: alloc::vec![1.0],
            truncation_mass: 0.0,
        }
    }

    /// Uniform law on `lo..=hi`.
    pub fn uniform(lo: usize, hi: usize) -> Result<Self> {
        if hi < lo {
            return Err(invalid!("empty uniform support {lo}..={hi}"));
        }
        let n = hi - lo + 1;
        Self::new(lo, alloc::vec![1.0 / n as f64; n])
    }

    pub fn support_offset(&self) -> usize {
        self.support_offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Largest value with positive declared weight slot.
    pub fn max_support(&self) -> usize {
        self.support_offset + self.weights.len() - 1
    }

    /// `P(X = k)`.
    pub fn prob(&self, k: usize) -> f64 {
        k.checked_sub(self.support_offset)
            .and_then(|i| self.weights.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// `P(X > k)`, counting truncated mass as lying above the support.
    pub fn tail(&self, k: usize) -> f64 {
        let upto: f64 = (self.support_offset..=k.min(self.max_support()))
            .map(|j| self.prob(j))
            .sum();
        (1.0 - upto).max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i + self.support_offset) as f64 * w)
            .sum()
    }

    /// Dense vector `v[k] = P(X = k)` for `k = 0..len`.
    pub fn dense(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.prob(k)).collect()
    }
}

/// Total-variation distance between two dense probability vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (get(a, i) - get(b, i)).abs()).sum::<f64>()
}

/// Largest absolute coordinate difference.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    (0..n)
        .map(|i| (get(a, i) - get(b, i)).abs())
        .fold(0.0, f64::max)
}
