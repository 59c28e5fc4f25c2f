//! Batch-size laws on `{1, 2, ...}`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::pgf::{pgf_from_pmf, PgfHandle};
use crate::pmf::Pmf;

/// Batch sizes are either finitely supported or geometric (closed-form PGF).
#[derive(Debug, Clone, PartialEq)]
pub enum BatchLaw {
    Finite(Pmf),
    /// `P(B = k) = p (1 - p)^(k - 1)`, `k >= 1`.
    Geometric { p: f64 },
}

impl BatchLaw {
    /// Every batch has exactly one customer.
    pub fn single() -> Self {
        Self::Finite(Pmf::point(1))
    }

    pub fn finite(pmf: Pmf) -> Result<Self> {
        let law = Self::Finite(pmf);
        law.validate()?;
        Ok(law)
    }

    pub fn geometric(p: f64) -> Result<Self> {
        let law = Self::Geometric { p };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite(pmf) => {
                if pmf.prob(0) > 0.0 {
                    return Err(invalid!("batch sizes must be at least one"));
                }
                if pmf.truncation_mass() > 0.0 {
                    return Err(invalid!("batch pmf must not be truncated"));
                }
                Ok(())
            }
            Self::Geometric { p } => {
                if *p > 0.0 && *p <= 1.0 {
                    Ok(())
                } else {
                    Err(invalid!("geometric batch parameter {p} outside (0, 1]"))
                }
            }
        }
    }

    pub fn is_single(&self) -> bool {
        match self {
            Self::Finite(pmf) => pmf.prob(1) == 1.0,
            Self::Geometric { p } => *p == 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Finite(pmf) => pmf.mean(),
            Self::Geometric { p } => 1.0 / p,
        }
    }

    /// `P(B = k)`.
    pub fn prob(&self, k: usize) -> f64 {
        match self {
            Self::Finite(pmf) => pmf.prob(k),
            Self::Geometric { p } => {
                if k == 0 {
                    0.0
                } else {
                    p * (1.0 - p).powi(k as i32 - 1)
                }
            }
        }
    }

    /// `P(B > k)`.
    pub fn tail(&self, k: usize) -> f64 {
        match self {
            Self::Finite(pmf) => pmf.tail(k),
            Self::Geometric { p } => {
                if k == 0 {
                    1.0
                } else {
                    (1.0 - p).powi(k as i32)
                }
            }
        }
    }

    /// Largest possible batch, if finite.
    pub fn max_support(&self) -> Option<usize> {
        match self {
            Self::Finite(pmf) => Some(pmf.max_support()),
            Self::Geometric { p } if *p == 1.0 => Some(1),
            Self::Geometric { .. } => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Finite(pmf) => {
                let offset = pmf.support_offset() as i32;
                pmf.weights()
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &w| acc * z + w)
                    * z.powi(offset)
            }
            Self::Geometric { p } => z * *p / (1.0 - z * (1.0 - p)),
        }
    }

    pub fn pgf(&self) -> PgfHandle {
        match self {
            Self::Finite(pmf) => pgf_from_pmf(pmf),
            Self::Geometric { p } => {
                PgfHandle::geometric(*p).expect("validated geometric parameter")
            }
        }
    }

    /// Probabilities `P(B = k)` for `k = 0..len`.
    pub fn dense(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.prob(k)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Self::Finite(pmf) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, w) in pmf.weights().iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return pmf.support_offset() + i;
                    }
                }
                // Round-off left u above the accumulated mass.
                pmf.weights()
                    .iter()
                    .rposition(|w| *w > 0.0)
                    .map(|i| pmf.support_offset() + i)
                    .unwrap_or(pmf.support_offset())
            }
            Self::Geometric { p } => {
                if *p == 1.0 {
                    return 1;
                }
                let u: f64 = rng.random();
                1 + ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize
            }
        }
    }
}
