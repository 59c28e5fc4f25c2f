//! Service-time (and vacation-time) laws with their transforms and samplers.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};

/// A nonnegative continuous law used for service and vacation durations.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceLaw {
    Exponential { rate: f64 },
    /// Sum of `phases` independent exponentials, each with `rate`.
    Erlang { phases: u32, rate: f64 },
    Deterministic { value: f64 },
    /// Mixture of exponentials: `weights[i]` chooses `rates[i]`.
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid!("{name} must be finite and positive, got {v}"))
    }
}

impl ServiceLaw {
    pub fn exponential(rate: f64) -> Result<Self> {
        let law = Self::Exponential { rate };
        law.validate()?;
        Ok(law)
    }

    pub fn erlang(phases: u32, rate: f64) -> Result<Self> {
        let law = Self::Erlang { phases, rate };
        law.validate()?;
        Ok(law)
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        let law = Self::Deterministic { value };
        law.validate()?;
        Ok(law)
    }

    pub fn hyperexponential(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let law = Self::HyperExponential { weights, rates };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("exponential rate", *rate),
            Self::Erlang { phases, rate } => {
                if *phases == 0 {
                    return Err(invalid!("erlang needs at least one phase"));
                }
                positive("erlang rate", *rate)
            }
            Self::Deterministic { value } => positive("deterministic value", *value),
            Self::HyperExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(invalid!(
                        "hyperexponential needs matching nonempty weights and rates"
                    ));
                }
                for r in rates {
                    positive("hyperexponential rate", *r)?;
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid!("hyperexponential weights must be nonnegative"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid!("hyperexponential weights sum to {total}"));
                }
                Ok(())
            }
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, Self::Exponential { .. })
    }

    /// `E[S]`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Erlang { phases, rate } => *phases as f64 / rate,
            Self::Deterministic { value } => *value,
            Self::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w / r).sum()
            }
        }
    }

    /// `E[S^2]`.
    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 2.0 / (rate * rate),
            Self::Erlang { phases, rate } => {
                let k = *phases as f64;
                k * (k + 1.0) / (rate * rate)
            }
            Self::Deterministic { value } => value * value,
            Self::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| 2.0 * w / (r * r)).sum()
            }
        }
    }

    /// Laplace-Stieltjes transform `E[exp(-s S)]` for `Re s >= 0`.
    pub fn lst(&self, s: Complex64) -> Complex64 {
        match self {
            Self::Exponential { rate } => *rate / (s + rate),
            Self::Erlang { phases, rate } => (*rate / (s + rate)).powi(*phases as i32),
            Self::Deterministic { value } => (-s * value).exp(),
            Self::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| *r / (s + r) * w)
                .sum(),
        }
    }

    /// `int_0^inf exp(-s t) (1 - F(t)) dt = (1 - lst(s)) / s`, evaluated
    /// without cancellation; equals `E[S]` at `s = 0`.
    pub fn survival_transform(&self, s: Complex64) -> Complex64 {
        match self {
            Self::Exponential { rate } => 1.0 / (s + rate),
            Self::Erlang { phases, rate } => {
                // (1 - r^k)/s = (1 + r + ... + r^(k-1)) / (s + rate), r = rate/(s+rate)
                let r = *rate / (s + rate);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut pow = Complex64::new(1.0, 0.0);
                for _ in 0..*phases {
                    acc += pow;
                    pow *= r;
                }
                acc / (s + rate)
            }
            Self::Deterministic { value } => {
                let x = s * value;
                if x.norm() < 1e-3 {
                    // (1 - e^-x)/x = 1 - x/2 + x^2/6 - x^3/24 + x^4/120 - ...
                    let series = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
                        + x * x * x * x / 120.0;
                    series * value
                } else {
                    (1.0 - (-x).exp()) / s
                }
            }
            Self::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w / (s + r))
                .sum(),
        }
    }

    /// `P(S > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::Erlang { phases, rate } => {
                let x = rate * t;
                let mut term = 1.0;
                let mut acc = 1.0;
                for n in 1..*phases {
                    term *= x / n as f64;
                    acc += term;
                }
                (acc * (-x).exp()).min(1.0)
            }
            Self::Deterministic { value } => {
                if t < *value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * (-r * t).exp())
                .sum(),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// A time beyond which `P(S > t) < eps`.
    pub fn upper_support(&self, eps: f64) -> f64 {
        if let Self::Deterministic { value } = self {
            return *value;
        }
        let mut t = self.mean().max(1e-12);
        while self.survival(t) >= eps {
            t *= 2.0;
        }
        t
    }

    /// Draws one duration.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { rate } => sample_exp(rng, *rate),
            Self::Erlang { phases, rate } => (0..*phases).map(|_| sample_exp(rng, *rate)).sum(),
            Self::Deterministic { value } => *value,
            Self::HyperExponential { weights, rates } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut idx = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                sample_exp(rng, rates[idx])
            }
        }
    }
}

/// Exponential variate by inversion.
pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}
