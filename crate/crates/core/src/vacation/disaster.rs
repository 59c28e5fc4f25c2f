//! Vacation modes built from a standalone system with disasters.
//!
//! The vacation mode runs some inner dynamics and ends at rate `gamma`
//! whenever it is nonempty. Replacing each exit by a clearing event gives a
//! standalone system with disasters whose stationary law `Pi` is also the
//! vacation-mode law, so `Psi(z) = (Pi(z) - pi_0) / (1 - pi_0)` and
//! `E[B0] = 1 / (gamma (1 - pi_0))`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::{mean_by_extraction, positive, TransferLaw};
use crate::batch::BatchLaw;
use crate::error::{diagnostic, invalid, Result};
use crate::pgf::PgfHandle;
use crate::pmf::Pmf;
use crate::service::ServiceLaw;

/// Upper bound on the support computed for the chain-sequence law.
const CHAIN_N_CEILING: usize = 1 << 16;

/// M^X/G/1 vacation dynamics with clearing at rate `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MxG1Disaster {
    pub lambda_v: f64,
    pub batch: BatchLaw,
    pub service: ServiceLaw,
    /// Clearing rate inside the vacation mode.
    pub xi: f64,
    /// Vacation exit rate.
    pub gamma: f64,
}

impl MxG1Disaster {
    pub fn validate(&self) -> Result<()> {
        positive("vacation arrival rate", self.lambda_v)?;
        positive("clearing rate", self.xi)?;
        positive("exit rate", self.gamma)?;
        self.batch.validate()?;
        self.service.validate()
    }

    fn theta(&self) -> f64 {
        self.xi + self.gamma
    }

    /// `pi_0 = theta / (theta + lambda_v (1 - B_v(z_theta)))`.
    pub fn empty_probability(&self) -> Result<f64> {
        let root = mxg1_disaster_root(self)?;
        let b = self.batch.eval(Complex64::new(root, 0.0)).re;
        Ok(self.theta() / (self.theta() + self.lambda_v * (1.0 - b)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisasterCoupled {
    /// M/M/1 with exit (disaster) rate `gamma`.
    MM1 { lambda_v: f64, mu_v: f64, gamma: f64 },
    /// Chain-sequence birth-death process with parameter `a` in `(0, 1/4]`.
    ChainBdp { a: f64, gamma: f64 },
    MxG1Disaster(MxG1Disaster),
}

impl DisasterCoupled {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::MM1 { lambda_v, mu_v, gamma } => {
                positive("vacation arrival rate", *lambda_v)?;
                positive("vacation service rate", *mu_v)?;
                positive("exit rate", *gamma)
            }
            Self::ChainBdp { a, gamma } => {
                check_chain_a(*a)?;
                positive("exit rate", *gamma)
            }
            Self::MxG1Disaster(m) => m.validate(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::MM1 { .. } => "disaster_mm1",
            Self::ChainBdp { .. } => "disaster_chain_bdp",
            Self::MxG1Disaster(_) => "disaster_mxg1",
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Self::MM1 { gamma, .. } | Self::ChainBdp { gamma, .. } => *gamma,
            Self::MxG1Disaster(m) => m.gamma,
        }
    }

    /// Stationary probability that the vacation mode is empty.
    pub fn empty_probability(&self) -> Result<f64> {
        self.validate()?;
        match self {
            Self::MM1 { lambda_v, mu_v, gamma } => Ok(1.0 - mm1_disaster_load(*lambda_v, *mu_v, *gamma)),
            Self::ChainBdp { a, gamma } => Ok(chain_bdp_disaster_pmf(*a, *gamma, CHAIN_N_CEILING)?.prob(0)),
            Self::MxG1Disaster(m) => m.empty_probability(),
        }
    }

    pub fn expected_duration(&self) -> Result<f64> {
        let pi0 = self.empty_probability()?;
        Ok(1.0 / (self.gamma() * (1.0 - pi0)))
    }

    /// Vacation-mode law `pi_k` for `k = 0..=k_max`.
    pub fn stationary_pmf(&self, k_max: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            Self::MM1 { lambda_v, mu_v, gamma } => {
                let rho = mm1_disaster_load(*lambda_v, *mu_v, *gamma);
                Ok((0..=k_max).map(|k| (1.0 - rho) * rho.powi(k as i32)).collect())
            }
            Self::ChainBdp { a, gamma } => {
                Ok(chain_bdp_disaster_pmf(*a, *gamma, CHAIN_N_CEILING)?.dense(k_max + 1))
            }
            Self::MxG1Disaster(m) => {
                let pi0 = m.empty_probability()?;
                let psi = mxg1_disaster_psi(m)?.dense_pmf(k_max + 1)?;
                let mut out: Vec<f64> = psi.iter().map(|p| p * (1.0 - pi0)).collect();
                out[0] = pi0;
                Ok(out)
            }
        }
    }
}

fn check_chain_a(a: f64) -> Result<()> {
    if a > 0.0 && a <= 0.25 {
        Ok(())
    } else {
        Err(invalid!("chain parameter a = {a} must lie in (0, 0.25]"))
    }
}

/// Transfer law of a disaster-coupled vacation mode.
pub fn disaster_coupled_psi(d: &DisasterCoupled) -> Result<TransferLaw> {
    d.validate()?;
    match d {
        DisasterCoupled::MM1 { lambda_v, mu_v, gamma } => {
            let rho = mm1_disaster_load(*lambda_v, *mu_v, *gamma);
            let psi = PgfHandle::new(move |z| z * (1.0 - rho) / (1.0 - z * rho), None);
            TransferLaw::from_pgf(psi, 1.0 / (1.0 - rho))
        }
        DisasterCoupled::ChainBdp { a, gamma } => {
            let pi = chain_bdp_disaster_pmf(*a, *gamma, CHAIN_N_CEILING)?;
            let busy = 1.0 - pi.prob(0);
            if busy <= 0.0 {
                return Err(diagnostic!("vacation mode is never occupied"));
            }
            let weights: Vec<f64> = pi.weights()[1..].iter().map(|p| p / busy).collect();
            let total: f64 = weights.iter().sum();
            let pmf = if total <= 1.0 {
                Pmf::with_truncation(1, weights, 1.0 - total)?
            } else {
                Pmf::from_unnormalized(1, weights)?
            };
            TransferLaw::from_pmf(pmf)
        }
        DisasterCoupled::MxG1Disaster(m) => mxg1_disaster_psi(m),
    }
}

/// Geometric parameter of the M/M/1 queue with disasters at rate `gamma`:
/// the smaller root of `mu x^2 - (gamma + lambda + mu) x + lambda = 0`.
pub fn mm1_disaster_load(lambda: f64, mu: f64, gamma: f64) -> f64 {
    let s = gamma + lambda + mu;
    2.0 * lambda / (s + (s * s - 4.0 * lambda * mu).sqrt())
}

/// Second-kind Chebyshev polynomial `U_n(x)` by the three-term recurrence.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Ratios `U_k(x) / U_(k-1)(x)` for `k = 1..=n`. For `x >= 1` these stay in
/// `[1, 2x]` where the polynomials themselves overflow.
pub fn chebyshev_u_ratios(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut r = 2.0 * x;
    for _ in 0..n {
        out.push(r);
        r = 2.0 * x - 1.0 / r;
    }
    out
}

/// Birth and death rates `(lambda_n, mu_n)` of the chain-sequence process.
pub fn chain_bdp_rates(a: f64, n: usize) -> Result<(f64, f64)> {
    check_chain_a(a)?;
    let alpha = 2.0 * a.sqrt();
    let ratios = chebyshev_u_ratios(1.0 / alpha, n + 1);
    let lambda = 0.5 * alpha * ratios[n];
    let mu = if n == 0 { 0.0 } else { 0.5 * alpha / ratios[n - 1] };
    Ok((lambda, mu))
}

/// Stationary law of the chain-sequence process with disasters at rate
/// `gamma`, `pi_n = (gamma / sqrt(a)) U_n(x) r^(n+1)` with `x = 1/(2 sqrt(a))`
/// and `r = (gamma + 1 - sqrt((gamma + 1)^2 - 4a)) / (2 sqrt(a))`.
/// Terms are generated until negligible or `n_max`; any deficit is kept as
/// truncation mass.
pub fn chain_bdp_disaster_pmf(a: f64, gamma: f64, n_max: usize) -> Result<Pmf> {
    check_chain_a(a)?;
    positive("exit rate", gamma)?;
    let sa = a.sqrt();
    let x = 1.0 / (2.0 * sa);
    let g1 = gamma + 1.0;
    // Rationalized form of the smaller root, stable for large gamma.
    let r = 2.0 * sa / (g1 + (g1 * g1 - 4.0 * a).sqrt());
    let mut weights = vec![gamma / sa * r];
    let mut u_ratio = 2.0 * x;
    let mut sum = weights[0];
    for _ in 1..=n_max {
        let next = weights.last().copied().unwrap_or(0.0) * u_ratio * r;
        u_ratio = 2.0 * x - 1.0 / u_ratio;
        weights.push(next);
        sum += next;
        if next < 1e-18 * sum && u_ratio * r < 1.0 {
            break;
        }
    }
    let deficit = 1.0 - sum;
    if deficit.abs() > 1e-8 {
        return Err(diagnostic!(
            "chain-sequence law sums to {sum} over {} terms",
            weights.len()
        ));
    }
    if deficit >= 0.0 {
        Pmf::with_truncation(0, weights, deficit)
    } else {
        Pmf::from_unnormalized(0, weights)
    }
}

/// Root `z_theta` in `(0, 1)` of `z = F~(theta + lambda_v (1 - B_v(z)))`,
/// `theta = xi + gamma`.
pub fn mxg1_disaster_root(m: &MxG1Disaster) -> Result<f64> {
    m.validate()?;
    let theta = m.theta();
    let map = |z: f64| {
        let s = theta + m.lambda_v * (1.0 - m.batch.eval(Complex64::new(z, 0.0)).re);
        m.service.lst(Complex64::new(s, 0.0)).re
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if map(mid) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..4 {
        z = map(z);
    }
    let residual = (z - map(z)).abs();
    if !(z > 0.0 && z < 1.0) || residual > 1e-13 {
        return Err(diagnostic!("clearing root {z} has residual {residual}"));
    }
    Ok(z)
}

/// Transfer law for M^X/G/1 vacation dynamics with clearing, with
/// `theta = xi + gamma` and `alpha(z) = lambda_v (1 - B_v(z))`:
/// `Psi(z) = theta / (1 - B_v(z_theta)) * z (B_v(z_theta) - B_v(z)) / (F~(theta + alpha(z)) - z)
///           * (1 - F~(theta + alpha(z))) / (theta + alpha(z))`.
pub fn mxg1_disaster_psi(m: &MxG1Disaster) -> Result<TransferLaw> {
    let root = mxg1_disaster_root(m)?;
    let theta = m.theta();
    let b_root = m.batch.eval(Complex64::new(root, 0.0)).re;
    if 1.0 - b_root <= 0.0 {
        return Err(diagnostic!("batch PGF equals one at the clearing root"));
    }
    let spec = m.clone();
    let raw = move |z: Complex64| {
        let bz = spec.batch.eval(z);
        let s = (1.0 - bz) * spec.lambda_v + theta;
        let num = z * (b_root - bz) * spec.service.survival_transform(s);
        num / (spec.service.lst(s) - z) * (theta / (1.0 - b_root))
    };
    // The quotient has a removable singularity at the root; interpolate across it.
    let h = 1e-5;
    let psi = PgfHandle::new(
        move |z| {
            let d = z - root;
            if d.norm() < h {
                let t = d / h;
                let left = raw(Complex64::new(root - h, 0.0));
                let right = raw(Complex64::new(root + h, 0.0));
                left * (1.0 - t) * 0.5 + right * (1.0 + t) * 0.5
            } else {
                raw(z)
            }
        },
        None,
    );
    let mean = mean_by_extraction(&psi)?;
    TransferLaw::from_pgf(psi, mean)
}
