//! Markovian vacation mode with balking, state-dependent exits and disasters.
//!
//! In state `i` (customers present during the vacation) batches arrive at
//! rate `lambda_v` and are admitted with probability `p_i`; the vacation ends
//! at rate `gamma_i` (`gamma_0 = 0`) and a disaster clears the system at rate
//! `rho_i`. With unit batches the vacation-mode law has product form.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;


use super::{positive, TransferLaw};
use crate::batch::BatchLaw;
use crate::error::{diagnostic, invalid, Error, Result};
use crate::pmf::Pmf;
use crate::series::{MAX_TERMS, REL_STOP};

/// A nonnegative sequence indexed by the number of customers `k >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSequence {
    Constant(f64),
    /// Ratio of polynomials in `k`, coefficients in ascending powers.
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// Explicit leading values, then `tail` for every later index.
    Table { values: Vec<f64>, tail: f64 },
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl RateSequence {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Rational {
                numerator,
                denominator,
            } => horner(numerator, k as f64) / horner(denominator, k as f64),
            Self::Table { values, tail } => values.get(k).copied().unwrap_or(*tail),
        }
    }

    /// Checks values on a probe range plus the tail behaviour.
    fn validate(&self, name: &str, upper: Option<f64>) -> Result<()> {
        if let Self::Rational { denominator, .. } = self {
            if denominator.iter().all(|c| *c == 0.0) {
                return Err(invalid!("{name}: zero denominator polynomial"));
            }
        }
        for k in 0..1000 {
            let v = self.at(k);
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid!("{name}[{k}] = {v} is not a nonnegative number"));
            }
            if let Some(u) = upper {
                if v > u {
                    return Err(invalid!("{name}[{k}] = {v} exceeds {u}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovianBalking {
    pub lambda_v: f64,
    /// Admission probabilities `p_i`.
    pub admit: RateSequence,
    /// Exit rates `gamma_i`; the value at `i = 0` is ignored.
    pub exit: RateSequence,
    /// Disaster rates `rho_i`; the value at `i = 0` is ignored.
    pub disaster: RateSequence,
    /// Batch-size law `g_i` of vacation arrivals.
    pub batch: BatchLaw,
}

impl MarkovianBalking {
    pub fn validate(&self) -> Result<()> {
        positive("vacation arrival rate", self.lambda_v)?;
        self.admit.validate("admit", Some(1.0))?;
        self.exit.validate("exit", None)?;
        self.disaster.validate("disaster", None)?;
        self.batch.validate()?;
        if self.admit.at(0) == 0.0 {
            return Err(invalid!("admit[0] = 0 leaves the vacation stuck in the empty state"));
        }
        Ok(())
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.exit.at(i)
        }
    }

    pub fn disaster_rate(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.disaster.at(i)
        }
    }

    /// Total outflow rate `lambda_v p_i + gamma_i + rho_i` of state `i >= 1`.
    fn outflow(&self, i: usize) -> f64 {
        self.lambda_v * self.admit.at(i) + self.exit_rate(i) + self.disaster_rate(i)
    }

    /// `lambda_v p_(k-1) / (lambda_v p_k + gamma_k + rho_k)`.
    fn step_ratio(&self, k: usize) -> Result<f64> {
        let den = self.outflow(k);
        if den <= 0.0 {
            return Err(invalid!("state {k} has zero outflow rate"));
        }
        Ok(self.lambda_v * self.admit.at(k - 1) / den)
    }
}

/// Vacation-mode probabilities. Unnormalized (seeded with `p_(0,0) = 1`)
/// until passed through [`calibrate_p00`].
#[derive(Debug, Clone, PartialEq)]
pub struct VacationSteadyState {
    /// `p0[k] = p_(0,k)`.
    pub p0: Vec<f64>,
    pub p00: f64,
    /// `E[B0]`, when known.
    pub e_b0: Option<f64>,
    /// `sum_i gamma_i p_(0,i)`: the normalizer of the transfer law.
    pub exit_mass: f64,
}

/// Product-form vacation law for unit batches, seeded with `p_(0,0) = 1`.
///
/// With `k_max = Some(n)` exactly `n + 1` states are produced; with `None`
/// the product is extended until both it and its exit-weighted version are
/// negligible.
pub fn markovian_steady_state(
    m: &MarkovianBalking,
    k_max: Option<usize>,
) -> Result<VacationSteadyState> {
    m.validate()?;
    if !m.batch.is_single() {
        return Err(Error::Unsupported(
            "closed-form vacation law needs unit batches; use the CTMC oracle".to_string(),
        ));
    }
    let mut p0 = vec![1.0];
    let mut mass = 1.0;
    let mut exit_mass = 0.0;
    let cap = k_max.unwrap_or(MAX_TERMS);
    let mut term = 1.0;
    let mut converged = false;
    for k in 1..=cap {
        term *= m.step_ratio(k)?;
        let exit_term = m.exit_rate(k) * term;
        p0.push(term);
        mass += term;
        exit_mass += exit_term;
        if k_max.is_none()
            && k >= 2
            && (term == 0.0
                || (term <= REL_STOP * mass && exit_term <= REL_STOP * exit_mass))
        {
            converged = true;
            break;
        }
    }
    if k_max.is_none() && !converged {
        return Err(Error::Divergent {
            what: "vacation-mode product form".to_string(),
            terms: cap,
        });
    }
    let e_b0 = expected_vacation_duration(m).ok();
    Ok(VacationSteadyState {
        p0,
        p00: 1.0,
        e_b0,
        exit_mass,
    })
}

/// `P(Y = i) = gamma_i p_(0,i) / sum_j gamma_j p_(0,j)`.
pub fn markovian_psi(ss: &VacationSteadyState, exit: &RateSequence) -> Result<TransferLaw> {
    let mut weights: Vec<f64> = ss
        .p0
        .iter()
        .enumerate()
        .map(|(i, p)| if i == 0 { 0.0 } else { exit.at(i) * p })
        .collect();
    let exit_mass: f64 = weights.iter().sum();
    if !(exit_mass.is_finite() && exit_mass > 0.0) {
        return Err(invalid!("vacation never ends: exit mass {exit_mass}"));
    }
    for w in &mut weights {
        *w /= exit_mass;
    }
    TransferLaw::from_pmf(Pmf::from_unnormalized(0, weights)?)
}

/// `E[B0]`: expected sojourn before exit, restarting from the empty state
/// after each disaster.
pub fn expected_vacation_duration(m: &MarkovianBalking) -> Result<f64> {
    m.validate()?;
    if !m.batch.is_single() {
        return Err(Error::Unsupported(
            "closed-form vacation duration needs unit batches; use the CTMC oracle".to_string(),
        ));
    }
    let mut numerator = 1.0 / (m.lambda_v * m.admit.at(0));
    let mut disaster_prob = 0.0;
    // reach = probability of reaching state i from state 1 before exit or disaster
    let mut reach = 1.0;
    let mut converged = false;
    for i in 1..MAX_TERMS {
        let q = m.outflow(i);
        if q <= 0.0 {
            return Err(invalid!("state {i} has zero outflow rate"));
        }
        let time = reach / q;
        numerator += time;
        disaster_prob += reach * m.disaster_rate(i) / q;
        reach *= m.lambda_v * m.admit.at(i) / q;
        if reach == 0.0 || (i >= 2 && time <= REL_STOP * numerator && reach <= REL_STOP) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Divergent {
            what: "expected vacation duration".to_string(),
            terms: MAX_TERMS,
        });
    }
    let denominator = 1.0 - disaster_prob;
    if !(denominator > 0.0) {
        return Err(diagnostic!(
            "vacation never ends: disaster probability {disaster_prob}"
        ));
    }
    Ok(numerator / denominator)
}

/// Rescales a seeded vacation law so that it sums to
/// `p0. = E[B0] / (E[B0] + E[B1])`.
pub fn calibrate_p00(ss: &VacationSteadyState, e_b0: f64, e_b1: f64) -> Result<VacationSteadyState> {
    if !(e_b0 > 0.0 && e_b1 > 0.0) {
        return Err(invalid!("cycle durations must be positive: {e_b0}, {e_b1}"));
    }
    let normalizer: f64 = ss.p0.iter().sum::<f64>() / ss.p00;
    if !(normalizer.is_finite() && normalizer >= 1.0) {
        return Err(diagnostic!("vacation normalizer {normalizer} is invalid"));
    }
    let p0_dot = e_b0 / (e_b0 + e_b1);
    let p00 = p0_dot / normalizer;
    let scale = p00 / ss.p00;
    Ok(VacationSteadyState {
        p0: ss.p0.iter().map(|p| p * scale).collect(),
        p00,
        e_b0: Some(e_b0),
        exit_mass: ss.exit_mass * scale,
    })
}
