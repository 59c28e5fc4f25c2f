//! Vacation-mode models and the transfer law `Y` they hand to the working mode.
//!
//! Every model yields a [`TransferLaw`] (the PGF `Psi(z)` of the number of
//! customers moved into the working mode when a vacation ends) and, when its
//! dynamics are fully specified, the expected vacation-mode duration `E[B0]`
//! per cycle.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{diagnostic, invalid, Error, Result};
use crate::fft::{extract_series, pmf_from_extraction, ExtractOptions};
use crate::pgf::{pgf_from_pmf, PgfHandle};
use crate::pmf::Pmf;

mod disaster;
mod hypergeometric;
mod markovian;
mod multiple;
mod reneging;

pub use disaster::{
    chain_bdp_disaster_pmf, chain_bdp_rates, chebyshev_u, chebyshev_u_ratios,
    disaster_coupled_psi, mm1_disaster_load, mxg1_disaster_psi, mxg1_disaster_root,
    DisasterCoupled, MxG1Disaster,
};
pub use hypergeometric::{hypergeometric_pfq, hypergeometric_psi, HypergeometricRatio};
pub use markovian::{
    calibrate_p00, expected_vacation_duration, markovian_psi, markovian_steady_state,
    MarkovianBalking, RateSequence, VacationSteadyState,
};
pub use multiple::{multiple_vacation_psi, MultipleVacations};
pub use reneging::{binomial_reneging_g0, psi_from_g0, BinomialReneging};

/// Grid used when a transfer law has to be materialized from its PGF.
pub(crate) const TRANSFER_GRID: usize = 8192;

/// The law of the number `Y >= 1` of customers transferred at vacation end.
#[derive(Debug, Clone)]
pub struct TransferLaw {
    pub psi: PgfHandle,
    pub mean_y: f64,
    pub pmf: Option<Pmf>,
}

impl TransferLaw {
    /// From an explicit pmf on `{1, 2, ...}`.
    pub fn from_pmf(pmf: Pmf) -> Result<Self> {
        if pmf.prob(0) > 0.0 {
            return Err(invalid!("transfer law must put no mass on zero"));
        }
        let law = Self {
            psi: pgf_from_pmf(&pmf),
            mean_y: pmf.mean(),
            pmf: Some(pmf),
        };
        law.validate()?;
        Ok(law)
    }

    /// From a closed-form PGF and its mean.
    pub fn from_pgf(psi: PgfHandle, mean_y: f64) -> Result<Self> {
        let law = Self {
            psi: psi.with_mean(mean_y),
            mean_y,
            pmf: None,
        };
        law.validate()?;
        Ok(law)
    }

    /// `psi_0 = 0`, `Psi(1) = 1`, finite mean.
    pub fn validate(&self) -> Result<()> {
        self.psi.check_proper()?;
        let at_zero = self.psi.eval(Complex64::new(0.0, 0.0));
        if at_zero.norm() > 1e-12 {
            return Err(diagnostic!("transfer law has psi_0 = {at_zero}"));
        }
        if !(self.mean_y.is_finite() && self.mean_y >= 1.0 - 1e-12) {
            return Err(diagnostic!("transfer mean {} is not finite and >= 1", self.mean_y));
        }
        Ok(())
    }

    /// `P(Y = k)` for `k = 0..len`, extracting coefficients when no pmf is attached.
    pub fn dense_pmf(&self, len: usize) -> Result<Vec<f64>> {
        if let Some(pmf) = &self.pmf {
            return Ok(pmf.dense(len));
        }
        let n_max = len.saturating_sub(1);
        let opts = ExtractOptions::for_n_max(n_max).with_grid(TRANSFER_GRID.max(4 * len));
        let ex = extract_series(|z| self.psi.eval(z), n_max, opts)?;
        Ok(pmf_from_extraction(ex)?.dense(len))
    }
}

/// Mean of a proper PGF from its extracted coefficients, failing if more
/// than `1e-12` of the mass lies beyond the extraction window.
pub(crate) fn mean_by_extraction(psi: &PgfHandle) -> Result<f64> {
    let mut n_max = 1024;
    loop {
        let opts = ExtractOptions::for_n_max(n_max).with_grid(8 * (n_max + 1));
        let ex = extract_series(|z| psi.eval(z), n_max, opts)?;
        let pmf = pmf_from_extraction(ex)?;
        if pmf.truncation_mass() < 1e-13 {
            return Ok(pmf.mean());
        }
        if n_max >= 1 << 17 {
            return Err(diagnostic!(
                "transfer law has {} mass beyond {n_max}",
                pmf.truncation_mass()
            ));
        }
        n_max *= 4;
    }
}

/// Tagged union over the supported vacation-mode models.
#[derive(Debug, Clone, PartialEq)]
pub enum VacationModelSpec {
    MultipleVacations(MultipleVacations),
    MarkovianBalking(MarkovianBalking),
    HypergeometricRatio(HypergeometricRatio),
    BinomialReneging(BinomialReneging),
    DisasterCoupled(DisasterCoupled),
}

impl VacationModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::MultipleVacations(m) => m.validate(),
            Self::MarkovianBalking(m) => m.validate(),
            Self::HypergeometricRatio(h) => h.validate(),
            Self::BinomialReneging(m) => m.validate(),
            Self::DisasterCoupled(d) => d.validate(),
        }
    }

    /// Short machine name of the model.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::MultipleVacations(_) => "multiple_vacations",
            Self::MarkovianBalking(_) => "markovian_balking",
            Self::HypergeometricRatio(_) => "hypergeometric_ratio",
            Self::BinomialReneging(_) => "binomial_reneging",
            Self::DisasterCoupled(d) => d.tag(),
        }
    }

    /// The transfer law `Psi`.
    pub fn transfer_law(&self) -> Result<TransferLaw> {
        self.validate()?;
        match self {
            Self::MultipleVacations(m) => multiple_vacation_psi(m),
            Self::MarkovianBalking(m) => {
                let ss = markovian_steady_state(m, None)?;
                markovian_psi(&ss, &m.exit)
            }
            Self::HypergeometricRatio(h) => hypergeometric_psi(h),
            Self::BinomialReneging(m) => m.transfer_law(),
            Self::DisasterCoupled(d) => disaster_coupled_psi(d),
        }
    }

    /// Expected vacation-mode duration per cycle.
    pub fn expected_vacation_duration(&self) -> Result<f64> {
        self.validate()?;
        match self {
            Self::MultipleVacations(m) => m.expected_duration(),
            Self::MarkovianBalking(m) => expected_vacation_duration(m),
            Self::HypergeometricRatio(_) => Err(Error::Unsupported(
                "a hypergeometric transfer law carries no vacation dynamics".into(),
            )),
            Self::BinomialReneging(m) => m.expected_duration(),
            Self::DisasterCoupled(d) => d.expected_duration(),
        }
    }

    /// Vacation-mode probabilities `p_(0,k)` (scaled to sum to `p0_dot`),
    /// when the model determines them in closed form.
    pub fn vacation_probs(&self, p0_dot: f64, k_max: usize) -> Result<Option<Vec<f64>>> {
        match self {
            Self::MarkovianBalking(m) if m.batch.is_single() => {
                let ss = markovian_steady_state(m, Some(k_max))?;
                let total: f64 = ss.p0.iter().sum();
                Ok(Some(ss.p0.iter().map(|p| p * p0_dot / total).collect()))
            }
            Self::BinomialReneging(m) => {
                let law = m.normalized_g0_pmf(k_max)?;
                Ok(Some(law.iter().map(|p| p * p0_dot).collect()))
            }
            Self::DisasterCoupled(d) => {
                let pi = d.stationary_pmf(k_max)?;
                Ok(Some(pi.iter().map(|p| p * p0_dot).collect()))
            }
            _ => Ok(None),
        }
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid!("{name} must be finite and positive, got {v}"))
    }
}
