//! Steady-state summaries shared by the analytic, oracle and simulation routes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::extract_coefficients;
use crate::mxg1::{cycle_quantities, decomposition_pgf, WorkingModeSpec};
use crate::vacation::VacationModelSpec;

/// Which route produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Analytic,
    Oracle,
    Simulated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Oracle => "oracle",
            Self::Simulated => "simulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(Self::Analytic),
            "oracle" => Some(Self::Oracle),
            "simulated" => Some(Self::Simulated),
            _ => None,
        }
    }
}

/// All vectors are indexed by the number of customers, so entry 0 of the
/// working-mode vectors is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub provenance: Provenance,
    /// `p_(0,k)` when the route determines the vacation-mode law.
    pub vacation: Option<Vec<f64>>,
    /// `p_(1,j)` when the mode probabilities are known.
    pub working: Option<Vec<f64>>,
    /// `p_(1,j) / p1.`
    pub conditional_working: Vec<f64>,
    pub conditional_vacation: Option<Vec<f64>>,
    /// `P(Y = k)`.
    pub transfer: Option<Vec<f64>>,
    pub p0_dot: Option<f64>,
    pub p1_dot: Option<f64>,
    pub mean_y: Option<f64>,
    pub e_b0: Option<f64>,
    pub e_b1: Option<f64>,
    /// Conditional working-mode mass beyond the reported range.
    pub truncation_mass: f64,
    /// Standard errors of `conditional_working` (simulation only).
    pub conditional_working_stderr: Option<Vec<f64>>,
}

/// Grid for extracting conditional laws.
fn report_grid(j_max: usize) -> usize {
    (8 * (j_max + 1)).next_power_of_two().max(4096)
}

/// Decomposition route: the conditional working-mode law from its PGF, and
/// the mode probabilities whenever the vacation model determines `E[B0]`.
pub fn analytic_report(
    spec: &WorkingModeSpec,
    vac: &VacationModelSpec,
    j_max: usize,
) -> Result<SteadyStateReport> {
    spec.validate()?;
    let transfer = vac.transfer_law()?;
    let g = decomposition_pgf(spec, &transfer)?;
    let pmf = extract_coefficients(&g, j_max, report_grid(j_max))?;
    let conditional_working = pmf.dense(j_max + 1);
    let e_b0 = match vac.expected_vacation_duration() {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let mut report = SteadyStateReport {
        provenance: Provenance::Analytic,
        vacation: None,
        working: None,
        conditional_working,
        conditional_vacation: None,
        transfer: Some(transfer.dense_pmf(j_max + 1)?),
        p0_dot: None,
        p1_dot: None,
        mean_y: Some(transfer.mean_y),
        e_b0,
        e_b1: None,
        truncation_mass: pmf.truncation_mass(),
        conditional_working_stderr: None,
    };
    if let Some(e_b0) = e_b0 {
        let cycles = cycle_quantities(spec, transfer.mean_y, e_b0)?;
        report.p0_dot = Some(cycles.p0_dot);
        report.p1_dot = Some(cycles.p1_dot);
        report.e_b1 = Some(cycles.e_b1);
        report.working = Some(
            report
                .conditional_working
                .iter()
                .map(|p| p * cycles.p1_dot)
                .collect(),
        );
        if let Some(v) = vac.vacation_probs(cycles.p0_dot, j_max)? {
            report.conditional_vacation = Some(v.iter().map(|p| p / cycles.p0_dot).collect());
            report.vacation = Some(v);
        }
    }
    Ok(report)
}
