//! Per-cycle records and pathwise audits.

use alloc::vec::Vec;

use crate::error::{diagnostic, Result};

/// Relative tolerance for the time identities; they are exact up to rounding.
pub const TIME_REL_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One regeneration cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub vacation_duration: f64,
    pub working_duration: f64,
    pub transfer: usize,
    /// `T_j`: working-mode time with `j` customers.
    pub time_in_state: Vec<f64>,
    /// `N_k`: down-crossings from `k + 1` to `k`.
    pub down_crossings: Vec<u64>,
    /// Up-crossings from `k` to above `k`, at arrival and transfer epochs.
    pub up_crossings: Vec<u64>,
    /// `C_1..C_Y`: first-passage times from level `Y - i + 1` to `Y - i`.
    pub sub_busy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleLog {
    pub records: Vec<CycleRecord>,
}

/// Pathwise audit counters; a correct simulator keeps every field at zero
/// except `cycles` and the rounding-sized relative errors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathAudit {
    pub cycles: u64,
    pub crossing_mismatches: u64,
    /// Largest `|sum_j T_j - T| / T`.
    pub max_level_time_error: f64,
    /// Largest `|sum_i C_i - T| / T`.
    pub max_sub_busy_error: f64,
}

impl PathAudit {
    pub(crate) fn note_time_errors(&mut self, total: f64, by_level: f64, by_sub: f64) {
        let rel = |x: f64| (x - total).abs() / total;
        self.max_level_time_error = self.max_level_time_error.max(rel(by_level));
        self.max_sub_busy_error = self.max_sub_busy_error.max(rel(by_sub));
    }

    pub(crate) fn merge(&mut self, other: &PathAudit) {
        self.cycles += other.cycles;
        self.crossing_mismatches += other.crossing_mismatches;
        self.max_level_time_error = self.max_level_time_error.max(other.max_level_time_error);
        self.max_sub_busy_error = self.max_sub_busy_error.max(other.max_sub_busy_error);
    }

    pub fn passed(&self) -> bool {
        self.crossing_mismatches == 0
            && self.max_level_time_error <= TIME_REL_TOL
            && self.max_sub_busy_error <= TIME_REL_TOL
    }
}

/// Re-checks a stored log: `N_k` equals the up-crossings of every level in
/// every cycle (exactly), and both time decompositions of the working
/// duration hold to [`TIME_REL_TOL`].
pub fn level_crossing_audit(log: &CycleLog) -> Result<PathAudit> {
    let mut audit = PathAudit::default();
    for (c, r) in log.records.iter().enumerate() {
        audit.cycles += 1;
        if r.down_crossings != r.up_crossings {
            audit.crossing_mismatches += 1;
        }
        let mut levels = Neumaier::default();
        r.time_in_state.iter().for_each(|t| levels.add(*t));
        let mut subs = Neumaier::default();
        r.sub_busy.iter().for_each(|t| subs.add(*t));
        audit.note_time_errors(r.working_duration, levels.value(), subs.value());
        if r.sub_busy.len() != r.transfer {
            return Err(diagnostic!(
                "cycle {c}: {} sub-busy periods for {} transferred customers",
                r.sub_busy.len(),
                r.transfer
            ));
        }
    }
    if !audit.passed() {
        return Err(diagnostic!("pathwise audit failed: {audit:?}"));
    }
    Ok(audit)
}
