//! Truncation rule shared by every infinite sum in the crate.
//!
//! A sum stops once the current term is below `REL_STOP` times the running
//! sum; a hard cap of `MAX_TERMS` terms turns a non-settling sum into an error.

use alloc::string::ToString;

use crate::error::{Error, Result};

pub const REL_STOP: f64 = 1e-14;
pub const MAX_TERMS: usize = 1_000_000;

/// Outcome of a truncated sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Magnitude of the last term added; a tail estimate for geometric decay.
    pub last_term: f64,
}

/// Sums `term(0), term(1), ...` under the crate truncation rule.
///
/// `min_terms` forces at least that many terms (for sums whose leading terms
/// can vanish).
pub fn sum_series<F>(mut term: F, min_terms: usize, what: &str) -> Result<SeriesSum>
where
    F: FnMut(usize) -> f64,
{
    let mut value = 0.0;
    for k in 0..MAX_TERMS {
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::Divergent {
                what: what.to_string(),
                terms: k,
            });
        }
        value += t;
        if k + 1 >= min_terms && t.abs() <= REL_STOP * value.abs() {
            return Ok(SeriesSum {
                value,
                terms: k + 1,
                last_term: t.abs(),
            });
        }
    }
    Err(Error::Divergent {
        what: what.to_string(),
        terms: MAX_TERMS,
    })
}
