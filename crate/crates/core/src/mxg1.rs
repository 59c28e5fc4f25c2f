//! The working-mode `M^X/G/1` queue and the decomposition of its conditional
//! queue-length law.
//!
//! Two independent routes to the conditional working-mode law are provided:
//! the closed-form product [`decomposition_pgf`] and the level-crossing
//! recursion [`recursive_working_probs`]. They must agree coefficient by
//! coefficient; the test suites hold them to `1e-9`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::batch::BatchLaw;
use crate::error::{diagnostic, invalid, Error, Result};
use crate::fft::{extract_series, ExtractOptions};
use crate::pgf::{equilibrium_pgf, PgfHandle};
use crate::quad::integrate_vec;
use crate::service::ServiceLaw;
use crate::vacation::TransferLaw;

/// Default truncation level for working-mode probabilities.
pub const DEFAULT_J_MAX: usize = 256;

/// Largest tolerated disagreement between the two `a_j` routes.
pub const A_CROSS_CHECK_TOL: f64 = 1e-7;

/// Batch Poisson arrivals at rate `lambda`, batch law `batch`, single server
/// with service law `service`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingModeSpec {
    pub lambda: f64,
    pub batch: BatchLaw,
    pub service: ServiceLaw,
}

impl WorkingModeSpec {
    /// Validates rates and the stability condition `lambda E[S] E[B] < 1`.
    pub fn new(lambda: f64, batch: BatchLaw, service: ServiceLaw) -> Result<Self> {
        let spec = Self {
            lambda,
            batch,
            service,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid!("arrival rate must be positive, got {}", self.lambda));
        }
        self.batch.validate()?;
        self.service.validate()?;
        let rho = self.rho();
        if rho >= 1.0 {
            return Err(Error::Unstable { rho });
        }
        Ok(())
    }

    /// Offered load `lambda E[S] E[B]`.
    pub fn rho(&self) -> f64 {
        self.lambda * self.service.mean() * self.batch.mean()
    }

    fn equilibrium_batch(&self) -> PgfHandle {
        equilibrium_pgf(&self.batch.pgf()).expect("batch mean is finite and >= 1")
    }
}

/// `alpha(z) = int_0^inf exp(-lambda (1 - B(z)) t) (1 - F_S(t)) dt`.
pub fn alpha_of_z(spec: &WorkingModeSpec, z: Complex64) -> Complex64 {
    let s = (1.0 - spec.batch.eval(z)) * spec.lambda;
    spec.service.survival_transform(s)
}

/// PGF of the number in system of the ordinary `M^X/G/1` queue.
pub fn regular_mxg1_pgf(spec: &WorkingModeSpec) -> Result<PgfHandle> {
    spec.validate()?;
    let spec = spec.clone();
    let b_eq = spec.equilibrium_batch();
    let rho = spec.rho();
    let mean_b = spec.batch.mean();
    Ok(PgfHandle::new(
        move |z| {
            let s = (1.0 - spec.batch.eval(z)) * spec.lambda;
            let alpha = spec.service.survival_transform(s);
            // 1 - lambda alpha (1 - B) = lst(s); (1 - B)/(1 - z) = E[B] B^e(z).
            let num = spec.service.lst(s);
            let den = 1.0 - alpha * b_eq.eval(z) * (spec.lambda * mean_b);
            num * (1.0 - rho) / den
        },
        None,
    ))
}

/// PGF of the number in system of the ordinary `M^X/G/1` queue given that
/// the server is busy.
pub fn conditional_busy_pgf(spec: &WorkingModeSpec) -> Result<PgfHandle> {
    spec.validate()?;
    let spec = spec.clone();
    let b_eq = spec.equilibrium_batch();
    let rho = spec.rho();
    let mean_b = spec.batch.mean();
    let mean_s = spec.service.mean();
    Ok(PgfHandle::new(
        move |z| {
            let alpha = alpha_of_z(&spec, z);
            let be = b_eq.eval(z);
            let den = 1.0 - alpha * be * (spec.lambda * mean_b);
            z * alpha * be * spec.lambda * ((1.0 - rho) / (spec.lambda * mean_s)) / den
        },
        None,
    ))
}

/// Conditional working-mode PGF when every working period starts with a
/// single customer:
/// `(1 - rho)/(lambda E[S]) * lambda z alpha(z) / (1 - lambda alpha(z) (1 - B(z))/(1 - z))`.
pub fn single_start_pgf(spec: &WorkingModeSpec) -> Result<PgfHandle> {
    spec.validate()?;
    let spec = spec.clone();
    let b_eq = spec.equilibrium_batch();
    let rho = spec.rho();
    let mean_b = spec.batch.mean();
    let mean_s = spec.service.mean();
    Ok(PgfHandle::new(
        move |z| {
            let alpha = alpha_of_z(&spec, z);
            let den = 1.0 - alpha * b_eq.eval(z) * (spec.lambda * mean_b);
            z * alpha * spec.lambda * ((1.0 - rho) / (spec.lambda * mean_s)) / den
        },
        None,
    ))
}

/// Conditional working-mode PGF `P1~(z) / B^e(z) * Psi^e(z)`.
///
/// `B^e` is divided out as a value, never as a series. Where `|B^e(z)|`
/// falls below `1e-12` (possible on the unit circle for lattice batch laws)
/// the algebraically cancelled single-start form is used instead.
pub fn decomposition_pgf(spec: &WorkingModeSpec, transfer: &TransferLaw) -> Result<PgfHandle> {
    let busy = conditional_busy_pgf(spec)?;
    let single = single_start_pgf(spec)?;
    let b_eq = spec.equilibrium_batch();
    if !(transfer.mean_y.is_finite() && transfer.mean_y >= 1.0) {
        return Err(invalid!("transfer mean {} must be finite and >= 1", transfer.mean_y));
    }
    let psi_eq = equilibrium_pgf(&transfer.psi.clone().with_mean(transfer.mean_y))?;
    for i in 0..64 {
        let x = i as f64 / 64.0;
        let v = b_eq.eval_real(x);
        if !(v > 1e-12) {
            return Err(diagnostic!("equilibrium batch PGF vanishes at {x}: {v}"));
        }
    }
    let g = PgfHandle::new(
        move |z| {
            let be = b_eq.eval(z);
            let head = if be.norm() > 1e-12 {
                busy.eval(z) / be
            } else {
                single.eval(z)
            };
            head * psi_eq.eval(z)
        },
        None,
    );
    g.check_proper()?;
    Ok(g)
}

fn alpha_grid(j_max: usize) -> ExtractOptions {
    ExtractOptions::for_n_max(j_max).with_grid((4 * (j_max + 1)).max(4096))
}

/// `a_j` as Taylor coefficients of `alpha(z)`; the production route.
pub fn a_coefficients_extracted(spec: &WorkingModeSpec, j_max: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let ex = extract_series(|z| alpha_of_z(spec, z), j_max, alpha_grid(j_max))?;
    if ex.max_imaginary > 1e-10 {
        return Err(diagnostic!("alpha(z) extraction residue {}", ex.max_imaginary));
    }
    Ok(ex.coefficients)
}

/// `a_j = int_0^inf r_j(t) (1 - F_S(t)) dt` with `r_j` the compound Poisson
/// arrival-count law, by adaptive quadrature; the validation route.
pub fn a_coefficients_quadrature(spec: &WorkingModeSpec, j_max: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = j_max + 1;
    // conv[k][j] = P(B_1 + ... + B_k = j); batches are >= 1 so k <= j.
    let b = spec.batch.dense(n);
    let mut conv: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut cur = vec![0.0; n];
    cur[0] = 1.0;
    conv.push(cur.clone());
    for _ in 1..n {
        let mut next = vec![0.0; n];
        for (i, &ci) in cur.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            for (m, &bm) in b.iter().enumerate().take(n - i).skip(1) {
                next[i + m] += ci * bm;
            }
        }
        conv.push(next.clone());
        cur = next;
    }
    let mut ln_fact = vec![0.0; n];
    for k in 1..n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let lambda = spec.lambda;
    let service = &spec.service;
    let upper = service.upper_support(1e-18);
    let mut pois = vec![0.0; n];
    integrate_vec(
        |t, out| {
            let x = lambda * t;
            for (k, p) in pois.iter_mut().enumerate() {
                *p = if x == 0.0 {
                    if k == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-x + k as f64 * x.ln() - ln_fact[k]).exp()
                };
            }
            let surv = service.survival(t);
            for (j, o) in out.iter_mut().enumerate() {
                let r: f64 = (0..=j).map(|k| pois[k] * conv[k][j]).sum();
                *o = r * surv;
            }
        },
        0.0,
        upper,
        n,
        1e-13,
    )
}

/// `a_j` for `j = 0..=j_max`, computed by extraction and cross-checked
/// against quadrature.
pub fn a_coefficients(spec: &WorkingModeSpec, j_max: usize) -> Result<Vec<f64>> {
    let extracted = a_coefficients_extracted(spec, j_max)?;
    let quad = a_coefficients_quadrature(spec, j_max)?;
    let worst = extracted
        .iter()
        .zip(&quad)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > A_CROSS_CHECK_TOL {
        return Err(diagnostic!(
            "a_j routes disagree by {worst} (tolerance {A_CROSS_CHECK_TOL})"
        ));
    }
    Ok(extracted)
}

/// Expected durations of one regeneration cycle and the mode probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleQuantities {
    /// Expected vacation-mode duration `E[B0]`.
    pub e_b0: f64,
    /// Expected working-mode duration `E[B1] = E[S] E[Y] / (1 - rho)`.
    pub e_b1: f64,
    pub e_t: f64,
    pub p0_dot: f64,
    pub p1_dot: f64,
}

/// Fills the cycle bookkeeping from the vacation model's `E[B0]` and `E[Y]`.
pub fn cycle_quantities(spec: &WorkingModeSpec, mean_y: f64, e_b0: f64) -> Result<CycleQuantities> {
    spec.validate()?;
    if !(e_b0.is_finite() && e_b0 > 0.0) {
        return Err(invalid!("expected vacation duration must be positive, got {e_b0}"));
    }
    if !(mean_y.is_finite() && mean_y >= 1.0) {
        return Err(invalid!("transfer mean must be finite and >= 1, got {mean_y}"));
    }
    let e_b1 = spec.service.mean() * mean_y / (1.0 - spec.rho());
    let e_t = e_b0 + e_b1;
    Ok(CycleQuantities {
        e_b0,
        e_b1,
        e_t,
        p0_dot: e_b0 / e_t,
        p1_dot: e_b1 / e_t,
    })
}

/// Unconditional working-mode probabilities `p_(1,j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingStateProbs {
    /// `probs[j - 1] = p_(1,j)` for `j = 1..=j_max`.
    pub probs: Vec<f64>,
    /// `p1. - sum_j probs[j]`.
    pub truncation_mass: f64,
    /// `E[N_k] / E[T]` for `k = 1..=j_max` (index `k - 1`): the rate of
    /// down-crossings from `k + 1` to `k`.
    pub down_crossing_rates: Vec<f64>,
    pub p1_dot: f64,
}

impl WorkingStateProbs {
    /// `p_(1,j)`, zero outside `1..=j_max`.
    pub fn get(&self, j: usize) -> f64 {
        j.checked_sub(1)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Conditional law `p_(1,j) / p1.` as a dense vector indexed from 0.
    pub fn conditional(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(self.probs.iter().map(|p| p / self.p1_dot));
        v
    }
}

/// Level-crossing recursion for `p_(1,j)` from explicit inputs.
///
/// `psi[s] = P(Y = s)` and `a[j]` must cover `0..=j_max`. The `k = j` term
/// of the up-crossing sum contains `p_(1,j)` itself and is solved for
/// directly.
pub fn working_probs_from_parts(
    lambda: f64,
    batch: &BatchLaw,
    psi: &[f64],
    a: &[f64],
    e_t: f64,
    p1_dot: f64,
    j_max: usize,
) -> Result<WorkingStateProbs> {
    if psi.len() <= j_max || a.len() <= j_max {
        return Err(invalid!("psi and a must cover 0..={j_max}"));
    }
    if !(e_t > 0.0) {
        return Err(invalid!("expected cycle length must be positive, got {e_t}"));
    }
    let denom = 1.0 - lambda * a[0];
    if !(denom > 0.0) {
        return Err(diagnostic!("1 - lambda a_0 = {denom} is not positive"));
    }
    let b_tail: Vec<f64> = (0..=j_max).map(|k| batch.tail(k)).collect();
    // y_tail[k] = P(Y > k)
    let mut y_tail = vec![0.0; j_max + 1];
    let mut cum = 0.0;
    for k in 0..=j_max {
        cum += psi[k];
        y_tail[k] = (1.0 - cum).max(0.0);
    }
    let mut probs: Vec<f64> = Vec::with_capacity(j_max);
    // crossing[k - 1] = E[N_k] / E[T]
    let mut crossing: Vec<f64> = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let start: f64 = (1..=j).map(|s| psi[s] * a[j - s]).sum::<f64>() / e_t;
        let earlier: f64 = (1..j).map(|k| a[j - k] * crossing[k - 1]).sum();
        // E[N_j]/E[T] without the p_(1,j) term.
        let partial = y_tail[j] / e_t
            + lambda * (1..j).map(|i| probs[i - 1] * b_tail[j - i]).sum::<f64>();
        let p = (start + earlier + a[0] * partial) / denom;
        if p < -1e-10 {
            return Err(diagnostic!("p_(1,{j}) = {p} is negative"));
        }
        let p = p.max(0.0);
        probs.push(p);
        crossing.push(partial + lambda * p * b_tail[0]);
    }
    let total: f64 = probs.iter().sum();
    Ok(WorkingStateProbs {
        probs,
        truncation_mass: p1_dot - total,
        down_crossing_rates: crossing,
        p1_dot,
    })
}

/// `p_(1,j)` for `j = 1..=j_max` by the level-crossing recursion.
pub fn recursive_working_probs(
    spec: &WorkingModeSpec,
    transfer: &TransferLaw,
    cycles: &CycleQuantities,
    j_max: usize,
) -> Result<WorkingStateProbs> {
    let a = a_coefficients_extracted(spec, j_max)?;
    let psi = transfer.dense_pmf(j_max + 1)?;
    working_probs_from_parts(
        spec.lambda,
        &spec.batch,
        &psi,
        &a,
        cycles.e_t,
        cycles.p1_dot,
        j_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::extract_coefficients;
    use crate::pmf::Pmf;

    fn mm1(lambda: f64, mu: f64) -> WorkingModeSpec {
        WorkingModeSpec::new(lambda, BatchLaw::single(), ServiceLaw::exponential(mu).unwrap())
            .unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn rejects_unstable() {
        let err = WorkingModeSpec::new(
            2.0,
            BatchLaw::single(),
            ServiceLaw::exponential(2.0).unwrap(),
        );
        assert!(matches!(err, Err(Error::Unstable { .. })));
    }

    #[test]
    fn alpha_examples() {
        let spec = mm1(1.0, 2.0);
        assert!((alpha_of_z(&spec, c(1.0)).re - 0.5).abs() < 1e-15);
        assert!((alpha_of_z(&spec, c(0.0)).re - 1.0 / 3.0).abs() < 1e-15);
        let det = WorkingModeSpec::new(
            0.5,
            BatchLaw::single(),
            ServiceLaw::deterministic(1.0).unwrap(),
        )
        .unwrap();
        let oracle = (1.0 - (-0.5f64).exp()) / 0.5;
        assert!((alpha_of_z(&det, c(0.0)).re - oracle).abs() < 1e-14);
        // lambda = 1, d = 1 needs rho < 1 only for validation, alpha itself is defined.
        let det1 = WorkingModeSpec {
            lambda: 1.0,
            batch: BatchLaw::single(),
            service: ServiceLaw::deterministic(1.0).unwrap(),
        };
        assert!((alpha_of_z(&det1, c(0.0)).re - 0.632_120_558_828_557_7).abs() < 1e-12);
    }

    #[test]
    fn mm1_pgfs() {
        let spec = mm1(1.0, 2.0);
        let p = regular_mxg1_pgf(&spec).unwrap();
        assert!((p.eval_real(0.5) - 2.0 / 3.0).abs() < 1e-14);
        assert!((p.eval_real(1.0) - 1.0).abs() < 1e-14);
        let busy = conditional_busy_pgf(&spec).unwrap();
        assert!((busy.eval_real(0.5) - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(busy.eval_real(0.0), 0.0);
        assert!((busy.eval_real(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn idle_probability_is_one_minus_rho() {
        for spec in [
            mm1(1.0, 2.0),
            WorkingModeSpec::new(
                0.5,
                BatchLaw::finite(Pmf::uniform(1, 2).unwrap()).unwrap(),
                ServiceLaw::erlang(2, 5.0).unwrap(),
            )
            .unwrap(),
        ] {
            let pmf = extract_coefficients(&regular_mxg1_pgf(&spec).unwrap(), 64, 4096).unwrap();
            assert!((pmf.prob(0) - (1.0 - spec.rho())).abs() < 1e-9);
        }
    }

    #[test]
    fn a_coefficients_geometric_for_mm1() {
        let spec = mm1(1.0, 2.0);
        let a = a_coefficients(&spec, 30).unwrap();
        for (j, aj) in a.iter().enumerate() {
            let want = (1.0 / 3.0) * (1.0f64 / 3.0).powi(j as i32);
            assert!((aj - want).abs() < 1e-12, "a_{j} = {aj}");
        }
        let total: f64 = a_coefficients_extracted(&spec, 200).unwrap().iter().sum();
        assert!((total - 0.5).abs() < 1e-12);
    }

    #[test]
    fn a_routes_agree_for_deterministic_batches() {
        let spec = WorkingModeSpec::new(
            0.6,
            BatchLaw::finite(Pmf::new(1, alloc::vec![0.5, 0.3, 0.2]).unwrap()).unwrap(),
            ServiceLaw::deterministic(0.8).unwrap(),
        )
        .unwrap();
        let a = a_coefficients(&spec, 40).unwrap();
        let total: f64 = a_coefficients_extracted(&spec, 300).unwrap().iter().sum();
        assert!((total - 0.8).abs() < 1e-10);
        assert!(a.iter().all(|v| *v >= -1e-15));
    }

    #[test]
    fn cycle_examples() {
        let spec = mm1(1.0, 2.0);
        let cq = cycle_quantities(&spec, 1.0, 1.0).unwrap();
        assert!((cq.e_b1 - 1.0).abs() < 1e-15);
        assert!((cq.p0_dot - 0.5).abs() < 1e-15);
        assert!((cq.p0_dot + cq.p1_dot - 1.0).abs() < 1e-15);
        assert!(cycle_quantities(&spec, 1.0, 0.0).is_err());
    }

    #[test]
    fn recursion_for_mm1_with_single_transfers() {
        let spec = mm1(1.0, 2.0);
        let transfer = TransferLaw::from_pmf(Pmf::point(1)).unwrap();
        let cq = cycle_quantities(&spec, 1.0, 1.0).unwrap();
        let w = recursive_working_probs(&spec, &transfer, &cq, 60).unwrap();
        let cond = w.conditional();
        assert!((cond[1] - 0.5).abs() < 1e-12);
        for j in 1..=40 {
            let want = 0.5 * 0.5f64.powi(j as i32 - 1);
            assert!((cond[j] - want).abs() < 1e-12, "j={j}");
        }
        assert!(w.truncation_mass.abs() < 1e-12);
    }
}
