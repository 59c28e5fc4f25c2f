//! Exact generators of fully Markovian instances on a truncated state space.
//!
//! States are `(0, k)` (vacation mode, `k >= 0` customers) and `(1, j)`
//! (working mode, `j >= 1`), both capped at `n`. Transitions that would
//! leave the truncated space are dropped rather than reflected; the dropped
//! rate is kept per state and the probability of the top level is reported.
//! Stationary vectors come from GTH state reduction, which involves no
//! subtractions and so keeps full relative accuracy in small probabilities.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{diagnostic, invalid, Error, Result};
use crate::mxg1::WorkingModeSpec;
use crate::report::{Provenance, SteadyStateReport};
use crate::service::ServiceLaw;
use crate::vacation::{chain_bdp_rates, DisasterCoupled, VacationModelSpec};
use crate::batch::BatchLaw;

/// Largest boundary probability accepted by [`oracle_report`].
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Default truncation level.
pub const DEFAULT_TRUNCATION: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Vacation,
    Working,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateIndex {
    pub mode: Mode,
    pub count: usize,
}

impl StateIndex {
    pub fn vacation(count: usize) -> Self {
        Self {
            mode: Mode::Vacation,
            count,
        }
    }

    pub fn working(count: usize) -> Self {
        Self {
            mode: Mode::Working,
            count,
        }
    }

    /// Level-ordered position: `(0,0), (1,1), (0,1), (1,2), (0,2), ...`.
    pub fn position(self) -> usize {
        match self.mode {
            Mode::Vacation => 2 * self.count,
            Mode::Working => 2 * self.count - 1,
        }
    }

    pub fn from_position(i: usize) -> Self {
        if i % 2 == 0 {
            Self::vacation(i / 2)
        } else {
            Self::working(i / 2 + 1)
        }
    }
}

/// Sparse generator: off-diagonal rates per row, diagonal implied.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    rows: Vec<BTreeMap<usize, f64>>,
    dropped: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn new(dimension: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); dimension],
            dropped: vec![0.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Adds `rate` to `q(from, to)`; self-loops and zero rates are ignored.
    pub fn add(&mut self, from: usize, to: usize, rate: f64) {
        if from != to && rate != 0.0 {
            *self.rows[from].entry(to).or_insert(0.0) += rate;
        }
    }

    /// Records rate lost to truncation out of `from`.
    pub fn add_dropped(&mut self, from: usize, rate: f64) {
        self.dropped[from] += rate;
    }

    pub fn dropped(&self, from: usize) -> f64 {
        self.dropped[from]
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rows[from].get(&to).copied().unwrap_or(0.0)
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        -self.rows[i].values().sum::<f64>()
    }

    pub fn off_diagonal(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[i].iter().map(|(j, r)| (*j, *r))
    }

    /// `|sum_j q(i, j)|` with the diagonal included.
    pub fn row_sum(&self, i: usize) -> f64 {
        (self.rows[i].values().sum::<f64>() + self.diagonal(i)).abs()
    }

    /// `max_j |(pi Q)_j|`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let mut out: Vec<f64> = (0..self.dimension())
            .map(|i| pi[i] * self.diagonal(i))
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, r) in row {
                out[*j] += pi[i] * r;
            }
        }
        out.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn max_rate(&self) -> f64 {
        (0..self.dimension()).fold(0.0, |m, i| m.max(-self.diagonal(i)))
    }
}

/// Stationary vector by GTH state reduction on a dense copy of the rates.
pub fn steady_state(g: &GeneratorMatrix) -> Result<Vec<f64>> {
    let n = g.dimension();
    if n == 0 {
        return Err(invalid!("empty generator"));
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for (j, r) in g.off_diagonal(i) {
            if r < 0.0 {
                return Err(invalid!("negative rate {r} from {i} to {j}"));
            }
            a[i * n + j] = r;
        }
    }
    let mut sums = vec![0.0; n];
    let mut nonzero: Vec<usize> = Vec::with_capacity(n);
    for k in (1..n).rev() {
        nonzero.clear();
        let mut s = 0.0;
        for j in 0..k {
            let v = a[k * n + j];
            if v != 0.0 {
                nonzero.push(j);
                s += v;
            }
        }
        if !(s > 0.0) {
            return Err(diagnostic!("generator is reducible: state {k} cannot reach lower states"));
        }
        sums[k] = s;
        for i in 0..k {
            let f = a[i * n + k];
            if f == 0.0 {
                continue;
            }
            let f = f / s;
            for &j in &nonzero {
                if j != i {
                    a[i * n + j] += f * a[k * n + j];
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for i in 0..k {
            acc += pi[i] * a[i * n + k];
        }
        pi[k] = acc / sums[k];
    }
    let total: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= total;
    }
    let residual = g.residual(&pi);
    if residual > 1e-10 * g.max_rate().max(1.0) {
        return Err(diagnostic!("stationary residual {residual}"));
    }
    Ok(pi)
}

fn exponential_rate(law: &ServiceLaw, what: &str) -> Result<f64> {
    match law {
        ServiceLaw::Exponential { rate } => Ok(*rate),
        ServiceLaw::Erlang { phases: 1, rate } => Ok(*rate),
        _ => Err(Error::Unsupported(alloc::format!(
            "the oracle needs exponential {what}"
        ))),
    }
}

/// Adds batch arrivals at `rate` from level `k`, dropping batches past `n`.
fn add_batches(
    g: &mut GeneratorMatrix,
    from: usize,
    k: usize,
    n: usize,
    rate: f64,
    batch: &BatchLaw,
    target: impl Fn(usize) -> usize,
) {
    if rate == 0.0 {
        return;
    }
    let room = n - k;
    let top = batch.max_support().map_or(room, |m| m.min(room));
    for i in 1..=top {
        g.add(from, target(k + i), rate * batch.prob(i));
    }
    g.add_dropped(from, rate * batch.tail(room));
}

fn binomial_pmf(n: usize, q: f64) -> Vec<f64> {
    // P(Binom(n, q) = m) by the multiplicative recurrence from the mode side.
    let p = 1.0 - q;
    let mut out = vec![0.0; n + 1];
    if q == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p == 0.0 {
        out[n] = 1.0;
        return out;
    }
    let mut log_c = 0.0;
    for m in 0..=n {
        if m > 0 {
            log_c += libm::log((n - m + 1) as f64) - libm::log(m as f64);
        }
        out[m] = libm::exp(log_c + m as f64 * libm::log(q) + (n - m) as f64 * libm::log(p));
    }
    out
}

/// A truncated generator together with the vacation exit rates.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub generator: GeneratorMatrix,
    pub n: usize,
    /// `exit[k]`: rate of the switch `(0,k) -> (1,k)`.
    pub exit: Vec<f64>,
}

/// Generator of the alternating system with exponential working-mode
/// service and a Markovian vacation model, truncated at `n` customers.
pub fn build_generator(
    spec: &WorkingModeSpec,
    vac: &VacationModelSpec,
    n: usize,
) -> Result<TruncatedChain> {
    spec.validate()?;
    vac.validate()?;
    if n < 2 {
        return Err(invalid!("truncation level must be at least 2"));
    }
    let mu = exponential_rate(&spec.service, "working-mode service")?;
    let mut g = GeneratorMatrix::new(2 * n + 1);
    let v = |k: usize| StateIndex::vacation(k).position();
    let w = |j: usize| StateIndex::working(j).position();

    for j in 1..=n {
        add_batches(&mut g, w(j), j, n, spec.lambda, &spec.batch, w);
        g.add(w(j), if j == 1 { v(0) } else { w(j - 1) }, mu);
    }

    let mut exit = vec![0.0; n + 1];
    match vac {
        VacationModelSpec::MultipleVacations(m) => {
            let gamma = exponential_rate(&m.vacation, "vacations")?;
            for k in 0..=n {
                add_batches(&mut g, v(k), k, n, m.lambda_v, &m.batch, v);
                if k > 0 {
                    exit[k] = gamma;
                }
            }
        }
        VacationModelSpec::MarkovianBalking(m) => {
            for k in 0..=n {
                let rate = m.lambda_v * m.admit.at(k);
                add_batches(&mut g, v(k), k, n, rate, &m.batch, v);
                g.add(v(k), v(0), m.disaster_rate(k));
                exit[k] = m.exit_rate(k);
            }
        }
        VacationModelSpec::BinomialReneging(m) => {
            let q = 1.0 - m.p;
            for k in 0..=n {
                if k < n {
                    g.add(v(k), v(k + 1), m.lambda_v);
                } else {
                    g.add_dropped(v(k), m.lambda_v);
                }
                if k > 0 {
                    for (stay, pr) in binomial_pmf(k, q).into_iter().enumerate().take(k) {
                        g.add(v(k), v(stay), m.xi * pr);
                    }
                    exit[k] = m.gamma;
                }
            }
        }
        VacationModelSpec::DisasterCoupled(d) => {
            for k in 0..=n {
                if k > 0 {
                    exit[k] = d.gamma();
                }
            }
            match d {
                DisasterCoupled::MM1 { lambda_v, mu_v, .. } => {
                    for k in 0..=n {
                        if k < n {
                            g.add(v(k), v(k + 1), *lambda_v);
                        } else {
                            g.add_dropped(v(k), *lambda_v);
                        }
                        if k > 0 {
                            g.add(v(k), v(k - 1), *mu_v);
                        }
                    }
                }
                DisasterCoupled::ChainBdp { a, .. } => {
                    for k in 0..=n {
                        let (birth, death) = chain_bdp_rates(*a, k)?;
                        if k < n {
                            g.add(v(k), v(k + 1), birth);
                        } else {
                            g.add_dropped(v(k), birth);
                        }
                        if k > 0 {
                            g.add(v(k), v(k - 1), death);
                        }
                    }
                }
                DisasterCoupled::MxG1Disaster(m) => {
                    let mu_v = exponential_rate(&m.service, "vacation-mode service")?;
                    for k in 0..=n {
                        add_batches(&mut g, v(k), k, n, m.lambda_v, &m.batch, v);
                        if k > 0 {
                            g.add(v(k), v(k - 1), mu_v);
                            g.add(v(k), v(0), m.xi);
                        }
                    }
                }
            }
        }
        VacationModelSpec::HypergeometricRatio(_) => {
            return Err(Error::Unsupported(
                "a hypergeometric transfer law has no generator".into(),
            ))
        }
    }
    for (k, r) in exit.iter().enumerate() {
        if k > 0 {
            g.add(v(k), w(k), *r);
        }
    }
    Ok(TruncatedChain {
        generator: g,
        n,
        exit,
    })
}

/// Stationary vector of a [`TruncatedChain`] split by mode.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// `p_(0,k)`, `k = 0..=n`.
    pub vacation: Vec<f64>,
    /// `p_(1,j)`, `j = 0..=n` with entry 0 zero.
    pub working: Vec<f64>,
    /// Probability of the top level `n`.
    pub boundary_mass: f64,
    /// Stationary rate of vacation-to-working switches, i.e. of cycles.
    pub exit_flux: f64,
    pub residual: f64,
}

impl OracleSolution {
    pub fn p0_dot(&self) -> f64 {
        self.vacation.iter().sum()
    }

    pub fn p1_dot(&self) -> f64 {
        self.working.iter().sum()
    }

    /// `E[B0]`: vacation time per cycle.
    pub fn e_b0(&self) -> f64 {
        self.p0_dot() / self.exit_flux
    }

    pub fn e_b1(&self) -> f64 {
        self.p1_dot() / self.exit_flux
    }
}

pub fn solve_chain(chain: &TruncatedChain) -> Result<OracleSolution> {
    let pi = steady_state(&chain.generator)?;
    let n = chain.n;
    let vacation: Vec<f64> = (0..=n).map(|k| pi[StateIndex::vacation(k).position()]).collect();
    let mut working = vec![0.0; n + 1];
    for (j, w) in working.iter_mut().enumerate().skip(1) {
        *w = pi[StateIndex::working(j).position()];
    }
    let exit_flux: f64 = vacation.iter().zip(&chain.exit).map(|(p, r)| p * r).sum();
    if !(exit_flux > 0.0) {
        return Err(diagnostic!("the vacation mode is never left"));
    }
    Ok(OracleSolution {
        boundary_mass: vacation[n] + working[n],
        residual: chain.generator.residual(&pi),
        vacation,
        working,
        exit_flux,
    })
}

/// Oracle steady state as a report, failing when the truncation level
/// carries more than [`BOUNDARY_TOL`] probability.
pub fn oracle_report(
    spec: &WorkingModeSpec,
    vac: &VacationModelSpec,
    n: usize,
) -> Result<SteadyStateReport> {
    let chain = build_generator(spec, vac, n)?;
    let sol = solve_chain(&chain)?;
    if sol.boundary_mass > BOUNDARY_TOL {
        return Err(diagnostic!(
            "truncation level {n} carries probability {}; increase it",
            sol.boundary_mass
        ));
    }
    let p0 = sol.p0_dot();
    let p1 = sol.p1_dot();
    let transfer: Vec<f64> = sol
        .vacation
        .iter()
        .zip(&chain.exit)
        .map(|(p, r)| p * r / sol.exit_flux)
        .collect();
    let mean_y = transfer.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    Ok(SteadyStateReport {
        provenance: Provenance::Oracle,
        conditional_working: sol.working.iter().map(|p| p / p1).collect(),
        conditional_vacation: Some(sol.vacation.iter().map(|p| p / p0).collect()),
        transfer: Some(transfer),
        p0_dot: Some(p0),
        p1_dot: Some(p1),
        mean_y: Some(mean_y),
        e_b0: Some(sol.e_b0()),
        e_b1: Some(sol.e_b1()),
        truncation_mass: sol.boundary_mass,
        conditional_working_stderr: None,
        vacation: Some(sol.vacation),
        working: Some(sol.working),
    })
}

/// Generator of the ordinary `M^X/M/1` queue on `0..=n`.
pub fn mxm1_generator(spec: &WorkingModeSpec, n: usize) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let mu = exponential_rate(&spec.service, "service")?;
    let mut g = GeneratorMatrix::new(n + 1);
    for k in 0..=n {
        add_batches(&mut g, k, k, n, spec.lambda, &spec.batch, |t| t);
        if k > 0 {
            g.add(k, k - 1, mu);
        }
    }
    Ok(g)
}
