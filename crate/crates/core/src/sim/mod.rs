//! Regenerative discrete-event simulation of the alternating system.
//!
//! A cycle is one vacation-mode period followed by one working-mode period;
//! cycles are i.i.d., so every estimate is a renewal-reward ratio over
//! cycles. Replications use independent ChaCha streams of one seed and are
//! merged in replication order, which keeps reports bit-identical however
//! the replications are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{diagnostic, invalid, Error, Result};
use crate::mxg1::{a_coefficients_extracted, WorkingModeSpec};
use crate::report::{Provenance, SteadyStateReport};
use crate::service::sample_exp;
use crate::vacation::VacationModelSpec;

mod audit;
mod vacation;

pub use audit::{level_crossing_audit, CycleLog, CycleRecord, Neumaier, PathAudit, TIME_REL_TOL};
pub use vacation::{simulate_standalone_disaster, simulate_transfers, VacationOutcome, VacationRunner};

/// Working periods longer than this many events abort the run.
pub const MAX_WORKING_EVENTS: u64 = 10_000_000;

/// Levels covered by the Wald and crossing-rate estimator audits.
pub const AUDIT_LEVELS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub working: WorkingModeSpec,
    pub vacation: VacationModelSpec,
    /// Cycles per replication.
    pub n_cycles: usize,
    pub seed: u64,
    pub replications: usize,
    /// Keep per-cycle records for at most this many cycles per replication.
    pub keep_log: usize,
}

impl SimConfig {
    pub fn new(working: WorkingModeSpec, vacation: VacationModelSpec, n_cycles: usize, seed: u64) -> Self {
        Self {
            working,
            vacation,
            n_cycles,
            seed,
            replications: 16,
            keep_log: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 {
            return Err(invalid!("n_cycles must be at least 1"));
        }
        if self.replications == 0 {
            return Err(invalid!("replications must be at least 1"));
        }
        self.working.validate()?;
        self.vacation.validate()
    }
}

/// Sums over the cycles of one replication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicationStats {
    pub cycles: u64,
    /// Time with `k` customers in the vacation mode.
    pub vacation_time: Vec<f64>,
    /// Time with `j` customers in the working mode.
    pub working_time: Vec<f64>,
    pub transfer_counts: Vec<u64>,
    /// Queue lengths seen by working-mode arrivals.
    pub arrival_seen: Vec<u64>,
    /// Down-crossings from `k + 1` to `k` in the working mode.
    pub down_crossings: Vec<u64>,
    pub sum_b0: f64,
    pub sum_b1: f64,
    pub sum_y: f64,
    /// Per level `j = 1..=AUDIT_LEVELS`: summed per-cycle residuals of the
    /// Wald identity for `E[T_j]`.
    pub wald_residual: Vec<f64>,
    /// Same for the crossing identity `E[N_k] = P(Y > k) + lambda sum_i E[T_i] P(B > k - i)`.
    pub crossing_residual: Vec<f64>,
    pub audit: PathAudit,
    pub log: CycleLog,
}

/// Mean and standard error over replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `None` with a single replication.
    pub stderr: Option<f64>,
}

impl Estimate {
    /// `|value - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        self.stderr.map(|s| (self.value - target).abs() / s)
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, None);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, Some(libm::sqrt(var / n)))
}

fn rep_estimate(reps: &[ReplicationStats], f: impl Fn(&ReplicationStats) -> f64) -> Estimate {
    let xs: Vec<f64> = reps.iter().map(f).collect();
    let (value, stderr) = mean_and_se(&xs);
    Estimate { value, stderr }
}

/// Merged simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub replications: usize,
    pub cycles: u64,
    /// Pooled time fractions.
    pub vacation: Vec<f64>,
    pub working: Vec<f64>,
    pub p0_dot: Estimate,
    pub p1_dot: Estimate,
    pub conditional_working: Vec<f64>,
    pub conditional_working_stderr: Option<Vec<f64>>,
    pub conditional_vacation: Vec<f64>,
    pub transfer_counts: Vec<u64>,
    pub arrival_seen: Vec<u64>,
    pub mean_y: Estimate,
    pub e_b0: Estimate,
    pub e_b1: Estimate,
    /// Per-cycle mean residual of the Wald identity, levels `1..=AUDIT_LEVELS`.
    pub wald: Vec<Estimate>,
    /// Per-cycle mean residual of the crossing identity, levels `1..=AUDIT_LEVELS`.
    pub crossing: Vec<Estimate>,
    pub path_audit: PathAudit,
    pub stats: Vec<ReplicationStats>,
}

fn normalized_u64(c: &[u64]) -> Vec<f64> {
    let n: u64 = c.iter().sum();
    if n == 0 {
        return vec![0.0; c.len()];
    }
    c.iter().map(|x| *x as f64 / n as f64).collect()
}

impl EmpiricalReport {
    /// Relative frequencies of the transfer sizes.
    pub fn transfer_pmf(&self) -> Vec<f64> {
        normalized_u64(&self.transfer_counts)
    }

    /// Relative frequencies of the queue lengths seen by working-mode arrivals.
    pub fn arrival_seen_pmf(&self) -> Vec<f64> {
        normalized_u64(&self.arrival_seen)
    }

    pub fn to_report(&self) -> SteadyStateReport {
        SteadyStateReport {
            provenance: Provenance::Simulated,
            vacation: Some(self.vacation.clone()),
            working: Some(self.working.clone()),
            conditional_working: self.conditional_working.clone(),
            conditional_vacation: Some(self.conditional_vacation.clone()),
            transfer: Some(self.transfer_pmf()),
            p0_dot: Some(self.p0_dot.value),
            p1_dot: Some(self.p1_dot.value),
            mean_y: Some(self.mean_y.value),
            e_b0: Some(self.e_b0.value),
            e_b1: Some(self.e_b1.value),
            truncation_mass: 0.0,
            conditional_working_stderr: self.conditional_working_stderr.clone(),
        }
    }
}

/// Normalized time-average law within one mode.
pub fn empirical_conditional_law(time: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = time.iter().sum();
    if !(total > 0.0) {
        return Err(invalid!("no time was spent in this mode"));
    }
    Ok(time.iter().map(|t| t / total).collect())
}

fn add_u64(v: &mut Vec<u64>, k: usize, n: u64) {
    if v.len() <= k {
        v.resize(k + 1, 0);
    }
    v[k] += n;
}

fn add_vec(into: &mut Vec<f64>, from: &[f64]) {
    if into.len() < from.len() {
        into.resize(from.len(), 0.0);
    }
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

fn add_vec_u64(into: &mut Vec<u64>, from: &[u64]) {
    if into.len() < from.len() {
        into.resize(from.len(), 0);
    }
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

/// Working-period scratch state reused across cycles.
struct WorkingScratch {
    time: Vec<Neumaier>,
    /// Net up-minus-down crossings of each level.
    balance: Vec<i64>,
    up: Vec<u64>,
    down: Vec<u64>,
    sub_busy: Vec<f64>,
    top: usize,
}

impl WorkingScratch {
    fn new() -> Self {
        Self {
            time: Vec::new(),
            balance: Vec::new(),
            up: Vec::new(),
            down: Vec::new(),
            sub_busy: Vec::new(),
            top: 0,
        }
    }

    fn ensure(&mut self, level: usize) {
        if self.time.len() <= level {
            let n = level + 1;
            self.time.resize(n, Neumaier::default());
            self.balance.resize(n, 0);
            self.up.resize(n, 0);
            self.down.resize(n, 0);
        }
        self.top = self.top.max(level);
    }

    fn reset(&mut self) {
        let n = (self.top + 1).min(self.time.len());
        for i in 0..n {
            self.time[i] = Neumaier::default();
            self.balance[i] = 0;
            self.up[i] = 0;
            self.down[i] = 0;
        }
        self.sub_busy.clear();
        self.top = 0;
    }

    fn cross_up(&mut self, from: usize, to: usize) {
        self.ensure(to);
        for k in from..to {
            self.balance[k] += 1;
            self.up[k] += 1;
        }
    }
}

/// Simulates one replication: `cfg.n_cycles` cycles on stream `rep` of `cfg.seed`.
pub fn simulate_replication(cfg: &SimConfig, rep: u64) -> Result<ReplicationStats> {
    cfg.validate()?;
    let spec = &cfg.working;
    let a = a_coefficients_extracted(spec, AUDIT_LEVELS)?;
    let b_tail: Vec<f64> = (0..=AUDIT_LEVELS).map(|k| spec.batch.tail(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);
    let mut runner = VacationRunner::new(&cfg.vacation, MAX_WORKING_EVENTS)?;
    let mut st = ReplicationStats {
        wald_residual: vec![0.0; AUDIT_LEVELS + 1],
        crossing_residual: vec![0.0; AUDIT_LEVELS + 1],
        ..Default::default()
    };
    let mut w = WorkingScratch::new();

    for _ in 0..cfg.n_cycles {
        let vac = runner.run(&mut rng, &mut st.vacation_time)?;
        let y = vac.transfer;
        let working = run_working(spec, y, &mut rng, &mut w, &mut st.arrival_seen)?;

        // Pathwise checks.
        st.audit.cycles += 1;
        if w.balance[..=w.top].iter().any(|b| *b != 0) {
            st.audit.crossing_mismatches += 1;
        }
        let total = working.value();
        let mut by_level = Neumaier::default();
        for t in &w.time[..=w.top] {
            by_level.add(t.value());
        }
        let mut by_sub = Neumaier::default();
        for c in &w.sub_busy {
            by_sub.add(*c);
        }
        st.audit.note_time_errors(total, by_level.value(), by_sub.value());

        // Estimator identities, per cycle.
        let t_at = |j: usize| if j <= w.top { w.time[j].value() } else { 0.0 };
        let n_at = |k: usize| if k <= w.top { w.down[k] as f64 } else { 0.0 };
        for j in 1..=AUDIT_LEVELS {
            let start = if y <= j { a[j - y] } else { 0.0 };
            let restarts: f64 = (1..=j).map(|k| a[j - k] * n_at(k)).sum();
            st.wald_residual[j] += t_at(j) - start - restarts;
            let first = if y > j { 1.0 } else { 0.0 };
            let jumps: f64 = (1..=j).map(|i| t_at(i) * b_tail[j - i]).sum();
            st.crossing_residual[j] += n_at(j) - first - spec.lambda * jumps;
        }

        st.cycles += 1;
        st.sum_b0 += vac.duration;
        st.sum_b1 += total;
        st.sum_y += y as f64;
        add_u64(&mut st.transfer_counts, y, 1);
        let times: Vec<f64> = w.time[..=w.top].iter().map(Neumaier::value).collect();
        add_vec(&mut st.working_time, &times);
        add_vec_u64(&mut st.down_crossings, &w.down[..=w.top]);
        if st.log.records.len() < cfg.keep_log {
            st.log.records.push(CycleRecord {
                vacation_duration: vac.duration,
                working_duration: total,
                transfer: y,
                time_in_state: times,
                down_crossings: w.down[..=w.top].to_vec(),
                up_crossings: w.up[..=w.top].to_vec(),
                sub_busy: w.sub_busy.clone(),
            });
        }
        w.reset();
    }
    Ok(st)
}

/// One working period starting with `y` customers and a fresh service.
fn run_working<R: Rng + ?Sized>(
    spec: &WorkingModeSpec,
    y: usize,
    rng: &mut R,
    w: &mut WorkingScratch,
    seen: &mut Vec<u64>,
) -> Result<Neumaier> {
    let mut level = y;
    let mut t = Neumaier::default();
    w.cross_up(0, y);
    let mut low = y;
    let mut last_passage = 0.0;
    let mut service_left = spec.service.sample(rng);
    let mut events = 0u64;
    loop {
        events += 1;
        if events > MAX_WORKING_EVENTS {
            return Err(Error::SimulationAborted(alloc::format!(
                "working period exceeded {MAX_WORKING_EVENTS} events (rho = {})",
                spec.rho()
            )));
        }
        let to_arrival = sample_exp(rng, spec.lambda);
        if to_arrival < service_left {
            w.time[level].add(to_arrival);
            t.add(to_arrival);
            service_left -= to_arrival;
            add_u64(seen, level, 1);
            let b = spec.batch.sample(rng);
            w.cross_up(level, level + b);
            level += b;
        } else {
            w.time[level].add(service_left);
            t.add(service_left);
            level -= 1;
            w.balance[level] -= 1;
            w.down[level] += 1;
            if level < low {
                low = level;
                let now = t.value();
                w.sub_busy.push(now - last_passage);
                last_passage = now;
            }
            if level == 0 {
                return Ok(t);
            }
            service_left = spec.service.sample(rng);
        }
    }
}

/// Merges replications in the given order.
pub fn merge(stats: Vec<ReplicationStats>) -> Result<EmpiricalReport> {
    if stats.is_empty() {
        return Err(invalid!("nothing to merge"));
    }
    let mut vac = Vec::new();
    let mut work = Vec::new();
    let mut transfer = Vec::new();
    let mut seen = Vec::new();
    let mut audit = PathAudit::default();
    let mut cycles = 0;
    for s in &stats {
        add_vec(&mut vac, &s.vacation_time);
        add_vec(&mut work, &s.working_time);
        add_vec_u64(&mut transfer, &s.transfer_counts);
        add_vec_u64(&mut seen, &s.arrival_seen);
        audit.merge(&s.audit);
        cycles += s.cycles;
    }
    let vac_total: f64 = vac.iter().sum();
    let work_total: f64 = work.iter().sum();
    let total = vac_total + work_total;
    if !(total > 0.0 && work_total > 0.0) {
        return Err(diagnostic!("simulation accumulated no working time"));
    }
    let conditional_working = empirical_conditional_law(&work)?;
    let conditional_vacation = empirical_conditional_law(&vac)?;
    let conditional_working_stderr = if stats.len() > 1 {
        let per_rep: Vec<Vec<f64>> = stats
            .iter()
            .map(|s| empirical_conditional_law(&s.working_time))
            .collect::<Result<_>>()?;
        Some(
            (0..conditional_working.len())
                .map(|j| {
                    let xs: Vec<f64> = per_rep.iter().map(|r| r.get(j).copied().unwrap_or(0.0)).collect();
                    mean_and_se(&xs).1.unwrap_or(0.0)
                })
                .collect(),
        )
    } else {
        None
    };
    let mode_fraction = |s: &ReplicationStats| {
        let v: f64 = s.vacation_time.iter().sum();
        let w: f64 = s.working_time.iter().sum();
        w / (v + w)
    };
    let per_cycle = |f: fn(&ReplicationStats) -> f64| move |s: &ReplicationStats| f(s) / s.cycles as f64;
    let level_estimates = |f: fn(&ReplicationStats) -> &Vec<f64>| {
        (1..=AUDIT_LEVELS)
            .map(|j| rep_estimate(&stats, |s| f(s)[j] / s.cycles as f64))
            .collect::<Vec<_>>()
    };
    let p1 = rep_estimate(&stats, mode_fraction);
    Ok(EmpiricalReport {
        replications: stats.len(),
        cycles,
        vacation: vac.iter().map(|t| t / total).collect(),
        working: work.iter().map(|t| t / total).collect(),
        p0_dot: Estimate {
            value: vac_total / total,
            stderr: p1.stderr,
        },
        p1_dot: Estimate {
            value: work_total / total,
            stderr: p1.stderr,
        },
        conditional_working,
        conditional_working_stderr,
        conditional_vacation,
        transfer_counts: transfer,
        arrival_seen: seen,
        mean_y: rep_estimate(&stats, per_cycle(|s| s.sum_y)),
        e_b0: rep_estimate(&stats, per_cycle(|s| s.sum_b0)),
        e_b1: rep_estimate(&stats, per_cycle(|s| s.sum_b1)),
        wald: level_estimates(|s| &s.wald_residual),
        crossing: level_estimates(|s| &s.crossing_residual),
        path_audit: audit,
        stats,
    })
}

/// Runs all replications sequentially and merges them.
pub fn simulate(cfg: &SimConfig) -> Result<EmpiricalReport> {
    cfg.validate()?;
    let stats = (0..cfg.replications as u64)
        .map(|r| simulate_replication(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    merge(stats)
}
