//! Sample paths of the vacation-mode dynamics.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::service::sample_exp;
use crate::vacation::{chain_bdp_rates, DisasterCoupled, VacationModelSpec};

/// One completed vacation-mode period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacationOutcome {
    pub duration: f64,
    /// Customers handed to the working mode, always at least one.
    pub transfer: usize,
}

pub(crate) fn add_at(v: &mut Vec<f64>, k: usize, dt: f64) {
    if v.len() <= k {
        v.resize(k + 1, 0.0);
    }
    v[k] += dt;
}

/// Draws vacation periods for a model, caching birth-death rates.
pub struct VacationRunner<'a> {
    spec: &'a VacationModelSpec,
    chain_rates: Vec<(f64, f64)>,
    max_events: u64,
}

impl<'a> VacationRunner<'a> {
    pub fn new(spec: &'a VacationModelSpec, max_events: u64) -> Result<Self> {
        spec.validate()?;
        if let VacationModelSpec::HypergeometricRatio(_) = spec {
            return Err(Error::Unsupported(
                "a hypergeometric transfer law has no vacation dynamics to simulate".into(),
            ));
        }
        Ok(Self {
            spec,
            chain_rates: Vec::new(),
            max_events,
        })
    }

    fn chain_rate(&mut self, a: f64, k: usize) -> Result<(f64, f64)> {
        while self.chain_rates.len() <= k {
            let n = self.chain_rates.len();
            self.chain_rates.push(chain_bdp_rates(a, n)?);
        }
        Ok(self.chain_rates[k])
    }

    fn abort(&self) -> Error {
        Error::SimulationAborted(alloc::format!(
            "vacation period exceeded {} events",
            self.max_events
        ))
    }

    /// Runs one vacation-mode period from an empty system, adding the time
    /// spent with `k` customers to `occupancy[k]`.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        occupancy: &mut Vec<f64>,
    ) -> Result<VacationOutcome> {
        let mut k = 0usize;
        let mut duration = 0.0;
        let mut events = 0u64;
        match self.spec {
            VacationModelSpec::MultipleVacations(m) => loop {
                let v = m.vacation.sample(rng);
                let mut t = 0.0;
                loop {
                    let a = sample_exp(rng, m.lambda_v);
                    if t + a >= v {
                        add_at(occupancy, k, v - t);
                        break;
                    }
                    add_at(occupancy, k, a);
                    t += a;
                    k += m.batch.sample(rng);
                    events += 1;
                    if events > self.max_events {
                        return Err(self.abort());
                    }
                }
                duration += v;
                if k > 0 {
                    return Ok(VacationOutcome {
                        duration,
                        transfer: k,
                    });
                }
            },
            VacationModelSpec::DisasterCoupled(DisasterCoupled::MxG1Disaster(m)) => {
                // General service: competing exponential clocks are redrawn
                // at every event, the residual service time is carried.
                let mut service_left = 0.0;
                loop {
                    events += 1;
                    if events > self.max_events {
                        return Err(self.abort());
                    }
                    if k == 0 {
                        let a = sample_exp(rng, m.lambda_v);
                        add_at(occupancy, 0, a);
                        duration += a;
                        k = m.batch.sample(rng);
                        service_left = m.service.sample(rng);
                        continue;
                    }
                    let total = m.lambda_v + m.xi + m.gamma;
                    let dt = sample_exp(rng, total);
                    if service_left <= dt {
                        add_at(occupancy, k, service_left);
                        duration += service_left;
                        k -= 1;
                        if k > 0 {
                            service_left = m.service.sample(rng);
                        }
                        continue;
                    }
                    add_at(occupancy, k, dt);
                    duration += dt;
                    service_left -= dt;
                    let u = rng.random::<f64>() * total;
                    if u < m.lambda_v {
                        k += m.batch.sample(rng);
                    } else if u < m.lambda_v + m.xi {
                        k = 0;
                    } else {
                        return Ok(VacationOutcome {
                            duration,
                            transfer: k,
                        });
                    }
                }
            }
            _ => loop {
                events += 1;
                if events > self.max_events {
                    return Err(self.abort());
                }
                let r = self.markov_rates(k)?;
                let total = r.arrival + r.death + r.clear + r.renege + r.exit;
                if !(total > 0.0) {
                    return Err(Error::SimulationAborted(alloc::format!(
                        "vacation state {k} has no outgoing transitions"
                    )));
                }
                let dt = sample_exp(rng, total);
                add_at(occupancy, k, dt);
                duration += dt;
                let mut u = rng.random::<f64>() * total;
                if u < r.arrival {
                    k += self.vacation_batch(rng);
                    continue;
                }
                u -= r.arrival;
                if u < r.death {
                    k -= 1;
                    continue;
                }
                u -= r.death;
                if u < r.clear {
                    k = 0;
                    continue;
                }
                u -= r.clear;
                if u < r.renege {
                    let stay = 1.0 - r.renege_prob;
                    k = (0..k).filter(|_| rng.random::<f64>() < stay).count();
                    continue;
                }
                return Ok(VacationOutcome {
                    duration,
                    transfer: k,
                });
            },
        }
    }

    fn vacation_batch<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self.spec {
            VacationModelSpec::MarkovianBalking(m) => m.batch.sample(rng),
            _ => 1,
        }
    }

    /// Transition rates out of vacation state `k` for the memoryless models.
    fn markov_rates(&mut self, k: usize) -> Result<Rates> {
        let busy = if k > 0 { 1.0 } else { 0.0 };
        let mut r = Rates::default();
        match self.spec {
            VacationModelSpec::MarkovianBalking(m) => {
                r.arrival = m.lambda_v * m.admit.at(k);
                r.clear = m.disaster_rate(k);
                r.exit = m.exit_rate(k);
            }
            VacationModelSpec::BinomialReneging(m) => {
                r.arrival = m.lambda_v;
                r.renege = m.xi * busy;
                r.renege_prob = m.p;
                r.exit = m.gamma * busy;
            }
            VacationModelSpec::DisasterCoupled(DisasterCoupled::MM1 {
                lambda_v,
                mu_v,
                gamma,
            }) => {
                r.arrival = *lambda_v;
                r.death = mu_v * busy;
                r.exit = gamma * busy;
            }
            VacationModelSpec::DisasterCoupled(DisasterCoupled::ChainBdp { a, gamma }) => {
                let (birth, death) = self.chain_rate(*a, k)?;
                r.arrival = birth;
                r.death = death * busy;
                r.exit = gamma * busy;
            }
            _ => unreachable!("handled by dedicated samplers"),
        }
        Ok(r)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Rates {
    arrival: f64,
    death: f64,
    clear: f64,
    renege: f64,
    renege_prob: f64,
    exit: f64,
}

/// Histogram of transfer sizes over `n` independent vacation periods.
pub fn simulate_transfers(vac: &VacationModelSpec, n: usize, seed: u64) -> Result<Vec<u64>> {
    use rand::SeedableRng;
    let mut runner = VacationRunner::new(vac, 10_000_000)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for _ in 0..n {
        let out = runner.run(&mut rng, &mut scratch)?;
        if counts.len() <= out.transfer {
            counts.resize(out.transfer + 1, 0);
        }
        counts[out.transfer] += 1;
    }
    Ok(counts)
}

/// Time-average law of a standalone disaster system (the vacation dynamics
/// with every exit replaced by a clearing event) over `horizon` time units.
pub fn simulate_standalone_disaster(d: &DisasterCoupled, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    use rand::SeedableRng;
    d.validate()?;
    let vac = VacationModelSpec::DisasterCoupled(d.clone());
    let mut runner = VacationRunner::new(&vac, u64::MAX)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut occupancy = Vec::new();
    let mut t = 0.0;
    // Each exit restarts the system empty, which is exactly a clearing event.
    while t < horizon {
        t += runner.run(&mut rng, &mut occupancy)?.duration;
    }
    for p in &mut occupancy {
        *p /= t;
    }
    Ok(occupancy)
}
