//! Acceptance matrix. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use mxvac::commands;
use mxvac::output::{dense, read_table};
use mxvac::{Format, Scenario};
use mxvac_core::ctmc::{oracle_report, steady_state, GeneratorMatrix};
use mxvac_core::fft::extract_coefficients;
use mxvac_core::mxg1::{
    conditional_busy_pgf, cycle_quantities, decomposition_pgf, recursive_working_probs,
};
use mxvac_core::pmf::{sup_distance, total_variation};
use mxvac_core::report::analytic_report;
use mxvac_core::sim::{level_crossing_audit, simulate, simulate_transfers, SimConfig};
use mxvac_core::vacation::{
    chain_bdp_disaster_pmf, chain_bdp_rates, hypergeometric_psi, markovian_psi,
    markovian_steady_state, mm1_disaster_load, mxg1_disaster_root, BinomialReneging,
    DisasterCoupled, HypergeometricRatio, MarkovianBalking, MultipleVacations, MxG1Disaster,
    RateSequence,
};
use mxvac_core::{
    BatchLaw, Complex64, Pmf, ServiceLaw, TransferLaw, VacationModelSpec, WorkingModeSpec,
};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn working(lambda: f64, batch: BatchLaw, service: ServiceLaw) -> WorkingModeSpec {
    WorkingModeSpec::new(lambda, batch, service).unwrap()
}

fn uniform12() -> BatchLaw {
    BatchLaw::finite(Pmf::uniform(1, 2).unwrap()).unwrap()
}

fn exp(rate: f64) -> ServiceLaw {
    ServiceLaw::exponential(rate).unwrap()
}

fn multiple_exp(lambda_v: f64, gamma: f64) -> VacationModelSpec {
    VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v,
        batch: BatchLaw::single(),
        vacation: exp(gamma),
    })
}

fn markovian(lambda_v: f64, admit: RateSequence, gamma: f64, disaster: f64) -> VacationModelSpec {
    VacationModelSpec::MarkovianBalking(MarkovianBalking {
        lambda_v,
        admit,
        exit: RateSequence::Constant(gamma),
        disaster: RateSequence::Constant(disaster),
        batch: BatchLaw::single(),
    })
}

fn markovian_working_modes() -> Vec<WorkingModeSpec> {
    vec![
        working(1.0, BatchLaw::single(), exp(2.0)),
        working(0.5, BatchLaw::single(), exp(0.8)),
        working(0.5, uniform12(), exp(2.0)),
        working(0.3, BatchLaw::geometric(0.5).unwrap(), exp(1.0)),
    ]
}

fn markovian_vacations() -> Vec<VacationModelSpec> {
    let balk = RateSequence::Rational { numerator: vec![1.0], denominator: vec![1.0, 0.5] };
    vec![
        multiple_exp(1.0, 1.0),
        markovian(1.5, balk, 0.8, 0.0),
        markovian(1.0, RateSequence::Constant(1.0), 0.7, 0.4),
    ]
}

/// Decomposition output against the CTMC oracle on the Markovian matrix.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cases: Vec<_> = markovian_working_modes()
        .into_iter()
        .flat_map(|w| markovian_vacations().into_iter().map(move |v| (w.clone(), v)))
        .collect();
    let gaps: Vec<f64> = cases
        .par_iter()
        .map(|(w, v)| {
            let a = analytic_report(w, v, 150).unwrap();
            let o = oracle_report(w, v, 400).unwrap();
            sup_distance(&a.conditional_working, &o.conditional_working[..151])
        })
        .collect();
    let elapsed = start.elapsed();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    outcome(
        cases.len() >= 12 && worst < 1e-7 && elapsed < Duration::from_secs(60),
        format!("{} scenarios, max sup {worst:.2e}, {:.1} s", cases.len(), elapsed.as_secs_f64()),
    )
}

fn general_vacations() -> Vec<VacationModelSpec> {
    let mut v = markovian_vacations();
    v.push(VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v: 0.8,
        batch: uniform12(),
        vacation: ServiceLaw::deterministic(1.5).unwrap(),
    }));
    v.push(VacationModelSpec::BinomialReneging(BinomialReneging {
        lambda_v: 1.0,
        xi: 0.5,
        gamma: 0.7,
        p: 0.4,
    }));
    v.push(VacationModelSpec::DisasterCoupled(DisasterCoupled::MM1 {
        lambda_v: 1.0,
        mu_v: 2.0,
        gamma: 1.0,
    }));
    v.push(VacationModelSpec::DisasterCoupled(DisasterCoupled::ChainBdp { a: 0.2, gamma: 1.0 }));
    v.push(VacationModelSpec::DisasterCoupled(DisasterCoupled::MxG1Disaster(MxG1Disaster {
        lambda_v: 0.7,
        batch: uniform12(),
        service: ServiceLaw::erlang(2, 4.0).unwrap(),
        xi: 0.3,
        gamma: 0.9,
    })));
    v
}

/// Decomposition against the level-crossing recursion, including
/// non-exponential service.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut modes = markovian_working_modes();
    modes.push(working(0.6, uniform12(), ServiceLaw::erlang(3, 4.0).unwrap()));
    modes.push(working(0.4, BatchLaw::geometric(0.6).unwrap(), ServiceLaw::deterministic(1.0).unwrap()));
    modes.push(working(
        0.5,
        BatchLaw::single(),
        ServiceLaw::hyperexponential(vec![0.3, 0.7], vec![0.5, 3.0]).unwrap(),
    ));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for w in &modes {
        for v in general_vacations() {
            let t = v.transfer_law().unwrap();
            let g = decomposition_pgf(w, &t).unwrap();
            let direct = extract_coefficients(&g, 50, 4096).unwrap().dense(51);
            let cq = cycle_quantities(w, t.mean_y, v.expected_vacation_duration().unwrap()).unwrap();
            let rec = recursive_working_probs(w, &t, &cq, 50).unwrap().conditional();
            worst = worst.max(sup_distance(&direct, &rec));
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && elapsed < Duration::from_secs(10),
        format!("{count} scenarios, max sup {worst:.2e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

/// M^X/D/1 with deterministic multiple vacations against simulation.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let w = working(0.5, uniform12(), ServiceLaw::deterministic(1.0).unwrap());
    let v = VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v: 0.5,
        batch: uniform12(),
        vacation: ServiceLaw::deterministic(2.0).unwrap(),
    });
    let a = analytic_report(&w, &v, 200).unwrap();
    let cfg = SimConfig::new(w, v, 6250, 2024);
    let sim = commands::run_simulation(&cfg).unwrap();
    let n = sim.conditional_working.len().max(201);
    let mut s = sim.conditional_working.clone();
    s.resize(n, 0.0);
    let mut an = a.conditional_working.clone();
    an.resize(n, 0.0);
    let tv = total_variation(&s, &an);
    let elapsed = start.elapsed();
    outcome(
        tv < 0.02 && elapsed < Duration::from_secs(120),
        format!("{} cycles, TV {tv:.4}, {:.1} s", sim.cycles, elapsed.as_secs_f64()),
    )
}

/// Special cases: transfer equal to batch, unit batches, unit transfers.
fn criterion_4() -> Outcome {
    let pts: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
    let batch_pmf = Pmf::new(1, vec![0.2, 0.5, 0.3]).unwrap();
    let w = working(0.4, BatchLaw::finite(batch_pmf.clone()).unwrap(), ServiceLaw::erlang(2, 3.0).unwrap());
    let g = decomposition_pgf(&w, &TransferLaw::from_pmf(batch_pmf).unwrap()).unwrap();
    let busy = conditional_busy_pgf(&w).unwrap();
    let ea = pts.iter().map(|x| (g.eval(c(*x)) - busy.eval(c(*x))).norm()).fold(0.0, f64::max);

    let w1 = working(0.6, BatchLaw::single(), ServiceLaw::deterministic(1.2).unwrap());
    let v = VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v: 1.1,
        batch: BatchLaw::geometric(0.4).unwrap(),
        vacation: exp(0.9),
    });
    let t = v.transfer_law().unwrap();
    let g1 = decomposition_pgf(&w1, &t).unwrap();
    let busy1 = conditional_busy_pgf(&w1).unwrap();
    let eb = pts[1..]
        .iter()
        .map(|x| {
            let psi_eq = (1.0 - t.psi.eval(c(*x))) / (t.mean_y * (1.0 - x));
            (g1.eval(c(*x)) / busy1.eval(c(*x)) - psi_eq).norm()
        })
        .fold(0.0, f64::max);

    let g2 = decomposition_pgf(&w, &TransferLaw::from_pmf(Pmf::point(1)).unwrap()).unwrap();
    let (lambda, rho, mean_s) = (w.lambda, w.rho(), w.service.mean());
    let ec = pts
        .iter()
        .map(|x| {
            let z = c(*x);
            let s = (1.0 - w.batch.eval(z)) * lambda;
            let alpha = if s.norm() < 1e-9 { c(mean_s) } else { (1.0 - w.service.lst(s)) / s };
            let want = (1.0 - rho) / (lambda * mean_s) * lambda * z * alpha
                / (1.0 - alpha * lambda * (1.0 - w.batch.eval(z)) / (1.0 - z));
            (g2.eval(z) - want).norm()
        })
        .fold(0.0, f64::max);
    outcome(
        ea < 1e-12 && eb < 1e-12 && ec < 1e-12,
        format!("(a) {ea:.1e}, (b) {eb:.1e}, (c) {ec:.1e}"),
    )
}

/// Hypergeometric ratio from `gamma_k = k + 1`, `p_k = 1/(k + 1)`, `lambda_v = 1`.
fn criterion_5() -> Outcome {
    let m = MarkovianBalking {
        lambda_v: 1.0,
        admit: RateSequence::Rational { numerator: vec![1.0], denominator: vec![1.0, 1.0] },
        exit: RateSequence::Rational { numerator: vec![1.0, 1.0], denominator: vec![1.0] },
        disaster: RateSequence::Constant(0.0),
        batch: BatchLaw::single(),
    };
    // psi_k is proportional to gamma_k p_(0,k); the ratio is taken before
    // normalization so that no term is cut off.
    let ss = markovian_steady_state(&m, Some(32)).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=30 {
        let kf = k as f64;
        let want = (kf + 2.0).powi(2) / ((kf + 1.0).powi(2) * (kf * kf + 4.0 * kf + 5.0));
        let got = m.exit_rate(k + 1) * ss.p0[k + 1] / (m.exit_rate(k) * ss.p0[k]);
        worst_ratio = worst_ratio.max(((got - want) / want).abs());
    }
    let full = markovian_steady_state(&m, None).unwrap();
    let psi = markovian_psi(&full, &m.exit).unwrap().dense_pmf(40).unwrap();
    let h = hypergeometric_psi(&HypergeometricRatio {
        numerator_roots: vec![c(2.0), c(2.0)],
        denominator_roots: vec![c(1.0), c(1.0), Complex64::new(2.0, 1.0), Complex64::new(2.0, -1.0)],
        scale: 1.0,
    })
    .unwrap();
    let sup = sup_distance(&h.dense_pmf(40).unwrap(), &psi);
    outcome(
        worst_ratio < 1e-12 && sup < 1e-10,
        format!("ratio rel err {worst_ratio:.1e}, psi sup {sup:.1e}"),
    )
}

/// M/M/1 vacation dynamics with disasters.
fn criterion_6() -> Outcome {
    let (l, m, g) = (1.0, 2.0, 1.0);
    let rho = mm1_disaster_load(l, m, g);
    let residual = (m * rho * rho - (l + m + g) * rho + l).abs();
    let v = VacationModelSpec::DisasterCoupled(DisasterCoupled::MM1 { lambda_v: l, mu_v: m, gamma: g });
    let psi = v.transfer_law().unwrap().dense_pmf(60).unwrap();
    let geo = (1..60)
        .map(|k| (psi[k] - (1.0 - rho) * rho.powi(k as i32 - 1)).abs())
        .fold(0.0, f64::max);
    outcome(
        (rho - 0.292_893_218_813_452_5).abs() < 1e-12 && residual < 1e-14 && geo < 1e-12,
        format!("rho {rho:.10}, quadratic residual {residual:.1e}, geometric sup {geo:.1e}"),
    )
}

/// Chain-sequence birth-death rates and the disaster law.
fn criterion_7() -> Outcome {
    let reference = [0.796, 0.746, 0.729, 0.723, 0.721];
    let rates: Vec<f64> = (1..=5).map(|n| chain_bdp_rates(0.2, n).unwrap().0).collect();
    let reference_ok = rates.iter().zip(&reference).all(|(r, p)| (r - p).abs() <= 5e-4);

    // Oracle: the truncated generator of the chain with clearing at rate gamma.
    let (a, gamma, n) = (0.2, 1.0, 400);
    let mut gen = GeneratorMatrix::new(n + 1);
    for k in 0..=n {
        let (lam, mu) = chain_bdp_rates(a, k).unwrap();
        if k < n {
            gen.add(k, k + 1, lam);
        }
        if k > 0 {
            gen.add(k, k - 1, mu);
            gen.add(k, 0, gamma);
        }
    }
    let oracle = steady_state(&gen).unwrap();
    let pmf = chain_bdp_disaster_pmf(a, gamma, n).unwrap();
    let sup = sup_distance(&pmf.dense(n + 1), &oracle);
    let total: f64 = pmf.weights().iter().sum();
    let fmt: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
    outcome(
        reference_ok && sup < 1e-7 && (total - 1.0).abs() < 1e-8,
        format!(
            "lambda_1..5 = ({}) vs reference {reference:?}; pmf sup {sup:.1e}, sum-1 {:.1e}",
            fmt.join(", "),
            total - 1.0
        ),
    )
}

/// M^X/G/1 vacation dynamics with clearing: root residual and simulated transfers.
fn criterion_8() -> Outcome {
    let m = MxG1Disaster {
        lambda_v: 0.8,
        batch: uniform12(),
        service: ServiceLaw::deterministic(0.7).unwrap(),
        xi: 0.4,
        gamma: 0.6,
    };
    let z = mxg1_disaster_root(&m).unwrap();
    let s = m.xi + m.gamma + m.lambda_v * (1.0 - m.batch.eval(c(z)).re);
    let residual = (z - m.service.lst(c(s)).re).abs();
    let v = VacationModelSpec::DisasterCoupled(DisasterCoupled::MxG1Disaster(m));
    let counts = simulate_transfers(&v, 100_000, 8).unwrap();
    let n: u64 = counts.iter().sum();
    let emp: Vec<f64> = counts.iter().map(|x| *x as f64 / n as f64).collect();
    let law = v.transfer_law().unwrap().dense_pmf(emp.len().max(200)).unwrap();
    let mut e = emp.clone();
    e.resize(law.len(), 0.0);
    let tv = total_variation(&e, &law);
    outcome(
        residual < 1e-12 && tv < 0.015,
        format!("root {z:.12}, residual {residual:.1e}, TV {tv:.4}"),
    )
}

/// Pathwise audits and the estimator identities.
fn criterion_9() -> Outcome {
    let w = working(0.5, uniform12(), ServiceLaw::erlang(2, 4.0).unwrap());
    let v = VacationModelSpec::BinomialReneging(BinomialReneging { lambda_v: 1.0, xi: 0.5, gamma: 0.7, p: 0.4 });
    let mut cfg = SimConfig::new(w, v, 6250, 99);
    cfg.keep_log = 6250;
    let r = simulate(&cfg).unwrap();
    let mut log_ok = true;
    for s in &r.stats {
        let a = level_crossing_audit(&s.log).unwrap();
        log_ok &= a.passed() && a.cycles == s.log.records.len() as u64;
    }
    let z = |e: &mxvac_core::sim::Estimate| e.z_score(0.0).unwrap_or(f64::INFINITY);
    let wald = r.wald.iter().map(z).fold(0.0, f64::max);
    let crossing = r.crossing.iter().map(z).fold(0.0, f64::max);
    let pa = &r.path_audit;
    outcome(
        pa.passed() && log_ok && wald < 3.0 && crossing < 3.0,
        format!(
            "{} cycles, {} crossing mismatches, time err {:.1e}, sub-busy err {:.1e}, max |z| wald {wald:.2} crossing {crossing:.2}",
            pa.cycles, pa.crossing_mismatches, pa.max_level_time_error, pa.max_sub_busy_error
        ),
    )
}

/// Bit-identical reruns and the golden files.
fn criterion_10() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut scenario = Scenario::load(&root.join("scenarios/mm1_exp_vacation.toml")).unwrap();
    scenario.run.n_cycles = 300;
    scenario.run.replications = 4;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    commands::simulate(&scenario, a.path(), Format::Csv).unwrap();
    commands::simulate(&scenario, b.path(), Format::Csv).unwrap();
    let same = ["simulated_working.csv", "simulated_vacation.csv", "simulated_transfer.csv", "simulated_summary.json"]
        .iter()
        .all(|f| fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap());

    commands::analyze(&scenario, a.path(), Format::Csv).unwrap();
    commands::oracle(&scenario, a.path(), Format::Csv).unwrap();
    let golden = root.join("tests/golden");
    let sim_golden = fs::read(golden.join("mm1_simulated_working.csv")).ok()
        == Some(fs::read(a.path().join("simulated_working.csv")).unwrap());
    let close = |name: &str, file: &str| {
        let Ok(want) = read_table(&golden.join(name)) else { return false };
        let got = dense(&read_table(&a.path().join(file)).unwrap()).0;
        let want = dense(&want).0;
        got.len() == want.len() && got.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-12)
    };
    let exact_golden = close("mm1_analytic_working.csv", "analytic_working.csv")
        && close("mm1_oracle_working.csv", "oracle_working.csv");
    outcome(
        same && sim_golden && exact_golden,
        format!("rerun identical: {same}, simulated golden: {sim_golden}, analytic/oracle golden: {exact_golden}"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let o = f();
        println!("criterion {n:>2}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
