//! The `analyze`, `oracle`, `simulate` and `compare` commands.

use std::path::Path;

use mxvac_core::ctmc::oracle_report;
use mxvac_core::fft::extract_coefficients;
use mxvac_core::mxg1::{conditional_busy_pgf, cycle_quantities, recursive_working_probs};
use mxvac_core::pmf::{sup_distance, total_variation};
use mxvac_core::report::{analytic_report, Provenance, SteadyStateReport};
use mxvac_core::sim::{self, EmpiricalReport, Estimate, SimConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{dense, read_table, rows, write_json, write_table, Format};
use crate::scenario::Scenario;

fn extraction_grid(j_max: usize) -> usize {
    (8 * (j_max + 1)).next_power_of_two().max(4096)
}

fn write_report_tables(
    out: &Path,
    report: &SteadyStateReport,
    format: Format,
) -> Result<(), CliError> {
    let src = report.provenance;
    let prefix = src.as_str();
    write_table(
        out,
        &format!("{prefix}_working"),
        &rows(
            &report.conditional_working,
            src,
            report.conditional_working_stderr.as_deref(),
        ),
        format,
    )?;
    if let Some(t) = &report.transfer {
        write_table(out, &format!("{prefix}_transfer"), &rows(t, src, None), format)?;
    }
    if let Some(v) = &report.conditional_vacation {
        write_table(out, &format!("{prefix}_vacation"), &rows(v, src, None), format)?;
    }
    Ok(())
}

fn report_summary(report: &SteadyStateReport) -> Value {
    json!({
        "p0_dot": report.p0_dot,
        "p1_dot": report.p1_dot,
        "e_b0": report.e_b0,
        "e_b1": report.e_b1,
        "mean_y": report.mean_y,
        "truncation_mass": report.truncation_mass,
    })
}

/// Decomposition tables, the busy-conditional `M^X/G/1` table, and the
/// recursion cross-check when the vacation model fixes `E[B0]`.
pub fn analyze(scenario: &Scenario, out: &Path, format: Format) -> Result<Value, CliError> {
    let spec = scenario.working_spec()?;
    let vac = scenario.vacation_spec()?;
    let j_max = scenario.run.j_max;
    let report = analytic_report(&spec, &vac, j_max)?;
    write_report_tables(out, &report, format)?;

    let busy = extract_coefficients(&conditional_busy_pgf(&spec)?, j_max, extraction_grid(j_max))?;
    write_table(out, "analytic_busy", &rows(&busy.dense(j_max + 1), Provenance::Analytic, None), format)?;

    let mut recursion_gap = None;
    if let Some(e_b0) = report.e_b0 {
        let transfer = vac.transfer_law()?;
        let cycles = cycle_quantities(&spec, transfer.mean_y, e_b0)?;
        let probs = recursive_working_probs(&spec, &transfer, &cycles, j_max)?;
        let cond = probs.conditional();
        write_table(out, "analytic_recursion", &rows(&cond, Provenance::Analytic, None), format)?;
        recursion_gap = Some(sup_distance(&cond, &report.conditional_working));
    }

    let summary = json!({
        "command": "analyze",
        "scenario": scenario,
        "rho": spec.rho(),
        "j_max": j_max,
        "results": report_summary(&report),
        "recursion_sup_gap": recursion_gap,
    });
    write_json(out, "analytic_summary", &summary)?;
    Ok(summary)
}

/// Truncated-generator solution.
pub fn oracle(scenario: &Scenario, out: &Path, format: Format) -> Result<Value, CliError> {
    let spec = scenario.working_spec()?;
    let vac = scenario.vacation_spec()?;
    let n = scenario.run.truncation;
    let report = oracle_report(&spec, &vac, n)?;
    write_report_tables(out, &report, format)?;
    let summary = json!({
        "command": "oracle",
        "scenario": scenario,
        "truncation": n,
        "results": report_summary(&report),
    });
    write_json(out, "oracle_summary", &summary)?;
    Ok(summary)
}

pub fn sim_config(scenario: &Scenario) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::new(
        scenario.working_spec()?,
        scenario.vacation_spec()?,
        scenario.run.n_cycles,
        scenario.run.seed,
    );
    cfg.replications = scenario.run.replications;
    cfg.validate()?;
    Ok(cfg)
}

/// Replications run in parallel and are merged in replication order.
pub fn run_simulation(cfg: &SimConfig) -> Result<EmpiricalReport, CliError> {
    cfg.validate()?;
    let stats = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| sim::simulate_replication(cfg, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sim::merge(stats)?)
}

fn estimate(e: &Estimate) -> Value {
    json!({ "value": e.value, "stderr": e.stderr })
}

pub fn simulate(scenario: &Scenario, out: &Path, format: Format) -> Result<Value, CliError> {
    let cfg = sim_config(scenario)?;
    let emp = run_simulation(&cfg)?;
    write_report_tables(out, &emp.to_report(), format)?;
    let audit = emp.path_audit;
    let summary = json!({
        "command": "simulate",
        "scenario": scenario,
        "replications": emp.replications,
        "cycles": emp.cycles,
        "p0_dot": estimate(&emp.p0_dot),
        "p1_dot": estimate(&emp.p1_dot),
        "e_b0": estimate(&emp.e_b0),
        "e_b1": estimate(&emp.e_b1),
        "mean_y": estimate(&emp.mean_y),
        "path_audit": {
            "passed": audit.passed(),
            "cycles": audit.cycles,
            "crossing_mismatches": audit.crossing_mismatches,
            "max_level_time_error": audit.max_level_time_error,
            "max_sub_busy_error": audit.max_sub_busy_error,
        },
        "wald_residuals": emp.wald.iter().map(estimate).collect::<Vec<_>>(),
        "crossing_residuals": emp.crossing.iter().map(estimate).collect::<Vec<_>>(),
    });
    write_json(out, "simulated_summary", &summary)?;
    Ok(summary)
}

/// Pairwise comparison of stored working-mode tables.
pub fn compare(
    scenario: &Scenario,
    dir: &Path,
    sources: &[Provenance],
    format: Format,
) -> Result<Value, CliError> {
    if sources.len() < 2 {
        return Err(CliError::Scenario("compare needs at least two sources".into()));
    }
    let mut tables = Vec::new();
    for s in sources {
        let path = dir.join(format!("{}_working.{}", s.as_str(), format.extension()));
        tables.push((*s, dense(&read_table(&path)?)));
    }
    let tol = &scenario.run.tolerances;
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for i in 0..tables.len() {
        for k in i + 1..tables.len() {
            let (sa, (a, a_se)) = &tables[i];
            let (sb, (b, b_se)) = &tables[k];
            let sup = sup_distance(a, b);
            let tv = total_variation(a, b);
            let se = a_se.as_ref().or(b_se.as_ref());
            let max_z = se.map(|se| {
                (0..a.len().max(b.len()))
                    .filter_map(|j| {
                        let s = se.get(j).copied().unwrap_or(0.0);
                        let d = a.get(j).unwrap_or(&0.0) - b.get(j).unwrap_or(&0.0);
                        (s > 0.0).then(|| d.abs() / s)
                    })
                    .fold(0.0, f64::max)
            });
            let simulated = *sa == Provenance::Simulated || *sb == Provenance::Simulated;
            let (metric, value, limit) = if simulated {
                ("tv", tv, tol.tv)
            } else {
                ("sup", sup, tol.sup)
            };
            let pass = value <= limit;
            let name = format!("{}-{}", sa.as_str(), sb.as_str());
            if !pass {
                failures.push(format!("{name}: {metric} {value:e} > {limit:e}"));
            }
            pairs.push(json!({
                "pair": name,
                "sup": sup,
                "tv": tv,
                "max_z": max_z,
                "gate": metric,
                "limit": limit,
                "pass": pass,
            }));
        }
    }
    let summary = json!({
        "command": "compare",
        "scenario": scenario,
        "pairs": pairs,
        "pass": failures.is_empty(),
    });
    write_json(dir, "comparison", &summary)?;
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(CliError::CompareFailed(failures.join("; ")))
    }
}
