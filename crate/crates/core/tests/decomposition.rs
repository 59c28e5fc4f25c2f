use mxvac_core::fft::extract_coefficients;
use mxvac_core::mxg1::{
    conditional_busy_pgf, cycle_quantities, decomposition_pgf, recursive_working_probs,
    regular_mxg1_pgf,
};
use mxvac_core::pgf::{equilibrium_pgf, pgf_from_pmf};
use mxvac_core::pmf::sup_distance;
use mxvac_core::vacation::MultipleVacations;
use mxvac_core::{BatchLaw, Complex64, Pmf, ServiceLaw, TransferLaw, VacationModelSpec, WorkingModeSpec};
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn grid_points() -> impl Iterator<Item = f64> {
    (0..20).map(|i| i as f64 / 20.0)
}

fn service_from(kind: u8, mean: f64) -> ServiceLaw {
    match kind % 4 {
        0 => ServiceLaw::exponential(1.0 / mean).unwrap(),
        1 => ServiceLaw::erlang(3, 3.0 / mean).unwrap(),
        2 => ServiceLaw::deterministic(mean).unwrap(),
        _ => ServiceLaw::hyperexponential(vec![0.4, 0.6], vec![0.8 / mean, 1.2 / mean]).unwrap(),
    }
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1..6).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

prop_compose! {
    fn working()(lambda in 0.2f64..2.0, load in 0.1f64..0.85, w in weights(), kind in 0u8..4)
        -> WorkingModeSpec {
        let batch = BatchLaw::finite(Pmf::new(1, w).unwrap()).unwrap();
        let mean_s = load / (lambda * batch.mean());
        WorkingModeSpec::new(lambda, batch, service_from(kind, mean_s)).unwrap()
    }
}

prop_compose! {
    fn vacations()(lambda_v in 0.2f64..3.0, w in weights(), mean_v in 0.2f64..3.0, kind in 0u8..4)
        -> VacationModelSpec {
        VacationModelSpec::MultipleVacations(MultipleVacations {
            lambda_v,
            batch: BatchLaw::finite(Pmf::new(1, w).unwrap()).unwrap(),
            vacation: service_from(kind, mean_v),
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extraction_recovers_pmf(offset in 0usize..4, w in prop::collection::vec(0.0f64..1.0, 1..30)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let pmf = Pmf::from_unnormalized(offset, w).unwrap();
        let n_max = pmf.max_support() + 3;
        let got = extract_coefficients(&pgf_from_pmf(&pmf), n_max, 4 * (n_max + 1)).unwrap();
        prop_assert!(sup_distance(&got.dense(n_max + 1), &pmf.dense(n_max + 1)) < 1e-10);
    }

    #[test]
    fn equilibrium_coefficients_are_tails(offset in 0usize..3, w in prop::collection::vec(0.0f64..1.0, 1..20)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let pmf = Pmf::from_unnormalized(offset, w).unwrap();
        prop_assume!(pmf.mean() > 1e-3);
        let ue = equilibrium_pgf(&pgf_from_pmf(&pmf).with_mean(pmf.mean())).unwrap();
        let n = pmf.max_support() + 2;
        let got = extract_coefficients(&ue, n, 512).unwrap().dense(n + 1);
        let mut cdf = 0.0;
        for (j, g) in got.iter().enumerate() {
            cdf += pmf.prob(j);
            prop_assert!((g - (1.0 - cdf).max(0.0) / pmf.mean()).abs() < 1e-9, "j={}", j);
        }
    }

    #[test]
    fn decomposition_matches_recursion(spec in working(), vac in vacations()) {
        let transfer = vac.transfer_law().unwrap();
        let g = decomposition_pgf(&spec, &transfer).unwrap();
        let direct = extract_coefficients(&g, 50, 4096).unwrap().dense(51);
        let cycles = cycle_quantities(&spec, transfer.mean_y, vac.expected_vacation_duration().unwrap()).unwrap();
        let rec = recursive_working_probs(&spec, &transfer, &cycles, 50).unwrap().conditional();
        prop_assert!(sup_distance(&direct, &rec) < 1e-9, "{}", sup_distance(&direct, &rec));
    }

    #[test]
    fn idle_probability(spec in working()) {
        let p = regular_mxg1_pgf(&spec).unwrap();
        prop_assert!((p.eval(c(0.0)).re - (1.0 - spec.rho())).abs() < 1e-9);
    }

    #[test]
    fn transfer_equal_to_batch(spec in working()) {
        let pmf = match &spec.batch {
            BatchLaw::Finite(p) => p.clone(),
            _ => unreachable!(),
        };
        let g = decomposition_pgf(&spec, &TransferLaw::from_pmf(pmf).unwrap()).unwrap();
        let busy = conditional_busy_pgf(&spec).unwrap();
        for x in grid_points() {
            prop_assert!((g.eval(c(x)) - busy.eval(c(x))).norm() < 1e-12);
        }
    }
}

fn single_batch(lambda: f64, service: ServiceLaw) -> WorkingModeSpec {
    WorkingModeSpec::new(lambda, BatchLaw::single(), service).unwrap()
}

#[test]
fn unit_batches_factor_into_busy_law_and_transfer_equilibrium() {
    let spec = single_batch(0.6, ServiceLaw::erlang(2, 2.5).unwrap());
    let vac = VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v: 0.9,
        batch: BatchLaw::geometric(0.5).unwrap(),
        vacation: ServiceLaw::deterministic(1.3).unwrap(),
    });
    let t = vac.transfer_law().unwrap();
    let g = decomposition_pgf(&spec, &t).unwrap();
    let busy = conditional_busy_pgf(&spec).unwrap();
    // Both sides carry a factor z, so skip the origin.
    for x in grid_points().skip(1) {
        let z = c(x);
        let psi_eq = (1.0 - t.psi.eval(z)) / (t.mean_y * (1.0 - x));
        assert!((g.eval(z) / busy.eval(z) - psi_eq).norm() < 1e-12, "x={x}");
    }
}

#[test]
fn single_transfers_give_closed_form() {
    let batch = BatchLaw::finite(Pmf::new(1, vec![0.5, 0.3, 0.2]).unwrap()).unwrap();
    let spec = WorkingModeSpec::new(0.4, batch.clone(), ServiceLaw::deterministic(0.9).unwrap()).unwrap();
    let g = decomposition_pgf(&spec, &TransferLaw::from_pmf(Pmf::point(1)).unwrap()).unwrap();
    let (lambda, es) = (0.4, 0.9);
    let rho = spec.rho();
    for x in grid_points() {
        let z = c(x);
        let s = (1.0 - batch.eval(z)) * lambda;
        // alpha = (1 - exp(-s d)) / s, by its series near s = 0
        let alpha = if s.norm() < 1e-8 { c(es) - s * es * es / 2.0 } else { (1.0 - (-s * es).exp()) / s };
        let want = (1.0 - rho) / (lambda * es) * lambda * z * alpha
            / (1.0 - alpha * lambda * (1.0 - batch.eval(z)) / (1.0 - z));
        assert!((g.eval(z) - want).norm() < 1e-12, "x={x}");
    }
}
