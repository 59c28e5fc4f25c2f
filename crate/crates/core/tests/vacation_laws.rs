use mxvac_core::fft::extract_coefficients;
use mxvac_core::pmf::sup_distance;
use mxvac_core::vacation::{
    markovian_psi, markovian_steady_state, BinomialReneging, DisasterCoupled, MarkovianBalking,
    MultipleVacations, RateSequence,
};
use mxvac_core::{BatchLaw, Complex64, ServiceLaw, TransferLaw, VacationModelSpec};
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn max_gap(a: &TransferLaw, b: &TransferLaw) -> f64 {
    (0..40)
        .map(|i| i as f64 / 40.0)
        .map(|x| (a.psi.eval(c(x)) - b.psi.eval(c(x))).norm())
        .fold(0.0, f64::max)
}

fn balking(lambda_v: f64, gamma: f64, disaster: f64) -> MarkovianBalking {
    MarkovianBalking {
        lambda_v,
        admit: RateSequence::Constant(1.0),
        exit: RateSequence::Constant(gamma),
        disaster: RateSequence::Constant(disaster),
        batch: BatchLaw::single(),
    }
}

fn exp_vacations(lambda_v: f64, gamma: f64) -> VacationModelSpec {
    VacationModelSpec::MultipleVacations(MultipleVacations {
        lambda_v,
        batch: BatchLaw::single(),
        vacation: ServiceLaw::exponential(gamma).unwrap(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn markovian_without_balking_is_multiple_vacations(lambda_v in 0.1f64..5.0, gamma in 0.1f64..5.0) {
        let m = VacationModelSpec::MarkovianBalking(balking(lambda_v, gamma, 0.0)).transfer_law().unwrap();
        let mv = exp_vacations(lambda_v, gamma).transfer_law().unwrap();
        prop_assert!(max_gap(&m, &mv) < 1e-10);
        prop_assert!((m.mean_y - mv.mean_y).abs() < 1e-10 * mv.mean_y);
    }

    #[test]
    fn transfer_law_ignores_steady_state_scale(lambda_v in 0.1f64..3.0, gamma in 0.1f64..3.0, scale in 1e-6f64..1e6) {
        let m = MarkovianBalking {
            admit: RateSequence::Rational { numerator: vec![1.0], denominator: vec![1.0, 0.5] },
            ..balking(lambda_v, gamma, 0.3)
        };
        let ss = markovian_steady_state(&m, None).unwrap();
        let mut scaled = ss.clone();
        for p in &mut scaled.p0 {
            *p *= scale;
        }
        scaled.p00 *= scale;
        scaled.exit_mass *= scale;
        let a = markovian_psi(&ss, &m.exit).unwrap();
        let b = markovian_psi(&scaled, &m.exit).unwrap();
        let pa = a.dense_pmf(60).unwrap();
        let pb = b.dense_pmf(60).unwrap();
        prop_assert!(sup_distance(&pa, &pb) < 1e-14);
        let argmax = |v: &[f64]| v.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
        prop_assert_eq!(argmax(&pa), argmax(&pb));
    }

    #[test]
    fn every_transfer_law_is_proper(lambda_v in 0.2f64..3.0, gamma in 0.2f64..3.0, xi in 0.1f64..2.0, p in 0.0f64..1.0) {
        let laws = [
            VacationModelSpec::BinomialReneging(BinomialReneging { lambda_v, xi, gamma, p }),
            VacationModelSpec::MarkovianBalking(balking(lambda_v, gamma, xi)),
            VacationModelSpec::DisasterCoupled(DisasterCoupled::MM1 { lambda_v, mu_v: lambda_v + gamma, gamma: xi }),
        ];
        for vac in laws {
            let t = vac.transfer_law().unwrap();
            prop_assert!((t.psi.eval(c(1.0)).re - 1.0).abs() < 1e-10);
            let pmf = extract_coefficients(&t.psi, 200, 2048).unwrap();
            prop_assert!(pmf.prob(0).abs() < 1e-12);
            prop_assert!(pmf.weights().iter().all(|w| *w > -1e-10));
            prop_assert!((pmf.mean() - t.mean_y).abs() < 1e-7 * t.mean_y, "{} {}", pmf.mean(), t.mean_y);
        }
    }
}

#[test]
fn reneging_limits() {
    let (lambda_v, gamma, xi) = (1.3, 0.8, 0.6);
    let never = VacationModelSpec::BinomialReneging(BinomialReneging { lambda_v, xi, gamma, p: 0.0 });
    let mv = exp_vacations(lambda_v, gamma);
    assert!(max_gap(&never.transfer_law().unwrap(), &mv.transfer_law().unwrap()) < 1e-10);
    assert!(
        (never.expected_vacation_duration().unwrap() - mv.expected_vacation_duration().unwrap()).abs()
            < 1e-10
    );

    // With p = 1 every abandonment epoch empties the system: a clearing event.
    let all = VacationModelSpec::BinomialReneging(BinomialReneging { lambda_v, xi, gamma, p: 1.0 });
    let cleared = VacationModelSpec::MarkovianBalking(balking(lambda_v, gamma, xi));
    assert!(max_gap(&all.transfer_law().unwrap(), &cleared.transfer_law().unwrap()) < 1e-10);
    assert!(
        (all.expected_vacation_duration().unwrap() - cleared.expected_vacation_duration().unwrap())
            .abs()
            < 1e-9
    );
}

#[test]
fn mm1_disasters_give_shifted_geometric() {
    let (lambda_v, mu_v, gamma) = (1.0, 2.0, 1.0);
    let vac = DisasterCoupled::MM1 { lambda_v, mu_v, gamma };
    let t = VacationModelSpec::DisasterCoupled(vac).transfer_law().unwrap();
    let rho = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let pmf = t.dense_pmf(40).unwrap();
    for (k, p) in pmf.iter().enumerate().skip(1) {
        assert!((p - (1.0 - rho) * rho.powi(k as i32 - 1)).abs() < 1e-12, "k={k}");
    }
}
