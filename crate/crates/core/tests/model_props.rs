use kahlerflow::closed_form::{self, CurvatureSign, ModeParams, Regime};
use kahlerflow::cqm::{self, SpectralInputs};
use kahlerflow::observables::{self, Observable};
use kahlerflow::sweep::{self, SweepAxis, SweepConfig};
use kahlerflow::validate::{random_cvector, random_hermitian, rng};
use kahlerflow::{Execution, C64};
use proptest::prelude::*;

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), n)
        .prop_filter("nonzero state", |v| v.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-6)
}

fn inputs(xi: Vec<C64>, m: f64) -> SpectralInputs {
    SpectralInputs { eigenvalues: (1..=xi.len()).map(|j| j as f64).collect(), xi, hbar: 1.0, mass_m: m, mass_big_m: 1.0, radii_override: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn increasing_mass_never_restores_quantum(xi in amplitudes(4), m1 in 0.2f64..4.0, dm in 0.01f64..3.0) {
        let light = cqm::build(inputs(xi.clone(), m1)).unwrap();
        let heavy = cqm::build(inputs(xi, m1 + dm)).unwrap();
        for j in 0..4 {
            prop_assert!(heavy.ks[j] >= light.ks[j]);
            if light.modes[j].regime() == Regime::Classical {
                prop_assert_eq!(heavy.modes[j].regime(), Regime::Classical);
            }
        }
    }

    #[test]
    fn threshold_matches_k(xi in amplitudes(5), m in 1.01f64..6.0) {
        let sys = cqm::build(inputs(xi, m)).unwrap();
        prop_assert_eq!(cqm::collapse_report(&sys).threshold_consistent, Some(true));
    }

    #[test]
    fn k_identity_holds(xi in amplitudes(3), m in 0.1f64..5.0, hbar in 0.1f64..3.0) {
        let sys = cqm::build(SpectralInputs { hbar, ..inputs(xi.clone(), m) }).unwrap();
        let total = xi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for ((x, k), mode) in xi.iter().zip(&sys.ks).zip(&sys.modes) {
            prop_assert!((k - m * x.norm() / total).abs() < 1e-12);
            prop_assert!((mode.params.k() - k).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_norm_is_conserved(xi in amplitudes(3), m in 0.1f64..3.0, t in 0.0f64..10.0) {
        let sys = cqm::build(inputs(xi, m)).unwrap();
        prop_assume!(sys.modes.iter().all(|md| md.regime() != Regime::Critical));
        let (_, geo) = cqm::norms(&sys, t).unwrap();
        let want = 4.0 * sys.total_norm().powi(2);
        prop_assert!((geo - want).abs() < 1e-9 * want);
    }

    #[test]
    fn cp_norm_identity(x in 0.01f64..2.0, a in 0.3f64..3.0, qh in 0.2f64..5.0, t in 0.0f64..20.0) {
        let p = ModeParams::scalar(C64::new(0.6 * x, 0.8 * x), a, 1.0, qh, CurvatureSign::Positive);
        let (z, psi) = closed_form::cp_solution(&p, t).unwrap();
        let zp = z[0] * psi[0];
        let n = 4.0 / a.powi(4) * (a * a + z[0].norm_sqr()) * (a * a * psi[0].norm_sqr() + zp.norm_sqr());
        prop_assert!((n - 4.0 * x * x).abs() < 1e-10 * 4.0 * x * x);
    }

    #[test]
    fn ch_stays_inside_chart(x in 0.01f64..2.0, qh in 0.2f64..5.0, t in 0.0f64..5.0) {
        let p = ModeParams::scalar(C64::new(x, 0.0), 1.0, 1.0, qh, CurvatureSign::Negative);
        prop_assume!((p.k() - 1.0).abs() > 1e-6);
        let (z, _) = closed_form::ch_solution(&p, t).unwrap();
        let gap = closed_form::boundary_gap(&p, t).unwrap();
        prop_assert!(z[0].norm() < 1.0);
        prop_assert!(gap > 0.0 && gap <= 1.0 + 1e-15);
    }

    #[test]
    fn born_distribution_is_normalised(seed in 0u64..100_000, n in 2usize..6) {
        let mut r = rng(seed);
        let a = Observable::new(random_hermitian(&mut r, n));
        let psi = random_cvector(&mut r, n, 1.0);
        let probs = observables::born_probabilities(&a, &psi).unwrap();
        let total: f64 = probs.iter().map(|p| p.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(probs.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn parallel_sweeps_are_deterministic() {
    let cfg = SweepConfig { sign: CurvatureSign::Negative, q: 1.0, h: 2.0, xi_abs: 0.5, t_probe: 2.0 };
    let axis = SweepAxis::K(sweep::k_grid(0.0, 4.0, 0.01, 1e-6).unwrap());
    let a = sweep::sweep(&cfg, &axis, Execution::Parallel).unwrap();
    let b = sweep::sweep(&cfg, &axis, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    let series_seq =
        cqm::evolve_series(&cqm::build(inputs(vec![C64::new(0.8, 0.0), C64::new(0.6, 0.0)], 2.0)).unwrap(), &[0.0, 1.0, 2.0], Execution::Sequential).unwrap();
    let series_par =
        cqm::evolve_series(&cqm::build(inputs(vec![C64::new(0.8, 0.0), C64::new(0.6, 0.0)], 2.0)).unwrap(), &[0.0, 1.0, 2.0], Execution::Parallel).unwrap();
    assert_eq!(series_seq, series_par);
}

#[test]
fn positive_curvature_sweep_is_always_quantum() {
    let cfg = SweepConfig { sign: CurvatureSign::Positive, q: 1.0, h: 2.0, xi_abs: 0.5, t_probe: 2.0 };
    let rows = sweep::sweep(&cfg, &SweepAxis::K(vec![0.5, 1.0, 2.0, 10.0]), Execution::Sequential).unwrap();
    assert!(rows.iter().all(|r| r.regime == Regime::Quantum && r.period.is_some()));
}
