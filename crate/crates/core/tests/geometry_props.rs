use kahlerflow::geometry::{self, ChartPoint};
use kahlerflow::validate::{random_cvector, random_interior_point, rng};
use kahlerflow::{CMatrix, CVector, ManifoldSpec, C64};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn specs() -> Vec<ManifoldSpec> {
    vec![
        ManifoldSpec::ProjectiveCP { m: 2, a: 1.4 },
        ManifoldSpec::HyperbolicCH { m: 2, b: 0.7 },
        ManifoldSpec::Flat { m: 2 },
        ManifoldSpec::Product2D { lambdas: vec![0.5, -2.0, 1.0] },
    ]
}

#[test]
fn geodesics_solve_the_geodesic_equation() {
    let mut r = rng(11);
    for spec in specs() {
        for i in 0..50 {
            let u = random_cvector(&mut r, spec.dim(), 0.8);
            let t = 0.02 * i as f64;
            let (z, dz, ddz) = geometry::geodesic_jet(&spec, &u, t).unwrap();
            let pt = ChartPoint { z };
            let gamma = geometry::christoffel(&spec, &pt).unwrap();
            let residual = (ddz + gamma.contract(&dz, &dz)).norm();
            assert!(residual < 1e-8, "{spec:?} t={t}: {residual}");

            let g0 = geometry::metric(&spec, &ChartPoint::origin(spec.dim())).unwrap().g;
            let g = geometry::metric(&spec, &pt).unwrap().g;
            let s0 = geometry::squared_speed(&g0, &u);
            let s = geometry::squared_speed(&g, &dz);
            assert!((s - s0).abs() <= 1e-10 * s0.max(1e-300), "{spec:?}: {s} vs {s0}");
        }
    }
}

#[test]
fn geodesic_jet_matches_finite_differences() {
    let spec = ManifoldSpec::HyperbolicCH { m: 2, b: 1.0 };
    let u = CVector::from_vec(vec![C64::new(0.4, -0.3), C64::new(0.1, 0.5)]);
    let h = 1e-5;
    let (_, dz, _) = geometry::geodesic_jet(&spec, &u, 0.8).unwrap();
    let forward = geometry::geodesic(&spec, &u, 0.8 + h).unwrap().z;
    let back = geometry::geodesic(&spec, &u, 0.8 - h).unwrap().z;
    assert!(((forward - back) / C64::new(2.0 * h, 0.0) - dz).norm() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_is_positive_and_inverse_is_exact(seed in 0u64..10_000, which in 0usize..4) {
        let spec = &specs()[which];
        let z = random_interior_point(&mut rng(seed), spec);
        let mt = geometry::metric(spec, &z).unwrap();
        let m = spec.dim();
        let prod = &mt.g * &mt.g_inv;
        prop_assert!((prod - CMatrix::identity(m, m)).norm() < 1e-12);
        prop_assert!((&mt.g - mt.g.adjoint()).norm() < 1e-15);
        let eig = SymmetricEigen::new(mt.g.clone());
        prop_assert!(eig.eigenvalues.iter().all(|l| *l > 0.0));
    }

    #[test]
    fn log_det_matches_determinant(seed in 0u64..10_000, which in 0usize..4) {
        let spec = &specs()[which];
        let z = random_interior_point(&mut rng(seed), spec);
        let g = geometry::metric(spec, &z).unwrap().g;
        let h = geometry::log_det_metric(spec, &z).unwrap();
        prop_assert!((g.determinant().re.ln() - h).abs() < 1e-10);
    }

    #[test]
    fn einstein_condition_holds(seed in 0u64..10_000, which in 0usize..4) {
        let spec = &specs()[which];
        let z = random_interior_point(&mut rng(seed), spec);
        let mt = geometry::metric(spec, &z).unwrap();
        let curv = geometry::curvature(spec, &z).unwrap();
        let expect = geometry::einstein_ricci(spec, &mt.g);
        prop_assert!((curv.ricci - expect).norm() < 1e-10);
    }

    #[test]
    fn fd_identities(seed in 0u64..10_000, which in 0usize..4) {
        let spec = &specs()[which];
        let z = random_interior_point(&mut rng(seed), spec);
        let rep = geometry::verify_kahler_identities(spec, &z, 1e-4).unwrap();
        prop_assert!(rep.potential_residual < 1e-6, "{:?}", rep);
        prop_assert!(rep.max() < 1e-5, "{:?}", rep);
    }
}

#[test]
fn outside_chart_is_rejected() {
    let spec = ManifoldSpec::HyperbolicCH { m: 1, b: 1.0 };
    let z = ChartPoint::from_slice(&[C64::new(1.0, 0.0)]);
    assert!(geometry::metric(&spec, &z).is_err());
    assert!(geometry::kahler_potential(&spec, &z).is_err());
    let wrong = ChartPoint::from_slice(&[C64::new(0.1, 0.0), C64::new(0.0, 0.0)]);
    assert!(geometry::metric(&spec, &wrong).is_err());
}
