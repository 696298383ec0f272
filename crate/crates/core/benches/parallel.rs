use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kahlerflow::closed_form::CurvatureSign;
use kahlerflow::cqm::{self, SpectralInputs};
use kahlerflow::flow::{self, FlowParams, PhaseState};
use kahlerflow::sweep::{self, SweepAxis, SweepConfig};
use kahlerflow::{CVector, Execution, MagneticSpec, ManifoldSpec, C64};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(exec: Execution) -> &'static str {
    match exec {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = SweepConfig { sign: CurvatureSign::Negative, q: 1.0, h: 2.0, xi_abs: 0.5, t_probe: 3.0 };
    let axis = SweepAxis::K(sweep::k_grid(0.01, 5.0, 0.0005, 1e-3).unwrap());
    let mut group = c.benchmark_group("sweep");
    for exec in MODES {
        group.bench_function(BenchmarkId::from_parameter(label(exec)), |b| b.iter(|| sweep::sweep(&cfg, &axis, exec).unwrap()));
    }
    group.finish();
}

fn bench_batch(c: &mut Criterion) {
    let params = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 2, a: 1.0 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 1.0);
    let initials: Vec<PhaseState> = (0..32)
        .map(|i| {
            let x = 0.05 + 0.02 * i as f64;
            PhaseState::at_origin(CVector::from_vec(vec![C64::new(x, 0.1), C64::new(-0.1, x)]))
        })
        .collect();
    let mut group = c.benchmark_group("integrate_batch");
    group.sample_size(10);
    for exec in MODES {
        group.bench_function(BenchmarkId::from_parameter(label(exec)), |b| b.iter(|| flow::integrate_batch(&initials, &params, exec)));
    }
    group.finish();
}

fn bench_collapse(c: &mut Criterion) {
    let n = 64;
    let sys = cqm::build(SpectralInputs {
        eigenvalues: (1..=n).map(|j| j as f64).collect(),
        xi: (0..n).map(|j| C64::new(1.0 / (1.0 + j as f64), 0.0)).collect(),
        hbar: 1.0,
        mass_m: 2.0,
        mass_big_m: 1.0,
        radii_override: None,
    })
    .unwrap();
    let times: Vec<f64> = (0..4000).map(|i| i as f64 * 0.005).collect();
    let mut group = c.benchmark_group("evolve_series");
    for exec in MODES {
        group.bench_function(BenchmarkId::from_parameter(label(exec)), |b| b.iter(|| cqm::evolve_series(&sys, &times, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_batch, bench_collapse);
criterion_main!(benches);
