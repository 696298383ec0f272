//! Numerical integration of the reduced magnetic Hamiltonian system
//!
//! ```text
//! dz^μ/dt = g^{μν̄} ψ_ν̄
//! dψ_α/dt = −iqH ψ_α + Γ^μ_{αβ} ż^β ψ_μ
//! ```
//!
//! with fixed-step RK4. The Hamiltonian `E = g^{μν̄}ψ_μψ_ν̄` and the
//! geometric norm `‖ψ‖² = 2E` are recorded along the way.

use crate::error::{invalid, Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{self, Block, ChartPoint, ManifoldSpec};
use crate::magnetic::{self, GaugeFunction, MagneticSpec};
use crate::{CMatrix, CVector, C64};

/// A chart point with a momentum covector `ψ_μ = p_μ + q𝒜_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub z: CVector,
    pub psi: CVector,
    pub t: f64,
}

impl PhaseState {
    /// `z = 0`, `ψ = ξ`, `t = 0`.
    pub fn at_origin(xi: CVector) -> Self {
        Self { z: CVector::zeros(xi.len()), psi: xi, t: 0.0 }
    }

    fn pack(&self) -> CVector {
        let m = self.z.len();
        CVector::from_fn(2 * m, |i, _| if i < m { self.z[i] } else { self.psi[i - m] })
    }

    fn unpack(y: &CVector, t: f64) -> Self {
        let m = y.len() / 2;
        Self { z: y.rows(0, m).into_owned(), psi: y.rows(m, m).into_owned(), t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    /// RK4 with step doubling: each step is also taken as two half steps
    /// and the results are extrapolated, giving an error estimate.
    Rk4Richardson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    pub spec: ManifoldSpec,
    pub mag: MagneticSpec,
    pub dt: f64,
    pub method: Method,
    pub t_end: f64,
    /// Fraction of the boundary radius at which negatively curved runs stop.
    pub stop_radius: f64,
    /// Record every n-th step (the final state is always recorded).
    pub sample_every: usize,
}

impl FlowParams {
    pub fn new(spec: ManifoldSpec, mag: MagneticSpec, dt: f64, t_end: f64) -> Self {
        Self { spec, mag, dt, method: Method::Rk4, t_end, stop_radius: 0.999, sample_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.stop_radius > 0.0 && self.stop_radius < 1.0) {
            return Err(invalid(format!("stop_radius must lie in (0, 1), got {}", self.stop_radius)));
        }
        if self.sample_every == 0 {
            return Err(invalid("sample_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    BoundaryGuard,
    PoleOfChart,
    StepFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub energy_series: Vec<f64>,
    pub norm_series: Vec<f64>,
    pub termination: Termination,
    /// Largest per-step Richardson error estimate, when requested.
    pub richardson_error: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectories hold at least the initial state")
    }

    /// Maximum of `|E(t) − E(0)| / E(0)` over the samples.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy_series)
    }

    pub fn norm_drift(&self) -> f64 {
        relative_drift(&self.norm_series)
    }

    /// Samples `range` as a trajectory of its own.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Trajectory {
        Trajectory {
            samples: self.samples[range.clone()].to_vec(),
            energy_series: self.energy_series[range.clone()].to_vec(),
            norm_series: self.norm_series[range].to_vec(),
            termination: self.termination,
            richardson_error: self.richardson_error,
        }
    }
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&e0) = series.first() else { return 0.0 };
    let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
    series.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
}

/// Precomputed block structure and field strengths for the right-hand side.
struct System {
    spec: ManifoldSpec,
    blocks: Vec<Block>,
    h: Vec<f64>,
    q: f64,
}

impl System {
    fn new(spec: &ManifoldSpec, mag: &MagneticSpec) -> Result<Self> {
        spec.validate()?;
        let h = mag.derived_h(spec)?;
        Ok(Self { spec: spec.clone(), blocks: spec.blocks(), h, q: mag.q })
    }

    /// Single-block fast path (CPᵐ, CHᵐ, Cᵐ) in the printed reduced form
    ///
    /// ```text
    /// ż = 2f (ψ̄ + c⟨z̄,ψ̄⟩ z)
    /// ψ̇ = −iqHψ − 2cf⟨z̄,ψ̄⟩ψ − 2c(|ψ|² + c|⟨z,ψ⟩|²) z̄
    /// ```
    ///
    /// with `f = 1 + cρ`, `c = 1/a²` or `−1/b²`.
    fn rhs_space_form(&self, z: &CVector, psi: &CVector) -> Result<(CVector, CVector)> {
        geometry::check_domain(&self.spec, z)?;
        let b = self.blocks[0];
        let c = b.c;
        let f = 1.0 + c * b.rho(z);
        let zb_psib: C64 = z.iter().zip(psi.iter()).map(|(a, p)| (a * p).conj()).sum();
        let z_psi: C64 = z.iter().zip(psi.iter()).map(|(a, p)| a * p).sum();
        let psi2 = psi.norm_squared();
        let qh = self.q * self.h[0];
        let dz = CVector::from_fn(z.len(), |i, _| (psi[i].conj() + z[i] * zb_psib * c) * (2.0 * f));
        let dpsi = CVector::from_fn(z.len(), |i, _| {
            C64::new(0.0, -qh) * psi[i] - psi[i] * zb_psib * (2.0 * c * f) - z[i].conj() * (2.0 * c * (psi2 + c * z_psi.norm_sqr()))
        });
        Ok((dz, dpsi))
    }

    fn rhs(&self, z: &CVector, psi: &CVector) -> Result<(CVector, CVector)> {
        match self.spec {
            ManifoldSpec::Product2D { .. } => self.rhs_generic(z, psi),
            _ => self.rhs_space_form(z, psi),
        }
    }

    /// Generic tensor-contraction path.
    fn rhs_generic(&self, z: &CVector, psi: &CVector) -> Result<(CVector, CVector)> {
        let pt = ChartPoint { z: z.clone() };
        let g_inv = geometry::metric(&self.spec, &pt)?.g_inv;
        let gamma = geometry::christoffel(&self.spec, &pt)?;
        let dz = velocity(&g_inv, psi);
        let m = z.len();
        let mut dpsi = CVector::zeros(m);
        for (b, h) in self.blocks.iter().zip(&self.h) {
            for al in b.range() {
                let mut acc = C64::new(0.0, -self.q * h) * psi[al];
                for mu in 0..m {
                    for be in 0..m {
                        acc += gamma.get(mu, al, be) * dz[be] * psi[mu];
                    }
                }
                dpsi[al] = acc;
            }
        }
        Ok((dz, dpsi))
    }
}

/// `ż^μ = g^{μν̄} ψ_ν̄`, i.e. `conj(g_inv·ψ)` in matrix form.
pub fn velocity(g_inv: &CMatrix, psi: &CVector) -> CVector {
    (g_inv * psi).map(|x| x.conj())
}

/// Right-hand side `(dz/dt, dψ/dt)` of the reduced system.
pub fn eom_rhs(state: &PhaseState, params: &FlowParams) -> Result<(CVector, CVector)> {
    let sys = System::new(&params.spec, &params.mag)?;
    sys.rhs(&state.z, &state.psi)
}

/// Right-hand side by explicit contraction of `g⁻¹` and `Γ`, for any spec.
pub fn eom_rhs_generic(state: &PhaseState, params: &FlowParams) -> Result<(CVector, CVector)> {
    let sys = System::new(&params.spec, &params.mag)?;
    sys.rhs_generic(&state.z, &state.psi)
}

/// `E = g^{μν̄} ψ_μ ψ_ν̄`.
pub fn hamiltonian_integral(state: &PhaseState, params: &FlowParams) -> Result<f64> {
    let g_inv = geometry::metric(&params.spec, &ChartPoint { z: state.z.clone() })?.g_inv;
    Ok(energy(&g_inv, &state.psi))
}

fn energy(g_inv: &CMatrix, psi: &CVector) -> f64 {
    (psi.adjoint() * g_inv * psi)[(0, 0)].re
}

/// `‖ψ‖² = 2E`, equal to `4|ξ|²` for orbits starting at the origin.
pub fn geometric_norm_sq(state: &PhaseState, params: &FlowParams) -> Result<f64> {
    hamiltonian_integral(state, params).map(|e| 2.0 * e)
}

fn rk4_step<F>(rhs: &F, y: &CVector, dt: f64) -> Result<CVector>
where
    F: Fn(&CVector) -> Result<CVector>,
{
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = rhs(y)?;
    let k2 = rhs(&(y + &k1 * half))?;
    let k3 = rhs(&(y + &k2 * half))?;
    let k4 = rhs(&(y + &k3 * full))?;
    Ok(y + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0))
}

struct RawRun {
    times: Vec<f64>,
    states: Vec<CVector>,
    termination: Termination,
    richardson_error: Option<f64>,
}

enum Guard {
    Ok,
    Boundary,
    Pole,
}

fn guard(params: &FlowParams, blocks: &[Block], z: &CVector) -> Guard {
    for b in blocks {
        if let Some(r) = b.boundary_radius() {
            if b.rho(z).sqrt() >= params.stop_radius * r {
                return Guard::Boundary;
            }
        } else if b.c > 0.0 {
            // largest entry of g⁻¹ on the block is at most 2f²
            let f = 1.0 + b.c * b.rho(z);
            if 2.0 * f * f > 1e12 {
                return Guard::Pole;
            }
        }
    }
    Guard::Ok
}

/// Fixed-step driver shared by the reduced and canonical integrators.
/// `y` packs `(z, ·)` with `z` in the first half.
fn drive<F>(params: &FlowParams, t0: f64, y0: CVector, rhs: F) -> RawRun
where
    F: Fn(&CVector) -> Result<CVector>,
{
    let m = y0.len() / 2;
    let blocks = params.spec.blocks();
    let n_steps = (params.t_end / params.dt).ceil() as usize;
    let mut y = y0;
    let mut t = t0;
    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut termination = Termination::Completed;
    let mut worst: Option<f64> = None;

    for step in 0..n_steps {
        let target = if step + 1 == n_steps { t0 + params.t_end } else { t0 + (step + 1) as f64 * params.dt };
        let h = target - t;
        let next = match params.method {
            Method::Rk4 => rk4_step(&rhs, &y, h),
            Method::Rk4Richardson => rk4_step(&rhs, &y, h).and_then(|coarse| {
                let mid = rk4_step(&rhs, &y, 0.5 * h)?;
                let fine = rk4_step(&rhs, &mid, 0.5 * h)?;
                let corr = (&fine - &coarse) / C64::new(15.0, 0.0);
                let e = corr.iter().map(|x| x.norm()).fold(0.0, f64::max);
                worst = Some(worst.map_or(e, |w: f64| w.max(e)));
                Ok(fine + corr)
            }),
        };
        let next = match next {
            Ok(v) => v,
            Err(Error::ChartDomain { .. }) => {
                termination = Termination::BoundaryGuard;
                break;
            }
            Err(_) => {
                termination = Termination::StepFailure;
                break;
            }
        };
        if next.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            termination = Termination::StepFailure;
            break;
        }
        y = next;
        t = target;
        let z = y.rows(0, m).into_owned();
        let status = guard(params, &blocks, &z);
        let last = step + 1 == n_steps || !matches!(status, Guard::Ok);
        if last || (step + 1) % params.sample_every == 0 {
            times.push(t);
            states.push(y.clone());
        }
        match status {
            Guard::Ok => {}
            Guard::Boundary => {
                termination = Termination::BoundaryGuard;
                break;
            }
            Guard::Pole => {
                termination = Termination::PoleOfChart;
                break;
            }
        }
    }
    if termination == Termination::StepFailure || termination == Termination::BoundaryGuard {
        // make sure the last good state is recorded
        if times.last() != Some(&t) {
            times.push(t);
            states.push(y);
        }
    }
    RawRun { times, states, termination, richardson_error: worst }
}

/// Integrate the reduced system from `initial` over `[t, t + t_end]`.
pub fn integrate(initial: &PhaseState, params: &FlowParams) -> Result<Trajectory> {
    params.validate()?;
    geometry::check_domain(&params.spec, &initial.z)?;
    geometry::check_dim(&params.spec, initial.psi.len())?;
    let sys = System::new(&params.spec, &params.mag)?;
    let m = initial.z.len();
    let rhs = |y: &CVector| -> Result<CVector> {
        let z = y.rows(0, m).into_owned();
        let psi = y.rows(m, m).into_owned();
        let (dz, dpsi) = sys.rhs(&z, &psi)?;
        Ok(CVector::from_fn(2 * m, |i, _| if i < m { dz[i] } else { dpsi[i - m] }))
    };
    let raw = drive(params, initial.t, initial.pack(), rhs);
    let samples: Vec<PhaseState> = raw.times.iter().zip(&raw.states).map(|(t, y)| PhaseState::unpack(y, *t)).collect();
    let mut energy_series = Vec::with_capacity(samples.len());
    for s in &samples {
        energy_series.push(hamiltonian_integral(s, params).unwrap_or(f64::NAN));
    }
    let norm_series = energy_series.iter().map(|e| 2.0 * e).collect();
    Ok(Trajectory { samples, energy_series, norm_series, termination: raw.termination, richardson_error: raw.richardson_error })
}

/// Integrate many initial states with shared parameters.
pub fn integrate_batch(initials: &[PhaseState], params: &FlowParams, exec: Execution) -> Vec<Result<Trajectory>> {
    exec::map(exec, initials, |s| integrate(s, params))
}

/// Outcome of integrating in two gauges related by `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    /// `max_t |z_f(t) − z_0(t)|`
    pub max_dz: f64,
    /// `max_t |ψ_f(t) − ψ_0(t)|`
    pub max_dpsi: f64,
    /// `max_t |p_f(t) − p_0(t)|`; nonzero whenever `f` is.
    pub max_dp: f64,
    /// Canonical run (gauge 0) compared against [`integrate`].
    pub max_dz_vs_reduced: f64,
    pub samples: usize,
}

/// State of the canonical integrator: `z` and the canonical momentum `p`.
struct Canonical<'a> {
    spec: &'a ManifoldSpec,
    mag: &'a MagneticSpec,
    gauge: &'a dyn GaugeFunction,
}

impl Canonical<'_> {
    /// Total potential `𝒜_μ + ∂_μ f`.
    fn total_potential(&self, z: &CVector) -> Result<(CVector, CMatrix, CMatrix)> {
        let jet = magnetic::potential_jet(self.mag, self.spec, &ChartPoint { z: z.clone() })?;
        let a = jet.a + self.gauge.gradient(z);
        let d_a = jet.d_a + self.gauge.holomorphic_hessian(z);
        let d_abar = jet.d_abar + self.gauge.mixed_hessian(z);
        Ok((a, d_a, d_abar))
    }

    fn psi(&self, z: &CVector, p: &CVector) -> Result<CVector> {
        let (a, _, _) = self.total_potential(z)?;
        Ok(p + a * C64::new(self.mag.q, 0.0))
    }

    /// `ż = ∂𝓗/∂p`, `ṗ = −∂𝓗/∂z` for `𝓗 = g^{μν̄}ψ_μψ_ν̄`.
    fn rhs(&self, z: &CVector, p: &CVector) -> Result<(CVector, CVector)> {
        let pt = ChartPoint { z: z.clone() };
        let g_inv = geometry::metric(self.spec, &pt)?.g_inv;
        let dg = geometry::metric_derivative(self.spec, &pt)?;
        let (a, d_a, d_abar) = self.total_potential(z)?;
        let q = self.mag.q;
        let psi = p + a * C64::new(q, 0.0);
        let dz = velocity(&g_inv, &psi);
        let dz_bar = dz.map(|x| x.conj());
        let m = z.len();
        let dp = CVector::from_fn(m, |mu, _| {
            let d_ginv = -(&g_inv * &dg[mu] * &g_inv);
            let geo = (psi.adjoint() * d_ginv * &psi)[(0, 0)];
            let mut gauge = C64::new(0.0, 0.0);
            for al in 0..m {
                gauge += d_a[(mu, al)] * dz[al] + d_abar[(mu, al)] * dz_bar[al];
            }
            -(geo + gauge * q)
        });
        Ok((dz, dp))
    }

    fn run(&self, initial: &PhaseState, params: &FlowParams) -> Result<(Vec<PhaseState>, Vec<CVector>)> {
        let m = initial.z.len();
        let (a0, _, _) = self.total_potential(&initial.z)?;
        let p0 = &initial.psi - a0 * C64::new(self.mag.q, 0.0);
        let y0 = CVector::from_fn(2 * m, |i, _| if i < m { initial.z[i] } else { p0[i - m] });
        let rhs = |y: &CVector| -> Result<CVector> {
            let z = y.rows(0, m).into_owned();
            let p = y.rows(m, m).into_owned();
            let (dz, dp) = self.rhs(&z, &p)?;
            Ok(CVector::from_fn(2 * m, |i, _| if i < m { dz[i] } else { dp[i - m] }))
        };
        let raw = drive(params, initial.t, y0, rhs);
        let mut states = Vec::with_capacity(raw.states.len());
        let mut momenta = Vec::with_capacity(raw.states.len());
        for (t, y) in raw.times.iter().zip(&raw.states) {
            let z = y.rows(0, m).into_owned();
            let p = y.rows(m, m).into_owned();
            let psi = self.psi(&z, &p)?;
            states.push(PhaseState { z, psi, t: *t });
            momenta.push(p);
        }
        Ok((states, momenta))
    }
}

/// Integrate in canonical variables `(z, p)` once with the potential from
/// `N` and once with `𝒜 + ∂f`, `p − q∂f`, and compare the orbits.
pub fn gauge_shift_test(initial: &PhaseState, params: &FlowParams, f: &dyn GaugeFunction) -> Result<GaugeReport> {
    params.validate()?;
    geometry::check_domain(&params.spec, &initial.z)?;
    let zero = magnetic::ZeroGauge;
    let base = Canonical { spec: &params.spec, mag: &params.mag, gauge: &zero };
    let shifted = Canonical { spec: &params.spec, mag: &params.mag, gauge: f };
    let (s0, p0) = base.run(initial, params)?;
    let (s1, p1) = shifted.run(initial, params)?;
    let reduced = integrate(initial, params)?;
    let n = s0.len().min(s1.len());
    let max_of = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let max_dz = max_of(&mut (0..n).map(|i| (&s0[i].z - &s1[i].z).norm()));
    let max_dpsi = max_of(&mut (0..n).map(|i| (&s0[i].psi - &s1[i].psi).norm()));
    let max_dp = max_of(&mut (0..n).map(|i| (&p0[i] - &p1[i]).norm()));
    let nr = n.min(reduced.samples.len());
    let max_dz_vs_reduced = max_of(&mut (0..nr).map(|i| (&s0[i].z - &reduced.samples[i].z).norm()));
    Ok(GaugeReport { max_dz, max_dpsi, max_dp, max_dz_vs_reduced, samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic::{QuadraticGauge, ZeroGauge};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vec(v: &[C64]) -> CVector {
        CVector::from_column_slice(v)
    }

    #[test]
    fn rhs_examples() {
        let xi = vec(&[c(0.3, -0.1), c(0.2, 0.4)]);
        let flat = FlowParams::new(ManifoldSpec::Flat { m: 2 }, MagneticSpec::none(), 1e-3, 1.0);
        let (dz, dpsi) = eom_rhs(&PhaseState::at_origin(xi.clone()), &flat).unwrap();
        assert!((dz - xi.map(|x| x.conj() * 2.0)).norm() < 1e-15);
        assert_eq!(dpsi.norm(), 0.0);

        let flat_h = FlowParams::new(ManifoldSpec::Flat { m: 2 }, MagneticSpec::uniform(2.0, 0.5), 1e-3, 1.0);
        let (_, dpsi) = eom_rhs(&PhaseState { z: vec(&[c(0.5, 0.5), c(-1.0, 0.0)]), psi: xi.clone(), t: 0.0 }, &flat_h).unwrap();
        assert!((dpsi - &xi * c(0.0, -1.0)).norm() < 1e-15);

        let cp = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 2, a: 1.7 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 1.0);
        let (dz, dpsi) = eom_rhs(&PhaseState::at_origin(xi.clone()), &cp).unwrap();
        assert!((dz - xi.map(|x| x.conj() * 2.0)).norm() < 1e-15);
        assert!((dpsi - &xi * c(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn specialized_rhs_matches_generic() {
        let specs = [ManifoldSpec::ProjectiveCP { m: 3, a: 1.1 }, ManifoldSpec::HyperbolicCH { m: 3, b: 1.4 }, ManifoldSpec::Flat { m: 3 }];
        let state = PhaseState { z: vec(&[c(0.2, 0.3), c(-0.4, 0.1), c(0.1, -0.5)]), psi: vec(&[c(0.7, -0.2), c(0.1, 0.3), c(-0.3, 0.6)]), t: 0.0 };
        for spec in specs {
            let params = FlowParams::new(spec.clone(), MagneticSpec::new(0.2, vec![1.3], 0.8), 1e-3, 1.0);
            let (dz1, dp1) = eom_rhs(&state, &params).unwrap();
            let (dz2, dp2) = eom_rhs_generic(&state, &params).unwrap();
            assert!((dz1 - dz2).norm() < 1e-13, "{spec:?}");
            assert!((dp1 - dp2).norm() < 1e-13, "{spec:?}");
        }
    }

    #[test]
    fn energy_at_origin() {
        let xi = vec(&[c(0.3, 0.4)]);
        let params = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 1, a: 1.0 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 1.0);
        let e = hamiltonian_integral(&PhaseState::at_origin(xi), &params).unwrap();
        assert!((e - 0.5).abs() < 1e-15);
        let zero = hamiltonian_integral(&PhaseState::at_origin(CVector::zeros(1)), &params).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn short_run_conserves_energy() {
        let params = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 2, a: 1.0 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 2.0);
        let traj = integrate(&PhaseState::at_origin(vec(&[c(0.3, 0.1), c(-0.2, 0.2)])), &params).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        assert!((traj.last().t - 2.0).abs() < 1e-12);
        assert!(traj.energy_drift() < 1e-9, "{}", traj.energy_drift());
    }

    #[test]
    fn final_step_lands_on_t_end() {
        let params = FlowParams { sample_every: 7, ..FlowParams::new(ManifoldSpec::Flat { m: 1 }, MagneticSpec::uniform(1.0, 1.0), 0.3, 1.0) };
        let traj = integrate(&PhaseState::at_origin(vec(&[c(1.0, 0.0)])), &params).unwrap();
        assert_eq!(traj.samples.len(), 2);
        assert_eq!(traj.last().t, 1.0);
    }

    #[test]
    fn richardson_reports_error() {
        let params = FlowParams {
            method: Method::Rk4Richardson,
            ..FlowParams::new(ManifoldSpec::HyperbolicCH { m: 1, b: 1.0 }, MagneticSpec::uniform(4.0, 1.0), 1e-2, 1.0)
        };
        let traj = integrate(&PhaseState::at_origin(vec(&[c(0.5, 0.0)])), &params).unwrap();
        let e = traj.richardson_error.unwrap();
        assert!(e > 0.0 && e < 1e-9, "{e}");
    }

    #[test]
    fn boundary_guard_on_classical_run() {
        let params = FlowParams::new(ManifoldSpec::HyperbolicCH { m: 1, b: 1.0 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 20.0);
        let traj = integrate(&PhaseState::at_origin(vec(&[c(1.0, 0.0)])), &params).unwrap();
        assert_eq!(traj.termination, Termination::BoundaryGuard);
        let r = traj.last().z.norm();
        assert!((0.999..1.0).contains(&r), "{r}");
    }

    #[test]
    fn pole_of_chart_on_cp_geodesic() {
        // q = 0 geodesic on CP¹ reaches z = ∞ at t* = aπ/(4|ξ|)
        let params = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 1, a: 1.0 }, MagneticSpec::none(), 1e-4, 2.0);
        let traj = integrate(&PhaseState::at_origin(vec(&[c(1.0, 0.0)])), &params).unwrap();
        assert_eq!(traj.termination, Termination::PoleOfChart);
        assert!(traj.last().t < std::f64::consts::PI / 4.0);
    }

    #[test]
    fn invalid_params() {
        let mut params = FlowParams::new(ManifoldSpec::Flat { m: 1 }, MagneticSpec::none(), 0.0, 1.0);
        assert!(integrate(&PhaseState::at_origin(vec(&[c(1.0, 0.0)])), &params).is_err());
        params.dt = 0.1;
        params.stop_radius = 1.0;
        assert!(integrate(&PhaseState::at_origin(vec(&[c(1.0, 0.0)])), &params).is_err());
    }

    #[test]
    fn gauge_zero_is_exact() {
        let params = FlowParams::new(ManifoldSpec::ProjectiveCP { m: 1, a: 1.0 }, MagneticSpec::uniform(2.0, 1.0), 1e-3, 1.0);
        let rep = gauge_shift_test(&PhaseState::at_origin(vec(&[c(0.25, 0.0)])), &params, &ZeroGauge).unwrap();
        assert_eq!(rep.max_dz, 0.0);
        assert_eq!(rep.max_dp, 0.0);
        assert!(rep.max_dz_vs_reduced < 1e-12, "{}", rep.max_dz_vs_reduced);
    }

    #[test]
    fn gauge_radial_flat() {
        let params = FlowParams::new(ManifoldSpec::Flat { m: 2 }, MagneticSpec::uniform(1.5, 1.0), 1e-3, 2.0);
        let gauge = QuadraticGauge::radial(2, 0.1);
        let rep = gauge_shift_test(&PhaseState::at_origin(vec(&[c(0.3, 0.1), c(-0.2, 0.5)])), &params, &gauge).unwrap();
        assert!(rep.max_dz < 1e-8, "{rep:?}");
        assert!(rep.max_dp > 1e-3, "{rep:?}");
    }
}
