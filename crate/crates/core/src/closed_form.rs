//! Exact trajectories from the origin on `CPᵐ` and `CHᵐ` with an
//! Einstein–Kähler magnetic field `F = H·g`.
//!
//! Every solution has rank-one form `z(t) = s(t)·ξ̄/|ξ|`, `ψ(t) = φ(t)·ξ`,
//! so the module evaluates the complex scalars `(s, φ)` and lifts them.
//! The dimensionless parameter `k = 4|ξ|/(qH·radius)` decides the regime.
//! For `qH < 0` the solution is the complex conjugate of the `|qH|`
//! solution started at `ξ̄`, which amounts to conjugating `s` and `φ`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::geometry::ManifoldSpec;
use crate::magnetic::MagneticSpec;
use crate::{CVector, C64};

/// Default half-width of the critical band around `k = 1`.
pub const EPS_CRIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureSign {
    Positive,
    Negative,
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeParams {
    pub xi: CVector,
    /// `a` for positive curvature, `b` for negative; ignored when flat.
    pub radius: f64,
    pub q: f64,
    pub h: f64,
    pub sign: CurvatureSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Quantum,
    Critical,
    Classical,
    GeodesicLimit,
    SchrodingerLimit,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Self::Quantum => "Quantum",
            Self::Critical => "Critical",
            Self::Classical => "Classical",
            Self::GeodesicLimit => "GeodesicLimit",
            Self::SchrodingerLimit => "SchrodingerLimit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub k: f64,
    pub regime: Regime,
    /// `ω` in the periodic regimes, `μ` in the classical one, `2|ξ|/radius`
    /// for geodesics, `0` at the critical point.
    pub omega_or_mu: f64,
    pub period: Option<f64>,
    pub blowup_time: Option<f64>,
    pub orbit_length: Option<f64>,
}

impl ModeParams {
    pub fn new(xi: CVector, radius: f64, q: f64, h: f64, sign: CurvatureSign) -> Self {
        Self { xi, radius, q, h, sign }
    }

    /// Single complex amplitude.
    pub fn scalar(xi: C64, radius: f64, q: f64, h: f64, sign: CurvatureSign) -> Self {
        Self::new(CVector::from_element(1, xi), radius, q, h, sign)
    }

    /// Parameters for a flow on a single-block space with the field `mag`.
    pub fn from_flow(spec: &ManifoldSpec, mag: &MagneticSpec, xi: CVector) -> Result<Self> {
        spec.validate()?;
        let h = mag.derived_h(spec)?[0];
        let (radius, sign) = match spec {
            ManifoldSpec::ProjectiveCP { a, .. } => (*a, CurvatureSign::Positive),
            ManifoldSpec::HyperbolicCH { b, .. } => (*b, CurvatureSign::Negative),
            ManifoldSpec::Flat { .. } => (f64::INFINITY, CurvatureSign::Flat),
            ManifoldSpec::Product2D { .. } => return Err(Error::WrongKind("closed forms need CP^m, CH^m or flat space")),
        };
        if xi.len() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), found: xi.len() });
        }
        Ok(Self::new(xi, radius, mag.q, h, sign))
    }

    /// The manifold these parameters live on, in dimension `xi.len()`.
    pub fn manifold(&self) -> ManifoldSpec {
        let m = self.xi.len();
        match self.sign {
            CurvatureSign::Positive => ManifoldSpec::ProjectiveCP { m, a: self.radius },
            CurvatureSign::Negative => ManifoldSpec::HyperbolicCH { m, b: self.radius },
            CurvatureSign::Flat => ManifoldSpec::Flat { m },
        }
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi.norm()
    }

    pub fn qh(&self) -> f64 {
        self.q * self.h
    }

    /// `k = 4|ξ|/(|qH|·radius)`; zero in flat space, infinite for `qH = 0`.
    pub fn k(&self) -> f64 {
        if self.sign == CurvatureSign::Flat {
            return 0.0;
        }
        let x = self.xi_norm();
        if x == 0.0 {
            return 0.0;
        }
        4.0 * x / (self.qh().abs() * self.radius)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi.is_empty() {
            return Err(invalid("xi must have at least one component"));
        }
        if self.xi.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(invalid("xi must be finite"));
        }
        if !self.q.is_finite() || !self.h.is_finite() {
            return Err(invalid("q and H must be finite"));
        }
        if self.sign != CurvatureSign::Flat && !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    fn direction(&self) -> CVector {
        let x = self.xi_norm();
        self.xi.map(|v| v.conj() / x)
    }

    fn lift(&self, s: C64, phi: C64) -> (CVector, CVector) {
        if self.xi_norm() == 0.0 {
            return (CVector::zeros(self.xi.len()), self.xi.clone());
        }
        (self.direction() * s, &self.xi * phi)
    }
}

/// Classify the regime with the default critical band.
pub fn classify(params: &ModeParams) -> Result<RegimeReport> {
    classify_with(params, EPS_CRIT)
}

pub fn classify_with(params: &ModeParams, eps_crit: f64) -> Result<RegimeReport> {
    params.validate()?;
    let qh = params.qh().abs();
    let xi = params.xi_norm();
    let r = params.radius;
    let none = RegimeReport { k: 0.0, regime: Regime::SchrodingerLimit, omega_or_mu: 0.0, period: None, blowup_time: None, orbit_length: None };

    if qh == 0.0 {
        let rate = if params.sign == CurvatureSign::Flat { 2.0 * xi } else { 2.0 * xi / r };
        let blowup_time = (params.sign == CurvatureSign::Positive && xi > 0.0).then(|| r * PI / (4.0 * xi));
        return Ok(RegimeReport { k: f64::INFINITY, regime: Regime::GeodesicLimit, omega_or_mu: rate, blowup_time, ..none });
    }
    if xi == 0.0 || params.sign == CurvatureSign::Flat {
        let w = qh / 2.0;
        return Ok(RegimeReport { omega_or_mu: w, period: Some(PI / w), ..none });
    }
    let k = params.k();
    let report = match params.sign {
        CurvatureSign::Positive => {
            let w = 0.5 * qh * (1.0 + k * k).sqrt();
            RegimeReport {
                k,
                regime: Regime::Quantum,
                omega_or_mu: w,
                period: Some(PI / w),
                blowup_time: None,
                orbit_length: Some(r * PI * k / (1.0 + k * k).sqrt()),
            }
        }
        CurvatureSign::Negative if (k - 1.0).abs() <= eps_crit => RegimeReport { k, regime: Regime::Critical, ..none },
        CurvatureSign::Negative if k < 1.0 => {
            let w = 0.5 * qh * (1.0 - k * k).sqrt();
            RegimeReport { k, regime: Regime::Quantum, omega_or_mu: w, period: Some(PI / w), ..none }
        }
        CurvatureSign::Negative => RegimeReport { k, regime: Regime::Classical, omega_or_mu: 0.5 * qh * (k * k - 1.0).sqrt(), ..none },
        CurvatureSign::Flat => unreachable!(),
    };
    Ok(report)
}

/// Conjugate the scalars when `qH < 0`.
fn orient(params: &ModeParams, (s, phi): (C64, C64)) -> (CVector, CVector) {
    if params.qh() < 0.0 {
        params.lift(s.conj(), phi.conj())
    } else {
        params.lift(s, phi)
    }
}

fn require_field(params: &ModeParams) -> Result<f64> {
    params.validate()?;
    let qh = params.qh().abs();
    if qh == 0.0 {
        return Err(Error::Degenerate("the magnetic coupling qH vanishes"));
    }
    Ok(qh)
}

fn cp_scalars(k: f64, qh: f64, a: f64, t: f64) -> (C64, C64) {
    let root = (1.0 + k * k).sqrt();
    let w = 0.5 * qh * root;
    let (s2, c2) = (2.0 * w * t).sin_cos();
    let s = C64::new(root * s2, 1.0 - c2) * (a * k / (2.0 + k * k + k * k * c2));
    let (sn, cs) = (w * t).sin_cos();
    let f = C64::new(cs, -sn / root);
    (s, f * f)
}

/// The `CPᵐ` solution.
pub fn cp_solution(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    if params.sign != CurvatureSign::Positive {
        return Err(Error::WrongKind("cp_solution needs positive curvature"));
    }
    let qh = require_field(params)?;
    Ok(orient(params, cp_scalars(params.k(), qh, params.radius, t)))
}

fn ch_quantum_scalars(k: f64, qh: f64, b: f64, t: f64) -> (C64, C64) {
    let root = (1.0 - k * k).sqrt();
    let w = 0.5 * qh * root;
    let (s2, c2) = (2.0 * w * t).sin_cos();
    let s = C64::new(root * s2, 1.0 - c2) * (b * k / (2.0 - k * k - k * k * c2));
    let (sn, cs) = (w * t).sin_cos();
    let f = C64::new(cs, -sn / root);
    (s, f * f)
}

fn ch_classical_scalars(k: f64, qh: f64, b: f64, t: f64) -> (C64, C64) {
    let root = (k * k - 1.0).sqrt();
    let mu = 0.5 * qh * root;
    let x = 2.0 * mu * t;
    let sech = 1.0 / x.cosh();
    let s = C64::new(root * x.tanh(), 1.0 - sech) * (b * k / (k * k + (k * k - 2.0) * sech));
    let f = C64::new((mu * t).cosh(), -(mu * t).sinh() / root);
    (s, f * f)
}

fn critical_scalars(qh: f64, b: f64, t: f64) -> (C64, C64) {
    let s = 0.5 * qh * t;
    let f = C64::new(1.0, -s);
    (C64::new(s, s * s) * (b / (1.0 + s * s)), f * f)
}

/// The `CHᵐ` solution in the quantum (`k < 1`) or classical (`k > 1`) regime.
pub fn ch_solution(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    ch_solution_with(params, t, EPS_CRIT)
}

pub fn ch_solution_with(params: &ModeParams, t: f64, eps_crit: f64) -> Result<(CVector, CVector)> {
    if params.sign != CurvatureSign::Negative {
        return Err(Error::WrongKind("ch_solution needs negative curvature"));
    }
    let qh = require_field(params)?;
    let k = params.k();
    if (k - 1.0).abs() <= eps_crit {
        return Err(Error::CriticalRegime { k });
    }
    let sc = if k < 1.0 { ch_quantum_scalars(k, qh, params.radius, t) } else { ch_classical_scalars(k, qh, params.radius, t) };
    Ok(orient(params, sc))
}

/// The `k = 1` solution on `CHᵐ`: with `σ = qHt/2`,
/// `z = b(σ + iσ²)/(1 + σ²)·ξ̄/|ξ|` and `ψ = (1 − iσ)²ξ`.
/// The value of `k` carried by `params` is not consulted.
pub fn critical_solution(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    if params.sign != CurvatureSign::Negative {
        return Err(Error::WrongKind("critical_solution needs negative curvature"));
    }
    let qh = require_field(params)?;
    Ok(orient(params, critical_scalars(qh, params.radius, t)))
}

/// The `k → 0` limit, exact in flat space:
/// `z = (4/qH) sin(qHt/2) e^{iqHt/2} ξ̄`, `ψ = e^{−iqHt} ξ`.
pub fn limit_schrodinger(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    require_field(params)?;
    let qh = params.qh();
    let z_scale = C64::from_polar(4.0 / qh * (0.5 * qh * t).sin(), 0.5 * qh * t);
    let z = params.xi.map(|x| x.conj() * z_scale);
    let psi = &params.xi * C64::from_polar(1.0, -qh * t);
    Ok((z, psi))
}

/// The `qH → 0` limit: geodesics `a·tan θ`, `ψ = cos²θ·ξ` on `CPᵐ` and
/// `b·tanh θ`, `ψ = cosh²θ·ξ` on `CHᵐ`, with `θ = 2|ξ|t/radius`.
pub fn limit_geodesic(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    params.validate()?;
    let x = params.xi_norm();
    if x == 0.0 {
        return Ok((CVector::zeros(params.xi.len()), params.xi.clone()));
    }
    let (s, phi) = match params.sign {
        CurvatureSign::Flat => (2.0 * x * t, 1.0),
        CurvatureSign::Positive => {
            let th = 2.0 * x * t / params.radius;
            if th.abs() >= PI / 2.0 - 1e-12 {
                return Err(Error::PoleOfChart { t });
            }
            (params.radius * th.tan(), th.cos().powi(2))
        }
        CurvatureSign::Negative => {
            let th = 2.0 * x * t / params.radius;
            (params.radius * th.tanh(), th.cosh().powi(2))
        }
    };
    Ok(params.lift(C64::new(s, 0.0), C64::new(phi, 0.0)))
}

/// Polar form `ζ = r·e^{iχ}` of the `CPᵐ` solution, `z = a·ζ·ξ̄/|ξ|`:
/// `r = k sin ωt / √(1 + k² cos² ωt)` and `tan χ = tan ωt / √(1 + k²)`,
/// with `χ` continued across half periods. `r` is signed.
pub fn polar_reduction(params: &ModeParams, t: f64) -> Result<(f64, f64)> {
    if params.sign != CurvatureSign::Positive {
        return Err(Error::WrongKind("polar_reduction needs positive curvature"));
    }
    let qh = require_field(params)?;
    let k = params.k();
    let root = (1.0 + k * k).sqrt();
    let wt = 0.5 * qh * root * t;
    let (sn, cs) = wt.sin_cos();
    let r = k * sn / (1.0 + k * k * cs * cs).sqrt();
    let principal = sn.atan2(root * cs);
    let chi = principal + 2.0 * PI * ((wt - principal) / (2.0 * PI)).round();
    if params.qh() < 0.0 {
        Ok((r, -chi))
    } else {
        Ok((r, chi))
    }
}

/// `b² − |z(t)|²` on `CHᵐ`, evaluated without cancellation so that it
/// stays accurate as a classical orbit approaches the boundary.
pub fn boundary_gap(params: &ModeParams, t: f64) -> Result<f64> {
    if params.sign != CurvatureSign::Negative {
        return Err(Error::WrongKind("boundary_gap needs negative curvature"));
    }
    let qh = require_field(params)?;
    let b2 = params.radius * params.radius;
    if params.xi_norm() == 0.0 {
        return Ok(b2);
    }
    let k = params.k();
    let gap = if (k - 1.0).abs() <= EPS_CRIT {
        let s = 0.5 * qh * t;
        b2 / (1.0 + s * s)
    } else if k < 1.0 {
        let c = (0.5 * qh * (1.0 - k * k).sqrt() * t).cos();
        b2 * (1.0 - k * k) / (1.0 - k * k * c * c)
    } else {
        let ch = (0.5 * qh * (k * k - 1.0).sqrt() * t).cosh();
        b2 * (k * k - 1.0) / (k * k * ch * ch - 1.0)
    };
    Ok(gap)
}

/// A mode with its regime fixed, evaluated by the matching closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub params: ModeParams,
    pub report: RegimeReport,
}

impl ModeSolution {
    pub fn new(params: ModeParams) -> Result<Self> {
        let report = classify(&params)?;
        Ok(Self { params, report })
    }

    pub fn regime(&self) -> Regime {
        self.report.regime
    }

    pub fn eval(&self, t: f64) -> Result<(CVector, CVector)> {
        match self.report.regime {
            Regime::GeodesicLimit => limit_geodesic(&self.params, t),
            Regime::SchrodingerLimit => limit_schrodinger(&self.params, t),
            Regime::Critical => critical_solution(&self.params, t),
            Regime::Quantum | Regime::Classical => match self.params.sign {
                CurvatureSign::Positive => cp_solution(&self.params, t),
                _ => ch_solution(&self.params, t),
            },
        }
    }
}

/// Evaluate whichever closed form matches the regime of `params`.
pub fn solve(params: &ModeParams, t: f64) -> Result<(CVector, CVector)> {
    ModeSolution::new(params.clone())?.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use CurvatureSign::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_diff(a: &CVector, b: &CVector) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn classify_examples() {
        let rep = classify(&ModeParams::scalar(c(0.0, 0.0), 1.0, 1.0, 2.0, Positive)).unwrap();
        assert_eq!(rep.regime, Regime::SchrodingerLimit);
        assert!((rep.omega_or_mu - 1.0).abs() < 1e-15);
        assert!((rep.period.unwrap() - PI).abs() < 1e-15);

        // k = 4|ξ|/(qHb) = 2 with b = 1, qH = 2
        let rep = classify(&ModeParams::scalar(c(1.0, 0.0), 1.0, 1.0, 2.0, Negative)).unwrap();
        assert_eq!(rep.regime, Regime::Classical);
        assert!((rep.k - 2.0).abs() < 1e-15);
        assert!((rep.omega_or_mu - 3f64.sqrt()).abs() < 1e-15);

        let rep = classify(&ModeParams::scalar(c(1.0, 0.0), PI, 0.0, 5.0, Positive)).unwrap();
        assert_eq!(rep.regime, Regime::GeodesicLimit);
        assert!((rep.blowup_time.unwrap() - PI * PI / 4.0).abs() < 1e-14);

        let rep = classify(&ModeParams::scalar(c(0.25, 0.0), 1.0, 1.0, 2.0, Positive)).unwrap();
        assert!((rep.omega_or_mu - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((rep.orbit_length.unwrap() - PI * 0.5 / 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn critical_band() {
        let p = ModeParams::scalar(c(0.5, 0.0), 1.0, 1.0, 2.0, Negative);
        assert_eq!(classify(&p).unwrap().regime, Regime::Critical);
        assert!(matches!(ch_solution(&p, 1.0), Err(Error::CriticalRegime { .. })));
        assert!(critical_solution(&p, 1.0).is_ok());
        let near = ModeParams::scalar(c(0.5 + 1e-6, 0.0), 1.0, 1.0, 2.0, Negative);
        assert_eq!(classify(&near).unwrap().regime, Regime::Classical);
    }

    #[test]
    fn initial_conditions_and_period() {
        let xi = CVector::from_vec(vec![c(0.1, 0.2), c(-0.1, 0.05)]);
        let p = ModeParams::new(xi.clone(), 1.3, 1.0, 2.0, Positive);
        let (z, psi) = cp_solution(&p, 0.0).unwrap();
        assert_eq!(z.norm(), 0.0);
        assert!(max_diff(&psi, &xi) < 1e-16);
        let t_per = classify(&p).unwrap().period.unwrap();
        let (z, psi) = cp_solution(&p, t_per).unwrap();
        assert!(z.norm() < 1e-14 && max_diff(&psi, &xi) < 1e-14);
        let (z1, psi1) = cp_solution(&p, 0.37).unwrap();
        let (z2, psi2) = cp_solution(&p, 0.37 + t_per).unwrap();
        assert!(max_diff(&z1, &z2) < 1e-10 && max_diff(&psi1, &psi2) < 1e-10);
    }

    #[test]
    fn cp_norm_identity() {
        let xi = CVector::from_vec(vec![c(0.3, -0.4), c(0.2, 0.1)]);
        let a = 1.5;
        let p = ModeParams::new(xi.clone(), a, 0.7, 3.0, Positive);
        let target = 4.0 * xi.norm_squared();
        for i in 0..50 {
            let t = 0.13 * i as f64;
            let (z, psi) = cp_solution(&p, t).unwrap();
            let zp: C64 = z.iter().zip(psi.iter()).map(|(a, b)| a * b).sum();
            let n = 4.0 / a.powi(4) * (a * a + z.norm_squared()) * (a * a * psi.norm_squared() + zp.norm_sqr());
            assert!((n - target).abs() / target < 1e-10, "{t}: {n}");
        }
    }

    #[test]
    fn classical_asymptote() {
        let p = ModeParams::scalar(c(1.0, 0.0), 1.0, 1.0, 2.0, Negative);
        let (z, _) = ch_solution(&p, 30.0).unwrap();
        let z_inf = c(3f64.sqrt(), 1.0) / 2.0;
        assert!((z[0] - z_inf).norm() < 1e-12);
        assert!((z_inf.norm() - 1.0).abs() < 1e-15);
        let gap = boundary_gap(&p, 5.0).unwrap();
        let (z, _) = ch_solution(&p, 5.0).unwrap();
        assert!((gap - (1.0 - z[0].norm_sqr())).abs() < 1e-14);
        // |ψ| ~ k²/(4(k²−1)) e^{2μt}|ξ|
        let mu = 3f64.sqrt();
        let t = 8.0;
        let (_, psi) = ch_solution(&p, t).unwrap();
        let predicted = 4.0 / 12.0 * (2.0 * mu * t).exp();
        assert!((psi[0].norm() / predicted - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_gap_matches_direct_value() {
        for (x, t) in [(0.2, 1.3), (0.5, 2.0), (0.9, 0.4)] {
            let p = ModeParams::scalar(c(x, 0.0), 1.0, 1.0, 2.0, Negative);
            let (z, _) = solve(&p, t).unwrap();
            let gap = boundary_gap(&p, t).unwrap();
            assert!((gap - (1.0 - z[0].norm_sqr())).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn regime_continuity_across_k_one() {
        let d = 1e-3;
        let below = ModeParams::scalar(c(0.5 * (1.0 - d), 0.0), 1.0, 1.0, 2.0, Negative);
        let above = ModeParams::scalar(c(0.5 * (1.0 + d), 0.0), 1.0, 1.0, 2.0, Negative);
        let crit = ModeParams::scalar(c(0.5, 0.0), 1.0, 1.0, 2.0, Negative);
        for i in 0..=10 {
            let t = 0.1 * i as f64;
            let (zb, pb) = ch_solution(&below, t).unwrap();
            let (za, pa) = ch_solution(&above, t).unwrap();
            let (zc, pc) = critical_solution(&crit, t).unwrap();
            assert!(max_diff(&zb, &zc) < 5.0 * d && max_diff(&za, &zc) < 5.0 * d, "{t}");
            assert!(max_diff(&pb, &pc) < 5.0 * d && max_diff(&pa, &pc) < 5.0 * d, "{t}");
        }
    }

    #[test]
    fn schrodinger_limit() {
        let xi = CVector::from_vec(vec![c(1e-4 / 4.0, 0.0)]);
        let p = ModeParams::new(xi.clone(), 1.0, 1.0, 1.0, Positive);
        assert!((p.k() - 1e-4).abs() < 1e-18);
        let period = 2.0 * PI;
        let (_, psi) = limit_schrodinger(&p, period).unwrap();
        assert!(max_diff(&psi, &xi) < 1e-15);
        for i in 0..=100 {
            let t = period * i as f64 / 100.0;
            let (z1, psi1) = cp_solution(&p, t).unwrap();
            let (z2, psi2) = limit_schrodinger(&p, t).unwrap();
            assert!((psi2[0].norm() - xi[0].norm()).abs() < 1e-18);
            assert!(max_diff(&psi1, &psi2) < 1e-6 * xi.norm() && max_diff(&z1, &z2) < 1e-6);
        }
        assert!(limit_schrodinger(&ModeParams::scalar(c(1.0, 0.0), 1.0, 0.0, 1.0, Flat), 1.0).is_err());
    }

    #[test]
    fn geodesic_limit() {
        let p = ModeParams::scalar(c(0.6, 0.8), 2.0, 0.0, 1.0, Positive);
        let t_star = classify(&p).unwrap().blowup_time.unwrap();
        assert!((t_star - 2.0 * PI / 4.0).abs() < 1e-15);
        let (z, _) = limit_geodesic(&p, t_star * (1.0 - 1e-8)).unwrap();
        assert!(z.norm() > 1e7);
        assert!(matches!(limit_geodesic(&p, t_star), Err(Error::PoleOfChart { .. })));

        let xi = 0.1;
        let ch = ModeParams::scalar(c(xi, 0.0), 1.0, 1.0, 4.0 * xi / 1000.0, Negative);
        assert!((ch.k() - 1000.0).abs() < 1e-9);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let (z1, psi1) = ch_solution(&ch, t).unwrap();
            let (z2, psi2) = limit_geodesic(&ch, t).unwrap();
            assert!(max_diff(&z1, &z2) < 1e-4 && max_diff(&psi1, &psi2) < 1e-4, "{t}");
        }
    }

    #[test]
    fn polar_form_reproduces_solution() {
        let a = 1.2;
        let p = ModeParams::scalar(c(0.3, 0.4), a, 1.0, 2.0, Positive);
        let dir = c(0.3, -0.4) / 0.5;
        let period = classify(&p).unwrap().period.unwrap();
        let mut prev: Option<f64> = None;
        for i in 0..=400 {
            let t = 2.5 * period * i as f64 / 400.0;
            let (r, chi) = polar_reduction(&p, t).unwrap();
            let (z, _) = cp_solution(&p, t).unwrap();
            let zeta = z[0] / (dir * a);
            assert!((zeta - C64::from_polar(r, chi)).norm() < 1e-12, "{t}");
            if let Some(pc) = prev {
                assert!(chi > pc, "chi must increase continuously");
                assert!(chi - pc < 0.2);
            }
            prev = Some(chi);
        }
        let w = classify(&p).unwrap().omega_or_mu;
        let (r, _) = polar_reduction(&p, PI / w).unwrap();
        assert!(r.abs() < 1e-14);
        let (r, _) = polar_reduction(&p, 0.5 * PI / w).unwrap();
        assert!((r - p.k()).abs() < 1e-14);
    }

    #[test]
    fn polar_derivatives() {
        let a = 1.0;
        let xi = 0.35;
        let qh = 2.0;
        let p = ModeParams::scalar(c(xi, 0.0), a, 1.0, qh, Positive);
        let h = 1e-5;
        let (r1, c1) = polar_reduction(&p, h).unwrap();
        let (r0, c0) = polar_reduction(&p, -h).unwrap();
        assert!(((r1 - r0) / (2.0 * h) - 2.0 * xi / a).abs() < 1e-8);
        assert!(((c1 - c0) / (2.0 * h) - qh / 2.0).abs() < 1e-8);
        for t in [0.3, 1.1, 2.9] {
            let (r, _) = polar_reduction(&p, t).unwrap();
            let (_, ca) = polar_reduction(&p, t + h).unwrap();
            let (_, cb) = polar_reduction(&p, t - h).unwrap();
            assert!(((ca - cb) / (2.0 * h) - 0.5 * qh * (1.0 + r * r)).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_coupling_is_conjugate() {
        let xi = CVector::from_vec(vec![c(0.2, 0.1), c(0.05, -0.3)]);
        let xi_bar = xi.map(|x| x.conj());
        for sign in [Positive, Negative] {
            let neg = ModeParams::new(xi.clone(), 1.0, -1.0, 2.0, sign);
            let pos = ModeParams::new(xi_bar.clone(), 1.0, 1.0, 2.0, sign);
            for t in [0.2, 0.9, 1.7] {
                let (zn, pn) = solve(&neg, t).unwrap();
                let (zp, pp) = solve(&pos, t).unwrap();
                assert!(max_diff(&zn, &zp.map(|x| x.conj())) < 1e-15);
                assert!(max_diff(&pn, &pp.map(|x| x.conj())) < 1e-15);
                let (zs, ps) = limit_schrodinger(&neg, t).unwrap();
                let (zq, pq) = limit_schrodinger(&pos, t).unwrap();
                assert!(max_diff(&zs, &zq.map(|x| x.conj())) < 1e-15);
                assert!(max_diff(&ps, &pq.map(|x| x.conj())) < 1e-15);
            }
        }
    }

    #[test]
    fn zeta_taylor_expansion() {
        let a = 1.0;
        let xi = 0.4;
        let qh = 3.0;
        let p = ModeParams::scalar(c(xi, 0.0), a, 1.0, qh, Positive);
        for t in [1e-2, 5e-3, 2.5e-3] {
            let (z, _) = cp_solution(&p, t).unwrap();
            let series = c(2.0 * xi / a * t, qh * xi / a * t * t);
            assert!((z[0] / a - series).norm() < 5.0 * t.powi(3), "{t}");
        }
    }

    #[test]
    fn rank_one_motion() {
        let xi = CVector::from_vec(vec![c(0.2, 0.1), c(0.05, -0.3), c(0.4, 0.0)]);
        let p = ModeParams::new(xi.clone(), 1.0, 1.0, 2.0, Negative);
        let dir = xi.map(|x| x.conj() / xi.norm());
        let (z, psi) = solve(&p, 1.3).unwrap();
        let s = dir.dotc(&z);
        assert!((z - &dir * s).norm() < 1e-15);
        let ratio = psi[0] / xi[0];
        assert!((psi - &xi * ratio).norm() < 1e-15);
    }
}
