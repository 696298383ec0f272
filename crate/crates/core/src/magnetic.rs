//! Closed magnetic 2-forms `F = κ·Ric + λ·g` and their potentials.
//!
//! On an Einstein block `Ric = Λ g`, so `F = H g` with `H = κΛ + λ` and
//! the endomorphism `F g⁻¹` is `H·I`. Dynamical code consumes `H`
//! directly; the potential `𝒜_μ = −(i/2)∂_μ N`, `N = λK − κh`, is kept
//! for gauge checks and the canonical-variable integrator.

use crate::error::{invalid, Result};
use crate::geometry::{self, check_domain, ChartPoint, ManifoldSpec};
use crate::{fd, CMatrix, CVector, C64};

/// Magnetic field parameters: `κ`, one `λ_j` per block, and the coupling `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticSpec {
    pub kappa: f64,
    /// One entry per geometry block, or a single entry broadcast to all.
    pub lambdas: Vec<f64>,
    pub q: f64,
}

impl MagneticSpec {
    pub fn new(kappa: f64, lambdas: Vec<f64>, q: f64) -> Self {
        Self { kappa, lambdas, q }
    }

    /// `κ = 0`, `λ = H` on every block.
    pub fn uniform(h: f64, q: f64) -> Self {
        Self { kappa: 0.0, lambdas: vec![h], q }
    }

    /// Pure geodesic flow.
    pub fn none() -> Self {
        Self::uniform(0.0, 0.0)
    }

    fn lambda_for(&self, block: usize, n_blocks: usize) -> Result<f64> {
        match self.lambdas.len() {
            1 => Ok(self.lambdas[0]),
            n if n == n_blocks => Ok(self.lambdas[block]),
            n => Err(invalid(format!("expected 1 or {n_blocks} lambda values, got {n}"))),
        }
    }

    /// `H_j = κΛ_j + λ_j` for each block of `spec`.
    pub fn derived_h(&self, spec: &ManifoldSpec) -> Result<Vec<f64>> {
        let blocks = spec.blocks();
        blocks.iter().enumerate().map(|(j, b)| Ok(self.kappa * b.einstein_constant() + self.lambda_for(j, blocks.len())?)).collect()
    }

    /// `H` for each coordinate.
    pub fn coordinate_h(&self, spec: &ManifoldSpec) -> Result<Vec<f64>> {
        let hs = self.derived_h(spec)?;
        let mut out = vec![0.0; spec.dim()];
        for (b, h) in spec.blocks().iter().zip(hs) {
            for i in b.range() {
                out[i] = h;
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() || !self.q.is_finite() || self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(invalid("magnetic parameters must be finite"));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("at least one lambda value is required"));
        }
        Ok(())
    }
}

/// `F_{μν̄} = κ R_{μν̄} + λ g_{μν̄}`, with `R` contracted from the Riemann tensor.
pub fn field_strength(mag: &MagneticSpec, spec: &ManifoldSpec, z: &ChartPoint) -> Result<CMatrix> {
    mag.validate()?;
    let g = geometry::metric(spec, z)?.g;
    let ric = geometry::curvature(spec, z)?.ricci;
    let blocks = spec.blocks();
    let mut f = CMatrix::zeros(spec.dim(), spec.dim());
    for (j, b) in blocks.iter().enumerate() {
        let lam = mag.lambda_for(j, blocks.len())?;
        for mu in b.range() {
            for nu in b.range() {
                f[(mu, nu)] = ric[(mu, nu)] * mag.kappa + g[(mu, nu)] * lam;
            }
        }
    }
    Ok(f)
}

/// `H_μ{}^ν = F_{μᾱ} g^{ᾱν}`; proportional to the identity on Einstein blocks.
pub fn mixed_endomorphism(mag: &MagneticSpec, spec: &ManifoldSpec, z: &ChartPoint) -> Result<CMatrix> {
    let f = field_strength(mag, spec, z)?;
    let g_inv = geometry::metric(spec, z)?.g_inv;
    Ok(f * g_inv)
}

/// Radial derivatives `(n', n'')` of `N = λK − κh` on one block.
fn radial_n(kappa: f64, lam: f64, c: f64, dim: usize, rho: f64) -> (f64, f64) {
    let f = 1.0 + c * rho;
    let d1 = dim as f64 + 1.0;
    let k1 = 1.0 / (2.0 * f);
    let k2 = -c / (2.0 * f * f);
    let h1 = -d1 * c / f;
    let h2 = d1 * c * c / (f * f);
    (lam * k1 - kappa * h1, lam * k2 - kappa * h2)
}

/// Real potential `N = λK − κh`.
pub fn potential_function(mag: &MagneticSpec, spec: &ManifoldSpec, z: &ChartPoint) -> Result<f64> {
    mag.validate()?;
    check_domain(spec, &z.z)?;
    let blocks = spec.blocks();
    let mut n = 0.0;
    for (j, b) in blocks.iter().enumerate() {
        let lam = mag.lambda_for(j, blocks.len())?;
        let rho = b.rho(&z.z);
        let k = if b.c == 0.0 { 0.5 * rho } else { (b.c * rho).ln_1p() / (2.0 * b.c) };
        let d = b.dim as f64;
        let h = -d * std::f64::consts::LN_2 - (d + 1.0) * (b.c * rho).ln_1p();
        n += lam * k - mag.kappa * h;
    }
    Ok(n)
}

/// Gauge potential `(𝒜_μ, 𝒜_μ̄)` with `𝒜_μ = −(i/2)∂_μN` and `𝒜_μ̄ = conj(𝒜_μ)`.
pub fn potential(mag: &MagneticSpec, spec: &ManifoldSpec, z: &ChartPoint) -> Result<(CVector, CVector)> {
    let jet = potential_jet(mag, spec, z)?;
    let bar = jet.a.map(|x| x.conj());
    Ok((jet.a, bar))
}

/// The potential together with its holomorphic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialJet {
    /// `𝒜_μ`
    pub a: CVector,
    /// `∂_μ 𝒜_ν`, symmetric
    pub d_a: CMatrix,
    /// `∂_μ 𝒜_ν̄ = (i/2) F_{μν̄}`, entry `(μ, ν)`
    pub d_abar: CMatrix,
}

pub fn potential_jet(mag: &MagneticSpec, spec: &ManifoldSpec, z: &ChartPoint) -> Result<PotentialJet> {
    mag.validate()?;
    check_domain(spec, &z.z)?;
    let m = spec.dim();
    let half_i = C64::new(0.0, 0.5);
    let blocks = spec.blocks();
    let mut a = CVector::zeros(m);
    let mut d_a = CMatrix::zeros(m, m);
    let mut d_abar = CMatrix::zeros(m, m);
    for (j, b) in blocks.iter().enumerate() {
        let lam = mag.lambda_for(j, blocks.len())?;
        let (n1, n2) = radial_n(mag.kappa, lam, b.c, b.dim, b.rho(&z.z));
        for mu in b.range() {
            let zb = z.z[mu].conj();
            a[mu] = -half_i * zb * n1;
            for nu in b.range() {
                d_a[(mu, nu)] = -half_i * zb * z.z[nu].conj() * n2;
                let delta = if mu == nu { n1 } else { 0.0 };
                let n_mix = zb * z.z[nu] * n2 + delta;
                d_abar[(mu, nu)] = half_i * n_mix;
            }
        }
    }
    Ok(PotentialJet { a, d_a, d_abar })
}

/// A smooth real gauge function `f` on the chart, described by its
/// Wirtinger derivatives.
pub trait GaugeFunction: Sync {
    /// `∂_μ f`
    fn gradient(&self, z: &CVector) -> CVector;
    /// `∂_μ ∂_ν f`
    fn holomorphic_hessian(&self, z: &CVector) -> CMatrix;
    /// `∂_μ ∂_ν̄ f`, entry `(μ, ν)`
    fn mixed_hessian(&self, z: &CVector) -> CMatrix;
}

/// `f = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroGauge;

impl GaugeFunction for ZeroGauge {
    fn gradient(&self, z: &CVector) -> CVector {
        CVector::zeros(z.len())
    }
    fn holomorphic_hessian(&self, z: &CVector) -> CMatrix {
        CMatrix::zeros(z.len(), z.len())
    }
    fn mixed_hessian(&self, z: &CVector) -> CMatrix {
        CMatrix::zeros(z.len(), z.len())
    }
}

/// `f = Re(zᵀ S z) + z† P z` with `S` complex symmetric and `P` Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGauge {
    pub s: CMatrix,
    pub p: CMatrix,
}

impl QuadraticGauge {
    /// `f = c·ρ`.
    pub fn radial(m: usize, c: f64) -> Self {
        Self { s: CMatrix::zeros(m, m), p: CMatrix::identity(m, m) * C64::new(c, 0.0) }
    }

    /// Symmetrize `s` and Hermitize `p`.
    pub fn new(s: CMatrix, p: CMatrix) -> Self {
        let s = (&s + s.transpose()) * C64::new(0.5, 0.0);
        let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
        Self { s, p }
    }

    pub fn value(&self, z: &CVector) -> f64 {
        let zt_s_z = (z.transpose() * &self.s * z)[(0, 0)];
        let zh_p_z = (z.adjoint() * &self.p * z)[(0, 0)];
        zt_s_z.re + zh_p_z.re
    }
}

impl GaugeFunction for QuadraticGauge {
    fn gradient(&self, z: &CVector) -> CVector {
        let zb = z.map(|x| x.conj());
        &self.s * z + self.p.transpose() * zb
    }
    fn holomorphic_hessian(&self, _z: &CVector) -> CMatrix {
        self.s.clone()
    }
    fn mixed_hessian(&self, _z: &CVector) -> CMatrix {
        self.p.transpose()
    }
}

/// Gauge function given as a closure; derivatives by central differences.
pub struct FnGauge<F> {
    pub f: F,
    pub h: f64,
}

impl<F> FnGauge<F>
where
    F: Fn(&CVector) -> f64 + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f, h: 1e-4 }
    }
}

impl<F> GaugeFunction for FnGauge<F>
where
    F: Fn(&CVector) -> f64 + Sync,
{
    fn gradient(&self, z: &CVector) -> CVector {
        let fc = |w: &CVector| C64::new((self.f)(w), 0.0);
        fd::gradient_holo(&fc, z, self.h)
    }
    fn holomorphic_hessian(&self, z: &CVector) -> CMatrix {
        fd::holomorphic_hessian(&self.f, z, self.h)
    }
    fn mixed_hessian(&self, z: &CVector) -> CMatrix {
        fd::mixed_hessian(&self.f, z, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn field_strength_examples() {
        let flat = ManifoldSpec::Flat { m: 2 };
        let f = field_strength(&MagneticSpec::uniform(3.0, 1.0), &flat, &ChartPoint::origin(2)).unwrap();
        assert!(max_abs(&(f - CMatrix::identity(2, 2) * c(1.5, 0.0))) < 1e-15);

        let cp = ManifoldSpec::ProjectiveCP { m: 1, a: 1.0 };
        let z = ChartPoint::from_slice(&[c(0.4, -0.3)]);
        let mag = MagneticSpec::new(1.0, vec![0.0], 1.0);
        assert_eq!(mag.derived_h(&cp).unwrap(), vec![4.0]);
        let g = geometry::metric(&cp, &z).unwrap().g;
        let f = field_strength(&mag, &cp, &z).unwrap();
        assert!(max_abs(&(f - g * c(4.0, 0.0))) < 1e-14);

        let cancel = MagneticSpec::new(1.0, vec![-4.0], 1.0);
        assert!(max_abs(&field_strength(&cancel, &cp, &z).unwrap()) < 1e-14);
    }

    #[test]
    fn einstein_parallelism() {
        let spec = ManifoldSpec::HyperbolicCH { m: 3, b: 1.2 };
        let mag = MagneticSpec::new(0.3, vec![1.7], 1.0);
        let h = mag.derived_h(&spec).unwrap()[0];
        let z = ChartPoint::from_slice(&[c(0.2, 0.3), c(-0.4, 0.1), c(0.5, -0.2)]);
        let e = mixed_endomorphism(&mag, &spec, &z).unwrap();
        assert!(max_abs(&(e - CMatrix::identity(3, 3) * c(h, 0.0))) < 1e-10);
    }

    #[test]
    fn potential_examples() {
        let spec = ManifoldSpec::ProjectiveCP { m: 2, a: 1.0 };
        let (a, abar) = potential(&MagneticSpec::new(0.5, vec![2.0], 1.0), &spec, &ChartPoint::origin(2)).unwrap();
        assert_eq!(a.norm(), 0.0);
        assert_eq!(abar.norm(), 0.0);

        let h0 = 1.7;
        let flat = ManifoldSpec::Flat { m: 2 };
        let z = ChartPoint::from_slice(&[c(0.3, -0.2), c(1.0, 0.5)]);
        let (a, _) = potential(&MagneticSpec::uniform(h0, 1.0), &flat, &z).unwrap();
        for mu in 0..2 {
            let expected = c(0.0, -0.25) * h0 * z.z[mu].conj();
            assert!((a[mu] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn potential_reproduces_field_by_fd() {
        let spec = ManifoldSpec::HyperbolicCH { m: 2, b: 1.0 };
        let mag = MagneticSpec::new(0.4, vec![1.3], 1.0);
        let z = ChartPoint::from_slice(&[c(0.2, -0.1), c(0.3, 0.25)]);
        let n = |w: &CVector| potential_function(&mag, &spec, &ChartPoint { z: w.clone() }).unwrap();
        let num = fd::mixed_hessian(&n, &z.z, 1e-4);
        let f = field_strength(&mag, &spec, &z).unwrap();
        assert!(max_abs(&(num - f)) < 1e-6);

        // the jet is the derivative of the potential
        let jet = potential_jet(&mag, &spec, &z).unwrap();
        for mu in 0..2 {
            for nu in 0..2 {
                let a_nu = |w: &CVector| potential(&mag, &spec, &ChartPoint { z: w.clone() }).unwrap().0[nu];
                let abar_nu = |w: &CVector| potential(&mag, &spec, &ChartPoint { z: w.clone() }).unwrap().1[nu];
                assert!((fd::d_holo(&a_nu, &z.z, mu, 1e-5) - jet.d_a[(mu, nu)]).norm() < 1e-8);
                assert!((fd::d_holo(&abar_nu, &z.z, mu, 1e-5) - jet.d_abar[(mu, nu)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn quadratic_gauge_derivatives() {
        let s = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0), c(0.1, -0.3)]);
        let p = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.2, 0.3), c(0.0, 0.0), c(-0.4, 0.0)]);
        let gauge = QuadraticGauge::new(s, p);
        let z = CVector::from_vec(vec![c(0.3, -0.6), c(0.8, 0.2)]);
        let numeric = FnGauge::new(|w: &CVector| gauge.value(w));
        assert!((gauge.gradient(&z) - numeric.gradient(&z)).norm() < 1e-8);
        assert!(max_abs(&(gauge.holomorphic_hessian(&z) - numeric.holomorphic_hessian(&z))) < 1e-6);
        assert!(max_abs(&(gauge.mixed_hessian(&z) - numeric.mixed_hessian(&z))) < 1e-6);
    }
}
