//! Observables as `(1,1)` tensors acting on covectors.
//!
//! An observable is stored as the matrix `A` with `ψ ↦ Aψ`. With the inner
//! product `(φ, ψ) = φ†·g⁻¹·ψ` it is self-adjoint exactly when `g⁻¹A` is
//! Hermitian; at the origin (`g = ½I`) this is ordinary Hermiticity.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::flow::{self, Trajectory};
use crate::geometry::{self, ChartPoint, ManifoldSpec};
use crate::{CMatrix, CVector, C64};

/// Tolerance used by [`expectation`] for the self-adjointness check.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(m: usize) -> Self {
        Self { matrix: CMatrix::identity(m, m) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = CVector::from_iterator(values.len(), values.iter().map(|v| C64::new(*v, 0.0)));
        Self { matrix: CMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max|B − B†| / max|B|` for `B = g⁻¹A`.
pub fn self_adjointness_residual(a: &Observable, g_inv: &CMatrix) -> f64 {
    let b = g_inv * &a.matrix;
    let scale = max_abs(&b);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(&b - b.adjoint())) / scale
}

/// `(φ, ψ) = φ†·g⁻¹·ψ`
pub fn inner(g_inv: &CMatrix, phi: &CVector, psi: &CVector) -> C64 {
    (phi.adjoint() * g_inv * psi)[(0, 0)]
}

/// `⟨A⟩ = (ψ, Aψ)/(ψ, ψ)` with the inverse metric at `z`.
pub fn expectation(a: &Observable, z: &CVector, psi: &CVector, spec: &ManifoldSpec) -> Result<f64> {
    geometry::check_dim(spec, psi.len())?;
    if a.dim() != psi.len() || !a.matrix.is_square() {
        return Err(Error::DimensionMismatch { expected: psi.len(), found: a.dim() });
    }
    let g_inv = geometry::metric(spec, &ChartPoint { z: z.clone() })?.g_inv;
    let norm = inner(&g_inv, psi, psi).re;
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let residual = self_adjointness_residual(a, &g_inv);
    if residual > SELF_ADJOINT_TOL {
        return Err(Error::NotSelfAdjoint { residual });
    }
    Ok(inner(&g_inv, psi, &(&a.matrix * psi)).re / norm)
}

/// Born-rule distribution `(λ, |⟨v_λ, ψ⟩|²/|ψ|²)` at the origin, eigenvalues
/// ascending, with numerically equal eigenvalues merged.
pub fn born_probabilities(a: &Observable, psi: &CVector) -> Result<Vec<(f64, f64)>> {
    let m = &a.matrix;
    if !m.is_square() || m.nrows() != psi.len() {
        return Err(Error::DimensionMismatch { expected: psi.len(), found: m.nrows() });
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let residual = max_abs(&(m - m.adjoint())) / scale;
    if residual > SELF_ADJOINT_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let norm = psi.norm_squared();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut pairs: Vec<(f64, f64)> = (0..psi.len())
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            (eig.eigenvalues[i], v.dotc(psi).norm_sqr() / norm)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (lam, p) in pairs {
        match merged.last_mut() {
            Some(last) if (lam - last.0).abs() <= 1e-10 * scale => last.1 += p,
            _ => merged.push((lam, p)),
        }
    }
    Ok(merged)
}

/// `∂_μ h_μ` for `g_{μμ̄} = e^{h_μ}` on a diagonal metric.
fn dh(spec: &ManifoldSpec, z: &CVector) -> CVector {
    let mut out = CVector::zeros(z.len());
    for b in spec.blocks() {
        for i in b.range() {
            out[i] = -z[i].conj() * (2.0 * b.c) / (1.0 + b.c * z[i].norm_sqr());
        }
    }
    out
}

/// `φ_{μν} = ż^μ ∂_μ h_μ − ż^ν ∂_ν h_ν` at one sample.
fn phi_matrix(spec: &ManifoldSpec, z: &CVector, psi: &CVector) -> Result<CMatrix> {
    let g_inv = geometry::metric(spec, &ChartPoint { z: z.clone() })?.g_inv;
    let v = flow::velocity(&g_inv, psi);
    let d = dh(spec, z);
    let w = v.component_mul(&d);
    Ok(CMatrix::from_fn(z.len(), z.len(), |mu, nu| w[mu] - w[nu]))
}

/// `P_{μν} = exp ∫ φ_{μν} dt` by the trapezoidal rule over the samples.
pub fn transport_factors(traj: &Trajectory, spec: &ManifoldSpec) -> Result<CMatrix> {
    if !spec.is_diagonal() {
        return Err(Error::NonDiagonalMetric);
    }
    let first = &traj.samples[0];
    let m = first.z.len();
    geometry::check_dim(spec, m)?;
    let mut integral = CMatrix::zeros(m, m);
    let mut prev = phi_matrix(spec, &first.z, &first.psi)?;
    for w in traj.samples.windows(2) {
        let cur = phi_matrix(spec, &w[1].z, &w[1].psi)?;
        integral += (&prev + &cur) * C64::new(0.5 * (w[1].t - w[0].t), 0.0);
        prev = cur;
    }
    Ok(integral.map(|x| x.exp()))
}

/// Parallel transport of `a0` from the first to the last sample of `traj`.
pub fn transport(a0: &Observable, traj: &Trajectory, spec: &ManifoldSpec) -> Result<Observable> {
    let p = transport_factors(traj, spec)?;
    if p.nrows() != a0.dim() {
        return Err(Error::DimensionMismatch { expected: p.nrows(), found: a0.dim() });
    }
    Ok(Observable { matrix: a0.matrix.component_mul(&p) })
}
