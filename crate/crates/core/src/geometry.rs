//! Constant-curvature Kähler geometry in the origin chart.
//!
//! Every supported space is a product of *blocks*, each of which is a
//! complex space form of dimension `d` with a signed curvature scale `c`:
//!
//! | space            | blocks                       | `c`       |
//! |------------------|------------------------------|-----------|
//! | `CPᵐ`, radius a  | one block of dimension m     | `1/a²`    |
//! | `CHᵐ`, radius b  | one block of dimension m     | `−1/b²`   |
//! | `Cᵐ`             | one block of dimension m     | `0`       |
//! | `Π M_μ` (2-D)    | one block per factor         | `Λ_μ/4`   |
//!
//! Within a block, with `ρ = |z|²` and `f = 1 + cρ`,
//!
//! ```text
//! K        = log(f) / (2c)               (ρ/2 when c = 0)
//! g_{μν̄}   = [f δ_{μν} − c z̄^μ z^ν] / (2 f²)
//! g^{-1}   = 2 f [δ_{μν} + c z̄^μ z^ν]
//! Γ^β_{μν} = −c (z̄^ν δ^β_μ + z̄^μ δ^β_ν) / f
//! R_{β̄μνᾱ} = 2c (g_{μβ̄} g_{νᾱ} + g_{νβ̄} g_{μᾱ})
//! Ric      = 2(d+1) c · g
//! ```
//!
//! which reduces to the Fubini–Study forms for `c = 1/a²`, their
//! hyperbolic analogues for `c = −1/b²`, and the 2-D metric
//! `1/(2(1 + Λ|z|²/4)²)` for `d = 1`, `c = Λ/4`.
//!
//! Matrices follow one convention throughout: `g[(μ, ν)] = g_{μν̄}` and
//! `g_inv` is its matrix inverse, so the contravariant metric is
//! `g^{μν̄} = g_inv[(ν, μ)]`.

use crate::error::{Error, Result};
use crate::{fd, CMatrix, CVector, C64};
use std::f64::consts::PI;

/// Which constant-curvature Kähler space the chart describes.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldSpec {
    /// Complex projective space `CPᵐ` with the Fubini–Study metric of radius `a`.
    ProjectiveCP { m: usize, a: f64 },
    /// Complex hyperbolic space `CHᵐ` of radius `b` (chart `|z|² < b²`).
    HyperbolicCH { m: usize, b: f64 },
    /// Flat `Cᵐ` with `g = ½ I`.
    Flat { m: usize },
    /// Product of 2-D constant-curvature factors with curvatures `Λ_μ`.
    Product2D { lambdas: Vec<f64> },
}

/// A maximal group of coordinates sharing a single curvature scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: usize,
    pub dim: usize,
    /// Signed curvature scale `c` (see module docs).
    pub c: f64,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.dim
    }

    /// Einstein constant of the block: `Ric = 2(d+1)c · g`.
    pub fn einstein_constant(&self) -> f64 {
        2.0 * (self.dim as f64 + 1.0) * self.c
    }

    /// `|z|²` restricted to the block.
    pub fn rho(&self, z: &CVector) -> f64 {
        self.range().map(|i| z[i].norm_sqr()).sum()
    }

    /// Domain radius `1/√(−c)` for negative blocks.
    pub fn boundary_radius(&self) -> Option<f64> {
        (self.c < 0.0).then(|| (-1.0 / self.c).sqrt())
    }
}

impl ManifoldSpec {
    /// Complex dimension `m`.
    pub fn dim(&self) -> usize {
        match self {
            Self::ProjectiveCP { m, .. } | Self::HyperbolicCH { m, .. } | Self::Flat { m } => *m,
            Self::Product2D { lambdas } => lambdas.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(crate::error::invalid("dimension must be at least 1"));
        }
        match self {
            Self::ProjectiveCP { a: r, .. } | Self::HyperbolicCH { b: r, .. } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(crate::error::invalid(format!("radius must be positive, got {r}")));
                }
            }
            Self::Product2D { lambdas } => {
                if lambdas.iter().any(|l| !l.is_finite()) {
                    return Err(crate::error::invalid("curvatures must be finite"));
                }
            }
            Self::Flat { .. } => {}
        }
        Ok(())
    }

    pub fn blocks(&self) -> Vec<Block> {
        match self {
            Self::ProjectiveCP { m, a } => vec![Block { start: 0, dim: *m, c: 1.0 / (a * a) }],
            Self::HyperbolicCH { m, b } => vec![Block { start: 0, dim: *m, c: -1.0 / (b * b) }],
            Self::Flat { m } => vec![Block { start: 0, dim: *m, c: 0.0 }],
            Self::Product2D { lambdas } => lambdas.iter().enumerate().map(|(i, l)| Block { start: i, dim: 1, c: l / 4.0 }).collect(),
        }
    }

    /// Einstein constant for each coordinate (constant across a block).
    pub fn coordinate_einstein_constants(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for b in self.blocks() {
            for i in b.range() {
                out[i] = b.einstein_constant();
            }
        }
        out
    }

    /// Whether the metric is diagonal at every chart point.
    pub fn is_diagonal(&self) -> bool {
        self.blocks().iter().all(|b| b.dim == 1 || b.c == 0.0)
    }
}

/// A point of the (single, origin-centred) holomorphic chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub z: CVector,
}

impl ChartPoint {
    pub fn new(z: CVector) -> Self {
        Self { z }
    }

    pub fn origin(m: usize) -> Self {
        Self { z: CVector::zeros(m) }
    }

    pub fn from_slice(z: &[C64]) -> Self {
        Self { z: CVector::from_column_slice(z) }
    }
}

/// Covariant metric and its inverse at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: CMatrix,
    pub g_inv: CMatrix,
}

/// Symmetric connection coefficients `Γ^β_{μν}`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<C64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^beta_{mu nu}`.
    pub fn get(&self, beta: usize, mu: usize, nu: usize) -> C64 {
        self.data[(beta * self.dim + mu) * self.dim + nu]
    }

    pub fn set(&mut self, beta: usize, mu: usize, nu: usize, v: C64) {
        let d = self.dim;
        self.data[(beta * d + mu) * d + nu] = v;
    }

    /// Contraction `Γ^β_{μν} v^μ w^ν`.
    pub fn contract(&self, v: &CVector, w: &CVector) -> CVector {
        let d = self.dim;
        CVector::from_fn(d, |beta, _| {
            let mut acc = C64::new(0.0, 0.0);
            for mu in 0..d {
                for nu in 0..d {
                    acc += self.get(beta, mu, nu) * v[mu] * w[nu];
                }
            }
            acc
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Rank-4 array for `R_{β̄μνᾱ}`, indexed `[β][μ][ν][α]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    dim: usize,
    data: Vec<C64>,
}

impl Riemann {
    fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim.pow(4)] }
    }

    fn idx(&self, b: usize, m: usize, n: usize, a: usize) -> usize {
        ((b * self.dim + m) * self.dim + n) * self.dim + a
    }

    pub fn get(&self, beta: usize, mu: usize, nu: usize, alpha: usize) -> C64 {
        self.data[self.idx(beta, mu, nu, alpha)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Curvature tensors at a point. `ricci` is obtained by contracting
/// `riemann` with the inverse metric, not from the Einstein relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature {
    pub riemann: Riemann,
    pub ricci: CMatrix,
    pub scalar: f64,
}

pub(crate) fn check_dim(spec: &ManifoldSpec, found: usize) -> Result<()> {
    let expected = spec.dim();
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Verify that `z` lies inside the chart: finite entries and
/// `1 + cρ > 0` on every negatively curved block.
pub fn check_domain(spec: &ManifoldSpec, z: &CVector) -> Result<()> {
    check_dim(spec, z.len())?;
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(crate::error::invalid("chart point has non-finite entries"));
    }
    for b in spec.blocks() {
        if let Some(r) = b.boundary_radius() {
            let rho = b.rho(z);
            if rho >= r * r {
                return Err(Error::ChartDomain { rho, bound: r * r });
            }
        }
    }
    Ok(())
}

/// Radial profile `log(1 + cρ)/(2c)`, with the flat limit `ρ/2`.
fn block_potential(c: f64, rho: f64) -> f64 {
    if c == 0.0 {
        0.5 * rho
    } else {
        (c * rho).ln_1p() / (2.0 * c)
    }
}

/// Kähler potential `K`. For `CPᵐ` this is `(a²/2)·log(1 + ρ/a²)`, for
/// `CHᵐ` `−(b²/2)·log(1 − ρ/b²)`, and `ρ/2` in flat space.
pub fn kahler_potential(spec: &ManifoldSpec, z: &ChartPoint) -> Result<f64> {
    check_domain(spec, &z.z)?;
    Ok(spec.blocks().iter().map(|b| block_potential(b.c, b.rho(&z.z))).sum())
}

/// `h = log det g`.
pub fn log_det_metric(spec: &ManifoldSpec, z: &ChartPoint) -> Result<f64> {
    check_domain(spec, &z.z)?;
    // det of one block: (1/2)^d · f^{-(d+1)}
    Ok(spec
        .blocks()
        .iter()
        .map(|b| {
            let d = b.dim as f64;
            -d * std::f64::consts::LN_2 - (d + 1.0) * (b.c * b.rho(&z.z)).ln_1p()
        })
        .sum())
}

pub fn metric(spec: &ManifoldSpec, z: &ChartPoint) -> Result<MetricAtPoint> {
    check_domain(spec, &z.z)?;
    let m = spec.dim();
    let mut g = CMatrix::zeros(m, m);
    let mut g_inv = CMatrix::zeros(m, m);
    for b in spec.blocks() {
        let f = 1.0 + b.c * b.rho(&z.z);
        for mu in b.range() {
            for nu in b.range() {
                let outer = z.z[mu].conj() * z.z[nu] * b.c;
                let delta = if mu == nu { 1.0 } else { 0.0 };
                g[(mu, nu)] = (C64::new(f * delta, 0.0) - outer) / (2.0 * f * f);
                g_inv[(mu, nu)] = (C64::new(delta, 0.0) + outer) * (2.0 * f);
            }
        }
    }
    Ok(MetricAtPoint { g, g_inv })
}

/// `∂_μ g_{αβ̄}` as one matrix per `μ`.
pub fn metric_derivative(spec: &ManifoldSpec, z: &ChartPoint) -> Result<Vec<CMatrix>> {
    check_domain(spec, &z.z)?;
    let m = spec.dim();
    let mut out = vec![CMatrix::zeros(m, m); m];
    for b in spec.blocks() {
        let c = b.c;
        let f = 1.0 + c * b.rho(&z.z);
        // K' = 1/(2f), K'' = −c/(2f²), K''' = c²/f³
        let k2 = -c / (2.0 * f * f);
        let k3 = c * c / (f * f * f);
        let zb = |i: usize| z.z[i].conj();
        for mu in b.range() {
            for al in b.range() {
                for be in b.range() {
                    let mut v = zb(mu) * zb(al) * z.z[be] * k3;
                    if al == be {
                        v += zb(mu) * k2;
                    }
                    if mu == be {
                        v += zb(al) * k2;
                    }
                    out[mu][(al, be)] = v;
                }
            }
        }
    }
    Ok(out)
}

pub fn christoffel(spec: &ManifoldSpec, z: &ChartPoint) -> Result<Christoffel> {
    check_domain(spec, &z.z)?;
    let mut gamma = Christoffel::zeros(spec.dim());
    for b in spec.blocks() {
        let f = 1.0 + b.c * b.rho(&z.z);
        let s = -b.c / f;
        for beta in b.range() {
            for mu in b.range() {
                for nu in b.range() {
                    let mut v = C64::new(0.0, 0.0);
                    if beta == mu {
                        v += z.z[nu].conj();
                    }
                    if beta == nu {
                        v += z.z[mu].conj();
                    }
                    gamma.set(beta, mu, nu, v * s);
                }
            }
        }
    }
    Ok(gamma)
}

pub fn curvature(spec: &ManifoldSpec, z: &ChartPoint) -> Result<Curvature> {
    let MetricAtPoint { g, g_inv } = metric(spec, z)?;
    let m = spec.dim();
    let mut riemann = Riemann::zeros(m);
    for b in spec.blocks() {
        let two_c = 2.0 * b.c;
        for be in b.range() {
            for mu in b.range() {
                for nu in b.range() {
                    for al in b.range() {
                        let v = (g[(mu, be)] * g[(nu, al)] + g[(nu, be)] * g[(mu, al)]) * two_c;
                        let i = riemann.idx(be, mu, nu, al);
                        riemann.data[i] = v;
                    }
                }
            }
        }
    }
    // Ric_{μβ̄} = g^{νᾱ} R_{β̄μνᾱ}
    let ricci = CMatrix::from_fn(m, m, |mu, be| {
        let mut acc = C64::new(0.0, 0.0);
        for nu in 0..m {
            for al in 0..m {
                acc += g_inv[(al, nu)] * riemann.get(be, mu, nu, al);
            }
        }
        acc
    });
    let scalar = 2.0 * (&ricci * &g_inv).trace().re;
    Ok(Curvature { riemann, ricci, scalar })
}

/// `tan_c(x) = tan(√c x)/√c`, with the `tanh` and linear analogues.
fn tan_c(c: f64, x: f64) -> f64 {
    if c > 0.0 {
        let s = c.sqrt();
        (s * x).tan() / s
    } else if c < 0.0 {
        let s = (-c).sqrt();
        (s * x).tanh() / s
    } else {
        x
    }
}

/// Closed-form geodesic through the origin with `ż(0) = u`, together
/// with its first and second time derivatives.
pub fn geodesic_jet(spec: &ManifoldSpec, u: &CVector, t: f64) -> Result<(CVector, CVector, CVector)> {
    spec.validate()?;
    check_dim(spec, u.len())?;
    let m = spec.dim();
    let (mut z, mut dz, mut ddz) = (CVector::zeros(m), CVector::zeros(m), CVector::zeros(m));
    for b in spec.blocks() {
        let speed = b.range().map(|i| u[i].norm_sqr()).sum::<f64>().sqrt();
        if speed == 0.0 {
            continue;
        }
        if b.c > 0.0 {
            let phase = b.c.sqrt() * speed * t - PI / 2.0;
            let off = phase - PI * (phase / PI).round();
            if off.abs() < 1e-9 {
                return Err(Error::PoleOfChart { t });
            }
        }
        let r = tan_c(b.c, speed * t);
        let dr = speed * (1.0 + b.c * r * r);
        let ddr = 2.0 * b.c * speed * speed * r * (1.0 + b.c * r * r);
        for i in b.range() {
            let dir = u[i] / speed;
            z[i] = dir * r;
            dz[i] = dir * dr;
            ddz[i] = dir * ddr;
        }
    }
    Ok((z, dz, ddz))
}

/// `z(t) = r(t)·u/|u|` with `r = a·tan(|u|t/a)` on `CPᵐ`,
/// `b·tanh(|u|t/b)` on `CHᵐ`, `|u|t` in flat space, and per-factor
/// forms on products.
pub fn geodesic(spec: &ManifoldSpec, u: &CVector, t: f64) -> Result<ChartPoint> {
    geodesic_jet(spec, u, t).map(|(z, _, _)| ChartPoint { z })
}

/// Length `πa` of every closed geodesic of `CPᵐ`.
pub fn geodesic_length_closed(spec: &ManifoldSpec) -> Result<f64> {
    match spec {
        ManifoldSpec::ProjectiveCP { a, .. } => {
            spec.validate()?;
            Ok(PI * a)
        }
        _ => Err(Error::WrongKind("closed geodesics only exist on CP^m")),
    }
}

/// Volume `4π/Λ` of the sphere with curvature `Λ > 0`.
pub fn volume_s2(lambda: f64) -> Result<f64> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(4.0 * PI / lambda)
    } else {
        Err(Error::WrongKind("noncompact with infinite volume"))
    }
}

/// `g_{μν̄} v^μ v̄^ν`.
pub fn squared_speed(g: &CMatrix, v: &CVector) -> f64 {
    let vc = v.map(|x| x.conj());
    (v.transpose() * g * vc)[(0, 0)].re
}

/// Residuals of the finite-difference identity checks at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// `max |FD(∂∂̄K) − g|`
    pub potential_residual: f64,
    /// `max |g^{-1}·FD(∂g) − Γ|`
    pub christoffel_residual: f64,
    /// `max |−FD(∂∂̄ log det g) − Λ_eff g|`
    pub ricci_residual: f64,
    /// `max |Ric − Λ_eff g|` with `Ric` contracted from the Riemann tensor
    pub einstein_residual: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.potential_residual.max(self.christoffel_residual).max(self.ricci_residual).max(self.einstein_residual)
    }
}

/// Expected Ricci tensor `Λ_eff·g` (blockwise).
pub fn einstein_ricci(spec: &ManifoldSpec, g: &CMatrix) -> CMatrix {
    let lam = spec.coordinate_einstein_constants();
    CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * lam[i])
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Compare the closed forms at `z` against central differences with step `h`.
pub fn verify_kahler_identities(spec: &ManifoldSpec, z: &ChartPoint, h: f64) -> Result<IdentityReport> {
    let MetricAtPoint { g, g_inv } = metric(spec, z)?;
    let m = spec.dim();

    let potential = |w: &CVector| kahler_potential(spec, &ChartPoint { z: w.clone() }).unwrap_or(f64::NAN);
    let potential_residual = max_abs(&(fd::mixed_hessian(&potential, &z.z, h) - &g));

    let closed = christoffel(spec, z)?;
    let mut numeric = Christoffel::zeros(m);
    let dg: Vec<CMatrix> = (0..m)
        .map(|mu| {
            CMatrix::from_fn(m, m, |a, b| {
                let entry = |w: &CVector| metric(spec, &ChartPoint { z: w.clone() }).map(|mt| mt.g[(a, b)]).unwrap_or(C64::new(f64::NAN, 0.0));
                fd::d_holo(&entry, &z.z, mu, h)
            })
        })
        .collect();
    for beta in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for gam in 0..m {
                    acc += g_inv[(gam, beta)] * dg[mu][(nu, gam)];
                }
                numeric.set(beta, mu, nu, acc);
            }
        }
    }
    let christoffel_residual = numeric.max_abs_diff(&closed);

    let expected = einstein_ricci(spec, &g);
    let log_det = |w: &CVector| log_det_metric(spec, &ChartPoint { z: w.clone() }).unwrap_or(f64::NAN);
    let ricci_fd = -fd::mixed_hessian(&log_det, &z.z, h);
    let ricci_residual = max_abs(&(ricci_fd - &expected));

    let curv = curvature(spec, z)?;
    let einstein_residual = max_abs(&(curv.ricci - expected));

    Ok(IdentityReport { potential_residual, christoffel_residual, ricci_residual, einstein_residual })
}
