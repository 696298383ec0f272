//! Central finite differences in the `2m` real coordinates of a chart,
//! assembled into Wirtinger derivatives `∂_μ = ½(∂_x − i∂_y)`,
//! `∂_μ̄ = ½(∂_x + i∂_y)`.

use crate::{CMatrix, CVector, C64};

/// Shift coordinate `mu` by `step` along the real axis (`imag == false`)
/// or the imaginary axis.
fn shifted(z: &CVector, mu: usize, imag: bool, step: f64) -> CVector {
    let mut w = z.clone();
    if imag {
        w[mu] += C64::new(0.0, step);
    } else {
        w[mu] += C64::new(step, 0.0);
    }
    w
}

/// `(∂_x f, ∂_y f)` at coordinate `mu` for a complex-valued `f`.
fn real_partials<F>(f: &F, z: &CVector, mu: usize, h: f64) -> (C64, C64)
where
    F: Fn(&CVector) -> C64,
{
    let dx = (f(&shifted(z, mu, false, h)) - f(&shifted(z, mu, false, -h))) / (2.0 * h);
    let dy = (f(&shifted(z, mu, true, h)) - f(&shifted(z, mu, true, -h))) / (2.0 * h);
    (dx, dy)
}

/// Holomorphic derivative `∂_μ f` of a complex-valued function.
pub fn d_holo<F>(f: &F, z: &CVector, mu: usize, h: f64) -> C64
where
    F: Fn(&CVector) -> C64,
{
    let (dx, dy) = real_partials(f, z, mu, h);
    0.5 * (dx - C64::i() * dy)
}

/// Antiholomorphic derivative `∂_μ̄ f` of a complex-valued function.
pub fn d_antiholo<F>(f: &F, z: &CVector, mu: usize, h: f64) -> C64
where
    F: Fn(&CVector) -> C64,
{
    let (dx, dy) = real_partials(f, z, mu, h);
    0.5 * (dx + C64::i() * dy)
}

/// Gradient `(∂_1 f, …, ∂_m f)`.
pub fn gradient_holo<F>(f: &F, z: &CVector, h: f64) -> CVector
where
    F: Fn(&CVector) -> C64,
{
    CVector::from_fn(z.len(), |mu, _| d_holo(f, z, mu, h))
}

/// Real second partial derivative with respect to two of the `2m` real
/// coordinates. Coordinates are `(index, imag)` pairs.
fn second_partial<F>(f: &F, z: &CVector, a: (usize, bool), b: (usize, bool), h: f64) -> f64
where
    F: Fn(&CVector) -> f64,
{
    if a == b {
        let plus = f(&shifted(z, a.0, a.1, h));
        let minus = f(&shifted(z, a.0, a.1, -h));
        return (plus - 2.0 * f(z) + minus) / (h * h);
    }
    let eval = |sa: f64, sb: f64| {
        let w = shifted(&shifted(z, a.0, a.1, sa), b.0, b.1, sb);
        f(&w)
    };
    (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
}

/// Mixed Hessian `∂_μ ∂_ν̄ f` of a real-valued function as a Hermitian
/// matrix with entry `(μ, ν)`.
pub fn mixed_hessian<F>(f: &F, z: &CVector, h: f64) -> CMatrix
where
    F: Fn(&CVector) -> f64,
{
    let m = z.len();
    CMatrix::from_fn(m, m, |mu, nu| {
        let xx = second_partial(f, z, (mu, false), (nu, false), h);
        let yy = second_partial(f, z, (mu, true), (nu, true), h);
        let xy = second_partial(f, z, (mu, false), (nu, true), h);
        let yx = second_partial(f, z, (mu, true), (nu, false), h);
        0.25 * C64::new(xx + yy, xy - yx)
    })
}

/// Holomorphic Hessian `∂_μ ∂_ν f` of a real-valued function.
pub fn holomorphic_hessian<F>(f: &F, z: &CVector, h: f64) -> CMatrix
where
    F: Fn(&CVector) -> f64,
{
    let m = z.len();
    CMatrix::from_fn(m, m, |mu, nu| {
        let xx = second_partial(f, z, (mu, false), (nu, false), h);
        let yy = second_partial(f, z, (mu, true), (nu, true), h);
        let xy = second_partial(f, z, (mu, false), (nu, true), h);
        let yx = second_partial(f, z, (mu, true), (nu, false), h);
        0.25 * C64::new(xx - yy, -(xy + yx))
    })
}
