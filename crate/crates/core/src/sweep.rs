//! Bifurcation sweeps: regime, rate, period and `|ψ(t_probe)|²` along a
//! grid of `k` values or of radii.

use crate::closed_form::{self, CurvatureSign, ModeParams, Regime};
use crate::error::{invalid, Result};
use crate::exec::{self, Execution};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Radius chosen as `4|ξ|/(qH·k)`.
    K(Vec<f64>),
    /// `k` follows from the fixed `|ξ|`, `q`, `H`.
    Radius(Vec<f64>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            Self::K(v) | Self::Radius(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sign: CurvatureSign,
    pub q: f64,
    pub h: f64,
    pub xi_abs: f64,
    pub t_probe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub radius: f64,
    pub regime: Regime,
    pub omega_or_mu: f64,
    pub period: Option<f64>,
    pub l2_at_probe: f64,
}

/// `start, start + step, …` up to `stop` inclusive (within `step/1e6`),
/// skipping points with `|k − 1| < exclude`.
pub fn k_grid(start: f64, stop: f64, step: f64, exclude: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(invalid("grid needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-6).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).filter(|k| (k - 1.0).abs() >= exclude).collect())
}

fn row(cfg: &SweepConfig, point: f64, by_k: bool) -> Result<SweepRow> {
    let radius = if by_k {
        if point < 0.0 || !point.is_finite() {
            return Err(invalid(format!("k values must be non-negative, got {point}")));
        }
        4.0 * cfg.xi_abs / ((cfg.q * cfg.h).abs() * point)
    } else {
        point
    };
    let sign = if by_k && point == 0.0 { CurvatureSign::Flat } else { cfg.sign };
    let params = ModeParams::scalar(C64::new(cfg.xi_abs, 0.0), radius, cfg.q, cfg.h, sign);
    let sol = closed_form::ModeSolution::new(params)?;
    let (_, psi) = sol.eval(cfg.t_probe)?;
    Ok(SweepRow {
        k: if by_k { point } else { sol.report.k },
        radius,
        regime: sol.report.regime,
        omega_or_mu: sol.report.omega_or_mu,
        period: sol.report.period,
        l2_at_probe: psi.norm_squared(),
    })
}

/// Evaluate one row per grid point, in grid order.
pub fn sweep(cfg: &SweepConfig, axis: &SweepAxis, exec: Execution) -> Result<Vec<SweepRow>> {
    if cfg.sign == CurvatureSign::Flat {
        return Err(invalid("sweeps need a curved space"));
    }
    if !(cfg.xi_abs > 0.0) || cfg.q * cfg.h == 0.0 {
        return Err(invalid("sweeps need |xi| > 0 and qH != 0"));
    }
    let (points, by_k) = match axis {
        SweepAxis::K(v) => (v, true),
        SweepAxis::Radius(v) => (v, false),
    };
    exec::map(exec, points, |p| row(cfg, *p, by_k)).into_iter().collect()
}

/// Number of regime changes between consecutive rows.
pub fn regime_flips(rows: &[SweepRow]) -> usize {
    rows.windows(2).filter(|w| w[0].regime != w[1].regime).count()
}
