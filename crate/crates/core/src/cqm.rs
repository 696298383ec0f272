//! Spectral collapse model.
//!
//! A state `ψ = Σ ξ_j φ_j` over the eigenbasis of a Hamiltonian with
//! eigenvalues `H_j` evolves as a product of independent `CH¹` modes. Mode
//! `j` has coupling `q = 1/ħ`, field `H_j` and radius
//! `b_j = 4ħ(M/m)|ξ|/H_j`, so that `k_j = (m/M)|ξ_j|/|ξ|`. Modes with
//! `k_j > 1` grow exponentially at rate `μ_j`, and the fastest one takes
//! over the state after roughly `τ_c`.
//!
//! Mode indices are zero-based.

use crate::closed_form::{self, CurvatureSign, ModeParams, ModeSolution, Regime};
use crate::error::{invalid, Error, Result};
use crate::exec::{self, Execution};
use crate::C64;

/// Raw model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralInputs {
    /// Eigenvalues `H_j > 0`, ascending.
    pub eigenvalues: Vec<f64>,
    pub xi: Vec<C64>,
    pub hbar: f64,
    pub mass_m: f64,
    /// Fundamental mass `M`.
    pub mass_big_m: f64,
    /// Explicit radii `b_j` replacing the mass rule.
    pub radii_override: Option<Vec<f64>>,
}

/// A validated system with derived radii and mode parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSystem {
    pub inputs: SpectralInputs,
    pub q: f64,
    pub radii: Vec<f64>,
    pub ks: Vec<f64>,
    pub modes: Vec<ModeSolution>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEntry {
    pub index: usize,
    pub k: f64,
    pub regime: Regime,
    /// `ω_j` for bounded modes, `μ_j` for classical ones, `0` if critical.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AllQuantum,
    Collapse,
    Degenerate,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Self::AllQuantum => "AllQuantum",
            Self::Collapse => "Collapse",
            Self::Degenerate => "Degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    pub per_mode: Vec<ModeEntry>,
    pub dominant_mode: Option<usize>,
    /// `max_{j≠N} 1/|μ_N − r_j|` with `r_j = μ_j` for classical modes and
    /// `0` otherwise. `None` without a dominant mode, with a single mode,
    /// or when a tie makes it infinite.
    pub tau_c: Option<f64>,
    pub verdict: Verdict,
    /// Whether `k_j > 1` agrees with
    /// `|ξ_j|² > M²/(m² − M²)·Σ_{i≠j}|ξ_i|²` for every mode. Only
    /// available under the mass rule with `m > M`.
    pub threshold_consistent: Option<bool>,
}

/// Validate the inputs and derive `b_j`, `k_j` and the mode parameters.
pub fn build(inputs: SpectralInputs) -> Result<SpectralSystem> {
    let n = inputs.eigenvalues.len();
    if n == 0 {
        return Err(invalid("at least one eigenvalue is required"));
    }
    if inputs.xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: inputs.xi.len() });
    }
    for (j, h) in inputs.eigenvalues.iter().enumerate() {
        if !(*h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("eigenvalue {j} must be positive, got {h}")));
        }
    }
    if inputs.eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("eigenvalues must be sorted in ascending order"));
    }
    for (name, v) in [("hbar", inputs.hbar), ("m", inputs.mass_m), ("M", inputs.mass_big_m)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let total = total_norm(&inputs.xi);
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroNorm);
    }
    let radii = match &inputs.radii_override {
        Some(r) => {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            if r.iter().any(|b| !(*b > 0.0)) {
                return Err(invalid("radii must be positive"));
            }
            r.clone()
        }
        None => {
            let scale = 4.0 * inputs.hbar * inputs.mass_big_m / inputs.mass_m * total;
            inputs.eigenvalues.iter().map(|h| scale / h).collect()
        }
    };
    let q = 1.0 / inputs.hbar;
    let mut modes = Vec::with_capacity(n);
    let mut ks = Vec::with_capacity(n);
    for j in 0..n {
        let h = inputs.eigenvalues[j];
        ks.push(4.0 * inputs.hbar * inputs.xi[j].norm() / (h * radii[j]));
        let p = ModeParams::scalar(inputs.xi[j], radii[j], q, h, CurvatureSign::Negative);
        modes.push(ModeSolution::new(p)?);
    }
    Ok(SpectralSystem { inputs, q, radii, ks, modes })
}

fn total_norm(xi: &[C64]) -> f64 {
    xi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl SpectralSystem {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_norm(&self) -> f64 {
        total_norm(&self.inputs.xi)
    }

    fn check_critical(&self) -> Result<()> {
        match self.modes.iter().position(|m| m.regime() == Regime::Critical) {
            Some(index) => Err(Error::CriticalMode { index, k: self.ks[index] }),
            None => Ok(()),
        }
    }

    fn mode_at(&self, j: usize, t: f64) -> Result<(C64, C64)> {
        let (z, psi) = self.modes[j].eval(t)?;
        Ok((z[0], psi[0]))
    }

    /// Keep the first `n` modes with their radii unchanged. Returns the
    /// truncated system and the neglected norm `Σ_{j≥n}|ξ_j|²`.
    pub fn truncate(&self, n: usize) -> Result<(SpectralSystem, f64)> {
        if n == 0 || n > self.len() {
            return Err(invalid(format!("cannot keep {n} of {} modes", self.len())));
        }
        let tail: f64 = self.inputs.xi[n..].iter().map(|x| x.norm_sqr()).sum();
        let inputs = SpectralInputs {
            eigenvalues: self.inputs.eigenvalues[..n].to_vec(),
            xi: self.inputs.xi[..n].to_vec(),
            radii_override: Some(self.radii[..n].to_vec()),
            ..self.inputs.clone()
        };
        Ok((build(inputs)?, tail))
    }
}

/// Mode coefficients `(z_j(t), ψ_j(t))`.
pub fn evolve(sys: &SpectralSystem, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    sys.check_critical()?;
    let mut z = Vec::with_capacity(sys.len());
    let mut psi = Vec::with_capacity(sys.len());
    for j in 0..sys.len() {
        let (a, b) = sys.mode_at(j, t)?;
        z.push(a);
        psi.push(b);
    }
    Ok((z, psi))
}

/// [`evolve`] at each time of `times`, fanned out with `exec`.
pub fn evolve_series(sys: &SpectralSystem, times: &[f64], exec: Execution) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    sys.check_critical()?;
    exec::map(exec, times, |&t| evolve(sys, t)).into_iter().collect()
}

/// `(Σ|ψ_j(t)|², ‖ψ(t)‖²)`, the second computed mode by mode as
/// `4(b_j² − |z_j|²)²|ψ_j|²/b_j⁴`.
pub fn norms(sys: &SpectralSystem, t: f64) -> Result<(f64, f64)> {
    sys.check_critical()?;
    let mut l2 = 0.0;
    let mut geometric = 0.0;
    for (j, mode) in sys.modes.iter().enumerate() {
        let (_, psi) = sys.mode_at(j, t)?;
        let b2 = sys.radii[j] * sys.radii[j];
        let gap = closed_form::boundary_gap(&mode.params, t)?;
        l2 += psi.norm_sqr();
        geometric += 4.0 * (gap / b2).powi(2) * psi.norm_sqr();
    }
    Ok((l2, geometric))
}

/// Classify the modes and predict the collapse.
pub fn collapse_report(sys: &SpectralSystem) -> CollapseReport {
    let per_mode: Vec<ModeEntry> =
        sys.modes.iter().enumerate().map(|(index, m)| ModeEntry { index, k: sys.ks[index], regime: m.regime(), rate: m.report.omega_or_mu }).collect();
    let growth = |e: &ModeEntry| if e.regime == Regime::Classical { e.rate } else { 0.0 };

    let classical: Vec<&ModeEntry> = per_mode.iter().filter(|e| e.regime == Regime::Classical).collect();
    let threshold_consistent = threshold_check(sys);
    if classical.is_empty() {
        return CollapseReport { per_mode, dominant_mode: None, tau_c: None, verdict: Verdict::AllQuantum, threshold_consistent };
    }
    let top = classical.iter().max_by(|a, b| a.rate.total_cmp(&b.rate)).expect("nonempty");
    let n = top.index;
    let mu_n = top.rate;
    let mut tau: Option<f64> = None;
    let mut tie = false;
    for e in per_mode.iter().filter(|e| e.index != n) {
        let gap = (mu_n - growth(e)).abs();
        if gap <= 1e-12 * mu_n.max(1.0) {
            tie = true;
        } else {
            tau = Some(tau.map_or(1.0 / gap, |t: f64| t.max(1.0 / gap)));
        }
    }
    if tie {
        return CollapseReport { per_mode, dominant_mode: None, tau_c: None, verdict: Verdict::Degenerate, threshold_consistent };
    }
    CollapseReport { per_mode, dominant_mode: Some(n), tau_c: tau, verdict: Verdict::Collapse, threshold_consistent }
}

/// `|ξ_j|² > M²/(m² − M²)·Σ_{i≠j}|ξ_i|²` for each mode.
pub fn threshold_classical(inputs: &SpectralInputs) -> Option<Vec<bool>> {
    let (m, big) = (inputs.mass_m, inputs.mass_big_m);
    if m <= big {
        return None;
    }
    let total: f64 = inputs.xi.iter().map(|x| x.norm_sqr()).sum();
    let factor = big * big / (m * m - big * big);
    Some(inputs.xi.iter().map(|x| x.norm_sqr() > factor * (total - x.norm_sqr())).collect())
}

fn threshold_check(sys: &SpectralSystem) -> Option<bool> {
    if sys.inputs.radii_override.is_some() {
        return None;
    }
    let predicted = threshold_classical(&sys.inputs)?;
    Some(predicted.iter().zip(&sys.modes).all(|(p, m)| *p == (m.regime() == Regime::Classical)))
}

/// The Planck mass `√(ħc/G)`.
pub fn planck_mass(hbar: f64, g: f64, c: f64) -> Result<f64> {
    if !(hbar > 0.0 && g > 0.0 && c > 0.0) {
        return Err(invalid("hbar, G and c must be positive"));
    }
    Ok((hbar * c / g).sqrt())
}

/// `k_j = √(Gm²/(ħc))·|ξ_j|/|ξ|`, the mass rule with `M` the Planck mass.
pub fn planck_mass_k(xi: &[C64], mass_m: f64, hbar: f64, g: f64, c: f64) -> Result<Vec<f64>> {
    planck_mass(hbar, g, c)?;
    if !(mass_m > 0.0) {
        return Err(invalid("m must be positive"));
    }
    let total = total_norm(xi);
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let factor = (g * mass_m * mass_m / (hbar * c)).sqrt();
    Ok(xi.iter().map(|x| factor * x.norm() / total).collect())
}
