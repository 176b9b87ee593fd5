//! Null rejection probability `P₀[|T_m| > c]` as a singular integral over
//! `(0, t)`, `t = |θ_{m+1}|`.
//!
//! With `s = t sin² u` the endpoint singularity cancels and
//!
//! ```text
//! P = (1/π) ∫₀^{π/2} 2 t^{(m-1)/2} sin^{m-1}(u) / √(E · S(u)) du
//! ```
//!
//! where `E = Π_j (x_j + t)` and, writing `r_j = (x_j + s)/(x_j + t)`,
//! `S = Σ_i w_i/(x_i + t) · Π_{j≠i} r_j` with `w_i = (1 + τ x_i)/(x_i + t)`.
//! `S · E` is the fused `PQ` product, so a zero `x_i` never produces `0 · ∞`.
//! Everything is accumulated in log space over groups of equal `x`.

use crate::charpoly::{GammaConfig, Grouped};
use crate::error::{Error, Result};
use crate::quadrature::Rule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Equal panels on `u ∈ [0, π/2]`.
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Target accuracy; checked by [`rejection_probability_estimate`].
    pub abs_tol: f64,
    /// Geometric sub-panels replacing the first panel. They resolve the
    /// fast transition near `u = 0` when some `x_i ≪ t`.
    pub grading_levels: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { panels: 64, nodes_per_panel: 16, abs_tol: 1e-9, grading_levels: 20 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(Error::param("quadrature needs at least one panel"));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::param("quadrature needs at least two nodes per panel"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::param("abs_tol must be positive"));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        Self { panels: 2 * self.panels, grading_levels: self.grading_levels + 1, ..*self }
    }
}

pub fn rejection_probability(cfg: &GammaConfig, settings: &QuadratureSettings) -> Result<f64> {
    settings.validate()?;
    integrate(&cfg.grouped(), settings)
}

/// Value together with the change observed when the panel count is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub within_tolerance: bool,
}

pub fn rejection_probability_estimate(
    cfg: &GammaConfig,
    settings: &QuadratureSettings,
) -> Result<RejectionEstimate> {
    settings.validate()?;
    let grouped = cfg.grouped();
    let coarse = integrate(&grouped, settings)?;
    let fine = integrate(&grouped, &settings.doubled())?;
    let error_estimate = (fine - coarse).abs();
    Ok(RejectionEstimate {
        value: fine,
        error_estimate,
        within_tolerance: error_estimate <= settings.abs_tol,
    })
}

pub(crate) fn integrate(g: &Grouped, settings: &QuadratureSettings) -> Result<f64> {
    let root = g.negative_root()?;
    let t = root.abs_value;
    let m = g.m as f64;
    let tau = g.tau;

    // Per group: ln(x + t), ln(n · w / (x + t)).
    let mut ln_xt = Vec::with_capacity(g.groups.len());
    let mut ln_a = Vec::with_capacity(g.groups.len());
    let mut ln_e = 0.0;
    for &(x, n) in &g.groups {
        let l = (x + t).ln();
        ln_xt.push(l);
        ln_a.push((n as f64).ln() + (1.0 + tau * x).ln() - 2.0 * l);
        ln_e += n as f64 * l;
    }
    let ln_const = std::f64::consts::LN_2 + 0.5 * (m - 1.0) * t.ln() - 0.5 * ln_e;

    let rule = Rule::cached(settings.panels, settings.nodes_per_panel, settings.grading_levels);
    let mut ln_r = vec![0.0; g.groups.len()];
    let mut total = 0.0;
    for node in &rule.nodes {
        let s = t * node.sin_u * node.sin_u;
        let mut ln_prod = 0.0;
        for (i, &(x, n)) in g.groups.iter().enumerate() {
            // x = 0 gives r = sin² u exactly; avoid rounding in (0 + s)/(0 + t).
            ln_r[i] = if x == 0.0 { 2.0 * node.ln_sin_u } else { (x + s).ln() - ln_xt[i] };
            ln_prod += n as f64 * ln_r[i];
        }
        let mut peak = f64::NEG_INFINITY;
        for i in 0..ln_r.len() {
            peak = peak.max(ln_a[i] - ln_r[i]);
        }
        let mut acc = 0.0;
        for i in 0..ln_r.len() {
            acc += (ln_a[i] - ln_r[i] - peak).exp();
        }
        let ln_s = ln_prod + peak + acc.ln();
        let ln_f = ln_const + (m - 1.0) * node.ln_sin_u - 0.5 * ln_s;
        let f = ln_f.exp();
        if !f.is_finite() || f < 0.0 {
            return Err(Error::NumericalFailure {
                context: "rejection integrand",
                detail: format!("integrand {f} at sin u = {}, t = {t}, ln S = {ln_s}", node.sin_u),
            });
        }
        total += node.weight * f;
    }
    let p = total / std::f64::consts::PI;
    if !p.is_finite() {
        return Err(Error::NumericalFailure {
            context: "rejection integral",
            detail: format!("non-finite result {p}"),
        });
    }
    Ok(p.clamp(0.0, 1.0))
}
