//! The characteristic function `g_c(θ)` of the t-statistic's quadratic form
//! and its unique negative root.
//!
//! All computations are expressed in the scaled coordinates
//! `x_i = κ γ_i²` with `κ = m c² / (m - 1)` and `τ = (κ + 1) / (m κ)`.

use crate::error::{Error, Result};
use crate::solve;

const ROOT_REL_TOL: f64 = 1e-13;

/// Variance ratios `γ_j = σ_j / σ_{m+1}` of the `m` controls together with
/// the threshold `c` at which `P[|T_m| > c]` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaConfig {
    gammas: Vec<f64>,
    c: f64,
}

impl GammaConfig {
    pub fn new(gammas: Vec<f64>, c: f64) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::param(format!(
                "at least two control clusters are required, got {}",
                gammas.len()
            )));
        }
        if let Some(bad) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::param(format!("variance ratios must be finite and >= 0, got {bad}")));
        }
        if gammas.iter().all(|&g| g == 0.0) {
            return Err(Error::param(
                "all variance ratios are zero; the t-statistic is degenerate",
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param(format!("threshold c must be positive, got {c}")));
        }
        Ok(Self { gammas, c })
    }

    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.m(), self.c)
    }

    pub fn tau(&self) -> f64 {
        tau(self.m(), self.kappa())
    }

    /// Scaled ratios `x_i = κ γ_i²`.
    pub fn xs(&self) -> Vec<f64> {
        let k = self.kappa();
        self.gammas.iter().map(|g| k * g * g).collect()
    }

    pub fn max_gamma_sq(&self) -> f64 {
        self.gammas.iter().fold(0.0f64, |acc, g| acc.max(g * g))
    }

    pub(crate) fn grouped(&self) -> Grouped {
        let mut sorted = self.gammas.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut parts: Vec<(f64, usize)> = Vec::new();
        for g in sorted {
            match parts.last_mut() {
                Some((v, n)) if *v == g => *n += 1,
                _ => parts.push((g, 1)),
            }
        }
        Grouped::from_gammas(self.m(), self.c, &parts)
    }
}

pub(crate) fn kappa(m: usize, c: f64) -> f64 {
    let m = m as f64;
    m * c * c / (m - 1.0)
}

pub(crate) fn tau(m: usize, kappa: f64) -> f64 {
    (kappa + 1.0) / (m as f64 * kappa)
}

/// A configuration stored as distinct ratio values with multiplicities.
/// Worst-case candidates have at most three distinct values, which makes
/// every evaluation O(1) in `m`.
#[derive(Debug, Clone)]
pub(crate) struct Grouped {
    pub m: usize,
    pub tau: f64,
    pub max_gamma_sq: f64,
    /// `(x, multiplicity)`, multiplicities positive.
    pub groups: Vec<(f64, usize)>,
}

impl Grouped {
    /// Builds from `(γ, multiplicity)` pairs; zero multiplicities are
    /// dropped. The caller guarantees the multiplicities sum to `m` and
    /// that not every γ is zero.
    pub fn from_gammas(m: usize, c: f64, parts: &[(f64, usize)]) -> Self {
        let kappa = kappa(m, c);
        let groups: Vec<(f64, usize)> = parts
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|&(g, n)| (kappa * g * g, n))
            .collect();
        let max_gamma_sq = parts
            .iter()
            .filter(|(_, n)| *n > 0)
            .fold(0.0f64, |acc, (g, _)| acc.max(g * g));
        debug_assert_eq!(groups.iter().map(|g| g.1).sum::<usize>(), m);
        Self { m, tau: tau(m, kappa), max_gamma_sq, groups }
    }

    /// `Σ_i (1 + τ x_i) / (x_i + t) - 1`, strictly decreasing in `t > 0`.
    pub fn constraint(&self, t: f64) -> f64 {
        self.groups
            .iter()
            .map(|&(x, n)| n as f64 * (1.0 + self.tau * x) / (x + t))
            .sum::<f64>()
            - 1.0
    }

    pub fn negative_root(&self) -> Result<NegativeRoot> {
        let m = self.m as f64;
        let eps = 1e-8 * (1.0 + self.max_gamma_sq);
        let lo = m;
        let hi = m + self.max_gamma_sq + eps;
        let root = solve::brent(|t| self.constraint(t), lo, hi, ROOT_REL_TOL, 200)?;
        Ok(NegativeRoot {
            abs_value: root.x,
            bracket_low: lo,
            bracket_high: hi,
            residual: root.f,
        })
    }
}

/// `t = |θ_{m+1}|`, the magnitude of the unique negative root of `g_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeRoot {
    pub abs_value: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    /// Value of `Σ (1 + τ x_i)/(x_i + t) - 1` at the returned root.
    pub residual: f64,
}

/// Evaluates `g_c(θ)` in its product/sum form.
///
/// The leave-one-out products `Π_{j≠i}(x_j - θ)` come from prefix and
/// suffix products, so no factor is ever divided out.
pub fn g_value(cfg: &GammaConfig, theta: f64) -> f64 {
    let m = cfg.m();
    let kappa = cfg.kappa();
    let factors: Vec<f64> = cfg.xs().iter().map(|x| x - theta).collect();

    let mut prefix = vec![1.0; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] * factors[i];
    }
    let mut suffix = vec![1.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * factors[i];
    }
    let leave_one_out: f64 = cfg
        .gammas()
        .iter()
        .enumerate()
        .map(|(i, g)| g * g * prefix[i] * suffix[i + 1])
        .sum();

    -(m as f64 + theta) * prefix[m]
        + (kappa + (kappa + 1.0) / m as f64 * theta) * leave_one_out
}

/// Locates `|θ_{m+1}|` on the certified bracket `[m, m + max γ² + ε]`.
pub fn negative_root(cfg: &GammaConfig) -> Result<NegativeRoot> {
    cfg.grouped().negative_root()
}

/// Positive root `θ(x_(k), k)` of
/// `h(θ) = θ² - [m - x + (m + 1 - k) τ x] θ - (k - 1) x`, a lower bound on
/// `|θ_{m+1}|`.
pub fn theta_lower_bound(cfg: &GammaConfig, k: usize) -> Result<f64> {
    let m = cfg.m();
    if k == 0 || k > m {
        return Err(Error::param(format!("k must lie in 1..={m}, got {k}")));
    }
    let mut xs = cfg.xs();
    xs.sort_by(|a, b| a.total_cmp(b));
    Ok(quadratic_lower_bound(m, cfg.tau(), xs[k - 1], k))
}

pub(crate) fn quadratic_lower_bound(m: usize, tau: f64, x: f64, k: usize) -> f64 {
    let b = m as f64 - x + (m + 1 - k) as f64 * tau * x;
    let c = (k - 1) as f64 * x;
    let disc = (b * b + 4.0 * c).sqrt();
    if b >= 0.0 {
        0.5 * (b + disc)
    } else {
        // Avoids cancellation between b and the discriminant.
        2.0 * c / (disc - b)
    }
}
