//! Maximum null rejection probability over all variance configurations with
//! `σ_{m+1} ≤ ρ σ_(k)`.
//!
//! The maximiser has every control ratio at `ρ^{-1}`, at zero, or at one
//! common free value `γ`, so the search reduces to a finite family of
//! branches `(m1, m0)` each needing at most a one-dimensional optimisation,
//! plus the zero-treated-variance limit `p_{m,0}(c)`.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::Grouped;
use crate::error::{Error, Result};
use crate::rejection::{integrate, QuadratureSettings};
use crate::solve::golden_max;
use crate::special::two_sided_tail;

const GRID_POINTS: usize = 60;
const GAMMA_FLOOR: f64 = 1e-6;
const GAMMA_CAP: f64 = 1e4;
const REFINE_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneitySpec {
    pub m: usize,
    pub k: usize,
    pub rho: f64,
}

impl HeterogeneitySpec {
    pub fn new(m: usize, k: usize, rho: f64) -> Result<Self> {
        let spec = Self { m, k, rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::param(format!("m must be at least 2, got {}", self.m)));
        }
        if self.k < 1 || self.k > self.m {
            return Err(Error::param(format!("k must lie in 1..={}, got {}", self.m, self.k)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::param(format!("rho must be finite and >= 0, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Where the maximum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AchievingConfig {
    /// `c ≤ m^{-1/2}`: every test rejects with probability one in the limit.
    BelowThreshold,
    /// Treated variance zero, `active` controls with equal positive variance.
    ZeroTreated { active: usize },
    /// `m1` ratios at `ρ^{-1}`, `m0` at zero, the rest at `gamma` (absent
    /// when there is no free group).
    Boundary { m1: usize, m0: usize, gamma: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTrace {
    pub m1: usize,
    pub m0: usize,
    /// Lower end of the free ratio's domain: `0` or `ρ^{-1}`.
    pub lower: f64,
    pub gamma: Option<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseResult {
    pub value: f64,
    pub achieving_config: AchievingConfig,
    pub zero_treated_value: f64,
    pub branches: Vec<BranchTrace>,
    /// Branches that needed a one-dimensional search.
    pub optimizations: usize,
    /// `c` sits exactly on `m^{-1/2}`.
    pub degenerate: bool,
    /// Search stopped at the first branch above the decision threshold;
    /// `value` is then only a lower bound.
    pub early_exit: bool,
}

/// `p_{m,0}(c)` and the number of active controls attaining it.
pub fn p_zero_treated(m: usize, c: f64) -> Result<(f64, Option<usize>)> {
    if m < 2 {
        return Err(Error::param(format!("m must be at least 2, got {m}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("threshold c must be positive, got {c}")));
    }
    let mf = m as f64;
    let scaled = c * mf.sqrt();
    if (scaled - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok((0.5, None));
    }
    if scaled < 1.0 {
        return Ok((1.0, None));
    }
    let r = mf * mf * c * c / (mf * c * c + mf - 1.0);
    let mut best = (0.0, None);
    for j in (r.floor() as usize + 1)..=m {
        let jf = j as f64;
        if jf <= r {
            continue;
        }
        let p = two_sided_tail(j as u64 - 1, ((jf - 1.0) * r / (jf - r)).sqrt());
        if best.1.is_none() || p > best.0 {
            best = (p, Some(j));
        }
    }
    Ok(best)
}

fn check_counts(m: usize, m1: usize, m0: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::param(format!("m must be at least 2, got {m}")));
    }
    if m1 + m0 > m {
        return Err(Error::param(format!("m1 + m0 = {} exceeds m = {m}", m1 + m0)));
    }
    Ok(())
}

fn boundary_config(m: usize, c: f64, rho: f64, gamma: f64, m1: usize, m0: usize) -> Result<Grouped> {
    let free = m - m1 - m0;
    if m1 == 0 && (free == 0 || gamma == 0.0) {
        return Err(Error::param("configuration has every ratio at zero"));
    }
    Ok(Grouped::from_gammas(m, c, &[(1.0 / rho, m1), (0.0, m0), (gamma, free)]))
}

/// Rejection probability with `m1` ratios at `ρ^{-1}`, `m0` at zero and the
/// remaining `m - m1 - m0` at `gamma`.
pub fn p_bar(
    m: usize,
    c: f64,
    rho: f64,
    gamma: f64,
    m1: usize,
    m0: usize,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_counts(m, m1, m0)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("threshold c must be positive, got {c}")));
    }
    settings.validate()?;
    integrate(&boundary_config(m, c, rho, gamma, m1, m0)?, settings)
}

/// Supremum of [`p_bar`] over the free ratio `γ ≥ ρ̲`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TildeResult {
    pub value: f64,
    pub gamma: Option<f64>,
    pub lower: f64,
    pub evaluations: usize,
    /// Best value on the coarse grid, before refinement.
    pub grid_value: f64,
}

pub fn p_tilde(
    m: usize,
    c: f64,
    k: usize,
    rho: f64,
    m1: usize,
    m0: usize,
    settings: &QuadratureSettings,
) -> Result<TildeResult> {
    HeterogeneitySpec::new(m, k, rho)?;
    check_counts(m, m1, m0)?;
    if !(rho > 0.0) {
        return Err(Error::param("rho must be positive for a boundary branch"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("threshold c must be positive, got {c}")));
    }
    settings.validate()?;
    tilde(m, c, rho, m1, m0, m1 + k > m, settings)
}

fn tilde(
    m: usize,
    c: f64,
    rho: f64,
    m1: usize,
    m0: usize,
    lower_zero: bool,
    settings: &QuadratureSettings,
) -> Result<TildeResult> {
    let lower = if lower_zero { 0.0 } else { 1.0 / rho };
    let eval = |gamma: f64| -> Result<f64> {
        integrate(&boundary_config(m, c, rho, gamma, m1, m0)?, settings)
    };
    if m1 + m0 == m {
        let value = eval(1.0)?;
        return Ok(TildeResult { value, gamma: None, lower, evaluations: 1, grid_value: value });
    }

    let g_lo = lower.max(GAMMA_FLOOR);
    let g_hi = GAMMA_CAP * (1.0 / rho).max(1.0);
    let (l_lo, l_hi) = (g_lo.ln(), g_hi.ln());
    let step = (l_hi - l_lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| l_lo + step * i as f64).collect();
    let mut values = Vec::with_capacity(GRID_POINTS);
    for (i, &l) in grid.iter().enumerate() {
        // Pin the exact endpoint rather than exp(ln(·)).
        let gamma = if i == 0 { g_lo } else { l.exp() };
        values.push(eval(gamma)?);
    }
    let mut evaluations = GRID_POINTS;
    let mut best_i = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best_i] {
            best_i = i;
        }
    }
    let (mut best_gamma, mut best) = (g_lo * (step * best_i as f64).exp(), values[best_i]);
    if best_i == 0 {
        best_gamma = g_lo;
    }

    let zero_value = if lower_zero { Some(eval(0.0)?) } else { None };
    if let Some(z) = zero_value {
        evaluations += 1;
        if z >= best {
            best = z;
            best_gamma = 0.0;
        }
    }
    let grid_value = best;

    // Refinement around the grid argmax; failures inside are treated as
    // non-improving points.
    let mut failure = None;
    let (arg, val, n) = if best_gamma == 0.0 {
        golden_max(
            |g| eval(g).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }),
            0.0,
            g_lo,
            REFINE_TOL * g_lo,
        )
    } else {
        let a = grid[best_i.saturating_sub(1)];
        let b = grid[(best_i + 1).min(GRID_POINTS - 1)];
        let (arg, val, n) = golden_max(
            |l| eval(l.exp()).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }),
            a,
            b,
            REFINE_TOL,
        );
        (arg.exp(), val, n)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    evaluations += n;
    if val > best {
        best = val;
        best_gamma = arg;
    }
    Ok(TildeResult { value: best, gamma: Some(best_gamma), lower, evaluations, grid_value })
}

type BranchKey = (usize, usize, bool);

/// Worst-case evaluator at fixed `(m, c, ρ)`. Branch optimisations are
/// memoised across calls for different `k`.
pub struct WorstCase {
    m: usize,
    c: f64,
    rho: f64,
    settings: QuadratureSettings,
    memo: Mutex<HashMap<BranchKey, TildeResult>>,
}

impl WorstCase {
    pub fn new(m: usize, c: f64, rho: f64, settings: QuadratureSettings) -> Result<Self> {
        HeterogeneitySpec::new(m, 1, rho)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param(format!("threshold c must be positive, got {c}")));
        }
        settings.validate()?;
        Ok(Self { m, c, rho, settings, memo: Mutex::new(HashMap::new()) })
    }

    /// Distinct branch optimisations performed so far.
    pub fn memo_size(&self) -> usize {
        self.memo.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    fn branch(&self, key: BranchKey) -> Result<TildeResult> {
        if let Some(hit) = self.memo.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(*hit);
        }
        let (m1, m0, lower_zero) = key;
        let r = tilde(self.m, self.c, self.rho, m1, m0, lower_zero, &self.settings)?;
        self.memo.lock().unwrap_or_else(|e| e.into_inner()).insert(key, r);
        Ok(r)
    }

    /// Branches for a given `k`, warm-start configuration first.
    fn keys(&self, k: usize) -> Vec<BranchKey> {
        let m = self.m;
        let warm = (m + 1 - k, k - 1, true);
        let mut keys = vec![warm];
        for m0 in 0..k {
            for m1 in 0..=(m - m0) {
                let key = (m1, m0, m1 + k > m);
                if key != warm {
                    keys.push(key);
                }
            }
        }
        keys
    }

    /// Folds a free group sitting at `ρ^{-1}` into the `m1` count.
    fn canonical(&self, m1: usize, m0: usize, gamma: Option<f64>) -> AchievingConfig {
        match gamma {
            Some(g) if (g * self.rho - 1.0).abs() <= 1e-9 => {
                AchievingConfig::Boundary { m1: self.m - m0, m0, gamma: None }
            }
            _ => AchievingConfig::Boundary { m1, m0, gamma },
        }
    }

    pub fn p_max(&self, k: usize) -> Result<WorstCaseResult> {
        self.evaluate(k, None)
    }

    /// Like [`WorstCase::p_max`] but may stop as soon as some branch exceeds
    /// `stop_above`; enough to decide `p_max > stop_above`.
    pub fn exceeds(&self, k: usize, stop_above: f64) -> Result<WorstCaseResult> {
        self.evaluate(k, Some(stop_above))
    }

    fn evaluate(&self, k: usize, stop_above: Option<f64>) -> Result<WorstCaseResult> {
        HeterogeneitySpec::new(self.m, k, self.rho)?;
        let m = self.m;
        let (p0, active) = p_zero_treated(m, self.c)?;
        let scaled = self.c * (m as f64).sqrt();
        let degenerate = (scaled - 1.0).abs() <= 4.0 * f64::EPSILON;
        let mut result = WorstCaseResult {
            value: p0,
            achieving_config: match active {
                Some(j) => AchievingConfig::ZeroTreated { active: j },
                None => AchievingConfig::BelowThreshold,
            },
            zero_treated_value: p0,
            branches: Vec::new(),
            optimizations: 0,
            degenerate,
            early_exit: false,
        };
        if scaled <= 1.0 || degenerate {
            result.value = 1.0;
            result.achieving_config = AchievingConfig::BelowThreshold;
            return Ok(result);
        }
        if self.rho == 0.0 {
            return Ok(result);
        }
        if let Some(th) = stop_above {
            if p0 > th {
                result.early_exit = true;
                return Ok(result);
            }
        }

        let keys = self.keys(k);
        let outcomes: Vec<(BranchKey, TildeResult)> = match stop_above {
            None => keys
                .par_iter()
                .map(|&key| self.branch(key).map(|r| (key, r)))
                .collect::<Result<_>>()?,
            Some(th) => {
                let mut out = Vec::with_capacity(keys.len());
                for key in keys {
                    let r = self.branch(key)?;
                    out.push((key, r));
                    if r.value > th {
                        result.early_exit = true;
                        break;
                    }
                }
                out
            }
        };

        let mut best: Option<(f64, AchievingConfig)> = None;
        for ((m1, m0, _), r) in &outcomes {
            if r.gamma.is_some() {
                result.optimizations += 1;
            }
            result.branches.push(BranchTrace {
                m1: *m1,
                m0: *m0,
                lower: r.lower,
                gamma: r.gamma,
                value: r.value,
                evaluations: r.evaluations,
            });
            // Earlier branches win ties up to rounding.
            if best.map_or(true, |(v, _)| r.value > v + TIE_TOL) {
                best = Some((r.value, self.canonical(*m1, *m0, r.gamma)));
            }
        }
        if let Some((v, cfg)) = best {
            // Ties go to the boundary branch.
            if v >= p0 {
                result.value = v;
                result.achieving_config = cfg;
            }
        }
        Ok(result)
    }
}

/// `p_m(c; k, ρ)`.
pub fn p_max(
    c: f64,
    spec: &HeterogeneitySpec,
    settings: &QuadratureSettings,
) -> Result<WorstCaseResult> {
    spec.validate()?;
    WorstCase::new(spec.m, c, spec.rho, *settings)?.p_max(spec.k)
}
