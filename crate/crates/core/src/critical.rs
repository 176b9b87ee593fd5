//! Critical values: inversion of the worst-case rejection probability, the
//! closed form available for `k = 1`, and table generation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::Grouped;
use crate::error::{Error, Result};
use crate::rejection::{integrate, QuadratureSettings};
use crate::solve::brent;
use crate::special::{normal_quantile, t_quantile, two_sided_tail};
use crate::worst_case::{
    p_zero_treated, AchievingConfig, HeterogeneitySpec, WorstCase, WorstCaseResult,
};

/// Width of the final bracket on `c`.
pub const CV_TOL: f64 = 5e-5;
const C_UNDERLINE_TOL: f64 = 1e-8;
/// Slack accepted when the warm-start root is already the answer.
const WARM_SLACK: f64 = 1e-9;
const MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedFormK1,
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueResult {
    pub cv: f64,
    pub method: Method,
    pub alpha: f64,
    pub spec: HeterogeneitySpec,
    pub worst_case: WorstCaseResult,
    /// Worst-case evaluations spent in the search.
    pub iterations: usize,
}

fn closed_form_domain_floor(m: usize) -> f64 {
    let mf = m as f64;
    (3.0 * (mf - 1.0) / (mf * (mf - 3.0))).sqrt()
}

fn check_k1_domain(m: usize, rho: f64) -> Result<()> {
    if m < 4 {
        return Err(Error::Domain(format!("closed form needs m >= 4, got {m}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("closed form needs rho > 0, got {rho}")));
    }
    Ok(())
}

/// The decreasing function whose sign change marks where the equal
/// configuration `σ_j = ρ^{-1}` becomes the worst case for `k = 1`.
pub fn h_bar(m: usize, c: f64, rho: f64) -> Result<f64> {
    check_k1_domain(m, rho)?;
    let floor = closed_form_domain_floor(m);
    if !(c > floor && c.is_finite()) {
        return Err(Error::Domain(format!("h_bar needs c > {floor}, got {c}")));
    }
    let mf = m as f64;
    let kappa = mf * c * c / (mf - 1.0);
    let tau = (kappa + 1.0) / (mf * kappa);
    let mr2 = mf * rho * rho;
    let z = 1.0 / (2.0 * (mr2 + 1.0).max(kappa + 2.0));
    let first = (3.0 * (mr2 + 1.0) / (mr2 + kappa + 1.0)).max((2.0 * kappa + 3.0) / (kappa + 1.0));
    let second = (1.0 - tau) / (1.0 - tau + ((1.0 - 2.0 * tau) * kappa * z - 0.5).min(0.0));
    Ok(first + second - mf * kappa / (mr2 + kappa + 1.0) - 1.0)
}

/// Smallest `c` from which the closed form holds, by bisection to `1e-8`.
pub fn c_underline(m: usize, rho: f64) -> Result<f64> {
    check_k1_domain(m, rho)?;
    let mut lo = closed_form_domain_floor(m) + 1e-9;
    if h_bar(m, lo, rho)? <= 0.0 {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo.max(1.0);
    let mut doublings = 0;
    while h_bar(m, hi, rho)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::NumericalFailure {
                context: "c_underline",
                detail: format!("h_bar stays positive up to c = {hi}"),
            });
        }
    }
    while hi - lo > C_UNDERLINE_TOL {
        let mid = 0.5 * (lo + hi);
        if h_bar(m, mid, rho)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn equal_scale(m: usize, rho: f64) -> f64 {
    (rho * rho + 1.0 / m as f64).sqrt()
}

/// Largest level for which the closed-form `k = 1` critical value is valid.
pub fn alpha_underline(m: usize, rho: f64) -> Result<f64> {
    let c = c_underline(m, rho)?;
    Ok(two_sided_tail(m as u64 - 1, c / equal_scale(m, rho)))
}

/// Normal-approximation guess `√(m/(m-k+1)) ρ z_{1-α/2}`, used to seed
/// brackets only.
pub fn large_m_guess(alpha: f64, spec: &HeterogeneitySpec) -> Result<f64> {
    spec.validate()?;
    let (m, k) = (spec.m as f64, spec.k as f64);
    Ok((m / (m - k + 1.0)).sqrt() * spec.rho * normal_quantile(1.0 - alpha / 2.0)?)
}

fn check_alpha(alpha: f64, upper: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < upper) {
        return Err(Error::param(format!("alpha must lie in (0, {upper}), got {alpha}")));
    }
    Ok(())
}

pub fn critical_value(
    alpha: f64,
    spec: &HeterogeneitySpec,
    settings: &QuadratureSettings,
) -> Result<CriticalValueResult> {
    spec.validate()?;
    check_alpha(alpha, 0.5)?;
    settings.validate()?;
    let m = spec.m;
    if spec.k == 1 && m >= 4 && spec.rho > 0.0 && alpha <= alpha_underline(m, spec.rho)? {
        let cv = equal_scale(m, spec.rho) * t_quantile(m as u64 - 1, 1.0 - alpha / 2.0)?;
        let worst_case = WorstCaseResult {
            value: alpha,
            achieving_config: AchievingConfig::Boundary { m1: m, m0: 0, gamma: None },
            zero_treated_value: p_zero_treated(m, cv)?.0,
            branches: Vec::new(),
            optimizations: 0,
            degenerate: false,
            early_exit: false,
        };
        return Ok(CriticalValueResult {
            cv,
            method: Method::ClosedFormK1,
            alpha,
            spec: *spec,
            worst_case,
            iterations: 0,
        });
    }
    optimized_critical_value(alpha, spec, settings)
}

/// Inverts `p_max` without the closed-form shortcut.
pub fn optimized_critical_value(
    alpha: f64,
    spec: &HeterogeneitySpec,
    settings: &QuadratureSettings,
) -> Result<CriticalValueResult> {
    spec.validate()?;
    check_alpha(alpha, 0.5)?;
    settings.validate()?;
    let m = spec.m;
    let floor = 1.0 / (m as f64).sqrt() + 1e-6;
    let mut iterations = 0;

    let eval = |c: f64, iterations: &mut usize| -> Result<WorstCaseResult> {
        *iterations += 1;
        WorstCase::new(m, c, spec.rho, *settings)?.exceeds(spec.k, alpha)
    };

    let at_floor = eval(floor, &mut iterations)?;
    if at_floor.value <= alpha && !at_floor.early_exit {
        return Err(Error::NoValidCriticalValue { alpha, floor: at_floor.value });
    }

    // Lower bound: root of the single warm-start configuration, which
    // never exceeds the worst case.
    let warm = warm_root(alpha, spec, settings, floor)?;
    let (mut lo, mut f_lo) = (warm, f64::NAN);
    let first = eval(warm, &mut iterations)?;
    if !first.early_exit && first.value <= alpha + WARM_SLACK {
        return Ok(CriticalValueResult {
            cv: warm,
            method: Method::Optimized,
            alpha,
            spec: *spec,
            worst_case: first,
            iterations,
        });
    }
    if first.value > alpha {
        f_lo = first.value - alpha;
    }
    if f_lo.is_nan() {
        // Within the slack band but above alpha: nudge upward.
        f_lo = f64::MIN_POSITIVE;
    }

    // Expand to an upper bracket with p_max <= alpha.
    let mut step = 0.02 * lo + 1e-3;
    let (mut hi, mut hi_result) = loop {
        let c = lo + step;
        let r = eval(c, &mut iterations)?;
        if !r.early_exit && r.value <= alpha {
            break (c, r);
        }
        lo = c;
        f_lo = r.value - alpha;
        step *= 2.0;
        if iterations > MAX_STEPS {
            return Err(Error::NumericalFailure {
                context: "critical_value",
                detail: format!("no upper bracket found below c = {c}"),
            });
        }
    };
    let mut f_hi = hi_result.value - alpha;

    // Illinois regula falsi, with bisection when the bracket fails to halve.
    let mut side = 0i8;
    let mut force_bisect = false;
    while hi - lo > CV_TOL {
        let width = hi - lo;
        let mut x = if force_bisect || !(f_lo - f_hi).is_normal() {
            0.5 * (lo + hi)
        } else {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        };
        let guard = 0.4 * CV_TOL;
        x = x.clamp(lo + guard, hi - guard);
        let r = eval(x, &mut iterations)?;
        if r.early_exit || r.value > alpha {
            lo = x;
            f_lo = r.value - alpha;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = r.value - alpha;
            hi_result = r;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        force_bisect = hi - lo > 0.5 * width;
        if iterations > MAX_STEPS {
            return Err(Error::NumericalFailure {
                context: "critical_value",
                detail: format!("bracket [{lo}, {hi}] did not shrink"),
            });
        }
    }
    Ok(CriticalValueResult {
        cv: hi,
        method: Method::Optimized,
        alpha,
        spec: *spec,
        worst_case: hi_result,
        iterations,
    })
}

/// Threshold at which the warm-start configuration (k-1 zeros, the rest at
/// `ρ^{-1}`) rejects with probability `alpha`; for `ρ = 0`, where only the
/// zero-treated limit remains, the root of `p_{m,0}`.
fn warm_root(
    alpha: f64,
    spec: &HeterogeneitySpec,
    settings: &QuadratureSettings,
    floor: f64,
) -> Result<f64> {
    let m = spec.m;
    let f = |c: f64| -> f64 {
        let p = if spec.rho == 0.0 {
            p_zero_treated(m, c).map(|r| r.0)
        } else {
            let g = Grouped::from_gammas(m, c, &[(1.0 / spec.rho, m + 1 - spec.k), (0.0, spec.k - 1)]);
            integrate(&g, settings)
        };
        p.map_or(f64::NAN, |p| p - alpha)
    };
    if f(floor) <= 0.0 {
        return Ok(floor);
    }
    let mut hi = floor.max(1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NumericalFailure {
                context: "critical_value",
                detail: "warm-start configuration never drops below alpha".into(),
            });
        }
    }
    Ok(brent(f, floor, hi, 1e-12, 200)?.x)
}

/// Critical value for a one-sided test at level `alpha`: the two-sided one
/// at `2 alpha`.
pub fn one_sided_critical_value(
    alpha: f64,
    spec: &HeterogeneitySpec,
    settings: &QuadratureSettings,
) -> Result<CriticalValueResult> {
    check_alpha(alpha, 0.25)?;
    critical_value(2.0 * alpha, spec, settings)
}

/// Rounds half away from zero to three decimals.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub alpha: f64,
    pub m: usize,
    pub rho: f64,
    pub k: usize,
    pub cv: Option<f64>,
    pub method: Option<Method>,
    pub error: Option<String>,
}

/// One cell per `(alpha, rho, m)` in that order; failures stay in-cell.
pub fn generate_table(
    alphas: &[f64],
    ms: &[usize],
    rhos: &[f64],
    k: usize,
    settings: &QuadratureSettings,
) -> Vec<TableCell> {
    let mut coords = Vec::with_capacity(alphas.len() * ms.len() * rhos.len());
    for &alpha in alphas {
        for &rho in rhos {
            for &m in ms {
                coords.push((alpha, m, rho));
            }
        }
    }
    coords
        .par_iter()
        .map(|&(alpha, m, rho)| {
            let r = HeterogeneitySpec::new(m, k, rho).and_then(|s| critical_value(alpha, &s, settings));
            match r {
                Ok(r) => TableCell { alpha, m, rho, k, cv: Some(r.cv), method: Some(r.method), error: None },
                Err(e) => TableCell { alpha, m, rho, k, cv: None, method: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}
