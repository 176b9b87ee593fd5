//! Test statistic, p-values, confidence intervals, ρ-frontiers and power.

use serde::{Deserialize, Serialize};

use crate::critical::{critical_value, one_sided_critical_value, CriticalValueResult};
use crate::error::{Error, Result};
use crate::rejection::QuadratureSettings;
use crate::special::{normal_cdf, normal_quantile};
use crate::worst_case::{HeterogeneitySpec, WorstCase};

/// Threshold standing in for `c = ∞` when the control spread is zero.
pub const INFINITE_T_PROXY: f64 = 1e6;
const FRONTIER_REL_TOL: f64 = 1e-4;
/// Beyond this ρ the frontier is reported as unbounded.
pub const FRONTIER_RHO_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEstimates {
    pub controls: Vec<f64>,
    pub treated: f64,
}

impl ClusterEstimates {
    pub fn new(controls: Vec<f64>, treated: f64) -> Result<Self> {
        if controls.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two control clusters, got {}",
                controls.len()
            )));
        }
        if !treated.is_finite() || controls.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("cluster estimates must be finite".into()));
        }
        Ok(Self { controls, treated })
    }

    pub fn m(&self) -> usize {
        self.controls.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TStatistic {
    pub t: f64,
    pub effect: f64,
    pub control_sd: f64,
    /// Zero control spread with a nonzero effect; `t` is a signed infinity.
    pub degenerate: bool,
}

pub fn t_statistic(est: &ClusterEstimates) -> Result<TStatistic> {
    let m = est.controls.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!("need at least two control clusters, got {m}")));
    }
    let mean = est.controls.iter().sum::<f64>() / m as f64;
    let ss: f64 = est.controls.iter().map(|x| (x - mean) * (x - mean)).sum();
    let s = (ss / (m as f64 - 1.0)).sqrt();
    let effect = est.treated - mean;
    let (t, degenerate) = if s > 0.0 {
        (effect / s, false)
    } else if effect == 0.0 {
        (0.0, false)
    } else {
        (f64::INFINITY.copysign(effect), true)
    };
    Ok(TStatistic { t, effect, control_sd: s, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sided {
    TwoSided,
    OneSidedGreater,
    OneSidedLess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    /// Computed at [`INFINITE_T_PROXY`] because `t` is infinite.
    pub degenerate: bool,
}

/// Worst-case p-value `p_m(|t|; k, ρ)`, halved for one-sided tests when `t`
/// lies on the tested side and 1 otherwise.
pub fn p_value_for_t(
    t: f64,
    spec: &HeterogeneitySpec,
    sided: Sided,
    settings: &QuadratureSettings,
) -> Result<PValue> {
    spec.validate()?;
    if t.is_nan() {
        return Err(Error::InvalidInput("t-statistic is NaN".into()));
    }
    let degenerate = t.is_infinite();
    let c = if degenerate { INFINITE_T_PROXY } else { t.abs() };
    let two_sided = if c * (spec.m as f64).sqrt() <= 1.0 {
        1.0
    } else {
        WorstCase::new(spec.m, c, spec.rho, *settings)?.p_max(spec.k)?.value
    };
    let value = match sided {
        Sided::TwoSided => two_sided,
        Sided::OneSidedGreater if t > 0.0 => 0.5 * two_sided,
        Sided::OneSidedLess if t < 0.0 => 0.5 * two_sided,
        _ => 1.0,
    };
    Ok(PValue { value, degenerate })
}

pub fn p_value(
    est: &ClusterEstimates,
    spec: &HeterogeneitySpec,
    sided: Sided,
    settings: &QuadratureSettings,
) -> Result<PValue> {
    check_m(est, spec)?;
    p_value_for_t(t_statistic(est)?.t, spec, sided, settings)
}

fn check_m(est: &ClusterEstimates, spec: &HeterogeneitySpec) -> Result<()> {
    if est.m() != spec.m {
        return Err(Error::InvalidInput(format!(
            "{} control estimates but m = {}",
            est.m(),
            spec.m
        )));
    }
    Ok(())
}

/// Interval endpoints; `None` marks an unbounded side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: Option<f64>,
    pub high: Option<f64>,
}

fn interval(stat: &TStatistic, cv: f64, sided: Sided) -> Interval {
    let half = cv * stat.control_sd;
    match sided {
        Sided::TwoSided => Interval { low: Some(stat.effect - half), high: Some(stat.effect + half) },
        Sided::OneSidedGreater => Interval { low: Some(stat.effect - half), high: None },
        Sided::OneSidedLess => Interval { low: None, high: Some(stat.effect + half) },
    }
}

/// Two-sided `(1 - alpha)` interval `effect ± cv · S`.
pub fn confidence_interval(
    est: &ClusterEstimates,
    spec: &HeterogeneitySpec,
    alpha: f64,
    settings: &QuadratureSettings,
) -> Result<(f64, f64)> {
    check_m(est, spec)?;
    let stat = t_statistic(est)?;
    let cv = critical_value(alpha, spec, settings)?;
    let half = cv.cv * stat.control_sd;
    Ok((stat.effect - half, stat.effect + half))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub t_stat: f64,
    pub effect: f64,
    pub control_sd: f64,
    pub cv: CriticalValueResult,
    pub p_value: f64,
    pub ci: Interval,
    pub sided: Sided,
    pub reject: bool,
    pub degenerate: bool,
}

pub fn test(
    est: &ClusterEstimates,
    spec: &HeterogeneitySpec,
    alpha: f64,
    sided: Sided,
    settings: &QuadratureSettings,
) -> Result<TestReport> {
    check_m(est, spec)?;
    let stat = t_statistic(est)?;
    let cv = match sided {
        Sided::TwoSided => critical_value(alpha, spec, settings)?,
        _ => one_sided_critical_value(alpha, spec, settings)?,
    };
    let reject = match sided {
        Sided::TwoSided => stat.t.abs() > cv.cv,
        Sided::OneSidedGreater => stat.t > cv.cv,
        Sided::OneSidedLess => stat.t < -cv.cv,
    };
    let p = p_value_for_t(stat.t, spec, sided, settings)?;
    Ok(TestReport {
        t_stat: stat.t,
        effect: stat.effect,
        control_sd: stat.control_sd,
        ci: interval(&stat, cv.cv, sided),
        cv,
        p_value: p.value,
        sided,
        reject,
        degenerate: stat.degenerate || p.degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rho", rename_all = "snake_case")]
pub enum FrontierBound {
    /// Not even `ρ = 0` rejects; reported as NA.
    NoRejection,
    Finite(f64),
    /// Rejection persists up to [`FRONTIER_RHO_CAP`].
    Unbounded,
}

impl FrontierBound {
    /// Numeric value of the lower confidence bound on ρ.
    pub fn rho(&self) -> f64 {
        match self {
            FrontierBound::NoRejection => 0.0,
            FrontierBound::Finite(r) => *r,
            FrontierBound::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoFrontier {
    pub alpha: f64,
    /// Entry `k - 1` holds the bound for `k`.
    pub bounds: Vec<FrontierBound>,
    pub t_stat: f64,
}

/// For each `k`, the smallest ρ at which the two-sided test at level `alpha`
/// stops rejecting. Bisection on ρ to relative tolerance `1e-4`; each bound
/// seeds the upper bracket of the next.
pub fn rho_frontier(
    est: &ClusterEstimates,
    alpha: f64,
    settings: &QuadratureSettings,
) -> Result<RhoFrontier> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let stat = t_statistic(est)?;
    let bounds = frontier_for_t(stat.t, est.m(), alpha, settings)?;
    Ok(RhoFrontier { alpha, bounds, t_stat: stat.t })
}

pub fn frontier_for_t(
    t: f64,
    m: usize,
    alpha: f64,
    settings: &QuadratureSettings,
) -> Result<Vec<FrontierBound>> {
    let c = if t.is_infinite() { INFINITE_T_PROXY } else { t.abs() };
    if t.is_nan() {
        return Err(Error::InvalidInput("t-statistic is NaN".into()));
    }
    // p_max(c) > alpha: the test fails to reject at this ρ.
    let no_reject = |k: usize, rho: f64| -> Result<bool> {
        if c * (m as f64).sqrt() <= 1.0 {
            return Ok(true);
        }
        let r = WorstCase::new(m, c, rho, *settings)?.exceeds(k, alpha)?;
        Ok(r.early_exit || r.value > alpha)
    };

    let mut bounds = Vec::with_capacity(m);
    let mut seed: Option<f64> = None;
    for k in 1..=m {
        if no_reject(k, 0.0)? {
            // Larger k only enlarges the worst case, so every later k fails too.
            bounds.resize(m, FrontierBound::NoRejection);
            break;
        }
        let mut lo = 0.0;
        let mut hi = match seed {
            Some(prev) => prev,
            None => 1.0,
        };
        while !no_reject(k, hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > FRONTIER_RHO_CAP {
                break;
            }
        }
        if hi > FRONTIER_RHO_CAP {
            bounds.push(FrontierBound::Unbounded);
            seed = None;
            continue;
        }
        while hi - lo > FRONTIER_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if no_reject(k, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // The lower end keeps the bound conservative.
        bounds.push(FrontierBound::Finite(lo));
        seed = Some(hi);
    }
    Ok(bounds)
}

/// `1 - δ^{-2}[σ²_{m+1} + 2(c² + 1/m)/m · Σ σ_j²]`, clamped to `[0, 1]`.
/// `sigmas` lists the `m` controls followed by the treated cluster.
pub fn power_lower_bound(delta: f64, sigmas: &[f64], c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("delta must be positive, got {delta}")));
    }
    if sigmas.len() < 3 {
        return Err(Error::param("need m >= 2 control sigmas plus the treated sigma"));
    }
    if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::param("sigmas must be finite and >= 0"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("c must be positive, got {c}")));
    }
    let m = (sigmas.len() - 1) as f64;
    let treated = sigmas[sigmas.len() - 1];
    let controls: f64 = sigmas[..sigmas.len() - 1].iter().map(|s| s * s).sum();
    let bound = 1.0 - (treated * treated + 2.0 * (c * c + 1.0 / m) / m * controls) / (delta * delta);
    Ok(bound.clamp(0.0, 1.0))
}

/// Normal approximation to the power for many controls, using the critical
/// value guess `√(mρ²/(m-k+1)) z_{1-α/2}`.
pub fn large_m_approx_power(
    delta: f64,
    sigma_treated: f64,
    sigmas_control: &[f64],
    k: usize,
    rho: f64,
    alpha: f64,
) -> Result<f64> {
    let m = sigmas_control.len();
    HeterogeneitySpec::new(m, k, rho)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(sigma_treated >= 0.0) || sigmas_control.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::param("sigmas must be >= 0"));
    }
    let mf = m as f64;
    let cv = (mf * rho * rho / (mf - k as f64 + 1.0)).sqrt() * normal_quantile(1.0 - alpha / 2.0)?;
    let s = (sigmas_control.iter().map(|x| x * x).sum::<f64>() / mf).sqrt();
    let edge = cv * s;
    if sigma_treated == 0.0 {
        return Ok(if delta.abs() > edge { 1.0 } else { 0.0 });
    }
    let upper = 1.0 - normal_cdf((edge - delta) / sigma_treated);
    let lower = normal_cdf((-edge - delta) / sigma_treated);
    Ok(upper + lower)
}
