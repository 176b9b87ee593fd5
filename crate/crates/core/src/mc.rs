//! Seeded Monte Carlo replication of the normal-means and two-way
//! fixed-effects simulation designs.
//!
//! Replication `r` draws from ChaCha8 seeded with `seed` on stream `r`, so
//! results do not depend on scheduling or thread count. Rejections are
//! counted as integers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::critical_value;
use crate::designs::{extract, DesignKind, PanelData, PanelRow};
use crate::error::{Error, Result};
use crate::inference::{t_statistic, ClusterEstimates};
use crate::rejection::QuadratureSettings;
use crate::worst_case::HeterogeneitySpec;

pub const TWFE_PERIODS: i64 = 10;
/// Last pre-treatment period; treatment is active for `t > TWFE_T0`.
pub const TWFE_T0: i64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum Design {
    /// Control variances `1` (dgp 1) or `1 + (j-1)/(m-1)` (dgp 2); treated
    /// standard deviation `rho`, mean `delta`.
    NormalMeans { dgp: u8, delta: f64, rho: f64, m: usize },
    /// Panel with AR(1) errors; `sigma` scales the treated cluster's
    /// innovations. dgp 1-3: normal innovations with η = 0.5, 0.1, 0.9;
    /// dgp 4: normalised χ²₂; dgp 5: uniform on `[-√3, √3]` (η = 0.5).
    Twfe { dgp: u8, sigma: f64, theta: f64, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub alpha: f64,
    pub k: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub design: Design,
    pub reps: u64,
    pub seed: u64,
    pub test: TestSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub rejections: u64,
    pub reps: u64,
    pub rejection_rate: f64,
    pub se: f64,
    pub cv: f64,
}

fn binomial(rejections: u64, reps: u64) -> (f64, f64) {
    let p = rejections as f64 / reps as f64;
    (p, (p * (1.0 - p) / reps as f64).sqrt())
}

pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

impl Design {
    pub fn m(&self) -> usize {
        match *self {
            Design::NormalMeans { m, .. } | Design::Twfe { m, .. } => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m < 2 {
            return Err(Error::param(format!("m must be at least 2, got {m}")));
        }
        match *self {
            Design::NormalMeans { dgp, delta, rho, .. } => {
                if !(dgp == 1 || dgp == 2) {
                    return Err(Error::param(format!("normal-means dgp must be 1 or 2, got {dgp}")));
                }
                if !delta.is_finite() || !(rho >= 0.0 && rho.is_finite()) {
                    return Err(Error::param("delta must be finite and rho >= 0"));
                }
            }
            Design::Twfe { dgp, sigma, theta, .. } => {
                if !(1..=5).contains(&dgp) {
                    return Err(Error::param(format!("twfe dgp must be in 1..=5, got {dgp}")));
                }
                if !theta.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param("theta must be finite and sigma > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Control standard deviations for the normal-means design.
pub fn normal_means_sigmas(dgp: u8, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| match dgp {
            1 => 1.0,
            _ => (1.0 + j as f64 / (m as f64 - 1.0)).sqrt(),
        })
        .collect()
}

fn innovation(dgp: u8, rng: &mut ChaCha8Rng) -> f64 {
    match dgp {
        4 => {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (a * a + b * b - 2.0) / 2.0
        }
        5 => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
        _ => rng.sample(StandardNormal),
    }
}

fn ar_coefficient(dgp: u8) -> f64 {
    match dgp {
        2 => 0.1,
        3 => 0.9,
        _ => 0.5,
    }
}

/// One simulated panel. Clusters are named `c001 .. c{m}` for controls and
/// `treated`; the AR(1) error starts at its stationary variance.
pub fn twfe_panel(dgp: u8, sigma: f64, theta: f64, m: usize, rng: &mut ChaCha8Rng) -> PanelData {
    let eta = ar_coefficient(dgp);
    let width = m.to_string().len().max(3);
    let mut rows = Vec::with_capacity((m + 1) * TWFE_PERIODS as usize);
    for j in 1..=m + 1 {
        let treated = j == m + 1;
        let scale = if treated { sigma } else { 1.0 };
        let fe = if 2 * j <= m { 1.0 } else { -1.0 };
        let name = if treated { "treated".to_owned() } else { format!("c{j:0width$}") };
        let mut u = scale * innovation(dgp, rng) / (1.0 - eta * eta).sqrt();
        for t in 1..=TWFE_PERIODS {
            if t > 1 {
                u = eta * u + scale * innovation(dgp, rng);
            }
            let d = if treated && t > TWFE_T0 { 1.0 } else { 0.0 };
            rows.push(PanelRow { cluster: name.clone(), unit: None, time: t, outcome: 1.0 + fe + theta * d + u, c: None });
        }
    }
    PanelData { rows, treated: "treated".into(), post_start: TWFE_T0 + 1 }
}

/// Cluster estimates for replication `rep` of a design.
pub fn replicate(design: &Design, seed: u64, rep: u64) -> Result<ClusterEstimates> {
    let mut rng = rep_rng(seed, rep);
    match *design {
        Design::NormalMeans { dgp, delta, rho, m } => {
            let controls = normal_means_sigmas(dgp, m)
                .iter()
                .map(|s| s * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let treated = delta + rho * rng.sample::<f64, _>(StandardNormal);
            ClusterEstimates::new(controls, treated)
        }
        Design::Twfe { dgp, sigma, theta, m } => {
            Ok(extract(&twfe_panel(dgp, sigma, theta, m, &mut rng), DesignKind::TwoWayFE)?.estimates)
        }
    }
}

/// Rejection frequency of the two-sided test at `config.test`.
pub fn run(config: &MCConfig, settings: &QuadratureSettings) -> Result<MCResult> {
    config.design.validate()?;
    if config.reps == 0 {
        return Err(Error::param("reps must be at least 1"));
    }
    let spec = HeterogeneitySpec::new(config.design.m(), config.test.k, config.test.rho)?;
    let cv = critical_value(config.test.alpha, &spec, settings)?.cv;
    let rejections = count(config.reps, |rep| {
        let est = replicate(&config.design, config.seed, rep)?;
        Ok(t_statistic(&est)?.t.abs() > cv)
    })?;
    let (rate, se) = binomial(rejections, config.reps);
    Ok(MCResult { rejections, reps: config.reps, rejection_rate: rate, se, cv })
}

/// Parallel count of replications for which `event` holds.
pub fn count<F>(reps: u64, event: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|rep| event(rep).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawResult {
    pub reps: u64,
    /// Empirical `P[|T| > c]`.
    pub two_sided: f64,
    pub two_sided_se: f64,
    /// Empirical `P[T > c]`.
    pub upper: f64,
    pub upper_se: f64,
}

/// Empirical rejection rates for explicit standard deviations under the
/// null; `sigma_treated = 0` is allowed.
pub fn raw_rejection(
    sigmas: &[f64],
    sigma_treated: f64,
    c: f64,
    reps: u64,
    seed: u64,
) -> Result<RawResult> {
    if sigmas.len() < 2 {
        return Err(Error::param("need at least two control sigmas"));
    }
    if sigmas.iter().chain([&sigma_treated]).any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::param("sigmas must be finite and >= 0"));
    }
    if reps == 0 {
        return Err(Error::param("reps must be at least 1"));
    }
    let (two, up) = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep);
            let controls: Vec<f64> = sigmas.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)).collect();
            let treated = sigma_treated * rng.sample::<f64, _>(StandardNormal);
            let m = controls.len() as f64;
            let mean = controls.iter().sum::<f64>() / m;
            let ss: f64 = controls.iter().map(|x| (x - mean) * (x - mean)).sum();
            let s = (ss / (m - 1.0)).sqrt();
            let effect = treated - mean;
            // Zero spread only happens with all sigmas zero; treat as no rejection.
            if s == 0.0 {
                return (0u64, 0u64);
            }
            let t = effect / s;
            (u64::from(t.abs() > c), u64::from(t > c))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (two_sided, two_sided_se) = binomial(two, reps);
    let (upper, upper_se) = binomial(up, reps);
    Ok(RawResult { reps, two_sided, two_sided_se, upper, upper_se })
}
