//! Shared invariant properties. `invariants.rs` runs each one as its own
//! test; the acceptance suite runs them all and reports a single line.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use statrs::distribution::{ContinuousCDF, StudentsT};

use stc_core::critical::optimized_critical_value;
use stc_core::designs::{DesignKind, PanelData, PanelRow};
use stc_core::mc::{self, Design, MCConfig, TestSpec};
use stc_core::rejection::rejection_probability_estimate;
use stc_core::special::t_cdf;
use stc_core::{
    alpha_underline, c_underline, critical_value, extract, g_value, negative_root, p_max,
    rejection_probability, t_quantile, theta_lower_bound,
    ClusterEstimates, GammaConfig, HeterogeneitySpec, QuadratureSettings, Sided,
};

pub type Check = Result<(), String>;

pub fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

/// Deterministic proptest runner.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Check {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// Two-sided Student-t tail from an independent implementation.
pub fn t_tail_oracle(dof: u64, x: f64) -> f64 {
    let d = StudentsT::new(0.0, 1.0, dof as f64).unwrap();
    2.0 * d.sf(x.abs())
}

/// Equal-ratio rejection probability: all `m` controls at `gamma`.
pub fn equal_ratio_oracle(m: usize, gamma: f64, c: f64) -> f64 {
    t_tail_oracle(m as u64 - 1, c / (gamma.powi(-2) + 1.0 / m as f64).sqrt())
}

pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Ratio vectors with occasional zeros; never all zero.
pub fn gammas(max_m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![1 => Just(0.0), 6 => log_uniform(1e-2, 1e2)],
        2..=max_m,
    )
    .prop_map(|mut g| {
        if g.iter().all(|&x| x == 0.0) {
            g[0] = 1.0;
        }
        g
    })
}

pub fn gamma_config(max_m: usize) -> impl Strategy<Value = GammaConfig> {
    (gammas(max_m), 0.2f64..8.0).prop_map(|(g, c)| GammaConfig::new(g, c).unwrap())
}

fn shuffled(cfg: &GammaConfig) -> impl Strategy<Value = (GammaConfig, GammaConfig)> {
    let c = cfg.c();
    let orig = cfg.clone();
    Just(cfg.gammas().to_vec())
        .prop_shuffle()
        .prop_map(move |g| (orig.clone(), GammaConfig::new(g, c).unwrap()))
}

// ---- special functions ----

pub fn quantile_round_trip() -> Check {
    run(400, (1u64..=60, 0.55f64..0.9995), |(dof, p)| {
        let q = t_quantile(dof, p).unwrap();
        let back = t_cdf(dof, q).unwrap();
        prop_assert!((back - p).abs() <= 1e-9, "dof {dof} p {p}: cdf(q) = {back}");
        Ok(())
    })
}

pub fn quantile_symmetry() -> Check {
    run(400, (1u64..=60, 0.55f64..0.9995), |(dof, p)| {
        let hi = t_quantile(dof, p).unwrap();
        let lo = t_quantile(dof, 1.0 - p).unwrap();
        prop_assert!((hi + lo).abs() <= 1e-12 * hi.abs().max(1.0), "dof {dof} p {p}: {hi} vs {lo}");
        Ok(())
    })
}

pub fn tail_monotone_in_c() -> Check {
    run(100, 1u64..=60, |dof| {
        let mut prev = 1.0;
        for i in 1..=400 {
            let c = 0.05 * i as f64;
            let tail = stc_core::t_two_sided_tail(stc_core::TailQuery::new(dof, c).unwrap());
            if prev > 1e-250 {
                prop_assert!(tail < prev, "dof {dof}: tail({c}) = {tail} not below {prev}");
            }
            prev = tail;
        }
        Ok(())
    })
}

// ---- characteristic polynomial ----

pub fn root_residual() -> Check {
    run(1000, gamma_config(40), |cfg| {
        let root = negative_root(&cfg).map_err(|e| fail(e.to_string()))?;
        let m = cfg.m() as f64;
        let (lo, hi) = (m, m + cfg.max_gamma_sq());
        let scale = (0..=64)
            .map(|i| g_value(&cfg, -(lo + (hi - lo) * i as f64 / 64.0)).abs())
            .fold(0.0f64, f64::max);
        let g = g_value(&cfg, -root.abs_value);
        prop_assert!(g.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE), "g = {g}, scale = {scale}");
        Ok(())
    })
}

pub fn root_above_lower_bounds() -> Check {
    run(300, gamma_config(30), |cfg| {
        let root = negative_root(&cfg).unwrap().abs_value;
        for k in 1..=cfg.m() {
            let lb = theta_lower_bound(&cfg, k).unwrap();
            prop_assert!(root >= lb * (1.0 - 1e-12), "k {k}: root {root} < bound {lb}");
        }
        Ok(())
    })
}

pub fn root_in_bracket() -> Check {
    run(500, gamma_config(40), |cfg| {
        let root = negative_root(&cfg).unwrap().abs_value;
        let m = cfg.m() as f64;
        let hi = m + cfg.max_gamma_sq();
        prop_assert!(root >= m * (1.0 - 1e-14) && root <= hi * (1.0 + 1e-14), "{root} outside [{m}, {hi}]");
        Ok(())
    })
}

pub fn root_permutation_invariant() -> Check {
    run(300, gamma_config(30).prop_flat_map(|c| shuffled(&c)), |(a, b)| {
        let ra = negative_root(&a).unwrap().abs_value;
        let rb = negative_root(&b).unwrap().abs_value;
        prop_assert!((ra - rb).abs() <= 1e-13 * ra, "{ra} vs {rb}");
        Ok(())
    })
}

// ---- rejection probability ----

pub fn rejection_decreasing_in_c() -> Check {
    run(60, (gammas(20), 0.0f64..1.0, 0.01f64..2.0), |(g, u, d)| {
        let floor = (g.len() as f64).powf(-0.5);
        let c1 = floor * (1.0 + 1e-3) + 4.0 * u;
        let c2 = c1 + d;
        let p1 = rejection_probability(&GammaConfig::new(g.clone(), c1).unwrap(), &settings()).unwrap();
        let p2 = rejection_probability(&GammaConfig::new(g, c2).unwrap(), &settings()).unwrap();
        prop_assert!(p1 >= p2 - 1e-12, "P({c1}) = {p1} < P({c2}) = {p2}");
        if p2 > 1e-10 && p1 < 1.0 - 1e-10 {
            prop_assert!(p1 > p2, "not strict: P({c1}) = {p1}, P({c2}) = {p2}");
        }
        Ok(())
    })
}

pub fn rejection_permutation_invariant() -> Check {
    run(60, gamma_config(20).prop_flat_map(|c| shuffled(&c)), |(a, b)| {
        let pa = rejection_probability(&a, &settings()).unwrap();
        let pb = rejection_probability(&b, &settings()).unwrap();
        prop_assert!((pa - pb).abs() <= 1e-12, "{pa} vs {pb}");
        Ok(())
    })
}

pub fn rejection_in_unit_interval_and_converged() -> Check {
    run(60, gamma_config(30), |cfg| {
        let est = rejection_probability_estimate(&cfg, &settings()).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.value), "value {}", est.value);
        prop_assert!(est.within_tolerance, "doubling moved the value by {}", est.error_estimate);
        Ok(())
    })
}

/// `P[T > c]` from the simulator against half the analytic two-sided value.
pub fn one_sided_halving() -> Check {
    run(6, (gammas(12), 0.5f64..3.0, any::<u64>()), |(g, c, seed)| {
        let p = rejection_probability(&GammaConfig::new(g.clone(), c).unwrap(), &settings()).unwrap();
        let raw = mc::raw_rejection(&g, 1.0, c, 200_000, seed).unwrap();
        let se = (0.5 * p * (1.0 - 0.5 * p) / raw.reps as f64).sqrt().max(1e-6);
        prop_assert!((raw.upper - 0.5 * p).abs() <= 4.0 * se, "upper {} vs {}", raw.upper, 0.5 * p);
        Ok(())
    })
}

// ---- worst case ----

fn wc_spec() -> impl Strategy<Value = (usize, usize, f64, f64)> {
    (3usize..=9).prop_flat_map(|m| {
        let floor = (m as f64).powf(-0.5);
        (Just(m), 1..=3usize.min(m), 0.2f64..3.0, (floor * 1.05)..6.0)
    })
}

fn pm(m: usize, k: usize, rho: f64, c: f64) -> f64 {
    p_max(c, &HeterogeneitySpec::new(m, k, rho).unwrap(), &settings()).unwrap().value
}

pub fn p_max_monotone_in_rho() -> Check {
    run(20, (wc_spec(), 0.05f64..1.5), |((m, k, rho, c), d)| {
        let (a, b) = (pm(m, k, rho, c), pm(m, k, rho + d, c));
        prop_assert!(a <= b + 1e-7, "m {m} k {k} c {c}: rho {rho} -> {a}, rho {} -> {b}", rho + d);
        Ok(())
    })
}

pub fn p_max_monotone_in_k() -> Check {
    run(20, wc_spec(), |(m, k, rho, c)| {
        if k < m {
            let (a, b) = (pm(m, k, rho, c), pm(m, k + 1, rho, c));
            prop_assert!(a <= b + 1e-7, "m {m} rho {rho} c {c}: k {k} -> {a}, k+1 -> {b}");
        }
        Ok(())
    })
}

pub fn p_max_nonincreasing_in_c() -> Check {
    run(20, (wc_spec(), 0.01f64..1.0), |((m, k, rho, c), d)| {
        let (a, b) = (pm(m, k, rho, c), pm(m, k, rho, c + d));
        prop_assert!(b <= a + 1e-7, "m {m} k {k} rho {rho}: c {c} -> {a}, c+d -> {b}");
        Ok(())
    })
}

/// Ratios with the `k`-th smallest at least `1/ρ`.
fn feasible(m: usize, k: usize, rho: f64) -> impl Strategy<Value = Vec<f64>> {
    let r = 1.0 / rho;
    (
        prop::collection::vec(prop_oneof![Just(0.0), 0.0..5.0 * r], k - 1),
        prop::collection::vec(prop_oneof![Just(r), log_uniform(r, 50.0 * r)], m - k + 1),
    )
        .prop_map(|(mut a, b)| {
            a.extend(b);
            a
        })
}

pub fn p_max_dominates_feasible() -> Check {
    let specs = [(5, 1, 1.0, 3.041), (6, 2, 0.7, 1.8), (8, 3, 2.0, 4.0), (4, 1, 0.4, 1.2)];
    for (m, k, rho, c) in specs {
        let top = pm(m, k, rho, c);
        run(50, feasible(m, k, rho), |g| {
            let p = rejection_probability(&GammaConfig::new(g.clone(), c).unwrap(), &settings()).unwrap();
            prop_assert!(p <= top + 1e-6, "{g:?}: {p} above p_max {top}");
            Ok(())
        })?;
    }
    Ok(())
}

pub fn k1_closed_form_consistency() -> Check {
    run(25, (4usize..=30, 0.2f64..5.0, 0.0f64..3.0), |(m, rho, u)| {
        let c = c_underline(m, rho).unwrap() + u;
        let got = pm(m, 1, rho, c);
        let want = t_tail_oracle(m as u64 - 1, c / (rho * rho + 1.0 / m as f64).sqrt());
        prop_assert!((got - want).abs() <= 1e-6, "m {m} rho {rho} c {c}: {got} vs {want}");
        Ok(())
    })
}

// ---- critical values ----

pub fn closed_form_matches_optimized() -> Check {
    run(10, (4usize..=25, 0.3f64..5.0, 0.2f64..1.0), |(m, rho, u)| {
        let alpha = u * alpha_underline(m, rho).unwrap().min(0.49);
        let spec = HeterogeneitySpec::new(m, 1, rho).unwrap();
        let a = critical_value(alpha, &spec, &settings()).unwrap();
        let b = optimized_critical_value(alpha, &spec, &settings()).unwrap();
        prop_assert!((a.cv - b.cv).abs() <= 5e-5, "m {m} rho {rho} alpha {alpha}: {} vs {}", a.cv, b.cv);
        Ok(())
    })
}

fn cv(alpha: f64, m: usize, k: usize, rho: f64) -> f64 {
    critical_value(alpha, &HeterogeneitySpec::new(m, k, rho).unwrap(), &settings()).unwrap().cv
}

pub fn cv_monotone() -> Check {
    let ms = prop::sample::select(vec![5usize, 10, 15, 20]);
    let alphas = prop::sample::select(vec![0.01, 0.05]);
    run(10, (ms, alphas, 0.2f64..4.0, 0.1f64..1.0), |(m, alpha, rho, d)| {
        for k in 1..=2 {
            let base = cv(alpha, m, k, rho);
            let up_rho = cv(alpha, m, k, rho + d);
            let up_m = cv(alpha, m + 5, k, rho);
            prop_assert!(up_rho >= base - 1e-4, "rho: {base} -> {up_rho}");
            prop_assert!(up_m <= base + 1e-4, "m: {base} -> {up_m}");
        }
        prop_assert!(cv(alpha, m, 2, rho) >= cv(alpha, m, 1, rho) - 1e-4, "k");
        Ok(())
    })
}

pub fn inversion_residual() -> Check {
    let alphas = prop::sample::select(vec![0.01, 0.05, 0.1]);
    run(12, (3usize..=15, 1usize..=2, 0.2f64..4.0, alphas), |(m, k, rho, alpha)| {
        let spec = HeterogeneitySpec::new(m, k, rho).unwrap();
        let r = match critical_value(alpha, &spec, &settings()) {
            Ok(r) => r,
            // Small m with small rho can leave no valid level.
            Err(stc_core::Error::NoValidCriticalValue { .. }) => return Ok(()),
            Err(e) => return Err(fail(e.to_string())),
        };
        let p = p_max(r.cv, &spec, &settings()).unwrap().value;
        prop_assert!((p - alpha).abs() <= 2e-4, "m {m} k {k} rho {rho} alpha {alpha}: p_max(cv) = {p}");
        Ok(())
    })
}

// ---- inference ----

fn estimates() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(-5.0f64..5.0, 4..=15), -10.0f64..10.0)
}

pub fn location_scale_invariance() -> Check {
    run(60, (estimates(), -100.0f64..100.0, log_uniform(1e-3, 1e3)), |((xs, y), a, lam)| {
        let m = xs.len();
        let spec = HeterogeneitySpec::new(m, 1, 1.0).unwrap();
        let base = stc_core::test(&ClusterEstimates::new(xs.clone(), y).unwrap(), &spec, 0.05, Sided::TwoSided, &settings()).unwrap();
        for (f, name) in [(Box::new(|v: f64| v + a) as Box<dyn Fn(f64) -> f64>, "shift"), (Box::new(|v: f64| v * lam), "scale")] {
            let est = ClusterEstimates::new(xs.iter().map(|&v| f(v)).collect(), f(y)).unwrap();
            let r = stc_core::test(&est, &spec, 0.05, Sided::TwoSided, &settings()).unwrap();
            prop_assert!((r.t_stat - base.t_stat).abs() <= 1e-9 * base.t_stat.abs().max(1.0), "{name}: {} vs {}", r.t_stat, base.t_stat);
            if (base.t_stat.abs() - base.cv.cv).abs() > 1e-6 {
                prop_assert_eq!(r.reject, base.reject, "{}", name);
            }
        }
        Ok(())
    })
}

pub fn ci_test_duality() -> Check {
    run(60, (estimates(), -15.0f64..15.0), |((xs, y), mu)| {
        let m = xs.len();
        let spec = HeterogeneitySpec::new(m, 1, 1.0).unwrap();
        let est = ClusterEstimates::new(xs.clone(), y).unwrap();
        let (lo, hi) = stc_core::confidence_interval(&est, &spec, 0.05, &settings()).unwrap();
        let shifted = ClusterEstimates::new(xs, y - mu).unwrap();
        let r = stc_core::test(&shifted, &spec, 0.05, Sided::TwoSided, &settings()).unwrap();
        let margin = (mu - lo).abs().min((mu - hi).abs());
        if margin > 1e-9 * (hi - lo) {
            prop_assert_eq!(mu < lo || mu > hi, r.reject, "mu {} interval [{}, {}]", mu, lo, hi);
        }
        Ok(())
    })
}

// ---- designs ----

/// Balanced panel: `clusters` x `units` x `periods`, with the `c` flag
/// alternating across units.
pub fn balanced_panel() -> impl Strategy<Value = (PanelData, usize, usize)> {
    (3usize..=6, 2usize..=4, 2i64..=6).prop_flat_map(|(clusters, units, periods)| {
        let n = clusters * units * periods as usize;
        (
            Just((clusters, units, periods)),
            prop::collection::vec(-10.0f64..10.0, n),
            2..=periods,
        )
            .prop_map(|((clusters, units, periods), ys, post_start)| {
                let mut rows = Vec::with_capacity(ys.len());
                let mut it = ys.into_iter();
                for j in 0..clusters {
                    for u in 0..units {
                        for t in 1..=periods {
                            rows.push(PanelRow {
                                cluster: format!("g{j}"),
                                unit: Some(format!("u{u}")),
                                time: t,
                                outcome: it.next().unwrap(),
                                c: Some(u % 2 == 1),
                            });
                        }
                    }
                }
                (PanelData { rows, treated: "g0".into(), post_start }, clusters, units)
            })
    })
}

fn cluster_rows<'a>(p: &'a PanelData, id: &str) -> Vec<&'a PanelRow> {
    p.rows.iter().filter(|r| r.cluster == id).collect()
}

/// Slope of `y` on a 0/1 regressor via centred cross-products.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn cell_mean(rows: &[&PanelRow], c: bool, post: bool, post_start: i64) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| r.c == Some(c) && (r.time >= post_start) == post).map(|r| r.outcome).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn saturated_exactness() -> Check {
    run(100, balanced_panel(), |(p, clusters, _)| {
        let did = extract(&p, DesignKind::DiD).unwrap();
        let ddd = extract(&p, DesignKind::TripleDiff).unwrap();
        let mut ids: Vec<String> = (0..clusters).map(|j| format!("g{j}")).collect();
        ids.retain(|id| id != "g0");
        for (i, id) in ids.iter().enumerate() {
            let rows = cluster_rows(&p, id);
            let x: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r.time >= p.post_start))).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.outcome).collect();
            let want = ols_slope(&x, &y);
            prop_assert!((did.estimates.controls[i] - want).abs() <= 1e-12 * want.abs().max(10.0), "did {id}");
            let cm = |c, post| cell_mean(&rows, c, post, p.post_start);
            let want = (cm(true, true) - cm(true, false)) - (cm(false, true) - cm(false, false));
            prop_assert!((ddd.estimates.controls[i] - want).abs() <= 1e-12 * want.abs().max(10.0), "ddd {id}");
        }
        Ok(())
    })
}

fn all_kinds() -> [DesignKind; 4] {
    [DesignKind::ClusteredMean, DesignKind::DiD, DesignKind::TwoWayFE, DesignKind::TripleDiff]
}

pub fn row_order_independence() -> Check {
    let strat = balanced_panel().prop_flat_map(|(p, _, _)| {
        let rows = p.rows.clone();
        (Just(p), Just(rows).prop_shuffle())
    });
    run(100, strat, |(p, rows)| {
        let q = PanelData { rows, ..p.clone() };
        for kind in all_kinds() {
            let a = extract(&p, kind).unwrap();
            let b = extract(&q, kind).unwrap();
            for (x, y) in a.estimates.controls.iter().zip(&b.estimates.controls) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(10.0), "{kind:?}");
            }
            prop_assert!((a.estimates.treated - b.estimates.treated).abs() <= 1e-12 * a.estimates.treated.abs().max(10.0));
        }
        Ok(())
    })
}

pub fn fixed_effect_absorption() -> Check {
    run(100, (balanced_panel(), -50.0f64..50.0, 0usize..6), |((p, clusters, _), shift, pick)| {
        let id = format!("g{}", pick % clusters);
        let mut q = p.clone();
        for r in q.rows.iter_mut().filter(|r| r.cluster == id) {
            r.outcome += shift;
        }
        for kind in [DesignKind::DiD, DesignKind::TwoWayFE, DesignKind::TripleDiff] {
            let a = extract(&p, kind).unwrap();
            let b = extract(&q, kind).unwrap();
            let all = |e: &stc_core::Extraction| {
                let mut v = e.estimates.controls.clone();
                v.push(e.estimates.treated);
                v
            };
            for (x, y) in all(&a).iter().zip(all(&b)) {
                prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(100.0), "{kind:?}: {x} vs {y}");
            }
        }
        Ok(())
    })
}

// ---- Monte Carlo ----

pub fn mc_thread_count_independent() -> Check {
    let configs = [
        MCConfig {
            design: Design::NormalMeans { dgp: 2, delta: 0.5, rho: 1.0, m: 8 },
            reps: 4000,
            seed: 11,
            test: TestSpec { alpha: 0.05, k: 1, rho: 1.0 },
        },
        MCConfig {
            design: Design::Twfe { dgp: 4, sigma: 1.0, theta: 1.0, m: 6 },
            reps: 1000,
            seed: 12,
            test: TestSpec { alpha: 0.1, k: 2, rho: 1.0 },
        },
    ];
    for config in configs {
        let results: Vec<_> = [1, 3]
            .iter()
            .map(|&n| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
                pool.install(|| mc::run(&config, &settings()).unwrap())
            })
            .collect();
        if results[0] != results[1] {
            return Err(format!("{:?} vs {:?}", results[0], results[1]));
        }
        let again = mc::run(&config, &settings()).unwrap();
        if again != results[0] {
            return Err("rerun differs".into());
        }
    }
    Ok(())
}

/// Every invariant with its name, for the acceptance report.
pub fn suite() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("quantile_round_trip", quantile_round_trip),
        ("quantile_symmetry", quantile_symmetry),
        ("tail_monotone_in_c", tail_monotone_in_c),
        ("root_residual", root_residual),
        ("root_above_lower_bounds", root_above_lower_bounds),
        ("root_in_bracket", root_in_bracket),
        ("root_permutation_invariant", root_permutation_invariant),
        ("rejection_decreasing_in_c", rejection_decreasing_in_c),
        ("rejection_permutation_invariant", rejection_permutation_invariant),
        ("rejection_in_unit_interval_and_converged", rejection_in_unit_interval_and_converged),
        ("one_sided_halving", one_sided_halving),
        ("p_max_monotone_in_rho", p_max_monotone_in_rho),
        ("p_max_monotone_in_k", p_max_monotone_in_k),
        ("p_max_nonincreasing_in_c", p_max_nonincreasing_in_c),
        ("p_max_dominates_feasible", p_max_dominates_feasible),
        ("k1_closed_form_consistency", k1_closed_form_consistency),
        ("closed_form_matches_optimized", closed_form_matches_optimized),
        ("cv_monotone", cv_monotone),
        ("inversion_residual", inversion_residual),
        ("location_scale_invariance", location_scale_invariance),
        ("ci_test_duality", ci_test_duality),
        ("saturated_exactness", saturated_exactness),
        ("row_order_independence", row_order_independence),
        ("fixed_effect_absorption", fixed_effect_absorption),
        ("mc_thread_count_independent", mc_thread_count_independent),
    ]
}
