//! Composite Gauss-Legendre rules on `[0, π/2]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One node of a rule on `u ∈ [0, π/2]`, with `sin u` precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub weight: f64,
    pub sin_u: f64,
    pub ln_sin_u: f64,
}

/// Composite rule: `panels` equal panels on `[0, π/2]`, the first of which
/// is replaced by `grading_levels` geometrically shrinking sub-panels
/// (ratio 1/4) toward `u = 0`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<Node>,
}

impl Rule {
    pub fn new(panels: usize, nodes_per_panel: usize, grading_levels: usize) -> Self {
        let (x, w) = gauss_legendre(nodes_per_panel);
        let h = std::f64::consts::FRAC_PI_2 / panels as f64;
        let mut intervals = Vec::with_capacity(panels + grading_levels);
        let mut right = h;
        for _ in 0..grading_levels {
            intervals.push((right / 4.0, right));
            right /= 4.0;
        }
        intervals.push((0.0, right));
        for p in 1..panels {
            intervals.push((p as f64 * h, (p + 1) as f64 * h));
        }
        let mut nodes = Vec::with_capacity(intervals.len() * nodes_per_panel);
        for (a, b) in intervals {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                let u = mid + half * xi;
                let sin_u = u.sin();
                nodes.push(Node { weight: half * wi, sin_u, ln_sin_u: sin_u.ln() });
            }
        }
        Self { nodes }
    }

    /// Shared, lazily built rule for the given shape.
    pub fn cached(panels: usize, nodes_per_panel: usize, grading_levels: usize) -> Arc<Rule> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<Rule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (panels, nodes_per_panel, grading_levels);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(key)
            .or_insert_with(|| Arc::new(Rule::new(panels, nodes_per_panel, grading_levels)))
            .clone()
    }
}
