//! Cluster-level estimators from panel or cross-section data, and the CSV
//! format they are read from.
//!
//! CSV columns: `cluster,unit,time,outcome,c` in any order; `unit` and `c`
//! may be omitted. Lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::ClusterEstimates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub cluster: String,
    pub unit: Option<String>,
    pub time: i64,
    pub outcome: f64,
    pub c: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    pub rows: Vec<PanelRow>,
    pub treated: String,
    /// First post-treatment period: `Post = 1{time >= post_start}`.
    pub post_start: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    ClusteredMean,
    DiD,
    TwoWayFE,
    TripleDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub estimates: ClusterEstimates,
    /// Control cluster ids, aligned with `estimates.controls`.
    pub control_ids: Vec<String>,
    pub treated_id: String,
    /// `θ̂_{m+1}` minus the mean of the controls.
    pub effect: f64,
}

const COLUMNS: [&str; 5] = ["cluster", "unit", "time", "outcome", "c"];

/// Parses panel CSV. Row numbers in errors are physical line numbers.
pub fn parse_panel_csv<R: Read>(reader: R) -> Result<Vec<PanelRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema { line: 1, message: e.to_string() })?
        .clone();
    let header_line = rdr.position().line().max(1);
    let mut index: [Option<usize>; 5] = [None; 5];
    for (i, h) in headers.iter().enumerate() {
        match COLUMNS.iter().position(|c| *c == h) {
            Some(j) if index[j].is_some() => {
                return Err(Error::Schema { line: header_line, message: format!("duplicate column '{h}'") })
            }
            Some(j) => index[j] = Some(i),
            None => {
                return Err(Error::Schema { line: header_line, message: format!("unknown column '{h}'") })
            }
        }
    }
    for (j, name) in COLUMNS.iter().enumerate() {
        if matches!(j, 0 | 2 | 3) && index[j].is_none() {
            return Err(Error::Schema { line: header_line, message: format!("missing column '{name}'") });
        }
    }

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Schema {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |j: usize| index[j].and_then(|i| record.get(i)).unwrap_or("");
        let bad = |message: String| Error::Schema { line, message };

        let cluster = field(0);
        if cluster.is_empty() {
            return Err(bad("empty cluster id".into()));
        }
        let unit = Some(field(1)).filter(|u| !u.is_empty()).map(str::to_owned);
        let time: i64 = field(2).parse().map_err(|_| bad(format!("time '{}' is not an integer", field(2))))?;
        let outcome: f64 =
            field(3).parse().map_err(|_| bad(format!("outcome '{}' is not a number", field(3))))?;
        if !outcome.is_finite() {
            return Err(bad(format!("outcome '{}' is not finite", field(3))));
        }
        let c = match field(4) {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(bad(format!("c must be 0 or 1, got '{other}'"))),
        };
        rows.push(PanelRow { cluster: cluster.to_owned(), unit, time, outcome, c });
    }
    Ok(rows)
}

/// Writes rows in the column order `cluster,unit,time,outcome,c`.
pub fn write_panel_csv(rows: &[PanelRow]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        let c = match r.c {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        let time = r.time.to_string();
        let outcome = format!("{:?}", r.outcome);
        w.write_record([r.cluster.as_str(), r.unit.as_deref().unwrap_or(""), &time, &outcome, c])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn cluster_estimate(id: &str, rows: &[&PanelRow], kind: DesignKind, post_start: i64) -> Result<f64> {
    let violation = |reason: &str| Error::DesignViolation { cluster: id.to_owned(), reason: reason.to_owned() };
    match kind {
        DesignKind::ClusteredMean => Ok(mean(&rows.iter().map(|r| r.outcome).collect::<Vec<_>>())),
        DesignKind::DiD | DesignKind::TwoWayFE => {
            let (post, pre): (Vec<&&PanelRow>, Vec<&&PanelRow>) = rows.iter().partition(|r| r.time >= post_start);
            if pre.is_empty() || post.is_empty() {
                return Err(violation("needs observations both before and after the post period starts"));
            }
            let post: Vec<f64> = post.iter().map(|r| r.outcome).collect();
            let pre: Vec<f64> = pre.iter().map(|r| r.outcome).collect();
            Ok(mean(&post) - mean(&pre))
        }
        DesignKind::TripleDiff => {
            let mut xtx = [[0.0; 4]; 4];
            let mut xty = [0.0; 4];
            let (mut c0, mut c1) = (false, false);
            for r in rows {
                let c = r.c.ok_or_else(|| violation("triple differences need the c column on every row"))?;
                if c { c1 = true } else { c0 = true }
                let cf = if c { 1.0 } else { 0.0 };
                let p = if r.time >= post_start { 1.0 } else { 0.0 };
                let x = [1.0, cf, p, cf * p];
                for i in 0..4 {
                    xty[i] += x[i] * r.outcome;
                    for j in 0..4 {
                        xtx[i][j] += x[i] * x[j];
                    }
                }
            }
            if !(c0 && c1) {
                return Err(violation("needs units with c = 1 and units with c = 0"));
            }
            let beta = solve4(xtx, xty).ok_or_else(|| Error::RankDeficient { cluster: id.to_owned() })?;
            Ok(beta[3])
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let s: f64 = (i + 1..4).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Per-cluster estimates for the chosen design. Controls are ordered by
/// cluster id.
pub fn extract(data: &PanelData, kind: DesignKind) -> Result<Extraction> {
    let mut by_cluster: BTreeMap<&str, Vec<&PanelRow>> = BTreeMap::new();
    for r in &data.rows {
        by_cluster.entry(r.cluster.as_str()).or_default().push(r);
    }
    let treated_rows = by_cluster
        .remove(data.treated.as_str())
        .ok_or_else(|| Error::InvalidInput(format!("treated cluster '{}' not found", data.treated)))?;
    if by_cluster.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two control clusters, found {}",
            by_cluster.len()
        )));
    }
    let treated = cluster_estimate(&data.treated, &treated_rows, kind, data.post_start)?;
    let mut controls = Vec::with_capacity(by_cluster.len());
    let mut control_ids = Vec::with_capacity(by_cluster.len());
    for (id, rows) in &by_cluster {
        controls.push(cluster_estimate(id, rows, kind, data.post_start)?);
        control_ids.push((*id).to_owned());
    }
    let effect = treated - mean(&controls);
    Ok(Extraction {
        estimates: ClusterEstimates::new(controls, treated)?,
        control_ids,
        treated_id: data.treated.clone(),
        effect,
    })
}
