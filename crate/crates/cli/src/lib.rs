//! The `stc` command line: critical values, tests, p-values, intervals,
//! ρ-frontiers, tables and simulations.
//!
//! Exit codes: 0 success, 2 usage or invalid parameter, 3 no valid
//! critical value or numerical failure, 4 data error.

pub mod grid;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use stc_core::critical::round3;
use stc_core::inference::{frontier_for_t, p_value_for_t, t_statistic};
use stc_core::mc::{self, Design, MCConfig, TestSpec};
use stc_core::{
    alpha_underline, c_underline, critical_value, extract, generate_table, one_sided_critical_value,
    parse_panel_csv, AchievingConfig, DesignKind, Error, FrontierBound, HeterogeneitySpec, Method,
    PanelData, QuadratureSettings, Sided,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Domain(_) => EXIT_USAGE,
            Error::NoValidCriticalValue { .. }
            | Error::NumericalFailure { .. }
            | Error::BracketSignFailure { .. } => EXIT_INFEASIBLE,
            Error::InvalidInput(_)
            | Error::Schema { .. }
            | Error::DesignViolation { .. }
            | Error::RankDeficient { .. } => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<grid::GridError> for CliError {
    fn from(e: grid::GridError) -> Self {
        Self::usage(e.0)
    }
}

#[derive(Debug, Parser)]
#[command(name = "stc", version, about = "Worst-case calibrated t-tests with one treated cluster")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,
    /// Write to this file instead of stdout.
    #[arg(long = "out", global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical value for given (m, alpha, k, rho).
    Cv(CvArgs),
    /// Largest level with a closed-form k = 1 critical value, over a grid.
    MaxAlpha(MaxAlphaArgs),
    /// Worst-case p-value from a t-statistic or from data.
    Pvalue(PvalueArgs),
    /// Full test report from panel data.
    Test(TestArgs),
    /// Confidence interval for the treatment effect.
    Ci(CiArgs),
    /// Lower confidence bounds on rho for every k.
    RhoFrontier(FrontierArgs),
    /// Grid of critical values.
    Table(TableArgs),
    /// Monte Carlo rejection rate of a simulation design.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct HetArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub het: HetArgs,
    #[arg(long)]
    pub one_sided: bool,
}

#[derive(Debug, Args)]
pub struct MaxAlphaArgs {
    #[arg(long)]
    pub ms: String,
    #[arg(long)]
    pub rhos: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignArg {
    Mean,
    Did,
    Twfe,
    Tripled,
}

impl From<DesignArg> for DesignKind {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::Mean => DesignKind::ClusteredMean,
            DesignArg::Did => DesignKind::DiD,
            DesignArg::Twfe => DesignKind::TwoWayFE,
            DesignArg::Tripled => DesignKind::TripleDiff,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub design: DesignArg,
    /// Cluster id of the treated cluster.
    #[arg(long)]
    pub treated: String,
    /// First post-treatment period; required for time-based designs.
    #[arg(long, allow_hyphen_values = true)]
    pub post_start: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Greater,
    Less,
}

fn sided(side: Option<Side>) -> Sided {
    match side {
        None => Sided::TwoSided,
        Some(Side::Greater) => Sided::OneSidedGreater,
        Some(Side::Less) => Sided::OneSidedLess,
    }
}

#[derive(Debug, Args)]
pub struct PvalueArgs {
    /// Observed t-statistic; use with --m instead of data.
    #[arg(long, allow_hyphen_values = true, requires = "m", conflicts_with = "data")]
    pub t: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, requires_all = ["design", "treated"])]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub design: Option<DesignArg>,
    #[arg(long)]
    pub treated: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub post_start: Option<i64>,
    #[command(flatten)]
    pub het: HetArgs,
    #[arg(long, value_enum)]
    pub one_sided: Option<Side>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub het: HetArgs,
    #[arg(long, value_enum)]
    pub one_sided: Option<Side>,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub het: HetArgs,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "0.01,0.05,0.1")]
    pub alpha_list: String,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub alphas: String,
    #[arg(long)]
    pub ms: String,
    #[arg(long)]
    pub rhos: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimDesign {
    Normal,
    Twfe,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub design: SimDesign,
    #[arg(long)]
    pub dgp: u8,
    #[arg(long)]
    pub m: usize,
    /// Test rho; for the normal design also the treated standard deviation.
    /// Defaults to --sigma for the panel design.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    /// Also write per-replication t-statistics to this CSV file.
    #[arg(long)]
    pub reps_csv: Option<PathBuf>,
}

/// Six significant digits, for diagnostics.
pub fn sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ClosedFormK1 => "closed_form_k1",
        Method::Optimized => "optimized",
    }
}

fn sided_name(s: Sided) -> &'static str {
    match s {
        Sided::TwoSided => "two_sided",
        Sided::OneSidedGreater => "one_sided_greater",
        Sided::OneSidedLess => "one_sided_less",
    }
}

fn config_text(c: &AchievingConfig) -> String {
    match c {
        AchievingConfig::BelowThreshold => "below m^-1/2 threshold".into(),
        AchievingConfig::ZeroTreated { active } => format!("zero treated variance, {active} active controls"),
        AchievingConfig::Boundary { m1, m0, gamma } => match gamma {
            Some(g) => format!("{m1} controls at 1/rho, {m0} at zero, rest at gamma = {}", sig6(*g)),
            None => format!("{m1} controls at 1/rho, {m0} at zero"),
        },
    }
}

fn rounded_config(c: AchievingConfig) -> AchievingConfig {
    match c {
        AchievingConfig::Boundary { m1, m0, gamma } => AchievingConfig::Boundary { m1, m0, gamma: gamma.map(sig6) },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutput {
    pub m: usize,
    pub k: usize,
    pub rho: f64,
    pub alpha: f64,
    pub one_sided: bool,
    pub cv: f64,
    pub method: Method,
    pub worst_case_probability: f64,
    pub achieving_config: AchievingConfig,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxAlphaRow {
    pub m: usize,
    pub rho: f64,
    pub c_underline: Option<f64>,
    /// Percent, as tabulated.
    pub alpha_underline_percent: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvalueOutput {
    /// Absent when the control spread is zero.
    pub t_stat: Option<f64>,
    pub m: usize,
    pub k: usize,
    pub rho: f64,
    pub sided: Sided,
    pub p_value: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutput {
    pub design: DesignKind,
    pub treated: String,
    pub m: usize,
    pub alpha: f64,
    pub k: usize,
    pub rho: f64,
    pub effect: f64,
    pub t_stat: Option<f64>,
    pub control_sd: f64,
    pub cv: f64,
    pub method: Method,
    pub p_value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub sided: Sided,
    pub reject: bool,
    pub degenerate: bool,
    pub achieving_config: AchievingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiOutput {
    pub alpha: f64,
    pub effect: f64,
    pub cv: f64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub alpha: f64,
    pub k: usize,
    /// Absent for NA (no rho rejects) and for unbounded frontiers.
    pub rho_hat: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierOutput {
    pub t_stat: Option<f64>,
    pub m: usize,
    pub rows: Vec<FrontierRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCellOutput {
    pub alpha: f64,
    pub m: usize,
    pub rho: f64,
    pub cv: Option<f64>,
    pub method: Option<Method>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOutput {
    pub k: usize,
    pub cells: Vec<TableCellOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub config: MCConfig,
    pub rejections: u64,
    pub reps: u64,
    pub rejection_rate: f64,
    pub se: f64,
    pub cv: f64,
}

fn load(data: &DataArgs) -> Result<stc_core::Extraction, CliError> {
    load_parts(&data.data, data.design, &data.treated, data.post_start)
}

fn load_parts(
    path: &PathBuf,
    design: DesignArg,
    treated: &str,
    post_start: Option<i64>,
) -> Result<stc_core::Extraction, CliError> {
    let kind = DesignKind::from(design);
    let post_start = match (kind, post_start) {
        (DesignKind::ClusteredMean, p) => p.unwrap_or(i64::MIN),
        (_, Some(p)) => p,
        (_, None) => return Err(CliError::usage("--post-start is required for this design")),
    };
    let file = fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let rows = parse_panel_csv(file)?;
    Ok(extract(&PanelData { rows, treated: treated.to_owned(), post_start }, kind)?)
}

fn spec(m: usize, het: &HetArgs) -> Result<HeterogeneitySpec, CliError> {
    Ok(HeterogeneitySpec::new(m, het.k, het.rho)?)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output structs serialise");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), |v| v.to_string())
}

fn cell3(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), |v| format!("{:.3}", round3(v)))
}

/// Executes a parsed command and returns the rendered output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let settings = QuadratureSettings::default();
    let fmt = cli.output;
    match &cli.command {
        Command::Cv(a) => {
            let spec = spec(a.m, &a.het)?;
            let r = if a.one_sided {
                one_sided_critical_value(a.alpha, &spec, &settings)?
            } else {
                critical_value(a.alpha, &spec, &settings)?
            };
            let out = CvOutput {
                m: a.m,
                k: a.het.k,
                rho: a.het.rho,
                alpha: a.alpha,
                one_sided: a.one_sided,
                cv: round3(r.cv),
                method: r.method,
                worst_case_probability: sig6(r.worst_case.value),
                achieving_config: rounded_config(r.worst_case.achieving_config),
                iterations: r.iterations,
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv => csv_text(
                    &["m", "k", "rho", "alpha", "one_sided", "cv", "method"],
                    &[vec![
                        out.m.to_string(),
                        out.k.to_string(),
                        out.rho.to_string(),
                        out.alpha.to_string(),
                        out.one_sided.to_string(),
                        format!("{:.3}", out.cv),
                        method_name(out.method).into(),
                    ]],
                ),
                Format::Text => format!(
                    "cv = {:.3}\nmethod = {}\nworst-case rejection probability = {}\nattained at: {}\n",
                    out.cv,
                    method_name(out.method),
                    out.worst_case_probability,
                    config_text(&out.achieving_config)
                ),
            })
        }
        Command::MaxAlpha(a) => {
            let ms = grid::parse_int_grid(&a.ms)?;
            let rhos = grid::parse_grid(&a.rhos)?;
            let mut rows = Vec::new();
            for &m in &ms {
                for &rho in &rhos {
                    let row = match (c_underline(m, rho), alpha_underline(m, rho)) {
                        (Ok(c), Ok(al)) => MaxAlphaRow {
                            m,
                            rho,
                            c_underline: Some(sig6(c)),
                            alpha_underline_percent: Some(round3(100.0 * al)),
                            error: None,
                        },
                        (Err(e), _) | (_, Err(e)) => MaxAlphaRow {
                            m,
                            rho,
                            c_underline: None,
                            alpha_underline_percent: None,
                            error: Some(e.to_string()),
                        },
                    };
                    rows.push(row);
                }
            }
            Ok(match fmt {
                Format::Json => json(&rows),
                Format::Csv | Format::Text => {
                    // Rows are m, columns rho, cells alpha_underline in percent.
                    let mut header = vec!["m".to_owned()];
                    header.extend(rhos.iter().map(|r| r.to_string()));
                    let body: Vec<Vec<String>> = ms
                        .iter()
                        .enumerate()
                        .map(|(i, m)| {
                            let mut line = vec![m.to_string()];
                            line.extend(
                                rows[i * rhos.len()..(i + 1) * rhos.len()]
                                    .iter()
                                    .map(|r| cell3(r.alpha_underline_percent)),
                            );
                            line
                        })
                        .collect();
                    let h: Vec<&str> = header.iter().map(String::as_str).collect();
                    csv_text(&h, &body)
                }
            })
        }
        Command::Pvalue(a) => {
            let (t, m, degenerate_t) = match (a.t, &a.data) {
                (Some(t), None) => (t, a.m.ok_or_else(|| CliError::usage("--m is required with --t"))?, false),
                (None, Some(path)) => {
                    let design = a.design.ok_or_else(|| CliError::usage("--design is required with --data"))?;
                    let treated = a.treated.as_deref().ok_or_else(|| CliError::usage("--treated is required"))?;
                    let ex = load_parts(path, design, treated, a.post_start)?;
                    let st = t_statistic(&ex.estimates)?;
                    (st.t, ex.estimates.m(), st.degenerate)
                }
                _ => return Err(CliError::usage("give either --t with --m, or --data")),
            };
            let spec = spec(m, &a.het)?;
            let s = sided(a.one_sided);
            let p = p_value_for_t(t, &spec, s, &settings)?;
            let out = PvalueOutput {
                t_stat: finite(t).map(sig6),
                m,
                k: spec.k,
                rho: spec.rho,
                sided: s,
                p_value: sig6(p.value),
                degenerate: p.degenerate || degenerate_t,
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv => csv_text(
                    &["t_stat", "m", "k", "rho", "sided", "p_value", "degenerate"],
                    &[vec![
                        opt(out.t_stat),
                        m.to_string(),
                        out.k.to_string(),
                        out.rho.to_string(),
                        sided_name(s).into(),
                        out.p_value.to_string(),
                        out.degenerate.to_string(),
                    ]],
                ),
                Format::Text => format!(
                    "t = {}\np-value = {}{}\n",
                    opt(out.t_stat),
                    out.p_value,
                    if out.degenerate { " (degenerate: zero control spread)" } else { "" }
                ),
            })
        }
        Command::Test(a) => {
            let ex = load(&a.data)?;
            let m = ex.estimates.m();
            let spec = spec(m, &a.het)?;
            let s = sided(a.one_sided);
            let r = stc_core::test(&ex.estimates, &spec, a.alpha, s, &settings)?;
            let out = TestOutput {
                design: a.data.design.into(),
                treated: ex.treated_id.clone(),
                m,
                alpha: a.alpha,
                k: spec.k,
                rho: spec.rho,
                effect: sig6(r.effect),
                t_stat: finite(r.t_stat).map(sig6),
                control_sd: sig6(r.control_sd),
                cv: round3(r.cv.cv),
                method: r.cv.method,
                p_value: sig6(r.p_value),
                ci_low: r.ci.low.map(sig6),
                ci_high: r.ci.high.map(sig6),
                sided: s,
                reject: r.reject,
                degenerate: r.degenerate,
                achieving_config: rounded_config(r.cv.worst_case.achieving_config),
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv => csv_text(
                    &["m", "effect", "t_stat", "control_sd", "cv", "p_value", "ci_low", "ci_high", "sided", "reject"],
                    &[vec![
                        m.to_string(),
                        out.effect.to_string(),
                        opt(out.t_stat),
                        out.control_sd.to_string(),
                        format!("{:.3}", out.cv),
                        out.p_value.to_string(),
                        opt(out.ci_low),
                        opt(out.ci_high),
                        sided_name(s).into(),
                        out.reject.to_string(),
                    ]],
                ),
                Format::Text => {
                    let mut t = String::new();
                    let _ = writeln!(t, "controls m = {m}, treated = {}", out.treated);
                    let _ = writeln!(t, "effect = {}", out.effect);
                    let _ = writeln!(t, "t = {}", opt(out.t_stat));
                    let _ = writeln!(t, "cv = {:.3} ({})", out.cv, method_name(out.method));
                    let _ = writeln!(t, "p-value = {}", out.p_value);
                    let _ = writeln!(t, "interval = [{}, {}]", opt(out.ci_low), opt(out.ci_high));
                    let _ = writeln!(t, "reject = {}", out.reject);
                    let _ = writeln!(t, "worst case: {}", config_text(&out.achieving_config));
                    t
                }
            })
        }
        Command::Ci(a) => {
            let ex = load(&a.data)?;
            let spec = spec(ex.estimates.m(), &a.het)?;
            let st = t_statistic(&ex.estimates)?;
            let cv = critical_value(a.alpha, &spec, &settings)?.cv;
            let out = CiOutput {
                alpha: a.alpha,
                effect: sig6(st.effect),
                cv: round3(cv),
                low: sig6(st.effect - cv * st.control_sd),
                high: sig6(st.effect + cv * st.control_sd),
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv => csv_text(
                    &["alpha", "effect", "cv", "low", "high"],
                    &[vec![
                        out.alpha.to_string(),
                        out.effect.to_string(),
                        format!("{:.3}", out.cv),
                        out.low.to_string(),
                        out.high.to_string(),
                    ]],
                ),
                Format::Text => format!("[{}, {}]\n", out.low, out.high),
            })
        }
        Command::RhoFrontier(a) => {
            let ex = load(&a.data)?;
            let alphas = grid::parse_grid(&a.alpha_list)?;
            let st = t_statistic(&ex.estimates)?;
            let m = ex.estimates.m();
            let mut rows = Vec::new();
            for &alpha in &alphas {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(CliError::usage(format!("alpha must lie in (0, 1), got {alpha}")));
                }
                for (i, b) in frontier_for_t(st.t, m, alpha, &settings)?.iter().enumerate() {
                    let (rho_hat, status) = match b {
                        FrontierBound::NoRejection => (None, "na"),
                        FrontierBound::Finite(r) => (Some(sig6(*r)), "finite"),
                        FrontierBound::Unbounded => (None, "unbounded"),
                    };
                    rows.push(FrontierRow { alpha, k: i + 1, rho_hat, status: status.into() });
                }
            }
            let out = FrontierOutput { t_stat: finite(st.t).map(sig6), m, rows };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv | Format::Text => {
                    let body: Vec<Vec<String>> = out
                        .rows
                        .iter()
                        .map(|r| {
                            let v = match r.status.as_str() {
                                "unbounded" => "Inf".to_owned(),
                                _ => opt(r.rho_hat),
                            };
                            vec![r.alpha.to_string(), r.k.to_string(), v]
                        })
                        .collect();
                    csv_text(&["alpha", "k", "rho_hat"], &body)
                }
            })
        }
        Command::Table(a) => {
            let alphas = grid::parse_grid(&a.alphas)?;
            let ms = grid::parse_int_grid(&a.ms)?;
            let rhos = grid::parse_grid(&a.rhos)?;
            let cells = generate_table(&alphas, &ms, &rhos, a.k, &settings);
            let out = TableOutput {
                k: a.k,
                cells: cells
                    .iter()
                    .map(|c| TableCellOutput {
                        alpha: c.alpha,
                        m: c.m,
                        rho: c.rho,
                        cv: c.cv.map(round3),
                        method: c.method,
                        error: c.error.clone(),
                    })
                    .collect(),
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv | Format::Text => {
                    let mut header = vec!["alpha".to_owned(), "rho".to_owned()];
                    header.extend(ms.iter().map(|m| m.to_string()));
                    let body: Vec<Vec<String>> = out
                        .cells
                        .chunks(ms.len())
                        .map(|row| {
                            let mut line = vec![row[0].alpha.to_string(), row[0].rho.to_string()];
                            line.extend(row.iter().map(|c| cell3(c.cv)));
                            line
                        })
                        .collect();
                    let h: Vec<&str> = header.iter().map(String::as_str).collect();
                    csv_text(&h, &body)
                }
            })
        }
        Command::Simulate(a) => {
            let design = match a.design {
                SimDesign::Normal => {
                    let rho = a.rho.ok_or_else(|| CliError::usage("--rho is required for the normal design"))?;
                    Design::NormalMeans { dgp: a.dgp, delta: a.delta, rho, m: a.m }
                }
                SimDesign::Twfe => Design::Twfe { dgp: a.dgp, sigma: a.sigma, theta: a.theta, m: a.m },
            };
            let test_rho = a.rho.unwrap_or(a.sigma);
            let config = MCConfig {
                design,
                reps: a.reps,
                seed: a.seed,
                test: TestSpec { alpha: a.alpha, k: a.k, rho: test_rho },
            };
            let r = mc::run(&config, &settings)?;
            if let Some(path) = &a.reps_csv {
                let mut body = Vec::with_capacity(a.reps as usize);
                for rep in 0..a.reps {
                    let t = t_statistic(&mc::replicate(&design, a.seed, rep)?)?.t;
                    body.push(vec![rep.to_string(), t.to_string(), (t.abs() > r.cv).to_string()]);
                }
                fs::write(path, csv_text(&["rep", "t_stat", "reject"], &body))
                    .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
            }
            let out = SimulateOutput {
                config,
                rejections: r.rejections,
                reps: r.reps,
                rejection_rate: sig6(r.rejection_rate),
                se: sig6(r.se),
                cv: round3(r.cv),
            };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Csv => csv_text(
                    &["rejections", "reps", "rejection_rate", "se", "cv"],
                    &[vec![
                        out.rejections.to_string(),
                        out.reps.to_string(),
                        out.rejection_rate.to_string(),
                        out.se.to_string(),
                        format!("{:.3}", out.cv),
                    ]],
                ),
                Format::Text => format!(
                    "rejection rate = {} (se {}, {} of {} reps, cv {:.3})\n",
                    out.rejection_rate, out.se, out.rejections, out.reps, out.cv
                ),
            })
        }
    }
}

/// Runs the command and writes its output; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(text) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, text.as_bytes()).map_err(|e| e.to_string()),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    EXIT_DATA
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
