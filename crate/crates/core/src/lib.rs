//! Worst-case calibrated t-tests with one treated cluster and a handful of
//! controls.

pub mod charpoly;
pub mod critical;
pub mod designs;
pub mod error;
pub mod inference;
pub mod mc;
pub mod quadrature;
pub mod rejection;
pub mod solve;
pub mod special;
pub mod worst_case;

pub use charpoly::{g_value, negative_root, theta_lower_bound, GammaConfig, NegativeRoot};
pub use error::{Error, Result};
pub use rejection::{rejection_probability, QuadratureSettings};
pub use special::{normal_cdf, normal_quantile, t_quantile, t_two_sided_tail, TailQuery};
pub use worst_case::{p_bar, p_max, p_tilde, p_zero_treated, AchievingConfig, HeterogeneitySpec, WorstCase, WorstCaseResult};
pub use critical::{alpha_underline, c_underline, critical_value, generate_table, h_bar, one_sided_critical_value, CriticalValueResult, Method};
pub use designs::{extract, parse_panel_csv, DesignKind, Extraction, PanelData, PanelRow};
pub use inference::{
    confidence_interval, large_m_approx_power, p_value, power_lower_bound, rho_frontier, t_statistic,
    test, ClusterEstimates, FrontierBound, RhoFrontier, Sided, TestReport,
};
pub use mc::{MCConfig, MCResult};
