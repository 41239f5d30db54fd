//! Return panels, summary statistics and rolling tail dependence reports.

pub mod panel;
pub mod report;
pub mod stats;

pub use panel::{load_prices, log_returns, read_prices, Panel, PanelFormat, ReturnPanel};
pub use report::{
    cross_section, run_pair, run_report, table2, write_run, CrossSection, PairConfig, PairReport, RunConfig,
    RunOutput, WindowRecord, MEASURES,
};
pub use stats::{summary_stats, Describe, SummaryTable};
