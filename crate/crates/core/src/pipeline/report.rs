//! Rolling measures per ticker pair, their cross-section, and the run directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use super::panel::{Panel, DATE_FORMAT};
use super::stats::{cross_table, CrossTable, Describe, SummaryTable};
use crate::envelope::linf_range_given_tdc;
use crate::error::{Error, Result};
use crate::estimator::{default_threshold, rolling_estimate, EstimatorConfig, Tail};
use crate::measures::{
    average_tail_dependence, extremal_dependence_coefficient, max_tail_dependence, spearman_ev, tdc,
    Normalization,
};
use crate::tdf::TailDependenceFunction;

/// Per-window measure columns, in output order.
pub const MEASURES: [&str; 5] = ["tdc", "l1", "linf", "spearman_ev", "eps_l"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairConfig {
    pub window: usize,
    pub step: usize,
    pub estimator: EstimatorConfig,
    /// Applied to `l1`, `linf` and the envelope bounds.
    pub normalization: Normalization,
    /// Evaluate measures on the least concave majorant of each estimate.
    pub project: bool,
    /// Keep each window's TDF in the report.
    pub keep_tdf: bool,
}

impl PairConfig {
    /// Daily steps, `k = ⌊√window⌋`, 200 grid intervals, doubled, projected.
    pub fn new(window: usize) -> Self {
        PairConfig {
            window,
            step: 1,
            estimator: EstimatorConfig {
                k: default_threshold(window),
                grid_size: EstimatorConfig::DEFAULT_GRID,
                tail: Tail::Lower,
            },
            normalization: Normalization::Doubled,
            project: true,
            keep_tdf: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRecord {
    /// Date of the last observation in the window.
    pub end: NaiveDate,
    pub tdc: f64,
    pub l1: f64,
    pub linf: f64,
    pub spearman_ev: f64,
    pub eps_l: f64,
    /// Range of `linf` over all admissible TDFs with this window's TDC.
    pub linf_min: f64,
    pub linf_max: f64,
    #[serde(skip)]
    pub tdf: Option<TailDependenceFunction<f64>>,
}

impl WindowRecord {
    /// Looks up one of [`MEASURES`].
    pub fn measure(&self, name: &str) -> Option<f64> {
        Some(match name {
            "tdc" => self.tdc,
            "l1" => self.l1,
            "linf" => self.linf,
            "spearman_ev" => self.spearman_ev,
            "eps_l" => self.eps_l,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub first: String,
    pub second: String,
    pub records: Vec<WindowRecord>,
    /// Number of observations where both series were present.
    pub observations: usize,
    pub grid_size: usize,
}

impl PairReport {
    pub fn name(&self) -> String {
        format!("{}__{}", self.first, self.second)
    }

    pub fn series(&self, measure: &str) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.measure(measure)).collect()
    }

    /// Windows whose `linf` falls outside `[linf_min, linf_max]` widened by `slack`.
    pub fn envelope_violations(&self, slack: f64) -> Vec<NaiveDate> {
        self.records
            .iter()
            .filter(|r| r.linf < r.linf_min - slack || r.linf > r.linf_max + slack)
            .map(|r| r.end)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date"];
        header.extend(MEASURES);
        header.extend(["linf_min", "linf_max"]);
        w.write_record(&header)?;
        for r in &self.records {
            let mut rec = vec![r.end.format(DATE_FORMAT).to_string()];
            rec.extend(
                [r.tdc, r.l1, r.linf, r.spearman_ev, r.eps_l, r.linf_min, r.linf_max].map(|v| v.to_string()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rolling estimation and measures for one pair of return series.
///
/// Only dates where both series are present enter the estimation; windows
/// count those joint observations.
pub fn run_pair(panel: &Panel, first: &str, second: &str, cfg: &PairConfig) -> Result<PairReport> {
    let col = |t: &str| panel.column(t).ok_or_else(|| Error::Data(format!("unknown ticker {t}")));
    let (a, b) = (col(first)?, col(second)?);
    let mut dates = Vec::new();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (t, (va, vb)) in a.iter().zip(b).enumerate() {
        if let (Some(va), Some(vb)) = (va, vb) {
            dates.push(panel.dates()[t]);
            x.push(*va);
            y.push(*vb);
        }
    }
    if x.len() < cfg.window {
        return Err(Error::Data(format!(
            "{first} and {second} overlap on {} dates, fewer than the window {}",
            x.len(),
            cfg.window
        )));
    }
    let rolling = rolling_estimate(&x, &y, cfg.window, cfg.step, &cfg.estimator)?;
    let norm = cfg.normalization;
    let records = rolling
        .estimates
        .into_par_iter()
        .map(|est| {
            let tdf = if cfg.project { est.tdf.concave_majorant()? } else { est.tdf };
            let lambda = tdc(&tdf).value;
            let (linf_min, linf_max) = linf_range_given_tdc(lambda.clamp(0.0, 1.0), norm)?;
            Ok(WindowRecord {
                end: dates[est.start + cfg.window - 1],
                tdc: lambda,
                l1: average_tail_dependence(&tdf, norm).value,
                linf: max_tail_dependence(&tdf, norm).value,
                spearman_ev: spearman_ev(&tdf).value,
                eps_l: extremal_dependence_coefficient(&tdf).value,
                linf_min,
                linf_max,
                tdf: cfg.keep_tdf.then_some(tdf),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairReport {
        first: first.to_string(),
        second: second.to_string(),
        records,
        observations: x.len(),
        grid_size: cfg.estimator.grid_size,
    })
}

/// Per-date statistics of each measure across pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub dates: Vec<NaiveDate>,
    /// `{measure: per-date description}`.
    pub measures: BTreeMap<String, Vec<Describe>>,
}

impl CrossSection {
    pub fn write_csv<W: Write>(&self, measure: &str, out: W) -> Result<()> {
        let rows = self
            .measures
            .get(measure)
            .ok_or_else(|| Error::Data(format!("unknown measure {measure}")))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "mean", "median", "sd", "min", "max", "q05", "q95"])?;
        for (date, d) in self.dates.iter().zip(rows) {
            let mut rec = vec![date.format(DATE_FORMAT).to_string()];
            rec.extend(d.values().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cross-sectional statistics per window date. All reports must cover the
/// same window dates.
pub fn cross_section(reports: &[PairReport]) -> Result<CrossSection> {
    let Some(first) = reports.first() else {
        return Err(Error::Data("cross-section needs at least one report".into()));
    };
    let dates: Vec<NaiveDate> = first.records.iter().map(|r| r.end).collect();
    let offenders: Vec<String> = reports
        .iter()
        .filter(|r| r.records.len() != dates.len() || r.records.iter().zip(&dates).any(|(a, d)| a.end != *d))
        .map(PairReport::name)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Alignment(offenders));
    }
    let mut measures = BTreeMap::new();
    for m in MEASURES {
        let per_date = (0..dates.len())
            .map(|t| {
                let v: Vec<f64> = reports.iter().map(|r| r.records[t].measure(m).expect("known")).collect();
                Describe::of(&v).expect("nonempty")
            })
            .collect();
        measures.insert(m.to_string(), per_date);
    }
    Ok(CrossSection { dates, measures })
}

/// `{measure: {statistic: {aggregate: value}}}`: each pair's time series is
/// summarized, then each statistic is aggregated across pairs.
pub fn table2(reports: &[PairReport]) -> BTreeMap<String, CrossTable> {
    MEASURES
        .iter()
        .map(|m| {
            let described: Vec<Describe> = reports.iter().filter_map(|r| Describe::of(&r.series(m))).collect();
            (m.to_string(), cross_table(&described))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub pair: PairConfig,
    /// Every other selected ticker is paired with this one.
    pub index: String,
    /// Tickers to pair with the index; all others when `None`.
    pub tickers: Option<Vec<String>>,
    pub seed: Option<u64>,
    /// Free-form description of the input, recorded in the manifest.
    pub input: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: RunConfig,
    pub summary: SummaryTable,
    pub reports: Vec<PairReport>,
    pub cross_section: CrossSection,
    pub table2: BTreeMap<String, CrossTable>,
}

/// Runs every (index, ticker) pair of a return panel.
pub fn run_report(returns: &Panel, cfg: &RunConfig) -> Result<RunOutput> {
    if returns.column(&cfg.index).is_none() {
        return Err(Error::Data(format!("index ticker {} not in panel", cfg.index)));
    }
    let tickers: Vec<String> = match &cfg.tickers {
        Some(t) => t.clone(),
        None => returns.tickers().iter().filter(|t| **t != cfg.index).cloned().collect(),
    };
    if tickers.is_empty() {
        return Err(Error::Data("no tickers to pair with the index".into()));
    }
    let reports = tickers
        .par_iter()
        .map(|t| run_pair(returns, &cfg.index, t, &cfg.pair))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: cfg.clone(),
        summary: super::stats::summary_stats(returns, Some(&cfg.index)),
        cross_section: cross_section(&reports)?,
        table2: table2(&reports),
        reports,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    quantile_convention: &'static str,
    pairs: Vec<ManifestPair>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ManifestPair {
    name: String,
    observations: usize,
    windows: usize,
    first_window_end: Option<String>,
    last_window_end: Option<String>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes the run directory:
///
/// ```text
/// manifest.json            configuration and pair overview, no timestamps
/// summary_stats.json       return statistics per series and cross-section
/// pairs/<A>__<B>.csv       per-window measures and L∞ bounds
/// cross_section/<m>.csv    per-date cross-sectional statistics of each measure
/// table2.json              time-series statistics aggregated across pairs
/// ```
pub fn write_run(out_dir: impl AsRef<Path>, run: &RunOutput) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir.join("pairs"))?;
    fs::create_dir_all(dir.join("cross_section"))?;
    let mut files = vec!["summary_stats.json".to_string(), "table2.json".to_string()];
    for r in &run.reports {
        let rel = format!("pairs/{}.csv", r.name());
        r.write_csv(fs::File::create(dir.join(&rel))?)?;
        files.push(rel);
    }
    for m in MEASURES {
        let rel = format!("cross_section/{m}.csv");
        run.cross_section.write_csv(m, fs::File::create(dir.join(&rel))?)?;
        files.push(rel);
    }
    write_json(&dir.join("summary_stats.json"), &run.summary)?;
    write_json(&dir.join("table2.json"), &run.table2)?;
    let manifest = Manifest {
        tool: "taildep",
        version: env!("CARGO_PKG_VERSION"),
        config: &run.config,
        quantile_convention: "linear interpolation, h = (n - 1) q",
        pairs: run
            .reports
            .iter()
            .map(|r| ManifestPair {
                name: r.name(),
                observations: r.observations,
                windows: r.records.len(),
                first_window_end: r.records.first().map(|w| w.end.format(DATE_FORMAT).to_string()),
                last_window_end: r.records.last().map(|w| w.end.format(DATE_FORMAT).to_string()),
            })
            .collect(),
        files,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(())
}
