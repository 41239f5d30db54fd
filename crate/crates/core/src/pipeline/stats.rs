//! Descriptive statistics in the layout of the summary tables.
//!
//! Quantiles interpolate linearly between order statistics: with sorted data
//! `x_1 ≤ … ≤ x_n` and `h = (n - 1) q`, the `q`-quantile is
//! `x_{⌊h⌋+1} + (h - ⌊h⌋)(x_{⌊h⌋+2} - x_{⌊h⌋+1})`. Standard deviations use the
//! `n - 1` divisor and are 0 for a single observation.

use std::collections::BTreeMap;

use serde::Serialize;

use super::panel::Panel;

/// Row labels of the summary tables, in display order.
pub const STATISTICS: [&str; 7] = [
    "Mean",
    "Median",
    "St.dev.",
    "Minimum",
    "Maximum",
    "5%-quantile",
    "95%-quantile",
];

/// Column labels of the cross-sectional aggregation, in display order.
pub const CROSS_SECTION: [&str; 6] = [
    "5%-quantile",
    "10%-quantile",
    "Mean",
    "Median",
    "90%-quantile",
    "95%-quantile",
];

/// Linear-interpolation quantile of sorted data. `sorted` must be nonempty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation; 0 for fewer than two observations.
pub fn std_dev(data: &[f64]) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    let mu = mean(data);
    let ss: f64 = data.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (data.len() - 1) as f64).sqrt()
}

/// The seven summary statistics of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Describe {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q95: f64,
}

impl Describe {
    /// `None` for empty data.
    pub fn of(data: &[f64]) -> Option<Self> {
        if data.is_empty() {
            return None;
        }
        let s = sorted(data);
        Some(Describe {
            mean: mean(data),
            median: quantile_sorted(&s, 0.5),
            sd: std_dev(data),
            min: s[0],
            max: s[s.len() - 1],
            q05: quantile_sorted(&s, 0.05),
            q95: quantile_sorted(&s, 0.95),
        })
    }

    /// Values in the order of [`STATISTICS`].
    pub fn values(&self) -> [f64; 7] {
        [self.mean, self.median, self.sd, self.min, self.max, self.q05, self.q95]
    }
}

/// Aggregates one statistic across series, in the order of [`CROSS_SECTION`].
pub fn cross_sectional(values: &[f64]) -> Option<[f64; 6]> {
    if values.is_empty() {
        return None;
    }
    let s = sorted(values);
    Some([
        quantile_sorted(&s, 0.05),
        quantile_sorted(&s, 0.10),
        mean(values),
        quantile_sorted(&s, 0.5),
        quantile_sorted(&s, 0.90),
        quantile_sorted(&s, 0.95),
    ])
}

/// `{statistic: {aggregate: value}}` over a set of per-series descriptions.
pub type CrossTable = BTreeMap<String, BTreeMap<String, f64>>;

pub fn cross_table(described: &[Describe]) -> CrossTable {
    let mut out = CrossTable::new();
    if described.is_empty() {
        return out;
    }
    for (k, stat) in STATISTICS.iter().enumerate() {
        let column: Vec<f64> = described.iter().map(|d| d.values()[k]).collect();
        let agg = cross_sectional(&column).expect("nonempty");
        out.insert(
            stat.to_string(),
            CROSS_SECTION.iter().map(|c| c.to_string()).zip(agg).collect(),
        );
    }
    out
}

/// Per-series statistics of a return panel, with the cross-section of all
/// series other than `index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    /// `{ticker: {statistic: value}}` for every series with data.
    pub series: BTreeMap<String, BTreeMap<String, f64>>,
    pub index: Option<String>,
    /// Cross-section over the non-index series.
    pub cross_section: CrossTable,
}

/// Missing cells are dropped series by series.
pub fn summary_stats(panel: &Panel, index: Option<&str>) -> SummaryTable {
    let mut series = BTreeMap::new();
    let mut others = Vec::new();
    for (ticker, col) in panel.columns() {
        let data: Vec<f64> = col.iter().flatten().copied().collect();
        let Some(d) = Describe::of(&data) else { continue };
        series.insert(ticker.to_string(), labelled(&d));
        if Some(ticker) != index {
            others.push(d);
        }
    }
    SummaryTable {
        series,
        index: index.map(str::to_string),
        cross_section: cross_table(&others),
    }
}

pub(crate) fn labelled(d: &Describe) -> BTreeMap<String, f64> {
    STATISTICS.iter().map(|s| s.to_string()).zip(d.values()).collect()
}
