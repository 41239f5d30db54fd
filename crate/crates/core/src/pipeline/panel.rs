//! Date × ticker panels of prices or returns, read from CSV.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Layout of an input CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PanelFormat {
    /// `date,TICKER1,TICKER2,...`, one row per date.
    #[default]
    Wide,
    /// `date,ticker,price`, one row per observation.
    Long,
}

/// A panel with strictly increasing dates and explicitly missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// One column per ticker, each as long as `dates`.
    columns: Vec<Vec<Option<f64>>>,
}

/// Panels of log returns share the price panel's shape.
pub type ReturnPanel = Panel;

impl Panel {
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, columns: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if tickers.len() != columns.len() {
            return Err(Error::Data(format!(
                "{} tickers but {} columns",
                tickers.len(),
                columns.len()
            )));
        }
        if let Some((k, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != dates.len()) {
            return Err(Error::Data(format!(
                "column {} has {} rows, expected {}",
                tickers[k],
                c.len(),
                dates.len()
            )));
        }
        if let Some(w) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "dates must be strictly increasing: {} then {}",
                dates[w],
                dates[w + 1]
            )));
        }
        let mut seen = HashMap::new();
        for (k, t) in tickers.iter().enumerate() {
            if let Some(j) = seen.insert(t.as_str(), k) {
                return Err(Error::Data(format!("ticker {t} appears in columns {j} and {k}")));
            }
        }
        Ok(Panel {
            dates,
            tickers,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, ticker: &str) -> Option<&[Option<f64>]> {
        let k = self.tickers.iter().position(|t| t == ticker)?;
        Some(&self.columns[k])
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[Option<f64>])> {
        self.tickers.iter().map(String::as_str).zip(self.columns.iter().map(Vec::as_slice))
    }

    /// Writes the wide layout; missing cells are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        w.write_record(&header)?;
        for (t, date) in self.dates.iter().enumerate() {
            let mut rec = vec![date.format(DATE_FORMAT).to_string()];
            rec.extend(self.columns.iter().map(|c| c[t].map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_date(field: &str, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field.trim(), DATE_FORMAT).map_err(|e| Error::DataRow {
        row,
        reason: format!("cannot parse date {field:?}: {e}"),
    })
}

/// Empty fields and the usual NA spellings are missing; anything else must parse.
fn parse_cell(field: &str, row: usize) -> Result<Option<f64>> {
    let f = field.trim();
    if f.is_empty() || ["na", "nan", "null", "n/a"].contains(&f.to_ascii_lowercase().as_str()) {
        return Ok(None);
    }
    let v: f64 = f.parse().map_err(|_| Error::DataRow {
        row,
        reason: format!("cannot parse number {f:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::DataRow {
            row,
            reason: format!("non-finite value {f:?}"),
        });
    }
    Ok(Some(v))
}

/// Reads a panel. Row numbers in errors count the header as row 1.
///
/// Wide input must list dates in strictly increasing order. Long input may
/// come in any order; dates are sorted and tickers keep first-seen order.
pub fn read_prices<R: Read>(input: R, format: PanelFormat) -> Result<Panel> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    match format {
        PanelFormat::Wide => read_wide(reader, header),
        PanelFormat::Long => read_long(reader, header),
    }
}

fn read_wide<R: Read>(mut reader: csv::Reader<R>, header: Vec<String>) -> Result<Panel> {
    if header.len() < 2 {
        return Err(Error::DataRow {
            row: 1,
            reason: "expected a date column and at least one ticker".into(),
        });
    }
    let tickers: Vec<String> = header[1..].to_vec();
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut columns = vec![Vec::new(); tickers.len()];
    for (idx, rec) in reader.records().enumerate() {
        let row = idx + 2;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::DataRow {
                row,
                reason: format!("{} fields, expected {}", rec.len(), header.len()),
            });
        }
        let date = parse_date(&rec[0], row)?;
        if let Some(&prev) = dates.last() {
            if date == prev {
                return Err(Error::DataRow {
                    row,
                    reason: format!("duplicate date {date}"),
                });
            }
            if date < prev {
                return Err(Error::DataRow {
                    row,
                    reason: format!("date {date} is earlier than {prev}"),
                });
            }
        }
        dates.push(date);
        for (col, field) in columns.iter_mut().zip(rec.iter().skip(1)) {
            col.push(parse_cell(field, row)?);
        }
    }
    Panel::new(dates, tickers, columns)
}

fn read_long<R: Read>(mut reader: csv::Reader<R>, header: Vec<String>) -> Result<Panel> {
    let find = |name: &str| {
        header.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::DataRow {
            row: 1,
            reason: format!("missing column {name:?}"),
        })
    };
    let (di, ti, pi) = (find("date")?, find("ticker")?, find("price")?);
    let mut tickers: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut cells: BTreeMap<NaiveDate, HashMap<usize, Option<f64>>> = BTreeMap::new();
    for (idx, rec) in reader.records().enumerate() {
        let row = idx + 2;
        let rec = rec?;
        let field = |i: usize| {
            rec.get(i).ok_or_else(|| Error::DataRow {
                row,
                reason: format!("{} fields, expected {}", rec.len(), header.len()),
            })
        };
        let date = parse_date(field(di)?, row)?;
        let ticker = field(ti)?.trim().to_string();
        if ticker.is_empty() {
            return Err(Error::DataRow {
                row,
                reason: "empty ticker".into(),
            });
        }
        let value = parse_cell(field(pi)?, row)?;
        let k = *index.entry(ticker.clone()).or_insert_with(|| {
            tickers.push(ticker.clone());
            tickers.len() - 1
        });
        if cells.entry(date).or_default().insert(k, value).is_some() {
            return Err(Error::DataRow {
                row,
                reason: format!("duplicate observation for ({date}, {ticker})"),
            });
        }
    }
    let dates: Vec<NaiveDate> = cells.keys().copied().collect();
    let columns = (0..tickers.len())
        .map(|k| cells.values().map(|m| m.get(&k).copied().flatten()).collect())
        .collect();
    Panel::new(dates, tickers, columns)
}

pub fn load_prices(path: impl AsRef<Path>, format: PanelFormat) -> Result<Panel> {
    read_prices(std::fs::File::open(path)?, format)
}

/// `r_t = ln p_t - ln p_{t-1}`; missing when either price is. One fewer row.
pub fn log_returns(prices: &Panel) -> Result<ReturnPanel> {
    for (ticker, col) in prices.columns() {
        if let Some(t) = col.iter().position(|p| matches!(p, Some(v) if *v <= 0.0)) {
            return Err(Error::Data(format!(
                "non-positive price {} for {ticker} on {}",
                col[t].unwrap_or_default(),
                prices.dates[t]
            )));
        }
    }
    let dates = prices.dates.iter().skip(1).copied().collect();
    let columns = prices
        .columns
        .iter()
        .map(|c| {
            c.windows(2)
                .map(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => Some(b.ln() - a.ln()),
                    _ => None,
                })
                .collect()
        })
        .collect();
    Panel::new(dates, prices.tickers.clone(), columns)
}
