use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use taildep::envelope::{measure_range, EnvelopeMeasure, PinSet};
use taildep::estimator::{default_threshold, empirical_tdf, ranks, EstimatorConfig, Tail};
use taildep::measures::{all_measures, Normalization};
use taildep::order::{compare, DEFAULT_TOL};
use taildep::pipeline::{
    load_prices, log_returns, run_report, summary_stats, write_run, PairConfig, Panel, PanelFormat, RunConfig,
};
use taildep::simulate::{sample, write_pairs_csv, CopulaFamily, CopulaSpec};
use taildep::Tdf;

/// Tail dependence functions: estimation, measures, ordering and feasible ranges.
#[derive(Parser, Debug)]
#[command(name = "taildep", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Grid intervals m on [0, 1].
    #[arg(long, global = true, default_value_t = EstimatorConfig::DEFAULT_GRID)]
    grid: usize,
    /// Estimator threshold; defaults to ⌊√window⌋, or ⌊√n⌋ without a window.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Rolling window length in observations.
    #[arg(long, global = true, default_value_t = 500)]
    window: usize,
    /// Rolling window step.
    #[arg(long, global = true, default_value_t = 1)]
    step: usize,
    #[arg(long, global = true, value_enum, default_value_t = Norm::Doubled)]
    normalization: Norm,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory for output files; results go to stdout when omitted.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Norm {
    Raw,
    Doubled,
}

impl From<Norm> for Normalization {
    fn from(n: Norm) -> Self {
        match n {
            Norm::Raw => Normalization::Raw,
            Norm::Doubled => Normalization::Doubled,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Wide,
    Long,
}

impl From<Format> for PanelFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Wide => PanelFormat::Wide,
            Format::Long => PanelFormat::Long,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TailArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Independence,
    Comonotone,
    Clayton,
    GumbelSurvival,
    Gaussian,
}

#[derive(Args, Debug)]
struct PanelInput {
    /// CSV of prices (or returns with --returns).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Wide)]
    format: Format,
    /// The input already holds log returns.
    #[arg(long)]
    returns: bool,
}

impl PanelInput {
    fn load(&self) -> Result<Panel> {
        let panel = load_prices(&self.input, self.format.into())
            .with_context(|| format!("reading {}", self.input.display()))?;
        if self.returns {
            Ok(panel)
        } else {
            Ok(log_returns(&panel)?)
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read a price panel and write its log returns (returns.csv).
    Ingest {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Wide)]
        format: Format,
    },
    /// Summary statistics of a return panel (summary_stats.json).
    Stats {
        #[command(flatten)]
        input: PanelInput,
        /// Series reported separately from the cross-section.
        #[arg(long)]
        index: Option<String>,
    },
    /// Estimate a TDF from a bivariate sample (tdf.json).
    Estimate {
        /// CSV with a header; `date` columns are ignored.
        #[arg(long)]
        input: PathBuf,
        /// First variable; defaults to the first data column.
        #[arg(long)]
        x: Option<String>,
        /// Second variable; defaults to the second data column.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, value_enum, default_value_t = TailArg::Lower)]
        tail: TailArg,
        /// Replace the estimate by its least concave majorant.
        #[arg(long)]
        project: bool,
    },
    /// All measures of a TDF (measures.json).
    Measures {
        #[arg(long)]
        tdf: PathBuf,
        /// Exponent of the Lp norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Evaluation point of the point measure.
        #[arg(long, default_value_t = 0.5)]
        s0: f64,
    },
    /// Compare two TDFs in the tail dependence order (order.json).
    Compare {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Range of a measure over all admissible TDFs with a given TDC (envelope.json).
    Envelope {
        #[arg(long)]
        tdc: f64,
        /// linf, l1 or point:<s0>.
        #[arg(long, default_value = "linf")]
        measure: String,
    },
    /// Sample a copula as `u,v` CSV.
    Simulate {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        n: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rolling estimation for every (index, ticker) pair, written to --out-dir.
    Report {
        #[command(flatten)]
        input: PanelInput,
        #[arg(long)]
        index: String,
        /// Comma-separated tickers to pair with the index; all others by default.
        #[arg(long, value_delimiter = ',')]
        tickers: Option<Vec<String>>,
        /// Evaluate measures on the raw estimates instead of their concave majorants.
        #[arg(long)]
        raw_estimates: bool,
    },
}

/// Writes `name` under the output directory, or prints it when there is none.
fn emit(global: &Global, name: &str, bytes: &[u8]) -> Result<()> {
    match &global.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn read_tdf(path: &Path) -> Result<Tdf> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing TDF in {}", path.display()))
}

fn read_columns(path: &Path, x: Option<&str>, y: Option<&str>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let data_cols: Vec<usize> = (0..header.len()).filter(|&i| !header[i].eq_ignore_ascii_case("date")).collect();
    let pick = |name: Option<&str>, fallback: usize| -> Result<usize> {
        match name {
            Some(n) => header.iter().position(|h| h == n).with_context(|| format!("no column {n:?}")),
            None => data_cols.get(fallback).copied().context("input needs two data columns"),
        }
    };
    let (ix, iy) = (pick(x, 0)?, pick(y, 1)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Option<f64>> {
            let f = rec.get(i).unwrap_or("").trim();
            if f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
                return Ok(None);
            }
            Ok(Some(f.parse().with_context(|| format!("row {}: cannot parse {f:?}", row + 2))?))
        };
        if let (Some(a), Some(b)) = (parse(ix)?, parse(iy)?) {
            xs.push(a);
            ys.push(b);
        }
    }
    Ok((xs, ys))
}

fn parse_measure(spec: &str) -> Result<EnvelopeMeasure<f64>> {
    Ok(match spec {
        "linf" => EnvelopeMeasure::MaxTd,
        "l1" => EnvelopeMeasure::AvgTd,
        other => match other.strip_prefix("point:") {
            Some(s0) => EnvelopeMeasure::PointEval {
                s0: s0.parse().with_context(|| format!("bad point location {s0:?}"))?,
            },
            None => bail!("unknown measure {other:?}; expected linf, l1 or point:<s0>"),
        },
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let norm: Normalization = g.normalization.into();
    match cli.command {
        Command::Ingest { prices, format } => {
            let panel = load_prices(&prices, format.into())
                .with_context(|| format!("reading {}", prices.display()))?;
            let mut buf = Vec::new();
            log_returns(&panel)?.write_csv(&mut buf)?;
            emit(g, "returns.csv", &buf)
        }
        Command::Stats { input, index } => {
            let panel = input.load()?;
            emit(g, "summary_stats.json", &json(&summary_stats(&panel, index.as_deref()))?)
        }
        Command::Estimate {
            input,
            x,
            y,
            tail,
            project,
        } => {
            let (xs, ys) = read_columns(&input, x.as_deref(), y.as_deref())?;
            let cfg = EstimatorConfig {
                k: g.k.unwrap_or_else(|| default_threshold(xs.len())),
                grid_size: g.grid,
                tail: match tail {
                    TailArg::Lower => Tail::Lower,
                    TailArg::Upper => Tail::Upper,
                },
            };
            let mut tdf: Tdf = empirical_tdf(&ranks(&xs, &ys)?, &cfg)?;
            if project {
                tdf = tdf.concave_majorant()?;
            }
            emit(g, "tdf.json", &json(&tdf)?)
        }
        Command::Measures { tdf, p, s0 } => {
            let tdf = read_tdf(&tdf)?;
            emit(g, "measures.json", &json(&all_measures(&tdf, p, s0, norm)?)?)
        }
        Command::Compare { first, second, tol } => {
            let r = compare(&read_tdf(&first)?, &read_tdf(&second)?, tol);
            emit(g, "order.json", &json(&r)?)
        }
        Command::Envelope { tdc, measure } => {
            if !(0.0..=1.0).contains(&tdc) {
                bail!("--tdc must lie in [0, 1], got {tdc}");
            }
            let r = measure_range(&PinSet::tdc(tdc), parse_measure(&measure)?, g.grid, norm)?;
            emit(g, "envelope.json", &json(&r)?)
        }
        Command::Simulate {
            family,
            theta,
            rho,
            n,
            out,
        } => {
            let need = |v: Option<f64>, what: &str| v.with_context(|| format!("--{what} is required for this family"));
            let family = match family {
                Family::Independence => CopulaFamily::Independence,
                Family::Comonotone => CopulaFamily::Comonotone,
                Family::Clayton => CopulaFamily::Clayton { theta: need(theta, "theta")? },
                Family::GumbelSurvival => CopulaFamily::GumbelSurvival { theta: need(theta, "theta")? },
                Family::Gaussian => CopulaFamily::Gaussian { rho: need(rho, "rho")? },
            };
            let pairs = sample(&CopulaSpec { family, n, seed: g.seed })?;
            let mut buf = Vec::new();
            write_pairs_csv(&pairs, &mut buf)?;
            match out {
                Some(path) => fs::write(&path, buf).with_context(|| format!("writing {}", path.display())),
                None => emit(g, "pairs.csv", &buf),
            }
        }
        Command::Report {
            input,
            index,
            tickers,
            raw_estimates,
        } => {
            let Some(dir) = &g.out_dir else {
                bail!("report needs --out-dir");
            };
            let panel = input.load()?;
            let mut pair = PairConfig::new(g.window);
            pair.step = g.step;
            pair.estimator.grid_size = g.grid;
            if let Some(k) = g.k {
                pair.estimator.k = k;
            }
            pair.normalization = norm;
            pair.project = !raw_estimates;
            let cfg = RunConfig {
                pair,
                index,
                tickers,
                seed: Some(g.seed),
                input: input
                    .input
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            };
            let out = run_report(&panel, &cfg)?;
            write_run(dir, &out)?;
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
