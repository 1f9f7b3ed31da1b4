//! Command-line front end.
//!
//! Each subcommand renders one [`Table`] as CSV or JSON on stdout, or
//! atomically into `--output`. Defaults may come from a TOML file given by
//! `--config`; flags always win. `KBASIS_THREADS` sets the worker count and
//! `KBASIS_MEM_CAP` the per-bitmap memory cap in bytes.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 when the memory cap is
//! exceeded, 4 for I/O failures. Failures print a single JSON object to
//! stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analytics::{
    asympt_mean_missing, exact_mean_missing_k2, exact_missing_prob_k2, janson_lower_missing_prob,
    stein_chen_diagnostics,
};
use crate::counting::{count_by_distinct, gaussian_binomial};
use crate::coupling::coupling_tv_check;
use crate::error::{Error, Result};
use crate::experiments::{
    run_trials_with, summarize, sweep_with, GridPoint, Limits, DEFAULT_MEMORY_CAP,
};
use crate::model::{poisson_window_p, threshold_p, Mode, Model, Sampling};
use crate::report::{sweep_table, write_atomic, Cell, Format, Table};
use crate::rng::DEFAULT_SEED;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kbasis", version, about = "Random k-additive bases: simulation and exact analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of the basis probability and the law of X.
    Simulate(SimulateArgs),
    /// Exact and asymptotic expected number of missing targets.
    Exact(ExactArgs),
    /// Threshold sweep over a grid of (n, k, alpha, a_n, mode).
    Sweep(SweepArgs),
    /// q-binomial coefficients |S_j|, or their split by distinct values.
    Counts(CountsArgs),
    /// Check the k = 2 coupling against the exact conditional law.
    Couple(CoupleArgs),
    /// Stein–Chen error terms for truncated 2-bases.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed [default: 0x6b6261736973]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format: csv or json [default: csv]
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// TOML file with default values for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Ground set size; comma-separated for several
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// truncated or modular
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Inclusion probability; comma-separated for several
    #[arg(long, value_delimiter = ',', conflicts_with = "a_n")]
    pub p: Vec<f64>,
    /// Threshold shift used to derive p when --p is absent
    #[arg(long = "a-n", value_delimiter = ',', allow_hyphen_values = true)]
    pub a_n: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Sample exactly this many elements instead of Bernoulli(p)
    #[arg(long)]
    pub fixed_size: Option<usize>,
    /// Also report the TV distance to Poisson(exact lambda) (k = 2)
    #[arg(long)]
    pub tv: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Emit P(j missing) for every target j instead of the means
    #[arg(long)]
    pub per_j: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long = "a-n", value_delimiter = ',', allow_hyphen_values = true)]
    pub a_n: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<Mode>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub tv: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CountsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Split |S_j| by distinct values for these targets
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub j: Vec<i64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CoupleArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, conflicts_with = "delta")]
    pub p: Option<f64>,
    /// Use p = sqrt((1/alpha + delta) ln n / n)
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

/// Values a `--config` file may provide. Lists accept a scalar or an array.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    seed: Option<u64>,
    format: Option<String>,
    output: Option<PathBuf>,
    n: Option<OneOrMany<usize>>,
    k: Option<OneOrMany<usize>>,
    alpha: Option<OneOrMany<f64>>,
    mode: Option<OneOrMany<String>>,
    p: Option<OneOrMany<f64>>,
    a_n: Option<OneOrMany<f64>>,
    trials: Option<u64>,
    samples: Option<u64>,
    j: Option<OneOrMany<i64>>,
    delta: Option<f64>,
    fixed_size: Option<usize>,
    tv: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn list<T>(flag: Vec<T>, cfg: Option<OneOrMany<T>>) -> Vec<T> {
    if flag.is_empty() {
        cfg.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        flag
    }
}

fn first<T: Copy>(flag: Option<T>, cfg: Option<OneOrMany<T>>) -> Option<T> {
    flag.or_else(|| cfg.and_then(|c| c.into_vec().first().copied()))
}

fn require<T>(v: Option<T>, field: &'static str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(field, "required"))
}

fn nonempty<T>(v: Vec<T>, field: &'static str) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(Error::invalid(field, "required"))
    } else {
        Ok(v)
    }
}

fn parse_modes(v: Vec<String>) -> Result<Vec<Mode>> {
    v.iter().map(|s| s.parse()).collect()
}

/// Flags merged with config-file defaults.
struct Settings {
    seed: u64,
    format: Format,
    output: Option<PathBuf>,
    limits: Limits,
}

fn settings(common: &Common, cfg: &mut ConfigFile) -> Result<Settings> {
    let format = match (common.format, cfg.format.take()) {
        (Some(f), _) => f,
        (None, Some(s)) => s.parse()?,
        (None, None) => Format::Csv,
    };
    let memory_cap = match std::env::var("KBASIS_MEM_CAP") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::invalid("KBASIS_MEM_CAP", format!("not a byte count: {s:?}")))?,
        Err(_) => DEFAULT_MEMORY_CAP,
    };
    Ok(Settings {
        seed: common.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        format,
        output: common.output.clone().or(cfg.output.take()),
        limits: Limits { memory_cap },
    })
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Simulate(a) => &a.common,
        Command::Exact(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Counts(a) => &a.common,
        Command::Couple(a) => &a.common,
        Command::Diagnose(a) => &a.common,
    }
}

/// Resolved `(n, k, alpha, mode, p-or-a_n)` combinations.
struct ModelGrid {
    n: Vec<usize>,
    k: usize,
    alpha: f64,
    mode: Mode,
    p: Vec<f64>,
    a_n: Vec<f64>,
}

impl ModelGrid {
    fn resolve(args: &ModelArgs, cfg: &mut ConfigFile) -> Result<Self> {
        let mode = match (args.mode, cfg.mode.take()) {
            (Some(m), _) => m,
            (None, Some(m)) => parse_modes(m.into_vec())?.first().copied().unwrap_or(Mode::Truncated),
            (None, None) => Mode::Truncated,
        };
        let (p, a_n) = if !args.p.is_empty() || !args.a_n.is_empty() {
            (args.p.clone(), args.a_n.clone())
        } else {
            (list(vec![], cfg.p.take()), list(vec![], cfg.a_n.take()))
        };
        if p.is_empty() == a_n.is_empty() {
            return Err(Error::invalid("p", "give exactly one of --p and --a-n"));
        }
        Ok(ModelGrid {
            n: nonempty(list(args.n.clone(), cfg.n.take()), "n")?,
            k: first(args.k, cfg.k.take()).unwrap_or(2),
            alpha: first(args.alpha, cfg.alpha.take()).unwrap_or(0.5),
            mode,
            p,
            a_n,
        })
    }

    /// `(n, p, a_n)` for every combination, in flag order.
    fn points(&self) -> Result<Vec<(usize, f64, Option<f64>)>> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &p in &self.p {
                out.push((n, p, None));
            }
            for &a in &self.a_n {
                out.push((n, threshold_p(n, self.k, self.alpha, a, self.mode)?, Some(a)));
            }
        }
        Ok(out)
    }
}

fn simulate(args: &SimulateArgs, cfg: &mut ConfigFile, s: &Settings) -> Result<Table> {
    let grid = ModelGrid::resolve(&args.model, cfg)?;
    let trials = args.trials.or(cfg.trials).unwrap_or(1000);
    let fixed = args.fixed_size.or(cfg.fixed_size);
    let tv = args.tv || cfg.tv.unwrap_or(false);
    let mut rows = Vec::new();
    for (n, p, a_n) in grid.points()? {
        let sampling = fixed.map_or(Sampling::Bernoulli, Sampling::FixedSize);
        let model = Model::new(n, grid.k, grid.alpha, p, grid.mode, sampling)?;
        let stats = run_trials_with(&model, trials, s.seed, &s.limits)?;
        let mut row = summarize(&model, &stats, a_n, tv);
        row.error = None;
        rows.push(row);
    }
    Ok(sweep_table(&rows))
}

fn exact(args: &ExactArgs, cfg: &mut ConfigFile) -> Result<Table> {
    let grid = ModelGrid::resolve(&args.model, cfg)?;
    if args.per_j {
        let mut t = Table::new(&["n", "k", "p", "mode", "j", "missing_prob", "janson_lower"]);
        for (n, p, _) in grid.points()? {
            let model = Model::new(n, grid.k, grid.alpha, p, grid.mode, Sampling::Bernoulli)?;
            let (lo, hi) = model.window();
            for j in lo..=hi {
                let prob = match grid.k {
                    2 => Cell::from(exact_missing_prob_k2(j, n, p, grid.mode)?),
                    _ => Cell::Empty,
                };
                let janson = match grid.mode {
                    Mode::Truncated => Cell::from(janson_lower_missing_prob(j, grid.k, n, p)),
                    Mode::Modular => Cell::Empty,
                };
                t.push(vec![n.into(), grid.k.into(), p.into(), grid.mode.as_str().into(), j.into(), prob, janson]);
            }
        }
        return Ok(t);
    }
    let mut t = Table::new(&[
        "n",
        "k",
        "alpha",
        "a_n",
        "p",
        "mode",
        "exact_lambda",
        "asympt_lambda",
        "poisson_basis_prob",
    ]);
    for (n, p, a_n) in grid.points()? {
        Model::new(n, grid.k, grid.alpha, p, grid.mode, Sampling::Bernoulli)?;
        let exact = match grid.k {
            2 => Some(exact_mean_missing_k2(n, p, grid.alpha, grid.mode)?),
            _ => None,
        };
        let asympt = asympt_mean_missing(n, p, grid.alpha, grid.k, grid.mode).ok();
        let poisson = exact.or(asympt).map(|l| (-l).exp());
        t.push(vec![
            n.into(),
            grid.k.into(),
            grid.alpha.into(),
            a_n.into(),
            p.into(),
            grid.mode.as_str().into(),
            exact.into(),
            asympt.into(),
            poisson.into(),
        ]);
    }
    Ok(t)
}

fn sweep(args: &SweepArgs, cfg: &mut ConfigFile, s: &Settings) -> Result<Table> {
    let ns = nonempty(list(args.n.clone(), cfg.n.take()), "n")?;
    let a_ns = nonempty(list(args.a_n.clone(), cfg.a_n.take()), "a_n")?;
    let mut ks = list(args.k.clone(), cfg.k.take());
    if ks.is_empty() {
        ks.push(2);
    }
    let mut alphas = list(args.alpha.clone(), cfg.alpha.take());
    if alphas.is_empty() {
        alphas.push(0.5);
    }
    let mut modes = match (args.mode.is_empty(), cfg.mode.take()) {
        (true, Some(m)) => parse_modes(m.into_vec())?,
        _ => args.mode.clone(),
    };
    if modes.is_empty() {
        modes.push(Mode::Truncated);
    }
    let trials = args.trials.or(cfg.trials).unwrap_or(1000);
    let tv = args.tv || cfg.tv.unwrap_or(false);

    let mut grid = Vec::new();
    for &mode in &modes {
        for &k in &ks {
            for &alpha in &alphas {
                for &n in &ns {
                    for &a_n in &a_ns {
                        grid.push(GridPoint { n, k, alpha, a_n, mode });
                    }
                }
            }
        }
    }
    let total = grid.len();
    let rows = sweep_with(&grid, trials, s.seed, tv, &s.limits, |i, row| {
        let status = match (&row.error, row.basis_prob_hat) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(b)) => format!("basis_prob_hat={b:.4}"),
            (None, None) => String::new(),
        };
        eprintln!(
            "[{}/{total}] mode={} k={} alpha={} n={} a_n={} {status}",
            i + 1,
            row.mode,
            row.k,
            row.alpha,
            row.n,
            row.a_n.unwrap_or(f64::NAN),
        );
    })?;
    Ok(sweep_table(&rows))
}

fn counts(args: &CountsArgs, cfg: &mut ConfigFile) -> Result<Table> {
    let n = require(first(args.n, cfg.n.take()), "n")?;
    let k = require(first(args.k, cfg.k.take()), "k")?;
    let js = list(args.j.clone(), cfg.j.take());
    if js.is_empty() {
        let q = gaussian_binomial(n, k);
        let mut t = Table::new(&["n", "k", "j", "count"]);
        for (j, c) in q.coefficients.iter().enumerate() {
            t.push(vec![n.into(), k.into(), j.into(), Cell::BigInt(c.to_string())]);
        }
        return Ok(t);
    }
    let mut columns = vec!["n".to_string(), "k".into(), "j".into(), "total".into()];
    columns.extend((1..=k).map(|d| format!("distinct_{d}")));
    let mut t = Table::new(&columns);
    for j in js {
        let c = count_by_distinct(j, k, n);
        let mut row = vec![n.into(), k.into(), j.into(), Cell::BigInt(c.total.to_string())];
        row.extend(c.by_distinct.iter().map(|v| Cell::BigInt(v.to_string())));
        t.push(row);
    }
    Ok(t)
}

fn couple(args: &CoupleArgs, cfg: &mut ConfigFile, s: &Settings) -> Result<Table> {
    let n = require(first(args.n, cfg.n.take()), "n")?;
    let p = require(first(args.p, cfg.p.take()), "p")?;
    let j = match args.j {
        Some(j) => j,
        None => {
            let j = require(first(None, cfg.j.take()), "j")?;
            usize::try_from(j).map_err(|_| Error::invalid("j", "must be non-negative"))?
        }
    };
    let samples = args.samples.or(cfg.samples).unwrap_or(100_000);
    let check = coupling_tv_check(n, p, j, samples, s.seed)?;
    let mut t = Table::new(&["n", "p", "j", "samples", "tv", "one_sided_violations", "seed"]);
    t.push(vec![
        n.into(),
        p.into(),
        j.into(),
        check.samples.into(),
        check.tv.into(),
        check.one_sided_violations.into(),
        s.seed.into(),
    ]);
    Ok(t)
}

fn diagnose(args: &DiagnoseArgs, cfg: &mut ConfigFile) -> Result<Table> {
    let ns = nonempty(list(args.n.clone(), cfg.n.take()), "n")?;
    let alpha = first(args.alpha, cfg.alpha.take()).unwrap_or(0.5);
    let (p, delta) = if args.p.is_some() || args.delta.is_some() {
        (args.p, args.delta)
    } else {
        (first(None, cfg.p.take()), cfg.delta)
    };
    let delta = match (p, delta) {
        (None, None) => Some(1.0),
        (_, d) => d,
    };
    let mut t = Table::new(&[
        "n", "alpha", "p", "c_p", "sigma1", "sigma2", "max_term", "tv_bound", "window_lo", "window_hi",
    ]);
    for n in ns {
        let p = match delta {
            Some(d) => poisson_window_p(n, alpha, d),
            None => p.expect("p or delta"),
        };
        let d = stein_chen_diagnostics(n, p, alpha)?;
        t.push(vec![
            n.into(),
            alpha.into(),
            p.into(),
            d.c_p.into(),
            d.sigma1.into(),
            d.sigma2.into(),
            d.max_term.into(),
            d.tv_bound.into(),
            d.window.0.into(),
            d.window.1.into(),
        ]);
    }
    Ok(t)
}

/// Runs a parsed command and returns the rendered report. The report is
/// also written to `--output` when given.
pub fn dispatch(cli: &Cli) -> Result<String> {
    let common = common_of(&cli.command);
    let mut cfg = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let s = settings(common, &mut cfg)?;
    let table = match &cli.command {
        Command::Simulate(a) => simulate(a, &mut cfg, &s)?,
        Command::Exact(a) => exact(a, &mut cfg)?,
        Command::Sweep(a) => sweep(a, &mut cfg, &s)?,
        Command::Counts(a) => counts(a, &mut cfg)?,
        Command::Couple(a) => couple(a, &mut cfg, &s)?,
        Command::Diagnose(a) => diagnose(a, &mut cfg)?,
    };
    let text = table.render(s.format);
    if let Some(path) = &s.output {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// The JSON object printed on stderr for a failed run.
pub fn error_record(err: &Error) -> String {
    let kind = match err {
        Error::Validation { .. } => "validation",
        Error::BelowThreshold { .. } => "below_threshold",
        Error::EnumerationBound { .. } => "enumeration_bound",
        Error::NullEvent => "null_event",
        Error::ResourceCap { .. } => "resource_cap",
        Error::Singular(_) => "singular",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    };
    serde_json::json!({
        "error": kind,
        "message": err.to_string(),
        "exit_code": exit_code(err),
    })
    .to_string()
}

fn configure_threads() -> Result<()> {
    if let Ok(s) = std::env::var("KBASIS_THREADS") {
        let threads: usize = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid("KBASIS_THREADS", format!("not a count: {s:?}")))?;
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(text) => {
            if common_of(&cli.command).output.is_none() {
                print!("{text}");
            }
            0
        }
        Err(err) => {
            eprintln!("{}", error_record(&err));
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("kbasis").chain(args.iter().copied())).unwrap();
        dispatch(&cli)
    }

    #[test]
    fn counts_dump() {
        let out = run(&["counts", "--n", "2", "--k", "2"]).unwrap();
        let counts: Vec<&str> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
        assert_eq!(counts, ["1", "1", "2", "1", "1"]);
        let out = run(&["counts", "--n", "5", "--k", "2", "--j", "2", "--format", "json"]).unwrap();
        assert!(out.contains("\"total\":2,\"distinct_1\":1,\"distinct_2\":1"), "{out}");
    }

    #[test]
    fn exact_mean_field() {
        let out = run(&["exact", "--n", "4", "--k", "2", "--alpha", "0.5", "--p", "0.3"]).unwrap();
        let line = out.lines().nth(1).unwrap();
        let lambda: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!((lambda - 3.5099).abs() < 1e-4, "{lambda}");
    }

    #[test]
    fn p_and_a_n_are_exclusive() {
        assert!(Cli::try_parse_from(["kbasis", "exact", "--n", "4", "--p", "0.3", "--a-n", "1"]).is_err());
        let err = run(&["exact", "--n", "4"]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
    }

    #[test]
    fn negative_shift_parses() {
        let out = run(&["exact", "--n", "1000", "--a-n", "-2,2"]).unwrap();
        assert_eq!(out.lines().count(), 3);
    }

    #[test]
    fn config_defaults_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "n = [4, 6]\np = 0.3\nalpha = 0.5\nformat = \"json\"\n").unwrap();
        let cfg = path.to_str().unwrap();
        let out = run(&["exact", "--config", cfg]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        let out = run(&["exact", "--config", cfg, "--n", "4", "--format", "csv"]).unwrap();
        assert_eq!(out.lines().count(), 2);

        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(matches!(run(&["exact", "--config", cfg]), Err(Error::Parse(_))));
    }

    #[test]
    fn error_records_are_json() {
        let rec = error_record(&Error::ResourceCap { needed: 10, cap: 1 });
        let v: serde_json::Value = serde_json::from_str(&rec).unwrap();
        assert_eq!(v["exit_code"], 3);
        assert_eq!(v["error"], "resource_cap");
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::NullEvent), EXIT_VALIDATION);
    }

    #[test]
    fn diagnose_defaults_to_delta_one() {
        let out = run(&["diagnose", "--n", "1000,10000"]).unwrap();
        assert_eq!(out.lines().count(), 3);
    }
}
