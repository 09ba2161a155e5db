//! The `roughness` command line tool.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 degenerate data,
//! 4 numerical failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{r_seq, SeqEstimatorConfig};
use crate::experiments::{
    box_stats, rate_fit, rate_fit_points, render_boxplot_svg, run_mc_threads, BoxStats, McConfig, McTally,
};
use crate::io::{fmt_f64, read_path_csv, write_path_csv};
use crate::processes::{
    build_drifted_fbm, build_fou, check_regularity, integrate_transform, DriftSpec, FouSpec, TransformG,
};
use crate::sim::{simulate_fbm, BackendKind, SimBackend};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "ROUGHNESS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "roughness", version, about = "Scale-invariant roughness estimation from integrated variance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate X (fOU or drifted fBm) and optionally Y = ∫ g(X) ds.
    Simulate(SimulateArgs),
    /// Estimate the roughness exponent from a Y path CSV.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study and write estimates, box statistics and a box plot.
    Mc(McArgs),
    /// Fit the empirical RMSE decay rate across levels.
    Rate(RateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Fou,
    Dfbm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Circulant,
    Cholesky,
}

impl From<BackendArg> for SimBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Circulant => SimBackend::from(BackendKind::CirculantEmbedding),
            BackendArg::Cholesky => SimBackend::from(BackendKind::Cholesky),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    Identity,
    Exp2t,
    Square,
    Nonmono,
}

impl From<TransformArg> for TransformG {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Identity => TransformG::Identity,
            TransformArg::Exp2t => TransformG::ExpTwoT,
            TransformArg::Square => TransformG::Square,
            TransformArg::Nonmono => TransformG::PaperNonMonotone,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub hurst: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Mean-reversion speed (fou only).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Mean-reversion level (fou only).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Constant drift (dfbm only).
    #[arg(long)]
    pub drift: Option<f64>,
    /// Simulation grid level: 2^level + 1 points.
    #[arg(long)]
    pub level: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "circulant")]
    pub backend: BackendArg,
    /// Output CSV for X.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write Y = ∫ g(X) ds (requires --target-level).
    #[arg(long, value_enum)]
    pub transform: Option<TransformArg>,
    /// Observation level of Y; the oversampling is level − target-level.
    #[arg(long)]
    pub target_level: Option<u32>,
    /// Output CSV for Y (default: <out stem>_y.csv).
    #[arg(long)]
    pub y_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Estimation level (default: file level − 2).
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Comma separated α_0,…,α_m (default: all ones).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// JSON run configuration.
    #[arg(long, required_unless_present = "print_defaults")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print the default configuration and exit.
    #[arg(long)]
    pub print_defaults: bool,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Levels as `a..b` (inclusive) or a comma list.
    #[arg(long, required_unless_present = "print_defaults")]
    pub levels: Option<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, value_enum)]
    pub g: Option<TransformArg>,
    #[arg(long)]
    pub hurst: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fit an analytic rmse(n) expression instead of simulating, e.g. `2^(-n/2)`.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub print_defaults: bool,
}

/// Parses `args`, runs the command, prints errors to stderr and returns the
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Estimate(a) => cmd_estimate(&a, out),
        Command::Mc(a) => cmd_mc(&a, out),
        Command::Rate(a) => cmd_rate(&a, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    match a.model {
        ModelArg::Fou if a.drift.is_some() => return Err(usage("--drift applies to --model dfbm only")),
        ModelArg::Dfbm if a.rho.is_some() || a.mu.is_some() => {
            return Err(usage("--rho/--mu apply to --model fou only"))
        }
        _ => {}
    }
    if a.transform.is_some() != a.target_level.is_some() {
        return Err(usage("--transform and --target-level must be given together"));
    }
    if a.y_out.is_some() && a.transform.is_none() {
        return Err(usage("--y-out requires --transform"));
    }
    let q = match a.target_level {
        Some(t) if t > a.level => return Err(usage(format!("--target-level {t} exceeds --level {}", a.level))),
        Some(t) => Some(a.level - t),
        None => None,
    };

    let fbm = simulate_fbm(a.level, a.hurst, a.seed, a.backend.into())?;
    let x = match a.model {
        ModelArg::Fou => {
            let spec = FouSpec { x0: a.x0, rho: a.rho.unwrap_or(0.0), mu: a.mu.unwrap_or(0.0), hurst: a.hurst };
            build_fou(&spec, &fbm)?
        }
        ModelArg::Dfbm => {
            let drift = a.drift.map(DriftSpec::Constant).unwrap_or_default();
            build_drifted_fbm(a.x0, &drift, &fbm)?
        }
    };
    let mut w = create(&a.out)?;
    write_path_csv(&x, &mut w)?;
    w.flush()?;

    if let (Some(g), Some(target), Some(q)) = (a.transform, a.target_level, q) {
        let ip = integrate_transform(Arc::new(x), &g.into(), target, q)?;
        let regularity = check_regularity(&ip, crate::experiments::DEFAULT_REGULARITY_TOL);
        if !regularity.is_pass() {
            eprintln!("warning: integral of g'(X)^2 is not positive: {regularity:?}");
        }
        let y_out = a.y_out.clone().unwrap_or_else(|| default_y_path(&a.out));
        let mut w = create(&y_out)?;
        write_path_csv(&ip.y, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn default_y_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "path".into());
    out.with_file_name(format!("{stem}_y.csv"))
}

pub fn cmd_estimate<W: Write>(a: &EstimateArgs, out: &mut W) -> Result<()> {
    let file = File::open(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let y = read_path_csv(BufReader::new(file), &a.input.display().to_string())?;
    let n = match a.n {
        Some(n) => n,
        None => y.level().checked_sub(2).ok_or_else(|| Error::Format("path too short to estimate".into()))?,
    };
    let alphas = a.alphas.clone().unwrap_or_else(|| vec![1.0; a.m + 1]);
    let cfg = SeqEstimatorConfig::new(a.m, alphas)?;
    let report = r_seq(&y, n, &cfg)?;
    match a.format {
        FormatArg::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        FormatArg::Text => {
            writeln!(out, "n          {}", report.n)?;
            for (k, r) in &report.r_hat_levels {
                writeln!(out, "r_hat[{k:>2}]  {}", fmt_f64(*r))?;
            }
            writeln!(out, "lambda*    {}", fmt_f64(report.lambda_star))?;
            writeln!(out, "eta_seq    {}", fmt_f64(report.eta_seq))?;
            writeln!(out, "r_seq      {}", fmt_f64(report.r_seq))?;
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<McConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    McConfig::from_json(&text)
}

fn print_defaults<W: Write>(out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, &McConfig::default()).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct BoxStatsFile<'a> {
    config: &'a McConfig,
    warnings: Vec<String>,
    tally: McTally,
    groups: &'a [BoxStats],
    skipped: &'a [(f64, u32)],
}

pub fn cmd_mc<W: Write>(a: &McArgs, out: &mut W) -> Result<()> {
    if a.print_defaults {
        return print_defaults(out);
    }
    let path = a.config.as_ref().ok_or_else(|| usage("--config is required"))?;
    let mut cfg = load_config(path)?;
    if let Some(p) = a.paths {
        cfg.paths = p;
    }
    if let Some(s) = a.seed {
        cfg.seed0 = s;
    }
    cfg.validate()?;
    let warnings = cfg.warnings();
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let table = run_mc_threads(&cfg, a.threads)?;
    let stats = box_stats(&table.rows);

    fs::create_dir_all(&a.out_dir)?;
    let mut w = create(&a.out_dir.join("estimates.csv"))?;
    table.write_csv(&mut w)?;
    w.flush()?;

    let file =
        BoxStatsFile { config: &cfg, warnings, tally: table.tally, groups: &stats.groups, skipped: &stats.skipped };
    let mut w = create(&a.out_dir.join("boxstats.json"))?;
    serde_json::to_writer_pretty(&mut w, &file).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;

    let title = format!("{} / g = {} / {} paths", cfg.model.name(), cfg.transform.name(), cfg.paths);
    fs::write(a.out_dir.join("boxplot.svg"), render_boxplot_svg(&stats.groups, &title))?;

    writeln!(
        out,
        "{} estimates ({} degenerate, {} simulation failures) written to {}",
        table.tally.estimated,
        table.tally.degenerate,
        table.tally.sim_failed,
        a.out_dir.display()
    )?;
    Ok(())
}

/// Parses `8..13` (inclusive) or `8,9,10`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let bad = || usage(format!("invalid --levels '{s}' (expected a..b or a comma list)"));
    let levels: Vec<u32> = if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if levels.is_empty() {
        return Err(bad());
    }
    Ok(levels)
}

/// Evaluates `expr` (variable `n`) at every level.
pub fn synthetic_rmse(expr: &str, levels: &[u32]) -> Result<Vec<f64>> {
    use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
    let tree = build_operator_tree::<DefaultNumericTypes>(expr)
        .map_err(|e| usage(format!("invalid --synthetic expression: {e}")))?;
    levels
        .iter()
        .map(|&n| {
            let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
            ctx.set_value("n".into(), Value::Float(n as f64))
                .map_err(|e| usage(format!("invalid --synthetic expression: {e}")))?;
            tree.eval_number_with_context(&ctx)
                .map_err(|e| usage(format!("cannot evaluate --synthetic at n = {n}: {e}")))
        })
        .collect()
}

pub fn cmd_rate<W: Write>(a: &RateArgs, out: &mut W) -> Result<()> {
    if a.print_defaults {
        return print_defaults(out);
    }
    let levels = parse_levels(a.levels.as_deref().ok_or_else(|| usage("--levels is required"))?)?;

    let (fit, rmse) = if let Some(expr) = &a.synthetic {
        let rmse = synthetic_rmse(expr, &levels)?;
        (rate_fit_points(&levels, &rmse)?, rmse)
    } else {
        let mut cfg = match &a.config {
            Some(p) => load_config(p)?,
            None => McConfig::default(),
        };
        cfg.n_levels = levels.clone();
        if let Some(p) = a.paths {
            cfg.paths = p;
        }
        if let Some(g) = a.g {
            cfg.transform = g.into();
        }
        if let Some(h) = a.hurst {
            cfg.hurst_list = vec![h];
        }
        if let Some(s) = a.seed {
            cfg.seed0 = s;
        }
        if cfg.hurst_list.len() != 1 {
            return Err(Error::Config("rate needs exactly one Hurst value (use --hurst)".into()));
        }
        cfg.validate()?;
        let table = run_mc_threads(&cfg, a.threads)?;
        let stats = box_stats(&table.rows);
        if !stats.skipped.is_empty() {
            return Err(Error::Degenerate { level: stats.skipped[0].1 });
        }
        let fit = rate_fit(&stats.groups)?;
        let rmse =
            fit.levels.iter().map(|&n| stats.get(cfg.hurst_list[0], n).map_or(f64::NAN, |b| b.rmse_vs_h)).collect();
        (fit, rmse)
    };

    fs::create_dir_all(&a.out_dir)?;
    let mut w = csv::Writer::from_path(a.out_dir.join("rate.csv")).map_err(|e| Error::Io(e.to_string()))?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["n", "rmse"]).map_err(io)?;
    for (n, r) in fit.levels.iter().zip(&rmse) {
        w.write_record([n.to_string(), fmt_f64(*r)]).map_err(io)?;
    }
    w.flush()?;

    serde_json::to_writer_pretty(&mut *out, &fit).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_parsing() {
        assert_eq!(parse_levels("8..13").unwrap(), vec![8, 9, 10, 11, 12, 13]);
        assert_eq!(parse_levels("8..=9").unwrap(), vec![8, 9]);
        assert_eq!(parse_levels("10, 12").unwrap(), vec![10, 12]);
        assert!(parse_levels("13..8").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn synthetic_expressions() {
        let r = synthetic_rmse("2^(-n/2)", &[8, 9]).unwrap();
        assert_eq!(r, vec![2f64.powf(-4.0), 2f64.powf(-4.5)]);
        let r = synthetic_rmse("3 * 2^(-n/4) * math::sqrt(n)", &[16]).unwrap();
        assert!((r[0] - 3.0 * 0.0625 * 4.0).abs() < 1e-12);
        assert!(synthetic_rmse("2^(", &[8]).is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn default_y_name() {
        assert_eq!(default_y_path(Path::new("/tmp/x.csv")), PathBuf::from("/tmp/x_y.csv"));
    }
}
