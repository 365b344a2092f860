mod commands;
mod config;
mod error;
mod input;
mod output;
mod power;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcc_core::models::{NoiseSpec, PairModel, SeriesModel};
use qcc_core::StatisticSpec;

use config::{
    BandConfig, CacfConfig, EstimateConfig, InputRef, Kind, NullModel, PanelConfig, PowerRun,
    RunConfig, SeriesInput, SimModel, SimulateConfig, TestConfig, TestMode,
};
use error::{CliError, Result};
use input::Source;
use output::Target;
use power::PowerConfig;

/// Quantile conditional correlation and serial dependence tests.
#[derive(Parser)]
#[command(name = "qcc", version)]
struct Cli {
    /// Worker threads for Monte-Carlo batches. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional correlation of a paired sample.
    Estimate(EstimateArgs),
    /// Conditional (or plain) autocorrelation function, optionally with null bands.
    Cacf(CacfArgs),
    /// Serial dependence test of one series.
    Test(TestArgs),
    /// Power grid from a TOML manifest.
    Power(PowerArgs),
    /// Simulate a series or a paired sample.
    Simulate(SimulateArgs),
    /// Bootstrap tests over a panel of series, one per column.
    Panel(PanelArgs),
    /// Run again the configuration recorded in a previous output.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct Out {
    /// Output file; standard output when absent or `-`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    /// CSV file, or `-` for standard input.
    input: PathBuf,
    /// Column holding the series; negative values count from the end.
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    column: isize,
    /// Treat the column as prices and use ln(v_t / v_{t-1}).
    #[arg(long)]
    log_returns: bool,
}

#[derive(Args)]
struct NullArgs {
    /// `resample` (i.i.d. draws from the data) or a model such as `wn`, `t:dof=3`.
    #[arg(long, default_value = "resample")]
    null_model: String,
    /// Noise added to the null model, e.g. `jump:r=10,p=0.05`.
    #[arg(long, default_value = "none")]
    null_noise: String,
    /// Burn-in override for GARCH models.
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    input: PathBuf,
    /// The two columns forming the pairs.
    #[arg(long, num_args = 2, default_values_t = [0, 1], allow_negative_numbers = true)]
    columns: Vec<isize>,
    /// Lower split level; give twice for separate x and y margins.
    #[arg(long)]
    p: Vec<f64>,
    /// Upper split level; give twice for separate x and y margins.
    #[arg(long)]
    q: Vec<f64>,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct CacfArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long, value_enum, default_value_t = Kind::Cacf)]
    kind: Kind,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 0.99)]
    q: f64,
    /// Add Monte-Carlo null bands.
    #[arg(long)]
    bands: bool,
    #[arg(long, default_value_t = 1000)]
    n_null: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    null: NullArgs,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mc,
    Bootstrap,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Statistic as `cacf:H:P:Q`, `acf:H` or `acf2:H`; overrides --kind/--lag/--p/--q.
    #[arg(long)]
    stat: Option<String>,
    #[arg(long, value_enum, default_value_t = Kind::Cacf)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    lag: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 0.99)]
    q: f64,
    #[arg(long, value_enum, default_value_t = Mode::Mc)]
    mode: Mode,
    #[arg(long, default_value_t = 1000)]
    n_null: usize,
    #[arg(long, default_value_t = 10_000)]
    b_boot: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    null: NullArgs,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct PowerArgs {
    manifest: PathBuf,
    /// JSON with full per-statistic results instead of the CSV table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    n_null: Option<usize>,
    #[arg(long)]
    m_trials: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output file; an interrupted run with the same config is resumed.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Univariate model, e.g. `ma1:theta=0.5`, `garch:w0=0.001,w1=0.2,w2=0.6`.
    #[arg(long, default_value = "wn", conflicts_with = "pair")]
    model: String,
    /// Additive noise, e.g. `jump:r=10,p=0.05` or `stable:alpha=1.8,c=1`.
    #[arg(long, default_value = "none")]
    noise: String,
    /// Bivariate model, e.g. `bvn:mx=0.5,my=0.5,vx=1,vy=1,cov=0.4` or `bstable:alpha=1.5`.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    burn_in: Option<usize>,
    #[command(flatten)]
    out: Out,
}

/// The lag-1 statistics of the panel table.
const PANEL_STATS: &[&str] = &[
    "acf:1",
    "acf2:1",
    "cacf:1:0.15:0.55",
    "cacf:1:0.55:0.85",
    "cacf:1:0.01:0.65",
    "cacf:1:0.01:0.75",
    "cacf:1:0.01:0.85",
    "cacf:1:0.45:0.99",
];

#[derive(Args)]
struct PanelArgs {
    /// Wide CSV, one series per column.
    input: PathBuf,
    #[arg(long)]
    log_returns: bool,
    /// Statistic to test; repeatable. Defaults to the standard lag-1 set.
    #[arg(long)]
    stat: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    b_boot: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: Out,
}

#[derive(Args)]
struct RerunArgs {
    /// A CSV or JSON file written by qcc.
    result: PathBuf,
    #[command(flatten)]
    out: Out,
}

fn with_burn_in(model: SeriesModel, burn_in: Option<usize>) -> SeriesModel {
    match (model, burn_in) {
        (SeriesModel::Garch(mut p), Some(b)) => {
            p.burn_in = b;
            SeriesModel::Garch(p)
        }
        (SeriesModel::GarchIid(mut p), Some(b)) => {
            p.burn_in = b;
            SeriesModel::GarchIid(p)
        }
        (m, _) => m,
    }
}

/// Canonical text forms, so equivalent spellings share a digest.
fn model_text(s: &str, burn_in: Option<usize>) -> Result<String> {
    let m = with_burn_in(s.parse::<SeriesModel>()?, burn_in);
    m.validate()?;
    Ok(m.to_string())
}

fn noise_text(s: &str) -> Result<String> {
    let n: NoiseSpec = s.parse()?;
    n.validate()?;
    Ok(n.to_string())
}

fn stat_text(s: &str) -> Result<String> {
    Ok(s.parse::<StatisticSpec>()?.to_string())
}

fn null_model(a: &NullArgs) -> Result<NullModel> {
    if a.null_model == "resample" {
        if a.null_noise != "none" {
            return Err(CliError::Invalid("--null-noise needs a parametric --null-model".into()));
        }
        return Ok(NullModel::Resample);
    }
    Ok(NullModel::Process {
        model: model_text(&a.null_model, a.burn_in)?,
        noise: noise_text(&a.null_noise)?,
    })
}

fn series_input(a: &SeriesArgs) -> Result<(SeriesInput, Source)> {
    let src = Source::load(&a.input)?;
    let si = SeriesInput {
        input: InputRef::of(&src),
        column: a.column,
        log_returns: a.log_returns,
    };
    Ok((si, src))
}

fn margin_splits(p: &[f64], q: &[f64]) -> Result<((f64, f64), (f64, f64))> {
    let pick = |v: &[f64], default: f64| -> Result<(f64, f64)> {
        match v {
            [] => Ok((default, default)),
            [a] => Ok((*a, *a)),
            [a, b] => Ok((*a, *b)),
            _ => Err(CliError::Invalid("--p and --q take at most two values each".into())),
        }
    };
    let (px, py) = pick(p, 0.01)?;
    let (qx, qy) = pick(q, 0.99)?;
    Ok(((px, qx), (py, qy)))
}

fn kind_stat(kind: Kind, lag: usize, p: f64, q: f64) -> Result<StatisticSpec> {
    Ok(match kind {
        Kind::Cacf => StatisticSpec::cond(lag, p, q)?,
        Kind::Acf => format!("acf:{lag}").parse()?,
        Kind::Acf2 => format!("acf2:{lag}").parse()?,
    })
}

/// Turns parsed arguments into a recorded configuration and its output target.
fn plan(cmd: Command) -> Result<(RunConfig, Target, Option<Source>)> {
    Ok(match cmd {
        Command::Estimate(a) => {
            let src = Source::load(&a.input)?;
            let (split_x, split_y) = margin_splits(&a.p, &a.q)?;
            let cfg = EstimateConfig {
                input: InputRef::of(&src),
                columns: [a.columns[0], a.columns[1]],
                split_x,
                split_y,
            };
            (RunConfig::Estimate(cfg), Target::new(a.out.output), Some(src))
        }
        Command::Cacf(a) => {
            let (series, src) = series_input(&a.series)?;
            let bands = if a.bands {
                Some(BandConfig {
                    n_null: a.n_null,
                    alpha: a.alpha,
                    seed: a.seed,
                    null_model: null_model(&a.null)?,
                })
            } else {
                None
            };
            let cfg = CacfConfig {
                series,
                kind: a.kind,
                max_lag: a.max_lag,
                split: (a.p, a.q),
                bands,
            };
            (RunConfig::Cacf(cfg), Target::new(a.out.output), Some(src))
        }
        Command::Test(a) => {
            let (series, src) = series_input(&a.series)?;
            let statistic = match &a.stat {
                Some(s) => stat_text(s)?,
                None => kind_stat(a.kind, a.lag, a.p, a.q)?.to_string(),
            };
            let mode = match a.mode {
                Mode::Mc => TestMode::Mc {
                    null_model: null_model(&a.null)?,
                    n_null: a.n_null,
                },
                Mode::Bootstrap => TestMode::Bootstrap { b_boot: a.b_boot },
            };
            let cfg = TestConfig {
                series,
                statistic,
                mode,
                alpha: a.alpha,
                seed: a.seed,
            };
            (RunConfig::Test(cfg), Target::new(a.out.output), Some(src))
        }
        Command::Power(a) => {
            let src = Source::load(&a.manifest)?;
            let text = String::from_utf8(src.bytes)
                .map_err(|_| CliError::Manifest(format!("{} is not UTF-8", a.manifest.display())))?;
            let mut m = PowerConfig::from_toml(&text)?;
            m.n_null = a.n_null.unwrap_or(m.n_null);
            m.m_trials = a.m_trials.unwrap_or(m.m_trials);
            m.alpha = a.alpha.unwrap_or(m.alpha);
            m.seed = a.seed.unwrap_or(m.seed);
            let manifest = m.with_burn_in(a.burn_in)?;
            let run = RunConfig::Power(PowerRun {
                json: a.json,
                manifest,
            });
            (run, Target::new(a.output), None)
        }
        Command::Simulate(a) => {
            let model = match &a.pair {
                Some(p) => {
                    if a.noise != "none" {
                        return Err(CliError::Invalid("--noise applies to univariate models only".into()));
                    }
                    SimModel::Pair {
                        model: p.parse::<PairModel>()?.to_string(),
                    }
                }
                None => SimModel::Series {
                    model: model_text(&a.model, a.burn_in)?,
                    noise: noise_text(&a.noise)?,
                },
            };
            let cfg = SimulateConfig {
                model,
                n: a.n,
                seed: a.seed,
            };
            (RunConfig::Simulate(cfg), Target::new(a.out.output), None)
        }
        Command::Panel(a) => {
            let src = Source::load(&a.input)?;
            let statistics = if a.stat.is_empty() {
                PANEL_STATS.iter().map(|s| s.to_string()).collect()
            } else {
                a.stat.iter().map(|s| stat_text(s)).collect::<Result<_>>()?
            };
            let cfg = PanelConfig {
                input: InputRef::of(&src),
                log_returns: a.log_returns,
                statistics,
                b_boot: a.b_boot,
                alpha: a.alpha,
                seed: a.seed,
            };
            (RunConfig::Panel(cfg), Target::new(a.out.output), Some(src))
        }
        Command::Rerun(a) => (config::recorded(&a.result)?, Target::new(a.out.output), None),
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let (cfg, target, pre) = plan(cli.command)?;
    commands::execute(&cfg, &target, pre)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
