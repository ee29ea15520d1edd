use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rmtlab::engine::Engine;
use rmtlab::harness::{self, ExperimentConfig, ExperimentKind, ExperimentReport, RadialConfig, TestFunctionConfig};
use rmtlab::oracle::{exact_trace_moment, mean_recursion_check, TraceWord};
use rmtlab::stein::q_covariance_check;
use rmtlab::theory::{check_sigma, covariance_model, parse_rational, rational_text};
use rmtlab::SpaceKind;

#[derive(Parser)]
#[command(name = "rmtlab", version, about = "Trace-statistic experiments on rotationally invariant matrix ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample means of W_p against the leading-order predictions.
    Means(RunArgs),
    /// Covariance of W (Ginibre) or Z against the limiting Σ.
    Cov(RunArgs),
    /// Conditional drift and quadratic limits of the exchangeable pair for one X.
    Stein(RunArgs),
    /// Distance to the Gaussian limit across sizes, with a log-log slope.
    Sweep(RunArgs),
    /// Distance to the Gaussian limit at a single size.
    Distance(RunArgs),
    /// Tail survival and L4/L2 ratios on the sphere.
    Tails(RunArgs),
    /// Second moments of the rotation coefficients q over Haar 2-frames.
    Qmoments(QArgs),
    /// Exact sphere moments of trace words.
    Oracle(OracleArgs),
    /// Exact A, B and Σ of the covariance model.
    TheoryDump(TheoryArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its fields when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    space: Option<SpaceKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// sphere, gauss, or chi:<dof>.
    #[arg(long)]
    radial: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Exact rational scale of B, e.g. 1/2.
    #[arg(long)]
    beta_factor: Option<String>,
    /// Model-error constant C of the C/n band.
    #[arg(long)]
    slack: Option<f64>,
    /// Comma-separated sizes for sweeps and tails.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated ε schedule for the Stein experiment.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// cos (default) or clipped.
    #[arg(long)]
    test_function: Option<String>,
    /// Direction for cos_linear, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    /// Radius for quadratic_clipped.
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 if any row fails its band.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct QArgs {
    #[arg(long, default_value_t = 16)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    space: SpaceKind,
    #[arg(long)]
    n: usize,
    /// Trace word such as X^2X*^2; several words give the product of traces.
    #[arg(long, required_unless_present = "recursion")]
    word: Vec<String>,
    /// Multiply by ‖X‖² inside the expectation.
    #[arg(long)]
    weighted: bool,
    /// Check the mean recursion at power p instead.
    #[arg(long)]
    recursion: Option<usize>,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    space: SpaceKind,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long)]
    beta_factor: Option<String>,
}

fn parse_radial(s: &str) -> Result<RadialConfig> {
    Ok(match s {
        "sphere" => RadialConfig::Sphere,
        "gauss" => RadialConfig::Gauss,
        other => match other.strip_prefix("chi:") {
            Some(k) => RadialConfig::Custom {
                chi_dof: k.parse().with_context(|| format!("bad chi degrees of freedom {k:?}"))?,
            },
            None => bail!("unknown radial law {other:?} (sphere, gauss, chi:<dof>)"),
        },
    })
}

fn build_config(kind: ExperimentKind, a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            if cfg.experiment != kind {
                bail!("config is for {:?}, not {kind:?}", cfg.experiment);
            }
            cfg
        }
        None => {
            let space = a.space.context("--space is required without --config")?;
            let n = a.n.context("--n is required without --config")?;
            ExperimentConfig::new(kind, space, n, a.m.unwrap_or(8), a.trials.unwrap_or(10_000))
        }
    };
    if let Some(s) = a.space {
        cfg.space = s;
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(m) = a.m {
        cfg.m = m;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(r) = &a.radial {
        cfg.radial = parse_radial(r)?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.beta_factor.is_some() {
        cfg.beta_factor = a.beta_factor.clone();
    }
    if a.slack.is_some() {
        cfg.slack = a.slack;
    }
    if let Some(s) = &a.sizes {
        cfg.sweep_sizes = s.clone();
    }
    if a.eps.is_some() {
        cfg.eps = a.eps.clone();
    }
    match a.test_function.as_deref() {
        None if a.theta.is_some() => cfg.test_function = Some(TestFunctionConfig::CosLinear { theta: a.theta.clone() }),
        None => {}
        Some("cos") => cfg.test_function = Some(TestFunctionConfig::CosLinear { theta: a.theta.clone() }),
        Some("clipped") => cfg.test_function = Some(TestFunctionConfig::QuadraticClipped { radius: a.radius }),
        Some(other) => bail!("unknown test function {other:?} (cos, clipped)"),
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &ExperimentReport, cfg: &ExperimentConfig, strict: bool) -> Result<ExitCode> {
    match &cfg.output {
        Some(path) => {
            report.persist(path).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
        }
        None => print!("{}", report.to_text()?),
    }
    for note in &report.header.notes {
        eprintln!("note: {note}");
    }
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} rows within band", report.rows.len() - failed, report.rows.len());
    Ok(if strict && failed > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn run_experiment(kind: ExperimentKind, a: &RunArgs) -> Result<ExitCode> {
    let cfg = build_config(kind, a)?;
    let report = harness::run(&cfg)?;
    emit(&report, &cfg, a.strict)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Means(a) => run_experiment(ExperimentKind::Means, &a),
        Command::Cov(a) => run_experiment(ExperimentKind::Covariance, &a),
        Command::Stein(a) => run_experiment(ExperimentKind::Stein, &a),
        Command::Sweep(a) => run_experiment(ExperimentKind::Sweep, &a),
        Command::Distance(a) => run_experiment(ExperimentKind::Distance, &a),
        Command::Tails(a) => run_experiment(ExperimentKind::Tails, &a),
        Command::Qmoments(a) => {
            let rep = q_covariance_check(a.d, a.trials, a.seed, &Engine::new(a.workers)?)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(a) => {
            if let Some(p) = a.recursion {
                let r = mean_recursion_check(a.space, a.n, p)?;
                println!(
                    "E W_{p} = {}\nrecursion = {}\nholds: {}",
                    rational_text(&r.mean),
                    rational_text(&r.recursion),
                    r.holds()
                );
                return Ok(if r.holds() { ExitCode::SUCCESS } else { ExitCode::from(2) });
            }
            let words = a
                .word
                .iter()
                .map(|w| w.parse::<TraceWord>())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let value = if words.len() == 1 {
                exact_trace_moment(a.space, a.n, &words[0], a.weighted)?
            } else {
                if a.weighted {
                    bail!("--weighted applies to a single word");
                }
                rmtlab::oracle::exact_product_moment(a.space, a.n, &words)?
            };
            let (re, im) = value.to_f64_pair();
            println!("{value}\t({re:.12e}, {im:.12e})");
            Ok(ExitCode::SUCCESS)
        }
        Command::TheoryDump(a) => {
            let beta = a.beta_factor.as_deref().map(parse_rational).transpose()?;
            let model = covariance_model(a.space, a.m, beta)?;
            print!("{}", model.dump());
            let check = check_sigma(&model);
            println!("symmetric: {}\nmin eigenvalue: {:.6e}", check.symmetric, check.min_eigenvalue);
            Ok(ExitCode::SUCCESS)
        }
    }
}
