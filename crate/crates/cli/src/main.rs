use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use triphase::scenario::parse_pipelines;
use triphase::{list_presets, run, Pipeline, RunReport, Scenario};

/// Exit status when an integration halted early; partial output is kept.
const EXIT_HALTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "triphase",
    version,
    about = "Gas/water/ice melting front simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or several with --sweep.
    Run(RunArgs),
    /// Print the built-in presets as JSON.
    Presets,
    /// Print the fully resolved configuration of a scenario.
    Config {
        /// Preset name or config file path.
        target: String,
    },
}

#[derive(Clone)]
struct PipelineList(Vec<Pipeline>);

fn parse_pipeline_list(s: &str) -> Result<PipelineList, String> {
    parse_pipelines(s).map(PipelineList)
}

#[derive(Args)]
struct RunArgs {
    /// Preset names or config file paths.
    #[arg(required = true)]
    targets: Vec<String>,
    /// Cells per compartment.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Output directory. With --sweep each scenario gets a subdirectory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of numeric,asymptotic,compare.
    #[arg(long, value_parser = parse_pipeline_list)]
    pipelines: Option<PipelineList>,
    /// Write seconds, metres, kelvin and mol/m^3 instead of scaled values.
    #[arg(long)]
    dimensional: bool,
    /// Run all targets concurrently.
    #[arg(long)]
    sweep: bool,
}

impl RunArgs {
    fn scenario(&self, target: &str) -> anyhow::Result<Scenario> {
        let mut s = Scenario::resolve(target).with_context(|| format!("loading `{target}`"))?;
        if let Some(n) = self.n {
            s.n = n;
        }
        if let Some(t) = self.t_end {
            s.t_end = t;
        }
        if let Some(a) = self.abs_tol {
            s.abs_tol = a;
        }
        if let Some(r) = self.rel_tol {
            s.rel_tol = r;
        }
        if let Some(p) = &self.pipelines {
            s.pipelines = p.0.clone();
        }
        s.dimensional |= self.dimensional;
        s.validate()
            .with_context(|| format!("invalid scenario `{target}`"))?;
        Ok(s)
    }
}

/// Distinct subdirectory names, suffixing repeats with `_2`, `_3`, ...
fn unique_dirs(names: &[String]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    names
        .iter()
        .map(|name| {
            let k = seen.entry(name).or_insert(0);
            *k += 1;
            if *k == 1 {
                name.clone()
            } else {
                format!("{name}_{k}")
            }
        })
        .collect()
}

fn summarize(report: &RunReport) {
    let scales = report.scales;
    let hours = |t: f64| scales.time(t) / 3600.0;
    match report.stop {
        Some(stop) => {
            let melt = report
                .melt_time
                .map_or("n/a".to_string(), |t| format!("{t:.6} ({:.3} h)", hours(t)));
            println!("{}: {stop}, melt time {melt}", report.name);
        }
        None => println!("{}: asymptotic only", report.name),
    }
    println!(
        "{}: leading-order melt time {:.6} ({:.3} h)",
        report.name,
        report.melt_time_series,
        hours(report.melt_time_series)
    );
    if let Some(why) = &report.halt_reason {
        eprintln!(
            "{}: integration halted: {why}; partial output kept",
            report.name
        );
    }
    println!(
        "{}: wrote {} files to {}",
        report.name,
        report.files.len(),
        report.out_dir.display()
    );
}

fn run_one(scenario: &Scenario, dir: &Path) -> anyhow::Result<RunReport> {
    run(scenario, dir).with_context(|| format!("running `{}`", scenario.name))
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    if args.targets.len() > 1 && !args.sweep {
        bail!("several scenarios given; pass --sweep to run them together");
    }
    let scenarios = args
        .targets
        .iter()
        .map(|t| args.scenario(t))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let reports: Vec<anyhow::Result<RunReport>> = if args.sweep {
        let names: Vec<String> = scenarios.iter().map(|s| s.name.clone()).collect();
        let dirs: Vec<PathBuf> = unique_dirs(&names)
            .into_iter()
            .map(|d| args.out.join(d))
            .collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = scenarios
                .iter()
                .zip(&dirs)
                .map(|(s, d)| scope.spawn(move || run_one(s, d)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(anyhow::anyhow!("worker panicked")))
                })
                .collect()
        })
    } else {
        vec![run_one(&scenarios[0], &args.out)]
    };

    let mut code = ExitCode::SUCCESS;
    let mut failed = false;
    for r in &reports {
        match r {
            Ok(report) => {
                summarize(report);
                if report.halted() {
                    code = ExitCode::from(EXIT_HALTED);
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failed = true;
            }
        }
    }
    Ok(if failed { ExitCode::FAILURE } else { code })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Presets => serde_json::to_string_pretty(&list_presets())
            .map(|json| {
                println!("{json}");
                ExitCode::SUCCESS
            })
            .map_err(Into::into),
        Command::Config { target } => Scenario::resolve(target)
            .map(|s| {
                print!("{}", s.to_config_string());
                ExitCode::SUCCESS
            })
            .map_err(Into::into),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
