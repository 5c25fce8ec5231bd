use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tailcert::nets::{build_net, verify_covering, MetricSpaceSpec};
use tailcert::verify::{check_certificate, fit_constants, EmpiricalTail, FitSearch};
use tailcert::TailCertificate;
use tailcert_cli::scenarios::parse_strategy;
use tailcert_cli::{emit, run_scenario, ExperimentReport, Format, ScenarioConfig, ScenarioError};

#[derive(Parser)]
#[command(name = "tailcert", version, about = "Run and check tail-certificate scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its report.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render a saved report as structured-text, csv or plotdata.
    Emit {
        report: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an ε-net and write it as a table.
    Net {
        /// sphere:D or ball:D:R
        #[arg(long)]
        space: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "greedy")]
        strategy: String,
        #[arg(long, default_value_t = 100_000)]
        probes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the symbolic constants of a certificate against a saved tail.
    Fit {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        tail: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a concrete certificate against a saved tail.
    Check {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        tail: PathBuf,
    },
}

fn parse_space(s: &str) -> Result<MetricSpaceSpec, ScenarioError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || ScenarioError::Config(format!("bad space {s:?}; expected sphere:D or ball:D:R"));
    match parts.as_slice() {
        ["sphere", d] => Ok(MetricSpaceSpec::Sphere { d: d.parse().map_err(|_| bad())? }),
        ["ball", d, r] => Ok(MetricSpaceSpec::Ball { d: d.parse().map_err(|_| bad())?, radius: r.parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

fn read_cert(path: &PathBuf) -> Result<TailCertificate, ScenarioError> {
    Ok(TailCertificate::from_json(&std::fs::read_to_string(path)?)?)
}

fn read_tail(path: &PathBuf) -> Result<EmpiricalTail, ScenarioError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, ScenarioError> {
    match cli.command {
        Command::Run { config, seed, out, workers } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            if let Some(o) = &out {
                cfg.out_dir = Some(o.display().to_string());
            }
            let report = run_scenario(cfg)?;
            print!("{}", report.summary());
            let dir = report.config.out_dir.clone().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            for f in [Format::StructuredText, Format::Csv, Format::PlotData] {
                emit(&report, f, &dir)?;
            }
            Ok(report.pass())
        }
        Command::Emit { report, format, out } => {
            let rep = ExperimentReport::from_json(&std::fs::read_to_string(report)?)?;
            let m = emit(&rep, format, &out)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            Ok(true)
        }
        Command::Net { space, eps, seed, strategy, probes, out } => {
            let space = parse_space(&space)?;
            let mut net = build_net(&space, eps, seed, &parse_strategy(&strategy)?)?;
            let cov = verify_covering(&net, probes, seed.wrapping_add(1), 0.05);
            eprintln!(
                "{} points (bound {:?}), max probe distance {:.4}, digest {}",
                net.len(),
                net.cardinality_bound(),
                cov.max_probe_distance,
                net.digest()
            );
            let pass = cov.pass;
            net.verification = Some(cov);
            write_or_print(&out, &net.to_table())?;
            Ok(pass)
        }
        Command::Fit { cert, tail, out } => {
            let (fitted, verdict) = fit_constants(&read_cert(&cert)?, &read_tail(&tail)?, &FitSearch::default())?;
            eprintln!("fitted {:?}, worst slack {:.4}", verdict.fitted, verdict.worst_slack);
            write_or_print(&out, &fitted.to_json())?;
            Ok(true)
        }
        Command::Check { cert, tail } => {
            let v = check_certificate(&read_cert(&cert)?, &read_tail(&tail)?)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(v.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
