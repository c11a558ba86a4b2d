use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use splitq_campaign::{read_log, CampaignService, CampaignSession};
use splitq_core::distributions::GpdParams;
use splitq_core::estimators::EstimatorRegistry;
use splitq_core::robustness::{bounds_grid_csv, NeighborhoodSpec, Weight};
use splitq_core::simulation::{emit_table, ProcedureRegistry, StudyFile};

#[derive(Parser)]
#[command(name = "splitq", version, about = "Extreme quantiles from binary trials by sequential splitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo study file and print its table.
    Simulate {
        study: PathBuf,
        /// Override the file's root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the full results (summaries and per-replica records) as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Misspecification bounds.
    Robustness {
        #[command(subcommand)]
        command: RobustnessCommand,
    },
    /// Serve the campaign HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "0.0.0.0")]
        host: String,
        /// Event-log directory; sessions are kept in memory only when absent.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Answer cross-origin requests.
        #[arg(long)]
        cors: bool,
    },
    /// Campaign log tools.
    Campaign {
        #[command(subcommand)]
        command: CampaignCommand,
    },
}

#[derive(Subcommand)]
enum RobustnessCommand {
    /// CSV grid of conditional-probability bounds over s ≤ x.
    Bounds {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        eps: f64,
        /// Weight function: power:<kappa> or exp:<kappa>.
        #[arg(long, default_value = "power:1")]
        w: String,
        /// Comma-separated thresholds s.
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Comma-separated levels x.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum CampaignCommand {
    /// Rebuild a session from its event log and print the session document.
    Replay {
        log: PathBuf,
        /// Print the full report instead.
        #[arg(long)]
        report: bool,
    },
}

fn parse_weight(spec: &str) -> Result<Weight> {
    let (kind, kappa) = spec.split_once(':').context("weight must look like power:<kappa> or exp:<kappa>")?;
    let kappa: f64 = kappa.parse().with_context(|| format!("bad kappa {kappa:?}"))?;
    match kind {
        "power" => Ok(Weight::Power { kappa }),
        "exp" | "exponential" => Ok(Weight::Exponential { kappa }),
        other => bail!("unknown weight {other:?}; use power or exp"),
    }
}

fn simulate(study: PathBuf, seed: Option<u64>, csv: Option<PathBuf>, json: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(&study).with_context(|| format!("reading {}", study.display()))?;
    let mut file: StudyFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", study.display()))?;
    if let Some(s) = seed {
        file.seed = s;
    }
    let registry = ProcedureRegistry::builtin(EstimatorRegistry::builtin());
    let (rows, results) = file.run(&registry)?;
    if let Some(layout) = file.layout {
        let table = emit_table(&rows, layout);
        print!("{}", table.text);
        if let Some(path) = &csv {
            fs::write(path, &table.csv)?;
        }
    } else if csv.is_some() {
        bail!("--csv needs a table layout in the study file");
    }
    for r in &results {
        for (quantity, s) in &r.summaries {
            if let Some(re) = &s.relative_error {
                println!(
                    "{} [{quantity}] relative error: mean {:.4} std {:.4} median {:.4} ({} replicas, {} failed)",
                    r.name,
                    re.mean,
                    re.std.unwrap_or(f64::NAN),
                    re.median,
                    r.replicas,
                    r.failures
                );
            }
        }
    }
    if let Some(path) = json {
        fs::write(path, serde_json::to_string_pretty(&results)?)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { study, seed, csv, json } => simulate(study, seed, csv, json),
        Command::Robustness {
            command: RobustnessCommand::Bounds { c, a, eps, w, s, x },
        } => {
            let spec = NeighborhoodSpec::new(GpdParams::new(c, a)?, eps, parse_weight(&w)?)?;
            print!("{}", bounds_grid_csv(&spec, &s, &x));
            Ok(())
        }
        Command::Serve {
            port,
            host,
            data_dir,
            cors,
        } => {
            let registry = EstimatorRegistry::builtin();
            let service = match &data_dir {
                Some(dir) => CampaignService::open(dir, registry)?,
                None => CampaignService::in_memory(registry),
            };
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(splitq_campaign::http::serve(Arc::new(service), addr, cors))?;
            Ok(())
        }
        Command::Campaign {
            command: CampaignCommand::Replay { log, report },
        } => {
            let events = read_log(&log)?;
            let session = CampaignSession::replay(&events, &EstimatorRegistry::builtin())?;
            let out = if report {
                serde_json::to_string_pretty(&session.report())?
            } else {
                serde_json::to_string_pretty(&session.doc())?
            };
            println!("{out}");
            Ok(())
        }
    }
}
