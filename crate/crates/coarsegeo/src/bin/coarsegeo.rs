use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use coarsegeo::harness::cache::cached_ball;
use coarsegeo::harness::config::ModelSpec;
use coarsegeo::harness::report::diff_json;
use coarsegeo::harness::{emit_report, run_experiment, ExperimentConfig, Overrides};
use coarsegeo::{Error, Result};

#[derive(Parser)]
#[command(name = "coarsegeo", version, about = "Contracting systems and admissible paths on relatively hyperbolic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        radius: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        /// Output directory for report.json and the CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (or load from the cache) a ball and print a summary.
    Ball {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 1 << 22)]
        max_vertices: usize,
    },
    /// Compare two reports, ignoring wall time.
    Report {
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        diff: Vec<PathBuf>,
    },
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { config, seed, radius, samples, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides { seed, radius, samples, out })?;
            let report = run_experiment(&cfg)?;
            let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            for p in emit_report(&report, &dir)? {
                eprintln!("wrote {}", p.display());
            }
            for w in &report.witnesses {
                eprintln!("witness: {w}");
            }
            if let Some(r) = &report.resource_overrun {
                eprintln!("stopped early: {r}");
            }
            let failed = report.conditions.iter().filter(|c| !c.pass).count();
            println!("{}: {:?}, {} conditions, {failed} failed", report.kind, report.outcome, report.conditions.len());
            Ok(report.outcome.exit_code() as u8)
        }
        Command::Ball { model, radius, max_vertices } => {
            let text = std::fs::read_to_string(&model).map_err(|e| Error::io(&model, e))?;
            let spec: ModelSpec = toml::from_str(&text)
                .map_err(|e| Error::Config { path: model.display().to_string(), message: e.to_string() })?;
            let m = spec.build()?;
            let (g, status) = cached_ball(&m, radius, max_vertices)?;
            let mut spheres = vec![0usize; radius as usize + 1];
            for e in g.elements() {
                spheres[e.len() as usize] += 1;
            }
            let edges: usize = (0..g.n_vertices() as u32).map(|v| g.neighbours(v).count()).sum::<usize>() / 2;
            let summary = json!({
                "model_hash": m.hash_hex(),
                "radius": radius,
                "vertices": g.n_vertices(),
                "edges": edges,
                "sphere_sizes": spheres,
                "cache": status,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
            Ok(0)
        }
        Command::Report { diff } => {
            let a = read_json(&diff[0])?;
            let b = read_json(&diff[1])?;
            let d = diff_json(&a, &b);
            for line in &d {
                println!("{line}");
            }
            if d.is_empty() {
                println!("identical");
                Ok(0)
            } else {
                Ok(1)
            }
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
