//! Command line front end for the scenario registry.

use charp::verify::{self, Budget, Params, Report};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "charp", version, about = "Run verification scenarios")]
struct Cli {
    /// Emit JSON instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// TOML file with `max_level`, `max_group_order`, `max_terms` overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenario ids with their titles and tags.
    List,
    /// Run one scenario.
    Run {
        id: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scenario, optionally filtered by tag.
    RunAll {
        #[arg(long)]
        tag: Option<String>,
        /// Write the JSON reports to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn summary(r: &Report) -> String {
    let status = if r.skipped {
        "SKIP"
    } else if r.pass {
        "PASS"
    } else {
        "FAIL"
    };
    format!("{status} {:<26} {:>6} ms", r.id, r.runtime_ms)
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => {
            std::fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => Ok(()),
    }
}

fn usage(err: charp::Error) -> ExitCode {
    eprintln!("charp: {err}");
    match err {
        charp::Error::UnknownScenario(_) | charp::Error::Invalid(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match Budget::load(cli.config.as_deref()) {
        Ok(b) => b,
        Err(e) => return usage(e),
    };
    let (reports, out) = match cli.command {
        Command::List => {
            let reg = verify::registry();
            if cli.json {
                let v: Vec<_> = reg
                    .iter()
                    .map(|s| serde_json::json!({"id": s.id, "title": s.title, "topic": s.topic, "tags": s.tags}))
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&v).expect("serializable")
                );
            } else {
                for s in reg {
                    println!("{:<26} {:<28} {}", s.id, s.tags.join(","), s.title);
                }
            }
            return ExitCode::SUCCESS;
        }
        Command::Run {
            id,
            p,
            q,
            dim,
            seed,
            out,
        } => match verify::run_with(&id, &Params { p, q, dim, seed }, budget) {
            Ok(r) => (vec![r], out),
            Err(e) => return usage(e),
        },
        Command::RunAll { tag, out } => {
            match verify::run_all_with(tag.as_deref().unwrap_or(""), budget) {
                Ok(r) => (r, out),
                Err(e) => return usage(e),
            }
        }
    };
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(&reports)
    }
    .expect("serializable");
    if let Err(e) = write_out(&out, &text) {
        eprintln!("charp: {e}");
        return ExitCode::from(2);
    }
    if cli.json {
        println!("{text}");
    } else {
        for r in &reports {
            println!("{}", summary(r));
        }
    }
    ExitCode::from(verify::exit_code(&reports) as u8)
}
