use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use memgov::commands::{self, CommandError, GovernOptions, PipelineConfig};
use memgov::index::DEFAULT_TOP_K;

#[derive(Parser)]
#[command(name = "memgov", version, about = "Governed experiential memory for coding agents")]
struct Cli {
    /// Pipeline configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for governance; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Use the rule-based distiller and evaluator instead of a chat provider.
    #[arg(long, global = true)]
    fixture_mode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Purify, distill, refine, deduplicate and index a triplet file.
    Govern {
        /// Triplets as JSON Lines (falls back to `paths.input` in the config).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Store directory to write (falls back to `paths.output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Audit log path; defaults to `audit.jsonl` inside the store directory.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Rank repositories from a JSON Lines stats file.
    Select {
        /// One `{"repo", "stars", "issues", "pulls"}` object per line.
        stats: PathBuf,
    },
    /// Dry-run instance purification and write rejections to an audit log.
    Purify {
        /// Triplets as JSON Lines.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "purify-audit.jsonl")]
        audit: PathBuf,
    },
    /// Search a memory store by symptom text.
    Search {
        /// Store directory written by `govern`.
        #[arg(long)]
        index: PathBuf,
        query: String,
        /// Number of hits to return.
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
    },
    /// Show one card in full.
    Browse {
        /// Store directory written by `govern`.
        #[arg(long)]
        index: PathBuf,
        card_id: String,
    },
    /// Serve the search and browse tools over HTTP.
    Serve {
        /// Store directory written by `govern`.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Run the scripted reference search policy on an issue text file.
    DemoAgent {
        /// Store directory written by `govern`.
        #[arg(long)]
        index: PathBuf,
        /// Plain-text issue; the first non-blank line is the title.
        issue: PathBuf,
        /// Maximum number of searches.
        #[arg(long, default_value_t = commands::DEFAULT_ROUNDS)]
        rounds: usize,
    },
    /// Summarize a memory store and, optionally, an audit log.
    Stats {
        /// Store directory written by `govern`.
        #[arg(long)]
        index: PathBuf,
        /// Audit log to tally by stage.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable output"));
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let cfg = PipelineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Govern { input, out, audit } => {
            let opts = GovernOptions {
                input,
                output_dir: out,
                audit_log: audit,
                workers: cli.workers,
                fixture_mode: cli.fixture_mode,
            };
            let summary = commands::govern(&cfg, &opts)?;
            if cli.json {
                print_json(&summary);
            } else {
                let s = summary;
                println!(
                    "read {}  purified {}  distilled {}  qc_accepted {}  deduped {}  indexed {}",
                    s.read, s.purified, s.distilled, s.qc_accepted, s.deduped, s.indexed
                );
            }
        }
        Command::Select { stats } => {
            let ranked = commands::select(&cfg, &stats)?;
            for r in &ranked {
                if cli.json {
                    print_json(r);
                } else {
                    println!("{:.6}\t{}", r.score, r.repo);
                }
            }
        }
        Command::Purify { input, audit } => {
            let summary = commands::purify_dry_run(&cfg, &input, &audit)?;
            if cli.json {
                print_json(&summary);
            } else {
                println!("read {}  accepted {}", summary.read, summary.accepted);
                for (code, n) in &summary.rejected {
                    println!("rejected {code}: {n}");
                }
            }
        }
        Command::Search { index, query, top_k } => {
            let res = commands::search(&index, &query, top_k)?;
            if cli.json {
                print_json(&res);
            } else {
                print!("{}", commands::format_search(&res));
            }
        }
        Command::Browse { index, card_id } => {
            let card = commands::browse(&index, &card_id)?;
            if cli.json {
                print_json(&card);
            } else {
                print!("{}", commands::format_card(&card));
            }
        }
        Command::Serve { index, host, port } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CommandError::Infra(e.to_string()))?;
            rt.block_on(async {
                let (listener, svc) = commands::prepare_server(&index, SocketAddr::new(host, port)).await?;
                let addr = listener.local_addr().map_err(|e| CommandError::Infra(e.to_string()))?;
                eprintln!("serving {} cards on http://{addr}", svc.health().card_count);
                commands::run_server(listener, svc, commands::interrupt()).await
            })?;
        }
        Command::DemoAgent { index, issue, rounds } => {
            let text = std::fs::read_to_string(&issue)
                .map_err(|e| CommandError::Data(format!("{}: {e}", issue.display())))?;
            let (store, embedder) = commands::open_store(&index)?;
            let trace = commands::demo_agent(store, embedder, &text, rounds)?;
            if let Some(w) = &trace.warning {
                eprintln!("warning: {w}");
            }
            if cli.json {
                print_json(&trace);
            } else {
                print!("{}", commands::format_trace(&trace));
            }
        }
        Command::Stats { index, audit } => {
            let s = commands::stats(&index, audit.as_deref())?;
            if cli.json {
                print_json(&s);
            } else {
                println!("cards {}  dimension {}  embedder {}", s.card_count, s.dimension, s.embedder_id);
                println!("repositories {}  mean signals {:.2}", s.repositories, s.mean_signals);
                for (stage, n) in s.audit.iter().flatten() {
                    println!("audit {stage}: {n}");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
