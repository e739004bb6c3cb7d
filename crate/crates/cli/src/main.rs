//! `benchvis`: parse benchmark outputs, render plans, compare runs and serve
//! the HTTP API.
//!
//! Exit codes: 0 on success, 1 when an input cannot be read or parsed (or
//! the server cannot bind), 2 on usage errors. Failures print exactly one
//! line of the form `error[Code]: message` to stderr.

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use benchvis_core::analytics::build_comparison;
use benchvis_core::normalize::{plan_view, MetricKindPlan, Terminology};
use benchvis_core::plan::Dialect;
use benchvis_core::sysbench::parse_sysbench;
use benchvis_core::tpch::parse_tpch;
use benchvis_service::http::{router, serve};
use benchvis_service::Session;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "benchvis", version, about = "Benchmark result analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a sysbench log or TPC-H result file to JSON.
    Parse {
        #[arg(long, value_enum)]
        kind: Kind,
        input: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        compact: bool,
    },
    /// Render an EXPLAIN capture as a hierarchy document with metric shares.
    Plan {
        input: PathBuf,
        #[arg(long, default_value = "auto", value_parser = ["auto", "postgres", "mysql", "mariadb"])]
        dialect: String,
        #[arg(long, default_value = "canonical", value_parser = ["canonical", "postgres", "mysql", "mariadb"])]
        terminology: String,
        #[arg(long, default_value = "cost", value_parser = ["cost", "rows"])]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        compact: bool,
    },
    /// Align per-query durations of several TPC-H result files.
    Compare {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        compact: bool,
    },
    /// Serve the v1 HTTP API.
    Serve {
        #[arg(long, env = "BENCHVIS_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Session file loaded at start and written on shutdown.
        #[arg(long, env = "BENCHVIS_SNAPSHOT")]
        snapshot: Option<PathBuf>,
        /// Directory with the dashboard bundle, served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Sysbench,
    Tpch,
}

struct Failure {
    code: String,
    message: String,
    exit: u8,
}

impl Failure {
    fn new(code: impl Into<String>, message: impl ToString, exit: u8) -> Self {
        Failure {
            code: code.into(),
            message: message.to_string(),
            exit,
        }
    }

    fn usage(message: impl ToString) -> Self {
        Failure::new("UsageError", message, 2)
    }
}

impl From<benchvis_core::Error> for Failure {
    fn from(e: benchvis_core::Error) -> Self {
        Failure::new(e.code(), e, 1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return report(Failure::usage(first));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let message = f.message.replace('\n', " ");
    eprintln!("error[{}]: {}", f.code, message);
    ExitCode::from(f.exit)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Parse {
            kind,
            input,
            out,
            compact,
        } => {
            let text = read_input(&input)?;
            match kind {
                Kind::Sysbench => emit(&parse_sysbench(&text)?, out.as_deref(), compact),
                Kind::Tpch => emit(&parse_tpch(&text)?, out.as_deref(), compact),
            }
        }
        Command::Plan {
            input,
            dialect,
            terminology,
            metric,
            out,
            compact,
        } => {
            let text = read_input(&input)?;
            let dialect = match dialect.as_str() {
                "auto" => None,
                d => Some(d.parse::<Dialect>().map_err(Failure::usage)?),
            };
            let terminology: Terminology = terminology.parse().map_err(Failure::usage)?;
            let metric: MetricKindPlan = metric.parse().map_err(Failure::usage)?;
            let view = plan_view(&text, dialect, terminology, metric)?;
            emit(&view, out.as_deref(), compact)
        }
        Command::Compare {
            kind,
            inputs,
            out,
            compact,
        } => {
            if kind != Kind::Tpch {
                return Err(Failure::usage("compare supports --kind tpch only"));
            }
            let mut runs = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let text = read_input(path)?;
                let run = match parse_tpch(&text) {
                    Ok(run) => run,
                    Err(_) if parse_sysbench(&text).is_ok() => {
                        return Err(Failure::usage(format!(
                            "{} is a sysbench log, not a TPC-H result file",
                            path.display()
                        )));
                    }
                    Err(e) => return Err(e.into()),
                };
                runs.push((run_name(path), run));
            }
            emit(&build_comparison(&runs)?, out.as_deref(), compact)
        }
        Command::Serve {
            port,
            host,
            snapshot,
            static_dir,
        } => serve_blocking(&host, port, snapshot, static_dir),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new("IoError", format!("{}: {e}", path.display()), 1))
}

fn run_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, compact: bool) -> Result<(), Failure> {
    let mut json = if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .map_err(|e| Failure::new("IoError", e, 1))?;
    json.push('\n');
    let written = match out {
        Some(path) => fs::write(path, json),
        None => io::stdout().lock().write_all(json.as_bytes()),
    };
    written.map_err(|e| Failure::new("IoError", e, 1))
}

fn serve_blocking(
    host: &str,
    port: u16,
    snapshot: Option<PathBuf>,
    static_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| Failure::usage(format!("invalid listen address {host}:{port}: {e}")))?;
    let session = match &snapshot {
        Some(path) if path.exists() => Session::load_snapshot(path).map_err(|e| {
            Failure::new("SnapshotError", format!("{}: {e}", path.display()), 1)
        })?,
        _ => Session::new(),
    };
    let session = Arc::new(session);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new("IoError", e, 1))?;

    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new("BindError", format!("{addr}: {e}"), 1))?;
        let local = listener.local_addr().map_err(|e| Failure::new("BindError", e, 1))?;
        eprintln!("listening on http://{local}");
        let app = router(session.clone(), static_dir.as_deref());
        serve(listener, app, shutdown_signal())
            .await
            .map_err(|e| Failure::new("IoError", e, 1))
    })?;

    if let Some(path) = &snapshot {
        session
            .save_snapshot(path)
            .map_err(|e| Failure::new("SnapshotError", format!("{}: {e}", path.display()), 1))?;
    }
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}
