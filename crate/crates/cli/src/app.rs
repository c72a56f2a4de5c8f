//! Argument parsing and the three subcommands.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};

use powerkg_core::pipeline::{build, BuildConfig, HmmSource, PipelineError};
use powerkg_core::query::{find_entity, neighborhood, ResultTree};
use powerkg_core::store::save;

use crate::service::{router, AppState, Snapshot};
use crate::wire;

#[derive(Debug, Parser)]
#[command(name = "powerkg", version, about = "Build, query and serve power-equipment knowledge graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract, fuse and save a graph.
    #[command(group(ArgGroup::new("model").required(true).args(["hmm", "train"])))]
    Build {
        #[arg(long)]
        common: PathBuf,
        #[arg(long)]
        power: PathBuf,
        /// HMM parameter file.
        #[arg(long)]
        hmm: Option<PathBuf>,
        /// Tagged corpus to fit HMM parameters from.
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        structured: Vec<PathBuf>,
        /// Rule file, used only to count derivable triples.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Look up a label and print its neighborhood.
    Query {
        graph: PathBuf,
        label: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        graph: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Data(anyhow::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "{m}"),
            AppError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for AppError {
    fn from(e: E) -> AppError {
        AppError::Data(e.into())
    }
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), AppError> {
    match cli.command {
        Command::Build { common, power, hmm, train, corpus, structured, rules, out: dest } => {
            let hmm = match (hmm, train) {
                (Some(p), _) => HmmSource::Params(p),
                (None, Some(p)) => HmmSource::Train(p),
                (None, None) => return Err(AppError::Usage("one of --hmm or --train is required".into())),
            };
            let config = BuildConfig { common, power, hmm, corpus, structured, rules };
            let built = match build(&config) {
                Err(e @ PipelineError::NoInputs) => return Err(AppError::Usage(e.to_string())),
                other => other?,
            };
            save(&built.store, &dest, false)?;
            writeln!(out, "{}", built.report)?;
            writeln!(out, "triples\t{}", built.store.len())?;
        }
        Command::Query { graph, label, depth, json, rules } => {
            let snap = Snapshot::load(&graph, rules.as_deref())?;
            let tree = query_tree(&snap, &label, depth)?;
            if json {
                serde_json::to_writer_pretty(&mut *out, &wire::tree(&snap.store, &tree))?;
                writeln!(out)?;
            } else {
                write!(out, "{}", wire::render_text(&snap.store, &label, &tree))?;
            }
        }
        Command::Serve { graph, rules, bind } => serve(graph, rules, bind)?,
    }
    Ok(())
}

/// The tree `query` prints: the resolved entity out to `depth` levels.
pub fn query_tree(snap: &Snapshot, label: &str, depth: usize) -> anyhow::Result<ResultTree> {
    Ok(match find_entity(&snap.store, label) {
        Some(id) => neighborhood(&snap.store, id, depth)?,
        None => ResultTree::not_found(),
    })
}

fn serve(graph: PathBuf, rules: Option<PathBuf>, bind: SocketAddr) -> anyhow::Result<()> {
    let state = AppState::open(graph, rules)?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut impl Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

