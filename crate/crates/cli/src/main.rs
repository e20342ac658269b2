// SPDX-License-Identifier: Apache-2.0

//! `kicq`: build graphs and indexes, run keyword-aware influential community
//! queries, benchmark the search algorithms and evaluate results.

mod commands;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kicq::semantics::{DEFAULT_EXPANSION, DEFAULT_NEIGHBORHOOD};
use kicq::{Algorithm, Execution, Metric};

#[derive(Parser, Debug)]
#[command(name = "kicq", version, about = "Keyword-aware influential community search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse vertex and edge text files into a binary graph.
    Build {
        #[arg(long)]
        vertices: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend vertex keywords with their most similar graph keywords.
    Augment {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[command(flatten)]
        sem: SemanticArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and persist the KIC-tree index of a graph.
    Index {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one query, e.g. `--query '"data mining" AND databases'`.
    Query(QueryArgs),
    /// Generate a synthetic graph and compare algorithms on a query workload.
    Bench(BenchArgs),
    /// Compute an evaluation metric.
    Eval(EvalArgs),
}

#[derive(Args, Debug, Clone)]
struct SemanticArgs {
    /// Keywords added per term.
    #[arg(long = "m", default_value_t = DEFAULT_EXPANSION)]
    m: usize,
    /// Neighbourhood size of the indirect cosine.
    #[arg(long = "l", default_value_t = DEFAULT_NEIGHBORHOOD)]
    l: usize,
    #[arg(long, default_value = "indirect")]
    metric: Metric,
    #[arg(long, default_value = "parallel")]
    exec: Execution,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long = "r", default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 10)]
    kmin: u32,
    #[arg(long, default_value_t = 0.60)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = AlgoArg::Tree)]
    algo: AlgoArg,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    sem: SemanticArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the records to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Synthetic graph vertex count.
    #[arg(long, default_value_t = 5000)]
    size: usize,
    /// Synthetic graph target edge count.
    #[arg(long, default_value_t = 40000)]
    edge_count: usize,
    #[arg(long, default_value_t = 20)]
    keywords: usize,
    #[arg(long, default_value_t = 3)]
    keywords_per_vertex: usize,
    #[arg(long, default_value_t = 2.3)]
    degree_exponent: f64,
    #[arg(long, default_value_t = 1.2)]
    zipf: f64,
    /// `uniform` or `beta:<alpha>:<beta>`.
    #[arg(long, default_value = "uniform")]
    influence: String,
    #[arg(long, default_value_t = 20)]
    queries: usize,
    #[arg(long, default_value_t = 2)]
    terms: usize,
    #[arg(long, default_value = "or")]
    predicate: String,
    #[arg(long = "r", default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 3)]
    kmin: u32,
    #[arg(long, default_value_t = 0.60)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "parallel")]
    exec: Execution,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(value_enum)]
    mode: EvalMode,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Result records written by `query --format records`.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Terms for `coherence` and `db`, in query syntax.
    #[arg(long)]
    query: Option<String>,
    #[command(flatten)]
    sem: SemanticArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AlgoArg {
    Basic,
    Pruned,
    Tree,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Basic => Algorithm::Basic,
            AlgoArg::Pruned => Algorithm::Pruned,
            AlgoArg::Tree => Algorithm::Tree,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Records,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EvalMode {
    Ndcg,
    Coherence,
    Db,
    Cpj,
    Structure,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl From<kicq::Error> for Failure {
    fn from(e: kicq::Error) -> Self {
        match e {
            kicq::Error::ImpossibleState(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KICQ_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { vertices, edges, out } => commands::build(&vertices, &edges, &out),
        Command::Augment {
            graph,
            embeddings,
            sem,
            out,
        } => commands::augment(&graph, &embeddings, &sem, &out),
        Command::Index { graph, out } => commands::index(&graph, &out),
        Command::Query(a) => commands::query(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Eval(a) => commands::eval(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
