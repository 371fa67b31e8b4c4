mod bench;
mod verify;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use speechsum_core::{
    load_dataset, lookup, parse_query, preprocess, Algorithm, EngineConfig, PreprocessOptions,
    SpeechRecord, SpeechStore,
};

#[derive(Parser)]
#[command(
    name = "speechsum",
    version,
    about = "Pre-computed fact-set summaries of tabular data, served as short spoken answers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Exact,
    Greedy,
    GreedyPruned,
    GreedyOpt,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Exact => Algorithm::Exact,
            AlgoArg::Greedy => Algorithm::Greedy,
            AlgoArg::GreedyPruned => Algorithm::GreedyPruned,
            AlgoArg::GreedyOpt => Algorithm::GreedyOpt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate speech summaries for every supported query scope.
    Preprocess {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's algorithm.
        #[arg(long)]
        algo: Option<AlgoArg>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
        /// Per-query-scope-group budget; expired groups are dropped.
        #[arg(long)]
        timeout_secs: Option<u64>,
    },
    /// Answer one query from a store.
    Query {
        #[arg(long)]
        store: PathBuf,
        /// e.g. "delay where season = Winter"
        text: String,
    },
    /// Interactive query loop (:schema, :quit).
    Repl {
        #[arg(long)]
        store: PathBuf,
    },
    /// Run the verification suites on the configured dataset plus seeded
    /// random instances.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 25)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the algorithms on a seeded synthetic dataset.
    Bench {
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        values: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        speech_length: usize,
        #[arg(long, default_value_t = 2)]
        extra_preds: usize,
        /// Comma-separated list: exact,greedy,greedy-pruned,greedy-opt.
        #[arg(long, default_value = "greedy,greedy-opt")]
        algos: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Target noise amplitude.
        #[arg(long, default_value_t = 5.0)]
        noise: f64,
        /// Abort an algorithm that exceeds this budget.
        #[arg(long)]
        timeout_secs: Option<u64>,
    },
}

/// A failure carrying its process exit code:
/// 1 config/data, 2 store load, 3 query no-match.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(err: impl std::fmt::Display) -> Self {
        Self { code: 1, message: err.to_string() }
    }

    fn store(err: impl std::fmt::Display) -> Self {
        Self { code: 2, message: err.to_string() }
    }

    fn query(err: impl std::fmt::Display) -> Self {
        Self { code: 3, message: err.to_string() }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Preprocess { config, out, algo, threads, timeout_secs } => {
            cmd_preprocess(&config, &out, algo, threads, timeout_secs)
        }
        Command::Query { store, text } => cmd_query(&store, &text),
        Command::Repl { store } => cmd_repl(&store),
        Command::Verify { config, instances, seed } => verify::run(&config, instances, seed),
        Command::Bench {
            dims,
            values,
            rows,
            speech_length,
            extra_preds,
            algos,
            out,
            seed,
            noise,
            timeout_secs,
        } => bench::run(bench::BenchArgs {
            dims,
            values,
            rows,
            speech_length,
            extra_preds,
            algos,
            out,
            seed,
            noise,
            timeout: timeout_secs.map(Duration::from_secs),
        }),
    };
    if let Err(failure) = outcome {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn cmd_preprocess(
    config_path: &Path,
    out: &Path,
    algo: Option<AlgoArg>,
    threads: Option<usize>,
    timeout_secs: Option<u64>,
) -> Result<(), Failure> {
    let config = EngineConfig::from_file(config_path).map_err(Failure::config)?;
    let (ds, stats) =
        load_dataset(config.data.as_ref(), &config).map_err(Failure::config)?;
    if stats.dropped_rows > 0 {
        eprintln!("warning: dropped {} rows without any target value", stats.dropped_rows);
    }
    let options = PreprocessOptions {
        algorithm: algo.map(Into::into),
        threads,
        timeout: timeout_secs.map(Duration::from_secs),
    };
    let report = preprocess(&ds, &config, &options).map_err(Failure::config)?;
    for stats in &report.per_target {
        println!(
            "target {}: {} records, {} fact evaluations, {} ms",
            stats.target, stats.records, stats.fact_evals, stats.millis
        );
    }
    if report.skipped_scopes > 0 {
        println!("skipped {} scopes with no target rows", report.skipped_scopes);
    }
    if report.timed_out_groups > 0 {
        eprintln!("warning: {} query scope groups timed out and were dropped", report.timed_out_groups);
    }
    report.store.save(out).map_err(Failure::config)?;
    println!("wrote {} records to {}", report.store.len(), out.display());
    Ok(())
}

fn provenance(record: &SpeechRecord) -> String {
    let scope = if record.scope.is_empty() {
        "overall".to_string()
    } else {
        record
            .scope
            .iter()
            .map(|(c, v)| format!("{}={}", c, v))
            .collect::<Vec<_>>()
            .join(" and ")
    };
    format!(
        "(scope: {}, utility: {:.2}, facts: {})",
        scope,
        record.utility,
        record.facts.len()
    )
}

fn cmd_query(store_path: &Path, text: &str) -> Result<(), Failure> {
    let store = SpeechStore::load(store_path).map_err(Failure::store)?;
    if let Some(warning) = store.freshness_warning() {
        eprintln!("warning: {}", warning);
    }
    let query = parse_query(text, &store.manifest.schema).map_err(Failure::query)?;
    let record = lookup(&store, &query).map_err(Failure::query)?;
    println!("{}", record.text);
    println!("{}", provenance(record));
    Ok(())
}

fn cmd_repl(store_path: &Path) -> Result<(), Failure> {
    let store = SpeechStore::load(store_path).map_err(Failure::store)?;
    if let Some(warning) = store.freshness_warning() {
        eprintln!("warning: {}", warning);
    }
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    print!("> ");
    let _ = out.flush();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| Failure::store(format!("stdin: {}", e)))?;
        let line = line.trim();
        match line {
            "" => {}
            ":quit" => return Ok(()),
            ":schema" => {
                let schema = &store.manifest.schema;
                println!("targets: {}", schema.targets.join(", "));
                for dim in &schema.dimensions {
                    let mut values = dim.values.iter().take(8).cloned().collect::<Vec<_>>();
                    if dim.values.len() > 8 {
                        values.push(format!("… ({} values)", dim.values.len()));
                    }
                    println!("dimension {}: {}", dim.name, values.join(", "));
                }
            }
            _ => match parse_query(line, &store.manifest.schema)
                .and_then(|q| lookup(&store, &q).cloned())
            {
                Ok(record) => {
                    println!("{}", record.text);
                    println!("{}", provenance(&record));
                }
                Err(e) => println!("error: {}", e),
            },
        }
        print!("> ");
        let _ = out.flush();
    }
    Ok(())
}
