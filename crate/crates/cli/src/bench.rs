//! The `bench` subcommand: time each algorithm on a seeded synthetic
//! dataset and report gain-evaluation counts alongside wall time.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use speechsum_core::pipeline::candidate_fact_groups_for;
use speechsum_core::summary::generate_facts_for_slice;
use speechsum_core::synth::synthetic_dataset;
use speechsum_core::{
    exact_summary, fact_groups, greedy_summary, naive_plan, opt_prune, Algorithm, CostParams,
    Deadline, EngineError, PrunedGains, PruningConfig,
};

use crate::Failure;

pub struct BenchArgs {
    pub dims: usize,
    pub values: usize,
    pub rows: usize,
    pub speech_length: usize,
    pub extra_preds: usize,
    pub algos: String,
    pub out: PathBuf,
    pub seed: u64,
    pub noise: f64,
    pub timeout: Option<Duration>,
}

pub fn run(args: BenchArgs) -> Result<(), Failure> {
    if args.dims == 0 || args.values == 0 || args.rows == 0 {
        return Err(Failure::config("dims, values and rows must be positive"));
    }
    let algos: Vec<Algorithm> = args
        .algos
        .split(',')
        .map(|name| name.trim().parse::<Algorithm>())
        .collect::<Result<_, _>>()
        .map_err(Failure::config)?;

    let ds = synthetic_dataset(args.dims, args.values, args.rows, args.noise, args.seed);
    let slice: Vec<usize> = (0..ds.n_rows()).collect();
    let group_cols = candidate_fact_groups_for(args.dims, &[], args.extra_preds, &[]);

    let mut report = String::from("algo,dims,values,rows,m,facts,gain_evals,millis,utility\n");
    for algo in algos {
        let deadline = args.timeout.map(Deadline::after);
        let started = Instant::now();
        let catalog = generate_facts_for_slice(&ds, 0, &slice, &group_cols)
            .map_err(Failure::config)?;
        let prior = ds.target(0).mean();
        let outcome = match algo {
            Algorithm::Greedy => greedy_summary(
                &ds,
                &slice,
                0,
                prior,
                &catalog.facts,
                args.speech_length,
                None,
                deadline.as_ref(),
            )
            .map(|r| (r.gain_evals, r.utility)),
            Algorithm::GreedyPruned | Algorithm::GreedyOpt => {
                let groups = fact_groups(&catalog);
                let params = CostParams::new(&PruningConfig::default(), slice.len());
                let plan = if algo == Algorithm::GreedyPruned {
                    naive_plan(&groups, &params)
                } else {
                    opt_prune(&groups, &params)
                };
                let mut provider = PrunedGains::new(&catalog, plan);
                greedy_summary(
                    &ds,
                    &slice,
                    0,
                    prior,
                    &catalog.facts,
                    args.speech_length,
                    Some(&mut provider),
                    deadline.as_ref(),
                )
                .map(|r| (r.gain_evals, r.utility))
            }
            Algorithm::Exact => exact_summary(
                &ds,
                &slice,
                0,
                prior,
                &catalog.facts,
                args.speech_length,
                0.0,
                deadline.as_ref(),
            )
            .map(|r| (r.fact_evals, r.utility)),
        };
        let millis = started.elapsed().as_millis();
        match outcome {
            Ok((evals, utility)) => {
                let line = format!(
                    "{},{},{},{},{},{},{},{},{}",
                    algo.name(),
                    args.dims,
                    args.values,
                    args.rows,
                    args.speech_length,
                    catalog.facts.len(),
                    evals,
                    millis,
                    utility
                );
                println!("{}", line);
                report.push_str(&line);
                report.push('\n');
            }
            Err(EngineError::Cancelled) => {
                eprintln!("warning: {} timed out after {} ms, row omitted", algo.name(), millis);
            }
            Err(e) => return Err(Failure::config(e)),
        }
    }
    std::fs::write(&args.out, report)
        .map_err(|e| Failure::config(format!("{}: {}", args.out.display(), e)))?;
    println!("report written to {}", args.out.display());
    Ok(())
}
