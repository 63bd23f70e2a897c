//! Experiment execution: seeded runs of the placement algorithms, timing,
//! and assembly of result records.

use std::time::Instant;

use coharray_core::diap::diap_place;
use coharray_core::model::{
    coherence_direct, difference_vectors, DifferenceVectors, Placement, ProblemConfig,
};
use coharray_core::riap::{
    alternate, expurgate, round_placement, AlternationTrace, DEFAULT_ALTERNATION_TOL,
    DEFAULT_MAX_ROUNDS, DEFAULT_SOLVER_TOL,
};
use coharray_core::weights::Weights;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::oracle::exhaustive_minimum;
use crate::output::{join_indices, write_results, write_trace, ResultRecord, TraceRecord};
use crate::spec::{Algorithm, ExperimentKind, ExperimentSpec};
use crate::{BenchError, Result};

/// Decorrelates the rounding stream from the initialization stream, which is
/// seeded with the raw run seed.
pub const ROUND_SEED_MIX: u64 = 0x9E37_79B9;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub placement: Placement,
    pub coherence: f64,
    pub runtime_ms: f64,
    pub outer_iterations: usize,
    pub trace: AlternationTrace,
}

/// One seeded optimization run. The timer covers optimization and rounding
/// but not the final coherence evaluation.
pub fn run_once(
    config: &ProblemConfig,
    diffs: &DifferenceVectors,
    algorithm: Algorithm,
    p: Option<f64>,
    seed: u64,
    draws: usize,
) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match algorithm {
        Algorithm::Diap => {
            let p = p.ok_or_else(|| {
                BenchError::InvalidArgument("diap needs an elimination budget p".into())
            })?;
            let init = Weights::random_binary(config.m_tilde, config.m, &mut rng)?;
            let start = Instant::now();
            let (placement, trace) = diap_place(config, diffs, p, &init, DEFAULT_SOLVER_TOL)?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let coherence = coherence_direct(&placement, config)?;
            let outer_iterations = trace.entries.len().saturating_sub(1);
            Ok(RunOutcome { placement, coherence, runtime_ms, outer_iterations, trace })
        }
        Algorithm::Riap | Algorithm::RiapExpurgated => {
            let init = Weights::random_continuous(config.m_tilde, config.m as f64, &mut rng)?;
            let start = Instant::now();
            let (w_t, w_r, trace) =
                alternate(config, diffs, &init, DEFAULT_ALTERNATION_TOL, DEFAULT_MAX_ROUNDS)?;
            let round_seed = seed ^ ROUND_SEED_MIX;
            let (placement, coherence, runtime_ms);
            if algorithm == Algorithm::Riap {
                placement = round_placement(&w_t, &w_r, config.m, config.n, round_seed)?;
                runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                coherence = coherence_direct(&placement, config)?;
            } else {
                // candidate evaluation is part of expurgation, so it stays
                // inside the timed region
                let (best, mu) =
                    expurgate(&w_t, &w_r, config.m, config.n, draws, round_seed, config)?;
                runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                placement = best;
                coherence = mu;
            }
            let outer_iterations = trace.rounds();
            Ok(RunOutcome { placement, coherence, runtime_ms, outer_iterations, trace })
        }
    }
}

fn record_for(
    spec: &ExperimentSpec,
    config: &ProblemConfig,
    algorithm: &str,
    p: Option<f64>,
    seed: u64,
    outcome: &RunOutcome,
) -> ResultRecord {
    ResultRecord {
        experiment: spec.experiment.id().into(),
        algorithm: algorithm.into(),
        m: config.m,
        n: config.n,
        m_tilde: config.m_tilde,
        n_tilde: config.n_tilde,
        g: config.g_count,
        p,
        seed,
        coherence: outcome.coherence,
        runtime_ms: outcome.runtime_ms,
        outer_iterations: outcome.outer_iterations,
        tx_indices: join_indices(outcome.placement.tx_indices()),
        rx_indices: join_indices(outcome.placement.rx_indices()),
    }
}

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub records: Vec<ResultRecord>,
    pub trace: Vec<TraceRecord>,
}

/// Run every cell of the experiment. Run `i` of a cell uses seed
/// `base_seed + i`, so reruns are bit-identical apart from runtimes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.experiment {
        ExperimentKind::SweepP => run_sweep_p(spec),
        ExperimentKind::SweepSize => run_sweep_size(spec),
        ExperimentKind::Trace => run_trace(spec),
        ExperimentKind::Table1 => run_table1(spec),
        ExperimentKind::Oracle => run_oracle(spec),
        ExperimentKind::Single => run_single(spec),
    }
}

/// Run and write the per-run CSV, the `-summary.csv` sibling, and (for the
/// trace experiment) the `-trace.csv` sibling.
pub fn execute(spec: &ExperimentSpec) -> Result<()> {
    let mut output = run_experiment(spec)?;
    write_results(&spec.output_path, &mut output.records)?;
    if !output.trace.is_empty() {
        write_trace(&spec.output_path, &output.trace)?;
    }
    Ok(())
}

fn run_sweep_p(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let diffs = difference_vectors(&spec.config)?;
    let mut records = Vec::new();
    for &p in &spec.p_values {
        for i in 0..spec.runs {
            let seed = spec.base_seed + i as u64;
            let outcome = run_once(
                &spec.config,
                &diffs,
                Algorithm::Diap,
                Some(p),
                seed,
                spec.expurgation_draws,
            )?;
            records.push(record_for(spec, &spec.config, Algorithm::Diap.id(), Some(p), seed, &outcome));
        }
    }
    Ok(ExperimentOutput { records, trace: Vec::new() })
}

fn run_sweep_size(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut records = Vec::new();
    for &(m, n) in &spec.size_values {
        let config = ProblemConfig::new(
            spec.config.m_tilde,
            spec.config.n_tilde,
            m,
            n,
            spec.config.g_count,
        )?;
        let diffs = difference_vectors(&config)?;
        for &algorithm in &spec.algorithms {
            let p = algorithm.uses_p().then(|| spec.p_values[0]);
            for i in 0..spec.runs {
                let seed = spec.base_seed + i as u64;
                let outcome =
                    run_once(&config, &diffs, algorithm, p, seed, spec.expurgation_draws)?;
                records.push(record_for(spec, &config, algorithm.id(), p, seed, &outcome));
            }
        }
    }
    Ok(ExperimentOutput { records, trace: Vec::new() })
}

fn run_table1(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let diffs = difference_vectors(&spec.config)?;
    let mut records = Vec::new();
    for &algorithm in &spec.algorithms {
        let cells: Vec<Option<f64>> = if algorithm.uses_p() {
            spec.p_values.iter().map(|&p| Some(p)).collect()
        } else {
            vec![None]
        };
        for p in cells {
            for i in 0..spec.runs {
                let seed = spec.base_seed + i as u64;
                let outcome =
                    run_once(&spec.config, &diffs, algorithm, p, seed, spec.expurgation_draws)?;
                records.push(record_for(spec, &spec.config, algorithm.id(), p, seed, &outcome));
            }
        }
    }
    Ok(ExperimentOutput { records, trace: Vec::new() })
}

fn run_trace(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let diffs = difference_vectors(&spec.config)?;
    let p = spec.p_values[0];
    let mut records = Vec::new();
    let mut traces = Vec::new();
    for i in 0..spec.runs {
        let seed = spec.base_seed + i as u64;
        let outcome = run_once(
            &spec.config,
            &diffs,
            Algorithm::Diap,
            Some(p),
            seed,
            spec.expurgation_draws,
        )?;
        records.push(record_for(spec, &spec.config, Algorithm::Diap.id(), Some(p), seed, &outcome));
        traces.push(outcome.trace);
    }
    Ok(ExperimentOutput {
        records,
        trace: average_traces(&traces, spec.config.m, spec.config.n),
    })
}

/// Per-iteration mean of the active grid dimensions across runs. Runs that
/// have already converged contribute their final size (M, N).
pub fn average_traces(traces: &[AlternationTrace], m: usize, n: usize) -> Vec<TraceRecord> {
    let longest = traces.iter().map(|t| t.entries.len()).max().unwrap_or(0);
    let runs = traces.len();
    (0..longest)
        .map(|k| {
            let (mut tx_sum, mut rx_sum) = (0.0, 0.0);
            for trace in traces {
                match trace.entries.get(k) {
                    Some(entry) => {
                        tx_sum += entry.tx_active as f64;
                        rx_sum += entry.rx_active as f64;
                    }
                    None => {
                        tx_sum += m as f64;
                        rx_sum += n as f64;
                    }
                }
            }
            TraceRecord {
                iteration: k + 1,
                mean_tx_active: tx_sum / runs as f64,
                mean_rx_active: rx_sum / runs as f64,
                runs,
            }
        })
        .collect()
}

fn run_oracle(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let (placement, coherence) = exhaustive_minimum(&spec.config)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let record = ResultRecord {
        experiment: spec.experiment.id().into(),
        algorithm: "oracle".into(),
        m: spec.config.m,
        n: spec.config.n,
        m_tilde: spec.config.m_tilde,
        n_tilde: spec.config.n_tilde,
        g: spec.config.g_count,
        p: None,
        seed: spec.base_seed,
        coherence,
        runtime_ms,
        outer_iterations: 0,
        tx_indices: join_indices(placement.tx_indices()),
        rx_indices: join_indices(placement.rx_indices()),
    };
    Ok(ExperimentOutput { records: vec![record], trace: Vec::new() })
}

fn run_single(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let diffs = difference_vectors(&spec.config)?;
    let mut records = Vec::new();
    for &algorithm in &spec.algorithms {
        let p = algorithm.uses_p().then(|| spec.p_values[0]);
        for i in 0..spec.runs {
            let seed = spec.base_seed + i as u64;
            let outcome =
                run_once(&spec.config, &diffs, algorithm, p, seed, spec.expurgation_draws)?;
            records.push(record_for(spec, &spec.config, algorithm.id(), p, seed, &outcome));
        }
    }
    Ok(ExperimentOutput { records, trace: Vec::new() })
}
