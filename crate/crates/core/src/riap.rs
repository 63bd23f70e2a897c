//! Randomized iterative antenna placement: alternating convex relaxation
//! over selection probabilities, randomized rounding, and expurgation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conic::{build_subproblem, solve, Side, SolveStatus};
use crate::model::{coherence_direct, DifferenceVectors, Placement, ProblemConfig};
use crate::weights::Weights;
use crate::{Error, Result};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-6;
pub const DEFAULT_SOLVER_MAX_ITER: usize = 200;
pub const DEFAULT_ALTERNATION_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ROUNDS: usize = 50;

/// One record per alternation round (or outer iteration for the
/// eliminating variant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Relaxed min-max objective after this round's solves.
    pub objective: f64,
    /// Active transmit coordinates (support for plain alternation,
    /// non-eliminated grid points when elimination is in play).
    pub tx_active: usize,
    pub rx_active: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlternationTrace {
    pub entries: Vec<TraceEntry>,
}

impl AlternationTrace {
    pub fn rounds(&self) -> usize {
        self.entries.len()
    }
}

/// Alternate the two marginal convex solves until the relaxed objective
/// stops improving.
///
/// Starting from `init_w_t`, each round solves for the receive weights with
/// the transmit side fixed, then for the transmit weights with the receive
/// side fixed. Stops when the objective improves by less than `tol`
/// (relative) between rounds, or after `max_rounds`.
pub fn alternate(
    config: &ProblemConfig,
    diffs: &DifferenceVectors,
    init_w_t: &Weights,
    tol: f64,
    max_rounds: usize,
) -> Result<(Weights, Weights, AlternationTrace)> {
    config.validate()?;
    if init_w_t.dim() != config.m_tilde {
        return Err(Error::DimensionMismatch {
            expected: config.m_tilde,
            actual: init_w_t.dim(),
        });
    }
    if (init_w_t.l1() - config.m as f64).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "initial transmit weights sum to {}, expected {}",
            init_w_t.l1(),
            config.m
        )));
    }
    let mut w_t = init_w_t.clone();
    let mut w_r = Weights::new(vec![0.0; config.n_tilde], Default::default(), config.n as f64)?;
    let mut trace = AlternationTrace::default();
    let mut prev_obj = f64::INFINITY;
    for round in 1..=max_rounds {
        let prob_r = build_subproblem(diffs, Side::Rx, &w_t, config.n as f64, w_r.eliminated())?;
        let rep_r = solve(&prob_r, DEFAULT_SOLVER_TOL, DEFAULT_SOLVER_MAX_ITER)?;
        if rep_r.status == SolveStatus::Infeasible {
            return Err(Error::Infeasible("receive subproblem infeasible".into()));
        }
        w_r.set_values(rep_r.weights)?;

        let prob_t = build_subproblem(diffs, Side::Tx, &w_r, config.m as f64, w_t.eliminated())?;
        let rep_t = solve(&prob_t, DEFAULT_SOLVER_TOL, DEFAULT_SOLVER_MAX_ITER)?;
        if rep_t.status == SolveStatus::Infeasible {
            return Err(Error::Infeasible("transmit subproblem infeasible".into()));
        }
        w_t.set_values(rep_t.weights)?;

        let objective = rep_t.objective;
        trace.entries.push(TraceEntry {
            iteration: round,
            objective,
            tx_active: w_t.l0(),
            rx_active: w_r.l0(),
        });
        if prev_obj - objective < tol * prev_obj.abs().max(1.0) {
            break;
        }
        prev_obj = objective;
    }
    Ok((w_t, w_r, trace))
}

const MAX_BERNOULLI_ATTEMPTS: usize = 10_000;

/// Draw `count` distinct indices by treating each weight as an independent
/// inclusion probability, conditioned on the realized count: Bernoulli draws
/// are repeated until exactly `count` indices come up. Falls back to
/// sequential weighted sampling without replacement in the (practically
/// unreachable) event that no attempt hits the exact count.
fn sample_indices(values: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let positive = values.iter().filter(|&&v| v > 0.0).count();
    if positive < count {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} indices from {positive} positive weights"
        )));
    }
    let forced = values.iter().filter(|&&v| v >= 1.0).count();
    if forced > count {
        return Err(Error::InvalidArgument(format!(
            "{forced} unit weights cannot round to {count} indices"
        )));
    }
    let mut selected = Vec::with_capacity(count + 8);
    for _ in 0..MAX_BERNOULLI_ATTEMPTS {
        selected.clear();
        for (i, &v) in values.iter().enumerate() {
            if rng.gen::<f64>() < v {
                selected.push(i);
            }
        }
        if selected.len() == count {
            return Ok(selected);
        }
    }
    sequential_fallback(values, count, rng)
}

/// Sequential weighted sampling without replacement, renormalizing after
/// each draw. Only used when the conditioned Bernoulli loop gives up.
fn sequential_fallback(values: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let mut remaining: Vec<f64> = values.to_vec();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().sum();
        let mut x = rng.gen_range(0.0..total);
        let mut pick = None;
        for (i, &v) in remaining.iter().enumerate() {
            if v <= 0.0 {
                continue;
            }
            if x < v {
                pick = Some(i);
                break;
            }
            x -= v;
        }
        // Rounding in the cumulative walk can step past the last positive
        // entry; fall back to it.
        let pick = pick.unwrap_or_else(|| {
            remaining
                .iter()
                .enumerate()
                .rev()
                .find(|(_, &v)| v > 0.0)
                .map(|(i, _)| i)
                .unwrap()
        });
        chosen.push(pick);
        remaining[pick] = 0.0;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Round relaxed weights to a concrete placement of exactly M and N
/// elements, treating the weights as independent occupancy probabilities
/// conditioned on the exact antenna counts.
pub fn round_placement(
    w_t: &Weights,
    w_r: &Weights,
    m: usize,
    n: usize,
    rng_seed: u64,
) -> Result<Placement> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let tx = sample_indices(w_t.values(), m, &mut rng)?;
    let rx = sample_indices(w_r.values(), n, &mut rng)?;
    Placement::new(tx, rx)
}

/// Draw `draws` independent placements and keep the one with the smallest
/// realized coherence. Draw `i` uses seed `rng_seed + i`, so extending
/// `draws` under the same seed only extends the candidate set.
pub fn expurgate(
    w_t: &Weights,
    w_r: &Weights,
    m: usize,
    n: usize,
    draws: usize,
    rng_seed: u64,
    config: &ProblemConfig,
) -> Result<(Placement, f64)> {
    if draws < 1 {
        return Err(Error::InvalidArgument("draws must be at least 1".into()));
    }
    let mut best: Option<(Placement, f64)> = None;
    for i in 0..draws {
        let placement = round_placement(w_t, w_r, m, n, rng_seed + i as u64)?;
        let mu = coherence_direct(&placement, config)?;
        if best.as_ref().map_or(true, |(_, b)| mu < *b) {
            best = Some((placement, mu));
        }
    }
    Ok(best.unwrap())
}
