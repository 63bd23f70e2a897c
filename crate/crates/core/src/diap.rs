//! Deterministic iterative antenna placement.
//!
//! Alternates the two marginal convex solves and, after each solve,
//! eliminates the lowest-weight grid points from the candidate grids until
//! exactly M transmit and N receive positions survive. The elimination rate
//! is governed by `p`: indices are removed while the remaining ℓ1 mass stays
//! above `target − p` (and more than `target` support entries remain).

use crate::conic::{build_subproblem, solve, Side, SolveStatus};
use crate::model::{DifferenceVectors, Placement, ProblemConfig};
use crate::riap::{AlternationTrace, TraceEntry, DEFAULT_SOLVER_MAX_ITER};
use crate::weights::Weights;
use crate::{Error, Result};

/// Zero out the smallest non-eliminated entries of `w`, one at a time, while
/// the ℓ1 mass exceeds `count_target − p` and more than `count_target`
/// entries remain above the zero threshold. Ties break to the lowest index.
/// Returns the number of indices eliminated.
pub fn eliminate_smallest(w: &mut Weights, count_target: usize, p: f64) -> usize {
    let mut l1 = w.l1();
    let mut removed = 0;
    while l1 > count_target as f64 - p && w.l0() > count_target {
        let Some((j, v)) = w.min_free() else { break };
        w.eliminate(j);
        l1 -= v;
        removed += 1;
    }
    removed
}

/// Run the full elimination loop and read the placement off the surviving
/// grid points. Deterministic given the configuration, `p` and the initial
/// transmit weights.
pub fn diap_place(
    config: &ProblemConfig,
    diffs: &DifferenceVectors,
    p: f64,
    init_w_t: &Weights,
    solver_tol: f64,
) -> Result<(Placement, AlternationTrace)> {
    config.validate()?;
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("p must be positive, got {p}")));
    }
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
    let mut iteration = 0usize;
    let mut last_objective = f64::NAN;
    let max_outer = config.m_tilde + config.n_tilde + 2;

    while w_t.free_count() > config.m || w_r.free_count() > config.n {
        iteration += 1;
        if iteration > max_outer {
            return Err(Error::Solver(
                "elimination loop failed to make progress".into(),
            ));
        }
        let tx_dim = w_t.free_count();
        let rx_dim = w_r.free_count();

        let prob_r = build_subproblem(diffs, Side::Rx, &w_t, config.n as f64, w_r.eliminated())?;
        let rep_r = solve(&prob_r, solver_tol, DEFAULT_SOLVER_MAX_ITER)?;
        if rep_r.status == SolveStatus::Infeasible {
            return Err(Error::Infeasible("receive subproblem infeasible".into()));
        }
        w_r.set_values(rep_r.weights)?;
        prune_side(&mut w_r, config.n, p);

        let prob_t = build_subproblem(diffs, Side::Tx, &w_r, config.m as f64, w_t.eliminated())?;
        let rep_t = solve(&prob_t, solver_tol, DEFAULT_SOLVER_MAX_ITER)?;
        if rep_t.status == SolveStatus::Infeasible {
            return Err(Error::Infeasible("transmit subproblem infeasible".into()));
        }
        w_t.set_values(rep_t.weights)?;
        prune_side(&mut w_t, config.m, p);

        last_objective = rep_t.objective;
        trace.entries.push(TraceEntry {
            iteration,
            objective: last_objective,
            tx_active: tx_dim,
            rx_active: rx_dim,
        });
    }

    trace.entries.push(TraceEntry {
        iteration: iteration + 1,
        objective: last_objective,
        tx_active: w_t.free_count(),
        rx_active: w_r.free_count(),
    });

    let placement = Placement::new(free_indices(&w_t), free_indices(&w_r))?;
    Ok((placement, trace))
}

/// As [`diap_place`] but returning only the per-iteration dimensionality
/// trace.
pub fn diap_trace(
    config: &ProblemConfig,
    diffs: &DifferenceVectors,
    p: f64,
    init_w_t: &Weights,
    solver_tol: f64,
) -> Result<AlternationTrace> {
    diap_place(config, diffs, p, init_w_t, solver_tol).map(|(_, trace)| trace)
}

fn prune_side(w: &mut Weights, target: usize, p: f64) {
    if w.free_count() <= target {
        return;
    }
    let removed = eliminate_smallest(w, target, p);
    if w.free_count() > target {
        if w.l0() <= target {
            // Only sub-threshold mass is left outside the support: the
            // relaxation is effectively binary, so finish the side now.
            while w.free_count() > target {
                let (j, _) = w.min_free().expect("free indices remain");
                w.eliminate(j);
            }
        } else if removed == 0 {
            // Solver tolerance can leave the ℓ1 guard already satisfied;
            // force one elimination so the outer loop always progresses.
            let (j, _) = w.min_free().expect("free indices remain");
            w.eliminate(j);
        }
    }
}

fn free_indices(w: &Weights) -> Vec<usize> {
    (0..w.dim()).filter(|i| !w.eliminated().contains(i)).collect()
}
