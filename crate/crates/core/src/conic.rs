//! Min-max-of-complex-modulus subproblems over box- and sum-constrained
//! real weights.
//!
//! Each subproblem is
//!
//! ```text
//! min_w max_g c_g |w^T v_g|
//! s.t.  Σ w = S,  0 ≤ w ≤ 1,  w_j = 0 for j eliminated
//! ```
//!
//! solved in conic form: epigraph variable t with one 3-dimensional
//! second-order cone (t, c_g Re(v_g)^T w, c_g Im(v_g)^T w) per direction,
//! plus the linear equality and box constraints. The backend is Clarabel's
//! interior-point solver. A brute-force grid-search oracle for tiny
//! dimensions is provided for validation.

use std::collections::BTreeSet;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use num_complex::Complex64;

use crate::model::{weighted_sum, DifferenceVectors};
use crate::weights::Weights;
use crate::{Error, Result};

/// Which side of the array a subproblem optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

/// Standard-form min-max-modulus problem.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    vectors: Vec<Vec<Complex64>>,
    coefficients: Vec<f64>,
    sum_target: f64,
    eliminated: BTreeSet<usize>,
    dim: usize,
}

impl ConeProblem {
    pub fn new(
        vectors: Vec<Vec<Complex64>>,
        coefficients: Vec<f64>,
        sum_target: f64,
        eliminated: BTreeSet<usize>,
        dim: usize,
    ) -> Result<Self> {
        if vectors.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                actual: coefficients.len(),
            });
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
            }
        }
        if coefficients.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidArgument("negative cone coefficient".into()));
        }
        if let Some(&j) = eliminated.iter().next_back() {
            if j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "eliminated index {j} out of range for dim {dim}"
                )));
            }
        }
        let free = dim - eliminated.len();
        if sum_target < 0.0 || sum_target > free as f64 {
            return Err(Error::Infeasible(format!(
                "sum target {sum_target} incompatible with {free} free unit-box coordinates"
            )));
        }
        Ok(Self { vectors, coefficients, sum_target, eliminated, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sum_target(&self) -> f64 {
        self.sum_target
    }

    pub fn eliminated(&self) -> &BTreeSet<usize> {
        &self.eliminated
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// max_g c_g |w^T v_g| for a candidate weight vector.
    pub fn objective_at(&self, weights: &[f64]) -> f64 {
        self.vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(v, &c)| c * weighted_sum(weights, v).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

/// Solution of a [`ConeProblem`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub gap: f64,
    pub iterations: usize,
}

/// Assemble the marginal subproblem for one side, with the opposite side's
/// weights folded into the cone coefficients.
pub fn build_subproblem(
    diffs: &DifferenceVectors,
    side: Side,
    other_weights: &Weights,
    sum_target: f64,
    eliminated: &BTreeSet<usize>,
) -> Result<ConeProblem> {
    let (own, other) = match side {
        Side::Tx => (diffs.tx(), diffs.rx()),
        Side::Rx => (diffs.rx(), diffs.tx()),
    };
    let mut vectors = Vec::with_capacity(own.len());
    let mut coefficients = Vec::with_capacity(own.len());
    let mut dim = 0;
    for (g, v) in own.iter() {
        let opposite = &other[g];
        if opposite.len() != other_weights.dim() {
            return Err(Error::DimensionMismatch {
                expected: opposite.len(),
                actual: other_weights.dim(),
            });
        }
        coefficients.push(weighted_sum(other_weights.values(), opposite).norm());
        dim = v.len();
        vectors.push(v.clone());
    }
    ConeProblem::new(vectors, coefficients, sum_target, eliminated.clone(), dim)
}

/// Interior-point solve to relative tolerance `tolerance`.
pub fn solve(problem: &ConeProblem, tolerance: f64, max_iterations: usize) -> Result<SolveReport> {
    let free: Vec<usize> = (0..problem.dim)
        .filter(|i| !problem.eliminated.contains(i))
        .collect();
    let d = free.len();
    let s = problem.sum_target;

    // All free coordinates pinned at 1 by the sum constraint.
    if (s - d as f64).abs() < 1e-12 {
        let mut w = vec![0.0; problem.dim];
        for &i in &free {
            w[i] = 1.0;
        }
        let obj = problem.objective_at(&w);
        return Ok(SolveReport { weights: w, objective: obj, status: SolveStatus::Optimal, gap: 0.0, iterations: 0 });
    }

    let cones = active_cones(problem, &free);
    if cones.is_empty() {
        // Degenerate objective: any feasible point is optimal.
        let mut w = vec![0.0; problem.dim];
        for &i in &free {
            w[i] = s / d as f64;
        }
        let obj = problem.objective_at(&w);
        return Ok(SolveReport { weights: w, objective: obj, status: SolveStatus::Optimal, gap: 0.0, iterations: 0 });
    }

    // Variables x = (w_free, t); constraints A x + slack = b with
    //   row 0:            Σ w = S            (zero cone)
    //   rows 1..1+2d:     w ≥ 0, w ≤ 1       (nonnegative cone)
    //   per direction:    (t, c Re v^T w, c Im v^T w) ∈ SOC3
    let n = d + 1;
    let m = 1 + 2 * d + 3 * cones.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = vec![0.0; m];
    for j in 0..d {
        cols[j].push((0, 1.0));
        cols[j].push((1 + j, -1.0));
        cols[j].push((1 + d + j, 1.0));
        b[1 + d + j] = 1.0;
    }
    b[0] = s;
    for (k, (c, v)) in cones.iter().enumerate() {
        let r0 = 1 + 2 * d + 3 * k;
        cols[d].push((r0, -1.0));
        for j in 0..d {
            let e = v[j];
            cols[j].push((r0 + 1, -c * e.re));
            cols[j].push((r0 + 2, -c * e.im));
        }
    }
    let mut colptr = vec![0usize];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for col in cols.iter_mut() {
        col.sort_unstable_by_key(|e| e.0);
        for &(i, v) in col.iter() {
            rowval.push(i);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let p = CscMatrix::zeros((n, n));
    let mut q = vec![0.0; n];
    q[d] = 1.0;
    let mut cone_spec = vec![
        SupportedConeT::ZeroConeT(1),
        SupportedConeT::NonnegativeConeT(2 * d),
    ];
    cone_spec.extend(std::iter::repeat(SupportedConeT::SecondOrderConeT(3)).take(cones.len()));

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(max_iterations as u32)
        .tol_gap_rel(tolerance)
        .tol_gap_abs(tolerance * 1e-2)
        .build()
        .map_err(|e| Error::Solver(format!("bad settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cone_spec, settings)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let solution = &solver.solution;

    let status = match solution.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        _ => SolveStatus::MaxIterations,
    };
    if status == SolveStatus::Infeasible {
        return Ok(SolveReport {
            weights: vec![0.0; problem.dim],
            objective: f64::INFINITY,
            status,
            gap: f64::INFINITY,
            iterations: solution.iterations as usize,
        });
    }
    if solution.x.iter().any(|x| !x.is_finite()) {
        return Err(Error::Solver("non-finite iterate".into()));
    }
    let mut w = vec![0.0; problem.dim];
    for (j, &i) in free.iter().enumerate() {
        w[i] = solution.x[j].clamp(0.0, 1.0);
    }
    let objective = problem.objective_at(&w);
    Ok(SolveReport {
        weights: w,
        objective,
        status,
        gap: (solution.obj_val - solution.obj_val_dual).abs(),
        iterations: solution.iterations as usize,
    })
}

/// Restrict cones to the free coordinates, drop vacuous ones, and merge
/// duplicates. A pair of directions whose restricted vectors agree up to
/// conjugation constrains |w^T v| identically for real w, so only the copy
/// with the larger coefficient is kept.
fn active_cones(problem: &ConeProblem, free: &[usize]) -> Vec<(f64, Vec<Complex64>)> {
    let mut kept: Vec<(f64, Vec<Complex64>)> = Vec::new();
    'next: for (v, &c) in problem.vectors.iter().zip(&problem.coefficients) {
        if c <= 0.0 {
            continue;
        }
        let restricted: Vec<Complex64> = free.iter().map(|&i| v[i]).collect();
        for (kc, kv) in kept.iter_mut() {
            if (*kc - c).abs() <= 1e-9 * kc.max(c) && conj_equal(kv, &restricted) {
                *kc = kc.max(c);
                continue 'next;
            }
        }
        kept.push((c, restricted));
    }
    kept
}

fn conj_equal(a: &[Complex64], b: &[Complex64]) -> bool {
    let same = a
        .iter()
        .zip(b)
        .all(|(x, y)| (x.re - y.re).abs() <= 1e-9 && (x.im - y.im).abs() <= 1e-9);
    if same {
        return true;
    }
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.re - y.re).abs() <= 1e-9 && (x.im + y.im).abs() <= 1e-9)
}

/// Exhaustive grid search over the feasible set; for validation only.
///
/// Grids the first D′−1 free coordinates at `resolution` and determines the
/// last from the sum constraint.
pub fn oracle_solve(problem: &ConeProblem, resolution: f64) -> Result<SolveReport> {
    let free: Vec<usize> = (0..problem.dim)
        .filter(|i| !problem.eliminated.contains(i))
        .collect();
    if free.len() > 4 {
        return Err(Error::InstanceTooLarge(format!(
            "oracle supports at most 4 free coordinates, got {}",
            free.len()
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let steps = (1.0 / resolution).round() as usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0usize;
    let mut point = vec![0.0f64; free.len()];
    search(
        problem,
        &free,
        steps,
        0,
        problem.sum_target,
        &mut point,
        &mut best,
        &mut evaluated,
    );
    let (objective, weights) = best.ok_or_else(|| {
        Error::Infeasible("no grid point satisfies the sum constraint".into())
    })?;
    Ok(SolveReport {
        weights,
        objective,
        status: SolveStatus::Optimal,
        gap: resolution,
        iterations: evaluated,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    problem: &ConeProblem,
    free: &[usize],
    steps: usize,
    depth: usize,
    remaining: f64,
    point: &mut [f64],
    best: &mut Option<(f64, Vec<f64>)>,
    evaluated: &mut usize,
) {
    if depth + 1 == free.len() {
        // last coordinate is pinned by the sum constraint
        if !(-1e-9..=1.0 + 1e-9).contains(&remaining) {
            return;
        }
        point[depth] = remaining.clamp(0.0, 1.0);
        let mut w = vec![0.0; problem.dim];
        for (k, &i) in free.iter().enumerate() {
            w[i] = point[k];
        }
        let obj = problem.objective_at(&w);
        *evaluated += 1;
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            *best = Some((obj, w));
        }
        return;
    }
    for k in 0..=steps {
        let v = k as f64 / steps as f64;
        if v > remaining + 1e-9 {
            break;
        }
        point[depth] = v;
        search(problem, free, steps, depth + 1, remaining - v, point, best, evaluated);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{difference_vectors, ProblemConfig};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn one_cone(v: Vec<Complex64>, s: f64) -> ConeProblem {
        let d = v.len();
        ConeProblem::new(vec![v], vec![1.0], s, BTreeSet::new(), d).unwrap()
    }

    fn re(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn symmetric_cancellation() {
        let p = one_cone(re(&[1.0, -1.0]), 1.0);
        let rep = solve(&p, 1e-6, 200).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(rep.weights[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(rep.weights[1], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(rep.objective, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn constant_objective_on_feasible_set() {
        // v = 1: w^T v = Σw = S for every feasible w
        let p = one_cone(re(&[1.0, 1.0]), 1.0);
        let rep = solve(&p, 1e-6, 200).unwrap();
        assert_abs_diff_eq!(rep.objective, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn elimination_pins_solution() {
        let mut eliminated = BTreeSet::new();
        eliminated.insert(1);
        let p = ConeProblem::new(
            vec![re(&[1.0, -1.0])],
            vec![1.0],
            1.0,
            eliminated,
            2,
        )
        .unwrap();
        let rep = solve(&p, 1e-6, 200).unwrap();
        assert_abs_diff_eq!(rep.weights[0], 1.0, epsilon = 1e-8);
        assert_eq!(rep.weights[1], 0.0);
        let oracle = oracle_solve(&p, 1e-3).unwrap();
        assert_abs_diff_eq!(oracle.weights[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn structurally_infeasible_rejected() {
        let mut eliminated = BTreeSet::new();
        eliminated.insert(0);
        eliminated.insert(1);
        assert!(ConeProblem::new(
            vec![re(&[1.0, 1.0, 1.0])],
            vec![1.0],
            2.0,
            eliminated,
            3
        )
        .is_err());
    }

    #[test]
    fn oracle_reproduces_trivial_instances() {
        let p = one_cone(re(&[1.0, -1.0]), 1.0);
        let rep = oracle_solve(&p, 1e-3).unwrap();
        assert_abs_diff_eq!(rep.objective, 0.0, epsilon = 1e-9);
        let p = one_cone(re(&[1.0, 1.0]), 1.0);
        let rep = oracle_solve(&p, 1e-3).unwrap();
        assert_abs_diff_eq!(rep.objective, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn oracle_rejects_large_dims() {
        let p = one_cone(re(&[1.0; 5]), 2.0);
        assert!(matches!(oracle_solve(&p, 1e-2), Err(Error::InstanceTooLarge(_))));
    }

    fn random_problem(rng: &mut impl Rng, d: usize, n_cones: usize, s: f64) -> ConeProblem {
        let vectors = (0..n_cones)
            .map(|_| {
                (0..d)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let coefficients = (0..n_cones).map(|_| rng.gen_range(0.2..2.0)).collect();
        ConeProblem::new(vectors, coefficients, s, BTreeSet::new(), d).unwrap()
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let s = if trial % 2 == 0 { 1.0 } else { 1.5 };
            let p = random_problem(&mut rng, 3, 4, s);
            let rep = solve(&p, 1e-6, 200).unwrap();
            let oracle = oracle_solve(&p, 1e-3).unwrap();
            assert!(
                rep.objective <= oracle.objective + 2e-3,
                "solver {} worse than oracle {}",
                rep.objective,
                oracle.objective
            );
            assert!(
                oracle.objective <= rep.objective + 2e-3,
                "oracle {} beat solver {} by more than the grid resolution",
                oracle.objective,
                rep.objective
            );
            // feasibility invariants
            let sum: f64 = rep.weights.iter().sum();
            assert_abs_diff_eq!(sum, s, epsilon = 1e-8);
            for &w in &rep.weights {
                assert!((-1e-8..=1.0 + 1e-8).contains(&w));
            }
            // epigraph tightness: reported objective is the recomputed max
            assert_abs_diff_eq!(rep.objective, p.objective_at(&rep.weights), epsilon = 1e-12);
        }
    }

    #[test]
    fn elimination_never_improves() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let p = random_problem(&mut rng, 3, 4, 1.0);
            let base = oracle_solve(&p, 2e-3).unwrap();
            for j in 0..3 {
                let mut eliminated = BTreeSet::new();
                eliminated.insert(j);
                let restricted = ConeProblem::new(
                    p.vectors().to_vec(),
                    p.coefficients().to_vec(),
                    1.0,
                    eliminated,
                    3,
                )
                .unwrap();
                let rep = oracle_solve(&restricted, 2e-3).unwrap();
                assert!(rep.objective >= base.objective - 1e-9);
            }
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let p = random_problem(&mut rng, 3, 4, 1.5);
        let scaled = ConeProblem::new(
            p.vectors().to_vec(),
            p.coefficients().iter().map(|c| 3.0 * c).collect(),
            1.5,
            BTreeSet::new(),
            3,
        )
        .unwrap();
        let rep = solve(&p, 1e-8, 200).unwrap();
        let rep_scaled = solve(&scaled, 1e-8, 200).unwrap();
        assert_abs_diff_eq!(rep_scaled.objective, 3.0 * rep.objective, epsilon = 1e-5);
        // the unscaled optimum stays optimal for the scaled problem
        assert_abs_diff_eq!(
            scaled.objective_at(&rep.weights),
            rep_scaled.objective,
            epsilon = 1e-5
        );
    }

    #[test]
    fn subproblem_coefficients_from_full_receive_array() {
        // full-ones receive array, M̃=Ñ=2, G=4: c = [√2, 0, √2]
        let cfg = ProblemConfig::new(2, 2, 2, 2, 4).unwrap();
        let diffs = difference_vectors(&cfg).unwrap();
        let p = build_subproblem(&diffs, Side::Tx, &Weights::ones(2), 2.0, &BTreeSet::new())
            .unwrap();
        let c = p.coefficients();
        assert_abs_diff_eq!(c[0], 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[2], 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn subproblem_zero_other_weights() {
        let cfg = ProblemConfig::new(3, 3, 2, 2, 6).unwrap();
        let diffs = difference_vectors(&cfg).unwrap();
        let zeros = Weights::binary_from_indices(3, &[]).unwrap();
        let p = build_subproblem(&diffs, Side::Tx, &zeros, 2.0, &BTreeSet::new()).unwrap();
        assert!(p.coefficients().iter().all(|&c| c == 0.0));
        let rep = solve(&p, 1e-6, 200).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(rep.objective, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn subproblem_coefficients_bounded_by_antenna_count() {
        let cfg = ProblemConfig::new(8, 8, 3, 4, 16).unwrap();
        let diffs = difference_vectors(&cfg).unwrap();
        let w_r = Weights::binary_from_indices(8, &[0, 2, 5, 7]).unwrap();
        let p = build_subproblem(&diffs, Side::Tx, &w_r, 3.0, &BTreeSet::new()).unwrap();
        assert!(p.coefficients().iter().all(|&c| c <= 4.0 + 1e-12));
    }
}
