//! Array geometry, steering vectors and coherence evaluation.
//!
//! The virtual-array column for grid direction `g` is the Kronecker product
//! of the receive and transmit steering responses masked by the selection
//! weights. Coherence can be evaluated directly on materialized columns or
//! through the transmit/receive factorization of the cross-correlations.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::weights::Weights;
use crate::{Error, Result};

/// Problem geometry: grid sizes, antenna counts and the anchor direction.
///
/// All indices are zero-based; `anchor_index` is the reference direction
/// against which cross-correlations are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemConfig {
    /// Transmit grid size M̃.
    pub m_tilde: usize,
    /// Receive grid size Ñ.
    pub n_tilde: usize,
    /// Number of transmit antennas M.
    pub m: usize,
    /// Number of receive antennas N.
    pub n: usize,
    /// Number of angular grid points G.
    pub g_count: usize,
    /// Anchor direction index g′ ∈ 0..G.
    pub anchor_index: usize,
}

impl ProblemConfig {
    pub fn new(m_tilde: usize, n_tilde: usize, m: usize, n: usize, g_count: usize) -> Result<Self> {
        let cfg = Self {
            m_tilde,
            n_tilde,
            m,
            n,
            g_count,
            // last grid point; all anchors achieve the same maximum on
            // half-integer grids
            anchor_index: g_count.saturating_sub(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m > self.m_tilde {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= m <= m_tilde, got m={} m_tilde={}",
                self.m, self.m_tilde
            )));
        }
        if self.n < 1 || self.n > self.n_tilde {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n <= n_tilde, got n={} n_tilde={}",
                self.n, self.n_tilde
            )));
        }
        if self.g_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "need g_count >= 2, got {}",
                self.g_count
            )));
        }
        if self.anchor_index >= self.g_count {
            return Err(Error::InvalidArgument(format!(
                "anchor_index {} out of range for g_count {}",
                self.anchor_index, self.g_count
            )));
        }
        Ok(())
    }

    pub fn tx_grid(&self) -> PositionGrid {
        PositionGrid::half_wavelength(self.m_tilde)
    }

    pub fn rx_grid(&self) -> PositionGrid {
        PositionGrid::half_wavelength(self.n_tilde)
    }
}

/// Uniform grid of direction-of-arrival parameters u = sin θ.
#[derive(Debug, Clone, PartialEq)]
pub struct UGrid {
    values: Vec<f64>,
}

impl UGrid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Candidate antenna positions in wavelength-normalized units, λ/2 spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionGrid {
    positions: Vec<f64>,
}

impl PositionGrid {
    /// Grid points at 0, 1/2, 1, ..., (size−1)/2 wavelengths.
    pub fn half_wavelength(size: usize) -> Self {
        Self {
            positions: (0..size).map(|k| k as f64 / 2.0).collect(),
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Per-element phase response exp(j2πuy) for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    entries: Vec<Complex64>,
}

impl SteeringVector {
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Precomputed difference vectors against the anchor direction.
///
/// For every g ≠ anchor, `a_diff[g]` is the elementwise product of the
/// conjugated anchor transmit steering vector with steering vector g over the
/// full transmit grid; `b_diff` is the receive-side analog. All entries are
/// unit modulus, so cross-correlations against the anchor reduce to single
/// inner products with the selection weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceVectors {
    a_diff: BTreeMap<usize, Vec<Complex64>>,
    b_diff: BTreeMap<usize, Vec<Complex64>>,
    anchor_index: usize,
}

impl DifferenceVectors {
    pub fn anchor_index(&self) -> usize {
        self.anchor_index
    }

    pub fn tx(&self) -> &BTreeMap<usize, Vec<Complex64>> {
        &self.a_diff
    }

    pub fn rx(&self) -> &BTreeMap<usize, Vec<Complex64>> {
        &self.b_diff
    }

    /// Off-anchor direction indices, ascending.
    pub fn directions(&self) -> impl Iterator<Item = usize> + '_ {
        self.a_diff.keys().copied()
    }
}

/// Final binary antenna selection: index sets into the position grids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    tx_indices: Vec<usize>,
    rx_indices: Vec<usize>,
}

impl Placement {
    pub fn new(mut tx_indices: Vec<usize>, mut rx_indices: Vec<usize>) -> Result<Self> {
        tx_indices.sort_unstable();
        rx_indices.sort_unstable();
        for w in tx_indices.windows(2).chain(rx_indices.windows(2)) {
            if w[0] == w[1] {
                return Err(Error::InvalidArgument(format!(
                    "duplicate placement index {}",
                    w[0]
                )));
            }
        }
        Ok(Self { tx_indices, rx_indices })
    }

    pub fn tx_indices(&self) -> &[usize] {
        &self.tx_indices
    }

    pub fn rx_indices(&self) -> &[usize] {
        &self.rx_indices
    }

    pub fn tx_weights(&self, dim: usize) -> Result<Weights> {
        Weights::binary_from_indices(dim, &self.tx_indices)
    }

    pub fn rx_weights(&self, dim: usize) -> Result<Weights> {
        Weights::binary_from_indices(dim, &self.rx_indices)
    }
}

/// Uniform u-grid with u_g = −1 + 2(g+1)/G for g = 0..G; the last value is 1.
pub fn make_u_grid(g_count: usize) -> Result<UGrid> {
    if g_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need g_count >= 2, got {g_count}"
        )));
    }
    let g = g_count as f64;
    Ok(UGrid {
        values: (1..=g_count).map(|k| -1.0 + 2.0 * k as f64 / g).collect(),
    })
}

/// Steering vector entries exp(j2πuy) over the grid positions.
pub fn steering_vector(u: f64, grid: &PositionGrid) -> Result<SteeringVector> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty position grid".into()));
    }
    Ok(SteeringVector {
        entries: grid
            .positions
            .iter()
            .map(|&y| Complex64::from_polar(1.0, TAU * u * y))
            .collect(),
    })
}

/// Difference vectors a*_{g′} ⊙ a_g and b*_{g′} ⊙ b_g for every g ≠ g′.
pub fn difference_vectors(config: &ProblemConfig) -> Result<DifferenceVectors> {
    config.validate()?;
    let u_grid = make_u_grid(config.g_count)?;
    let tx_grid = config.tx_grid();
    let rx_grid = config.rx_grid();
    let anchor = config.anchor_index;
    let u_anchor = u_grid.values[anchor];
    let a_anchor = steering_vector(u_anchor, &tx_grid)?;
    let b_anchor = steering_vector(u_anchor, &rx_grid)?;

    let mut a_diff = BTreeMap::new();
    let mut b_diff = BTreeMap::new();
    for (g, &u) in u_grid.values.iter().enumerate() {
        if g == anchor {
            continue;
        }
        let a_g = steering_vector(u, &tx_grid)?;
        let b_g = steering_vector(u, &rx_grid)?;
        a_diff.insert(g, hadamard_conj(&a_anchor, &a_g));
        b_diff.insert(g, hadamard_conj(&b_anchor, &b_g));
    }
    Ok(DifferenceVectors { a_diff, b_diff, anchor_index: anchor })
}

fn hadamard_conj(anchor: &SteeringVector, other: &SteeringVector) -> Vec<Complex64> {
    anchor
        .entries
        .iter()
        .zip(&other.entries)
        .map(|(a, b)| a.conj() * b)
        .collect()
}

/// Full virtual-array column (w_r ⊙ b̃_g) ⊗ (w_t ⊙ ã_g) of length M̃·Ñ.
pub fn effective_column(
    w_t: &Weights,
    w_r: &Weights,
    g: usize,
    config: &ProblemConfig,
) -> Result<Vec<Complex64>> {
    config.validate()?;
    if w_t.dim() != config.m_tilde {
        return Err(Error::DimensionMismatch { expected: config.m_tilde, actual: w_t.dim() });
    }
    if w_r.dim() != config.n_tilde {
        return Err(Error::DimensionMismatch { expected: config.n_tilde, actual: w_r.dim() });
    }
    if g >= config.g_count {
        return Err(Error::InvalidArgument(format!(
            "direction {g} out of range for g_count {}",
            config.g_count
        )));
    }
    let u = make_u_grid(config.g_count)?.values[g];
    let a = steering_vector(u, &config.tx_grid())?;
    let b = steering_vector(u, &config.rx_grid())?;
    let tx: Vec<Complex64> = a
        .entries
        .iter()
        .zip(w_t.values())
        .map(|(e, &w)| w * e)
        .collect();
    let mut out = Vec::with_capacity(config.m_tilde * config.n_tilde);
    for (e, &w) in b.entries.iter().zip(w_r.values()) {
        let rx = w * e;
        out.extend(tx.iter().map(|t| rx * t));
    }
    Ok(out)
}

/// Compressed column of the effective measurement matrix: the M·N entries of
/// the virtual-array column at the selected elements.
fn compressed_column(
    placement: &Placement,
    u: f64,
    tx_grid: &PositionGrid,
    rx_grid: &PositionGrid,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(placement.tx_indices.len() * placement.rx_indices.len());
    for &j in &placement.rx_indices {
        let b = Complex64::from_polar(1.0, TAU * u * rx_grid.positions[j]);
        for &i in &placement.tx_indices {
            let a = Complex64::from_polar(1.0, TAU * u * tx_grid.positions[i]);
            out.push(b * a);
        }
    }
    out
}

/// Coherence of the realized measurement matrix, maximized over all column
/// pairs.
pub fn coherence_direct(placement: &Placement, config: &ProblemConfig) -> Result<f64> {
    config.validate()?;
    if placement.tx_indices.len() != config.m {
        return Err(Error::InvalidArgument(format!(
            "placement has {} tx indices, config wants {}",
            placement.tx_indices.len(),
            config.m
        )));
    }
    if placement.rx_indices.len() != config.n {
        return Err(Error::InvalidArgument(format!(
            "placement has {} rx indices, config wants {}",
            placement.rx_indices.len(),
            config.n
        )));
    }
    if let Some(&i) = placement.tx_indices.iter().max() {
        if i >= config.m_tilde {
            return Err(Error::InvalidArgument(format!("tx index {i} off grid")));
        }
    }
    if let Some(&j) = placement.rx_indices.iter().max() {
        if j >= config.n_tilde {
            return Err(Error::InvalidArgument(format!("rx index {j} off grid")));
        }
    }
    let u_grid = make_u_grid(config.g_count)?;
    let tx_grid = config.tx_grid();
    let rx_grid = config.rx_grid();
    let columns: Vec<Vec<Complex64>> = u_grid
        .values
        .iter()
        .map(|&u| compressed_column(placement, u, &tx_grid, &rx_grid))
        .collect();
    let norm_sq = (config.m * config.n) as f64;
    let mut max = 0.0f64;
    for i in 0..columns.len() {
        for j in (i + 1)..columns.len() {
            let dot: Complex64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(x, y)| x.conj() * y)
                .sum();
            max = max.max(dot.norm() / norm_sq);
        }
    }
    Ok(max)
}

/// Coherence via the factorized cross-correlations against the anchor:
/// max over g ≠ g′ of |w_r^T b_{g′g}|·|w_t^T a_{g′g}| / (‖w_t‖₁‖w_r‖₁).
pub fn coherence_factorized(
    w_t: &Weights,
    w_r: &Weights,
    diffs: &DifferenceVectors,
) -> Result<f64> {
    let mut max = 0.0f64;
    for (g, a) in diffs.a_diff.iter() {
        if a.len() != w_t.dim() {
            return Err(Error::DimensionMismatch { expected: a.len(), actual: w_t.dim() });
        }
        let b = &diffs.b_diff[g];
        if b.len() != w_r.dim() {
            return Err(Error::DimensionMismatch { expected: b.len(), actual: w_r.dim() });
        }
        let ta = weighted_sum(w_t.values(), a).norm();
        let tb = weighted_sum(w_r.values(), b).norm();
        max = max.max(ta * tb);
    }
    let norm = w_t.l1() * w_r.l1();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero weight mass".into()));
    }
    Ok(max / norm)
}

/// w^T v for real weights and a complex vector.
pub fn weighted_sum(weights: &[f64], v: &[Complex64]) -> Complex64 {
    weights
        .iter()
        .zip(v)
        .map(|(&w, x)| w * x)
        .sum()
}
