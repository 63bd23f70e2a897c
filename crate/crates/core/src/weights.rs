//! Relaxed grid-point selection weights.

use std::collections::BTreeSet;

use rand::Rng;

use crate::{Error, Result, ZERO_THRESHOLD};

/// Real-valued selection weights over a position grid.
///
/// Entries live in `[0, 1]`; indices in `eliminated` are frozen at exactly
/// zero. For a converged relaxation the entries sum to `sum_target` (the
/// number of antennas on that side).
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
    eliminated: BTreeSet<usize>,
    sum_target: f64,
}

impl Weights {
    pub fn new(values: Vec<f64>, eliminated: BTreeSet<usize>, sum_target: f64) -> Result<Self> {
        if let Some(&j) = eliminated.iter().next_back() {
            if j >= values.len() {
                return Err(Error::InvalidArgument(format!(
                    "eliminated index {j} out of range for dim {}",
                    values.len()
                )));
            }
        }
        let mut values = values;
        for &j in &eliminated {
            values[j] = 0.0;
        }
        Ok(Self { values, eliminated, sum_target })
    }

    /// All-ones weights (the full grid).
    pub fn ones(dim: usize) -> Self {
        Self {
            values: vec![1.0; dim],
            eliminated: BTreeSet::new(),
            sum_target: dim as f64,
        }
    }

    /// Binary weights with ones exactly at `indices`.
    pub fn binary_from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; dim];
        for &i in indices {
            if i >= dim {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range for dim {dim}"
                )));
            }
            values[i] = 1.0;
        }
        let target = values.iter().sum();
        Ok(Self { values, eliminated: BTreeSet::new(), sum_target: target })
    }

    /// Binary weights over a uniformly random `count`-subset of the grid.
    pub fn random_binary(dim: usize, count: usize, rng: &mut impl Rng) -> Result<Self> {
        if count > dim {
            return Err(Error::InvalidArgument(format!(
                "cannot select {count} of {dim} grid points"
            )));
        }
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in 0..count {
            let j = rng.gen_range(i..dim);
            idx.swap(i, j);
        }
        Self::binary_from_indices(dim, &idx[..count])
    }

    /// Continuous random weights: i.i.d. uniform entries rescaled to sum to
    /// `target`, clamped into the unit box.
    pub fn random_continuous(dim: usize, target: f64, rng: &mut impl Rng) -> Result<Self> {
        if target < 0.0 || target > dim as f64 {
            return Err(Error::InvalidArgument(format!(
                "sum target {target} infeasible for {dim} unit-box entries"
            )));
        }
        let mut values: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>().max(1e-12)).collect();
        // rescale the headroom below 1 until the sum hits the target
        for _ in 0..200 {
            let sum: f64 = values.iter().sum();
            if (sum - target).abs() <= 1e-12 {
                break;
            }
            let fixed: f64 = values.iter().filter(|&&v| v >= 1.0).sum();
            let free: f64 = sum - fixed;
            if free <= 0.0 {
                break;
            }
            let scale = (target - fixed) / free;
            for v in values.iter_mut() {
                if *v < 1.0 {
                    *v = (*v * scale).min(1.0);
                }
            }
        }
        Self::new(values, BTreeSet::new(), target)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn sum_target(&self) -> f64 {
        self.sum_target
    }

    pub fn eliminated(&self) -> &BTreeSet<usize> {
        &self.eliminated
    }

    /// Number of grid points not yet eliminated.
    pub fn free_count(&self) -> usize {
        self.values.len() - self.eliminated.len()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Support size: entries above the shared zero threshold.
    pub fn l0(&self) -> usize {
        self.values.iter().filter(|&&v| v > ZERO_THRESHOLD).count()
    }

    /// Indices of strictly positive entries.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Smallest entry among non-eliminated indices; ties break to the lowest
    /// index. `None` when every index is eliminated.
    pub fn min_free(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if self.eliminated.contains(&i) {
                continue;
            }
            match best {
                Some((_, bv)) if v >= bv => {}
                _ => best = Some((i, v)),
            }
        }
        best
    }

    /// Freeze index `j` at zero.
    pub fn eliminate(&mut self, j: usize) {
        self.values[j] = 0.0;
        self.eliminated.insert(j);
    }

    /// Replace the values, keeping the eliminated set (eliminated entries
    /// are forced back to exactly zero).
    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        self.values = values;
        for &j in &self.eliminated {
            self.values[j] = 0.0;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_binary_has_exact_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w = Weights::random_binary(30, 7, &mut rng).unwrap();
            assert_eq!(w.l0(), 7);
            assert_eq!(w.l1(), 7.0);
        }
    }

    #[test]
    fn random_continuous_hits_target_in_unit_box() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for target in [2.0, 7.0, 19.5] {
            let w = Weights::random_continuous(20, target, &mut rng).unwrap();
            assert!((w.l1() - target).abs() < 1e-9);
            assert!(w.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn elimination_zeroes_and_survives_set_values() {
        let mut w = Weights::new(vec![0.2, 0.5, 0.3], BTreeSet::new(), 1.0).unwrap();
        w.eliminate(1);
        assert_eq!(w.values()[1], 0.0);
        w.set_values(vec![0.4, 0.9, 0.6]).unwrap();
        assert_eq!(w.values()[1], 0.0, "eliminated entries stay pinned");
        assert_eq!(w.free_count(), 2);
    }
}
