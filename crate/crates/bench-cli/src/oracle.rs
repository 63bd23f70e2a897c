//! Exhaustive placement search for small instances. Serves as the ground
//! truth the iterative algorithms are validated against.

use coharray_core::model::{coherence_direct, Placement, ProblemConfig};
use coharray_core::Error;
use itertools::Itertools;

use crate::Result;

const MAX_CANDIDATES: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Enumerate every placement of M transmit and N receive antennas and return
/// the one with minimum coherence. Ties resolve to the lexicographically
/// first index pair, so the result is deterministic.
pub fn exhaustive_minimum(config: &ProblemConfig) -> Result<(Placement, f64)> {
    config.validate()?;
    let candidates =
        binomial(config.m_tilde, config.m) * binomial(config.n_tilde, config.n);
    if candidates > MAX_CANDIDATES {
        return Err(Error::InstanceTooLarge(format!(
            "{candidates} candidate placements exceed the {MAX_CANDIDATES} cap"
        ))
        .into());
    }
    let mut best: Option<(Placement, f64)> = None;
    for tx in (0..config.m_tilde).combinations(config.m) {
        for rx in (0..config.n_tilde).combinations(config.n) {
            let placement = Placement::new(tx.clone(), rx)?;
            let mu = coherence_direct(&placement, config)?;
            if best.as_ref().map_or(true, |(_, b)| mu < *b) {
                best = Some((placement, mu));
            }
        }
    }
    Ok(best.expect("at least one placement exists"))
}
