//! Lexicase parent selection, random down-sampling, and hyperselection
//! detection.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Per-case errors over the active set, in active-set order. 0 means the
/// case is passed; all entries are finite and non-negative.
pub type ErrorVector = Vec<f64>;

/// Selects one parent by lexicase over `errors` (one error vector per
/// individual, all the same length). Returns the index of the selected
/// individual.
///
/// Cases are considered in a uniformly shuffled order; at each case the
/// candidate pool is filtered to the individuals with minimal error on it.
/// When one candidate remains or cases run out, a uniform-random survivor
/// is returned.
pub fn lexicase_select<E: AsRef<[f64]>>(errors: &[E], rng: &mut impl Rng) -> usize {
    let n_cases = errors
        .first()
        .expect("population must be non-empty")
        .as_ref()
        .len();
    let mut order: Vec<usize> = (0..n_cases).collect();
    order.shuffle(rng);
    lexicase_select_with_order(errors, &order, rng)
}

/// Lexicase filtering with an explicit case ordering; exposed so tests can
/// enumerate all orderings.
pub fn lexicase_select_with_order<E: AsRef<[f64]>>(
    errors: &[E],
    order: &[usize],
    rng: &mut impl Rng,
) -> usize {
    let survivors = lexicase_survivors(errors, order);
    *survivors.choose(rng).expect("filtering keeps >= 1 survivor")
}

/// The candidate pool left after filtering on every case in `order`.
pub fn lexicase_survivors<E: AsRef<[f64]>>(errors: &[E], order: &[usize]) -> Vec<usize> {
    assert!(!errors.is_empty(), "population must be non-empty");
    let mut pool: Vec<usize> = (0..errors.len()).collect();
    for &case in order {
        if pool.len() == 1 {
            break;
        }
        let best = pool
            .iter()
            .map(|&i| errors[i].as_ref()[case])
            .fold(f64::INFINITY, f64::min);
        pool.retain(|&i| errors[i].as_ref()[case] == best);
    }
    pool
}

/// A uniform random subset of `sample_size` case indices out of
/// `full_set_size`, without replacement, sorted for stable logging.
/// Redrawn every generation by callers that down-sample.
pub fn downsample(full_set_size: usize, sample_size: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(
        sample_size > 0 && sample_size <= full_set_size,
        "need 0 < sample_size <= full_set_size"
    );
    let mut picked = rand::seq::index::sample(rng, full_set_size, sample_size).into_vec();
    picked.sort_unstable();
    picked
}

/// Flags the individual that received every selection this generation, if
/// any. `counts[i]` is how many times individual `i` was selected.
pub fn detect_hyperselection(selection_counts: &[usize]) -> Option<usize> {
    let total: usize = selection_counts.iter().sum();
    if total == 0 {
        return None;
    }
    selection_counts.iter().position(|&c| c == total)
}

#[cfg(test)]
mod tests;
