//! Index-range map/reduce helpers.
//!
//! Work is cut into chunks of `CHUNK` consecutive indices. Chunk boundaries do
//! not depend on the thread count, and chunk results are combined pairwise in
//! index order, so every reduction returns the same bits whether it runs on
//! rayon or on the sequential fallback.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) const CHUNK: usize = 2048;

/// Ordered map over `0..n`.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().with_min_len(64).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Ordered fallible map over `0..n`; the first error in index order wins.
pub(crate) fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Evaluate `f` on each chunk range of `0..n` and merge the results
/// pairwise in index order. `None` when `n == 0`.
pub(crate) fn reduce_ranges<A, F, C>(n: usize, f: F, combine: C) -> Option<A>
where
    A: Send,
    F: Fn(Range<usize>) -> A + Sync + Send,
    C: Fn(A, A) -> A,
{
    let partials = map_indexed(
        n.div_ceil(CHUNK),
        |c| f(c * CHUNK..((c + 1) * CHUNK).min(n)),
    );
    pairwise(partials, &combine)
}

/// Reduce `0..n` with a per-index fold into a chunk accumulator, then merge
/// the chunk accumulators pairwise.
pub(crate) fn fold_chunks<A, I, F, C>(n: usize, init: I, fold: F, combine: C) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    C: Fn(A, A) -> A,
{
    reduce_ranges(
        n,
        |range| {
            let mut acc = init();
            for i in range {
                fold(&mut acc, i);
            }
            acc
        },
        combine,
    )
    .unwrap_or_else(init)
}

fn pairwise<A, C: Fn(A, A) -> A>(mut items: Vec<A>, combine: &C) -> Option<A> {
    match items.len() {
        0 => None,
        1 => items.pop(),
        len => {
            let right = items.split_off(len / 2);
            let l = pairwise(items, combine)?;
            let r = pairwise(right, combine)?;
            Some(combine(l, r))
        }
    }
}

/// Deterministic sum of `f(i)` for `i` in `0..n`.
pub(crate) fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    fold_chunks(n, || 0.0, |acc, i| *acc += f(i), |a, b| a + b)
}
