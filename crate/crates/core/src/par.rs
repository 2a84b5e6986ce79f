//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` policy runs on the rayon
//! pool; without it every policy degrades to a plain loop. Results are
//! always returned in input order, so callers stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub fn map<T, R, F>(p: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if p.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = p;
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(p: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if p.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = p;
    (0..n).map(f).collect()
}

/// Applies `f` to every index in `0..n` and folds the results with an
/// associative, commutative `reduce`.
pub fn map_reduce<R, F, G>(p: Parallelism, n: u64, identity: R, f: F, reduce: G) -> R
where
    R: Send + Sync + Clone,
    F: Fn(u64) -> R + Sync + Send,
    G: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if p.is_parallel() {
        return (0..n)
            .into_par_iter()
            .map(&f)
            .reduce(|| identity.clone(), &reduce);
    }
    let _ = p;
    (0..n).map(f).fold(identity, reduce)
}

pub fn sort_unstable<T: Ord + Send>(p: Parallelism, v: &mut [T]) {
    #[cfg(feature = "parallel")]
    if p.is_parallel() {
        v.par_sort_unstable();
        return;
    }
    let _ = p;
    v.sort_unstable();
}
