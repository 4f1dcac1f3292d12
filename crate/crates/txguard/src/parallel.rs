//! Order-preserving map over work items, parallel when the `parallel`
//! feature is enabled (the default). Result order never depends on
//! completion order, so callers stay deterministic either way.

#[cfg(feature = "parallel")]
pub fn pmap<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn pmap<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Always-sequential variant, kept as the baseline for benches.
pub fn map_serial<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
