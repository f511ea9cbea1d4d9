//! Thin switch between the rayon pool and a plain sequential loop.

/// Execution strategy for the search/enumeration kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Auto,
}

pub(crate) fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        Exec::Auto => par_map_range(n, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

pub(crate) fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}
