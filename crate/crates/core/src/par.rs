//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool, otherwise it runs on the calling thread. Results are
//! always returned in input order so reductions stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, keeping index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential version of [`map_indexed`], used by benches and as a fallback.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
