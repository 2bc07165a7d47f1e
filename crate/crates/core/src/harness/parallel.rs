//! Order-preserving map over block indices, parallel when the `parallel`
//! feature is on.

use std::ops::Range;

use crate::Result;

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T, F>(range: Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T, F>(range: Range<u64>, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    range.map(f).collect()
}

/// Runs `job` on a pool of `threads` workers, or the global pool for `None`.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        _ => job(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<T>(_threads: Option<usize>, job: impl FnOnce() -> T) -> T {
    job()
}
