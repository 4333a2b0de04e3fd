//! Deterministic data-parallel replication helpers.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "EXCERPTLAB_THREADS";

/// Worker count from [`THREADS_ENV`], or `None` to use rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Input(format!("cannot start thread pool: {e}")))
}

/// `f(0), …, f(n−1)` evaluated in parallel, returned in index order, so any
/// later fold over the results is independent of scheduling.
pub fn map_ordered<R, F>(n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let pool = thread_pool()?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_repeatable() {
        let a = map_ordered(1000, |i| (i as f64).sqrt()).unwrap();
        let b = map_ordered(1000, |i| (i as f64).sqrt()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[49], 7.0);
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        assert_eq!(sa.to_bits(), sb.to_bits());
    }
}
