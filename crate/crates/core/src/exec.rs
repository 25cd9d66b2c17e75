//! Data-parallel execution helpers.
//!
//! With the `parallel` feature these dispatch onto rayon; without it they are
//! plain sequential loops. Results are always collected in input order, so
//! output never depends on the number of threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker pool with a fixed thread count. [`Pool::map_mut`] runs inline for
/// one thread; [`Pool::install`] always confines nested work to the pool.
pub struct Pool {
    #[cfg(feature = "parallel")]
    inner: Option<rayon::ThreadPool>,
    threads: usize,
}

impl Pool {
    pub fn new(threads: usize) -> Self {
        let threads = threads.max(1);
        #[cfg(feature = "parallel")]
        {
            let inner = rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok();
            Self { inner, threads }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self { threads }
        }
    }

    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Applies `f` to every element, mutating in place, and returns the
    /// per-element results in order.
    pub fn map_mut<T, R, F>(&self, items: &mut [T], f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, &mut T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = self.inner.as_ref().filter(|_| self.threads > 1) {
            return pool.install(|| {
                items
                    .par_iter_mut()
                    .enumerate()
                    .map(|(i, t)| f(i, t))
                    .collect()
            });
        }
        items.iter_mut().enumerate().map(|(i, t)| f(i, t)).collect()
    }

    /// Runs `op` inside this pool, so nested [`par_map`] calls use its threads.
    pub fn install<R: Send, OP: FnOnce() -> R + Send>(&self, op: OP) -> R {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.inner {
            return pool.install(op);
        }
        op()
    }
}

/// Order-preserving map over a slice on the ambient thread pool.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Order-preserving map over `0..n` on the ambient thread pool.
pub fn par_map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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
