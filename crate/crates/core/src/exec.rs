//! Execution strategy for the data-parallel inner loops.
//!
//! Every batch computation in the engine (per-vertex distortion, sparse
//! mat-vec products, lattice candidate evaluation, intersection tests) goes
//! through [`Execution::map`], which preserves input order so results are
//! bit-identical between the two strategies. Floating-point reductions are
//! always performed sequentially by the caller on the ordered output.

/// How batch work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    /// Uses the rayon thread pool when the `parallel` feature is enabled,
    /// otherwise falls back to sequential execution.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this strategy will actually use more than one thread.
    pub fn is_parallel(self) -> bool {
        matches!(self, Execution::Parallel) && cfg!(feature = "parallel")
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over an index range.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Fills `out[i] = f(i)` for every index.
    pub fn fill<R, F>(self, out: &mut [R], f: F)
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i));
            return;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }

    /// Returns true if `pred` holds for any index. Short-circuits where possible.
    pub fn any<F>(self, len: usize, pred: F) -> bool
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().any(pred);
        }
        (0..len).any(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_on_order() {
        let data: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let a = Execution::Sequential.map(&data, |x| x * 2.0);
        let b = Execution::Parallel.map(&data, |x| x * 2.0);
        assert_eq!(a, b);
        let mut out = vec![0usize; 64];
        Execution::Parallel.fill(&mut out, |i| i * i);
        assert_eq!(out[7], 49);
        assert!(Execution::Parallel.any(100, |i| i == 99));
        assert!(!Execution::Sequential.any(100, |i| i == 100));
    }
}
