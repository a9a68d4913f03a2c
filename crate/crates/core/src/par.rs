//! Sequential / parallel execution switch.
//!
//! Every parallel region in the crate maps an independent closure over
//! compartments, realizations or examples and collects results in index
//! order, so switching modes never changes a result bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when built with the `parallel` feature; otherwise identical
    /// to [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f).collect()`, possibly in parallel.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Calls `f(i, &mut items[i])` for every item.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }

    /// Calls `f(i, &mut a[i], &mut b[i])` for every index; `a` and `b` must
    /// have equal length.
    pub fn for_each_pair_mut<A, B, F>(self, a: &mut [A], b: &mut [B], f: F)
    where
        A: Send,
        B: Send,
        F: Fn(usize, &mut A, &mut B) + Sync + Send,
    {
        assert_eq!(a.len(), b.len());
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            a.par_iter_mut()
                .zip(b.par_iter_mut())
                .enumerate()
                .for_each(|(i, (x, y))| f(i, x, y));
            return;
        }
        a.iter_mut()
            .zip(b.iter_mut())
            .enumerate()
            .for_each(|(i, (x, y))| f(i, x, y));
    }

    /// Applies `f(offset, chunk)` to consecutive `chunk`-sized pieces of
    /// `items` and collects the results in chunk order.
    pub fn map_chunks_mut<T, R, F>(self, items: &mut [T], chunk: usize, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, &mut [T]) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items
                .par_chunks_mut(chunk)
                .enumerate()
                .map(|(c, xs)| f(c * chunk, xs))
                .collect();
        }
        items
            .chunks_mut(chunk)
            .enumerate()
            .map(|(c, xs)| f(c * chunk, xs))
            .collect()
    }
}
