//! Data-parallel helpers with a sequential fallback.
//!
//! Every hot inner loop in the crate (kernel convolution, grid scans,
//! independent runs of a sweep) goes through [`Execution`]. With the
//! `parallel` feature disabled, [`Execution::Parallel`] silently runs the
//! sequential path, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum number of items a rayon task processes.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `out[i] = f(i)` for every index.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_iter_mut()
                .with_min_len(MIN_CHUNK)
                .enumerate()
                .for_each(|(i, o)| *o = f(i));
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// Applies `f` to every element in place.
    pub fn update<F>(self, values: &mut [f64], f: F)
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            values
                .par_iter_mut()
                .with_min_len(MIN_CHUNK)
                .for_each(|v| *v = f(*v));
            return;
        }
        for v in values.iter_mut() {
            *v = f(*v);
        }
    }

    /// Maximum of `f(i)` over `0..n`; `f64::NEG_INFINITY` when `n == 0`.
    pub fn max_over<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .with_min_len(64)
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum of `f(i)` over `0..n`; `f64::INFINITY` when `n == 0`.
    pub fn min_over<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        -self.max_over(n, |i| -f(i))
    }

    /// Maps independent jobs, preserving order. Used for coarse-grained
    /// work such as parameter sweeps, where each item is a full solve.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let n = 10_000;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        Execution::Sequential.fill(&mut a, |i| (i as f64).sin());
        Execution::Parallel.fill(&mut b, |i| (i as f64).sin());
        assert_eq!(a, b);
        let ma = Execution::Sequential.max_over(n, |i| a[i]);
        let mb = Execution::Parallel.max_over(n, |i| a[i]);
        assert_eq!(ma, mb);
        let items: Vec<usize> = (0..37).collect();
        assert_eq!(
            Execution::Sequential.map(&items, |i| i * i),
            Execution::Parallel.map(&items, |i| i * i)
        );
    }

    #[test]
    fn empty_reductions() {
        assert_eq!(Execution::Parallel.max_over(0, |_| 1.0), f64::NEG_INFINITY);
        assert_eq!(Execution::Sequential.min_over(0, |_| 1.0), f64::INFINITY);
    }
}
