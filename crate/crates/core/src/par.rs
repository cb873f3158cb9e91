//! Data-parallel helpers.
//!
//! With the `parallel` feature the maps below run on the rayon pool; without
//! it they run sequentially. Results are always collected in index order and
//! reduced with [`pairwise_sum`], so the floating point output does not depend
//! on the number of threads.

use nalgebra::DVector;

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_indexed`]; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Whether this build dispatches onto the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Componentwise pairwise summation of equally sized vectors.
pub fn pairwise_sum_vectors(values: &[DVector<f64>], dim: usize) -> DVector<f64> {
    if values.is_empty() {
        return DVector::zeros(dim);
    }
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = DVector::zeros(dim);
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum_vectors(&values[..mid], dim) + pairwise_sum_vectors(&values[mid..], dim)
}
