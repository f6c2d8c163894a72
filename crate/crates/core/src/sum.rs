//! Deterministic reductions.
//!
//! All energies reduce per-row partial sums with [`pairwise_sum`], whose
//! split points depend only on the slice length, so the result does not
//! depend on how the partials were produced (serially or on a thread pool).

const LEAF: usize = 64;

/// Pairwise (cascade) summation with a fixed split tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        // 8 interleaved accumulators, combined in a fixed order
        let mut acc = [0.0f64; 8];
        let chunks = xs.chunks_exact(8);
        let rem = chunks.remainder();
        for c in chunks {
            for k in 0..8 {
                acc[k] += c[k];
            }
        }
        let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
        for &x in rem {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Neumaier-compensated sum, used where terms of very different size mix.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Evaluates `f` on `0..n` (possibly in parallel) and reduces the results
/// with [`pairwise_sum`].
pub fn par_sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    let parts: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    pairwise_sum(&parts)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&prods)
}
