//! Thin helpers over rustfft: 1D/2D transforms in row-major layout and
//! linear convolution with a fixed kernel.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for a rows × cols array.
#[derive(Clone)]
pub(crate) struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len());
        let (rf, cf) = if inverse { (&self.row_inv, &self.col_inv) } else { (&self.row_fwd, &self.col_fwd) };
        rf.process(data);
        if self.rows > 1 {
            let mut col = vec![Complex64::new(0.0, 0.0); self.rows];
            for j in 0..self.cols {
                for i in 0..self.rows {
                    col[i] = data[i * self.cols + j];
                }
                cf.process(&mut col);
                for i in 0..self.rows {
                    data[i * self.cols + j] = col[i];
                }
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Inverse transform including the 1/(rows·cols) normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// Smallest 2^a 3^b 5^c ≥ n.
pub(crate) fn good_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// out(o) = Σ_j in(j)·k(o − offset − j) for `o` over an output box and `j`
/// over an input box, evaluated by one padded circular convolution.
#[derive(Clone)]
pub(crate) struct LinearConvolver {
    in_shape: (usize, usize),
    out_shape: (usize, usize),
    offset: (i64, i64),
    size: (usize, usize),
    fft: Fft2,
    kernel_hat: Vec<Complex64>,
}

impl LinearConvolver {
    /// `kernel(d0, d1)` is sampled on every offset the convolution needs.
    pub fn new(
        in_shape: (usize, usize),
        out_shape: (usize, usize),
        offset: (i64, i64),
        kernel: impl Fn(i64, i64) -> f64,
    ) -> Self {
        let need0 = in_shape.0 + out_shape.0 - 1;
        let need1 = in_shape.1 + out_shape.1 - 1;
        let f0 = if need0 == 1 { 1 } else { good_size(need0) };
        let f1 = good_size(need1);
        let fft = Fft2::new(f0, f1);
        let mut kh = vec![Complex64::new(0.0, 0.0); f0 * f1];
        // offsets d ∈ [−off − (n − 1), m − 1 − off]
        let lo0 = -offset.0 - (in_shape.0 as i64 - 1);
        let lo1 = -offset.1 - (in_shape.1 as i64 - 1);
        for a in 0..need0 as i64 {
            let d0 = lo0 + a;
            let q0 = d0.rem_euclid(f0 as i64) as usize;
            for b in 0..need1 as i64 {
                let d1 = lo1 + b;
                let q1 = d1.rem_euclid(f1 as i64) as usize;
                kh[q0 * f1 + q1] = Complex64::new(kernel(d0, d1), 0.0);
            }
        }
        fft.forward(&mut kh);
        Self { in_shape, out_shape, offset, size: (f0, f1), fft, kernel_hat: kh }
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let (f0, f1) = self.size;
        let (n0, n1) = self.in_shape;
        assert_eq!(input.len(), n0 * n1);
        let mut buf = vec![Complex64::new(0.0, 0.0); f0 * f1];
        for i in 0..n0 {
            for j in 0..n1 {
                buf[i * f1 + j] = Complex64::new(input[i * n1 + j], 0.0);
            }
        }
        self.fft.forward(&mut buf);
        for (z, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *z *= k;
        }
        self.fft.inverse(&mut buf);
        let (m0, m1) = self.out_shape;
        let mut out = vec![0.0; m0 * m1];
        for o0 in 0..m0 {
            let q0 = (o0 as i64 - self.offset.0).rem_euclid(f0 as i64) as usize;
            for o1 in 0..m1 {
                let q1 = (o1 as i64 - self.offset.1).rem_euclid(f1 as i64) as usize;
                out[o0 * m1 + o1] = buf[q0 * f1 + q1].re;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_matches_direct() {
        let k = |d0: i64, d1: i64| 1.0 / (1.0 + (d0 * d0 + 2 * d1 * d1) as f64) + 0.1 * d1 as f64;
        let input: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let conv = LinearConvolver::new((3, 4), (5, 6), (1, 1), k);
        let out = conv.apply(&input);
        for o0 in 0..5i64 {
            for o1 in 0..6i64 {
                let mut s = 0.0;
                for j0 in 0..3i64 {
                    for j1 in 0..4i64 {
                        s += input[(j0 * 4 + j1) as usize] * k(o0 - 1 - j0, o1 - 1 - j1);
                    }
                }
                assert!((out[(o0 * 6 + o1) as usize] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(good_size(7), 8);
        assert_eq!(good_size(259), 270);
    }
}
