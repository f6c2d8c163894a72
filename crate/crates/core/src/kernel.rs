//! Singular kernels |z|_K^{−(N+σ)} on the cell lattice.
//!
//! A function that is piecewise constant on cells and zero outside the box
//! interacts through the dimensionless lattice weights w(k), k ∈ ℤᴺ:
//! the pair (i, j) carries hᴺ⁻σ·w(i − j). Far from the diagonal
//! w(k) = ‖k‖^{−N−σ}; offsets with ‖k‖_∞ ≤ 2 get a near-field rule.
//! The total Σ_{k≠0} w(k) is evaluated exactly (Epstein zeta for the
//! Euclidean norm), which gives the interaction with the whole exterior of
//! the box without truncation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::special::{epstein_zeta, hurwitz_zeta};

/// Near-diagonal treatment of the lattice weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NearField {
    /// Average of the kernel over 4ᴺ × 4ᴺ sub-cell pairs for ‖k‖_∞ ≤ 2.
    /// Tuned for piecewise-constant data (indicators, step functions).
    #[default]
    Refined,
    /// Zeta moment correction of the nearest-neighbour weights, exact to
    /// leading order for smooth data (p = 2 in 2D, any p in 1D,
    /// Euclidean norm only).
    Smooth,
    /// Plain lattice kernel w(k) = ‖k‖^{−N−σ}.
    Midpoint,
}

/// Norm ‖·‖_K defining the kernel.
#[derive(Clone)]
pub enum Norm {
    Euclidean,
    /// ℓ^q norm, q ∈ [1, ∞].
    Lq(f64),
    /// ‖z‖ = √(zᵀ A z) for a symmetric positive-definite A (row-major).
    Matrix(Vec<f64>),
    /// Arbitrary norm evaluator.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Euclidean => write!(f, "Euclidean"),
            Norm::Lq(q) => write!(f, "Lq({q})"),
            Norm::Matrix(a) => write!(f, "Matrix({a:?})"),
            Norm::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Norm {
    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => z.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Lq(q) => {
                if q.is_infinite() {
                    z.iter().fold(0.0, |m, x| m.max(x.abs()))
                } else {
                    z.iter().map(|x| x.abs().powf(*q)).sum::<f64>().powf(1.0 / q)
                }
            }
            Norm::Matrix(a) => {
                let n = z.len();
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += z[i] * a[i * n + j] * z[j];
                    }
                }
                s.max(0.0).sqrt()
            }
            Norm::Custom(f) => f(z),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Norm::Lq(q) if !(*q >= 1.0) => {
                return Err(Error::InvalidKernel(format!("l^q norm needs q >= 1, got {q}")))
            }
            Norm::Matrix(a) => {
                if a.len() != dim * dim {
                    return Err(Error::InvalidKernel(format!(
                        "matrix norm needs {} entries, got {}",
                        dim * dim,
                        a.len()
                    )));
                }
                for i in 0..dim {
                    for j in 0..dim {
                        if (a[i * dim + j] - a[j * dim + i]).abs() > 1e-14 * a[i * dim + j].abs().max(1.0) {
                            return Err(Error::InvalidKernel("matrix norm must be symmetric".into()));
                        }
                    }
                }
                let pd = if dim == 1 {
                    a[0] > 0.0
                } else {
                    a[0] > 0.0 && a[0] * a[3] - a[1] * a[2] > 0.0
                };
                if !pd {
                    return Err(Error::InvalidKernel("matrix norm must be positive definite".into()));
                }
            }
            _ => {}
        }
        // spot checks: positivity, symmetry, 1-homogeneity
        let probes: [[f64; 2]; 5] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-0.3, 2.0], [2.5, -1.5]];
        for pr in probes.iter() {
            let z = &pr[..dim];
            if z.iter().all(|&x| x == 0.0) {
                continue;
            }
            let n0 = self.eval(z);
            if !(n0 > 0.0 && n0.is_finite()) {
                return Err(Error::InvalidKernel(format!("norm({z:?}) = {n0} is not positive")));
            }
            let neg: Vec<f64> = z.iter().map(|x| -x).collect();
            for &lam in &[0.5, 2.0, 3.0] {
                let zl: Vec<f64> = z.iter().map(|x| lam * x).collect();
                let nl = self.eval(&zl);
                if (nl - lam * n0).abs() > 1e-12 * lam * n0 {
                    return Err(Error::InvalidKernel(format!(
                        "norm is not 1-homogeneous at {z:?}: {nl} vs {}",
                        lam * n0
                    )));
                }
            }
            let nn = self.eval(&neg);
            if (nn - n0).abs() > 1e-12 * n0 {
                return Err(Error::InvalidKernel(format!("norm is not symmetric at {z:?}")));
            }
        }
        Ok(())
    }
}

/// Kernel choice: the norm and the near-diagonal rule. The exponent N + sp
/// is supplied by the caller.
#[derive(Debug, Clone, Default)]
pub struct KernelSpec {
    pub norm: Norm,
    pub near_field: NearField,
}

impl Default for Norm {
    fn default() -> Self {
        Norm::Euclidean
    }
}

impl KernelSpec {
    pub fn isotropic() -> Self {
        Self::default()
    }
    pub fn anisotropic(norm: Norm) -> Self {
        Self { norm, near_field: NearField::Refined }
    }
    pub fn with_near_field(mut self, near_field: NearField) -> Self {
        self.near_field = near_field;
        self
    }
    pub fn is_isotropic(&self) -> bool {
        matches!(self.norm, Norm::Euclidean)
    }
    /// K(z) = ‖z‖^{−exponent}.
    pub fn value(&self, z: &[f64], exponent: f64) -> f64 {
        self.norm.eval(z).powf(-exponent)
    }
}

const DIRECT_RADIUS: i64 = 64;
const POLAR_NODES: usize = 4096;
const IMAGE_RINGS: i64 = 5;
pub(crate) const NEAR_RADIUS: i64 = 2;

/// Dimensionless lattice weights for one (dim, σ, p, kernel) combination.
#[derive(Debug, Clone)]
pub struct LatticeKernel {
    dim: usize,
    exponent: f64,
    sigma: f64,
    norm: Norm,
    /// row-major (2R+1)^N table of weights for ‖k‖_∞ ≤ R
    near: Vec<f64>,
    total: f64,
}

impl LatticeKernel {
    /// `sigma` is the exponent beyond N (σ = s·p); `p` only enters the
    /// smooth near-field correction.
    pub fn new(dim: usize, sigma: f64, p: f64, spec: &KernelSpec) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("kernels in dimension {dim}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("kernel order {sigma} must be positive")));
        }
        spec.norm.validate(dim)?;
        let exponent = dim as f64 + sigma;
        let mut k = Self { dim, exponent, sigma, norm: spec.norm.clone(), near: Vec::new(), total: 0.0 };
        let base_total = k.raw_total();
        let side = (2 * NEAR_RADIUS + 1) as usize;
        let count = side.pow(dim as u32);
        let mut near = Vec::with_capacity(count);
        for idx in 0..count {
            let off = k.near_offset(idx);
            near.push(if off == [0, 0] { 0.0 } else { k.raw(off) });
        }
        match spec.near_field {
            NearField::Midpoint => {}
            NearField::Refined => {
                for (idx, w) in near.iter_mut().enumerate() {
                    let off = k.near_offset(idx);
                    if off != [0, 0] {
                        *w = k.subcell_average(off);
                    }
                }
            }
            NearField::Smooth => {
                if !matches!(spec.norm, Norm::Euclidean) {
                    return Err(Error::Unsupported("smooth near field needs the Euclidean norm".into()));
                }
                let delta = if dim == 1 {
                    -hurwitz_zeta(1.0 + sigma - p, 1.0)
                } else {
                    if p != 2.0 {
                        return Err(Error::Unsupported("smooth near field in 2D needs p = 2".into()));
                    }
                    -epstein_zeta(2, exponent - 2.0) / 4.0
                };
                for (idx, w) in near.iter_mut().enumerate() {
                    let off = k.near_offset(idx);
                    if off[0].abs() + off[1].abs() == 1 {
                        *w += delta;
                    }
                }
            }
        }
        let mut total = base_total;
        for (idx, w) in near.iter().enumerate() {
            let off = k.near_offset(idx);
            if off != [0, 0] {
                total += w - k.raw(off);
            }
        }
        k.near = near;
        k.total = total;
        Ok(k)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn near_offset(&self, idx: usize) -> [i64; 2] {
        let side = (2 * NEAR_RADIUS + 1) as usize;
        if self.dim == 1 {
            [idx as i64 - NEAR_RADIUS, 0]
        } else {
            [(idx / side) as i64 - NEAR_RADIUS, (idx % side) as i64 - NEAR_RADIUS]
        }
    }

    fn near_index(&self, k: [i64; 2]) -> Option<usize> {
        let side = 2 * NEAR_RADIUS + 1;
        if k[0].abs() > NEAR_RADIUS || k[1].abs() > NEAR_RADIUS {
            return None;
        }
        Some(if self.dim == 1 {
            (k[0] + NEAR_RADIUS) as usize
        } else {
            ((k[0] + NEAR_RADIUS) * side + k[1] + NEAR_RADIUS) as usize
        })
    }

    /// ‖k‖^{−N−σ}, k ≠ 0.
    pub fn raw(&self, k: [i64; 2]) -> f64 {
        self.raw_f([k[0] as f64, k[1] as f64])
    }

    fn raw_f(&self, z: [f64; 2]) -> f64 {
        match self.norm {
            Norm::Euclidean => (z[0] * z[0] + z[1] * z[1]).powf(-0.5 * self.exponent),
            _ => self.norm.eval(&z[..self.dim]).powf(-self.exponent),
        }
    }

    /// Lattice weight of offset k (k = 0 gives 0).
    pub fn weight(&self, k: [i64; 2]) -> f64 {
        let k = if self.dim == 1 { [k[0], 0] } else { k };
        // w(k) = w(−k) bit for bit
        let k = if (k[0], k[1]) < (0, 0) { [-k[0], -k[1]] } else { k };
        match self.near_index(k) {
            Some(i) => self.near[i],
            None => self.raw(k),
        }
    }

    /// Σ_{k≠0} w(k).
    pub fn total(&self) -> f64 {
        self.total
    }

    fn subcell_average(&self, k: [i64; 2]) -> f64 {
        // sub-cell center differences d/4, d ∈ {−3..3}, multiplicity 4 − |d|
        let mut s = 0.0;
        let dims = if self.dim == 1 { 1 } else { 2 };
        for d0 in -3i64..=3 {
            let m0 = (4 - d0.abs()) as f64;
            if dims == 1 {
                s += m0 * self.raw_f([k[0] as f64 + d0 as f64 / 4.0, 0.0]);
            } else {
                for d1 in -3i64..=3 {
                    let m1 = (4 - d1.abs()) as f64;
                    s += m0 * m1 * self.raw_f([k[0] as f64 + d0 as f64 / 4.0, k[1] as f64 + d1 as f64 / 4.0]);
                }
            }
        }
        s / 16f64.powi(dims)
    }

    /// Σ_{k≠0} ‖k‖^{−N−σ} for the plain lattice kernel.
    fn raw_total(&self) -> f64 {
        match (&self.norm, self.dim) {
            (Norm::Euclidean, d) => epstein_zeta(d, self.exponent),
            (_, 1) => {
                let c = self.norm.eval(&[1.0]);
                c.powf(-self.exponent) * epstein_zeta(1, self.exponent)
            }
            _ => {
                let r = DIRECT_RADIUS;
                let mut parts = Vec::with_capacity((2 * r + 1) as usize);
                for i in -r..=r {
                    let mut row = 0.0;
                    for j in -r..=r {
                        if i != 0 || j != 0 {
                            row += self.raw([i, j]);
                        }
                    }
                    parts.push(row);
                }
                let half = r as f64 + 0.5;
                crate::sum::pairwise_sum(&parts) + self.polar_tail(half, half)
            }
        }
    }

    /// ∫ over the complement of the rectangle |z₀| < a₀, |z₁| < a₁ of ‖z‖^{−2−σ}.
    fn polar_tail(&self, a0: f64, a1: f64) -> f64 {
        let n = POLAR_NODES;
        let dt = 2.0 * PI / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) * dt;
            let (sn, cs) = th.sin_cos();
            let rho = (a0 / cs.abs()).min(a1 / sn.abs());
            let nu = self.norm.eval(&[cs, sn]);
            s += nu.powf(-self.exponent) * rho.powf(-self.sigma) / self.sigma;
        }
        s * dt
    }

    /// Table of signed offsets for a box of `rows × cols` cells:
    /// entry (d0 + rows − 1, d1 + cols − 1) holds w(d0, d1).
    pub(crate) fn box_table(&self, rows: usize, cols: usize) -> OffsetTable {
        let tr = 2 * rows - 1;
        let tc = 2 * cols - 1;
        let mut data = vec![0.0; tr * tc];
        for a in 0..tr {
            let d0 = a as i64 - (rows as i64 - 1);
            for b in 0..tc {
                let d1 = b as i64 - (cols as i64 - 1);
                if d0 != 0 || d1 != 0 {
                    data[a * tc + b] = self.weight(if self.dim == 1 { [d1, 0] } else { [d0, d1] });
                }
            }
        }
        OffsetTable { rows, cols, data }
    }

    /// Periodized weights W(m) = Σ_j w(m + j∘n) on a torus of `rows × cols`
    /// cells, in the same signed layout as [`box_table`](Self::box_table).
    pub(crate) fn periodic_table(&self, rows: usize, cols: usize) -> Result<OffsetTable> {
        let short = if self.dim == 1 { cols } else { rows.min(cols) };
        if short < 5 {
            return Err(Error::InvalidGrid(format!(
                "periodic energies need at least 5 cells per axis, got {short}"
            )));
        }
        // periodized weights on m ∈ [0, rows) × [0, cols)
        let mut per = vec![0.0; rows * cols];
        if self.dim == 1 {
            let c = match self.norm {
                Norm::Euclidean => 1.0,
                _ => self.norm.eval(&[1.0]),
            };
            let n = cols as f64;
            let scale = c.powf(-self.exponent) * n.powf(-self.exponent);
            for (m, w) in per.iter_mut().enumerate().skip(1) {
                let x = m as f64 / n;
                *w = scale * (hurwitz_zeta(self.exponent, x) + hurwitz_zeta(self.exponent, 1.0 - x));
            }
        } else {
            let j = IMAGE_RINGS;
            let tail = {
                let a0 = (j as f64 + 0.5) * rows as f64;
                let a1 = (j as f64 + 0.5) * cols as f64;
                self.polar_tail(a0, a1)
            };
            for m0 in 0..rows {
                for m1 in 0..cols {
                    let mut s = 0.0;
                    for j0 in -j..=j {
                        for j1 in -j..=j {
                            let k = [m0 as i64 + j0 * rows as i64, m1 as i64 + j1 * cols as i64];
                            if k != [0, 0] {
                                s += self.raw(k);
                            }
                        }
                    }
                    per[m0 * cols + m1] = s + tail;
                }
            }
        }
        // near-field modifications of the lattice vectors ‖k‖_∞ ≤ 2
        let side = (2 * NEAR_RADIUS + 1) as usize;
        for idx in 0..side.pow(self.dim as u32) {
            let off = self.near_offset(idx);
            if off == [0, 0] {
                continue;
            }
            let delta = self.near[idx] - self.raw(off);
            let (m0, m1) = if self.dim == 1 {
                (0, off[0].rem_euclid(cols as i64) as usize)
            } else {
                (off[0].rem_euclid(rows as i64) as usize, off[1].rem_euclid(cols as i64) as usize)
            };
            per[m0 * cols + m1] += delta;
        }
        per[0] = 0.0;
        let tr = 2 * rows - 1;
        let tc = 2 * cols - 1;
        let mut data = vec![0.0; tr * tc];
        for a in 0..tr {
            let d0 = (a as i64 - (rows as i64 - 1)).rem_euclid(rows as i64) as usize;
            for b in 0..tc {
                let d1 = (b as i64 - (cols as i64 - 1)).rem_euclid(cols as i64) as usize;
                data[a * tc + b] = per[d0 * cols + d1];
            }
        }
        Ok(OffsetTable { rows, cols, data })
    }

    /// Lattice weights for a grid: periodized on tori, plain box table
    /// otherwise.
    pub(crate) fn table_for(&self, grid: &Grid) -> Result<OffsetTable> {
        let (r, c) = grid.rows_cols();
        if grid.periodic() {
            self.periodic_table(r, c)
        } else {
            Ok(self.box_table(r, c))
        }
    }
}

/// Signed-offset weight table for a `rows × cols` box.
#[derive(Debug, Clone)]
pub(crate) struct OffsetTable {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl OffsetTable {
    #[inline]
    pub fn width(&self) -> usize {
        2 * self.cols - 1
    }

    #[inline]
    pub fn at(&self, d0: i64, d1: i64) -> f64 {
        let a = (d0 + self.rows as i64 - 1) as usize;
        let b = (d1 + self.cols as i64 - 1) as usize;
        self.data[a * self.width() + b]
    }

    /// For every cell i of the box, Σ_{j in box, j ≠ i} w(j − i).
    pub fn in_box_sums(&self) -> Vec<f64> {
        let (r, c) = (self.rows, self.cols);
        let tr = 2 * r - 1;
        let tc = self.width();
        // prefix sums P[a][b] = Σ_{a'<a, b'<b}
        let mut pre = vec![0.0; (tr + 1) * (tc + 1)];
        for a in 0..tr {
            let mut row = 0.0;
            for b in 0..tc {
                row += self.data[a * tc + b];
                pre[(a + 1) * (tc + 1) + b + 1] = pre[a * (tc + 1) + b + 1] + row;
            }
        }
        let rect = |a0: usize, a1: usize, b0: usize, b1: usize| -> f64 {
            pre[a1 * (tc + 1) + b1] - pre[a0 * (tc + 1) + b1] - pre[a1 * (tc + 1) + b0]
                + pre[a0 * (tc + 1) + b0]
        };
        let mut out = vec![0.0; r * c];
        for i0 in 0..r {
            for i1 in 0..c {
                // d0 ∈ [−i0, r−1−i0] ↦ a ∈ [r−1−i0, 2r−2−i0]
                let a0 = r - 1 - i0;
                let b0 = c - 1 - i1;
                out[i0 * c + i1] = rect(a0, a0 + r, b0, b0 + c);
            }
        }
        out
    }
}
