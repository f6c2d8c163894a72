//! Uniform cell-centered grids, grid functions and indicator sets.

mod io;

pub use io::{load, load_function, load_mask, save_function, save_mask, write_csv, GridData};

use crate::error::{invalid, Error, Result};
use crate::special;

/// A uniform Cartesian grid of dimension 1 or 2.
///
/// Cell `i` along an axis has center `origin + (i + ½)·h`, so `origin` is the
/// lower corner of the box. Storage is row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    periodic: bool,
}

impl Grid {
    pub fn new(shape: &[usize], origin: &[f64], spacing: f64, periodic: bool) -> Result<Self> {
        let dim = shape.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if origin.len() != dim {
            return Err(Error::InvalidGrid("origin length differs from shape length".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if let Some(n) = shape.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis length {n} < 2")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self { shape: shape.to_vec(), origin: origin.to_vec(), spacing, periodic })
    }

    /// Box `[-n·h/2, n·h/2)` per axis, centered at the origin of ℝᴺ.
    pub fn centered(shape: &[usize], spacing: f64, periodic: bool) -> Result<Self> {
        let origin: Vec<f64> = shape.iter().map(|&n| -(n as f64) * spacing / 2.0).collect();
        Self::new(shape, &origin, spacing, periodic)
    }

    /// Grid covering `[lo, hi]` on every axis with `n` cells per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize, periodic: bool) -> Result<Self> {
        let h = (hi - lo) / n as f64;
        Self::new(&vec![n; dim], &vec![lo; dim], h, periodic)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn periodic(&self) -> bool {
        self.periodic
    }
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// hᴺ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }
    /// Box side length along an axis.
    pub fn extent(&self, axis: usize) -> f64 {
        self.shape[axis] as f64 * self.spacing
    }

    /// (rows, cols): 1D grids are viewed as a single row.
    pub fn rows_cols(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [n] => (1, *n),
            [r, c] => (*r, *c),
            _ => unreachable!(),
        }
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.spacing
    }

    /// Multi-index of a flat cell index.
    pub fn unravel(&self, flat: usize) -> [usize; 2] {
        match self.shape.as_slice() {
            [_] => [flat, 0],
            [_, c] => [flat / c, flat % c],
            _ => unreachable!(),
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        match self.shape.as_slice() {
            [_] => idx[0],
            [_, c] => idx[0] * c + idx[1],
            _ => unreachable!(),
        }
    }

    /// Cell-center coordinates (unused trailing entries are 0).
    pub fn center(&self, flat: usize) -> [f64; 2] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 2];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim()) {
            *xa = self.coord(a, idx[a]);
        }
        x
    }

    /// Geometric center of the box.
    pub fn box_center(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (a, ca) in c.iter_mut().enumerate().take(self.dim()) {
            *ca = self.origin[a] + 0.5 * self.extent(a);
        }
        c
    }

    /// Grid of cell-center differences: shape 2n−1 per axis, with the
    /// central cell at offset zero.
    pub fn difference_grid(&self) -> Grid {
        let shape: Vec<usize> = self.shape.iter().map(|&n| 2 * n - 1).collect();
        let origin: Vec<f64> = self
            .shape
            .iter()
            .map(|&n| -((n as f64) - 0.5) * self.spacing)
            .collect();
        Grid { shape, origin, spacing: self.spacing, periodic: false }
    }

    /// Same layout with a different spacing (cells keep their indices,
    /// the box is scaled about its center).
    pub fn rescaled(&self, factor: f64) -> Result<Grid> {
        let c = self.box_center();
        let origin: Vec<f64> = (0..self.dim())
            .map(|a| c[a] * factor - 0.5 * self.extent(a) * factor)
            .collect();
        Grid::new(&self.shape, &origin, self.spacing * factor, self.periodic)
    }

    /// Same spacing, `pad` extra cells on each side of every axis.
    pub fn padded(&self, pad: usize) -> Result<Grid> {
        let shape: Vec<usize> = self.shape.iter().map(|&n| n + 2 * pad).collect();
        let origin: Vec<f64> = self.origin.iter().map(|&o| o - pad as f64 * self.spacing).collect();
        Grid::new(&shape, &origin, self.spacing, self.periodic)
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self.shape == other.shape && self.spacing == other.spacing && self.periodic == other.periodic
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_layout(other) && self.origin == other.origin {
            Ok(())
        } else {
            Err(Error::GridMismatch(what.to_string()))
        }
    }

    /// Twice the cell-center offset from the box center, in units of h.
    /// Exact integers, used for tie-free ranking.
    pub(crate) fn doubled_offset(&self, axis: usize, i: usize) -> i64 {
        2 * i as i64 + 1 - self.shape[axis] as i64
    }
}

/// A real function sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.center(i)[..dim])).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    pub fn abs(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        crate::sum::pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Σ u_i hᴺ.
    pub fn integral(&self) -> f64 {
        crate::sum::pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Same values on a grid with the same layout but another origin
    /// (a rigid translation by whole cells when spacings agree).
    pub fn on_grid(&self, grid: Grid) -> Result<Self> {
        if grid.shape() != self.grid.shape() {
            return Err(Error::GridMismatch("shape differs".into()));
        }
        GridFunction::new(grid, self.values.clone())
    }

    /// Periodic shift by whole cells (cell i takes the value of cell i − shift).
    pub fn roll(&self, shift: &[i64]) -> Self {
        let (r, c) = self.grid.rows_cols();
        let (s0, s1) = if self.grid.dim() == 1 { (0, shift[0]) } else { (shift[0], shift[1]) };
        let mut out = vec![0.0; self.values.len()];
        for i in 0..r {
            let si = (i as i64 - s0).rem_euclid(r as i64) as usize;
            for j in 0..c {
                let sj = (j as i64 - s1).rem_euclid(c as i64) as usize;
                out[i * c + j] = self.values[si * c + sj];
            }
        }
        self.with_values(out)
    }
}

/// A set represented by a mask of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    grid: Grid,
    mask: Vec<bool>,
}

impl IndicatorSet {
    pub fn new(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: mask.len() });
        }
        Ok(Self { grid, mask })
    }

    pub fn empty(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, mask: vec![false; n] }
    }

    /// Cells whose centers satisfy `inside`.
    pub fn from_predicate(grid: Grid, inside: impl Fn(&[f64]) -> bool) -> Self {
        let dim = grid.dim();
        let mask = (0..grid.len()).map(|i| inside(&grid.center(i)[..dim])).collect();
        Self { grid, mask }
    }

    /// Cells with value exactly 1; values other than 0 and 1 are a domain error.
    pub fn from_function(u: &GridFunction) -> Result<Self> {
        let mut mask = Vec::with_capacity(u.len());
        for (i, &v) in u.values().iter().enumerate() {
            if v == 1.0 {
                mask.push(true);
            } else if v == 0.0 {
                mask.push(false);
            } else {
                return Err(Error::Domain(format!("mask value {v} at cell {i} is not 0 or 1")));
            }
        }
        Ok(Self { grid: u.grid().clone(), mask })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
    pub fn cells(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    /// χ_E.
    pub fn indicator(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn union(&self, other: &IndicatorSet) -> Result<Self> {
        self.grid.check_same(&other.grid, "union of masks on different grids")?;
        Ok(Self {
            grid: self.grid.clone(),
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect(),
        })
    }

    /// True if any cell of the set lies on the outermost layer of the box.
    /// The same cells inside a larger box with `pad` extra cells per side.
    pub fn embedded(&self, pad: usize, periodic: bool) -> Result<Self> {
        let g = &self.grid;
        let shape: Vec<usize> = g.shape().iter().map(|&n| n + 2 * pad).collect();
        let origin: Vec<f64> = g.origin().iter().map(|&o| o - pad as f64 * g.spacing()).collect();
        let big = Grid::new(&shape, &origin, g.spacing(), periodic)?;
        let mut mask = vec![false; big.len()];
        for k in self.cells() {
            let ix = g.unravel(k);
            let moved: Vec<usize> = (0..g.dim()).map(|a| ix[a] + pad).collect();
            mask[big.ravel(&moved)] = true;
        }
        IndicatorSet::new(big, mask)
    }

    pub fn touches_boundary(&self) -> bool {
        let (r, c) = self.grid.rows_cols();
        let one_d = self.grid.dim() == 1;
        self.mask.iter().enumerate().any(|(k, &b)| {
            if !b {
                return false;
            }
            let (i, j) = (k / c, k % c);
            j == 0 || j == c - 1 || (!one_d && (i == 0 || i == r - 1))
        })
    }

    pub fn roll(&self, shift: &[i64]) -> Self {
        let rolled = self.indicator().roll(shift);
        IndicatorSet::from_function(&rolled).expect("roll keeps 0/1 values")
    }
}

/// Number of cells, as a measure: count·hᴺ.
pub fn measure(set: &IndicatorSet) -> f64 {
    set.count() as f64 * set.grid().cell_volume()
}

/// Exponent for [`lp_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// (Σ |u_i|ᵖ hᴺ)^{1/p}, or max |u_i| for p = ∞.
pub fn lp_norm(u: &GridFunction, p: impl Into<Exponent>) -> Result<f64> {
    match p.into() {
        Exponent::Infinity => Ok(u.values().iter().fold(0.0, |m, v| m.max(v.abs()))),
        Exponent::Finite(p) => {
            if !(p >= 1.0) || p.is_nan() {
                return invalid(format!("lp_norm needs p >= 1, got {p}"));
            }
            Ok(lp_norm_pow(u.values(), p, u.grid().cell_volume()).powf(1.0 / p))
        }
    }
}

/// Σ |u_i|ᵖ · vol, summed over sorted magnitudes so that permuted inputs
/// give bit-identical results.
pub(crate) fn lp_norm_pow(values: &[f64], p: f64, vol: f64) -> f64 {
    let mut terms: Vec<f64> = values.iter().map(|v| pow_abs(*v, p)).collect();
    terms.sort_by(|a, b| a.total_cmp(b));
    crate::sum::pairwise_sum(&terms) * vol
}

#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else {
        a.powf(p)
    }
}

/// The triple (N, s, p) and derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    pub dim: usize,
    pub s: f64,
    pub p: f64,
}

impl FracParams {
    pub fn new(dim: usize, s: f64, p: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("dimension {dim} not in {{1, 2}}"));
        }
        check_order(s)?;
        if !(p >= 1.0 && p.is_finite()) {
            return invalid(format!("p = {p} must be finite and >= 1"));
        }
        Ok(Self { dim, s, p })
    }

    /// Constant of the singular-integral fractional Laplacian,
    /// 4ˢ Γ(N/2+s) / (π^{N/2} |Γ(−s)|).
    pub fn c_ns(&self) -> f64 {
        fractional_laplacian_constant(self.dim, self.s)
    }

    pub fn omega_n(&self) -> f64 {
        special::unit_ball_volume(self.dim)
    }

    /// Critical exponent Np/(N − sp); an error when sp ≥ N.
    pub fn p_star(&self) -> Result<f64> {
        let n = self.dim as f64;
        let sp = self.s * self.p;
        if sp >= n {
            return Err(Error::Domain(format!("p* undefined: sp = {sp} >= N = {n}")));
        }
        Ok(n * self.p / (n - sp))
    }

    /// σ = s·p, the kernel exponent beyond N.
    pub fn sigma(&self) -> f64 {
        self.s * self.p
    }
}

pub fn fractional_laplacian_constant(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    4f64.powf(s) * special::gamma(n / 2.0 + s)
        / (std::f64::consts::PI.powf(n / 2.0) * special::gamma_neg(s).abs())
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        invalid(format!("s out of (0,1): {s}"))
    }
}
