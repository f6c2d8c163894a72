//! Riesz triple product and the Riesz fractional gradient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::LinearConvolver;
use crate::grid::{check_order, Grid, GridFunction};
use crate::kernel::NearField;
use crate::special::epstein_zeta;
use crate::sum::pairwise_sum;

fn require_nonnegative(u: &GridFunction, name: &str) -> Result<()> {
    if u.is_nonnegative() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be non-negative")))
    }
}

/// ∬ f(x) g(x − y) h(y) dx dy, with g sampled on the difference grid of
/// the common grid of f and h (see [`Grid::difference_grid`]).
pub fn riesz_triple(f: &GridFunction, g: &GridFunction, h: &GridFunction) -> Result<f64> {
    require_nonnegative(f, "f")?;
    require_nonnegative(g, "g")?;
    require_nonnegative(h, "h")?;
    f.grid().check_same(h.grid(), "f and h must share a grid")?;
    let diff = f.grid().difference_grid();
    if g.grid().shape() != diff.shape() || g.grid().spacing() != diff.spacing() {
        return Err(Error::GridMismatch("g must live on the difference grid of f".into()));
    }
    let (r, c) = f.grid().rows_cols();
    let gw = 2 * c - 1;
    let fv = f.values();
    let hv = h.values();
    let gv = g.values();
    let mut parts = Vec::with_capacity(fv.len());
    for i0 in 0..r {
        for i1 in 0..c {
            let fi = fv[i0 * c + i1];
            if fi == 0.0 {
                parts.push(0.0);
                continue;
            }
            let mut acc = 0.0;
            for j0 in 0..r {
                let a = i0 + r - 1 - j0;
                let grow = &gv[a * gw..(a + 1) * gw];
                let hrow = &hv[j0 * c..(j0 + 1) * c];
                for (j1, hj) in hrow.iter().enumerate() {
                    acc += grow[i1 + c - 1 - j1] * hj;
                }
            }
            parts.push(fi * acc);
        }
    }
    let vol = f.grid().cell_volume();
    Ok(pairwise_sum(&parts) * vol * vol)
}

/// Vector-valued grid function (one component per axis).
#[derive(Debug, Clone, Serialize)]
pub struct VectorField {
    #[serde(skip)]
    pub grid: Grid,
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    /// |v_i| at every cell.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }
}

/// Options for the Riesz fractional gradient.
#[derive(Debug, Clone, Copy)]
pub struct RieszOptions {
    /// Normalizing constant μ_{N,s}.
    pub mu: f64,
    /// Cells added on each side of the box for the evaluation grid.
    pub pad: Option<usize>,
    pub near_field: NearField,
}

impl Default for RieszOptions {
    fn default() -> Self {
        Self { mu: 1.0, pad: None, near_field: NearField::Smooth }
    }
}

/// Odd lattice kernel k/|k|^{N+s+1} with the chosen near-field rule.
fn vector_weight(dim: usize, s: f64, near: NearField, delta: f64, k: [i64; 2], axis: usize) -> f64 {
    let e = dim as f64 + s + 1.0;
    let raw = |z: [f64; 2]| {
        let r2 = z[0] * z[0] + z[1] * z[1];
        if r2 == 0.0 {
            0.0
        } else {
            z[axis] * r2.powf(-e / 2.0)
        }
    };
    if k == [0, 0] {
        return 0.0;
    }
    let kf = [k[0] as f64, k[1] as f64];
    match near {
        NearField::Midpoint => raw(kf),
        NearField::Smooth => {
            let mut w = raw(kf);
            if k[0].abs() + k[1].abs() == 1 {
                w += delta * kf[axis];
            }
            w
        }
        NearField::Refined => {
            if k[0].abs().max(k[1].abs()) > 2 {
                return raw(kf);
            }
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for d0 in -3i64..=3 {
                let m0 = (4 - d0.abs()) as f64;
                let d1s: std::ops::RangeInclusive<i64> = if dim == 1 { 0..=0 } else { -3..=3 };
                for d1 in d1s {
                    let m1 = if dim == 1 { 1.0 } else { (4 - d1.abs()) as f64 };
                    let z = [kf[0] + d0 as f64 / 4.0, if dim == 1 { 0.0 } else { kf[1] + d1 as f64 / 4.0 }];
                    acc += m0 * m1 * raw(z);
                    wsum += m0 * m1;
                }
            }
            acc / wsum
        }
    }
}

/// ∇ˢu(x) = μ ∫ (u(x) − u(y)) (x − y)/|x − y|^{N+s+1} dy on a padded grid
/// around the support box (u is zero outside its box).
pub fn riesz_fractional_gradient(u: &GridFunction, s: f64, opts: &RieszOptions) -> Result<VectorField> {
    check_order(s)?;
    let grid = u.grid();
    if grid.periodic() {
        return Err(Error::Unsupported("the Riesz gradient is evaluated on zero-extended grids".into()));
    }
    let dim = grid.dim();
    let (r, c) = grid.rows_cols();
    let pad = opts.pad.unwrap_or_else(|| r.max(c));
    let out_grid = grid.padded(pad)?;
    let (m0, m1) = out_grid.rows_cols();
    let n = dim as f64;
    // vanishing first lattice moment of the corrected kernel
    let delta = -epstein_zeta(dim, n + s - 1.0) / (2.0 * n);
    let scale = -opts.mu * grid.spacing().powf(-s);
    let off = if dim == 1 { (0, pad as i64) } else { (pad as i64, pad as i64) };
    let mut components = Vec::with_capacity(dim);
    for axis in 0..dim {
        let conv = LinearConvolver::new((r, c), (m0, m1), off, |d0, d1| {
            let k = if dim == 1 { [d1, 0] } else { [d0, d1] };
            vector_weight(dim, s, opts.near_field, delta, k, if dim == 1 { 0 } else { axis })
        });
        let comp: Vec<f64> = conv.apply(u.values()).into_iter().map(|x| scale * x).collect();
        components.push(comp);
    }
    Ok(VectorField { grid: out_grid, components })
}

/// ∫ |∇ˢu|ᵖ dx over the evaluation grid plus the far-field tail of the
/// leading monopole term μ·(∫u)·x/|x|^{N+s+1}.
pub fn riesz_dirichlet_energy(u: &GridFunction, s: f64, p: f64, opts: &RieszOptions) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
    }
    let field = riesz_fractional_gradient(u, s, opts)?;
    let g = &field.grid;
    let terms: Vec<f64> = field.magnitude().iter().map(|m| m.powf(p)).collect();
    let body = pairwise_sum(&terms) * g.cell_volume();
    let mass = u.integral();
    let dim = g.dim();
    let n = dim as f64;
    let q = (n + s) * p;
    let amp = (opts.mu * mass).abs().powf(p);
    let tail = if dim == 1 {
        let half = 0.5 * g.extent(0);
        2.0 * half.powf(1.0 - q) / (q - 1.0)
    } else {
        let a0 = 0.5 * g.extent(0);
        let a1 = 0.5 * g.extent(1);
        let nodes = 2048;
        let dt = 2.0 * std::f64::consts::PI / nodes as f64;
        (0..nodes)
            .map(|k| {
                let th = (k as f64 + 0.5) * dt;
                let rho = (a0 / th.cos().abs()).min(a1 / th.sin().abs());
                rho.powf(2.0 - q) / (q - 2.0)
            })
            .sum::<f64>()
            * dt
    };
    Ok(body + amp * tail)
}

/// μ_{N,s} making ∫|∇ˢu|² = [u]²_{H^s} on `reference` (smooth near field on
/// both sides).
pub fn calibrate_riesz_mu(reference: &GridFunction, s: f64) -> Result<f64> {
    let params = crate::grid::FracParams::new(reference.grid().dim(), s, 2.0)?;
    let kernel = crate::kernel::KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let semi = crate::energy::gagliardo_seminorm(reference, &params, &kernel)?.energy;
    let raw = riesz_dirichlet_energy(reference, s, 2.0, &RieszOptions::default())?;
    if raw == 0.0 {
        return Err(Error::Domain("the calibration reference must be nonzero".into()));
    }
    Ok((semi / raw).sqrt())
}
