//! Nonlocal energies: Gagliardo seminorms, fractional perimeters, the heat
//! slices of the subordination formula, the Riesz triple product and the
//! Riesz fractional gradient.

mod heat;
mod riesz;

pub use heat::{
    heat_kernel_integral, heat_slice_energy, subordinated_seminorm, subordination_constant, LogGrid,
    SubordinatedReport,
};
pub use riesz::{calibrate_riesz_mu, riesz_dirichlet_energy, riesz_fractional_gradient, riesz_triple, RieszOptions, VectorField};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{check_order, FracParams, GridFunction, IndicatorSet};
use crate::kernel::{KernelSpec, LatticeKernel, OffsetTable, NEAR_RADIUS};
use crate::sum::{pairwise_sum, par_sum_by};

/// Result of a seminorm evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// [u]_{W^{s,p}}.
    pub value: f64,
    /// [u]ᵖ.
    pub energy: f64,
    /// Share of the energy carried by pairs with ‖i − j‖_∞ ≤ 2.
    pub near_diagonal_fraction: f64,
    /// Share carried by pairs with one cell outside the box.
    pub exterior_fraction: f64,
    /// Number of in-box cell pairs evaluated.
    pub pair_count: u64,
}

/// Runs `$body` with `$f` bound to |x|ᵖ, specialised for integer p so the
/// inner loops are monomorphized.
macro_rules! with_power {
    ($p:expr, |$f:ident| $body:expr) => {{
        let p: f64 = $p;
        if p == 1.0 {
            let $f = |x: f64| x.abs();
            $body
        } else if p == 2.0 {
            let $f = |x: f64| x * x;
            $body
        } else if p == 3.0 {
            let $f = |x: f64| {
                let a = x.abs();
                a * a * a
            };
            $body
        } else {
            let $f = move |x: f64| x.abs().powf(p);
            $body
        }
    }};
}
pub(crate) use with_power;

/// Σ_{i<j in box} f(u_i − u_j) w(j − i), rows reduced deterministically.
pub(crate) fn pair_sum<F>(u: &[f64], rows: usize, cols: usize, t: &OffsetTable, f: &F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let tw = t.width();
    let r = rows;
    let c = cols;
    par_sum_by(r, |i0| {
        let mut parts = Vec::with_capacity(c);
        for i1 in 0..c {
            let ui = u[i0 * c + i1];
            let mut acc = 0.0;
            let off = c - 1 - i1;
            {
                let trow = &t.data[(r - 1) * tw..r * tw];
                let urow = &u[i0 * c + i1 + 1..(i0 + 1) * c];
                let wrow = &trow[off + i1 + 1..off + c];
                for (uj, w) in urow.iter().zip(wrow) {
                    acc += f(ui - uj) * w;
                }
            }
            for j0 in i0 + 1..r {
                let a = j0 - i0 + r - 1;
                let wrow = &t.data[a * tw + off..a * tw + off + c];
                let urow = &u[j0 * c..(j0 + 1) * c];
                let mut racc = 0.0;
                for (uj, w) in urow.iter().zip(wrow) {
                    racc += f(ui - uj) * w;
                }
                acc += racc;
            }
            parts.push(acc);
        }
        pairwise_sum(&parts)
    })
}

/// Same sum restricted to offsets with ‖j − i‖_∞ ≤ 2.
fn near_pair_sum<F>(u: &[f64], rows: usize, cols: usize, t: &OffsetTable, periodic: bool, f: &F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let r = rows as i64;
    let c = cols as i64;
    let one_d = rows == 1;
    let mut parts = Vec::with_capacity(u.len());
    for i0 in 0..r {
        for i1 in 0..c {
            let ui = u[(i0 * c + i1) as usize];
            let mut acc = 0.0;
            let d0s = if one_d { 0..=0 } else { 0..=NEAR_RADIUS };
            for d0 in d0s {
                for d1 in -NEAR_RADIUS..=NEAR_RADIUS {
                    if d0 == 0 && d1 <= 0 {
                        continue;
                    }
                    let (mut j0, mut j1) = (i0 + d0, i1 + d1);
                    if periodic {
                        j0 = j0.rem_euclid(r);
                        j1 = j1.rem_euclid(c);
                    } else if j0 >= r || j1 < 0 || j1 >= c {
                        continue;
                    }
                    let w = t.at(d0, d1);
                    acc += f(ui - u[(j0 * c + j1) as usize]) * w;
                }
            }
            parts.push(acc);
        }
    }
    pairwise_sum(&parts)
}

fn validate_dims(u: &GridFunction, params: &FracParams) -> Result<()> {
    if u.grid().dim() != params.dim {
        return Err(Error::InvalidParameter(format!(
            "grid dimension {} differs from N = {}",
            u.grid().dim(),
            params.dim
        )));
    }
    Ok(())
}

/// Gagliardo seminorm [u]_{W^{s,p}} of a piecewise-constant function,
/// zero-extended outside a non-periodic box or periodic on a torus.
pub fn gagliardo_seminorm(u: &GridFunction, params: &FracParams, kernel: &KernelSpec) -> Result<EnergyReport> {
    validate_dims(u, params)?;
    let lk = LatticeKernel::new(params.dim, params.sigma(), params.p, kernel)?;
    Ok(seminorm_with(u, params.p, &lk, &lk.table_for(u.grid())?))
}

pub(crate) fn seminorm_with(u: &GridFunction, p: f64, lk: &LatticeKernel, table: &OffsetTable) -> EnergyReport {
    let grid = u.grid();
    let (r, c) = grid.rows_cols();
    let vals = u.values();
    let scale = grid.spacing().powf(grid.dim() as f64 - lk.sigma());
    let (pairs, near, ext) = with_power!(p, |f| {
        let pairs = pair_sum(vals, r, c, table, &f);
        let near = near_pair_sum(vals, r, c, table, grid.periodic(), &f);
        let ext = if grid.periodic() {
            0.0
        } else {
            let inside = table.in_box_sums();
            let total = lk.total();
            let terms: Vec<f64> = vals
                .iter()
                .zip(&inside)
                .map(|(&v, &s)| if v == 0.0 { 0.0 } else { f(v) * (total - s) })
                .collect();
            pairwise_sum(&terms)
        };
        (pairs, near, ext)
    });
    let energy = 2.0 * (pairs + ext) * scale;
    let denom = pairs + ext;
    let n = u.len() as u64;
    EnergyReport {
        value: energy.powf(1.0 / p),
        energy,
        near_diagonal_fraction: if denom > 0.0 { (near / denom).clamp(0.0, 1.0) } else { 0.0 },
        exterior_fraction: if denom > 0.0 { (ext / denom).clamp(0.0, 1.0) } else { 0.0 },
        pair_count: n * n.saturating_sub(1),
    }
}

/// Fractional perimeter P_s(E) = ½[χ_E]_{W^{s,1}}.
pub fn fractional_perimeter(e: &IndicatorSet, s: f64) -> Result<f64> {
    fractional_perimeter_with(e, s, &KernelSpec::isotropic())
}

/// Fractional perimeter with an arbitrary kernel norm.
///
/// Computed as Σ_{i∈E} (Σ_{k≠0} w(k) − Σ_{j∈E, j≠i} w(j − i)), which only
/// involves pair offsets inside E and is therefore exactly translation
/// invariant.
pub fn fractional_perimeter_with(e: &IndicatorSet, s: f64, kernel: &KernelSpec) -> Result<f64> {
    check_order(s)?;
    let grid = e.grid();
    let lk = LatticeKernel::new(grid.dim(), s, 1.0, kernel)?;
    let table = lk.table_for(grid)?;
    let (r, c) = grid.rows_cols();
    let total = if grid.periodic() {
        // every residue class m ≠ 0 once
        let mut t = Vec::with_capacity(r);
        for d0 in 0..r as i64 {
            let row: Vec<f64> = (0..c as i64).map(|d1| table.at(d0, d1)).collect();
            t.push(pairwise_sum(&row));
        }
        pairwise_sum(&t)
    } else {
        lk.total()
    };
    let tw = table.width();
    let tr = 2 * r - 1;
    // row prefix sums of the table
    let mut pre = vec![0.0; tr * (tw + 1)];
    for a in 0..tr {
        let mut acc = 0.0;
        for b in 0..tw {
            acc += table.data[a * tw + b];
            pre[a * (tw + 1) + b + 1] = acc;
        }
    }
    // runs of E per row (inclusive bounds)
    let mask = e.mask();
    let runs: Vec<Vec<(usize, usize)>> = (0..r)
        .map(|j0| {
            let row = &mask[j0 * c..(j0 + 1) * c];
            let mut out = Vec::new();
            let mut j = 0;
            while j < c {
                if row[j] {
                    let lo = j;
                    while j + 1 < c && row[j + 1] {
                        j += 1;
                    }
                    out.push((lo, j));
                }
                j += 1;
            }
            out
        })
        .collect();
    let periodic = grid.periodic();
    let rr = r as i64;
    let cc = c as i64;
    let dimless = par_sum_by(r, |i0| {
        let mut parts = Vec::new();
        for i1 in 0..c {
            if !mask[i0 * c + i1] {
                continue;
            }
            let mut inside = Vec::with_capacity(r);
            for (j0, row_runs) in runs.iter().enumerate() {
                if row_runs.is_empty() {
                    continue;
                }
                let mut d0 = j0 as i64 - i0 as i64;
                if periodic {
                    d0 = d0.rem_euclid(rr);
                }
                let a = (d0 + rr - 1) as usize;
                let base = a * (tw + 1);
                let mut acc = 0.0;
                for &(lo, hi) in row_runs {
                    // column index b = (j1 − i1) + c − 1, possibly wrapped
                    let lo_d = lo as i64 - i1 as i64;
                    let hi_d = hi as i64 - i1 as i64;
                    let b_lo = (lo_d + cc - 1) as usize;
                    let b_hi = (hi_d + cc - 1) as usize;
                    acc += pre[base + b_hi + 1] - pre[base + b_lo];
                }
                inside.push(acc);
            }
            parts.push(total - pairwise_sum(&inside));
        }
        pairwise_sum(&parts)
    });
    let scale = grid.spacing().powf(grid.dim() as f64 - s);
    Ok(dimless * scale)
}

/// Validates an order parameter and exponent pair for direct use.
pub(crate) fn check_sp(s: f64, p: f64) -> Result<()> {
    check_order(s)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
    }
    Ok(())
}

