//! Shape functionals: Fraenkel asymmetry, isoperimetric deficit and the
//! deficit-versus-asymmetry scan, plus the test shapes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::fractional_perimeter;
use crate::error::{Error, Result};
use crate::fft::{Fft2, LinearConvolver};
use crate::grid::{measure, Grid, IndicatorSet};
use crate::rearrange::{ranked_mask, schwarz_set};

/// Sub-cell resolution of the ball-center search.
const CENTER_STEPS: usize = 8;

/// Measure-matched test shapes centered at the box center. Every shape is
/// built as the `count` cells of smallest gauge, so shapes with equal
/// `count` have exactly equal measure.
pub mod shapes {
    use super::*;

    fn offset(grid: &Grid, x: &[f64]) -> [f64; 2] {
        let c = grid.box_center();
        if grid.dim() == 1 {
            [x[0] - c[0], 0.0]
        } else {
            [x[0] - c[0], x[1] - c[1]]
        }
    }

    /// Number of cells of a set of the given measure.
    pub fn cells_for(grid: &Grid, area: f64) -> usize {
        (area / grid.cell_volume()).round() as usize
    }

    pub fn disk(grid: &Grid, count: usize) -> IndicatorSet {
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            d[0] * d[0] + d[1] * d[1]
        })
    }

    pub fn square(grid: &Grid, count: usize) -> IndicatorSet {
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            d[0].abs().max(d[1].abs())
        })
    }

    /// Rectangle with side ratio `aspect` : 1, long along axis 0.
    pub fn rectangle(grid: &Grid, count: usize, aspect: f64) -> IndicatorSet {
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            (d[0].abs() / aspect).max(d[1].abs())
        })
    }

    /// Square with its open upper-right quadrant removed.
    pub fn lshape(grid: &Grid, count: usize) -> IndicatorSet {
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            if d[0] > 0.0 && d[1] > 0.0 {
                f64::INFINITY
            } else {
                d[0].abs().max(d[1].abs())
            }
        })
    }

    /// Ellipse of eccentricity `e`, major axis along axis 0.
    pub fn ellipse(grid: &Grid, count: usize, e: f64) -> IndicatorSet {
        let b2 = 1.0 - e * e;
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            d[0] * d[0] + d[1] * d[1] / b2
        })
    }

    /// Two disks of radius 1 with centers ±`separation`/2 on axis 0, joined
    /// by a bar of half-width `neck` (gauge units).
    pub fn dumbbell(grid: &Grid, count: usize, separation: f64, neck: f64) -> IndicatorSet {
        let half = 0.5 * separation;
        ranked_mask(grid, count, |x| {
            let d = offset(grid, x);
            let l = ((d[0] + half).powi(2) + d[1] * d[1]).sqrt();
            let r = ((d[0] - half).powi(2) + d[1] * d[1]).sqrt();
            let bar = if neck > 0.0 { (d[0].abs() / half).max(d[1].abs() / neck) } else { f64::INFINITY };
            l.min(r).min(bar)
        })
    }

    /// Interval (1D) or disk (2D) of the given measure.
    pub fn ball(grid: &Grid, area: f64) -> IndicatorSet {
        disk(grid, cells_for(grid, area))
    }

    /// Builds a named shape of the given measure.
    pub fn by_name(grid: &Grid, name: &str, area: f64) -> Result<IndicatorSet> {
        let k = cells_for(grid, area);
        let two_d = grid.dim() == 2;
        Ok(match name {
            "disk" | "ball" | "interval" => disk(grid, k),
            "square" if two_d => square(grid, k),
            "rect" if two_d => rectangle(grid, k, 2.0),
            "lshape" if two_d => lshape(grid, k),
            _ => return Err(Error::InvalidParameter(format!("unknown shape '{name}' in dimension {}", grid.dim()))),
        })
    }
}

/// Integer offsets of the `count` cells nearest to the point δ·h (δ in
/// cell units), ties broken by offset order.
fn ball_stencil(dim: usize, count: usize, delta: [f64; 2]) -> Vec<[i64; 2]> {
    let r = ((count as f64 / if dim == 1 { 2.0 } else { std::f64::consts::PI }).powf(1.0 / dim as f64)).ceil() as i64 + 2;
    let mut offs = Vec::new();
    let r0 = if dim == 1 { 0 } else { r };
    for a in -r0..=r0 {
        for b in -r..=r {
            let (k0, k1) = if dim == 1 { (0, b) } else { (a, b) };
            let d0 = if dim == 1 { 0.0 } else { k0 as f64 - delta[0] };
            let d1 = k1 as f64 - delta[1];
            offs.push((d0 * d0 + d1 * d1, [k0, k1]));
        }
    }
    offs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    offs.truncate(count);
    offs.into_iter().map(|x| x.1).collect()
}

/// Largest number of cells of Ω inside a measure-matched discrete ball,
/// over centers on the h/8 lattice.
fn best_overlap(omega: &IndicatorSet) -> usize {
    let grid = omega.grid();
    let dim = grid.dim();
    let k = omega.count();
    let (r, c) = grid.rows_cols();
    let mask: Vec<f64> = omega.mask().iter().map(|&m| f64::from(u8::from(m))).collect();
    let steps = CENTER_STEPS;
    let deltas: Vec<[f64; 2]> = (0..if dim == 1 { 1 } else { steps })
        .flat_map(|a| (0..steps).map(move |b| [a as f64 / steps as f64, b as f64 / steps as f64]))
        .collect();
    deltas
        .par_iter()
        .map(|&delta| {
            let stencil = ball_stencil(dim, k, delta);
            let counts = if grid.periodic() {
                // circular correlation over all cell shifts
                let fft = Fft2::new(r, c);
                let mut a: Vec<Complex64> = mask.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let mut b = vec![Complex64::new(0.0, 0.0); r * c];
                for off in &stencil {
                    let q0 = (-off[0]).rem_euclid(r as i64) as usize;
                    let q1 = (-off[1]).rem_euclid(c as i64) as usize;
                    b[q0 * c + q1] += Complex64::new(1.0, 0.0);
                }
                fft.forward(&mut a);
                fft.forward(&mut b);
                for (x, y) in a.iter_mut().zip(&b) {
                    *x *= y;
                }
                fft.inverse(&mut a);
                a.iter().map(|z| z.re).collect::<Vec<f64>>()
            } else {
                let set: std::collections::HashSet<[i64; 2]> = stencil.into_iter().collect();
                let conv = LinearConvolver::new((r, c), (r, c), (0, 0), |d0, d1| {
                    // overlap(o) = Σ_j Ω(j)·[j − o ∈ stencil]
                    let key = if dim == 1 { [0, -d1] } else { [-d0, -d1] };
                    f64::from(u8::from(set.contains(&key)))
                });
                conv.apply(&mask)
            };
            counts.iter().map(|v| v.round().max(0.0) as usize).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// 𝒜(Ω) = min over centers of |Ω Δ B|/|Ω| with |B| = |Ω|.
pub fn fraenkel_asymmetry(omega: &IndicatorSet) -> Result<f64> {
    if omega.is_empty() {
        return Err(Error::Domain("the asymmetry of an empty set is undefined".into()));
    }
    let k = omega.count();
    let best = best_overlap(omega).min(k);
    Ok(2.0 * (k - best) as f64 / k as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRecord {
    pub shape_id: String,
    pub measure: f64,
    pub perimeter_s: f64,
    pub ball_perimeter: f64,
    pub asymmetry: f64,
    /// P_s(Ω) − P_s(B), |B| = |Ω|.
    pub deficit: f64,
    /// deficit / P_s(B).
    pub relative_deficit: f64,
    pub s: f64,
}

/// P_s(Ω) against the measure-matched ball Ω*.
pub fn isoperimetric_deficit(omega: &IndicatorSet, s: f64) -> Result<StabilityRecord> {
    isoperimetric_deficit_named(omega, s, "shape")
}

pub fn isoperimetric_deficit_named(omega: &IndicatorSet, s: f64, id: &str) -> Result<StabilityRecord> {
    if omega.is_empty() {
        return Err(Error::Domain("the deficit of an empty set is undefined".into()));
    }
    let ball = schwarz_set(omega);
    let p = fractional_perimeter(omega, s)?;
    let pb = fractional_perimeter(&ball, s)?;
    Ok(StabilityRecord {
        shape_id: id.to_string(),
        measure: measure(omega),
        perimeter_s: p,
        ball_perimeter: pb,
        asymmetry: fraenkel_asymmetry(omega)?,
        deficit: p - pb,
        relative_deficit: (p - pb) / pb,
        s,
    })
}

/// Scale-free P_s(Ω)/|Ω|^{(N−s)/N}.
pub fn isoperimetric_ratio(omega: &IndicatorSet, s: f64) -> Result<f64> {
    let n = omega.grid().dim() as f64;
    Ok(fractional_perimeter(omega, s)? / measure(omega).powf((n - s) / n))
}

/// Parameterized shape families of fixed measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    /// Ellipses with eccentricity up to the given value.
    Ellipse { max_eccentricity: f64 },
    /// Dumbbells whose neck narrows down to the given half-width.
    Dumbbell { min_neck: f64 },
    /// Balls only (asymmetry identically zero).
    Ball,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityScan {
    pub records: Vec<StabilityRecord>,
    /// Least-squares slope of log D vs log 𝒜 over the fit window.
    pub slope: Option<f64>,
    pub fit_points: usize,
    /// Why no slope was fitted, if none was.
    pub note: Option<String>,
}

/// Asymmetry window of the slope fit.
pub const FIT_WINDOW: (f64, f64) = (0.02, 0.2);

/// Members of a family on `grid` with measure `area`.
pub fn family_members(family: Family, grid: &Grid, area: f64, count: usize) -> Result<Vec<(String, IndicatorSet)>> {
    if grid.dim() != 2 {
        return Err(Error::Unsupported("shape families are two-dimensional".into()));
    }
    if count < 2 {
        return Err(Error::InvalidParameter("a family needs at least 2 members".into()));
    }
    let k = shapes::cells_for(grid, area);
    let n = count - 1;
    Ok(match family {
        Family::Ellipse { max_eccentricity } => {
            if !(0.0..1.0).contains(&max_eccentricity) {
                return Err(Error::InvalidParameter("eccentricity must lie in [0, 1)".into()));
            }
            // member 0 is the disk; the rest are spaced evenly in log e²
            // from (max/3)² to max², which spreads log 𝒜 evenly
            let lo = (max_eccentricity / 3.0).powi(2).ln();
            let hi = max_eccentricity.powi(2).ln();
            (0..count)
                .map(|i| {
                    let e = if i == 0 { 0.0 } else { (lo + (hi - lo) * (i - 1) as f64 / (n - 1).max(1) as f64).exp().sqrt() };
                    (format!("ellipse:e={e:.6}"), shapes::ellipse(grid, k, e))
                })
                .collect()
        }
        Family::Dumbbell { min_neck } => {
            if !(min_neck > 0.0 && min_neck <= 1.0) {
                return Err(Error::InvalidParameter("neck half-width must lie in (0, 1]".into()));
            }
            (0..count)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let neck = 1.0 + (min_neck - 1.0) * t;
                    (format!("dumbbell:neck={neck:.6}"), shapes::dumbbell(grid, k, 2.0, neck))
                })
                .collect()
        }
        Family::Ball => (0..count).map(|i| (format!("ball:{i}"), shapes::disk(grid, k))).collect(),
    })
}

/// Deficit and asymmetry across a family, with the log-log slope fit.
pub fn stability_scan(family: Family, grid: &Grid, area: f64, count: usize, s: f64) -> Result<StabilityScan> {
    let members = family_members(family, grid, area, count)?;
    let records = members
        .iter()
        .map(|(id, m)| isoperimetric_deficit_named(m, s, id))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.asymmetry >= FIT_WINDOW.0 && r.asymmetry <= FIT_WINDOW.1 && r.deficit > 0.0)
        .map(|r| (r.asymmetry.ln(), r.deficit.ln()))
        .collect();
    let distinct = {
        let mut a: Vec<f64> = pts.iter().map(|p| p.0).collect();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a.len()
    };
    let (slope, note) = if distinct < 2 {
        (None, Some(format!("{} records in the window {:?}; no fit", pts.len(), FIT_WINDOW)))
    } else {
        (Some(least_squares_slope(&pts)), None)
    };
    Ok(StabilityScan { fit_points: pts.len(), records, slope, note })
}

/// Slope of the least-squares line through (x, y) pairs.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
