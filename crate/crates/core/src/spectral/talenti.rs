//! Mass-concentration comparison of Dirichlet solutions and the Sobolev
//! quotient.

use serde::Serialize;

use super::{assemble_stiffness, dirichlet_solve};
use crate::energy::gagliardo_seminorm;
use crate::error::{Error, Result};
use crate::grid::{lp_norm, FracParams, GridFunction, IndicatorSet};
use crate::kernel::KernelSpec;
use crate::rearrange::{ranking, schwarz_function, schwarz_set};
use crate::special::unit_ball_volume;

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    /// Radius of the ball made of the first k ranked cells.
    pub radii: Vec<f64>,
    /// ∫_{B_r} u*.
    pub lhs: Vec<f64>,
    /// ∫_{B_r} v.
    pub rhs: Vec<f64>,
    /// min over r of rhs − lhs.
    pub worst_margin: f64,
    /// Whether lhs ≤ rhs + slack at every radius.
    pub holds: bool,
}

/// Compares ∫_{B_r} u* with ∫_{B_r} v, balls being the prefixes of the
/// cell ranking.
pub fn concentration_compare(u: &GridFunction, v: &GridFunction, slack: f64) -> Result<ConcentrationReport> {
    u.grid().check_same(v.grid(), "u and v must share a grid")?;
    if !v.is_nonnegative() {
        return Err(Error::Domain("v must be non-negative".into()));
    }
    let us = schwarz_function(u)?;
    let grid = u.grid();
    let order = ranking(grid);
    let vol = grid.cell_volume();
    let n = grid.dim() as f64;
    let wn = unit_ball_volume(grid.dim());
    let mut radii = Vec::with_capacity(order.len());
    let mut lhs = Vec::with_capacity(order.len());
    let mut rhs = Vec::with_capacity(order.len());
    let (mut a, mut b) = (0.0, 0.0);
    let (mut ca, mut cb) = (0.0, 0.0);
    let mut worst = f64::INFINITY;
    for (k, &i) in order.iter().enumerate() {
        // Neumaier running sums
        for (acc, comp, x) in [(&mut a, &mut ca, us.values()[i] * vol), (&mut b, &mut cb, v.values()[i] * vol)] {
            let t = *acc + x;
            *comp += if acc.abs() >= x.abs() { (*acc - t) + x } else { (x - t) + *acc };
            *acc = t;
        }
        let l = a + ca;
        let r = b + cb;
        radii.push(((k + 1) as f64 * vol / wn).powf(1.0 / n));
        lhs.push(l);
        rhs.push(r);
        worst = worst.min(r - l);
    }
    Ok(ConcentrationReport { radii, lhs, rhs, worst_margin: worst, holds: worst >= -slack })
}

/// Solutions of the problem on Ω and on its symmetral with right-hand
/// sides f and f*, and their comparison.
#[derive(Debug, Clone, Serialize)]
pub struct TalentiReport {
    pub concentration: ConcentrationReport,
    /// [u]_{H^s} for the solution on Ω.
    pub seminorm_u: f64,
    /// [v]_{H^s} for the solution on Ω*.
    pub seminorm_v: f64,
    #[serde(skip)]
    pub u: GridFunction,
    #[serde(skip)]
    pub v: GridFunction,
}

pub fn talenti_pair(omega: &IndicatorSet, f: &GridFunction, s: f64) -> Result<TalentiReport> {
    if !f.is_nonnegative() {
        return Err(Error::Domain("f must be non-negative".into()));
    }
    let a = assemble_stiffness(omega, s)?;
    let masked: Vec<f64> = f.values().iter().zip(omega.mask()).map(|(&x, &m)| if m { x } else { 0.0 }).collect();
    let f_in = GridFunction::new(f.grid().clone(), masked)?;
    let u = clamp_roundoff(dirichlet_solve(&a, &f_in)?)?;
    let star = schwarz_set(omega);
    let f_star = schwarz_function(&f_in)?;
    let b = assemble_stiffness(&star, s)?;
    let v = clamp_roundoff(dirichlet_solve(&b, &f_star)?)?;
    let params = FracParams::new(f.grid().dim(), s, 2.0)?;
    let kernel = KernelSpec::isotropic();
    let seminorm_u = gagliardo_seminorm(&u, &params, &kernel)?.value;
    let seminorm_v = gagliardo_seminorm(&v, &params, &kernel)?.value;
    let concentration = concentration_compare(&u, &v, f.grid().spacing())?;
    Ok(TalentiReport { concentration, seminorm_u, seminorm_v, u, v })
}

/// Zeroes solver round-off below zero; a genuinely negative solution of a
/// problem with non-negative data is an error.
fn clamp_roundoff(u: GridFunction) -> Result<GridFunction> {
    let max = u.max();
    if u.min() < -1e-8 * max.abs() {
        return Err(Error::Domain(format!("solution dips to {:e} of its maximum", u.min() / max)));
    }
    u.map(|x| x.max(0.0))
}

/// ‖u‖_{p*} / [u]_{W^{s,p}}.
pub fn sobolev_quotient(u: &GridFunction, params: &FracParams) -> Result<f64> {
    let ps = params.p_star()?;
    if u.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("the Sobolev quotient of the zero function is undefined".into()));
    }
    let num = lp_norm(u, ps)?;
    let den = gagliardo_seminorm(u, params, &KernelSpec::isotropic())?.value;
    Ok(num / den)
}
