//! Rayleigh quotient [u]ᵖ_{W^{s,p}} / ‖u‖ᵖ_p over functions vanishing
//! outside Ω, minimized by normalized gradient descent with
//! Barzilai–Borwein steps and Armijo backtracking.

use rayon::prelude::*;

use super::{assemble_stiffness, check_domain, first_eigenpair, EigenResult};
use crate::energy::with_power;
use crate::error::{Error, Result};
use crate::grid::{check_order, pow_abs, GridFunction, IndicatorSet};
use crate::kernel::{KernelSpec, LatticeKernel, OffsetTable};
use crate::sum::pairwise_sum;

/// The energy u ↦ [u_ext]ᵖ_{W^{s,p}} on interior values, with its gradient.
#[derive(Debug, Clone)]
pub struct PEnergy {
    domain: IndicatorSet,
    p: f64,
    cells: Vec<(i64, i64)>,
    interior: Vec<usize>,
    table: OffsetTable,
    /// Σ_{k≠0} w(k) − Σ_{j∈Ω, j≠i} w(j − i): weight of Ωᶜ seen from cell i
    exterior: Vec<f64>,
    scale: f64,
}

impl PEnergy {
    pub fn new(omega: &IndicatorSet, s: f64, p: f64) -> Result<Self> {
        check_order(s)?;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
        }
        check_domain(omega)?;
        let grid = omega.grid();
        let dim = grid.dim();
        let lk = LatticeKernel::new(dim, s * p, p, &KernelSpec::isotropic())?;
        let (r, c) = grid.rows_cols();
        let table = lk.box_table(r, c);
        let interior = omega.cells();
        // (row, col) in the box the offset table is laid out for
        let cells: Vec<(i64, i64)> = interior.iter().map(|&i| ((i / c) as i64, (i % c) as i64)).collect();
        let total = lk.total();
        let exterior = cells
            .par_iter()
            .map(|&(a0, a1)| {
                let terms: Vec<f64> = cells.iter().map(|&(b0, b1)| table.at(b0 - a0, b1 - a1)).collect();
                total - pairwise_sum(&terms)
            })
            .collect();
        let scale = grid.spacing().powf(dim as f64 - s * p);
        Ok(Self { domain: omega.clone(), p, cells, interior, table, exterior, scale })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    /// [u_ext]ᵖ.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.eval(x, false).0
    }

    /// ∂[u_ext]ᵖ/∂x_i.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x, true).1
    }

    pub fn energy_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.eval(x, true)
    }

    fn eval(&self, x: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.len(), "vector length must match the interior");
        let p = self.p;
        let cells = &self.cells;
        let table = &self.table;
        // f'(d) = p |d|^{p−2} d
        let dpow = move |d: f64| -> f64 {
            if p == 2.0 {
                2.0 * d
            } else if p == 3.0 {
                3.0 * d * d.abs()
            } else if d == 0.0 {
                0.0
            } else {
                p * d.abs().powf(p - 1.0) * d.signum()
            }
        };
        let rows: Vec<(f64, f64)> = with_power!(p, |f| {
            (0..cells.len())
                .into_par_iter()
                .map(|i| {
                    let (a0, a1) = cells[i];
                    let xi = x[i];
                    let mut e = 0.0;
                    let mut g = 0.0;
                    for (j, &(b0, b1)) in cells.iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        let w = table.at(b0 - a0, b1 - a1);
                        let d = xi - x[j];
                        e += f(d) * w;
                        if want_grad {
                            g += dpow(d) * w;
                        }
                    }
                    let ext = self.exterior[i];
                    e += 2.0 * f(xi) * ext;
                    g += dpow(xi) * ext;
                    (e, 2.0 * g)
                })
                .collect()
        });
        let es: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let energy = self.scale * pairwise_sum(&es);
        let grad = if want_grad { rows.iter().map(|r| self.scale * r.1).collect() } else { Vec::new() };
        (energy, grad)
    }
}

#[derive(Debug, Clone)]
pub struct DescentOptions {
    /// Bound on ‖∇R‖_M / (p R) at the returned profile.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting profile; the p = 2 eigenfunction when absent.
    pub initial: Option<GridFunction>,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 20_000, initial: None }
    }
}

/// λ₁^{s,p}(Ω) as the minimum of the Rayleigh quotient.
pub fn rayleigh_descent_p(omega: &IndicatorSet, s: f64, p: f64, tol: f64) -> Result<EigenResult> {
    rayleigh_descent_with(omega, s, p, &DescentOptions { tol, ..Default::default() })
}

pub fn rayleigh_descent_with(omega: &IndicatorSet, s: f64, p: f64, opts: &DescentOptions) -> Result<EigenResult> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("the descent needs p > 1, got {p}")));
    }
    let energy = PEnergy::new(omega, s, p)?;
    let m = omega.grid().cell_volume();
    let lp = |x: &[f64]| -> f64 {
        let t: Vec<f64> = x.iter().map(|&v| pow_abs(v, p)).collect();
        pairwise_sum(&t) * m
    };
    let normalize = |x: &mut Vec<f64>| {
        let n = lp(x).powf(1.0 / p);
        for v in x.iter_mut() {
            *v = v.abs() / n;
        }
    };
    let mut x: Vec<f64> = match &opts.initial {
        Some(u) => {
            u.grid().check_same(omega.grid(), "initial profile and Ω must share a grid")?;
            energy.interior.iter().map(|&i| u.values()[i].abs()).collect()
        }
        None => {
            let a = assemble_stiffness(omega, s)?;
            let e = first_eigenpair(&a, opts.tol.max(1e-10))?;
            a.restrict(&e.eigenfunction)?
        }
    };
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("initial profile vanishes on Ω".into()));
    }
    normalize(&mut x);
    // preconditioned gradient of R at ‖x‖_p = 1: (∇E − R·p|x|^{p−2}x hᴺ)/hᴺ
    let direction = |x: &[f64]| -> (f64, Vec<f64>) {
        let (e, g) = energy.energy_and_gradient(x);
        let d = g
            .iter()
            .zip(x)
            .map(|(gi, &xi)| {
                let gn = if xi == 0.0 { 0.0 } else { p * xi.abs().powf(p - 1.0) * xi.signum() * m };
                (gi - e * gn) / m
            })
            .collect();
        (e, d)
    };
    let m_norm = |v: &[f64]| -> f64 { (v.iter().map(|a| a * a).sum::<f64>() * m).sqrt() };
    let (mut q, mut d) = direction(&x);
    let diag = 2.0 * energy.exterior.iter().cloned().fold(0.0, f64::max) * energy.scale / m;
    let mut eta = 1.0 / (p * diag.max(q));
    let mut history = vec![q];
    let mut residual = m_norm(&d) / (p * q);
    for it in 1..=opts.max_iter {
        if residual <= opts.tol {
            return Ok(done(&energy, x, q, residual, it - 1, history));
        }
        let slope: f64 = d.iter().map(|a| a * a).sum::<f64>() * m;
        let mut accepted = None;
        let mut step = eta;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - step * b).collect();
            if xn.iter().any(|v| v.abs() > 0.0) {
                normalize(&mut xn);
                let qn = energy.energy(&xn);
                if qn <= q - 1e-4 * step * slope {
                    accepted = Some((xn, qn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, qn)) = accepted else {
            // no decrease resolvable in floating point any more
            if residual <= 100.0 * opts.tol || qn_stalled(&history) {
                return Ok(done(&energy, x, q, residual, it, history));
            }
            return Err(Error::NoConvergence { iterations: it, residual });
        };
        let (_, dn) = direction(&xn);
        let sv: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = dn.iter().zip(&d).map(|(a, b)| a - b).collect();
        let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = sv.iter().map(|a| a * a).sum();
        eta = if sy > 0.0 { ss / sy } else { 2.0 * step };
        x = xn;
        q = qn;
        d = dn;
        history.push(q);
        residual = m_norm(&d) / (p * q);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}

fn qn_stalled(history: &[f64]) -> bool {
    history.len() > 10 && {
        let n = history.len();
        (history[n - 10] - history[n - 1]).abs() <= 1e-14 * history[n - 1]
    }
}

fn done(energy: &PEnergy, x: Vec<f64>, q: f64, residual: f64, iterations: usize, history: Vec<f64>) -> EigenResult {
    let grid = energy.domain.grid();
    let mut full = vec![0.0; grid.len()];
    for (&i, &v) in energy.interior.iter().zip(&x) {
        full[i] = v;
    }
    EigenResult {
        lambda1: q,
        eigenfunction: GridFunction::new(grid.clone(), full).expect("finite profile"),
        residual,
        iterations,
        history,
    }
}
