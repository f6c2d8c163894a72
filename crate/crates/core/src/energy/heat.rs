//! Gaussian slices I_t[u] = ∬ |u(x) − u(y)|ᵖ e^{−t|x−y|²} and the heat
//! representation of the Gagliardo seminorm,
//! [u]ᵖ = (1/Γ(a)) ∫₀^∞ I_t[u] t^{a−1} dt, a = (N + sp)/2.

use std::f64::consts::PI;

use serde::Serialize;

pub use crate::quadrature::LogGrid;

use super::{check_sp, pair_sum, with_power};
use crate::error::{Error, Result};
use crate::grid::{FracParams, GridFunction};
use crate::kernel::OffsetTable;
use crate::special::{gamma, gauss_tail};
use crate::sum::pairwise_sum;

/// Per-axis Gaussian data for one t: g(m) = e^{−a m²} and the in-box /
/// out-of-box sums for every cell.
struct AxisGauss {
    g: Vec<f64>,
    inside: Vec<f64>,
    outside: Vec<f64>,
}

fn axis_gauss(a: f64, n: usize, periodic: bool) -> AxisGauss {
    let mut g = vec![0.0; n];
    if periodic {
        // periodized Gaussian over images
        for (m, gm) in g.iter_mut().enumerate() {
            let mut s = 0.0;
            let mut j = 0i64;
            loop {
                let t1 = (-a * ((m as i64 + j * n as i64) as f64).powi(2)).exp();
                let t2 = if j > 0 { (-a * ((m as i64 - j * n as i64) as f64).powi(2)).exp() } else { 0.0 };
                s += t1 + t2;
                if j > 0 && t1 + t2 < 1e-18 * s.max(1e-300) {
                    break;
                }
                j += 1;
                if j > 10_000 {
                    break;
                }
            }
            *gm = s;
        }
        return AxisGauss { g, inside: vec![0.0; n], outside: vec![0.0; n] };
    }
    for (m, gm) in g.iter_mut().enumerate() {
        *gm = (-a * (m * m) as f64).exp();
    }
    // tail[d] = Σ_{m ≥ d} e^{−a m²}, d = 1..=n
    let mut tail = vec![0.0; n + 2];
    tail[n] = gauss_tail(a, n);
    for d in (1..n).rev() {
        tail[d] = tail[d + 1] + g[d];
    }
    let mut cum = vec![0.0; n];
    for m in 1..n {
        cum[m] = cum[m - 1] + g[m];
    }
    let inside: Vec<f64> = (0..n).map(|i| 1.0 + cum[i] + cum[n - 1 - i]).collect();
    let outside: Vec<f64> = (0..n).map(|i| tail[i + 1] + tail[n - i]).collect();
    AxisGauss { g, inside, outside }
}

fn gauss_table(rows: usize, cols: usize, ax0: &AxisGauss, ax1: &AxisGauss, one_d: bool) -> OffsetTable {
    let tr = 2 * rows - 1;
    let tc = 2 * cols - 1;
    let mut data = vec![0.0; tr * tc];
    for a in 0..tr {
        let d0 = (a as i64 - (rows as i64 - 1)).unsigned_abs() as usize;
        let g0 = if one_d { 1.0 } else { ax0.g[d0] };
        for b in 0..tc {
            let d1 = (b as i64 - (cols as i64 - 1)).unsigned_abs() as usize;
            data[a * tc + b] = g0 * ax1.g[d1];
        }
    }
    // the diagonal (d = 0) never pairs a cell with itself
    data[(rows - 1) * tc + cols - 1] = 0.0;
    OffsetTable { rows, cols, data }
}

/// I_t[u] = Σ_{i≠j} |u_i − u_j|ᵖ e^{−t|x_i − x_j|²} h^{2N}, with zero
/// extension (or periodic images) beyond the box.
pub fn heat_slice_energy(u: &GridFunction, t: f64, p: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("heat slice needs t > 0, got {t}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
    }
    let grid = u.grid();
    let (r, c) = grid.rows_cols();
    let one_d = grid.dim() == 1;
    let a = t * grid.spacing() * grid.spacing();
    let ax1 = axis_gauss(a, c, grid.periodic());
    let ax0 = axis_gauss(a, r, grid.periodic());
    let table = gauss_table(r, c, &ax0, &ax1, one_d);
    let vals = u.values();
    let dimless = with_power!(p, |f| {
        let mut total = 2.0 * pair_sum(vals, r, c, &table, &f);
        if !grid.periodic() {
            let terms: Vec<f64> = (0..vals.len())
                .map(|k| {
                    let v = vals[k];
                    if v == 0.0 {
                        return 0.0;
                    }
                    let (i0, i1) = (k / c, k % c);
                    let ext = if one_d {
                        ax1.outside[i1]
                    } else {
                        // θ² − S₀S₁ = L₀S₁ + θL₁
                        let theta0 = ax0.inside[i0] + ax0.outside[i0];
                        ax0.outside[i0] * ax1.inside[i1] + theta0 * ax1.outside[i1]
                    };
                    f(v) * ext
                })
                .collect();
            total += 2.0 * pairwise_sum(&terms);
        }
        total
    });
    Ok(dimless * grid.cell_volume() * grid.cell_volume())
}

/// Result of the heat-representation seminorm.
#[derive(Debug, Clone, Serialize)]
pub struct SubordinatedReport {
    pub value: f64,
    pub energy: f64,
    /// 1/Γ((N+sp)/2), the constant of the t-integral.
    pub constant: f64,
    /// Estimated relative truncation error of the t-quadrature.
    pub truncation_estimate: f64,
    pub t_grid: LogGrid,
}

impl LogGrid {
    /// A t-grid adapted to a box: t_min·diam² = 10⁻³, t_max·h² = 60.
    pub fn for_grid(grid: &crate::grid::Grid) -> Self {
        let diam2: f64 = (0..grid.dim()).map(|a| grid.extent(a).powi(2)).sum();
        let t_min = 1e-3 / diam2;
        let t_max = 60.0 / (grid.spacing() * grid.spacing());
        let nodes = (12.0 * (t_max / t_min).ln()).ceil() as usize + 1;
        Self { t_min, t_max, nodes }
    }
}

/// [u]_{W^{s,p}} through the heat representation, on the plain lattice
/// kernel. `tolerance` bounds the relative truncation error estimate.
pub fn subordinated_seminorm(
    u: &GridFunction,
    params: &FracParams,
    t_grid: &LogGrid,
    tolerance: f64,
) -> Result<SubordinatedReport> {
    check_sp(params.s, params.p)?;
    t_grid.validate()?;
    let grid = u.grid();
    if grid.dim() != params.dim {
        return Err(Error::InvalidParameter("grid dimension differs from N".into()));
    }
    let p = params.p;
    let n = grid.dim() as f64;
    let a = (n + params.sigma()) / 2.0;
    let half_sp = params.sigma() / 2.0;
    let h = grid.spacing();
    let vals = u.values();
    let jsum: f64 = with_power!(p, |f| pairwise_sum(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>()));
    let constant = 1.0 / gamma(a);
    if jsum == 0.0 {
        return Ok(SubordinatedReport { value: 0.0, energy: 0.0, constant, truncation_estimate: 0.0, t_grid: *t_grid });
    }
    // small-t expansion I_t ≈ A t^{−N/2} + Σ_m (−t)^m M_m / m!
    if grid.periodic() {
        return Err(Error::Unsupported("the heat representation is implemented for zero-extended grids".into()));
    }
    let m = small_t_moments(u, p);
    let coef_a = 2.0 * PI.powf(n / 2.0) * grid.cell_volume() * jsum;
    let t0 = t_grid.t_min;
    let mut head = coef_a * t0.powf(half_sp) / half_sp;
    // dF/dτ at τ_min for F = I_t t^a
    let mut head_deriv = coef_a * half_sp * t0.powf(half_sp);
    let mut head_err = 0.0;
    let mut fact = 1.0;
    for (k, mk) in m.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let e = a + k as f64;
        let term = sign * mk * t0.powf(e) / (fact * e);
        if k + 1 < m.len() {
            head += term;
            head_deriv += sign * mk * e * t0.powf(e) / fact;
        } else {
            head_err = term.abs();
        }
    }
    let nodes = t_grid.nodes_weights();
    let d = t_grid.step();
    let mut terms = Vec::with_capacity(nodes.len());
    let mut last_it = 0.0;
    for &(t, w) in &nodes {
        let it = heat_slice_energy(u, t, p)?;
        last_it = it;
        terms.push(w * it * t.powf(a - 1.0));
    }
    let body = pairwise_sum(&terms);
    // Euler–Maclaurin endpoint correction at the lower end
    let em = d * d / 12.0 * head_deriv;
    let t1 = t_grid.t_max;
    let decay = h * h;
    let tail_bound = last_it * t1.powf(a - 1.0) / decay * (1.0 + (a - 1.0).max(0.0) / (t1 * decay));
    let integral = head + body + em;
    let energy = constant * integral;
    let estimate = if integral > 0.0 { (head_err + tail_bound + em.abs() * 1e-2) / integral } else { f64::INFINITY };
    if estimate > tolerance {
        return Err(Error::Truncation { estimate, tolerance });
    }
    Ok(SubordinatedReport {
        value: energy.max(0.0).powf(1.0 / p),
        energy,
        constant,
        truncation_estimate: estimate,
        t_grid: *t_grid,
    })
}

/// M_m = Σ_{i≠j in box} (J(u_i−u_j) − J(u_i) − J(u_j)) |x_i−x_j|^{2m} h^{2N}
/// − [m=0]·2 Σ_i J(u_i) h^{2N}, for m = 0..=3.
fn small_t_moments(u: &GridFunction, p: f64) -> [f64; 4] {
    let grid = u.grid();
    let (r, c) = grid.rows_cols();
    let h2 = grid.spacing() * grid.spacing();
    let vals = u.values();
    let vol2 = grid.cell_volume().powi(2);
    let mut parts = vec![[0.0f64; 4]; r];
    with_power!(p, |f| {
        for (i0, part) in parts.iter_mut().enumerate() {
            for i1 in 0..c {
                let ui = vals[i0 * c + i1];
                let fi = f(ui);
                for j0 in i0..r {
                    let start = if j0 == i0 { i1 + 1 } else { 0 };
                    let d0 = (j0 - i0) as f64;
                    for j1 in start..c {
                        let uj = vals[j0 * c + j1];
                        let x = f(ui - uj) - fi - f(uj);
                        if x == 0.0 {
                            continue;
                        }
                        let d1 = j1 as f64 - i1 as f64;
                        let q = (d0 * d0 + d1 * d1) * h2;
                        part[0] += x;
                        part[1] += x * q;
                        part[2] += x * q * q;
                        part[3] += x * q * q * q;
                    }
                }
            }
        }
    });
    let jsum: f64 = with_power!(p, |f| vals.iter().map(|&v| f(v)).sum::<f64>());
    let mut m = [0.0; 4];
    for (k, mk) in m.iter_mut().enumerate() {
        let col: Vec<f64> = parts.iter().map(|pr| pr[k]).collect();
        *mk = 2.0 * pairwise_sum(&col) * vol2;
    }
    m[0] -= 2.0 * jsum * vol2;
    m
}

/// C_{N,s,p} in ∫₀^∞ G_t(z) t^{−1−sp/2} dt = C_{N,s,p} |z|^{−(N+sp)}, with
/// G_t the heat kernel: 2^{sp} Γ((N+sp)/2) / π^{N/2}.
pub fn subordination_constant(dim: usize, s: f64, p: f64) -> f64 {
    let n = dim as f64;
    2f64.powf(s * p) * gamma((n + s * p) / 2.0) / PI.powf(n / 2.0)
}

/// ∫₀^∞ G_t(z) t^{−1−sp/2} dt by the log-trapezoid rule on `t_grid`, plus
/// the large-t power-law tail.
pub fn heat_kernel_integral(z: f64, dim: usize, s: f64, p: f64, t_grid: &LogGrid) -> Result<f64> {
    check_sp(s, p)?;
    t_grid.validate()?;
    let n = dim as f64;
    let z2 = z * z;
    let g = |t: f64| (4.0 * PI * t).powf(-n / 2.0) * (-z2 / (4.0 * t)).exp() * t.powf(-1.0 - s * p / 2.0);
    let terms: Vec<f64> = t_grid.nodes_weights().iter().map(|&(t, w)| w * g(t)).collect();
    let b = (n + s * p) / 2.0;
    let tt = t_grid.t_max;
    let pre = (4.0 * PI).powf(-n / 2.0);
    let tail = pre * (tt.powf(-b) / b - z2 / 4.0 * tt.powf(-b - 1.0) / (b + 1.0)
        + z2 * z2 / 32.0 * tt.powf(-b - 2.0) / (b + 2.0));
    Ok(pairwise_sum(&terms) + tail)
}
