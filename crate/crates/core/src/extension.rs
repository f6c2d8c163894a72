//! Weighted harmonic extension of periodic data to the half-space,
//! Div(y^a ∇U) = 0 with a = 1 − 2s, on a truncated cylinder with a graded
//! y-mesh.
//!
//! The discrete energy is
//! E[U] = Σ_j ν_j Σ_i hᴺ |∇ₕU(·, y_j)|² + Σ_j c_j Σ_i hᴺ (U_{j+1} − U_j)²,
//! with forward differences ∇ₕ in x, c_j = ∫_{y_j}^{y_{j+1}} y^a dy / Δy_j²
//! and ν_j the integral of y^a over the dual interval around y_j. It is
//! diagonal in the discrete Fourier basis of x, so the minimizer is found by
//! one tridiagonal solve per mode.

use num_complex::Complex64;
use serde::Serialize;

use crate::energy::gagliardo_seminorm;
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::fourier::SpectralField;
use crate::grid::{check_order, FracParams, Grid, GridFunction, IndicatorSet};
use crate::kernel::{KernelSpec, NearField};
use crate::rearrange::schwarz_function;
use crate::sum::pairwise_sum;

/// Node placement in y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Grading {
    /// y_j = Y (j/M)^γ with γ = max(1/(2(1 − s)), 1/s): clusters nodes
    /// where the profile behaves like 1 − c·y^{2s}.
    Auto,
    /// y_j = Y (j/M)^γ.
    Power(f64),
    /// Geometric spacing starting from the given first step.
    Geometric(f64),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtensionMesh {
    /// Number of y-intervals.
    pub m: usize,
    /// Truncation height; 12/(lowest nonzero |ξ|) when absent.
    pub y_max: Option<f64>,
    pub grading: Grading,
}

impl Default for ExtensionMesh {
    fn default() -> Self {
        Self { m: 200, y_max: None, grading: Grading::Auto }
    }
}

impl ExtensionMesh {
    /// Node heights for order s on a torus whose longest side is `period`.
    pub fn nodes(&self, s: f64, period: f64) -> Result<Vec<f64>> {
        if self.m < 2 {
            return Err(Error::InvalidParameter("the y-mesh needs at least 2 intervals".into()));
        }
        let y = self.y_max.unwrap_or(12.0 * period / (2.0 * std::f64::consts::PI));
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("truncation height {y} must be positive")));
        }
        let m = self.m as f64;
        let nodes = match self.grading {
            Grading::Auto | Grading::Power(_) => {
                let g = match self.grading {
                    Grading::Power(g) => g,
                    _ => (1.0 / (2.0 * (1.0 - s))).max(1.0 / s),
                };
                if !(g >= 1.0 && g.is_finite()) {
                    return Err(Error::InvalidParameter(format!("grading exponent {g} must be >= 1")));
                }
                (0..=self.m).map(|j| y * (j as f64 / m).powf(g)).collect()
            }
            Grading::Geometric(first) => {
                if !(first > 0.0 && first * m < y) {
                    return Err(Error::InvalidParameter(format!(
                        "first step {first} must be positive and below Y/M"
                    )));
                }
                // ratio q with first·(qᴹ − 1)/(q − 1) = Y, by bisection
                let reach = |q: f64| first * (q.powf(m) - 1.0) / (q - 1.0);
                let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
                while reach(hi) < y {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if reach(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let q = 0.5 * (lo + hi);
                let mut out = Vec::with_capacity(self.m + 1);
                let mut acc = 0.0;
                let mut step = first;
                out.push(0.0);
                for _ in 0..self.m {
                    acc += step;
                    step *= q;
                    out.push(acc);
                }
                let last = out[self.m];
                for v in out.iter_mut() {
                    *v *= y / last;
                }
                out
            }
        };
        Ok(nodes)
    }
}

/// ∫_lo^hi y^a dy.
fn weight_integral(a: f64, lo: f64, hi: f64) -> f64 {
    (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
}

/// Vertical couplings c_j and dual weights ν_j of the y-mesh.
fn mesh_weights(y: &[f64], a: f64) -> (Vec<f64>, Vec<f64>) {
    let m = y.len() - 1;
    let c: Vec<f64> = (0..m)
        .map(|j| {
            let dy = y[j + 1] - y[j];
            weight_integral(a, y[j], y[j + 1]) / (dy * dy)
        })
        .collect();
    let nu: Vec<f64> = (0..=m)
        .map(|j| {
            let lo = if j == 0 { 0.0 } else { 0.5 * (y[j - 1] + y[j]) };
            let hi = if j == m { y[m] } else { 0.5 * (y[j] + y[j + 1]) };
            weight_integral(a, lo, hi)
        })
        .collect();
    (c, nu)
}

/// Symbol of −Δₕ (5-point, periodic) at the mode of `idx`.
fn difference_symbol(field: &SpectralField, idx: usize) -> f64 {
    let g = field.grid();
    let h = g.spacing();
    let f = field.frequency(idx);
    f.iter().map(|xi| (2.0 * (0.5 * xi * h).sin() / h).powi(2)).sum()
}

/// U(x_i, y_j) on the truncated cylinder.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionField {
    #[serde(skip)]
    pub base_grid: Grid,
    pub y_nodes: Vec<f64>,
    /// The exponent a of the weight y^a.
    pub weight_exponent: f64,
    /// Row-major by height: row j holds U(·, y_j).
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Largest ratio of the flux through y = Y to the flux through y = 0
    /// over the modes present in the datum; large values mean Y is short.
    pub top_flux: f64,
}

impl ExtensionField {
    pub fn rows(&self) -> usize {
        self.y_nodes.len()
    }
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.base_grid.len();
        &self.values[j * n..(j + 1) * n]
    }
    pub fn slice(&self, j: usize) -> GridFunction {
        GridFunction::new(self.base_grid.clone(), self.row(j).to_vec()).expect("finite field")
    }
    /// U(·, 0).
    pub fn trace(&self) -> GridFunction {
        self.slice(0)
    }

    /// Same mesh, new values (e.g. a rearranged field).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch { expected: self.values.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, ..self.clone() })
    }

    /// E[U] evaluated mode by mode, i.e. the quadratic form the solver
    /// minimizes.
    pub fn solver_form(&self) -> f64 {
        let (c, nu) = mesh_weights(&self.y_nodes, self.weight_exponent);
        let rows: Vec<SpectralField> = (0..self.rows())
            .map(|j| SpectralField::from_function(&self.slice(j)).expect("periodic base"))
            .collect();
        let modes = rows[0].modes().len();
        let lam: Vec<f64> = (0..modes).map(|k| difference_symbol(&rows[0], k)).collect();
        let volume = self.base_grid.cell_volume() * self.base_grid.len() as f64;
        let mut parts = Vec::with_capacity(self.rows());
        for j in 0..self.rows() {
            let mut acc = 0.0;
            for k in 0..modes {
                let z = rows[j].modes()[k];
                acc += lam[k] * nu[j] * z.norm_sqr();
                if j + 1 < self.rows() {
                    acc += c[j] * (rows[j + 1].modes()[k] - z).norm_sqr();
                }
            }
            parts.push(acc);
        }
        volume * pairwise_sum(&parts)
    }
}

fn check_base(u: &GridFunction) -> Result<()> {
    if !u.grid().periodic() {
        return Err(Error::InvalidGrid("the extension needs a periodic base grid".into()));
    }
    Ok(())
}

/// Extension of u for order s (weight y^{1−2s}).
pub fn extend_cs(u: &GridFunction, s: f64, mesh: &ExtensionMesh) -> Result<ExtensionField> {
    check_order(s)?;
    extend_weighted(u, 1.0 - 2.0 * s, s, mesh)
}

/// Extension with weight y^a; `order` only steers the automatic grading.
fn extend_weighted(u: &GridFunction, a: f64, order: f64, mesh: &ExtensionMesh) -> Result<ExtensionField> {
    check_base(u)?;
    let grid = u.grid().clone();
    let period = (0..grid.dim()).map(|k| grid.extent(k)).fold(0.0, f64::max);
    let y = mesh.nodes(order, period)?;
    let m = y.len() - 1;
    let (c, nu) = mesh_weights(&y, a);
    let spec = SpectralField::from_function(u)?;
    let modes = spec.modes().len();
    let amp_max = spec.modes().iter().map(|z| z.norm()).fold(0.0, f64::max);
    // profiles φ_j per distinct symbol value, φ_0 = 1, φ_M = 0
    let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(modes);
    let mut cache: Vec<(f64, usize)> = Vec::new();
    let mut index = Vec::with_capacity(modes);
    let mut top_flux: f64 = 0.0;
    for k in 0..modes {
        let lam = difference_symbol(&spec, k);
        if lam == 0.0 {
            index.push(usize::MAX);
            continue;
        }
        let slot = match cache.iter().find(|(l, _)| (*l - lam).abs() <= 1e-14 * lam) {
            Some(&(_, i)) => i,
            None => {
                let phi = mode_profile(&c, &nu, lam);
                cache.push((lam, profiles.len()));
                profiles.push(phi);
                profiles.len() - 1
            }
        };
        if spec.modes()[k].norm() > 1e-12 * amp_max {
            let phi = &profiles[slot];
            let bottom = c[0] * (phi[0] - phi[1]);
            let top = c[m - 1] * phi[m - 1];
            top_flux = top_flux.max((top / bottom).abs());
        }
        index.push(slot);
    }
    let mean = spec.modes()[0].re;
    let (r, cc) = grid.rows_cols();
    let fft = Fft2::new(r, cc);
    let n = grid.len();
    let mut values = vec![0.0; n * (m + 1)];
    values[..n].copy_from_slice(u.values());
    for j in 1..=m {
        let mut buf: Vec<Complex64> = (0..modes)
            .map(|k| match index[k] {
                usize::MAX => spec.modes()[k],
                slot => spec.modes()[k] * profiles[slot][j],
            })
            .collect();
        if j == m {
            // top row: the mean only
            for (k, z) in buf.iter_mut().enumerate() {
                if index[k] != usize::MAX {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        fft.inverse(&mut buf);
        let row = &mut values[j * n..(j + 1) * n];
        for (v, z) in row.iter_mut().zip(&buf) {
            *v = z.re * n as f64;
        }
        if j == m {
            row.iter_mut().for_each(|v| *v = mean);
        }
    }
    Ok(ExtensionField { base_grid: grid, y_nodes: y, weight_exponent: a, values, top_flux })
}

/// Minimizer of Σ c_j (φ_{j+1} − φ_j)² + λ Σ ν_j φ_j² with φ_0 = 1, φ_M = 0.
fn mode_profile(c: &[f64], nu: &[f64], lam: f64) -> Vec<f64> {
    let m = c.len();
    let mut phi = vec![0.0; m + 1];
    phi[0] = 1.0;
    if m < 2 {
        return phi;
    }
    // Thomas algorithm on j = 1..m−1
    let k = m - 1;
    let mut cp = vec![0.0; k];
    let mut dp = vec![0.0; k];
    for t in 0..k {
        let j = t + 1;
        let diag = c[j - 1] + c[j] + lam * nu[j];
        let lower = -c[j - 1];
        let upper = -c[j];
        let rhs = if j == 1 { c[0] * phi[0] } else { 0.0 };
        if t == 0 {
            cp[t] = upper / diag;
            dp[t] = rhs / diag;
        } else {
            let den = diag - lower * cp[t - 1];
            cp[t] = upper / den;
            dp[t] = (rhs - lower * dp[t - 1]) / den;
        }
    }
    for t in (0..k).rev() {
        let next = if t + 1 < k { phi[t + 2] } else { 0.0 };
        phi[t + 1] = dp[t] - cp[t] * next;
    }
    phi
}

/// Horizontal and vertical weighted energies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtensionEnergies {
    pub i1: f64,
    pub i2: f64,
}

impl ExtensionEnergies {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2
    }
}

/// I₁ = Σ_j ν_j ∫|∇ₕU|² dx and I₂ = Σ_j c_j ∫(U_{j+1} − U_j)² dx.
pub fn extension_energies(field: &ExtensionField) -> ExtensionEnergies {
    let (c, nu) = mesh_weights(&field.y_nodes, field.weight_exponent);
    let g = &field.base_grid;
    let (r, cc) = g.rows_cols();
    let h = g.spacing();
    let vol = g.cell_volume();
    let dim = g.dim();
    let mut p1 = Vec::with_capacity(field.rows());
    let mut p2 = Vec::with_capacity(field.rows());
    for j in 0..field.rows() {
        let u = field.row(j);
        let mut terms = Vec::with_capacity(u.len());
        for i0 in 0..r {
            for i1 in 0..cc {
                let v = u[i0 * cc + i1];
                let dx = (u[i0 * cc + (i1 + 1) % cc] - v) / h;
                let mut t = dx * dx;
                if dim == 2 {
                    let dy = (u[((i0 + 1) % r) * cc + i1] - v) / h;
                    t += dy * dy;
                }
                terms.push(t);
            }
        }
        p1.push(nu[j] * pairwise_sum(&terms));
        if j + 1 < field.rows() {
            let w = field.row(j + 1);
            let d: Vec<f64> = u.iter().zip(w).map(|(a, b)| (b - a) * (b - a)).collect();
            p2.push(c[j] * pairwise_sum(&d));
        }
    }
    ExtensionEnergies { i1: vol * pairwise_sum(&p1), i2: vol * pairwise_sum(&p2) }
}

/// Lowest-mode reference datum cos(2π x₀/L) along the last axis.
fn reference_mode(grid: &Grid) -> Result<GridFunction> {
    let axis = grid.dim() - 1;
    let l = grid.extent(axis);
    let o = grid.origin()[axis];
    GridFunction::from_fn(grid.clone(), |x| (2.0 * std::f64::consts::PI * (x[axis] - o) / l).cos())
}

/// Constant c with [u]²_{W^{order,2}} = c·E[U] on the reference mode of
/// the grid, for an extension with weight exponent a = 1 − 2·order.
fn calibrate(grid: &Grid, order: f64, mesh: &ExtensionMesh) -> Result<f64> {
    let u = reference_mode(grid)?;
    let ext = extend_weighted(&u, 1.0 - 2.0 * order, order, mesh)?;
    let params = FracParams::new(grid.dim(), order, 2.0)?;
    let kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let semi = gagliardo_seminorm(&u, &params, &kernel)?.energy;
    Ok(semi / extension_energies(&ext).total())
}

/// Calibrated c_s for order s on a periodic grid.
pub fn calibrate_cs(grid: &Grid, s: f64, mesh: &ExtensionMesh) -> Result<f64> {
    check_order(s)?;
    if !grid.periodic() {
        return Err(Error::InvalidGrid("the extension needs a periodic base grid".into()));
    }
    calibrate(grid, s, mesh)
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialSymmetrizationReport {
    pub i1_u: f64,
    pub i2_u: f64,
    pub i1_ustar: f64,
    pub i2_ustar: f64,
    pub energy_v: f64,
    /// I₁[U*] ≤ I₁[U], I₂[U*] ≤ I₂[U] and E[V] ≤ I₁[U*] + I₂[U*], each with
    /// 10⁻⁶ relative slack.
    pub chain_holds: bool,
}

/// Extension U of u, its slice-wise rearrangement U*, and the extension V
/// of u*.
pub fn partial_symmetrization_experiment(
    u: &GridFunction,
    s: f64,
    mesh: &ExtensionMesh,
) -> Result<PartialSymmetrizationReport> {
    if !u.is_nonnegative() {
        return Err(Error::Domain("the datum must be non-negative".into()));
    }
    let big = extend_cs(u, s, mesh)?;
    let n = u.len();
    let mut star = Vec::with_capacity(big.values.len());
    for j in 0..big.rows() {
        // the discrete maximum principle holds up to round-off
        let row: Vec<f64> = big.row(j).iter().map(|v| v.max(0.0)).collect();
        let slice = GridFunction::new(u.grid().clone(), row)?;
        star.extend_from_slice(schwarz_function(&slice)?.values());
    }
    debug_assert_eq!(star.len(), n * big.rows());
    let big_star = big.with_values(star)?;
    let v = extend_cs(&schwarz_function(u)?, s, mesh)?;
    let eu = extension_energies(&big);
    let es = extension_energies(&big_star);
    let ev = extension_energies(&v).total();
    let within = |a: f64, b: f64| a <= b * (1.0 + 1e-6) + 1e-300;
    let chain_holds = within(es.i1, eu.i1) && within(es.i2, eu.i2) && within(ev, es.total());
    Ok(PartialSymmetrizationReport {
        i1_u: eu.i1,
        i2_u: eu.i2,
        i1_ustar: es.i1,
        i2_ustar: es.i2,
        energy_v: ev,
        chain_holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionPerimeter {
    pub value: f64,
    /// Extension energy of χ_E.
    pub energy: f64,
    /// Constant mapping extension energy to ½[·]²_{W^{s/2,2}}.
    pub calibration: f64,
    pub top_flux: f64,
}

/// P_s(E) from the extension of χ_E with weight y^{1−s}.
pub fn perimeter_via_extension(e: &IndicatorSet, s: f64, mesh: &ExtensionMesh) -> Result<ExtensionPerimeter> {
    check_order(s)?;
    let chi = e.indicator();
    check_base(&chi)?;
    let order = 0.5 * s;
    let ext = extend_weighted(&chi, 1.0 - s, order, mesh)?;
    let energy = extension_energies(&ext).total();
    let calibration = 0.5 * calibrate(e.grid(), order, mesh)?;
    Ok(ExtensionPerimeter { value: calibration * energy, energy, calibration, top_flux: ext.top_flux })
}

/// The mesh used for perimeters: geometric from h/8.
pub fn perimeter_mesh(grid: &Grid) -> ExtensionMesh {
    ExtensionMesh { m: 200, y_max: None, grading: Grading::Geometric(grid.spacing() / 8.0) }
}
