//! Dirichlet problems on a bounded set Ω with u = 0 outside Ω: the
//! quadratic form of the H^s seminorm over Ω, its first eigenpair, the
//! general-p Rayleigh quotient, linear solves and the Talenti comparison.

mod descent;
mod eigen;
mod talenti;

pub use descent::{rayleigh_descent_p, rayleigh_descent_with, DescentOptions, PEnergy};
pub use eigen::{first_eigenpair, first_eigenpair_with, EigenOptions, EigenResult};
pub use talenti::{concentration_compare, sobolev_quotient, talenti_pair, ConcentrationReport, TalentiReport};

use crate::error::{Error, Result};
use crate::fft::LinearConvolver;
use crate::grid::{check_order, GridFunction, IndicatorSet};
use crate::kernel::{KernelSpec, LatticeKernel};
use crate::sum::dot;

fn check_domain(omega: &IndicatorSet) -> Result<()> {
    if omega.grid().periodic() {
        return Err(Error::Unsupported("Dirichlet problems need a non-periodic grid".into()));
    }
    if omega.is_empty() {
        return Err(Error::Domain("Ω is empty".into()));
    }
    if omega.touches_boundary() {
        return Err(Error::Domain("Ω touches the box boundary".into()));
    }
    Ok(())
}

/// Matrix-free form of A with uᵀAu = [u_ext]²_{W^{s,2}} for the zero
/// extension u_ext of interior values u.
///
/// A_ii = 2 h^{N−2s} Σ_{k≠0} w(k) and A_ij = −2 h^{N−2s} w(i − j), where w
/// is the lattice kernel of the seminorm; products use one FFT convolution
/// over the grid box.
#[derive(Clone)]
pub struct StiffnessOperator {
    domain: IndicatorSet,
    s: f64,
    interior: Vec<usize>,
    lattice: LatticeKernel,
    scale: f64,
    diag: f64,
    conv: LinearConvolver,
}

impl std::fmt::Debug for StiffnessOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StiffnessOperator")
            .field("s", &self.s)
            .field("interior", &self.interior.len())
            .field("diag", &self.diag)
            .finish()
    }
}

/// Builds the operator for Ω with the default (refined) kernel.
pub fn assemble_stiffness(omega: &IndicatorSet, s: f64) -> Result<StiffnessOperator> {
    assemble_stiffness_with(omega, s, &KernelSpec::isotropic())
}

pub fn assemble_stiffness_with(omega: &IndicatorSet, s: f64, kernel: &KernelSpec) -> Result<StiffnessOperator> {
    check_order(s)?;
    check_domain(omega)?;
    let grid = omega.grid();
    let dim = grid.dim();
    let lattice = LatticeKernel::new(dim, 2.0 * s, 2.0, kernel)?;
    let scale = 2.0 * grid.spacing().powf(dim as f64 - 2.0 * s);
    let (r, c) = grid.rows_cols();
    let lk = lattice.clone();
    let conv = LinearConvolver::new((r, c), (r, c), (0, 0), move |d0, d1| {
        lk.weight(if dim == 1 { [d1, 0] } else { [d0, d1] })
    });
    Ok(StiffnessOperator {
        domain: omega.clone(),
        s,
        interior: omega.cells(),
        diag: scale * lattice.total(),
        lattice,
        scale,
        conv,
    })
}

impl StiffnessOperator {
    pub fn domain(&self) -> &IndicatorSet {
        &self.domain
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    /// Number of interior unknowns.
    pub fn len(&self) -> usize {
        self.interior.len()
    }
    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }
    /// Flat grid indices of the interior cells, in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }
    /// Lumped mass hᴺ.
    pub fn mass(&self) -> f64 {
        self.domain.grid().cell_volume()
    }

    /// A_ij for interior positions a, b.
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.diag;
        }
        let g = self.domain.grid();
        let i = g.unravel(self.interior[a]);
        let j = g.unravel(self.interior[b]);
        let k = if g.dim() == 1 {
            [j[0] as i64 - i[0] as i64, 0]
        } else {
            [j[0] as i64 - i[0] as i64, j[1] as i64 - i[1] as i64]
        };
        -self.scale * self.lattice.weight(k)
    }

    /// Dense copy, for small interiors.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|a| (0..n).map(|b| self.entry(a, b)).collect()).collect()
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len(), "vector length must match the interior");
        let mut full = vec![0.0; self.domain.grid().len()];
        for (&i, &v) in self.interior.iter().zip(x) {
            full[i] = v;
        }
        let conv = self.conv.apply(&full);
        self.interior
            .iter()
            .zip(x)
            .map(|(&i, &v)| self.diag * v - self.scale * conv[i])
            .collect()
    }

    /// xᵀ A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    /// Interior values zero-extended to the whole grid.
    pub fn extend(&self, x: &[f64]) -> GridFunction {
        let mut full = vec![0.0; self.domain.grid().len()];
        for (&i, &v) in self.interior.iter().zip(x) {
            full[i] = v;
        }
        GridFunction::new(self.domain.grid().clone(), full).expect("finite interior values")
    }

    /// Interior values of a grid function.
    pub fn restrict(&self, u: &GridFunction) -> Result<Vec<f64>> {
        u.grid().check_same(self.domain.grid(), "function and Ω must share a grid")?;
        Ok(self.interior.iter().map(|&i| u.values()[i]).collect())
    }
}

/// Conjugate gradients for A x = b up to the relative residual `tol`.
pub(crate) fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            // confirm with a true residual
            let ax = apply(&x);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let rel = dot(&res, &res).sqrt() / bnorm;
            if rel <= tol {
                return Ok((x, it, rel));
            }
            r = res;
            p = r.clone();
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    let ax = apply(&x);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    Err(Error::NoConvergence { iterations: max_iter, residual: dot(&res, &res).sqrt() / bnorm })
}

/// Solves A u = M f on Ω (u = 0 outside Ω); f is read on the interior only.
pub fn dirichlet_solve(a: &StiffnessOperator, f: &GridFunction) -> Result<GridFunction> {
    let rhs: Vec<f64> = a.restrict(f)?.into_iter().map(|v| v * a.mass()).collect();
    let (x, _, _) = conjugate_gradient(|v| a.apply(v), &rhs, 1e-12, 20 * a.len() + 100)?;
    Ok(a.extend(&x))
}

/// Relative residual ‖A u − M f‖/‖M f‖ of a candidate solution.
pub fn dirichlet_residual(a: &StiffnessOperator, u: &GridFunction, f: &GridFunction) -> Result<f64> {
    let x = a.restrict(u)?;
    let rhs: Vec<f64> = a.restrict(f)?.into_iter().map(|v| v * a.mass()).collect();
    let ax = a.apply(&x);
    let res: Vec<f64> = ax.iter().zip(&rhs).map(|(p, q)| p - q).collect();
    let den = dot(&rhs, &rhs).sqrt();
    Ok(if den == 0.0 { dot(&res, &res).sqrt() } else { dot(&res, &res).sqrt() / den })
}
