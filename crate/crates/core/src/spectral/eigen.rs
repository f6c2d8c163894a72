//! Smallest eigenpair of A u = λ M u by a single-vector locally optimal
//! conjugate gradient iteration.

use serde::Serialize;

use super::StiffnessOperator;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::sum::dot;

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Unit Lᵖ norm, non-negative, zero outside Ω.
    #[serde(skip)]
    pub eigenfunction: GridFunction,
    /// Relative residual (see the producing solver).
    pub residual: f64,
    pub iterations: usize,
    /// Quotient after every accepted step (descent solvers only).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Bound on ‖Au − λMu‖ / (λ‖Mu‖).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 5000 }
    }
}

/// λ₁ and its eigenfunction with the default iteration cap.
pub fn first_eigenpair(a: &StiffnessOperator, tol: f64) -> Result<EigenResult> {
    first_eigenpair_with(a, &EigenOptions { tol, ..Default::default() })
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
    n
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Orthonormalizes `v` (with its image `av`) against `basis`; returns false
/// when nothing independent is left.
fn orthonormalize(basis: &[(Vec<f64>, Vec<f64>)], v: &mut Vec<f64>, av: &mut Vec<f64>) -> bool {
    let n0 = dot(v, v).sqrt();
    if n0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for (b, ab) in basis {
            let c = dot(b, v);
            axpy(v, -c, b);
            axpy(av, -c, ab);
        }
    }
    let n = dot(v, v).sqrt();
    if n <= 1e-10 * n0 {
        return false;
    }
    for (x, y) in v.iter_mut().zip(av.iter_mut()) {
        *x /= n;
        *y /= n;
    }
    true
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations; eigenvalues ascending, eigenvectors as columns.
pub(crate) fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (vals, vecs)
}

pub fn first_eigenpair_with(a: &StiffnessOperator, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.len();
    let m = a.mass();
    let op = |x: &[f64]| -> Vec<f64> { a.apply(x).into_iter().map(|v| v / m).collect() };
    let mut x = vec![1.0; n];
    normalize(&mut x);
    let mut ax = op(&x);
    let mut lambda = dot(&x, &ax);
    let mut dir: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut residual = f64::INFINITY;
    let mut since_refresh = 0;
    for it in 1..=opts.max_iter {
        let mut r: Vec<f64> = ax.iter().zip(&x).map(|(p, q)| p - lambda * q).collect();
        residual = dot(&r, &r).sqrt() / lambda.abs();
        if residual <= opts.tol || n == 1 {
            // the propagated image may drift; confirm against a fresh product
            let fresh = op(&x);
            let rf: Vec<f64> = fresh.iter().zip(&x).map(|(p, q)| p - lambda * q).collect();
            residual = dot(&rf, &rf).sqrt() / lambda.abs();
            if residual <= opts.tol || n == 1 {
                return Ok(finish(a, x, lambda, residual, it));
            }
            ax = fresh;
            since_refresh = 0;
            continue;
        }
        let mut ar = op(&r);
        let mut basis = vec![(x.clone(), ax.clone())];
        if orthonormalize(&basis, &mut r, &mut ar) {
            basis.push((r, ar));
        }
        if let Some((mut p, mut ap)) = dir.take() {
            if orthonormalize(&basis, &mut p, &mut ap) {
                basis.push((p, ap));
            }
        }
        let k = basis.len();
        let small: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| 0.5 * (dot(&basis[i].0, &basis[j].1) + dot(&basis[j].0, &basis[i].1))).collect())
            .collect();
        let (vals, vecs) = symmetric_eigen(small);
        let c: Vec<f64> = (0..k).map(|i| vecs[i][0]).collect();
        let mut xn = vec![0.0; n];
        let mut axn = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ap = vec![0.0; n];
        for (i, (b, ab)) in basis.iter().enumerate() {
            axpy(&mut xn, c[i], b);
            axpy(&mut axn, c[i], ab);
            if i > 0 {
                axpy(&mut p, c[i], b);
                axpy(&mut ap, c[i], ab);
            }
        }
        let nx = normalize(&mut xn);
        for v in axn.iter_mut() {
            *v /= nx;
        }
        x = xn;
        since_refresh += 1;
        if since_refresh >= 25 {
            axn = op(&x);
            since_refresh = 0;
        }
        ax = axn;
        lambda = if since_refresh == 0 { dot(&x, &ax) } else { vals[0] };
        dir = Some((p, ap));
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}

fn finish(a: &StiffnessOperator, mut x: Vec<f64>, lambda: f64, residual: f64, iterations: usize) -> EigenResult {
    let sum: f64 = x.iter().sum();
    if sum < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
    // unit L² norm: Σ x_i² hᴺ = 1
    let scale = 1.0 / (dot(&x, &x) * a.mass()).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
    EigenResult { lambda1: lambda, eigenfunction: a.extend(&x), residual, iterations, history: Vec::new() }
}
