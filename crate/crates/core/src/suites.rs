//! Verification suites: each runs one family of inequality or identity
//! checks and reports every case with its margin and replay inputs.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::energy::{
    calibrate_riesz_mu, fractional_perimeter, gagliardo_seminorm, riesz_dirichlet_energy, RieszOptions,
};
use crate::error::{Error, Result};
use crate::extension::{
    calibrate_cs, extend_cs, extension_energies, partial_symmetrization_experiment, ExtensionMesh,
};
use crate::fourier::compare_realizations;
use crate::geometry::{isoperimetric_deficit_named, shapes, stability_scan, Family};
use crate::grid::{lp_norm, FracParams, Grid, GridFunction, IndicatorSet};
use crate::kernel::{KernelSpec, NearField};
use crate::quadrature::LogGrid;
use crate::rearrange::{distribution_function, schwarz_function};
use crate::spectral::{assemble_stiffness, first_eigenpair, rayleigh_descent_p, talenti_pair};

pub const SUITES: [&str; 8] = [
    "polya-szego",
    "isoperimetric",
    "faber-krahn",
    "talenti",
    "operator-equivalence",
    "extension-chain",
    "stability-slope",
    "riesz-probe",
];

/// Number of random functions per (dimension, s, p) in the dominance suite.
pub const RANDOM_CASES: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    pub id: String,
    pub passed: bool,
    /// Non-negative when the checked inequality holds.
    pub margin: f64,
    /// Reported but never counted as a failure.
    pub informational: bool,
    /// Measured values and the inputs needed to replay the case.
    pub data: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub failures: usize,
    pub cases: Vec<CaseRecord>,
}

fn case(id: String, margin: f64, data: Value) -> CaseRecord {
    CaseRecord { id, passed: margin >= 0.0, margin, informational: false, data }
}

/// Runs a suite by name; cases come back sorted by id.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let mut cases = match name {
        "polya-szego" => polya_szego(seed)?,
        "isoperimetric" => isoperimetric()?,
        "faber-krahn" => faber_krahn()?,
        "talenti" => talenti()?,
        "operator-equivalence" => operator_equivalence()?,
        "extension-chain" => extension_chain(seed)?,
        "stability-slope" => stability_slope()?,
        "riesz-probe" => riesz_probe()?,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite '{name}' (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    let failures = cases.iter().filter(|c| !c.passed && !c.informational).count();
    Ok(SuiteReport { suite: name.to_string(), seed, passed: failures == 0, failures, cases })
}

/// Grid of the dominance suite: [−½, ½]ᴺ with h = 1/128 (1D), 1/32 (2D).
pub fn dominance_grid(dim: usize) -> Grid {
    match dim {
        1 => Grid::centered(&[128], 1.0 / 128.0, false).expect("valid grid"),
        _ => Grid::centered(&[32, 32], 1.0 / 32.0, false).expect("valid grid"),
    }
}

/// Random non-negative function constant on blocks of `block` cells per
/// axis. Even-numbered draws use five quantized levels (many ties), odd
/// ones uniform values; about a quarter of the blocks are zero.
pub fn random_step_function(grid: &Grid, block: usize, rng: &mut impl Rng, quantized: bool) -> GridFunction {
    let (r, c) = grid.rows_cols();
    let br = r.div_ceil(block);
    let bc = c.div_ceil(block);
    let levels: Vec<f64> = (0..br * bc)
        .map(|_| {
            if rng.gen_bool(0.25) {
                0.0
            } else if quantized {
                f64::from(rng.gen_range(1..=4u8)) / 4.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let vals = (0..r * c)
        .map(|k| {
            let (i, j) = (k / c, k % c);
            let bi = if r == 1 { 0 } else { i / block };
            levels[bi * bc + j / block]
        })
        .collect();
    GridFunction::new(grid.clone(), vals).expect("finite values")
}

/// The `index`-th random function of the dominance suite for `seed`.
pub fn dominance_input(dim: usize, seed: u64, index: usize) -> GridFunction {
    let grid = dominance_grid(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((dim as u64) << 32) ^ index as u64);
    let block = if dim == 1 { 8 } else { 4 };
    random_step_function(&grid, block, &mut rng, index % 2 == 0)
}

pub const ORDERS: [f64; 3] = [0.3, 0.5, 0.7];
pub const POWERS: [f64; 3] = [1.0, 2.0, 3.0];

fn polya_szego(seed: u64) -> Result<Vec<CaseRecord>> {
    let kernel = KernelSpec::isotropic();
    let mut out = Vec::new();
    for dim in [1usize, 2] {
        let inputs: Vec<(GridFunction, GridFunction)> = (0..RANDOM_CASES)
            .map(|i| {
                let u = dominance_input(dim, seed, i);
                let us = schwarz_function(&u)?;
                Ok((u, us))
            })
            .collect::<Result<_>>()?;
        for (i, (u, us)) in inputs.iter().enumerate() {
            out.extend(conservation_cases(dim, i, u, us)?);
        }
        for s in ORDERS {
            for p in POWERS {
                let params = FracParams::new(dim, s, p)?;
                let rows: Vec<CaseRecord> = inputs
                    .par_iter()
                    .enumerate()
                    .map(|(i, (u, us))| {
                        let a = gagliardo_seminorm(u, &params, &kernel)?.value;
                        let b = gagliardo_seminorm(us, &params, &kernel)?.value;
                        let margin = a * (1.0 + 1e-6) - b;
                        let mut data = json!({"dim": dim, "s": s, "p": p, "seed": seed, "index": i,
                            "seminorm_u": a, "seminorm_ustar": b});
                        if margin < 0.0 {
                            data["values"] = json!(u.values());
                        }
                        Ok(case(format!("dominance/{dim}d/s={s}/p={p}/{i:03}"), margin, data))
                    })
                    .collect::<Result<_>>()?;
                out.extend(rows);
                // a symmetric-decreasing input is its own rearrangement
                let fixed = &inputs[0].1;
                let again = schwarz_function(fixed)?;
                let a = gagliardo_seminorm(fixed, &params, &kernel)?.value;
                let b = gagliardo_seminorm(&again, &params, &kernel)?.value;
                let rel = (a - b).abs() / a.max(f64::MIN_POSITIVE);
                out.push(case(
                    format!("fixed-point/{dim}d/s={s}/p={p}"),
                    1e-12 - rel,
                    json!({"seminorm": a, "seminorm_rearranged": b, "relative_difference": rel}),
                ));
            }
        }
    }
    Ok(out)
}

/// Lᵖ norms and level measures of u and u*.
fn conservation_cases(dim: usize, index: usize, u: &GridFunction, us: &GridFunction) -> Result<Vec<CaseRecord>> {
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0, 3.0, 7.5, f64::INFINITY] {
        let a = lp_norm(u, p)?;
        let b = lp_norm(us, p)?;
        if a > 0.0 {
            worst = worst.max((a - b).abs() / a);
        }
    }
    let mut levels: Vec<f64> = u.values().to_vec();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut level_worst: f64 = 0.0;
    for &t in &levels {
        let a = distribution_function(u, t)?;
        let b = distribution_function(us, t)?;
        let scale = a.max(b).max(u.grid().cell_volume());
        level_worst = level_worst.max((a - b).abs() / scale);
    }
    Ok(vec![case(
        format!("conservation/{dim}d/{index:03}"),
        1e-12 - worst.max(level_worst),
        json!({"lp_relative": worst, "level_relative": level_worst, "levels": levels.len()}),
    )])
}

fn isoperimetric() -> Result<Vec<CaseRecord>> {
    let mut out = Vec::new();
    // closed form: P_s((0, L)) = 2 L^{1−s} / (s (1 − s))
    let line = Grid::new(&[1024], &[-1.0], 1.0 / 256.0, false)?;
    let interval = IndicatorSet::from_predicate(line, |x| x[0] > 0.0 && x[0] < 2.0);
    for s in ORDERS {
        let exact = 2.0 * 2f64.powf(1.0 - s) / (s * (1.0 - s));
        let value = fractional_perimeter(&interval, s)?;
        let rel = (value - exact).abs() / exact;
        // the 1% budget is pinned at s = ½; other orders converge like h^{1−s}
        let mut c = case(format!("interval/s={s}"), 0.01 - rel, json!({"value": value, "exact": exact, "relative_error": rel}));
        c.informational = s != 0.5;
        out.push(c);
    }
    let grid = Grid::centered(&[96, 96], 1.0 / 32.0, false)?;
    for s in ORDERS {
        for name in ["square", "rect", "lshape"] {
            let shape = shapes::by_name(&grid, name, PI)?;
            let r = isoperimetric_deficit_named(&shape, s, name)?;
            out.push(case(format!("deficit/{name}/s={s}"), r.deficit, serde_json::to_value(&r).unwrap_or(Value::Null)));
        }
        let ball = shapes::ball(&grid, PI);
        let r = isoperimetric_deficit_named(&ball, s, "disk")?;
        out.push(case(
            format!("deficit/disk/s={s}"),
            1e-3 * r.ball_perimeter - r.deficit.abs(),
            serde_json::to_value(&r).unwrap_or(Value::Null),
        ));
    }
    Ok(out)
}

/// |Ω|^{sp/N} λ₁ for one shape.
fn scaled_eigenvalue(shape: &IndicatorSet, s: f64, p: f64) -> Result<f64> {
    let lambda = if p == 2.0 {
        first_eigenpair(&assemble_stiffness(shape, s)?, 1e-8)?.lambda1
    } else {
        rayleigh_descent_p(shape, s, p, 1e-6)?.lambda1
    };
    let n = shape.grid().dim() as f64;
    Ok(crate::grid::measure(shape).powf(s * p / n) * lambda)
}

fn faber_krahn() -> Result<Vec<CaseRecord>> {
    let mut out = Vec::new();
    let configs: Vec<(f64, f64, f64)> =
        ORDERS.iter().map(|&s| (s, 2.0, 1.0 / 32.0)).chain([(0.3, 3.0, 1.0 / 16.0), (0.5, 3.0, 1.0 / 16.0)]).collect();
    for (s, p, h) in configs {
        let n = (3.0 / h).round() as usize;
        let grid = Grid::centered(&[n, n], h, false)?;
        let disk = scaled_eigenvalue(&shapes::ball(&grid, PI), s, p)?;
        for name in ["square", "rect", "lshape"] {
            let v = scaled_eigenvalue(&shapes::by_name(&grid, name, PI)?, s, p)?;
            out.push(case(
                format!("faber-krahn/p={p}/s={s}/{name}"),
                v - disk,
                json!({"h": h, "scaled_lambda": v, "scaled_lambda_disk": disk}),
            ));
        }
    }
    Ok(out)
}

/// Ω = (−1.5, −0.75) ∪ (0, 1) on [−2, 2] with h = 1/128.
pub fn talenti_domain() -> Result<IndicatorSet> {
    let grid = Grid::new(&[512], &[-2.0], 1.0 / 128.0, false)?;
    Ok(IndicatorSet::from_predicate(grid, |x| (x[0] > -1.5 && x[0] < -0.75) || (x[0] > 0.0 && x[0] < 1.0)))
}

fn talenti() -> Result<Vec<CaseRecord>> {
    let omega = talenti_domain()?;
    let f = GridFunction::from_fn(omega.grid().clone(), |_| 1.0)?;
    let mut out = Vec::new();
    for s in ORDERS {
        let r = talenti_pair(&omega, &f, s)?;
        let c = &r.concentration;
        let h = omega.grid().spacing();
        out.push(case(
            format!("concentration/s={s}"),
            c.worst_margin + h,
            json!({"worst_margin": c.worst_margin, "slack": h, "radii": c.radii, "lhs": c.lhs, "rhs": c.rhs}),
        ));
        out.push(case(
            format!("seminorm/s={s}"),
            r.seminorm_v * (1.0 + 1e-3) - r.seminorm_u,
            json!({"seminorm_u": r.seminorm_u, "seminorm_v": r.seminorm_v}),
        ));
    }
    Ok(out)
}

fn operator_equivalence() -> Result<Vec<CaseRecord>> {
    let grid = Grid::new(&[512], &[0.0], 2.0 * PI / 512.0, true)?;
    let t_grid = LogGrid::default();
    let mut out = Vec::new();
    for s in ORDERS {
        for k in 1..=8 {
            let u = GridFunction::from_fn(grid.clone(), |x| (k as f64 * x[0]).cos())?;
            let r = compare_realizations(&u, s, &t_grid)?;
            let worst = r.singular_vs_spectral.max(r.bochner_vs_spectral);
            out.push(case(format!("cos/s={s}/k={k}"), 1e-3 - worst, serde_json::to_value(&r).unwrap_or(Value::Null)));
        }
    }
    Ok(out)
}

/// Smooth data for the seminorm-recovery check on [0, 2π).
pub fn smooth_periodic_data(grid: &Grid) -> Vec<GridFunction> {
    let fs: [fn(f64) -> f64; 5] = [
        |x| x.cos(),
        |x| (2.0 * x).cos() + x.sin(),
        |x| x.cos().exp(),
        |x| (-2.0 * (x - 3.0).powi(2)).exp(),
        |x| (1..=4).map(|k| (k as f64 * x + 0.3 * k as f64).cos() / (k * k) as f64).sum(),
    ];
    fs.iter().map(|f| GridFunction::from_fn(grid.clone(), |x| f(x[0])).expect("finite")).collect()
}

fn extension_chain(seed: u64) -> Result<Vec<CaseRecord>> {
    let grid = Grid::new(&[128], &[0.0], 2.0 * PI / 128.0, true)?;
    let mesh = ExtensionMesh::default();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![
        ("symmetric", GridFunction::from_fn(grid.clone(), |x| (-(x[0] - PI).powi(2)).exp())?),
        ("two-bump", GridFunction::from_fn(grid.clone(), |x| f64::from(u8::from((x[0] > 0.5 && x[0] < 1.5) || (x[0] > 3.0 && x[0] < 4.0))))?),
        ("exp-cos", GridFunction::from_fn(grid.clone(), |x| x[0].cos().exp())?),
    ];
    for i in 0..3 {
        data.push((["random-0", "random-1", "random-2"][i], random_step_function(&grid, 8, &mut rng, i % 2 == 0)));
    }
    for s in ORDERS {
        for (name, u) in &data {
            let r = partial_symmetrization_experiment(u, s, &mesh)?;
            let total_u = r.i1_u + r.i2_u;
            let total_s = r.i1_ustar + r.i2_ustar;
            let slack = 1e-6;
            let margin = [
                r.i1_u * (1.0 + slack) - r.i1_ustar,
                r.i2_u * (1.0 + slack) - r.i2_ustar,
                total_s * (1.0 + slack) - r.energy_v,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            let mut d = serde_json::to_value(&r).unwrap_or(Value::Null);
            d["total_u"] = json!(total_u);
            if *name == "symmetric" {
                // all links are equalities on a fixed point
                let spread = (total_u - r.energy_v).abs().max((total_u - total_s).abs()) / total_u;
                out.push(case(format!("chain/s={s}/{name}/equality"), 1e-8 - spread, json!({"relative_spread": spread})));
            }
            if margin < 0.0 {
                d["values"] = json!(u.values());
            }
            out.push(case(format!("chain/s={s}/{name}"), margin, d));
        }
        let params = FracParams::new(1, s, 2.0)?;
        let kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
        let ratios: Vec<f64> = smooth_periodic_data(&grid)
            .iter()
            .map(|u| {
                let e = extension_energies(&extend_cs(u, s, &mesh)?).total();
                Ok(e / gagliardo_seminorm(u, &params, &kernel)?.energy)
            })
            .collect::<Result<_>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let spread = hi / lo - 1.0;
        out.push(case(
            format!("recovery/s={s}"),
            0.02 - spread,
            json!({"ratios": ratios, "spread": spread, "calibration": calibrate_cs(&grid, s, &mesh)?}),
        ));
    }
    // s = ½, cos x: U = e^{−y} cos x
    let u = GridFunction::from_fn(grid.clone(), |x| x[0].cos())?;
    let field = extend_cs(&u, 0.5, &ExtensionMesh { m: 200, y_max: Some(12.0), ..Default::default() })?;
    let mut err: f64 = 0.0;
    for j in 0..field.rows() {
        let y = field.y_nodes[j];
        for (i, v) in field.row(j).iter().enumerate() {
            err = err.max((v - (-y).exp() * grid.coord(0, i).cos()).abs());
        }
    }
    out.push(case("closed-form/s=0.5".into(), 1e-2 - err, json!({"max_error": err})));
    Ok(out)
}

fn stability_slope() -> Result<Vec<CaseRecord>> {
    let grid = Grid::centered(&[192, 192], 1.0 / 64.0, false)?;
    let scan = stability_scan(Family::Ellipse { max_eccentricity: 0.6 }, &grid, PI, 12, 0.5)?;
    let mut out: Vec<CaseRecord> = scan
        .records
        .iter()
        .map(|r| {
            case(
                format!("deficit/{}", r.shape_id),
                r.relative_deficit + 1e-3,
                serde_json::to_value(r).unwrap_or(Value::Null),
            )
        })
        .collect();
    let margin = match scan.slope {
        Some(k) => (k - 1.7).min(2.3 - k),
        None => -1.0,
    };
    out.push(case(
        "slope".into(),
        margin,
        json!({"slope": scan.slope, "fit_points": scan.fit_points, "note": scan.note}),
    ));
    Ok(out)
}

fn riesz_probe() -> Result<Vec<CaseRecord>> {
    let grid = Grid::new(&[512], &[-8.0], 1.0 / 32.0, false)?;
    let fs: [fn(f64) -> f64; 5] = [
        |x| (-x * x).exp(),
        |x| (-2.0 * (x - 1.0).powi(2)).exp() + 0.5 * (-(x + 1.5).powi(2)).exp(),
        |x| if x.abs() < 2.0 { (1.0 - x * x / 4.0).powi(3) } else { 0.0 },
        |x| x * (-x * x).exp() + (-x * x / 2.0).exp(),
        |x| if x.abs() < 6.0 { (1.0 - (x / 6.0).powi(2)).powi(3) / (1.0 + x.powi(4)) } else { 0.0 },
    ];
    let data: Vec<GridFunction> =
        fs.iter().map(|f| GridFunction::from_fn(grid.clone(), |x| f(x[0]))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for s in ORDERS {
        let mu = calibrate_riesz_mu(&data[0], s)?;
        let opts = RieszOptions { mu, ..Default::default() };
        let params = FracParams::new(1, s, 2.0)?;
        let kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
        let ratios: Vec<f64> = data
            .iter()
            .map(|u| Ok(riesz_dirichlet_energy(u, s, 2.0, &opts)? / gagliardo_seminorm(u, &params, &kernel)?.energy))
            .collect::<Result<_>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let mut c = case(format!("p=2/s={s}"), 0.02 - (hi / lo - 1.0), json!({"mu": mu, "ratios": ratios}));
        c.informational = true;
        out.push(c);
    }
    // p ≠ 2: energies of the two-bump u and u*, side by side
    let bump = GridFunction::from_fn(grid.clone(), |x| f64::from(u8::from((0.0..1.0).contains(&x[0]) || (2.0..3.0).contains(&x[0]))))?;
    let star = schwarz_function(&bump)?;
    let mu = calibrate_riesz_mu(&data[0], 0.5)?;
    let opts = RieszOptions { mu, ..Default::default() };
    let eu = riesz_dirichlet_energy(&bump, 0.5, 3.0, &opts)?;
    let es = riesz_dirichlet_energy(&star, 0.5, 3.0, &opts)?;
    let mut c = case("p=3/s=0.5/two-bump".into(), eu - es, json!({"energy_u": eu, "energy_ustar": es, "mu": mu}));
    c.informational = true;
    out.push(c);
    Ok(out)
}
