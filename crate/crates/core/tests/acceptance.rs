//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values come from closed forms and quadratures computed
//! here, independent of the library code paths they check.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fracsym::energy::{
    calibrate_riesz_mu, fractional_perimeter, gagliardo_seminorm, heat_kernel_integral, riesz_dirichlet_energy,
    RieszOptions,
};
use fracsym::extension::{extend_cs, extension_energies, partial_symmetrization_experiment, ExtensionMesh};
use fracsym::fourier::{
    bochner_apply, fractional_laplacian_singular, fractional_laplacian_spectral, relative_l2,
};
use fracsym::geometry::{shapes, stability_scan, Family, FIT_WINDOW};
use fracsym::quadrature::LogGrid;
use fracsym::rearrange::{distribution_function, schwarz_function};
use fracsym::spectral::{assemble_stiffness, first_eigenpair, sobolev_quotient, talenti_pair};
use fracsym::suites::{dominance_input, random_step_function, smooth_periodic_data, talenti_domain, RANDOM_CASES};
use fracsym::{lp_norm, measure, FracParams, Grid, GridFunction, KernelSpec, NearField, Result};

const ORDERS: [f64; 3] = [0.3, 0.5, 0.7];
const POWERS: [f64; 3] = [1.0, 2.0, 3.0];
const SEED: u64 = 20240607;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn within_time(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi / lo - 1.0
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Adaptive Simpson on [a, b].
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn perimeter_of_interval() -> Result<Outcome> {
    let s = 0.5;
    let length: f64 = 2.0;
    let exact = 2.0 * length.powf(1.0 - s) / (s * (1.0 - s));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("single-thread pool");
    let start = Instant::now();
    let value = pool.install(|| {
        let line = Grid::new(&[1024], &[-1.0], 1.0 / 256.0, false)?;
        let interval = fracsym::IndicatorSet::from_predicate(line, |x| x[0] > 0.0 && x[0] < length);
        fractional_perimeter(&interval, s)
    })?;
    let elapsed = start.elapsed();
    let rel = (value - exact).abs() / exact;
    outcome(
        rel <= 0.01 && within_time(elapsed, 10.0) && (exact - 8.0 * 2f64.sqrt()).abs() < 1e-12,
        format!("P = {value:.6}, exact {exact:.6}, rel {rel:.2e}, {:.2} s on one thread", elapsed.as_secs_f64()),
    )
}

fn inputs(dim: usize) -> Result<Vec<(GridFunction, GridFunction)>> {
    (0..RANDOM_CASES)
        .map(|i| {
            let u = dominance_input(dim, SEED, i);
            let us = schwarz_function(&u)?;
            Ok((u, us))
        })
        .collect()
}

fn dominance() -> Result<Outcome> {
    let start = Instant::now();
    let kernel = KernelSpec::isotropic();
    let mut violations = 0;
    let mut total = 0;
    let mut worst_fixed: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for dim in [1, 2] {
        let data = inputs(dim)?;
        for s in ORDERS {
            for p in POWERS {
                let params = FracParams::new(dim, s, p)?;
                let rows: Vec<(f64, f64)> = data
                    .par_iter()
                    .map(|(u, us)| Ok((gagliardo_seminorm(u, &params, &kernel)?.value, gagliardo_seminorm(us, &params, &kernel)?.value)))
                    .collect::<Result<_>>()?;
                for (a, b) in rows {
                    total += 1;
                    worst_ratio = worst_ratio.max(b / a);
                    if b > a * (1.0 + 1e-6) {
                        violations += 1;
                    }
                }
                for (_, us) in data.iter().take(10) {
                    let again = schwarz_function(us)?;
                    let a = gagliardo_seminorm(us, &params, &kernel)?.value;
                    let b = gagliardo_seminorm(&again, &params, &kernel)?.value;
                    worst_fixed = worst_fixed.max((a - b).abs() / a);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && worst_fixed <= 1e-12 && within_time(elapsed, 300.0),
        format!(
            "{violations}/{total} violations, max [u*]/[u] = {worst_ratio:.6}, fixed-point spread {worst_fixed:.1e}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn conservation() -> Result<Outcome> {
    let mut functions: Vec<GridFunction> = Vec::new();
    for dim in [1, 2] {
        functions.extend(inputs(dim)?.into_iter().map(|(u, _)| u));
    }
    let torus = Grid::new(&[128], &[0.0], 2.0 * PI / 128.0, true)?;
    functions.extend(smooth_periodic_data(&torus).into_iter().map(|u| u.map(|v| v.abs())).collect::<Result<Vec<_>>>()?);
    let mut worst: f64 = 0.0;
    let mut permutation = true;
    for u in &functions {
        let us = schwarz_function(u)?;
        let mut a = u.values().to_vec();
        let mut b = us.values().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        permutation &= a == b;
        for p in [1.0, 2.0, 3.0, 7.5, f64::INFINITY] {
            let (x, y) = (lp_norm(u, p)?, lp_norm(&us, p)?);
            worst = worst.max((x - y).abs() / x.max(f64::MIN_POSITIVE));
        }
        let vol = u.grid().cell_volume();
        for &t in a.iter().step_by(7) {
            let expected = a.iter().filter(|&&v| v > t).count() as f64 * vol;
            for m in [distribution_function(u, t)?, distribution_function(&us, t)?] {
                worst = worst.max((m - expected).abs() / expected.max(vol));
            }
        }
    }
    outcome(
        permutation && worst <= 1e-12,
        format!("{} functions, values permuted: {permutation}, worst relative drift {worst:.1e}", functions.len()),
    )
}

fn operator_equivalence() -> Result<Outcome> {
    let grid = Grid::new(&[512], &[0.0], 2.0 * PI / 512.0, true)?;
    let t_grid = LogGrid::default();
    let (mut singular, mut bochner, mut exact): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for s in ORDERS {
        for k in 1..=8 {
            let kf = k as f64;
            let u = GridFunction::from_fn(grid.clone(), |x| (kf * x[0]).cos())?;
            let reference = GridFunction::from_fn(grid.clone(), |x| kf.powf(2.0 * s) * (kf * x[0]).cos())?;
            let spectral = fractional_laplacian_spectral(&u, s)?;
            exact = exact.max(relative_l2(&spectral, &reference));
            singular = singular.max(relative_l2(&fractional_laplacian_singular(&u, s)?, &spectral));
            bochner = bochner.max(relative_l2(&bochner_apply(&u, s, &t_grid, 1e-3)?.field, &spectral));
        }
    }
    outcome(
        singular <= 1e-3 && bochner <= 1e-3 && exact <= 1e-10,
        format!("singular {singular:.2e}, Bochner {bochner:.2e}, spectral vs k^(2s) {exact:.1e}"),
    )
}

fn subordination() -> Result<Outcome> {
    let t_grid = LogGrid::default();
    let (mut worst_slope, mut worst_const, mut worst_oracle): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for dim in [1usize, 2] {
        let n = dim as f64;
        for s in ORDERS {
            for p in POWERS {
                let sp = s * p;
                let gamma_form = 2f64.powf(sp) * statrs::function::gamma::gamma((n + sp) / 2.0) / PI.powf(n / 2.0);
                // ∫ G_t(1) t^{−1−sp/2} dt with t = e^τ
                let integrand =
                    |tau: f64| { let t = tau.exp(); (4.0 * PI * t).powf(-n / 2.0) * (-1.0 / (4.0 * t)).exp() * t.powf(-sp / 2.0) };
                let oracle = adaptive_simpson(&integrand, -12.0, 60.0, 1e-13);
                worst_oracle = worst_oracle.max((oracle / gamma_form - 1.0).abs());
                let pts: Vec<(f64, f64)> = (0..=20)
                    .map(|i| {
                        let z = 10f64.powf(-1.0 + 0.1 * i as f64);
                        let v = heat_kernel_integral(z, dim, s, p, &t_grid)?;
                        Ok((z.ln(), v.ln()))
                    })
                    .collect::<Result<_>>()?;
                for &(lz, lv) in &pts {
                    let c = lv.exp() * lz.exp().powf(n + sp);
                    worst_const = worst_const.max((c / gamma_form - 1.0).abs());
                }
                worst_slope = worst_slope.max((slope(&pts) + n + sp).abs());
            }
        }
    }
    outcome(
        worst_slope <= 1e-2 && worst_const <= 5e-3 && worst_oracle <= 5e-3,
        format!(
            "slope error {worst_slope:.1e}, constant vs Gamma form {worst_const:.1e}, Gamma form vs quadrature {worst_oracle:.1e}"
        ),
    )
}

fn scaled_lambda(half_width: f64, h: f64, area: f64, shape: &str) -> Result<f64> {
    let n = (2.0 * half_width / h).round() as usize;
    let grid = Grid::centered(&[n, n], h, false)?;
    let omega = shapes::by_name(&grid, shape, area)?;
    let lambda = first_eigenpair(&assemble_stiffness(&omega, 0.5)?, 1e-8)?.lambda1;
    Ok(measure(&omega).sqrt() * lambda)
}

fn faber_krahn() -> Result<Outcome> {
    let start = Instant::now();
    let h = 1.0 / 64.0;
    let disk = scaled_lambda(1.5, h, PI, "disk")?;
    let square = scaled_lambda(1.5, h, PI, "square")?;
    // radius 1 → radius 2 at the same spacing
    let dilated = scaled_lambda(2.5, h, 4.0 * PI, "disk")?;
    let rel = (dilated - disk).abs() / disk;
    let elapsed = start.elapsed();
    outcome(
        disk < square && rel <= 0.01 && within_time(elapsed, 120.0),
        format!(
            "|Ω|^(1/2)λ₁: disk {disk:.4}, square {square:.4}, dilated disk {dilated:.4} (rel {rel:.2e}), {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

/// ∫ over the ball of measure k·h of the symmetric-decreasing rearrangement.
fn concentration(u: &GridFunction) -> Vec<f64> {
    let mut v = u.values().to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let vol = u.grid().cell_volume();
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x * vol;
            Some(*acc)
        })
        .collect()
}

fn talenti() -> Result<Outcome> {
    let omega = talenti_domain()?;
    let h = omega.grid().spacing();
    let f = GridFunction::from_fn(omega.grid().clone(), |_| 1.0)?;
    let report = talenti_pair(&omega, &f, 0.5)?;
    let (cu, cv) = (concentration(&report.u), concentration(&report.v));
    let worst = cu.iter().zip(&cv).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let params = FracParams::new(1, 0.5, 2.0)?;
    let kernel = KernelSpec::isotropic();
    let su = gagliardo_seminorm(&report.u, &params, &kernel)?.value;
    let sv = gagliardo_seminorm(&report.v, &params, &kernel)?.value;
    outcome(
        worst >= -h && su <= sv * (1.0 + 1e-3),
        format!("min over r of ∫v − ∫u* = {worst:.2e} (slack {h:.2e}), [u] = {su:.5}, [v] = {sv:.5}"),
    )
}

fn extension() -> Result<Outcome> {
    let grid = Grid::new(&[128], &[0.0], 2.0 * PI / 128.0, true)?;
    let mesh = ExtensionMesh::default();
    let smooth_kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let mut worst_spread: f64 = 0.0;
    for s in ORDERS {
        let params = FracParams::new(1, s, 2.0)?;
        let ratios: Vec<f64> = smooth_periodic_data(&grid)
            .iter()
            .map(|u| Ok(extension_energies(&extend_cs(u, s, &mesh)?).total() / gagliardo_seminorm(u, &params, &smooth_kernel)?.energy))
            .collect::<Result<_>>()?;
        worst_spread = worst_spread.max(spread(&ratios));
    }
    let u = GridFunction::from_fn(grid.clone(), |x| x[0].cos())?;
    let field = extend_cs(&u, 0.5, &ExtensionMesh { m: 200, y_max: Some(12.0), ..Default::default() })?;
    let mut closed_form: f64 = 0.0;
    for j in 0..field.rows() {
        let y = field.y_nodes[j];
        for (i, v) in field.row(j).iter().enumerate() {
            closed_form = closed_form.max((v - (-y).exp() * grid.coord(0, i).cos()).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut data = vec![
        GridFunction::from_fn(grid.clone(), |x| (-(x[0] - PI).powi(2)).exp())?,
        GridFunction::from_fn(grid.clone(), |x| f64::from(u8::from((x[0] > 0.5 && x[0] < 1.5) || (x[0] > 3.0 && x[0] < 4.0))))?,
        GridFunction::from_fn(grid.clone(), |x| x[0].cos().exp())?,
    ];
    for i in 0..3 {
        data.push(random_step_function(&grid, 8, &mut rng, i % 2 == 0));
    }
    let mut chain_failures = 0;
    let mut chain_cases = 0;
    for s in ORDERS {
        for u in &data {
            let r = partial_symmetrization_experiment(u, s, &mesh)?;
            let (total_u, total_s) = (r.i1_u + r.i2_u, r.i1_ustar + r.i2_ustar);
            chain_cases += 1;
            if total_s > total_u * (1.0 + 1e-6) || r.energy_v > total_s * (1.0 + 1e-6) {
                chain_failures += 1;
            }
        }
    }
    outcome(
        worst_spread <= 0.02 && closed_form <= 1e-2 && chain_failures == 0,
        format!(
            "recovery spread {worst_spread:.2e}, s=1/2 closed-form error {closed_form:.1e}, chain {}/{chain_cases} hold",
            chain_cases - chain_failures
        ),
    )
}

/// Random compactly supported competitor: a step function or a few bumps.
fn competitor(grid: &Grid, rng: &mut ChaCha8Rng, index: usize) -> Result<GridFunction> {
    if index % 2 == 0 {
        return Ok(random_step_function(grid, 8, rng, index % 4 == 0));
    }
    let bumps: Vec<(f64, f64, f64)> =
        (0..rng.gen_range(1..=3)).map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.3..4.0), rng.gen_range(0.1..1.0))).collect();
    GridFunction::from_fn(grid.clone(), |x| {
        bumps
            .iter()
            .map(|&(c, w, a)| {
                let r = ((x[0] - c) / w).abs();
                if r < 1.0 { a * (1.0 - r * r).powi(2) } else { 0.0 }
            })
            .sum()
    })
}

fn sobolev_profile() -> Result<Outcome> {
    let (s, p) = (0.3, 2.0);
    let params = FracParams::new(1, s, p)?;
    let grid = Grid::centered(&[1024], 1.0 / 32.0, false)?;
    let half = grid.extent(0) / 2.0;
    let exponent = -(1.0 - 2.0 * s) / 2.0;
    // lowered by its value at the box edge so the profile vanishes there
    let floor = (1.0 + half * half).powf(exponent);
    let profile = GridFunction::from_fn(grid.clone(), |x| ((1.0 + x[0] * x[0]).powf(exponent) - floor).max(0.0))?;
    let q_profile = sobolev_quotient(&profile, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut best: f64 = 0.0;
    let mut beaten = 0;
    for i in 0..100 {
        let q = sobolev_quotient(&competitor(&grid, &mut rng, i)?, &params)?;
        best = best.max(q);
        if q >= q_profile {
            beaten += 1;
        }
    }
    outcome(beaten == 0, format!("profile quotient {q_profile:.5}, best of 100 competitors {best:.5}"))
}

fn stability() -> Result<Outcome> {
    let start = Instant::now();
    let grid = Grid::centered(&[192, 192], 1.0 / 64.0, false)?;
    let scan = stability_scan(Family::Ellipse { max_eccentricity: 0.6 }, &grid, PI, 12, 0.5)?;
    let min_rel = scan.records.iter().map(|r| r.relative_deficit).fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = scan
        .records
        .iter()
        .filter(|r| r.asymmetry >= FIT_WINDOW.0 && r.asymmetry <= FIT_WINDOW.1 && r.deficit > 0.0)
        .map(|r| (r.asymmetry.ln(), r.deficit.ln()))
        .collect();
    let fitted = if pts.len() >= 2 { slope(&pts) } else { f64::NAN };
    let elapsed = start.elapsed();
    outcome(
        min_rel >= -1e-3 && (1.7..=2.3).contains(&fitted) && within_time(elapsed, 600.0),
        format!(
            "min relative deficit {min_rel:.2e}, slope {fitted:.3} over {} shapes, {:.1} s",
            pts.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn riesz() -> Result<Outcome> {
    let grid = Grid::new(&[512], &[-8.0], 1.0 / 32.0, false)?;
    let fs: [fn(f64) -> f64; 5] = [
        |x| (-x * x).exp(),
        |x| (-2.0 * (x - 1.0).powi(2)).exp() + 0.5 * (-(x + 1.5).powi(2)).exp(),
        |x| if x.abs() < 2.0 { (1.0 - x * x / 4.0).powi(3) } else { 0.0 },
        |x| x * (-x * x).exp() + (-x * x / 2.0).exp(),
        |x| if x.abs() < 6.0 { (1.0 - (x / 6.0).powi(2)).powi(3) / (1.0 + x.powi(4)) } else { 0.0 },
    ];
    let data: Vec<GridFunction> = fs.iter().map(|f| GridFunction::from_fn(grid.clone(), |x| f(x[0]))).collect::<Result<_>>()?;
    let kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let mut worst: f64 = 0.0;
    for s in ORDERS {
        let opts = RieszOptions { mu: calibrate_riesz_mu(&data[0], s)?, ..Default::default() };
        let params = FracParams::new(1, s, 2.0)?;
        let ratios: Vec<f64> = data
            .iter()
            .map(|u| Ok(riesz_dirichlet_energy(u, s, 2.0, &opts)? / gagliardo_seminorm(u, &params, &kernel)?.energy))
            .collect::<Result<_>>()?;
        worst = worst.max(spread(&ratios));
    }
    let bump = GridFunction::from_fn(grid.clone(), |x| f64::from(u8::from((0.0..1.0).contains(&x[0]) || (2.0..3.0).contains(&x[0]))))?;
    let star = schwarz_function(&bump)?;
    let probe = || -> Result<(f64, f64)> {
        let opts = RieszOptions { mu: calibrate_riesz_mu(&data[0], 0.5)?, ..Default::default() };
        Ok((riesz_dirichlet_energy(&bump, 0.5, 3.0, &opts)?, riesz_dirichlet_energy(&star, 0.5, 3.0, &opts)?))
    };
    let (first, second) = (probe()?, probe()?);
    let repeatable = first.0.to_bits() == second.0.to_bits() && first.1.to_bits() == second.1.to_bits();
    outcome(
        worst <= 0.02 && repeatable,
        format!(
            "p=2 ratio spread {worst:.2e}; p=3 energies u {:.5}, u* {:.5} (informational), repeatable: {repeatable}",
            first.0, first.1
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("closed-form interval perimeter", perimeter_of_interval),
        ("Polya-Szego dominance", dominance),
        ("exact rearrangement conservation", conservation),
        ("operator equivalence", operator_equivalence),
        ("subordination scaling", subordination),
        ("Faber-Krahn", faber_krahn),
        ("Talenti comparison", talenti),
        ("extension consistency", extension),
        ("Sobolev optimal profile", sobolev_profile),
        ("quantitative stability", stability),
        ("Riesz-gradient probe", riesz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
