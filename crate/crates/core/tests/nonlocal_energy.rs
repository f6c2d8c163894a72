use std::f64::consts::PI;

use fracsym::energy::{
    calibrate_riesz_mu, fractional_perimeter, fractional_perimeter_with, gagliardo_seminorm, heat_kernel_integral,
    heat_slice_energy, riesz_dirichlet_energy, riesz_fractional_gradient, riesz_triple, subordinated_seminorm,
    LogGrid, RieszOptions,
};
use fracsym::geometry::shapes;
use fracsym::rearrange::schwarz_function;
use fracsym::{FracParams, Grid, GridFunction, IndicatorSet, KernelSpec, NearField, Norm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn interval_exact(length: f64, s: f64) -> f64 {
    2.0 * length.powf(1.0 - s) / (s * (1.0 - s))
}

fn fine_line() -> Grid {
    Grid::new(&[1024], &[-1.0], 1.0 / 256.0, false).unwrap()
}

fn two_bumps(grid: &Grid) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| f64::from(u8::from((0.0..1.0).contains(&x[0]) || (2.0..3.0).contains(&x[0]))))
        .unwrap()
}

#[test]
fn interval_perimeter_and_w_s1_seminorm() {
    let e = IndicatorSet::from_predicate(fine_line(), |x| x[0] > 0.0 && x[0] < 2.0);
    let p = fractional_perimeter(&e, 0.5).unwrap();
    let exact = interval_exact(2.0, 0.5);
    assert!((exact - 8.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((p - exact).abs() / exact < 0.01, "{p}");
    let params = FracParams::new(1, 0.5, 1.0).unwrap();
    let semi = gagliardo_seminorm(&e.indicator(), &params, &KernelSpec::isotropic()).unwrap();
    assert!((semi.value - 2.0 * exact).abs() / (2.0 * exact) < 0.01);
    assert!((semi.value - 2.0 * p).abs() < 1e-9 * p);
    assert!(semi.exterior_fraction > 0.0 && semi.near_diagonal_fraction > 0.0);
}

#[test]
fn perimeter_is_translation_invariant() {
    let g = Grid::new(&[2048], &[-1.0], 1.0 / 256.0, false).unwrap();
    let a = fractional_perimeter(&IndicatorSet::from_predicate(g.clone(), |x| x[0] > 0.0 && x[0] < 2.0), 0.5).unwrap();
    let b = fractional_perimeter(&IndicatorSet::from_predicate(g, |x| x[0] > 5.0 && x[0] < 7.0), 0.5).unwrap();
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn square_perimeter_exceeds_disk_perimeter() {
    let g = Grid::centered(&[192, 192], 1.0 / 64.0, false).unwrap();
    let disk = fractional_perimeter(&shapes::ball(&g, PI), 0.5).unwrap();
    let square = fractional_perimeter(&shapes::by_name(&g, "square", PI).unwrap(), 0.5).unwrap();
    assert!(square > disk, "{square} vs {disk}");
}

#[test]
fn scaling_identity() {
    // on the rescaled grid the identity is exact; at fixed h it holds to discretization error
    let s = 0.3;
    let p = 2.0;
    let params = FracParams::new(1, s, p).unwrap();
    let g = Grid::new(&[512], &[-4.0], 1.0 / 64.0, false).unwrap();
    let u = GridFunction::from_fn(g.clone(), |x| (-(x[0] * x[0])).exp() * (1.0 + 0.5 * x[0])).unwrap();
    let kernel = KernelSpec::isotropic();
    let base = gagliardo_seminorm(&u, &params, &kernel).unwrap().energy;
    let wide = GridFunction::new(g.rescaled(2.0).unwrap(), u.values().to_vec()).unwrap();
    let ratio = gagliardo_seminorm(&wide, &params, &kernel).unwrap().energy / base;
    let expected = 2f64.powf(1.0 - s * p);
    assert!((ratio / expected - 1.0).abs() < 1e-10);

    let big = Grid::new(&[1024], &[-8.0], 1.0 / 64.0, false).unwrap();
    let dilated = GridFunction::from_fn(big, |x| {
        let y = x[0] / 2.0;
        (-(y * y)).exp() * (1.0 + 0.5 * y)
    })
    .unwrap();
    let smooth = KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let ratio_fixed_h = gagliardo_seminorm(&dilated, &params, &smooth).unwrap().energy
        / gagliardo_seminorm(&u, &params, &smooth).unwrap().energy;
    assert!((ratio_fixed_h / expected - 1.0).abs() < 0.01, "{ratio_fixed_h} vs {expected}");
}

#[test]
fn two_bumps_lose_energy_under_rearrangement() {
    let g = Grid::new(&[512], &[-2.0], 1.0 / 64.0, false).unwrap();
    let u = two_bumps(&g);
    let params = FracParams::new(1, 0.4, 2.0).unwrap();
    let kernel = KernelSpec::isotropic();
    let a = gagliardo_seminorm(&u, &params, &kernel).unwrap().value;
    let b = gagliardo_seminorm(&schwarz_function(&u).unwrap(), &params, &kernel).unwrap().value;
    assert!(b < a * (1.0 - 1e-3), "{b} vs {a}");
}

#[test]
fn zero_function_has_zero_energy() {
    let g = Grid::centered(&[32, 32], 1.0 / 8.0, false).unwrap();
    let zero = GridFunction::zeros(g.clone());
    let params = FracParams::new(2, 0.5, 2.0).unwrap();
    assert_eq!(gagliardo_seminorm(&zero, &params, &KernelSpec::isotropic()).unwrap().energy, 0.0);
    assert_eq!(subordinated_seminorm(&zero, &params, &LogGrid::default(), 1e-2).unwrap().value, 0.0);
    assert_eq!(heat_slice_energy(&zero, 1.0, 2.0).unwrap(), 0.0);
    assert_eq!(riesz_dirichlet_energy(&zero, 0.5, 2.0, &RieszOptions::default()).unwrap(), 0.0);
    let grad = riesz_fractional_gradient(&zero, 0.5, &RieszOptions::default()).unwrap();
    assert!(grad.components.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn invalid_orders_are_rejected() {
    let e = IndicatorSet::from_predicate(fine_line(), |x| x[0] > 0.0 && x[0] < 2.0);
    for s in [0.0, 1.0, -0.5, f64::NAN] {
        assert!(fractional_perimeter(&e, s).is_err());
    }
    let planar = FracParams::new(2, 0.5, 2.0).unwrap();
    assert!(gagliardo_seminorm(&e.indicator(), &planar, &KernelSpec::isotropic()).is_err());
}

fn heat_slice_oracle(t: f64) -> f64 {
    // I_t[χ_(0,1)] = 2√(π/t) ∫₀¹ erfc(√t x) dx, by 10⁴-point midpoint quadrature
    let n = 10_000;
    let sum: f64 = (0..n).map(|i| statrs::function::erf::erfc(t.sqrt() * (i as f64 + 0.5) / n as f64)).sum();
    2.0 * (PI / t).sqrt() * sum / n as f64
}

#[test]
fn heat_slice_matches_quadrature_and_decreases_under_rearrangement() {
    let g = Grid::new(&[1024], &[-2.0], 1.0 / 128.0, false).unwrap();
    let chi = GridFunction::from_fn(g.clone(), |x| f64::from(u8::from(x[0] > 0.0 && x[0] < 1.0))).unwrap();
    let value = heat_slice_energy(&chi, 1.0, 2.0).unwrap();
    let oracle = heat_slice_oracle(1.0);
    assert!((value / oracle - 1.0).abs() < 5e-3, "{value} vs {oracle}");

    let u = two_bumps(&g);
    let us = schwarz_function(&u).unwrap();
    for t in [0.5, 1.0, 2.0] {
        assert!(heat_slice_energy(&u, t, 2.0).unwrap() >= heat_slice_energy(&us, t, 2.0).unwrap());
    }
}

#[test]
fn subordinated_seminorm_matches_direct_double_sum() {
    let (s, p) = (0.5, 2.0);
    let h = 1.0 / 32.0;
    let g = Grid::new(&[256], &[-4.0], h, false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bumps: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(-0.8..0.8), rng.gen_range(0.2..0.5), rng.gen_range(0.5..1.5))).collect();
    let u = GridFunction::from_fn(g.clone(), |x| bumps.iter().map(|&(c, w, a)| a * (-((x[0] - c) / w).powi(2)).exp()).sum())
        .unwrap();
    let v = u.values();
    let xs: Vec<f64> = (0..v.len()).map(|i| g.coord(0, i)).collect();
    let e = 1.0 + s * p;
    let mut direct = 0.0;
    for i in 0..v.len() {
        for j in 0..v.len() {
            if i != j {
                direct += (v[i] - v[j]).powi(2) / (xs[i] - xs[j]).abs().powf(e) * h * h;
            }
        }
        // pairs with one point beyond the box, both orders
        direct += 2.0 * v[i] * v[i] * h * (1.0 / (4.0 - xs[i]) + 1.0 / (xs[i] + 4.0));
    }
    let params = FracParams::new(1, s, p).unwrap();
    let sub = subordinated_seminorm(&u, &params, &LogGrid::for_grid(&g), 1e-2).unwrap();
    assert!((sub.energy / direct - 1.0).abs() < 1e-2, "{} vs {direct}", sub.energy);
    let midpoint = gagliardo_seminorm(&u, &params, &KernelSpec::isotropic().with_near_field(NearField::Midpoint)).unwrap();
    assert!((midpoint.energy / direct - 1.0).abs() < 1e-3);
}

#[test]
fn t_integral_has_the_expected_power_law() {
    let t_grid = LogGrid::default();
    for (dim, s, p) in [(1usize, 0.5, 2.0), (2, 0.3, 3.0), (1, 0.7, 1.0)] {
        let pts: Vec<(f64, f64)> = (0..=16)
            .map(|i| {
                let z = 0.5 * 8f64.powf(i as f64 / 16.0);
                (z.ln(), heat_kernel_integral(z, dim, s, p, &t_grid).unwrap().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
        let slope = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum::<f64>() / pts.iter().map(|q| (q.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + dim as f64 + s * p).abs() < 1e-2, "slope {slope}");
    }
}

#[test]
fn riesz_rearrangement_inequality() {
    let g = Grid::new(&[320], &[-5.0], 1.0 / 32.0, false).unwrap();
    let pair = GridFunction::from_fn(g.clone(), |x| f64::from(u8::from((0.0..1.0).contains(&x[0]) || (3.0..4.0).contains(&x[0]))))
        .unwrap();
    let kernel = GridFunction::from_fn(g.difference_grid(), |z| (-(z[0] * z[0])).exp()).unwrap();
    let star = schwarz_function(&pair).unwrap();
    let a = riesz_triple(&pair, &kernel, &pair).unwrap();
    let b = riesz_triple(&star, &kernel, &star).unwrap();
    assert!(b > a * (1.0 + 1e-3), "{b} vs {a}");
    // already symmetric decreasing
    let again = schwarz_function(&star).unwrap();
    assert_eq!(riesz_triple(&again, &kernel, &again).unwrap(), b);
    let shifted = pair.roll(&[-17]);
    let c = riesz_triple(&shifted, &kernel, &shifted).unwrap();
    assert!((c - a).abs() <= 1e-12 * a);
}

#[test]
fn riesz_gradient_energy_is_proportional_at_p_two() {
    let g = Grid::new(&[512], &[-8.0], 1.0 / 32.0, false).unwrap();
    let data: Vec<GridFunction> = [
        |x: f64| (-x * x).exp(),
        |x: f64| (-2.0 * (x - 1.0).powi(2)).exp() + 0.5 * (-(x + 1.5).powi(2)).exp(),
        |x: f64| if x.abs() < 2.0 { (1.0 - x * x / 4.0).powi(3) } else { 0.0 },
        |x: f64| x * (-x * x).exp() + (-x * x / 2.0).exp(),
        |x: f64| (-(x * x) / 3.0).exp() * (2.0 * x).cos().powi(2),
    ]
    .iter()
    .map(|f| GridFunction::from_fn(g.clone(), |x| f(x[0])).unwrap())
    .collect();
    let s = 0.5;
    let opts = RieszOptions { mu: calibrate_riesz_mu(&data[0], s).unwrap(), ..Default::default() };
    let params = FracParams::new(1, s, 2.0).unwrap();
    let kernel = KernelSpec::isotropic().with_near_field(NearField::Smooth);
    let ratios: Vec<f64> = data
        .iter()
        .map(|u| riesz_dirichlet_energy(u, s, 2.0, &opts).unwrap() / gagliardo_seminorm(u, &params, &kernel).unwrap().energy)
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo - 1.0 < 0.02, "{ratios:?}");
    assert!((ratios[0] - 1.0).abs() < 1e-9);
}

#[test]
fn riesz_probe_is_deterministic() {
    let g = Grid::new(&[512], &[-8.0], 1.0 / 32.0, false).unwrap();
    let u = two_bumps(&g);
    let star = schwarz_function(&u).unwrap();
    let opts = RieszOptions::default();
    let first = (riesz_dirichlet_energy(&u, 0.5, 3.0, &opts).unwrap(), riesz_dirichlet_energy(&star, 0.5, 3.0, &opts).unwrap());
    let second = (riesz_dirichlet_energy(&u, 0.5, 3.0, &opts).unwrap(), riesz_dirichlet_energy(&star, 0.5, 3.0, &opts).unwrap());
    assert_eq!(first.0.to_bits(), second.0.to_bits());
    assert_eq!(first.1.to_bits(), second.1.to_bits());
}

#[test]
fn kernel_norms_are_homogeneous_and_positive() {
    let norms = [Norm::Euclidean, Norm::Lq(1.0), Norm::Lq(3.0), Norm::Lq(f64::INFINITY), Norm::Matrix(vec![2.0, 0.5, 0.5, 1.0])];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for norm in &norms {
        let spec = KernelSpec::anisotropic(norm.clone());
        for _ in 0..20 {
            let z = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let lambda: f64 = rng.gen_range(-4.0..4.0);
            let scaled = [lambda * z[0], lambda * z[1]];
            let (a, b) = (norm.eval(&z), norm.eval(&scaled));
            assert!((b - lambda.abs() * a).abs() <= 1e-12 * b.max(1e-300));
            assert!(spec.value(&z, 2.5) > 0.0);
        }
    }
}

#[test]
fn anisotropic_kernel_sees_orientation() {
    let g = Grid::centered(&[96, 96], 1.0 / 32.0, false).unwrap();
    let along0 = shapes::rectangle(&g, shapes::cells_for(&g, PI), 2.0);
    let along1 = IndicatorSet::new(
        g.clone(),
        (0..g.len())
            .map(|i| {
                let [a, b] = g.unravel(i);
                along0.mask()[g.ravel(&[b, a])]
            })
            .collect(),
    )
    .unwrap();
    let euclid = KernelSpec::isotropic();
    let a = fractional_perimeter_with(&along0, 0.5, &euclid).unwrap();
    let b = fractional_perimeter_with(&along1, 0.5, &euclid).unwrap();
    assert!((a - b).abs() <= 1e-12 * a);
    let stretched = KernelSpec::anisotropic(Norm::Matrix(vec![4.0, 0.0, 0.0, 1.0]));
    let a = fractional_perimeter_with(&along0, 0.5, &stretched).unwrap();
    let b = fractional_perimeter_with(&along1, 0.5, &stretched).unwrap();
    assert!((a / b - 1.0).abs() > 0.01, "{a} vs {b}");

    let disk = shapes::ball(&g, PI);
    let l2 = KernelSpec::anisotropic(Norm::Lq(2.0));
    let a = fractional_perimeter_with(&disk, 0.5, &l2).unwrap();
    let b = fractional_perimeter_with(&disk, 0.5, &euclid).unwrap();
    assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rearrangement_never_increases_energy(
        values in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..3.0], 24),
        s in 0.1f64..0.9,
        p in 1.0f64..3.5,
    ) {
        prop_assume!(values.iter().any(|&v| v > 0.0));
        let g = Grid::centered(&[24], 1.0 / 8.0, false).unwrap();
        let u = GridFunction::new(g, values).unwrap();
        let params = FracParams::new(1, s, p).unwrap();
        let kernel = KernelSpec::isotropic();
        let a = gagliardo_seminorm(&u, &params, &kernel).unwrap().value;
        let b = gagliardo_seminorm(&schwarz_function(&u).unwrap(), &params, &kernel).unwrap().value;
        prop_assert!(b <= a * (1.0 + 1e-9));
    }

    #[test]
    fn seminorm_is_homogeneous_and_shift_free(
        values in prop::collection::vec(-2.0f64..2.0, 16),
        c in 0.1f64..5.0,
        shift in -3.0f64..3.0,
        s in 0.1f64..0.9,
    ) {
        let g = Grid::new(&[16], &[0.0], 0.25, true).unwrap();
        let params = FracParams::new(1, s, 2.0).unwrap();
        let kernel = KernelSpec::isotropic();
        let u = GridFunction::new(g.clone(), values.clone()).unwrap();
        let v = GridFunction::new(g, values.iter().map(|x| c * x + shift).collect()).unwrap();
        let a = gagliardo_seminorm(&u, &params, &kernel).unwrap().value;
        let b = gagliardo_seminorm(&v, &params, &kernel).unwrap().value;
        prop_assert!((b - c * a).abs() <= 1e-10 * (1.0 + c * a));
    }
}
