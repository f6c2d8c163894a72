use std::f64::consts::PI;

use fracsym::fourier::{
    bochner_apply, compare_realizations, fractional_laplacian_singular, fractional_laplacian_singular_with,
    fractional_laplacian_spectral, heat_semigroup, inner, relative_l2, SingularRule, SpectralField,
};
use fracsym::quadrature::LogGrid;
use fracsym::{Grid, GridFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn torus(n: usize) -> Grid {
    Grid::new(&[n], &[0.0], 2.0 * PI / n as f64, true).unwrap()
}

fn wave(grid: &Grid, k: f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| (k * x[0]).cos()).unwrap()
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn modes_round_trip_and_are_conjugate_symmetric() {
    let g = Grid::new(&[16, 12], &[0.0, 0.0], 0.4, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = GridFunction::new(g.clone(), (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let field = SpectralField::from_function(&u).unwrap();
    let back = field.to_function();
    assert!(relative_l2(&back, &u) < 1e-10);
    let modes = field.modes();
    for idx in 0..modes.len() {
        let [a, b] = field.index_of(idx);
        let mirror = (0..modes.len()).find(|&j| {
            let [c, d] = field.index_of(j);
            (a + c).rem_euclid(16) == 0 && (b + d).rem_euclid(12) == 0
        });
        let j = mirror.unwrap();
        assert!((modes[idx] - modes[j].conj()).norm() < 1e-12);
    }
}

#[test]
fn spectral_multiplier_on_single_modes() {
    let g = torus(256);
    for s in [0.3, 0.5, 0.7] {
        assert!(max_diff(&fractional_laplacian_spectral(&wave(&g, 1.0), s).unwrap(), &wave(&g, 1.0)) < 1e-12);
        let twice = fractional_laplacian_spectral(&wave(&g, 2.0), s).unwrap();
        let expected = wave(&g, 2.0).map(|v| 4f64.powf(s) * v).unwrap();
        assert!(max_diff(&twice, &expected) < 1e-12);
        let flat = GridFunction::from_fn(g.clone(), |_| 3.0).unwrap();
        assert!(fractional_laplacian_spectral(&flat, s).unwrap().values().iter().all(|v| v.abs() < 1e-12));
    }
    let plane = Grid::new(&[64, 64], &[0.0, 0.0], 2.0 * PI / 64.0, true).unwrap();
    let u = GridFunction::from_fn(plane, |x| x[0].cos() * (2.0 * x[1]).cos()).unwrap();
    let lu = fractional_laplacian_spectral(&u, 0.5).unwrap();
    assert!(max_diff(&lu, &u.map(|v| 5f64.sqrt() * v).unwrap()) < 1e-12);
}

#[test]
fn singular_integral_agrees_with_the_symbol() {
    let g = torus(512);
    let u = wave(&g, 1.0);
    let spectral = fractional_laplacian_spectral(&u, 0.5).unwrap();
    let paired = relative_l2(&fractional_laplacian_singular(&u, 0.5).unwrap(), &spectral);
    assert!(paired <= 1e-3, "{paired}");
    let plain = relative_l2(&fractional_laplacian_singular_with(&u, 0.5, SingularRule::Midpoint).unwrap(), &spectral);
    assert!(plain >= 10.0 * paired, "midpoint {plain} vs paired {paired}");
    let flat = GridFunction::from_fn(g, |_| -2.5).unwrap();
    assert!(fractional_laplacian_singular(&flat, 0.5).unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn heat_semigroup_examples() {
    let g = torus(128);
    let u = wave(&g, 1.0);
    assert_eq!(heat_semigroup(&u, 0.0).unwrap().values(), u.values());
    let damped = heat_semigroup(&u, 1.0).unwrap();
    assert!(max_diff(&damped, &u.map(|v| (-1.0f64).exp() * v).unwrap()) < 1e-12);
    let bump = GridFunction::from_fn(g, |x| (-(x[0] - 2.0).powi(2)).exp() + 0.3).unwrap();
    let smoothed = heat_semigroup(&bump, 0.7).unwrap();
    assert!((smoothed.mean() - bump.mean()).abs() <= 1e-12 * bump.mean());
    assert!(heat_semigroup(&bump, -1.0).is_err());
}

#[test]
fn bochner_formula_examples() {
    let g = torus(512);
    let t_grid = LogGrid::default();
    let u = wave(&g, 1.0);
    let r = bochner_apply(&u, 0.5, &t_grid, 1e-3).unwrap();
    assert!(relative_l2(&r.field, &u) <= 1e-3);
    let flat = GridFunction::from_fn(g.clone(), |_| 4.0).unwrap();
    assert!(bochner_apply(&flat, 0.5, &t_grid, 1e-3).unwrap().field.values().iter().all(|v| v.abs() < 1e-12));

    let v = GridFunction::from_fn(g.clone(), |x| (3.0 * x[0]).sin() + 0.2).unwrap();
    let sum = GridFunction::new(g, u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect()).unwrap();
    let lhs = bochner_apply(&sum, 0.3, &t_grid, 1e-3).unwrap().field;
    let a = bochner_apply(&u, 0.3, &t_grid, 1e-3).unwrap().field;
    let b = bochner_apply(&v, 0.3, &t_grid, 1e-3).unwrap().field;
    let worst = lhs.values().iter().zip(a.values().iter().zip(b.values())).map(|(l, (x, y))| (l - x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn scalar_subordination_identity() {
    // (1/Γ(−s)) ∫ (e^{−tλ} − 1) t^{−1−s} dt = λˢ, checked by quadrature in τ = ln t
    for s in [0.3, 0.5, 0.7] {
        for lambda in [0.5f64, 1.0, 9.0] {
            let n = 40_000;
            let (a, b) = (-30.0f64, 12.0f64);
            let d = (b - a) / n as f64;
            let integral: f64 = (0..n)
                .map(|i| {
                    let t = (a + (i as f64 + 0.5) * d).exp();
                    (-(t * lambda)).exp_m1() * t.powf(-s) * d
                })
                .sum();
            let head = -lambda * a.exp().powf(1.0 - s) / (1.0 - s);
            let tail = -(b.exp()).powf(-s) / s;
            let value = (head + integral + tail) / statrs::function::gamma::gamma(-s);
            assert!((value / lambda.powf(s) - 1.0).abs() < 1e-6, "s={s} λ={lambda}: {value}");
        }
    }
}

#[test]
fn operator_realizations_agree_on_low_modes() {
    let g = torus(512);
    for s in [0.3, 0.7] {
        for k in [1.0, 4.0, 8.0] {
            let r = compare_realizations(&wave(&g, k), s, &LogGrid::default()).unwrap();
            assert!(r.singular_vs_spectral <= 1e-3 && r.bochner_vs_spectral <= 1e-3, "{r:?}");
        }
    }
}

#[test]
fn operators_need_a_torus() {
    let g = Grid::new(&[64], &[0.0], 0.1, false).unwrap();
    let u = GridFunction::from_fn(g, |x| x[0]).unwrap();
    assert!(fractional_laplacian_spectral(&u, 0.5).is_err());
    assert!(fractional_laplacian_singular(&u, 0.5).is_err());
    assert!(fractional_laplacian_spectral(&wave(&torus(64), 1.0), 1.2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_operator_is_symmetric_and_nonnegative(
        a in prop::collection::vec(-1.0f64..1.0, 32),
        b in prop::collection::vec(-1.0f64..1.0, 32),
        s in 0.05f64..0.95,
    ) {
        let g = torus(32);
        let u = GridFunction::new(g.clone(), a).unwrap();
        let v = GridFunction::new(g, b).unwrap();
        let lu = fractional_laplacian_spectral(&u, s).unwrap();
        let lv = fractional_laplacian_spectral(&v, s).unwrap();
        prop_assert!((inner(&lu, &v) - inner(&u, &lv)).abs() < 1e-10);
        prop_assert!(inner(&lu, &u) >= -1e-12);
    }

    #[test]
    fn singular_operator_annihilates_constants_and_is_linear(
        a in prop::collection::vec(-1.0f64..1.0, 32),
        c in -3.0f64..3.0,
        s in 0.1f64..0.9,
    ) {
        let g = torus(32);
        let u = GridFunction::new(g.clone(), a.clone()).unwrap();
        let shifted = GridFunction::new(g, a.iter().map(|x| 2.0 * x + c).collect()).unwrap();
        let lu = fractional_laplacian_singular(&u, s).unwrap();
        let ls = fractional_laplacian_singular(&shifted, s).unwrap();
        for (x, y) in lu.values().iter().zip(ls.values()) {
            prop_assert!((2.0 * x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }
}
