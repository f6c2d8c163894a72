use std::f64::consts::PI;

use fracsym::rearrange::{
    distribution_function, schwarz_function, schwarz_set, steiner_function, steiner_set, DistributionProfile,
};
use fracsym::{lp_norm, measure, Grid, GridFunction, IndicatorSet};
use proptest::prelude::*;

fn line(n: usize, lo: f64, h: f64) -> Grid {
    Grid::new(&[n], &[lo], h, false).unwrap()
}

fn two_bumps(h: f64) -> GridFunction {
    GridFunction::from_fn(line((8.0 / h) as usize, -4.0, h), |x| {
        f64::from(u8::from((0.0..1.0).contains(&x[0]) || (2.0..3.0).contains(&x[0])))
    })
    .unwrap()
}

#[test]
fn distribution_function_examples() {
    let u = two_bumps(1.0 / 16.0);
    assert!((distribution_function(&u, 0.5).unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(distribution_function(&u, 1.0).unwrap(), 0.0);
    assert_eq!(distribution_function(&u, 7.0).unwrap(), 0.0);
}

#[test]
fn tent_level_sets_have_analytic_length() {
    let h = 1.0 / 128.0;
    let tent = GridFunction::from_fn(line(512, -2.0, h), |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
    for k in 1..20 {
        let t = k as f64 / 20.0;
        let mu = distribution_function(&tent, t).unwrap();
        assert!((mu - 2.0 * (1.0 - t)).abs() <= 2.0 * h, "t={t} mu={mu}");
    }
}

#[test]
fn profile_inverts_the_distribution_function() {
    let u = GridFunction::new(line(6, 0.0, 0.5), vec![0.0, 2.0, 1.0, 2.0, 3.0, 0.0]).unwrap();
    let table = DistributionProfile::new(&u).unwrap();
    assert!(table.levels().windows(2).all(|w| w[0] > w[1]));
    assert!(table.measures().windows(2).all(|w| w[0] <= w[1]));
    for (i, &t) in table.levels().iter().enumerate() {
        assert_eq!(table.mu(t), table.measures()[i]);
        assert_eq!(table.mu(t), distribution_function(&u, t).unwrap());
    }
    // u₀(r) = sup{t : μ(t) > r}
    assert_eq!(table.profile(0.0), 3.0);
    assert_eq!(table.profile(0.6), 2.0);
    assert_eq!(table.profile(1.2), 2.0);
    assert_eq!(table.profile(1.6), 1.0);
    assert_eq!(table.profile(2.1), 0.0);
}

#[test]
fn schwarz_of_two_intervals_is_one_centered_interval() {
    let u = two_bumps(1.0 / 16.0);
    let us = schwarz_function(&u).unwrap();
    let centered = GridFunction::from_fn(u.grid().clone(), |x| f64::from(u8::from(x[0].abs() < 1.0))).unwrap();
    let differing = us.values().iter().zip(centered.values()).filter(|(a, b)| a != b).count();
    assert!(differing <= 1);
}

#[test]
fn translated_tent_is_recentered() {
    let h = 1.0 / 32.0;
    let g = line(512, -8.0, h);
    let shifted = GridFunction::from_fn(g.clone(), |x| (1.0 - (x[0] - 5.0).abs()).max(0.0)).unwrap();
    let centered = GridFunction::from_fn(g, |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
    assert_eq!(schwarz_function(&shifted).unwrap().values(), centered.values());
}

#[test]
fn radially_decreasing_input_is_a_fixed_point() {
    let g = Grid::centered(&[48, 48], 1.0 / 8.0, false).unwrap();
    let gauss = GridFunction::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
    assert_eq!(schwarz_function(&gauss).unwrap().values(), gauss.values());
}

#[test]
fn set_symmetrals() {
    let g = Grid::centered(&[96, 96], 1.0 / 16.0, false).unwrap();
    let square = IndicatorSet::from_predicate(g.clone(), |x| x[0].abs() < 0.75 && x[1].abs() < 0.75);
    let disk = schwarz_set(&square);
    assert_eq!(disk.count(), square.count());
    assert_eq!(schwarz_set(&disk).mask(), disk.mask());
    // every cell of the symmetral is at least as central as every cell outside it
    let r2 = |i: usize| {
        let c = g.center(i);
        c[0] * c[0] + c[1] * c[1]
    };
    let inner = disk.cells().iter().map(|&i| r2(i)).fold(0.0, f64::max);
    let outer = (0..g.len()).filter(|&i| !disk.mask()[i]).map(r2).fold(f64::INFINITY, f64::min);
    assert!(inner <= outer);

}

#[test]
fn far_disks_merge_into_one() {
    let g = Grid::centered(&[320, 128], 1.0 / 64.0, false).unwrap();
    // two disks of measure π/4 each
    let r = 0.5_f64;
    let far = IndicatorSet::from_predicate(g, |x| {
        (x[0] + 1.5).powi(2) + x[1] * x[1] < r * r || (x[0] - 1.5).powi(2) + x[1] * x[1] < r * r
    });
    let merged = schwarz_set(&far);
    assert!((measure(&merged) - measure(&far)).abs() < 1e-12);
    assert!((measure(&merged) - PI / 2.0).abs() < 0.01, "{}", measure(&merged));
    assert!(!merged.mask()[0]);
}

#[test]
fn steiner_centres_each_line() {
    let g = Grid::centered(&[64, 32], 1.0 / 8.0, false).unwrap();
    let offset = IndicatorSet::from_predicate(g.clone(), |x| x[0] > 0.5 && x[0] < 2.5 && x[1].abs() < 1.0);
    let centered = IndicatorSet::from_predicate(g.clone(), |x| x[0].abs() < 1.0 && x[1].abs() < 1.0);
    assert_eq!(steiner_set(&offset, 0).unwrap().mask(), centered.mask());

    let squares = IndicatorSet::from_predicate(g.clone(), |x| {
        ((x[0] > -2.5 && x[0] < -1.5) || (x[0] > 1.0 && x[0] < 2.0)) && x[1] > 0.0 && x[1] < 1.0
    });
    let rect = IndicatorSet::from_predicate(g.clone(), |x| x[0].abs() < 1.0 && x[1] > 0.0 && x[1] < 1.0);
    assert_eq!(steiner_set(&squares, 0).unwrap().mask(), rect.mask());

    let gauss = GridFunction::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
    for axis in [0, 1] {
        assert_eq!(steiner_function(&gauss, axis).unwrap().values(), gauss.values());
    }
    assert!(steiner_function(&gauss, 2).is_err());
}

#[test]
fn negative_input_is_rejected() {
    let u = GridFunction::new(line(4, 0.0, 1.0), vec![0.0, -1.0, 2.0, 0.0]).unwrap();
    assert!(schwarz_function(&u).is_err());
}

fn nonnegative_function() -> impl Strategy<Value = GridFunction> {
    (prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..4.0], 36), any::<bool>()).prop_map(|(v, two_d)| {
        let g = if two_d { Grid::centered(&[6, 6], 0.5, false) } else { Grid::centered(&[36], 0.25, false) }.unwrap();
        GridFunction::new(g, v).unwrap()
    })
}

proptest! {
    #[test]
    fn rearrangement_is_a_permutation(u in nonnegative_function()) {
        let us = schwarz_function(&u).unwrap();
        let mut a = u.values().to_vec();
        let mut b = us.values().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let (x, y) = (lp_norm(&u, p).unwrap(), lp_norm(&us, p).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn rearrangement_is_idempotent(u in nonnegative_function()) {
        let once = schwarz_function(&u).unwrap();
        let twice = schwarz_function(&once).unwrap();
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn level_measures_are_preserved(u in nonnegative_function(), t in 0.0f64..4.0) {
        let us = schwarz_function(&u).unwrap();
        prop_assert_eq!(distribution_function(&u, t).unwrap(), distribution_function(&us, t).unwrap());
    }

    #[test]
    fn steiner_preserves_line_content(u in nonnegative_function()) {
        prop_assume!(u.grid().dim() == 2);
        let v = steiner_function(&u, 1).unwrap();
        for row in 0..6 {
            let mut a: Vec<f64> = u.values()[row * 6..row * 6 + 6].to_vec();
            let mut b: Vec<f64> = v.values()[row * 6..row * 6 + 6].to_vec();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
