//! Special functions: Gamma wrappers, Hurwitz zeta, Dirichlet beta and the
//! Epstein zeta of the square lattice.

use std::f64::consts::PI;

/// B_{2j}/(2j)! for j = 1..=12.
const BERNOULLI_OVER_FACT: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77_683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
];

/// Gamma function on the whole real line (poles excluded).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Γ(−s) for s ∈ (0,1), through Γ(1−s)/(−s).
pub fn gamma_neg(s: f64) -> f64 {
    gamma(1.0 - s) / (-s)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Upper incomplete gamma Γ(a, x) for a > 0.
pub fn gamma_upper(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(a, x) * gamma(a)
}

/// Hurwitz zeta ζ(z, a) = Σ_{n≥0} (n+a)^{−z}, analytically continued to all
/// real z ≠ 1, for a > 0.
///
/// Euler–Maclaurin after shifting the argument to n + a ≥ 20.
pub fn hurwitz_zeta(z: f64, a: f64) -> f64 {
    assert!(a > 0.0, "hurwitz_zeta needs a > 0");
    assert!((z - 1.0).abs() > 1e-12, "hurwitz_zeta has a pole at z = 1");
    let shift = 20usize.saturating_sub(a.floor() as usize).max(1);
    let mut head = Vec::with_capacity(shift);
    for n in 0..shift {
        head.push((n as f64 + a).powf(-z));
    }
    let x = shift as f64 + a;
    let mut tail = x.powf(1.0 - z) / (z - 1.0) + 0.5 * x.powf(-z);
    let x2 = x * x;
    let mut fact = z * x.powf(-z - 1.0);
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        let term = c * fact;
        tail += term;
        if term.abs() < 1e-17 * tail.abs() {
            break;
        }
        let m = 2.0 * (j as f64 + 1.0);
        fact *= (z + m - 1.0) * (z + m) / x2;
    }
    // sum the head from the smallest terms (largest n) when they decay
    let head_sum: f64 = if z > 0.0 {
        head.iter().rev().sum()
    } else {
        head.iter().sum()
    };
    head_sum + tail
}

/// Riemann zeta ζ(z), z ≠ 1.
pub fn zeta(z: f64) -> f64 {
    hurwitz_zeta(z, 1.0)
}

/// Dirichlet beta β(z) = Σ (−1)^n (2n+1)^{−z}.
pub fn dirichlet_beta(z: f64) -> f64 {
    if (z - 1.0).abs() < 1e-12 {
        return PI / 4.0;
    }
    4f64.powf(-z) * (hurwitz_zeta(z, 0.25) - hurwitz_zeta(z, 0.75))
}

/// Epstein zeta of the integer lattice, Z_N(a) = Σ_{k∈ℤᴺ∖0} |k|^{−a}
/// (analytically continued), for N ∈ {1, 2}.
pub fn epstein_zeta(dim: usize, a: f64) -> f64 {
    match dim {
        1 => 2.0 * zeta(a),
        2 => 4.0 * zeta(a / 2.0) * dirichlet_beta(a / 2.0),
        _ => panic!("epstein_zeta supports dim 1 or 2"),
    }
}

/// Volume of the unit ball in ℝᴺ.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let n = dim as f64;
    PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0)
}

/// Surface area of the unit sphere in ℝᴺ.
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// θ(a) = Σ_{m∈ℤ} e^{−a m²}, via the Poisson dual for small a.
pub fn jacobi_theta(a: f64) -> f64 {
    if a >= 1.0 {
        let mut s = 1.0;
        let mut m = 1.0f64;
        loop {
            let t = (-a * m * m).exp();
            s += 2.0 * t;
            if t < 1e-18 {
                break;
            }
            m += 1.0;
        }
        s
    } else {
        let b = PI * PI / a;
        let mut s = 1.0;
        let mut m = 1.0f64;
        loop {
            let t = (-b * m * m).exp();
            s += 2.0 * t;
            if t < 1e-18 {
                break;
            }
            m += 1.0;
        }
        (PI / a).sqrt() * s
    }
}

/// Σ_{m ≥ d} e^{−a m²} for an integer d ≥ 1.
pub fn gauss_tail(a: f64, d: usize) -> f64 {
    let d = d.max(1);
    if a * (d as f64) * (d as f64) > 745.0 {
        return 0.0;
    }
    if a >= 0.05 || d as f64 * a.sqrt() > 6.0 {
        // direct sum
        let mut s = 0.0;
        let mut m = d as f64;
        loop {
            let t = (-a * m * m).exp();
            s += t;
            if t < 1e-18 * s.max(1e-300) {
                break;
            }
            m += 1.0;
        }
        s
    } else {
        // half theta minus the head
        let mut head = 0.0;
        for m in 1..d {
            let mf = m as f64;
            head += (-a * mf * mf).exp();
        }
        (0.5 * (jacobi_theta(a) - 1.0) - head).max(0.0)
    }
}
