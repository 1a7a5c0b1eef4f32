use std::f64::consts::PI;

use critshe::mollifier::{beta_phi, pair_profile, Mollifier, PairProfile, ProfileRegistry, RadialGrid};
use critshe::quad::{integrate_with_breaks, QuadConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn riemann_overlap(m: &Mollifier, shift: f64, n: usize) -> f64 {
    // ∫ φ(y) φ(y + shift e₁) dy on an n×n grid over the support of φ
    let r0 = m.support_radius();
    let h = 2.0 * r0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = -r0 + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = -r0 + (j as f64 + 0.5) * h;
            let a = m.value([x, y]);
            if a > 0.0 {
                acc += a * m.value([x + shift, y]);
            }
        }
    }
    acc * h * h
}

fn log_max_oracle(p: &PairProfile) -> f64 {
    // angular average of log|x − x'| over the relative angle is log max(|x|,|x'|)
    let a = p.support_radius();
    let cfg = QuadConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 2000,
    };
    let outer = integrate_with_breaks(
        |r: f64| {
            let inner = integrate_with_breaks(
                |s: f64| p.value_radial(s) * s * r.max(s).ln(),
                0.0,
                a,
                &[r],
                &cfg,
            )
            .unwrap()
            .value;
            p.value_radial(r) * r * inner
        },
        0.0,
        a,
        &[a / 4.0, a / 2.0],
        &cfg,
    )
    .unwrap()
    .value;
    4.0 * PI * PI * outer
}

fn sample_phi(m: &Mollifier, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let r0 = m.support_radius();
    let top = m.radial(0.0);
    loop {
        let x = [rng.gen_range(-r0..r0), rng.gen_range(-r0..r0)];
        if rng.gen::<f64>() * top < m.value(x) {
            return x;
        }
    }
}

#[test]
fn pair_profile_basic_invariants() {
    let p = pair_profile(&Mollifier::reference(), &RadialGrid::default()).unwrap();
    assert!((p.mass().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(p.value_radial(2.0), 0.0);
    assert_eq!(p.value_radial(2.5), 0.0);
    assert!(p.nodes().iter().all(|&v| v >= 0.0));
    assert_eq!(p.value([0.3, -0.4]), p.value([-0.3, 0.4]));
}

#[test]
fn pair_profile_matches_dense_riemann_sums() {
    let m = Mollifier::reference();
    let p = pair_profile(&m, &RadialGrid::default()).unwrap();
    let at0 = riemann_overlap(&m, 0.0, 2048);
    assert!((p.at_zero() - at0).abs() < 1e-9 * at0, "{} vs {at0}", p.at_zero());
    for r in [0.37, 0.9, 1.55] {
        let want = riemann_overlap(&m, r, 1024);
        let got = p.value_radial(r);
        assert!((got - want).abs() < 1e-8 * at0, "r={r}: {got} vs {want}");
    }
}

#[test]
fn beta_phi_agrees_with_log_max_form() {
    let reg = ProfileRegistry::default();
    for name in reg.names() {
        let m = Mollifier::from_registry(&reg, name, 1.0).unwrap();
        let p = pair_profile(&m, &RadialGrid::default()).unwrap();
        let a = beta_phi(&p).unwrap();
        let b = log_max_oracle(&p);
        assert!((a - b).abs() < 1e-8, "{name}: {a} vs {b}");
    }
}

#[test]
fn beta_phi_agrees_with_four_dimensional_monte_carlo() {
    let m = Mollifier::reference();
    let p = pair_profile(&m, &RadialGrid::default()).unwrap();
    let q = beta_phi(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let n = 1_000_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let y: Vec<[f64; 2]> = (0..4).map(|_| sample_phi(&m, &mut rng)).collect();
        let d = [
            y[0][0] - y[1][0] - y[2][0] + y[3][0],
            y[0][1] - y[1][1] - y[2][1] + y[3][1],
        ];
        let l = d[0].hypot(d[1]).ln();
        s1 += l;
        s2 += l * l;
    }
    let mean = s1 / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((q - mean).abs() < 3.0 * se, "quadrature {q}, MC {mean} ± {se}");
}

#[test]
fn beta_phi_scaling_covariance() {
    let m = Mollifier::reference();
    let base = beta_phi(&pair_profile(&m, &RadialGrid::default()).unwrap()).unwrap();
    for lambda in [0.5, 2.0, 4.0] {
        let scaled = m.rescaled(lambda).unwrap();
        let b = beta_phi(&pair_profile(&scaled, &RadialGrid::default()).unwrap()).unwrap();
        assert!((b - (base - f64::ln(lambda))).abs() < 1e-6, "lambda={lambda}");
    }
    // concentrated profile: log|u| < 0 on the whole support
    let tiny = m.rescaled(8.0).unwrap();
    assert!(beta_phi(&pair_profile(&tiny, &RadialGrid::default()).unwrap()).unwrap() < 0.0);
}
