//! Operator maps against direct numerical integration of their kernels.

use critshe::gausscalc::{heat2d, inner_product, Gauss2d, GaussianMixtureState, Mixture2d};

fn rho(t: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    heat2d(t, [a[0] - b[0], a[1] - b[1]]).unwrap()
}

/// Midpoint rule on `[c−L, c+L]²` with `n²` cells.
fn grid2<F: Fn([f64; 2]) -> f64>(f: F, c: [f64; 2], half: f64, n: usize) -> f64 {
    let h = 2.0 * half / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += f([c[0] - half + (i as f64 + 0.5) * h, c[1] - half + (j as f64 + 0.5) * h]);
        }
    }
    acc * h * h
}

fn mix_a() -> Mixture2d {
    Mixture2d::new(vec![
        Gauss2d { weight: 0.7, mean: [0.2, -0.1], var: 0.15 },
        Gauss2d { weight: 0.3, mean: [-0.4, 0.3], var: 0.3 },
    ])
    .unwrap()
}

fn mix_b() -> Mixture2d {
    Mixture2d::new(vec![Gauss2d { weight: 1.2, mean: [0.5, 0.4], var: 0.25 }]).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn tensor_state_evaluates_as_product() {
    let s = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    for x in [[[0.0, 0.0], [0.3, 0.1]], [[-0.5, 0.2], [1.0, -0.3]]] {
        let want = mix_a().eval(x[0]) * mix_b().eval(x[1]);
        assert!(close(s.eval(&x).unwrap(), want, 1e-13));
    }
}

#[test]
fn apply_out_matches_kernel_integral() {
    let v = GaussianMixtureState::tensor(&[mix_a()]);
    let t = 0.35;
    let u = v.apply_out((1, 2), t).unwrap();
    for x in [[[0.0, 0.0], [0.1, 0.2]], [[0.4, -0.3], [-0.2, 0.5]], [[1.0, 1.0], [0.8, 0.9]]] {
        let want = grid2(|y| rho(t, x[0], y) * rho(t, x[1], y) * mix_a().eval(y), [0.0, 0.0], 4.5, 256);
        let got = u.eval(&x).unwrap();
        assert!(close(got, want, 1e-6), "{got} vs {want}");
    }
}

#[test]
fn apply_in_on_product_is_product_of_heated_factors() {
    let u = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let t = 0.6;
    let w = u.apply_in((1, 2), t).unwrap();
    assert_eq!(w.k(), 1);
    for y in [[0.0, 0.0], [0.7, -0.2], [-1.3, 0.4]] {
        let want = mix_a().heated(t).unwrap().eval(y) * mix_b().heated(t).unwrap().eval(y);
        assert!(close(w.eval(&[y]).unwrap(), want, 1e-12));
    }
}

#[test]
fn apply_in_on_correlated_state_matches_grid() {
    // u = 𝒫_s𝒮*v, so 𝒮𝒫_t u (y) = ∫ ρ(s+t, y−w)² v(w) dw
    let (s, t) = (0.3, 0.45);
    let u = GaussianMixtureState::tensor(&[mix_a()]).apply_out((1, 2), s).unwrap();
    let w = u.apply_in((1, 2), t).unwrap();
    for y in [[0.0, 0.0], [0.5, 0.5], [-0.8, 0.1]] {
        let want = grid2(|p| rho(s + t, y, p).powi(2) * mix_a().eval(p), [0.0, 0.0], 4.5, 256);
        assert!(close(w.eval(&[y]).unwrap(), want, 1e-6));
    }
}

#[test]
fn apply_med_matches_grid_at_three_particles() {
    // 𝒮_12 𝒫_t 𝒮*_13 (g₁⊗g₂)(y₀, y₁)
    //   = [∫ρ(t,y₀−a)ρ(t,y₁−a)g₁(a)da] · [∫ρ(t,y₀−b)g₂(b)db]
    let t = 0.5;
    let v = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let w = v.apply_med((1, 3), (1, 2), t).unwrap();
    assert_eq!(w.k(), 2);
    for y in [[[0.0, 0.0], [0.2, 0.1]], [[0.6, -0.4], [-0.3, 0.3]]] {
        let first = grid2(|a| rho(t, y[0], a) * rho(t, y[1], a) * mix_a().eval(a), [0.0, 0.0], 4.5, 256);
        let second = mix_b().heated(t).unwrap().eval(y[0]);
        let got = w.eval(&y).unwrap();
        assert!(close(got, first * second, 1e-6), "{got} vs {}", first * second);
    }
}

#[test]
fn apply_med_relabeling_symmetry() {
    // swapping particles 2 and 3 exchanges the two pair orders
    let v = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let a = v.apply_med((1, 3), (1, 2), 0.4).unwrap();
    let b = v.apply_med((1, 2), (1, 3), 0.4).unwrap();
    for (ca, cb) in a.components().iter().zip(b.components()) {
        assert!(close(ca.weight, cb.weight, 1e-13));
        assert!((&ca.cov - &cb.cov).amax() < 1e-13);
        assert!((&ca.mean_x - &cb.mean_x).amax() < 1e-13);
    }
}

#[test]
fn inner_product_matches_four_dimensional_grid() {
    let f = GaussianMixtureState::tensor(&[mix_b(), mix_a()]);
    let g = GaussianMixtureState::tensor(&[mix_a()]).apply_out((1, 2), 0.2).unwrap();
    let n = 36;
    let half = 3.2;
    let h = 2.0 * half / n as f64;
    let pts: Vec<f64> = (0..n).map(|i| -half + (i as f64 + 0.5) * h).collect();
    let mut acc = 0.0;
    for &a in &pts {
        for &b in &pts {
            for &c in &pts {
                for &d in &pts {
                    let x = [[a, b], [c, d]];
                    acc += f.eval(&x).unwrap() * g.eval(&x).unwrap();
                }
            }
        }
    }
    acc *= h.powi(4);
    let got = inner_product(&f, &g).unwrap();
    assert!(close(got, acc, 1e-6), "{got} vs {acc}");
}

#[test]
fn inner_product_is_bilinear() {
    let f = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let g = GaussianMixtureState::tensor(&[mix_b(), mix_b()]);
    let h = GaussianMixtureState::tensor(&[mix_a(), mix_a()]);
    let mut comps = g.components().to_vec();
    comps.iter_mut().for_each(|c| c.weight *= 2.5);
    let mut hc = h.components().to_vec();
    hc.iter_mut().for_each(|c| c.weight *= -0.75);
    comps.extend(hc);
    let combo = GaussianMixtureState::new(2, comps).unwrap();
    let lhs = inner_product(&f, &combo).unwrap();
    let rhs = 2.5 * inner_product(&f, &g).unwrap() - 0.75 * inner_product(&f, &h).unwrap();
    assert!((lhs - rhs).abs() < 1e-15 * lhs.abs().max(1.0));
}

#[test]
fn heat_steps_compose_additively() {
    let v = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let a = v.heat(0.2).unwrap().heat(0.3).unwrap();
    let b = v.heat(0.5).unwrap();
    for (ca, cb) in a.components().iter().zip(b.components()) {
        assert!((&ca.cov - &cb.cov).amax() < 1e-15);
    }
    // 𝒮𝒫_{s+t} = 𝒮𝒫_t𝒫_s
    let c = v.heat(0.2).unwrap().apply_in((1, 2), 0.3).unwrap();
    let d = v.apply_in((1, 2), 0.5).unwrap();
    for (cc, cd) in c.components().iter().zip(d.components()) {
        assert!(close(cc.weight, cd.weight, 1e-13));
        assert!((&cc.cov - &cd.cov).amax() < 1e-13);
    }
}

#[test]
fn squeezed_heat_tends_to_identity() {
    let v = GaussianMixtureState::tensor(&[mix_a(), mix_b()]);
    let pts = [[[0.1, 0.2], [0.3, -0.1]], [[-0.4, 0.0], [0.5, 0.6]]];
    let mut prev = f64::INFINITY;
    for t in [1e-2, 1e-4, 1e-6] {
        let w = v.apply_squeezed_heat(t).unwrap();
        let err: f64 = pts
            .iter()
            .map(|x| (w.eval(x).unwrap() - v.eval(x).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-5);
}

#[test]
fn outputs_keep_nonnegative_weights() {
    let v = GaussianMixtureState::tensor(&[mix_a(), mix_b(), mix_a()]);
    let w = v
        .apply_in((2, 3), 0.3)
        .unwrap()
        .apply_j(0.2, 1.7)
        .unwrap()
        .apply_med((1, 2), (1, 3), 0.1)
        .unwrap()
        .apply_out((2, 3), 0.4)
        .unwrap();
    assert_eq!(w.k(), 3);
    assert!(w.components().iter().all(|c| c.weight >= 0.0));
}
