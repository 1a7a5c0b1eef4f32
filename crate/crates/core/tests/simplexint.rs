use critshe::simplexint::{
    integrate_simplex, integrate_simplex_scaled, sample_simplex, stream_rng, IntegrandError, IntegrationPlan,
    IntegratorRegistry, Mode, MonteCarlo, TimeVector,
};
use std::sync::Arc;
use critshe::specfun::{BetaStar, JFunction, Jfn, JfnTable};

fn plan(mode: Mode, samples: u64, seed: u64) -> IntegrationPlan {
    IntegrationPlan {
        mode,
        samples,
        rel_tol: 1e-2,
        seed,
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Gauss–Legendre, 5 nodes per panel.
fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            acc += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

/// `∫₀^t (t−s) 𝔧(s) ds` with `s = t e^{-u}`, `u = 1/ξ − 1`.
fn jfn_line_oracle(j: &dyn JFunction, t: f64) -> f64 {
    gauss_legendre(
        |xi| {
            let u = 1.0 / xi - 1.0;
            let sj = j.ln_scaled(t.ln() - u).unwrap().exp();
            -t * (-u).exp_m1() * sj / (xi * xi)
        },
        0.0,
        1.0,
        4000,
    )
}

fn uniform_registry() -> IntegratorRegistry {
    let mut reg = IntegratorRegistry::empty();
    reg.register(Arc::new(MonteCarlo::uniform()));
    reg
}

#[test]
fn simplex_volume_in_monte_carlo_mode() {
    let one = |_: &TimeVector| -> Result<f64, IntegrandError> { Ok(1.0) };
    for m in 1..=3 {
        for t in [0.5f64, 1.0, 2.0] {
            let want = t.powi(2 * m as i32) / factorial(2 * m);
            let e = integrate_simplex(&uniform_registry(), m, t, &one, &plan(Mode::MonteCarlo, 10_000, 11)).unwrap();
            assert!((e.value - want).abs() < 1e-3 * want, "m={m} t={t}: {} vs {want}", e.value);
            // the 𝔧-adapted default is consistent with its own error bar
            let e = integrate_simplex(&IntegratorRegistry::default(), m, t, &one, &plan(Mode::MonteCarlo, 400_000, 11)).unwrap();
            assert!((e.value - want).abs() < 4.0 * e.error, "m={m} t={t}: {} ± {} vs {want}", e.value, e.error);
            assert!(e.error < 2e-2 * want);
        }
    }
}

#[test]
fn uniform_sampling_reproduces_dirichlet_moments() {
    // E[τ₀τ_½] on Σ_m(t) under the uniform law is t²/((2m+1)(2m+2))
    for m in 1..=3 {
        let t: f64 = 1.4;
        let g = |tv: &TimeVector| -> Result<f64, IntegrandError> { Ok(tv.integer(0) * tv.half(1)) };
        let want = t.powi(2 * m as i32) / factorial(2 * m) * t * t / ((2 * m + 1) * (2 * m + 2)) as f64;
        let e = integrate_simplex(&uniform_registry(), m, t, &g, &plan(Mode::MonteCarlo, 400_000, 3)).unwrap();
        assert!((e.value - want).abs() < 4.0 * e.error, "m={m}: {} ± {} vs {want}", e.value, e.error);
        assert!(e.error < 5e-3 * want);
    }
}

#[test]
fn single_jfn_line_matches_one_dimensional_quadrature() {
    let reg = IntegratorRegistry::default();
    for (beta, t) in [(0.0, 1.0), (-1.0, 0.5), (1.0, 2.0)] {
        let j = Jfn::with_defaults(BetaStar(beta));
        let table = JfnTable::for_horizon(BetaStar(beta), t).unwrap();
        let want = jfn_line_oracle(&j, t);
        let h = |tv: &TimeVector| -> Result<f64, IntegrandError> { Ok(table.ln_scaled(tv.ln_half(1))?.exp()) };

        let aq = integrate_simplex_scaled(&reg, 1, t, &h, &plan(Mode::AdaptiveQuadrature, 0, 0)).unwrap();
        assert!((aq.value - want).abs() < 1e-6 * want, "quadrature {} vs {want}", aq.value);

        for mode in [Mode::MonteCarlo, Mode::QuasiMonteCarlo] {
            let e = integrate_simplex_scaled(&reg, 1, t, &h, &plan(mode, 200_000, 5)).unwrap();
            assert!((e.value - want).abs() < 4.0 * e.error + 1e-9 * want, "{mode}: {} ± {} vs {want}", e.value, e.error);
            assert!(e.error < 1e-2 * want);
        }
    }
}

#[test]
fn uniform_samples_lie_on_the_simplex() {
    let mut rng = stream_rng(3, 0);
    for m in 1..=4 {
        for _ in 0..1000 {
            let tv = sample_simplex(m, 1.7, &mut rng).unwrap();
            assert_eq!(tv.m(), m);
            assert!(tv.as_slice().iter().all(|&d| d >= 0.0));
            assert!((tv.total() - 1.7).abs() < 1e-12);
        }
    }
    assert!(sample_simplex(0, 1.0, &mut rng).is_err());
}

#[test]
fn uniform_first_coordinate_has_the_symmetric_mean() {
    let (m, t, n) = (2usize, 1.3, 1_000_000);
    let mut rng = stream_rng(17, 1);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = sample_simplex(m, t, &mut rng).unwrap().integer(0);
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    let want = t / (2 * m + 1) as f64;
    assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
}

#[test]
fn sampling_is_reproducible() {
    let draw = |seed| {
        let mut rng = stream_rng(seed, 4);
        (0..50).map(|_| sample_simplex(3, 1.0, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
}

#[test]
fn monte_carlo_error_follows_inverse_square_root() {
    let reg = IntegratorRegistry::default();
    let one = |_: &TimeVector| -> Result<f64, IntegrandError> { Ok(1.0) };
    let small = integrate_simplex(&reg, 2, 1.0, &one, &plan(Mode::MonteCarlo, 100_000, 1)).unwrap();
    let large = integrate_simplex(&reg, 2, 1.0, &one, &plan(Mode::MonteCarlo, 400_000, 1)).unwrap();
    let ratio = small.error / large.error;
    assert!((ratio - 2.0).abs() < 0.2, "error ratio {ratio}");

    // coverage of the reported error at 99%
    let want = 1.0 / 24.0;
    let misses = (0..20)
        .filter(|&seed| {
            let e = integrate_simplex(&reg, 2, 1.0, &one, &plan(Mode::MonteCarlo, 65_536, 100 + seed)).unwrap();
            (e.value - want).abs() > 2.576 * e.error
        })
        .count();
    assert!(misses <= 2, "{misses} of 20 outside the 99% band");
}

#[test]
fn importance_sampling_agrees_with_uniform_sampling() {
    let t = 1.0;
    let table = JfnTable::for_horizon(BetaStar(0.0), t).unwrap();
    // 𝔧(τ½)·τ½^{0.6}: singular, but square integrable under the uniform law
    let g = |tv: &TimeVector| -> Result<f64, IntegrandError> {
        Ok((table.ln_scaled(tv.ln_half(1))? - 0.4 * tv.ln_half(1)).exp())
    };
    let h = |tv: &TimeVector| -> Result<f64, IntegrandError> {
        Ok((table.ln_scaled(tv.ln_half(1))? + 0.6 * tv.ln_half(1)).exp())
    };
    let reg = IntegratorRegistry::default();
    let is = integrate_simplex_scaled(&reg, 1, t, &h, &plan(Mode::MonteCarlo, 200_000, 2)).unwrap();

    let n = 400_000;
    let mut rng = stream_rng(77, 0);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = g(&sample_simplex(1, t, &mut rng).unwrap()).unwrap() * t * t / 2.0;
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    let combined = (se * se + is.error * is.error).sqrt();
    assert!((is.value - mean).abs() < 3.0 * combined, "{} ± {} vs {mean} ± {se}", is.value, is.error);
}

#[test]
fn result_is_independent_of_thread_count() {
    let table = JfnTable::for_horizon(BetaStar(0.5), 1.0).unwrap();
    let h = |tv: &TimeVector| -> Result<f64, IntegrandError> {
        Ok((table.ln_scaled(tv.ln_half(1))? + table.ln_scaled(tv.ln_half(2))?).exp() * (1.0 + tv.integer(1)))
    };
    let run = |threads: usize, mode: Mode| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| integrate_simplex_scaled(&IntegratorRegistry::default(), 2, 1.0, &h, &plan(mode, 50_000, 8)).unwrap())
    };
    for mode in [Mode::MonteCarlo, Mode::QuasiMonteCarlo] {
        let a = run(1, mode);
        let b = run(3, mode);
        assert_eq!(a.value.to_bits(), b.value.to_bits(), "{mode}");
        assert_eq!(a.error.to_bits(), b.error.to_bits(), "{mode}");
    }
}

#[test]
fn unknown_integrator_is_reported() {
    let reg = IntegratorRegistry::empty();
    let one = |_: &TimeVector| -> Result<f64, IntegrandError> { Ok(1.0) };
    let err = integrate_simplex(&reg, 1, 1.0, &one, &IntegrationPlan::default()).unwrap_err();
    assert!(err.to_string().contains("monte-carlo"));
    assert_eq!(IntegratorRegistry::default().names(), vec!["adaptive-quadrature", "monte-carlo", "quasi-monte-carlo"]);
}

#[test]
fn adaptive_quadrature_rejects_higher_orders() {
    let reg = IntegratorRegistry::default();
    let one = |_: &TimeVector| -> Result<f64, IntegrandError> { Ok(1.0) };
    assert!(integrate_simplex(&reg, 2, 1.0, &one, &plan(Mode::AdaptiveQuadrature, 0, 0)).is_err());
}
