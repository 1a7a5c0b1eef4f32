//! Acceptance criteria 1–11, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails only when a criterion outside `KNOWN_INFEASIBLE` fails.

use std::time::Instant;

use critshe::diagrams::{count, enumerate};
use critshe::gausscalc::{bessel_identity_residual, second_moment_closed_form, Mixture2d};
use critshe::mollifier::{beta_eps, beta_phi, beta_star, pair_profile, CouplingSchedule, Mollifier, RadialGrid};
use critshe::momentengine::{semigroup_residual, MomentEngine, MomentRequest};
use critshe::shesim::{
    simulate_moments, step_rng, two_particle_oracle, OracleRequest, RadialSolver, SimParams, Simulator,
};
use critshe::simplexint::{IntegrationPlan, Mode};
use critshe::specfun::{
    conv_identity_residual, gamma_identity_check, jfn_laplace_transform, BetaStar, JFunction, JfnEvalConfig, JfnTable,
};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met on this hardware at the stated scale.
const KNOWN_INFEASIBLE: &[usize] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gauss(mean: [f64; 2], var: f64) -> Mixture2d {
    Mixture2d::single(mean, var).unwrap()
}

fn c1_gamma_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 0..=8 {
        for alpha in [0.1, 1.0, 2.5, 7.0] {
            worst = worst.max(gamma_identity_check(m, alpha).unwrap());
        }
    }
    outcome(worst <= 1e-12, format!("max |LHS-RHS| = {worst:.2e} over m<=8, 4 alphas (tol 1e-12)"))
}

fn c2_jfn_laplace() -> Outcome {
    let cfg = JfnEvalConfig::default();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for beta in [-1.0, 0.0, 1.0, 2.0] {
        for k in 0..5 {
            // Re z ≤ −e^{β⋆+0.3}, some off the real axis
            let a = f64::exp(beta + 0.3 + 0.5 * k as f64);
            let z = Complex64::new(-a, [0.0, 0.5, -1.0, 2.0, 0.0][k] * a);
            let numeric = jfn_laplace_transform(z, BetaStar(beta), &cfg).unwrap();
            let exact = 1.0 / ((-z).ln() - beta);
            worst = worst.max((numeric - exact).norm() / exact.norm());
            pairs += 1;
        }
    }
    outcome(worst < 1e-6, format!("max relative residual {worst:.2e} on {pairs} (z, beta*) pairs (tol 1e-6)"))
}

fn c3_convolution() -> Outcome {
    let mut worst: f64 = 0.0;
    for (s, t) in [(0.5, 1.0), (0.1, 2.0), (1.0, 1.5)] {
        for beta in [-1.0, 0.0, 2.0] {
            let r = conv_identity_residual(s, t, BetaStar(beta)).unwrap();
            let j = JfnTable::for_horizon(BetaStar(beta), t).unwrap().value(t).unwrap();
            worst = worst.max(r / j);
        }
    }
    outcome(worst < 1e-4, format!("max relative residual {worst:.2e} on 9 cases (tol 1e-4)"))
}

fn c4_bessel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (tau, a, b) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        worst = worst.max(bessel_identity_residual(tau, a, b).unwrap());
    }
    outcome(worst < 1e-8, format!("max absolute residual {worst:.2e} at 50 random triples (tol 1e-8)"))
}

fn c5_two_point() -> Outcome {
    let f = gauss([0.0, 0.0], 0.5);
    let z = gauss([0.2, 0.0], 0.5);
    let mut worst: f64 = 0.0;
    for t in [0.25, 1.0, 4.0] {
        for beta in [-1.0, 0.0, 1.0] {
            let b = BetaStar(beta);
            let req = MomentRequest {
                n: 2,
                t,
                beta_star: b,
                f: vec![f.clone(); 2],
                z_ic: z.clone(),
                m_max: 1,
                plan: IntegrationPlan {
                    mode: Mode::AdaptiveQuadrature,
                    samples: 0,
                    rel_tol: 1e-6,
                    seed: 0,
                },
            };
            let got = MomentEngine::new(b, t).unwrap().correlation(&req).unwrap().partial_sum;
            let j = JfnTable::for_horizon(b, t).unwrap();
            let want = second_moment_closed_form(t, &[f.clone(), f.clone()], &[z.clone(), z.clone()], &j, 1e-8)
                .unwrap()
                .total();
            worst = worst.max((got - want).abs() / want);
        }
    }
    outcome(worst < 1e-3, format!("max relative difference {worst:.2e} on 9 (t, beta*) cases (tol 1e-3)"))
}

fn c6_semigroup() -> Outcome {
    let f = gauss([0.1, 0.0], 0.3);
    let z = gauss([0.0, 0.2], 0.5);
    let mut worst: f64 = 0.0;
    for beta in [0.0, 1.0] {
        let c = semigroup_residual(0.5, 1.0, &[f.clone(), f.clone()], &[z.clone(), z.clone()], BetaStar(beta), 1e-2)
            .unwrap();
        worst = worst.max(c.relative);
    }
    outcome(worst < 1e-3, format!("max relative residual {worst:.2e} at (s,t) = (0.5,1), beta* in {{0,1}} (tol 1e-3)"))
}

fn c7_c8_third_moment() -> (Outcome, Outcome) {
    let f = gauss([0.0, 0.0], 0.5);
    let z = gauss([0.2, 0.0], 0.5);
    let b = BetaStar(0.0);
    let req = MomentRequest {
        n: 3,
        t: 1.0,
        beta_star: b,
        f: vec![f.clone(); 3],
        z_ic: z,
        m_max: 4,
        plan: IntegrationPlan {
            mode: Mode::QuasiMonteCarlo,
            samples: 32_768,
            rel_tol: 1e-2,
            seed: 7,
        },
    };
    let c = MomentEngine::new(b, 1.0).unwrap().third_moment_routes(&f, &req).unwrap();
    let a = c.nondegenerate_sum;
    let r = c.cumulant_route;
    let seven = outcome(
        c.discrepancy_sigma <= 2.0,
        format!(
            "nondegenerate {:.6e} +- {:.1e} vs cumulant {:.6e} +- {:.1e}: {:.2} sigma (tol 2)",
            a.value, a.error, r.value, r.error, c.discrepancy_sigma
        ),
    );
    let sigmas = a.value / a.error;
    let eight = outcome(sigmas > 5.0, format!("centered third moment {:.6e} = {sigmas:.0} sigma above 0 (need > 5)", a.value));
    (seven, eight)
}

/// Simulator against the oracle. The stated grid cannot resolve the
/// mollifier on a torus that contains the data, and even the admissible
/// torus needs far more steps than the time budget allows, so this reports
/// a projection and runs a reduced configuration for information.
fn c9_simulator(log: &mut Vec<String>) -> Outcome {
    let (n, replicas, budget_h) = (256usize, 2000.0, 2.0);
    let moll = Mollifier::reference();
    // cost of one N = 256 step
    let probe = SimParams {
        epsilon: 0.1,
        beta_zero: 0.0,
        grid: n,
        domain: 6.4,
        dt: (6.4f64 / n as f64).powi(2) / 4.0,
    };
    let sim = Simulator::new(probe, &moll).unwrap();
    let mut st = sim.initial_state(&gauss([0.0, 0.0], 0.25));
    let t0 = Instant::now();
    for k in 0..20 {
        sim.step(&mut st, probe.dt, &mut step_rng(0, 0, k)).unwrap();
    }
    let per_step = t0.elapsed().as_secs_f64() / 20.0;

    let mut hours = 0.0;
    let mut needed_domain: f64 = 0.0;
    let mut worst_ratio: f64 = f64::INFINITY;
    for eps in [0.1, 0.05, 0.025] {
        // ε·N/L ≥ 4 caps the torus
        let l_max = eps * n as f64 / 4.0;
        for t in [0.25f64, 0.5, 1.0] {
            // six standard deviations of the evolved data on each side
            let need = 12.0 * (0.25 + 0.25 + t).sqrt();
            needed_domain = needed_domain.max(need);
            worst_ratio = worst_ratio.min(l_max / need);
            let dt = (l_max / n as f64).powi(2) / 4.0;
            hours += replicas * (t / dt).ceil() * per_step / 3600.0;
        }
    }
    log.push(format!(
        "    projection: {per_step:.2e} s/step at N=256; admissible tori hold at most {:.0}% of the data width; \
         9 cells x 2000 replicas need {hours:.0} h on {} thread(s) (budget {budget_h} h)",
        100.0 * worst_ratio,
        rayon::current_num_threads()
    ));

    // reduced configuration: ε = 0.25, N = 64, L = 4, β° = −1
    let (eps, t) = (0.25, 0.1);
    let h = 4.0 / 64.0;
    let sim = Simulator::new(
        SimParams {
            epsilon: eps,
            beta_zero: -1.0,
            grid: 64,
            domain: 4.0,
            dt: h * h / 4.0,
        },
        &moll,
    )
    .unwrap();
    let f = gauss([0.0, 0.0], 0.1);
    let est = simulate_moments(&sim, &[f.clone(), f.clone()], &f, &[t], 1000, 13).unwrap().remove(0);
    let pair = pair_profile(&moll, &RadialGrid::default()).unwrap();
    let req = OracleRequest {
        t,
        f: [f.clone(), f.clone()],
        z_ic: f.clone(),
        epsilon: eps,
        beta_eps: sim.beta_eps(),
    };
    let radial = RadialSolver::default();
    let o = two_particle_oracle(&req, &pair, &radial).unwrap();
    let o_fine = two_particle_oracle(&req, &pair, &radial.refined(2.0)).unwrap();
    let combined = (est.std_error.powi(2) + (o - o_fine).powi(2)).sqrt();
    log.push(format!(
        "    reduced run (eps=0.25, N=64, L=4, beta0=-1, t=0.1, R=1000): simulation {:.5} +- {:.5}, oracle {:.5}: {:.2} SE",
        est.value,
        est.std_error,
        o_fine,
        (est.value - o_fine).abs() / combined
    ));
    outcome(
        hours <= budget_h && worst_ratio >= 1.0,
        format!("not runnable as stated: the torus must be {needed_domain:.1} wide but eps*N/L >= 4 allows at most 6.4"),
    )
}

fn c10_trend() -> Outcome {
    let moll = Mollifier::reference();
    let pair = pair_profile(&moll, &RadialGrid::default()).unwrap();
    let bs = beta_star(0.0, beta_phi(&pair).unwrap());
    let f = gauss([0.0, 0.0], 0.25);
    let radial = RadialSolver::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [0.25, 0.5, 1.0] {
        let j = JfnTable::for_horizon(bs, t).unwrap();
        let limit = second_moment_closed_form(t, &[f.clone(), f.clone()], &[f.clone(), f.clone()], &j, 1e-8)
            .unwrap()
            .total();
        let gaps: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&eps| {
                let req = OracleRequest {
                    t,
                    f: [f.clone(), f.clone()],
                    z_ic: f.clone(),
                    epsilon: eps,
                    beta_eps: beta_eps(&CouplingSchedule::new(0.0, eps).unwrap()).unwrap(),
                };
                two_particle_oracle(&req, &pair, &radial).unwrap() - limit
            })
            .collect();
        let same_side = gaps.iter().all(|g| g.signum() == gaps[0].signum());
        let shrinking = gaps.windows(2).all(|w| w[1].abs() < w[0].abs());
        ok &= same_side && shrinking;
        parts.push(format!(
            "t={t}: limit {limit:.5}, gaps {:+.5} {:+.5} {:+.5}",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    outcome(ok, format!("oracle at eps = 0.1, 0.05, 0.025 vs limit; {}", parts.join("; ")))
}

fn c11_combinatorics() -> Outcome {
    let mut ok = true;
    for n in 2..=5usize {
        for m in 1..=5usize {
            let p = n * (n - 1) / 2;
            let formula = (p * (p - 1).pow(m as u32 - 1)) as u64;
            let brute = enumerate(n, m).unwrap().count() as u64;
            ok &= brute == formula && count(n, m).unwrap().to_u64() == Some(formula);
        }
    }
    // Dgm(1, m) is empty by convention; the formula gives 0 as well
    ok &= count(1, 1).is_err();
    outcome(ok, "brute-force counts equal (n(n-1)/2)(n(n-1)/2-1)^(m-1) for 2<=n<=5, 1<=m<=5".into())
}

fn main() {
    let mut failures = Vec::new();
    let mut report = |k: usize, o: Outcome, secs: f64, extra: &[String]| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2}: {status}  ({secs:.1} s)  {}", o.detail);
        for line in extra {
            println!("{line}");
        }
        if !o.pass {
            failures.push(k);
        }
    };
    macro_rules! timed {
        ($e:expr) => {{
            let t0 = Instant::now();
            let v = $e;
            (v, t0.elapsed().as_secs_f64())
        }};
    }
    let (o, s) = timed!(c1_gamma_identity());
    report(1, o, s, &[]);
    let (o, s) = timed!(c2_jfn_laplace());
    report(2, o, s, &[]);
    let (o, s) = timed!(c3_convolution());
    report(3, o, s, &[]);
    let (o, s) = timed!(c4_bessel());
    report(4, o, s, &[]);
    let (o, s) = timed!(c5_two_point());
    report(5, o, s, &[]);
    let (o, s) = timed!(c6_semigroup());
    report(6, o, s, &[]);
    let ((o7, o8), s) = timed!(c7_c8_third_moment());
    report(7, o7, s, &[]);
    report(8, o8, s, &["    (same run as criterion 7)".into()]);
    let mut log = Vec::new();
    let (o, s) = timed!(c9_simulator(&mut log));
    report(9, o, s, &log);
    let (o, s) = timed!(c10_trend());
    report(10, o, s, &[]);
    let (o, s) = timed!(c11_combinatorics());
    report(11, o, s, &[]);

    let unexpected: Vec<usize> = failures.iter().copied().filter(|k| !KNOWN_INFEASIBLE.contains(k)).collect();
    println!(
        "acceptance: {} of 11 passed; failed {:?}; known infeasible {:?}",
        11 - failures.len(),
        failures,
        KNOWN_INFEASIBLE
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
