//! Acceptance gate. Each criterion is checked at its stated tolerance and
//! reported on a single `PASS`/`FAIL` line; the process exits non-zero if any
//! criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use quench_entropy::analytic::{
    analytic_entropy_at, ermakov_integrate, quench_coefficients, quench_gamma, static_entropy,
    SuddenQuench,
};
use quench_entropy::dynamics::{
    build_initial_covariance, evolve, stiffness_from_frequencies, Integration, QuenchSchedule,
};
use quench_entropy::fitting::{estimate_period, fit_log_model, FitMode};
use quench_entropy::runner::simulate;
use quench_entropy::scenario::{preset, Scenario};
use quench_entropy::symplectic::{entanglement_entropy, reduce_to_oscillator, symplectic_spectrum};

const FIG1: [&str; 4] = ["fig1a", "fig1b", "fig1c", "fig1d"];
const FIG3: [&str; 4] = ["fig3a", "fig3b", "fig3c", "fig3d"];

fn verdict(id: u32, pass: bool, started: Instant, detail: String) -> bool {
    println!(
        "{} criterion {id:>2} ({:.2}s): {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    pass
}

fn load(name: &str) -> Scenario {
    preset(name).unwrap_or_else(|| panic!("missing preset {name}"))
}

fn criterion_01_ground_state_is_pure() -> bool {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(0.1..5.0);
        let b: f64 = rng.gen_range(0.1..5.0);
        let params = stiffness_from_frequencies(a.min(b), a.max(b)).unwrap();
        let spec = symplectic_spectrum(&build_initial_covariance(params)).unwrap();
        for nu in spec.as_array() {
            worst = worst.max((nu - 0.5).abs());
        }
    }
    verdict(1, worst <= 1e-12, started, format!("max |nu - 1/2| = {worst:.3e} (tol 1e-12)"))
}

fn criterion_02_entropies_agree_at_t0() -> bool {
    let started = Instant::now();
    let grid: Vec<f64> = (0..10).map(|i| 0.1 + 4.9 * i as f64 / 9.0).collect();
    let mut worst = 0.0_f64;
    for &wp in &grid {
        for &wm in &grid {
            let schedule = QuenchSchedule::constant(wp, wm).unwrap();
            let state = build_initial_covariance(schedule.pre_quench());
            let s_c = entanglement_entropy(&reduce_to_oscillator(&state, 1).unwrap()).unwrap();
            let s_a = analytic_entropy_at(&schedule, 0.0).unwrap();
            let s_z = static_entropy(wp, wm).unwrap().entropy;
            worst = worst.max((s_c - s_a).abs()).max((s_c - s_z).abs()).max((s_a - s_z).abs());
        }
    }
    verdict(2, worst <= 1e-8, started, format!("max pairwise difference {worst:.3e} (tol 1e-8)"))
}

fn criterion_03_purity_is_preserved() -> bool {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for name in FIG1 {
        let s = load(name);
        assert_eq!(s.dt, 1e-3);
        assert!(s.t_max >= 100.0);
        let data = simulate(&s).unwrap();
        worst = worst.max(
            data.rows
                .iter()
                .filter(|r| r.t <= 100.0)
                .map(|r| r.purity_defect)
                .fold(0.0, f64::max),
        );
    }
    verdict(3, worst <= 1e-6, started, format!("max purity defect {worst:.3e} (tol 1e-6)"))
}

/// Entropy of the one-oscillator reduced density kernel, obtained by
/// discretizing ρ(x, x') and diagonalizing it.
fn kernel_entropy(omega_p: f64, omega_m: f64, n: usize) -> f64 {
    // ψ(x, y) ∝ exp(−½[a(x² + y²) + 2b·xy]); integrate y out analytically.
    let a = 0.5 * (omega_p + omega_m);
    let b = 0.5 * (omega_p - omega_m);
    let kernel = |x: f64, xp: f64| (-0.5 * a * (x * x + xp * xp) + b * b * (x + xp).powi(2) / (4.0 * a)).exp();

    let half_width = 8.0 / omega_p.sqrt();
    let h = 2.0 * half_width / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * h).collect();
    let rho = DMatrix::from_fn(n, n, |i, j| h * kernel(xs[i], xs[j]));
    let eig = SymmetricEigen::new(rho).eigenvalues;
    let trace: f64 = eig.iter().sum();
    eig.iter()
        .map(|l| l / trace)
        .filter(|p| *p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

fn criterion_04_kernel_oracle_matches_static_entropy() -> bool {
    let started = Instant::now();
    let oracle = kernel_entropy(0.9, 4.9, 400);
    let s = static_entropy(0.9, 4.9).unwrap().entropy;
    let err = (oracle - s).abs();
    verdict(
        4,
        err <= 1e-3 && (s - 0.5234).abs() < 5e-5,
        started,
        format!("kernel {oracle:.6}, closed form {s:.6}, |diff| {err:.3e} (tol 1e-3)"),
    )
}

fn criterion_05_ermakov_matches_closed_form() -> bool {
    let started = Instant::now();
    let dt = 1e-3;
    let mut worst = 0.0_f64;
    for name in FIG1 {
        let q = load(name).schedule;
        let coeffs = quench_coefficients(&q);
        for (w0, w1, mode) in [
            (q.omega_p0, q.omega_p1, coeffs.p_mode()),
            (q.omega_m0, q.omega_m1, coeffs.m_mode()),
        ] {
            let profile = SuddenQuench { omega0: w0, omega1: w1 };
            for sample in ermakov_integrate(&profile, w0, dt, 50.0).unwrap() {
                let (g, _) = quench_gamma(mode, w1, sample.t).unwrap();
                worst = worst.max((sample.gamma - g).abs());
            }
        }
    }
    verdict(5, worst <= 1e-6, started, format!("sup |gamma_num - gamma_exact| = {worst:.3e} (tol 1e-6)"))
}

fn criterion_06_period_ratio() -> bool {
    let started = Instant::now();
    let ratio = |name: &str| {
        let data = simulate(&load(name)).unwrap();
        let pa = estimate_period(&data.s_a()).unwrap();
        let pc = estimate_period(&data.s_c()).unwrap();
        (pa / pc, pa, pc)
    };
    let (ra, pa, pc) = ratio("fig1a");
    let (rb, _, _) = ratio("fig1b");
    let in_band = (2.0..=2.6).contains(&ra);
    let converging = (rb - 1.0).abs() < (ra - 1.0).abs();
    verdict(
        6,
        in_band && converging,
        started,
        format!(
            "fig1a ratio {ra:.6} (P_a {pa:.4}, P_c {pc:.4}; want [2.0, 2.6]), \
             fig1b ratio {rb:.6} (want closer to 1 than fig1a)"
        ),
    )
}

fn criterion_07_fig1b_is_best_approximation() -> bool {
    let started = Instant::now();
    let errors: Vec<(&str, f64)> = FIG1
        .iter()
        .map(|name| {
            let data = simulate(&load(name)).unwrap();
            let err = data
                .rows
                .iter()
                .filter(|r| r.t <= 83.0)
                .map(|r| (r.s_a - r.s_c).abs())
                .fold(0.0, f64::max);
            (*name, err)
        })
        .collect();
    let best = errors
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|e| e.0)
        .unwrap();
    let listing: Vec<String> = errors.iter().map(|(n, e)| format!("{n} {e:.3e}")).collect();
    verdict(
        7,
        best == "fig1b",
        started,
        format!("max|S_a - S_c| over t <= 83: {}; argmin {best}", listing.join(", ")),
    )
}

fn criterion_08_logarithmic_growth() -> bool {
    let started = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in FIG3 {
        let s = load(name);
        assert_eq!(s.t_max, 200.0);
        let data = simulate(&s).unwrap();
        let start = data.analysis.fit_window_start;
        let fit = fit_log_model(&data.s_c().window(start, f64::INFINITY), FitMode::FixZZero).unwrap();
        let r2 = fit.r2_adj.unwrap_or(f64::NAN);
        let mut ok = r2 >= 0.85;
        if name == "fig3a" || name == "fig3b" {
            ok &= (fit.u - 1.0).abs() <= 0.25;
        }
        pass &= ok;
        parts.push(format!("{name} R2adj {r2:.4} u {:.4}", fit.u));
    }
    verdict(8, pass, started, format!("{} (R2adj >= 0.85; u in [0.75, 1.25] for a, b)", parts.join(", ")))
}

fn criterion_09_integrator_order() -> bool {
    let started = Instant::now();
    let q = load("fig1a").schedule;
    let final_cov = |dt: f64| {
        let states = evolve(&q, &Integration::new(dt, 10.0, usize::MAX)).unwrap();
        let last = states.last().unwrap();
        assert!((last.t - 10.0).abs() < 1e-12);
        last.cov
    };
    let (c1, c2, c3) = (final_cov(0.02), final_cov(0.01), final_cov(0.005));
    let sup = |m: nalgebra::Matrix4<f64>| m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let order = (sup(c1 - c2) / sup(c2 - c3)).log2();
    verdict(9, order >= 3.7, started, format!("observed order {order:.3} (want >= 3.7)"))
}

fn criterion_10_runs_are_deterministic() -> bool {
    let started = Instant::now();
    let all = quench_entropy::scenario::presets();
    let mut bytes = 0;
    let mut differing = Vec::new();
    for s in &all {
        let first = simulate(s).unwrap().csv();
        let second = simulate(s).unwrap().csv();
        bytes += first.len();
        if first.as_bytes() != second.as_bytes() {
            differing.push(s.name.clone());
        }
    }
    verdict(
        10,
        differing.is_empty(),
        started,
        format!("{} presets, {bytes} CSV bytes, differing: {differing:?}", all.len()),
    )
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        criterion_01_ground_state_is_pure,
        criterion_02_entropies_agree_at_t0,
        criterion_03_purity_is_preserved,
        criterion_04_kernel_oracle_matches_static_entropy,
        criterion_05_ermakov_matches_closed_form,
        criterion_06_period_ratio,
        criterion_07_fig1b_is_best_approximation,
        criterion_08_logarithmic_growth,
        criterion_09_integrator_order,
        criterion_10_runs_are_deterministic,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
