//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them in order.

#![allow(clippy::approx_constant)]

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timebin::chain::run_chain;
use timebin::experiment::{convergence_rows, ordering_rows, parse_config, sweep_dts};
use timebin::microscopic::fitted_decay_rate;
use timebin::operator::{hermitian_eigenvalues, StateVector};
use timebin::{
    apply_channel, build_microscopic, coarse_map, dephasing_variant, evolve_microscopic, expansion_report, expm,
    extract_kraus, fit_order, integrate_rk4, iterate_channel, partial_trace, two_level_system, CoarseParams,
    DensityMatrix, FrequencyGrid, LindbladModel, Operator, C64,
};

fn report(id: u32, name: &str, ok: bool, detail: String, elapsed: Duration, budget: Duration) -> bool {
    let in_time = elapsed < budget;
    let pass = ok && in_time;
    println!(
        "[{}] AC{id} {name}: {detail}; runtime {:.3}s (< {}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn tls_family(gamma: f64, dt: f64, n_max: usize) -> (Operator, timebin::KrausFamily) {
    let sys = two_level_system(0.0, 0.0);
    let p = CoarseParams::new(gamma, dt, n_max).unwrap();
    let u = coarse_map(&sys, &p).unwrap();
    let f = extract_kraus(&u, 2, n_max, dt).unwrap();
    (u, f)
}

#[test]
fn ac1_spontaneous_emission_decay() {
    let start = Instant::now();
    let (_, f) = tls_family(1.0, 0.01, 2);
    let series = iterate_channel(&f, &DensityMatrix::excited(), 100).unwrap();
    let ee = series[100].get(1, 1).re;
    let elapsed = start.elapsed();

    let expected = 0.367569;
    let analytic = (-1.0f64).exp();
    let ok = (ee - expected).abs() <= 1e-6 && (ee - analytic).abs() <= 3.5e-4;
    let detail = format!(
        "rho_ee(1)={ee:.6} (want {expected} +/- 1e-6), |rho_ee - e^-1|={:.2e} (want <= 3.5e-4)",
        (ee - analytic).abs()
    );
    assert!(report(1, "spontaneous-emission decay", ok, detail, elapsed, Duration::from_secs(1)));
}

#[test]
fn ac2_collision_to_lindblad_convergence() {
    let start = Instant::now();
    let cfg = parse_config("experiment = convergence\ndt = 0.1\nt_final = 5").unwrap();
    let dts = sweep_dts(0.1, 4);
    assert_eq!(dts, vec![0.1, 0.05, 0.025, 0.0125]);
    let rows = convergence_rows(&cfg, &dts).unwrap();
    let order = fit_order(&rows).unwrap();
    let elapsed = start.elapsed();
    let ok = (order - 1.0).abs() <= 0.15;
    let detail = format!("fitted order {order:.4} (want 1.0 +/- 0.15), rows {rows:?}");
    assert!(report(2, "collision -> Lindblad convergence", ok, detail, elapsed, Duration::from_secs(5)));
}

#[test]
fn ac3_kraus_expansion_orders() {
    let start = Instant::now();
    let sys = two_level_system(0.0, 0.0);
    let reports: Vec<_> = sweep_dts(0.04, 4)
        .into_iter()
        .map(|dt| {
            let (_, f) = tls_family(1.0, dt, 2);
            expansion_report(&f, &sys, 1.0).unwrap()
        })
        .collect();
    let r1_rows: Vec<(f64, f64)> = reports.iter().map(|r| (r.dt, r.r1)).collect();
    let order = fit_order(&r1_rows).unwrap();
    let max_r2 = reports.iter().map(|r| r.r2).fold(0.0, f64::max);
    let max_defect = reports.iter().map(|r| r.completeness_defect).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let ok = order >= 1.4 && max_r2 <= 1e-13 && max_defect <= 1e-12;
    let detail = format!("r1 order {order:.4} (>= 1.4), max r2 {max_r2:.1e} (<= 1e-13), max completeness defect {max_defect:.1e} (<= 1e-12)");
    assert!(report(3, "Kraus expansion orders", ok, detail, elapsed, Duration::from_secs(1)));
}

#[test]
fn ac4_markov_recursion_and_entanglement() {
    let start = Instant::now();
    // Six bins reach gamma t = ln 2; twelve bins cover the rise and fall of the entropy.
    let dt = LN_2 / 6.0;
    let (u, f) = tls_family(1.0, dt, 1);
    let rows = run_chain(&StateVector::basis(&[2], 1), &u, &f, 12).unwrap();
    let elapsed = start.elapsed();

    let max_defect = rows.iter().map(|r| r.report.markov_defect).fold(0.0, f64::max);
    let peak = rows
        .iter()
        .max_by(|a, b| a.report.entropy.total_cmp(&b.report.entropy))
        .unwrap();
    let peak_t = peak.step as f64 * dt;
    let ok = rows.len() == 13
        && max_defect <= 1e-10
        && (peak.report.entropy - 0.6931).abs() <= 2e-3
        && (peak_t - LN_2).abs() < 1e-12;
    let detail = format!(
        "max markov defect {max_defect:.1e} (<= 1e-10), peak entropy {:.6} nats at gamma t = {peak_t:.6} (want 0.6931 +/- 2e-3 at ln 2)",
        peak.report.entropy
    );
    assert!(report(4, "Markov recursion / factorization", ok, detail, elapsed, Duration::from_secs(5)));
}

#[test]
fn ac5_microscopic_decay_rate() {
    let start = Instant::now();
    let model = build_microscopic(FrequencyGrid::new(1601, 20.0).unwrap(), 1.0).unwrap();
    let samples = evolve_microscopic(&model, 2.5, 250).unwrap();
    let rate = -fitted_decay_rate(&samples, 0.5, 2.5).unwrap();
    let elapsed = start.elapsed();
    let rel = (rate - 1.0).abs();
    let detail = format!("fitted rate {rate:.5} (relative error {rel:.2e}, want <= 3e-2)");
    assert!(report(5, "microscopic oracle", rel <= 0.03, detail, elapsed, Duration::from_secs(30)));
}

#[test]
fn ac6_dephasing_variant() {
    let start = Instant::now();
    let sys = dephasing_variant(&two_level_system(0.0, 0.0));
    let p = CoarseParams::new(1.0, 0.01, 2).unwrap();
    let f = extract_kraus(&coarse_map(&sys, &p).unwrap(), 2, 2, 0.01).unwrap();
    let collision = iterate_channel(&f, &DensityMatrix::plus(), 100).unwrap();
    let model = LindbladModel::from_system(&sys, 1.0).unwrap();
    let lindblad = integrate_rk4(&model, &DensityMatrix::plus(), 0.01, 100).unwrap();
    let elapsed = start.elapsed();

    let target = 0.303265;
    let mut ok = true;
    let mut detail = String::new();
    for (label, series) in [("collision", &collision), ("lindblad", &lindblad)] {
        let drift = series
            .iter()
            .map(|r| (r.get(0, 0).re - 0.5).abs().max((r.get(1, 1).re - 0.5).abs()))
            .fold(0.0, f64::max);
        let coh = series[100].get(1, 0).norm();
        ok &= drift <= 1e-12 && (coh - target).abs() <= 5e-4;
        detail.push_str(&format!("{label}: population drift {drift:.1e} (<= 1e-12), |rho_eg(1)| = {coh:.6} (want {target} +/- 5e-4); "));
    }
    assert!(report(6, "dephasing variant", ok, detail, elapsed, Duration::from_secs(10)));
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let a = Operator::from_vec(
        (0..dim * dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        &[dim],
    )
    .unwrap();
    let m = &a * &a.dagger();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).unwrap()
}

#[test]
fn ac7_property_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let instances = 200;
    let (mut trace_worst, mut positivity_worst, mut hermitian_worst) = (0.0f64, 0.0f64, 0.0f64);
    let (mut unitarity_worst, mut ptrace_worst) = (0.0f64, 0.0f64);
    let mut trace_ok = true;

    for _ in 0..instances {
        let sys = two_level_system(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let sys = if rng.gen_bool(0.3) { dephasing_variant(&sys) } else { sys };
        let p = CoarseParams::new(rng.gen_range(0.0..3.0), rng.gen_range(0.001..0.2), rng.gen_range(1..4)).unwrap();
        let u = coarse_map(&sys, &p).unwrap();
        unitarity_worst = unitarity_worst.max((&u.dagger() * &u).max_abs_diff(&Operator::identity(&[u.side()])));

        let f = extract_kraus(&u, 2, p.n_max, p.dt).unwrap();
        let rho = random_density(&mut rng, 2);
        let out = apply_channel(&f, &rho).unwrap();
        let dev = (out.trace() - 1.0).abs();
        trace_ok &= dev <= f.completeness_defect() + 1e-12;
        trace_worst = trace_worst.max(dev);
        positivity_worst = positivity_worst.min(hermitian_eigenvalues(out.op())[0]);
        hermitian_worst = hermitian_worst.max(out.op().hermiticity_defect());

        // expm of a random anti-Hermitian matrix with norm up to ~10
        let dim = rng.gen_range(2..6);
        let a = Operator::from_vec(
            (0..dim * dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            &[dim],
        )
        .unwrap();
        let g = (&a - &a.dagger()).scale_real(rng.gen_range(0.1..2.0));
        let e = expm(&g).unwrap();
        unitarity_worst = unitarity_worst.max((&e.dagger() * &e).max_abs_diff(&Operator::identity(&[dim])));

        // partial trace of a random joint operator on [2, 3] or [3, 2, 2]
        let dims: &[usize] = if rng.gen_bool(0.5) { &[2, 3] } else { &[3, 2, 2] };
        let side: usize = dims.iter().product();
        let joint = random_density(&mut rng, side).into_op().with_dims(dims).unwrap();
        for keep in 0..dims.len() {
            let reduced = partial_trace(&joint, &[keep]).unwrap();
            ptrace_worst = ptrace_worst.max((reduced.trace() - joint.trace()).norm() / side as f64);
        }
    }
    let elapsed = start.elapsed();
    let ok = trace_ok
        && positivity_worst >= -1e-10
        && hermitian_worst <= 1e-12
        && unitarity_worst <= 1e-12
        && ptrace_worst <= 1e-12;
    let detail = format!(
        "{instances} instances: trace dev {trace_worst:.1e}, min eigenvalue {positivity_worst:.1e}, hermiticity {hermitian_worst:.1e}, unitarity {unitarity_worst:.1e}, partial-trace {ptrace_worst:.1e} (per dim)"
    );
    assert!(report(7, "property suite", ok, detail, elapsed, Duration::from_secs(10)));
}

#[test]
fn ac8_ordering_residual_orders() {
    let start = Instant::now();
    let driven = parse_config("experiment = ordering-probe\nsystem = tls-driven\ndrive = 1\ndt = 0.1").unwrap();
    let undriven = parse_config("experiment = ordering-probe\ndt = 0.1").unwrap();
    let dts = sweep_dts(0.1, 3);
    let driven_order = fit_order(&ordering_rows(&driven, &dts).unwrap()).unwrap();
    let undriven_order = fit_order(&ordering_rows(&undriven, &dts).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let ok = driven_order >= 1.4 && undriven_order >= 1.9;
    let detail = format!("driven order {driven_order:.4} (>= 1.4), undriven order {undriven_order:.4} (>= 1.9)");
    assert!(report(8, "ordering-residual probe", ok, detail, elapsed, Duration::from_secs(5)));
}
