//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Criteria 5-7 share a single coupled reproduction run (kappa = 5, N = 64
//! Hadamard memories, P = 4, tau_x = 0.01, tau_z = 1, x(0) = 9 xi^1,
//! z(0) = 3 e^(1), dt = 5e-4, t_end = 20).

use std::sync::OnceLock;

use idp_hopfield::{
    classify_regime, detect_transitions, energy, equilibrium_status, fixed_points,
    generate_memories, idp_rhs, integrate, iterate_map, kleinfeld_matrix, simulate_idp,
    simulate_two_timescale, synaptic_matrix, Activation, EquilibriumStatus, IntegrationOptions,
    MapOrbit, MemorySet, Method, OrbitTermination, Regime, ReasoningMatrix, SystemParams,
    Trajectory, TransitionReport, DEFAULT_BACKGROUND_CUE, DEFAULT_OVERLAP_THRESHOLD,
};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("{criterion}: PASS");
    } else {
        println!("{criterion}: FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("{criterion} failed with {} issue(s)", failures.len());
    }
}

fn hadamard_set(n: usize, p: usize) -> MemorySet {
    generate_memories(n, p, idp_hopfield::OrthogonalityMode::Exact, 0).unwrap()
}

fn basis(p: usize, nu: usize) -> Array1<f64> {
    let mut e = Array1::zeros(p);
    e[nu] = 1.0;
    e
}

const Z_PLUS_5: f64 = 3.618033988749895; // (5 + sqrt 5) / 2

fn coupled_run(kappa: f64) -> (Trajectory, TransitionReport) {
    let mem = hadamard_set(64, 4);
    let params = SystemParams::new(
        kappa,
        0.01,
        1.0,
        mem.clone(),
        ReasoningMatrix::circulant(4).unwrap(),
        Activation::HardTanh,
    )
    .unwrap();
    let x0 = mem.pattern(0).mapv(|v| 9.0 * v);
    let z0 = array![3.0, 0.0, 0.0, 0.0];
    let opts = IntegrationOptions::new(5e-4, 20.0, Method::Rk4, 10).unwrap();
    let traj = simulate_two_timescale(&params, &x0, &z0, &opts, DEFAULT_BACKGROUND_CUE).unwrap();
    let report = detect_transitions(&traj, &mem, DEFAULT_OVERLAP_THRESHOLD).unwrap();
    (traj, report)
}

fn fig2_run() -> &'static (Trajectory, TransitionReport) {
    static RUN: OnceLock<(Trajectory, TransitionReport)> = OnceLock::new();
    RUN.get_or_init(|| coupled_run(5.0))
}

#[test]
fn criterion_01_critical_gain() {
    let mut failures = Vec::new();
    for kappa in [1.0, 2.0, 3.0, 3.99] {
        if fixed_points(kappa).is_some() {
            failures.push(format!("fixed_points({kappa}) should be none"));
        }
    }
    match fixed_points(4.0) {
        Some(fp) => {
            if (fp.z_minus - 2.0).abs() > 1e-12 || (fp.z_plus - 2.0).abs() > 1e-12 {
                failures.push(format!(
                    "fixed_points(4) = ({}, {}), expected (2, 2)",
                    fp.z_minus, fp.z_plus
                ));
            }
        }
        None => failures.push("fixed_points(4) should exist".into()),
    }
    report("criterion 1 (critical gain)", failures);
}

#[test]
fn criterion_02_fixed_point_formula() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let kappa = rng.gen_range(4.0..=100.0);
        match fixed_points(kappa) {
            Some(fp) => {
                for z in [fp.z_minus, fp.z_plus] {
                    let residual = z * z - kappa * z + kappa;
                    if residual.abs() > 1e-10 {
                        failures.push(format!("kappa={kappa}: residual {residual} at Z={z}"));
                    }
                }
                if !(fp.z_plus >= fp.z_minus && fp.z_minus > 1.0) {
                    failures.push(format!(
                        "kappa={kappa}: ordering violated ({}, {})",
                        fp.z_minus, fp.z_plus
                    ));
                }
            }
            None => failures.push(format!("kappa={kappa}: fixed points missing")),
        }
        if failures.len() > 5 {
            break;
        }
    }
    report("criterion 2 (fixed-point formula)", failures);
}

#[test]
fn criterion_03_map_convergence() {
    let mut failures = Vec::new();
    for z0 in [1.5, 2.0, 3.0, 3.618, 10.0] {
        let orbit = iterate_map(z0, 5.0, 200, 1e-9).unwrap();
        match orbit.terminated {
            OrbitTermination::ConvergedTo(z) => {
                if (z - Z_PLUS_5).abs() > 1e-9 {
                    failures.push(format!("Z0={z0}: limit {z} not within 1e-9 of Z+"));
                }
            }
            other => failures.push(format!("Z0={z0}: terminated {other:?}")),
        }
        if orbit.values.len() > 201 {
            failures.push(format!("Z0={z0}: took {} steps", orbit.values.len() - 1));
        }
        let increasing = z0 <= Z_PLUS_5;
        for w in orbit.values.windows(2) {
            let ok = if increasing { w[1] >= w[0] } else { w[1] <= w[0] };
            if !ok {
                failures.push(format!("Z0={z0}: not monotone at {} -> {}", w[0], w[1]));
                break;
            }
        }
    }
    let orbit = iterate_map(1.2, 5.0, 200, 1e-9).unwrap();
    if !matches!(orbit.terminated, OrbitTermination::CrossedBelowOne { .. }) {
        failures.push(format!(
            "Z0=1.2 should cross below one, got {:?}",
            orbit.terminated
        ));
    }
    if classify_regime(5.0, 1.2).unwrap() != Regime::TransientThenCollapse {
        failures.push("classify_regime(5, 1.2) should be transient-then-collapse".into());
    }
    report("criterion 3 (map convergence)", failures);
}

#[test]
fn criterion_04_escape_time_law() {
    let mut failures = Vec::new();
    let dt = 1e-3;

    // Decay from Z0 = 3 crosses 1 at log 3.
    let opts = IntegrationOptions::new(dt, 2.0, Method::Rk4, 1).unwrap();
    let traj = integrate(|y| -y, &array![3.0], &opts).unwrap();
    match traj
        .times
        .iter()
        .zip(traj.x_states.iter())
        .find(|(_, s)| s[0] <= 1.0)
    {
        Some((t, _)) => {
            if (t - 3.0f64.ln()).abs() > 2.0 * dt {
                failures.push(format!("crossing at t={t}, expected log 3 within 2 dt"));
            }
        }
        None => failures.push("decay never crossed 1".into()),
    }

    // Charging curve kappa (1 - e^{-t}) at kappa = 5, 100 sample times.
    let kappa = 5.0;
    let opts = IntegrationOptions::new(dt, 5.0, Method::Rk4, 50).unwrap();
    let traj = integrate(|y| y.mapv(|z| kappa - z), &array![0.0], &opts).unwrap();
    let samples: Vec<_> = traj
        .times
        .iter()
        .zip(traj.x_states.iter())
        .take(100)
        .collect();
    if samples.len() < 100 {
        failures.push(format!("only {} sample times available", samples.len()));
    }
    for (t, state) in samples {
        let expected = kappa * (1.0 - (-t).exp());
        if (state[0] - expected).abs() > 1e-6 {
            failures.push(format!(
                "charging mismatch at t={t}: {} vs {expected}",
                state[0]
            ));
            break;
        }
    }
    report("criterion 4 (escape-time law)", failures);
}

#[test]
fn criterion_05_self_sustained_cycling() {
    let (_, rep) = fig2_run();
    let mut failures = Vec::new();

    if rep.retrieved_sequence.len() < 8 {
        failures.push(format!(
            "only {} plateaus detected",
            rep.retrieved_sequence.len()
        ));
    }
    for (k, &idx) in rep.retrieved_sequence.iter().enumerate() {
        if idx != (k % 4) + 1 {
            failures.push(format!(
                "sequence broken at plateau {k}: got {idx}, expected {}",
                (k % 4) + 1
            ));
            break;
        }
    }

    let intervals: Vec<f64> = rep.escape_times.windows(2).map(|w| w[1] - w[0]).collect();
    if intervals.len() < 3 {
        failures.push("fewer than 3 inter-escape intervals".into());
    } else {
        let period = Z_PLUS_5.ln();
        for iv in &intervals[intervals.len() - 3..] {
            let rel = (iv - period).abs() / period;
            if rel > 0.05 {
                failures.push(format!(
                    "final interval {iv} deviates {:.2}% from log Z+ = {period}",
                    100.0 * rel
                ));
            }
        }
    }

    for (k, &m) in rep.plateau_max_overlaps.iter().enumerate() {
        if m < 0.999 {
            failures.push(format!("plateau {k} max overlap {m} < 0.999"));
        }
    }
    if rep.regime != Some(Regime::SelfSustained) {
        failures.push(format!("regime {:?}, expected self-sustained", rep.regime));
    }
    report("criterion 5 (self-sustained cycling)", failures);
}

#[test]
fn criterion_06_subcritical_collapse() {
    let (traj, rep) = coupled_run(3.0);
    let mut failures = Vec::new();
    if rep.regime == Some(Regime::SelfSustained) {
        failures.push("kappa = 3 run classified self-sustained".into());
    }
    let final_norm = traj
        .end_x()
        .unwrap()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    if final_norm >= 1e-3 {
        failures.push(format!("final sup norm {final_norm} >= 1e-3 at t = 20"));
    }
    report("criterion 6 (subcritical collapse)", failures);
}

#[test]
fn criterion_07_peak_saliency_oracle() {
    let (_, rep) = fig2_run();
    let mut failures = Vec::new();
    let orbit: MapOrbit = iterate_map(3.0, 5.0, 20, 0.0).unwrap();
    if rep.peak_saliencies.len() < 8 {
        failures.push(format!(
            "only {} transitions with peaks",
            rep.peak_saliencies.len()
        ));
    }
    for k in 0..rep.peak_saliencies.len().min(8) {
        let ode = rep.peak_saliencies[k];
        let map = orbit.values[k + 1];
        let rel = (ode - map).abs() / map;
        if rel > 0.05 {
            failures.push(format!(
                "transition {}: ODE peak {ode} vs map {map} ({:.2}%)",
                k + 1,
                100.0 * rel
            ));
        }
    }
    report("criterion 7 (peak-saliency oracle)", failures);
}

#[test]
fn criterion_08_equilibrium_and_stability() {
    let mut failures = Vec::new();
    let mem = hadamard_set(64, 4);
    let act = Activation::HardTanh;

    for &zsq in &[1.5, 2.0, 4.0] {
        let x = mem.pattern(0).mapv(|v| zsq * v);
        let alpha = basis(4, 0).mapv(|v| zsq * v);
        let rhs = idp_rhs(&x, &alpha, &mem, act).unwrap();
        let residual = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if residual > 1e-12 {
            failures.push(format!("z^2={zsq}: equilibrium residual {residual}"));
        }

        // Perturbation recovery for z^2 > 1.
        let eps = 0.05 * (zsq - 1.0);
        let eta = Array1::from_shape_fn(64, |i| if i % 3 == 0 { -1.0 } else { 1.0 });
        let x0 = &x + &(eta * eps);
        let opts = IntegrationOptions::new(1e-2, 20.0, Method::Rk4, 200).unwrap();
        let traj = simulate_idp(&mem, &alpha, act, &x0, &opts).unwrap();
        let dist = traj
            .end_x()
            .unwrap()
            .iter()
            .zip(x.iter())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        if dist > 1e-6 {
            failures.push(format!("z^2={zsq}: perturbation not recovered ({dist})"));
        }
    }

    // Below threshold only the classification is asserted.
    let status = equilibrium_status(&array![0.5f64.sqrt(), 1.5f64.sqrt(), 1.0]);
    if status[0] != EquilibriumStatus::NotExisting {
        failures.push("z^2 = 0.5 should classify as not-existing".into());
    }
    if status[1] != EquilibriumStatus::ExistsStable {
        failures.push("z^2 = 1.5 should classify as exists-stable".into());
    }
    if status[2] != EquilibriumStatus::Marginal {
        failures.push("z^2 = 1 should classify as marginal".into());
    }
    report("criterion 8 (equilibrium and stability)", failures);
}

#[test]
fn criterion_09_energy_descent() {
    let mut failures = Vec::new();
    let mem = hadamard_set(64, 4);
    let act = Activation::HardTanh;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = IntegrationOptions::new(1e-3, 2.0, Method::Rk4, 1).unwrap();

    for run in 0..50 {
        let x0 = Array1::from_shape_fn(64, |_| rng.gen_range(-2.0..2.0));
        let z = Array1::from_shape_fn(4, |_| rng.gen_range(0.0..2.0));
        let alpha = &z * &z;
        let traj = simulate_idp(&mem, &alpha, act, &x0, &opts).unwrap();
        let mut prev = f64::INFINITY;
        for (k, x) in traj.x_states.iter().enumerate() {
            let e = energy(x, &alpha, &mem, act).unwrap();
            if e > prev + 1e-8 {
                failures.push(format!(
                    "run {run}: energy rose by {} at step {k}",
                    e - prev
                ));
                break;
            }
            prev = e;
        }
        if failures.len() > 3 {
            break;
        }
    }
    report("criterion 9 (energy descent)", failures);
}

#[test]
fn criterion_10_structural_identities() {
    let mut failures = Vec::new();
    let mem = hadamard_set(64, 4);
    let a = ReasoningMatrix::circulant(4).unwrap();
    let m = mem.memory_matrix();

    // Q = M A M^T.
    let q = kleinfeld_matrix(&mem, &a).unwrap();
    let q_factored = m.as_array().dot(a.as_array()).dot(&m.as_array().t());
    let q_err = (&q - &q_factored).iter().fold(0.0f64, |mx, &v| mx.max(v.abs()));
    if q_err > 1e-10 {
        failures.push(format!("Q vs M A M^T deviation {q_err}"));
    }

    // W(1) equals the classical Hopfield matrix.
    let w = synaptic_matrix(&mem, &Array1::ones(4)).unwrap();
    let mut hopfield = Array2::<f64>::zeros((64, 64));
    for mu in 0..4 {
        let xi = mem.pattern(mu);
        for i in 0..64 {
            for j in 0..64 {
                hopfield[(i, j)] += xi[i] * xi[j] / 64.0;
            }
        }
    }
    let w_err = (&w - &hopfield).iter().fold(0.0f64, |mx, &v| mx.max(v.abs()));
    if w_err > 1e-10 {
        failures.push(format!("W(1) vs Hopfield matrix deviation {w_err}"));
    }

    // A^P = I.
    let mut power = Array2::<f64>::eye(4);
    for _ in 0..4 {
        power = a.as_array().dot(&power);
    }
    let a_err = (&power - &Array2::<f64>::eye(4))
        .iter()
        .fold(0.0f64, |mx, &v| mx.max(v.abs()));
    if a_err > 1e-10 {
        failures.push(format!("A^P vs identity deviation {a_err}"));
    }

    // M^T M = I in Exact mode.
    let gram = m.as_array().t().dot(m.as_array());
    let g_err = (&gram - &Array2::<f64>::eye(4))
        .iter()
        .fold(0.0f64, |mx, &v| mx.max(v.abs()));
    if g_err > 1e-10 {
        failures.push(format!("M^T M vs identity deviation {g_err}"));
    }

    report("criterion 10 (structural identities)", failures);
}
