//! ODE-versus-map consistency: per-transition errors at the default
//! timescale ratio, shrinkage over a ratio ladder, and near-critical
//! regime agreement.

use idp_hopfield::{
    classify_regime, crosscheck_ode_vs_map, detect_transitions, generate_memories,
    simulate_two_timescale, Activation, Error, IntegrationOptions, Method, OrthogonalityMode,
    Regime, ReasoningMatrix, SystemParams, DEFAULT_BACKGROUND_CUE, DEFAULT_OVERLAP_THRESHOLD,
};
use ndarray::Array1;

fn params(kappa: f64, tau_x: f64) -> SystemParams {
    SystemParams::new(
        kappa,
        tau_x,
        1.0,
        generate_memories(64, 4, OrthogonalityMode::Exact, 0).unwrap(),
        ReasoningMatrix::circulant(4).unwrap(),
        Activation::HardTanh,
    )
    .unwrap()
}

#[test]
fn peaks_and_intervals_within_five_percent() {
    let table = crosscheck_ode_vs_map(&params(5.0, 0.01), 3.0, 8, DEFAULT_BACKGROUND_CUE).unwrap();
    assert_eq!(table.rows.len(), 8);
    for row in &table.rows {
        assert!(
            row.peak_rel_err <= 0.05,
            "transition {}: peak error {}",
            row.transition,
            row.peak_rel_err
        );
        assert!(
            row.interval_rel_err <= 0.05,
            "transition {}: interval error {}",
            row.transition,
            row.interval_rel_err
        );
    }
    // Steady-state intervals approach the asymptotic period log Z+.
    let period = ((5.0 + 5.0f64.sqrt()) / 2.0f64).ln();
    let last = table.rows.last().unwrap();
    assert!((last.ode_interval - period).abs() / period <= 0.05);
}

#[test]
fn errors_shrink_with_timescale_separation() {
    // Ladder 0.05, 0.02, 0.01 on a fixed scenario; monotone up to 1%
    // measurement noise.
    let mut interval_errs = Vec::new();
    let mut peak_errs = Vec::new();
    for tau_x in [0.05, 0.02, 0.01] {
        let table =
            crosscheck_ode_vs_map(&params(5.0, tau_x), 3.0, 8, DEFAULT_BACKGROUND_CUE).unwrap();
        interval_errs.push(table.max_interval_rel_err());
        peak_errs.push(table.max_peak_rel_err());
    }
    for errs in [&interval_errs, &peak_errs] {
        for w in errs.windows(2) {
            assert!(
                w[1] <= w[0] + 0.01,
                "errors did not shrink: {errs:?} (intervals {interval_errs:?}, peaks {peak_errs:?})"
            );
        }
    }
}

#[test]
fn near_critical_regime_agreement() {
    // kappa = 4.05, Z0 = 2.5: self-sustained in map and ODE alike.
    assert_eq!(classify_regime(4.05, 2.5).unwrap(), Regime::SelfSustained);

    let params = params(4.05, 0.01);
    let x0 = params.mem.pattern(0).mapv(|v| 2.5 * 2.5 * v);
    let mut z0 = Array1::zeros(4);
    z0[0] = 2.5;
    let opts = IntegrationOptions::new(5e-4, 20.0, Method::Rk4, 10).unwrap();
    let traj = simulate_two_timescale(&params, &x0, &z0, &opts, DEFAULT_BACKGROUND_CUE).unwrap();
    let report = detect_transitions(&traj, &params.mem, DEFAULT_OVERLAP_THRESHOLD).unwrap();
    assert_eq!(report.regime, Some(Regime::SelfSustained));
}

#[test]
fn rejects_insufficient_separation() {
    let err = crosscheck_ode_vs_map(&params(5.0, 0.2), 3.0, 4, DEFAULT_BACKGROUND_CUE).unwrap_err();
    assert!(matches!(
        err,
        Error::InsufficientTimescaleSeparation { .. }
    ));
}
