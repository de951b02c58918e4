//! Experiment orchestration: single runs, regime sweeps, model comparison,
//! and the bundled figure-dataset reproductions.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ndarray::Array1;
use rayon::prelude::*;

use idp_hopfield::{
    asymptotic_period, classify_regime, critical_gain, detect_transitions, first_escape_time,
    fixed_points, generate_memories, overlap, simulate_idp, simulate_kleinfeld,
    simulate_two_timescale, Activation, IntegrationOptions, MemorySet, Regime, ReasoningMatrix,
    SystemParams, Trajectory, TransitionReport,
};

use crate::config::{ExperimentConfig, ModelKind};
use crate::report::{CompareReport, Endpoint, MapAnalysis, ModelMetrics, RunReport, FORMAT_VERSION};

pub const FIG2_CONFIG: &str = include_str!("../configs/fig2.json");
pub const FIG3_CONFIG: &str = include_str!("../configs/fig3.json");

pub fn regime_name(regime: Option<Regime>) -> &'static str {
    match regime {
        Some(Regime::SelfSustained) => "self_sustained",
        Some(Regime::Collapse) => "collapse",
        Some(Regime::TransientThenCollapse) => "transient_then_collapse",
        None => "undetermined",
    }
}

fn build_memories(config: &ExperimentConfig) -> anyhow::Result<MemorySet> {
    generate_memories(config.n, config.p, config.mode, config.seed)
        .context("building memory set")
}

/// Simulate the configured model; returns the trajectory and the memory set
/// it was run against.
pub fn simulate_model(
    config: &ExperimentConfig,
    model: ModelKind,
) -> anyhow::Result<(Trajectory, MemorySet)> {
    config.validate()?;
    let mem = build_memories(config)?;
    let opts = IntegrationOptions::new(
        config.dt,
        config.t_end,
        config.method,
        config.record_stride,
    )?;
    let x0 = mem.pattern(0).mapv(|v| config.z0 * config.z0 * v);
    let act = config.activation;

    let traj = match model {
        ModelKind::Idp => {
            let mut alpha = Array1::zeros(config.p);
            alpha[0] = config.z0 * config.z0;
            simulate_idp(&mem, &alpha, act, &x0, &opts)?
        }
        ModelKind::TwoTimescale => {
            let params = SystemParams::new(
                config.kappa,
                config.tau_x,
                config.tau_z,
                mem.clone(),
                ReasoningMatrix::circulant(config.p)?,
                act,
            )?;
            let mut z0 = Array1::zeros(config.p);
            z0[0] = config.z0;
            simulate_two_timescale(&params, &x0, &z0, &opts, config.background_cue)?
        }
        ModelKind::Kleinfeld => simulate_kleinfeld(
            &mem,
            &ReasoningMatrix::circulant(config.p)?,
            config.kappa,
            act,
            &x0,
            &opts,
        )?,
    };
    Ok((traj, mem))
}

fn endpoint_of(traj: &Trajectory, mem: &MemorySet) -> anyhow::Result<Endpoint> {
    let x = traj.end_x().context("trajectory is empty")?;
    let m = overlap(x, mem, traj.params.act)?;
    Ok(Endpoint {
        t: traj.end_time().unwrap_or(0.0),
        x_norm_inf: x.iter().fold(0.0f64, |mx, &v| mx.max(v.abs())),
        overlaps: m.to_vec(),
        z: traj.end_z().map(|z| z.to_vec()),
    })
}

fn map_analysis_for(config: &ExperimentConfig) -> anyhow::Result<MapAnalysis> {
    let fp = fixed_points(config.kappa);
    Ok(MapAnalysis {
        kappa_critical: critical_gain(),
        z_minus: fp.map(|f| f.z_minus),
        z_plus: fp.map(|f| f.z_plus),
        predicted_period: asymptotic_period(config.kappa).ok(),
        analytic_regime: classify_regime(config.kappa, config.z0)?,
        first_escape_time: first_escape_time(config.z0)?,
    })
}

pub struct RunArtifacts {
    pub trajectory_csv: PathBuf,
    pub transitions_csv: PathBuf,
    pub report_json: PathBuf,
    pub report: RunReport,
}

/// Run one experiment and write `<prefix>_trajectory.csv`,
/// `<prefix>_transitions.csv`, and `<prefix>_report.json` under `out_dir`.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    prefix: &str,
    with_x: bool,
) -> anyhow::Result<RunArtifacts> {
    let (traj, mem) = simulate_model(config, config.model)?;
    let transitions = detect_transitions(&traj, &mem, config.overlap_threshold)?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let trajectory_csv = out_dir.join(format!("{prefix}_trajectory.csv"));
    {
        let file = fs::File::create(&trajectory_csv)
            .with_context(|| format!("writing {}", trajectory_csv.display()))?;
        let alpha_frozen;
        let alpha = match config.model {
            ModelKind::TwoTimescale => idp_hopfield::export::AlphaSource::FromSaliency,
            ModelKind::Idp => {
                let mut a = Array1::zeros(config.p);
                a[0] = config.z0 * config.z0;
                alpha_frozen = a;
                idp_hopfield::export::AlphaSource::Fixed(&alpha_frozen)
            }
            ModelKind::Kleinfeld => idp_hopfield::export::AlphaSource::None,
        };
        idp_hopfield::export::write_trajectory_csv(&traj, &mem, alpha, with_x, file)?;
    }

    let transitions_csv = out_dir.join(format!("{prefix}_transitions.csv"));
    {
        let file = fs::File::create(&transitions_csv)
            .with_context(|| format!("writing {}", transitions_csv.display()))?;
        idp_hopfield::export::write_transitions_csv(&transitions, file)?;
    }

    let map_analysis = match config.model {
        ModelKind::TwoTimescale => Some(map_analysis_for(config)?),
        _ => None,
    };
    let report = RunReport {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        endpoint: endpoint_of(&traj, &mem)?,
        transitions,
        map_analysis,
    };
    let report_json = out_dir.join(format!("{prefix}_report.json"));
    write_json(&report_json, &report)?;

    Ok(RunArtifacts {
        trajectory_csv,
        transitions_csv,
        report_json,
        report,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    let text = serde_json::to_string_pretty(value)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// One row of the regime map.
pub struct SweepRow {
    pub kappa: f64,
    pub z0: f64,
    pub analytic: Regime,
    pub z_minus: Option<f64>,
    pub z_plus: Option<f64>,
    pub predicted_period: Option<f64>,
    pub observed: Option<Option<Regime>>,
    pub agree: Option<bool>,
}

/// Collapse and transient-then-collapse are the same family for
/// analytic-versus-observed agreement; the two routes differ only in
/// whether transitions fire before the decay.
pub fn regimes_agree(analytic: Regime, observed: Option<Regime>) -> bool {
    use Regime::*;
    matches!(
        (analytic, observed),
        (SelfSustained, Some(SelfSustained))
            | (Collapse | TransientThenCollapse, Some(Collapse | TransientThenCollapse))
    )
}

/// Regime map over a (kappa, Z0) grid. With `observe` set, each cell also
/// runs the coupled ODE and records the observed regime; cells run in
/// parallel and rows are assembled in grid order.
///
/// Observed regimes track the analytic map away from the critical gain, but
/// the finite-ratio ODE sustains transitions somewhat below kappa = 4 (each
/// handoff keeps driving the next saliency for an O(sqrt(tau_x/tau_z))
/// window). For observation grids near the threshold use tau_x/tau_z
/// <= 2e-3 and t_end >= 40 so transients resolve.
pub fn sweep(
    config: &ExperimentConfig,
    kappas: &[f64],
    z0s: &[f64],
    observe: bool,
) -> anyhow::Result<Vec<SweepRow>> {
    config.validate()?;
    let cells: Vec<(f64, f64)> = kappas
        .iter()
        .flat_map(|&k| z0s.iter().map(move |&z| (k, z)))
        .collect();

    let observe_cell = |kappa: f64, z0: f64| -> anyhow::Result<Option<Regime>> {
        let mut cell_config = config.clone();
        cell_config.kappa = kappa;
        cell_config.z0 = z0;
        let (traj, mem) = simulate_model(&cell_config, ModelKind::TwoTimescale)?;
        let report = detect_transitions(&traj, &mem, cell_config.overlap_threshold)?;
        Ok(report.regime)
    };

    let observed: Vec<Option<Option<Regime>>> = if observe {
        cells
            .par_iter()
            .map(|&(kappa, z0)| observe_cell(kappa, z0).map(Some))
            .collect::<anyhow::Result<Vec<_>>>()?
    } else {
        vec![None; cells.len()]
    };

    let mut rows = Vec::with_capacity(cells.len());
    for (&(kappa, z0), observed) in cells.iter().zip(observed) {
        let analytic = classify_regime(kappa, z0)?;
        let fp = fixed_points(kappa);
        rows.push(SweepRow {
            kappa,
            z0,
            analytic,
            z_minus: fp.map(|f| f.z_minus),
            z_plus: fp.map(|f| f.z_plus),
            predicted_period: asymptotic_period(kappa).ok(),
            observed,
            agree: observed.map(|o| regimes_agree(analytic, o)),
        });
    }
    Ok(rows)
}

/// Write sweep rows as `regime_map.csv` under `out_dir`.
pub fn write_sweep_csv(rows: &[SweepRow], observe: bool, out_dir: &Path) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("regime_map.csv");
    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut out = csv::Writer::from_writer(file);

    let mut header = vec![
        "kappa",
        "z0",
        "analytic_regime",
        "z_minus",
        "z_plus",
        "predicted_period",
    ];
    if observe {
        header.push("observed_regime");
        header.push("regimes_agree");
    }
    out.write_record(&header)?;

    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for row in rows {
        let mut record = vec![
            format!("{}", row.kappa),
            format!("{}", row.z0),
            regime_name(Some(row.analytic)).to_string(),
            fmt_opt(row.z_minus),
            fmt_opt(row.z_plus),
            fmt_opt(row.predicted_period),
        ];
        if observe {
            record.push(regime_name(row.observed.flatten()).to_string());
            record.push(
                row.agree
                    .map(|a| a.to_string())
                    .unwrap_or_default(),
            );
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(path)
}

fn metrics_of(
    traj: &Trajectory,
    mem: &MemorySet,
    report: &TransitionReport,
) -> anyhow::Result<ModelMetrics> {
    let mut max_overlap = f64::NEG_INFINITY;
    for x in &traj.x_states {
        let m = overlap(x, mem, traj.params.act)?;
        max_overlap = max_overlap.max(m.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)));
    }
    let intervals: Vec<f64> = report
        .escape_times
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let escape_cv_last3 = (intervals.len() >= 3).then(|| {
        let tail = &intervals[intervals.len() - 3..];
        let mean = tail.iter().sum::<f64>() / 3.0;
        let var = tail.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / 3.0;
        var.sqrt() / mean
    });
    Ok(ModelMetrics {
        max_overlap,
        escape_times: report.escape_times.clone(),
        intervals,
        escape_cv_last3,
        collapsed: report.final_x_norm_inf < idp_hopfield::analysis::COLLAPSE_NORM,
        observed_regime: report.regime,
    })
}

/// Side-by-side comparison of the coupled model and the one-timescale
/// baseline on matched memories and gain.
pub fn compare_models(config: &ExperimentConfig) -> anyhow::Result<CompareReport> {
    let (tt_traj, mem) = simulate_model(config, ModelKind::TwoTimescale)?;
    let tt_report = detect_transitions(&tt_traj, &mem, config.overlap_threshold)?;
    let two_timescale = metrics_of(&tt_traj, &mem, &tt_report)?;

    let (kf_traj, kf_mem) = simulate_model(config, ModelKind::Kleinfeld)?;
    let kf_report = detect_transitions(&kf_traj, &kf_mem, config.overlap_threshold)?;
    let kleinfeld = metrics_of(&kf_traj, &kf_mem, &kf_report)?;

    let analytic_regime = classify_regime(config.kappa, config.z0)?;
    let (meets_overlap_target, meets_cv_target) = if analytic_regime == Regime::SelfSustained {
        (
            Some(two_timescale.max_overlap >= 0.999),
            Some(two_timescale.escape_cv_last3.is_some_and(|cv| cv <= 0.01)),
        )
    } else {
        (None, None)
    };

    Ok(CompareReport {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        analytic_regime,
        two_timescale,
        meets_overlap_target,
        meets_cv_target,
        kleinfeld,
    })
}

/// Write a comparison report as `<prefix>_compare.json`.
pub fn write_compare_json(
    report: &CompareReport,
    out_dir: &Path,
    prefix: &str,
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{prefix}_compare.json"));
    write_json(&path, report)?;
    Ok(path)
}

/// Re-create the cyclic-retrieval comparison dataset: coupled and baseline
/// trajectories plus the side-by-side summary.
pub fn reproduce_fig2(out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let config: ExperimentConfig =
        serde_json::from_str(FIG2_CONFIG).context("parsing bundled fig2 config")?;
    config.validate()?;
    let mut written = Vec::new();

    let tt = run(&config, out_dir, "fig2_two_timescale", false)?;
    written.push(tt.trajectory_csv);
    written.push(tt.transitions_csv);
    written.push(tt.report_json);

    let mut kf_config = config.clone();
    kf_config.model = ModelKind::Kleinfeld;
    let kf = run(&kf_config, out_dir, "fig2_kleinfeld", false)?;
    written.push(kf.trajectory_csv);
    written.push(kf.transitions_csv);
    written.push(kf.report_json);

    let compare = compare_models(&config)?;
    written.push(write_compare_json(&compare, out_dir, "fig2")?);

    // Per-transition peak saliencies and intervals against the escape map.
    let params = SystemParams::new(
        config.kappa,
        config.tau_x,
        config.tau_z,
        build_memories(&config)?,
        ReasoningMatrix::circulant(config.p)?,
        config.activation,
    )?;
    let table = idp_hopfield::crosscheck_ode_vs_map(&params, config.z0, 8, config.background_cue)?;
    let path = out_dir.join("fig2_crosscheck.csv");
    {
        let file = fs::File::create(&path)?;
        idp_hopfield::export::write_crosscheck_csv(&table, file)?;
    }
    written.push(path);
    Ok(written)
}

/// Re-create the gain-dependence dataset: fixed-point curve, activation
/// shape, and coupled runs at the bundled gain variants.
pub fn reproduce_fig3(out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let config: ExperimentConfig =
        serde_json::from_str(FIG3_CONFIG).context("parsing bundled fig3 config")?;
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    // Fixed points and predicted period against the gain.
    let path = out_dir.join("fig3_fixed_points.csv");
    {
        let file = fs::File::create(&path)?;
        let mut out = csv::Writer::from_writer(file);
        out.write_record(["kappa", "z_minus", "z_plus", "predicted_period"])?;
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for i in 0..=120 {
            let kappa = 2.0 + 0.05 * i as f64;
            let fp = fixed_points(kappa);
            out.write_record([
                format!("{kappa}"),
                fmt_opt(fp.map(|f| f.z_minus)),
                fmt_opt(fp.map(|f| f.z_plus)),
                fmt_opt(asymptotic_period(kappa).ok()),
            ])?;
        }
        out.flush()?;
    }
    written.push(path);

    // Activation shape.
    let path = out_dir.join("fig3_activation.csv");
    {
        let file = fs::File::create(&path)?;
        let mut out = csv::Writer::from_writer(file);
        out.write_record(["s", "psi", "psi_prime"])?;
        let act = Activation::HardTanh;
        for i in 0..=600 {
            let s = -3.0 + 0.01 * i as f64;
            out.write_record([
                format!("{s}"),
                format!("{}", act.eval(s)),
                format!("{}", act.derivative(s)),
            ])?;
        }
        out.flush()?;
    }
    written.push(path);

    // Coupled runs at each bundled gain variant.
    let kappas = config
        .sweep
        .as_ref()
        .map(|g| g.kappas.clone())
        .unwrap_or_else(|| vec![config.kappa]);
    for kappa in kappas {
        let mut variant = config.clone();
        variant.kappa = kappa;
        let artifacts = run(&variant, out_dir, &format!("fig3_kappa{kappa}"), false)?;
        written.push(artifacts.trajectory_csv);
        written.push(artifacts.transitions_csv);
        written.push(artifacts.report_json);
    }
    Ok(written)
}
