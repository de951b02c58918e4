//! Slow-reasoning analysis: the scalar escape map Z_{t+1} = kappa (1 - 1/Z_t)
//! that governs successive peak saliency values, its fixed points and regime
//! structure, per-memory equilibrium classification, event detection on
//! simulated trajectories, and the ODE-versus-map cross-validation.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    simulate_two_timescale, IntegrationOptions, Method, SystemParams, Trajectory,
};
use crate::error::{Error, Result};
use crate::memory::{overlap, MemorySet};

/// Long-run behavior of the slow reasoning dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Asymptotically periodic cycling of retrieved memories.
    SelfSustained,
    /// Activity decays to the origin without completing a transition.
    Collapse,
    /// One or more transitions occur before the activity decays.
    TransientThenCollapse,
}

/// Default half-width of the band around z^2 = 1 treated as marginal.
pub const DEFAULT_MARGINAL_BAND: f64 = 1e-9;

/// Default overlap threshold for plateau detection.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.99;

/// Sup-norm below which trajectory activity counts as collapsed.
pub const COLLAPSE_NORM: f64 = 1e-3;

/// One step of the escape map: kappa (1 - 1/Z), defined for Z > 1.
pub fn map_step(z: f64, kappa: f64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::BelowUnitSaliency {
            name: "Z",
            value: z,
        });
    }
    Ok(kappa * (1.0 - 1.0 / z))
}

/// Smallest gain at which the escape map has fixed points above 1, located
/// by bisecting the sign change of the discriminant kappa^2 - 4 kappa.
pub fn critical_gain() -> f64 {
    let disc = |k: f64| k * k - 4.0 * k;
    let (mut lo, mut hi) = (1.0f64, 8.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if disc(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Fixed points Z- <= Z+ of the escape map, the roots of Z^2 - kappa Z + kappa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub z_minus: f64,
    pub z_plus: f64,
}

/// Fixed points of the escape map, when they exist.
///
/// Returns None while the discriminant kappa^2 - 4 kappa is negative
/// (0 < kappa < 4); at kappa = 4 both roots coincide at 2 exactly.
pub fn fixed_points(kappa: f64) -> Option<FixedPoints> {
    if kappa <= 0.0 {
        return None;
    }
    let disc = kappa * kappa - 4.0 * kappa;
    if disc < 0.0 {
        return None;
    }
    let z_plus = 0.5 * (kappa + disc.sqrt());
    // Vieta: the product of the roots is kappa; avoids cancellation in Z-.
    let z_minus = kappa / z_plus;
    Some(FixedPoints { z_minus, z_plus })
}

/// First escape time log Z0 (in units of tau_z), for Z0 > 1.
pub fn first_escape_time(z0: f64) -> Result<f64> {
    if !(z0 > 1.0) {
        return Err(Error::BelowUnitSaliency {
            name: "Z0",
            value: z0,
        });
    }
    Ok(z0.ln())
}

/// Asymptotic transition period log Z+ (in units of tau_z), for kappa >= 4.
pub fn asymptotic_period(kappa: f64) -> Result<f64> {
    match fixed_points(kappa) {
        Some(fp) => Ok(fp.z_plus.ln()),
        None => Err(Error::SubcriticalGain { kappa }),
    }
}

/// Analytic regime of the slow dynamics for gain kappa and initial peak
/// saliency Z0 > 1.
///
/// Z0 exactly at Z- sits on the unstable fixed point: the orbit is constant
/// there analytically, so it is classified SelfSustained, but the point is
/// not robust to perturbation.
pub fn classify_regime(kappa: f64, z0: f64) -> Result<Regime> {
    if !(z0 > 1.0) {
        return Err(Error::BelowUnitSaliency {
            name: "Z0",
            value: z0,
        });
    }
    Ok(match fixed_points(kappa) {
        None => Regime::Collapse,
        Some(fp) => {
            if z0 >= fp.z_minus {
                Regime::SelfSustained
            } else {
                Regime::TransientThenCollapse
            }
        }
    })
}

/// Why an orbit of the escape map stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitTermination {
    /// Successive values came within the tolerance of each other.
    ConvergedTo(f64),
    /// The orbit left the map's domain; `0` indexes Z0 in `values`.
    CrossedBelowOne { step: usize },
    /// Neither happened within the step budget.
    MaxStepsReached,
}

/// Orbit Z0, Z1, ... of the escape map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapOrbit {
    pub kappa: f64,
    pub values: Vec<f64>,
    pub terminated: OrbitTermination,
}

/// Iterate the escape map from Z0 > 1.
///
/// Stops when successive values differ by less than `tol`, when a value
/// drops to 1 or below (the derivation is invalid past that point), or
/// after `max_steps` applications of the map.
pub fn iterate_map(z0: f64, kappa: f64, max_steps: usize, tol: f64) -> Result<MapOrbit> {
    if !(z0 > 1.0) {
        return Err(Error::BelowUnitSaliency {
            name: "Z0",
            value: z0,
        });
    }
    let mut values = vec![z0];
    let mut current = z0;
    for _ in 0..max_steps {
        let next = map_step(current, kappa)?;
        values.push(next);
        if next <= 1.0 {
            let step = values.len() - 1;
            return Ok(MapOrbit {
                kappa,
                values,
                terminated: OrbitTermination::CrossedBelowOne { step },
            });
        }
        if (next - current).abs() < tol {
            return Ok(MapOrbit {
                kappa,
                values,
                terminated: OrbitTermination::ConvergedTo(next),
            });
        }
        current = next;
    }
    Ok(MapOrbit {
        kappa,
        values,
        terminated: OrbitTermination::MaxStepsReached,
    })
}

/// Existence/stability classification of a memory as an equilibrium of the
/// fast dynamics, per component of the saliency state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumStatus {
    /// z_nu^2 > 1: the memory exists and is locally exponentially stable.
    ExistsStable,
    /// z_nu^2 < 1: no equilibrium along this memory.
    NotExisting,
    /// z_nu^2 = 1 (within the band): marginal continuum.
    Marginal,
}

/// Classify each component of z with the default marginal band.
pub fn equilibrium_status(z: &Array1<f64>) -> Vec<EquilibriumStatus> {
    equilibrium_status_with_band(z, DEFAULT_MARGINAL_BAND)
}

/// Classify each component of z, treating |z^2 - 1| <= band as marginal.
pub fn equilibrium_status_with_band(z: &Array1<f64>, band: f64) -> Vec<EquilibriumStatus> {
    z.iter()
        .map(|&zv| {
            let zsq = zv * zv;
            if (zsq - 1.0).abs() <= band {
                EquilibriumStatus::Marginal
            } else if zsq > 1.0 {
                EquilibriumStatus::ExistsStable
            } else {
                EquilibriumStatus::NotExisting
            }
        })
        .collect()
}

/// Detected retrieval events of one trajectory.
///
/// `retrieved_sequence` holds 1-based memory indices in plateau order.
/// `escape_times` (units of tau_z) mark the end of each plateau that hands
/// over to a later plateau; `saliency_unit_crossings` are the corresponding
/// times at which the plateau's own saliency weight drops through 1 (empty
/// for runs without a slow state). `regime` is None when the trajectory
/// neither collapsed nor settled into uniform cycling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub retrieved_sequence: Vec<usize>,
    pub escape_times: Vec<f64>,
    pub saliency_unit_crossings: Vec<f64>,
    pub peak_saliencies: Vec<f64>,
    pub plateau_max_overlaps: Vec<f64>,
    pub regime: Option<Regime>,
    pub final_x_norm_inf: f64,
}

struct Plateau {
    index: usize, // 0-based memory index
    start: usize, // recorded-step index
    end: usize,
    max_overlap: f64,
}

/// Detect retrieval plateaus and transitions from a trajectory.
///
/// The retrieved index at a recorded step is argmax_nu m_nu when the largest
/// overlap reaches `overlap_threshold`, else none. An escape is the step
/// where one plateau ends given that another (different) plateau follows;
/// its time is the last step of the old plateau, reported in units of tau_z.
pub fn detect_transitions(
    traj: &Trajectory,
    mem: &MemorySet,
    overlap_threshold: f64,
) -> Result<TransitionReport> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if !(overlap_threshold > 0.0 && overlap_threshold < 1.0) {
        return Err(Error::InvalidParameter {
            name: "overlap_threshold",
            reason: format!("must lie in (0, 1), got {overlap_threshold}"),
        });
    }
    let act = traj.params.act;
    let tau_z = traj.params.tau_z;

    // Retrieved index per recorded step.
    let mut retrieved: Vec<Option<usize>> = Vec::with_capacity(traj.len());
    for x in &traj.x_states {
        let m = overlap(x, mem, act)?;
        let (argmax, max) = m
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(ai, av), (i, &v)| {
                if v > av {
                    (i, v)
                } else {
                    (ai, av)
                }
            });
        retrieved.push((max >= overlap_threshold).then_some(argmax));
    }

    // Group into plateaus; gaps between recurrences of the same index are
    // absorbed into the plateau.
    let mut plateaus: Vec<Plateau> = Vec::new();
    for (k, r) in retrieved.iter().enumerate() {
        let Some(idx) = *r else { continue };
        match plateaus.last_mut() {
            Some(p) if p.index == idx => p.end = k,
            _ => plateaus.push(Plateau {
                index: idx,
                start: k,
                end: k,
                max_overlap: f64::NEG_INFINITY,
            }),
        }
    }
    for p in &mut plateaus {
        for k in p.start..=p.end {
            let m = overlap(&traj.x_states[k], mem, act)?;
            p.max_overlap = p.max_overlap.max(m[p.index]);
        }
    }

    let retrieved_sequence: Vec<usize> = plateaus.iter().map(|p| p.index + 1).collect();
    let plateau_max_overlaps: Vec<f64> = plateaus.iter().map(|p| p.max_overlap).collect();

    let mut escape_times = Vec::new();
    let mut saliency_unit_crossings = Vec::new();
    let mut peak_saliencies = Vec::new();
    for w in plateaus.windows(2) {
        let (old, new) = (&w[0], &w[1]);
        escape_times.push(traj.times[old.end] / tau_z);

        if !traj.z_states.is_empty() {
            // Peak of the dominant saliency over the handoff window.
            let peak = (old.end..=new.start)
                .map(|k| traj.z_states[k].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)))
                .fold(f64::NEG_INFINITY, f64::max);
            peak_saliencies.push(peak);

            // First recorded time after the plateau began at which its own
            // saliency weight drops through 1.
            if let Some(k) = (old.start..=new.start)
                .find(|&k| traj.z_states[k][old.index].abs() < 1.0)
            {
                saliency_unit_crossings.push(traj.times[k] / tau_z);
            }
        }
    }

    let final_x_norm_inf = traj
        .end_x()
        .map(|x| x.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
        .unwrap_or(0.0);

    let collapsed = final_x_norm_inf < COLLAPSE_NORM;
    let regime = if collapsed {
        if escape_times.is_empty() {
            Some(Regime::Collapse)
        } else {
            Some(Regime::TransientThenCollapse)
        }
    } else if last_intervals_uniform(&escape_times, 3, 0.05) {
        Some(Regime::SelfSustained)
    } else {
        None
    };

    Ok(TransitionReport {
        retrieved_sequence,
        escape_times,
        saliency_unit_crossings,
        peak_saliencies,
        plateau_max_overlaps,
        regime,
        final_x_norm_inf,
    })
}

/// True when the final `count` inter-escape intervals all sit within
/// `rel_tol` of their mean.
pub fn last_intervals_uniform(escape_times: &[f64], count: usize, rel_tol: f64) -> bool {
    if escape_times.len() < count + 1 {
        return false;
    }
    let intervals: Vec<f64> = escape_times
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let tail = &intervals[intervals.len() - count..];
    let mean = tail.iter().sum::<f64>() / count as f64;
    if mean <= 0.0 {
        return false;
    }
    tail.iter().all(|&iv| (iv - mean).abs() <= rel_tol * mean)
}

/// One transition of the ODE-versus-map comparison. Peaks are saliency
/// values; intervals are plateau durations in units of tau_z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow {
    pub transition: usize,
    pub map_peak: f64,
    pub ode_peak: f64,
    pub peak_rel_err: f64,
    pub map_interval: f64,
    pub ode_interval: f64,
    pub interval_rel_err: f64,
}

/// Paired per-transition quantities from the coupled ODE and the analytic map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckTable {
    pub kappa: f64,
    pub z0: f64,
    pub timescale_ratio: f64,
    pub rows: Vec<CrosscheckRow>,
}

impl CrosscheckTable {
    pub fn max_peak_rel_err(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.peak_rel_err))
    }

    pub fn max_interval_rel_err(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.interval_rel_err))
    }
}

/// Run the coupled ODE from x(0) = Z0^2 xi^1, z(0) = Z0 e^(1) and pair each
/// of the first `n_transitions` transitions with the escape-map prediction:
/// peak saliency against the map orbit value, plateau duration against
/// log Z of the plateau's starting peak.
///
/// Requires tau_x/tau_z <= 0.05; the reduction neglects O(tau_x/tau_z)
/// effects and the comparison is meaningless without separation.
pub fn crosscheck_ode_vs_map(
    params: &SystemParams,
    z0: f64,
    n_transitions: usize,
    background_cue: f64,
) -> Result<CrosscheckTable> {
    let ratio = params.timescale_ratio();
    if ratio > 0.05 {
        return Err(Error::InsufficientTimescaleSeparation { ratio });
    }
    if !(z0 > 1.0) {
        return Err(Error::BelowUnitSaliency {
            name: "Z0",
            value: z0,
        });
    }

    let orbit = iterate_map(z0, params.kappa, n_transitions + 2, 0.0)?;

    // Simulate long enough for the requested transitions: the k-th plateau
    // lasts about log Z_k, plus margin for transition lag.
    let horizon: f64 = orbit
        .values
        .iter()
        .take(n_transitions + 1)
        .map(|&z| z.max(1.05).ln())
        .sum::<f64>()
        * 1.3
        + 2.0;
    let t_end = horizon * params.tau_z;
    let dt = params.tau_x / 20.0;
    let record_dt = 5e-3 * params.tau_z;
    let stride = (record_dt / dt).round().max(1.0) as usize;
    let opts = IntegrationOptions::new(dt, t_end, Method::Rk4, stride)?;

    let x0 = params.mem.pattern(0).mapv(|v| z0 * z0 * v);
    let mut z0_vec = Array1::zeros(params.mem.p());
    z0_vec[0] = z0;
    let traj = simulate_two_timescale(params, &x0, &z0_vec, &opts, background_cue)?;
    let report = detect_transitions(&traj, &params.mem, DEFAULT_OVERLAP_THRESHOLD)?;

    let n = n_transitions
        .min(report.peak_saliencies.len())
        .min(orbit.values.len().saturating_sub(1));
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let map_peak = orbit.values[k];
        let ode_peak = report.peak_saliencies[k - 1];
        let map_interval = orbit.values[k - 1].ln();
        let ode_interval = if k == 1 {
            report.escape_times[0]
        } else {
            report.escape_times[k - 1] - report.escape_times[k - 2]
        };
        rows.push(CrosscheckRow {
            transition: k,
            map_peak,
            ode_peak,
            peak_rel_err: (ode_peak - map_peak).abs() / map_peak.abs(),
            map_interval,
            ode_interval,
            interval_rel_err: (ode_interval - map_interval).abs() / map_interval.abs(),
        });
    }

    Ok(CrosscheckTable {
        kappa: params.kappa,
        z0,
        timescale_ratio: ratio,
        rows,
    })
}
