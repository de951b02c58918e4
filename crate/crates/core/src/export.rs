//! Flat-file export of trajectories and analysis tables.
//!
//! Trajectory CSVs carry columns t, x_1..x_N (optional), z_1..z_P (coupled
//! runs), m_1..m_P, E; the energy column requires saliency weights, either
//! the trajectory's own z state or an explicitly frozen alpha. Floats are
//! written in shortest round-trip form, so identical runs produce identical
//! bytes.

use std::io::Write;

use ndarray::Array1;

use crate::analysis::{CrosscheckTable, TransitionReport};
use crate::dynamics::{energy, Trajectory};
use crate::error::Result;
use crate::memory::{overlap, MemorySet, SaliencyWeights};

/// Where the energy column's saliency weights come from.
#[derive(Debug, Clone, Copy)]
pub enum AlphaSource<'a> {
    /// alpha(t) = z(t) (.) z(t) from the trajectory's slow state.
    FromSaliency,
    /// A frozen alpha vector (frozen-weight runs).
    Fixed(&'a Array1<f64>),
    /// Omit the energy column (no natural energy, e.g. the one-timescale
    /// transition-matrix model).
    None,
}

/// Write a trajectory as CSV with a header row.
pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory,
    mem: &MemorySet,
    alpha: AlphaSource<'_>,
    include_x: bool,
    writer: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let n = mem.n();
    let p = mem.p();
    let has_z = !traj.z_states.is_empty();
    let has_energy = !matches!(alpha, AlphaSource::None) && (has_z || matches!(alpha, AlphaSource::Fixed(_)));

    let mut header = vec!["t".to_string()];
    if include_x {
        header.extend((1..=n).map(|i| format!("x_{i}")));
    }
    if has_z {
        header.extend((1..=p).map(|i| format!("z_{i}")));
    }
    header.extend((1..=p).map(|i| format!("m_{i}")));
    if has_energy {
        header.push("E".to_string());
    }
    out.write_record(&header)?;

    for (k, t) in traj.times.iter().enumerate() {
        let x = &traj.x_states[k];
        let m = overlap(x, mem, traj.params.act)?;
        let mut record = vec![format!("{t}")];
        if include_x {
            record.extend(x.iter().map(|v| format!("{v}")));
        }
        if has_z {
            record.extend(traj.z_states[k].iter().map(|v| format!("{v}")));
        }
        record.extend(m.iter().map(|v| format!("{v}")));
        if has_energy {
            let alpha_vec = match alpha {
                AlphaSource::Fixed(a) => a.clone(),
                AlphaSource::FromSaliency => {
                    SaliencyWeights::new(traj.z_states[k].clone()).alpha()
                }
                AlphaSource::None => unreachable!(),
            };
            let e = energy(x, &alpha_vec, mem, traj.params.act)?;
            record.push(format!("{e}"));
        }
        out.write_record(&record)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Write a transition report as CSV, one row per completed transition.
pub fn write_transitions_csv<W: Write>(report: &TransitionReport, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "transition",
        "from_memory",
        "to_memory",
        "escape_time",
        "saliency_unit_crossing",
        "peak_saliency",
    ])?;
    let fmt_at = |values: &[f64], k: usize| {
        values
            .get(k)
            .map(|v| format!("{v}"))
            .unwrap_or_default()
    };
    for (k, window) in report.retrieved_sequence.windows(2).enumerate() {
        out.write_record([
            format!("{}", k + 1),
            format!("{}", window[0]),
            format!("{}", window[1]),
            fmt_at(&report.escape_times, k),
            fmt_at(&report.saliency_unit_crossings, k),
            fmt_at(&report.peak_saliencies, k),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Write an ODE-versus-map comparison table as CSV.
pub fn write_crosscheck_csv<W: Write>(table: &CrosscheckTable, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "transition",
        "map_peak",
        "ode_peak",
        "peak_rel_err",
        "map_interval",
        "ode_interval",
        "interval_rel_err",
    ])?;
    for row in &table.rows {
        out.write_record([
            format!("{}", row.transition),
            format!("{}", row.map_peak),
            format!("{}", row.ode_peak),
            format!("{}", row.peak_rel_err),
            format!("{}", row.map_interval),
            format!("{}", row.ode_interval),
            format!("{}", row.interval_rel_err),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
