//! `idphop`: simulate, query, sweep, compare, and reproduce bundled figure
//! datasets for the IDP Hopfield sequential-retrieval toolkit.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use idp_hopfield::{
    asymptotic_period, classify_regime, critical_gain, first_escape_time, fixed_points,
    iterate_map, OrbitTermination,
};
use idp_hopfield_cli::config::{ExperimentConfig, Overrides};
use idp_hopfield_cli::ops;

/// Environment variable providing the default output directory.
const OUT_DIR_ENV: &str = "IDPHOP_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "idphop",
    version,
    about = "Sequential memory retrieval in input-driven-plasticity Hopfield networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config JSON; omitted fields take defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the gain
    #[arg(long)]
    kappa: Option<f64>,
    /// Override the initial saliency Z0
    #[arg(long)]
    z0: Option<f64>,
    /// Override the memory seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $IDPHOP_OUT_DIR, then the working directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record every K-th integration step
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes <model>_trajectory.csv and <model>_report.json
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Include the x_1..x_N state columns in the trajectory CSV
        #[arg(long)]
        with_x: bool,
        /// Output file prefix (default: the model name)
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Escape-map queries: fixed points, regime, period, orbits
    Map {
        /// Gain
        #[arg(long)]
        kappa: f64,
        /// Initial peak saliency (enables regime classification)
        #[arg(long)]
        z0: Option<f64>,
        /// Print the orbit as CSV (step,Z) instead of the summary line
        #[arg(long)]
        orbit: bool,
        /// Orbit iteration budget
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Orbit convergence tolerance
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Regime map over a (kappa, Z0) grid; writes regime_map.csv
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated gains (falls back to the config's sweep grid)
        #[arg(long)]
        kappas: Option<String>,
        /// Comma-separated initial saliencies (falls back to the config's sweep grid)
        #[arg(long)]
        z0s: Option<String>,
        /// Also run the coupled ODE per cell and record the observed regime
        #[arg(long)]
        observe_ode: bool,
    },
    /// Compare the coupled model against the one-timescale baseline
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Output file prefix
        #[arg(long, default_value = "compare")]
        prefix: String,
    },
    /// Re-create a bundled figure dataset
    Reproduce {
        /// Which dataset: fig2 or fig3
        target: String,
        /// Output directory (default: $IDPHOP_OUT_DIR, then the working directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(common: &CommonArgs) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    Overrides {
        kappa: common.kappa,
        z0: common.z0,
        seed: common.seed,
        stride: common.stride,
    }
    .apply(&mut config);
    config.validate()?;
    Ok(config)
}

fn parse_list(text: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("parsing {what} entry {part:?}"))
        })
        .collect()
}

fn cmd_map(
    kappa: f64,
    z0: Option<f64>,
    orbit: bool,
    max_steps: usize,
    tol: f64,
) -> anyhow::Result<()> {
    if orbit {
        let z0 = z0.context("--orbit requires --z0")?;
        let orbit = iterate_map(z0, kappa, max_steps, tol)?;
        println!("step,Z");
        for (step, value) in orbit.values.iter().enumerate() {
            println!("{step},{value}");
        }
        match orbit.terminated {
            OrbitTermination::ConvergedTo(z) => eprintln!("converged to {z}"),
            OrbitTermination::CrossedBelowOne { step } => {
                eprintln!("crossed below 1 at step {step}")
            }
            OrbitTermination::MaxStepsReached => eprintln!("stopped at the step budget"),
        }
        return Ok(());
    }

    let mut line = format!("kappa={kappa} kappa_critical={}", critical_gain());
    match fixed_points(kappa) {
        Some(fp) => {
            line.push_str(&format!(
                " z_minus={} z_plus={} period={}",
                fp.z_minus,
                fp.z_plus,
                asymptotic_period(kappa)?
            ));
        }
        None => line.push_str(" fixed_points=none"),
    }
    if let Some(z0) = z0 {
        let regime = classify_regime(kappa, z0)?;
        line.push_str(&format!(
            " z0={z0} regime={} first_escape={}",
            ops::regime_name(Some(regime)),
            first_escape_time(z0)?
        ));
    }
    println!("{line}");
    Ok(())
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            common,
            with_x,
            prefix,
        } => {
            let config = load_config(&common)?;
            let dir = out_dir(common.out.clone(), &config);
            let prefix = prefix.unwrap_or_else(|| config.model.name().to_string());
            let artifacts = ops::run(&config, &dir, &prefix, with_x)?;
            println!("wrote {}", artifacts.trajectory_csv.display());
            println!("wrote {}", artifacts.transitions_csv.display());
            println!("wrote {}", artifacts.report_json.display());
        }
        Command::Map {
            kappa,
            z0,
            orbit,
            max_steps,
            tol,
        } => cmd_map(kappa, z0, orbit, max_steps, tol)?,
        Command::Sweep {
            common,
            kappas,
            z0s,
            observe_ode,
        } => {
            let config = load_config(&common)?;
            let dir = out_dir(common.out.clone(), &config);
            let grid_kappas = match kappas {
                Some(text) => parse_list(&text, "--kappas")?,
                None => config
                    .sweep
                    .as_ref()
                    .map(|g| g.kappas.clone())
                    .context("no --kappas given and the config has no sweep grid")?,
            };
            let grid_z0s = match z0s {
                Some(text) => parse_list(&text, "--z0s")?,
                None => config
                    .sweep
                    .as_ref()
                    .map(|g| g.z0s.clone())
                    .context("no --z0s given and the config has no sweep grid")?,
            };
            let rows = ops::sweep(&config, &grid_kappas, &grid_z0s, observe_ode)?;
            let path = ops::write_sweep_csv(&rows, observe_ode, &dir)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
        Command::Compare { common, prefix } => {
            let config = load_config(&common)?;
            let dir = out_dir(common.out.clone(), &config);
            let report = ops::compare_models(&config)?;
            let path = ops::write_compare_json(&report, &dir, &prefix)?;
            println!("wrote {}", path.display());
        }
        Command::Reproduce { target, out } => {
            let config = ExperimentConfig::default();
            let dir = out_dir(out, &config);
            let written = match target.as_str() {
                "fig2" => ops::reproduce_fig2(&dir)?,
                "fig3" => ops::reproduce_fig3(&dir)?,
                other => bail!("unknown reproduce target {other:?} (expected fig2 or fig3)"),
            };
            for path in written {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = real_main() {
        eprintln!("error: {err}");
        for cause in err.chain().skip(1) {
            eprintln!("  caused by: {cause}");
        }
        std::process::exit(1);
    }
}
