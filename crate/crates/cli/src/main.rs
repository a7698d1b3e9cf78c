//! Command-line runner for the photonic in-memory computing simulator.
//!
//! Every subcommand runs one experiment, writes its CSV (and SVG figures)
//! into `--out`, and prints a short summary to stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use photonic_imc::calibrate::DeviceProfile;
use photonic_imc::experiments::{drift, grid, levels, solve as solve_exp, sweep};
use photonic_imc::matrix::{load_vector, DenseMatrix};
use photonic_imc::mult::MultiplyOptions;
use photonic_imc::solver::SolveMode;

#[derive(Parser)]
#[command(
    name = "photonic-imc",
    version,
    about = "Simulates optical memory cells and runs in-memory computing experiments",
    propagate_version = true
)]
struct Cli {
    /// Calibration profile file (defaults to the built-in standard profile)
    #[arg(long, global = true, value_name = "PATH")]
    profile: Option<PathBuf>,

    /// Seed for every stochastic draw; equal seeds give byte-identical output
    #[arg(long, global = true, default_value_t = 42, value_name = "N")]
    seed: u64,

    /// Directory for CSV and SVG output
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Toggle the calibrated noise model
    #[arg(long, global = true, value_enum, default_value_t = NoiseArg::On)]
    noise: NoiseArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    On,
    Off,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Analog,
    Mixed,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Write at fixed energy across pulse widths and record the level reached
    SweepWidth {
        /// Write energy in pJ (default: the energy that saturates exactly at
        /// the width clamp)
        #[arg(long, value_name = "PJ")]
        energy: Option<f64>,
    },

    /// Program a level staircase, then measure erase-write transition errors
    ConditionLevels {
        /// Number of distinct levels, including the erased level
        #[arg(long, default_value_t = 13, value_name = "N")]
        levels: usize,

        /// Writes per level in the staircase phase
        #[arg(long, default_value_t = 20, value_name = "N")]
        repeats: usize,

        /// Erase-write transitions in the statistics phase
        #[arg(long, default_value_t = 600, value_name = "N")]
        transitions: usize,
    },

    /// Hold and cycle the readout probe to map probe-induced level shifts
    Drift {
        /// Stored operand of the monitored cell, in [0, 1]
        #[arg(long, default_value_t = 0.7, value_name = "A")]
        level: f64,

        /// Continuous-hold panel duration in seconds
        #[arg(long, default_value_t = 1e4, value_name = "S")]
        hold_s: f64,

        /// Probe-off time in the off/on panels, seconds
        #[arg(long, default_value_t = 3600.0, value_name = "S")]
        off_s: f64,
    },

    /// Run offset-corrected scalar multiplication over an operand grid
    MultiplyGrid {
        /// Number of multiplicand values
        #[arg(long, default_value_t = 50, value_name = "N")]
        na: usize,

        /// Number of multiplier values
        #[arg(long, default_value_t = 50, value_name = "N")]
        nb: usize,

        /// Measure the baseline offset with an extra read instead of
        /// predicting it from the calibration
        #[arg(long)]
        measured_offset: bool,
    },

    /// Solve a linear system with exact, analog, or mixed-precision iteration
    Solve {
        /// Dimension of the generated test system (ignored with --matrix)
        #[arg(long, default_value_t = 8, value_name = "N")]
        size: usize,

        /// Matrix file: `.csv` holds comma-separated rows, any other
        /// extension a `rows cols` header then whitespace-separated values;
        /// needs --rhs
        #[arg(long, requires = "rhs", value_name = "PATH")]
        matrix: Option<PathBuf>,

        /// Right-hand-side vector file, one value per line; needs --matrix
        #[arg(long, requires = "matrix", value_name = "PATH")]
        rhs: Option<PathBuf>,

        /// Which solver variants to run
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,

        /// Relative residual at which a run counts as converged
        #[arg(long, default_value_t = 1e-9, value_name = "TOL")]
        tol: f64,

        /// Iteration budget (outer steps in mixed mode)
        #[arg(long, default_value_t = 50, value_name = "N")]
        max_iterations: usize,

        /// Analog refinement steps per outer step in mixed mode
        #[arg(long, default_value_t = 5, value_name = "N")]
        inner: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let profile = match &cli.profile {
        Some(path) => DeviceProfile::load(path)
            .with_context(|| format!("loading profile {}", path.display()))?,
        None => DeviceProfile::standard(),
    };
    let noise_on = cli.noise == NoiseArg::On;
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    match cli.command {
        Command::SweepWidth { energy } => {
            let mut config = sweep::WidthSweepConfig::new(profile);
            config.seed = cli.seed;
            config.noise_on = noise_on;
            if let Some(e) = energy {
                config.write_energy_pj = e;
            }
            let result = sweep::run(&config)?;
            write_out(&cli.out, "width_sweep.csv", &result.to_csv())?;
            write_out(&cli.out, "width_sweep.svg", &result.to_svg())?;
            let last = result.rows.last().expect("sweep produced no rows");
            println!(
                "swept {} widths at {:.1} pJ; level at {} ns: {:.4} (exact {:.4})",
                result.rows.len(),
                config.write_energy_pj,
                last.width_ns,
                last.delta_t_measured,
                last.delta_t_exact
            );
        }

        Command::ConditionLevels {
            levels: n_levels,
            repeats,
            transitions,
        } => {
            let mut config = levels::LevelsConfig::new(profile);
            config.seed = cli.seed;
            config.noise_on = noise_on;
            config.n_levels = n_levels;
            config.staircase_repeats = repeats;
            config.transitions = transitions;
            let result = levels::run(&config)?;
            write_out(&cli.out, "levels.csv", &result.to_csv())?;
            write_out(&cli.out, "levels.svg", &result.to_svg())?;
            write_out(&cli.out, "levels_hist.svg", &result.to_histogram_svg())?;
            let stats = &result.transition_stats;
            println!(
                "{} levels: min adjacent gap = {:.1} write-SDs; {} transitions: \
                 error SD {:.5} of range (skew {:+.3}, excess kurtosis {:+.3})",
                config.n_levels, result.min_gap_over_sd, stats.n, stats.sd,
                stats.skewness, stats.excess_kurtosis
            );
        }

        Command::Drift { level, hold_s, off_s } => {
            let mut config = drift::DriftConfig::new(profile);
            config.seed = cli.seed;
            config.noise_on = noise_on;
            config.a = level;
            config.hold_duration_s = hold_s;
            config.off_duration_s = off_s;
            let result = drift::run(&config)?;
            write_out(&cli.out, "drift.csv", &result.to_csv())?;
            write_out(&cli.out, "drift.svg", &result.to_svg())?;
            println!(
                "hold drift {:.3}%; off/on shift {:.2}% at holding power \
                 ({:.3}% at safe power); corrected to {:.2} write-SDs of target",
                100.0 * result.hold_max_change_frac,
                100.0 * result.shift_frac,
                100.0 * result.safe_shift_frac,
                result.corrected_error_sds
            );
        }

        Command::MultiplyGrid {
            na,
            nb,
            measured_offset,
        } => {
            let mut config = grid::GridConfig::new(profile);
            config.seed = cli.seed;
            config.noise_on = noise_on;
            config.n_a = na;
            config.n_b = nb;
            config.options = MultiplyOptions {
                measured_offset,
                ..MultiplyOptions::default()
            };
            let result = grid::run(&config)?;
            write_out(&cli.out, "grid.csv", &result.to_csv())?;
            write_out(&cli.out, "grid_hist.svg", &result.to_svg())?;
            write_out(&cli.out, "grid_scatter.svg", &result.to_scatter_svg())?;
            let stats = &result.stats;
            let worst = result
                .records
                .iter()
                .map(|r| r.error.abs())
                .fold(0.0f64, f64::max);
            println!(
                "{} products: error mean {:+.2e}, SD {:.2e}, worst |error| {:.2e}",
                stats.n, stats.mean, stats.sd, worst
            );
        }

        Command::Solve {
            size,
            matrix,
            rhs,
            mode,
            tol,
            max_iterations,
            inner,
        } => {
            let mut config = solve_exp::SolveExperimentConfig::new(profile);
            config.seed = cli.seed;
            config.noise_on = noise_on;
            config.size = size;
            config.tolerance = tol;
            config.max_iterations = max_iterations;
            config.inner_iterations = inner;
            config.modes = match mode {
                ModeArg::Exact => vec![SolveMode::Exact],
                ModeArg::Analog => vec![SolveMode::Analog],
                ModeArg::Mixed => vec![SolveMode::Mixed],
                ModeArg::All => vec![SolveMode::Exact, SolveMode::Analog, SolveMode::Mixed],
            };
            if let (Some(matrix_path), Some(rhs_path)) = (matrix, rhs) {
                let a = DenseMatrix::load(&matrix_path)
                    .with_context(|| format!("loading matrix {}", matrix_path.display()))?;
                let b = load_vector(&rhs_path)
                    .with_context(|| format!("loading vector {}", rhs_path.display()))?;
                config.system = Some((a, b));
            }
            let result = solve_exp::run(&config)?;
            write_out(&cli.out, "solve.csv", &result.to_csv())?;
            write_out(&cli.out, "solve.svg", &result.to_svg())?;
            print!("{}", result.summary());
        }
    }
    Ok(())
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}
