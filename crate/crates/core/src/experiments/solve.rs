//! Linear-system solving with device matrix–vector products: exact,
//! analog, and mixed-precision runs over the same system, reported side by
//! side.

use crate::calibrate::DeviceProfile;
use crate::error::Result;
use crate::experiments::{csv_f, effective_noise};
use crate::matrix::{self, DenseMatrix};
use crate::mult::OperandMapping;
use crate::noise::rng_from_seed;
use crate::solver::{solve, LinearSystem, SolveMode, SolveReport, SolverConfig};
use crate::svg::Plot;

#[derive(Debug, Clone)]
pub struct SolveExperimentConfig {
    pub profile: DeviceProfile,
    pub seed: u64,
    pub noise_on: bool,
    /// Modes to run, in order.
    pub modes: Vec<SolveMode>,
    /// System to solve; `None` generates a random SPD system of `size`.
    pub system: Option<(DenseMatrix, Vec<f64>)>,
    /// Dimension of the generated system when none is supplied.
    pub size: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub inner_iterations: usize,
}

impl SolveExperimentConfig {
    pub fn new(profile: DeviceProfile) -> Self {
        SolveExperimentConfig {
            profile,
            seed: 42,
            noise_on: true,
            modes: vec![SolveMode::Exact, SolveMode::Analog, SolveMode::Mixed],
            system: None,
            size: 8,
            tolerance: 1e-9,
            max_iterations: 50,
            inner_iterations: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveExperimentResult {
    pub reports: Vec<SolveReport>,
    pub dim: usize,
}

/// Solves one system in every requested mode.
///
/// The generated default system is random SPD (`B·Bᵀ/n + I`), which keeps
/// the conditioning moderate; analog and mixed modes program the matrix
/// from the same device seed, so they face the same perturbed matrix.
pub fn run(config: &SolveExperimentConfig) -> Result<SolveExperimentResult> {
    let cal = &config.profile.cell;
    let mapping = OperandMapping::from_calibration(cal);
    let noise = effective_noise(&config.profile, config.noise_on);

    let (a, b) = match &config.system {
        Some((a, b)) => (a.clone(), b.clone()),
        None => {
            let mut rng = rng_from_seed(config.seed);
            let a = matrix::random_spd(config.size, &mut rng);
            let b = matrix::random_vector(config.size, &mut rng);
            (a, b)
        }
    };
    let system = LinearSystem::new(a, b)?;
    let dim = system.dim();

    let mut reports = Vec::with_capacity(config.modes.len());
    for &mode in &config.modes {
        let solver_config = SolverConfig {
            mode,
            tolerance: config.tolerance,
            max_iterations: config.max_iterations,
            inner_iterations: config.inner_iterations,
            ..SolverConfig::default()
        };
        reports.push(solve(
            &system,
            &solver_config,
            cal,
            &mapping,
            &noise,
            config.seed,
        )?);
    }
    Ok(SolveExperimentResult { reports, dim })
}

impl SolveExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,iteration,residual,matvec_count,energy_pj\n");
        for report in &self.reports {
            for (i, &res) in report.residual_history.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    report.mode.name(),
                    i,
                    csv_f(res),
                    report.matvec_history[i],
                    csv_f(report.energy_history_pj[i])
                ));
            }
        }
        out
    }

    /// One line per mode: outcome, iterations, final residual, cost.
    pub fn summary(&self) -> String {
        let mut out = format!("{}-dimensional system\n", self.dim);
        for r in &self.reports {
            let last = r.residual_history.last().copied().unwrap_or(f64::NAN);
            let floor = r
                .residual_history
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            out.push_str(&format!(
                "{:>6}: {} after {} iterations, residual {:.3e} (best {:.3e}), \
                 {} products, {:.1} nJ optical\n",
                r.mode.name(),
                if r.converged { "converged" } else { "stopped" },
                r.iterations,
                last,
                floor,
                r.matvec_count,
                r.device_energy_pj / 1000.0
            ));
            if let Some(note) = &r.breakdown {
                out.push_str(&format!("        note: {note}\n"));
            }
        }
        out
    }

    /// Residual convergence, log scale, one line per mode.
    pub fn to_svg(&self) -> String {
        let mut plot = Plot::new(
            "Relative residual by iteration",
            "iteration",
            "residual",
        )
        .log_y();
        for r in &self.reports {
            let pts: Vec<(f64, f64)> = r
                .residual_history
                .iter()
                .enumerate()
                .map(|(i, &res)| (i as f64, res))
                .collect();
            plot = plot.line(r.mode.name(), &pts);
        }
        plot.render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> SolveExperimentConfig {
        SolveExperimentConfig::new(DeviceProfile::standard())
    }

    #[test]
    fn default_run_shows_stall_and_recovery() {
        let result = run(&config()).unwrap();
        assert_eq!(result.reports.len(), 3);
        let by_mode = |m: SolveMode| {
            result
                .reports
                .iter()
                .find(|r| r.mode == m)
                .expect("mode present")
        };
        assert!(by_mode(SolveMode::Exact).converged);
        assert!(!by_mode(SolveMode::Analog).converged);
        assert!(by_mode(SolveMode::Mixed).converged);
    }

    #[test]
    fn csv_rows_match_history_lengths() {
        let result = run(&config()).unwrap();
        let csv = result.to_csv();
        let expected: usize = result
            .reports
            .iter()
            .map(|r| r.residual_history.len())
            .sum();
        assert_eq!(csv.lines().count(), 1 + expected);
        assert!(csv.starts_with("mode,iteration,residual,matvec_count,energy_pj\n"));
    }

    #[test]
    fn explicit_system_is_used() {
        let a = DenseMatrix::identity(3);
        let b = vec![2.0, -1.0, 0.5];
        let cfg = SolveExperimentConfig {
            system: Some((a, b.clone())),
            modes: vec![SolveMode::Exact],
            ..config()
        };
        let result = run(&cfg).unwrap();
        assert_eq!(result.dim, 3);
        let report = &result.reports[0];
        assert!(report.converged);
        for (x, want) in report.solution.iter().zip(&b) {
            assert!((x - want).abs() < 1e-9);
        }
    }

    #[test]
    fn summary_and_svg_mention_every_mode() {
        let result = run(&config()).unwrap();
        let summary = result.summary();
        let svg = result.to_svg();
        for name in ["exact", "analog", "mixed"] {
            assert!(summary.contains(name), "summary missing {name}");
            assert!(svg.contains(name), "figure missing {name}");
        }
    }

    #[test]
    fn deterministic_csv() {
        let a = run(&config()).unwrap().to_csv();
        let b = run(&config()).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
