//! Scalar-multiplication grid: every product `a × b` over evenly spaced
//! operands, measured through write–read cycles on one cell.

use crate::calibrate::DeviceProfile;
use crate::cell::CellState;
use crate::error::Result;
use crate::experiments::{csv_f, effective_noise};
use crate::mult::{
    error_stats, run_grid, ErrorStats, MultiplicationRecord, MultiplyOptions, OperandMapping,
};
use crate::noise::rng_from_seed;
use crate::svg::Plot;

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub profile: DeviceProfile,
    pub seed: u64,
    pub noise_on: bool,
    /// Number of multiplicand values (grid rows).
    pub n_a: usize,
    /// Number of multiplier values (grid columns).
    pub n_b: usize,
    pub options: MultiplyOptions,
}

impl GridConfig {
    pub fn new(profile: DeviceProfile) -> Self {
        GridConfig {
            profile,
            seed: 42,
            noise_on: true,
            n_a: 50,
            n_b: 50,
            options: MultiplyOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub records: Vec<MultiplicationRecord>,
    pub stats: ErrorStats,
}

/// Runs the grid on a single cell.
pub fn run(config: &GridConfig) -> Result<GridResult> {
    let cal = &config.profile.cell;
    let mapping = OperandMapping::from_calibration(cal);
    let noise = effective_noise(&config.profile, config.noise_on);
    let mut rng = rng_from_seed(config.seed);
    let mut cell = CellState::baseline();
    let records = run_grid(
        &mut cell,
        cal,
        &mapping,
        config.n_a,
        config.n_b,
        &noise,
        &mut rng,
        config.options,
    )?;
    let stats = error_stats(&records, 20);
    Ok(GridResult { records, stats })
}

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("a,b,e_write_pJ,e_in_pJ,e_out_pJ,c_measured,c_exact,error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                csv_f(r.a),
                csv_f(r.b),
                csv_f(r.write_energy_pj),
                csv_f(r.input_energy_pj),
                csv_f(r.raw_output_pj),
                csv_f(r.c_measured),
                csv_f(r.c_exact),
                csv_f(r.error)
            ));
        }
        out
    }

    /// Histogram of multiplication errors.
    pub fn to_svg(&self) -> String {
        let bars: Vec<(f64, f64)> = self
            .stats
            .histogram
            .iter()
            .map(|b| ((b.lo + b.hi) / 2.0, b.count as f64))
            .collect();
        Plot::new(
            "Multiplication error distribution",
            "c_exact − c_measured",
            "count",
        )
        .bars("errors", &bars)
        .render()
    }

    /// Measured against exact products, with the identity line.
    pub fn to_scatter_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .records
            .iter()
            .map(|r| (r.c_exact, r.c_measured))
            .collect();
        Plot::new("Measured vs exact products", "c_exact", "c_measured")
            .line("identity", &[(0.0, 0.0), (1.0, 1.0)])
            .scatter("measured", &pts)
            .render()
    }
}
