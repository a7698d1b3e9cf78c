//! Browser bindings: each function runs one interactive experiment on the
//! standard calibration and returns either SVG markup or a short text
//! summary. All entry points are plain strings so the page needs no glue
//! beyond `innerHTML` and `textContent`.

use wasm_bindgen::prelude::wasm_bindgen;

use photonic_imc::calibrate::DeviceProfile;
use photonic_imc::cell::CellState;
use photonic_imc::experiments::{grid, solve as solve_exp, sweep};
use photonic_imc::mult::{multiply, MultiplyOptions, OperandMapping};
use photonic_imc::noise::{rng_from_seed, NoiseModel};
use photonic_imc::solver::SolveMode;

/// Level-versus-width curve at a chosen write energy. Pass `energy_pj <= 0`
/// to use the default energy, which saturates exactly at the width clamp.
#[wasm_bindgen]
pub fn width_curve_svg(energy_pj: f64, noise_on: bool, seed: u64) -> String {
    let mut config = sweep::WidthSweepConfig::new(DeviceProfile::standard());
    config.seed = seed;
    config.noise_on = noise_on;
    if energy_pj > 0.0 {
        config.write_energy_pj = energy_pj;
    }
    match sweep::run(&config) {
        Ok(result) => result.to_svg(),
        Err(err) => error_text(&err.to_string()),
    }
}

/// One offset-corrected multiplication on a fresh cell.
#[wasm_bindgen]
pub fn multiply_summary(a: f64, b: f64, noise_on: bool, seed: u64) -> String {
    let profile = DeviceProfile::standard();
    let noise = if noise_on {
        profile.noise.clone()
    } else {
        NoiseModel::quiet()
    };
    let mapping = OperandMapping::from_calibration(&profile.cell);
    let mut cell = CellState::baseline();
    let mut rng = rng_from_seed(seed);
    match multiply(
        &mut cell,
        &profile.cell,
        &mapping,
        a,
        b,
        &noise,
        &mut rng,
        MultiplyOptions::default(),
    ) {
        Ok(rec) => format!(
            "{a:.3} x {b:.3} = {:.6}   (exact {:.6}, error {:+.2e})\n\
             write {:.1} pJ -> input {:.1} pJ -> detector {:.3} pJ, offset {:.3} pJ",
            rec.c_measured,
            rec.c_exact,
            rec.error,
            rec.write_energy_pj,
            rec.input_energy_pj,
            rec.raw_output_pj,
            rec.offset_pj
        ),
        Err(err) => format!("error: {err}"),
    }
}

/// Error histogram of an n x n multiplication grid.
#[wasm_bindgen]
pub fn multiply_grid_svg(n: u32, noise_on: bool, seed: u64) -> String {
    let mut config = grid::GridConfig::new(DeviceProfile::standard());
    config.seed = seed;
    config.noise_on = noise_on;
    config.n_a = n.clamp(2, 60) as usize;
    config.n_b = config.n_a;
    match grid::run(&config) {
        Ok(result) => result.to_svg(),
        Err(err) => error_text(&err.to_string()),
    }
}

/// Convergence plot of the exact, analog, and mixed-precision solvers on a
/// random positive-definite system.
#[wasm_bindgen]
pub fn solve_svg(size: u32, noise_on: bool, seed: u64) -> String {
    match run_solver(size, noise_on, seed) {
        Ok(result) => result.to_svg(),
        Err(message) => error_text(&message),
    }
}

/// Text summary that pairs with `solve_svg` for the same arguments.
#[wasm_bindgen]
pub fn solve_summary(size: u32, noise_on: bool, seed: u64) -> String {
    match run_solver(size, noise_on, seed) {
        Ok(result) => result.summary(),
        Err(message) => format!("error: {message}"),
    }
}

fn run_solver(
    size: u32,
    noise_on: bool,
    seed: u64,
) -> Result<solve_exp::SolveExperimentResult, String> {
    let mut config = solve_exp::SolveExperimentConfig::new(DeviceProfile::standard());
    config.seed = seed;
    config.noise_on = noise_on;
    config.size = size.clamp(2, 16) as usize;
    config.modes = vec![SolveMode::Exact, SolveMode::Analog, SolveMode::Mixed];
    solve_exp::run(&config).map_err(|err| err.to_string())
}

/// A visible placeholder so failures surface on the page, not the console.
fn error_text(message: &str) -> String {
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="60">
<text x="10" y="35" fill="#b00" font-family="sans-serif">error: {}</text></svg>"##,
        message.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_curve_returns_svg_and_honours_the_seed() {
        let a = width_curve_svg(0.0, true, 1);
        let b = width_curve_svg(0.0, true, 1);
        let c = width_curve_svg(0.0, true, 2);
        assert!(a.starts_with("<svg"));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn multiply_summary_reports_the_product() {
        let text = multiply_summary(0.5, 0.5, false, 7);
        assert!(text.contains("= 0.250000"), "got: {text}");
        let loud = multiply_summary(0.5, 0.5, true, 7);
        assert!(loud.contains("error"), "got: {loud}");
    }

    #[test]
    fn multiply_summary_surfaces_operand_errors() {
        let text = multiply_summary(1.5, 0.5, false, 7);
        assert!(text.starts_with("error:"), "got: {text}");
    }

    #[test]
    fn grid_histogram_is_svg() {
        assert!(multiply_grid_svg(8, true, 3).starts_with("<svg"));
    }

    #[test]
    fn solver_demo_converges_in_mixed_mode() {
        let summary = solve_summary(8, true, 42);
        assert!(summary.contains("mixed: converged"), "got: {summary}");
        assert!(solve_svg(8, true, 42).starts_with("<svg"));
    }

    #[test]
    fn solver_size_is_clamped_not_rejected() {
        let summary = solve_summary(1, true, 5);
        assert!(summary.contains("2-dimensional"), "got: {summary}");
    }
}
