//! Pulse-width sweep: how the programmed level saturates with write-pulse
//! duration at fixed (full) energy.

use crate::calibrate::DeviceProfile;
use crate::cell::CellState;
use crate::error::Result;
use crate::experiments::{csv_f, effective_noise};
use crate::mult::OperandMapping;
use crate::noise::rng_from_seed;
use crate::svg::Plot;

#[derive(Debug, Clone)]
pub struct WidthSweepConfig {
    pub profile: DeviceProfile,
    pub seed: u64,
    pub noise_on: bool,
    /// Pulse widths to measure, ns.
    pub widths_ns: Vec<f64>,
    /// Energy of every write pulse, pJ. The default is the energy whose
    /// level saturates exactly at the width clamp — any higher and widths
    /// beyond the reference would demand more than the full level, the
    /// write would clamp, and the curve would flatten early.
    pub write_energy_pj: f64,
}

impl WidthSweepConfig {
    /// Default sweep: every integer width from 1 to 100 ns.
    pub fn new(profile: DeviceProfile) -> Self {
        let cal = &profile.cell;
        let drive = cal.width_response(cal.width_reference_ns)
            / cal.width_response(cal.width_saturation_ns);
        let write_energy_pj =
            cal.e_threshold_pj + drive * (cal.e_linear_max_pj - cal.e_threshold_pj);
        WidthSweepConfig {
            profile,
            seed: 42,
            noise_on: true,
            widths_ns: (1..=100).map(|w| w as f64).collect(),
            write_energy_pj,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WidthRow {
    pub width_ns: f64,
    /// Saturation curve value `1 − exp(−min(w, w_sat)/τ)`.
    pub width_response: f64,
    /// Level a full-energy write of this width demands, noiseless.
    pub delta_t_exact: f64,
    /// Level actually measured back through a read after such a write.
    pub delta_t_measured: f64,
}

#[derive(Debug, Clone)]
pub struct WidthSweepResult {
    pub rows: Vec<WidthRow>,
    reference_width_ns: f64,
    saturation_width_ns: f64,
    t_prog_max: f64,
}

/// Writes one fresh cell per width at full energy, reads the level back.
pub fn run(config: &WidthSweepConfig) -> Result<WidthSweepResult> {
    let cal = &config.profile.cell;
    let mapping = OperandMapping::from_calibration(cal);
    let noise = effective_noise(&config.profile, config.noise_on);
    let mut rng = rng_from_seed(config.seed);

    let mut rows = Vec::with_capacity(config.widths_ns.len());
    for &w in &config.widths_ns {
        let mut cell = CellState::baseline();
        cell.write(cal, config.write_energy_pj, w, &noise, &mut rng)?;
        let e_in = mapping.e_in_max_pj;
        let raw = cell.read(cal, e_in, &noise, &mut rng)?;
        let measured_t = raw / e_in - cal.t_baseline;
        rows.push(WidthRow {
            width_ns: w,
            width_response: cal.width_response(w),
            delta_t_exact: cal
                .target_level(config.write_energy_pj, w)
                .min(cal.t_prog_max),
            delta_t_measured: measured_t,
        });
    }
    Ok(WidthSweepResult {
        rows,
        reference_width_ns: cal.width_reference_ns,
        saturation_width_ns: cal.width_saturation_ns,
        t_prog_max: cal.t_prog_max,
    })
}

impl WidthSweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("width_ns,width_response,delta_t_exact,delta_t_measured\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_f(r.width_ns),
                csv_f(r.width_response),
                csv_f(r.delta_t_exact),
                csv_f(r.delta_t_measured)
            ));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let response: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.width_ns, r.width_response))
            .collect();
        let measured: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.width_ns, r.delta_t_measured / self.t_prog_max))
            .collect();
        Plot::new(
            "Level vs write-pulse width (full energy)",
            "width (ns)",
            "fraction of full level",
        )
        .line("saturation curve", &response)
        .scatter("measured / max", &measured)
        .vline(self.reference_width_ns, "reference")
        .vline(self.saturation_width_ns, "saturation")
        .render()
    }
}
