//! Probe-induced drift: transmittance traces under three probe protocols —
//! continuous hold, an off/on cycle at holding power, and an off/on cycle
//! at a safely low power — plus the rewrite that corrects the shift.

use crate::calibrate::DeviceProfile;
use crate::cell::CellState;
use crate::error::Result;
use crate::experiments::{csv_f, effective_noise};
use crate::mult::OperandMapping;
use crate::noise::{correct_drift, probe_cycle, rng_from_seed};
use crate::svg::Plot;

#[derive(Debug, Clone)]
pub struct DriftConfig {
    pub profile: DeviceProfile,
    pub seed: u64,
    pub noise_on: bool,
    /// Stored operand for the monitored cell.
    pub a: f64,
    /// Length of the continuous-hold panel, s.
    pub hold_duration_s: f64,
    /// How long the probe stays off in the off/on panels, s.
    pub off_duration_s: f64,
}

impl DriftConfig {
    pub fn new(profile: DeviceProfile) -> Self {
        DriftConfig {
            profile,
            seed: 42,
            noise_on: true,
            a: 0.7,
            hold_duration_s: 1e4,
            off_duration_s: 3600.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DriftRow {
    /// Panel label: "hold", "cycle-hold-power" or "cycle-safe-power".
    pub panel: &'static str,
    pub time_s: f64,
    pub probe_on: bool,
    pub probe_power_mw: f64,
    pub transmittance: f64,
    /// What happened at this sample: "", "write", "probe-off", "probe-on",
    /// or "corrected".
    pub event: &'static str,
}

#[derive(Debug, Clone)]
pub struct DriftResult {
    pub rows: Vec<DriftRow>,
    /// Largest relative transmittance change across the hold panel.
    pub hold_max_change_frac: f64,
    /// Relative shift at probe turn-on in the holding-power panel.
    pub shift_frac: f64,
    /// |level − target| after correction, in units of the absolute write SD
    /// (infinite SD units collapse to 0 when write noise is off).
    pub corrected_error_sds: f64,
    /// Relative shift at probe turn-on in the safe-power panel.
    pub safe_shift_frac: f64,
}

/// Runs the three probe protocols on freshly written cells.
pub fn run(config: &DriftConfig) -> Result<DriftResult> {
    let cal = &config.profile.cell;
    let drift = &config.profile.drift;
    let mapping = OperandMapping::from_calibration(cal);
    let noise = effective_noise(&config.profile, config.noise_on);
    let mut rng = rng_from_seed(config.seed);
    let e_write = mapping.encode_multiplicand(config.a)?;
    let e_in = mapping.e_in_max_pj;
    let hold_mw = drift.probe_hold_power_mw;
    let safe_mw = drift.probe_safe_power_mw;

    let mut rows: Vec<DriftRow> = Vec::new();
    let measure = |cell: &CellState, rng: &mut crate::noise::DeviceRng| -> Result<f64> {
        let raw = cell.read(cal, e_in, &noise, rng)?;
        Ok(raw / e_in)
    };

    // Panel 1: write once, keep the probe on, watch for the whole duration.
    // The probe never turns off, so there is never a relaxation step.
    let mut cell = CellState::baseline();
    cell.write(cal, e_write, cal.width_reference_ns, &noise, &mut rng)?;
    let mut t0 = measure(&cell, &mut rng)?;
    rows.push(DriftRow {
        panel: "hold",
        time_s: 0.0,
        probe_on: true,
        probe_power_mw: hold_mw,
        transmittance: t0,
        event: "write",
    });
    let mut hold_max_change_frac: f64 = 0.0;
    let hold_samples = 25;
    for k in 1..=hold_samples {
        let time_s = config
            .hold_duration_s
            .powf(k as f64 / hold_samples as f64);
        // Probe held on: no off window, hence a zero-length off cycle.
        probe_cycle(&mut cell, cal, drift, hold_mw, 0.0);
        let t = measure(&cell, &mut rng)?;
        hold_max_change_frac = hold_max_change_frac.max(((t - t0) / t0).abs());
        rows.push(DriftRow {
            panel: "hold",
            time_s,
            probe_on: true,
            probe_power_mw: hold_mw,
            transmittance: t,
            event: "",
        });
    }

    // Panel 2: off/on cycle at holding power, then correction.
    let mut cell = CellState::baseline();
    cell.write(cal, e_write, cal.width_reference_ns, &noise, &mut rng)?;
    let target_t_prog = cell.t_prog;
    t0 = measure(&cell, &mut rng)?;
    rows.push(DriftRow {
        panel: "cycle-hold-power",
        time_s: 0.0,
        probe_on: true,
        probe_power_mw: hold_mw,
        transmittance: t0,
        event: "write",
    });
    rows.push(DriftRow {
        panel: "cycle-hold-power",
        time_s: 600.0,
        probe_on: true,
        probe_power_mw: hold_mw,
        transmittance: measure(&cell, &mut rng)?,
        event: "",
    });
    rows.push(DriftRow {
        panel: "cycle-hold-power",
        time_s: 1200.0,
        probe_on: false,
        probe_power_mw: 0.0,
        transmittance: f64::NAN,
        event: "probe-off",
    });
    probe_cycle(&mut cell, cal, drift, hold_mw, config.off_duration_s);
    let t_on = measure(&cell, &mut rng)?;
    let shift_frac = (t_on - t0) / t0;
    rows.push(DriftRow {
        panel: "cycle-hold-power",
        time_s: 1200.0 + config.off_duration_s,
        probe_on: true,
        probe_power_mw: hold_mw,
        transmittance: t_on,
        event: "probe-on",
    });
    correct_drift(&mut cell, cal, &noise, &mut rng)?;
    let t_corrected = measure(&cell, &mut rng)?;
    let write_sd_abs = noise.write_sd * cal.t_prog_max;
    let corrected_error_sds = if write_sd_abs > 0.0 {
        (cell.t_prog - target_t_prog).abs() / write_sd_abs
    } else {
        0.0
    };
    rows.push(DriftRow {
        panel: "cycle-hold-power",
        time_s: 1200.0 + config.off_duration_s + 1.0,
        probe_on: true,
        probe_power_mw: hold_mw,
        transmittance: t_corrected,
        event: "corrected",
    });

    // Panel 3: the same off/on cycle at the safe probe power.
    let mut cell = CellState::baseline();
    cell.write(cal, e_write, cal.width_reference_ns, &noise, &mut rng)?;
    t0 = measure(&cell, &mut rng)?;
    rows.push(DriftRow {
        panel: "cycle-safe-power",
        time_s: 0.0,
        probe_on: true,
        probe_power_mw: safe_mw,
        transmittance: t0,
        event: "write",
    });
    rows.push(DriftRow {
        panel: "cycle-safe-power",
        time_s: 1200.0,
        probe_on: false,
        probe_power_mw: 0.0,
        transmittance: f64::NAN,
        event: "probe-off",
    });
    probe_cycle(&mut cell, cal, drift, safe_mw, config.off_duration_s);
    let t_safe = measure(&cell, &mut rng)?;
    let safe_shift_frac = (t_safe - t0) / t0;
    rows.push(DriftRow {
        panel: "cycle-safe-power",
        time_s: 1200.0 + config.off_duration_s,
        probe_on: true,
        probe_power_mw: safe_mw,
        transmittance: t_safe,
        event: "probe-on",
    });

    Ok(DriftResult {
        rows,
        hold_max_change_frac,
        shift_frac,
        corrected_error_sds,
        safe_shift_frac,
    })
}

impl DriftResult {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("panel,time_s,probe_on,probe_power_mw,transmittance,event\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.panel,
                csv_f(r.time_s),
                if r.probe_on { 1 } else { 0 },
                csv_f(r.probe_power_mw),
                if r.transmittance.is_nan() {
                    String::from("")
                } else {
                    csv_f(r.transmittance)
                },
                r.event
            ));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let series = |panel: &str| -> Vec<(f64, f64)> {
            self.rows
                .iter()
                .filter(|r| r.panel == panel && !r.transmittance.is_nan())
                .map(|r| (r.time_s, r.transmittance))
                .collect()
        };
        Plot::new(
            "Probe cycling and stored-level stability",
            "time (s)",
            "transmittance",
        )
        .line("hold", &series("hold"))
        .line("off/on at hold power", &series("cycle-hold-power"))
        .line("off/on at safe power", &series("cycle-safe-power"))
        .render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(noise_on: bool) -> DriftConfig {
        DriftConfig {
            noise_on,
            ..DriftConfig::new(DeviceProfile::standard())
        }
    }

    #[test]
    fn held_probe_shows_no_drift() {
        let result = run(&config(false)).unwrap();
        assert_eq!(result.hold_max_change_frac, 0.0);
    }

    #[test]
    fn off_on_cycle_at_hold_power_shifts_nine_percent() {
        let result = run(&config(false)).unwrap();
        assert!(
            (result.shift_frac - 0.09).abs() < 1e-12,
            "shift {}",
            result.shift_frac
        );
    }

    #[test]
    fn safe_power_cycle_does_not_shift() {
        let result = run(&config(false)).unwrap();
        assert!(result.safe_shift_frac.abs() < 1e-12);
    }

    #[test]
    fn correction_restores_the_level() {
        // Noiseless: exact restoration. Noisy: within a few write SDs.
        let exact = run(&config(false)).unwrap();
        assert_eq!(exact.corrected_error_sds, 0.0);
        let noisy = run(&config(true)).unwrap();
        assert!(
            noisy.corrected_error_sds < 4.0,
            "correction missed by {} SDs",
            noisy.corrected_error_sds
        );
    }

    #[test]
    fn csv_marks_events_and_probe_state() {
        let csv = run(&config(false)).unwrap().to_csv();
        assert!(csv.starts_with("panel,time_s,probe_on,probe_power_mw,transmittance,event\n"));
        assert!(csv.contains("probe-off"));
        assert!(csv.contains("corrected"));
        // Probe-off rows have no transmittance reading.
        for line in csv.lines().filter(|l| l.contains("probe-off")) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[4], "");
        }
    }

    #[test]
    fn svg_renders_three_panels() {
        let svg = run(&config(false)).unwrap().to_svg();
        assert!(svg.contains("off/on at hold power"));
        assert!(svg.contains("off/on at safe power"));
    }
}
