//! Behavioral model of a single phase-change memory cell on a waveguide.
//!
//! The cell is a patch of Ge2Sb2Te5 on top of a Si3N4 waveguide. Its optical
//! transmittance is the stored value: fully crystalline is the low-transmission
//! baseline, and partial amorphization raises transmission by a programmable
//! delta. High-energy pulses write (partially amorphize), a calibrated
//! double-step pulse erases (recrystallizes), and low-energy pulses read
//! without disturbing the state.

use crate::error::{Error, Result};
use crate::noise::{DeviceRng, NoiseModel};
use crate::pulse::DoubleStepPulse;

/// Physical dimensions of the GST patch and its waveguide. Descriptive
/// metadata only; none of these enter the response equations, which are
/// calibrated per device.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    /// Length of the GST patch along the waveguide, micrometres.
    pub length_gst_um: f64,
    /// Waveguide width, micrometres.
    pub width_waveguide_um: f64,
    /// Waveguide film height, nanometres.
    pub height_film_nm: f64,
}

impl Default for CellGeometry {
    fn default() -> Self {
        CellGeometry {
            length_gst_um: 1.0,
            width_waveguide_um: 1.3,
            height_film_nm: 165.0,
        }
    }
}

/// Calibrated response parameters of one cell.
///
/// Energies are pJ, powers mW, times ns, transmittances dimensionless.
/// The programmed level `t_prog` lives in `[0, t_prog_max]` and adds to the
/// crystalline baseline, so the observable transmittance is
/// `t_baseline + t_prog` (plus any drift offset).
#[derive(Debug, Clone, PartialEq)]
pub struct CellCalibration {
    /// Write pulses below this energy do not switch the cell.
    pub e_threshold_pj: f64,
    /// Write energy at which the programmed level saturates (at the
    /// reference width).
    pub e_linear_max_pj: f64,
    /// Largest programmable transmittance delta.
    pub t_prog_max: f64,
    /// Transmittance of the fully crystalline cell.
    pub t_baseline: f64,
    /// Pulse width the write window was calibrated at, ns.
    pub width_reference_ns: f64,
    /// Time constant of the width response `1 - exp(-w / tau)`, ns.
    pub width_tau_ns: f64,
    /// Widths at or beyond this are fully saturated: the response is clamped
    /// to its value here.
    pub width_saturation_ns: f64,
    /// Time for the transmission to stabilize after a state-changing pulse
    /// (measured from the end of the pulse), ns.
    pub settle_time_ns: f64,
    /// Peak power of the first erase step, mW.
    pub erase_peak_power_mw: f64,
    /// Second erase step power as a fraction of the peak.
    pub erase_step_fraction: f64,
    /// Width of the first erase step, ns.
    pub erase_step1_width_ns: f64,
    /// Width of the second erase step, ns.
    pub erase_step2_width_ns: f64,
}

impl CellCalibration {
    /// Calibration of the reference cell: 25 ns write pulses, 180–354 pJ
    /// write window, 14.3% programmable transmission on a 0.37 baseline.
    ///
    /// `width_tau_ns` is chosen so a 25 ns pulse reaches 75% of the
    /// asymptotic width response: `tau = 25 / ln 4`.
    pub fn standard() -> Self {
        CellCalibration {
            e_threshold_pj: 180.0,
            e_linear_max_pj: 354.0,
            t_prog_max: 0.143,
            t_baseline: 0.37,
            width_reference_ns: 25.0,
            width_tau_ns: 25.0 / 4f64.ln(),
            width_saturation_ns: 45.0,
            settle_time_ns: 200.0,
            erase_peak_power_mw: 14.1,
            erase_step_fraction: 0.4,
            erase_step1_width_ns: 25.0,
            erase_step2_width_ns: 100.0,
        }
    }

    /// Calibration of the slower cell driven with 50 ns pulses and a
    /// 350–600 pJ write window.
    pub fn pulse50ns() -> Self {
        CellCalibration {
            e_threshold_pj: 350.0,
            e_linear_max_pj: 600.0,
            width_reference_ns: 50.0,
            ..Self::standard()
        }
    }

    /// Saturating width response `1 - exp(-w / tau)`, clamped for widths at
    /// or beyond `width_saturation_ns`.
    ///
    /// Dimensionless, expressed in units of the asymptotic response: at the
    /// standard tau the value at 25 ns is exactly 0.75, and every width past
    /// the saturation point returns the plateau value.
    pub fn width_response(&self, width_ns: f64) -> f64 {
        assert!(width_ns > 0.0, "pulse width must be positive");
        let w = width_ns.min(self.width_saturation_ns);
        1.0 - (-w / self.width_tau_ns).exp()
    }

    /// Programmed level demanded by a write pulse of the given energy and
    /// width, before noise.
    ///
    /// Linear in energy between the threshold and the linear maximum, zero
    /// below, clamped above. The width response is taken relative to the
    /// reference width the energy window was calibrated at, so widths beyond
    /// the reference can demand more than `t_prog_max`; the write itself
    /// clamps to the physical range.
    pub fn target_level(&self, energy_pj: f64, width_ns: f64) -> f64 {
        assert!(energy_pj >= 0.0, "pulse energy must be non-negative");
        assert!(width_ns > 0.0, "pulse width must be positive");
        let drive = ((energy_pj - self.e_threshold_pj)
            / (self.e_linear_max_pj - self.e_threshold_pj))
            .clamp(0.0, 1.0);
        let width_gain = self.width_response(width_ns) / self.width_response(self.width_reference_ns);
        self.t_prog_max * width_gain * drive
    }

    /// Checks a double-step pulse against the calibrated erase shape.
    pub fn validate_erase_pulse(&self, pulse: &DoubleStepPulse) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
        if !close(pulse.step1.power_mw, self.erase_peak_power_mw) {
            return Err(Error::MalformedErasePulse(format!(
                "step 1 power {} mW, calibrated peak is {} mW",
                pulse.step1.power_mw, self.erase_peak_power_mw
            )));
        }
        let step2_power = self.erase_peak_power_mw * self.erase_step_fraction;
        if !close(pulse.step2.power_mw, step2_power) {
            return Err(Error::MalformedErasePulse(format!(
                "step 2 power {} mW, calibrated step is {} mW",
                pulse.step2.power_mw, step2_power
            )));
        }
        if !close(pulse.step1.width_ns, self.erase_step1_width_ns)
            || !close(pulse.step2.width_ns, self.erase_step2_width_ns)
        {
            return Err(Error::MalformedErasePulse(format!(
                "step widths {} + {} ns, calibrated shape is {} + {} ns",
                pulse.step1.width_ns,
                pulse.step2.width_ns,
                self.erase_step1_width_ns,
                self.erase_step2_width_ns
            )));
        }
        Ok(())
    }
}

impl Default for CellCalibration {
    fn default() -> Self {
        Self::standard()
    }
}

/// Mutable state of one cell.
///
/// Invariant: `0 <= t_prog <= t_prog_max` of the calibration it is driven
/// with, and the observable transmittance `t_baseline + t_prog +
/// drift_offset_t` stays inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    /// Programmed transmittance delta above the crystalline baseline.
    pub t_prog: f64,
    /// Structural-relaxation offset added on top of the programmed level
    /// when the probe is cycled off and back on. Cleared by any write or
    /// erase.
    pub drift_offset_t: f64,
    /// Energy and width of the last write pulse, if the current level was
    /// produced by one. `None` at baseline and after erases.
    pub last_write: Option<(f64, f64)>,
}

impl CellState {
    /// A fully crystalline cell: no programmed level, no drift, nothing to
    /// restore.
    pub fn baseline() -> Self {
        CellState {
            t_prog: 0.0,
            drift_offset_t: 0.0,
            last_write: None,
        }
    }

    /// True when the cell sits exactly at the crystalline baseline.
    pub fn is_baseline(&self) -> bool {
        self.t_prog == 0.0 && self.drift_offset_t == 0.0
    }

    /// Observable transmittance: baseline + programmed level + drift.
    pub fn transmittance(&self, cal: &CellCalibration) -> f64 {
        cal.t_baseline + self.t_prog + self.drift_offset_t
    }

    /// Applies a write pulse: the cell switches to the demanded level plus
    /// write noise, clamped to the physical range. Returns the energy
    /// transmitted past the cell while it still held the old level.
    ///
    /// Rejects sub-threshold energies — dispatch between write and read is
    /// the caller's job, and a sub-threshold "write" is a dispatch bug.
    pub fn write(
        &mut self,
        cal: &CellCalibration,
        energy_pj: f64,
        width_ns: f64,
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<f64> {
        if energy_pj < cal.e_threshold_pj {
            return Err(Error::WriteBelowThreshold {
                energy_pj,
                threshold_pj: cal.e_threshold_pj,
            });
        }
        let transmitted_pj = energy_pj * (cal.t_baseline + self.t_prog);
        let effective_pj = energy_pj * noise.sample_pump_factor(rng);
        let target = cal.target_level(effective_pj.max(0.0), width_ns);
        let level = (target + noise.sample_write_noise(cal, rng)).clamp(0.0, cal.t_prog_max);
        self.t_prog = level;
        self.drift_offset_t = 0.0;
        self.last_write = Some((energy_pj, width_ns));
        Ok(transmitted_pj)
    }

    /// Sends a read pulse through the cell and returns the output energy:
    /// input energy times the observable transmittance, plus detector noise.
    /// The state is untouched.
    ///
    /// Rejects energies at or above the switching threshold — such a pulse
    /// would rewrite the cell.
    pub fn read(
        &self,
        cal: &CellCalibration,
        energy_pj: f64,
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<f64> {
        assert!(energy_pj >= 0.0, "read energy must be non-negative");
        if energy_pj >= cal.e_threshold_pj {
            return Err(Error::ReadWouldSwitch {
                energy_pj,
                threshold_pj: cal.e_threshold_pj,
            });
        }
        Ok(energy_pj * self.transmittance(cal) + noise.sample_detector_noise(rng))
    }

    /// Applies the calibrated double-step erase pulse: full recrystallization
    /// in a single shot, back to exactly `t_prog = 0` with no stochastic
    /// term. Returns the energy absorbed in the cell, computed against the
    /// transmittance the cell had when the pulse arrived.
    pub fn erase_single_shot(
        &mut self,
        cal: &CellCalibration,
        pulse: &DoubleStepPulse,
    ) -> Result<f64> {
        cal.validate_erase_pulse(pulse)?;
        let absorbed_pj = self.absorbed_energy(cal, pulse.delivered_energy_pj());
        self.t_prog = 0.0;
        self.drift_offset_t = 0.0;
        self.last_write = None;
        Ok(absorbed_pj)
    }

    /// Steps the level *down* to `target_t_prog` with a train of pulses of
    /// strictly decreasing power. The landing level carries write noise like
    /// any other programming operation; only the single-shot erase is exact.
    ///
    /// Power ordering is validated at train construction; this checks the
    /// direction of travel.
    pub fn erase_train(
        &mut self,
        cal: &CellCalibration,
        target_t_prog: f64,
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<()> {
        if target_t_prog > self.t_prog || target_t_prog < 0.0 {
            return Err(Error::EraseTargetAboveLevel {
                target: target_t_prog,
                current: self.t_prog,
            });
        }
        let level = (target_t_prog + noise.sample_write_noise(cal, rng)).clamp(0.0, cal.t_prog_max);
        self.t_prog = level;
        self.drift_offset_t = 0.0;
        self.last_write = None;
        Ok(())
    }

    /// Energy a pulse of the given total energy deposits in the cell:
    /// whatever is not transmitted is absorbed,
    /// `energy × (1 - transmittance)`.
    pub fn absorbed_energy(&self, cal: &CellCalibration, energy_pj: f64) -> f64 {
        energy_pj * (1.0 - self.transmittance(cal))
    }
}

impl Default for CellState {
    fn default() -> Self {
        Self::baseline()
    }
}
