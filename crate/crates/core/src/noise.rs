//! Noise and drift models, and the seeded RNG plumbing that keeps every
//! stochastic experiment reproducible.
//!
//! All randomness flows through explicitly seeded ChaCha streams. Arrays of
//! cells derive one child stream per cell from a parent seed with a
//! splitmix64 mix, which is plain 64-bit integer arithmetic and therefore
//! reproducible in any language.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::cell::{CellCalibration, CellState};
use crate::error::{Error, Result};

/// The RNG used throughout the crate. ChaCha is counter-based and produces
/// the same stream for the same seed on every platform.
pub type DeviceRng = rand_chacha::ChaCha8Rng;

/// A fresh stream for the given seed.
pub fn rng_from_seed(seed: u64) -> DeviceRng {
    DeviceRng::seed_from_u64(seed)
}

/// Derives a child seed from a parent seed and an index (splitmix64 of
/// `parent + (index + 1) * golden_gamma`). The `+ 1` keeps child 0 from
/// collapsing onto the parent.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A fresh stream for child `index` of `parent`.
pub fn child_rng(parent: u64, index: u64) -> DeviceRng {
    rng_from_seed(child_seed(parent, index))
}

/// Stochastic imperfections of programming and readout.
///
/// `write_sd` is expressed as a fraction of the full programming range, so
/// the absolute level noise is `write_sd * t_prog_max`. Detector noise is
/// absolute (pJ) on every read. Pump fluctuation scales each write pulse's
/// effective energy multiplicatively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Standard deviation of the programmed level, as a fraction of the
    /// full range.
    pub write_sd: f64,
    /// Standard deviation of detected output energy, pJ.
    pub detector_sd_pj: f64,
    /// Relative standard deviation of write pulse energy.
    pub pump_sd: f64,
}

impl NoiseModel {
    /// All noise sources off. Zero-SD sources draw nothing from the RNG, so
    /// quiet runs are bit-reproducible regardless of seed.
    pub fn quiet() -> Self {
        NoiseModel {
            write_sd: 0.0,
            detector_sd_pj: 0.0,
            pump_sd: 0.0,
        }
    }

    /// Level noise in absolute transmittance units.
    pub fn sample_write_noise(&self, cal: &CellCalibration, rng: &mut DeviceRng) -> f64 {
        if self.write_sd == 0.0 {
            return 0.0;
        }
        let normal = Normal::new(0.0, self.write_sd * cal.t_prog_max).expect("valid sd");
        normal.sample(rng)
    }

    /// Additive detector noise, pJ.
    pub fn sample_detector_noise(&self, rng: &mut DeviceRng) -> f64 {
        if self.detector_sd_pj == 0.0 {
            return 0.0;
        }
        let normal = Normal::new(0.0, self.detector_sd_pj).expect("valid sd");
        normal.sample(rng)
    }

    /// Multiplicative factor applied to a write pulse's energy.
    pub fn sample_pump_factor(&self, rng: &mut DeviceRng) -> f64 {
        if self.pump_sd == 0.0 {
            return 1.0;
        }
        let normal = Normal::new(1.0, self.pump_sd).expect("valid sd");
        normal.sample(rng)
    }
}

impl Default for NoiseModel {
    /// Write noise as measured on the reference cell; detector and pump
    /// sources off until enabled.
    fn default() -> Self {
        NoiseModel {
            write_sd: 0.0035,
            detector_sd_pj: 0.0,
            pump_sd: 0.0,
        }
    }
}

/// Structural-relaxation drift triggered by cycling the probe beam.
///
/// Holding the probe on pins the level: no drift accumulates no matter how
/// long the hold. Switching a strong probe off and back on lands a one-time
/// step proportional to the absolute transmission. A weak probe avoids the
/// effect entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftModel {
    /// Probe power at or above which an off/on cycle produces the full
    /// drift step, mW.
    pub probe_hold_power_mw: f64,
    /// Probe power at or below which off/on cycles produce no drift, mW.
    pub probe_safe_power_mw: f64,
    /// Drift step as a fraction of the absolute transmission.
    pub relaxation_magnitude: f64,
    /// Direction of the step: +1.0 raises transmission, -1.0 lowers it.
    pub direction: f64,
}

impl Default for DriftModel {
    fn default() -> Self {
        DriftModel {
            probe_hold_power_mw: 0.1,
            probe_safe_power_mw: 0.05,
            relaxation_magnitude: 0.09,
            direction: 1.0,
        }
    }
}

impl DriftModel {
    /// Fraction of the full drift step produced by an off/on cycle at the
    /// given probe power: 0 at or below the safe power, 1 at or above the
    /// hold power, linear in between.
    pub fn drift_strength(&self, probe_power_mw: f64) -> f64 {
        assert!(probe_power_mw >= 0.0, "probe power must be non-negative");
        let span = self.probe_hold_power_mw - self.probe_safe_power_mw;
        if span <= 0.0 {
            return if probe_power_mw >= self.probe_hold_power_mw { 1.0 } else { 0.0 };
        }
        ((probe_power_mw - self.probe_safe_power_mw) / span).clamp(0.0, 1.0)
    }
}

/// Switches the probe off for `off_duration_s` and back on, applying the
/// drift step the interruption causes at this probe power. A zero or
/// negative off-time means the probe never went dark: nothing changes, no
/// matter how much wall-clock time passes while it is held on.
///
/// The step is deterministic: `relaxation_magnitude * (t_baseline + t_prog) *
/// direction`, scaled by the probe-power strength. Repeating the cycle does
/// not stack offsets; the relaxed structure re-lands on the same offset.
pub fn probe_cycle(
    state: &mut CellState,
    cal: &CellCalibration,
    model: &DriftModel,
    probe_power_mw: f64,
    off_duration_s: f64,
) {
    if off_duration_s <= 0.0 {
        return;
    }
    let strength = model.drift_strength(probe_power_mw);
    state.drift_offset_t =
        model.relaxation_magnitude * strength * (cal.t_baseline + state.t_prog) * model.direction;
}

/// Re-writes the cell with its remembered write pulse, collapsing any drift
/// offset back to a freshly programmed level (with ordinary write noise).
pub fn correct_drift(
    state: &mut CellState,
    cal: &CellCalibration,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
) -> Result<()> {
    let (energy_pj, width_ns) = state.last_write.ok_or(Error::NoWriteToRestore)?;
    state.write(cal, energy_pj, width_ns, noise, rng)?;
    Ok(())
}
