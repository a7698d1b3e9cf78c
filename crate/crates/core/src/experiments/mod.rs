//! Ready-made experiment runs: each takes a config, drives simulated cells,
//! and renders its results as CSV text and SVG figures.
//!
//! Runs are deterministic: the same config and seed produce byte-identical
//! CSV and SVG output. All floating-point CSV fields use fixed 9-decimal
//! formatting.

pub mod drift;
pub mod grid;
pub mod levels;
pub mod solve;
pub mod sweep;

use crate::calibrate::DeviceProfile;
use crate::noise::NoiseModel;

/// The profile's noise model, or a silent one when noise is switched off.
pub(crate) fn effective_noise(profile: &DeviceProfile, noise_on: bool) -> NoiseModel {
    if noise_on {
        profile.noise
    } else {
        NoiseModel::quiet()
    }
}

/// Fixed-precision float field for CSV output.
pub(crate) fn csv_f(v: f64) -> String {
    format!("{v:.9}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_switch_selects_the_profile_or_silence() {
        let profile = DeviceProfile::standard();
        assert_eq!(effective_noise(&profile, true), profile.noise);
        assert_eq!(effective_noise(&profile, false), NoiseModel::quiet());
    }

    #[test]
    fn csv_floats_are_fixed_width() {
        assert_eq!(csv_f(0.75), "0.750000000");
        assert_eq!(csv_f(-1.0 / 3.0), "-0.333333333");
    }
}
