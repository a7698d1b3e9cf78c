//! Calibration fitting and profile files.
//!
//! Two fits recover a cell's transfer curve from sweep data: a robust
//! piecewise-linear fit of level against pulse energy (threshold knee,
//! linear window, saturation plateau) and an exponential-saturation fit of
//! level against pulse width. A `DeviceProfile` bundles every tunable
//! number — geometry, cell calibration, noise, drift — and round-trips
//! through a plain-text `key = value` file byte-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::cell::{CellCalibration, CellGeometry};
use crate::error::{Error, Result};
use crate::noise::{DriftModel, NoiseModel};

/// One point of a stimulus → response sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub stimulus: f64,
    pub response: f64,
}

impl SweepRecord {
    pub fn new(stimulus: f64, response: f64) -> Self {
        SweepRecord { stimulus, response }
    }
}

/// Recovered energy→level transfer curve: flat below a threshold, affine up
/// to a saturation energy, flat above.
#[derive(Debug, Clone)]
pub struct LinearFit {
    /// Energy where the affine segment crosses zero response.
    pub e_threshold_pj: f64,
    /// Energy where the affine segment meets the saturation plateau.
    pub e_linear_max_pj: f64,
    /// Plateau height.
    pub t_prog_max: f64,
    /// Affine segment slope (response per pJ).
    pub slope: f64,
    /// Affine segment intercept.
    pub intercept: f64,
    /// Residual standard deviation of the kept points about the line.
    pub residual_sd: f64,
    /// Points that survived window selection and outlier pruning.
    pub kept_points: usize,
    pub warnings: Vec<String>,
}

/// Recovered width→response saturation curve `A·(1 − exp(−w/τ))`.
#[derive(Debug, Clone)]
pub struct WidthFit {
    /// Exponential time constant.
    pub width_tau_ns: f64,
    /// Width where the curve reaches 99% of its asymptote, `τ·ln 100`.
    pub width_saturation_ns: f64,
    /// Fitted asymptote.
    pub amplitude: f64,
    pub residual_sd: f64,
    pub warnings: Vec<String>,
}

/// Sorts by stimulus and merges points closer than 1/1000 of the sweep
/// span into their average. Repeated measurements at (nearly) the same
/// stimulus otherwise produce wild local slopes that confuse window
/// detection.
fn dedup_sorted(records: &[SweepRecord]) -> Vec<SweepRecord> {
    let mut sorted: Vec<SweepRecord> = records.to_vec();
    sorted.sort_by(|a, b| a.stimulus.partial_cmp(&b.stimulus).unwrap());
    let span = sorted.last().unwrap().stimulus - sorted[0].stimulus;
    let radius = span * 1e-3;
    let mut out: Vec<SweepRecord> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i].stimulus;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut n = 0;
        while i < sorted.len() && sorted[i].stimulus - start <= radius {
            sx += sorted[i].stimulus;
            sy += sorted[i].response;
            n += 1;
            i += 1;
        }
        out.push(SweepRecord::new(sx / n as f64, sy / n as f64));
    }
    out
}

fn check_sweep(records: &[SweepRecord], name: &str) -> Result<()> {
    if records.len() < 3 {
        return Err(Error::FitRejected(format!(
            "{name} needs at least 3 points, got {}",
            records.len()
        )));
    }
    for r in records {
        if !r.stimulus.is_finite() || !r.response.is_finite() {
            return Err(Error::FitRejected(format!(
                "{name} contains a non-finite value at stimulus {}",
                r.stimulus
            )));
        }
    }
    let min = records.iter().map(|r| r.stimulus).fold(f64::INFINITY, f64::min);
    let max = records.iter().map(|r| r.stimulus).fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::FitRejected(format!(
            "{name} stimuli are all identical ({min}); no curve to fit"
        )));
    }
    Ok(())
}

/// Least squares `y = m·x + q` over a point set.
fn affine_ls(points: &[SweepRecord]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.stimulus).sum();
    let sy: f64 = points.iter().map(|p| p.response).sum();
    let sxx: f64 = points.iter().map(|p| p.stimulus * p.stimulus).sum();
    let sxy: f64 = points.iter().map(|p| p.stimulus * p.response).sum();
    let m = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let q = (sy - m * sx) / n;
    (m, q)
}

/// Fits the three-piece energy→level transfer curve.
///
/// The sweep may include sub-threshold points (flat zero response) and
/// saturated points (flat plateau); only the rising window between them is
/// fitted. Window selection: local slopes between consecutive points, keep
/// the longest contiguous run of segments with at least 20% of the steepest
/// slope. Outliers are pruned iteratively at 3.5 residual SDs.
pub fn fit_linear_response(records: &[SweepRecord]) -> Result<LinearFit> {
    check_sweep(records, "energy sweep")?;
    let data = dedup_sorted(records);
    if data.len() < 3 {
        return Err(Error::FitRejected(format!(
            "energy sweep has only {} distinct stimuli after merging duplicates",
            data.len()
        )));
    }
    let mut warnings = Vec::new();

    // Local slopes; the steepest sets the scale for "rising".
    let slopes: Vec<f64> = data
        .windows(2)
        .map(|w| (w[1].response - w[0].response) / (w[1].stimulus - w[0].stimulus))
        .collect();
    let s_ref = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if s_ref <= 0.0 {
        return Err(Error::FitRejected(
            "energy sweep response never increases; no rising window".into(),
        ));
    }
    let rising: Vec<bool> = slopes.iter().map(|&s| s >= 0.2 * s_ref).collect();

    // Longest contiguous run of rising segments.
    let (mut best_start, mut best_len) = (0usize, 0usize);
    let mut run_start = 0usize;
    let mut run_len = 0usize;
    for (i, &up) in rising.iter().enumerate() {
        if up {
            if run_len == 0 {
                run_start = i;
            }
            run_len += 1;
            if run_len > best_len {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    // Segment run [best_start, best_start + best_len) spans points
    // [best_start, best_start + best_len].
    let lo = best_start;
    let hi = best_start + best_len; // inclusive point index
    let mut kept: Vec<SweepRecord> = data[lo..=hi].to_vec();
    if kept.len() < 3 {
        warnings.push(format!(
            "rising window has only {} points; fit is poorly constrained",
            kept.len()
        ));
    }

    // Iterative affine fit with residual pruning.
    let (mut m, mut q) = affine_ls(&kept);
    let mut residual_sd = 0.0;
    for _ in 0..10 {
        let residuals: Vec<f64> = kept
            .iter()
            .map(|p| p.response - (m * p.stimulus + q))
            .collect();
        let sd = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
        residual_sd = sd;
        if sd <= 1e-14 {
            break; // effectively exact
        }
        let survivors: Vec<SweepRecord> = kept
            .iter()
            .zip(&residuals)
            .filter(|(_, r)| r.abs() <= 3.5 * sd)
            .map(|(p, _)| *p)
            .collect();
        if survivors.len() == kept.len() || survivors.len() < 3 {
            break;
        }
        kept = survivors;
        let refit = affine_ls(&kept);
        m = refit.0;
        q = refit.1;
    }
    if m <= 0.0 {
        return Err(Error::FitRejected(
            "fitted slope is not positive; rising window was noise".into(),
        ));
    }

    // Regrow the window: noise can split the detected run, so re-admit
    // every point that sits on the fitted line (within 3.5 residual SDs, or
    // a tiny absolute band when the fit is exact), then refit. Plateau and
    // sub-threshold points sit far off the line and stay out.
    let y_span = data.iter().map(|p| p.response).fold(f64::NEG_INFINITY, f64::max)
        - data.iter().map(|p| p.response).fold(f64::INFINITY, f64::min);
    for _ in 0..3 {
        let tol = (3.5 * residual_sd).max(1e-9 * y_span.abs().max(1e-300));
        let grown: Vec<SweepRecord> = data
            .iter()
            .filter(|p| (p.response - (m * p.stimulus + q)).abs() <= tol)
            .copied()
            .collect();
        if grown.len() < 3 || grown.len() == kept.len() {
            break;
        }
        kept = grown;
        let refit = affine_ls(&kept);
        m = refit.0;
        q = refit.1;
        let sse: f64 = kept
            .iter()
            .map(|p| {
                let r = p.response - (m * p.stimulus + q);
                r * r
            })
            .sum();
        residual_sd = (sse / kept.len() as f64).sqrt();
    }
    if m <= 0.0 {
        return Err(Error::FitRejected(
            "fitted slope is not positive; rising window was noise".into(),
        ));
    }

    let e_threshold_pj = -q / m;

    // Points beyond the rising window form the saturation plateau.
    let window_end = kept.last().unwrap().stimulus;
    let tail: Vec<&SweepRecord> = data
        .iter()
        .filter(|p| p.stimulus > window_end)
        .collect();
    let (t_prog_max, e_linear_max_pj) = if tail.is_empty() {
        let e_max = kept.last().unwrap().stimulus;
        warnings.push(
            "sweep ends inside the rising window; saturation level taken from its last point"
                .into(),
        );
        (m * e_max + q, e_max)
    } else {
        let t_max = tail.iter().map(|p| p.response).sum::<f64>() / tail.len() as f64;
        ((t_max), (t_max - q) / m)
    };

    Ok(LinearFit {
        e_threshold_pj,
        e_linear_max_pj,
        t_prog_max,
        slope: m,
        intercept: q,
        residual_sd,
        kept_points: kept.len(),
        warnings,
    })
}

/// Sum of squared errors of the best-amplitude fit at a given τ, plus that
/// amplitude.
fn width_sse(data: &[SweepRecord], tau: f64) -> (f64, f64) {
    let mut sfy = 0.0;
    let mut sff = 0.0;
    for p in data {
        let f = 1.0 - (-p.stimulus / tau).exp();
        sfy += f * p.response;
        sff += f * f;
    }
    let a = if sff > 0.0 { sfy / sff } else { 0.0 };
    let sse: f64 = data
        .iter()
        .map(|p| {
            let f = 1.0 - (-p.stimulus / tau).exp();
            let r = p.response - a * f;
            r * r
        })
        .sum();
    (sse, a)
}

/// Fits `response = A·(1 − exp(−width/τ))` to a width sweep.
///
/// τ is found by a coarse logarithmic scan over [0.1, 1000] ns refined by
/// golden-section search; the amplitude has a closed form at each τ.
pub fn fit_width_saturation(records: &[SweepRecord]) -> Result<WidthFit> {
    check_sweep(records, "width sweep")?;
    for r in records {
        if r.stimulus <= 0.0 {
            return Err(Error::FitRejected(format!(
                "width sweep contains a non-positive width ({})",
                r.stimulus
            )));
        }
    }
    let data = dedup_sorted(records);
    let mut warnings = Vec::new();

    let y_min = data.iter().map(|p| p.response).fold(f64::INFINITY, f64::min);
    let y_max = data.iter().map(|p| p.response).fold(f64::NEG_INFINITY, f64::max);
    let y_span = y_max - y_min;
    if y_span <= 1e-12 * y_max.abs().max(1.0) {
        warnings.push("response does not vary with width; τ is not identifiable".into());
    } else {
        let mut drop = 0.0;
        for w in data.windows(2) {
            if w[1].response < w[0].response {
                drop += w[0].response - w[1].response;
            }
        }
        if drop > 0.05 * y_span {
            warnings.push("response is not monotone in width".into());
        }
    }

    // Coarse scan over log τ.
    let (t_lo, t_hi) = (0.1f64.ln(), 1000f64.ln());
    let grid = 256usize;
    let mut best_k = 0usize;
    let mut best_sse = f64::INFINITY;
    for k in 0..grid {
        let t = t_lo + (t_hi - t_lo) * k as f64 / (grid - 1) as f64;
        let (sse, _) = width_sse(&data, t.exp());
        if sse < best_sse {
            best_sse = sse;
            best_k = k;
        }
    }
    let step = (t_hi - t_lo) / (grid - 1) as f64;
    let mut a = t_lo + step * (best_k.saturating_sub(1)) as f64;
    let mut b = (t_lo + step * (best_k + 1) as f64).min(t_hi);

    // Golden-section refinement on log τ.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = width_sse(&data, c.exp()).0;
    let mut fd = width_sse(&data, d.exp()).0;
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = width_sse(&data, c.exp()).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = width_sse(&data, d.exp()).0;
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    let tau = ((a + b) / 2.0).exp();
    let (sse, amplitude) = width_sse(&data, tau);
    let residual_sd = (sse / data.len() as f64).sqrt();

    Ok(WidthFit {
        width_tau_ns: tau,
        width_saturation_ns: tau * 100f64.ln(),
        amplitude,
        residual_sd,
        warnings,
    })
}

/// Every tunable number of a simulated device, as one bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub geometry: CellGeometry,
    pub cell: CellCalibration,
    pub noise: NoiseModel,
    pub drift: DriftModel,
}

impl DeviceProfile {
    /// The reference device: 180–354 pJ window, 25 ns pulses.
    pub fn standard() -> Self {
        DeviceProfile {
            geometry: CellGeometry::default(),
            cell: CellCalibration::standard(),
            noise: NoiseModel::default(),
            drift: DriftModel::default(),
        }
    }

    /// The 50 ns variant: 350–600 pJ window.
    pub fn pulse50ns() -> Self {
        DeviceProfile {
            cell: CellCalibration::pulse50ns(),
            ..Self::standard()
        }
    }

    /// Renders the profile file. Keys appear in a fixed order; floats use
    /// shortest-round-trip formatting, so parse → render is byte-stable.
    pub fn to_profile_string(&self) -> String {
        let mut s = String::new();
        s.push_str(PROFILE_HEADER);
        s.push('\n');
        for (key, value) in self.entries() {
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("geometry.length_gst_um", self.geometry.length_gst_um),
            ("geometry.width_waveguide_um", self.geometry.width_waveguide_um),
            ("geometry.height_film_nm", self.geometry.height_film_nm),
            ("cell.e_threshold_pj", self.cell.e_threshold_pj),
            ("cell.e_linear_max_pj", self.cell.e_linear_max_pj),
            ("cell.t_prog_max", self.cell.t_prog_max),
            ("cell.t_baseline", self.cell.t_baseline),
            ("cell.width_reference_ns", self.cell.width_reference_ns),
            ("cell.width_tau_ns", self.cell.width_tau_ns),
            ("cell.width_saturation_ns", self.cell.width_saturation_ns),
            ("cell.settle_time_ns", self.cell.settle_time_ns),
            ("cell.erase_peak_power_mw", self.cell.erase_peak_power_mw),
            ("cell.erase_step_fraction", self.cell.erase_step_fraction),
            ("cell.erase_step1_width_ns", self.cell.erase_step1_width_ns),
            ("cell.erase_step2_width_ns", self.cell.erase_step2_width_ns),
            ("noise.write_sd", self.noise.write_sd),
            ("noise.detector_sd_pj", self.noise.detector_sd_pj),
            ("noise.pump_sd", self.noise.pump_sd),
            ("drift.probe_hold_power_mw", self.drift.probe_hold_power_mw),
            ("drift.probe_safe_power_mw", self.drift.probe_safe_power_mw),
            ("drift.relaxation_magnitude", self.drift.relaxation_magnitude),
            ("drift.direction", self.drift.direction),
        ]
    }

    /// Parses a profile file. Strict: the header must match, every key must
    /// be present exactly once, and no unknown keys are allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some(h) if h == PROFILE_HEADER => {}
            Some(h) => {
                return Err(Error::ProfileParse(format!(
                    "unsupported header {h:?}; expected {PROFILE_HEADER:?}"
                )))
            }
            None => return Err(Error::ProfileParse("empty profile file".into())),
        }

        let mut values: BTreeMap<String, f64> = BTreeMap::new();
        for (lineno, raw) in lines.enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ProfileParse(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 2
                ))
            })?;
            let key = key.trim().to_string();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::ProfileParse(format!(
                    "key `{key}`: cannot parse {:?} as a number",
                    value.trim()
                ))
            })?;
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::ProfileParse(format!("duplicate key `{key}`")));
            }
        }

        let template = DeviceProfile::standard();
        let known: Vec<&'static str> = template.entries().iter().map(|(k, _)| *k).collect();
        for key in values.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::ProfileParse(format!("unknown key `{key}`")));
            }
        }
        let mut take = |key: &str| -> Result<f64> {
            values
                .remove(key)
                .ok_or_else(|| Error::ProfileParse(format!("missing key `{key}`")))
        };

        Ok(DeviceProfile {
            geometry: CellGeometry {
                length_gst_um: take("geometry.length_gst_um")?,
                width_waveguide_um: take("geometry.width_waveguide_um")?,
                height_film_nm: take("geometry.height_film_nm")?,
            },
            cell: CellCalibration {
                e_threshold_pj: take("cell.e_threshold_pj")?,
                e_linear_max_pj: take("cell.e_linear_max_pj")?,
                t_prog_max: take("cell.t_prog_max")?,
                t_baseline: take("cell.t_baseline")?,
                width_reference_ns: take("cell.width_reference_ns")?,
                width_tau_ns: take("cell.width_tau_ns")?,
                width_saturation_ns: take("cell.width_saturation_ns")?,
                settle_time_ns: take("cell.settle_time_ns")?,
                erase_peak_power_mw: take("cell.erase_peak_power_mw")?,
                erase_step_fraction: take("cell.erase_step_fraction")?,
                erase_step1_width_ns: take("cell.erase_step1_width_ns")?,
                erase_step2_width_ns: take("cell.erase_step2_width_ns")?,
            },
            noise: NoiseModel {
                write_sd: take("noise.write_sd")?,
                detector_sd_pj: take("noise.detector_sd_pj")?,
                pump_sd: take("noise.pump_sd")?,
            },
            drift: DriftModel {
                probe_hold_power_mw: take("drift.probe_hold_power_mw")?,
                probe_safe_power_mw: take("drift.probe_safe_power_mw")?,
                relaxation_magnitude: take("drift.relaxation_magnitude")?,
                direction: take("drift.direction")?,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_profile_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::ProfileParse(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::ProfileParse(msg) => {
                Error::ProfileParse(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }
}

const PROFILE_HEADER: &str = "photonic-imc-cal v1";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn profile_round_trip_is_byte_identical() {
        for profile in [DeviceProfile::standard(), DeviceProfile::pulse50ns()] {
            let text = profile.to_profile_string();
            let parsed = DeviceProfile::parse(&text).unwrap();
            assert_eq!(parsed, profile);
            assert_eq!(parsed.to_profile_string(), text);
        }
    }

    #[test]
    fn profile_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("device.cal");
        let profile = DeviceProfile::pulse50ns();
        profile.save(&path).unwrap();
        let loaded = DeviceProfile::load(&path).unwrap();
        assert_eq!(loaded, profile);
    }

    #[test]
    fn missing_key_is_named() {
        let text: String = DeviceProfile::standard()
            .to_profile_string()
            .lines()
            .filter(|l| !l.starts_with("cell.t_baseline"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = DeviceProfile::parse(&text).unwrap_err();
        assert!(
            err.to_string().contains("cell.t_baseline"),
            "error was: {err}"
        );
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut text = DeviceProfile::standard().to_profile_string();
        text.push_str("cell.flux_capacitance = 1.21\n");
        let err = DeviceProfile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("flux_capacitance"));
    }

    #[test]
    fn bad_header_and_bad_value_are_rejected() {
        assert!(DeviceProfile::parse("some other file\n").is_err());
        let text = DeviceProfile::standard()
            .to_profile_string()
            .replace("cell.t_baseline = 0.37", "cell.t_baseline = maybe");
        let err = DeviceProfile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("cell.t_baseline"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut text = String::from("photonic-imc-cal v1\n\n# tuned by hand\n");
        text.push_str(
            DeviceProfile::standard()
                .to_profile_string()
                .split_once('\n')
                .unwrap()
                .1,
        );
        assert!(DeviceProfile::parse(&text).is_ok());
    }

    fn synthetic_energy_sweep(cal: &CellCalibration) -> Vec<SweepRecord> {
        let mut records = Vec::new();
        let grid: Vec<f64> = vec![
            0.0, 60.0, 120.0, 150.0, 180.0, 200.0, 220.0, 240.0, 260.0, 280.0, 300.0, 320.0,
            340.0, 354.0, 380.0, 420.0, 460.0, 500.0,
        ];
        for e in grid {
            records.push(SweepRecord::new(
                e,
                cal.target_level(e, cal.width_reference_ns),
            ));
        }
        records
    }

    #[test]
    fn linear_fit_recovers_the_exact_transfer_curve() {
        let cal = CellCalibration::standard();
        let fit = fit_linear_response(&synthetic_energy_sweep(&cal)).unwrap();
        assert!(
            (fit.e_threshold_pj - 180.0).abs() < 1e-9,
            "threshold {}",
            fit.e_threshold_pj
        );
        assert!(
            (fit.e_linear_max_pj - 354.0).abs() < 1e-9,
            "saturation energy {}",
            fit.e_linear_max_pj
        );
        assert!((fit.t_prog_max - 0.143).abs() < 1e-12);
        assert!(fit.residual_sd < 1e-12);
    }

    #[test]
    fn linear_fit_survives_write_noise() {
        let cal = CellCalibration::standard();
        let mut rng = rng_from_seed(77);
        let noise = Normal::new(0.0, 0.0035 * cal.t_prog_max).unwrap();
        // Dense noisy sweep: 150 points across the full range, 3 repeats.
        let mut records = Vec::new();
        for rep in 0..3 {
            for k in 0..150 {
                let e = 500.0 * k as f64 / 149.0 + rep as f64 * 0.1;
                let y = cal.target_level(e, cal.width_reference_ns) + noise.sample(&mut rng);
                records.push(SweepRecord::new(e, y));
            }
        }
        let fit = fit_linear_response(&records).unwrap();
        assert!(
            (fit.e_threshold_pj - 180.0).abs() < 0.02 * 180.0,
            "threshold {}",
            fit.e_threshold_pj
        );
        assert!(
            (fit.e_linear_max_pj - 354.0).abs() < 0.02 * 354.0,
            "saturation energy {}",
            fit.e_linear_max_pj
        );
        assert!((fit.t_prog_max - 0.143).abs() < 0.02 * 0.143);
    }

    #[test]
    fn linear_fit_rejects_degenerate_sweeps() {
        let too_few = [SweepRecord::new(0.0, 0.0), SweepRecord::new(1.0, 1.0)];
        assert!(matches!(
            fit_linear_response(&too_few),
            Err(Error::FitRejected(_))
        ));
        let same_x: Vec<SweepRecord> =
            (0..5).map(|i| SweepRecord::new(200.0, i as f64)).collect();
        assert!(matches!(
            fit_linear_response(&same_x),
            Err(Error::FitRejected(_))
        ));
        let flat: Vec<SweepRecord> = (0..5)
            .map(|i| SweepRecord::new(i as f64 * 50.0, 0.1))
            .collect();
        assert!(matches!(
            fit_linear_response(&flat),
            Err(Error::FitRejected(_))
        ));
    }

    #[test]
    fn width_fit_recovers_tau() {
        let cal = CellCalibration::standard();
        let widths = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0];
        let records: Vec<SweepRecord> = widths
            .iter()
            .map(|&w| SweepRecord::new(w, 1.0 - (-w / cal.width_tau_ns).exp()))
            .collect();
        let fit = fit_width_saturation(&records).unwrap();
        assert!(
            (fit.width_tau_ns - cal.width_tau_ns).abs() < 0.01 * cal.width_tau_ns,
            "tau {}",
            fit.width_tau_ns
        );
        assert!((fit.amplitude - 1.0).abs() < 1e-6);
        // 99% saturation width = τ·ln 100.
        assert!(
            (fit.width_saturation_ns - cal.width_tau_ns * 100f64.ln()).abs()
                < 0.01 * fit.width_saturation_ns
        );
        // Fitted curve reproduces the anchor: response(25 ns) = 0.75.
        let at_25 = fit.amplitude * (1.0 - (-25.0 / fit.width_tau_ns).exp());
        assert!((at_25 - 0.75).abs() < 0.02, "response(25) = {at_25}");
    }

    #[test]
    fn width_fit_flags_constant_and_non_monotone_data() {
        let constant: Vec<SweepRecord> = (1..=5)
            .map(|i| SweepRecord::new(i as f64 * 10.0, 0.5))
            .collect();
        let fit = fit_width_saturation(&constant).unwrap();
        assert!(fit.warnings.iter().any(|w| w.contains("does not vary")));

        let wobble = vec![
            SweepRecord::new(10.0, 0.4),
            SweepRecord::new(20.0, 0.7),
            SweepRecord::new(30.0, 0.3),
            SweepRecord::new(40.0, 0.8),
        ];
        let fit = fit_width_saturation(&wobble).unwrap();
        assert!(fit.warnings.iter().any(|w| w.contains("not monotone")));
    }

    #[test]
    fn width_fit_rejects_non_positive_widths() {
        let bad = vec![
            SweepRecord::new(-5.0, 0.1),
            SweepRecord::new(10.0, 0.4),
            SweepRecord::new(20.0, 0.6),
        ];
        assert!(matches!(
            fit_width_saturation(&bad),
            Err(Error::FitRejected(_))
        ));
    }
}
