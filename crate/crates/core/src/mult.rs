//! Scalar multiplication on a single cell.
//!
//! One factor is stored: the multiplicand `a` in [0, 1] maps linearly onto
//! the write-energy window, so the programmed level is `a * t_prog_max`. The
//! other factor travels: the multiplier `b` in [0, 1] maps onto read-pulse
//! energy. The cell output is `T * E_in`, which still contains the
//! crystalline baseline; subtracting the baseline offset `t_baseline * E_in`
//! and dividing by the full-scale output `t_prog_max * e_in_max` decodes the
//! product `a * b`.

use crate::cell::{CellCalibration, CellState};
use crate::error::{Error, Result};
use crate::noise::{DeviceRng, NoiseModel};
use crate::pulse::make_erase_pulse;

/// Default full-scale read energy, pJ. Keeps the strongest read pulse well
/// below the 180 pJ switching threshold of the standard calibration.
pub const E_IN_MAX_DEFAULT_PJ: f64 = 112.8;

/// Mapping of dimensionless operands onto pulse energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperandMapping {
    /// Write energy for `a = 0` (the switching threshold), pJ.
    pub e_write_min_pj: f64,
    /// Write energy for `a = 1`, pJ.
    pub e_write_max_pj: f64,
    /// Read energy for `b = 1`, pJ. Must stay below `e_write_min_pj` so no
    /// read can ever switch the cell.
    pub e_in_max_pj: f64,
}

impl OperandMapping {
    /// Builds a mapping, enforcing the energy ordering
    /// `e_write_max > e_write_min > e_in_max > 0`.
    pub fn new(e_write_min_pj: f64, e_write_max_pj: f64, e_in_max_pj: f64) -> Result<Self> {
        if !(e_write_max_pj > e_write_min_pj && e_write_min_pj > e_in_max_pj && e_in_max_pj > 0.0) {
            return Err(Error::InvalidPulse(format!(
                "operand mapping must satisfy e_write_max > e_write_min > e_in_max > 0, \
                 got {e_write_max_pj} / {e_write_min_pj} / {e_in_max_pj}"
            )));
        }
        Ok(OperandMapping {
            e_write_min_pj,
            e_write_max_pj,
            e_in_max_pj,
        })
    }

    /// The natural mapping for a calibration: the write window is the
    /// calibrated linear region and `b = 1` is the default full-scale read.
    pub fn from_calibration(cal: &CellCalibration) -> Self {
        OperandMapping {
            e_write_min_pj: cal.e_threshold_pj,
            e_write_max_pj: cal.e_linear_max_pj,
            e_in_max_pj: E_IN_MAX_DEFAULT_PJ,
        }
    }

    /// Write energy encoding multiplicand `a` in [0, 1].
    pub fn encode_multiplicand(&self, a: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) || !a.is_finite() {
            return Err(Error::OperandOutOfRange { name: "multiplicand", value: a });
        }
        Ok(self.e_write_min_pj + a * (self.e_write_max_pj - self.e_write_min_pj))
    }

    /// Read energy encoding multiplier `b` in [0, 1].
    pub fn encode_multiplier(&self, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
            return Err(Error::OperandOutOfRange { name: "multiplier", value: b });
        }
        Ok(b * self.e_in_max_pj)
    }
}

/// Full trace of one multiplication, as measured at the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicationRecord {
    pub a: f64,
    pub b: f64,
    /// Energy of the write pulse that stored `a`, pJ.
    pub write_energy_pj: f64,
    /// Energy of the read pulse that carried `b`, pJ.
    pub input_energy_pj: f64,
    /// Raw detected output energy, pJ — still contains the baseline term.
    pub raw_output_pj: f64,
    /// Baseline offset subtracted during decoding, pJ.
    pub offset_pj: f64,
    /// Decoded product `(raw - offset) / (t_prog_max * e_in_max)`.
    pub c_measured: f64,
    /// Exact product `a * b`.
    pub c_exact: f64,
    /// `c_exact - c_measured`.
    pub error: f64,
}

/// Knobs for multiplication runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MultiplyOptions {
    /// Measure the baseline offset with a real read at baseline (one per
    /// distinct read energy) instead of predicting it as
    /// `t_baseline * e_in`. The measured offset carries detector noise, like
    /// any other read.
    pub measured_offset: bool,
    /// In grids: erase and re-write the multiplicand before every single
    /// read, instead of writing once per multiplicand row. Slower, but every
    /// product gets an independent write-noise draw.
    pub write_per_multiplication: bool,
}

fn decode(cal: &CellCalibration, mapping: &OperandMapping, raw_pj: f64, offset_pj: f64) -> f64 {
    (raw_pj - offset_pj) / (cal.t_prog_max * mapping.e_in_max_pj)
}

fn record(
    cal: &CellCalibration,
    mapping: &OperandMapping,
    a: f64,
    b: f64,
    write_energy_pj: f64,
    input_energy_pj: f64,
    raw_output_pj: f64,
    offset_pj: f64,
) -> MultiplicationRecord {
    let c_measured = decode(cal, mapping, raw_output_pj, offset_pj);
    let c_exact = a * b;
    MultiplicationRecord {
        a,
        b,
        write_energy_pj,
        input_energy_pj,
        raw_output_pj,
        offset_pj,
        c_measured,
        c_exact,
        error: c_exact - c_measured,
    }
}

/// Multiplies `a * b` on a cell that sits at baseline: writes the
/// multiplicand, reads with the multiplier pulse, decodes with offset
/// correction. The cell is left holding the multiplicand level.
pub fn multiply(
    cell: &mut CellState,
    cal: &CellCalibration,
    mapping: &OperandMapping,
    a: f64,
    b: f64,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
    options: MultiplyOptions,
) -> Result<MultiplicationRecord> {
    if !cell.is_baseline() {
        return Err(Error::CellNotAtBaseline { t_prog: cell.t_prog });
    }
    let e_write = mapping.encode_multiplicand(a)?;
    let e_in = mapping.encode_multiplier(b)?;
    let offset_pj = if options.measured_offset {
        cell.read(cal, e_in, noise, rng)?
    } else {
        cal.t_baseline * e_in
    };
    cell.write(cal, e_write, cal.width_reference_ns, noise, rng)?;
    let raw = cell.read(cal, e_in, noise, rng)?;
    Ok(record(cal, mapping, a, b, e_write, e_in, raw, offset_pj))
}

/// `n` operand values evenly spaced over [0, 1] (endpoints included); a
/// single value collapses to 1.0.
pub fn operand_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Runs an `n_a × n_b` multiplication grid on one cell.
///
/// Default protocol: for each multiplicand, one write, then all `n_b` read
/// pulses, then a single-shot erase back to baseline — storage is
/// non-volatile, so one stored level serves many multiplications. With
/// `write_per_multiplication` the multiplicand is erased and re-written
/// before every read.
pub fn run_grid(
    cell: &mut CellState,
    cal: &CellCalibration,
    mapping: &OperandMapping,
    n_a: usize,
    n_b: usize,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
    options: MultiplyOptions,
) -> Result<Vec<MultiplicationRecord>> {
    if !cell.is_baseline() {
        return Err(Error::CellNotAtBaseline { t_prog: cell.t_prog });
    }
    if n_a == 0 || n_b == 0 {
        return Ok(Vec::new());
    }
    let erase = make_erase_pulse(cal);
    let a_values = operand_grid(n_a);
    let b_values = operand_grid(n_b);
    let b_energies: Result<Vec<f64>> = b_values
        .iter()
        .map(|&b| mapping.encode_multiplier(b))
        .collect();
    let b_energies = b_energies?;

    // Offsets are level-independent in this model (the baseline transmits
    // under every stored level), so one offset per read energy serves the
    // whole grid. Measured mode takes them with real reads while the cell is
    // still at baseline.
    let mut offsets = Vec::with_capacity(n_b);
    for &e_in in &b_energies {
        let off = if options.measured_offset {
            cell.read(cal, e_in, noise, rng)?
        } else {
            cal.t_baseline * e_in
        };
        offsets.push(off);
    }

    let mut records = Vec::with_capacity(n_a * n_b);
    for &a in &a_values {
        let e_write = mapping.encode_multiplicand(a)?;
        if !options.write_per_multiplication {
            cell.write(cal, e_write, cal.width_reference_ns, noise, rng)?;
        }
        for (j, &b) in b_values.iter().enumerate() {
            if options.write_per_multiplication {
                cell.erase_single_shot(cal, &erase)?;
                cell.write(cal, e_write, cal.width_reference_ns, noise, rng)?;
            }
            let raw = cell.read(cal, b_energies[j], noise, rng)?;
            records.push(record(
                cal, mapping, a, b, e_write, b_energies[j], raw, offsets[j],
            ));
        }
        cell.erase_single_shot(cal, &erase)?;
    }
    Ok(records)
}

/// One bin of a fixed-width histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Summary statistics over the `error` column of a multiplication run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// Standardized third moment; 0 for a symmetric distribution.
    pub skewness: f64,
    /// Excess kurtosis; 0 for a Gaussian.
    pub excess_kurtosis: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Mean / SD / shape moments and a fixed-bin histogram of the errors.
pub fn error_stats(records: &[MultiplicationRecord], n_bins: usize) -> ErrorStats {
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    stats_of(&errors, n_bins)
}

/// The same summary for a bare sample (used by experiments that track level
/// errors rather than multiplication errors).
pub fn stats_of(sample: &[f64], n_bins: usize) -> ErrorStats {
    assert!(!sample.is_empty(), "statistics need at least one sample");
    assert!(n_bins > 0, "histogram needs at least one bin");
    let n = sample.len();
    let mean = sample.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in sample {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let sd = if n > 1 { (m2 / (n as f64 - 1.0)).sqrt() } else { 0.0 };
    let pop_var = m2 / n as f64;
    let (skewness, excess_kurtosis) = if pop_var > 0.0 {
        (
            (m3 / n as f64) / pop_var.powf(1.5),
            (m4 / n as f64) / (pop_var * pop_var) - 3.0,
        )
    } else {
        (0.0, 0.0)
    };
    let min = sample.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut histogram = Vec::with_capacity(n_bins);
    if max > min {
        let width = (max - min) / n_bins as f64;
        let mut counts = vec![0usize; n_bins];
        for &x in sample {
            let idx = (((x - min) / width) as usize).min(n_bins - 1);
            counts[idx] += 1;
        }
        for (i, c) in counts.into_iter().enumerate() {
            histogram.push(HistogramBin {
                lo: min + i as f64 * width,
                hi: min + (i + 1) as f64 * width,
                count: c,
            });
        }
    } else {
        // Degenerate sample: everything identical (e.g. noiseless errors).
        histogram.push(HistogramBin { lo: min, hi: max, count: n });
    }
    ErrorStats {
        n,
        mean,
        sd,
        min,
        max,
        skewness,
        excess_kurtosis,
        histogram,
    }
}
