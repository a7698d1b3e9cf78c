//! Multilevel conditioning: a staircase over the full set of programmable
//! levels, then a long randomized-order transition run that measures the
//! level-placement error distribution.

use crate::calibrate::DeviceProfile;
use crate::cell::CellState;
use crate::error::Result;
use crate::experiments::{csv_f, effective_noise};
use crate::mult::{stats_of, ErrorStats, OperandMapping};
use crate::noise::rng_from_seed;
use crate::pulse::make_erase_pulse;
use crate::svg::Plot;

#[derive(Debug, Clone)]
pub struct LevelsConfig {
    pub profile: DeviceProfile,
    pub seed: u64,
    pub noise_on: bool,
    /// Number of distinct levels in the staircase (including level 0).
    pub n_levels: usize,
    /// Writes per level in the staircase phase.
    pub staircase_repeats: usize,
    /// Erase→write transitions in the error-statistics phase.
    pub transitions: usize,
}

impl LevelsConfig {
    pub fn new(profile: DeviceProfile) -> Self {
        LevelsConfig {
            profile,
            seed: 42,
            noise_on: true,
            n_levels: 13,
            staircase_repeats: 20,
            transitions: 600,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevelSample {
    /// Phase label: "staircase" or "transition".
    pub phase: &'static str,
    /// Running sample index within the phase.
    pub index: usize,
    /// Level index within the staircase.
    pub level: usize,
    pub target_t: f64,
    pub achieved_t: f64,
    /// (achieved − target) / full range.
    pub error_frac: f64,
}

#[derive(Debug, Clone)]
pub struct LevelsResult {
    pub samples: Vec<LevelSample>,
    /// Mean achieved level per staircase level.
    pub centroids: Vec<f64>,
    /// Per-level sample SD of the achieved level.
    pub level_sds: Vec<f64>,
    /// Smallest adjacent centroid gap divided by the pooled level SD.
    pub min_gap_over_sd: f64,
    /// Statistics of `error_frac` over the transition phase.
    pub transition_stats: ErrorStats,
    t_prog_max: f64,
}

/// Runs the staircase and transition phases on one cell.
pub fn run(config: &LevelsConfig) -> Result<LevelsResult> {
    assert!(config.n_levels >= 2, "need at least two levels");
    let cal = &config.profile.cell;
    let mapping = OperandMapping::from_calibration(cal);
    let noise = effective_noise(&config.profile, config.noise_on);
    let mut rng = rng_from_seed(config.seed);
    let erase = make_erase_pulse(cal);
    let mut cell = CellState::baseline();

    let level_fraction =
        |level: usize| level as f64 / (config.n_levels - 1) as f64;

    // Phase 1: staircase. Every level written `staircase_repeats` times,
    // each write from a freshly erased cell.
    let mut samples = Vec::new();
    let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); config.n_levels];
    let mut index = 0;
    for level in 0..config.n_levels {
        let a = level_fraction(level);
        let e_write = mapping.encode_multiplicand(a)?;
        let target_t = cal.target_level(e_write, cal.width_reference_ns);
        for _ in 0..config.staircase_repeats {
            if !cell.is_baseline() {
                cell.erase_single_shot(cal, &erase)?;
            }
            cell.write(cal, e_write, cal.width_reference_ns, &noise, &mut rng)?;
            let achieved = cell.t_prog;
            per_level[level].push(achieved);
            samples.push(LevelSample {
                phase: "staircase",
                index,
                level,
                target_t,
                achieved_t: achieved,
                error_frac: (achieved - target_t) / cal.t_prog_max,
            });
            index += 1;
        }
    }

    let centroids: Vec<f64> = per_level
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let level_sds: Vec<f64> = per_level
        .iter()
        .zip(&centroids)
        .map(|(v, &c)| {
            let ss: f64 = v.iter().map(|x| (x - c) * (x - c)).sum();
            (ss / (v.len() as f64 - 1.0).max(1.0)).sqrt()
        })
        .collect();
    let pooled_sd = {
        let mean_var =
            level_sds.iter().map(|s| s * s).sum::<f64>() / level_sds.len() as f64;
        mean_var.sqrt()
    };
    let min_gap = centroids
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let min_gap_over_sd = if pooled_sd > 0.0 {
        min_gap / pooled_sd
    } else {
        f64::INFINITY
    };

    // Phase 2: transitions. Interior levels only — the endpoints clamp
    // one noise tail (no level below 0 or above full scale), which would
    // skew the error distribution these statistics characterize.
    let interior: Vec<usize> = (1..config.n_levels - 1).collect();
    let mut transition_errors = Vec::with_capacity(config.transitions);
    for t in 0..config.transitions {
        let level = interior[t % interior.len()];
        let a = level_fraction(level);
        let e_write = mapping.encode_multiplicand(a)?;
        let target_t = cal.target_level(e_write, cal.width_reference_ns);
        if !cell.is_baseline() {
            cell.erase_single_shot(cal, &erase)?;
        }
        cell.write(cal, e_write, cal.width_reference_ns, &noise, &mut rng)?;
        let achieved = cell.t_prog;
        let error_frac = (achieved - target_t) / cal.t_prog_max;
        transition_errors.push(error_frac);
        samples.push(LevelSample {
            phase: "transition",
            index: t,
            level,
            target_t,
            achieved_t: achieved,
            error_frac,
        });
    }
    let transition_stats = stats_of(&transition_errors, 20);

    Ok(LevelsResult {
        samples,
        centroids,
        level_sds,
        min_gap_over_sd,
        transition_stats,
        t_prog_max: cal.t_prog_max,
    })
}

impl LevelsResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,index,level,target_t,achieved_t,error_frac\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.phase,
                s.index,
                s.level,
                csv_f(s.target_t),
                csv_f(s.achieved_t),
                csv_f(s.error_frac)
            ));
        }
        out
    }

    /// Staircase figure: every achieved level against its write index, with
    /// centroid reference lines.
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.phase == "staircase")
            .map(|s| (s.index as f64, s.achieved_t))
            .collect();
        let mut plot = Plot::new(
            "Programmed level staircase",
            "write number",
            "programmed level",
        )
        .scatter("achieved", &pts);
        for &c in &self.centroids {
            plot = plot.hline(c, "");
        }
        plot.render()
    }

    /// Transition-error histogram.
    pub fn to_histogram_svg(&self) -> String {
        let bars: Vec<(f64, f64)> = self
            .transition_stats
            .histogram
            .iter()
            .map(|b| ((b.lo + b.hi) / 2.0, b.count as f64))
            .collect();
        Plot::new(
            "Level-placement error over transitions",
            "error (fraction of range)",
            "count",
        )
        .bars("errors", &bars)
        .render()
    }

    /// Levels-per-cell capacity implied by the gap/SD ratio, for reporting.
    pub fn full_range_fraction(&self) -> f64 {
        self.t_prog_max
    }
}
