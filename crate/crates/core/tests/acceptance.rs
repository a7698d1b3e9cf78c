//! Acceptance battery: ten numbered criteria, one test each, every test
//! printing a single `ACCEPTANCE <n> <name>: PASS (...)` line after its
//! assertions hold. Tolerances are written into the assertions.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use photonic_imc::calibrate::DeviceProfile;
use photonic_imc::cell::{CellCalibration, CellState};
use photonic_imc::experiments::{drift, grid, levels, solve as solve_exp, sweep};
use photonic_imc::matrix::{self};
use photonic_imc::mult::{multiply, MultiplyOptions, OperandMapping};
use photonic_imc::noise::{rng_from_seed, NoiseModel};
use photonic_imc::pulse::{
    make_erase_pulse, make_write_pulse, schedule_cycle, ScheduleRequest,
};
use photonic_imc::solver::{solve, LinearSystem, SolveMode, SolverConfig};

fn quiet_profile() -> DeviceProfile {
    let mut p = DeviceProfile::standard();
    p.noise = NoiseModel::quiet();
    p
}

#[test]
fn criterion_01_zero_noise_multiplication_is_exact() {
    let t0 = Instant::now();
    let cal = CellCalibration::standard();
    let mapping = OperandMapping::from_calibration(&cal);
    let quiet = NoiseModel::quiet();
    let mut rng = rng_from_seed(1);

    // Spot cases with hand-computable products.
    for (a, b) in [(1.0, 0.0), (1.0, 1.0), (1.0, 0.4)] {
        let mut cell = CellState::baseline();
        let rec = multiply(
            &mut cell,
            &cal,
            &mapping,
            a,
            b,
            &quiet,
            &mut rng,
            MultiplyOptions::default(),
        )
        .unwrap();
        assert!(
            (rec.c_measured - a * b).abs() <= 1e-12,
            "{a} x {b}: measured {} (error {:.3e})",
            rec.c_measured,
            rec.c_measured - a * b
        );
    }

    // Full 50 x 50 grid.
    let config = grid::GridConfig {
        noise_on: false,
        ..grid::GridConfig::new(quiet_profile())
    };
    let result = grid::run(&config).unwrap();
    assert_eq!(result.records.len(), 2500);
    let max_err = result
        .records
        .iter()
        .map(|r| r.error.abs())
        .fold(0.0f64, f64::max);
    assert!(
        max_err <= 1e-12,
        "largest zero-noise multiplication error {max_err:.3e} exceeds 1e-12"
    );
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}, limit 1 s");
    println!(
        "ACCEPTANCE 01 zero-noise-multiplication: PASS (max |error| {:.3e} over 2500 \
         products + 3 spot cases, {:.3} s)",
        max_err,
        dt.as_secs_f64()
    );
}

#[test]
fn criterion_02_transition_error_statistics() {
    let t0 = Instant::now();
    let config = levels::LevelsConfig::new(DeviceProfile::standard());
    let result = levels::run(&config).unwrap();
    let stats = &result.transition_stats;
    assert_eq!(stats.n, 600, "600 erase->write transitions expected");
    let sd_target = 0.0035;
    assert!(
        (stats.sd - sd_target).abs() <= 0.15 * sd_target,
        "transition error SD {:.5} outside 0.0035 +/- 15%",
        stats.sd
    );
    assert!(
        stats.skewness.abs() < 0.35,
        "skewness {:.3} too large for a normal error distribution",
        stats.skewness
    );
    assert!(
        stats.excess_kurtosis.abs() < 0.8,
        "excess kurtosis {:.3} too large for a normal error distribution",
        stats.excess_kurtosis
    );
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}, limit 5 s");
    println!(
        "ACCEPTANCE 02 transition-error-statistics: PASS (SD {:.5} of range, skew {:.3}, \
         excess kurtosis {:.3}, n = 600, {:.3} s)",
        stats.sd,
        stats.skewness,
        stats.excess_kurtosis,
        dt.as_secs_f64()
    );
}

#[test]
fn criterion_03_thirteen_levels_well_separated() {
    let config = levels::LevelsConfig::new(DeviceProfile::standard());
    let result = levels::run(&config).unwrap();
    assert_eq!(result.centroids.len(), 13);
    assert!(
        result.min_gap_over_sd >= 6.0,
        "adjacent-level separation {:.1} write-SDs is below 6",
        result.min_gap_over_sd
    );
    println!(
        "ACCEPTANCE 03 level-separation: PASS (13 levels, min adjacent gap = {:.1} \
         write-SDs)",
        result.min_gap_over_sd
    );
}

#[test]
fn criterion_04_single_shot_erase_energy() {
    let cal = CellCalibration::standard();
    let pulse = make_erase_pulse(&cal);
    let delivered = pulse.delivered_energy_pj();
    assert!(
        (delivered - 916.5).abs() <= 0.1,
        "delivered erase energy {delivered} pJ outside 916.5 +/- 0.1"
    );
    assert_eq!(pulse.total_width_ns(), 125.0, "erase duration must be 125 ns");

    // Absorbed energy with the cell fully crystalline (baseline).
    let mut cell = CellState::baseline();
    let absorbed = cell.erase_single_shot(&cal, &pulse).unwrap();
    assert!(
        (absorbed - 577.0).abs() <= 0.05 * 577.0,
        "absorbed erase energy {absorbed} pJ outside 577 +/- 5%"
    );
    assert!(cell.is_baseline());

    // A programmed cell transmits more, so it absorbs less.
    let quiet = NoiseModel::quiet();
    let mut rng = rng_from_seed(2);
    cell.write(&cal, 354.0, 25.0, &quiet, &mut rng).unwrap();
    let absorbed_high = cell.erase_single_shot(&cal, &pulse).unwrap();
    assert!(absorbed_high < absorbed);
    assert_eq!(cell.t_prog, 0.0, "single shot restores baseline exactly");
    println!(
        "ACCEPTANCE 04 single-shot-erase-energy: PASS (delivered {delivered:.1} pJ, \
         absorbed at baseline {absorbed:.1} pJ, duration 125 ns)"
    );
}

#[test]
fn criterion_05_write_erase_cycle_rate() {
    let cal = CellCalibration::standard();
    let write = make_write_pulse(&cal, 354.0).unwrap();
    let erase = make_erase_pulse(&cal);
    let schedule = schedule_cycle(
        &cal,
        &[ScheduleRequest::Write(write), ScheduleRequest::Erase(erase)],
    );
    assert!(
        schedule.period_ns <= 400,
        "write+erase period {} ns exceeds 400 ns",
        schedule.period_ns
    );
    assert!(
        schedule.rate_mhz >= 2.5,
        "cycle rate {:.3} MHz below 2.5 MHz",
        schedule.rate_mhz
    );
    // All timing is integer nanoseconds by construction; the CSV carries
    // integer columns for start and width.
    let csv = schedule.to_csv();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        fields[0].parse::<u64>().expect("integer start");
        fields[3].parse::<u64>().expect("integer width");
    }
    println!(
        "ACCEPTANCE 05 write-erase-cycle-rate: PASS (period {} ns, {:.3} MHz, \
         integer-ns schedule)",
        schedule.period_ns, schedule.rate_mhz
    );
}

#[test]
fn criterion_06_width_response_saturation() {
    let cal = CellCalibration::standard();
    let at_reference = cal.width_response(cal.width_reference_ns);
    assert!(
        (at_reference - 0.75).abs() <= 1e-6,
        "response at 25 ns is {at_reference}, want 0.75"
    );
    let at_saturation = cal.width_response(45.0);
    for w in [45.0, 60.0, 80.0, 100.0] {
        let ratio = cal.width_response(w) / at_saturation;
        assert!(
            (ratio - 1.0).abs() <= 0.01,
            "response({w})/response(45) = {ratio} strays more than 1% from 1"
        );
    }
    println!(
        "ACCEPTANCE 06 width-response-saturation: PASS (response(25 ns) = {:.6}, \
         response flat within 1% from 45 ns on)",
        at_reference
    );
}

#[test]
fn criterion_07_probe_drift_and_correction() {
    let config = drift::DriftConfig::new(DeviceProfile::standard());
    let result = drift::run(&config).unwrap();
    assert!(
        result.hold_max_change_frac == 0.0,
        "held probe drifted by {:.4}% over 1e4 s",
        100.0 * result.hold_max_change_frac
    );
    assert!(
        (result.shift_frac - 0.09).abs() <= 0.01,
        "off/on shift at holding power {:.4}, want 0.09 +/- 0.01",
        result.shift_frac
    );
    assert!(
        result.corrected_error_sds <= 4.0,
        "corrected level off target by {:.2} write-SDs",
        result.corrected_error_sds
    );
    assert!(
        result.safe_shift_frac.abs() < 0.005,
        "off/on shift at safe power {:.4}, want < 0.5%",
        result.safe_shift_frac
    );
    println!(
        "ACCEPTANCE 07 probe-drift-and-correction: PASS (hold drift 0, off/on shift \
         {:.1}%, corrected to {:.2} write-SDs, safe-power shift {:.4}%)",
        100.0 * result.shift_frac,
        result.corrected_error_sds,
        100.0 * result.safe_shift_frac
    );
}

#[test]
fn criterion_08_zero_noise_matvec_matches_dense_oracle() {
    let t0 = Instant::now();
    let cal = CellCalibration::standard();
    let mapping = OperandMapping::from_calibration(&cal);
    let quiet = NoiseModel::quiet();
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let mut rng = rng_from_seed(9000 + k);
        use rand::Rng;
        let rows = rng.gen_range(1..=16);
        let cols = rng.gen_range(1..=16);
        let a = matrix::random_matrix(rows, cols, &mut rng);
        let x = matrix::random_vector(cols, &mut rng);
        let mut enc =
            photonic_imc::array::encode_matrix(&a, &cal, &mapping, &quiet, &mut rng).unwrap();
        let y = enc.matvec(&x, &quiet, &mut rng).unwrap();
        let want = a.matvec(&x);
        for (yi, wi) in y.iter().zip(&want) {
            worst = worst.max((yi - wi).abs());
        }
    }
    assert!(
        worst <= 1e-10,
        "largest zero-noise matvec deviation {worst:.3e} exceeds 1e-10"
    );
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}, limit 5 s");
    println!(
        "ACCEPTANCE 08 zero-noise-matvec: PASS (worst deviation {:.3e} over 100 signed \
         systems up to 16 x 16, {:.3} s)",
        worst,
        dt.as_secs_f64()
    );
}

#[test]
fn criterion_09_mixed_precision_beats_the_analog_floor() {
    let t0 = Instant::now();
    let cal = CellCalibration::standard();
    let mapping = OperandMapping::from_calibration(&cal);
    let noise = NoiseModel {
        write_sd: 0.0035,
        ..NoiseModel::quiet()
    };
    let mut floors = Vec::new();
    let mut outer_counts = Vec::new();
    for seed in 100..120u64 {
        let mut rng = rng_from_seed(seed);
        let a = matrix::random_spd(8, &mut rng);
        let b = matrix::random_vector(8, &mut rng);
        let system = LinearSystem::new(a, b).unwrap();

        let analog = solve(
            &system,
            &SolverConfig {
                mode: SolveMode::Analog,
                ..SolverConfig::default()
            },
            &cal,
            &mapping,
            &noise,
            seed,
        )
        .unwrap();
        let floor = analog
            .residual_history
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(
            !analog.converged && floor > 1e-3,
            "seed {seed}: analog run should stall above 1e-3, floor was {floor:.3e}"
        );
        floors.push(floor);

        let mixed = solve(
            &system,
            &SolverConfig {
                mode: SolveMode::Mixed,
                ..SolverConfig::default()
            },
            &cal,
            &mapping,
            &noise,
            seed,
        )
        .unwrap();
        assert!(
            mixed.converged && mixed.iterations <= 50,
            "seed {seed}: mixed run did not reach 1e-9 within 50 outer steps \
             (history {:?})",
            mixed.residual_history
        );
        let final_res = *mixed.residual_history.last().unwrap();
        assert!(final_res < 1e-9, "seed {seed}: final residual {final_res:.3e}");
        outer_counts.push(mixed.iterations);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}, limit 30 s");
    let worst_floor = floors.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_outers = outer_counts.iter().max().unwrap();
    println!(
        "ACCEPTANCE 09 mixed-precision-convergence: PASS (20 SPD systems: analog floors \
         >= {:.2e}, mixed converged < 1e-9 within {} outer steps, {:.2} s)",
        worst_floor,
        max_outers,
        dt.as_secs_f64()
    );
}

#[test]
fn criterion_10_seeded_runs_are_byte_identical() {
    let profile = DeviceProfile::standard;

    let grid_csv = |seed: u64| {
        let config = grid::GridConfig {
            seed,
            n_a: 12,
            n_b: 12,
            ..grid::GridConfig::new(profile())
        };
        grid::run(&config).unwrap().to_csv()
    };
    assert_eq!(grid_csv(7), grid_csv(7), "grid CSV differs between identical runs");
    assert_ne!(grid_csv(7), grid_csv(8), "grid CSV ignores the seed");

    let levels_csv = |seed: u64| {
        let config = levels::LevelsConfig {
            seed,
            ..levels::LevelsConfig::new(profile())
        };
        levels::run(&config).unwrap().to_csv()
    };
    assert_eq!(levels_csv(7), levels_csv(7));
    assert_ne!(levels_csv(7), levels_csv(8));

    let sweep_csv = |seed: u64| {
        let config = sweep::WidthSweepConfig {
            seed,
            ..sweep::WidthSweepConfig::new(profile())
        };
        sweep::run(&config).unwrap().to_csv()
    };
    assert_eq!(sweep_csv(7), sweep_csv(7));

    let drift_csv = |seed: u64| {
        let config = drift::DriftConfig {
            seed,
            ..drift::DriftConfig::new(profile())
        };
        drift::run(&config).unwrap().to_csv()
    };
    assert_eq!(drift_csv(7), drift_csv(7));

    let solve_csv = |seed: u64| {
        let config = solve_exp::SolveExperimentConfig {
            seed,
            ..solve_exp::SolveExperimentConfig::new(profile())
        };
        solve_exp::run(&config).unwrap().to_csv()
    };
    assert_eq!(solve_csv(7), solve_csv(7));
    assert_ne!(solve_csv(7), solve_csv(8));

    println!(
        "ACCEPTANCE 10 seeded-determinism: PASS (same seed -> byte-identical CSV across \
         all five experiments; different seed -> different noisy output)"
    );
}
