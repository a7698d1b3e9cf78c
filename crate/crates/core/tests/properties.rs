//! Property tests: structural invariants that must hold for every input,
//! not just the calibrated operating points.

use proptest::prelude::*;

use photonic_imc::array::encode_matrix;
use photonic_imc::calibrate::DeviceProfile;
use photonic_imc::cell::{CellCalibration, CellState};
use photonic_imc::matrix::DenseMatrix;
use photonic_imc::mult::{multiply, MultiplyOptions, OperandMapping};
use photonic_imc::noise::{child_seed, rng_from_seed, NoiseModel};
use photonic_imc::pulse::{
    make_erase_pulse, make_read_pulse, make_write_pulse, schedule_cycle, EventKind,
    ScheduleRequest,
};

fn cal() -> CellCalibration {
    CellCalibration::standard()
}

/// A deliberately loud noise model so the clamping paths actually trigger.
fn loud() -> NoiseModel {
    NoiseModel {
        write_sd: 0.15,
        detector_sd_pj: 0.0,
        pump_sd: 0.05,
    }
}

proptest! {
    /// No write sequence, however noisy, pushes the stored level outside
    /// its physical range, and the transmittance stays inside the window
    /// the level span allows.
    #[test]
    fn level_stays_clamped(
        writes in prop::collection::vec((180.0f64..600.0, 1.0f64..100.0), 1..12),
        seed in any::<u64>(),
    ) {
        let cal = cal();
        let noise = loud();
        let mut rng = rng_from_seed(seed);
        let mut cell = CellState::baseline();
        for (energy, width) in writes {
            cell.erase_single_shot(&cal, &make_erase_pulse(&cal)).unwrap();
            cell.write(&cal, energy, width, &noise, &mut rng).unwrap();
            prop_assert!(cell.t_prog >= 0.0 && cell.t_prog <= cal.t_prog_max);
            let t = cell.transmittance(&cal);
            prop_assert!(t >= cal.t_baseline - 1e-15);
            prop_assert!(t <= cal.t_baseline + cal.t_prog_max + 1e-15);
        }
    }

    /// Reading never changes the cell, and noiseless reads of the same cell
    /// at the same energy return the same value.
    #[test]
    fn reads_are_pure(
        energy in 180.0f64..500.0,
        read_energy in 0.0f64..179.0,
        seed in any::<u64>(),
    ) {
        let cal = cal();
        let quiet = NoiseModel::quiet();
        let mut rng = rng_from_seed(seed);
        let mut cell = CellState::baseline();
        cell.write(&cal, energy, cal.width_reference_ns, &quiet, &mut rng).unwrap();
        let before = cell.clone();
        let first = cell.read(&cal, read_energy, &quiet, &mut rng).unwrap();
        let second = cell.read(&cal, read_energy, &quiet, &mut rng).unwrap();
        prop_assert_eq!(&cell, &before);
        prop_assert_eq!(first, second);
        prop_assert!((first - cell.transmittance(&cal) * read_energy).abs() <= 1e-12);
    }

    /// The demanded level is monotone in write energy and in pulse width.
    #[test]
    fn demanded_level_is_monotone(
        e1 in 0.0f64..700.0,
        e2 in 0.0f64..700.0,
        w1 in 0.5f64..120.0,
        w2 in 0.5f64..120.0,
    ) {
        let cal = cal();
        let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (wlo, whi) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        prop_assert!(cal.target_level(elo, wlo) <= cal.target_level(ehi, wlo) + 1e-15);
        prop_assert!(cal.target_level(elo, wlo) <= cal.target_level(elo, whi) + 1e-15);
        // The demand itself is unclamped: widths past the reference ask for
        // more than the full level, up to the saturation-width gain. The
        // write clamps; the demand only has to respect that ceiling.
        let gain_max = cal.width_response(cal.width_saturation_ns)
            / cal.width_response(cal.width_reference_ns);
        let full = cal.target_level(ehi, whi);
        prop_assert!((0.0..=cal.t_prog_max * gain_max + 1e-15).contains(&full));
    }

    /// Scheduled pulses never overlap, appear in request order, and the
    /// period spans first start to last end. Reads chain with no settle gap;
    /// writes and erases settle before the next pulse.
    #[test]
    fn schedules_never_overlap(ops in prop::collection::vec(0u8..3, 1..10)) {
        let cal = cal();
        let mut requests = Vec::new();
        let mut expected_events = 0usize;
        for op in &ops {
            match op {
                0 => {
                    requests.push(ScheduleRequest::Write(
                        make_write_pulse(&cal, 300.0).unwrap(),
                    ));
                    expected_events += 1;
                }
                1 => {
                    requests.push(ScheduleRequest::Erase(make_erase_pulse(&cal)));
                    expected_events += 2;
                }
                _ => {
                    requests.push(ScheduleRequest::Read(
                        make_read_pulse(&cal, 100.0).unwrap(),
                    ));
                    expected_events += 1;
                }
            }
        }
        let schedule = schedule_cycle(&cal, &requests);
        prop_assert_eq!(schedule.events.len(), expected_events);

        let settle = cal.settle_time_ns as u64;
        let mut prev_end = None;
        let mut prev_kind: Option<EventKind> = None;
        let mut inside_erase_pair = false;
        for ev in &schedule.events {
            if let (Some(end), Some(kind)) = (prev_end, prev_kind) {
                prop_assert!(ev.start_ns >= end, "events overlap");
                let gap = ev.start_ns - end;
                if inside_erase_pair {
                    prop_assert_eq!(gap, 0, "erase steps must be back-to-back");
                } else if kind.changes_state() {
                    prop_assert_eq!(gap, settle, "missing settle window");
                } else {
                    prop_assert_eq!(gap, 0, "reads need no settle");
                }
            }
            // The second half of an erase pair is the next event after a
            // fresh erase event that was not itself a second half.
            inside_erase_pair = ev.kind == EventKind::Erase && !inside_erase_pair;
            prev_end = Some(ev.end_ns());
            prev_kind = Some(ev.kind);
        }

        let first = schedule.events.first().unwrap().start_ns;
        let last = schedule.events.last().unwrap().end_ns();
        prop_assert_eq!(schedule.period_ns, last - first);
        prop_assert!((schedule.rate_mhz - 1000.0 / schedule.period_ns as f64).abs() <= 1e-12);

        let delivered: f64 = schedule.events.iter().map(|e| e.energy_pj).sum();
        let requested: f64 = requests
            .iter()
            .map(|r| match r {
                ScheduleRequest::Write(p) | ScheduleRequest::Read(p) => p.energy_pj(),
                ScheduleRequest::Erase(p) => p.delivered_energy_pj(),
                ScheduleRequest::EraseTrain(t) => t.delivered_energy_pj(),
            })
            .sum();
        prop_assert!((delivered - requested).abs() <= 1e-9 * requested.max(1.0));
    }

    /// Serializing a profile and parsing it back reproduces every field
    /// exactly, for arbitrary finite parameter values.
    #[test]
    fn profile_text_round_trips(
        e_threshold in 1.0f64..1e4,
        tau in 1e-3f64..1e4,
        write_sd in 0.0f64..0.5,
        detector_sd in 0.0f64..10.0,
        relax in 0.0f64..0.5,
        length in 1e-3f64..100.0,
    ) {
        let mut profile = DeviceProfile::standard();
        profile.cell.e_threshold_pj = e_threshold;
        profile.cell.width_tau_ns = tau;
        profile.noise.write_sd = write_sd;
        profile.noise.detector_sd_pj = detector_sd;
        profile.drift.relaxation_magnitude = relax;
        profile.geometry.length_gst_um = length;
        let text = profile.to_profile_string();
        let back = DeviceProfile::parse(&text).unwrap();
        prop_assert_eq!(&back, &profile);
        // And the round trip is a fixed point of serialization.
        prop_assert_eq!(back.to_profile_string(), text);
    }

    /// Offset-corrected multiplication is exact without noise for every
    /// operand pair, with both the predicted and the measured offset.
    #[test]
    fn noiseless_multiplication_is_exact_everywhere(
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
        measured_offset in any::<bool>(),
    ) {
        let cal = cal();
        let mapping = OperandMapping::from_calibration(&cal);
        let quiet = NoiseModel::quiet();
        let mut rng = rng_from_seed(0);
        let mut cell = CellState::baseline();
        let options = MultiplyOptions {
            measured_offset,
            ..MultiplyOptions::default()
        };
        let rec = multiply(&mut cell, &cal, &mapping, a, b, &quiet, &mut rng, options)
            .unwrap();
        prop_assert!((rec.c_measured - a * b).abs() <= 1e-12);
    }

    /// A quiet cell-array product agrees with the dense product for any
    /// matrix, including all-zero and single-entry ones.
    #[test]
    fn quiet_matvec_matches_dense(
        rows in 1usize..5,
        cols in 1usize..5,
        entries in prop::collection::vec(-3.0f64..3.0, 16),
        x_entries in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let cal = cal();
        let mapping = OperandMapping::from_calibration(&cal);
        let quiet = NoiseModel::quiet();
        let mut rng = rng_from_seed(5);
        let data: Vec<Vec<f64>> = (0..rows)
            .map(|i| (0..cols).map(|j| entries[i * 4 + j]).collect())
            .collect();
        let a = DenseMatrix::from_rows(&data).unwrap();
        let x: Vec<f64> = x_entries[..cols].to_vec();
        let mut enc = encode_matrix(&a, &cal, &mapping, &quiet, &mut rng).unwrap();
        let y = enc.matvec(&x, &quiet, &mut rng).unwrap();
        let want = a.matvec(&x);
        for (yi, wi) in y.iter().zip(&want) {
            prop_assert!((yi - wi).abs() <= 1e-10, "got {yi}, want {wi}");
        }
    }

    /// Encoding a matrix into cells and decoding it back is the identity.
    #[test]
    fn encode_decode_round_trips(
        rows in 1usize..5,
        cols in 1usize..5,
        entries in prop::collection::vec(-5.0f64..5.0, 16),
    ) {
        let cal = cal();
        let mapping = OperandMapping::from_calibration(&cal);
        let quiet = NoiseModel::quiet();
        let mut rng = rng_from_seed(6);
        let data: Vec<Vec<f64>> = (0..rows)
            .map(|i| (0..cols).map(|j| entries[i * 4 + j]).collect())
            .collect();
        let a = DenseMatrix::from_rows(&data).unwrap();
        let mut enc = encode_matrix(&a, &cal, &mapping, &quiet, &mut rng).unwrap();
        let decoded = enc.decode(&quiet, &mut rng).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                prop_assert!((decoded.get(i, j) - a.get(i, j)).abs() <= 1e-12);
            }
        }
    }

    /// Erasing restores the exact baseline after any legal write.
    #[test]
    fn erase_always_restores_baseline(
        energy in 180.0f64..600.0,
        width in 1.0f64..100.0,
        seed in any::<u64>(),
    ) {
        let cal = cal();
        let noise = loud();
        let mut rng = rng_from_seed(seed);
        let mut cell = CellState::baseline();
        cell.write(&cal, energy, width, &noise, &mut rng).unwrap();
        cell.erase_single_shot(&cal, &make_erase_pulse(&cal)).unwrap();
        prop_assert!(cell.is_baseline());
        prop_assert_eq!(cell.transmittance(&cal), cal.t_baseline);
    }

    /// Stream splitting is deterministic and collision-free across indices
    /// of the same parent seed.
    #[test]
    fn child_seeds_are_distinct(parent in any::<u64>(), i in 0u64..4096, j in 0u64..4096) {
        prop_assert_eq!(child_seed(parent, i), child_seed(parent, i));
        if i != j {
            prop_assert_ne!(child_seed(parent, i), child_seed(parent, j));
        }
    }
}
