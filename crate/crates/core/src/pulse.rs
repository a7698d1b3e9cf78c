//! Pulse construction, timing, and energy accounting.
//!
//! Powers are mW and widths ns, so `power * width` is directly the pulse
//! energy in pJ. Scheduling is done in whole nanoseconds so timing claims
//! are exact integer arithmetic.

use crate::cell::CellCalibration;
use crate::error::{Error, Result};

/// A rectangular optical pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub power_mw: f64,
    pub width_ns: f64,
}

impl PulseSpec {
    /// Builds a pulse, rejecting non-physical shapes.
    pub fn new(power_mw: f64, width_ns: f64) -> Result<Self> {
        if !power_mw.is_finite() || power_mw < 0.0 {
            return Err(Error::InvalidPulse(format!(
                "power {power_mw} mW must be finite and non-negative"
            )));
        }
        if !width_ns.is_finite() || width_ns <= 0.0 {
            return Err(Error::InvalidPulse(format!(
                "width {width_ns} ns must be finite and positive"
            )));
        }
        Ok(PulseSpec { power_mw, width_ns })
    }

    /// Pulse energy in pJ (mW × ns).
    pub fn energy_pj(&self) -> f64 {
        self.power_mw * self.width_ns
    }
}

/// The two-step erase shape: a melt step at peak power immediately followed
/// by a longer, lower step that anneals the cell back to crystalline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleStepPulse {
    pub step1: PulseSpec,
    pub step2: PulseSpec,
}

impl DoubleStepPulse {
    /// Builds a double-step pulse; the second step must be longer and weaker
    /// than the first.
    pub fn new(step1: PulseSpec, step2: PulseSpec) -> Result<Self> {
        if step2.power_mw >= step1.power_mw {
            return Err(Error::InvalidPulse(format!(
                "step 2 power {} mW must be below step 1 power {} mW",
                step2.power_mw, step1.power_mw
            )));
        }
        if step2.width_ns <= step1.width_ns {
            return Err(Error::InvalidPulse(format!(
                "step 2 width {} ns must exceed step 1 width {} ns",
                step2.width_ns, step1.width_ns
            )));
        }
        Ok(DoubleStepPulse { step1, step2 })
    }

    /// Total duration, ns.
    pub fn total_width_ns(&self) -> f64 {
        self.step1.width_ns + self.step2.width_ns
    }

    /// Total delivered energy, pJ.
    pub fn delivered_energy_pj(&self) -> f64 {
        self.step1.energy_pj() + self.step2.energy_pj()
    }
}

/// A train of single pulses with strictly decreasing power, used to step a
/// level downwards without a full erase.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pulses: Vec<PulseSpec>,
}

impl PulseTrain {
    /// Builds a train, enforcing strictly decreasing powers.
    pub fn new(pulses: Vec<PulseSpec>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidPulse("empty pulse train".into()));
        }
        for pair in pulses.windows(2) {
            if pair[1].power_mw >= pair[0].power_mw {
                return Err(Error::InvalidPulse(format!(
                    "train powers must strictly decrease, got {} mW after {} mW",
                    pair[1].power_mw, pair[0].power_mw
                )));
            }
        }
        Ok(PulseTrain { pulses })
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Total delivered energy, pJ.
    pub fn delivered_energy_pj(&self) -> f64 {
        self.pulses.iter().map(PulseSpec::energy_pj).sum()
    }
}

/// Write pulse carrying `energy_pj` at the calibration's reference width.
pub fn make_write_pulse(cal: &CellCalibration, energy_pj: f64) -> Result<PulseSpec> {
    if !(energy_pj > 0.0) {
        return Err(Error::InvalidPulse(format!(
            "write energy {energy_pj} pJ must be positive"
        )));
    }
    PulseSpec::new(energy_pj / cal.width_reference_ns, cal.width_reference_ns)
}

/// Read pulse carrying `energy_pj` at the calibration's reference width.
/// Zero-energy reads are allowed (they measure nothing, harmlessly).
pub fn make_read_pulse(cal: &CellCalibration, energy_pj: f64) -> Result<PulseSpec> {
    if !(energy_pj >= 0.0) {
        return Err(Error::InvalidPulse(format!(
            "read energy {energy_pj} pJ must be non-negative"
        )));
    }
    PulseSpec::new(energy_pj / cal.width_reference_ns, cal.width_reference_ns)
}

/// The calibrated erase shape for this cell.
pub fn make_erase_pulse(cal: &CellCalibration) -> DoubleStepPulse {
    let step1 = PulseSpec {
        power_mw: cal.erase_peak_power_mw,
        width_ns: cal.erase_step1_width_ns,
    };
    let step2 = PulseSpec {
        power_mw: cal.erase_peak_power_mw * cal.erase_step_fraction,
        width_ns: cal.erase_step2_width_ns,
    };
    DoubleStepPulse { step1, step2 }
}

/// A train of `steps` pulses ramping linearly from the erase peak power down
/// to the annealing step power, each at the melt-step width.
pub fn make_erase_train(cal: &CellCalibration, steps: usize) -> Result<PulseTrain> {
    if steps == 0 {
        return Err(Error::InvalidPulse("erase train needs at least one pulse".into()));
    }
    let top = cal.erase_peak_power_mw;
    let bottom = cal.erase_peak_power_mw * cal.erase_step_fraction;
    let pulses = (0..steps)
        .map(|i| {
            let frac = if steps == 1 {
                0.0
            } else {
                i as f64 / (steps - 1) as f64
            };
            PulseSpec {
                power_mw: top - (top - bottom) * frac,
                width_ns: cal.erase_step1_width_ns,
            }
        })
        .collect();
    PulseTrain::new(pulses)
}

/// What a scheduled pulse does to the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Write,
    Erase,
    Read,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Write => "write",
            EventKind::Erase => "erase",
            EventKind::Read => "read",
        }
    }

    /// Writes and erases change the stored level and need a settle window
    /// before the next pulse; reads do not.
    pub fn changes_state(&self) -> bool {
        matches!(self, EventKind::Write | EventKind::Erase)
    }
}

/// A request handed to the scheduler.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleRequest {
    Write(PulseSpec),
    Erase(DoubleStepPulse),
    EraseTrain(PulseTrain),
    Read(PulseSpec),
}

/// One placed pulse. Erase double-steps and trains expand to one event per
/// constituent pulse so `power_mw * width_ns = energy_pj` holds on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEvent {
    pub start_ns: u64,
    pub kind: EventKind,
    pub power_mw: f64,
    pub width_ns: u64,
    pub energy_pj: f64,
}

impl ScheduleEvent {
    pub fn end_ns(&self) -> u64 {
        self.start_ns + self.width_ns
    }
}

/// An earliest-feasible placement of a pulse sequence on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub events: Vec<ScheduleEvent>,
    /// First pulse start to last pulse end, ns. The settle window is
    /// enforced *between* events; no trailing settle is appended after the
    /// final pulse.
    pub period_ns: u64,
    /// Equivalent repetition rate, MHz.
    pub rate_mhz: f64,
}

impl Schedule {
    /// Serializes to CSV with the canonical header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start_ns,kind,power_mW,width_ns,energy_pJ\n");
        for ev in &self.events {
            out.push_str(&format!(
                "{},{},{:.9},{},{:.9}\n",
                ev.start_ns,
                ev.kind.name(),
                ev.power_mw,
                ev.width_ns,
                ev.energy_pj
            ));
        }
        out
    }
}

/// Pulse widths are carried as f64 ns; scheduling rounds them up to whole
/// nanoseconds so no event is shorter on the timeline than in the physics.
fn width_to_ns(width: f64) -> u64 {
    width.ceil() as u64
}

/// Places the requested pulses as early as possible: each event starts when
/// the previous one ends, plus the settle time whenever the previous event
/// changed the cell state. The two steps of an erase are back-to-back (they
/// are one physical pulse); every pulse of an erase train settles
/// individually, since each one re-melts the cell.
pub fn schedule_cycle(cal: &CellCalibration, requests: &[ScheduleRequest]) -> Schedule {
    let settle = width_to_ns(cal.settle_time_ns);
    let mut events: Vec<ScheduleEvent> = Vec::new();
    let mut cursor: u64 = 0;
    let mut pending_settle: u64 = 0;

    let place = |cursor: &mut u64,
                     pending: &mut u64,
                     events: &mut Vec<ScheduleEvent>,
                     kind: EventKind,
                     pulse: PulseSpec,
                     settle_after: u64| {
        let start = *cursor + *pending;
        let width = width_to_ns(pulse.width_ns);
        events.push(ScheduleEvent {
            start_ns: start,
            kind,
            power_mw: pulse.power_mw,
            width_ns: width,
            energy_pj: pulse.energy_pj(),
        });
        *cursor = start + width;
        *pending = settle_after;
    };

    for req in requests {
        match req {
            ScheduleRequest::Write(p) => {
                place(&mut cursor, &mut pending_settle, &mut events, EventKind::Write, *p, settle);
            }
            ScheduleRequest::Read(p) => {
                place(&mut cursor, &mut pending_settle, &mut events, EventKind::Read, *p, 0);
            }
            ScheduleRequest::Erase(d) => {
                // Step 2 follows step 1 with no gap; settle applies after the pair.
                place(&mut cursor, &mut pending_settle, &mut events, EventKind::Erase, d.step1, 0);
                place(&mut cursor, &mut pending_settle, &mut events, EventKind::Erase, d.step2, settle);
            }
            ScheduleRequest::EraseTrain(t) => {
                for p in t.pulses() {
                    place(&mut cursor, &mut pending_settle, &mut events, EventKind::Erase, *p, settle);
                }
            }
        }
    }

    let period_ns = events.last().map(ScheduleEvent::end_ns).unwrap_or(0);
    let rate_mhz = if period_ns == 0 {
        0.0
    } else {
        1000.0 / period_ns as f64
    };
    Schedule {
        events,
        period_ns,
        rate_mhz,
    }
}

/// One accounted pulse in an [`EnergyLedger`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub kind: EventKind,
    pub delivered_pj: f64,
    pub absorbed_pj: f64,
}

/// Running record of optical energy delivered to and absorbed in a device.
/// Totals are maintained incrementally and always equal the sum over entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    entries: Vec<LedgerEntry>,
    total_delivered_pj: f64,
    total_absorbed_pj: f64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: LedgerEntry) {
        self.total_delivered_pj += entry.delivered_pj;
        self.total_absorbed_pj += entry.absorbed_pj;
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_delivered_pj(&self) -> f64 {
        self.total_delivered_pj
    }

    pub fn total_absorbed_pj(&self) -> f64 {
        self.total_absorbed_pj
    }

    /// Delivered energy summed over entries of one kind.
    pub fn delivered_pj_for(&self, kind: EventKind) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.delivered_pj)
            .sum()
    }

    pub fn count_for(&self, kind: EventKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (tol {tol})"
        );
    }

    // Frozen arithmetic for the standard calibration:
    //   write pulse power:      354 / 25 = 14.16 mW,  180 / 25 = 7.2 mW
    //   erase delivered energy: 14.1*25 + 5.64*100 = 352.5 + 564 = 916.5 pJ
    //   erase duration:         25 + 100 = 125 ns

    #[test]
    fn write_pulse_carries_the_requested_energy() {
        let cal = CellCalibration::standard();
        let p = make_write_pulse(&cal, 354.0).unwrap();
        assert_close(p.power_mw, 14.16, 1e-12);
        assert_eq!(p.width_ns, 25.0);
        assert_close(p.energy_pj(), 354.0, 1e-12);
        let p = make_write_pulse(&cal, 180.0).unwrap();
        assert_close(p.power_mw, 7.2, 1e-12);
        assert!(make_write_pulse(&cal, 0.0).is_err());
    }

    #[test]
    fn erase_pulse_matches_the_calibrated_shape() {
        let cal = CellCalibration::standard();
        let e = make_erase_pulse(&cal);
        assert_close(e.step1.power_mw, 14.1, 0.0);
        assert_close(e.step2.power_mw, 5.64, 1e-12);
        assert_close(e.delivered_energy_pj(), 916.5, 1e-9);
        assert_eq!(e.total_width_ns(), 125.0);
    }

    #[test]
    fn double_step_requires_weaker_longer_tail() {
        let a = PulseSpec::new(10.0, 25.0).unwrap();
        let b = PulseSpec::new(4.0, 100.0).unwrap();
        assert!(DoubleStepPulse::new(a, b).is_ok());
        assert!(DoubleStepPulse::new(b, a).is_err());
    }

    #[test]
    fn pulse_train_powers_strictly_decrease() {
        let cal = CellCalibration::standard();
        let train = make_erase_train(&cal, 5).unwrap();
        assert_eq!(train.len(), 5);
        assert_close(train.pulses()[0].power_mw, 14.1, 0.0);
        assert_close(train.pulses()[4].power_mw, 5.64, 1e-12);
        for pair in train.pulses().windows(2) {
            assert!(pair[1].power_mw < pair[0].power_mw);
        }
        let flat = vec![
            PulseSpec::new(5.0, 25.0).unwrap(),
            PulseSpec::new(5.0, 25.0).unwrap(),
        ];
        assert!(PulseTrain::new(flat).is_err());
    }

    #[test]
    fn consecutive_writes_are_separated_by_width_plus_settle() {
        let cal = CellCalibration::standard();
        let w = make_write_pulse(&cal, 300.0).unwrap();
        let s = schedule_cycle(
            &cal,
            &[ScheduleRequest::Write(w), ScheduleRequest::Write(w)],
        );
        assert_eq!(s.events[0].start_ns, 0);
        // 25 ns pulse + 200 ns settle.
        assert_eq!(s.events[1].start_ns, 225);
        assert_eq!(s.period_ns, 250);
    }

    #[test]
    fn write_plus_erase_cycle_meets_the_rate_target() {
        let cal = CellCalibration::standard();
        let w = make_write_pulse(&cal, 354.0).unwrap();
        let e = make_erase_pulse(&cal);
        let s = schedule_cycle(&cal, &[ScheduleRequest::Write(w), ScheduleRequest::Erase(e)]);
        // write 0..25, settle to 225, erase steps 225..250..350.
        assert_eq!(s.events.len(), 3);
        assert_eq!(s.events[1].start_ns, 225);
        assert_eq!(s.events[2].start_ns, 250);
        assert_eq!(s.period_ns, 350);
        assert!(s.period_ns <= 400);
        assert!(s.rate_mhz >= 2.5);
    }

    #[test]
    fn reads_need_no_settle() {
        let cal = CellCalibration::standard();
        let r = make_read_pulse(&cal, 100.0).unwrap();
        let s = schedule_cycle(&cal, &[ScheduleRequest::Read(r)]);
        assert_eq!(s.period_ns, 25);
        let s2 = schedule_cycle(&cal, &[ScheduleRequest::Read(r), ScheduleRequest::Read(r)]);
        assert_eq!(s2.events[1].start_ns, 25, "reads pack back-to-back");
        // But a read after a write waits out the settle window.
        let w = make_write_pulse(&cal, 300.0).unwrap();
        let s3 = schedule_cycle(&cal, &[ScheduleRequest::Write(w), ScheduleRequest::Read(r)]);
        assert_eq!(s3.events[1].start_ns, 225);
    }

    #[test]
    fn schedule_rows_keep_power_width_energy_consistent() {
        let cal = CellCalibration::standard();
        let w = make_write_pulse(&cal, 354.0).unwrap();
        let e = make_erase_pulse(&cal);
        let r = make_read_pulse(&cal, 112.8).unwrap();
        let s = schedule_cycle(
            &cal,
            &[
                ScheduleRequest::Write(w),
                ScheduleRequest::Read(r),
                ScheduleRequest::Erase(e),
            ],
        );
        for ev in &s.events {
            assert_close(ev.power_mw * ev.width_ns as f64, ev.energy_pj, 1e-9);
        }
        // Events never overlap and starts are monotone.
        for pair in s.events.windows(2) {
            assert!(pair[1].start_ns >= pair[0].end_ns());
        }
        let csv = s.to_csv();
        assert!(csv.starts_with("start_ns,kind,power_mW,width_ns,energy_pJ\n"));
        assert_eq!(csv.lines().count(), 1 + s.events.len());
    }

    #[test]
    fn ledger_totals_equal_the_sum_of_entries() {
        let mut ledger = EnergyLedger::new();
        let entries = [
            LedgerEntry { kind: EventKind::Write, delivered_pj: 354.0, absorbed_pj: 223.0 },
            LedgerEntry { kind: EventKind::Read, delivered_pj: 112.8, absorbed_pj: 54.9 },
            LedgerEntry { kind: EventKind::Erase, delivered_pj: 916.5, absorbed_pj: 577.4 },
        ];
        for e in entries {
            ledger.push(e);
        }
        let sum_d: f64 = ledger.entries().iter().map(|e| e.delivered_pj).sum();
        let sum_a: f64 = ledger.entries().iter().map(|e| e.absorbed_pj).sum();
        assert_eq!(ledger.total_delivered_pj(), sum_d);
        assert_eq!(ledger.total_absorbed_pj(), sum_a);
        assert_eq!(ledger.count_for(EventKind::Read), 1);
        assert_close(ledger.delivered_pj_for(EventKind::Read), 112.8, 0.0);
    }
}
