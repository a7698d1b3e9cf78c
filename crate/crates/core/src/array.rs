//! Cell arrays and signed matrix–vector products.
//!
//! A matrix lives in the cells (non-volatile: programmed once, read many
//! times); the vector travels as read-pulse energies. Cells only store
//! values in [0, 1], so a signed matrix splits into a positive and a
//! negative array scaled by its largest magnitude, and a signed vector
//! splits into positive and negative pulse passes. Four passes combine into
//! the signed product. Per-cell outputs are summed ideally after decoding.

use crate::cell::{CellCalibration, CellState};
use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix};
use crate::mult::OperandMapping;
use crate::noise::{DeviceRng, NoiseModel};
use crate::pulse::{make_erase_pulse, EnergyLedger, EventKind, LedgerEntry};

/// A rows × cols grid of cells sharing one calibration and operand mapping.
#[derive(Debug, Clone)]
pub struct CellArray {
    rows: usize,
    cols: usize,
    cal: CellCalibration,
    mapping: OperandMapping,
    cells: Vec<CellState>,
}

impl CellArray {
    /// A fresh array with every cell at baseline.
    pub fn new(rows: usize, cols: usize, cal: CellCalibration, mapping: OperandMapping) -> Self {
        CellArray {
            rows,
            cols,
            cal,
            mapping,
            cells: vec![CellState::baseline(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cal(&self) -> &CellCalibration {
        &self.cal
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellState {
        &self.cells[i * self.cols + j]
    }

    fn cell_mut(&mut self, i: usize, j: usize) -> &mut CellState {
        &mut self.cells[i * self.cols + j]
    }

    /// Erases (if needed) and writes one cell to fraction `a` of full scale,
    /// charging the pulses to the ledger.
    fn program_cell(
        &mut self,
        i: usize,
        j: usize,
        a: f64,
        noise: &NoiseModel,
        rng: &mut DeviceRng,
        ledger: &mut EnergyLedger,
    ) -> Result<()> {
        let erase = make_erase_pulse(&self.cal);
        let cal = self.cal.clone();
        let e_write = self.mapping.encode_multiplicand(a)?;
        let cell = self.cell_mut(i, j);
        if !cell.is_baseline() {
            let absorbed = cell.erase_single_shot(&cal, &erase)?;
            ledger.push(LedgerEntry {
                kind: EventKind::Erase,
                delivered_pj: erase.delivered_energy_pj(),
                absorbed_pj: absorbed,
            });
        }
        let transmitted = cell.write(&cal, e_write, cal.width_reference_ns, noise, rng)?;
        ledger.push(LedgerEntry {
            kind: EventKind::Write,
            delivered_pj: e_write,
            absorbed_pj: e_write - transmitted,
        });
        Ok(())
    }

    /// Reads every cell of one row with per-column pulse energies and
    /// returns the decoded products, summed ideally:
    /// `sum_j decode(read(cell[i][j], e_in[j]))`.
    fn read_row_sum(
        &self,
        i: usize,
        b_energies: &[f64],
        offsets: &[f64],
        noise: &NoiseModel,
        rng: &mut DeviceRng,
        ledger: &mut EnergyLedger,
    ) -> Result<f64> {
        let full_scale = self.cal.t_prog_max * self.mapping.e_in_max_pj;
        let mut sum = 0.0;
        for j in 0..self.cols {
            let e_in = b_energies[j];
            let cell = self.cell(i, j);
            let raw = cell.read(&self.cal, e_in, noise, rng)?;
            ledger.push(LedgerEntry {
                kind: EventKind::Read,
                delivered_pj: e_in,
                absorbed_pj: cell.absorbed_energy(&self.cal, e_in),
            });
            sum += (raw - offsets[j]) / full_scale;
        }
        Ok(sum)
    }
}

/// A signed matrix programmed onto a pair of cell arrays.
///
/// `A = scale * (pos - neg)` where `pos` and `neg` hold the positive and
/// negative parts of `A / scale` and `scale` is the largest magnitude of `A`
/// (1 for an all-zero matrix). The struct owns its arrays and an energy
/// ledger covering programming and every read since.
#[derive(Debug, Clone)]
pub struct SignedMatrixEncoding {
    pos: CellArray,
    neg: CellArray,
    pos_fracs: Vec<f64>,
    neg_fracs: Vec<f64>,
    scale: f64,
    rows: usize,
    cols: usize,
    ledger: EnergyLedger,
}

/// Splits a signed value into scaled positive/negative fractions.
fn split(v: f64, scale: f64) -> (f64, f64) {
    (v.max(0.0) / scale, (-v).max(0.0) / scale)
}

/// Programs matrix `a` onto the array pair. The matrix must fit both arrays;
/// unused cells stay at baseline.
pub fn program_matrix(
    pos: CellArray,
    neg: CellArray,
    a: &DenseMatrix,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
) -> Result<SignedMatrixEncoding> {
    if a.rows() > pos.rows()
        || a.cols() > pos.cols()
        || a.rows() > neg.rows()
        || a.cols() > neg.cols()
    {
        return Err(Error::ArrayCapacity {
            rows: a.rows(),
            cols: a.cols(),
            cap_rows: pos.rows().min(neg.rows()),
            cap_cols: pos.cols().min(neg.cols()),
        });
    }
    let scale = if a.max_abs() > 0.0 { a.max_abs() } else { 1.0 };
    let mut enc = SignedMatrixEncoding {
        pos,
        neg,
        pos_fracs: vec![0.0; a.rows() * a.cols()],
        neg_fracs: vec![0.0; a.rows() * a.cols()],
        scale,
        rows: a.rows(),
        cols: a.cols(),
        ledger: EnergyLedger::new(),
    };
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            enc.program_entry(i, j, a.get(i, j), noise, rng)?;
        }
    }
    Ok(enc)
}

impl SignedMatrixEncoding {
    fn program_entry(
        &mut self,
        i: usize,
        j: usize,
        value: f64,
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::OperandOutOfRange { name: "matrix entry", value });
        }
        if value.abs() > self.scale * (1.0 + 1e-12) {
            return Err(Error::ExceedsEncodingScale { value, scale: self.scale });
        }
        let (p, n) = split(value, self.scale);
        self.pos
            .program_cell(i, j, p.min(1.0), noise, rng, &mut self.ledger)?;
        self.neg
            .program_cell(i, j, n.min(1.0), noise, rng, &mut self.ledger)?;
        self.pos_fracs[i * self.cols + j] = p;
        self.neg_fracs[i * self.cols + j] = n;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Scale factor mapping cell fractions back to matrix units.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Target fraction of the positive-part cell at (i, j).
    pub fn pos_frac(&self, i: usize, j: usize) -> f64 {
        self.pos_fracs[i * self.cols + j]
    }

    /// Target fraction of the negative-part cell at (i, j).
    pub fn neg_frac(&self, i: usize, j: usize) -> f64 {
        self.neg_fracs[i * self.cols + j]
    }

    /// Energy accounting since programming began.
    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    /// Signed matrix–vector product through the device.
    ///
    /// The vector splits into positive/negative parts scaled by its largest
    /// magnitude; four read passes (pos·pos, neg·neg, pos·neg, neg·pos)
    /// combine as `scale_A * scale_x * ((pp + nn) - (pn + np))`.
    pub fn matvec(
        &mut self,
        x: &[f64],
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        let scale_x = matrix::max_abs(x);
        if scale_x == 0.0 {
            return Ok(vec![0.0; self.rows]);
        }
        let mut xp = Vec::with_capacity(x.len());
        let mut xn = Vec::with_capacity(x.len());
        for &v in x {
            if !v.is_finite() {
                return Err(Error::OperandOutOfRange { name: "vector entry", value: v });
            }
            let (p, n) = split(v, scale_x);
            xp.push(p);
            xn.push(n);
        }
        let ep = self.encode_pulses(&xp)?;
        let en = self.encode_pulses(&xn)?;
        let off_p = self.offsets(&ep);
        let off_n = self.offsets(&en);

        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let pp = self
                .pos
                .read_row_sum(i, &ep, &off_p, noise, rng, &mut self.ledger)?;
            let nn = self
                .neg
                .read_row_sum(i, &en, &off_n, noise, rng, &mut self.ledger)?;
            let pn = self
                .pos
                .read_row_sum(i, &en, &off_n, noise, rng, &mut self.ledger)?;
            let np = self
                .neg
                .read_row_sum(i, &ep, &off_p, noise, rng, &mut self.ledger)?;
            y[i] = self.scale * scale_x * ((pp + nn) - (pn + np));
        }
        Ok(y)
    }

    fn encode_pulses(&self, fracs: &[f64]) -> Result<Vec<f64>> {
        fracs
            .iter()
            .map(|&b| self.pos.mapping.encode_multiplier(b))
            .collect()
    }

    fn offsets(&self, energies: &[f64]) -> Vec<f64> {
        energies
            .iter()
            .map(|e| self.pos.cal.t_baseline * e)
            .collect()
    }

    /// Reads the matrix back through the device: full-scale read on every
    /// cell pair, decoded and recombined. Noiseless reads reproduce the
    /// programmed matrix exactly; write noise shows up as per-entry error.
    pub fn decode(&mut self, noise: &NoiseModel, rng: &mut DeviceRng) -> Result<DenseMatrix> {
        let e_in = self.pos.mapping.e_in_max_pj;
        let offset = self.pos.cal.t_baseline * e_in;
        let full_scale = self.pos.cal.t_prog_max * e_in;
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut one = |arr: &CellArray, ledger: &mut EnergyLedger| -> Result<f64> {
                    let cell = arr.cell(i, j);
                    let raw = cell.read(&arr.cal, e_in, noise, rng)?;
                    ledger.push(LedgerEntry {
                        kind: EventKind::Read,
                        delivered_pj: e_in,
                        absorbed_pj: cell.absorbed_energy(&arr.cal, e_in),
                    });
                    Ok((raw - offset) / full_scale)
                };
                let p = one(&self.pos, &mut self.ledger)?;
                let n = one(&self.neg, &mut self.ledger)?;
                out.set(i, j, self.scale * (p - n));
            }
        }
        Ok(out)
    }

    /// Erases and rewrites a single row with new values. The encoding scale
    /// is frozen at programming time, so magnitudes beyond it are rejected —
    /// representing them would force a full-matrix reprogram.
    pub fn reprogram_row(
        &mut self,
        row: usize,
        values: &[f64],
        noise: &NoiseModel,
        rng: &mut DeviceRng,
    ) -> Result<()> {
        if row >= self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: row });
        }
        if values.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: values.len() });
        }
        for &v in values {
            if !v.is_finite() {
                return Err(Error::OperandOutOfRange { name: "row value", value: v });
            }
            if v.abs() > self.scale * (1.0 + 1e-12) {
                return Err(Error::ExceedsEncodingScale { value: v, scale: self.scale });
            }
        }
        for (j, &v) in values.iter().enumerate() {
            self.program_entry(row, j, v, noise, rng)?;
        }
        Ok(())
    }
}

/// The swapped orientation: the *vector* lives in cells and each matrix row
/// travels as pulse energies. Implemented by programming `x` as a 1 × n
/// encoding and running one read pass per matrix row, which reuses the exact
/// same split/offset/decode path.
///
/// Useful when one vector is reused against many matrices; the default
/// orientation (matrix in cells) amortizes programming over many vectors.
pub fn matvec_vector_in_cells(
    a: &DenseMatrix,
    x_cells: &mut SignedMatrixEncoding,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
) -> Result<Vec<f64>> {
    if x_cells.rows() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: x_cells.rows() });
    }
    if a.cols() != x_cells.cols() {
        return Err(Error::DimensionMismatch { expected: x_cells.cols(), got: a.cols() });
    }
    let mut y = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let yi = x_cells.matvec(a.row(i), noise, rng)?;
        y.push(yi[0]);
    }
    Ok(y)
}

/// Convenience: a ready array pair sized for `a`, programmed with `a`.
pub fn encode_matrix(
    a: &DenseMatrix,
    cal: &CellCalibration,
    mapping: &OperandMapping,
    noise: &NoiseModel,
    rng: &mut DeviceRng,
) -> Result<SignedMatrixEncoding> {
    let pos = CellArray::new(a.rows(), a.cols(), cal.clone(), *mapping);
    let neg = CellArray::new(a.rows(), a.cols(), cal.clone(), *mapping);
    program_matrix(pos, neg, a, noise, rng)
}
