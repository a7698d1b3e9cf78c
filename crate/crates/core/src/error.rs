//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when driving the simulated device or its
/// surrounding tooling.
#[derive(Debug, Error)]
pub enum Error {
    /// A write pulse arrived with less energy than the switching threshold.
    /// Writes are dispatched explicitly by the caller, so this is a dispatch
    /// bug, not a soft failure.
    #[error("write pulse of {energy_pj} pJ is below the switching threshold ({threshold_pj} pJ)")]
    WriteBelowThreshold { energy_pj: f64, threshold_pj: f64 },

    /// A read pulse arrived with enough energy to switch the cell. Reads must
    /// stay strictly below the threshold or they would alter the stored level.
    #[error("read pulse of {energy_pj} pJ would switch the cell (threshold {threshold_pj} pJ)")]
    ReadWouldSwitch { energy_pj: f64, threshold_pj: f64 },

    /// An erase pulse that does not match the calibrated double-step shape.
    #[error("malformed erase pulse: {0}")]
    MalformedErasePulse(String),

    /// An erase train can only lower the programmed level.
    #[error("erase train target {target} is above the current programmed level {current}")]
    EraseTargetAboveLevel { target: f64, current: f64 },

    /// A pulse was constructed with a non-physical power or width.
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    /// An operand fell outside the encodable range.
    #[error("{name} = {value} is outside the encodable range [0, 1]")]
    OperandOutOfRange { name: &'static str, value: f64 },

    /// A multiplicand can only be written into a cell that sits at baseline.
    #[error("cell is not at baseline (programmed level {t_prog}); erase before writing a new multiplicand")]
    CellNotAtBaseline { t_prog: f64 },

    /// Drift correction needs a remembered write pulse to re-apply.
    #[error("no write pulse on record; drift can only be corrected on a written level")]
    NoWriteToRestore,

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A matrix does not fit into the cell array it is being programmed onto.
    #[error("matrix of {rows}x{cols} exceeds array capacity {cap_rows}x{cap_cols}")]
    ArrayCapacity {
        rows: usize,
        cols: usize,
        cap_rows: usize,
        cap_cols: usize,
    },

    /// A row update whose magnitudes cannot be represented at the encoding's
    /// frozen scale. Re-scaling would force a full-matrix reprogram.
    #[error("row value {value} exceeds the encoding scale {scale}; reprogram the full matrix instead")]
    ExceedsEncodingScale { value: f64, scale: f64 },

    /// Input data unfit for a calibration fit.
    #[error("calibration fit rejected input: {0}")]
    FitRejected(String),

    /// A calibration profile file that cannot be parsed.
    #[error("profile parse error: {0}")]
    ProfileParse(String),

    /// Malformed matrix/vector file.
    #[error("matrix file error: {0}")]
    MatrixFile(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
