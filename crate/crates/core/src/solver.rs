//! Krylov solvers whose matrix–vector products can run on cell arrays.
//!
//! Three modes share one report shape. `Exact` runs entirely in f64.
//! `Analog` routes every product through a programmed array pair, so write
//! noise from programming makes it a solve against a slightly wrong matrix —
//! the residual stalls at a floor set by that perturbation. `Mixed` wraps
//! the analog solver in an outer refinement loop: the residual is computed
//! exactly, the correction is solved approximately on the device, and each
//! outer step contracts the error, reaching tight tolerances the analog
//! solver alone cannot.
//!
//! Every residual in a report is the true one, `‖b − A·x‖ / ‖b‖`, computed
//! from the exact matrix — never the solver's internal recursion estimate.

use crate::array::{encode_matrix, SignedMatrixEncoding};
use crate::cell::CellCalibration;
use crate::error::{Error, Result};
use crate::matrix::{self, axpy, dot, norm, DenseMatrix};
use crate::mult::OperandMapping;
use crate::noise::{rng_from_seed, DeviceRng, NoiseModel};

/// A square system `A x = b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.rows(), got: a.cols() });
        }
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), got: b.len() });
        }
        Ok(LinearSystem { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Symmetric positive definite: symmetry to relative 1e-12 plus a
    /// Cholesky probe. Picks conjugate gradients over GMRES.
    pub fn is_spd(&self) -> bool {
        self.a.is_symmetric(1e-12) && self.a.cholesky_pivots_positive()
    }
}

/// Which arithmetic carries the matrix–vector products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    Analog,
    Mixed,
}

impl SolveMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMode::Exact => "exact",
            SolveMode::Analog => "analog",
            SolveMode::Mixed => "mixed",
        }
    }
}

/// Iteration budget and tolerances.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: SolveMode,
    /// Relative residual target.
    pub tolerance: f64,
    /// Iteration cap: Krylov steps for exact/analog, outer refinement steps
    /// for mixed.
    pub max_iterations: usize,
    /// Krylov steps per correction solve in mixed mode.
    pub inner_iterations: usize,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolveMode::Mixed,
            tolerance: 1e-9,
            max_iterations: 50,
            inner_iterations: 5,
            restart: 20,
        }
    }
}

/// Outcome of a solve. `residual_history[0]` is the residual of the zero
/// start (1.0 for nonzero `b`); one entry follows per iteration. The two
/// snapshot vectors run parallel to it: cumulative oracle products and
/// cumulative optical energy at each recorded residual.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub solution: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub matvec_history: Vec<u64>,
    pub energy_history_pj: Vec<f64>,
    pub matvec_count: u64,
    pub device_energy_pj: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Early-exit reason other than convergence, when one occurred.
    pub breakdown: Option<String>,
}

/// Supplier of matrix–vector products. Mutable because device-backed
/// oracles advance their pulse ledger (and noise stream) on every product.
pub trait MatVecOracle {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>>;
    /// Products served so far.
    fn applies(&self) -> u64;
    /// Optical energy delivered so far (programming plus reads); zero for
    /// pure-f64 oracles.
    fn energy_pj(&self) -> f64;
}

/// f64 reference oracle.
pub struct ExactOracle {
    a: DenseMatrix,
    applies: u64,
}

impl ExactOracle {
    pub fn new(a: DenseMatrix) -> Self {
        ExactOracle { a, applies: 0 }
    }
}

impl MatVecOracle for ExactOracle {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.applies += 1;
        Ok(self.a.matvec(x))
    }

    fn applies(&self) -> u64 {
        self.applies
    }

    fn energy_pj(&self) -> f64 {
        0.0
    }
}

/// Device-backed oracle: the matrix lives in a programmed array pair.
pub struct AnalogOracle {
    encoding: SignedMatrixEncoding,
    noise: NoiseModel,
    rng: DeviceRng,
    applies: u64,
}

impl AnalogOracle {
    /// Programs `a` onto fresh arrays. Write noise drawn here fixes the
    /// effective matrix for the oracle's lifetime.
    pub fn program(
        a: &DenseMatrix,
        cal: &CellCalibration,
        mapping: &OperandMapping,
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let encoding = encode_matrix(a, cal, mapping, noise, &mut rng)?;
        Ok(AnalogOracle {
            encoding,
            noise: *noise,
            rng,
            applies: 0,
        })
    }
}

impl MatVecOracle for AnalogOracle {
    fn dim(&self) -> usize {
        self.encoding.rows()
    }

    fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.applies += 1;
        self.encoding.matvec(x, &self.noise, &mut self.rng)
    }

    fn applies(&self) -> u64 {
        self.applies
    }

    fn energy_pj(&self) -> f64 {
        self.encoding.ledger().total_delivered_pj()
    }
}

fn true_relative_residual(a: &DenseMatrix, b: &[f64], x: &[f64], b_norm: f64) -> f64 {
    let ax = a.matvec(x);
    let mut r = b.to_vec();
    axpy(-1.0, &ax, &mut r);
    norm(&r) / b_norm
}

fn report_for_zero_rhs(mode: SolveMode, n: usize, oracle: &dyn MatVecOracle) -> SolveReport {
    SolveReport {
        mode,
        solution: vec![0.0; n],
        residual_history: vec![0.0],
        matvec_history: vec![oracle.applies()],
        energy_history_pj: vec![oracle.energy_pj()],
        matvec_count: oracle.applies(),
        device_energy_pj: oracle.energy_pj(),
        converged: true,
        iterations: 0,
        breakdown: None,
    }
}

/// Tracks the residual/products/energy triple so the three vectors never
/// drift out of step.
struct History {
    residuals: Vec<f64>,
    matvecs: Vec<u64>,
    energies: Vec<f64>,
}

impl History {
    fn start(oracle: &dyn MatVecOracle, first_residual: f64) -> Self {
        History {
            residuals: vec![first_residual],
            matvecs: vec![oracle.applies()],
            energies: vec![oracle.energy_pj()],
        }
    }

    fn push(&mut self, oracle: &dyn MatVecOracle, residual: f64) {
        self.residuals.push(residual);
        self.matvecs.push(oracle.applies());
        self.energies.push(oracle.energy_pj());
    }

    fn last_residual(&self) -> f64 {
        *self.residuals.last().unwrap()
    }
}

/// Conjugate gradients with oracle products and exact residual reporting.
///
/// The search recursion runs on whatever the oracle returns; the history —
/// and the stopping test — use the true residual from `a`, so an analog
/// oracle cannot hide its floor behind its own recursion.
pub fn cg(
    a: &DenseMatrix,
    b: &[f64],
    oracle: &mut dyn MatVecOracle,
    config: &SolverConfig,
    mode: SolveMode,
) -> Result<SolveReport> {
    let n = b.len();
    if oracle.dim() != n || a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(report_for_zero_rhs(mode, n, oracle));
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut history = History::start(oracle, 1.0);
    let mut converged = false;
    let mut breakdown = None;
    let mut iterations = 0;

    for k in 0..config.max_iterations {
        let ap = oracle.apply(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            breakdown = Some(format!(
                "direction with non-positive curvature at step {} (p·Ap = {:.3e}); \
                 matrix is not positive definite",
                k + 1,
                pap
            ));
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, &ri) in p.iter_mut().zip(r.iter()) {
            *pi = ri + beta * *pi;
        }
        iterations = k + 1;
        let rel = true_relative_residual(a, b, &x, b_norm);
        history.push(oracle, rel);
        if rel < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        mode,
        solution: x,
        residual_history: history.residuals,
        matvec_history: history.matvecs,
        energy_history_pj: history.energies,
        matvec_count: oracle.applies(),
        device_energy_pj: oracle.energy_pj(),
        converged,
        iterations,
        breakdown,
    })
}

/// Restarted GMRES (modified Gram–Schmidt Arnoldi, Givens rotations) with
/// oracle products and exact residual reporting. Each Arnoldi step forms
/// the current iterate to measure the true residual — costly next to the
/// recursion estimate, but honest about what an analog oracle achieves.
pub fn gmres(
    a: &DenseMatrix,
    b: &[f64],
    oracle: &mut dyn MatVecOracle,
    config: &SolverConfig,
    mode: SolveMode,
) -> Result<SolveReport> {
    let n = b.len();
    if oracle.dim() != n || a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(report_for_zero_rhs(mode, n, oracle));
    }
    let restart = config.restart.max(1).min(n);

    let mut x = vec![0.0; n];
    let mut history = History::start(oracle, 1.0);
    let mut converged = false;
    let mut breakdown = None;
    let mut total_steps = 0;

    'outer: while total_steps < config.max_iterations {
        // Residual of the current iterate seeds the next Krylov space. It
        // must come from the oracle: the space has to match the operator
        // actually applied inside it.
        let r0 = if matrix::max_abs(&x) == 0.0 {
            b.to_vec()
        } else {
            let ax = oracle.apply(&x)?;
            let mut r = b.to_vec();
            axpy(-1.0, &ax, &mut r);
            r
        };
        let beta = norm(&r0);
        if beta == 0.0 {
            converged = history.last_residual() < config.tolerance;
            break;
        }

        let mut v: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
        v.push(r0.iter().map(|&e| e / beta).collect());
        // Upper-Hessenberg columns, Givens-rotated in place.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![beta];

        for j in 0..restart {
            if total_steps >= config.max_iterations {
                x = form_iterate(&x, &v, &h, &g, j);
                break 'outer;
            }
            let mut w = oracle.apply(&v[j])?;
            let mut hj = Vec::with_capacity(j + 2);
            for vi in v.iter().take(j + 1) {
                let hij = dot(&w, vi);
                axpy(-hij, vi, &mut w);
                hj.push(hij);
            }
            let w_norm = norm(&w);
            hj.push(w_norm);

            // Apply accumulated rotations to the new column, then a fresh
            // rotation to zero its subdiagonal.
            for i in 0..j {
                let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = t;
            }
            let denom = (hj[j] * hj[j] + hj[j + 1] * hj[j + 1]).sqrt();
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (hj[j] / denom, hj[j + 1] / denom) };
            cs.push(c);
            sn.push(s);
            hj[j] = c * hj[j] + s * hj[j + 1];
            hj[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(hj);

            total_steps += 1;
            let candidate = form_iterate(&x, &v, &h, &g, j + 1);
            let rel = true_relative_residual(a, b, &candidate, b_norm);
            history.push(oracle, rel);
            if rel < config.tolerance {
                x = candidate;
                converged = true;
                break 'outer;
            }

            let happy = w_norm <= 1e-14 * beta.max(1.0);
            if happy {
                // Krylov space became invariant; nothing more to gain from
                // restarting out of the same iterate.
                x = candidate;
                if !converged {
                    breakdown = Some(format!(
                        "invariant Krylov space after {} steps with residual {:.3e}",
                        total_steps, rel
                    ));
                }
                break 'outer;
            }
            v.push(w.iter().map(|&e| e / w_norm).collect());

            if j + 1 == restart {
                x = candidate;
            }
        }
    }

    Ok(SolveReport {
        mode,
        solution: x,
        residual_history: history.residuals,
        matvec_history: history.matvecs,
        energy_history_pj: history.energies,
        matvec_count: oracle.applies(),
        device_energy_pj: oracle.energy_pj(),
        converged,
        iterations: total_steps,
        breakdown,
    })
}

/// Back-solves the rotated least-squares problem for the first `k` Arnoldi
/// columns and returns `x0 + V·y`.
fn form_iterate(x0: &[f64], v: &[Vec<f64>], h: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (j, &yj) in y.iter().enumerate().skip(i + 1) {
            s -= h[j][i] * yj;
        }
        y[i] = s / h[i][i];
    }
    let mut x = x0.to_vec();
    for (j, &yj) in y.iter().enumerate() {
        axpy(yj, &v[j], &mut x);
    }
    x
}

/// Runs a fixed number of Krylov steps on the oracle without any exact
/// bookkeeping — the correction solve inside mixed-precision refinement.
fn inner_correction(
    oracle: &mut dyn MatVecOracle,
    r: &[f64],
    steps: usize,
    spd: bool,
) -> Result<Vec<f64>> {
    if spd {
        inner_cg(oracle, r, steps)
    } else {
        inner_gmres(oracle, r, steps)
    }
}

fn inner_cg(oracle: &mut dyn MatVecOracle, b: &[f64], steps: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    if rr == 0.0 {
        return Ok(x);
    }
    for _ in 0..steps {
        let ap = oracle.apply(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_next = dot(&r, &r);
        if rr_next == 0.0 {
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, &ri) in p.iter_mut().zip(r.iter()) {
            *pi = ri + beta * *pi;
        }
    }
    Ok(x)
}

fn inner_gmres(oracle: &mut dyn MatVecOracle, b: &[f64], steps: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let steps = steps.min(n);
    let mut v: Vec<Vec<f64>> = vec![b.iter().map(|&e| e / beta).collect()];
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut done = 0;
    for j in 0..steps {
        let mut w = oracle.apply(&v[j])?;
        let mut hj = Vec::with_capacity(j + 2);
        for vi in v.iter().take(j + 1) {
            let hij = dot(&w, vi);
            axpy(-hij, vi, &mut w);
            hj.push(hij);
        }
        let w_norm = norm(&w);
        hj.push(w_norm);
        for i in 0..j {
            let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
            hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
            hj[i] = t;
        }
        let denom = (hj[j] * hj[j] + hj[j + 1] * hj[j + 1]).sqrt();
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (hj[j] / denom, hj[j + 1] / denom) };
        cs.push(c);
        sn.push(s);
        hj[j] = c * hj[j] + s * hj[j + 1];
        hj[j + 1] = 0.0;
        g.push(-s * g[j]);
        g[j] *= c;
        h.push(hj);
        done = j + 1;
        if w_norm <= 1e-14 * beta.max(1.0) {
            break;
        }
        v.push(w.iter().map(|&e| e / w_norm).collect());
    }
    Ok(form_iterate(&vec![0.0; n], &v, &h, &g, done))
}

/// Mixed-precision iterative refinement: exact residual outside, device
/// correction solve inside.
///
/// Each outer step computes `r = b − A·x` in f64, asks the analog oracle
/// for an approximate `z ≈ A⁻¹·r` (a few Krylov steps), and updates
/// `x += z`. The device only ever solves for the *remaining error*, so its
/// accuracy floor shrinks the error by a roughly constant factor per step
/// instead of capping the final answer. Three consecutive residual
/// increases abort the loop.
pub fn mixed_precision_solve(
    system: &LinearSystem,
    oracle: &mut dyn MatVecOracle,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let n = system.dim();
    if oracle.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    let b_norm = norm(&system.b);
    if b_norm == 0.0 {
        return Ok(report_for_zero_rhs(SolveMode::Mixed, n, oracle));
    }
    let spd = system.is_spd();

    let mut x = vec![0.0; n];
    let mut history = History::start(oracle, 1.0);
    let mut converged = false;
    let mut breakdown = None;
    let mut iterations = 0;
    let mut growths = 0;
    let mut prev_rel = 1.0;

    for k in 0..config.max_iterations {
        let ax = system.a.matvec(&x);
        let mut r = system.b.clone();
        axpy(-1.0, &ax, &mut r);
        let rel = norm(&r) / b_norm;
        if k > 0 {
            history.push(oracle, rel);
        }
        if rel < config.tolerance {
            converged = true;
            break;
        }
        if rel > prev_rel {
            growths += 1;
            if growths >= 3 {
                breakdown = Some(format!(
                    "residual grew for {growths} consecutive outer steps (at {rel:.3e}); \
                     correction solve is not contracting"
                ));
                break;
            }
        } else {
            growths = 0;
        }
        prev_rel = rel;

        let z = inner_correction(oracle, &r, config.inner_iterations, spd)?;
        axpy(1.0, &z, &mut x);
        iterations = k + 1;
    }

    if !converged && breakdown.is_none() {
        // Record the final residual if the loop ran out of budget.
        let rel = true_relative_residual(&system.a, &system.b, &x, b_norm);
        if history.residuals.len() == iterations {
            history.push(oracle, rel);
        }
    }

    Ok(SolveReport {
        mode: SolveMode::Mixed,
        solution: x,
        residual_history: history.residuals,
        matvec_history: history.matvecs,
        energy_history_pj: history.energies,
        matvec_count: oracle.applies(),
        device_energy_pj: oracle.energy_pj(),
        converged,
        iterations,
        breakdown,
    })
}

/// One-call entry point dispatching on `config.mode`. Exact mode ignores
/// the device parameters; analog and mixed program the matrix at `seed`.
pub fn solve(
    system: &LinearSystem,
    config: &SolverConfig,
    cal: &CellCalibration,
    mapping: &OperandMapping,
    noise: &NoiseModel,
    seed: u64,
) -> Result<SolveReport> {
    match config.mode {
        SolveMode::Exact => {
            let mut oracle = ExactOracle::new(system.a.clone());
            run_krylov(system, &mut oracle, config, SolveMode::Exact)
        }
        SolveMode::Analog => {
            let mut oracle = AnalogOracle::program(&system.a, cal, mapping, noise, seed)?;
            run_krylov(system, &mut oracle, config, SolveMode::Analog)
        }
        SolveMode::Mixed => {
            let mut oracle = AnalogOracle::program(&system.a, cal, mapping, noise, seed)?;
            mixed_precision_solve(system, &mut oracle, config)
        }
    }
}

fn run_krylov(
    system: &LinearSystem,
    oracle: &mut dyn MatVecOracle,
    config: &SolverConfig,
    mode: SolveMode,
) -> Result<SolveReport> {
    if system.is_spd() {
        cg(&system.a, &system.b, oracle, config, mode)
    } else {
        gmres(&system.a, &system.b, oracle, config, mode)
    }
}
