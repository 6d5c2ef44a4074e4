//! Full pure-state evolution of the system together with every time bin.
//!
//! Each bin starts in vacuum and interacts exactly once, in order. Tracing out
//! the bins reproduces the Kraus iteration, even though the joint state is
//! entangled.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::kraus::{apply_channel, KrausFamily};
use crate::operator::{Operator, StateVector};

/// Largest joint state we are willing to store densely.
pub const MAX_AMPLITUDES: u128 = 1 << 22;

#[derive(Debug, Clone)]
pub struct ChainState {
    vec: StateVector,
    cursor: usize,
    n_bins: usize,
    sys_dim: usize,
    bin_dim: usize,
}

impl ChainState {
    /// Index of the next bin to interact.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn bin_dim(&self) -> usize {
        self.bin_dim
    }

    pub fn vector(&self) -> &StateVector {
        &self.vec
    }

    /// Photon weight found in bins the system has not reached yet.
    pub fn unvisited_excitation(&self) -> f64 {
        (self.cursor..self.n_bins)
            .map(|b| self.vec.excited_weight(b + 1))
            .sum()
    }
}

/// `sys_state ⊗ |0 ... 0>` over `n_bins` bins of `n_max + 1` levels.
pub fn init_chain(sys_state: &StateVector, n_bins: usize, n_max: usize) -> Result<ChainState> {
    if n_bins < 1 {
        return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
    }
    if (sys_state.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "system state has norm {}",
            sys_state.norm()
        )));
    }
    let sys_dim = sys_state.len();
    let bin_dim = n_max + 1;
    let amplitudes = (bin_dim as u128)
        .checked_pow(n_bins as u32)
        .and_then(|b| b.checked_mul(sys_dim as u128))
        .unwrap_or(u128::MAX);
    if amplitudes > MAX_AMPLITUDES {
        return Err(Error::DimensionOverflow(amplitudes));
    }
    let sys = StateVector::new(sys_state.data().to_vec(), &[sys_dim])?;
    let vacuum = StateVector::basis(&vec![bin_dim; n_bins], 0);
    Ok(ChainState {
        vec: sys.kron(&vacuum),
        cursor: 0,
        n_bins,
        sys_dim,
        bin_dim,
    })
}

/// Lets the system interact with the bin under the cursor through `u`, then
/// advances the cursor.
pub fn step_chain(mut state: ChainState, u: &Operator) -> Result<ChainState> {
    if state.cursor >= state.n_bins {
        return Err(Error::CursorExhausted(state.n_bins));
    }
    if u.dims() != [state.sys_dim, state.bin_dim] {
        return Err(Error::DimensionMismatch(format!(
            "map dims {:?}, chain expects [{}, {}]",
            u.dims(),
            state.sys_dim,
            state.bin_dim
        )));
    }
    state.vec.apply_local(u, &[0, state.cursor + 1])?;
    state.cursor += 1;
    Ok(state)
}

pub fn reduced_system(state: &ChainState) -> DensityMatrix {
    let op = state
        .vec
        .reduced_density(&[0])
        .expect("factor 0 always exists");
    DensityMatrix::from_op_unchecked(op)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationReport {
    /// System-field entanglement entropy in nats.
    pub entropy: f64,
    /// `max |rho_chain - rho_kraus|` at the same step.
    pub markov_defect: f64,
}

/// Compares the reduced chain state against `reference`, the Kraus-iteration
/// state after the same number of steps.
pub fn factorization_report(state: &ChainState, reference: &DensityMatrix) -> Result<FactorizationReport> {
    let reduced = reduced_system(state);
    Ok(FactorizationReport {
        entropy: reduced.entropy()?,
        markov_defect: reduced.op().max_abs_diff(reference.op()),
    })
}

/// One row per step `k = 0..=n_bins`, pairing the reduced chain state with
/// its factorization report.
#[derive(Debug, Clone)]
pub struct ChainRow {
    pub step: usize,
    pub reduced: DensityMatrix,
    pub report: FactorizationReport,
}

/// Drives the chain through every bin while iterating `family` alongside it.
pub fn run_chain(sys_state: &StateVector, u: &Operator, family: &KrausFamily, n_bins: usize) -> Result<Vec<ChainRow>> {
    let mut state = init_chain(sys_state, n_bins, family.n_max())?;
    let mut kraus_rho = DensityMatrix::pure(sys_state)?;
    let mut rows = Vec::with_capacity(n_bins + 1);
    for step in 0..=n_bins {
        if step > 0 {
            state = step_chain(state, u)?;
            kraus_rho = apply_channel(family, &kraus_rho)?;
        }
        rows.push(ChainRow {
            step,
            reduced: reduced_system(&state),
            report: factorization_report(&state, &kraus_rho)?,
        });
    }
    Ok(rows)
}
