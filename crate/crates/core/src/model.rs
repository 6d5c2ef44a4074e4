//! System operators, truncated time-bin Fock spaces and the coarse-grained
//! single-bin map `U = exp(-i H dt ⊗ 1 + sqrt(gamma dt) (L ⊗ dB^dag - L^dag ⊗ dB))`.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::kraus::{apply_channel, extract_kraus};
use crate::operator::{expm, kron, Operator, I};

/// A small quantum system together with the operator it couples to the waveguide through.
#[derive(Debug, Clone)]
pub struct SystemModel {
    dim: usize,
    coupling: Operator,
    hamiltonian: Operator,
    label: String,
}

impl SystemModel {
    pub fn new(coupling: Operator, hamiltonian: Operator, label: impl Into<String>) -> Result<Self> {
        let dim = hamiltonian.side();
        if coupling.side() != dim {
            return Err(Error::DimensionMismatch(format!(
                "coupling is {}x{0}, hamiltonian is {dim}x{dim}",
                coupling.side()
            )));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(SystemModel {
            dim,
            coupling: coupling.with_dims(&[dim])?,
            hamiltonian: hamiltonian.with_dims(&[dim])?,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The system operator attached to `dB^dag` (sigma for spontaneous emission).
    pub fn coupling(&self) -> &Operator {
        &self.coupling
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Two-level emitter, basis `{|g>, |e>}`, `sigma = |g><e|`,
/// `H = omega0 sigma^dag sigma + drive (sigma + sigma^dag)`.
pub fn two_level_system(omega0: f64, drive: f64) -> SystemModel {
    let sigma = Operator::outer_basis(2, 0, 1);
    let h = Operator::from_real_rows(&[vec![0.0, drive], vec![drive, omega0]]).expect("2x2");
    SystemModel::new(sigma, h, "tls").expect("two-level model is valid")
}

/// Three-level truncated oscillator, coupling through `a`,
/// `H = omega0 a^dag a + drive (a + a^dag)`.
pub fn truncated_oscillator(levels: usize, omega0: f64, drive: f64) -> SystemModel {
    let a = Operator::annihilation(levels - 1);
    let number = &a.dagger() * &a;
    let h = &number.scale_real(omega0) + &(&a + &a.dagger()).scale_real(drive);
    SystemModel::new(a, h, format!("oscillator{levels}")).expect("oscillator model is valid")
}

/// Replaces the coupling by `sigma^dag sigma`; the bath then dephases instead of
/// absorbing excitations.
pub fn dephasing_variant(base: &SystemModel) -> SystemModel {
    let number = &base.coupling.dagger() * &base.coupling;
    SystemModel {
        dim: base.dim,
        coupling: number,
        hamiltonian: base.hamiltonian.clone(),
        label: format!("{}-dephasing", base.label),
    }
}

/// Truncated Fock space of a single time bin.
#[derive(Debug, Clone)]
pub struct BinSpace {
    n_max: usize,
    annihilate: Operator,
}

impl BinSpace {
    pub fn new(n_max: usize) -> Self {
        BinSpace {
            n_max,
            annihilate: Operator::annihilation(n_max),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn annihilate(&self) -> &Operator {
        &self.annihilate
    }
}

/// Decay rate, bin width and per-bin photon truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseParams {
    pub gamma: f64,
    pub dt: f64,
    pub n_max: usize,
}

impl CoarseParams {
    pub fn new(gamma: f64, dt: f64, n_max: usize) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        Ok(CoarseParams { gamma, dt, n_max })
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        Self::new(self.gamma, dt, self.n_max)
    }
}

/// Anti-Hermitian exponent of the single-bin map on `[sys.dim, n_max + 1]`.
pub fn bin_generator(sys: &SystemModel, p: &CoarseParams) -> Operator {
    let bin = BinSpace::new(p.n_max);
    let db = bin.annihilate();
    let free = kron(&sys.hamiltonian, &Operator::identity(&[bin.dim()])).scale(-I * p.dt);
    let exchange = &kron(&sys.coupling, &db.dagger()) - &kron(&sys.coupling.dagger(), db);
    &free + &exchange.scale_real((p.gamma * p.dt).sqrt())
}

/// Unitary for one time bin.
pub fn coarse_map(sys: &SystemModel, p: &CoarseParams) -> Result<Operator> {
    expm(&bin_generator(sys, p))
}

/// Max-norm distance between the channel built from one bin of width `dt` and
/// the channel composed from `subdivisions` bins of width `dt / subdivisions`,
/// both applied to the system's top basis state (`|e>` for a qubit).
///
/// The composed channel approximates the time-ordered evolution over the bin,
/// so the returned value probes the per-bin error of dropping time ordering.
pub fn ordering_residual(sys: &SystemModel, p: &CoarseParams, subdivisions: usize) -> Result<f64> {
    if subdivisions < 2 {
        return Err(Error::InvalidParameter("subdivisions must be >= 2".into()));
    }
    let rho0 = DensityMatrix::basis(sys.dim(), sys.dim() - 1);

    let coarse = extract_kraus(&coarse_map(sys, p)?, sys.dim(), p.n_max, p.dt)?;
    let single = apply_channel(&coarse, &rho0)?;

    let fine_params = p.with_dt(p.dt / subdivisions as f64)?;
    let fine = extract_kraus(&coarse_map(sys, &fine_params)?, sys.dim(), p.n_max, fine_params.dt)?;
    let mut composed = rho0;
    for _ in 0..subdivisions {
        composed = apply_channel(&fine, &composed)?;
    }
    Ok(single.op().max_abs_diff(composed.op()))
}
