use crate::error::{Error, Result};
use crate::operator::{hermitian_eigenvalues, vn_entropy, Operator, StateVector, C64};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator on the system space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = op.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&op).first().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { op })
    }

    /// Wraps channel or integrator output whose trace may carry a reported defect.
    pub(crate) fn from_op_unchecked(op: Operator) -> Self {
        DensityMatrix { op }
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        Self::new(psi.clone().normalized().projector())
    }

    /// Projector on basis state `index` of a `dim`-level system.
    pub fn basis(dim: usize, index: usize) -> Self {
        DensityMatrix {
            op: Operator::outer_basis(dim, index, index),
        }
    }

    /// `|g><g|` for a qubit.
    pub fn ground() -> Self {
        Self::basis(2, 0)
    }

    /// `|e><e|` for a qubit.
    pub fn excited() -> Self {
        Self::basis(2, 1)
    }

    /// `|+><+|` with `|+> = (|g> + |e>) / sqrt 2`.
    pub fn plus() -> Self {
        DensityMatrix {
            op: Operator::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).expect("2x2"),
        }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.side()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.op[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij |rho_ij|^2 for Hermitian rho.
        self.op.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn entropy(&self) -> Result<f64> {
        vn_entropy(&self.op)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.op).first().copied().unwrap_or(0.0)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.op[(i, i)].re).collect()
    }
}
