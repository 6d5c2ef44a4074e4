//! Continuum-limit reference: `drho/dt = -i[H, rho] + gamma (L rho L^dag - {L^dag L, rho} / 2)`,
//! integrated with fixed-step RK4, plus closed-form solutions for an undriven qubit.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::operator::{commutator, Operator, C64, I};

const TRACE_DRIFT_LIMIT: f64 = 1e-8;

/// Hamiltonian plus a single collapse operator `L` with rate `gamma` kept separate.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: Operator,
    collapse: Operator,
    gamma: f64,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, collapse: Operator, gamma: f64) -> Result<Self> {
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if collapse.side() != hamiltonian.side() {
            return Err(Error::DimensionMismatch("collapse and hamiltonian sizes differ".into()));
        }
        Ok(LindbladModel {
            hamiltonian,
            collapse,
            gamma,
        })
    }

    /// The master equation whose collision-model discretization `sys` is.
    pub fn from_system(sys: &SystemModel, gamma: f64) -> Result<Self> {
        Self::new(sys.hamiltonian().clone(), sys.coupling().clone(), gamma)
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn collapse(&self) -> &Operator {
        &self.collapse
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check_dim(&self, rho: &Operator) -> Result<()> {
        if rho.side() != self.hamiltonian.side() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs model dimension {}",
                rho.side(),
                self.hamiltonian.side()
            )));
        }
        Ok(())
    }

    fn dissipator_op(&self, rho: &Operator) -> Operator {
        let l = &self.collapse;
        let ld = l.dagger();
        let number = &ld * l;
        let jump = &(l * rho) * &ld;
        let anti = &(&number * rho) + &(rho * &number);
        (&jump - &anti.scale_real(0.5)).scale_real(self.gamma)
    }

    fn liouvillian_op(&self, rho: &Operator) -> Operator {
        let unitary = commutator(&self.hamiltonian, rho)
            .expect("dimensions checked")
            .scale(-I);
        &unitary + &self.dissipator_op(rho)
    }
}

/// `gamma (L rho L^dag - (L^dag L rho + rho L^dag L) / 2)`.
pub fn dissipator(model: &LindbladModel, rho: &DensityMatrix) -> Result<Operator> {
    model.check_dim(rho.op())?;
    Ok(model.dissipator_op(rho.op()))
}

/// `-i[H, rho]` plus the dissipator.
pub fn liouvillian(model: &LindbladModel, rho: &DensityMatrix) -> Result<Operator> {
    model.check_dim(rho.op())?;
    Ok(model.liouvillian_op(rho.op()))
}

/// Classic fixed-step RK4. The series starts at `rho0` and has `steps + 1` entries
/// spaced by `dt`, the same grid the collision model uses.
pub fn integrate_rk4(model: &LindbladModel, rho0: &DensityMatrix, dt: f64, steps: usize) -> Result<Vec<DensityMatrix>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    model.check_dim(rho0.op())?;
    let mut series = Vec::with_capacity(steps + 1);
    series.push(rho0.clone());
    let mut rho = rho0.op().clone();
    let f = |r: &Operator| model.liouvillian_op(r);
    for step in 1..=steps {
        let k1 = f(&rho);
        let k2 = f(&(&rho + &k1.scale_real(0.5 * dt)));
        let k3 = f(&(&rho + &k2.scale_real(0.5 * dt)));
        let k4 = f(&(&rho + &k3.scale_real(dt)));
        let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        rho = &rho + &incr.scale_real(dt / 6.0);
        if !rho.is_finite() {
            return Err(Error::NonFinite("RK4 state"));
        }
        let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { step, drift });
        }
        series.push(DensityMatrix::from_op_unchecked(rho.clone()));
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Spontaneous,
    Dephasing,
}

/// Closed-form evolution of an undriven qubit with `H = 0`.
pub fn analytic_oracle(kind: OracleKind, gamma: f64, t: f64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(Error::NotTwoLevel(format!("state has dimension {}", rho0.dim())));
    }
    let coherence_factor = (-0.5 * gamma * t).exp();
    let ee0 = rho0.get(1, 1).re;
    let ee = match kind {
        OracleKind::Spontaneous => ee0 * (-gamma * t).exp(),
        OracleKind::Dephasing => ee0,
    };
    let eg = rho0.get(1, 0) * coherence_factor;
    let op = Operator::from_rows(&[
        vec![C64::new(1.0 - ee, 0.0), eg.conj()],
        vec![eg, C64::new(ee, 0.0)],
    ])?;
    Ok(DensityMatrix::from_op_unchecked(op))
}
