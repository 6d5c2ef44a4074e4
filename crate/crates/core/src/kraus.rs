//! Kraus operators of a single time bin and the operator-sum channel they define.
//!
//! `K_m = (1 ⊗ <m|) U (1 ⊗ |0>)`: the bin enters in vacuum and is traced out
//! after interacting once, so the reduced step is `rho -> sum_m K_m rho K_m^dag`.

use log::warn;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::operator::{Operator, C64, I};

/// Channel outputs whose trace is further than this from one are rejected.
const TRACE_FAILURE: f64 = 1e-6;
const TRACE_WARNING: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KrausFamily {
    ops: Vec<Operator>,
    dt: f64,
    n_max: usize,
    completeness_defect: f64,
}

impl KrausFamily {
    /// Indexed by the number of photons left in the bin.
    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sys_dim(&self) -> usize {
        self.ops[0].side()
    }

    /// `max |sum_m K_m^dag K_m - 1|`, computed once at extraction.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    /// A family that leaves every state unchanged.
    pub fn identity(sys_dim: usize, n_max: usize, dt: f64) -> Self {
        let mut ops = vec![Operator::zeros(&[sys_dim]); n_max + 1];
        ops[0] = Operator::identity(&[sys_dim]);
        KrausFamily {
            ops,
            dt,
            n_max,
            completeness_defect: 0.0,
        }
    }
}

fn completeness(ops: &[Operator]) -> f64 {
    let dim = ops[0].side();
    let sum = ops
        .iter()
        .fold(Operator::zeros(&[dim]), |acc, k| &acc + &(&k.dagger() * k));
    sum.max_abs_diff(&Operator::identity(&[dim]))
}

pub fn extract_kraus(u: &Operator, sys_dim: usize, n_max: usize, dt: f64) -> Result<KrausFamily> {
    let bin_dim = n_max + 1;
    if u.dims() != [sys_dim, bin_dim] {
        return Err(Error::DimensionMismatch(format!(
            "map has dims {:?}, expected [{sys_dim}, {bin_dim}]",
            u.dims()
        )));
    }
    let ops: Vec<Operator> = (0..bin_dim)
        .map(|m| {
            let mut k = Operator::zeros(&[sys_dim]);
            for i in 0..sys_dim {
                for j in 0..sys_dim {
                    k[(i, j)] = u[(i * bin_dim + m, j * bin_dim)];
                }
            }
            k
        })
        .collect();
    let completeness_defect = completeness(&ops);
    Ok(KrausFamily {
        ops,
        dt,
        n_max,
        completeness_defect,
    })
}

/// Residuals of the first three Kraus operators against their leading-order forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    pub dt: f64,
    /// `|K_0 - (1 + dt (-i H - gamma/2 L^dag L))|`
    pub r0: f64,
    /// `|K_1 - sqrt(gamma dt) L|`
    pub r1: f64,
    /// `|K_2|`
    pub r2: f64,
    pub completeness_defect: f64,
}

pub fn expansion_report(f: &KrausFamily, sys: &SystemModel, gamma: f64) -> Result<ExpansionReport> {
    if f.n_max < 2 {
        return Err(Error::InvalidParameter(
            "expansion report needs n_max >= 2 to see K_2".into(),
        ));
    }
    if f.sys_dim() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "family acts on dimension {}, system has {}",
            f.sys_dim(),
            sys.dim()
        )));
    }
    let dt = f.dt;
    let l = sys.coupling();
    let number = &l.dagger() * l;
    let generator = &sys.hamiltonian().scale(-I) - &number.scale_real(0.5 * gamma);
    let k0_expected = &Operator::identity(&[sys.dim()]) + &generator.scale_real(dt);
    let k1_expected = l.scale_real((gamma * dt).sqrt());
    Ok(ExpansionReport {
        dt,
        r0: f.ops[0].max_abs_diff(&k0_expected),
        r1: f.ops[1].max_abs_diff(&k1_expected),
        r2: f.ops[2].max_abs(),
        completeness_defect: f.completeness_defect,
    })
}

/// One step of the operator-sum channel.
pub fn apply_channel(f: &KrausFamily, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != f.sys_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs channel dimension {}",
            rho.dim(),
            f.sys_dim()
        )));
    }
    let r = rho.op();
    let acc = f
        .ops
        .iter()
        .fold(Operator::zeros(&[rho.dim()]), |acc, k| &acc + &(&(k * r) * &k.dagger()));

    let deviation = (acc.trace() - C64::new(1.0, 0.0)).norm();
    if deviation > TRACE_FAILURE {
        return Err(Error::TraceDeviation(deviation));
    }
    if deviation > TRACE_WARNING {
        warn!("channel trace deviates from 1 by {deviation:.3e} (completeness defect {:.3e})", f.completeness_defect);
    }
    Ok(DensityMatrix::from_op_unchecked(acc.hermitian_part()))
}

/// Applies the same family `steps` times. The returned series starts with `rho0`
/// and has `steps + 1` entries.
pub fn iterate_channel(f: &KrausFamily, rho0: &DensityMatrix, steps: usize) -> Result<Vec<DensityMatrix>> {
    let mut series = Vec::with_capacity(steps + 1);
    series.push(rho0.clone());
    for k in 0..steps {
        let next = apply_channel(f, &series[k])?;
        series.push(next);
    }
    Ok(series)
}
