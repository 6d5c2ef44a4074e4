//! Dense complex operators and state vectors that know their tensor-factor structure.
//!
//! Composite indices are row-major with the leftmost factor most significant, so
//! `kron(a, b)` indexes as `(i_a * dim_b + i_b)`. Within a factor, index 0 is the
//! ground or vacuum state.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigenvalues below this are treated as zero in entropy sums.
const ENTROPY_CUTOFF: f64 = 1e-14;

/// Square complex matrix tagged with the dimensions of its tensor factors.
#[derive(Clone, PartialEq)]
pub struct Operator {
    data: Vec<C64>,
    dims: Vec<usize>,
}

impl Operator {
    pub fn zeros(dims: &[usize]) -> Self {
        let n = checked_product(dims);
        Operator {
            data: vec![ZERO; n * n],
            dims: dims.to_vec(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut out = Self::zeros(dims);
        for i in 0..out.side() {
            out[(i, i)] = ONE;
        }
        out
    }

    /// Builds an operator from row-major entries.
    pub fn from_vec(data: Vec<C64>, dims: &[usize]) -> Result<Self> {
        let n = checked_product(dims);
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot fill a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Operator {
            data,
            dims: dims.to_vec(),
        })
    }

    /// Single-factor operator from a list of rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows do not form a square matrix".into()));
        }
        Self::from_vec(rows.concat(), &[n])
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut out = Self::zeros(&[diag.len()]);
        for (i, &d) in diag.iter().enumerate() {
            out[(i, i)] = C64::new(d, 0.0);
        }
        out
    }

    /// Truncated bosonic annihilation operator on `n_max + 1` Fock levels.
    pub fn annihilation(n_max: usize) -> Self {
        let mut out = Self::zeros(&[n_max + 1]);
        for m in 1..=n_max {
            out[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
        }
        out
    }

    /// `|row><col|` on a single factor of dimension `dim`.
    pub fn outer_basis(dim: usize, row: usize, col: usize) -> Self {
        let mut out = Self::zeros(&[dim]);
        out[(row, col)] = ONE;
        out
    }

    /// Re-tags the factor structure. The total dimension must not change.
    pub fn with_dims(mut self, dims: &[usize]) -> Result<Self> {
        if checked_product(dims) != self.side() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} do not multiply to {}",
                self.side()
            )));
        }
        self.dims = dims.to_vec();
        Ok(self)
    }

    pub fn side(&self) -> usize {
        checked_product(&self.dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.side()).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            data: self.data.iter().map(|&x| x * c).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn try_matmul(&self, rhs: &Operator) -> Result<Operator> {
        let n = self.side();
        if rhs.side() != n {
            return Err(mismatch(self, rhs));
        }
        let mut out = Operator::zeros(&self.dims);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Operator> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Operator) -> Result<Operator> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Operator, f: impl Fn(C64, C64) -> C64) -> Result<Operator> {
        if rhs.side() != self.side() {
            return Err(mismatch(self, rhs));
        }
        Ok(Operator {
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
            dims: self.dims.clone(),
        })
    }

    pub fn dagger(&self) -> Operator {
        let n = self.side();
        let mut out = Operator::zeros(&self.dims);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Largest entry modulus, the norm used for all tolerance checks.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        let n = self.side();
        (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.side();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Distance `max |A - B|`; operators of different size are infinitely far apart.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.try_sub(other).map_or(f64::INFINITY, |d| d.max_abs())
    }

    /// `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        let n = self.side();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.side();
        assert_eq!(v.len(), n, "vector length does not match operator side");
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        let n = self.side();
        DMatrix::from_fn(n, n, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.side() + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        let n = self.side();
        &mut self.data[i * n + j]
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator dims={:?}", self.dims)?;
        let n = self.side();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// The arithmetic operators panic on a size mismatch, like slice indexing; use the
// `try_*` methods where mismatched input is a recoverable error.
impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.try_matmul(rhs).expect("operator product")
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator sum")
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator difference")
    }
}

fn mismatch(a: &Operator, b: &Operator) -> Error {
    Error::DimensionMismatch(format!("{:?} vs {:?}", a.dims, b.dims))
}

fn checked_product(dims: &[usize]) -> usize {
    assert!(dims.iter().all(|&d| d >= 1), "factor dimensions must be >= 1");
    dims.iter().product()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over `factors`, enumerated row-major in the
/// order the factors are listed.
fn factor_offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for &f in factors {
        let (dim, stride) = (dims[f], st[f]);
        offsets = offsets
            .iter()
            .flat_map(|&base| (0..dim).map(move |d| base + d * stride))
            .collect();
    }
    offsets
}

fn complement(n: usize, factors: &[usize]) -> Vec<usize> {
    (0..n).filter(|k| !factors.contains(k)).collect()
}

fn validate_factors(factors: &[usize], n: usize) -> Result<()> {
    for (pos, &f) in factors.iter().enumerate() {
        if f >= n {
            return Err(Error::FactorOutOfRange {
                index: f,
                factors: n,
            });
        }
        if factors[..pos].contains(&f) {
            return Err(Error::InvalidParameter(format!("factor {f} listed twice")));
        }
    }
    Ok(())
}

/// Kronecker product; the left operand's index is the more significant one.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.side(), b.side());
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for ia in 0..na {
        for ja in 0..na {
            let x = a[(ia, ja)];
            if x == ZERO {
                continue;
            }
            for ib in 0..nb {
                let row = (ia * nb + ib) * n + ja * nb;
                for jb in 0..nb {
                    data[row + jb] = x * b[(ib, jb)];
                }
            }
        }
    }
    let dims = [a.dims.as_slice(), b.dims.as_slice()].concat();
    Operator { data, dims }
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.try_matmul(b)?.try_sub(&b.try_matmul(a)?)
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
///
/// The scaled matrix has 1-norm at most 0.5, where 30 Taylor terms are far more
/// than enough to reach machine precision.
pub fn expm(a: &Operator) -> Result<Operator> {
    if !a.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let norm = a.one_norm();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scaled = a.scale_real(2f64.powi(-(squarings as i32)));

    let mut sum = Operator::identity(&a.dims);
    let mut term = sum.clone();
    for k in 1..=30 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Traces out every factor not listed in `keep`. The kept factors appear in
/// ascending order in the result.
pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    validate_factors(keep, a.dims.len())?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let traced = complement(a.dims.len(), &keep);

    let kept_off = factor_offsets(&a.dims, &keep);
    let traced_off = factor_offsets(&a.dims, &traced);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| a.dims[k]).collect();

    let mut out = Operator::zeros(if kept_dims.is_empty() { &[1] } else { &kept_dims });
    for (ri, &r) in kept_off.iter().enumerate() {
        for (ci, &c) in kept_off.iter().enumerate() {
            out[(ri, ci)] = traced_off.iter().map(|&t| a[(r + t, c + t)]).sum();
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = a.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Von Neumann entropy in nats.
pub fn vn_entropy(rho: &Operator) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    let entropy = hermitian_eigenvalues(rho)
        .into_iter()
        .map(|l| if (-1e-12..0.0).contains(&l) { 0.0 } else { l })
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum();
    Ok(entropy)
}

/// Dense state vector on a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(data: Vec<C64>, dims: &[usize]) -> Result<Self> {
        if data.len() != checked_product(dims) {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(StateVector {
            data,
            dims: dims.to_vec(),
        })
    }

    pub fn basis(dims: &[usize], index: usize) -> Self {
        let mut data = vec![ZERO; checked_product(dims)];
        data[index] = ONE;
        StateVector {
            data,
            dims: dims.to_vec(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        for z in &mut self.data {
            *z /= n;
        }
        self
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let data = self
            .data
            .iter()
            .flat_map(|&a| other.data.iter().map(move |&b| a * b))
            .collect();
        StateVector {
            data,
            dims: [self.dims.as_slice(), other.dims.as_slice()].concat(),
        }
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> Operator {
        let n = self.len();
        let mut out = Operator::zeros(&self.dims);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.data[i] * self.data[j].conj();
            }
        }
        out
    }

    /// Applies `op` to the listed factors (in that order), identity elsewhere.
    pub fn apply_local(&mut self, op: &Operator, targets: &[usize]) -> Result<()> {
        validate_factors(targets, self.dims.len())?;
        let local: usize = targets.iter().map(|&t| self.dims[t]).product();
        if op.side() != local {
            return Err(Error::DimensionMismatch(format!(
                "operator side {} vs local dimension {local}",
                op.side()
            )));
        }
        let target_off = factor_offsets(&self.dims, targets);
        let rest_off = factor_offsets(&self.dims, &complement(self.dims.len(), targets));
        let mut buf = vec![ZERO; local];
        for &base in &rest_off {
            for (b, &t) in buf.iter_mut().zip(&target_off) {
                *b = self.data[base + t];
            }
            for (i, &t) in target_off.iter().enumerate() {
                self.data[base + t] = op.data[i * local..(i + 1) * local]
                    .iter()
                    .zip(&buf)
                    .map(|(&a, &b)| a * b)
                    .sum();
            }
        }
        Ok(())
    }

    /// Reduced density operator on the `keep` factors, computed without forming
    /// the full projector.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<Operator> {
        validate_factors(keep, self.dims.len())?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let kept_off = factor_offsets(&self.dims, &keep);
        let traced_off = factor_offsets(&self.dims, &complement(self.dims.len(), &keep));
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let mut out = Operator::zeros(if kept_dims.is_empty() { &[1] } else { &kept_dims });
        for (ri, &r) in kept_off.iter().enumerate() {
            for (ci, &c) in kept_off.iter().enumerate().skip(ri) {
                let z: C64 = traced_off
                    .iter()
                    .map(|&t| self.data[r + t] * self.data[c + t].conj())
                    .sum();
                out[(ri, ci)] = z;
                out[(ci, ri)] = z.conj();
            }
        }
        Ok(out)
    }

    /// Probability weight carried by amplitudes where `factor` is not in its
    /// ground level.
    pub fn excited_weight(&self, factor: usize) -> f64 {
        let st = strides(&self.dims);
        self.data
            .iter()
            .enumerate()
            .filter(|(idx, _)| !(idx / st[factor]).is_multiple_of(self.dims[factor]))
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}
