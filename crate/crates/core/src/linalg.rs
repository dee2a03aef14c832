//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Matrices are square, stored row-major, and capped at [`MAX_DIM`]. Spectral
//! work goes through [`eig_hermitian`]; everything else (operator functions on
//! the support, Schatten norms, partial traces) is built on top of it.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Entrywise Hermiticity tolerance.
pub const TOL_HERM: f64 = 1e-9;
/// Allowed deviation of a density matrix trace from 1.
pub const TOL_TRACE: f64 = 1e-9;
/// Entrywise tolerance for `sum(elements) == I`.
pub const TOL_POVM: f64 = 1e-9;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const TOL_PSD: f64 = 1e-10;
/// Reconstruction and orthonormality tolerance for eigendecompositions.
pub const TOL_EIG: f64 = 1e-8;
/// Default support cutoff, relative to the largest eigenvalue.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Largest matrix dimension accepted anywhere in the crate (10 qubits).
pub const MAX_DIM: usize = 1 << 10;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::SizeCap {
            what: "matrix dimension",
            value: dim,
            limit: MAX_DIM,
        });
    }
    Ok(())
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DomainError("matrix dimension must be >= 1".into()));
        }
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v><v|` for the given (not necessarily normalized) vector.
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.dim + c] = value;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let out_row = &mut out[r * d..(r + 1) * d];
            for (k, a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let other_row = &other.data[k * d..(k + 1) * d];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, data: out }
    }

    /// `A B A` with `A` self, used for congruences by Hermitian operators.
    pub fn sandwich(&self, inner: &Self) -> Self {
        self.matmul(inner).matmul(self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.data[r * d + c] * other.data[c * d + r];
            }
        }
        acc
    }

    /// Real part of `Tr(self * other)`; exact for Hermitian arguments.
    pub fn expectation(&self, other: &Self) -> f64 {
        self.trace_product(other).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise `|a_ij - conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in r..d {
                let dev = (self.data[r * d + c] - self.data[c * d + r].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for r in 0..d {
            for c in r..d {
                let v = (self.data[r * d + c] + self.data[c * d + r].conj()) * 0.5;
                out.data[r * d + c] = v;
                out.data[c * d + r] = v.conj();
            }
        }
        out
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

impl Eigen {
    /// `V f(diag(values)) V†`
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..d {
                let vr = v[r] * w;
                for c in 0..d {
                    out.data[r * d + c] += vr * v[c].conj();
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<Eigen> {
    let deviation = a.hermiticity_defect();
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let d = a.dim();
    let decomposition = a.hermitian_part().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        decomposition.eigenvalues[j]
            .partial_cmp(&decomposition.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| decomposition.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| decomposition.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok(Eigen { values, vectors })
}

/// Spectral inverse square root restricted to eigenvalues above
/// `rel_cutoff * max_eigenvalue`, together with the projector onto the
/// retained support.
pub(crate) fn inv_sqrt_with_support(
    a: &ComplexMatrix,
    rel_cutoff: f64,
) -> Result<(ComplexMatrix, ComplexMatrix, usize)> {
    let eig = eig_hermitian(a)?;
    let threshold = rel_cutoff * eig.max().max(0.0);
    let keep = |l: f64| l > threshold && l > 0.0;
    let inv_sqrt = eig.apply(|l| if keep(l) { 1.0 / l.sqrt() } else { 0.0 });
    let projector = eig.apply(|l| if keep(l) { 1.0 } else { 0.0 });
    let rank = eig.values.iter().filter(|&&l| keep(l)).count();
    Ok((inv_sqrt.hermitian_part(), projector.hermitian_part(), rank))
}

/// `rho^{-1/2}` on the support of `rho`; eigenvalues below
/// `cutoff * max_eigenvalue` are treated as zero.
pub fn sqrt_pinv_on_support(rho: &DensityMatrix, cutoff: f64) -> ComplexMatrix {
    inv_sqrt_with_support(rho.matrix(), cutoff)
        .expect("density matrices are Hermitian")
        .0
}

/// Schatten 1-norm.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    if a.is_hermitian(TOL_HERM) {
        let eig = eig_hermitian(a).expect("checked Hermitian");
        return eig.values.iter().map(|l| l.abs()).sum();
    }
    a.to_nalgebra().singular_values().iter().sum()
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(0.5 * trace_norm(&rho.matrix().sub(sigma.matrix())))
}

/// Kronecker product.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d);
    for ar in 0..da {
        for ac in 0..da {
            let x = a[(ar, ac)];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            for br in 0..db {
                for bc in 0..db {
                    out.data[(ar * db + br) * d + ac * db + bc] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Traces out every subsystem not listed in `keep`. `dims` lists subsystem
/// dimensions, most significant first; `keep` must be strictly increasing.
pub fn partial_trace(a: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if total != a.dim() || dims.iter().any(|&d| d == 0) {
        return Err(Error::BadSplit(format!(
            "subsystem dims {dims:?} do not multiply to {}",
            a.dim()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::BadSplit(format!("invalid kept subsystems {keep:?}")));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim);

    // digits of a flat index, most significant subsystem first
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut ds = vec![0; dims.len()];
        for (slot, &d) in ds.iter_mut().zip(dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        ds
    };
    let compose = |ds: &[usize], which: &[usize]| -> usize {
        which.iter().fold(0, |acc, &k| acc * dims[k] + ds[k])
    };
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();

    for r in 0..total {
        let rd = digits(r);
        for c in 0..total {
            let cd = digits(c);
            if traced.iter().any(|&k| rd[k] != cd[k]) {
                continue;
            }
            let (orow, ocol) = (compose(&rd, keep), compose(&cd, keep));
            out.data[orow * out_dim + ocol] += a[(r, c)];
        }
    }
    Ok(out)
}

/// Trace-one positive semidefinite Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        let deviation = matrix.hermiticity_defect();
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {:.12}{:+.3e}i differs from 1",
                tr.re, tr.im
            )));
        }
        let min = eig_hermitian(&matrix)?.min();
        if min < -TOL_PSD {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Pure state `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v))
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self::new(ComplexMatrix::from_real_diagonal(&diag))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix)
            .expect("density matrices are Hermitian")
            .values
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(tensor(&self.matrix, &other.matrix))
    }

    /// Mixture `sum_k w_k rho_k`; weights must form a distribution.
    pub fn mixture(weights: &[f64], states: &[&DensityMatrix]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidDensityMatrix("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: s.dim(),
                });
            }
            acc.add_scaled(s.matrix(), *w);
        }
        Self::new(acc)
    }
}

/// Finite POVM whose outcomes carry integer labels (bitstrings for decoders).
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    labels: Vec<usize>,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(labels: Vec<usize>, elements: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self::from_parts_unchecked(labels, elements)?;
        povm.validate()?;
        Ok(povm)
    }

    /// Structural checks only (shape, label uniqueness).
    pub(crate) fn from_parts_unchecked(
        labels: Vec<usize>,
        elements: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if elements.is_empty() || labels.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        let dim = elements[0].dim();
        check_dim(dim)?;
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPovm("duplicate outcome labels".into()));
        }
        Ok(Self { labels, elements })
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (label, e) in self.labels.iter().zip(&self.elements) {
            let deviation = e.hermiticity_defect();
            if deviation > TOL_HERM {
                return Err(Error::InvalidPovm(format!(
                    "element {label} not Hermitian (deviation {deviation:.3e})"
                )));
            }
            let min = eig_hermitian(e)?.min();
            if min < -TOL_PSD {
                return Err(Error::InvalidPovm(format!(
                    "element {label} has negative eigenvalue {min:.3e}"
                )));
            }
            sum.add_scaled(e, 1.0);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > TOL_POVM {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {defect:.3e}"
            )));
        }
        Ok(())
    }

    pub fn two_outcome(m0: ComplexMatrix, m1: ComplexMatrix) -> Result<Self> {
        Self::new(vec![0, 1], vec![m0, m1])
    }

    /// Projective measurement in the orthonormal basis given by `vectors`.
    pub fn from_basis(vectors: &[Vec<C64>]) -> Result<Self> {
        Self::new(
            (0..vectors.len()).collect(),
            vectors.iter().map(|v| ComplexMatrix::outer(v)).collect(),
        )
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn element(&self, label: usize) -> Option<&ComplexMatrix> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|k| &self.elements[k])
    }

    /// `Tr(E_k rho)` in label order of `labels()`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.expectation(rho.matrix()))
            .collect()
    }

    /// Operator-level convex combination `(1-w) self + w other`; labels must agree.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::InvalidPovm("mixing POVMs with different labels".into()));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let elements = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| {
                let mut m = a.scale(1.0 - w);
                m.add_scaled(b, w);
                m
            })
            .collect();
        Ok(Self {
            labels: self.labels.clone(),
            elements,
        })
    }
}
