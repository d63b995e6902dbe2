//! Dense symmetric-matrix primitives: PSD projection, quadratic forms through
//! inverses, Schur feasibility tests, weighted second moments.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative eigenvalue tolerance: `1e-10 * (1 + spectral scale)`.
pub fn eig_tolerance(spectral_scale: f64) -> f64 {
    1e-10 * (1.0 + spectral_scale.abs())
}

/// Default ridge for near-singular solves: `1e-12 * trace / dim`.
pub fn default_ridge(a: &SymMatrix) -> f64 {
    1e-12 * a.trace().abs() / a.dim() as f64
}

/// Symmetric d x d matrix stored as a packed lower triangle, so symmetry is
/// exact by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // Row-major lower triangle: (i, j) with j <= i lives at i*(i+1)/2 + j.
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from a dense matrix, averaging `(i,j)` and `(j,i)` entries.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    /// Builds from a row-major slice of length `dim * dim`.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::InvalidInput(format!(
                "expected {} row-major entries for dim {}, got {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                out.set(i, j, 0.5 * (entries[i * dim + j] + entries[j * dim + i]));
            }
        }
        Ok(out)
    }

    /// Rank-one matrix `v v^T`.
    pub fn outer(v: &DVector<f64>) -> Self {
        let dim = v.len();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                out.set(i, j, v[i] * v[j]);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        if i >= j {
            i * (i + 1) / 2 + j
        } else {
            j * (j + 1) / 2 + i
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[Self::idx(i, j)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// In-place `self *= s`.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// In-place `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// In-place `self += s * v v^T`.
    pub fn axpy_outer(&mut self, s: f64, v: &DVector<f64>) {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                self.data[k] += s * v[i] * v[j];
                k += 1;
            }
        }
    }

    /// Frobenius inner product `trace(self * other)`.
    pub fn frob_inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.data[k] * other.data[k];
                k += 1;
            }
        }
        acc
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_inner(self).max(0.0).sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        DVector::from_fn(self.dim, |i, _| {
            (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()
        })
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.data[k] * v[i] * v[j];
                k += 1;
            }
        }
        acc
    }

    /// Eigendecomposition; returns (eigenvalues, eigenvectors as columns).
    pub fn eigh(&self) -> (DVector<f64>, DMatrix<f64>) {
        let se = SymmetricEigen::new(self.to_dense());
        (se.eigenvalues, se.eigenvectors)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_scale(&self) -> f64 {
        let (vals, _) = self.eigh();
        vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = self.eigh();
        vals.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// True iff all eigenvalues are at least `-eig_tolerance(scale)`.
    pub fn is_psd(&self) -> bool {
        let (vals, _) = self.eigh();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        vals.iter().all(|&v| v >= -eig_tolerance(scale))
    }
}

/// Frobenius-nearest positive-semidefinite matrix: eigendecompose and clip
/// negative eigenvalues to zero.
pub fn psd_project(m: &SymMatrix) -> SymMatrix {
    assert!(m.is_finite(), "psd_project: non-finite matrix entry");
    let (vals, vecs) = m.eigh();
    let mut out = SymMatrix::zeros(m.dim());
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.0 {
            let col = vecs.column(k).clone_owned();
            out.axpy_outer(lam, &col);
        }
    }
    out
}

/// `v^T (A + ridge I)^{-1} v` via a Cholesky solve.
pub fn quad_form_inv(a: &SymMatrix, v: &DVector<f64>, ridge: f64) -> Result<f64> {
    if !a.is_finite() || v.iter().any(|x| !x.is_finite()) || !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::InvalidInput(
            "quad_form_inv: non-finite input or negative ridge".into(),
        ));
    }
    if a.dim() != v.len() {
        return Err(Error::InvalidInput(format!(
            "quad_form_inv: matrix dim {} vs vector dim {}",
            a.dim(),
            v.len()
        )));
    }
    let mut dense = a.to_dense();
    for i in 0..a.dim() {
        dense[(i, i)] += ridge;
    }
    let scale = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = eig_tolerance(scale);
    match nalgebra::Cholesky::new(dense) {
        Some(chol) => {
            let min_pivot = (0..a.dim())
                .map(|i| chol.l_dirty()[(i, i)])
                .fold(f64::INFINITY, f64::min);
            if min_pivot * min_pivot < tol {
                return Err(Error::SingularMatrix {
                    eigenvalue_scale: min_pivot * min_pivot,
                    tolerance: tol,
                });
            }
            let sol = chol.solve(v);
            Ok(v.dot(&sol))
        }
        None => Err(Error::SingularMatrix {
            eigenvalue_scale: a.min_eigenvalue(),
            tolerance: tol,
        }),
    }
}

/// True iff `A - y y^T / c^2` is PSD within tolerance, i.e. `y^T A^{-1} y <= c^2`
/// whenever `A` is invertible.
pub fn schur_feasible(a: &SymMatrix, y: &DVector<f64>, c: f64) -> Result<bool> {
    if !a.is_finite() || y.iter().any(|x| !x.is_finite()) || !(c > 0.0) {
        return Err(Error::InvalidInput(
            "schur_feasible: non-finite input or non-positive radius".into(),
        ));
    }
    if a.dim() != y.len() {
        return Err(Error::InvalidInput(format!(
            "schur_feasible: matrix dim {} vs vector dim {}",
            a.dim(),
            y.len()
        )));
    }
    let mut shifted = a.clone();
    shifted.axpy_outer(-1.0 / (c * c), y);
    let (vals, _) = shifted.eigh();
    let scale = vals
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(a.spectral_scale());
    Ok(vals.iter().all(|&v| v >= -eig_tolerance(scale)))
}

/// `sum_i weights[i] * x_i x_i^T`, exactly symmetric.
pub fn weighted_second_moment(points: &[DVector<f64>], weights: &[f64]) -> Result<SymMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "weighted_second_moment: empty point list".into(),
        ));
    }
    if points.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "weighted_second_moment: {} points vs {} weights",
            points.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidInput(
            "weighted_second_moment: weights must be finite and nonnegative".into(),
        ));
    }
    let dim = points[0].len();
    let mut out = SymMatrix::zeros(dim);
    for (x, &w) in points.iter().zip(weights) {
        if x.len() != dim {
            return Err(Error::InvalidInput(
                "weighted_second_moment: inconsistent point dimensions".into(),
            ));
        }
        out.axpy_outer(w, x);
    }
    Ok(out)
}

/// Eigendecomposition-backed solver for repeated pseudo-inverse quadratic
/// forms against one matrix. Directions outside the numerical range produce a
/// singular-design error.
pub struct SpectralSolver {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
    cutoff: f64,
}

impl SpectralSolver {
    pub fn new(a: &SymMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidInput(
                "SpectralSolver: non-finite matrix entry".into(),
            ));
        }
        let (vals, vecs) = a.eigh();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(SpectralSolver {
            vals,
            vecs,
            cutoff: eig_tolerance(scale),
        })
    }

    /// `v^T A^+ v`, requiring `v` to lie in the numerical range of `A`.
    pub fn quad_form_pinv(&self, v: &DVector<f64>) -> Result<f64> {
        let coeffs = self.vecs.transpose() * v;
        let mut acc = 0.0;
        let mut out_of_range_sq = 0.0;
        for (k, &c) in coeffs.iter().enumerate() {
            if self.vals[k] > self.cutoff {
                acc += c * c / self.vals[k];
            } else {
                out_of_range_sq += c * c;
            }
        }
        let norm = v.norm();
        if out_of_range_sq.sqrt() > 1e-8 * (1.0 + norm) {
            return Err(Error::SingularDesign {
                residual: out_of_range_sq.sqrt(),
            });
        }
        Ok(acc)
    }
}
