//! Dense symmetric-matrix numerics on the space `S_k` of symmetric `k x k`
//! matrices: storage, trace inner product, Jacobi eigendecomposition,
//! PSD factorization and orthogonal complements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real symmetric matrix stored as its row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrixRepr", into = "SymMatrixRepr")]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymMatrixRepr {
    dim: usize,
    upper: Vec<f64>,
}

impl TryFrom<SymMatrixRepr> for SymMatrix {
    type Error = String;

    fn try_from(repr: SymMatrixRepr) -> std::result::Result<Self, Self::Error> {
        if repr.dim == 0 {
            return Err("dim must be positive".into());
        }
        let expected = repr.dim * (repr.dim + 1) / 2;
        if repr.upper.len() != expected {
            return Err(format!(
                "upper must hold {expected} entries for dim {}, found {}",
                repr.dim,
                repr.upper.len()
            ));
        }
        if repr.upper.iter().any(|v| !v.is_finite()) {
            return Err("entries must be finite".into());
        }
        Ok(SymMatrix { dim: repr.dim, upper: repr.upper })
    }
}

impl From<SymMatrix> for SymMatrixRepr {
    fn from(m: SymMatrix) -> Self {
        SymMatrixRepr { dim: m.dim, upper: m.upper }
    }
}

#[inline]
fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * dim - i + 1) / 2 + (j - i)
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        Self { dim, upper }
    }

    pub fn from_upper(dim: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = dim * (dim + 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: upper.len() });
        }
        Ok(Self { dim, upper })
    }

    /// Symmetrizes a dense row-major square matrix, `(M + M^T) / 2`.
    pub fn from_dense(dim: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: dense.len() });
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (dense[i * dim + j] + dense[j * dim + i])))
    }

    /// Rank-one matrix `v v^T`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[upper_index(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = upper_index(self.dim, i, j);
        self.upper[idx] = value;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, value: f64) {
        let idx = upper_index(self.dim, i, j);
        self.upper[idx] += value;
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, upper: self.upper.iter().map(|v| v * s).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self {
            dim: self.dim,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + s * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm, `sqrt(<M, M>)`.
    pub fn frobenius(&self) -> f64 {
        self.svec().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Coordinates in which the Euclidean dot product equals the trace inner
    /// product: diagonal entries as-is, off-diagonal entries times `sqrt(2)`.
    pub fn svec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.upper.len());
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.get(i, j);
                out.push(if i == j { v } else { v * std::f64::consts::SQRT_2 });
            }
        }
        out
    }

    pub fn from_svec(dim: usize, coords: &[f64]) -> Self {
        let mut idx = 0;
        Self::from_fn(dim, |i, j| {
            let v = coords[idx];
            idx += 1;
            if i == j {
                v
            } else {
                v * std::f64::consts::FRAC_1_SQRT_2
            }
        })
    }

    /// `M v` for a vector of matching length.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(())
}

/// Trace inner product `<M, N> = sum_ij m_ij n_ij = tr(M N)`.
pub fn trace_inner(m: &SymMatrix, n: &SymMatrix) -> Result<f64> {
    check_dims(m, n)?;
    let mut acc = 0.0;
    for i in 0..m.dim {
        acc += m.get(i, i) * n.get(i, i);
        for j in (i + 1)..m.dim {
            acc += 2.0 * m.get(i, j) * n.get(i, j);
        }
    }
    Ok(acc)
}

/// Dense `rows x cols` matrix, row-major. With six rows the rows are the
/// factor vectors `a, b, c, d, e, f` of a Gram matrix `B B^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FactorMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, col[i]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// `B B^T`.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.rows, |i, j| dot(self.row(i), self.row(j)))
    }

    /// `B K B^T` for a symmetric `cols x cols` matrix `K`.
    pub fn congruence(&self, k: &SymMatrix) -> Result<SymMatrix> {
        if k.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: k.dim() });
        }
        let bk: Vec<Vec<f64>> = (0..self.rows).map(|i| k.mul_vec(self.row(i))).collect();
        Ok(SymMatrix::from_fn(self.rows, |i, j| dot(&bk[i], self.row(j))))
    }

    /// `B T` for a dense row-major `cols x n` matrix `T`.
    pub fn mul_dense(&self, t: &[f64], n: usize) -> FactorMatrix {
        let mut out = FactorMatrix::zeros(self.rows, n);
        for i in 0..self.rows {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..self.cols {
                    acc += self.get(i, l) * t[l * n + j];
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> FactorMatrix {
        FactorMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigendecomposition `M = Q diag(values) Q^T`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Row-major `k x k`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    dim: usize,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + j]).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal Frobenius norm
/// drops below `1e-14 * ||M||_F`.
pub fn eig_sym(m: &SymMatrix) -> SymEigen {
    let n = m.dim();
    let mut a = m.to_dense();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let norm = m.frobenius();
    let target = 1e-14 * norm;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    a[k * n + p] = c * akp - s * akr;
                    a[k * n + r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let ark = a[r * n + k];
                    a[p * n + k] = c * apk - s * ark;
                    a[r * n + k] = s * apk + c * ark;
                }
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkr = q[k * n + r];
                    q[k * n + p] = c * qkp - s * qkr;
                    q[k * n + r] = s * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_j] = q[i * n + old_j];
        }
    }
    SymEigen { values, vectors, dim: n }
}

fn rank_threshold(values: &[f64], rel_tol: f64) -> f64 {
    let lead = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    rel_tol * lead.max(1.0)
}

/// Number of eigenvalues with `|lambda| > rel_tol * max(1, |lambda_1|)`.
pub fn numerical_rank(m: &SymMatrix, rel_tol: f64) -> usize {
    let eig = eig_sym(m);
    let thr = rank_threshold(&eig.values, rel_tol);
    eig.values.iter().filter(|v| v.abs() > thr).count()
}

/// Factor `M = B B^T` with one column per retained eigenvalue, each column
/// an eigenvector scaled by `sqrt(lambda)`.
pub fn psd_factor(m: &SymMatrix, rel_tol: f64) -> Result<FactorMatrix> {
    let eig = eig_sym(m);
    factor_from_eigen(&eig, rel_tol)
}

pub(crate) fn factor_from_eigen(eig: &SymEigen, rel_tol: f64) -> Result<FactorMatrix> {
    let thr = rank_threshold(&eig.values, rel_tol);
    if let Some(&bad) = eig.values.iter().find(|&&v| v < -thr) {
        return Err(Error::NotPsd { eigenvalue: bad });
    }
    let columns: Vec<Vec<f64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > thr)
        .map(|(j, &v)| eig.vector(j).into_iter().map(|x| x * v.sqrt()).collect())
        .collect();
    Ok(FactorMatrix::from_columns(eig.dim(), &columns))
}

/// Relative residual below which a span vector counts as dependent.
const SPAN_DEPENDENCE_TOL: f64 = 1e-10;

/// Orthonormal (trace inner product) basis of the orthogonal complement of
/// `span` inside `S_k`.
pub fn orth_complement(span: &[SymMatrix], dim: usize) -> Result<Vec<SymMatrix>> {
    for s in span {
        check_dims(s, &SymMatrix::zeros(dim))?;
    }
    let total = dim * (dim + 1) / 2;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for s in span {
        let v = s.svec();
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = orthogonalize(v, &basis);
        let rn = dot(&r, &r).sqrt();
        if rn > SPAN_DEPENDENCE_TOL * norm {
            basis.push(r.into_iter().map(|x| x / rn).collect());
        }
    }

    let mut complement = Vec::new();
    let mut remaining: Vec<usize> = (0..total).collect();
    while basis.len() < total {
        // Greedy: take the coordinate direction with the largest residual.
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for (pos, &j) in remaining.iter().enumerate() {
            let mut e = vec![0.0; total];
            e[j] = 1.0;
            let r = orthogonalize(e, &basis);
            let rn = dot(&r, &r).sqrt();
            if best.as_ref().is_none_or(|b| rn > b.2) {
                best = Some((pos, r, rn));
            }
        }
        let Some((pos, r, rn)) = best else { break };
        if rn < 1e-6 {
            break;
        }
        remaining.swap_remove(pos);
        let unit: Vec<f64> = r.into_iter().map(|x| x / rn).collect();
        complement.push(SymMatrix::from_svec(dim, &unit));
        basis.push(unit);
    }
    Ok(complement)
}

/// Two passes of modified Gram-Schmidt against an orthonormal basis.
fn orthogonalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    v
}
