//! Gauss-Newton refinement of a Gram matrix onto an exact low-rank factor.

use nalgebra::{DMatrix, DVector};

use crate::symkernel::{SymEigen, SymMatrix};

const MAX_STEPS: usize = 50;

fn residual(b: &DMatrix<f64>, vbasis: &[SymMatrix], rhs: &[f64]) -> DVector<f64> {
    let g = b * b.transpose();
    DVector::from_iterator(
        rhs.len(),
        vbasis.iter().zip(rhs).map(|(v, bi)| {
            let mut s = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    s += v.get(i, j) * g[(i, j)];
                }
            }
            s - bi
        }),
    )
}

/// `B B^T` for a `6 x rank` factor `B` started from the leading eigenpairs
/// and driven to `tr(V_i B B^T) = b_i`; `None` when the iteration stalls.
pub(crate) fn polish(eig: &SymEigen, rank: usize, vbasis: &[SymMatrix], rhs: &[f64]) -> Option<SymMatrix> {
    if rank == 0 || rank > 6 {
        return None;
    }
    let top = eig.max().max(f64::MIN_POSITIVE);
    let mut b = DMatrix::from_fn(6, rank, |i, j| eig.vector(j)[i] * eig.values[j].max(1e-12 * top).sqrt());
    let target = 1e-13 * rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let m = rhs.len();
    let mut r = residual(&b, vbasis, rhs);
    for _ in 0..MAX_STEPS {
        if r.amax() <= target {
            return Some(SymMatrix::from_fn(6, |i, j| (0..rank).map(|k| b[(i, k)] * b[(j, k)]).sum()));
        }
        // Row i of the Jacobian is vec(2 V_i B).
        let mut jac = DMatrix::zeros(m, 6 * rank);
        for (row, v) in vbasis.iter().enumerate() {
            for i in 0..6 {
                for k in 0..rank {
                    let d: f64 = (0..6).map(|l| v.get(i, l) * b[(l, k)]).sum();
                    jac[(row, i * rank + k)] = 2.0 * d;
                }
            }
        }
        let svd = jac.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        let step = svd.solve(&r, eps).ok()?;
        let mut alpha = 1.0;
        let before = r.norm();
        loop {
            let trial = DMatrix::from_fn(6, rank, |i, k| b[(i, k)] - alpha * step[i * rank + k]);
            let rt = residual(&trial, vbasis, rhs);
            if rt.norm() < before || alpha < 1e-3 {
                b = trial;
                r = rt;
                break;
            }
            alpha *= 0.5;
        }
        if !b.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    (r.amax() <= target).then(|| SymMatrix::from_fn(6, |i, j| (0..rank).map(|k| b[(i, k)] * b[(j, k)]).sum()))
}
