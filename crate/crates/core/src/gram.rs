//! The Gram affine set of a quartic: the particular Gram matrix `A0`, the
//! kernel `W` of the Gram map, its orthogonal complement and the six linear
//! identities that cut the moment cone out of `PSD_6`.

use serde::Serialize;

use crate::quartic::TernaryQuartic;
use crate::symkernel::{trace_inner, FactorMatrix, SymMatrix};

/// Particular Gram matrix with `v^T A0 v = p`.
pub fn build_a0(p: &TernaryQuartic) -> SymMatrix {
    let c = |i, j, k| p.coeff(i, j, k);
    let mut a = SymMatrix::zeros(6);
    a.set(0, 0, c(4, 0, 0));
    a.set(1, 1, c(2, 2, 0));
    a.set(2, 2, c(2, 0, 2));
    a.set(3, 3, c(0, 4, 0));
    a.set(4, 4, c(0, 2, 2));
    a.set(5, 5, c(0, 0, 4));
    a.set(0, 1, 0.5 * c(3, 1, 0));
    a.set(0, 2, 0.5 * c(3, 0, 1));
    a.set(0, 4, 0.5 * c(2, 1, 1));
    a.set(1, 3, 0.5 * c(1, 3, 0));
    a.set(1, 4, 0.5 * c(1, 2, 1));
    a.set(2, 4, 0.5 * c(1, 1, 2));
    a.set(2, 5, 0.5 * c(1, 0, 3));
    a.set(3, 4, 0.5 * c(0, 3, 1));
    a.set(4, 5, 0.5 * c(0, 1, 3));
    a
}

/// `(off-diagonal position, diagonal-ish position, weight)` for each `W_i`:
/// `+1` at the first position and `-weight` at the second.
const W_PATTERN: [((usize, usize), (usize, usize), f64); 6] = [
    ((0, 3), (1, 1), 2.0),
    ((0, 4), (1, 2), 1.0),
    ((0, 5), (2, 2), 2.0),
    ((1, 4), (2, 3), 1.0),
    ((1, 5), (2, 4), 1.0),
    ((3, 5), (4, 4), 2.0),
];

/// Basis `W_1..W_6` of the kernel of the Gram map.
pub fn w_basis() -> [SymMatrix; 6] {
    std::array::from_fn(|i| {
        let ((p, q), (r, s), w) = W_PATTERN[i];
        let mut m = SymMatrix::zeros(6);
        m.set(p, q, 1.0);
        m.set(r, s, -w);
        m
    })
}

/// Free positions of `W^perp` (zero-based), singleton basis matrices first.
pub const SINGLETON_POSITIONS: [(usize, usize); 9] =
    [(0, 0), (0, 1), (0, 2), (1, 3), (2, 5), (3, 3), (3, 4), (4, 5), (5, 5)];

/// Tied position pairs of `W^perp` (zero-based), in basis order after the singletons.
pub const TIED_POSITIONS: [[(usize, usize); 2]; 6] = [
    [(0, 3), (1, 1)],
    [(0, 4), (1, 2)],
    [(0, 5), (2, 2)],
    [(1, 4), (2, 3)],
    [(1, 5), (2, 4)],
    [(3, 5), (4, 4)],
];

/// Quartic monomial `(i, j, k)` whose coefficient equals `tr(V_n X)` for any
/// Gram matrix `X`, in `wperp_basis` order.
pub const WPERP_MONOMIALS: [(u8, u8, u8); 15] = [
    (4, 0, 0),
    (3, 1, 0),
    (3, 0, 1),
    (1, 3, 0),
    (1, 0, 3),
    (0, 4, 0),
    (0, 3, 1),
    (0, 1, 3),
    (0, 0, 4),
    (2, 2, 0),
    (2, 1, 1),
    (2, 0, 2),
    (1, 2, 1),
    (1, 1, 2),
    (0, 2, 2),
];

/// Canonical basis `V_1..V_15` of `W^perp`; entries are 0 or 1.
pub fn wperp_basis() -> Vec<SymMatrix> {
    let mut out = Vec::with_capacity(15);
    for &(i, j) in &SINGLETON_POSITIONS {
        let mut m = SymMatrix::zeros(6);
        m.set(i, j, 1.0);
        out.push(m);
    }
    for pair in &TIED_POSITIONS {
        let mut m = SymMatrix::zeros(6);
        for &(i, j) in pair {
            m.set(i, j, 1.0);
        }
        out.push(m);
    }
    out
}

/// Residuals of the six identities
/// `a14=a22, a15=a23, a16=a33, a25=a34, a26=a35, a46=a55` (one-based).
pub fn constraint_residual(a: &SymMatrix) -> [f64; 6] {
    [
        a.get(0, 3) - a.get(1, 1),
        a.get(0, 4) - a.get(1, 2),
        a.get(0, 5) - a.get(2, 2),
        a.get(1, 4) - a.get(2, 3),
        a.get(1, 5) - a.get(2, 4),
        a.get(3, 5) - a.get(4, 4),
    ]
}

/// `tr(E_i) / 2 == sign * constraint_residual(M M^T)[index]` for
/// `(index, sign) = E_RESIDUAL_MAP[i]`.
pub const E_RESIDUAL_MAP: [(usize, f64); 6] =
    [(0, 1.0), (2, 1.0), (1, -1.0), (3, 1.0), (4, -1.0), (5, 1.0)];

fn sym_outer(u: &[f64], w: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(u.len(), |i, j| u[i] * w[j] + w[i] * u[j])
}

/// The matrices `E_1..E_6` in `S_k` built from the six rows `a..f` of a
/// `6 x k` factor.
pub fn e_matrices(m: &FactorMatrix) -> [SymMatrix; 6] {
    assert_eq!(m.rows(), 6, "e_matrices expects a 6 x k factor");
    let [a, b, c, d, e, f] = [m.row(0), m.row(1), m.row(2), m.row(3), m.row(4), m.row(5)];
    let diff = |x: SymMatrix, y: SymMatrix| x.add_scaled(-1.0, &y).expect("same dimension");
    let out = [
        diff(sym_outer(a, d), sym_outer(b, b)),
        diff(sym_outer(a, f), sym_outer(c, c)),
        diff(sym_outer(b, c), sym_outer(e, a)),
        diff(sym_outer(b, e), sym_outer(c, d)),
        diff(sym_outer(c, e), sym_outer(b, f)),
        diff(sym_outer(d, f), sym_outer(e, e)),
    ];
    #[cfg(debug_assertions)]
    {
        let res = constraint_residual(&m.gram());
        let scale = (0..6).map(|i| crate::symkernel::dot(m.row(i), m.row(i))).fold(1.0, f64::max);
        for (ei, &(idx, sign)) in out.iter().zip(&E_RESIDUAL_MAP) {
            debug_assert!((0.5 * ei.trace() - sign * res[idx]).abs() <= 1e-9 * scale);
        }
    }
    out
}

/// Everything the SDP needs about the Gram set of one quartic.
#[derive(Debug, Clone, Serialize)]
pub struct GramFrame {
    pub a0: SymMatrix,
    #[serde(skip)]
    pub wbasis: [SymMatrix; 6],
    #[serde(skip)]
    pub vbasis: Vec<SymMatrix>,
    /// `b_i = tr(A0 V_i)`.
    pub b: Vec<f64>,
}

pub fn frame(p: &TernaryQuartic) -> GramFrame {
    let a0 = build_a0(p);
    let vbasis = wperp_basis();
    let b = vbasis.iter().map(|v| trace_inner(&a0, v).expect("dim 6")).collect();
    GramFrame { a0, wbasis: w_basis(), vbasis, b }
}

impl GramFrame {
    /// `tr(A V_i)` for all fifteen constraints.
    pub fn constraint_values(&self, a: &SymMatrix) -> Vec<f64> {
        self.vbasis.iter().map(|v| trace_inner(a, v).expect("dim 6")).collect()
    }
}
