//! Factor-level splitting steps. Everything here works on a full-column-rank
//! factor `M` of a cone element `A = M M^T`; rank reductions are carried out
//! on the factor so no eigenvalue thresholding happens between steps.

use num_complex::Complex64;

use super::rotation::lemma_angle;
use super::MixedConstraintSpec;
use crate::error::{Error, Result};
use crate::gram::e_matrices;
use crate::quartic::minors;
use crate::symkernel::{eig_sym, orth_complement, trace_inner, FactorMatrix, SymMatrix};

/// Rows `(alpha, beta, gamma, delta)` of the rotation step for anchors
/// `x`, `y`, `z`: the identity `<alpha,beta> = <gamma,delta>` is the
/// mixed constraint centred on that variable (`a.e = b.c`, `d.c = b.e`,
/// `f.b = e.c`).
const ANCHOR_ROWS: [[usize; 4]; 3] = [[0, 4, 1, 2], [3, 2, 1, 4], [5, 1, 4, 2]];

/// E-index pairs that may be relaxed to a single mixed condition while the
/// remaining four stay exact, with the anchor variable the rank-2 argument
/// then runs on.
pub(crate) const MIXED_PAIRS: [([usize; 2], usize); 6] =
    [([4, 5], 0), ([3, 5], 0), ([1, 4], 1), ([1, 2], 1), ([0, 3], 2), ([0, 2], 2)];

/// Point `(x, y, z)` with `v(x,y,z) = +-w`, read off the largest of the
/// square entries `w0 = x^2`, `w3 = y^2`, `w5 = z^2`.
pub(crate) fn point_from_column(w: &[f64]) -> [f64; 3] {
    let anchors = [0usize, 3, 5];
    let k = (0..3).max_by(|&i, &j| w[anchors[i]].abs().total_cmp(&w[anchors[j]].abs())).unwrap();
    let pivot = w[anchors[k]];
    if pivot == 0.0 {
        return [0.0; 3];
    }
    let sigma = pivot.signum();
    let r = (sigma * pivot).sqrt();
    let point = match k {
        0 => [r, sigma * w[1] / r, sigma * w[2] / r],
        1 => [sigma * w[1] / r, r, sigma * w[4] / r],
        _ => [sigma * w[2] / r, sigma * w[4] / r, r],
    };
    normalize_sign(point)
}

/// First coordinate that is not negligible made nonnegative.
pub(crate) fn normalize_sign(p: [f64; 3]) -> [f64; 3] {
    let m = p.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    match p.iter().find(|v| v.abs() > 1e-9 * m) {
        Some(&lead) if lead < 0.0 => [-p[0], -p[1], -p[2]],
        _ => p,
    }
}

/// Max-abs error of `A - sum_i v(p_i) v(p_i)^T`.
pub(crate) fn points_error(a: &SymMatrix, points: &[[f64; 3]]) -> f64 {
    let vs: Vec<[f64; 6]> =
        points.iter().map(|p| crate::quartic::monomial_vector(p[0], p[1], p[2]).vec).collect();
    let mut err = 0.0_f64;
    for i in 0..6 {
        for j in i..6 {
            let s: f64 = vs.iter().map(|v| v[i] * v[j]).sum();
            err = err.max((a.get(i, j) - s).abs());
        }
    }
    err
}

fn rotated_columns(m: &FactorMatrix, theta: f64) -> [Vec<f64>; 2] {
    let (s, c) = theta.sin_cos();
    let first = (0..6).map(|r| m.get(r, 0) * c - m.get(r, 1) * s).collect();
    let second = (0..6).map(|r| m.get(r, 0) * s + m.get(r, 1) * c).collect();
    [first, second]
}

fn row_complex(m: &FactorMatrix, r: usize) -> Complex64 {
    Complex64::new(m.get(r, 0), m.get(r, 1))
}

/// Angle that zeroes the six moment minors of both rotated columns in the
/// least-squares sense. Each minor of a rotated column is
/// `C + A cos(2 theta) + B sin(2 theta)`; summing over the two orthogonal
/// columns leaves `C`, which the cone identities force to zero.
fn least_squares_angle(m: &FactorMatrix) -> f64 {
    let m1: [f64; 6] = std::array::from_fn(|r| m.get(r, 0));
    let m2: [f64; 6] = std::array::from_fn(|r| m.get(r, 1));
    let plus: [f64; 6] = std::array::from_fn(|r| m1[r] + m2[r]);
    let minus: [f64; 6] = std::array::from_fn(|r| m1[r] - m2[r]);
    let (q11, q22, qp, qm) = (minors(&m1), minors(&m2), minors(&plus), minors(&minus));
    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
    for k in 0..6 {
        let a = 0.5 * (q11[k] - q22[k]);
        let b = -0.25 * (qp[k] - qm[k]);
        p += a * a;
        q += b * b;
        r += a * b;
    }
    // Smallest eigenvector of [[p, r], [r, q]] sits at right angles to the
    // principal axis.
    let phi = 0.5 * (2.0 * r).atan2(p - q) + std::f64::consts::FRAC_PI_2;
    0.5 * phi
}

#[derive(Debug, Clone)]
pub(crate) struct RankTwoSplit {
    pub points: [[f64; 3]; 2],
    pub error: f64,
}

/// Splits a rank-2 cone element `M M^T` into two moment matrices.
///
/// Candidate rotations: the rotation-angle solution for each anchor
/// variable (preferred anchor first), then the least-squares angle over all
/// six moment minors for configurations where the anchored identity leaves
/// the angle free. The candidate with the smallest reconstruction error wins.
pub(crate) fn split_rank_two(m: &FactorMatrix, preferred_anchor: Option<usize>) -> RankTwoSplit {
    debug_assert_eq!(m.cols(), 2);
    let a = m.gram();
    let row_scale = (0..6).map(|r| m.row(r).iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);

    let mut anchors = vec![0usize, 1, 2];
    if let Some(p) = preferred_anchor {
        anchors.retain(|&x| x != p);
        anchors.insert(0, p);
    }
    let mut thetas = Vec::with_capacity(4);
    for anchor in anchors {
        let [ia, ib, ig, id] = ANCHOR_ROWS[anchor];
        let z = row_complex(m, ia) * row_complex(m, ib) - row_complex(m, ig) * row_complex(m, id);
        if z.norm() > 1e-10 * row_scale {
            thetas.push(lemma_angle(z, row_scale));
        }
    }
    thetas.push(least_squares_angle(m));

    let mut best: Option<RankTwoSplit> = None;
    for theta in thetas {
        let cols = rotated_columns(m, theta);
        let points = [point_from_column(&cols[0]), point_from_column(&cols[1])];
        let error = points_error(&a, &points);
        if best.as_ref().is_none_or(|b| error < b.error) {
            best = Some(RankTwoSplit { points, error });
        }
        if error <= 1e-12 * row_scale.max(1e-300) {
            break;
        }
    }
    best.expect("at least one candidate angle")
}

/// `A = lambda M+ M+^T + (1 - lambda) M- M-^T` with `M± = M (I - eps± F)^{1/2}`.
#[derive(Debug, Clone)]
pub(crate) struct FactorSplit {
    pub plus: FactorMatrix,
    pub minus: FactorMatrix,
    pub lambda: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub f: SymMatrix,
}

/// Moves along `F` to both ends of the segment where `I - eps F` stays PSD.
/// `F` must be traceless and nonzero so its extreme eigenvalues have
/// opposite signs.
pub(crate) fn split_along(m: &FactorMatrix, f: &SymMatrix) -> Result<FactorSplit> {
    let k = f.dim();
    let eig = eig_sym(f);
    let (mu_max, mu_min) = (eig.max(), eig.min());
    if mu_max <= 0.0 || mu_min >= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "direction has one-signed spectrum ({mu_min:e}, {mu_max:e})"
        )));
    }
    let (eps_plus, eps_minus) = (1.0 / mu_max, 1.0 / mu_min);
    let half_factor = |eps: f64| -> FactorMatrix {
        let d: Vec<f64> = eig.values.iter().map(|mu| 1.0 - eps * mu).collect();
        let dmax = d.iter().fold(0.0_f64, |a, &v| a.max(v));
        let keep: Vec<usize> = (0..k).filter(|&i| d[i] > 1e-12 * dmax).collect();
        let mut t = vec![0.0; k * keep.len()];
        for (col, &i) in keep.iter().enumerate() {
            let s = d[i].sqrt();
            for row in 0..k {
                t[row * keep.len() + col] = eig.vectors[row * k + i] * s;
            }
        }
        m.mul_dense(&t, keep.len())
    };
    Ok(FactorSplit {
        plus: half_factor(eps_plus),
        minus: half_factor(eps_minus),
        lambda: -eps_minus / (eps_plus - eps_minus),
        eps_plus,
        eps_minus,
        f: f.clone(),
    })
}

/// Unit dependency `c` with `sum c_i E_i ~ 0`, and the smallest eigenvalue
/// of the Gram matrix of the `E_i` it comes from.
pub(crate) fn e_dependency(es: &[SymMatrix; 6]) -> Result<([f64; 6], f64)> {
    let g = SymMatrix::from_fn(6, |i, j| trace_inner(&es[i], &es[j]).expect("same dim"));
    let eig = eig_sym(&g);
    let smallest = eig.min();
    if smallest > 1e-8 * eig.max().max(f64::MIN_POSITIVE) {
        return Err(Error::NoDependency { eigenvalue: smallest });
    }
    let v = eig.vector(5);
    Ok((std::array::from_fn(|i| v[i]), smallest))
}

#[derive(Debug, Clone)]
pub(crate) struct RankThreeCandidate {
    pub spec: MixedConstraintSpec,
    pub dependent_index: usize,
    pub split: FactorSplit,
}

/// Rank-3 deflations, best-conditioned first. For each admissible pair the
/// direction `F` is orthogonal to `I_3` and the four E-matrices outside the
/// pair; the dependency among the `E_i` then makes both endpoints satisfy
/// the pair's mixed condition as well.
pub(crate) fn rank_three_candidates(m: &FactorMatrix) -> Result<Vec<RankThreeCandidate>> {
    debug_assert_eq!(m.cols(), 3);
    let es = e_matrices(m);
    let (c, _) = e_dependency(&es)?;
    let mut pairs: Vec<([usize; 2], usize, f64)> = MIXED_PAIRS
        .iter()
        .map(|&(pair, anchor)| (pair, anchor, c[pair[0]].hypot(c[pair[1]])))
        .filter(|&(_, _, w)| w > 1e-6)
        .collect();
    pairs.sort_by(|x, y| y.2.total_cmp(&x.2));

    let mut out = Vec::new();
    for (pair, anchor, _) in pairs {
        let mut span = vec![SymMatrix::identity(3)];
        span.extend((0..6).filter(|i| !pair.contains(i)).map(|i| es[i].clone()));
        let complement = orth_complement(&span, 3)?;
        let Some(f) = complement.into_iter().next() else { continue };
        let Ok(split) = split_along(m, &f) else { continue };
        let dependent_index = if c[pair[0]].abs() >= c[pair[1]].abs() { pair[0] } else { pair[1] };
        out.push(RankThreeCandidate {
            spec: MixedConstraintSpec { mu: c[pair[0]], nu: c[pair[1]], pair, anchor },
            dependent_index,
            split,
        });
    }
    if out.is_empty() {
        return Err(Error::DecompositionFailed {
            case: "rank-3",
            detail: "no admissible deflation direction".into(),
        });
    }
    Ok(out)
}

/// Deflation for `k >= 4`: `F` orthogonal to `I_k` and all six E-matrices,
/// so both endpoints stay in the cone.
pub(crate) fn high_rank_factor_split(m: &FactorMatrix) -> Result<FactorSplit> {
    let k = m.cols();
    debug_assert!(k >= 4);
    let es = e_matrices(m);
    let mut span = vec![SymMatrix::identity(k)];
    span.extend(es.iter().cloned());
    let f = orth_complement(&span, k)?.into_iter().next().ok_or_else(|| Error::DecompositionFailed {
        case: "rank>=4",
        detail: "empty orthogonal complement".into(),
    })?;
    split_along(m, &f)
}
