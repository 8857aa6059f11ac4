//! Decomposition of the moment cone `C = PSD_6 ∩ W^perp` into weighted
//! rank-one moment matrices `v(x,y,z) v(x,y,z)^T`.
//!
//! The recursion follows the rank of the element:
//!
//! * rank 1: the matrix already is `v v^T`; the point is read off its entries,
//! * rank 2: a plane rotation of the factor rows turns both factor columns
//!   into (signed) moment vectors,
//! * rank 3: the E-matrices of the factor are dependent; moving along a
//!   direction orthogonal to four of them and `I_3` gives two rank-2 parts
//!   that still satisfy four identities plus one mixed identity,
//! * rank `k >= 4`: a direction orthogonal to `I_k` and all six E-matrices
//!   exists and splits the element into two cone elements of lower rank.

mod reduce;
mod rotation;
mod split;

use serde::{Deserialize, Serialize};

pub use rotation::rotation_angle;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gram::{constraint_residual, E_RESIDUAL_MAP};
use crate::quartic::monomial_vector;
use crate::symkernel::{eig_sym, factor_from_eigen, FactorMatrix, SymMatrix};

/// A matrix checked to lie in the moment cone (or, for the rank-2 step, in
/// the relaxed set described by a [`MixedConstraintSpec`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ConeElement {
    mat: SymMatrix,
}

/// Largest constraint residual allowed for `a`: `10 tau max(1, |a|)`.
fn residual_budget(a: &SymMatrix, tol: &Tolerances) -> f64 {
    tol.cone() * a.max_abs().max(1.0)
}

fn check_psd(a: &SymMatrix, tol: &Tolerances, residual: f64) -> Result<()> {
    let eig = eig_sym(a);
    let floor = -tol.cone() * eig.max().abs().max(1.0);
    if eig.min() < floor {
        return Err(Error::NotInCone { residual, min_eigenvalue: eig.min() });
    }
    Ok(())
}

impl ConeElement {
    pub fn new(mat: SymMatrix, tol: &Tolerances) -> Result<Self> {
        if mat.dim() != 6 {
            return Err(Error::DimensionMismatch { expected: 6, found: mat.dim() });
        }
        let residual = constraint_residual(&mat).iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        check_psd(&mat, tol, residual)?;
        if residual > residual_budget(&mat, tol) {
            return Err(Error::NotInCone { residual, min_eigenvalue: eig_sym(&mat).min() });
        }
        Ok(Self { mat })
    }

    /// Accepts a PSD matrix satisfying the four exact identities and the
    /// mixed identity of `spec`.
    pub fn with_mixed_constraints(mat: SymMatrix, spec: &MixedConstraintSpec, tol: &Tolerances) -> Result<Self> {
        if mat.dim() != 6 {
            return Err(Error::DimensionMismatch { expected: 6, found: mat.dim() });
        }
        let (exact, mixed) = spec.residuals(&mat);
        let residual = exact.iter().fold(mixed.abs(), |m, r| m.max(r.abs()));
        check_psd(&mat, tol, residual)?;
        if residual > residual_budget(&mat, tol) {
            return Err(Error::NotInCone { residual, min_eigenvalue: eig_sym(&mat).min() });
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.mat
    }
}

/// One weighted point of an atomic measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub rho: f64,
    pub point: [f64; 3],
}

/// `sum_i rho_i v(p_i) v(p_i)^T`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A mixed identity `mu * tr(E_p) + nu * tr(E_q) = 0` over the E-index pair
/// `pair = [p, q]` (zero-based), with the remaining four identities exact.
/// `anchor` is the variable (0 = x, 1 = y, 2 = z) whose rank-2 argument
/// tolerates this relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedConstraintSpec {
    pub mu: f64,
    pub nu: f64,
    pub pair: [usize; 2],
    pub anchor: usize,
}

impl MixedConstraintSpec {
    /// Residuals `tr(E_i)/2` of the four exact identities, and of the mixed one.
    pub fn residuals(&self, a: &SymMatrix) -> ([f64; 4], f64) {
        let res = constraint_residual(a);
        let half_trace = |i: usize| {
            let (idx, sign) = E_RESIDUAL_MAP[i];
            sign * res[idx]
        };
        let mut exact = [0.0; 4];
        let mut n = 0;
        for i in 0..6 {
            if !self.pair.contains(&i) {
                exact[n] = half_trace(i);
                n += 1;
            }
        }
        let norm = self.mu.hypot(self.nu).max(f64::MIN_POSITIVE);
        let mixed = (self.mu * half_trace(self.pair[0]) + self.nu * half_trace(self.pair[1])) / norm;
        (exact, mixed)
    }
}

fn moment_outer(p: &[f64; 3]) -> SymMatrix {
    monomial_vector(p[0], p[1], p[2]).outer()
}

/// `sum rho_i v(p_i) v(p_i)^T`.
pub fn reconstruct(measure: &AtomicMeasure) -> Result<SymMatrix> {
    let mut out = SymMatrix::zeros(6);
    for atom in &measure.atoms {
        if atom.rho < 0.0 {
            return Err(Error::NegativeWeight(atom.rho));
        }
        out = out.add_scaled(atom.rho, &moment_outer(&atom.point))?;
    }
    Ok(out)
}

/// `(rho, point)` of a rank-one cone element, `rho = 1`.
///
/// The point is read off the entries anchored at the largest of
/// `a11 = x^4`, `a44 = y^4`, `a66 = z^4`; the other two coordinates come from
/// the entries `x^3 y`, `x^3 z` (or their analogues) divided by the cube
/// of the anchor.
pub fn rank1_atom(a: &ConeElement, tol: &Tolerances) -> Result<(f64, [f64; 3])> {
    let m = a.matrix();
    let rank = crate::symkernel::numerical_rank(m, tol.rank());
    if rank != 1 {
        return Err(Error::NotRankOne { rank });
    }
    let diag = [m.get(0, 0), m.get(3, 3), m.get(5, 5)];
    let k = (0..3).max_by(|&i, &j| diag[i].total_cmp(&diag[j])).unwrap();
    let r = diag[k].max(0.0).powf(0.25);
    if r == 0.0 {
        return Err(Error::NotRankOne { rank: 0 });
    }
    let r3 = r * r * r;
    let point = match k {
        0 => [r, m.get(0, 1) / r3, m.get(0, 2) / r3],
        1 => [m.get(1, 3) / r3, r, m.get(3, 4) / r3],
        _ => [m.get(2, 5) / r3, m.get(4, 5) / r3, r],
    };
    Ok((1.0, split::normalize_sign(point)))
}

fn factor_of(a: &SymMatrix, tol: &Tolerances) -> Result<FactorMatrix> {
    factor_from_eigen(&eig_sym(a), tol.rank())
}

fn measure_from_points(points: &[[f64; 3]]) -> AtomicMeasure {
    AtomicMeasure { atoms: points.iter().map(|&point| Atom { rho: 1.0, point }).collect() }
}

/// Splits a rank-2 element into two moment matrices.
pub fn rank2_split(a: &ConeElement, spec: Option<&MixedConstraintSpec>, tol: &Tolerances) -> Result<AtomicMeasure> {
    let m = factor_of(a.matrix(), tol)?;
    if m.cols() != 2 {
        return Err(Error::NotRankTwo { rank: m.cols() });
    }
    let result = split::split_rank_two(&m, spec.map(|s| s.anchor));
    if result.error > tol.reconstruction() * a.matrix().max_abs().max(1.0) {
        return Err(Error::DegenerateConfiguration { error: result.error });
    }
    Ok(measure_from_points(&result.points))
}

/// `A = lambda B+ + (1 - lambda) B-` with both parts of rank at most 2.
#[derive(Debug, Clone)]
pub struct RankThreeSplit {
    pub b_plus: SymMatrix,
    pub lambda: f64,
    pub b_minus: SymMatrix,
    pub spec: MixedConstraintSpec,
    /// E-index (zero-based) carrying the larger weight in the mixed identity.
    pub dependent_index: usize,
    /// Deflation direction in `S_3`.
    pub f: SymMatrix,
    pub eps_plus: f64,
    pub eps_minus: f64,
}

pub fn rank3_split(a: &ConeElement, tol: &Tolerances) -> Result<RankThreeSplit> {
    let m = factor_of(a.matrix(), tol)?;
    if m.cols() != 3 {
        return Err(Error::NotRankThree { rank: m.cols() });
    }
    let first = split::rank_three_candidates(&m)?.swap_remove(0);
    Ok(RankThreeSplit {
        b_plus: first.split.plus.gram(),
        lambda: first.split.lambda,
        b_minus: first.split.minus.gram(),
        spec: first.spec,
        dependent_index: first.dependent_index,
        f: first.split.f,
        eps_plus: first.split.eps_plus,
        eps_minus: first.split.eps_minus,
    })
}

/// `A = lambda B+ + (1 - lambda) B-` with both parts in the cone and of
/// lower rank.
#[derive(Debug, Clone)]
pub struct HighRankSplit {
    pub b_plus: SymMatrix,
    pub lambda: f64,
    pub b_minus: SymMatrix,
    pub f: SymMatrix,
}

pub fn high_rank_split(a: &ConeElement, tol: &Tolerances) -> Result<HighRankSplit> {
    let m = factor_of(a.matrix(), tol)?;
    if m.cols() < 4 {
        return Err(Error::NotHighRank { rank: m.cols() });
    }
    let s = split::high_rank_factor_split(&m)?;
    Ok(HighRankSplit { b_plus: s.plus.gram(), lambda: s.lambda, b_minus: s.minus.gram(), f: s.f })
}

/// Points (unit weight) whose moment matrices sum to `M M^T`.
fn decompose_factor(m: &FactorMatrix) -> Result<Vec<[f64; 3]>> {
    match m.cols() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![split::point_from_column(&m.column(0))]),
        2 => Ok(split::split_rank_two(m, None).points.to_vec()),
        3 => {
            let target = m.gram();
            let scale = target.max_abs().max(f64::MIN_POSITIVE);
            let mut best: Option<(f64, Vec<[f64; 3]>)> = None;
            for cand in split::rank_three_candidates(m)? {
                let s = &cand.split;
                let plus = s.plus.scaled(s.lambda.sqrt());
                let minus = s.minus.scaled((1.0 - s.lambda).sqrt());
                let mut points = decompose_part(&plus, cand.spec.anchor);
                points.extend(decompose_part(&minus, cand.spec.anchor));
                let err = split::points_error(&target, &points);
                if best.as_ref().is_none_or(|b| err < b.0) {
                    best = Some((err, points));
                }
                if err <= 1e-11 * scale {
                    break;
                }
            }
            Ok(best.map(|b| b.1).unwrap_or_default())
        }
        _ => {
            let s = split::high_rank_factor_split(m)?;
            let mut points = decompose_factor(&s.plus.scaled(s.lambda.sqrt()))?;
            points.extend(decompose_factor(&s.minus.scaled((1.0 - s.lambda).sqrt()))?);
            Ok(points)
        }
    }
}

/// Endpoint of a rank-3 deflation: rank 2 (or 1 when the extreme
/// eigenvalue of the direction is repeated).
fn decompose_part(m: &FactorMatrix, anchor: usize) -> Vec<[f64; 3]> {
    match m.cols() {
        0 => Vec::new(),
        1 => vec![split::point_from_column(&m.column(0))],
        _ => split::split_rank_two(m, Some(anchor)).points.to_vec(),
    }
}

/// Scales a point so its first significant coordinate is 1.
fn presentable(rho: f64, p: [f64; 3]) -> Atom {
    let m = p.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    match p.iter().find(|v| v.abs() >= 1e-6 * m) {
        Some(&lead) if m > 0.0 => {
            let point = [p[0] / lead, p[1] / lead, p[2] / lead];
            Atom { rho: rho * lead.powi(4), point }
        }
        _ => Atom { rho, point: p },
    }
}

pub fn decompose(a: &SymMatrix) -> Result<AtomicMeasure> {
    decompose_with(a, &Tolerances::default())
}

/// Decomposes a cone element into at most 15 weighted moment matrices.
pub fn decompose_with(a: &SymMatrix, tol: &Tolerances) -> Result<AtomicMeasure> {
    let element = ConeElement::new(a.clone(), tol)?;
    let a = element.matrix();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(AtomicMeasure::default());
    }
    let m = factor_of(a, tol)?;
    let rank = m.cols();
    let points = decompose_factor(&m)?;

    let mut atoms = reduce::to_unit_atoms(&points);
    reduce::caratheodory(&mut atoms);
    reduce::merge_and_prune(&mut atoms, tol.tau * scale);
    let measure = AtomicMeasure { atoms: atoms.into_iter().map(|(rho, p)| presentable(rho, p)).collect() };

    let err = reconstruct(&measure)?.add_scaled(-1.0, a)?.max_abs();
    if err > tol.reconstruction() * scale.max(1.0) {
        let case = match rank {
            1 => "rank-1",
            2 => "rank-2",
            3 => "rank-3",
            _ => "rank>=4",
        };
        return Err(Error::DecompositionFailed { case, detail: format!("reconstruction error {err:e}") });
    }
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{numerical_rank, trace_inner};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn measure(atoms: &[(f64, [f64; 3])]) -> AtomicMeasure {
        AtomicMeasure { atoms: atoms.iter().map(|&(rho, point)| Atom { rho, point }).collect() }
    }

    fn element(atoms: &[(f64, [f64; 3])]) -> ConeElement {
        ConeElement::new(reconstruct(&measure(atoms)).unwrap(), &tol()).unwrap()
    }

    fn rel_err(a: &SymMatrix, m: &AtomicMeasure) -> f64 {
        reconstruct(m).unwrap().add_scaled(-1.0, a).unwrap().max_abs() / a.max_abs().max(1.0)
    }

    fn close(p: [f64; 3], q: [f64; 3], eps: f64) -> bool {
        let same = (0..3).all(|i| (p[i] - q[i]).abs() <= eps);
        let flipped = (0..3).all(|i| (p[i] + q[i]).abs() <= eps);
        same || flipped
    }

    #[test]
    fn rank_one_examples() {
        let (rho, p) = rank1_atom(&element(&[(1.0, [1.0, 2.0, 3.0])]), &tol()).unwrap();
        assert_eq!(rho, 1.0);
        assert!(close(p, [1.0, 2.0, 3.0], 1e-12));
        let (_, p) = rank1_atom(&element(&[(1.0, [-1.0, -2.0, -3.0])]), &tol()).unwrap();
        assert!(close(p, [1.0, 2.0, 3.0], 1e-12) && p[0] > 0.0);
        let (_, p) = rank1_atom(&element(&[(1.0, [0.0, 1.0, -2.0])]), &tol()).unwrap();
        assert!(close(p, [0.0, 1.0, -2.0], 1e-12));
        let (_, p) = rank1_atom(&element(&[(1.0, [0.0, 0.0, 1.5])]), &tol()).unwrap();
        assert!(close(p, [0.0, 0.0, 1.5], 1e-12));
    }

    #[test]
    fn rank_one_rejects_rank_two() {
        let a = element(&[(1.0, [1.0, 0.0, 0.0]), (1.0, [0.0, 1.0, 0.0])]);
        assert!(matches!(rank1_atom(&a, &tol()), Err(Error::NotRankOne { rank: 2 })));
    }

    #[test]
    fn cone_element_rejects_non_members() {
        assert!(matches!(ConeElement::new(SymMatrix::identity(6), &tol()), Err(Error::NotInCone { .. })));
        let neg = reconstruct(&measure(&[(1.0, [1.0, 1.0, 0.0])])).unwrap().scaled(-1.0);
        assert!(matches!(ConeElement::new(neg, &tol()), Err(Error::NotInCone { .. })));
    }

    #[test]
    fn rank_two_already_split() {
        let a = element(&[(1.0, [1.0, 0.0, 0.0]), (1.0, [0.0, 1.0, 0.0])]);
        let m = rank2_split(&a, None, &tol()).unwrap();
        assert_eq!(m.len(), 2);
        assert!(rel_err(a.matrix(), &m) < 1e-12);
        let found: Vec<bool> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
            .iter()
            .map(|&q| m.atoms.iter().any(|at| close(at.point, q, 1e-9)))
            .collect();
        assert_eq!(found, vec![true, true]);
    }

    #[test]
    fn rank_two_recovers_weighted_points() {
        let a = element(&[(1.0, [1.0, 1.0, 1.0]), (2.0, [1.0, -1.0, 2.0])]);
        let m = rank2_split(&a, None, &tol()).unwrap();
        assert!(rel_err(a.matrix(), &m) < 1e-10);
        // Weight 2 at (1,-1,2) shows up as the point 2^(1/4) (1,-1,2).
        let s = 2f64.powf(0.25);
        assert!(m.atoms.iter().any(|at| close(at.point, [1.0, 1.0, 1.0], 1e-8)));
        assert!(m.atoms.iter().any(|at| close(at.point, [s, -s, 2.0 * s], 1e-8)));
    }

    #[test]
    fn rank_two_with_negative_anchor_columns() {
        // Factor columns equal to -v for one atom and a rotated mixture.
        let v1 = monomial_vector(0.7, -1.1, 0.3).vec;
        let v2 = monomial_vector(-0.2, 0.9, 1.4).vec;
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let cols: Vec<Vec<f64>> = vec![
            (0..6).map(|i| -(c * v1[i] - s * v2[i])).collect(),
            (0..6).map(|i| s * v1[i] + c * v2[i]).collect(),
        ];
        let a = ConeElement::new(FactorMatrix::from_columns(6, &cols).gram(), &tol()).unwrap();
        let m = rank2_split(&a, None, &tol()).unwrap();
        assert!(rel_err(a.matrix(), &m) <= 1e-6);
    }

    #[test]
    fn rank_two_zero_x_configurations() {
        for pts in [
            [[0.0, 1.0, 2.0], [0.0, 1.0, -1.0]],
            [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
            [[1.0, 2.0, 0.0], [1.0, -1.0, 0.0]],
        ] {
            let a = element(&[(1.0, pts[0]), (1.0, pts[1])]);
            let m = rank2_split(&a, None, &tol()).unwrap();
            assert!(rel_err(a.matrix(), &m) <= 1e-10, "{pts:?}");
        }
    }

    #[test]
    fn rank_three_split_properties() {
        let mut seed = 42;
        for _ in 0..20 {
            let atoms: Vec<(f64, [f64; 3])> =
                (0..3).map(|_| (1.0, [2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed)])).collect();
            let a = element(&atoms);
            let s = rank3_split(&a, &tol()).unwrap();
            assert!(s.lambda > 0.0 && s.lambda < 1.0);
            let recon = s.b_plus.scaled(s.lambda).add_scaled(1.0 - s.lambda, &s.b_minus).unwrap();
            let scale = a.matrix().max_abs();
            assert!(recon.add_scaled(-1.0, a.matrix()).unwrap().max_abs() <= 1e-10 * scale);
            for b in [&s.b_plus, &s.b_minus] {
                assert!(numerical_rank(b, 1e-8) <= 2);
                let (exact, mixed) = s.spec.residuals(b);
                for r in exact.iter().chain(std::iter::once(&mixed)) {
                    assert!(r.abs() <= 1e-8 * scale, "{r:e}");
                }
                let part = ConeElement::with_mixed_constraints(b.clone(), &s.spec, &tol()).unwrap();
                let m = rank2_split(&part, Some(&s.spec), &tol()).unwrap();
                assert!(rel_err(b, &m) <= 1e-6);
            }
            assert!(s.f.trace().abs() <= 1e-10);
            let ieps = SymMatrix::identity(3).add_scaled(-s.eps_plus, &s.f).unwrap();
            let eig = eig_sym(&ieps);
            assert!(eig.min().abs() <= 1e-10);
            assert_eq!(numerical_rank(&ieps, 1e-8), 2);
        }
    }

    #[test]
    fn rank_three_direction_is_orthogonal_to_four_e_matrices() {
        let a = element(&[(1.0, [1.0, 0.5, -0.3]), (0.7, [-0.4, 1.2, 0.8]), (1.3, [0.2, -0.9, 1.1])]);
        let s = rank3_split(&a, &tol()).unwrap();
        let m = factor_of(a.matrix(), &tol()).unwrap();
        let es = crate::gram::e_matrices(&m);
        for i in (0..6).filter(|i| !s.spec.pair.contains(i)) {
            assert!(trace_inner(&s.f, &es[i]).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn high_rank_split_properties() {
        let mut seed = 9;
        for k in 4..=6 {
            let atoms: Vec<(f64, [f64; 3])> =
                (0..k).map(|_| (1.0, [2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed)])).collect();
            let a = element(&atoms);
            let s = high_rank_split(&a, &tol()).unwrap();
            let scale = a.matrix().max_abs();
            let recon = s.b_plus.scaled(s.lambda).add_scaled(1.0 - s.lambda, &s.b_minus).unwrap();
            assert!(recon.add_scaled(-1.0, a.matrix()).unwrap().max_abs() <= 1e-10 * scale);
            let (rp, rm) = (numerical_rank(&s.b_plus, 1e-8), numerical_rank(&s.b_minus, 1e-8));
            assert!(rp <= k - 1 && rm <= k - 1);
            assert!(rp + rm >= k);
            for b in [&s.b_plus, &s.b_minus] {
                ConeElement::new(b.clone(), &tol()).unwrap();
            }
            let m = factor_of(a.matrix(), &tol()).unwrap();
            let es = crate::gram::e_matrices(&m);
            assert!(s.f.trace().abs() <= 1e-10);
            for e in &es {
                assert!(trace_inner(&s.f, e).unwrap().abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn decompose_examples() {
        assert!(decompose(&SymMatrix::zeros(6)).unwrap().is_empty());
        let a = reconstruct(&measure(&[(5.0, [1.0, 2.0, 3.0])])).unwrap();
        let m = decompose(&a).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.atoms[0].rho - 5.0).abs() < 1e-9);
        assert!(close(m.atoms[0].point, [1.0, 2.0, 3.0], 1e-9));
        assert!(rel_err(&a, &m) <= 1e-10);
    }

    #[test]
    fn decompose_random_measures() {
        let mut seed = 2024;
        for trial in 0..60 {
            let k = 2 + trial % 5;
            let atoms: Vec<(f64, [f64; 3])> = (0..k)
                .map(|_| {
                    let rho = 1.0 + lcg(&mut seed);
                    (rho.max(1e-3), [2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed)])
                })
                .collect();
            let a = reconstruct(&measure(&atoms)).unwrap();
            let m = decompose(&a).unwrap();
            assert!(m.len() <= 16);
            assert!(m.atoms.iter().all(|at| at.rho >= 0.0));
            assert!(rel_err(&a, &m) <= 1e-6, "trial {trial}: {}", rel_err(&a, &m));
        }
    }

    #[test]
    fn reconstruct_examples() {
        assert_eq!(reconstruct(&AtomicMeasure::default()).unwrap(), SymMatrix::zeros(6));
        let r = reconstruct(&measure(&[(2.0, [1.0, 0.0, 0.0])])).unwrap();
        let mut want = SymMatrix::zeros(6);
        want.set(0, 0, 2.0);
        assert_eq!(r, want);
        let r = reconstruct(&measure(&[(0.3, [1.0, -2.0, 0.5]), (1.7, [0.2, 0.4, -3.0])])).unwrap();
        assert!(constraint_residual(&r).iter().all(|v| v.abs() < 1e-14));
        assert!(matches!(reconstruct(&measure(&[(-1.0, [1.0, 0.0, 0.0])])), Err(Error::NegativeWeight(_))));
    }

    #[test]
    fn measure_json_shape() {
        let m = measure(&[(2.0, [1.0, 2.0, 3.0])]);
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"atoms":[{"rho":2.0,"point":[1.0,2.0,3.0]}]}"#);
    }
}
