//! Post-processing of atom lists: Carathéodory reduction to at most 15
//! atoms, merging of coincident points and removal of negligible weights.

use nalgebra::DMatrix;

use crate::quartic::MONOMIALS;

/// Moment matrices `v v^T` are determined by the 15 quartic monomials of
/// the point, so any atom list spans at most 15 dimensions.
const MOMENT_DIM: usize = 15;

fn quartic_monomials(p: &[f64; 3]) -> [f64; 15] {
    std::array::from_fn(|m| {
        let (i, j, k) = MONOMIALS[m];
        p[0].powi(i as i32) * p[1].powi(j as i32) * p[2].powi(k as i32)
    })
}

fn unit(p: [f64; 3]) -> Option<[f64; 3]> {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    (n > 0.0).then(|| super::split::normalize_sign([p[0] / n, p[1] / n, p[2] / n]))
}

/// `(rho, point)` pairs rewritten with unit points, `rho` absorbing `|p|^4`.
pub(crate) fn to_unit_atoms(points: &[[f64; 3]]) -> Vec<(f64, [f64; 3])> {
    points
        .iter()
        .filter_map(|&p| {
            let n2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            unit(p).map(|u| (n2 * n2, u))
        })
        .collect()
}

/// Removes atoms along null vectors of the moment map until at most 15
/// remain; the weighted sum of moment matrices is unchanged.
pub(crate) fn caratheodory(atoms: &mut Vec<(f64, [f64; 3])>) {
    while atoms.len() > MOMENT_DIM {
        let n = MOMENT_DIM + 1;
        let mut k = DMatrix::<f64>::zeros(n, n);
        for (col, (_, p)) in atoms.iter().take(n).enumerate() {
            for (row, v) in quartic_monomials(p).iter().enumerate() {
                k[(row, col)] = *v;
            }
        }
        let svd = k.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let mut c: Vec<f64> = v_t.row(imin).iter().copied().collect();
        if c.iter().cloned().fold(f64::MIN, f64::max) <= 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        let cmax = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let (arg, t) = c
            .iter()
            .enumerate()
            .filter(|(_, &ci)| ci > 1e-12 * cmax)
            .map(|(i, &ci)| (i, atoms[i].0 / ci))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("null vector has a positive entry");
        for (i, &ci) in c.iter().enumerate() {
            atoms[i].0 = (atoms[i].0 - t * ci).max(0.0);
        }
        atoms[arg].0 = 0.0;
        atoms.retain(|a| a.0 > 0.0);
    }
}

/// Merges atoms whose unit points agree to `1e-6` and drops weights below
/// `min_weight`.
pub(crate) fn merge_and_prune(atoms: &mut Vec<(f64, [f64; 3])>, min_weight: f64) {
    let mut merged: Vec<(f64, [f64; 3])> = Vec::with_capacity(atoms.len());
    for &(rho, p) in atoms.iter() {
        match merged
            .iter_mut()
            .find(|(_, q)| (0..3).all(|i| (p[i] - q[i]).abs() <= 1e-6))
        {
            Some(slot) => slot.0 += rho,
            None => merged.push((rho, p)),
        }
    }
    merged.retain(|a| a.0 >= min_weight);
    *atoms = merged;
}
