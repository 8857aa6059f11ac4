//! Plane rotations that make two pairs of 2-vectors have equal
//! componentwise products.
//!
//! Vectors `u, v, w, y` in `R^2` are read as complex numbers
//! `alpha, beta, gamma, delta`. Rotating all four by `theta` preserves
//! `<u,v>` and `<w,y>`; the difference of the two componentwise product
//! gaps is `Re(e^{2i theta} (alpha beta - gamma delta))`, so choosing theta
//! to zero it closes both gaps when `<u,v> = <w,y>`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on the hypothesis `<u,v> = <w,y>`.
const HYPOTHESIS_TOL: f64 = 1e-8;

/// Angle in `[0, pi)` with `Re(e^{2i theta} (alpha beta - gamma delta)) = 0`.
pub fn rotation_angle(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<f64> {
    let lhs = (alpha * beta.conj()).re;
    let rhs = (gamma * delta.conj()).re;
    let scale = (alpha.norm() * beta.norm() + gamma.norm() * delta.norm()).max(1.0);
    let gap = lhs - rhs;
    if gap.abs() > HYPOTHESIS_TOL * scale {
        return Err(Error::HypothesisViolated { gap });
    }
    Ok(lemma_angle(alpha * beta - gamma * delta, scale))
}

/// `theta` in `[0, pi)` with `Re(e^{2i theta} z) = 0`; zero when `z` is
/// negligible against `scale`.
pub(crate) fn lemma_angle(z: Complex64, scale: f64) -> f64 {
    if z.norm() <= 1e-14 * scale {
        return 0.0;
    }
    let theta = 0.5 * (FRAC_PI_2 - z.arg());
    theta.rem_euclid(PI)
}

/// Rotates `(re, im)` by `theta`.
#[cfg(test)]
pub(crate) fn rotate(v: Complex64, theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta) * v
}
