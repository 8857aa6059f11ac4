//! Numerical tolerances shared by every module.
//!
//! Everything derives from a single base value `tau`: rank decisions use
//! `tau` directly, cone membership is checked at `10 * tau`, and
//! reconstructions are accepted at the fixed `1e-6` relative level.

use serde::{Deserialize, Serialize};

/// Base tolerance used when nothing else is specified.
pub const DEFAULT_TAU: f64 = 1e-8;

/// Relative acceptance level for reconstructed matrices and certificates.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU }
    }
}

impl Tolerances {
    pub fn new(tau: f64) -> Self {
        Self { tau }
    }

    /// Relative eigenvalue threshold for numerical rank.
    pub fn rank(&self) -> f64 {
        self.tau
    }

    /// Relative residual allowed for membership in the moment cone.
    pub fn cone(&self) -> f64 {
        10.0 * self.tau
    }

    pub fn reconstruction(&self) -> f64 {
        RECONSTRUCTION_TOL
    }
}
