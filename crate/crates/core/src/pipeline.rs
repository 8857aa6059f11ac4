//! From a quartic to a sum-of-squares certificate or a point where it is
//! negative, plus independent verification of certificates.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::quartic::{expand_squares, gram_to_quartic, QuadraticForm, TernaryQuartic};
use crate::sdp::{
    find_gram, find_rank3_with, negativity_witness_with, rank_ratio, GramResult, InfeasibilityCertificate,
    Rank3Outcome, SdpOptions, TrialRecord,
};
use crate::symkernel::{eig_sym, psd_factor, SymMatrix};

/// `p = sum q_i^2` together with the Gram matrix it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosCertificate {
    pub squares: Vec<QuadraticForm>,
    pub gram: SymMatrix,
    /// Largest coefficient gap between `sum q_i^2` and the target.
    pub residual: f64,
    /// `sigma_4 / sigma_1` of `gram`.
    pub rank_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sos(usize),
    NotNonnegative([f64; 3]),
}

/// Which rung of the search produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchPath {
    /// The zero polynomial.
    Trivial,
    /// A random objective produced a Gram matrix of rank at most three.
    Rank3,
    /// The rank search ran out of trials; any PSD Gram matrix was used.
    Feasibility,
    /// The Gram set has no PSD point.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: [f64; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub path: SearchPath,
    /// `|p|_inf`; the search runs on `p / scale`.
    pub scale: f64,
    pub trials: Vec<TrialRecord>,
    /// `tr(A0 C)` of the infeasibility certificate, when one was used.
    pub violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub certificate: Option<SosCertificate>,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    /// Worst coefficient gap over both checks.
    pub gap: f64,
    /// `max |coeff(sum q_i^2) - coeff(p)|`.
    pub squares_gap: f64,
    /// `max |coeff(v^T G v) - coeff(p)|`.
    pub gram_gap: f64,
    pub gram_min_eigenvalue: f64,
    pub gram_psd: bool,
}

/// Sorts by descending norm and makes the leading coefficient positive.
fn canonicalize(squares: &mut [QuadraticForm]) {
    for q in squares.iter_mut() {
        let n = q.norm();
        if let Some(&lead) = q.q.iter().find(|c| c.abs() > 1e-12 * n) {
            if lead < 0.0 {
                q.q.iter_mut().for_each(|c| *c = -*c);
            }
        }
    }
    squares.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
}

pub fn squares_from_gram(a: &SymMatrix) -> Result<Vec<QuadraticForm>> {
    squares_from_gram_with(a, &Tolerances::default())
}

/// One square per column of the PSD factor of `a`.
pub fn squares_from_gram_with(a: &SymMatrix, tol: &Tolerances) -> Result<Vec<QuadraticForm>> {
    if a.dim() != 6 {
        return Err(Error::DimensionMismatch { expected: 6, found: a.dim() });
    }
    let f = psd_factor(a, tol.rank())?;
    let mut squares: Vec<QuadraticForm> =
        f.columns().into_iter().map(|c| QuadraticForm::new(std::array::from_fn(|i| c[i]))).collect();
    canonicalize(&mut squares);
    Ok(squares)
}

fn certificate(p: &TernaryQuartic, gram: SymMatrix, tol: &Tolerances) -> Result<SosCertificate> {
    let squares = squares_from_gram_with(&gram, tol)?;
    let residual = expand_squares(&squares).max_abs_diff(p);
    let bound = tol.reconstruction() * p.max_abs().max(1.0);
    if residual > bound {
        return Err(Error::NumericalFailure(format!("certificate residual {residual:e} exceeds {bound:e}")));
    }
    Ok(SosCertificate { rank_ratio: rank_ratio(&gram), squares, gram, residual })
}

fn witness_report(
    p: &TernaryQuartic,
    q: &TernaryQuartic,
    cert: &InfeasibilityCertificate,
    diagnostics: Diagnostics,
    tol: &Tolerances,
) -> Result<AnalysisReport> {
    let point = negativity_witness_with(cert, q, tol)?;
    let value = p.evaluate(point[0], point[1], point[2]);
    if !(value < 0.0) {
        return Err(Error::WitnessNotFound { violation: cert.violation });
    }
    Ok(AnalysisReport {
        verdict: Verdict::NotNonnegative(point),
        certificate: None,
        witness: Some(Witness { point, value }),
        diagnostics: Diagnostics { violation: Some(cert.violation), ..diagnostics },
    })
}

/// Tries for three squares first, falls back to any PSD Gram matrix, and
/// turns infeasibility into a negativity witness.
pub fn sos_representation(p: &TernaryQuartic, opts: &SdpOptions) -> Result<AnalysisReport> {
    let tol = opts.tolerances();
    let scale = p.max_abs();
    if scale == 0.0 {
        return Ok(AnalysisReport {
            verdict: Verdict::Sos(0),
            certificate: Some(SosCertificate {
                squares: Vec::new(),
                gram: SymMatrix::zeros(6),
                residual: 0.0,
                rank_ratio: 0.0,
            }),
            witness: None,
            diagnostics: Diagnostics { path: SearchPath::Trivial, scale, trials: Vec::new(), violation: None },
        });
    }
    let q = p.scaled(1.0 / scale);
    let mut diagnostics = Diagnostics { path: SearchPath::Rank3, scale, trials: Vec::new(), violation: None };

    let gram = match find_rank3_with(&q, opts) {
        Ok(Rank3Outcome::Found { gram, trials, .. }) => {
            diagnostics.trials = trials;
            gram
        }
        Ok(Rank3Outcome::Exhausted { trials }) => {
            diagnostics.trials = trials;
            diagnostics.path = SearchPath::Feasibility;
            match find_gram(&q, opts)? {
                GramResult::Gram(g) => g,
                GramResult::Certificate(c) => {
                    diagnostics.path = SearchPath::Infeasible;
                    return witness_report(p, &q, &c, diagnostics, &tol);
                }
            }
        }
        Err(Error::InfeasibleInput(c)) => {
            diagnostics.path = SearchPath::Infeasible;
            return witness_report(p, &q, &c, diagnostics, &tol);
        }
        Err(e) => return Err(e),
    };

    let cert = certificate(p, gram.scaled(scale), &tol)?;
    Ok(AnalysisReport {
        verdict: Verdict::Sos(cert.squares.len()),
        certificate: Some(cert),
        witness: None,
        diagnostics,
    })
}

/// Rechecks a certificate against `p` from scratch: the squares, the Gram
/// expansion and positive semidefiniteness of the Gram matrix.
pub fn verify(p: &TernaryQuartic, cert: &SosCertificate, tol: f64) -> VerifyReport {
    let bound = tol * p.max_abs().max(1.0);
    let squares_gap = expand_squares(&cert.squares).max_abs_diff(p);
    let (gram_gap, gram_min_eigenvalue) = if cert.gram.dim() == 6 {
        (gram_to_quartic(&cert.gram).max_abs_diff(p), eig_sym(&cert.gram).min())
    } else {
        (f64::INFINITY, f64::NEG_INFINITY)
    };
    let gram_psd = gram_min_eigenvalue >= -tol * cert.gram.max_abs().max(1.0);
    let gap = squares_gap.max(gram_gap);
    VerifyReport {
        pass: gap <= bound && gram_psd,
        gap,
        squares_gap,
        gram_gap,
        gram_min_eigenvalue,
        gram_psd,
    }
}
