//! Dense SDP over `S_6` with the fifteen Gram constraints `tr(V_i A) = b_i`.
//!
//! Feasibility is decided by a shifted phase-1 problem whose dual yields an
//! infeasibility certificate `C in PSD_6 ∩ W^perp` with `tr(A0 C) < 0`. The
//! low-rank search minimizes random positive definite objectives over the
//! Gram spectrahedron.

mod ipm;
mod polish;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::decompose_with;
use crate::config::{Tolerances, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::gram::{frame, GramFrame};
use crate::quartic::TernaryQuartic;
use crate::symkernel::{eig_sym, trace_inner, SymMatrix};

use ipm::{BlockProblem, IpmSettings, IpmStatus, Mat};

/// Relative duality gap targeted by the interior point iterations.
const IPM_GAP_TOL: f64 = 1e-10;

/// Accepted `sigma_4 / sigma_1` of a low-rank Gram matrix.
pub const RANK_RATIO_TOL: f64 = 1e-6;

/// Raw `sigma_4 / sigma_1` below which an interior point optimum is treated
/// as numerically rank three and refined onto an exact rank-3 factor.
const POLISH_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TAU, max_iter: 100, trials: 20, seed: 0 }
    }
}

impl SdpOptions {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances::new(self.tol)
    }

    fn settings(&self) -> IpmSettings {
        IpmSettings { tol: self.tol.min(1e-10), gap_tol: IPM_GAP_TOL, max_iter: self.max_iter }
    }
}

/// `min tr(C A)` subject to `A PSD` and `tr(A V_i) = b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub objective: SymMatrix,
    pub constraints: Vec<SymMatrix>,
    pub rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(objective: SymMatrix, constraints: Vec<SymMatrix>, rhs: Vec<f64>) -> Result<Self> {
        let n = objective.dim();
        if constraints.len() != rhs.len() {
            return Err(Error::DimensionMismatch { expected: constraints.len(), found: rhs.len() });
        }
        if let Some(bad) = constraints.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        let m = constraints.len();
        let g = DMatrix::from_fn(m, m, |i, j| trace_inner(&constraints[i], &constraints[j]).unwrap());
        let eig = SymmetricEigen::new(g).eigenvalues;
        if m > 0 && eig.min() <= 1e-12 * eig.max() {
            return Err(Error::InvalidInput("constraint matrices are linearly dependent".into()));
        }
        Ok(Self { objective, constraints, rhs })
    }

    /// The Gram problem of `p` with objective `c`.
    pub fn for_quartic(p: &TernaryQuartic, objective: SymMatrix) -> Self {
        let f = frame(p);
        Self { objective, constraints: f.vbasis, rhs: f.b }
    }

    fn from_frame(f: &GramFrame, objective: SymMatrix) -> Self {
        Self { objective, constraints: f.vbasis.clone(), rhs: f.b.clone() }
    }

    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn constraint_values(&self, a: &SymMatrix) -> Vec<f64> {
        self.constraints.iter().map(|v| trace_inner(a, v).unwrap()).collect()
    }

    fn rhs_scale(&self) -> f64 {
        self.rhs.iter().fold(1.0_f64, |m, b| m.max(b.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal: Option<SymMatrix>,
    pub dual: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Whether the interior point iterations met their own stopping rule
    /// (as opposed to stalling on a degenerate face).
    pub converged: bool,
    /// Optimal shift of the feasibility problem; non-positive when feasible.
    pub phase1_shift: f64,
    pub certificate: Option<InfeasibilityCertificate>,
}

/// `cert = sum y_i V_i` with `tr(cert) = 1`, PSD, and
/// `violation = tr(A0 cert) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub y: Vec<f64>,
    pub cert: SymMatrix,
    pub violation: f64,
}

fn to_mat(a: &SymMatrix) -> Mat {
    let n = a.dim();
    Mat::from_fn(n, n, |i, j| a.get(i, j))
}

fn from_mat(m: &Mat) -> SymMatrix {
    SymMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn combination(basis: &[SymMatrix], y: &[f64]) -> SymMatrix {
    let mut out = SymMatrix::zeros(basis[0].dim());
    for (v, &c) in basis.iter().zip(y) {
        out = out.add_scaled(c, v).unwrap();
    }
    out
}

/// Least-norm correction of `a` onto the affine set `tr(A V_i) = b_i`.
fn project(prob: &SdpProblem, a: &SymMatrix) -> SymMatrix {
    let m = prob.constraints.len();
    let g = DMatrix::from_fn(m, m, |i, j| trace_inner(&prob.constraints[i], &prob.constraints[j]).unwrap());
    let vals = prob.constraint_values(a);
    let r = nalgebra::DVector::from_iterator(m, (0..m).map(|i| prob.rhs[i] - vals[i]));
    match g.cholesky() {
        Some(ch) => {
            let c = ch.solve(&r);
            a.add_scaled(1.0, &combination(&prob.constraints, c.as_slice())).unwrap()
        }
        None => a.clone(),
    }
}

struct PhaseOne {
    shift: f64,
    /// `Z - t I`, satisfying the constraints.
    point: SymMatrix,
    certificate: Option<InfeasibilityCertificate>,
    primal_residual: f64,
    iterations: usize,
}

/// `min t` over `tr(V_i (Z - t I)) = b_i`, `Z PSD`, written with
/// `t = s - T0`, `s >= 0`.
fn phase_one(prob: &SdpProblem, opts: &SdpOptions) -> PhaseOne {
    let n = prob.dim();
    let t0 = prob.rhs_scale();
    let traces: Vec<f64> = prob.constraints.iter().map(SymMatrix::trace).collect();
    let block = BlockProblem {
        c: vec![Mat::zeros(n, n), Mat::from_element(1, 1, 1.0)],
        a: prob
            .constraints
            .iter()
            .zip(&traces)
            .map(|(v, &tr)| vec![to_mat(v), Mat::from_element(1, 1, -tr)])
            .collect(),
        b: prob.rhs.iter().zip(&traces).map(|(b, tr)| b - t0 * tr).collect(),
    };
    let r = ipm::solve(&block, &opts.settings());
    let s = r.x[1][(0, 0)];
    let shift = s - t0;
    let z = from_mat(&r.x[0]);
    let point = project(prob, &z.add_scaled(-shift, &SymMatrix::identity(n)).unwrap());

    let certificate = if shift > 0.0 {
        let raw = combination(&prob.constraints, &r.y).scaled(-1.0);
        let tr = raw.trace();
        (tr > 0.0).then(|| {
            let y: Vec<f64> = r.y.iter().map(|v| -v / tr).collect();
            let cert = combination(&prob.constraints, &y);
            let violation = y.iter().zip(&prob.rhs).map(|(a, b)| a * b).sum();
            InfeasibilityCertificate { y, cert, violation }
        })
    } else {
        None
    };
    PhaseOne { shift, point, certificate, primal_residual: r.primal_residual, iterations: r.iterations }
}

fn certificate_is_valid(cert: &InfeasibilityCertificate, tau: f64) -> bool {
    eig_sym(&cert.cert).min() >= -tau && cert.violation <= -tau
}

pub fn solve(prob: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let tau = opts.tol;
    let scale = prob.rhs_scale();
    let p1 = phase_one(prob, opts);
    let failure = |iterations, phase1_shift| SdpSolution {
        status: SdpStatus::NumericalFailure,
        primal: None,
        dual: vec![0.0; prob.rhs.len()],
        objective: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        iterations,
        converged: false,
        phase1_shift,
        certificate: None,
    };
    if p1.shift > tau * scale {
        return match p1.certificate {
            Some(cert) if certificate_is_valid(&cert, tau) => SdpSolution {
                status: SdpStatus::Infeasible,
                primal: None,
                dual: cert.y.clone(),
                objective: f64::INFINITY,
                primal_residual: f64::NAN,
                dual_residual: f64::NAN,
                gap: f64::NAN,
                iterations: p1.iterations,
                converged: true,
                phase1_shift: p1.shift,
                certificate: Some(cert),
            },
            _ => failure(p1.iterations, p1.shift),
        };
    }
    if p1.primal_residual > tau {
        return failure(p1.iterations, p1.shift);
    }

    let block = BlockProblem {
        c: vec![to_mat(&prob.objective)],
        a: prob.constraints.iter().map(|v| vec![to_mat(v)]).collect(),
        b: prob.rhs.clone(),
    };
    let r = ipm::solve(&block, &opts.settings());
    let primal = from_mat(&r.x[0]);
    let objective = trace_inner(&prob.objective, &primal).unwrap();
    let vals = prob.constraint_values(&primal);
    let feasible = vals.iter().zip(&prob.rhs).all(|(v, b)| (v - b).abs() <= tau * b.abs().max(1.0));
    let psd = eig_sym(&primal).min() >= -tau * primal.max_abs().max(1.0);
    let gap_abs = (r.primal_obj - r.dual_obj).abs();
    let optimal = feasible && psd && gap_abs <= tau * (1.0 + objective.abs());
    SdpSolution {
        status: if optimal { SdpStatus::Optimal } else { SdpStatus::NumericalFailure },
        primal: optimal.then_some(primal),
        dual: r.y,
        objective,
        primal_residual: r.primal_residual,
        dual_residual: r.dual_residual,
        gap: gap_abs,
        iterations: r.iterations,
        converged: r.status == IpmStatus::Converged,
        phase1_shift: p1.shift,
        certificate: None,
    }
}

/// Outcome of the feasibility problem for one quartic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GramResult {
    Gram(SymMatrix),
    Certificate(InfeasibilityCertificate),
}

fn normalized(p: &TernaryQuartic) -> (TernaryQuartic, f64) {
    let s = p.max_abs();
    if s == 0.0 {
        (*p, 1.0)
    } else {
        (p.scaled(1.0 / s), s)
    }
}

fn rescale_certificate(mut c: InfeasibilityCertificate, s: f64) -> InfeasibilityCertificate {
    c.violation *= s;
    c
}

/// A PSD Gram matrix of the normalized quartic, cleaned up so that it is
/// PSD and satisfies the constraints to rounding.
fn clean_gram(f: &GramFrame, a: &SymMatrix, tau: f64) -> Option<SymMatrix> {
    let eig = eig_sym(a);
    let prob = SdpProblem::from_frame(f, SymMatrix::zeros(6));
    let residual = |m: &SymMatrix| {
        prob.constraint_values(m).iter().zip(&f.b).fold(0.0_f64, |acc, (v, b)| acc.max((v - b).abs()))
    };
    if eig.min() >= 0.0 && residual(a) <= 1e-12 {
        return Some(a.clone());
    }
    // Near the boundary: refine a factor of each plausible rank.
    let top = eig.max().max(f64::MIN_POSITIVE);
    let mut ranks: Vec<usize> = [1e-3, 1e-6, 1e-9]
        .iter()
        .map(|&t| eig.values.iter().filter(|&&v| v > t * top).count())
        .collect();
    ranks.push(6);
    ranks.dedup();
    for r in ranks {
        if let Some(g) = polish::polish(&eig, r, &f.vbasis, &f.b) {
            return Some(g);
        }
    }
    (eig.min() >= -tau * top && residual(a) <= tau).then(|| a.clone())
}

/// A PSD Gram matrix of `p`, or a certificate that none exists.
pub fn find_gram(p: &TernaryQuartic, opts: &SdpOptions) -> Result<GramResult> {
    let (q, s) = normalized(p);
    if q.is_zero() {
        return Ok(GramResult::Gram(SymMatrix::zeros(6)));
    }
    let f = frame(&q);
    let prob = SdpProblem::from_frame(&f, SymMatrix::zeros(6));
    let p1 = phase_one(&prob, opts);
    if p1.shift > opts.tol {
        return match p1.certificate {
            Some(c) if certificate_is_valid(&c, opts.tol) => Ok(GramResult::Certificate(rescale_certificate(c, s))),
            _ => Err(Error::NumericalFailure(format!("phase-1 shift {:e} without a valid certificate", p1.shift))),
        };
    }
    match clean_gram(&f, &p1.point, opts.tol) {
        Some(a) => Ok(GramResult::Gram(a.scaled(s))),
        None => Err(Error::NumericalFailure(format!("phase-1 point not PSD (shift {:e})", p1.shift))),
    }
}

/// One random objective of the low-rank search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub status: SdpStatus,
    /// `sigma_4 / sigma_1` of the interior point optimum.
    pub raw_ratio: Option<f64>,
    /// `sigma_4 / sigma_1` of the refined matrix.
    pub rank_ratio: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rank3Outcome {
    Found { gram: SymMatrix, rank_ratio: f64, trials: Vec<TrialRecord> },
    Exhausted { trials: Vec<TrialRecord> },
}

impl Rank3Outcome {
    pub fn gram(&self) -> Option<&SymMatrix> {
        match self {
            Self::Found { gram, .. } => Some(gram),
            Self::Exhausted { .. } => None,
        }
    }

    pub fn trials(&self) -> &[TrialRecord] {
        match self {
            Self::Found { trials, .. } | Self::Exhausted { trials } => trials,
        }
    }
}

/// `sigma_4 / sigma_1`, zero for the zero matrix.
pub fn rank_ratio(a: &SymMatrix) -> f64 {
    let eig = eig_sym(a);
    let top = eig.values[0];
    if top <= 0.0 {
        return 0.0;
    }
    eig.values.get(3).map_or(0.0, |v| v.max(0.0) / top)
}

/// Objective `G^T G + 1e-3 I` for trial `trial`; stream `trial` of the
/// ChaCha8 generator seeded with `seed`.
pub fn random_objective(seed: u64, trial: usize) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let g: Vec<f64> = (0..36).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_fn(6, |i, j| {
        let gtg: f64 = (0..6).map(|k| g[k * 6 + i] * g[k * 6 + j]).sum();
        gtg + if i == j { 1e-3 } else { 0.0 }
    })
}

/// Searches for a Gram matrix of rank at most three by minimizing random
/// positive definite objectives.
pub fn find_rank3(p: &TernaryQuartic, trials: usize, seed: u64) -> Result<Rank3Outcome> {
    find_rank3_with(p, &SdpOptions { trials, seed, ..SdpOptions::default() })
}

pub fn find_rank3_with(p: &TernaryQuartic, opts: &SdpOptions) -> Result<Rank3Outcome> {
    if opts.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let (q, s) = normalized(p);
    if q.is_zero() {
        return Ok(Rank3Outcome::Found { gram: SymMatrix::zeros(6), rank_ratio: 0.0, trials: Vec::new() });
    }
    let f = frame(&q);
    let feas = SdpProblem::from_frame(&f, SymMatrix::zeros(6));
    let p1 = phase_one(&feas, opts);
    if p1.shift > opts.tol {
        return match p1.certificate {
            Some(c) if certificate_is_valid(&c, opts.tol) => {
                Err(Error::InfeasibleInput(Box::new(rescale_certificate(c, s))))
            }
            _ => Err(Error::NumericalFailure(format!("phase-1 shift {:e} without a valid certificate", p1.shift))),
        };
    }

    let mut records = Vec::with_capacity(opts.trials);
    for trial in 0..opts.trials {
        let prob = SdpProblem::from_frame(&f, random_objective(opts.seed, trial));
        let sol = solve(&prob, opts);
        let mut rec =
            TrialRecord { trial, status: sol.status, raw_ratio: None, rank_ratio: None, accepted: false };
        let found = sol.primal.as_ref().and_then(|a| {
            let eig = eig_sym(a);
            let top = eig.max();
            let raw = if top > 0.0 { eig.values[3].max(0.0) / top } else { 0.0 };
            rec.raw_ratio = Some(raw);
            if raw > POLISH_RATIO {
                return None;
            }
            let r = eig.values.iter().filter(|&&v| v > POLISH_RATIO * top).count();
            (r..=3).find_map(|r| polish::polish(&eig, r, &f.vbasis, &f.b)).or_else(|| {
                (raw <= RANK_RATIO_TOL).then(|| a.clone())
            })
        });
        if let Some(g) = found {
            let ratio = rank_ratio(&g);
            rec.rank_ratio = Some(ratio);
            rec.accepted = ratio <= RANK_RATIO_TOL;
            records.push(rec.clone());
            if rec.accepted {
                return Ok(Rank3Outcome::Found { gram: g.scaled(s), rank_ratio: ratio, trials: records });
            }
        } else {
            records.push(rec);
        }
    }
    Ok(Rank3Outcome::Exhausted { trials: records })
}

/// A point where `p` is negative, read off the decomposition of the
/// certificate into moment matrices.
pub fn negativity_witness(cert: &InfeasibilityCertificate, p: &TernaryQuartic) -> Result<[f64; 3]> {
    negativity_witness_with(cert, p, &Tolerances::default())
}

pub fn negativity_witness_with(cert: &InfeasibilityCertificate, p: &TernaryQuartic, tol: &Tolerances) -> Result<[f64; 3]> {
    if !(cert.violation < 0.0) {
        return Err(Error::InvalidInput(format!("certificate violation {} is not negative", cert.violation)));
    }
    let measure = decompose_with(&cert.cert, tol)?;
    let best = measure
        .atoms
        .iter()
        .map(|a| (a.rho * p.evaluate(a.point[0], a.point[1], a.point[2]), a.point))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((v, pt)) if v < 0.0 => {
            let n = (pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]).sqrt();
            Ok([pt[0] / n, pt[1] / n, pt[2] / n])
        }
        _ => Err(Error::WitnessNotFound { violation: cert.violation }),
    }
}
