//! Infeasible-start primal-dual interior point method for small
//! block-diagonal SDPs in standard form
//!
//! ```text
//! min  sum_b <C_b, X_b>   s.t.  sum_b <A_ib, X_b> = b_i,  X_b PSD
//! max  b^T y              s.t.  S_b = C_b - sum_i y_i A_ib  PSD
//! ```
//!
//! Search directions are HKM with a Mehrotra predictor-corrector; the Schur
//! complement `M_ij = sum_b <A_ib, X_b A_jb S_b^-1>` is factored densely.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub(crate) type Mat = DMatrix<f64>;

pub(crate) struct BlockProblem {
    pub c: Vec<Mat>,
    /// `a[i][b]` is constraint `i` restricted to block `b`.
    pub a: Vec<Vec<Mat>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Converged,
    MaxIterations,
    Breakdown,
}

pub(crate) struct IpmResult {
    pub status: IpmStatus,
    pub x: Vec<Mat>,
    pub y: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `|b - A(X)| / (1 + |b|)`.
    pub primal_residual: f64,
    /// `|C - S - A^T y|_F / (1 + |C|_F)`.
    pub dual_residual: f64,
    pub iterations: usize,
}

pub(crate) struct IpmSettings {
    pub tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
}

fn inner(a: &Mat, b: &Mat) -> f64 {
    a.component_mul(b).sum()
}

fn sym(m: Mat) -> Mat {
    (&m + m.transpose()) * 0.5
}

impl BlockProblem {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn op(&self, x: &[Mat]) -> Vec<f64> {
        self.a.iter().map(|ai| ai.iter().zip(x).map(|(aib, xb)| inner(aib, xb)).sum()).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.c.iter().map(|c| Mat::zeros(c.nrows(), c.ncols())).collect();
        for (ai, &yi) in self.a.iter().zip(y) {
            for (o, aib) in out.iter_mut().zip(ai) {
                *o += aib * yi;
            }
        }
        out
    }

    fn objective(&self, x: &[Mat]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| inner(c, x)).sum()
    }
}

/// Largest step in `(0, inf]` keeping `x + alpha dx` PSD.
fn max_step(x: &Mat, dx: &Mat) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.l();
    let linv = l.clone().try_inverse()?;
    let t = sym(&linv * dx * linv.transpose());
    let lmin = SymmetricEigen::new(t).eigenvalues.min();
    Some(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

fn step_length(x: &[Mat], dx: &[Mat]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, dxb) in x.iter().zip(dx) {
        alpha = alpha.min(max_step(xb, dxb)?);
    }
    Some(alpha)
}

fn frob(ms: &[Mat]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Direction {
    dx: Vec<Mat>,
    dy: Vec<f64>,
    ds: Vec<Mat>,
}

/// Solves the HKM Newton system for the complementarity target
/// `X S = sigma mu I - corrector`.
fn direction(
    prob: &BlockProblem,
    schur: &Cholesky<f64, nalgebra::Dyn>,
    x: &[Mat],
    sinv: &[Mat],
    rp: &[f64],
    rd: &[Mat],
    target: f64,
    corrector: Option<&[Mat]>,
) -> Direction {
    // R S^-1 = sigma mu S^-1 - X - K S^-1
    let rsinv: Vec<Mat> = (0..x.len())
        .map(|b| {
            let mut m = &sinv[b] * target - &x[b];
            if let Some(k) = corrector {
                m -= &k[b] * &sinv[b];
            }
            m
        })
        .collect();
    let xrdsinv: Vec<Mat> = (0..x.len()).map(|b| &x[b] * &rd[b] * &sinv[b]).collect();
    let a_r = prob.op(&rsinv);
    let a_x = prob.op(&xrdsinv);
    let rhs = DVector::from_iterator(prob.m(), (0..prob.m()).map(|i| rp[i] - a_r[i] + a_x[i]));
    let dy = schur.solve(&rhs);
    let dy: Vec<f64> = dy.iter().copied().collect();
    let aty = prob.adjoint(&dy);
    let ds: Vec<Mat> = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
    let dx: Vec<Mat> = (0..x.len()).map(|b| sym(&rsinv[b] - &x[b] * &ds[b] * &sinv[b])).collect();
    Direction { dx, dy, ds }
}

/// Cholesky of the Schur complement, with a tiny diagonal shift when
/// degenerate iterates make it numerically singular.
fn factor_schur(schur: Mat) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let dmax = schur.diagonal().amax();
    Cholesky::new(schur.clone()).or_else(|| {
        let n = schur.nrows();
        Cholesky::new(schur + Mat::identity(n, n) * (1e-14 * dmax))
    })
}

pub(crate) fn solve(prob: &BlockProblem, settings: &IpmSettings) -> IpmResult {
    let m = prob.m();
    let n_total: usize = prob.c.iter().map(|c| c.nrows()).sum();
    let bnorm = norm(&prob.b);
    let cnorm = frob(&prob.c);

    // Starting point scaled to the data.
    let mut xi: f64 = 10f64.max((n_total as f64).sqrt());
    let mut eta: f64 = 10f64.max((n_total as f64).sqrt()).max(cnorm);
    for (i, ai) in prob.a.iter().enumerate() {
        let an = frob(ai);
        xi = xi.max((n_total as f64) * (1.0 + prob.b[i].abs()) / (1.0 + an));
        eta = eta.max(an);
    }
    let mut x: Vec<Mat> = prob.c.iter().map(|c| Mat::identity(c.nrows(), c.ncols()) * xi).collect();
    let mut s: Vec<Mat> = prob.c.iter().map(|c| Mat::identity(c.nrows(), c.ncols()) * eta).collect();
    let mut y = vec![0.0; m];

    let mut status = IpmStatus::MaxIterations;
    let mut iterations = 0;
    let summary = |x: &[Mat], y: &[f64], s: &[Mat]| {
        let ax = prob.op(x);
        let rp: Vec<f64> = (0..m).map(|i| prob.b[i] - ax[i]).collect();
        let aty = prob.adjoint(y);
        let rd: Vec<Mat> = (0..x.len()).map(|b| &prob.c[b] - &s[b] - &aty[b]).collect();
        let pobj = prob.objective(x);
        let dobj: f64 = prob.b.iter().zip(y).map(|(b, y)| b * y).sum();
        let xs: f64 = x.iter().zip(s).map(|(x, s)| inner(x, s)).sum();
        (rp, rd, pobj, dobj, xs)
    };

    loop {
        let (rp, rd, pobj, dobj, xs) = summary(&x, &y, &s);
        let pres = norm(&rp) / (1.0 + bnorm);
        let dres = frob(&rd) / (1.0 + cnorm);
        let gap = xs.abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres <= settings.tol && dres <= settings.tol && gap <= settings.gap_tol {
            status = IpmStatus::Converged;
            break;
        }
        if iterations >= settings.max_iter {
            break;
        }
        iterations += 1;
        let mu = xs / n_total as f64;

        let sinv: Option<Vec<Mat>> = s.iter().map(|sb| Cholesky::new(sb.clone()).map(|c| c.inverse())).collect();
        let Some(sinv) = sinv else {
            status = IpmStatus::Breakdown;
            break;
        };
        // Schur complement.
        let mut schur = Mat::zeros(m, m);
        let g: Vec<Vec<Mat>> = (0..m)
            .map(|j| (0..x.len()).map(|b| &x[b] * &prob.a[j][b] * &sinv[b]).collect())
            .collect();
        for i in 0..m {
            for j in i..m {
                let v: f64 = (0..x.len()).map(|b| inner(&prob.a[i][b], &g[j][b].transpose())).sum();
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let Some(chol) = factor_schur(schur) else {
            status = IpmStatus::Breakdown;
            break;
        };

        // Predictor.
        let pred = direction(prob, &chol, &x, &sinv, &rp, &rd, 0.0, None);
        let (Some(ap), Some(ad)) = (step_length(&x, &pred.dx), step_length(&s, &pred.ds)) else {
            status = IpmStatus::Breakdown;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let xs_aff: f64 = (0..x.len())
            .map(|b| inner(&(&x[b] + &pred.dx[b] * ap), &(&s[b] + &pred.ds[b] * ad)))
            .sum();
        let mu_aff = (xs_aff / n_total as f64).max(0.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let k: Vec<Mat> = (0..x.len()).map(|b| &pred.dx[b] * &pred.ds[b]).collect();
        let corr = direction(prob, &chol, &x, &sinv, &rp, &rd, sigma * mu, Some(&k));
        let (Some(ap), Some(ad)) = (step_length(&x, &corr.dx), step_length(&s, &corr.ds)) else {
            status = IpmStatus::Breakdown;
            break;
        };
        let ap = (0.95 * ap).min(1.0);
        let ad = (0.95 * ad).min(1.0);
        for b in 0..x.len() {
            x[b] += &corr.dx[b] * ap;
            s[b] += &corr.ds[b] * ad;
            x[b] = sym(x[b].clone());
            s[b] = sym(s[b].clone());
        }
        for (yi, d) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * d;
        }
    }

    let (rp, rd, pobj, dobj, _) = summary(&x, &y, &s);
    IpmResult {
        status,
        primal_residual: norm(&rp) / (1.0 + bnorm),
        dual_residual: frob(&rd) / (1.0 + cnorm),
        primal_obj: pobj,
        dual_obj: dobj,
        x,
        y,
        iterations,
    }
}
