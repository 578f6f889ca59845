//! High-accuracy baseline solutions used as oracles for equilibrium
//! residuals, errors, and settling-time measurement.
//!
//! Both solvers are deliberately from a different algorithm family than the
//! flow machinery: the fused-lasso reference is an ADMM splitting with a
//! cached factorization, the QP reference is an operator-splitting solver
//! with an active-set polish step. Correctness is defined by the returned
//! residual, not the method.

use nalgebra::{DMatrix, DVector};

use crate::error::{FtError, Result};
use crate::flows::ConstrainedProblem;
use crate::linalg::dot;
use crate::proximal::soft_threshold;

/// Default reference tolerance, two orders below all acceptance tolerances.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Concrete fused-lasso data: minimize ½‖Ex − q‖² + ‖Tx‖₁.
#[derive(Debug, Clone)]
pub struct FusedLasso {
    pub e: DMatrix<f64>,
    pub q: DVector<f64>,
    pub t: DMatrix<f64>,
}

/// Primal-dual solution of a composite problem with its optimality
/// residual. `y_star` is the multiplier for g(Tx); at the proximal
/// augmented Lagrangian saddle point it satisfies
/// y* = ∇M_{μg}(Tx* + μy*) for every μ > 0.
#[derive(Debug, Clone)]
pub struct CompositeSolution {
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Optimality residual of the composite problem at (x, y):
/// max(‖EᵀEx − Eᵀq + Tᵀy‖∞, ‖Tx − soft(Tx + y, 1)‖∞).
///
/// The second term is the fixed-point form of y ∈ ∂‖·‖₁(Tx).
pub fn composite_residual(fl: &FusedLasso, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let grad = fl.e.transpose() * (&fl.e * x - &fl.q) + fl.t.transpose() * y;
    let tx = &fl.t * x;
    let mut r = grad.amax();
    for i in 0..tx.len() {
        let fp = tx[i] - soft_threshold(tx[i] + y[i], 1.0);
        r = r.max(fp.abs());
    }
    r
}

/// Solves the fused lasso by ADMM on the splitting Tx = z with a cached
/// Cholesky factor of EᵀE + ρTᵀT.
pub fn solve_fused_lasso(fl: &FusedLasso, tol: f64) -> Result<CompositeSolution> {
    let n = fl.e.ncols();
    let d = fl.t.nrows();
    if fl.e.nrows() != fl.q.len() || fl.t.ncols() != n {
        return Err(FtError::DimensionMismatch { expected: n, got: fl.t.ncols() });
    }
    let rho = 1.0;
    let ete = fl.e.transpose() * &fl.e;
    let ttt = fl.t.transpose() * &fl.t;
    let lhs = &ete + &ttt * rho;
    let chol = nalgebra::Cholesky::new(lhs)
        .ok_or_else(|| FtError::Degenerate("EᵀE + ρTᵀT is not positive definite".into()))?;
    let etq = fl.e.transpose() * &fl.q;

    let mut x;
    let mut z = DVector::zeros(d);
    let mut u = DVector::zeros(d);
    let max_iter = 500_000;
    let mut best_res = f64::INFINITY;
    for it in 0..max_iter {
        let rhs = &etq + fl.t.transpose() * ((&z - &u) * rho);
        x = chol.solve(&rhs);
        let tx = &fl.t * &x;
        let w = &tx + &u;
        for i in 0..d {
            z[i] = soft_threshold(w[i], 1.0 / rho);
        }
        u += &tx - &z;

        if it % 25 == 0 {
            let y = &u * rho;
            let res = composite_residual(fl, &x, &y);
            best_res = best_res.min(res);
            if res <= tol {
                return Ok(CompositeSolution {
                    x_star: x.as_slice().to_vec(),
                    y_star: y.as_slice().to_vec(),
                    residual: res,
                    iterations: it + 1,
                });
            }
        }
    }
    Err(FtError::NonConvergence { residual: best_res, iterations: max_iter })
}

/// Concrete constrained-QP data: minimize xᵀQx + qᵀx s.t. Cx = d, Ax ≤ b.
#[derive(Debug, Clone)]
pub struct QpInstance {
    pub q_mat: DMatrix<f64>,
    pub q_lin: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
}

/// A KKT point with its residual.
#[derive(Debug, Clone)]
pub struct KKTResult {
    pub x_star: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
    pub eq_multipliers: Vec<f64>,
    pub residual: f64,
}

impl QpInstance {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.q_mat.nrows(), self.c.nrows(), self.a.nrows())
    }

    /// Gradient of the objective: 2Qx + q.
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q_mat * x * 2.0 + &self.q_lin
    }
}

/// KKT residual at (x, y, ν): the maximum of stationarity, primal
/// feasibility (both kinds), dual feasibility, and complementarity, all in
/// the ∞-norm.
pub fn kkt_residual(
    problem: &ConstrainedProblem<f64>,
    x: &[f64],
    y_ineq: &[f64],
    nu_eq: &[f64],
) -> Result<f64> {
    let n = problem.primal_dim();
    if x.len() != n {
        return Err(FtError::DimensionMismatch { expected: n, got: x.len() });
    }
    if y_ineq.len() != problem.ineq_count() {
        return Err(FtError::DimensionMismatch {
            expected: problem.ineq_count(),
            got: y_ineq.len(),
        });
    }
    if nu_eq.len() != problem.eq_count() {
        return Err(FtError::DimensionMismatch { expected: problem.eq_count(), got: nu_eq.len() });
    }
    let mut stationarity = (problem.f_grad)(x);
    for (i, &yi) in y_ineq.iter().enumerate() {
        for (s, &aij) in stationarity.iter_mut().zip(problem.a.row(i)) {
            *s += yi * aij;
        }
    }
    if let Some(c) = &problem.c_eq {
        for (i, &nui) in nu_eq.iter().enumerate() {
            for (s, &cij) in stationarity.iter_mut().zip(c.row(i)) {
                *s += nui * cij;
            }
        }
    }
    let mut r = stationarity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, &yi) in y_ineq.iter().enumerate() {
        let slack = dot(problem.a.row(i), x) - problem.b[i];
        r = r.max(slack.max(0.0));
        r = r.max((-yi).max(0.0));
        r = r.max((yi * slack).abs());
    }
    if let (Some(c), Some(d)) = (&problem.c_eq, &problem.d_eq) {
        for i in 0..c.rows() {
            r = r.max((dot(c.row(i), x) - d[i]).abs());
        }
    }
    Ok(r)
}

/// KKT residual evaluated on concrete QP data.
fn qp_kkt_residual(qp: &QpInstance, x: &DVector<f64>, y: &DVector<f64>, nu: &DVector<f64>) -> f64 {
    let stationarity = qp.grad(x) + qp.a.transpose() * y + qp.c.transpose() * nu;
    let mut r = stationarity.amax();
    let ax = &qp.a * x;
    for i in 0..qp.a.nrows() {
        let slack = ax[i] - qp.b[i];
        r = r.max(slack.max(0.0));
        r = r.max((-y[i]).max(0.0));
        r = r.max((y[i] * slack).abs());
    }
    if qp.c.nrows() > 0 {
        r = r.max((&qp.c * x - &qp.d).amax());
    }
    r
}

/// Solves the constrained QP by operator splitting with an exact
/// active-set polish, to a KKT residual of at most `tol`.
pub fn solve_qp(qp: &QpInstance, tol: f64) -> Result<KKTResult> {
    let (n, me, mi) = qp.dims();
    let m = me + mi;
    let p = &qp.q_mat * 2.0;

    if m == 0 {
        // unconstrained: solve Px = −q directly
        let x = p
            .clone()
            .lu()
            .solve(&(-&qp.q_lin))
            .ok_or_else(|| FtError::Degenerate("singular Hessian".into()))?;
        let res = qp_kkt_residual(qp, &x, &DVector::zeros(0), &DVector::zeros(0));
        return Ok(KKTResult {
            x_star: x.as_slice().to_vec(),
            ineq_multipliers: vec![],
            eq_multipliers: vec![],
            residual: res,
        });
    }

    // stacked constraint matrix, equality rows first
    let mut mat = DMatrix::zeros(m, n);
    mat.rows_mut(0, me).copy_from(&qp.c);
    mat.rows_mut(me, mi).copy_from(&qp.a);
    let lower: Vec<f64> = (0..m)
        .map(|i| if i < me { qp.d[i] } else { f64::NEG_INFINITY })
        .collect();
    let upper: Vec<f64> = (0..m).map(|i| if i < me { qp.d[i] } else { qp.b[i - me] }).collect();

    let sigma = 1e-6;
    let rho_vec: Vec<f64> = (0..m).map(|i| if i < me { 1e3 } else { 1.0 }).collect();
    let alpha = 1.6;

    // KKT matrix [[P + σI, Mᵀ], [M, −diag(1/ρ)]]
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(&p + DMatrix::identity(n, n) * sigma));
    kkt.view_mut((0, n), (n, m)).copy_from(&mat.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(&mat);
    for i in 0..m {
        kkt[(n + i, n + i)] = -1.0 / rho_vec[i];
    }
    let kkt_lu = kkt.lu();

    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(m);
    let mut y = DVector::zeros(m);
    let max_iter = 100_000;
    let mut best = f64::INFINITY;
    for it in 0..max_iter {
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(&x * sigma - &qp.q_lin));
        for i in 0..m {
            rhs[n + i] = z[i] - y[i] / rho_vec[i];
        }
        let sol = kkt_lu
            .solve(&rhs)
            .ok_or_else(|| FtError::Degenerate("singular splitting KKT system".into()))?;
        let x_tilde = sol.rows(0, n).into_owned();
        let nu = sol.rows(n, m).into_owned();
        let mut z_tilde = z.clone();
        for i in 0..m {
            z_tilde[i] = z[i] + (nu[i] - y[i]) / rho_vec[i];
        }
        x = &x_tilde * alpha + &x * (1.0 - alpha);
        let zc = &z_tilde * alpha + &z * (1.0 - alpha);
        for i in 0..m {
            let cand: f64 = zc[i] + y[i] / rho_vec[i];
            let proj = cand.clamp(lower[i], upper[i]);
            y[i] += rho_vec[i] * (zc[i] - proj);
            z[i] = proj;
        }

        if it % 20 == 19 {
            let r_prim = (&mat * &x - &z).amax();
            let r_dual = (qp.grad(&x) + mat.transpose() * &y).amax();
            best = best.min(r_prim.max(r_dual));
            if r_prim < 1e-7 && r_dual < 1e-7 {
                if let Some(result) = polish(qp, &p, &mat, &upper, me, &x, &y, tol) {
                    return Ok(result);
                }
            }
            if r_prim < tol * 1e-2 && r_dual < tol * 1e-2 {
                // splitting converged without a clean active set
                let y_ineq = y.rows(me, mi).map(|v| v.max(0.0));
                let nu_eq = y.rows(0, me).into_owned();
                let res = qp_kkt_residual(qp, &x, &y_ineq, &nu_eq);
                if res <= tol {
                    return Ok(KKTResult {
                        x_star: x.as_slice().to_vec(),
                        ineq_multipliers: y_ineq.as_slice().to_vec(),
                        eq_multipliers: nu_eq.as_slice().to_vec(),
                        residual: res,
                    });
                }
            }
        }
    }
    Err(FtError::NonConvergence { residual: best, iterations: max_iter })
}

/// Re-solves the equality-constrained KKT system on the active set guessed
/// from the splitting iterate; returns the polished point when it is a
/// valid KKT point within `tol`.
#[allow(clippy::too_many_arguments)]
fn polish(
    qp: &QpInstance,
    p: &DMatrix<f64>,
    mat: &DMatrix<f64>,
    upper: &[f64],
    me: usize,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
) -> Option<KKTResult> {
    let n = p.nrows();
    let mi = mat.nrows() - me;
    let mx = mat * x;
    let mut active: Vec<usize> = (0..me).collect();
    for i in 0..mi {
        let row = me + i;
        if upper[row] - mx[row] < 1e-6 || y[row] > 1e-8 {
            active.push(row);
        }
    }
    let na = active.len();
    let mut sys = DMatrix::zeros(n + na, n + na);
    sys.view_mut((0, 0), (n, n)).copy_from(p);
    for (k, &row) in active.iter().enumerate() {
        for j in 0..n {
            sys[(j, n + k)] = mat[(row, j)];
            sys[(n + k, j)] = mat[(row, j)];
        }
    }
    let mut rhs = DVector::zeros(n + na);
    rhs.rows_mut(0, n).copy_from(&(-&qp.q_lin));
    for (k, &row) in active.iter().enumerate() {
        rhs[n + k] = upper[row];
    }
    let sol = sys.lu().solve(&rhs)?;
    let x_pol = sol.rows(0, n).into_owned();
    let lam = sol.rows(n, na).into_owned();

    let mut y_ineq = DVector::zeros(mi);
    let mut nu_eq = DVector::zeros(me);
    for (k, &row) in active.iter().enumerate() {
        if row < me {
            nu_eq[row] = lam[k];
        } else {
            if lam[k] < -1e-9 {
                return None; // wrong active set guess
            }
            y_ineq[row - me] = lam[k].max(0.0);
        }
    }
    let res = qp_kkt_residual(qp, &x_pol, &y_ineq, &nu_eq);
    if res <= tol {
        Some(KKTResult {
            x_star: x_pol.as_slice().to_vec(),
            ineq_multipliers: y_ineq.as_slice().to_vec(),
            eq_multipliers: nu_eq.as_slice().to_vec(),
            residual: res,
        })
    } else {
        None
    }
}
