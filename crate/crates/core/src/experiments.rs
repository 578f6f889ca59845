//! Problem generators and sweep orchestration: settling time versus
//! initial-condition magnitude, with theoretical-bound overlays computed
//! from empirically certified constants.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::certify::{ball_sampler, estimate_growth, estimate_lipschitz, fit_exponential_rate_from};
use crate::error::{FtError, Result};
use crate::field::VectorField;
use crate::flows::{CompositeProblem, ConstrainedProblem};
use crate::integrator::{
    integrate_scaled, settling_time, IntegrateOptions, SettleStop, Trajectory,
};
use crate::linalg::{norm, Mat};
use crate::proximal::ProxFunction;
use crate::reference::{FusedLasso, QpInstance};
use crate::scaling::{thm2_bound, LyapunovConstants, ScalingParams, SettlingBound};

/// Which problem family a run operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Scalar,
    FusedLasso,
    Qp,
}

/// A generated fused-lasso instance together with the data needed by the
/// reference solver and the ground-truth signal.
#[derive(Clone)]
pub struct FusedLassoExperiment {
    pub problem: CompositeProblem<f64>,
    pub data: FusedLasso,
    pub x_bar: Vec<f64>,
}

/// Draws a fused-lasso instance: minimize ½‖Ex − q‖² + ‖Tx‖₁ with E n×n
/// Gaussian, q = Ex̄ + w for a piecewise-constant x̄ with `block_len`-long
/// blocks of random integers from {1,…,10}, Gaussian noise w of variance
/// 0.1, and T bidiagonal with 1 on the diagonal and −1 on the first upper
/// subdiagonal (last row has no upper neighbor).
pub fn gen_fused_lasso(
    seed: u64,
    n: usize,
    block_len: usize,
    mu: f64,
) -> Result<FusedLassoExperiment> {
    if n == 0 || block_len == 0 || n % block_len != 0 {
        return Err(FtError::InvalidParameter(format!(
            "n must be a positive multiple of block_len, got n = {n}, block_len = {block_len}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // drawing order is part of the determinism contract: E, then x̄, then w
    let e_entries: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let e = DMatrix::from_row_slice(n, n, &e_entries);
    let mut x_bar = Vec::with_capacity(n);
    for _ in 0..n / block_len {
        let v = rng.random_range(1..=10) as f64;
        x_bar.extend(std::iter::repeat(v).take(block_len));
    }
    let noise_std = 0.1f64.sqrt();
    let xb = DVector::from_vec(x_bar.clone());
    let mut q = &e * &xb;
    for qi in q.iter_mut() {
        let w: f64 = StandardNormal.sample(&mut rng);
        *qi += noise_std * w;
    }
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    });

    let e_mat = Mat::from_fn(n, n, |i, j| e[(i, j)]);
    let t_mat = Mat::from_fn(n, n, |i, j| t[(i, j)]);
    let q_vec: Vec<f64> = q.as_slice().to_vec();
    let (ef, qf) = (e_mat.clone(), q_vec.clone());
    let (eg, qg) = (e_mat, q_vec);
    let problem = CompositeProblem::new(
        move |x: &[f64]| {
            let r: Vec<f64> = ef.matvec(x).iter().zip(&qf).map(|(ri, qi)| ri - qi).collect();
            0.5 * crate::linalg::dot(&r, &r)
        },
        move |x: &[f64]| {
            let r: Vec<f64> = eg.matvec(x).iter().zip(&qg).map(|(ri, qi)| ri - qi).collect();
            eg.t_matvec(&r)
        },
        ProxFunction::l1(n),
        t_mat,
        mu,
    );
    Ok(FusedLassoExperiment { problem, data: FusedLasso { e, q, t }, x_bar })
}

/// A generated constrained QP together with the data needed by the
/// reference solver.
#[derive(Clone)]
pub struct QpExperiment {
    pub problem: ConstrainedProblem<f64>,
    pub data: QpInstance,
}

/// Draws a constrained QP: minimize xᵀQx + qᵀx s.t. Cx = 0, Ax ≤ 0 with
/// Q = RᵀR and all of R (n×n), C (d_eq×n), A (d_ineq×n), q Gaussian.
pub fn gen_qp(seed: u64, d_eq: usize, d_ineq: usize, n: usize, mu: f64) -> Result<QpExperiment> {
    if n == 0 {
        return Err(FtError::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |rows: usize, cols: usize| {
        let v: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
        DMatrix::from_row_slice(rows, cols, &v)
    };
    // drawing order: R, C, A, q
    let r = gauss(n, n);
    let c = gauss(d_eq, n);
    let a = gauss(d_ineq, n);
    let q_lin = DVector::from_column_slice(gauss(n, 1).as_slice());
    let q_mat = r.transpose() * &r;

    let qm = Mat::from_fn(n, n, |i, j| q_mat[(i, j)]);
    let qv: Vec<f64> = q_lin.as_slice().to_vec();
    let (qm_v, qv_v) = (qm.clone(), qv.clone());
    let a_mat = Mat::from_fn(d_ineq, n, |i, j| a[(i, j)]);
    let c_mat = Mat::from_fn(d_eq, n, |i, j| c[(i, j)]);
    let (c_opt, d_opt) = if d_eq > 0 {
        (Some(c_mat), Some(vec![0.0; d_eq]))
    } else {
        (None, None)
    };
    let problem = ConstrainedProblem::new(
        move |x: &[f64]| crate::linalg::dot(&qm_v.matvec(x), x) + crate::linalg::dot(&qv_v, x),
        move |x: &[f64]| {
            let mut g = qm.matvec(x);
            for (gi, &qi) in g.iter_mut().zip(&qv) {
                *gi = 2.0 * *gi + qi;
            }
            g
        },
        a_mat,
        vec![0.0; d_ineq],
        c_opt,
        d_opt,
        mu,
    );
    let data = QpInstance {
        q_mat,
        q_lin,
        a,
        b: DVector::zeros(d_ineq),
        c,
        d: DVector::zeros(d_eq),
    };
    Ok(QpExperiment { problem, data })
}

/// Full description of one run/sweep, as read from a config file.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub seed: u64,
    /// Primal dimension (ignored for the scalar problem).
    pub n: usize,
    /// Per-type constraint count for the QP; 0 selects the desk-scale
    /// default (3 equalities, 5 inequalities).
    pub d: usize,
    pub mu: f64,
    pub scaling: ScalingParams<f64>,
    pub magnitudes: Vec<f64>,
    pub settle_delta: f64,
    pub integrator: IntegrateOptions<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Scalar,
            seed: 0,
            n: 1,
            d: 0,
            mu: 1.0,
            scaling: ScalingParams::None,
            magnitudes: vec![1.0, 1e1, 1e2, 1e3, 1e4],
            settle_delta: 1e-4,
            integrator: IntegrateOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu <= 0.0 {
            return Err(FtError::InvalidParameter(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.magnitudes.is_empty() {
            return Err(FtError::InvalidParameter("magnitudes must be nonempty".into()));
        }
        if let Some(&bad) = self.magnitudes.iter().find(|&&m| !(m > 0.0)) {
            return Err(FtError::InvalidParameter(format!(
                "magnitudes must be positive, got {bad}"
            )));
        }
        if !(self.settle_delta > 0.0) {
            return Err(FtError::InvalidParameter(format!(
                "settle_delta must be positive, got {}",
                self.settle_delta
            )));
        }
        self.scaling.validate()?;
        self.integrator.validate()
    }
}

/// One sweep row: what happened for a single initial-condition magnitude.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub magnitude: f64,
    pub settling_time: Option<f64>,
    pub thm_bound: Option<f64>,
    pub final_err_rel: f64,
    pub terminated_by: String,
}

/// Sweep output: one row per requested magnitude, in input order.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// The fixed unit direction shared by all magnitudes.
    pub direction: Vec<f64>,
    /// Present only when the sweep was asked to keep trajectories;
    /// `None` entries mark rows whose integration failed.
    pub trajectories: Vec<Option<Trajectory<f64>>>,
}

/// Everything needed to run one sweep over initial-condition magnitudes.
pub struct SweepSpec<'a> {
    pub field: &'a VectorField<f64>,
    pub equilibrium: &'a [f64],
    pub scaling: ScalingParams<f64>,
    pub magnitudes: &'a [f64],
    pub settle_delta: f64,
    pub opts: IntegrateOptions<f64>,
    pub seed: u64,
    /// Optional settling-time bound as a function of the magnitude
    /// (constant for fixed-time scaling).
    pub bound_for_magnitude: Option<&'a dyn Fn(f64) -> Option<f64>>,
    pub keep_trajectories: bool,
}

/// Runs the sweep: a fixed seeded unit direction u, initial conditions
/// z₀ = z* + s·u, one integration per magnitude s, settling time measured
/// to the relative ball of radius `settle_delta`. Integration failures are
/// flagged in the row and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.magnitudes.is_empty() {
        return Err(FtError::InvalidParameter("magnitudes must be nonempty".into()));
    }
    if let Some(&bad) = spec.magnitudes.iter().find(|&&m| !(m > 0.0)) {
        return Err(FtError::InvalidParameter(format!("magnitudes must be positive, got {bad}")));
    }
    if spec.equilibrium.len() != spec.field.dim() {
        return Err(FtError::DimensionMismatch {
            expected: spec.field.dim(),
            got: spec.equilibrium.len(),
        });
    }
    if !(spec.settle_delta > 0.0) {
        return Err(FtError::InvalidParameter(format!(
            "settle_delta must be positive, got {}",
            spec.settle_delta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut direction: Vec<f64> =
        (0..spec.equilibrium.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let d_norm = norm(&direction).max(1e-300);
    for d in direction.iter_mut() {
        *d /= d_norm;
    }

    let scale = spec.settle_delta * norm(spec.equilibrium).max(1.0);
    let mut rows = Vec::with_capacity(spec.magnitudes.len());
    let mut trajectories = Vec::new();
    for &s in spec.magnitudes {
        let z0: Vec<f64> =
            spec.equilibrium.iter().zip(&direction).map(|(&z, &u)| z + s * u).collect();
        let mut opts = spec.opts.clone();
        if opts.settle_stop.is_none() {
            opts.settle_stop =
                Some(SettleStop { target: spec.equilibrium.to_vec(), radius: scale });
        }
        let bound = spec.bound_for_magnitude.and_then(|f| f(s));
        match integrate_scaled(spec.field, spec.scaling, &z0, &opts) {
            Ok(traj) => {
                let st = settling_time(&traj, spec.equilibrium, spec.settle_delta)?;
                let final_err = crate::linalg::dist(traj.final_state(), spec.equilibrium)
                    / norm(spec.equilibrium).max(1.0);
                rows.push(SweepRow {
                    magnitude: s,
                    settling_time: st,
                    thm_bound: bound,
                    final_err_rel: final_err,
                    terminated_by: traj.terminated_by.as_str().to_string(),
                });
                if spec.keep_trajectories {
                    trajectories.push(Some(traj));
                }
            }
            Err(_) => {
                rows.push(SweepRow {
                    magnitude: s,
                    settling_time: None,
                    thm_bound: bound,
                    final_err_rel: s / norm(spec.equilibrium).max(1.0),
                    terminated_by: "error".to_string(),
                });
                if spec.keep_trajectories {
                    trajectories.push(None);
                }
            }
        }
    }
    Ok(SweepResult { rows, direction, trajectories })
}

/// Constants of the exponential/growth hypotheses estimated from data, used
/// to evaluate the fixed-time settling bound without analytic certificates.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedConstants {
    pub rho_hat: f64,
    pub r2: f64,
    pub l_hat: f64,
    pub m_hat: f64,
    pub beta_hat: f64,
}

/// Estimates (ρ, L, m, β) for a base field: the rate from a provided
/// unscaled trajectory (tail window starting at `t_start`), L, m, and β by
/// sampling a ball of the given radius around the equilibrium.
pub fn certify_constants(
    field: &VectorField<f64>,
    equilibrium: &[f64],
    radius: f64,
    seed: u64,
    sample_count: usize,
    rate_traj: &Trajectory<f64>,
    t_start: f64,
) -> Result<CertifiedConstants> {
    let est = fit_exponential_rate_from(rate_traj, equilibrium, t_start)?;
    if est.rho_hat <= 0.0 {
        return Err(FtError::Degenerate(format!(
            "fitted exponential rate is not positive: {}",
            est.rho_hat
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l_hat = {
        let sampler = ball_sampler(equilibrium, radius, &mut rng);
        estimate_lipschitz(field, sampler, sample_count)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let growth = {
        let sampler = ball_sampler(equilibrium, radius, &mut rng);
        estimate_growth(field, equilibrium, sampler, sample_count)?
    };
    Ok(CertifiedConstants {
        rho_hat: est.rho_hat,
        r2: est.r2,
        l_hat,
        m_hat: growth.m_hat,
        beta_hat: growth.beta_hat,
    })
}

/// Fixed-time settling bound evaluated with certified constants under the
/// squared-error surrogate V = ‖z − z*‖²: k₁ = k₂ = 1 and k₃ = 2ρ̂.
pub fn certified_thm2_bound(
    cc: &CertifiedConstants,
    eta1: f64,
    eta2: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<SettlingBound<f64>> {
    let k = LyapunovConstants::new(1.0, 1.0, 2.0 * cc.rho_hat, cc.l_hat, cc.m_hat, cc.beta_hat)?;
    thm2_bound(&k, eta1, eta2, lambda1, lambda2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate;
    use approx::assert_relative_eq;

    fn neg_identity(dim: usize) -> VectorField<f64> {
        VectorField::new(dim, |x: &[f64], out| {
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = -xi;
            }
        })
    }

    #[test]
    fn fused_lasso_difference_matrix_structure() {
        let exp = gen_fused_lasso(0, 3, 1, 1.0).unwrap();
        let t = &exp.data.t;
        let expected = [[1.0, -1.0, 0.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t[(i, j)], expected[i][j]);
            }
        }
    }

    #[test]
    fn fused_lasso_blocks_are_piecewise_constant() {
        let exp = gen_fused_lasso(42, 30, 10, 1.0).unwrap();
        assert_eq!(exp.x_bar.len(), 30);
        for b in 0..3 {
            let v = exp.x_bar[b * 10];
            assert!((1.0..=10.0).contains(&v) && v.fract() == 0.0);
            for i in 0..10 {
                assert_eq!(exp.x_bar[b * 10 + i], v);
            }
        }
    }

    #[test]
    fn fused_lasso_determinism_and_divisibility() {
        let a = gen_fused_lasso(7, 20, 10, 1.0).unwrap();
        let b = gen_fused_lasso(7, 20, 10, 1.0).unwrap();
        assert_eq!(a.data.e, b.data.e);
        assert_eq!(a.data.q, b.data.q);
        assert_eq!(a.x_bar, b.x_bar);
        let c = gen_fused_lasso(8, 20, 10, 1.0).unwrap();
        assert_ne!(a.data.e, c.data.e);
        assert!(gen_fused_lasso(7, 25, 10, 1.0).is_err());
    }

    #[test]
    fn fused_lasso_gradient_matches_finite_differences() {
        let exp = gen_fused_lasso(3, 10, 5, 1.0).unwrap();
        let x: Vec<f64> = (0..10).map(|i| 0.3 * i as f64 - 1.0).collect();
        let g = (exp.problem.f_grad)(&x);
        let h = 1e-6;
        for i in 0..10 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = ((exp.problem.f_value)(&xp) - (exp.problem.f_value)(&xm)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-5, epsilon = 1e-6);
        }
    }

    #[test]
    fn qp_gram_matrix_is_positive_definite() {
        let exp = gen_qp(1, 3, 5, 20, 1.0).unwrap();
        let q = &exp.data.q_mat;
        assert_eq!(q, &q.transpose());
        assert!(nalgebra::Cholesky::new(q.clone()).is_some());
    }

    #[test]
    fn qp_determinism() {
        let a = gen_qp(5, 3, 5, 20, 1.0).unwrap();
        let b = gen_qp(5, 3, 5, 20, 1.0).unwrap();
        assert_eq!(a.data.q_mat, b.data.q_mat);
        assert_eq!(a.data.a, b.data.a);
        assert_eq!(a.data.c, b.data.c);
        assert_eq!(a.data.q_lin, b.data.q_lin);
    }

    #[test]
    fn qp_stacked_constraints_have_full_row_rank() {
        let exp = gen_qp(1, 3, 5, 20, 1.0).unwrap();
        let mut stacked = DMatrix::zeros(8, 20);
        stacked.rows_mut(0, 3).copy_from(&exp.data.c);
        stacked.rows_mut(3, 5).copy_from(&exp.data.a);
        let svals = stacked.svd(false, false).singular_values;
        assert_eq!(svals.len(), 8);
        assert!(svals.iter().all(|&s| s > 1e-8), "singular values {svals:?}");
    }

    #[test]
    fn sweep_scalar_finite_time_settling_profile() {
        // |x(t)|^{1/2} = |x₀|^{1/2} − t/2: settling to 1e-9 at
        // 2(|x₀|^{1/2} − 10^{-4.5})
        let f = neg_identity(1);
        let opts = IntegrateOptions { t_max: 10.0, stop_field_norm: 0.0, ..Default::default() };
        let spec = SweepSpec {
            field: &f,
            equilibrium: &[0.0],
            scaling: ScalingParams::Finite { eta: 1.0, lambda: 0.5 },
            magnitudes: &[0.1, 1.0, 10.0],
            settle_delta: 1e-9,
            opts,
            seed: 11,
            bound_for_magnitude: None,
            keep_trajectories: false,
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 3);
        for (row, &s) in res.rows.iter().zip(spec.magnitudes) {
            let analytic = 2.0 * (s.sqrt() - 1e-9f64.sqrt());
            let measured = row.settling_time.expect("must settle");
            assert_relative_eq!(measured, analytic, max_relative = 0.01);
        }
    }

    #[test]
    fn sweep_scalar_fixed_time_uniformity() {
        let f = neg_identity(1);
        let opts = IntegrateOptions { t_max: 10.0, stop_field_norm: 0.0, ..Default::default() };
        let spec = SweepSpec {
            field: &f,
            equilibrium: &[0.0],
            scaling: ScalingParams::Fixed { eta1: 1.0, eta2: 1.0, lambda1: 0.5, lambda2: 3.0 },
            magnitudes: &[1.0, 1e3, 1e6],
            settle_delta: 1e-9,
            opts,
            seed: 11,
            bound_for_magnitude: Some(&|_| Some(13.0 / 3.0)),
            keep_trajectories: false,
        };
        let res = run_sweep(&spec).unwrap();
        let times: Vec<f64> = res.rows.iter().map(|r| r.settling_time.unwrap()).collect();
        for (t, row) in times.iter().zip(&res.rows) {
            assert!(*t <= row.thm_bound.unwrap(), "settling {t} above bound");
        }
        // top two magnitudes within 20% of each other
        let hi = times[1].max(times[2]);
        let lo = times[1].min(times[2]);
        assert!(hi / lo <= 1.2, "times {times:?}");
    }

    #[test]
    fn sweep_unscaled_settling_grows_with_magnitude() {
        let f = neg_identity(1);
        // modest h_max keeps the linear interpolation of the settling
        // crossing accurate
        let opts = IntegrateOptions {
            t_max: 40.0,
            stop_field_norm: 0.0,
            h_max: Some(0.05),
            ..Default::default()
        };
        let spec = SweepSpec {
            field: &f,
            equilibrium: &[0.0],
            scaling: ScalingParams::None,
            magnitudes: &[1.0, 1e3],
            settle_delta: 1e-9,
            opts,
            seed: 11,
            bound_for_magnitude: None,
            keep_trajectories: false,
        };
        let res = run_sweep(&spec).unwrap();
        let t0 = res.rows[0].settling_time.unwrap();
        let t1 = res.rows[1].settling_time.unwrap();
        // exponential decay: t = ln(|x₀|/1e-9), so t1 − t0 = ln(1e3)
        assert!(t1 > t0);
        assert_relative_eq!(t1 - t0, 1e3f64.ln(), max_relative = 0.01);
    }

    #[test]
    fn sweep_rows_are_reproducible_bitwise() {
        let f = neg_identity(3);
        let opts = IntegrateOptions { t_max: 5.0, ..Default::default() };
        let spec = SweepSpec {
            field: &f,
            equilibrium: &[0.0; 3],
            scaling: ScalingParams::Finite { eta: 1.0, lambda: 0.5 },
            magnitudes: &[0.5, 2.0],
            settle_delta: 1e-6,
            opts,
            seed: 9,
            bound_for_magnitude: None,
            keep_trajectories: false,
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.direction, b.direction);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.settling_time.map(f64::to_bits), rb.settling_time.map(f64::to_bits));
            assert_eq!(ra.final_err_rel.to_bits(), rb.final_err_rel.to_bits());
            assert_eq!(ra.terminated_by, rb.terminated_by);
        }
    }

    #[test]
    fn sweep_rejects_bad_magnitudes() {
        let f = neg_identity(1);
        let spec = SweepSpec {
            field: &f,
            equilibrium: &[0.0],
            scaling: ScalingParams::None,
            magnitudes: &[1.0, -2.0],
            settle_delta: 1e-4,
            opts: IntegrateOptions::default(),
            seed: 0,
            bound_for_magnitude: None,
            keep_trajectories: false,
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn certified_bound_recovers_scalar_constants() {
        // ẋ = −x: ρ = 1, L = m = β = 1, so the certified bound with
        // (η₁, η₂, λ₁, λ₂) = (1, 1, ½, 3) should sit near 13/3
        let f = neg_identity(1);
        let opts = IntegrateOptions { t_max: 6.0, stop_field_norm: 0.0, ..Default::default() };
        let traj = integrate(&f, &[1.0], &opts).unwrap();
        let cc = certify_constants(&f, &[0.0], 10.0, 3, 2000, &traj, 0.0).unwrap();
        assert_relative_eq!(cc.rho_hat, 1.0, max_relative = 1e-3);
        assert!(cc.l_hat <= 1.0 + 1e-9 && cc.l_hat >= 0.99);
        assert!((cc.beta_hat - 1.0).abs() <= 0.02);
        let b = certified_thm2_bound(&cc, 1.0, 1.0, 0.5, 3.0).unwrap();
        assert!((b.value - 13.0 / 3.0).abs() / (13.0 / 3.0) <= 0.1, "bound {}", b.value);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.mu = 0.0;
        assert!(cfg.validate().is_err());
        cfg.mu = 1.0;
        cfg.magnitudes.clear();
        assert!(cfg.validate().is_err());
        cfg.magnitudes = vec![1.0];
        cfg.settle_delta = -1.0;
        assert!(cfg.validate().is_err());
    }
}
