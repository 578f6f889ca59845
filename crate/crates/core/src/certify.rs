//! Empirical verification of the stability hypotheses: exponential-rate
//! fitting, Lipschitz and growth-constant estimation, and checking the
//! Lyapunov decay inequality along trajectories.

use crate::error::{FtError, Result};
use crate::field::VectorField;
use crate::integrator::Trajectory;
use crate::linalg::{dist, norm};
use crate::scalar::{lit, Scalar};

/// Fitted exponential envelope ‖x(t)‖ ≤ M̂ e^{−ρ̂ t}‖x(0)‖.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityEstimate<S> {
    pub m_hat: S,
    pub rho_hat: S,
    /// Goodness of the log-linear fit in [0, 1].
    pub r2: S,
}

/// Lower-envelope growth fit ‖F(z)‖ ≥ m̂‖z − z*‖^β̂ on the sampled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate<S> {
    pub m_hat: S,
    pub beta_hat: S,
    pub sample_count: usize,
}

/// Least-squares fit of log error norm versus time over all samples with
/// error norm above 1e-12; M̂ is the intercept relative to the initial
/// error.
pub fn fit_exponential_rate<S: Scalar>(
    traj: &Trajectory<S>,
    target: &[S],
) -> Result<StabilityEstimate<S>> {
    fit_exponential_rate_from(traj, target, S::zero())
}

/// Same fit restricted to samples with t ≥ t_start (tail-window fitting).
pub fn fit_exponential_rate_from<S: Scalar>(
    traj: &Trajectory<S>,
    target: &[S],
    t_start: S,
) -> Result<StabilityEstimate<S>> {
    let floor = lit::<S>(1e-12);
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let e = dist(state, target);
        if *t >= t_start && e > floor {
            ts.push(*t);
            logs.push(e.ln());
        }
    }
    if ts.len() < 10 {
        return Err(FtError::Degenerate(format!(
            "only {} usable samples for exponential fit (need 10)",
            ts.len()
        )));
    }
    let (slope, intercept, r2) = linear_fit(&ts, &logs);
    let err0 = dist(&traj.states[0], target);
    if err0 <= floor {
        return Err(FtError::Degenerate("trajectory already settled at t = 0".into()));
    }
    Ok(StabilityEstimate { m_hat: intercept.exp() / err0, rho_hat: -slope, r2 })
}

fn linear_fit<S: Scalar>(x: &[S], y: &[S]) -> (S, S, S) {
    let n = lit::<S>(x.len() as f64);
    let mean = |v: &[S]| v.iter().copied().sum::<S>() / n;
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    let mut syy = S::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy > S::zero() { S::one() - ss_res / syy } else { S::one() };
    (slope, intercept, r2)
}

/// Maximum difference quotient ‖F(u) − F(v)‖/‖u − v‖ over sampled pairs;
/// a lower bound on the true Lipschitz modulus.
pub fn estimate_lipschitz<S: Scalar>(
    field: &VectorField<S>,
    mut sampler: impl FnMut() -> Vec<S>,
    pair_count: usize,
) -> Result<S> {
    if pair_count == 0 {
        return Err(FtError::InvalidParameter("pair_count must be at least 1".into()));
    }
    let mut best = S::zero();
    for _ in 0..pair_count {
        let u = sampler();
        let v = sampler();
        let d = dist(&u, &v);
        if d <= S::zero() {
            continue;
        }
        let fu = field.eval(&u)?;
        let fv = field.eval(&v)?;
        let ratio = dist(&fu, &fv) / d;
        if ratio > best {
            best = ratio;
        }
    }
    Ok(best)
}

/// Lower-envelope growth fit: β̂ from log-log regression of ‖F(z)‖ against
/// ‖z − z*‖, then m̂ = min over samples of ‖F(z)‖/‖z − z*‖^β̂. Samples at
/// z = z* are skipped.
pub fn estimate_growth<S: Scalar>(
    field: &VectorField<S>,
    equilibrium: &[S],
    mut sampler: impl FnMut() -> Vec<S>,
    sample_count: usize,
) -> Result<GrowthEstimate<S>> {
    if sample_count < 10 {
        return Err(FtError::InvalidParameter("sample_count must be at least 10".into()));
    }
    let mut log_r = Vec::new();
    let mut log_f = Vec::new();
    let mut ratios: Vec<(S, S)> = Vec::new();
    for _ in 0..sample_count {
        let z = sampler();
        let r = dist(&z, equilibrium);
        if r <= S::zero() {
            continue;
        }
        let f = norm(&field.eval(&z)?);
        if f <= S::zero() {
            // a zero field away from the equilibrium admits no growth bound
            return Err(FtError::Degenerate(
                "field vanishes away from the declared equilibrium".into(),
            ));
        }
        log_r.push(r.ln());
        log_f.push(f.ln());
        ratios.push((r, f));
    }
    if ratios.is_empty() {
        return Err(FtError::Degenerate("all samples coincide with the equilibrium".into()));
    }
    let (beta_hat, _, _) = linear_fit(&log_r, &log_f);
    let m_hat = ratios
        .iter()
        .map(|&(r, f)| f / r.powf(beta_hat))
        .fold(S::infinity(), S::min);
    Ok(GrowthEstimate { m_hat, beta_hat, sample_count: ratios.len() })
}

/// Outcome of checking V̇ ≤ −c₁V^{α₁} − c₂V^{α₂} along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport<S> {
    pub checked: usize,
    pub violations: usize,
    /// Most positive value of V̇ + c₁V^{α₁} + c₂V^{α₂} − slack·(1 + |V̇|).
    pub worst_margin: S,
}

impl<S: Scalar> DecayReport<S> {
    pub fn violation_fraction(&self) -> S {
        if self.checked == 0 {
            S::zero()
        } else {
            lit::<S>(self.violations as f64) / lit::<S>(self.checked as f64)
        }
    }
}

/// Finite-difference check of the decay inequality at interior samples,
/// using three-point differences on the trajectory's native time grid. A point
/// fails when V̇ > −c₁V^{α₁} − c₂V^{α₂} + slack·(1 + |V̇|).
pub fn check_decay_inequality<S: Scalar>(
    traj: &Trajectory<S>,
    v_values: &[S],
    c1: S,
    alpha1: S,
    c2: S,
    alpha2: S,
    slack: S,
) -> Result<DecayReport<S>> {
    if v_values.len() != traj.len() {
        return Err(FtError::DimensionMismatch { expected: traj.len(), got: v_values.len() });
    }
    if traj.len() < 3 {
        return Err(FtError::Degenerate("need at least 3 samples".into()));
    }
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut worst = S::neg_infinity();
    for i in 1..traj.len() - 1 {
        let h0 = traj.times[i] - traj.times[i - 1];
        let h1 = traj.times[i + 1] - traj.times[i];
        if h0 <= S::zero() || h1 <= S::zero() {
            continue;
        }
        // three-point derivative on a nonuniform grid (exact for quadratics)
        let v_dot = -h1 / (h0 * (h0 + h1)) * v_values[i - 1]
            + (h1 - h0) / (h0 * h1) * v_values[i]
            + h0 / (h1 * (h0 + h1)) * v_values[i + 1];
        let v = v_values[i].max(S::zero());
        let rhs = -c1 * v.powf(alpha1) - c2 * v.powf(alpha2);
        let margin = v_dot - rhs - slack * (S::one() + v_dot.abs());
        if margin > worst {
            worst = margin;
        }
        if margin > S::zero() {
            violations += 1;
        }
        checked += 1;
    }
    Ok(DecayReport { checked, violations, worst_margin: worst })
}

/// Uniform-direction, log-uniform-radius sampler on a ball around a center.
/// Radii span [radius·1e-4, radius].
pub fn ball_sampler<'a, S: Scalar, R: rand::Rng>(
    center: &'a [S],
    radius: S,
    rng: &'a mut R,
) -> impl FnMut() -> Vec<S> + 'a {
    use rand_distr::{Distribution, StandardNormal};
    move || {
        let dir: Vec<f64> = (0..center.len())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let d_norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let u: f64 = rng.random();
        let r = radius.to_f64().unwrap() * 10f64.powf(-4.0 * u);
        center
            .iter()
            .zip(&dir)
            .map(|(&c, &di)| c + lit::<S>(r * di / d_norm))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegrateOptions, Termination};
    use crate::linalg::Mat;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic_exponential(rho: f64, x0: f64) -> Trajectory<f64> {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let states: Vec<Vec<f64>> = times.iter().map(|&t| vec![x0 * (-rho * t).exp()]).collect();
        let n = times.len();
        Trajectory {
            times,
            states,
            field_norms: vec![0.0; n],
            sigma_values: vec![1.0; n],
            terminated_by: Termination::TMax,
        }
    }

    #[test]
    fn rate_fit_on_closed_forms() {
        for rho in [0.1, 1.0, 2.0, 10.0] {
            let est = fit_exponential_rate(&synthetic_exponential(rho, 1.0), &[0.0]).unwrap();
            assert_relative_eq!(est.rho_hat, rho, max_relative = 1e-3);
            assert_relative_eq!(est.m_hat, 1.0, max_relative = 1e-3);
            assert!(est.r2 >= 0.999);
        }
    }

    #[test]
    fn rate_fit_on_integrated_flow() {
        let f = VectorField::new(1, |x: &[f64], out: &mut [f64]| out[0] = -2.0 * x[0]);
        let opts = IntegrateOptions { t_max: 5.0, stop_field_norm: 0.0, ..Default::default() };
        let traj = integrate(&f, &[1.0], &opts).unwrap();
        let est = fit_exponential_rate(&traj, &[0.0]).unwrap();
        assert_relative_eq!(est.rho_hat, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn degenerate_trajectory_rejected() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![vec![0.0], vec![0.0]],
            field_norms: vec![0.0; 2],
            sigma_values: vec![1.0; 2],
            terminated_by: Termination::FieldNorm,
        };
        assert!(fit_exponential_rate(&traj, &[0.0]).is_err());
    }

    #[test]
    fn lipschitz_estimate_linear_field() {
        let f = VectorField::new(2, |x: &[f64], out: &mut [f64]| {
            out[0] = -x[0];
            out[1] = -x[1];
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let center = [0.0, 0.0];
        let est =
            estimate_lipschitz(&f, ball_sampler(&center, 5.0, &mut rng), 500).unwrap();
        assert!(est <= 1.0 + 1e-12);
        assert!(est >= 0.999, "estimate {est}");
    }

    #[test]
    fn lipschitz_estimate_matches_spectral_norm() {
        // F(x) = −Qx; spectral norm of Q by power iteration as oracle
        let q = Mat::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]);
        let spectral = {
            let mut v = vec![1.0, 0.3];
            for _ in 0..200 {
                let w = q.matvec(&v);
                let n = norm(&w);
                v = w.iter().map(|x| x / n).collect();
            }
            norm(&q.matvec(&v))
        };
        let qf = q.clone();
        let f = VectorField::new(2, move |x: &[f64], out: &mut [f64]| {
            let y = qf.matvec(x);
            out.copy_from_slice(&[-y[0], -y[1]]);
        });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let center = [0.0, 0.0];
        let est =
            estimate_lipschitz(&f, ball_sampler(&center, 3.0, &mut rng), 2000).unwrap();
        assert!(est <= spectral * (1.0 + 1e-10));
        assert!(est >= spectral * 0.98, "estimate {est} vs spectral {spectral}");
    }

    #[test]
    fn lipschitz_estimate_constant_field() {
        let f = VectorField::new(1, |_x: &[f64], out: &mut [f64]| out[0] = 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let center = [0.0];
        let est = estimate_lipschitz(&f, ball_sampler(&center, 1.0, &mut rng), 100).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn lipschitz_monotone_in_pair_count() {
        let f = VectorField::new(1, |x: &[f64], out: &mut [f64]| out[0] = -(x[0].powi(3)));
        let center = [0.0];
        let mut prev = 0.0;
        for count in [10, 50, 250] {
            // nested sampling: same seed, growing prefix of the stream
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let est = estimate_lipschitz(&f, ball_sampler(&center, 2.0, &mut rng), count).unwrap();
            assert!(est >= prev);
            prev = est;
        }
    }

    #[test]
    fn growth_estimate_linear_field() {
        let f = VectorField::new(2, |x: &[f64], out: &mut [f64]| {
            out[0] = -x[0];
            out[1] = -x[1];
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let center = [0.0, 0.0];
        let est =
            estimate_growth(&f, &center, ball_sampler(&center, 4.0, &mut rng), 500).unwrap();
        assert_relative_eq!(est.beta_hat, 1.0, max_relative = 1e-6);
        assert_relative_eq!(est.m_hat, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn growth_estimate_scaled_by_min_singular_value() {
        let q = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]);
        let qf = q.clone();
        let f = VectorField::new(2, move |x: &[f64], out: &mut [f64]| {
            let y = qf.matvec(x);
            out.copy_from_slice(&[-y[0], -y[1]]);
        });
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let center = [0.0, 0.0];
        let est =
            estimate_growth(&f, &center, ball_sampler(&center, 4.0, &mut rng), 500).unwrap();
        // σ_min(Q) = 0.5 by construction
        assert!(est.m_hat >= 0.45 && est.m_hat <= 2.0 + 1e-9, "m_hat {}", est.m_hat);
        assert!((est.beta_hat - 1.0).abs() <= 0.05);
        // envelope holds with zero violations on its own samples by construction
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sampler = ball_sampler(&center, 4.0, &mut rng);
        for _ in 0..500 {
            let z = sampler();
            let r = norm(&z);
            let fval = norm(&f.eval(&z).unwrap());
            assert!(fval >= est.m_hat * r.powf(est.beta_hat) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn growth_estimate_saturating_field() {
        // F(x) = −x/(1 + ‖x‖) on ‖x‖ ≤ 1: ratio minimized at ‖x‖ = 1 giving ½
        let f = VectorField::new(1, |x: &[f64], out: &mut [f64]| {
            out[0] = -x[0] / (1.0 + x[0].abs());
        });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let center = [0.0];
        let est =
            estimate_growth(&f, &center, ball_sampler(&center, 1.0, &mut rng), 2000).unwrap();
        assert!((est.beta_hat - 1.0).abs() <= 0.1, "beta {}", est.beta_hat);
        assert!(est.m_hat >= 0.4 && est.m_hat <= 0.75, "m_hat {}", est.m_hat);
    }

    #[test]
    fn decay_check_exact_exponential() {
        // ẋ = −x, V = x²: V̇ = −2V exactly
        let f = VectorField::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0]);
        let opts = IntegrateOptions {
            t_max: 3.0,
            stop_field_norm: 0.0,
            h_max: Some(0.01),
            ..Default::default()
        };
        let traj = integrate(&f, &[1.0], &opts).unwrap();
        let v: Vec<f64> = traj.states.iter().map(|s| s[0] * s[0]).collect();
        // boundary case (c₁, α₁) unused via c₁ = 0, (c₂, α₂) = (2, 1)
        let report = check_decay_inequality(&traj, &v, 0.0, 0.5, 2.0, 1.0, 1e-4).unwrap();
        assert_eq!(report.violations, 0, "worst margin {}", report.worst_margin);
    }

    #[test]
    fn decay_check_is_falsifiable() {
        let f = VectorField::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0]);
        let opts = IntegrateOptions {
            t_max: 3.0,
            stop_field_norm: 0.0,
            h_max: Some(0.01),
            ..Default::default()
        };
        let traj = integrate(&f, &[1.0], &opts).unwrap();
        let v: Vec<f64> = traj.states.iter().map(|s| s[0] * s[0]).collect();
        let report = check_decay_inequality(&traj, &v, 100.0, 0.5, 2.0, 1.0, 1e-4).unwrap();
        assert!(report.violations > 0);
    }
}
