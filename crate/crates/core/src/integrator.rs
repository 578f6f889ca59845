//! Adaptive ODE integration with settling-time measurement.
//!
//! The integrator is an explicit embedded Dormand-Prince 4(5) pair with
//! proportional-integral step-size control. Scaled fields are continuous but
//! not Lipschitz at the equilibrium and grow rapidly far from it, so the
//! local error controller governs the transient and a field-norm exit fires
//! near the equilibrium before the non-Lipschitz region is entered.

use crate::error::{FtError, Result};
use crate::field::VectorField;
use crate::linalg::{dist, norm};
use crate::scalar::{lit, Scalar};
use crate::scaling::ScalingParams;

/// How densely accepted steps are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStride {
    All,
    Every(usize),
}

/// Stop integration once the state enters a ball around `target`.
#[derive(Debug, Clone)]
pub struct SettleStop<S> {
    pub target: Vec<S>,
    pub radius: S,
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions<S> {
    pub t_max: S,
    pub rel_tol: S,
    pub abs_tol: S,
    /// Initial step; defaults to min(1e-3, 0.1/(1 + ‖rhs(x₀)‖)).
    pub h_init: Option<S>,
    pub h_max: Option<S>,
    /// Terminate when the norm of the integrated right-hand side drops
    /// below this value (measured on the scaled field for scaled runs).
    pub stop_field_norm: S,
    pub record_stride: RecordStride,
    /// When set, recorded samples are chord-subdivided so that consecutive
    /// recorded states are at most this far apart.
    pub max_record_gap: Option<S>,
    pub settle_stop: Option<SettleStop<S>>,
}

impl<S: Scalar> Default for IntegrateOptions<S> {
    fn default() -> Self {
        Self {
            t_max: lit(10.0),
            rel_tol: lit(1e-8),
            abs_tol: lit(1e-10),
            h_init: None,
            h_max: None,
            stop_field_norm: lit(1e-10),
            record_stride: RecordStride::All,
            max_record_gap: None,
            settle_stop: None,
        }
    }
}

impl<S: Scalar> IntegrateOptions<S> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_max", self.t_max), ("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > S::zero()) {
                return Err(FtError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.stop_field_norm < S::zero() {
            return Err(FtError::InvalidParameter("stop_field_norm must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Why the integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TMax,
    FieldNorm,
    SettleEvent,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::TMax => "t_max",
            Termination::FieldNorm => "field_norm",
            Termination::SettleEvent => "settle_event",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

/// Time-stamped states with diagnostics. `field_norms` holds the norm of
/// the unscaled generator; `sigma_values` the scaling factor (1 when
/// unscaled).
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<Vec<S>>,
    pub field_norms: Vec<S>,
    pub sigma_values: Vec<S>,
    pub terminated_by: Termination,
}

impl<S: Scalar> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[S] {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> S {
        *self.times.last().expect("trajectory has at least one sample")
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th- and 4th-order solutions, including stage 7.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_CONSECUTIVE_REJECTS: usize = 50;

struct Recorder<S: Scalar> {
    times: Vec<S>,
    states: Vec<Vec<S>>,
    field_norms: Vec<S>,
    sigma_values: Vec<S>,
    stride: RecordStride,
    max_gap: Option<S>,
    accepted: usize,
}

impl<S: Scalar> Recorder<S> {
    fn new(stride: RecordStride, max_gap: Option<S>) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            field_norms: Vec::new(),
            sigma_values: Vec::new(),
            stride,
            max_gap,
            accepted: 0,
        }
    }

    fn push_raw(&mut self, t: S, state: &[S], field_norm: S, sigma: S) {
        self.times.push(t);
        self.states.push(state.to_vec());
        self.field_norms.push(field_norm);
        self.sigma_values.push(sigma);
    }

    /// Records an accepted step, chord-subdividing against the previous
    /// recorded state when a maximum record gap is set.
    fn push_step<F>(&mut self, t: S, state: &[S], field_norm: S, sigma: S, diag: &mut F)
    where
        F: FnMut(&[S]) -> (S, S),
    {
        self.accepted += 1;
        let due = match self.stride {
            RecordStride::All => true,
            RecordStride::Every(k) => self.accepted % k.max(1) == 0,
        };
        if !due {
            return;
        }
        if let (Some(gap), Some(prev)) = (self.max_gap, self.states.last().cloned()) {
            let prev_t = *self.times.last().unwrap();
            let d = dist(&prev, state);
            if d > gap {
                let pieces = (d / gap).to_f64().unwrap().ceil() as usize;
                for k in 1..pieces {
                    let w = lit::<S>(k as f64 / pieces as f64);
                    let mid: Vec<S> = prev
                        .iter()
                        .zip(state)
                        .map(|(&p, &s)| p + w * (s - p))
                        .collect();
                    let (fnorm, sig) = diag(&mid);
                    let tm = prev_t + w * (t - prev_t);
                    self.push_raw(tm, &mid, fnorm, sig);
                }
            }
        }
        self.push_raw(t, state, field_norm, sigma);
    }

    /// Force-records the current state if the stride skipped it.
    fn ensure_last(&mut self, t: S, state: &[S], field_norm: S, sigma: S) {
        if self.times.last().map_or(true, |&lt| lt < t) {
            self.push_raw(t, state, field_norm, sigma);
        }
    }
}

/// Integrates the (possibly scaled) system. `params` controls the scaling
/// applied on top of `base`; diagnostics always report the unscaled field
/// norm and the scaling value.
pub fn integrate_scaled<S: Scalar>(
    base: &VectorField<S>,
    params: ScalingParams<S>,
    x0: &[S],
    opts: &IntegrateOptions<S>,
) -> Result<Trajectory<S>> {
    params.validate()?;
    opts.validate()?;
    if x0.len() != base.dim() {
        return Err(FtError::DimensionMismatch { expected: base.dim(), got: x0.len() });
    }
    let dim = base.dim();

    // rhs evaluation returning (base field norm, sigma)
    let rhs = |x: &[S], out: &mut [S]| -> (S, S) {
        base.eval_into(x, out);
        params.apply(norm(x), out)
    };
    let mut diag = |x: &[S]| -> (S, S) {
        let mut scratch = vec![S::zero(); dim];
        rhs(x, &mut scratch)
    };

    let mut rec = Recorder::new(opts.record_stride, opts.max_record_gap);
    let mut t = S::zero();
    let mut y = x0.to_vec();

    let mut k: Vec<Vec<S>> = (0..7).map(|_| vec![S::zero(); dim]).collect();
    let (mut fnorm, mut sigma) = {
        let (f, s) = rhs(&y, &mut k[0]);
        (f, s)
    };
    rec.push_raw(t, &y, fnorm, sigma);

    let finish = |rec: Recorder<S>, reason: Termination| Trajectory {
        times: rec.times,
        states: rec.states,
        field_norms: rec.field_norms,
        sigma_values: rec.sigma_values,
        terminated_by: reason,
    };

    if norm(&k[0]) <= opts.stop_field_norm {
        return Ok(finish(rec, Termination::FieldNorm));
    }
    if let Some(ss) = &opts.settle_stop {
        if dist(&y, &ss.target) <= ss.radius {
            return Ok(finish(rec, Termination::SettleEvent));
        }
    }

    // progress floor: a step no longer advances t once it falls below the
    // floating-point spacing at the current time
    let h_floor = |t: S| lit::<S>(4.0) * S::epsilon() * t.abs();
    let h_max = opts.h_max.unwrap_or(opts.t_max);
    let mut h = opts.h_init.unwrap_or_else(|| {
        let g = norm(&k[0]);
        lit::<S>(1e-3).min(lit::<S>(0.1) / (S::one() + g))
    });
    h = h.min(h_max);

    let mut err_prev = S::one();
    let mut rejects = 0usize;
    let mut ynew = vec![S::zero(); dim];
    let mut stage = vec![S::zero(); dim];

    loop {
        if t >= opts.t_max {
            return Ok(finish(rec, Termination::TMax));
        }
        if h <= h_floor(t) {
            rec.ensure_last(t, &y, fnorm, sigma);
            return Ok(finish(rec, Termination::StepUnderflow));
        }
        let h_step = h.min(opts.t_max - t);

        // stages 2..6
        for s in 1..6 {
            for i in 0..dim {
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = lit::<S>(A[s - 1][j]);
                    if A[s - 1][j] != 0.0 {
                        acc = acc + a * kj[i];
                    }
                }
                stage[i] = y[i] + h_step * acc;
            }
            let ks = std::mem::take(&mut k[s]);
            let mut ks = ks;
            rhs(&stage, &mut ks);
            k[s] = ks;
        }
        // 5th-order solution (row 6 of A)
        for i in 0..dim {
            let mut acc = S::zero();
            for (j, kj) in k.iter().enumerate().take(6) {
                if A[5][j] != 0.0 {
                    acc = acc + lit::<S>(A[5][j]) * kj[i];
                }
            }
            ynew[i] = y[i] + h_step * acc;
        }
        // FSAL stage at (t + h, ynew)
        let k7 = std::mem::take(&mut k[6]);
        let mut k7 = k7;
        let (fnorm_new, sigma_new) = rhs(&ynew, &mut k7);
        k[6] = k7;

        if !ynew.iter().all(|v| v.is_finite()) || !k[6].iter().all(|v| v.is_finite()) {
            return Err(FtError::NonFiniteState { t: t.to_f64().unwrap_or(f64::NAN) });
        }

        // scaled RMS error estimate
        let mut err_sq = S::zero();
        for i in 0..dim {
            let mut e = S::zero();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e = e + lit::<S>(E[j]) * kj[i];
                }
            }
            e = e * h_step;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            let r = e / scale;
            err_sq = err_sq + r * r;
        }
        let err = (err_sq / lit::<S>(dim as f64)).sqrt();

        if err <= S::one() {
            // accept
            t = t + h_step;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            fnorm = fnorm_new;
            sigma = sigma_new;
            rejects = 0;
            rec.push_step(t, &y, fnorm, sigma, &mut diag);

            let scaled_norm = norm(&k[0]);
            if scaled_norm <= opts.stop_field_norm {
                rec.ensure_last(t, &y, fnorm, sigma);
                return Ok(finish(rec, Termination::FieldNorm));
            }
            if let Some(ss) = &opts.settle_stop {
                if dist(&y, &ss.target) <= ss.radius {
                    rec.ensure_last(t, &y, fnorm, sigma);
                    return Ok(finish(rec, Termination::SettleEvent));
                }
            }
            if t >= opts.t_max {
                rec.ensure_last(t, &y, fnorm, sigma);
                return Ok(finish(rec, Termination::TMax));
            }

            // PI controller (k_I = 0.7/5, k_P = 0.4/5)
            let e_clamped = err.max(lit::<S>(1e-10));
            let fac = lit::<S>(0.9)
                * e_clamped.powf(lit::<S>(-0.14))
                * err_prev.powf(lit::<S>(0.08));
            let fac = fac.min(lit::<S>(5.0)).max(lit::<S>(0.2));
            h = (h_step * fac).min(h_max);
            err_prev = e_clamped;
        } else {
            rejects += 1;
            if rejects > MAX_CONSECUTIVE_REJECTS {
                return Err(FtError::StepControlStalled(rejects));
            }
            let fac = (lit::<S>(0.9) * err.powf(lit::<S>(-0.2))).max(lit::<S>(0.2));
            h = h_step * fac;
            err_prev = S::one();
        }
    }
}

/// Integrates an unscaled field; diagnostics carry σ = 1.
pub fn integrate<S: Scalar>(
    field: &VectorField<S>,
    x0: &[S],
    opts: &IntegrateOptions<S>,
) -> Result<Trajectory<S>> {
    integrate_scaled(field, ScalingParams::None, x0, opts)
}

/// First time the trajectory enters the relative ball
/// ‖x − target‖ ≤ δ·max(1, ‖target‖), linearly interpolated between the
/// bracketing samples. `None` if the ball is never reached.
pub fn settling_time<S: Scalar>(
    traj: &Trajectory<S>,
    target: &[S],
    delta_rel: S,
) -> Result<Option<S>> {
    if traj.is_empty() {
        return Err(FtError::Degenerate("empty trajectory".into()));
    }
    if target.len() != traj.states[0].len() {
        return Err(FtError::DimensionMismatch {
            expected: traj.states[0].len(),
            got: target.len(),
        });
    }
    if delta_rel <= S::zero() {
        return Err(FtError::InvalidParameter(format!(
            "delta_rel must be positive, got {delta_rel}"
        )));
    }
    let threshold = delta_rel * S::one().max(norm(target));
    let mut prev_d = dist(&traj.states[0], target);
    if prev_d <= threshold {
        return Ok(Some(S::zero()));
    }
    for i in 1..traj.len() {
        let d = dist(&traj.states[i], target);
        if d <= threshold {
            let (t0, t1) = (traj.times[i - 1], traj.times[i]);
            let denom = prev_d - d;
            let t = if denom > S::zero() {
                t0 + (prev_d - threshold) / denom * (t1 - t0)
            } else {
                t1
            };
            return Ok(Some(t));
        }
        prev_d = d;
    }
    Ok(None)
}

/// Symmetric discrete Hausdorff distance between the sampled state
/// sequences of two trajectories.
pub fn path_distance<S: Scalar>(a: &Trajectory<S>, b: &Trajectory<S>) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(FtError::Degenerate("empty trajectory".into()));
    }
    if a.states[0].len() != b.states[0].len() {
        return Err(FtError::DimensionMismatch {
            expected: a.states[0].len(),
            got: b.states[0].len(),
        });
    }
    let d_ab = directed_hausdorff(&a.states, &b.states);
    let d_ba = directed_hausdorff(&b.states, &a.states);
    Ok(d_ab.max(d_ba))
}

fn directed_hausdorff<S: Scalar>(from: &[Vec<S>], to: &[Vec<S>]) -> S {
    let mut worst = S::zero();
    let mut hint = 0usize;
    for p in from {
        // nearest-neighbor search with early abandon, starting near the
        // previous match since the curves are traversed in order
        let mut best = S::infinity();
        let n = to.len();
        let start = hint;
        for off in 0..n {
            let fwd = start + off;
            let idx = if fwd < n { fwd } else { start.wrapping_sub(fwd - n + 1) };
            let d = dist(p, &to[idx]);
            if d < best {
                best = d;
                hint = idx;
            }
            if best <= worst {
                break;
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}
