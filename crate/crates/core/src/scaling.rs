//! State-dependent scaling of vector fields and the settling-time bound
//! formulas.
//!
//! The finite-time scaling multiplies F by η‖F‖^{−λ}; the fixed-time
//! scaling by η₁‖F‖^{−λ₁} + η₂‖F‖^{λ₂}. Both vanish with F, so the scaled
//! right-hand side stays continuous at the equilibrium.

use crate::error::{FtError, Result};
use crate::field::VectorField;
use crate::linalg::norm;
use crate::scalar::{lit, Scalar};

/// Scaling applied to a base field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingParams<S> {
    /// Unscaled dynamics (σ ≡ 1).
    None,
    /// σ = η‖F‖^{−λ}, η > 0, λ ∈ (0, 1).
    Finite { eta: S, lambda: S },
    /// σ = η₁‖F‖^{−λ₁} + η₂‖F‖^{λ₂}, η₁, η₂, λ₂ > 0, λ₁ ∈ (0, 1).
    Fixed { eta1: S, eta2: S, lambda1: S, lambda2: S },
}

impl<S: Scalar> ScalingParams<S> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: S| {
            if v > S::zero() {
                Ok(())
            } else {
                Err(FtError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        let unit_interval = |name: &str, v: S| {
            if v > S::zero() && v < S::one() {
                Ok(())
            } else {
                Err(FtError::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        match *self {
            ScalingParams::None => Ok(()),
            ScalingParams::Finite { eta, lambda } => {
                positive("eta", eta)?;
                unit_interval("lambda", lambda)
            }
            ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 } => {
                positive("eta1", eta1)?;
                positive("eta2", eta2)?;
                unit_interval("lambda1", lambda1)?;
                positive("lambda2", lambda2)
            }
        }
    }

    /// Numeric zero threshold ε_F = 1e-12 · (1 + ‖x‖) below which σF is
    /// taken to be exactly zero.
    pub fn zero_threshold(state_norm: S) -> S {
        lit::<S>(1e-12) * (S::one() + state_norm)
    }

    /// σ as a function of ‖F(x)‖ (1 for the unscaled variant). Callers must
    /// guard the ‖F‖ → 0 branch themselves via [`Self::zero_threshold`].
    pub fn sigma(&self, field_norm: S) -> S {
        match *self {
            ScalingParams::None => S::one(),
            ScalingParams::Finite { eta, lambda } => eta * field_norm.powf(-lambda),
            ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 } => {
                eta1 * field_norm.powf(-lambda1) + eta2 * field_norm.powf(lambda2)
            }
        }
    }

    /// Scales `field_value` in place given the state norm; returns
    /// (‖F‖, σ). Below the zero threshold the output is zeroed and σ = 0.
    pub fn apply(&self, state_norm: S, field_value: &mut [S]) -> (S, S) {
        let f_norm = norm(field_value);
        if matches!(self, ScalingParams::None) {
            return (f_norm, S::one());
        }
        if f_norm <= Self::zero_threshold(state_norm) {
            for v in field_value.iter_mut() {
                *v = S::zero();
            }
            return (f_norm, S::zero());
        }
        let sigma = self.sigma(f_norm);
        for v in field_value.iter_mut() {
            *v = *v * sigma;
        }
        (f_norm, sigma)
    }
}

/// Wraps F into the scaled field σ(x)F(x).
pub fn scaled_field<S: Scalar>(
    base: &VectorField<S>,
    params: ScalingParams<S>,
) -> Result<VectorField<S>> {
    params.validate()?;
    let inner = base.clone();
    let dim = base.dim();
    let field = VectorField::new(dim, move |x, out| {
        inner.eval_into(x, out);
        params.apply(norm(x), out);
    });
    match base.equilibrium() {
        Some(z) => field.with_equilibrium(z.to_vec()),
        None => Ok(field),
    }
}

/// G(x) = η‖F(x)‖^{−λ} F(x), with G = 0 at F = 0.
pub fn finite_scale<S: Scalar>(
    base: &VectorField<S>,
    eta: S,
    lambda: S,
) -> Result<VectorField<S>> {
    scaled_field(base, ScalingParams::Finite { eta, lambda })
}

/// G(x) = (η₁‖F(x)‖^{−λ₁} + η₂‖F(x)‖^{λ₂}) F(x), with G = 0 at F = 0.
pub fn fixed_scale<S: Scalar>(
    base: &VectorField<S>,
    eta1: S,
    eta2: S,
    lambda1: S,
    lambda2: S,
) -> Result<VectorField<S>> {
    scaled_field(base, ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 })
}

/// Lyapunov and regularity constants feeding the settling-time bounds:
/// k₁‖x‖² ≤ V ≤ k₂‖x‖², V̇ ≤ −k₃‖x‖², ‖F(x)−F(y)‖ ≤ L‖x−y‖,
/// ‖F(x)‖ ≥ m‖x‖^β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants<S> {
    pub k1: S,
    pub k2: S,
    pub k3: S,
    pub l: S,
    pub m: S,
    pub beta: S,
}

impl<S: Scalar> LyapunovConstants<S> {
    pub fn new(k1: S, k2: S, k3: S, l: S, m: S, beta: S) -> Result<Self> {
        for (name, v) in [("k1", k1), ("k2", k2), ("k3", k3), ("L", l), ("m", m), ("beta", beta)]
        {
            if v <= S::zero() {
                return Err(FtError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if k1 > k2 {
            return Err(FtError::InvalidParameter(format!(
                "k1 must not exceed k2, got k1 = {k1}, k2 = {k2}"
            )));
        }
        Ok(Self { k1, k2, k3, l, m, beta })
    }
}

/// Which bound formula produced a [`SettlingBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    FiniteThm1,
    FixedThm2,
    Lemma2,
    Lemma3,
}

/// A settling-time upper bound in the time units of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SettlingBound<S> {
    pub value: S,
    pub kind: BoundKind,
    pub inputs_echo: String,
}

fn check_bound<S: Scalar>(value: S, kind: BoundKind, inputs_echo: String) -> Result<SettlingBound<S>> {
    if !(value.is_finite() && value >= S::zero()) {
        return Err(FtError::InvalidParameter(format!(
            "settling bound is not finite and nonnegative: {value}"
        )));
    }
    Ok(SettlingBound { value, kind, inputs_echo })
}

/// Finite-time bound T(x(0)) ≤ (2k₂L^λ)/(k₃ηλ) · ‖x(0)‖^λ.
pub fn thm1_bound<S: Scalar>(
    k: &LyapunovConstants<S>,
    eta: S,
    lambda: S,
    x0_norm: S,
) -> Result<SettlingBound<S>> {
    ScalingParams::Finite { eta, lambda }.validate()?;
    let two = lit::<S>(2.0);
    let value = two * k.k2 * k.l.powf(lambda) / (k.k3 * eta * lambda) * x0_norm.powf(lambda);
    check_bound(
        value,
        BoundKind::FiniteThm1,
        format!("k2={}, k3={}, L={}, eta={eta}, lambda={lambda}, x0_norm={x0_norm}", k.k2, k.k3, k.l),
    )
}

/// Fixed-time bound
/// T̄ ≤ (2k₂^{1+βλ₂/2}/k₃) · (2L^{λ₁}/(η₁λ₁) + 1/(η₂m^{λ₂}βλ₂)),
/// independent of the initial condition.
pub fn thm2_bound<S: Scalar>(
    k: &LyapunovConstants<S>,
    eta1: S,
    eta2: S,
    lambda1: S,
    lambda2: S,
) -> Result<SettlingBound<S>> {
    ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 }.validate()?;
    let two = lit::<S>(2.0);
    let half = lit::<S>(0.5);
    let outer = two * k.k2.powf(S::one() + k.beta * lambda2 * half) / k.k3;
    let term1 = two * k.l.powf(lambda1) / (eta1 * lambda1);
    let term2 = S::one() / (eta2 * k.m.powf(lambda2) * k.beta * lambda2);
    check_bound(
        outer * (term1 + term2),
        BoundKind::FixedThm2,
        format!(
            "k2={}, k3={}, L={}, m={}, beta={}, eta1={eta1}, eta2={eta2}, lambda1={lambda1}, lambda2={lambda2}",
            k.k2, k.k3, k.l, k.m, k.beta
        ),
    )
}

/// Finite-time bound from the decay inequality V̇ ≤ −cV^α:
/// T ≤ V₀^{1−α}/(c(1−α)).
pub fn lemma2_bound<S: Scalar>(v0: S, c: S, alpha: S) -> Result<SettlingBound<S>> {
    if c <= S::zero() {
        return Err(FtError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(FtError::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if v0 < S::zero() {
        return Err(FtError::InvalidParameter(format!("V0 must be nonnegative, got {v0}")));
    }
    check_bound(
        v0.powf(S::one() - alpha) / (c * (S::one() - alpha)),
        BoundKind::Lemma2,
        format!("V0={v0}, c={c}, alpha={alpha}"),
    )
}

/// Fixed-time bound from V̇ ≤ −c₁V^{α₁} − c₂V^{α₂}:
/// T̄ < 1/(c₁(1−α₁)) + 1/(c₂(α₂−1)).
pub fn lemma3_bound<S: Scalar>(c1: S, alpha1: S, c2: S, alpha2: S) -> Result<SettlingBound<S>> {
    if c1 <= S::zero() || c2 <= S::zero() {
        return Err(FtError::InvalidParameter("c1 and c2 must be positive".into()));
    }
    if !(alpha1 > S::zero() && alpha1 < S::one()) {
        return Err(FtError::InvalidParameter(format!("alpha1 must lie in (0, 1), got {alpha1}")));
    }
    if alpha2 <= S::one() {
        return Err(FtError::InvalidParameter(format!(
            "alpha2 must exceed 1, got {alpha2}"
        )));
    }
    check_bound(
        (c1 * (S::one() - alpha1)).recip() + (c2 * (alpha2 - S::one())).recip(),
        BoundKind::Lemma3,
        format!("c1={c1}, alpha1={alpha1}, c2={c2}, alpha2={alpha2}"),
    )
}

/// The (c₁, α₁, c₂, α₂) pair certified by the fixed-time scaling:
/// α₁ = 1 − λ₁/2, c₁ = k₃η₁/(L^{λ₁}k₂^{α₁}),
/// α₂ = 1 + βλ₂/2, c₂ = k₃η₂m^{λ₂}/k₂^{α₂}.
pub fn fixed_time_decay_constants<S: Scalar>(
    k: &LyapunovConstants<S>,
    eta1: S,
    eta2: S,
    lambda1: S,
    lambda2: S,
) -> (S, S, S, S) {
    let half = lit::<S>(0.5);
    let alpha1 = S::one() - lambda1 * half;
    let alpha2 = S::one() + k.beta * lambda2 * half;
    let c1 = k.k3 * eta1 / (k.l.powf(lambda1) * k.k2.powf(alpha1));
    let c2 = k.k3 * eta2 * k.m.powf(lambda2) / k.k2.powf(alpha2);
    (c1, alpha1, c2, alpha2)
}
