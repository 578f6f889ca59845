//! Proximal operators and the Moreau envelope.
//!
//! `prox_{μg}(v)` minimizes g(w) + (1/2μ)‖w − v‖² and the Moreau envelope
//! M_{μg}(v) is the attained value; its gradient is (v − prox_{μg}(v))/μ.

use std::sync::Arc;

use crate::error::{FtError, Result};
use crate::linalg::dist;
use crate::scalar::Scalar;

type ProxFn<S> = dyn Fn(&[S], S) -> Vec<S> + Send + Sync;
type ValueFn<S> = dyn Fn(&[S]) -> S + Send + Sync;

/// A convex function g together with its proximal map.
///
/// `value` may return +∞ for indicator functions. Values are immutable and
/// evaluable concurrently.
#[derive(Clone)]
pub struct ProxFunction<S: Scalar> {
    dim: usize,
    prox: Arc<ProxFn<S>>,
    value: Arc<ValueFn<S>>,
}

impl<S: Scalar> ProxFunction<S> {
    pub fn new(
        dim: usize,
        prox: impl Fn(&[S], S) -> Vec<S> + Send + Sync + 'static,
        value: impl Fn(&[S]) -> S + Send + Sync + 'static,
    ) -> Self {
        Self { dim, prox: Arc::new(prox), value: Arc::new(value) }
    }

    /// g = ‖·‖₁ with the componentwise soft threshold as prox.
    pub fn l1(dim: usize) -> Self {
        Self::new(
            dim,
            |v, mu| v.iter().map(|&vi| soft_threshold(vi, mu)).collect(),
            |w| w.iter().map(|&wi| wi.abs()).sum(),
        )
    }

    /// g ≡ 0; the prox is the identity.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |v, _mu| v.to_vec(), |_w| S::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prox(&self, v: &[S], mu: S) -> Result<Vec<S>> {
        check_mu(mu)?;
        if v.len() != self.dim {
            return Err(FtError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok((self.prox)(v, mu))
    }

    /// Unchecked prox for hot paths.
    #[inline]
    pub fn prox_unchecked(&self, v: &[S], mu: S) -> Vec<S> {
        (self.prox)(v, mu)
    }

    pub fn value(&self, w: &[S]) -> S {
        (self.value)(w)
    }
}

fn check_mu<S: Scalar>(mu: S) -> Result<()> {
    if mu <= S::zero() {
        return Err(FtError::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// Soft threshold of a single component; the boundary |v| = μ maps to 0.
#[inline]
pub fn soft_threshold<S: Scalar>(v: S, mu: S) -> S {
    let shrunk = v.abs() - mu;
    if shrunk > S::zero() {
        shrunk * v.signum()
    } else {
        S::zero()
    }
}

/// Componentwise soft threshold: prox of μ‖·‖₁.
pub fn prox_l1<S: Scalar>(v: &[S], mu: S) -> Result<Vec<S>> {
    check_mu(mu)?;
    Ok(v.iter().map(|&vi| soft_threshold(vi, mu)).collect())
}

/// Moreau envelope value M_{μg}(v) = g(p) + (1/2μ)‖p − v‖² at p = prox_{μg}(v).
pub fn moreau_value<S: Scalar>(g: &ProxFunction<S>, v: &[S], mu: S) -> Result<S> {
    let p = g.prox(v, mu)?;
    let d = dist(&p, v);
    Ok(g.value(&p) + d * d / (mu + mu))
}

/// Moreau envelope gradient ∇M_{μg}(v) = (v − prox_{μg}(v))/μ.
pub fn moreau_grad<S: Scalar>(g: &ProxFunction<S>, v: &[S], mu: S) -> Result<Vec<S>> {
    let p = g.prox(v, mu)?;
    Ok(v.iter().zip(&p).map(|(&vi, &pi)| (vi - pi) / mu).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Brute-force 1-D prox oracle: two-stage grid minimization of
    /// |w| + (1/2μ)(w − v)² over [-20, 20], final resolution 1e-6.
    fn prox_l1_oracle(v: f64, mu: f64) -> f64 {
        let objective = |w: f64| w.abs() + (w - v) * (w - v) / (2.0 * mu);
        let mut best = grid_min(&objective, -20.0, 20.0, 1e-3);
        best = grid_min(&objective, best - 2e-3, best + 2e-3, 1e-6);
        best
    }

    fn grid_min(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).ceil() as usize;
        let mut best_w = lo;
        let mut best_v = f(lo);
        for k in 1..=n {
            let w = lo + step * k as f64;
            let fv = f(w);
            if fv < best_v {
                best_v = fv;
                best_w = w;
            }
        }
        best_w
    }

    #[test]
    fn prox_matches_brute_force_oracle() {
        // frozen oracle values: grid minimization of |w| + ½(w−v)²
        assert_abs_diff_eq!(prox_l1_oracle(3.0, 1.0), 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(prox_l1_oracle(0.5, 1.0), 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(prox_l1(&[3.0], 1.0).unwrap()[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(prox_l1(&[0.5], 1.0).unwrap()[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn prox_of_zero_is_zero() {
        for mu in [0.1, 1.0, 7.0] {
            assert_eq!(prox_l1(&[0.0, 0.0, 0.0], mu).unwrap(), vec![0.0; 3]);
        }
    }

    #[test]
    fn boundary_maps_to_exact_zero() {
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
        assert_eq!(soft_threshold(-1.0, 1.0), 0.0);
    }

    #[test]
    fn nonpositive_mu_rejected() {
        assert!(prox_l1(&[1.0], 0.0).is_err());
        assert!(prox_l1(&[1.0], -1.0).is_err());
        let g = ProxFunction::<f64>::l1(1);
        assert!(moreau_value(&g, &[1.0], -0.5).is_err());
        assert!(moreau_grad(&g, &[1.0], 0.0).is_err());
    }

    #[test]
    fn moreau_value_examples() {
        let g = ProxFunction::l1(1);
        // oracle: min over grid of |w| + ½(w−3)² is 2 + 0.5 = 2.5
        assert_abs_diff_eq!(moreau_value(&g, &[3.0], 1.0).unwrap(), 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(moreau_value(&g, &[0.0], 1.0).unwrap(), 0.0, epsilon = 1e-12);
        let zero = ProxFunction::zero(3);
        assert_eq!(moreau_value(&zero, &[1.0, -2.0, 0.3], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn moreau_grad_examples() {
        let g = ProxFunction::l1(1);
        assert_abs_diff_eq!(moreau_grad(&g, &[3.0], 1.0).unwrap()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moreau_grad(&g, &[0.5], 1.0).unwrap()[0], 0.5, epsilon = 1e-12);
        // at a fixed point of the prox the gradient vanishes
        let zero = ProxFunction::zero(2);
        assert_eq!(moreau_grad(&zero, &[0.4, -1.1], 2.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn envelope_is_lower_bound_on_g() {
        let g = ProxFunction::l1(4);
        let vs = [[0.3, -2.0, 5.0, 0.0], [1.0, 1.0, -1.0, 0.5], [-4.0, 0.01, 2.5, -0.2]];
        for v in vs {
            let env = moreau_value(&g, &v, 0.7).unwrap();
            assert!(env <= g.value(&v) + 1e-12);
        }
    }
}
