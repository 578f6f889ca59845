//! Evaluable vector fields with an optional declared equilibrium.
//!
//! All analysis code downstream (scaling, integration, certification) works
//! on values of [`VectorField`]. Equilibria are supplied externally; this
//! module never solves for them.

use std::sync::Arc;

use crate::error::{FtError, Result};
use crate::linalg::norm;
use crate::scalar::{lit, Scalar};

type EvalFn<S> = dyn Fn(&[S], &mut [S]) + Send + Sync;

/// A dynamical generator F: ℝⁿ → ℝⁿ with a known state dimension and an
/// optionally declared equilibrium z* (the point where F(z*) = 0).
///
/// Values are immutable after construction and can be evaluated from
/// multiple threads concurrently.
#[derive(Clone)]
pub struct VectorField<S: Scalar> {
    dim: usize,
    eval: Arc<EvalFn<S>>,
    equilibrium: Option<Vec<S>>,
}

impl<S: Scalar> VectorField<S> {
    pub fn new(dim: usize, eval: impl Fn(&[S], &mut [S]) + Send + Sync + 'static) -> Self {
        Self { dim, eval: Arc::new(eval), equilibrium: None }
    }

    /// Convenience constructor from an allocating closure.
    pub fn from_fn(dim: usize, f: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static) -> Self {
        Self::new(dim, move |x, out| {
            let v = f(x);
            debug_assert_eq!(v.len(), out.len());
            out.copy_from_slice(&v);
        })
    }

    /// Declares the equilibrium, checking ‖F(z*)‖ ≤ 1e-9 · (1 + ‖z*‖).
    pub fn with_equilibrium(mut self, z_star: Vec<S>) -> Result<Self> {
        if z_star.len() != self.dim {
            return Err(FtError::DimensionMismatch { expected: self.dim, got: z_star.len() });
        }
        let mut out = vec![S::zero(); self.dim];
        (self.eval)(&z_star, &mut out);
        let residual = norm(&out);
        let tol = lit::<S>(1e-9) * (S::one() + norm(&z_star));
        if residual > tol {
            return Err(FtError::BadEquilibrium {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.equilibrium = Some(z_star);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equilibrium(&self) -> Option<&[S]> {
        self.equilibrium.as_deref()
    }

    /// Evaluates F(state) into `out` without a dimension check.
    #[inline]
    pub fn eval_into(&self, state: &[S], out: &mut [S]) {
        debug_assert_eq!(state.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.eval)(state, out);
    }

    /// Evaluates F(state), rejecting inputs of the wrong length.
    pub fn eval(&self, state: &[S]) -> Result<Vec<S>> {
        if state.len() != self.dim {
            return Err(FtError::DimensionMismatch { expected: self.dim, got: state.len() });
        }
        let mut out = vec![S::zero(); self.dim];
        (self.eval)(state, &mut out);
        Ok(out)
    }

    /// Returns G with G(u) = F(u + z*), whose equilibrium is the origin.
    pub fn shift_to_origin(&self) -> Result<Self> {
        let z_star = self.equilibrium.clone().ok_or(FtError::MissingEquilibrium)?;
        let inner = Arc::clone(&self.eval);
        let dim = self.dim;
        let shift = z_star.clone();
        let eval = move |u: &[S], out: &mut [S]| {
            let state: Vec<S> = u.iter().zip(&shift).map(|(&ui, &zi)| ui + zi).collect();
            inner(&state, out);
        };
        Ok(Self { dim, eval: Arc::new(eval), equilibrium: Some(vec![S::zero(); dim]) })
    }
}

/// Evaluates F(state) with a dimension check.
pub fn eval_field<S: Scalar>(field: &VectorField<S>, state: &[S]) -> Result<Vec<S>> {
    field.eval(state)
}

/// Returns the shifted field G(u) = F(u + z*); see [`VectorField::shift_to_origin`].
pub fn shift_to_origin<S: Scalar>(field: &VectorField<S>) -> Result<VectorField<S>> {
    field.shift_to_origin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neg_identity(dim: usize) -> VectorField<f64> {
        VectorField::new(dim, |x: &[f64], out| {
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = -xi;
            }
        })
    }

    #[test]
    fn linear_field_eval() {
        let f = neg_identity(2);
        assert_eq!(eval_field(&f, &[2.0, -3.0]).unwrap(), vec![-2.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = neg_identity(2);
        assert!(matches!(
            eval_field(&f, &[1.0]),
            Err(FtError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn equilibrium_residual_checked() {
        let f = neg_identity(2).with_equilibrium(vec![0.0, 0.0]).unwrap();
        let r = eval_field(&f, f.equilibrium().unwrap()).unwrap();
        assert!(norm(&r) <= 1e-9);

        // a point that is not an equilibrium is rejected
        assert!(matches!(
            neg_identity(2).with_equilibrium(vec![1.0, 0.0]),
            Err(FtError::BadEquilibrium { .. })
        ));
    }

    #[test]
    fn shift_translates_equilibrium() {
        // F(x) = -(x - 5), z* = 5  ->  G(u) = -u
        let f = VectorField::new(1, |x: &[f64], out| out[0] = -(x[0] - 5.0))
            .with_equilibrium(vec![5.0])
            .unwrap();
        let g = shift_to_origin(&f).unwrap();
        assert_eq!(g.eval(&[2.0]).unwrap(), vec![-2.0]);
        assert_eq!(g.equilibrium().unwrap(), &[0.0]);
    }

    #[test]
    fn shift_is_idempotent_on_origin_centered_fields() {
        let f = VectorField::new(1, |x: &[f64], out| out[0] = -(x[0] - 5.0))
            .with_equilibrium(vec![5.0])
            .unwrap();
        let g = shift_to_origin(&f).unwrap();
        let g2 = shift_to_origin(&g).unwrap();
        for x in [-3.0, 0.0, 7.5] {
            assert_eq!(g.eval(&[x]).unwrap(), g2.eval(&[x]).unwrap());
        }
    }

    #[test]
    fn eval_is_deterministic() {
        let f = neg_identity(3);
        let x = [0.1, -0.7, 2.3];
        let a = f.eval(&x).unwrap();
        let b = f.eval(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_equilibrium_rejected() {
        let f = neg_identity(1);
        assert!(matches!(shift_to_origin(&f), Err(FtError::MissingEquilibrium)));
    }
}
