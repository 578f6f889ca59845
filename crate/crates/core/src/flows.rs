//! The three concrete dynamical generators: plain gradient flow, the
//! proximal-augmented-Lagrangian primal-dual flow for composite problems,
//! and the generalized-Lagrangian primal-dual flow for linearly constrained
//! problems.

use std::sync::Arc;

use crate::field::VectorField;
use crate::linalg::{dot, Mat};
use crate::proximal::ProxFunction;
use crate::scalar::Scalar;

type ValueFn<S> = dyn Fn(&[S]) -> S + Send + Sync;
type GradFn<S> = dyn Fn(&[S]) -> Vec<S> + Send + Sync;

/// Composite problem data: minimize f(x) + g(Tx) with smooth convex f.
#[derive(Clone)]
pub struct CompositeProblem<S: Scalar> {
    pub f_value: Arc<ValueFn<S>>,
    pub f_grad: Arc<GradFn<S>>,
    pub g: ProxFunction<S>,
    pub t: Mat<S>,
    pub mu: S,
}

impl<S: Scalar> CompositeProblem<S> {
    pub fn new(
        f_value: impl Fn(&[S]) -> S + Send + Sync + 'static,
        f_grad: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static,
        g: ProxFunction<S>,
        t: Mat<S>,
        mu: S,
    ) -> Self {
        assert_eq!(g.dim(), t.rows(), "g dimension must match the row count of T");
        assert!(mu > S::zero(), "mu must be positive");
        Self { f_value: Arc::new(f_value), f_grad: Arc::new(f_grad), g, t, mu }
    }

    pub fn primal_dim(&self) -> usize {
        self.t.cols()
    }

    pub fn dual_dim(&self) -> usize {
        self.t.rows()
    }

    /// Proximal augmented Lagrangian value
    /// ℒ_μ(x; y) = f(x) + M_{μg}(Tx + μy) − (μ/2)‖y‖².
    pub fn lagrangian(&self, x: &[S], y: &[S]) -> S {
        let v = self.pal_inner(x, y);
        let p = self.g.prox_unchecked(&v, self.mu);
        let d = crate::linalg::dist(&p, &v);
        let envelope = self.g.value(&p) + d * d / (self.mu + self.mu);
        let half = crate::scalar::lit::<S>(0.5);
        (self.f_value)(x) + envelope - half * self.mu * dot(y, y)
    }

    pub(crate) fn pal_inner(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut v = self.t.matvec(x);
        for (vi, &yi) in v.iter_mut().zip(y) {
            *vi = *vi + self.mu * yi;
        }
        v
    }
}

/// Linearly constrained problem data: minimize f(x) s.t. Ax ≤ b, Cx = d.
#[derive(Clone)]
pub struct ConstrainedProblem<S: Scalar> {
    pub f_value: Arc<ValueFn<S>>,
    pub f_grad: Arc<GradFn<S>>,
    pub a: Mat<S>,
    pub b: Vec<S>,
    pub c_eq: Option<Mat<S>>,
    pub d_eq: Option<Vec<S>>,
    pub mu: S,
}

impl<S: Scalar> ConstrainedProblem<S> {
    pub fn new(
        f_value: impl Fn(&[S]) -> S + Send + Sync + 'static,
        f_grad: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static,
        a: Mat<S>,
        b: Vec<S>,
        c_eq: Option<Mat<S>>,
        d_eq: Option<Vec<S>>,
        mu: S,
    ) -> Self {
        assert_eq!(b.len(), a.rows(), "length of b must match the row count of A");
        if let (Some(c), Some(d)) = (&c_eq, &d_eq) {
            assert_eq!(d.len(), c.rows(), "length of d must match the row count of C");
        }
        assert_eq!(c_eq.is_some(), d_eq.is_some(), "C and d must be supplied together");
        assert!(mu > S::zero(), "mu must be positive");
        Self { f_value: Arc::new(f_value), f_grad: Arc::new(f_grad), a, b, c_eq, d_eq, mu }
    }

    pub fn primal_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn ineq_count(&self) -> usize {
        self.a.rows()
    }

    pub fn eq_count(&self) -> usize {
        self.c_eq.as_ref().map_or(0, Mat::rows)
    }

    /// Total state dimension of the primal-dual flow: n + d_ineq + d_eq.
    pub fn state_dim(&self) -> usize {
        self.primal_dim() + self.ineq_count() + self.eq_count()
    }

    /// Generalized Lagrangian value
    /// 𝒢_μ(x; y, ν) = f(x) + Σ h_μ(aᵢᵀx − bᵢ, yᵢ) + νᵀ(Cx − d).
    pub fn lagrangian(&self, x: &[S], y: &[S], nu: &[S]) -> S {
        let mut total = (self.f_value)(x);
        for (i, &yi) in y.iter().enumerate() {
            total = total + genlag_penalty(dot(self.a.row(i), x) - self.b[i], yi, self.mu);
        }
        if let (Some(c), Some(d)) = (&self.c_eq, &self.d_eq) {
            for (i, &nui) in nu.iter().enumerate() {
                total = total + nui * (dot(c.row(i), x) - d[i]);
            }
        }
        total
    }
}

/// ẋ = −∇f(x), the base exponentially stable flow for strongly convex f.
pub fn gradient_flow<S: Scalar>(
    f_grad: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static,
    dim: usize,
) -> VectorField<S> {
    VectorField::new(dim, move |x, out| {
        let g = f_grad(x);
        for (o, &gi) in out.iter_mut().zip(&g) {
            *o = -gi;
        }
    })
}

/// Primal-dual flow of the proximal augmented Lagrangian on z = (x, y):
///
/// ẋ = −∇f(x) − Tᵀ∇M_{μg}(Tx + μy),  ẏ = μ(∇M_{μg}(Tx + μy) − y).
pub fn pal_field<S: Scalar>(problem: &CompositeProblem<S>) -> VectorField<S> {
    let p = problem.clone();
    let n = p.primal_dim();
    let d = p.dual_dim();
    VectorField::new(n + d, move |z, out| {
        let (x, y) = z.split_at(n);
        let v = p.pal_inner(x, y);
        let prox = p.g.prox_unchecked(&v, p.mu);
        // ∇M_{μg}(v) = (v − prox)/μ
        let gm: Vec<S> = v.iter().zip(&prox).map(|(&vi, &pi)| (vi - pi) / p.mu).collect();
        let grad_f = (p.f_grad)(x);
        let tt_gm = p.t.t_matvec(&gm);
        for i in 0..n {
            out[i] = -grad_f[i] - tt_gm[i];
        }
        for i in 0..d {
            out[n + i] = p.mu * (gm[i] - y[i]);
        }
    })
}

/// The penalty h_μ(v, w): vw + μv²/2 on μv + w ≥ 0, −w²/(2μ) otherwise.
/// Both branches agree (value and gradient) on the boundary μv + w = 0.
pub fn genlag_penalty<S: Scalar>(v: S, w: S, mu: S) -> S {
    let half = crate::scalar::lit::<S>(0.5);
    if mu * v + w >= S::zero() {
        v * w + half * mu * v * v
    } else {
        -w * w / (mu + mu)
    }
}

/// Primal-dual flow of the generalized Lagrangian on z = (x, y, ν):
///
/// ẋ  = −∇f(x) − Σᵢ max(μ(aᵢᵀx − bᵢ) + yᵢ, 0)·aᵢ − Cᵀν
/// ẏᵢ = (1/μ)·max(μ(aᵢᵀx − bᵢ), −yᵢ)
/// ν̇  = Cx − d
pub fn genlag_field<S: Scalar>(problem: &ConstrainedProblem<S>) -> VectorField<S> {
    let p = problem.clone();
    let n = p.primal_dim();
    let di = p.ineq_count();
    let de = p.eq_count();
    VectorField::new(n + di + de, move |z, out| {
        let x = &z[..n];
        let y = &z[n..n + di];
        let nu = &z[n + di..];
        let grad_f = (p.f_grad)(x);
        for (o, &gi) in out[..n].iter_mut().zip(&grad_f) {
            *o = -gi;
        }
        for i in 0..di {
            let slack = dot(p.a.row(i), x) - p.b[i];
            let weight = (p.mu * slack + y[i]).max(S::zero());
            if weight > S::zero() {
                for (o, &aij) in out[..n].iter_mut().zip(p.a.row(i)) {
                    *o = *o - weight * aij;
                }
            }
            out[n + i] = (p.mu * slack).max(-y[i]) / p.mu;
        }
        if let (Some(c), Some(d)) = (&p.c_eq, &p.d_eq) {
            for i in 0..de {
                let nui = nu[i];
                for (o, &cij) in out[..n].iter_mut().zip(c.row(i)) {
                    *o = *o - nui * cij;
                }
                out[n + di + i] = dot(c.row(i), x) - d[i];
            }
        }
    })
}
