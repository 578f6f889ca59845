//! Randomized structural properties of the proximal calculus, the scaling
//! wrappers, and the constrained-flow penalty.

use ftflow::proximal::{moreau_grad, moreau_value, ProxFunction};
use ftflow::scaling::ScalingParams;
use proptest::prelude::*;

fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..max_len)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    /// The prox map of a convex function is nonexpansive:
    /// ‖prox(v) − prox(w)‖ ≤ ‖v − w‖.
    #[test]
    fn prox_l1_is_nonexpansive(
        v in vec_strategy(8),
        delta in vec_strategy(8),
        mu in 0.05f64..5.0,
    ) {
        let n = v.len().min(delta.len());
        let g = ProxFunction::l1(n);
        let a = &v[..n];
        let b: Vec<f64> = (0..n).map(|i| v[i] + delta[i]).collect();
        let pa = g.prox(a, mu).unwrap();
        let pb = g.prox(&b, mu).unwrap();
        let d_prox: Vec<f64> = (0..n).map(|i| pa[i] - pb[i]).collect();
        let d_in: Vec<f64> = (0..n).map(|i| a[i] - b[i]).collect();
        prop_assert!(norm(&d_prox) <= norm(&d_in) + 1e-12);
    }

    /// ∇M_{μg} matches central finite differences of M_{μg} away from the
    /// kinks of the soft threshold (|vᵢ| near μ).
    #[test]
    fn moreau_gradient_matches_finite_differences(
        v in vec_strategy(8),
        mu in 0.1f64..5.0,
    ) {
        for vi in &v {
            prop_assume!((vi.abs() - mu).abs() > 1e-2);
        }
        let g = ProxFunction::l1(v.len());
        let grad = moreau_grad(&g, &v, mu).unwrap();
        let h = 1e-6;
        for i in 0..v.len() {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[i] += h;
            vm[i] -= h;
            let fd = (moreau_value(&g, &vp, mu).unwrap()
                - moreau_value(&g, &vm, mu).unwrap())
                / (2.0 * h);
            let tol = 1e-4 * grad[i].abs().max(1.0);
            prop_assert!(
                (grad[i] - fd).abs() <= tol,
                "component {i}: grad {} vs fd {}", grad[i], fd
            );
        }
    }

    /// Scaling rescales the field by σ(‖F‖) > 0 without changing its
    /// direction, and reports the pre-scaling norm.
    #[test]
    fn scaling_preserves_direction(
        f in vec_strategy(8),
        state_norm in 0.0f64..100.0,
        eta1 in 0.1f64..10.0,
        eta2 in 0.1f64..10.0,
        lambda1 in 0.05f64..0.95,
        lambda2 in 0.5f64..4.0,
    ) {
        prop_assume!(norm(&f) > 1e-6);
        for params in [
            ScalingParams::Finite { eta: eta1, lambda: lambda1 },
            ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 },
        ] {
            let mut scaled = f.clone();
            let (f_norm, sigma) = params.apply(state_norm, &mut scaled);
            prop_assert!((f_norm - norm(&f)).abs() <= 1e-12 * (1.0 + f_norm));
            prop_assert!(sigma > 0.0);
            prop_assert!((sigma - params.sigma(f_norm)).abs() <= 1e-12 * sigma);
            for i in 0..f.len() {
                let expect = sigma * f[i];
                prop_assert!((scaled[i] - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
    }

    /// A vanishing field is mapped to exactly zero with σ = 0 (the scaled
    /// dynamics stop at the equilibrium instead of dividing by ‖F‖).
    #[test]
    fn scaling_zeroes_below_threshold(
        state_norm in 0.0f64..100.0,
        eta in 0.1f64..10.0,
        lambda in 0.05f64..0.95,
    ) {
        let eps = ScalingParams::<f64>::zero_threshold(state_norm);
        let mut tiny = vec![0.1 * eps, 0.0, 0.0];
        let params = ScalingParams::Finite { eta, lambda };
        let (_, sigma) = params.apply(state_norm, &mut tiny);
        prop_assert_eq!(sigma, 0.0);
        prop_assert!(tiny.iter().all(|&x| x == 0.0));
    }

    /// The two branches of the inequality penalty agree in value across the
    /// switching surface μv + w = 0 (the penalty is continuously
    /// differentiable there).
    #[test]
    fn genlag_penalty_is_continuous_at_the_switch(
        v in -10.0f64..10.0,
        mu in 0.05f64..5.0,
    ) {
        let w = -mu * v; // on the switching surface
        let h = 1e-7;
        let above = ftflow::flows::genlag_penalty(v, w + h, mu);
        let below = ftflow::flows::genlag_penalty(v, w - h, mu);
        let scale = 1.0 + above.abs().max(below.abs());
        // value continuity plus matched first derivative: the gap across the
        // surface shrinks like h, not like a jump
        prop_assert!((above - below).abs() <= 1e-5 * scale);
        let dw_above = (ftflow::flows::genlag_penalty(v, w + 2.0 * h, mu) - above) / h;
        let dw_below = (below - ftflow::flows::genlag_penalty(v, w - 2.0 * h, mu)) / h;
        prop_assert!((dw_above - dw_below).abs() <= 1e-4 * (1.0 + dw_above.abs()));
    }
}
