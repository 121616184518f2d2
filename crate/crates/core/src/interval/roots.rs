//! Inversion of the monotone branch profile `τ(w) = w + R w^{1+α}`.

use crate::scalar::Scalar;

/// `τ(w) = w + R w^{1+α}` for `w ≥ 0`.
pub fn tau<S: Scalar>(r: S, alpha: S, w: S) -> S {
    if w <= S::zero() {
        return S::zero();
    }
    w + r * w.powf(S::one() + alpha)
}

fn tau_prime<S: Scalar>(r: S, alpha: S, w: S) -> S {
    if w <= S::zero() {
        return if alpha == S::zero() { S::one() + r } else { S::one() };
    }
    S::one() + r * (S::one() + alpha) * w.powf(alpha)
}

/// Solves `τ(w) = target` for `w ∈ [0, cap]`, assuming `τ` increasing there.
///
/// Bisection keeps the bracket; Newton steps are taken when the derivative
/// exceeds `1e-3` and the step lands inside the bracket. Closed form for `α = 0`.
pub fn solve_tau<S: Scalar>(r: S, alpha: S, target: S, cap: S) -> S {
    if target <= S::zero() {
        return S::zero();
    }
    if alpha == S::zero() {
        return (target / (S::one() + r)).min(cap);
    }
    let mut lo = S::zero();
    let mut hi = cap;
    if tau(r, alpha, hi) <= target {
        return hi;
    }
    let four_eps = S::epsilon() * S::lit(4.0);
    let d_min = S::lit(1e-3);
    let mut w = (target / (S::one() + r)).max(S::zero()).min(cap);
    for _ in 0..400 {
        let f = tau(r, alpha, w) - target;
        if f == S::zero() {
            return w;
        }
        if f > S::zero() {
            hi = w;
        } else {
            lo = w;
        }
        let d = tau_prime(r, alpha, w);
        let newton = if d > d_min { w - f / d } else { S::nan() };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) / S::lit(2.0)
        };
        let step = (next - w).abs();
        w = next;
        if step <= four_eps * w.abs() || hi - lo <= four_eps * hi {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_branch_matches_formula() {
        // u + u^2 = 1/2
        let u = solve_tau(1.0f64, 1.0, 0.5, 1.0);
        let exact = (-1.0 + 3.0f64.sqrt()) / 2.0;
        assert!((u - exact).abs() < 1e-14, "{u} vs {exact}");
    }

    #[test]
    fn tiny_targets_keep_relative_precision() {
        let v = 1e-12;
        let u = solve_tau(4.0f64, 2.0, v, 1.0);
        assert!(((tau(4.0, 2.0, u) - v) / v).abs() < 1e-14);
    }

    #[test]
    fn sqrt_profile_inverts() {
        let r = std::f64::consts::SQRT_2;
        for &v in &[1e-9, 1e-4, 0.3, 0.99, 1.0] {
            let u = solve_tau(r, 0.5, v, 0.5);
            assert!((tau(r, 0.5, u) - v).abs() < 1e-15 + 1e-14 * v);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let u = solve_tau(1.0f32, 1.0, 0.5, 1.0);
        assert!((u - 0.366_025_4).abs() < 1e-6);
    }
}
