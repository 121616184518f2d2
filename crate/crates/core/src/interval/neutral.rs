//! Backward decay near a neutral fixed point and the breakdown of strong
//! gluing it causes.

use super::roots::solve_tau;
use super::{NeutralIntervalMap, Regime};
use crate::scalar::Scalar;
use crate::system::System;
use crate::{Error, Result};

/// Backward iterates `τ^{-n}(v)` and the fitted power-law exponent.
#[derive(Debug, Clone)]
pub struct DecayProfile<S> {
    /// `values[n] = τ^{-n}(v)` for `n = 0..=steps`.
    pub values: Vec<S>,
    /// `γ̂` with `τ^{-n}(v) ≈ K n^{-γ̂}` on the fit range.
    pub gamma_hat: S,
    /// RMS residual of the log-log fit.
    pub residual: S,
    /// `1/α` (infinite when `α = 0`).
    pub inverse_alpha: S,
    pub fit_range: (usize, usize),
}

/// Iterates the inverse of `τ(v) = v + R v^{1+α}` `steps` times from `v` and
/// fits `log τ^{-n}(v)` against `log n` on `[max(10, steps/100), steps]`.
pub fn neutral_rate_probe<S: Scalar>(r: S, alpha: S, v: S, steps: usize) -> DecayProfile<S> {
    let mut values = Vec::with_capacity(steps + 1);
    let mut u = v;
    values.push(u);
    // τ(1) ≥ 1 bounds every preimage of a point in [0, 1]
    let cap = S::one().max(v);
    for _ in 0..steps {
        u = solve_tau(r, alpha, u, cap);
        values.push(u);
    }
    let lo = (steps / 100).max(10).min(steps);
    let (gamma_hat, residual) = fit_decay_exponent(&values, lo, steps);
    DecayProfile {
        values,
        gamma_hat,
        residual,
        inverse_alpha: alpha.recip(),
        fit_range: (lo, steps),
    }
}

/// Least-squares slope of `log values[n]` on `log n` for `n ∈ [lo, hi]`,
/// returned negated, together with the RMS residual. Zero entries are skipped.
pub fn fit_decay_exponent<S: Scalar>(values: &[S], lo: usize, hi: usize) -> (S, S) {
    let pts: Vec<(S, S)> = (lo.max(1)..=hi.min(values.len().saturating_sub(1)))
        .filter(|n| values[*n] > S::zero())
        .map(|n| (S::from_int(n as i64).ln(), values[n].ln()))
        .collect();
    if pts.len() < 2 {
        return (S::nan(), S::nan());
    }
    let m = S::from_int(pts.len() as i64);
    let mx = pts.iter().map(|p| p.0).sum::<S>() / m;
    let my = pts.iter().map(|p| p.1).sum::<S>() / m;
    let sxx: S = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: S = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: S = pts
        .iter()
        .map(|p| {
            let e = p.1 - (icpt + slope * p.0);
            e * e
        })
        .sum();
    (-slope, (ss / m).sqrt())
}

/// One row of the strong-gluing failure experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureRow<S> {
    pub separation: S,
    /// `sup_k ρ(x_k, z_k) / s` over the backward window.
    pub sup_ratio: S,
    /// `Σ_k ρ(x_k, z_k) / s`: the least `Φ` any strong rate certifying this
    /// pair could have on the window.
    pub sum_ratio: S,
}

/// Glues the fixed orbit at 0 (backward window of `backward_len` steps) to
/// the forward orbit of each separation `s` and records the relative errors.
pub fn gluing_ratio_profile<S: Scalar>(
    map: &NeutralIntervalMap<S>,
    separations: &[S],
    backward_len: usize,
) -> Result<Vec<FailureRow<S>>> {
    let left = vec![S::zero(); backward_len];
    separations
        .iter()
        .map(|&s| {
            let cert = map.glue(&left, &[s])?;
            let rel = cert.relative_errors();
            let back = &rel[..backward_len];
            Ok(FailureRow {
                separation: cert.separation,
                sup_ratio: back.iter().copied().fold(S::zero(), S::max),
                sum_ratio: back.iter().copied().sum(),
            })
        })
        .collect()
}

/// [`gluing_ratio_profile`] restricted to the regime `α, β > 1`, `ab ≠ 0`.
pub fn strong_gluing_failure_probe<S: Scalar>(
    map: &NeutralIntervalMap<S>,
    separations: &[S],
    backward_len: usize,
) -> Result<Vec<FailureRow<S>>> {
    if map.regime() != Regime::StrongImpossible || map.a() * map.b() == S::zero() {
        return Err(Error::Usage(format!(
            "failure probe needs α, β > 1 and ab ≠ 0 (got α={}, β={}, a={}, b={})",
            map.alpha(),
            map.beta(),
            map.a(),
            map.b()
        )));
    }
    gluing_ratio_profile(map, separations, backward_len)
}
