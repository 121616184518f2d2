//! The shadowing bounds: gap recursion, gap sums, the product lemma and the
//! final `ε Φ e^Φ` estimate.

use std::collections::BTreeMap;

use crate::rate::{GluingRate, RateFunction, Strength};
use crate::scalar::Scalar;
use crate::system::System;
use crate::trajectory::{shadow_error_average, shadow_error_uniform, Orbit, PseudoTrajectory};
use crate::{Error, Result};

use super::ShadowRun;

const REL: f64 = 1e-9;
const ABS: f64 = 1e-12;

fn within<S: Scalar>(value: S, bound: S) -> bool {
    value <= bound * (S::one() + S::tol(REL)) + S::tol(ABS)
}

/// `(∏(1 + b_k), e^{Σ b_k})`.
pub fn product_bound<S: Scalar>(b: &[S]) -> Result<(S, S)> {
    if let Some(i) = b.iter().position(|v| !(*v >= S::zero() && v.is_finite())) {
        return Err(Error::Usage(format!("entry {i} is negative or not finite")));
    }
    let prod = b.iter().fold(S::one(), |p, v| p * (S::one() + *v));
    let sum: S = b.iter().copied().sum();
    Ok((prod, sum.exp()))
}

/// The rate consumed by the bounds: symmetrised monotone envelope of the
/// certified rate on `[−radius, radius]`.
pub fn shadowing_rate<S: Scalar>(rate: &GluingRate<S>, radius: i64) -> RateFunction<S> {
    rate.truncate(radius).symmetrize().monotone_envelope()
}

/// `ε Φ e^Φ` and the gap-sum factor `e^Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremBound<S> {
    pub epsilon: S,
    pub phi: S,
    pub bound: S,
    pub gap_sum_factor: S,
}

pub fn theorem_bound<S: Scalar>(epsilon: S, phi: S) -> Result<TheoremBound<S>> {
    if !(epsilon >= S::zero() && phi >= S::zero()) {
        return Err(Error::Usage(format!("need ε ≥ 0 and Φ ≥ 0, got {epsilon} and {phi}")));
    }
    let factor = phi.exp();
    Ok(TheoremBound {
        epsilon,
        phi,
        bound: epsilon * phi * factor,
        gap_sum_factor: factor,
    })
}

/// Achieved errors against the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalCheck<S> {
    /// Average error at the largest radius of the window.
    pub average_error: S,
    pub uniform_error: S,
    pub bound: S,
    pub average_pass: bool,
    /// Only checked for uniformly bounded perturbations.
    pub uniform_pass: Option<bool>,
}

impl<S> FinalCheck<S> {
    pub fn pass(&self) -> bool {
        self.average_pass && self.uniform_pass.unwrap_or(true)
    }
}

/// Compares the shadowing orbit with the pseudo-trajectory. The average
/// error is a hard comparison; `uniform` also checks the uniform error.
pub fn final_check<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    orbit: &Orbit<Sys::State>,
    pseudo: &PseudoTrajectory<Sys::State, S>,
    bound: &TheoremBound<S>,
    uniform: bool,
) -> Result<FinalCheck<S>> {
    let average_error = shadow_error_average(sys, orbit, pseudo, pseudo.window.radius())?;
    let uniform_error = shadow_error_uniform(sys, orbit, pseudo)?;
    Ok(FinalCheck {
        average_error,
        uniform_error,
        bound: bound.bound,
        average_pass: average_error <= bound.bound,
        uniform_pass: uniform.then(|| uniform_error <= bound.bound),
    })
}

/// Per-round outcome of [`gap_recursion_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionVerdict<S> {
    pub round: usize,
    pub pass: bool,
    /// Largest `γ_after − bound` over the surviving junctions.
    pub worst_slack: S,
    pub checked: usize,
}

/// Checks `γ^{new}_t ≤ γ_t + φ(ℓ_B) γ_P + φ(−ℓ_C) γ_Q` at every surviving
/// junction, where `P`, `Q` are the junctions glued on either side and
/// `ℓ_B`, `ℓ_C` the lengths of the segments in between. For weak rates the
/// neighbour terms are `φ(ℓ)` whenever the glued gap is positive.
pub fn gap_recursion_check<T, S: Scalar>(
    run: &ShadowRun<T, S>,
    phi: &RateFunction<S>,
    strength: Strength,
) -> Vec<RecursionVerdict<S>> {
    let weight = |gap: S| match strength {
        Strength::Strong => gap,
        Strength::Weak => {
            if gap > S::zero() {
                S::one()
            } else {
                S::zero()
            }
        }
    };
    run.rounds
        .iter()
        .map(|r| {
            let mut worst = S::neg_infinity();
            let mut pass = true;
            for j in &r.junctions {
                let mut bound = j.gap_before;
                if let Some(n) = &j.left {
                    bound = bound + phi.get(n.len as i64) * weight(n.gap);
                }
                if let Some(n) = &j.right {
                    bound = bound + phi.get(-(n.len as i64)) * weight(n.gap);
                }
                worst = worst.max(j.gap_after - bound);
                pass &= within(j.gap_after, bound);
            }
            RecursionVerdict {
                round: r.round,
                pass,
                worst_slack: if r.junctions.is_empty() { S::zero() } else { worst },
                checked: r.junctions.len(),
            }
        })
        .collect()
}

/// One `(round, radius)` cell of [`gap_sum_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapSumCell<S> {
    pub round: usize,
    pub radius: i64,
    pub r_k: S,
    /// `e^Φ R_k^{(0)}`
    pub bound: S,
    /// Propagated contribution of junctions that started outside the radius.
    pub boundary_slack: S,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSumVerdict<S> {
    pub phi: S,
    pub cells: Vec<GapSumCell<S>>,
}

impl<S> GapSumVerdict<S> {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

/// Checks `R_k^{(n)} ≤ e^Φ R_k^{(0)} + slack` for every round and ladder radius.
/// The slack is obtained by running the linear gap recursion separately on
/// the junctions inside and outside the radius and summing the outside part
/// over junctions inside the radius. `phi` must be even.
pub fn gap_sum_bound<T, S: Scalar>(
    run: &ShadowRun<T, S>,
    phi: &RateFunction<S>,
) -> Result<GapSumVerdict<S>> {
    if !phi.is_even() {
        return Err(Error::Usage("the rate must be even; symmetrize it first".into()));
    }
    let total = phi.total();
    let factor = total.exp();
    let window = run.orbit.window;
    let mut cells = Vec::new();
    for (ki, &k) in run.ladder.iter().enumerate() {
        let (range, _) = window.averaging_range(k);
        let mut outside: BTreeMap<i64, S> = run
            .initial
            .iter()
            .map(|(m, g)| (*m, if range.contains(m) { S::zero() } else { *g }))
            .collect();
        for r in &run.rounds {
            let old = outside.clone();
            for m in &r.glued {
                outside.remove(m);
            }
            for j in &r.junctions {
                let mut v = old.get(&j.moment).copied().unwrap_or_else(S::zero);
                if let Some(n) = &j.left {
                    v = v + phi.get(n.len as i64) * old.get(&n.moment).copied().unwrap_or_else(S::zero);
                }
                if let Some(n) = &j.right {
                    v = v + phi.get(-(n.len as i64)) * old.get(&n.moment).copied().unwrap_or_else(S::zero);
                }
                outside.insert(j.moment, v);
            }
            let slack: S = outside
                .iter()
                .filter(|(m, _)| range.contains(m))
                .map(|(_, v)| *v)
                .sum();
            let bound = factor * run.r0[ki];
            let r_k = r.r_k[ki];
            cells.push(GapSumCell {
                round: r.round,
                radius: k,
                r_k,
                bound,
                boundary_slack: slack,
                pass: within(r_k, bound + slack),
            });
        }
    }
    Ok(GapSumVerdict { phi: total, cells })
}
