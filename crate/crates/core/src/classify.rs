//! Finite-window classification of pseudo-trajectories into the uniform,
//! average (strong and weak) and rare-perturbation types.

use crate::scalar::Scalar;
use crate::trajectory::PseudoTrajectory;

/// Outcome of [`classify`] together with the numbers behind each verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeReport<S> {
    pub epsilon: S,
    pub satisfies_u: bool,
    pub satisfies_a: bool,
    pub satisfies_a_prime: bool,
    pub satisfies_r: bool,
    pub max_gap: S,
    /// Running average of gaps at the full window radius.
    pub average_gap: S,
    /// Moment density at the full window radius.
    pub density: S,
    /// `(radius, running average)` on the ladder `2^j ≤ radius`, plus the radius itself.
    pub average_profile: Vec<(i64, S)>,
    /// Smallest `N` with the running average `≤ ε` on all of `[N, radius]`.
    pub threshold_n: Option<i64>,
}

/// Decides the four types at accuracy `epsilon` on the pseudo-trajectory's window.
///
/// The strong-average test asks for the running average to stay below `ε`
/// on every radius from some `N ≤ radius / 2` up to the window radius.
pub fn classify<S: Scalar, T: Clone>(pseudo: &PseudoTrajectory<T, S>, epsilon: S) -> TypeReport<S> {
    let w = pseudo.window;
    let radius = w.radius();

    // Prefix sums over the averaging ranges, one radius at a time.
    let mut averages = Vec::with_capacity(radius as usize + 1);
    let mut densities = Vec::with_capacity(radius as usize + 1);
    let mut sum = S::zero();
    let mut count = 0i64;
    let add = |i: i64, sum: &mut S, count: &mut i64| {
        let g = pseudo.gap(i);
        *sum = *sum + g;
        if g > S::zero() {
            *count += 1;
        }
    };
    for n in 0..=radius {
        if w.is_one_sided() {
            add(n, &mut sum, &mut count);
        } else if n == 0 {
            add(0, &mut sum, &mut count);
        } else {
            add(-n, &mut sum, &mut count);
            add(n, &mut sum, &mut count);
        }
        let (_, norm) = w.averaging_range(n);
        let norm = S::from_int(norm);
        averages.push(sum / norm);
        densities.push(S::from_int(count) / norm);
    }

    let mut threshold_n = None;
    for n in (0..=radius).rev() {
        if averages[n as usize] <= epsilon {
            threshold_n = Some(n);
        } else {
            break;
        }
    }

    let max_gap = pseudo.max_gap();
    let average_gap = averages[radius as usize];
    let density = densities[radius as usize];
    let satisfies_u = max_gap <= epsilon;
    let satisfies_a_prime = average_gap <= epsilon;
    let satisfies_a = threshold_n.is_some_and(|n| 2 * n <= radius);
    let satisfies_r = density <= epsilon;

    let mut average_profile: Vec<(i64, S)> = w
        .ladder()
        .into_iter()
        .map(|k| (k, averages[k as usize]))
        .collect();
    if average_profile.last().map(|(k, _)| *k) != Some(radius) {
        average_profile.push((radius, average_gap));
    }

    TypeReport {
        epsilon,
        satisfies_u,
        satisfies_a,
        satisfies_a_prime,
        satisfies_r,
        max_gap,
        average_gap,
        density,
        average_profile,
        threshold_n,
    }
}
