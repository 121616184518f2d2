//! Finite windows of (pseudo-)trajectories and the shadowing error metrics.

use crate::scalar::Scalar;
use crate::system::System;
use crate::{Error, Result};

/// Inclusive index range `[lo, hi]` containing 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > 0 || hi < 0 {
            return Err(Error::Usage(format!(
                "window [{lo}, {hi}] must contain index 0"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `[-radius, radius]`.
    pub fn centered(radius: i64) -> Self {
        let r = radius.max(0);
        Self { lo: -r, hi: r }
    }

    /// `[0, len - 1]`.
    pub fn forward(len: usize) -> Self {
        Self {
            lo: 0,
            hi: len.max(1) as i64 - 1,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    /// Position of index `i` in a state vector.
    pub fn offset(&self, i: i64) -> Option<usize> {
        self.contains(i).then(|| (i - self.lo) as usize)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    /// Windows starting at 0 use one-sided averages.
    pub fn is_one_sided(&self) -> bool {
        self.lo == 0
    }

    /// Largest radius usable for averages: `hi` for one-sided windows,
    /// `min(-lo, hi)` otherwise.
    pub fn radius(&self) -> i64 {
        if self.is_one_sided() {
            self.hi
        } else {
            (-self.lo).min(self.hi)
        }
    }

    /// Indices averaged at radius `k`, and the normaliser.
    pub fn averaging_range(&self, k: i64) -> (std::ops::RangeInclusive<i64>, i64) {
        if self.is_one_sided() {
            (0..=k, k + 1)
        } else {
            (-k..=k, 2 * k + 1)
        }
    }

    /// Geometric ladder `2^j ≤ radius`, `j ≥ 0`.
    pub fn ladder(&self) -> Vec<i64> {
        let r = self.radius();
        std::iter::successors(Some(1i64), |k| k.checked_mul(2))
            .take_while(|k| *k <= r)
            .collect()
    }
}

/// A true trajectory restricted to a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    pub window: Window,
    pub states: Vec<T>,
    pub map_id: String,
}

impl<T: Clone> Orbit<T> {
    /// Checks the orbit relation step by step against the system tolerance.
    pub fn new<S: Scalar, Sys: System<S, State = T>>(
        sys: &Sys,
        window: Window,
        states: Vec<T>,
    ) -> Result<Self> {
        check_len(window, states.len())?;
        let tol = sys.orbit_tolerance();
        for (i, pair) in states.windows(2).enumerate() {
            let g = sys.gap(&pair[0], &pair[1])?;
            if g > tol {
                return Err(Error::Domain {
                    index: window.lo() + i as i64,
                    detail: format!("orbit relation violated by {g}"),
                });
            }
        }
        Ok(Self {
            window,
            states,
            map_id: sys.name(),
        })
    }

    /// Wraps states without checking the orbit relation.
    pub fn unchecked(window: Window, states: Vec<T>, map_id: impl Into<String>) -> Self {
        Self {
            window,
            states,
            map_id: map_id.into(),
        }
    }

    pub fn at(&self, i: i64) -> Option<&T> {
        self.window.offset(i).map(|o| &self.states[o])
    }
}

/// A sequence following the map except at recorded perturbation moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTrajectory<T, S> {
    pub window: Window,
    pub states: Vec<T>,
    /// `γ_i = ρ(T y_i, y_{i+1})` for `i ∈ [lo, hi-1]`.
    pub gaps: Vec<S>,
    /// `{ i : γ_i > 0 }` in increasing order.
    pub moments: Vec<i64>,
}

impl<T: Clone, S: Scalar> PseudoTrajectory<T, S> {
    /// Assembles a pseudo-trajectory from measured gaps. Moments are the
    /// indices with positive gap.
    pub fn from_gaps(window: Window, states: Vec<T>, gaps: Vec<S>) -> Result<Self> {
        check_len(window, states.len())?;
        if gaps.len() + 1 != states.len() {
            return Err(Error::Usage(format!(
                "{} gaps for {} states",
                gaps.len(),
                states.len()
            )));
        }
        if let Some(i) = gaps.iter().position(|g| !(*g >= S::zero())) {
            return Err(Error::Domain {
                index: window.lo() + i as i64,
                detail: "negative or undefined gap".into(),
            });
        }
        let moments = gaps
            .iter()
            .enumerate()
            .filter(|(_, g)| **g > S::zero())
            .map(|(i, _)| window.lo() + i as i64)
            .collect();
        Ok(Self {
            window,
            states,
            gaps,
            moments,
        })
    }

    /// Gap at index `i`; zero outside `[lo, hi-1]`.
    pub fn gap(&self, i: i64) -> S {
        let off = i - self.window.lo();
        if off < 0 {
            return S::zero();
        }
        self.gaps.get(off as usize).copied().unwrap_or_else(S::zero)
    }

    pub fn max_gap(&self) -> S {
        self.gaps.iter().copied().fold(S::zero(), S::max)
    }

    /// Average gap over the full averaging range of the window.
    pub fn average_gap(&self) -> S {
        let (range, norm) = self.window.averaging_range(self.window.radius());
        let sum: S = range.map(|i| self.gap(i)).sum();
        sum / S::from_int(norm)
    }

    pub fn as_orbit(&self, map_id: impl Into<String>) -> Orbit<T> {
        Orbit::unchecked(self.window, self.states.clone(), map_id)
    }
}

fn check_len(window: Window, n: usize) -> Result<()> {
    if n != window.len() {
        return Err(Error::Usage(format!(
            "{} states for a window of length {}",
            n,
            window.len()
        )));
    }
    Ok(())
}

/// Measures `γ_i = ρ(T y_i, y_{i+1})`. Gaps below `1e-12` are treated as
/// float noise and set to zero.
pub fn compute_gaps<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    window: Window,
    states: Vec<Sys::State>,
) -> Result<PseudoTrajectory<Sys::State, S>> {
    check_len(window, states.len())?;
    if let Some(i) = states.iter().position(|x| !sys.contains(x)) {
        return Err(Error::Domain {
            index: window.lo() + i as i64,
            detail: format!("{:?} not in the phase space of {}", states[i], sys.name()),
        });
    }
    let floor = S::tol(1e-12);
    let gaps = states
        .windows(2)
        .map(|p| {
            sys.gap(&p[0], &p[1])
                .map(|g| if g < floor { S::zero() } else { g })
        })
        .collect::<Result<Vec<_>>>()?;
    PseudoTrajectory::from_gaps(window, states, gaps)
}

fn pointwise<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    x: &Orbit<Sys::State>,
    y: &PseudoTrajectory<Sys::State, S>,
) -> Result<Vec<S>> {
    if x.window != y.window {
        return Err(Error::Usage(format!(
            "window mismatch: {:?} vs {:?}",
            x.window, y.window
        )));
    }
    Ok(x.states
        .iter()
        .zip(&y.states)
        .map(|(a, b)| sys.distance(a, b))
        .collect())
}

/// `sup_i ρ(x_i, y_i)` over the window.
pub fn shadow_error_uniform<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    x: &Orbit<Sys::State>,
    y: &PseudoTrajectory<Sys::State, S>,
) -> Result<S> {
    Ok(pointwise(sys, x, y)?
        .into_iter()
        .fold(S::zero(), S::max))
}

/// Centered average `(1/(2k+1)) Σ_{|i|≤k} ρ(x_i, y_i)`, or the one-sided
/// `(1/(k+1)) Σ_{i=0}^{k}` on windows starting at 0.
pub fn shadow_error_average<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    x: &Orbit<Sys::State>,
    y: &PseudoTrajectory<Sys::State, S>,
    k: i64,
) -> Result<S> {
    let errs = pointwise(sys, x, y)?;
    average_on(&errs, x.window, k)
}

/// Average of per-index values (indexed by `window`) at radius `k`.
pub fn average_on<S: Scalar>(values: &[S], window: Window, k: i64) -> Result<S> {
    if k < 0 || k > window.radius() {
        return Err(Error::Usage(format!(
            "radius {k} exceeds the window radius {}",
            window.radius()
        )));
    }
    let (range, norm) = window.averaging_range(k);
    let sum: S = range
        .map(|i| values[window.offset(i).expect("in window")])
        .sum();
    Ok(sum / S::from_int(norm))
}
