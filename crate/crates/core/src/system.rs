//! The contract every map family implements so the shadowing engine can
//! measure gaps and glue true-orbit segments.

use std::fmt::Debug;

use crate::rate::{GluingRate, Strength};
use crate::scalar::Scalar;
use crate::trajectory::Window;
use crate::Result;

/// A discrete-time dynamical system `(T, X, ρ)` with a gluing construction.
pub trait System<S: Scalar>: Sync {
    type State: Clone + Debug + PartialEq + Send + Sync;

    /// Short identifier recorded on generated orbits.
    fn name(&self) -> String;

    fn contains(&self, x: &Self::State) -> bool;

    /// The family's metric `ρ`.
    fn distance(&self, a: &Self::State, b: &Self::State) -> S;

    /// `ρ(T prev, next)`; for multivalued systems the distance to the
    /// nearest admissible successor.
    fn gap(&self, prev: &Self::State, next: &Self::State) -> Result<S>;

    /// Largest gap still accepted as the exact orbit relation.
    fn orbit_tolerance(&self) -> S;

    /// Certified rate of the gluing construction.
    fn rate(&self) -> Result<GluingRate<S>>;

    /// Glues the true segment `left` (ending one step before the gluing
    /// time) to the true segment `right` (starting at the gluing time).
    /// The returned certificate is indexed so that `right[0]` sits at 0.
    fn glue(
        &self,
        left: &[Self::State],
        right: &[Self::State],
    ) -> Result<GluingCertificate<Self::State, S>>;
}

/// Single-valued systems with an explicit forward map.
pub trait Map<S: Scalar>: System<S> {
    fn step(&self, x: &Self::State) -> Result<Self::State>;

    /// Forward orbit of length `len` starting at `x`.
    fn iterate(&self, x: &Self::State, len: usize) -> Result<Vec<Self::State>> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return Ok(out);
        }
        out.push(x.clone());
        for _ in 1..len {
            let next = self.step(out.last().expect("nonempty"))?;
            out.push(next);
        }
        Ok(out)
    }
}

/// A gluing trajectory together with the measured errors against the two
/// glued pieces and the rate it is certified against.
#[derive(Debug, Clone)]
pub struct GluingCertificate<T, S> {
    /// Index window relative to the gluing time.
    pub window: Window,
    pub states: Vec<T>,
    /// `ρ(x_k, z_k)` for `k < 0`, `ρ(y_k, z_k)` for `k ≥ 0`.
    pub errors: Vec<S>,
    /// Endpoint separation `ρ(x_0, y_0)`, the gap being closed.
    pub separation: S,
    pub rate: GluingRate<S>,
    /// Offsets where a branch choice was ambiguous and resolved by convention.
    pub tie_breaks: Vec<i64>,
}

impl<T, S: Scalar> GluingCertificate<T, S> {
    pub fn error_at(&self, k: i64) -> Option<S> {
        self.window
            .offset(k)
            .and_then(|i| self.errors.get(i).copied())
    }

    pub fn bound_at(&self, k: i64) -> S {
        self.rate.bound(k, self.separation)
    }

    /// Offsets where the measured error exceeds the certified bound beyond
    /// a relative slack of `1e-9` (plus the scalar's rounding floor).
    pub fn violations(&self) -> Vec<i64> {
        let rel = S::tol(1e-9);
        let abs = S::tol(1e-12);
        self.window
            .indices()
            .zip(self.errors.iter())
            .filter(|(k, e)| {
                let b = self.bound_at(*k);
                **e > b * (S::one() + rel) + abs
            })
            .map(|(k, _)| k)
            .collect()
    }

    pub fn satisfies_bound(&self) -> bool {
        self.violations().is_empty()
    }

    /// `max_k error_k / bound_k`; at most one for a valid certificate.
    /// Offsets with a zero bound and zero error are skipped.
    pub fn measured_ratio(&self) -> S {
        self.window
            .indices()
            .zip(self.errors.iter())
            .filter_map(|(k, e)| {
                let b = self.bound_at(k);
                if b > S::zero() {
                    Some(*e / b)
                } else if *e > S::zero() {
                    Some(S::infinity())
                } else {
                    None
                }
            })
            .fold(S::zero(), S::max)
    }

    /// Empirical strong-gluing profile `error_k / separation`.
    pub fn relative_errors(&self) -> Vec<S> {
        if self.separation <= S::zero() {
            return vec![S::zero(); self.errors.len()];
        }
        self.errors.iter().map(|e| *e / self.separation).collect()
    }

    pub fn is_strong(&self) -> bool {
        self.rate.strength == Strength::Strong
    }
}
