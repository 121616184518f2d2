//! Cutting a pseudo-trajectory into true-orbit segments.

use crate::scalar::Scalar;
use crate::trajectory::{PseudoTrajectory, Window};

/// A true-orbit piece occupying times `start ..= start + states.len() − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub start: i64,
    pub states: Vec<T>,
}

impl<T> Segment<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.states.len() as i64 - 1
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t <= self.end()
    }
}

/// Contiguous segments covering a window. Junction `i` joins segment `i`
/// to segment `i + 1` at moment `moments[i]` (the last time of segment `i`)
/// with gap `gaps[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentChain<T, S> {
    pub window: Window,
    pub segments: Vec<Segment<T>>,
    pub moments: Vec<i64>,
    pub gaps: Vec<S>,
}

impl<T: Clone, S: Scalar> SegmentChain<T, S> {
    pub fn junction_count(&self) -> usize {
        self.moments.len()
    }

    /// Index of the segment holding time 0.
    pub fn origin_segment(&self) -> usize {
        self.segments
            .iter()
            .position(|s| s.contains(0))
            .expect("windows contain 0")
    }

    /// All states in time order.
    pub fn states(&self) -> Vec<T> {
        self.segments
            .iter()
            .flat_map(|s| s.states.iter().cloned())
            .collect()
    }

    /// `Σ γ` over the junctions whose moment lies in the averaging range of radius `k`.
    pub fn gap_sum(&self, k: i64) -> S {
        let (range, _) = self.window.averaging_range(k);
        self.moments
            .iter()
            .zip(&self.gaps)
            .filter(|(m, _)| range.contains(m))
            .map(|(_, g)| *g)
            .sum()
    }

    pub fn max_gap(&self) -> S {
        self.gaps.iter().copied().fold(S::zero(), S::max)
    }
}

/// One segment per maximal perturbation-free run of `pseudo`.
pub fn segment_split<T: Clone, S: Scalar>(pseudo: &PseudoTrajectory<T, S>) -> SegmentChain<T, S> {
    let w = pseudo.window;
    let mut segments = Vec::with_capacity(pseudo.moments.len() + 1);
    let mut start = w.lo();
    for &m in &pseudo.moments {
        let a = w.offset(start).expect("in window");
        let b = w.offset(m).expect("in window");
        segments.push(Segment {
            start,
            states: pseudo.states[a..=b].to_vec(),
        });
        start = m + 1;
    }
    let a = w.offset(start).expect("in window");
    segments.push(Segment {
        start,
        states: pseudo.states[a..].to_vec(),
    });
    SegmentChain {
        window: w,
        segments,
        moments: pseudo.moments.clone(),
        gaps: pseudo.moments.iter().map(|m| pseudo.gap(*m)).collect(),
    }
}
