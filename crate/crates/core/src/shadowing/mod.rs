//! Parallel and sequential gluing of a pseudo-trajectory into a true orbit,
//! with per-round gap accounting and the shadowing bounds.

mod bounds;
mod chain;

use rayon::prelude::*;

use crate::rate::GluingRate;
use crate::scalar::Scalar;
use crate::system::{GluingCertificate, System};
use crate::trajectory::{average_on, Orbit, PseudoTrajectory};
use crate::{Error, Result};

pub use bounds::{
    final_check, gap_recursion_check, gap_sum_bound, product_bound, shadowing_rate,
    theorem_bound, FinalCheck, GapSumCell, GapSumVerdict, RecursionVerdict, TheoremBound,
};
pub use chain::{segment_split, Segment, SegmentChain};

/// A junction glued in the same round next to a surviving junction.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor<S> {
    pub moment: i64,
    pub gap: S,
    /// Length of the segment between the two junctions.
    pub len: usize,
}

/// A junction that survives a round.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionRecord<S> {
    pub moment: i64,
    pub gap_before: S,
    pub gap_after: S,
    /// Glued junction on the left, whose segment's forward end now meets this one.
    pub left: Option<Neighbor<S>>,
    /// Glued junction on the right, whose segment's backward end now meets this one.
    pub right: Option<Neighbor<S>>,
}

/// A bound violation found in a gluing certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateViolation {
    pub round: usize,
    pub moment: i64,
    /// Offsets relative to the glued junction.
    pub offsets: Vec<i64>,
}

/// Measurements of one gluing round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats<S> {
    pub round: usize,
    pub segments_before: usize,
    pub segments_after: usize,
    pub min_len_before: usize,
    pub max_len_before: usize,
    /// Moments consumed by gluings this round.
    pub glued: Vec<i64>,
    pub junctions: Vec<JunctionRecord<S>>,
    pub max_gap_before: S,
    pub max_gap_after: S,
    /// `R_k` after the round on the ladder radii.
    pub r_k: Vec<S>,
    /// Average error against the input on the ladder radii, after the round.
    pub q_k: Vec<S>,
    /// Largest pointwise change of the concatenated states during the round.
    pub change: S,
    pub max_certificate_ratio: S,
}

/// Outcome of a gluing schedule.
#[derive(Debug, Clone)]
pub struct ShadowRun<T, S> {
    pub orbit: Orbit<T>,
    pub rounds: Vec<RoundStats<S>>,
    pub ladder: Vec<i64>,
    /// `R_k^{(0)}` on the ladder.
    pub r0: Vec<S>,
    /// Input junctions and gaps.
    pub initial: Vec<(i64, S)>,
    /// Rate reported by the certificates, if any gluing happened.
    pub rate: Option<GluingRate<S>>,
    pub violations: Vec<CertificateViolation>,
    /// Largest `ρ(T z_t, z_{t+1})` of the output.
    pub residual: S,
}

impl<T, S: Scalar> ShadowRun<T, S> {
    pub fn certificates_hold(&self) -> bool {
        self.violations.is_empty()
    }

    /// Moments in the order they were consumed.
    pub fn consumed(&self) -> Vec<i64> {
        self.rounds.iter().flat_map(|r| r.glued.iter().copied()).collect()
    }
}

/// How a glued segment was assembled.
#[derive(Clone, Copy)]
struct Merge {
    junction: usize,
    left_len: usize,
    right_len: usize,
}

struct Context<'a, Sys: System<S>, S: Scalar> {
    sys: &'a Sys,
    pseudo: &'a PseudoTrajectory<Sys::State, S>,
    ladder: Vec<i64>,
}

impl<'a, Sys: System<S>, S: Scalar> Context<'a, Sys, S> {
    fn new(sys: &'a Sys, pseudo: &'a PseudoTrajectory<Sys::State, S>, ladder: &[i64]) -> Result<Self> {
        let r = pseudo.window.radius();
        if let Some(k) = ladder.iter().find(|k| **k < 0 || **k > r) {
            return Err(Error::Usage(format!("ladder radius {k} outside [0, {r}]")));
        }
        Ok(Self {
            sys,
            pseudo,
            ladder: ladder.to_vec(),
        })
    }

    fn q_k(&self, states: &[Sys::State]) -> Result<Vec<S>> {
        let errs: Vec<S> = states
            .iter()
            .zip(&self.pseudo.states)
            .map(|(a, b)| self.sys.distance(a, b))
            .collect();
        self.ladder
            .iter()
            .map(|k| average_on(&errs, self.pseudo.window, *k))
            .collect()
    }

    fn change(&self, a: &[Sys::State], b: &[Sys::State]) -> S {
        a.iter()
            .zip(b)
            .map(|(p, q)| self.sys.distance(p, q))
            .fold(S::zero(), S::max)
    }

    fn r_k(&self, chain: &SegmentChain<Sys::State, S>) -> Vec<S> {
        self.ladder.iter().map(|k| chain.gap_sum(*k)).collect()
    }

    fn residual(&self, states: &[Sys::State]) -> Result<S> {
        states
            .windows(2)
            .map(|p| self.sys.gap(&p[0], &p[1]))
            .try_fold(S::zero(), |m, g| g.map(|g| m.max(g)))
    }

    fn glue(
        &self,
        left: &[Sys::State],
        right: &[Sys::State],
        moment: i64,
        round: usize,
    ) -> Result<GluingCertificate<Sys::State, S>> {
        self.sys.glue(left, right).map_err(|e| match e {
            Error::NonGluable { reason, .. } => Error::NonGluable {
                junction: moment,
                round,
                reason,
            },
            other => other,
        })
    }

    fn finish(
        &self,
        chain: SegmentChain<Sys::State, S>,
        rounds: Vec<RoundStats<S>>,
        r0: Vec<S>,
        initial: Vec<(i64, S)>,
        rate: Option<GluingRate<S>>,
        violations: Vec<CertificateViolation>,
    ) -> Result<ShadowRun<Sys::State, S>> {
        let states = chain.states();
        let residual = self.residual(&states)?;
        Ok(ShadowRun {
            orbit: Orbit::unchecked(self.pseudo.window, states, self.sys.name()),
            rounds,
            ladder: self.ladder.clone(),
            r0,
            initial,
            rate,
            violations,
            residual,
        })
    }
}

fn check_certificate<T, S: Scalar>(
    cert: &GluingCertificate<T, S>,
    moment: i64,
    round: usize,
    violations: &mut Vec<CertificateViolation>,
) -> S {
    let offsets = cert.violations();
    if !offsets.is_empty() {
        violations.push(CertificateViolation {
            round,
            moment,
            offsets,
        });
    }
    cert.measured_ratio()
}

// Pair starts for one round: segments are paired left to right from the one
// holding time 0; the opposite parity is used when it yields more pairs.
fn pair_starts(count: usize, origin: usize) -> Vec<usize> {
    let with = |parity: usize| -> Vec<usize> {
        (0..count.saturating_sub(1)).filter(|i| i % 2 == parity).collect()
    };
    let preferred = with(origin % 2);
    if preferred.len() == count / 2 {
        preferred
    } else {
        with(1 - origin % 2)
    }
}

/// Glues adjacent segments pairwise, round after round, until one orbit
/// remains. Gluings within a round run concurrently; the result does not
/// depend on their execution order.
pub fn parallel_glue<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    pseudo: &PseudoTrajectory<Sys::State, S>,
) -> Result<ShadowRun<Sys::State, S>> {
    parallel_glue_on(sys, pseudo, &pseudo.window.ladder())
}

/// [`parallel_glue`] recording `R_k` and `Q_k` on the given radii.
pub fn parallel_glue_on<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    pseudo: &PseudoTrajectory<Sys::State, S>,
    ladder: &[i64],
) -> Result<ShadowRun<Sys::State, S>> {
    let ctx = Context::new(sys, pseudo, ladder)?;
    let mut chain = segment_split(pseudo);
    let r0 = ctx.r_k(&chain);
    let initial: Vec<(i64, S)> = chain.moments.iter().copied().zip(chain.gaps.iter().copied()).collect();
    let mut rounds = Vec::new();
    let mut violations = Vec::new();
    let mut rate = None;
    let mut current = chain.states();

    while chain.segments.len() > 1 {
        let round = rounds.len();
        let count = chain.segments.len();
        let starts = pair_starts(count, chain.origin_segment());
        let certs: Vec<Result<GluingCertificate<Sys::State, S>>> = starts
            .par_iter()
            .map(|&i| {
                ctx.glue(
                    &chain.segments[i].states,
                    &chain.segments[i + 1].states,
                    chain.moments[i],
                    round,
                )
            })
            .collect();
        let mut certs = certs.into_iter().collect::<Result<Vec<_>>>()?.into_iter();

        let mut segments = Vec::with_capacity(count - starts.len());
        let mut merges: Vec<Option<Merge>> = Vec::with_capacity(segments.capacity());
        // index of the last old segment inside each new segment
        let mut last_old = Vec::with_capacity(segments.capacity());
        let mut ratio = S::zero();
        let mut glued = Vec::with_capacity(starts.len());
        let mut next_start = starts.iter().peekable();
        let mut i = 0;
        while i < count {
            if next_start.peek() == Some(&&i) {
                next_start.next();
                let cert = certs.next().expect("one certificate per pair");
                let moment = chain.moments[i];
                ratio = ratio.max(check_certificate(&cert, moment, round, &mut violations));
                rate.get_or_insert_with(|| cert.rate.clone());
                segments.push(Segment {
                    start: chain.segments[i].start,
                    states: cert.states,
                });
                merges.push(Some(Merge {
                    junction: i,
                    left_len: chain.segments[i].len(),
                    right_len: chain.segments[i + 1].len(),
                }));
                glued.push(moment);
                last_old.push(i + 1);
                i += 2;
            } else {
                segments.push(chain.segments[i].clone());
                merges.push(None);
                last_old.push(i);
                i += 1;
            }
        }

        let mut moments = Vec::with_capacity(segments.len() - 1);
        let mut gaps = Vec::with_capacity(segments.len() - 1);
        let mut junctions = Vec::with_capacity(segments.len() - 1);
        for u in 0..segments.len() - 1 {
            let old = last_old[u];
            let a = segments[u].states.last().expect("nonempty segment");
            let b = segments[u + 1].states.first().expect("nonempty segment");
            let gap = sys.gap(a, b)?;
            let neighbor = |m: Merge, len: usize| Neighbor {
                moment: chain.moments[m.junction],
                gap: chain.gaps[m.junction],
                len,
            };
            junctions.push(JunctionRecord {
                moment: chain.moments[old],
                gap_before: chain.gaps[old],
                gap_after: gap,
                left: merges[u].map(|m| neighbor(m, m.right_len)),
                right: merges[u + 1].map(|m| neighbor(m, m.left_len)),
            });
            moments.push(chain.moments[old]);
            gaps.push(gap);
        }
        let lens = chain.segments.iter().map(|s| s.len());
        let min_len = lens.clone().min().unwrap_or(0);
        let max_len = lens.max().unwrap_or(0);
        let max_gap_before = chain.max_gap();
        chain = SegmentChain {
            window: chain.window,
            segments,
            moments,
            gaps,
        };
        let states = chain.states();
        rounds.push(RoundStats {
            round,
            segments_before: count,
            segments_after: chain.segments.len(),
            min_len_before: min_len,
            max_len_before: max_len,
            glued,
            junctions,
            max_gap_before,
            max_gap_after: chain.max_gap(),
            r_k: ctx.r_k(&chain),
            q_k: ctx.q_k(&states)?,
            change: ctx.change(&current, &states),
            max_certificate_ratio: ratio,
        });
        current = states;
    }
    ctx.finish(chain, rounds, r0, initial, rate, violations)
}

/// Starting from the segment holding time 0, glues the right neighbour,
/// then the left one, alternately. Requires `φ(1) < 1` and `φ(−1) < 1`.
/// Each gluing is reported as one round.
pub fn sequential_glue<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    pseudo: &PseudoTrajectory<Sys::State, S>,
) -> Result<ShadowRun<Sys::State, S>> {
    sequential_glue_on(sys, pseudo, &pseudo.window.ladder())
}

/// [`sequential_glue`] recording `R_k` and `Q_k` on the given radii.
pub fn sequential_glue_on<S: Scalar, Sys: System<S>>(
    sys: &Sys,
    pseudo: &PseudoTrajectory<Sys::State, S>,
    ladder: &[i64],
) -> Result<ShadowRun<Sys::State, S>> {
    let rate = sys.rate()?;
    let (plus, minus) = (rate.eval(1), rate.eval(-1));
    if !(plus < S::one() && minus < S::one()) {
        return Err(Error::Unsupported(format!(
            "sequential gluing needs φ(1) < 1 and φ(-1) < 1, got φ(1) = {plus}, φ(-1) = {minus}"
        )));
    }
    let ctx = Context::new(sys, pseudo, ladder)?;
    let mut chain = segment_split(pseudo);
    let r0 = ctx.r_k(&chain);
    let initial: Vec<(i64, S)> = chain.moments.iter().copied().zip(chain.gaps.iter().copied()).collect();
    let mut rounds = Vec::new();
    let mut violations = Vec::new();
    let mut used_rate = None;
    let mut current = chain.states();
    let mut go_right = true;

    while chain.segments.len() > 1 {
        let round = rounds.len();
        let count = chain.segments.len();
        let c = chain.origin_segment();
        let has_right = c + 1 < count;
        let has_left = c > 0;
        let left_idx = if (go_right && has_right) || !has_left { c } else { c - 1 };
        go_right = !go_right;
        let j = left_idx;
        let moment = chain.moments[j];
        let cert = ctx.glue(&chain.segments[j].states, &chain.segments[j + 1].states, moment, round)?;
        let ratio = check_certificate(&cert, moment, round, &mut violations);
        used_rate.get_or_insert_with(|| cert.rate.clone());
        let (len_l, len_r) = (chain.segments[j].len(), chain.segments[j + 1].len());
        let start = chain.segments[j].start;
        let gap_glued = chain.gaps[j];
        let lens = chain.segments.iter().map(|s| s.len());
        let (min_len, max_len) = (lens.clone().min().unwrap_or(0), lens.max().unwrap_or(0));
        let max_gap_before = chain.max_gap();

        chain.segments.splice(
            j..=j + 1,
            std::iter::once(Segment {
                start,
                states: cert.states,
            }),
        );
        chain.moments.remove(j);
        chain.gaps.remove(j);
        let mut junctions = Vec::new();
        let glued_neighbor = |len| Neighbor {
            moment,
            gap: gap_glued,
            len,
        };
        if j > 0 {
            let g = sys.gap(
                chain.segments[j - 1].states.last().expect("nonempty"),
                &chain.segments[j].states[0],
            )?;
            junctions.push(JunctionRecord {
                moment: chain.moments[j - 1],
                gap_before: chain.gaps[j - 1],
                gap_after: g,
                left: None,
                right: Some(glued_neighbor(len_l)),
            });
            chain.gaps[j - 1] = g;
        }
        if j < chain.moments.len() {
            let g = sys.gap(
                chain.segments[j].states.last().expect("nonempty"),
                &chain.segments[j + 1].states[0],
            )?;
            junctions.push(JunctionRecord {
                moment: chain.moments[j],
                gap_before: chain.gaps[j],
                gap_after: g,
                left: Some(glued_neighbor(len_r)),
                right: None,
            });
            chain.gaps[j] = g;
        }
        let states = chain.states();
        rounds.push(RoundStats {
            round,
            segments_before: count,
            segments_after: chain.segments.len(),
            min_len_before: min_len,
            max_len_before: max_len,
            glued: vec![moment],
            junctions,
            max_gap_before,
            max_gap_after: chain.max_gap(),
            r_k: ctx.r_k(&chain),
            q_k: ctx.q_k(&states)?,
            change: ctx.change(&current, &states),
            max_certificate_ratio: ratio,
        });
        current = states;
    }
    ctx.finish(chain, rounds, r0, initial, used_rate, violations)
}
