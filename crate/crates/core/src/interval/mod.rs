//! The interval family `T x = x(1 + a x^α)` on `[0, c]`,
//! `T x = 1 − (1 − x)(1 + b(1 − x)^β)` on `(c, 1]`, with neutral fixed
//! points at 0 and 1 when `α, β > 0`.

mod neutral;
pub mod roots;

pub use neutral::{
    fit_decay_exponent, gluing_ratio_profile, neutral_rate_probe, strong_gluing_failure_probe,
    DecayProfile, FailureRow,
};

use crate::rate::{GluingRate, RateShape};
use crate::scalar::Scalar;
use crate::system::{GluingCertificate, Map, System};
use crate::trajectory::{Orbit, Window};
use crate::{Error, Result};
use roots::{solve_tau, tau};

/// Branch of the interval map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Left,
    Right,
}

/// Two-letter coding of interval orbits by branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    L,
    R,
}

/// Parameter regime, deciding which gluing rate is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `α = β = 0`: piecewise linear, strong exponential gluing.
    PiecewiseLinear,
    /// `0 < α, β < 1`: weak gluing with a summable power rate.
    WeakSummable,
    /// `α, β > 1`: strong gluing with a summable rate is impossible.
    StrongImpossible,
    Mixed,
}

/// Residuals of the full-branch conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndsCheck<S> {
    pub satisfied: bool,
    /// `|c(1 + a c^α) − 1|`
    pub left_residual: S,
    /// `|(1 − c)(1 + b(1 − c)^β) − 1|`, the branch-consistent right condition.
    pub right_residual: S,
    /// `|(1 − c)(1 + b)^β − 1|`, evaluated literally.
    pub right_residual_literal: S,
}

#[derive(Debug, Clone)]
pub struct NeutralIntervalMap<S> {
    a: S,
    b: S,
    c: S,
    alpha: S,
    beta: S,
    ends: EndsCheck<S>,
    rate: Option<GluingRate<S>>,
}

/// Steps of backward iteration used to fit the weak gluing rate.
const RATE_PROBE_STEPS: usize = 10_000;

impl<S: Scalar> NeutralIntervalMap<S> {
    pub fn new(a: S, b: S, c: S, alpha: S, beta: S) -> Result<Self> {
        let params = [a, b, c, alpha, beta];
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("non-finite map parameter".into()));
        }
        if !(c > S::zero() && c < S::one()) {
            return Err(Error::Parameter(format!("breakpoint c={c} outside (0, 1)")));
        }
        if alpha < S::zero() || beta < S::zero() {
            return Err(Error::Parameter("exponents must be nonnegative".into()));
        }
        let mut map = Self {
            a,
            b,
            c,
            alpha,
            beta,
            ends: EndsCheck {
                satisfied: false,
                left_residual: S::zero(),
                right_residual: S::zero(),
                right_residual_literal: S::zero(),
            },
            rate: None,
        };
        map.check_monotone()?;
        map.ends = map.compute_ends();
        if map.ends.satisfied {
            map.rate = Some(map.certified_rate());
        }
        Ok(map)
    }

    /// The piecewise-linear doubling map `2x mod 1` written in this family.
    pub fn doubling() -> Self {
        let half = S::lit(0.5);
        Self::new(S::one(), S::one(), half, S::zero(), S::zero()).expect("valid parameters")
    }

    /// Symmetric parameters with `c = 1/2` and `a = b` solving the full-branch
    /// condition `(1/2)(1 + a 2^{-α}) = 1`.
    pub fn symmetric(alpha: S) -> Result<Self> {
        let a = S::lit(2.0).powf(alpha);
        Self::new(a, a, S::lit(0.5), alpha, alpha)
    }

    pub fn a(&self) -> S {
        self.a
    }
    pub fn b(&self) -> S {
        self.b
    }
    pub fn c(&self) -> S {
        self.c
    }
    pub fn alpha(&self) -> S {
        self.alpha
    }
    pub fn beta(&self) -> S {
        self.beta
    }

    fn check_monotone(&self) -> Result<()> {
        let samples = 1000;
        for i in 0..=samples {
            let t = S::from_int(i) / S::from_int(samples);
            let dl = S::one() + self.a * (S::one() + self.alpha) * (t * self.c).powf(self.alpha);
            let dr = S::one()
                + self.b * (S::one() + self.beta) * (t * (S::one() - self.c)).powf(self.beta);
            if !(dl > S::zero()) || !(dr > S::zero()) {
                return Err(Error::Parameter(format!(
                    "branches are not increasing (a={}, b={}, c={}, α={}, β={})",
                    self.a, self.b, self.c, self.alpha, self.beta
                )));
            }
        }
        Ok(())
    }

    fn compute_ends(&self) -> EndsCheck<S> {
        let one = S::one();
        let c = self.c;
        let left_residual = (c * (one + self.a * c.powf(self.alpha)) - one).abs();
        let q = one - c;
        let right_residual = (q * (one + self.b * q.powf(self.beta)) - one).abs();
        let right_residual_literal = (q * (one + self.b).powf(self.beta) - one).abs();
        let tol = S::tol(1e-10);
        EndsCheck {
            satisfied: left_residual < tol && right_residual < tol,
            left_residual,
            right_residual,
            right_residual_literal,
        }
    }

    /// Whether both branches map onto the whole interval.
    pub fn check_ends(&self) -> EndsCheck<S> {
        self.ends
    }

    pub fn regime(&self) -> Regime {
        let (z, one) = (S::zero(), S::one());
        if self.alpha == z && self.beta == z {
            Regime::PiecewiseLinear
        } else if self.alpha > z && self.beta > z && self.alpha < one && self.beta < one {
            Regime::WeakSummable
        } else if self.alpha > one && self.beta > one {
            Regime::StrongImpossible
        } else {
            Regime::Mixed
        }
    }

    pub fn branch_of(&self, x: S) -> Branch {
        if x <= self.c {
            Branch::Left
        } else {
            Branch::Right
        }
    }

    /// Applies the map; images within `1e-12` of `[0, 1]` are clamped.
    pub fn forward(&self, x: S) -> Result<S> {
        let one = S::one();
        let y = match self.branch_of(x) {
            Branch::Left => tau(self.a, self.alpha, x),
            Branch::Right => one - tau(self.b, self.beta, one - x),
        };
        let slack = S::tol(1e-12);
        if !(y >= -slack && y <= one + slack) {
            return Err(Error::Parameter(format!(
                "T({x}) = {y} leaves [0, 1]; parameters do not define a self-map"
            )));
        }
        Ok(y.max(S::zero()).min(one))
    }

    /// Closure of the image of a branch.
    pub fn branch_image(&self, branch: Branch) -> (S, S) {
        let one = S::one();
        match branch {
            Branch::Left => (S::zero(), tau(self.a, self.alpha, self.c)),
            Branch::Right => (one - tau(self.b, self.beta, one - self.c), one),
        }
    }

    /// The unique preimage of `v` on `branch`.
    pub fn invert_branch(&self, v: S, branch: Branch) -> Result<S> {
        let (lo, hi) = self.branch_image(branch);
        let slack = S::tol(1e-12);
        if !(v >= lo - slack && v <= hi + slack) {
            return Err(Error::Domain {
                index: 0,
                detail: format!("{v} outside the {branch:?} branch image [{lo}, {hi}]"),
            });
        }
        let v = v.max(lo).min(hi);
        let one = S::one();
        Ok(match branch {
            Branch::Left => solve_tau(self.a, self.alpha, v, self.c),
            Branch::Right => one - solve_tau(self.b, self.beta, one - v, one - self.c),
        })
    }

    pub fn code_orbit(&self, orbit: &Orbit<S>) -> Vec<Side> {
        orbit
            .states
            .iter()
            .map(|x| match self.branch_of(*x) {
                Branch::Left => Side::L,
                Branch::Right => Side::R,
            })
            .collect()
    }

    fn certified_rate(&self) -> GluingRate<S> {
        let one = S::one();
        match self.regime() {
            Regime::PiecewiseLinear => GluingRate::strong(RateShape::BackwardGeometric {
                base: one + self.a.min(self.b),
            }),
            _ => {
                let left = neutral_rate_probe(self.a, self.alpha, one, RATE_PROBE_STEPS);
                let right = neutral_rate_probe(self.b, self.beta, one, RATE_PROBE_STEPS);
                let gamma = left.gamma_hat.min(right.gamma_hat);
                // C = max_n cylinder(n) n^γ over both neutral ends
                let constant = left
                    .values
                    .iter()
                    .zip(&right.values)
                    .enumerate()
                    .skip(1)
                    .map(|(n, (l, r))| l.max(*r) * S::from_int(n as i64).powf(gamma))
                    .fold(S::zero(), S::max);
                GluingRate::weak(RateShape::BackwardPower {
                    constant: S::lit(2.0) * constant,
                    gamma,
                })
            }
        }
    }

    /// Strong envelope valid for every admissible parameter set: inverse
    /// branches never expand distances, so backward errors never exceed the gap.
    pub fn contraction_envelope(&self) -> GluingRate<S> {
        match self.regime() {
            Regime::PiecewiseLinear => self.rate.clone().unwrap_or_else(|| {
                GluingRate::strong(RateShape::BackwardConstant { constant: S::one() })
            }),
            _ => GluingRate::strong(RateShape::BackwardConstant { constant: S::one() }),
        }
    }

    /// Glues a backward orbit `x` (window `[lo, 0]`) with a forward orbit
    /// `y` (window `[0, hi]`): `z_k = y_k` for `k ≥ 0`, and `z_{k-1}` is the
    /// preimage of `z_k` on the branch containing `x_{k-1}`.
    pub fn interval_glue(&self, x: &Orbit<S>, y: &Orbit<S>) -> Result<GluingCertificate<S, S>> {
        if x.window.hi() != 0 || y.window.lo() != 0 {
            return Err(Error::Usage(
                "expected a backward orbit ending at 0 and a forward orbit starting at 0".into(),
            ));
        }
        let left = &x.states[..x.states.len() - 1];
        let mut cert = self.glue_segments(left, &y.states)?;
        // compare against x_0 itself rather than T(x_{-1})
        cert.separation = (x.states[x.states.len() - 1] - y.states[0]).abs();
        Ok(cert)
    }

    fn glue_segments(&self, left: &[S], right: &[S]) -> Result<GluingCertificate<S, S>> {
        let rate = self.rate.clone().ok_or_else(|| Error::NonGluable {
            junction: 0,
            round: 0,
            reason: format!(
                "both branches must map onto [0, 1] (residuals {} and {})",
                self.ends.left_residual, self.ends.right_residual
            ),
        })?;
        let (first, last) = match (right.first(), left.last()) {
            (Some(f), Some(l)) => (*f, *l),
            (Some(_), None) => {
                return Ok(GluingCertificate {
                    window: Window::forward(right.len()),
                    states: right.to_vec(),
                    errors: vec![S::zero(); right.len()],
                    separation: S::zero(),
                    rate,
                    tie_breaks: Vec::new(),
                })
            }
            _ => return Err(Error::Usage("right segment must be nonempty".into())),
        };
        let x0 = self.forward(last)?;
        let separation = (x0 - first).abs();
        let tie = S::tol(1e-12);
        let mut tie_breaks = Vec::new();
        let mut back = Vec::with_capacity(left.len());
        let mut z = first;
        for (j, &xk) in left.iter().enumerate().rev() {
            let k = j as i64 - left.len() as i64;
            if (xk - self.c).abs() <= tie {
                tie_breaks.push(k);
            }
            z = self.invert_branch(z, self.branch_of(xk))?;
            back.push(z);
        }
        back.reverse();
        let errors = left
            .iter()
            .zip(&back)
            .map(|(x, z)| (*x - *z).abs())
            .chain(std::iter::repeat(S::zero()).take(right.len()))
            .collect();
        back.extend_from_slice(right);
        tie_breaks.sort_unstable();
        Ok(GluingCertificate {
            window: Window::new(-(left.len() as i64), right.len() as i64 - 1)?,
            states: back,
            errors,
            separation,
            rate,
            tie_breaks,
        })
    }
}

impl<S: Scalar> System<S> for NeutralIntervalMap<S> {
    type State = S;

    fn name(&self) -> String {
        format!(
            "interval(a={},b={},c={},alpha={},beta={})",
            self.a, self.b, self.c, self.alpha, self.beta
        )
    }

    fn contains(&self, x: &S) -> bool {
        *x >= S::zero() && *x <= S::one()
    }

    fn distance(&self, a: &S, b: &S) -> S {
        (*a - *b).abs()
    }

    fn gap(&self, prev: &S, next: &S) -> Result<S> {
        Ok((self.forward(*prev)? - *next).abs())
    }

    fn orbit_tolerance(&self) -> S {
        S::tol(1e-11)
    }

    fn rate(&self) -> Result<GluingRate<S>> {
        self.rate.clone().ok_or_else(|| {
            Error::Unsupported("the full-branch condition fails; no gluing rate exists".into())
        })
    }

    fn glue(&self, left: &[S], right: &[S]) -> Result<GluingCertificate<S, S>> {
        self.glue_segments(left, right)
    }
}

impl<S: Scalar> Map<S> for NeutralIntervalMap<S> {
    fn step(&self, x: &S) -> Result<S> {
        self.forward(*x)
    }
}
