//! Gluing rate functions `φ: ℤ → ℝ₊` and their finite-support representation.

use crate::scalar::Scalar;

/// Whether a gluing bound scales with the endpoint separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    /// `ρ(x_k, z_k) ≤ φ(k) ρ(x_0, y_0)`
    Strong,
    /// `ρ(x_k, z_k) ≤ φ(k)`
    Weak,
}

/// Closed-form rate shapes certified by the map families.
#[derive(Debug, Clone, PartialEq)]
pub enum RateShape<S> {
    /// `C (λ_s^{|k|} + λ_u^{-|k|})`; a missing side contributes nothing.
    Hyperbolic {
        constant: S,
        lambda_s: Option<S>,
        lambda_u: Option<S>,
    },
    /// `C e^{-λ|k|}`
    Exponential { constant: S, lambda: S },
    /// `base^k` for `k ≤ 0`, zero for `k > 0`.
    BackwardGeometric { base: S },
    /// `C |k|^{-γ}` for `k < 0`, zero for `k ≥ 0`.
    BackwardPower { constant: S, gamma: S },
    /// `C` for `k < 0`, zero for `k ≥ 0`. Not summable on ℤ.
    BackwardConstant { constant: S },
    /// Indicator of the integer segment `[-m, m]`.
    Indicator { m: i64 },
}

impl<S: Scalar> RateShape<S> {
    pub fn eval(&self, k: i64) -> S {
        let abs_k = S::from_int(k.abs());
        match *self {
            RateShape::Hyperbolic {
                constant,
                lambda_s,
                lambda_u,
            } => {
                let s = lambda_s.map_or(S::zero(), |l| pow_abs(l, k));
                let u = lambda_u.map_or(S::zero(), |l| pow_abs(l.recip(), k));
                constant * (s + u)
            }
            RateShape::Exponential { constant, lambda } => constant * (-lambda * abs_k).exp(),
            RateShape::BackwardGeometric { base } => {
                if k <= 0 {
                    base.powi(k as i32)
                } else {
                    S::zero()
                }
            }
            RateShape::BackwardPower { constant, gamma } => {
                if k < 0 {
                    constant * abs_k.powf(-gamma)
                } else {
                    S::zero()
                }
            }
            RateShape::BackwardConstant { constant } => {
                if k < 0 {
                    constant
                } else {
                    S::zero()
                }
            }
            RateShape::Indicator { m } => {
                if k.abs() <= m {
                    S::one()
                } else {
                    S::zero()
                }
            }
        }
    }
}

// `l^{|k|}` with `0^0 = 1`.
fn pow_abs<S: Scalar>(l: S, k: i64) -> S {
    if k == 0 {
        S::one()
    } else {
        l.powi(k.unsigned_abs().min(i32::MAX as u64) as i32)
    }
}

/// A certified gluing rate: shape plus strong/weak reading.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingRate<S> {
    pub strength: Strength,
    pub shape: RateShape<S>,
}

impl<S: Scalar> GluingRate<S> {
    pub fn strong(shape: RateShape<S>) -> Self {
        Self {
            strength: Strength::Strong,
            shape,
        }
    }

    pub fn weak(shape: RateShape<S>) -> Self {
        Self {
            strength: Strength::Weak,
            shape,
        }
    }

    pub fn eval(&self, k: i64) -> S {
        self.shape.eval(k)
    }

    /// Bound on the gluing error at offset `k` for endpoint separation `sep`.
    pub fn bound(&self, k: i64, separation: S) -> S {
        match self.strength {
            Strength::Strong => self.eval(k) * separation,
            Strength::Weak => self.eval(k),
        }
    }

    /// Tabulates the shape on `[-radius, radius]`.
    pub fn truncate(&self, radius: i64) -> RateFunction<S> {
        RateFunction::from_fn(-radius, radius, |k| self.eval(k))
    }
}

/// A nonnegative function on ℤ, stored on a finite support `[lo, hi]` and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction<S> {
    lo: i64,
    values: Vec<S>,
}

impl<S: Scalar> RateFunction<S> {
    /// Builds `φ` from values on `[lo, lo + values.len())`. Negative or
    /// non-finite values are rejected.
    pub fn new(lo: i64, values: Vec<S>) -> crate::Result<Self> {
        if let Some(bad) = values.iter().position(|v| !(v.is_finite() && *v >= S::zero())) {
            return Err(crate::Error::Parameter(format!(
                "rate function value at k={} is not a finite nonnegative number",
                lo + bad as i64
            )));
        }
        Ok(Self { lo, values })
    }

    pub fn from_fn(lo: i64, hi: i64, f: impl Fn(i64) -> S) -> Self {
        let values = (lo..=hi).map(|k| {
            let v = f(k);
            if v.is_finite() && v > S::zero() {
                v
            } else {
                S::zero()
            }
        });
        Self {
            lo,
            values: values.collect(),
        }
    }

    pub fn zero() -> Self {
        Self {
            lo: 0,
            values: Vec::new(),
        }
    }

    /// Support bounds `(lo, hi)`; `hi < lo` for an empty support.
    pub fn support(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }

    pub fn get(&self, k: i64) -> S {
        let off = k - self.lo;
        if off < 0 {
            return S::zero();
        }
        self.values.get(off as usize).copied().unwrap_or_else(S::zero)
    }

    /// `Φ = Σ_k φ(k)`.
    pub fn total(&self) -> S {
        self.values.iter().copied().sum()
    }

    pub fn is_even(&self) -> bool {
        let (lo, hi) = self.support();
        let r = lo.abs().max(hi.abs());
        (0..=r).all(|k| self.get(k) == self.get(-k))
    }

    /// Monotone envelope: `sup_{i≤k} φ(i)` for `k < 0`, `sup_{i≥k} φ(i)` for `k ≥ 0`.
    pub fn monotone_envelope(&self) -> Self {
        let (lo, hi) = self.support();
        if hi < lo {
            return self.clone();
        }
        let mut out = vec![S::zero(); self.values.len()];
        let mut run = S::zero();
        for k in lo..=hi.min(-1) {
            run = run.max(self.get(k));
            out[(k - lo) as usize] = run;
        }
        run = S::zero();
        for k in (lo.max(0)..=hi).rev() {
            run = run.max(self.get(k));
            out[(k - lo) as usize] = run;
        }
        Self { lo, values: out }
    }

    /// Even majorant `max(φ(-k), φ(k))`.
    pub fn symmetrize(&self) -> Self {
        let (lo, hi) = self.support();
        if hi < lo {
            return self.clone();
        }
        let r = lo.abs().max(hi.abs());
        Self::from_fn(-r, r, |k| self.get(k).max(self.get(-k)))
    }
}
