//! Seeded generators of pseudo-trajectories of each perturbation type.
//!
//! Randomness comes from `ChaCha8Rng` seeded with the model's 64-bit seed.
//! Maps with a two-to-one forward map (the interval family) are generated
//! backward from the right edge of the window, choosing an inverse branch
//! uniformly at random and perturbing the target; invertible families are
//! iterated forward from the left edge.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};

use crate::affine::{AffineMap, LinalgScalar, TorusAutomorphism};
use crate::classify::{classify, TypeReport};
use crate::interval::{Branch, NeutralIntervalMap};
use crate::scalar::Scalar;
use crate::system::Map;
use crate::trajectory::{PseudoTrajectory, Window};
use crate::{Error, Result};

/// Noise law and magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationKind {
    /// Every step, uniform in the metric ball of radius `epsilon`.
    Uniform { epsilon: f64 },
    /// Every step, exponential amplitude with mean `epsilon` in a uniform direction.
    AverageSmall { epsilon: f64 },
    /// Bernoulli(`density`) moments with amplitude exactly `amplitude`.
    Rare { density: f64, amplitude: f64 },
    /// Independent centred normal with deviation `sigma` per metric coordinate.
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationModel {
    pub kind: PerturbationKind,
    pub seed: u64,
}

impl PerturbationModel {
    pub fn new(kind: PerturbationKind, seed: u64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let valid = match kind {
            PerturbationKind::Uniform { epsilon } | PerturbationKind::AverageSmall { epsilon } => {
                ok(epsilon)
            }
            PerturbationKind::Rare { density, amplitude } => {
                ok(amplitude) && (0.0..=1.0).contains(&density)
            }
            PerturbationKind::Gaussian { sigma } => ok(sigma),
        };
        if !valid {
            return Err(Error::Parameter(format!("invalid perturbation parameters {kind:?}")));
        }
        Ok(Self { kind, seed })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PerturbationKind::Uniform { .. } => "uniform",
            PerturbationKind::AverageSmall { .. } => "average_small",
            PerturbationKind::Rare { .. } => "rare",
            PerturbationKind::Gaussian { .. } => "gaussian",
        }
    }

    /// Accuracy used by the type audit: the model's `ε`, the density for
    /// rare perturbations, and `2σ` for Gaussian noise.
    pub fn audit_epsilon(&self) -> f64 {
        match self.kind {
            PerturbationKind::Uniform { epsilon } | PerturbationKind::AverageSmall { epsilon } => {
                epsilon
            }
            PerturbationKind::Rare { density, .. } => density,
            PerturbationKind::Gaussian { sigma } => 2.0 * sigma,
        }
    }

    // Displacement in metric coordinates, or None for an unperturbed step.
    fn draw(&self, rng: &mut ChaCha8Rng, dim: usize) -> Option<Vec<f64>> {
        match self.kind {
            PerturbationKind::Uniform { epsilon } => {
                if epsilon == 0.0 {
                    return None;
                }
                let r = epsilon * rng.random::<f64>().powf(1.0 / dim as f64);
                Some(scaled_direction(rng, dim, r))
            }
            PerturbationKind::AverageSmall { epsilon } => {
                if epsilon == 0.0 {
                    return None;
                }
                let r = Exp::new(1.0 / epsilon).expect("positive rate").sample(rng);
                Some(scaled_direction(rng, dim, r))
            }
            PerturbationKind::Rare { density, amplitude } => {
                if !rng.random_bool(density) || amplitude == 0.0 {
                    return None;
                }
                Some(scaled_direction(rng, dim, amplitude))
            }
            PerturbationKind::Gaussian { sigma } => {
                if sigma == 0.0 {
                    return None;
                }
                let n = Normal::new(0.0, sigma).expect("finite deviation");
                Some((0..dim).map(|_| n.sample(rng)).collect())
            }
        }
    }
}

fn scaled_direction(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.random_bool(0.5) { r } else { -r }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x * r / n).collect();
        }
    }
}

/// Phase spaces the generators know how to perturb.
pub trait Perturbable<S: Scalar>: Map<S> {
    /// Number of metric coordinates of a displacement.
    fn noise_dim(&self) -> usize;

    /// `x` displaced by `v` (metric coordinates), mapped back into the phase space.
    fn displace(&self, x: &Self::State, v: &[f64]) -> Self::State;

    /// Preimages of `x` when the forward map is many-to-one; `None` for
    /// families generated forward in time.
    fn preimages(&self, _x: &Self::State) -> Option<Result<Vec<Self::State>>> {
        None
    }
}

/// Reflects into `[0, 1]`.
pub fn reflect_unit<S: Scalar>(x: S) -> S {
    let two = S::lit(2.0);
    let r = x - two * (x / two).floor();
    if r > S::one() {
        two - r
    } else {
        r
    }
}

impl<S: Scalar> Perturbable<S> for NeutralIntervalMap<S> {
    fn noise_dim(&self) -> usize {
        1
    }

    fn displace(&self, x: &S, v: &[f64]) -> S {
        reflect_unit(*x + S::lit(v[0]))
    }

    fn preimages(&self, x: &S) -> Option<Result<Vec<S>>> {
        Some(
            [Branch::Left, Branch::Right]
                .into_iter()
                .map(|b| self.invert_branch(*x, b))
                .collect(),
        )
    }
}

impl<S: Scalar> Perturbable<S> for TorusAutomorphism<S> {
    fn noise_dim(&self) -> usize {
        2
    }

    fn displace(&self, x: &[S; 2], v: &[f64]) -> [S; 2] {
        let eu = self.unstable_direction();
        let es = self.stable_direction();
        let (cu, cs) = (S::lit(v[0]), S::lit(v[1]));
        let wrap = |t: S| {
            let r = t - t.floor();
            if r >= S::one() {
                S::zero()
            } else {
                r
            }
        };
        [
            wrap(x[0] + cu * eu[0] + cs * es[0]),
            wrap(x[1] + cu * eu[1] + cs * es[1]),
        ]
    }
}

impl<S: LinalgScalar> Perturbable<S> for AffineMap<S> {
    fn noise_dim(&self) -> usize {
        self.dim()
    }

    fn displace(&self, x: &DVector<S>, v: &[f64]) -> DVector<S> {
        x + DVector::from_iterator(v.len(), v.iter().map(|t| S::lit(*t)))
    }
}

/// Generates a pseudo-trajectory on `window`. For forward families `x0` is
/// the state at `window.lo()`; for many-to-one families it is the state at
/// `window.hi()`. Gaps of unperturbed steps are exactly zero; the others
/// are measured with the family's metric.
pub fn make_pseudo<S: Scalar, Sys: Perturbable<S>>(
    sys: &Sys,
    x0: &Sys::State,
    model: &PerturbationModel,
    window: Window,
) -> Result<PseudoTrajectory<Sys::State, S>> {
    if !sys.contains(x0) {
        return Err(Error::Domain {
            index: window.lo(),
            detail: format!("{x0:?} is not in the phase space of {}", sys.name()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let dim = sys.noise_dim();
    let n = window.len();
    let mut gaps = vec![S::zero(); n - 1];
    let states = if sys.preimages(x0).is_some() {
        let mut states = Vec::with_capacity(n);
        states.push(x0.clone());
        for i in (0..n - 1).rev() {
            let next = states.last().expect("nonempty").clone();
            let xi = model.draw(&mut rng, dim);
            let target = match &xi {
                Some(v) => {
                    let neg: Vec<f64> = v.iter().map(|t| -t).collect();
                    sys.displace(&next, &neg)
                }
                None => next.clone(),
            };
            let pre = sys.preimages(&target).expect("many-to-one family")?;
            let pick = rng.random_range(0..pre.len());
            let prev = pre[pick].clone();
            if xi.is_some() {
                gaps[i] = sys.gap(&prev, &next)?;
            }
            states.push(prev);
        }
        states.reverse();
        states
    } else {
        let mut states = Vec::with_capacity(n);
        states.push(x0.clone());
        for i in 0..n - 1 {
            let image = sys.step(states.last().expect("nonempty"))?;
            let next = match model.draw(&mut rng, dim) {
                Some(v) => {
                    let y = sys.displace(&image, &v);
                    gaps[i] = sys.distance(&image, &y);
                    y
                }
                None => image,
            };
            states.push(next);
        }
        states
    };
    PseudoTrajectory::from_gaps(window, states, gaps)
}

/// Type audit of a generated pseudo-trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeAudit<S> {
    pub report: TypeReport<S>,
    /// Whether the realisation matches the model's declared type; `None`
    /// for Gaussian noise, whose type is only reported.
    pub consistent: Option<bool>,
}

/// Classifies `pseudo` at the model's audit accuracy and compares with the
/// declared type. Average and density checks allow three standard errors.
pub fn empirical_type_audit<T: Clone, S: Scalar>(
    pseudo: &PseudoTrajectory<T, S>,
    model: &PerturbationModel,
) -> TypeAudit<S> {
    let eps = model.audit_epsilon();
    let report = classify(pseudo, S::lit(eps));
    let (_, norm) = pseudo.window.averaging_range(pseudo.window.radius());
    let n = norm as f64;
    let consistent = match model.kind {
        PerturbationKind::Uniform { .. } => Some(report.satisfies_u),
        PerturbationKind::AverageSmall { epsilon } => {
            // exponential amplitudes: standard deviation equals the mean
            Some(report.average_gap.to_f64_lossy() <= epsilon * (1.0 + 3.0 / n.sqrt()))
        }
        PerturbationKind::Rare { density, .. } => {
            let se = (density * (1.0 - density) / n).sqrt();
            Some((report.density.to_f64_lossy() - density).abs() <= 3.0 * se + 1.0 / n)
        }
        PerturbationKind::Gaussian { .. } => None,
    };
    TypeAudit { report, consistent }
}
