//! Invariant splitting `ℝ^d = E⁰ ⊕ Eˢ ⊕ Eᵘ ⊕ Eⁿ` of a real matrix.

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::Float;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Scalars usable with dense linear algebra.
pub trait LinalgScalar: Scalar + RealField {}
impl<T: Scalar + RealField> LinalgScalar for T {}

/// Orthonormal bases of the kernel, stable, unstable and neutral
/// generalised eigenspaces, with the growth constants measured on them.
#[derive(Debug, Clone)]
pub struct SpectralSplit<S: LinalgScalar> {
    pub kernel: DMatrix<S>,
    pub stable: DMatrix<S>,
    pub unstable: DMatrix<S>,
    pub neutral: DMatrix<S>,
    /// Orthonormal basis of `E⁰ ⊕ Eˢ`, the side contracted forward in time.
    pub contracting: DMatrix<S>,
    /// Largest stable modulus (0 when only the kernel contracts).
    pub lambda_s: Option<S>,
    /// Smallest unstable modulus.
    pub lambda_u: Option<S>,
    /// `max(1, sup_n ‖A^n|_{E⁰⊕Eˢ}‖ / λ_s^n, sup_n ‖A^{-n}|_{Eᵘ}‖ λ_u^n)`, `n ≤ 30`.
    pub constant: S,
    /// Norm of the oblique projections onto `Eᵘ` and `E⁰ ⊕ Eˢ`.
    pub projection_norm: S,
    pub tol: S,
    /// Eigenvalues as `(re, im)`.
    pub eigenvalues: Vec<(S, S)>,
    /// Operators restricted to the contracting and unstable bases.
    pub(crate) contracting_op: DMatrix<S>,
    pub(crate) unstable_op: DMatrix<S>,
    pub(crate) neutral_op: DMatrix<S>,
}

/// Horizon for measuring the transient constant.
pub const GROWTH_HORIZON: usize = 30;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Group {
    Kernel,
    Stable,
    Unstable,
    Neutral,
}

impl<S: LinalgScalar> SpectralSplit<S> {
    pub fn dim(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.neutral.ncols() == 0
    }

    /// `(dim E⁰, dim Eˢ, dim Eᵘ, dim Eⁿ)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.kernel.ncols(),
            self.stable.ncols(),
            self.unstable.ncols(),
            self.neutral.ncols(),
        )
    }

    /// Restricted operator inverse on `Eᵘ` (coordinates in `unstable`).
    pub(crate) fn unstable_inverse(&self) -> Result<DMatrix<S>> {
        self.unstable_op
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Internal("singular restriction to the unstable subspace".into()))
    }
}

/// Computes the splitting with neutrality tolerance `tol ∈ (0, 0.5)`:
/// moduli below `1 − tol` are stable, above `1 + tol` unstable, in between neutral;
/// eigenvalues at rounding level of zero make up the kernel.
pub fn spectral_split<S: LinalgScalar>(a: &DMatrix<S>, tol: S) -> Result<SpectralSplit<S>> {
    let d = a.nrows();
    if d == 0 || a.ncols() != d {
        return Err(Error::Parameter("matrix must be square and nonempty".into()));
    }
    if a.iter().any(|v| !Float::is_finite(*v)) {
        return Err(Error::Domain {
            index: 0,
            detail: "matrix has non-finite entries".into(),
        });
    }
    if !(tol > S::zero() && tol < S::lit(0.5)) {
        return Err(Error::Parameter(format!("tolerance {tol} outside (0, 0.5)")));
    }
    let scale = Float::max(S::one(), a.iter().fold(S::zero(), |m, v| Float::max(m, Float::abs(*v))));
    let zero_tol = S::tol(1e-12) * scale;

    let eig = a.clone().complex_eigenvalues();
    let eigenvalues: Vec<(S, S)> = eig.iter().map(|z| (z.re, z.im)).collect();
    let modulus = |e: &(S, S)| Float::sqrt(e.0 * e.0 + e.1 * e.1);
    let group_of = |e: &(S, S)| {
        let m = modulus(e);
        if m <= zero_tol {
            Group::Kernel
        } else if m < S::one() - tol {
            Group::Stable
        } else if m > S::one() + tol {
            Group::Unstable
        } else {
            Group::Neutral
        }
    };
    let groups: Vec<Group> = eigenvalues.iter().map(group_of).collect();

    let basis = |keep: &[Group]| -> Result<DMatrix<S>> {
        let m = groups.iter().filter(|g| keep.contains(g)).count();
        invariant_subspace(a, &eigenvalues, &groups, keep, m, scale)
    };
    let kernel = basis(&[Group::Kernel])?;
    let stable = basis(&[Group::Stable])?;
    let unstable = basis(&[Group::Unstable])?;
    let neutral = basis(&[Group::Neutral])?;
    let contracting = basis(&[Group::Kernel, Group::Stable])?;

    let lambda_s_stable = eigenvalues
        .iter()
        .zip(&groups)
        .filter(|(_, g)| **g == Group::Stable)
        .map(|(e, _)| modulus(e))
        .fold(None, |acc: Option<S>, m| Some(acc.map_or(m, |a| Float::max(a, m))));
    let lambda_u = eigenvalues
        .iter()
        .zip(&groups)
        .filter(|(_, g)| **g == Group::Unstable)
        .map(|(e, _)| modulus(e))
        .fold(None, |acc: Option<S>, m| Some(acc.map_or(m, |a| Float::min(a, m))));

    let restrict = |b: &DMatrix<S>| b.transpose() * a * b;
    let contracting_op = restrict(&contracting);
    let unstable_op = restrict(&unstable);
    let neutral_op = restrict(&neutral);

    let mut lambda_s = match (lambda_s_stable, kernel.ncols()) {
        (Some(l), _) => Some(l),
        (None, k) if k > 0 => Some(S::zero()),
        _ => None,
    };
    let mut c_s = S::one();
    if contracting.ncols() > 0 {
        let mut ls = lambda_s.unwrap_or_else(S::zero);
        // nilpotent part of order > 1 with no stable eigenvalue: use a nominal rate
        if ls == S::zero() && spectral_norm(&contracting_op) > zero_tol {
            ls = S::lit(0.5);
            lambda_s = Some(ls);
        }
        let mut p = DMatrix::<S>::identity(contracting.ncols(), contracting.ncols());
        for n in 0..=GROWTH_HORIZON {
            let norm = spectral_norm(&p);
            if ls > S::zero() {
                c_s = Float::max(c_s, norm / Float::powi(ls, n as i32));
            } else if n == 0 {
                c_s = Float::max(c_s, norm);
            }
            p = &contracting_op * p;
        }
    }
    let mut c_u = S::one();
    if unstable.ncols() > 0 {
        let inv = unstable_op
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Internal("singular unstable restriction".into()))?;
        let lu = lambda_u.expect("unstable eigenvalue present");
        let mut p = DMatrix::<S>::identity(unstable.ncols(), unstable.ncols());
        for n in 0..=GROWTH_HORIZON {
            c_u = Float::max(c_u, spectral_norm(&p) * Float::powi(lu, n as i32));
            p = &inv * p;
        }
    }

    let projection_norm = if neutral.ncols() == 0 {
        projection_norms(&unstable, &contracting)?
    } else {
        S::one()
    };

    let split = SpectralSplit {
        kernel,
        stable,
        unstable,
        neutral,
        contracting,
        lambda_s,
        lambda_u,
        constant: Float::max(c_s, c_u),
        projection_norm,
        tol,
        eigenvalues,
        contracting_op,
        unstable_op,
        neutral_op,
    };
    let (k0, ks, ku, kn) = split.dims();
    if k0 + ks + ku + kn != d {
        return Err(Error::Internal("subspace dimensions do not add up".into()));
    }
    Ok(split)
}

pub(crate) fn spectral_norm<S: LinalgScalar>(m: &DMatrix<S>) -> S {
    if m.nrows() == 0 || m.ncols() == 0 {
        return S::zero();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(S::zero(), |a, b| Float::max(a, *b))
}

// Generalised eigenspace of the eigenvalues in `keep`, obtained as the range
// of the product of `(A − λI)` over all other eigenvalues.
fn invariant_subspace<S: LinalgScalar>(
    a: &DMatrix<S>,
    eigenvalues: &[(S, S)],
    groups: &[Group],
    keep: &[Group],
    m: usize,
    scale: S,
) -> Result<DMatrix<S>> {
    let d = a.nrows();
    if m == 0 {
        return Ok(DMatrix::zeros(d, 0));
    }
    let id = DMatrix::<S>::identity(d, d);
    if m == d {
        return Ok(id);
    }
    let two = S::lit(2.0);
    let mut prod = id.clone();
    for (e, g) in eigenvalues.iter().zip(groups) {
        if keep.contains(g) {
            continue;
        }
        let (re, im) = *e;
        let factor = if im == S::zero() {
            (a - &id * re) / scale
        } else if im > S::zero() {
            let sq = re * re + im * im;
            (a * a - a * (two * re) + &id * sq) / (scale * scale)
        } else {
            continue;
        };
        prod = factor * prod;
        // keep entries of order one
        let n = spectral_norm(&prod);
        if n > S::zero() {
            prod /= n;
        }
    }
    let svd = prod.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::Internal("SVD did not return left singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|i, j| {
        svd.singular_values[*j]
            .partial_cmp(&svd.singular_values[*i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<DVector<S>> = order[..m].iter().map(|i| u.column(*i).into_owned()).collect();
    Ok(DMatrix::from_columns(&cols))
}

// max(‖Π_u‖, ‖Π_c‖) for the oblique projections of ℝ^d = Eᵘ ⊕ (E⁰ ⊕ Eˢ).
fn projection_norms<S: LinalgScalar>(unstable: &DMatrix<S>, contracting: &DMatrix<S>) -> Result<S> {
    let d = unstable.nrows();
    let ku = unstable.ncols();
    if ku == 0 || ku == d {
        return Ok(S::one());
    }
    let mut basis = DMatrix::<S>::zeros(d, d);
    basis.columns_mut(0, ku).copy_from(unstable);
    basis.columns_mut(ku, d - ku).copy_from(contracting);
    let inv = basis
        .try_inverse()
        .ok_or_else(|| Error::Internal("invariant subspaces are not complementary".into()))?;
    let pu = unstable * inv.rows(0, ku);
    let pc = contracting * inv.rows(ku, d - ku);
    Ok(Float::max(S::one(), Float::max(spectral_norm(&pu), spectral_norm(&pc))))
}
