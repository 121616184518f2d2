//! Affine maps `x ↦ Ax + a` on ℝ^d and linear automorphisms of the 2-torus.

mod spectral;
mod torus;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::rate::{GluingRate, RateShape};
use crate::system::{GluingCertificate, Map, System};
use crate::trajectory::{Orbit, Window};
use crate::{Error, Result};

pub use spectral::{spectral_split, LinalgScalar, SpectralSplit, GROWTH_HORIZON};
pub use torus::{torus_forward, torus_glue, TorusAutomorphism};

/// Default neutrality tolerance on eigenvalue moduli.
pub const DEFAULT_TOL: f64 = 1e-6;

/// `T x = A x + a` on ℝ^d with the euclidean metric. The spectral splitting
/// is computed once at construction.
#[derive(Debug, Clone)]
pub struct AffineMap<S: LinalgScalar> {
    matrix: DMatrix<S>,
    offset: DVector<S>,
    split: SpectralSplit<S>,
}

impl<S: LinalgScalar> AffineMap<S> {
    pub fn new(matrix: DMatrix<S>, offset: DVector<S>) -> Result<Self> {
        Self::with_tol(matrix, offset, S::lit(DEFAULT_TOL))
    }

    pub fn with_tol(matrix: DMatrix<S>, offset: DVector<S>, tol: S) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d || offset.len() != d {
            return Err(Error::Parameter(format!(
                "matrix is {}x{} but offset has length {}",
                matrix.nrows(),
                matrix.ncols(),
                offset.len()
            )));
        }
        if offset.iter().any(|v| !Float::is_finite(*v)) {
            return Err(Error::Domain {
                index: 0,
                detail: "offset has non-finite entries".into(),
            });
        }
        let split = spectral_split(&matrix, tol)?;
        Ok(Self {
            matrix,
            offset,
            split,
        })
    }

    /// Linear map with zero offset, from row-major entries.
    pub fn linear(d: usize, rows: &[S]) -> Result<Self> {
        if rows.len() != d * d {
            return Err(Error::Parameter(format!("expected {} entries, got {}", d * d, rows.len())));
        }
        Self::new(DMatrix::from_row_slice(d, d, rows), DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<S> {
        &self.offset
    }

    pub fn split(&self) -> &SpectralSplit<S> {
        &self.split
    }

    pub fn apply(&self, x: &DVector<S>) -> DVector<S> {
        &self.matrix * x + &self.offset
    }

    fn check_state(&self, x: &DVector<S>, index: i64) -> Result<()> {
        if x.len() != self.dim() || x.iter().any(|v| !Float::is_finite(*v)) {
            return Err(Error::Domain {
                index,
                detail: format!("expected a finite vector of length {}", self.dim()),
            });
        }
        Ok(())
    }

    /// Certified rate `C (λ_s^{|k|} + λ_u^{-|k|})` with `C` the transient
    /// constant times the projection norm.
    pub fn certified_rate(&self) -> Result<GluingRate<S>> {
        rate_of(&self.split)
    }

    // Glues `left` (ending at time −1) to `right` (starting at 0) given the
    // value `x0` of the left orbit at time 0.
    fn glue_with(
        &self,
        left: &[DVector<S>],
        x0: &DVector<S>,
        right: &[DVector<S>],
    ) -> Result<GluingCertificate<DVector<S>, S>> {
        let split = &self.split;
        let rate = rate_of(split)?;
        let y0 = right
            .first()
            .ok_or_else(|| Error::Usage("right segment must be nonempty".into()))?;
        for (i, x) in left.iter().enumerate() {
            self.check_state(x, i as i64 - left.len() as i64)?;
        }
        for (i, y) in right.iter().enumerate() {
            self.check_state(y, i as i64)?;
        }
        self.check_state(x0, 0)?;

        let ku = split.unstable.ncols();
        let kc = split.contracting.ncols();
        let d = self.dim();
        let diff = y0 - x0;
        let separation = diff.norm();

        // y0 − x0 = B_u c_u + B_c c_c, z0 = x0 + B_u c_u = y0 − B_c c_c
        let mut basis = DMatrix::<S>::zeros(d, d);
        basis.columns_mut(0, ku).copy_from(&split.unstable);
        basis.columns_mut(ku, kc).copy_from(&split.contracting);
        let coeffs = basis
            .svd(true, true)
            .solve(&diff, S::tol(1e-14))
            .map_err(|e| Error::Internal(format!("intersection solve failed: {e}")))?;
        let residual = (&basis_of(split) * &coeffs - &diff).norm();
        if residual > S::tol(1e-8) * Float::max(S::one(), separation) {
            return Err(Error::Internal(format!(
                "unstable and contracting subspaces do not span: residual {residual}"
            )));
        }
        let mut cu: DVector<S> = coeffs.rows(0, ku).into_owned();
        let mut cc: DVector<S> = -coeffs.rows(ku, kc).into_owned();

        let n_left = left.len();
        let mut states = Vec::with_capacity(n_left + right.len());
        let mut errors = Vec::with_capacity(n_left + right.len());
        if n_left > 0 {
            let inv = split.unstable_inverse()?;
            let mut back = Vec::with_capacity(n_left);
            for x in left.iter().rev() {
                cu = &inv * cu;
                let shift = &split.unstable * &cu;
                back.push((x + &shift, shift.norm()));
            }
            for (z, e) in back.into_iter().rev() {
                states.push(z);
                errors.push(e);
            }
        }
        for y in right {
            let shift = &split.contracting * &cc;
            errors.push(shift.norm());
            states.push(y + shift);
            cc = &split.contracting_op * cc;
        }
        Ok(GluingCertificate {
            window: Window::new(-(n_left as i64), right.len() as i64 - 1)?,
            states,
            errors,
            separation,
            rate,
            tie_breaks: Vec::new(),
        })
    }
}

fn basis_of<S: LinalgScalar>(split: &SpectralSplit<S>) -> DMatrix<S> {
    let d = split.dim();
    let ku = split.unstable.ncols();
    let mut basis = DMatrix::<S>::zeros(d, d);
    basis.columns_mut(0, ku).copy_from(&split.unstable);
    basis
        .columns_mut(ku, d - ku)
        .copy_from(&split.contracting);
    basis
}

fn rate_of<S: LinalgScalar>(split: &SpectralSplit<S>) -> Result<GluingRate<S>> {
    if !split.is_hyperbolic() {
        return Err(Error::Unsupported(format!(
            "neutral subspace of dimension {} (eigenvalues of modulus 1 within {}); \
             orbits separated along it can never be glued",
            split.neutral.ncols(),
            split.tol
        )));
    }
    Ok(GluingRate::strong(RateShape::Hyperbolic {
        constant: split.constant * split.projection_norm,
        lambda_s: split.lambda_s,
        lambda_u: split.lambda_u,
    }))
}

/// Glues the backward orbit `x` (window ending at 0) to the forward orbit
/// `y` (window starting at 0) through the intersection of `x₀ + Eᵘ` with
/// `y₀ + (E⁰ ⊕ Eˢ)`.
pub fn affine_glue<S: LinalgScalar>(
    map: &AffineMap<S>,
    x: &Orbit<DVector<S>>,
    y: &Orbit<DVector<S>>,
) -> Result<GluingCertificate<DVector<S>, S>> {
    if x.window.hi() != 0 || y.window.lo() != 0 || x.states.is_empty() {
        return Err(Error::Usage(
            "expected a backward orbit ending at 0 and a forward orbit starting at 0".into(),
        ));
    }
    let n = x.states.len();
    map.glue_with(&x.states[..n - 1], &x.states[n - 1], &y.states)
}

/// Offsets the orbit `x` by `v ∈ Eⁿ`: `y_k = x_k + A^k v` over the window of `x`.
/// Errors with a usage error when the neutral subspace is empty or `v` is not in it.
pub fn neutral_counterexample<S: LinalgScalar>(
    map: &AffineMap<S>,
    x: &Orbit<DVector<S>>,
    v: &DVector<S>,
) -> Result<Orbit<DVector<S>>> {
    let split = map.split();
    let kn = split.neutral.ncols();
    if kn == 0 {
        return Err(Error::Usage("the neutral subspace is empty".into()));
    }
    if v.len() != map.dim() {
        return Err(Error::Usage(format!("offset must have length {}", map.dim())));
    }
    let coords = split.neutral.transpose() * v;
    let off = (&split.neutral * &coords - v).norm();
    if off > S::tol(1e-9) * Float::max(S::one(), v.norm()) {
        return Err(Error::Usage(format!("offset is not in the neutral subspace (residual {off})")));
    }
    let op = &split.neutral_op;
    let inv = op
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular neutral restriction".into()))?;
    let lo = x.window.lo();
    let hi = x.window.hi();
    let mut states = x.states.clone();
    // k = 0 and forward
    let mut c = coords.clone();
    for k in 0..=hi {
        if let Some(i) = x.window.offset(k) {
            states[i] += &split.neutral * &c;
        }
        c = op * c;
    }
    let mut c = coords;
    for k in (lo..0).rev() {
        c = &inv * c;
        if let Some(i) = x.window.offset(k) {
            states[i] += &split.neutral * &c;
        }
    }
    // windows not containing 0 are rejected by Window::new, so every index was touched
    Ok(Orbit::unchecked(x.window, states, x.map_id.clone()))
}

impl<S: LinalgScalar> System<S> for AffineMap<S> {
    type State = DVector<S>;

    fn name(&self) -> String {
        format!("affine(d={})", self.dim())
    }

    fn contains(&self, x: &DVector<S>) -> bool {
        x.len() == self.dim() && x.iter().all(|v| Float::is_finite(*v))
    }

    fn distance(&self, a: &DVector<S>, b: &DVector<S>) -> S {
        (a - b).norm()
    }

    fn gap(&self, prev: &DVector<S>, next: &DVector<S>) -> Result<S> {
        self.check_state(prev, 0)?;
        self.check_state(next, 0)?;
        Ok((self.apply(prev) - next).norm())
    }

    fn orbit_tolerance(&self) -> S {
        S::tol(1e-9)
    }

    fn rate(&self) -> Result<GluingRate<S>> {
        self.certified_rate()
    }

    fn glue(
        &self,
        left: &[DVector<S>],
        right: &[DVector<S>],
    ) -> Result<GluingCertificate<DVector<S>, S>> {
        match left.last() {
            Some(last) => {
                self.check_state(last, -1)?;
                let x0 = self.apply(last);
                self.glue_with(left, &x0, right)
            }
            None => {
                let y0 = right
                    .first()
                    .ok_or_else(|| Error::Usage("right segment must be nonempty".into()))?;
                self.glue_with(left, &y0.clone(), right)
            }
        }
    }
}

impl<S: LinalgScalar> Map<S> for AffineMap<S> {
    fn step(&self, x: &DVector<S>) -> Result<DVector<S>> {
        self.check_state(x, 0)?;
        Ok(self.apply(x))
    }
}
