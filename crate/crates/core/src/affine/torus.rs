//! Hyperbolic automorphisms `x ↦ Ax mod 1` of the 2-torus with the
//! Lyapunov metric: euclidean in eigen-coordinates, minimised over lifts.

use crate::rate::{GluingRate, RateShape};
use crate::scalar::Scalar;
use crate::system::{GluingCertificate, Map, System};
use crate::trajectory::{Orbit, Window};
use crate::{Error, Result};

/// Integer matrix with `|det| = 1` and no eigenvalue of modulus one.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusAutomorphism<S> {
    matrix: [[i64; 2]; 2],
    mu_u: S,
    mu_s: S,
    /// Unit eigenvectors as columns of the eigenbasis.
    e_u: [S; 2],
    e_s: [S; 2],
    /// Inverse of the eigenbasis: coordinates `(c_u, c_s)` of a vector.
    inv: [[S; 2]; 2],
}

const LIFT: i64 = 2;

impl<S: Scalar> TorusAutomorphism<S> {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(Error::Unsupported(format!("determinant {det} is not ±1")));
        }
        let tr = a + d;
        let disc = tr * tr - 4 * det;
        if disc <= 0 || (det == 1 && tr.abs() <= 2) || (det == -1 && tr == 0) {
            return Err(Error::Unsupported(format!(
                "matrix {matrix:?} is not hyperbolic (trace {tr}, determinant {det})"
            )));
        }
        let sq = S::from_int(disc).sqrt();
        let two = S::lit(2.0);
        let t = S::from_int(tr);
        let (l1, l2) = ((t + sq) / two, (t - sq) / two);
        let (mu_u, mu_s) = if l1.abs() > l2.abs() { (l1, l2) } else { (l2, l1) };
        let e_u = eigenvector(matrix, mu_u);
        let e_s = eigenvector(matrix, mu_s);
        let det_e = e_u[0] * e_s[1] - e_s[0] * e_u[1];
        let inv = [
            [e_s[1] / det_e, -e_s[0] / det_e],
            [-e_u[1] / det_e, e_u[0] / det_e],
        ];
        Ok(Self {
            matrix,
            mu_u,
            mu_s,
            e_u,
            e_s,
            inv,
        })
    }

    /// The cat map `[[2, 1], [1, 1]]`.
    pub fn cat() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    /// Expanding and contracting eigenvalues `(μ_u, μ_s)`.
    pub fn eigenvalues(&self) -> (S, S) {
        (self.mu_u, self.mu_s)
    }

    pub fn unstable_direction(&self) -> [S; 2] {
        self.e_u
    }

    pub fn stable_direction(&self) -> [S; 2] {
        self.e_s
    }

    /// `λ = ln |μ_u|`.
    pub fn lambda(&self) -> S {
        self.mu_u.abs().ln()
    }

    /// Eigen-coordinates `(c_u, c_s)` of a vector of ℝ².
    pub fn coords(&self, v: [S; 2]) -> [S; 2] {
        [
            self.inv[0][0] * v[0] + self.inv[0][1] * v[1],
            self.inv[1][0] * v[0] + self.inv[1][1] * v[1],
        ]
    }

    fn norm(&self, v: [S; 2]) -> S {
        let c = self.coords(v);
        c[0].hypot(c[1])
    }

    /// Representative of `b − a` of least Lyapunov norm; on equal norms the
    /// lexicographically smaller lift wins.
    pub fn minimal_lift(&self, a: &[S; 2], b: &[S; 2]) -> [S; 2] {
        let base = [wrap_half(b[0] - a[0]), wrap_half(b[1] - a[1])];
        let mut best = base;
        let mut best_norm = S::infinity();
        for m0 in -LIFT..=LIFT {
            for m1 in -LIFT..=LIFT {
                let v = [base[0] + S::from_int(m0), base[1] + S::from_int(m1)];
                let n = self.norm(v);
                if n < best_norm {
                    best = v;
                    best_norm = n;
                }
            }
        }
        best
    }

    fn check(&self, x: &[S; 2], index: i64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                index,
                detail: format!("point ({}, {}) is not in [0, 1)²", x[0], x[1]),
            })
        }
    }

    fn glue_with(
        &self,
        left: &[[S; 2]],
        x0: &[S; 2],
        right: &[[S; 2]],
    ) -> Result<GluingCertificate<[S; 2], S>> {
        if right.is_empty() {
            return Err(Error::Usage("right segment must be nonempty".into()));
        }
        let n_left = left.len() as i64;
        let left = reduce_all(left, -n_left)?;
        let right = reduce_all(right, 0)?;
        let x0 = reduce(x0, 0)?;
        let d = self.minimal_lift(&x0, &right[0]);
        let separation = self.norm(d);
        let c = self.coords(d);
        let (mut cu, mut cs) = (c[0], c[1]);
        let mut states = Vec::with_capacity(left.len() + right.len());
        let mut errors = Vec::with_capacity(left.len() + right.len());
        let mut back = Vec::with_capacity(left.len());
        for x in left.iter().rev() {
            cu = cu / self.mu_u;
            let z = [
                wrap_unit(x[0] + cu * self.e_u[0]),
                wrap_unit(x[1] + cu * self.e_u[1]),
            ];
            back.push((z, self.distance(x, &z)));
        }
        for (z, e) in back.into_iter().rev() {
            states.push(z);
            errors.push(e);
        }
        for y in &right {
            let z = [
                wrap_unit(y[0] - cs * self.e_s[0]),
                wrap_unit(y[1] - cs * self.e_s[1]),
            ];
            errors.push(self.distance(y, &z));
            states.push(z);
            cs = cs * self.mu_s;
        }
        Ok(GluingCertificate {
            window: Window::new(-(left.len() as i64), right.len() as i64 - 1)?,
            states,
            errors,
            separation,
            rate: self.certified_rate(),
            tie_breaks: Vec::new(),
        })
    }

    /// `φ(k) = e^{−λ|k|}` with `λ = ln |μ_u|`.
    pub fn certified_rate(&self) -> GluingRate<S> {
        GluingRate::strong(RateShape::Exponential {
            constant: S::one(),
            lambda: self.lambda(),
        })
    }
}

fn eigenvector<S: Scalar>(m: [[i64; 2]; 2], mu: S) -> [S; 2] {
    let [[a, b], [c, d]] = m;
    let (a, b, c, d) = (S::from_int(a), S::from_int(b), S::from_int(c), S::from_int(d));
    // rows of A − μI are orthogonal to the eigenvector
    let v1 = [b, mu - a];
    let v2 = [mu - d, c];
    let v = if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) { v1 } else { v2 };
    let n = v[0].hypot(v[1]);
    let (mut x, mut y) = (v[0] / n, v[1] / n);
    if x < S::zero() || (x == S::zero() && y < S::zero()) {
        x = -x;
        y = -y;
    }
    [x, y]
}

// Reduces a finite representative into [0, 1)².
fn reduce<S: Scalar>(x: &[S; 2], index: i64) -> Result<[S; 2]> {
    if x.iter().all(|v| v.is_finite()) {
        Ok([wrap_unit(x[0]), wrap_unit(x[1])])
    } else {
        Err(Error::Domain {
            index,
            detail: "non-finite torus coordinate".into(),
        })
    }
}

fn reduce_all<S: Scalar>(xs: &[[S; 2]], first: i64) -> Result<Vec<[S; 2]>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| reduce(x, first + i as i64))
        .collect()
}

fn wrap_unit<S: Scalar>(x: S) -> S {
    let r = x - x.floor();
    if r >= S::one() {
        S::zero()
    } else {
        r
    }
}

fn wrap_half<S: Scalar>(x: S) -> S {
    x - (x + S::lit(0.5)).floor()
}

/// `A x mod 1`.
pub fn torus_forward<S: Scalar>(map: &TorusAutomorphism<S>, x: &[S; 2]) -> [S; 2] {
    let [[a, b], [c, d]] = map.matrix;
    [
        wrap_unit(S::from_int(a) * x[0] + S::from_int(b) * x[1]),
        wrap_unit(S::from_int(c) * x[0] + S::from_int(d) * x[1]),
    ]
}

/// Glues the backward orbit `x` (window ending at 0) to the forward orbit
/// `y` (window starting at 0) along the local unstable line of `x₀` and the
/// local stable line of `y₀`. Representatives are reduced mod 1 first.
pub fn torus_glue<S: Scalar>(
    map: &TorusAutomorphism<S>,
    x: &Orbit<[S; 2]>,
    y: &Orbit<[S; 2]>,
) -> Result<GluingCertificate<[S; 2], S>> {
    if x.window.hi() != 0 || y.window.lo() != 0 || x.states.is_empty() {
        return Err(Error::Usage(
            "expected a backward orbit ending at 0 and a forward orbit starting at 0".into(),
        ));
    }
    let n = x.states.len();
    map.glue_with(&x.states[..n - 1], &x.states[n - 1], &y.states)
}

impl<S: Scalar> System<S> for TorusAutomorphism<S> {
    type State = [S; 2];

    fn name(&self) -> String {
        format!("torus({:?})", self.matrix)
    }

    fn contains(&self, x: &[S; 2]) -> bool {
        x.iter().all(|v| *v >= S::zero() && *v < S::one())
    }

    fn distance(&self, a: &[S; 2], b: &[S; 2]) -> S {
        self.norm(self.minimal_lift(a, b))
    }

    fn gap(&self, prev: &[S; 2], next: &[S; 2]) -> Result<S> {
        self.check(prev, 0)?;
        self.check(next, 1)?;
        Ok(self.distance(&torus_forward(self, prev), next))
    }

    fn orbit_tolerance(&self) -> S {
        S::tol(1e-9)
    }

    fn rate(&self) -> Result<GluingRate<S>> {
        Ok(self.certified_rate())
    }

    fn glue(&self, left: &[[S; 2]], right: &[[S; 2]]) -> Result<GluingCertificate<[S; 2], S>> {
        match left.last() {
            Some(last) => {
                let x0 = torus_forward(self, &reduce(last, -1)?);
                self.glue_with(left, &x0, right)
            }
            None => {
                let y0 = *right
                    .first()
                    .ok_or_else(|| Error::Usage("right segment must be nonempty".into()))?;
                self.glue_with(left, &y0, right)
            }
        }
    }
}

impl<S: Scalar> Map<S> for TorusAutomorphism<S> {
    fn step(&self, x: &[S; 2]) -> Result<[S; 2]> {
        self.check(x, 0)?;
        Ok(torus_forward(self, x))
    }
}
