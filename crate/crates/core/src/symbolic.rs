//! Subshifts of finite type over a finite alphabet `{0, …, r−1}`.
//!
//! Symbols are 0-based here; the golden-mean system `[[1,1],[1,0]]`
//! forbids the word `1 1`.

use std::fmt;
use std::path::Path;

use crate::rate::{GluingRate, RateShape};
use crate::scalar::Scalar;
use crate::system::{GluingCertificate, System};
use crate::trajectory::Window;
use crate::{Error, Result};

/// Binary transition matrix with its primitivity exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    pi: Vec<Vec<bool>>,
    exponent: Option<usize>,
}

/// A finite piece of a symbol sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    pub window: Window,
    pub symbols: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(window: Window, symbols: Vec<usize>) -> Result<Self> {
        if symbols.len() != window.len() {
            return Err(Error::Usage(format!(
                "window [{}, {}] needs {} symbols, got {}",
                window.lo(),
                window.hi(),
                window.len(),
                symbols.len()
            )));
        }
        Ok(Self { window, symbols })
    }

    pub fn at(&self, k: i64) -> Option<usize> {
        self.window.offset(k).map(|i| self.symbols[i])
    }
}

/// Boolean product `a · b`.
pub fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).any(|k| a[i][k] && b[k][j]))
                .collect()
        })
        .collect()
}

fn all_positive(m: &[Vec<bool>]) -> bool {
    m.iter().all(|row| row.iter().all(|v| *v))
}

impl TransitionSystem {
    pub fn new(pi: Vec<Vec<bool>>) -> Result<Self> {
        let r = pi.len();
        if r == 0 {
            return Err(Error::Parameter("alphabet must be nonempty".into()));
        }
        if let Some(i) = pi.iter().position(|row| row.len() != r) {
            return Err(Error::Parameter(format!("row {i} does not have {r} entries")));
        }
        let mut sys = Self { pi, exponent: None };
        sys.exponent = sys.search_exponent();
        Ok(sys)
    }

    /// From 0/1 integer rows.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let pi = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        _ => Err(Error::Parameter(format!("entry {v} in row {i} is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pi)
    }

    /// `[[1,1],[1,0]]`
    pub fn golden_mean() -> Self {
        Self::from_rows(&[vec![1, 1], vec![1, 0]]).expect("valid matrix")
    }

    /// Parses the text format: first line `r`, then `r` lines of `r`
    /// whitespace-separated 0/1 entries. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let r: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty transition matrix file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("alphabet size: {e}")))?;
        let mut rows = Vec::with_capacity(r);
        for i in 0..r {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {}", i + 1)))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u8>().map_err(|e| Error::Parse(format!("row {}: {e}", i + 1))))
                .collect::<Result<Vec<u8>>>()?;
            if row.len() != r {
                return Err(Error::Parse(format!("row {} has {} entries, expected {r}", i + 1, row.len())));
            }
            rows.push(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line: {extra}")));
        }
        Self::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn alphabet_size(&self) -> usize {
        self.pi.len()
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.pi
    }

    pub fn allows(&self, from: usize, to: usize) -> bool {
        from < self.pi.len() && to < self.pi.len() && self.pi[from][to]
    }

    /// Smallest `M` with `π^M > 0` entrywise, if found within `(r−1)² + 1`.
    pub fn primitivity(&self) -> Option<usize> {
        self.exponent
    }

    /// Why no bi-infinite sequence passes through some letter, if so.
    pub fn degeneracy(&self) -> Option<String> {
        let r = self.pi.len();
        if let Some(i) = (0..r).find(|&i| !self.pi[i].iter().any(|v| *v)) {
            return Some(format!("letter {i} has no successor"));
        }
        if let Some(j) = (0..r).find(|&j| !(0..r).any(|i| self.pi[i][j])) {
            return Some(format!("letter {j} has no predecessor"));
        }
        None
    }

    fn search_exponent(&self) -> Option<usize> {
        if self.degeneracy().is_some() {
            return None;
        }
        let r = self.pi.len();
        let bound = (r - 1) * (r - 1) + 1;
        let mut power = self.pi.clone();
        for m in 1..=bound {
            if all_positive(&power) {
                return Some(m);
            }
            power = bool_mul(&power, &self.pi);
        }
        None
    }

    /// Boolean power `π^n`, `n ≥ 1`.
    pub fn power(&self, n: usize) -> Vec<Vec<bool>> {
        let mut p = self.pi.clone();
        for _ in 1..n.max(1) {
            p = bool_mul(&p, &self.pi);
        }
        p
    }

    /// `None` when admissible, else the window index `i` with `π[s_i][s_{i+1}] = 0`
    /// (or a symbol outside the alphabet).
    pub fn first_violation(&self, s: &SymbolSequence) -> Option<i64> {
        let r = self.pi.len();
        if let Some(i) = s.symbols.iter().position(|v| *v >= r) {
            return Some(s.window.lo() + i as i64);
        }
        s.symbols
            .windows(2)
            .position(|w| !self.pi[w[0]][w[1]])
            .map(|i| s.window.lo() + i as i64)
    }

    pub fn is_admissible(&self, s: &SymbolSequence) -> bool {
        self.first_violation(s).is_none()
    }

    // can[n][s]: a path of exactly n steps leads from s to `to`.
    fn reach_table(&self, to: usize, steps: usize) -> Vec<Vec<bool>> {
        let r = self.pi.len();
        let mut can = Vec::with_capacity(steps + 1);
        can.push((0..r).map(|s| s == to).collect::<Vec<bool>>());
        for n in 1..=steps {
            let prev: &Vec<bool> = &can[n - 1];
            let row = (0..r).map(|s| (0..r).any(|j| self.pi[s][j] && prev[j])).collect();
            can.push(row);
        }
        can
    }

    /// Lexicographically smallest interior word `w` of length `len − 1` with
    /// `from, w, to` admissible.
    pub fn connecting_word(&self, from: usize, to: usize, len: usize) -> Option<Vec<usize>> {
        let r = self.pi.len();
        if len == 0 || from >= r || to >= r {
            return None;
        }
        let can = self.reach_table(to, len);
        if !can[len][from] {
            return None;
        }
        let mut word = Vec::with_capacity(len - 1);
        let mut cur = from;
        for remaining in (1..len).rev() {
            let next = (0..r).find(|&s| self.pi[cur][s] && can[remaining][s])?;
            word.push(next);
            cur = next;
        }
        Some(word)
    }

    /// Keeps letters `0..ell−1` and merges `ell−1..r` into the single letter `ell−1`.
    pub fn truncate_alphabet(&self, ell: usize) -> Result<Self> {
        let r = self.pi.len();
        if ell < 2 || ell > r {
            return Err(Error::Parameter(format!("truncation size {ell} outside [2, {r}]")));
        }
        let last = ell - 1;
        let class = |i: usize| i.min(last);
        let mut pi = vec![vec![false; ell]; ell];
        for i in 0..r {
            for j in 0..r {
                if self.pi[i][j] {
                    pi[class(i)][class(j)] = true;
                }
            }
        }
        Self::new(pi)
    }

    /// Weak rate: the indicator of `[−M, M]` for the per-coordinate discrete metric.
    pub fn certified_rate<S: Scalar>(&self) -> Result<GluingRate<S>> {
        let m = self.exponent.ok_or_else(|| {
            Error::Unsupported(match self.degeneracy() {
                Some(d) => format!("transition matrix is degenerate: {d}"),
                None => "transition matrix is not primitive".into(),
            })
        })?;
        Ok(GluingRate::weak(RateShape::Indicator { m: m as i64 }))
    }

    // Glues symbol strings on a common index line: `left` occupies
    // `[-left.len(), -1]` and `right` occupies `[0, right.len() − 1]`.
    fn glue_words(&self, left: &[usize], right: &[usize]) -> Result<Vec<usize>> {
        let m = self
            .exponent
            .ok_or_else(|| Error::Unsupported("transition matrix is not primitive".into()))?
            as i64;
        let n_left = left.len() as i64;
        let n_right = right.len() as i64;
        if n_right == 0 {
            return Err(Error::Usage("right segment must be nonempty".into()));
        }
        let r = self.pi.len();
        if left.iter().chain(right).any(|s| *s >= r) {
            return Err(Error::Domain {
                index: 0,
                detail: format!("symbol outside the alphabet of size {r}"),
            });
        }
        let mut z: Vec<usize> = left.iter().chain(right).copied().collect();
        let at = |k: i64| (k + n_left) as usize;
        if n_left == 0 || self.pi[left[left.len() - 1]][right[0]] {
            return Ok(z);
        }
        let a = -n_left.min(m);
        let b = (n_right - 1).min(m);
        if let Some(word) = self.connecting_word(z[at(a)], z[at(b)], (b - a) as usize) {
            for (i, s) in word.into_iter().enumerate() {
                z[at(a + 1 + i as i64)] = s;
            }
            return Ok(z);
        }
        // both pieces shorter than the exponent: keep y from b on, keep x
        // where it still precedes the rebuilt tail, otherwise take the
        // smallest admissible predecessor
        for k in (-n_left..b).rev() {
            let succ = z[at(k + 1)];
            let keep = if k < 0 { left[at(k)] } else { right[k as usize] };
            z[at(k)] = if self.pi[keep][succ] {
                keep
            } else {
                (0..r)
                    .find(|&s| self.pi[s][succ])
                    .ok_or_else(|| Error::Internal(format!("letter {succ} has no predecessor")))?
            };
        }
        Ok(z)
    }
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.pi.len())?;
        for row in &self.pi {
            let cells: Vec<&str> = row.iter().map(|v| if *v { "1" } else { "0" }).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `Σ_k 2^{−|k|} [s_k ≠ u_k]` over a common window.
pub fn sequence_distance(s: &SymbolSequence, u: &SymbolSequence) -> Result<f64> {
    if s.window != u.window {
        return Err(Error::Usage("sequences live on different windows".into()));
    }
    Ok(s.window
        .indices()
        .zip(s.symbols.iter().zip(&u.symbols))
        .filter(|(_, (a, b))| a != b)
        .map(|(k, _)| 0.5f64.powi(k.unsigned_abs().min(2000) as i32))
        .sum())
}

// Distance between the k-shifts of `a` and `b`, both indexed by `window`,
// over the indices where the shifted sequences are defined.
fn shifted_distance(window: Window, a: &[usize], b: &[usize], k: i64) -> f64 {
    window
        .indices()
        .zip(a.iter().zip(b))
        .filter(|(_, (p, q))| p != q)
        .map(|(i, _)| 0.5f64.powi((i - k).unsigned_abs().min(2000) as i32))
        .sum()
}

/// Result of [`symbolic_glue`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicGlue {
    pub z: SymbolSequence,
    pub exponent: usize,
    /// `ρ(σ^k z, σ^k x)` for `k < 0`, `ρ(σ^k z, σ^k y)` for `k ≥ 0`, over the window.
    pub profile: Vec<f64>,
}

/// Glues `x` (kept for `k ≤ −M`) to `y` (kept for `k ≥ M`), both admissible
/// on the same window.
pub fn symbolic_glue(
    sys: &TransitionSystem,
    x: &SymbolSequence,
    y: &SymbolSequence,
) -> Result<SymbolicGlue> {
    if x.window != y.window {
        return Err(Error::Usage("x and y must share a window".into()));
    }
    for (name, s) in [("x", x), ("y", y)] {
        if let Some(i) = sys.first_violation(s) {
            return Err(Error::Usage(format!("{name} is not admissible at index {i}")));
        }
    }
    let m = sys
        .primitivity()
        .ok_or_else(|| Error::Unsupported("transition matrix is not primitive".into()))?;
    let w = x.window;
    let split = w.offset(0).expect("windows contain 0");
    let symbols = sys.glue_words(&x.symbols[..split], &y.symbols[split..])?;
    let profile = w
        .indices()
        .map(|k| {
            let other = if k < 0 { &x.symbols } else { &y.symbols };
            shifted_distance(w, &symbols, other, k)
        })
        .collect();
    Ok(SymbolicGlue {
        z: SymbolSequence { window: w, symbols },
        exponent: m,
        profile,
    })
}

impl<S: Scalar> System<S> for TransitionSystem {
    type State = usize;

    fn name(&self) -> String {
        format!("symbolic(r={})", self.pi.len())
    }

    fn contains(&self, x: &usize) -> bool {
        *x < self.pi.len()
    }

    /// Discrete metric on letters.
    fn distance(&self, a: &usize, b: &usize) -> S {
        if a == b {
            S::zero()
        } else {
            S::one()
        }
    }

    fn gap(&self, prev: &usize, next: &usize) -> Result<S> {
        let r = self.pi.len();
        if *prev >= r || *next >= r {
            return Err(Error::Domain {
                index: 0,
                detail: format!("symbol outside the alphabet of size {r}"),
            });
        }
        Ok(if self.pi[*prev][*next] { S::zero() } else { S::one() })
    }

    fn orbit_tolerance(&self) -> S {
        S::zero()
    }

    fn rate(&self) -> Result<GluingRate<S>> {
        self.certified_rate()
    }

    fn glue(&self, left: &[usize], right: &[usize]) -> Result<GluingCertificate<usize, S>> {
        let rate = self.certified_rate()?;
        let states = self.glue_words(left, right)?;
        let n_left = left.len();
        let errors = states
            .iter()
            .zip(left.iter().chain(right))
            .map(|(a, b)| if a == b { S::zero() } else { S::one() })
            .collect();
        let separation = match left.last() {
            Some(l) if !self.pi[*l][right[0]] => S::one(),
            _ => S::zero(),
        };
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

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(lo: i64, s: &[usize]) -> SymbolSequence {
        SymbolSequence::new(Window::new(lo, lo + s.len() as i64 - 1).unwrap(), s.to_vec()).unwrap()
    }

    fn period_two() -> TransitionSystem {
        TransitionSystem::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let g = TransitionSystem::golden_mean();
        assert!(g.is_admissible(&seq(0, &[0, 1, 0, 1, 0])));
        assert_eq!(g.first_violation(&seq(-2, &[0, 1, 1, 0])), Some(-1));
        assert!(g.is_admissible(&seq(0, &[1])));
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(TransitionSystem::golden_mean().primitivity(), Some(2));
        assert_eq!(period_two().primitivity(), None);
        assert_eq!(TransitionSystem::from_rows(&[vec![1]]).unwrap().primitivity(), Some(1));
    }

    #[test]
    fn squaring_oracle() {
        // integer square of [[1,1],[1,0]] is [[2,1],[1,1]]
        let int = [[1u32, 1], [1, 0]];
        let mut sq = [[0u32; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                sq[i][j] = (0..2).map(|k| int[i][k] * int[k][j]).sum();
            }
        }
        assert_eq!(sq, [[2, 1], [1, 1]]);
        let p = TransitionSystem::golden_mean().power(2);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(p[i][j], sq[i][j] > 0);
            }
        }
    }

    #[test]
    fn degenerate_matrix_has_diagnostic() {
        let s = TransitionSystem::from_rows(&[vec![1, 1], vec![0, 0]]).unwrap();
        assert_eq!(s.primitivity(), None);
        assert!(s.degeneracy().unwrap().contains("no successor"));
    }

    #[test]
    fn distance_examples() {
        let s = seq(-3, &[0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(sequence_distance(&s, &s).unwrap(), 0.0);
        let mut u = s.clone();
        u.symbols[3] = 1;
        assert_eq!(sequence_distance(&s, &u).unwrap(), 1.0);
        let a = SymbolSequence::new(Window::centered(20), vec![0; 41]).unwrap();
        let b = SymbolSequence::new(Window::centered(20), vec![1; 41]).unwrap();
        let expect = 3.0 - 2.0 * 2f64.powi(-20);
        assert!((sequence_distance(&a, &b).unwrap() - expect).abs() < 1e-15);
        assert!(matches!(sequence_distance(&s, &a), Err(Error::Usage(_))));
    }

    #[test]
    fn connecting_word_examples() {
        let g = TransitionSystem::golden_mean();
        assert_eq!(g.connecting_word(1, 1, 2), Some(vec![0]));
        assert_eq!(g.connecting_word(0, 1, 1), Some(vec![]));
        assert_eq!(period_two().connecting_word(0, 0, 3), None);
        assert_eq!(period_two().connecting_word(0, 0, 2), Some(vec![1]));
    }

    #[test]
    fn connecting_word_is_lexicographically_smallest() {
        let full = TransitionSystem::from_rows(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        assert_eq!(full.connecting_word(2, 2, 4), Some(vec![0, 0, 0]));
        // enumerate all words of the golden-mean system between 1 and 1
        let g = TransitionSystem::golden_mean();
        let len = 6;
        let mut words = Vec::new();
        for code in 0..(1u32 << (len - 1)) {
            let w: Vec<usize> = (0..len - 1).map(|i| ((code >> (len - 2 - i)) & 1) as usize).collect();
            let mut full = vec![1];
            full.extend(&w);
            full.push(1);
            if full.windows(2).all(|p| g.allows(p[0], p[1])) {
                words.push(w);
            }
        }
        words.sort();
        assert_eq!(g.connecting_word(1, 1, len), words.first().cloned());
    }

    #[test]
    fn glue_same_sequence() {
        let g = TransitionSystem::golden_mean();
        let x = seq(-5, &[0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1]);
        let out = symbolic_glue(&g, &x, &x).unwrap();
        assert_eq!(out.z, x);
        assert!(out.profile.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn golden_mean_glue_example() {
        let g = TransitionSystem::golden_mean();
        let w = Window::centered(12);
        let x = SymbolSequence::new(w, vec![0; 25]).unwrap();
        // y = (0 1)^∞ with phase chosen so that y_{-1} = 1 and x_{-1} = 0 differ
        let y_sym: Vec<usize> = w.indices().map(|k| k.rem_euclid(2) as usize).collect();
        let y = SymbolSequence::new(w, y_sym).unwrap();
        let out = symbolic_glue(&g, &x, &y).unwrap();
        assert_eq!(out.exponent, 2);
        assert!(g.is_admissible(&out.z));
        for k in w.indices() {
            if k <= -2 {
                assert_eq!(out.z.at(k), x.at(k));
            }
            if k >= 2 {
                assert_eq!(out.z.at(k), y.at(k));
            }
        }
        for (k, e) in w.indices().zip(&out.profile) {
            if k.abs() > 2 {
                assert!(*e <= 2f64.powi(3 - k.abs() as i32) + 1e-15, "k={k} e={e}");
            }
        }
    }

    #[test]
    fn glued_junction_uses_connecting_word() {
        let g = TransitionSystem::golden_mean();
        let cert: GluingCertificate<usize, f64> = g.glue(&[0, 1, 0, 1], &[1, 0, 1, 0, 0]).unwrap();
        assert_eq!(cert.separation, 1.0);
        assert!(cert.states.windows(2).all(|p| g.allows(p[0], p[1])));
        assert_eq!(&cert.states[..2], &[0, 1]);
        assert_eq!(&cert.states[6..], &[1, 0, 0]);
        assert!(cert.satisfies_bound());
    }

    #[test]
    fn short_pieces_still_glue() {
        let g = TransitionSystem::golden_mean();
        let cert: GluingCertificate<usize, f64> = g.glue(&[1], &[1]).unwrap();
        assert!(cert.states.windows(2).all(|p| g.allows(p[0], p[1])));
        assert!(cert.satisfies_bound());
    }

    #[test]
    fn truncation_examples() {
        let g = TransitionSystem::golden_mean();
        assert_eq!(g.truncate_alphabet(2).unwrap(), g);
        let chain = TransitionSystem::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        let t = chain.truncate_alphabet(2).unwrap();
        assert_eq!(t, TransitionSystem::from_rows(&[vec![0, 1], vec![1, 1]]).unwrap());
        assert_eq!(t.primitivity(), Some(2));
    }

    #[test]
    fn parse_round_trip() {
        let g = TransitionSystem::golden_mean();
        assert_eq!(TransitionSystem::parse(&g.to_string()).unwrap(), g);
        assert!(matches!(TransitionSystem::parse("2\n1 1\n1\n"), Err(Error::Parse(_))));
        assert!(matches!(TransitionSystem::parse("2\n1 2\n1 0\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn period_two_obstruction_is_exhaustive() {
        let p = period_two();
        for radius in 1..=5i64 {
            let w = Window::centered(radius + 2);
            let n = w.len();
            let x: Vec<usize> = w.indices().map(|k| k.rem_euclid(2) as usize).collect();
            let y: Vec<usize> = x.iter().map(|s| 1 - s).collect();
            for nn in 0..=radius {
                let found = (0..(1u32 << n)).any(|code| {
                    let z: Vec<usize> = (0..n).map(|i| ((code >> i) & 1) as usize).collect();
                    z.windows(2).all(|q| p.allows(q[0], q[1]))
                        && w.indices().zip(&z).all(|(k, s)| {
                            let i = w.offset(k).unwrap();
                            (k > -nn || *s == x[i]) && (k < nn || *s == y[i])
                        })
                });
                assert!(!found, "radius {radius}, N {nn}");
            }
        }
    }
}
