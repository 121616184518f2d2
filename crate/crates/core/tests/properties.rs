use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use shadowlab::affine::{affine_glue, torus_forward, torus_glue};
use shadowlab::interval::Branch;
use shadowlab::perturb::{make_pseudo, PerturbationKind, PerturbationModel};
use shadowlab::shadowing::{parallel_glue, product_bound, shadowing_rate, theorem_bound};
use shadowlab::symbolic::{sequence_distance, symbolic_glue, SymbolSequence, TransitionSystem};
use shadowlab::{
    classify, compute_gaps, shadow_error_average, shadow_error_uniform, AffineMap, GluingRate, IntervalMap,
    Map, Orbit, PseudoTrajectory, RateFunction, RateShape, System, TorusAutomorphism, Window,
};

fn gap_ledger() -> impl Strategy<Value = (i64, Vec<f64>)> {
    (1i64..120).prop_flat_map(|r| {
        let n = (2 * r) as usize;
        (Just(r), prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => 0.0..2.0f64], n))
    })
}

fn rate_function() -> impl Strategy<Value = RateFunction<f64>> {
    (-20i64..5, prop::collection::vec(0.0..3.0f64, 1..40))
        .prop_map(|(lo, v)| RateFunction::new(lo, v).unwrap())
}

/// Boolean matrix power by repeated integer-free products, kept separate
/// from the library implementation.
fn oracle_power(pi: &[Vec<bool>], n: usize) -> Vec<Vec<bool>> {
    let r = pi.len();
    let mut acc: Vec<Vec<bool>> = (0..r).map(|i| (0..r).map(|j| i == j).collect()).collect();
    for _ in 0..n {
        let mut next = vec![vec![false; r]; r];
        for i in 0..r {
            for j in 0..r {
                next[i][j] = (0..r).any(|k| acc[i][k] && pi[k][j]);
            }
        }
        acc = next;
    }
    acc
}

fn all_true(m: &[Vec<bool>]) -> bool {
    m.iter().all(|r| r.iter().all(|b| *b))
}

/// Admissible sequence on `window` obtained by a seeded walk on the graph.
fn walk(sys: &TransitionSystem, window: Window, choices: &[usize]) -> SymbolSequence {
    let r = sys.alphabet_size();
    let mut s = vec![choices[0] % r];
    for c in &choices[1..window.len()] {
        let last = *s.last().unwrap();
        let next: Vec<usize> = (0..r).filter(|j| sys.allows(last, *j)).collect();
        s.push(next[c % next.len()]);
    }
    SymbolSequence::new(window, s).unwrap()
}

proptest! {
    #[test]
    fn type_lattice((r, gaps) in gap_ledger(), eps in 0.0..1.5f64) {
        let w = Window::centered(r);
        let pseudo = PseudoTrajectory::from_gaps(w, vec![(); w.len()], gaps).unwrap();
        let t = classify(&pseudo, eps);
        prop_assert!(!t.satisfies_u || t.satisfies_a);
        prop_assert!(!t.satisfies_a || t.satisfies_a_prime);
        if t.max_gap <= 1.0 {
            prop_assert!(!t.satisfies_r || t.satisfies_a_prime);
        }
    }

    #[test]
    fn envelope_dominates_and_is_idempotent(phi in rate_function()) {
        let e = phi.monotone_envelope();
        let (lo, hi) = phi.support();
        for k in lo..=hi {
            prop_assert!(e.get(k) >= phi.get(k));
        }
        for k in lo.max(0)..hi {
            prop_assert!(e.get(k) >= e.get(k + 1));
        }
        for k in lo..hi.min(-1) {
            prop_assert!(e.get(k) <= e.get(k + 1));
        }
        prop_assert_eq!(e.monotone_envelope(), e);
    }

    #[test]
    fn symmetrize_is_even_and_idempotent(phi in rate_function()) {
        let s = phi.symmetrize();
        prop_assert!(s.is_even());
        prop_assert_eq!(s.symmetrize(), s.clone());
        prop_assert!(s.total() <= 2.0 * phi.total() * (1.0 + 1e-12));
        // the bound rate used by the engine is even as well
        let g = GluingRate::strong(RateShape::Exponential { constant: 1.0, lambda: 0.4 });
        prop_assert!(shadowing_rate(&g, phi.support().1.abs() + 1).is_even());
    }

    #[test]
    fn average_error_between_min_and_max(
        xs in prop::collection::vec(0.0..0.5f64, 9),
        shift in prop::collection::vec(0.0..0.5f64, 9),
        c in 0.0..0.5f64,
        k in 0i64..=4,
    ) {
        let sys = IntervalMap::doubling();
        let w = Window::centered(4);
        let x = Orbit::unchecked(w, xs.clone(), "test");
        let ys: Vec<f64> = xs.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let y = PseudoTrajectory::from_gaps(w, ys, vec![0.0; 8]).unwrap();
        let avg = shadow_error_average(&sys, &x, &y, k).unwrap();
        let (range, _) = w.averaging_range(k);
        let errs: Vec<f64> = range.map(|i| shift[(i + 4) as usize]).collect();
        let lo = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = errs.iter().copied().fold(0.0, f64::max);
        prop_assert!(avg >= lo - 1e-15 && avg <= hi + 1e-15);

        let yc: Vec<f64> = xs.iter().map(|a| a + c).collect();
        let y = PseudoTrajectory::from_gaps(w, yc, vec![0.0; 8]).unwrap();
        let avg = shadow_error_average(&sys, &x, &y, 4).unwrap();
        let uni = shadow_error_uniform(&sys, &x, &y).unwrap();
        prop_assert!((avg - uni).abs() <= 1e-15);
    }

    #[test]
    fn true_orbits_have_no_moments(x0 in 0.0..1.0f64, t0 in 0.0..1.0f64, t1 in 0.0..1.0f64, len in 2usize..200) {
        let d = IntervalMap::doubling();
        let w = Window::forward(len);
        let p = compute_gaps::<f64, _>(&d, w, d.iterate(&x0, len).unwrap()).unwrap();
        prop_assert!(p.moments.is_empty());
        let cat = TorusAutomorphism::cat();
        let n = len.min(40);
        let p = compute_gaps::<f64, _>(&cat, Window::forward(n), cat.iterate(&[t0, t1], n).unwrap()).unwrap();
        prop_assert!(p.moments.is_empty());
    }

    #[test]
    fn product_bound_inequality(b in prop::collection::vec(prop_oneof![Just(0.0), 1e-3..2.0f64], 0..60)) {
        let (prod, bound) = product_bound(&b).unwrap();
        if b.iter().all(|v| *v == 0.0) {
            prop_assert_eq!(prod, bound);
        } else {
            prop_assert!(prod < bound);
        }
    }

    #[test]
    fn primitivity_matches_boolean_powers(r in 1usize..=5, bits in prop::collection::vec(any::<bool>(), 25)) {
        let pi: Vec<Vec<bool>> = (0..r).map(|i| bits[i * 5..i * 5 + r].to_vec()).collect();
        let Ok(sys) = TransitionSystem::new(pi.clone()) else { return Ok(()); };
        match sys.primitivity() {
            Some(m) => {
                for n in m..=m + 5 {
                    prop_assert!(all_true(&oracle_power(&pi, n)));
                }
                if m > 1 {
                    prop_assert!(!all_true(&oracle_power(&pi, m - 1)));
                }
            }
            None => {
                let bound = (r - 1) * (r - 1) + 1;
                prop_assert!((1..=bound).all(|n| !all_true(&oracle_power(&pi, n))));
            }
        }
    }

    #[test]
    fn sequence_distance_is_a_metric(
        a in prop::collection::vec(0usize..3, 21),
        b in prop::collection::vec(0usize..3, 21),
        c in prop::collection::vec(0usize..3, 21),
    ) {
        let w = Window::centered(10);
        let s = |v: &Vec<usize>| SymbolSequence::new(w, v.clone()).unwrap();
        let (x, y, z) = (s(&a), s(&b), s(&c));
        let d = |p: &SymbolSequence, q: &SymbolSequence| sequence_distance(p, q).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &y) == 0.0, a == b);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-15);
    }

    #[test]
    fn symbolic_glue_is_admissible_and_agrees(
        cx in prop::collection::vec(0usize..6, 31),
        cy in prop::collection::vec(0usize..6, 31),
        which in 0usize..2,
    ) {
        let sys = if which == 0 {
            TransitionSystem::golden_mean()
        } else {
            TransitionSystem::from_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap()
        };
        let w = Window::centered(15);
        let (x, y) = (walk(&sys, w, &cx), walk(&sys, w, &cy));
        let g = symbolic_glue(&sys, &x, &y).unwrap();
        let m = g.exponent as i64;
        prop_assert!(sys.is_admissible(&g.z));
        for k in w.indices() {
            if k <= -m {
                prop_assert_eq!(g.z.at(k), x.at(k));
            }
            if k >= m {
                prop_assert_eq!(g.z.at(k), y.at(k));
            }
        }
    }

    #[test]
    fn inverse_branches_invert(v in 0.0..=1.0f64, alpha in 0.0..1.5f64) {
        let m = IntervalMap::symmetric(alpha).unwrap();
        for b in [Branch::Left, Branch::Right] {
            let x = m.invert_branch(v, b).unwrap();
            prop_assert!((m.forward(x).unwrap() - v).abs() <= 1e-12);
            prop_assert_eq!(m.branch_of(x), b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_certificates_hold(
        d in 2usize..=3,
        entries in prop::collection::vec(-3.0..3.0f64, 9),
        x0 in prop::collection::vec(-1.0..1.0f64, 3),
        y0 in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let a = DMatrix::from_row_slice(d, d, &entries[..d * d]);
        let Ok(map) = AffineMap::new(a, DVector::zeros(d)) else { return Ok(()); };
        let away = map.split().eigenvalues.iter().all(|(re, im)| {
            let r = re.hypot(*im);
            !(0.9..=1.1).contains(&r)
        });
        prop_assume!(map.split().is_hyperbolic() && away);
        let len = 12;
        let xs = DVector::from_column_slice(&x0[..d]);
        let ys = DVector::from_column_slice(&y0[..d]);
        // backward orbit ending at xs is not available for singular maps,
        // so start it len-1 steps earlier and take whatever arrives
        let back = map.iterate(&xs, len).unwrap();
        let x = Orbit::new(&map, Window::new(-(len as i64) + 1, 0).unwrap(), back).unwrap();
        let y = Orbit::new(&map, Window::forward(len), map.iterate(&ys, len).unwrap()).unwrap();
        let cert = affine_glue(&map, &x, &y).unwrap();
        prop_assert!(cert.satisfies_bound(), "ratio {}", cert.measured_ratio());
    }

    #[test]
    fn torus_glue_ignores_integer_translations(
        p in (0.0..1.0f64, 0.0..1.0f64),
        q in (0.0..1.0f64, 0.0..1.0f64),
        shifts in prop::collection::vec(-3i32..=3, 2),
    ) {
        let cat = TorusAutomorphism::cat();
        let back = cat.iterate(&[p.0, p.1], 8).unwrap();
        let fwd = cat.iterate(&[q.0, q.1], 8).unwrap();
        let x = Orbit::unchecked(Window::new(-7, 0).unwrap(), back.clone(), "cat");
        let y = Orbit::unchecked(Window::forward(8), fwd.clone(), "cat");
        let base = torus_glue(&cat, &x, &y).unwrap();
        let (s0, s1) = (shifts[0] as f64, shifts[1] as f64);
        let moved: Vec<[f64; 2]> = back.iter().map(|v| [v[0] + s0, v[1] + s1]).collect();
        let x2 = Orbit::unchecked(x.window, moved, "cat");
        let other = torus_glue(&cat, &x2, &y).unwrap();
        for (a, b) in base.errors.iter().zip(&other.errors) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert!(base.satisfies_bound());
        prop_assert_eq!(torus_forward(&cat, &back[0]), back[1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parallel_gluing_invariants(seed in any::<u64>(), which in 0usize..3, eps in 1e-4..1e-2f64) {
        let kind = PerturbationKind::Uniform { epsilon: eps };
        let model = PerturbationModel::new(kind, seed).unwrap();
        let w = Window::centered(128);
        match which {
            0 => check_run(&IntervalMap::doubling(), &0.3, &model, w)?,
            1 => check_run(&TorusAutomorphism::cat(), &[0.2, 0.6], &model, w)?,
            _ => {
                // unbounded orbits: keep the window short enough for absolute tolerances
                let m = AffineMap::linear(2, &[1.5, 0.25, 0.0, 0.5]).unwrap();
                check_run(&m, &DVector::from_column_slice(&[0.1, -0.3]), &model, Window::centered(16))?
            }
        }
    }

    #[test]
    fn zero_noise_reproduces_true_orbits(seed in any::<u64>(), kind in 0usize..4) {
        let k = match kind {
            0 => PerturbationKind::Uniform { epsilon: 0.0 },
            1 => PerturbationKind::AverageSmall { epsilon: 0.0 },
            2 => PerturbationKind::Rare { density: 0.3, amplitude: 0.0 },
            _ => PerturbationKind::Gaussian { sigma: 0.0 },
        };
        let model = PerturbationModel::new(k, seed).unwrap();
        let cat = TorusAutomorphism::cat();
        let p = make_pseudo::<f64, _>(&cat, &[0.3, 0.4], &model, Window::centered(32)).unwrap();
        prop_assert!(p.moments.is_empty());
        prop_assert!(Orbit::new(&cat, p.window, p.states.clone()).is_ok());
    }

    #[test]
    fn generated_gaps_match_recomputation(seed in any::<u64>(), sigma in 1e-4..1e-1f64) {
        let model = PerturbationModel::new(PerturbationKind::Gaussian { sigma }, seed).unwrap();
        let d = IntervalMap::symmetric(0.5).unwrap();
        let w = Window::centered(64);
        let p = make_pseudo::<f64, _>(&d, &0.4, &model, w).unwrap();
        let again = make_pseudo::<f64, _>(&d, &0.4, &model, w).unwrap();
        prop_assert_eq!(&p.states, &again.states);
        for (i, pair) in p.states.windows(2).enumerate() {
            let g = d.gap(&pair[0], &pair[1]).unwrap();
            prop_assert!((g - p.gaps[i]).abs() <= 1e-12);
        }
    }
}

fn check_run<Sys>(
    sys: &Sys,
    x0: &Sys::State,
    model: &PerturbationModel,
    w: Window,
) -> std::result::Result<(), TestCaseError>
where
    Sys: shadowlab::perturb::Perturbable<f64>,
{
    let pseudo = make_pseudo::<f64, _>(sys, x0, model, w).unwrap();
    let run = parallel_glue(sys, &pseudo).unwrap();
    prop_assert!(Orbit::new(sys, w, run.orbit.states.clone()).is_ok());
    prop_assert!(run.residual <= sys.orbit_tolerance());

    let segments = pseudo.moments.len() + 1;
    let expected = (segments as f64).log2().ceil() as usize;
    prop_assert_eq!(run.rounds.len(), expected);
    for r in &run.rounds {
        prop_assert_eq!(r.segments_after, r.segments_before.div_ceil(2));
    }

    let mut consumed = run.consumed();
    consumed.sort_unstable();
    prop_assert_eq!(&consumed, &pseudo.moments);

    // uniformly small noise keeps every intermediate gap below ε Φ e^Φ
    let rate = sys.rate().unwrap();
    let phi = shadowing_rate(&rate, w.radius()).total();
    let bound = theorem_bound(pseudo.max_gap(), phi).unwrap().bound;
    for r in &run.rounds {
        prop_assert!(r.max_gap_after <= bound * (1.0 + 1e-9));
    }
    Ok(())
}
