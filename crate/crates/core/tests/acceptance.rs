//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails that is not listed in [`UNATTAINABLE`].

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shadowlab::affine::neutral_counterexample;
use shadowlab::interval::{neutral_rate_probe, strong_gluing_failure_probe};
use shadowlab::perturb::{make_pseudo, reflect_unit, PerturbationKind, PerturbationModel};
use shadowlab::shadowing::{
    final_check, gap_recursion_check, gap_sum_bound, parallel_glue, parallel_glue_on, product_bound,
    shadowing_rate, theorem_bound, ShadowRun,
};
use shadowlab::symbolic::{symbolic_glue, SymbolSequence, TransitionSystem};
use shadowlab::{
    compute_gaps, shadow_error_average, AffineMap, GluingRate, IntervalMap, Map, Orbit, PseudoTrajectory,
    System, TorusAutomorphism, Window,
};

/// Criteria that cannot hold as stated; see the notes printed with them.
const UNATTAINABLE: &[&str] = &["strong-gluing failure (alpha=beta=2)"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn cat_runs() -> Vec<(PseudoTrajectory<[f64; 2], f64>, ShadowRun<[f64; 2], f64>)> {
    let cat = TorusAutomorphism::cat();
    let w = Window::centered(1 << 12);
    let ladder: Vec<i64> = (4..=11).map(|j| 1i64 << j).collect();
    (1..=20u64)
        .map(|seed| {
            let model = PerturbationModel::new(PerturbationKind::Gaussian { sigma: 1e-3 }, seed).unwrap();
            let pseudo = make_pseudo(&cat, &[0.5f64.sqrt(), 1.0 / 3f64.sqrt()], &model, w).unwrap();
            let run = parallel_glue_on(&cat, &pseudo, &ladder).unwrap();
            (pseudo, run)
        })
        .collect()
}

fn theorem_average(runs: &[(PseudoTrajectory<[f64; 2], f64>, ShadowRun<[f64; 2], f64>)]) -> Outcome {
    let cat = TorusAutomorphism::cat();
    let rate = cat.rate().unwrap();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (pseudo, run) in runs {
        let phi = shadowing_rate(&rate, pseudo.window.radius()).total();
        let bound = theorem_bound(pseudo.average_gap(), phi).unwrap();
        let fc = final_check(&cat, &run.orbit, pseudo, &bound, false).unwrap();
        pass &= fc.average_pass;
        worst = worst.max(fc.average_error / fc.bound);
    }
    outcome(
        "theorem average bound (cat map, gaussian 1e-3, radius 2^12, 20 seeds)",
        pass,
        format!("max error/bound = {worst:.4}"),
    )
}

fn gap_sum(runs: &[(PseudoTrajectory<[f64; 2], f64>, ShadowRun<[f64; 2], f64>)]) -> Outcome {
    let cat = TorusAutomorphism::cat();
    let rate = cat.rate().unwrap();
    let mut cells = 0;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (pseudo, run) in runs {
        let phi = shadowing_rate(&rate, pseudo.window.len() as i64);
        let v = gap_sum_bound(run, &phi).unwrap();
        pass &= v.pass();
        cells += v.cells.len();
        for c in &v.cells {
            worst = worst.max(c.r_k / (c.bound + c.boundary_slack));
        }
    }
    outcome(
        "gap-sum bound R_k <= e^Phi R_k^(0) + slack, k = 2^4..2^11",
        pass && cells > 0,
        format!("{cells} cells, max R_k/(bound+slack) = {worst:.4}"),
    )
}

fn recursion() -> Outcome {
    let w = Window::centered(1024);
    let mut checked = 0;
    let mut pass = true;
    let mut tally = |run_pass: bool, n: usize| {
        pass &= run_pass;
        checked += n;
    };
    for seed in 1..=5u64 {
        let uni = PerturbationModel::new(PerturbationKind::Uniform { epsilon: 1e-3 }, seed).unwrap();
        let d = IntervalMap::doubling();
        let p = make_pseudo(&d, &0.3, &uni, w).unwrap();
        let run = parallel_glue(&d, &p).unwrap();
        let rate = d.rate().unwrap();
        let v = gap_recursion_check(&run, &rate.truncate(w.len() as i64), rate.strength);
        tally(v.iter().all(|r| r.pass), v.iter().map(|r| r.checked).sum());

        let gauss = PerturbationModel::new(PerturbationKind::Gaussian { sigma: 1e-3 }, seed).unwrap();
        let cat = TorusAutomorphism::cat();
        let p = make_pseudo(&cat, &[0.2, 0.7], &gauss, w).unwrap();
        let run = parallel_glue(&cat, &p).unwrap();
        let rate = cat.rate().unwrap();
        let v = gap_recursion_check(&run, &rate.truncate(w.len() as i64), rate.strength);
        tally(v.iter().all(|r| r.pass), v.iter().map(|r| r.checked).sum());

        let rare = PerturbationModel::new(PerturbationKind::Rare { density: 0.05, amplitude: 0.05 }, seed).unwrap();
        let n = IntervalMap::symmetric(0.5).unwrap();
        let p = make_pseudo(&n, &0.3, &rare, w).unwrap();
        let run = parallel_glue(&n, &p).unwrap();
        let env: GluingRate<f64> = n.contraction_envelope();
        let v = gap_recursion_check(&run, &env.truncate(w.len() as i64), env.strength);
        tally(v.iter().all(|r| r.pass), v.iter().map(|r| r.checked).sum());
    }
    outcome(
        "gap recursion (doubling, cat, neutral alpha=beta=1/2)",
        pass && checked > 0,
        format!("{checked} junction checks"),
    )
}

fn product_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pass = true;
    let mut zero_cases = 0;
    for i in 0..10_000 {
        let len = rng.random_range(0..=200);
        let b: Vec<f64> = if i % 50 == 0 {
            vec![0.0; len]
        } else {
            (0..len)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(1e-3..2.0) })
                .collect()
        };
        let (prod, bound) = product_bound(&b).unwrap();
        let equal = (bound - prod).abs() <= 1e-12 * bound;
        let all_zero = b.iter().all(|v| *v == 0.0);
        zero_cases += all_zero as usize;
        pass &= prod <= bound * (1.0 + 1e-12) && equal == all_zero;
    }
    outcome(
        "product lemma on 10^4 fuzzed sequences",
        pass,
        format!("{zero_cases} all-zero sequences"),
    )
}

fn certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let len = 20;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut record = |ok: bool, ratio: f64| {
        pass &= ok;
        worst = worst.max(ratio);
    };

    let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.3, 0.0, 0.4]);
    let affine = AffineMap::new(a, DVector::from_column_slice(&[0.1, -0.2, 0.3])).unwrap();
    for _ in 0..100 {
        let mut pt = || DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let (xs, ys) = (pt(), pt());
        let c = affine
            .glue(&affine.iterate(&xs, len).unwrap(), &affine.iterate(&ys, len).unwrap())
            .unwrap();
        record(c.satisfies_bound(), c.measured_ratio());
    }
    let cat = TorusAutomorphism::cat();
    for _ in 0..100 {
        let mut pt = || [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let (xs, ys) = (pt(), pt());
        let c = cat.glue(&cat.iterate(&xs, len).unwrap(), &cat.iterate(&ys, len).unwrap()).unwrap();
        record(c.satisfies_bound(), c.measured_ratio());
    }
    let d = IntervalMap::doubling();
    for _ in 0..100 {
        let (xs, ys): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let c = d.glue(&d.iterate(&xs, len).unwrap(), &d.iterate(&ys, len).unwrap()).unwrap();
        record(c.satisfies_bound() && c.is_strong(), c.measured_ratio());
    }
    outcome(
        "strong gluing certificates (affine, cat, doubling; 100 pairs each)",
        pass,
        format!("max error/bound = {worst:.4}"),
    )
}

fn decay() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.5f64, 1.0] {
        let p = neutral_rate_probe(2f64.powf(alpha), alpha, 1.0, 10_000);
        let rel = (p.gamma_hat * alpha - 1.0).abs();
        pass &= rel <= 0.1 && p.fit_range == (100, 10_000);
        detail.push(format!("alpha={alpha}: gamma_hat={:.4} (1/alpha={})", p.gamma_hat, 1.0 / alpha));
    }
    let p = neutral_rate_probe(1.0f64, 0.0, 1.0, 1000);
    let exact = p.values.iter().enumerate().all(|(n, v)| *v == 2f64.powi(-(n as i32)));
    pass &= exact;
    detail.push(format!("alpha=0 exact 2^-n: {exact}"));
    outcome("neutral decay exponents", pass, detail.join("; "))
}

fn failure_probe() -> (Outcome, String) {
    let map = IntervalMap::symmetric(2.0).unwrap();
    let seps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let rows = strong_gluing_failure_probe(&map, &seps, 1_000_000).unwrap();
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_ratio).collect();
    let sum: Vec<f64> = rows.iter().map(|r| r.sum_ratio).collect();
    let grows = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v[v.len() - 1] >= 10.0 * v[0];
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" ");
    let main = outcome(
        "strong-gluing failure (alpha=beta=2)",
        grows(&sup),
        format!(
            "sup_k ratio over separations 1e-2..1e-6: {}; backward branches contract, so this ratio never exceeds 1",
            fmt(&sup)
        ),
    );
    let info = format!(
        "sum_k ratio (least Phi of any strong rate on the window): {} -> growth x{:.1}, monotone: {}",
        fmt(&sum),
        sum[sum.len() - 1] / sum[0],
        grows(&sum)
    );
    (main, info)
}

fn rotation() -> Outcome {
    let rot = AffineMap::linear(2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
    let eps = 0.1;
    let n = 40i64;
    let w = Window::centered(n);
    let x = Orbit::unchecked(w, vec![DVector::zeros(2); w.len()], "rotation");
    let y = neutral_counterexample(&rot, &x, &DVector::from_column_slice(&[eps, 0.0])).unwrap();
    let tail = 10;
    let mut best = f64::INFINITY;
    for i in 0..100 {
        for j in 0..100 {
            let z0 = DVector::from_column_slice(&[
                -0.1 + 0.3 * i as f64 / 99.0,
                -0.15 + 0.3 * j as f64 / 99.0,
            ]);
            // z_k = R^k z0, both directions
            let mut fwd = z0.clone();
            let mut back = z0.clone();
            let mut err_x: f64 = 0.0;
            let mut err_y: f64 = 0.0;
            for k in 0..=n {
                if k >= tail {
                    err_y = err_y.max((&fwd - y.at(k).unwrap()).norm());
                    err_x = err_x.max((&back - x.at(-k).unwrap()).norm());
                }
                fwd = rot.apply(&fwd);
                back = DVector::from_column_slice(&[back[1], -back[0]]);
            }
            best = best.min(err_x.max(err_y));
        }
    }
    outcome(
        "neutral-subspace obstruction (rotation, 10^4 candidates)",
        best >= eps / 2.0,
        format!("best max(tail errors) = {best:.4} >= {}", eps / 2.0),
    )
}

fn oracle_power(pi: &[Vec<bool>], n: usize) -> Vec<Vec<bool>> {
    let r = pi.len();
    let mut acc: Vec<Vec<bool>> = (0..r).map(|i| (0..r).map(|j| i == j).collect()).collect();
    for _ in 0..n {
        acc = (0..r)
            .map(|i| (0..r).map(|j| (0..r).any(|k| acc[i][k] && pi[k][j])).collect())
            .collect();
    }
    acc
}

fn positive(m: &[Vec<bool>]) -> bool {
    m.iter().flatten().all(|b| *b)
}

fn primitivity() -> Outcome {
    let golden = TransitionSystem::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
    let flip = TransitionSystem::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
    let mut pass = golden.primitivity() == Some(2) && flip.primitivity().is_none();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut found, mut tried) = (0, 0);
    for _ in 0..3000 {
        let r = rng.random_range(1..=8);
        let density = rng.random_range(0.15..0.9);
        let pi: Vec<Vec<bool>> = (0..r)
            .map(|_| (0..r).map(|_| rng.random_bool(density)).collect())
            .collect();
        let Ok(sys) = TransitionSystem::new(pi.clone()) else { continue };
        tried += 1;
        match sys.primitivity() {
            Some(m) => {
                found += 1;
                pass &= positive(&oracle_power(&pi, m)) && positive(&oracle_power(&pi, m + 1));
                if m > 1 {
                    pass &= !positive(&oracle_power(&pi, m - 1));
                }
            }
            None => {
                let bound = (r - 1) * (r - 1) + 1;
                pass &= (1..=bound).all(|n| !positive(&oracle_power(&pi, n)));
            }
        }
    }
    outcome(
        "primitivity (golden mean M=2, flip none, fuzz r<=8)",
        pass,
        format!("{found} primitive of {tried} fuzzed matrices"),
    )
}

fn random_admissible(sys: &TransitionSystem, w: Window, rng: &mut ChaCha8Rng) -> SymbolSequence {
    let r = sys.alphabet_size();
    let mut s = vec![rng.random_range(0..r)];
    while s.len() < w.len() {
        let last = *s.last().unwrap();
        let next: Vec<usize> = (0..r).filter(|j| sys.allows(last, *j)).collect();
        s.push(next[rng.random_range(0..next.len())]);
    }
    SymbolSequence::new(w, s).unwrap()
}

fn symbolic() -> Outcome {
    let sys = TransitionSystem::golden_mean();
    let w = Window::centered(24);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pass = true;
    for _ in 0..200 {
        let x = random_admissible(&sys, w, &mut rng);
        let y = random_admissible(&sys, w, &mut rng);
        let g = symbolic_glue(&sys, &x, &y).unwrap();
        let m = g.exponent as i64;
        pass &= sys.is_admissible(&g.z);
        for (i, k) in w.indices().enumerate() {
            if k <= -m {
                pass &= g.z.at(k) == x.at(k);
            }
            if k >= m {
                pass &= g.z.at(k) == y.at(k);
            }
            if k.abs() > m {
                pass &= g.profile[i] <= 2f64.powi((m + 1 - k.abs()) as i32);
            }
        }
    }
    outcome("symbolic gluing (golden mean, 200 pairs)", pass, "M = 2".into())
}

fn uniform_corollary() -> Outcome {
    let d = IntervalMap::doubling();
    let w = Window::centered(1 << 12);
    let rate = d.rate().unwrap();
    let phi = shadowing_rate(&rate, w.radius()).total();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for seed in 1..=20u64 {
        let model = PerturbationModel::new(PerturbationKind::Uniform { epsilon: 1e-3 }, seed).unwrap();
        let pseudo = make_pseudo(&d, &0.5f64.sqrt(), &model, w).unwrap();
        let run = parallel_glue(&d, &pseudo).unwrap();
        let bound = theorem_bound(pseudo.max_gap(), phi).unwrap();
        let fc = final_check(&d, &run.orbit, &pseudo, &bound, true).unwrap();
        pass &= fc.uniform_pass == Some(true);
        worst = worst.max(fc.uniform_error / fc.bound);
    }
    outcome(
        "uniform corollary (doubling, uniform 1e-3, 20 seeds)",
        pass,
        format!("max uniform error/bound = {worst:.4}"),
    )
}

/// Doubling-map pseudo-trajectory on `[-64, 64]` with exactly eight
/// perturbations, built backward from the right edge.
fn eight_moment_pseudo(rng: &mut ChaCha8Rng) -> PseudoTrajectory<f64, f64> {
    let w = Window::centered(64);
    let mut moments = Vec::new();
    while moments.len() < 8 {
        let t = rng.random_range(-64..64i64);
        if !moments.contains(&t) {
            moments.push(t);
        }
    }
    let mut states = vec![rng.random_range(0.0..1.0f64)];
    for i in (-64..64i64).rev() {
        let next = *states.last().unwrap();
        let target = if moments.contains(&i) {
            let delta = rng.random_range(0.01..0.05) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            reflect_unit(next - delta)
        } else {
            next
        };
        let branch = rng.random_range(0..2) as f64;
        states.push((target + branch) / 2.0);
    }
    states.reverse();
    compute_gaps(&IntervalMap::doubling(), w, states).unwrap()
}

/// Best average error over orbits whose time-0 point lies on the grid
/// `j / 10^6`: forward part exact in integers, backward part by the
/// preimage nearest to the pseudo-trajectory.
fn grid_optimum(y: &[f64], radius: usize) -> f64 {
    const N: u64 = 1_000_000;
    let mut best = f64::INFINITY;
    for j in 0..N {
        let mut sum = 0.0;
        let mut num = j;
        for k in 0..=radius {
            sum += (num as f64 / N as f64 - y[radius + k]).abs();
            num = (2 * num) % N;
        }
        let mut z = j as f64 / N as f64;
        for k in 1..=radius {
            let yk = y[radius - k];
            let (a, b) = (z / 2.0, (z + 1.0) / 2.0);
            z = if (a - yk).abs() <= (b - yk).abs() { a } else { b };
            sum += (z - yk).abs();
            if sum >= best * (2 * radius + 1) as f64 {
                break;
            }
        }
        best = best.min(sum / (2 * radius + 1) as f64);
    }
    best
}

fn brute_force() -> Outcome {
    let d = IntervalMap::doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut pass = true;
    let mut detail = Vec::new();
    for _ in 0..3 {
        let pseudo = eight_moment_pseudo(&mut rng);
        let run = parallel_glue(&d, &pseudo).unwrap();
        let err = shadow_error_average(&d, &run.orbit, &pseudo, 64).unwrap();
        let opt = grid_optimum(&pseudo.states, 64);
        pass &= pseudo.moments.len() == 8 && err <= opt + 1e-3;
        detail.push(format!("{err:.3e} vs optimum {opt:.3e}"));
    }
    outcome(
        "brute-force oracle (doubling, radius 64, 8 perturbations)",
        pass,
        detail.join("; "),
    )
}

fn main() {
    let start = Instant::now();
    let runs = cat_runs();
    let (probe, probe_info) = failure_probe();
    let results = vec![
        theorem_average(&runs),
        gap_sum(&runs),
        recursion(),
        product_lemma(),
        certificates(),
        decay(),
        probe,
        rotation(),
        primitivity(),
        symbolic(),
        uniform_corollary(),
        brute_force(),
    ];
    let mut unexpected = 0;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        if r.name == "strong-gluing failure (alpha=beta=2)" {
            println!("INFO {}", probe_info);
        }
        if !r.pass && !UNATTAINABLE.contains(&r.name) {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!(
        "{passed}/{} criteria pass, {} known unattainable, {unexpected} unexpected failures ({:.1} s)",
        results.len(),
        results.iter().filter(|r| !r.pass && UNATTAINABLE.contains(&r.name)).count(),
        start.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
