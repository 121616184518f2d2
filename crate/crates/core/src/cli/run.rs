//! Subcommand implementations. Each returns a [`Report`]; the caller turns
//! it into an exit status.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::config::{perturbation_from_config, Checks, FamilySpec, RawConfig};
use super::output::{flag, num, state_header, verdict, StateColumns, Table};
use crate::interval::neutral_rate_probe;
use crate::perturb::{empirical_type_audit, make_pseudo, PerturbationKind, PerturbationModel, Perturbable};
use crate::rate::{GluingRate, Strength};
use crate::shadowing::{
    final_check, gap_recursion_check, gap_sum_bound, parallel_glue_on, sequential_glue_on,
    shadowing_rate, theorem_bound, GapSumVerdict, ShadowRun,
};
use crate::symbolic::{symbolic_glue, SymbolSequence, TransitionSystem};
use crate::trajectory::{PseudoTrajectory, Window};
use crate::{AffineMap, Error, IntervalMap, Result, System, TorusAutomorphism};

/// Command-line overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub radius: Option<i64>,
    pub no_bound_checks: bool,
}

/// Outcome of a subcommand: lines for stdout and the overall verdict.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub pass: bool,
}

impl Report {
    fn passed(lines: Vec<String>) -> Self {
        Self { lines, pass: true }
    }
}

/// A map family usable by the generic runners.
pub trait CliFamily: Perturbable<f64, State: StateColumns> {
    fn state_dim(&self) -> usize;

    fn state_from(&self, v: &[f64]) -> Result<Self::State>;

    fn default_state(&self) -> Self::State;

    /// Rate fed to the gap recursion check.
    fn recursion_rate(&self) -> Result<GluingRate<f64>> {
        self.rate()
    }
}

fn expect_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Parse(format!("state needs {n} coordinates, got {}", v.len())));
    }
    Ok(())
}

impl CliFamily for IntervalMap {
    fn state_dim(&self) -> usize {
        1
    }

    fn state_from(&self, v: &[f64]) -> Result<f64> {
        expect_len(v, 1)?;
        Ok(v[0])
    }

    fn default_state(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    /// Weak certified rates are replaced by the strong contraction envelope.
    fn recursion_rate(&self) -> Result<GluingRate<f64>> {
        let rate = self.rate()?;
        Ok(match rate.strength {
            Strength::Strong => rate,
            Strength::Weak => self.contraction_envelope(),
        })
    }
}

impl CliFamily for TorusAutomorphism {
    fn state_dim(&self) -> usize {
        2
    }

    fn state_from(&self, v: &[f64]) -> Result<[f64; 2]> {
        expect_len(v, 2)?;
        Ok([v[0], v[1]])
    }

    fn default_state(&self) -> [f64; 2] {
        [std::f64::consts::FRAC_1_SQRT_2, 1.0 / 3f64.sqrt()]
    }
}

impl CliFamily for AffineMap {
    fn state_dim(&self) -> usize {
        self.dim()
    }

    fn state_from(&self, v: &[f64]) -> Result<DVector<f64>> {
        expect_len(v, self.dim())?;
        Ok(DVector::from_column_slice(v))
    }

    fn default_state(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }
}

/// A constructed map.
#[derive(Debug, Clone)]
pub enum Family {
    Interval(IntervalMap),
    Torus(TorusAutomorphism),
    Affine(AffineMap),
    Symbolic(TransitionSystem),
}

impl Family {
    pub fn build(spec: &FamilySpec) -> Result<Self> {
        Ok(match spec {
            FamilySpec::Doubling => Family::Interval(IntervalMap::doubling()),
            FamilySpec::Neutral { alpha } => Family::Interval(IntervalMap::symmetric(*alpha)?),
            FamilySpec::Interval { a, b, c, alpha, beta } => {
                Family::Interval(IntervalMap::new(*a, *b, *c, *alpha, *beta)?)
            }
            FamilySpec::Torus { matrix } => Family::Torus(TorusAutomorphism::new(*matrix)?),
            FamilySpec::Affine { dim, matrix, offset, tol } => {
                let m = DMatrix::from_row_slice(*dim, *dim, matrix);
                let o = DVector::from_column_slice(offset);
                Family::Affine(match tol {
                    Some(t) => AffineMap::with_tol(m, o, *t)?,
                    None => AffineMap::new(m, o)?,
                })
            }
            FamilySpec::Symbolic { transitions } => {
                Family::Symbolic(TransitionSystem::read(transitions)?)
            }
        })
    }

    /// `(R, α)` of the left neutral branch `v + R v^{1+α}`, for interval maps.
    fn decay_params(&self) -> Option<(f64, f64)> {
        match self {
            Family::Interval(m) => Some((m.a(), m.alpha())),
            _ => None,
        }
    }
}

macro_rules! with_continuous {
    ($family:expr, $sys:ident => $body:expr) => {
        match $family {
            Family::Interval($sys) => $body,
            Family::Torus($sys) => $body,
            Family::Affine($sys) => $body,
            Family::Symbolic(_) => Err(Error::Usage(
                "the symbolic family supports only the `primitive` and `glue` commands".into(),
            )),
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Parallel,
    Sequential,
}

/// Fully parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub family: Family,
    pub x0: Option<Vec<f64>>,
    pub perturbation: Option<PerturbationKind>,
    pub radius: Option<i64>,
    pub one_sided: bool,
    pub ladder: Option<Vec<i64>>,
    pub seeds: Vec<u64>,
    pub schedule: Schedule,
    pub checks: Checks,
    pub classify_epsilon: Option<f64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn new(raw: RawConfig, opts: &Options) -> Result<Self> {
        let base = opts.config.as_deref().and_then(Path::parent);
        let spec = FamilySpec::from_config(&raw, base)?;
        let family = Family::build(&spec)?;
        let perturbation = perturbation_from_config(&raw)?;
        if let Some(kind) = perturbation {
            PerturbationModel::new(kind, 0)?;
        }
        let radius = match opts.radius {
            Some(r) => Some(r),
            None => raw.int("run", "radius")?,
        };
        if let Some(r) = radius {
            if r < 1 {
                return Err(Error::Parse(format!("radius must be at least 1, got {r}")));
            }
        }
        let seeds = match opts.seed {
            Some(s) => vec![s],
            None => raw.seeds()?.unwrap_or_else(|| vec![1]),
        };
        let schedule = match raw.get("run", "schedule").unwrap_or("parallel") {
            "parallel" => Schedule::Parallel,
            "sequential" => Schedule::Sequential,
            other => {
                return Err(Error::Parse(format!(
                    "[run] schedule = `{other}`: expected parallel or sequential"
                )))
            }
        };
        let checks = if opts.no_bound_checks {
            Checks::none()
        } else {
            Checks::from_config(&raw)?
        };
        let out = opts
            .out
            .clone()
            .or_else(|| raw.get("run", "out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self {
            x0: raw.floats("map", "x0")?,
            one_sided: raw.bool_or("run", "one_sided", false)?,
            ladder: raw.ints("run", "ladder")?,
            classify_epsilon: raw.f64("run", "epsilon")?,
            raw,
            family,
            perturbation,
            radius,
            seeds,
            schedule,
            checks,
            out,
        })
    }

    fn window(&self) -> Result<Window> {
        let r = self
            .radius
            .ok_or_else(|| Error::Parse("missing [run] radius (or --radius)".into()))?;
        Ok(if self.one_sided {
            Window::forward(r as usize + 1)
        } else {
            Window::centered(r)
        })
    }

    fn model(&self, seed: u64) -> Result<PerturbationModel> {
        let kind = self
            .perturbation
            .unwrap_or(PerturbationKind::Uniform { epsilon: 0.0 });
        PerturbationModel::new(kind, seed)
    }

    fn model_name(&self) -> &'static str {
        match self.perturbation {
            None => "none",
            Some(k) => PerturbationModel { kind: k, seed: 0 }.name(),
        }
    }

    fn start<F: CliFamily>(&self, sys: &F) -> Result<F::State> {
        match &self.x0 {
            Some(v) => sys.state_from(v),
            None => Ok(sys.default_state()),
        }
    }
}

pub fn load(opts: &Options) -> Result<ExperimentConfig> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| Error::Parse("this command needs --config PATH".into()))?;
    ExperimentConfig::new(RawConfig::read(path)?, opts)
}

// ---------------------------------------------------------------- classify

pub fn classify(opts: &Options) -> Result<Report> {
    let cfg = load(opts)?;
    let table = with_continuous!(&cfg.family, sys => classify_table(sys, &cfg))?;
    table.write(&cfg.out, "classify.csv")?;
    let mut lines = vec![format!("wrote {}", cfg.out.join("classify.csv").display())];
    lines.extend(table.rows().iter().map(|r| r.join(",")));
    Ok(Report::passed(lines))
}

fn classify_table<F: CliFamily>(sys: &F, cfg: &ExperimentConfig) -> Result<Table> {
    let window = cfg.window()?;
    let x0 = cfg.start(sys)?;
    let mut t = Table::new([
        "seed", "model", "epsilon", "max_gap", "avg_gap", "density", "U", "A", "A_prime", "R",
        "threshold_n", "consistent",
    ]);
    let rows: Vec<Result<Vec<String>>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let model = cfg.model(seed)?;
            let pseudo: PseudoTrajectory<F::State, f64> = make_pseudo(sys, &x0, &model, window)?;
            let audit = empirical_type_audit(&pseudo, &model);
            let (report, consistent) = match (cfg.classify_epsilon, cfg.perturbation) {
                (Some(eps), _) => (crate::classify(&pseudo, eps), None),
                (None, Some(_)) => (audit.report, audit.consistent),
                (None, None) => {
                    return Err(Error::Parse(
                        "without a perturbation model set [run] epsilon for classification".into(),
                    ))
                }
            };
            Ok(vec![
                seed.to_string(),
                cfg.model_name().to_string(),
                num(report.epsilon),
                num(report.max_gap),
                num(report.average_gap),
                num(report.density),
                flag(report.satisfies_u).into(),
                flag(report.satisfies_a).into(),
                flag(report.satisfies_a_prime).into(),
                flag(report.satisfies_r).into(),
                report.threshold_n.map_or("na".into(), |n| n.to_string()),
                verdict(consistent).into(),
            ])
        })
        .collect();
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

// ------------------------------------------------------------------ shadow

pub const SUMMARY_HEADER: &[&str] = &[
    "seed",
    "model",
    "eps_hat",
    "phi",
    "bound",
    "average_error",
    "uniform_error",
    "rounds",
    "residual",
    "recursion",
    "gap_sum",
    "theorem",
    "uniform",
    "certificates",
    "pass",
];

/// Everything produced for one seed.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub summary: Vec<String>,
    pub trajectory: Table,
    pub rounds: Table,
    pub pass: bool,
}

fn shadow_seed<F: CliFamily>(sys: &F, cfg: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let window = cfg.window()?;
    let x0 = cfg.start(sys)?;
    let model = cfg.model(seed)?;
    let pseudo: PseudoTrajectory<F::State, f64> = make_pseudo(sys, &x0, &model, window)?;
    let ladder = cfg.ladder.clone().unwrap_or_else(|| window.ladder());
    let run = match cfg.schedule {
        Schedule::Parallel => parallel_glue_on(sys, &pseudo, &ladder)?,
        Schedule::Sequential => sequential_glue_on(sys, &pseudo, &ladder)?,
    };
    let certified = sys.rate()?;
    let phi = shadowing_rate(&certified, window.radius()).total();
    let uniform_noise = matches!(cfg.perturbation, Some(PerturbationKind::Uniform { .. }));
    // uniform noise is measured by its largest gap, everything else on average
    let eps_hat = if uniform_noise {
        pseudo.max_gap()
    } else {
        pseudo.average_gap()
    };
    let bound = theorem_bound(eps_hat, phi)?;
    let fc = final_check(sys, &run.orbit, &pseudo, &bound, uniform_noise)?;
    let checks = cfg.checks;

    let rrate = sys.recursion_rate()?;
    let len = window.len() as i64;
    let recursion = checks.recursion.then(|| {
        gap_recursion_check(&run, &rrate.truncate(len), rrate.strength)
            .iter()
            .all(|v| v.pass)
    });
    // the gap-sum bound needs a summable strong rate
    let strong = certified.strength == Strength::Strong;
    let gap_sum = if strong {
        Some(gap_sum_bound(&run, &shadowing_rate(&certified, len))?)
    } else {
        None
    };
    let gap_sum_pass = if checks.gap_sum {
        gap_sum.as_ref().map(GapSumVerdict::pass)
    } else {
        None
    };
    let theorem = (checks.theorem && strong).then_some(fc.average_pass);
    let uniform = if checks.uniform && strong { fc.uniform_pass } else { None };
    let certificates = checks.certificates.then(|| run.certificates_hold());
    let orbit_ok = run.residual <= sys.orbit_tolerance();
    let pass = orbit_ok
        && [recursion, gap_sum_pass, theorem, uniform, certificates]
            .iter()
            .all(|v| v.unwrap_or(true));

    let summary = vec![
        seed.to_string(),
        cfg.model_name().to_string(),
        num(eps_hat),
        num(phi),
        num(bound.bound),
        num(fc.average_error),
        num(fc.uniform_error),
        run.rounds.len().to_string(),
        num(run.residual),
        verdict(recursion).into(),
        verdict(gap_sum_pass).into(),
        verdict(theorem).into(),
        verdict(uniform).into(),
        verdict(certificates).into(),
        flag(pass).into(),
    ];
    Ok(SeedResult {
        seed,
        summary,
        trajectory: trajectory_table(sys, &pseudo, &run),
        rounds: rounds_table(&run, gap_sum.as_ref().filter(|_| checks.gap_sum)),
        pass,
    })
}

fn trajectory_table<F: CliFamily>(
    sys: &F,
    pseudo: &PseudoTrajectory<F::State, f64>,
    run: &ShadowRun<F::State, f64>,
) -> Table {
    let d = sys.state_dim();
    let mut header = vec!["t".to_string()];
    header.extend(state_header("y", d));
    header.extend(state_header("z", d));
    header.push("error".into());
    let mut t = Table::new(header);
    for (i, (y, z)) in pseudo.states.iter().zip(&run.orbit.states).enumerate() {
        let mut row = vec![(pseudo.window.lo() + i as i64).to_string()];
        row.extend(y.columns().into_iter().map(num));
        row.extend(z.columns().into_iter().map(num));
        row.push(num(sys.distance(y, z)));
        t.push(row);
    }
    t
}

fn rounds_table<T>(run: &ShadowRun<T, f64>, gap_sum: Option<&GapSumVerdict<f64>>) -> Table {
    let mut header = vec!["n".to_string(), "junction_count".into(), "max_gap".into()];
    header.extend(run.ladder.iter().map(|k| format!("R_{k}")));
    header.extend(run.ladder.iter().map(|k| format!("bound_{k}")));
    header.extend(run.ladder.iter().map(|k| format!("slack_{k}")));
    header.push("pass".into());
    let mut t = Table::new(header);
    let factor = gap_sum.map(|g| g.phi.exp());

    let mut row = vec![
        "0".to_string(),
        run.initial.len().to_string(),
        num(run.initial.iter().map(|(_, g)| *g).fold(0.0, f64::max)),
    ];
    row.extend(run.r0.iter().map(|r| num(*r)));
    row.extend(run.r0.iter().map(|r| num(factor.map_or(f64::NAN, |f| f * r))));
    row.extend(run.r0.iter().map(|_| num(factor.map_or(f64::NAN, |_| 0.0))));
    row.push(verdict(factor.map(|_| true)).into());
    t.push(row);

    let mut remaining = run.initial.len();
    for r in &run.rounds {
        remaining -= r.glued.len();
        let cells: Vec<_> = gap_sum
            .map(|g| g.cells.iter().filter(|c| c.round == r.round).collect())
            .unwrap_or_default();
        let mut row = vec![
            (r.round + 1).to_string(),
            remaining.to_string(),
            num(r.max_gap_after),
        ];
        row.extend(r.r_k.iter().map(|v| num(*v)));
        if cells.len() == run.ladder.len() {
            row.extend(cells.iter().map(|c| num(c.bound)));
            row.extend(cells.iter().map(|c| num(c.boundary_slack)));
            row.push(flag(cells.iter().all(|c| c.pass)).into());
        } else {
            row.extend(run.ladder.iter().map(|_| num(f64::NAN)));
            row.extend(run.ladder.iter().map(|_| num(f64::NAN)));
            row.push("na".into());
        }
        t.push(row);
    }
    t
}

fn shadow_all(cfg: &ExperimentConfig) -> Result<Vec<SeedResult>> {
    with_continuous!(&cfg.family, sys => {
        cfg.seeds
            .par_iter()
            .map(|&seed| shadow_seed(sys, cfg, seed))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()
    })
}

pub fn shadow(opts: &Options) -> Result<Report> {
    let cfg = load(opts)?;
    let results = shadow_all(&cfg)?;
    let mut summary = Table::new(SUMMARY_HEADER.iter().copied());
    let mut lines = Vec::new();
    for r in &results {
        r.trajectory
            .write(&cfg.out, &format!("trajectory_seed{}.csv", r.seed))?;
        r.rounds.write(&cfg.out, &format!("rounds_seed{}.csv", r.seed))?;
        summary.push(r.summary.clone());
        lines.push(
            SUMMARY_HEADER
                .iter()
                .zip(&r.summary)
                .map(|(h, v)| format!("{h}={v}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    summary.write(&cfg.out, "summary.csv")?;
    Ok(Report {
        pass: results.iter().all(|r| r.pass),
        lines,
    })
}

// ------------------------------------------------------------------- sweep

pub fn sweep(opts: &Options) -> Result<Report> {
    let cfg = load(opts)?;
    let parameter = cfg
        .raw
        .get("sweep", "parameter")
        .ok_or_else(|| Error::Parse("missing [sweep] parameter".into()))?
        .to_string();
    let values: Vec<String> = cfg
        .raw
        .get("sweep", "values")
        .ok_or_else(|| Error::Parse("missing [sweep] values".into()))?
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    if values.is_empty() {
        return Err(Error::Parse("[sweep] values is empty".into()));
    }
    let points = values
        .iter()
        .map(|v| ExperimentConfig::new(cfg.raw.with(&parameter, v)?, opts))
        .collect::<Result<Vec<_>>>()?;
    let (steps, v) = decay_settings(&cfg.raw)?;

    let outcomes: Vec<Result<(Vec<SeedResult>, f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let results = shadow_all(p)?;
            let (gamma, inv) = match p.family.decay_params() {
                Some((r, alpha)) if alpha > 0.0 => {
                    let probe = neutral_rate_probe(r, alpha, v, steps);
                    (probe.gamma_hat, probe.inverse_alpha)
                }
                _ => (f64::NAN, f64::NAN),
            };
            Ok((results, gamma, inv))
        })
        .collect();

    let mut header = vec!["parameter", "value"];
    header.extend(SUMMARY_HEADER.iter().copied());
    header.extend(["gamma_hat", "inverse_alpha"]);
    let mut table = Table::new(header);
    let mut pass = true;
    for (value, outcome) in values.iter().zip(outcomes) {
        let (results, gamma, inv) = outcome?;
        for r in results {
            pass &= r.pass;
            let mut row = vec![parameter.clone(), value.clone()];
            row.extend(r.summary);
            row.extend([num(gamma), num(inv)]);
            table.push(row);
        }
    }
    table.write(&cfg.out, "sweep.csv")?;
    let mut lines = vec![format!("wrote {}", cfg.out.join("sweep.csv").display())];
    lines.extend(table.rows().iter().map(|r| r.join(",")));
    Ok(Report { lines, pass })
}

// --------------------------------------------------------------- primitive

pub fn primitive(file: &Path) -> Result<Report> {
    let sys = TransitionSystem::read(file)?;
    let line = match sys.primitivity() {
        Some(m) => format!("M={m}"),
        None => "none".to_string(),
    };
    Ok(Report::passed(vec![line]))
}

// --------------------------------------------------------------- decay-fit

fn decay_settings(raw: &RawConfig) -> Result<(usize, f64)> {
    let steps = raw.int("decay", "steps")?.unwrap_or(10_000);
    if steps < 2 {
        return Err(Error::Parse(format!("[decay] steps must be at least 2, got {steps}")));
    }
    let v = raw.f64_or("decay", "v", 1.0)?;
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::Parse(format!("[decay] v must lie in (0, 1], got {v}")));
    }
    Ok((steps as usize, v))
}

pub fn decay_fit(opts: &Options) -> Result<Report> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| Error::Parse("decay-fit needs --config PATH".into()))?;
    let raw = RawConfig::read(path)?;
    let from_map = if raw.has_section("map") {
        let spec = FamilySpec::from_config(&raw, path.parent())?;
        Family::build(&spec)?.decay_params()
    } else {
        None
    };
    let r = match (raw.f64("decay", "r")?, from_map) {
        (Some(r), _) => r,
        (None, Some((r, _))) => r,
        (None, None) => return Err(Error::Parse("missing [decay] r".into())),
    };
    let alpha = match (raw.f64("decay", "alpha")?, from_map) {
        (Some(a), _) => a,
        (None, Some((_, a))) => a,
        (None, None) => return Err(Error::Parse("missing [decay] alpha".into())),
    };
    if !(r > 0.0 && alpha >= 0.0) {
        return Err(Error::Parameter(format!("need R > 0 and α ≥ 0, got R={r}, α={alpha}")));
    }
    let (steps, v) = decay_settings(&raw)?;
    let out = opts
        .out
        .clone()
        .or_else(|| raw.get("run", "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let p = neutral_rate_probe(r, alpha, v, steps);
    let mut values = Table::new(["n", "value"]);
    for (n, x) in p.values.iter().enumerate() {
        values.push(vec![n.to_string(), num(*x)]);
    }
    values.write(&out, "decay.csv")?;
    let mut fit = Table::new([
        "r", "alpha", "v", "steps", "gamma_hat", "residual", "inverse_alpha", "fit_lo", "fit_hi",
    ]);
    fit.push(vec![
        num(r),
        num(alpha),
        num(v),
        steps.to_string(),
        num(p.gamma_hat),
        num(p.residual),
        num(p.inverse_alpha),
        p.fit_range.0.to_string(),
        p.fit_range.1.to_string(),
    ]);
    fit.write(&out, "decay_fit.csv")?;
    Ok(Report::passed(vec![format!(
        "gamma_hat={} residual={} inverse_alpha={} fit_range={}:{}",
        num(p.gamma_hat),
        num(p.residual),
        num(p.inverse_alpha),
        p.fit_range.0,
        p.fit_range.1
    )]))
}

// -------------------------------------------------------------------- glue

pub fn glue(opts: &Options) -> Result<Report> {
    let cfg = load(opts)?;
    let (table, lines, pass) = match &cfg.family {
        Family::Symbolic(sys) => glue_symbolic(sys, &cfg.raw)?,
        family => with_continuous!(family, sys => glue_continuous(sys, &cfg))?,
    };
    table.write(&cfg.out, "glue.csv")?;
    Ok(Report {
        lines,
        pass: pass || !cfg.checks.certificates,
    })
}

type GlueOutput = (Table, Vec<String>, bool);

fn glue_continuous<F: CliFamily>(sys: &F, cfg: &ExperimentConfig) -> Result<GlueOutput> {
    let raw = &cfg.raw;
    let x_start = match raw.floats("glue", "x_start")? {
        Some(v) => sys.state_from(&v)?,
        None => cfg.start(sys)?,
    };
    let y0 = sys.state_from(
        &raw.floats("glue", "y0")?
            .ok_or_else(|| Error::Parse("missing [glue] y0".into()))?,
    )?;
    let backward = raw.int("glue", "backward")?.unwrap_or(32);
    let forward = raw.int("glue", "forward")?.unwrap_or(32);
    if backward < 1 || forward < 1 {
        return Err(Error::Parse("[glue] backward and forward must be at least 1".into()));
    }
    for (name, s) in [("x_start", &x_start), ("y0", &y0)] {
        if !sys.contains(s) {
            return Err(Error::Domain {
                index: 0,
                detail: format!("[glue] {name} = {s:?} is not in the phase space"),
            });
        }
    }
    let left = sys.iterate(&x_start, backward as usize)?;
    let right = sys.iterate(&y0, forward as usize)?;
    let cert = sys.glue(&left, &right)?;

    let d = sys.state_dim();
    let mut header = vec!["k".to_string()];
    header.extend(state_header("z", d));
    header.extend(state_header("ref", d));
    header.extend(["error".to_string(), "bound".into(), "ok".into()]);
    let mut t = Table::new(header);
    let violations = cert.violations();
    for (i, k) in cert.window.indices().enumerate() {
        let reference = if k < 0 {
            usize::try_from(k + backward).ok().and_then(|j| left.get(j))
        } else {
            right.get(k as usize)
        };
        let mut row = vec![k.to_string()];
        row.extend(cert.states[i].columns().into_iter().map(num));
        match reference {
            Some(r) => row.extend(r.columns().into_iter().map(num)),
            None => row.extend((0..d).map(|_| num(f64::NAN))),
        }
        row.push(num(cert.errors[i]));
        row.push(num(cert.bound_at(k)));
        row.push(flag(!violations.contains(&k)).into());
        t.push(row);
    }
    let pass = cert.satisfies_bound();
    let lines = vec![format!(
        "separation={} strength={:?} measured_ratio={} certificate={}",
        num(cert.separation),
        cert.rate.strength,
        num(cert.measured_ratio()),
        if pass { "holds" } else { "violated" }
    )];
    Ok((t, lines, pass))
}

fn symbols(raw: &RawConfig, key: &str) -> Result<Vec<usize>> {
    raw.ints("glue", key)?
        .ok_or_else(|| Error::Parse(format!("missing [glue] {key}")))?
        .into_iter()
        .map(|s| usize::try_from(s).map_err(|_| Error::Parse(format!("[glue] {key}: negative symbol {s}"))))
        .collect()
}

fn glue_symbolic(sys: &TransitionSystem, raw: &RawConfig) -> Result<GlueOutput> {
    let xs = symbols(raw, "x")?;
    let ys = symbols(raw, "y")?;
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Parse("[glue] x and y must be nonempty and of equal length".into()));
    }
    let n = xs.len() as i64;
    let origin = raw.int("glue", "origin")?.unwrap_or(n / 2);
    if !(0..n).contains(&origin) {
        return Err(Error::Parse(format!("[glue] origin {origin} outside 0..{n}")));
    }
    let window = Window::new(-origin, n - 1 - origin)?;
    let x = SymbolSequence::new(window, xs)?;
    let y = SymbolSequence::new(window, ys)?;
    let g = symbolic_glue(sys, &x, &y)?;
    let m = g.exponent as i64;
    let mut t = Table::new(["k", "z", "x", "y", "distance"]);
    let mut pass = sys.is_admissible(&g.z);
    for (i, k) in window.indices().enumerate() {
        let (z, xk, yk) = (g.z.symbols[i], x.symbols[i], y.symbols[i]);
        if (k <= -m && z != xk) || (k >= m && z != yk) {
            pass = false;
        }
        t.push(vec![
            k.to_string(),
            z.to_string(),
            xk.to_string(),
            yk.to_string(),
            num(g.profile[i]),
        ]);
    }
    let lines = vec![format!(
        "M={} admissible={} agreement={}",
        m,
        flag(sys.is_admissible(&g.z)),
        flag(pass)
    )];
    Ok((t, lines, pass))
}
