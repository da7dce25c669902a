//! Identity suites, their execution in symbolic or sampled mode, the
//! probe-based second evaluation path and the reports.

mod rank;
mod report;
mod suites;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dunkl::DunklError;
use crate::models::ModelError;
use crate::opalg::{Algebra, Expr, NormalOp, OpError, DEFAULT_TERM_BUDGET};
use crate::ring::{poly, FieldElem, Param, Poly, Rat, Ring, RingError, R_SLOT};

pub use rank::{independence_rank, RankCheck};
pub use report::{render_markdown, Summary, SuiteReport};
pub use suites::{appendix_suite, coproduct_suite, core_suite, independence_suite, model_suite, universal_suite, HamiltonianBuilder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("identity without a label or reference in suite {0}")]
    Unlabeled(String),
    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),
    #[error("{0}")]
    Build(String),
}

impl From<DunklError> for VerifyError {
    fn from(e: DunklError) -> Self {
        VerifyError::Model(e.into())
    }
}

impl From<RingError> for VerifyError {
    fn from(e: RingError) -> Self {
        VerifyError::Model(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Symbolic,
    Sampled,
}

impl Mode {
    pub fn default_for(dims: usize) -> Mode {
        if dims <= 3 {
            Mode::Symbolic
        } else {
            Mode::Sampled
        }
    }
}

/// Where parameters come from: fixed values, plus seeded random rationals
/// for everything else in sampled mode.
#[derive(Debug, Clone)]
pub struct Context {
    pub dims: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Index of the independent parameter draw.
    pub draw: u64,
    pub fixed: Vec<(Param, Rat)>,
    pub budget: usize,
}

impl Context {
    pub fn new(dims: usize, mode: Mode, seed: u64) -> Context {
        Context { dims, mode, seed, draw: 0, fixed: Vec::new(), budget: DEFAULT_TERM_BUDGET }
    }

    fn with_draw(&self, draw: u64) -> Context {
        Context { draw, ..self.clone() }
    }

    fn with_mode(&self, mode: Mode) -> Context {
        Context { mode, ..self.clone() }
    }

    /// Random rational with numerator in `[-20, 20] \ {0}` and denominator
    /// in `[1, 9]`, a pure function of seed, draw and parameter.
    pub fn sampled_value(&self, p: Param) -> Rat {
        sample_rat(&mut stream(self.seed, 1 + self.draw * 64 + p.slot() as u64))
    }

    /// Parameter values for a ring: `set` wins, `free` stays symbolic.
    pub fn assignment(&self, free: &[Param], set: &[(Param, Rat)]) -> Vec<(Param, Rat)> {
        let mut out = Vec::new();
        for p in Param::all(self.dims) {
            if free.contains(&p) {
                continue;
            }
            if let Some((_, v)) = set.iter().find(|(q, _)| *q == p) {
                out.push((p, v.clone()));
            } else if let Some((_, v)) = self.fixed.iter().find(|(q, _)| *q == p) {
                out.push((p, v.clone()));
            } else if self.mode == Mode::Sampled {
                out.push((p, self.sampled_value(p)));
            }
        }
        out
    }

    pub fn ring(&self, radial: bool, free: &[Param], set: &[(Param, Rat)]) -> Result<Ring, VerifyError> {
        Ok(Ring::with_params(self.dims, radial, &self.assignment(free, set))?)
    }

    pub fn algebra(&self, radial: bool, free: &[Param], set: &[(Param, Rat)]) -> Result<Arc<Algebra>, VerifyError> {
        Ok(Arc::new(Algebra::with_budget(self.ring(radial, free, set)?, self.budget)))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub(crate) fn sample_rat(rng: &mut ChaCha8Rng) -> Rat {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-20..=20);
    }
    Rat::new(n, rng.gen_range(1..=9))
}

/// One side of an identity.
#[derive(Clone)]
pub enum Side {
    /// An expression over the identity's own ring.
    Expr(Expr),
    /// An expression over another ring, carried over by parameter substitution.
    From { expr: Expr, alg: Arc<Algebra> },
    /// The terms of `side` that contain at least one reflection.
    ReflectionPart(Box<Side>),
}

impl Side {
    fn normalize(&self, alg: &Algebra) -> Result<NormalOp, OpError> {
        match self {
            Side::Expr(e) => Ok((*alg.normalize(e)?).clone()),
            Side::From { expr, alg: src } => src.normalize(expr)?.substitute(alg.ring()),
            Side::ReflectionPart(s) => Ok(s.normalize(alg)?.reflection_part()),
        }
    }

    fn apply(&self, ring: &Ring, f: &FieldElem) -> Result<FieldElem, OpError> {
        match self {
            Side::Expr(e) => e.apply(ring, f),
            Side::From { expr, alg: src } => {
                let g = src.ring().from_poly(f.num().clone());
                Ok(src.ring().substitute(&expr.apply(src.ring(), &g)?, ring)?)
            }
            // No tree-level way to isolate reflection terms.
            Side::ReflectionPart(_) => {
                let alg = Algebra::new(ring.clone());
                Ok(self.normalize(&alg)?.apply_to(f)?)
            }
        }
    }
}

/// A labelled operator identity `lhs = rhs` over the ring of `alg`.
#[derive(Clone)]
pub struct Identity {
    pub label: String,
    pub paper_ref: String,
    pub alg: Arc<Algebra>,
    pub lhs: Side,
    pub rhs: Side,
}

impl Identity {
    pub fn new(label: impl Into<String>, paper_ref: impl Into<String>, alg: &Arc<Algebra>, lhs: Expr, rhs: Expr) -> Identity {
        Identity { label: label.into(), paper_ref: paper_ref.into(), alg: alg.clone(), lhs: Side::Expr(lhs), rhs: Side::Expr(rhs) }
    }

    /// `lhs - rhs` in canonical form.
    pub fn difference(&self) -> Result<NormalOp, OpError> {
        let a = self.lhs.normalize(&self.alg)?;
        let b = self.rhs.normalize(&self.alg)?;
        a.sub(&b)
    }

    /// A copy whose two sides differ by `delta` (a negative control).
    pub fn perturbed(&self, delta: Expr) -> Result<Identity, OpError> {
        let rhs = match &self.rhs {
            Side::Expr(e) => Side::Expr(e + delta),
            other => Side::Expr(Expr::normal(other.normalize(&self.alg)?) + delta),
        };
        Ok(Identity { rhs, label: format!("{} (perturbed)", self.label), ..self.clone() })
    }
}

pub enum Check {
    Identity(Identity),
    Rank(RankCheck),
}

impl Check {
    pub fn label(&self) -> &str {
        match self {
            Check::Identity(i) => &i.label,
            Check::Rank(r) => &r.label,
        }
    }
}

/// Ordered list of checks with unique, non-empty labels.
pub struct Suite {
    pub name: String,
    pub model: Option<String>,
    pub dims: usize,
    pub checks: Vec<Check>,
    seen: HashSet<String>,
}

impl Suite {
    pub fn new(name: &str, model: Option<String>, dims: usize) -> Suite {
        Suite { name: name.into(), model, dims, checks: Vec::new(), seen: HashSet::new() }
    }

    pub fn push(&mut self, c: Check) -> Result<(), VerifyError> {
        let (label, reference) = match &c {
            Check::Identity(i) => (&i.label, &i.paper_ref),
            Check::Rank(r) => (&r.label, &r.paper_ref),
        };
        if label.trim().is_empty() || reference.trim().is_empty() {
            return Err(VerifyError::Unlabeled(self.name.clone()));
        }
        if !self.seen.insert(label.clone()) {
            return Err(VerifyError::DuplicateLabel(label.clone()));
        }
        self.checks.push(c);
        Ok(())
    }

    pub fn identity(&mut self, id: Identity) -> Result<(), VerifyError> {
        self.push(Check::Identity(id))
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn identities(&self) -> impl Iterator<Item = &Identity> {
        self.checks.iter().filter_map(|c| match c {
            Check::Identity(i) => Some(i),
            Check::Rank(_) => None,
        })
    }

    pub fn find(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label() == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Evidence attached to a failed or skipped check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Smallest nonzero term of `lhs - rhs`.
    Term(crate::opalg::Witness),
    /// First probe on which the two sides differ.
    Probe { probe: String, value: String },
    Rank { rank: usize, expected: usize, point: Vec<String> },
    Diagnostic { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub label: String,
    pub paper_ref: String,
    pub status: Status,
    pub millis: u64,
    pub witness: Option<Witness>,
}

impl CheckResult {
    fn new(label: &str, paper_ref: &str, status: Status, start: Instant, witness: Option<Witness>) -> CheckResult {
        CheckResult { label: label.into(), paper_ref: paper_ref.into(), status, millis: start.elapsed().as_millis() as u64, witness }
    }
}

fn skipped(label: &str, paper_ref: &str, start: Instant, e: impl ToString) -> CheckResult {
    CheckResult::new(label, paper_ref, Status::Skipped, start, Some(Witness::Diagnostic { message: e.to_string() }))
}

/// Normal-form verdict: pass iff `lhs - rhs` normalizes to zero. Budget
/// overflow yields `skipped`.
pub fn check_identity(id: &Identity) -> CheckResult {
    let start = Instant::now();
    match id.difference() {
        Ok(d) => match d.witness() {
            None => CheckResult::new(&id.label, &id.paper_ref, Status::Pass, start, None),
            Some(w) => CheckResult::new(&id.label, &id.paper_ref, Status::Fail, start, Some(Witness::Term(w))),
        },
        Err(e) => skipped(&id.label, &id.paper_ref, start, e),
    }
}

/// Second path: both sides act on every probe straight from their trees.
pub fn probe_check(id: &Identity, probes: &[FieldElem]) -> CheckResult {
    let start = Instant::now();
    let ring = id.alg.ring();
    for f in probes {
        let diff = id.lhs.apply(ring, f).and_then(|a| Ok(ring.sub(&a, &id.rhs.apply(ring, f)?)?));
        match diff {
            Ok(v) if v.is_zero() => {}
            Ok(v) => {
                let w = Witness::Probe { probe: f.render(), value: v.render() };
                return CheckResult::new(&id.label, &id.paper_ref, Status::Fail, start, Some(w));
            }
            Err(e) => return skipped(&id.label, &id.paper_ref, start, e),
        }
    }
    CheckResult::new(&id.label, &id.paper_ref, Status::Pass, start, None)
}

/// Monomials `x^a r^e` with every `a_i` in `-2..=degree` and `e` in `{0, 1}`
/// when the ring has `r`.
pub fn default_probes(ring: &Ring, degree: i8) -> Vec<FieldElem> {
    let n = ring.dims();
    let mut keys = vec![poly::UNIT_KEY];
    for i in 0..n {
        keys = keys
            .iter()
            .flat_map(|k| (-2..=degree).map(move |e| poly::key_add(k, &poly::x_key(i, e))))
            .collect();
    }
    if ring.radial() {
        let with_r: Vec<_> = keys
            .iter()
            .map(|k| {
                let mut k = *k;
                k[R_SLOT] = 1;
                k
            })
            .collect();
        keys.extend(with_r);
    }
    keys.into_iter().map(|k| ring.from_poly(Poly::monomial(k, crate::ring::GaussRat::ONE))).collect()
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub jobs: usize,
    pub probe_degree: i8,
    /// Random passing identities re-checked on each cross path.
    pub cross_checks: usize,
    /// Independent parameter draws in sampled mode; `None` picks 3 for
    /// `N >= 4` and 1 below.
    pub draws: Option<u64>,
    /// Record wall-clock milliseconds (otherwise 0, keeping reports
    /// byte-reproducible).
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { jobs: 0, probe_degree: 3, cross_checks: 2, draws: None, timings: false }
    }
}

fn run_check(c: &Check) -> CheckResult {
    match c {
        Check::Identity(i) => check_identity(i),
        Check::Rank(r) => r.run(),
    }
}

fn run_all(checks: &[&Check], jobs: usize) -> Vec<CheckResult> {
    let go = || checks.par_iter().map(|c| run_check(c)).collect();
    if jobs == 0 {
        return go();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(go),
        Err(_) => checks.iter().map(|c| run_check(c)).collect(),
    }
}

/// Merges per-draw results of one check: any failure wins, then any skip.
fn merge(mut draws: Vec<CheckResult>) -> CheckResult {
    let pick = draws
        .iter()
        .position(|r| r.status == Status::Fail)
        .or_else(|| draws.iter().position(|r| r.status == Status::Skipped))
        .unwrap_or(0);
    let millis = draws.iter().map(|r| r.millis).sum();
    let mut out = draws.swap_remove(pick);
    out.millis = millis;
    out
}

/// Builds a suite through `make`, runs it and the cross-path subsamples,
/// and assembles the report.
pub fn run_suite<F>(make: F, ctx: &Context, opts: &RunOptions) -> Result<SuiteReport, VerifyError>
where
    F: Fn(&Context) -> Result<Suite, VerifyError>,
{
    let draws = match ctx.mode {
        Mode::Symbolic => 1,
        Mode::Sampled => opts.draws.unwrap_or(if ctx.dims >= 4 { 3 } else { 1 }),
    };
    let first = make(ctx)?;
    let mut per_draw = vec![run_all(&first.checks.iter().collect::<Vec<_>>(), opts.jobs)];
    for d in 1..draws {
        let suite = make(&ctx.with_draw(d))?;
        per_draw.push(run_all(&suite.checks.iter().collect::<Vec<_>>(), opts.jobs));
    }
    let mut results: Vec<CheckResult> = (0..first.len())
        .map(|i| merge(per_draw.iter().map(|d| d[i].clone()).collect()))
        .collect();

    // Cross paths on random passing identities.
    let passing: Vec<usize> = first
        .checks
        .iter()
        .enumerate()
        .filter(|(i, c)| matches!(c, Check::Identity(_)) && results[*i].status == Status::Pass)
        .map(|(i, _)| i)
        .collect();
    let mut rng = stream(ctx.seed, 0);
    let k = opts.cross_checks.min(passing.len());
    if k > 0 {
        let mut picks: Vec<usize> = sample(&mut rng, passing.len(), k).into_iter().map(|j| passing[j]).collect();
        picks.sort_unstable();
        let mut extra = Vec::new();
        if ctx.mode == Mode::Symbolic {
            let sampled = make(&ctx.with_mode(Mode::Sampled))?;
            let chosen: Vec<&Check> = picks.iter().filter_map(|&i| sampled.find(first.checks[i].label())).collect();
            for mut r in run_all(&chosen, opts.jobs) {
                r.label = format!("sampled path: {}", r.label);
                extra.push(r);
            }
        }
        let mut picks: Vec<usize> = sample(&mut rng, passing.len(), k).into_iter().map(|j| passing[j]).collect();
        picks.sort_unstable();
        for i in picks {
            if let Check::Identity(id) = &first.checks[i] {
                let probes = default_probes(id.alg.ring(), opts.probe_degree);
                let mut r = probe_check(id, &probes);
                r.label = format!("probe path: {}", r.label);
                extra.push(r);
            }
        }
        results.extend(extra);
    }
    if !opts.timings {
        for r in &mut results {
            r.millis = 0;
        }
    }
    Ok(SuiteReport::new(&first, ctx, results))
}

/// Label → result lookup, for tests and callers that want one verdict.
pub fn by_label(results: &[CheckResult]) -> HashMap<&str, &CheckResult> {
    results.iter().map(|r| (r.label.as_str(), r)).collect()
}

#[cfg(test)]
mod tests;
