use serde::{Deserialize, Serialize};

use super::{CheckResult, Context, Mode, Status, Suite, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// One suite's results in the JSON report layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub model: Option<String>,
    pub n: usize,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl SuiteReport {
    pub(super) fn new(suite: &Suite, ctx: &Context, checks: Vec<CheckResult>) -> SuiteReport {
        let mut summary = Summary { total: checks.len(), ..Summary::default() };
        for c in &checks {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        SuiteReport {
            suite: suite.name.clone(),
            model: suite.model.clone(),
            n: suite.dims,
            mode: ctx.mode,
            seed: (ctx.mode == Mode::Sampled).then_some(ctx.seed),
            checks,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0 && self.summary.skipped == 0
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Term(t) => format!(
            "eps={:?} beta={:?} {} * {} ({} terms)",
            t.eps, t.beta, t.coefficient, t.monomial, t.operator_terms
        ),
        Witness::Probe { probe, value } => format!("on {probe}: {value}"),
        Witness::Rank { rank, expected, .. } => format!("rank {rank}, expected {expected}"),
        Witness::Diagnostic { message } => message.clone(),
    }
}

/// One table per suite.
pub fn render_markdown(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let model = r.model.as_deref().map(|m| format!(", model {m}")).unwrap_or_default();
        let seed = r.seed.map(|s| format!(", seed {s}")).unwrap_or_default();
        let mode = match r.mode {
            Mode::Symbolic => "symbolic",
            Mode::Sampled => "sampled",
        };
        out += &format!("## {} (N = {}{model}, {mode}{seed})\n\n", r.suite, r.n);
        out += "| check | reference | status | ms | witness |\n|---|---|---|---|---|\n";
        for c in &r.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            let w = c.witness.as_ref().map(witness_text).unwrap_or_default();
            out += &format!("| {} | {} | {status} | {} | {} |\n", cell(&c.label), cell(&c.paper_ref), c.millis, cell(&w));
        }
        let s = r.summary;
        out += &format!("\n{} checks: {} passed, {} failed, {} skipped.\n\n", s.total, s.passed, s.failed, s.skipped);
    }
    out
}
