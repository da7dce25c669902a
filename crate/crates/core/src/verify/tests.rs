use super::rank::PhasePoint;
use super::*;
use crate::dunkl::{Dunkl, SiteConfig};
use crate::models::{Model, ModelKind, ModelSpec};

fn run(suite: &Suite) -> Vec<CheckResult> {
    suite.checks.iter().map(run_check).collect()
}

fn sym(n: usize) -> Context {
    Context::new(n, Mode::Symbolic, 0)
}

#[test]
fn sampled_values_follow_the_distribution() {
    let ctx = Context::new(3, Mode::Sampled, 7);
    for p in Param::all(3) {
        let v = ctx.sampled_value(p);
        assert_eq!(v, ctx.sampled_value(p));
        let big = v.to_big();
        assert!(!v.is_zero());
        assert!(*big.denom() <= 9.into());
        assert!(big.numer().magnitude() <= &20u32.into());
    }
    let other = Context { draw: 1, ..ctx.clone() };
    assert!(Param::all(3).iter().any(|&p| other.sampled_value(p) != ctx.sampled_value(p)));
    assert!(sym(2).assignment(&[], &[]).is_empty());
}

#[test]
fn core_suite_passes_and_is_large() {
    for n in [2, 3] {
        let s = core_suite(&sym(n)).unwrap();
        if n == 3 {
            assert!(s.len() >= 20, "{}", s.len());
        }
        for r in run(&s) {
            assert_eq!(r.status, Status::Pass, "{}", r.label);
        }
    }
}

#[test]
fn coproduct_suite_passes_two_sites() {
    let s = coproduct_suite(&sym(2)).unwrap();
    assert!(s.find("[J-, J+] = 4 i hbar J3 on sites 1..2").is_some());
    for r in run(&s) {
        assert_eq!(r.status, Status::Pass, "{}", r.label);
    }
}

#[test]
fn appendix_suite_sampled_kappa() {
    let s = appendix_suite(&Context::new(2, Mode::Sampled, 3)).unwrap();
    assert!(s.find("[Lambda12, Gamma1]").is_some());
    for r in run(&s) {
        assert_eq!(r.status, Status::Pass, "{}", r.label);
    }
}

#[test]
fn perturbed_identity_fails_in_both_paths() {
    let spec = ModelSpec::new(ModelKind::Osc, 2).unwrap();
    let m = Model::symbolic(spec).unwrap();
    let (_, f12) = m.extra_integrals().unwrap().into_iter().find(|(l, _)| l == "F_12").unwrap();
    let alg = m.dunkl.algebra().clone();
    let good = Identity::new("[H, F_12]", "test", &alg, Expr::commutator(&m.hamiltonian, &f12), Expr::zero());
    assert_eq!(check_identity(&good).status, Status::Pass);
    let flipped = Identity::new("[H, -F_12 + ...]", "test", &alg, Expr::commutator(&m.hamiltonian, &(-f12.clone() + m.dunkl.x(0))), Expr::zero());
    let r = check_identity(&flipped);
    assert_eq!(r.status, Status::Fail);
    assert!(matches!(r.witness, Some(Witness::Term(_))));
    let bad = good.perturbed(m.dunkl.x(0) * m.dunkl.pi(1)).unwrap();
    assert_eq!(check_identity(&bad).status, Status::Fail);
    let p = probe_check(&bad, &default_probes(alg.ring(), 3));
    assert_eq!(p.status, Status::Fail);
    assert!(matches!(p.witness, Some(Witness::Probe { .. })));
}

#[test]
fn probe_path_agrees_on_universal_integral() {
    let spec = ModelSpec::new(ModelKind::Osc, 2).unwrap();
    let m = Model::symbolic(spec).unwrap();
    let c2 = m.dunkl.left_casimir_expr(2).unwrap().full;
    let alg = m.dunkl.algebra().clone();
    let id = Identity::new("[C^[2], H]", "test", &alg, Expr::commutator(&c2, &m.hamiltonian), Expr::zero());
    let probes = default_probes(alg.ring(), 3);
    assert_eq!(probes.len(), 36);
    assert_eq!(probe_check(&id, &probes).status, Status::Pass);
    let zero = Identity::new("0 = 0", "test", &alg, Expr::zero(), Expr::zero());
    assert_eq!(probe_check(&zero, &[]).status, Status::Pass);
}

#[test]
fn radial_probes_double() {
    let ring = Ring::new(2, true).unwrap();
    assert_eq!(default_probes(&ring, 1).len(), 32);
}

#[test]
fn kc_suite_has_functional_relation() {
    let s = model_suite(ModelKind::KC, &sym(2)).unwrap();
    assert!(s.checks.iter().any(|c| c.label().starts_with("sum_i A_i^2")));
    for r in run(&s) {
        assert_eq!(r.status, Status::Pass, "{}", r.label);
    }
}

#[test]
fn model_suites_two_dims() {
    for kind in ModelKind::ALL {
        let s = model_suite(kind, &sym(2)).unwrap();
        for r in run(&s) {
            assert_eq!(r.status, Status::Pass, "{kind}: {}", r.label);
        }
    }
}

#[test]
fn rank_examples() {
    let s = independence_suite(ModelKind::Osc, &sym(3)).unwrap();
    assert!(s.checks[0].label().contains("= 4"));
    for r in run(&s) {
        assert_eq!(r.status, Status::Pass, "{}", r.label);
    }
    let s = independence_suite(ModelKind::KC, &sym(2)).unwrap();
    assert!(s.checks[0].label().starts_with("rank {H, C^[2]} = 2"));
    for r in run(&s) {
        assert_eq!(r.status, Status::Pass, "{}", r.label);
    }
}

#[test]
fn rank_rejects_reflections() {
    let d = Dunkl::symbolic(SiteConfig::new(2)).unwrap();
    let op = d.normalize(&d.pi_sq()).unwrap();
    let mut rng = stream(1, 1);
    let pt = PhasePoint::random(2, &mut rng);
    assert!(independence_rank(&[op], &pt).is_err());
    assert_eq!(pt.x.iter().fold(Rat::ZERO, |a, v| &a + &(v * v)), &pt.r * &pt.r);
}

#[test]
fn suite_rejects_bad_labels() {
    let alg = Arc::new(Algebra::new(Ring::new(1, false).unwrap()));
    let mut s = Suite::new("t", None, 1);
    assert!(s.identity(Identity::new("", "ref", &alg, Expr::zero(), Expr::zero())).is_err());
    assert!(s.identity(Identity::new("a", " ", &alg, Expr::zero(), Expr::zero())).is_err());
    s.identity(Identity::new("a", "ref", &alg, Expr::zero(), Expr::zero())).unwrap();
    assert!(matches!(s.identity(Identity::new("a", "ref", &alg, Expr::zero(), Expr::zero())), Err(VerifyError::DuplicateLabel(_))));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let ctx = Context::new(2, Mode::Sampled, 42);
    let opts = RunOptions::default();
    let a = run_suite(core_suite, &ctx, &opts).unwrap();
    let b = run_suite(core_suite, &ctx, &opts).unwrap();
    let ja = serde_json::to_string_pretty(&a).unwrap();
    assert_eq!(ja, serde_json::to_string_pretty(&b).unwrap());
    assert_eq!(a.summary.failed, 0);
    assert_eq!(a.seed, Some(42));
    assert!(a.checks.iter().any(|c| c.label.starts_with("probe path: ")));
    let back: SuiteReport = serde_json::from_str(&ja).unwrap();
    assert_eq!(back, a);
    assert!(render_markdown(&[a]).contains("| check |"));
}

#[test]
fn failure_witness_serializes() {
    let alg = Arc::new(Algebra::new(Ring::new(1, false).unwrap()));
    let id = Identity::new("x = 0", "ref", &alg, Expr::mul_by(alg.ring().x(0).unwrap()), Expr::zero());
    let r = check_identity(&id);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["status"], "fail");
    assert_eq!(json["witness"]["kind"], "term");
    assert_eq!(json["witness"]["monomial"], "x1");
    let back: CheckResult = serde_json::from_value(json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn symbolic_runs_cross_check_sampled_path() {
    let r = run_suite(core_suite, &sym(2), &RunOptions::default()).unwrap();
    assert!(r.checks.iter().any(|c| c.label.starts_with("sampled path: ")));
    assert_eq!(r.seed, None);
    assert!(r.all_passed());
}

#[test]
fn budget_overflow_is_skipped() {
    let mut ctx = sym(2);
    ctx.budget = 60;
    let s = coproduct_suite(&ctx).unwrap();
    let r = run(&s);
    assert!(r.iter().any(|c| c.status == Status::Skipped && matches!(c.witness, Some(Witness::Diagnostic { .. }))));
}
