use dunkl_core::dunkl::{Dunkl, SiteConfig};
use dunkl_core::models::{build_hamiltonian, Model, ModelKind, ModelSpec};
use dunkl_core::opalg::Expr;
use dunkl_core::ring::{GaussRat, Param, Rat, Ring};
use dunkl_core::verify::{check_identity, default_probes, probe_check, Identity, Status};

#[test]
fn oscillator_on_constant_probe() {
    // The kinetic part kills constants, leaving omega^2 x^2 / 2.
    let spec = ModelSpec::new(ModelKind::Osc, 2).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let ring = h.ring().clone();
    let got = h.apply_to(&ring.one()).unwrap();
    let x = |i| ring.x(i).unwrap();
    let omega = ring.param(Param::Omega);
    let s = ring.add(&ring.mul(&x(0), &x(0)).unwrap(), &ring.mul(&x(1), &x(1)).unwrap()).unwrap();
    let want = ring.scale(&ring.mul(&ring.mul(&omega, &omega).unwrap(), &s).unwrap(), &GaussRat::frac(1, 2));
    assert_eq!(got, want);
}

#[test]
fn heisenberg_through_public_builders() {
    let d = Dunkl::symbolic(SiteConfig::new(3)).unwrap();
    let alg = d.algebra().clone();
    for i in 0..3 {
        for j in 0..3 {
            let lhs = Expr::commutator(&d.x(i), &d.p(j));
            let rhs = if i == j { d.param(Param::Hbar).scale_c(GaussRat::I) } else { Expr::zero() };
            let id = Identity::new(format!("[x{i}, p{j}]"), "canonical pair", &alg, lhs, rhs);
            assert_eq!(check_identity(&id).status, Status::Pass);
            assert_eq!(probe_check(&id, &default_probes(alg.ring(), 2)).status, Status::Pass);
        }
    }
}

#[test]
fn integrals_survive_numeric_parameters() {
    let spec = ModelSpec::new(ModelKind::CurvedKC, 2).unwrap();
    let ring = Ring::with_params(2, true, &[(Param::Kappa, Rat::new(-1, 3)), (Param::K, Rat::int(2))]).unwrap();
    let m = Model::new(spec, ring).unwrap();
    let alg = m.dunkl.algebra().clone();
    for (label, a) in m.extra_integrals().unwrap() {
        let id = Identity::new(label, "conserved", &alg, Expr::commutator(&m.hamiltonian, &a), Expr::zero());
        assert_eq!(check_identity(&id).status, Status::Pass);
    }
}
