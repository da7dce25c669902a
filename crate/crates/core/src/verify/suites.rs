use std::sync::Arc;

use crate::dunkl::{ih, Dunkl, SiteConfig};
use crate::models::{universal_integrals, Model, ModelKind, ModelSpec};
use crate::opalg::{Algebra, Expr};
use crate::ring::{GaussRat, Param, ParamScalar, Rat};

use super::{Check, Context, Identity, RankCheck, Side, Suite, VerifyError};

/// Builds a Hamiltonian over a given realization (custom models).
pub type HamiltonianBuilder = Arc<dyn Fn(&Dunkl) -> Result<Expr, VerifyError> + Send + Sync>;

const HEIS: &str = "Heisenberg algebra: [x_i, x_j] = [p_i, p_j] = 0, [x_i, p_j] = i hbar delta_ij";
const REFL: &str = "reflections: commuting involutions, [x_i, R_j] = 2 delta_ij x_i R_j, [p_i, R_j] = 2 delta_ij p_i R_j";
const DUNKL: &str = "Dunkl momenta pi_i = -i hbar (d_i + mu_i/x_i (1 - R_i))";
const DUNKL_REL: &str = "[pi_i, pi_j] = 0, [x_i, pi_j] = i hbar delta_ij (1 + 2 mu_j R_j), [pi_i, R_j] = 2 delta_ij pi_j R_j";
const LAPL: &str = "Dunkl Laplacian pi^2 = -hbar^2 sum (d_i^2 + 2 mu_i/x_i d_i - mu_i/x_i^2 (1 - R_i))";
const XPI: &str = "x.pi = -i hbar sum (x_i d_i + mu_i (1 - R_i))";
const ANG: &str = "Lambda_ij = L_ij + i hbar (mu_i x_j/x_i (1 - R_i) - mu_j x_i/x_j (1 - R_j))";
const SO_N: &str = "so(N) extended by reflections: [Lambda_ij, Lambda_kl] with (1 + 2 mu R) factors";
const LAM_R: &str = "[Lambda_ij, R_k] = 2 delta_ik Lambda_ij R_k + 2 delta_jk Lambda_ik R_j";
const ANTI: &str = "anticommutator form: {Lambda_ij, R_i} = {Lambda_ij, R_j} = 0, [Lambda_ij, R_k] = 0 otherwise";
const SL2: &str = "sl(2,R) realization: [J3, J+] = 2 i hbar J+, [J3, J-] = -2 i hbar J-, [J-, J+] = 4 i hbar J3";
const CAS_SEED: &str = "partial Casimir: seed C = (J+ J- + J- J+)/2 - J3^2 over the block equals the closed form";
const CAS_COMM: &str = "partial Casimirs commute with the full-N generators";
const CAS_INV: &str = "left (resp. right) partial Casimirs commute among themselves";
const CAS_SPLIT: &str = "momentum part and reflection tail of a partial Casimir are conserved separately";
const CAS_TOP: &str = "C^[N] and C_[N] coincide";
const CAS_ONE: &str = "one-site Casimir (i hbar)^2 (3/4 - mu (mu - R)) + beta + gamma R";
const LAM_SQ: &str = "squared Dunkl angular momentum written with Dunkl derivatives";
const J_EXPL: &str = "generators written with ordinary momenta";
const CAS_FLAT: &str = "beta = gamma = 0: momentum part of C^[m] is sum of Lambda_ij^2";
const APP_LG: &str = "[Lambda_ij, Gamma_k] = i hbar (delta_ik (1 + 2 mu_i R_i) Gamma_j - delta_jk (1 + 2 mu_j R_j) Gamma_i)";
const APP_GG: &str = "[Gamma_i, Gamma_j] = 4 i hbar kappa Lambda_ij";
const APP_GR: &str = "[Gamma_i, R_j] = 2 delta_ij Gamma_j R_j";
const APP_ANTI: &str = "anticommutator form: {Gamma_i, R_i} = 0, [Gamma_i, R_j] = 0 for i != j";
const APP_FLAT: &str = "kappa -> 0 contraction to the flat Dunkl relations";
const APP_LIE: &str = "mu -> 0 reduction to the Lie algebra relations";
const UNIV: &str = "universal left and right integrals: C^[m] (m = 2..N) and C_[m] (m = 2..N-1) commute with H";
const RANK: &str = "2N-2 functionally independent integrals {H, C^[m], C_[m]}; reflection-free classical symbols only";

fn one_based(i: usize) -> usize {
    i + 1
}

/// `Lambda_ab` for any ordered pair, zero on the diagonal.
fn lam(d: &Dunkl, a: usize, b: usize) -> Expr {
    d.lambda(a, b).unwrap_or_else(Expr::zero)
}

fn delta(a: usize, b: usize) -> bool {
    a == b
}

fn ih_n(n: i64) -> ParamScalar {
    ih().scale(&GaussRat::int(n))
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn all_mu(n: usize) -> Vec<(Param, Rat)> {
    (0..n).map(|i| (Param::Mu(i), Rat::ZERO)).collect()
}

fn params_of(set: &[(Param, Rat)]) -> Vec<Param> {
    set.iter().map(|(p, _)| *p).collect()
}

/// Ring pair for a specialization: `free` params symbolic in the source,
/// set to the given values in the target.
fn special(ctx: &Context, radial: bool, set: &[(Param, Rat)]) -> Result<(Arc<Algebra>, Arc<Algebra>), VerifyError> {
    Ok((ctx.algebra(radial, &params_of(set), &[])?, ctx.algebra(radial, &[], set)?))
}

fn from(expr: Expr, alg: &Arc<Algebra>) -> Side {
    Side::From { expr, alg: alg.clone() }
}

/// `[Lambda_ij, Lambda_kl]` right-hand side; `twist` keeps the `2 mu R` terms.
fn so_n_rhs(d: &Dunkl, i: usize, j: usize, k: usize, l: usize, twist: bool) -> Expr {
    let f = |a: usize| if twist { d.one_plus_2mu_r(a) } else { Expr::identity() };
    let mut items = Vec::new();
    if delta(i, k) {
        items.push(f(k) * lam(d, j, l));
    }
    if delta(j, l) {
        items.push(f(l) * lam(d, i, k));
    }
    if delta(i, l) {
        items.push(-(f(i) * lam(d, j, k)));
    }
    if delta(j, k) {
        items.push(-(f(j) * lam(d, i, l)));
    }
    Expr::sum(items).scale(&ih())
}

/// `[Lambda_ij, Gamma_k]` right-hand side, with `mom` standing for `Gamma`.
fn lam_gamma_rhs(d: &Dunkl, mom: &dyn Fn(usize) -> Expr, i: usize, j: usize, k: usize, twist: bool) -> Expr {
    let f = |a: usize| if twist { d.one_plus_2mu_r(a) } else { Expr::identity() };
    let mut items = Vec::new();
    if delta(i, k) {
        items.push(f(i) * mom(j));
    }
    if delta(j, k) {
        items.push(-(f(j) * mom(i)));
    }
    Expr::sum(items).scale(&ih())
}

fn lam_r_rhs(d: &Dunkl, i: usize, j: usize, k: usize) -> Expr {
    let mut items = Vec::new();
    if delta(i, k) {
        items.push((lam(d, i, j) * d.refl(k)).scale_int(2));
    }
    if delta(j, k) {
        items.push((lam(d, i, k) * d.refl(j)).scale_int(2));
    }
    Expr::sum(items)
}

/// Relations among positions, momenta, reflections, Dunkl momenta and
/// Dunkl angular momenta.
pub fn core_suite(ctx: &Context) -> Result<Suite, VerifyError> {
    let n = ctx.dims;
    let alg = ctx.algebra(false, &[], &[])?;
    let d = Dunkl::new(SiteConfig::new(n), alg.clone())?;
    let mut s = Suite::new("core", None, n);
    let mut add = |label: String, r: &str, l: Expr, rr: Expr| s.identity(Identity::new(label, r, &alg, l, rr));
    let c = Expr::commutator;
    let a = one_based;

    for (i, j) in pairs(n) {
        add(format!("[x{}, x{}] = 0", a(i), a(j)), HEIS, c(&d.x(i), &d.x(j)), Expr::zero())?;
        add(format!("[p{}, p{}] = 0", a(i), a(j)), HEIS, c(&d.p(i), &d.p(j)), Expr::zero())?;
    }
    for i in 0..n {
        for j in 0..n {
            let rhs = if delta(i, j) { Expr::identity().scale(&ih()) } else { Expr::zero() };
            add(format!("[x{}, p{}] = i hbar delta", a(i), a(j)), HEIS, c(&d.x(i), &d.p(j)), rhs)?;
        }
    }
    for (i, j) in pairs(n) {
        add(format!("[R{}, R{}] = 0", a(i), a(j)), REFL, c(&d.refl(i), &d.refl(j)), Expr::zero())?;
    }
    for i in 0..n {
        add(format!("R{}^2 = 1", a(i)), REFL, d.refl(i) * d.refl(i), Expr::identity())?;
    }
    for i in 0..n {
        for j in 0..n {
            let rx = if delta(i, j) { (d.x(i) * d.refl(j)).scale_int(2) } else { Expr::zero() };
            add(format!("[x{}, R{}] = 2 delta x R", a(i), a(j)), REFL, c(&d.x(i), &d.refl(j)), rx)?;
            let rp = if delta(i, j) { (d.p(i) * d.refl(j)).scale_int(2) } else { Expr::zero() };
            add(format!("[p{}, R{}] = 2 delta p R", a(i), a(j)), REFL, c(&d.p(i), &d.refl(j)), rp)?;
        }
    }
    for i in 0..n {
        let explicit = d.dunkl_derivative(i).scale(&ih().neg());
        add(format!("pi{} = -i hbar D{}", a(i), a(i)), DUNKL, d.pi(i), explicit)?;
    }
    for (i, j) in pairs(n) {
        add(format!("[pi{}, pi{}] = 0", a(i), a(j)), DUNKL_REL, c(&d.pi(i), &d.pi(j)), Expr::zero())?;
    }
    for i in 0..n {
        for j in 0..n {
            let rhs = if delta(i, j) { d.one_plus_2mu_r(j).scale(&ih()) } else { Expr::zero() };
            add(format!("[x{}, pi{}] = i hbar delta (1 + 2 mu R)", a(i), a(j)), DUNKL_REL, c(&d.x(i), &d.pi(j)), rhs)?;
            let rhs = if delta(i, j) { (d.pi(j) * d.refl(j)).scale_int(2) } else { Expr::zero() };
            add(format!("[pi{}, R{}] = 2 delta pi R", a(i), a(j)), DUNKL_REL, c(&d.pi(i), &d.refl(j)), rhs)?;
        }
    }
    add("pi^2 = Dunkl Laplacian".into(), LAPL, d.pi_sq(), d.laplacian_explicit())?;
    add("x.pi explicit action".into(), XPI, d.x_dot_pi(0..n), d.x_dot_pi_explicit())?;
    for (i, j) in pairs(n) {
        let def = d.x(i) * d.pi(j) - d.x(j) * d.pi(i);
        add(format!("Lambda{}{} = x{} pi{} - x{} pi{}", a(i), a(j), a(i), a(j), a(j), a(i)), ANG, lam(&d, i, j), def)?;
        add(format!("Lambda{}{} = L{}{} + reflection terms", a(i), a(j), a(i), a(j)), ANG, lam(&d, i, j), d.lambda_explicit(i, j))?;
    }
    for (i, j) in pairs(n) {
        for (k, l) in pairs(n) {
            let label = format!("[Lambda{}{}, Lambda{}{}]", a(i), a(j), a(k), a(l));
            add(label, SO_N, c(&lam(&d, i, j), &lam(&d, k, l)), so_n_rhs(&d, i, j, k, l, true))?;
        }
    }
    for (i, j) in pairs(n) {
        for k in 0..n {
            let label = format!("[Lambda{}{}, R{}]", a(i), a(j), a(k));
            add(label, LAM_R, c(&lam(&d, i, j), &d.refl(k)), lam_r_rhs(&d, i, j, k))?;
        }
    }
    let anti = Expr::anticommutator;
    for (i, j) in pairs(n) {
        add(format!("{{Lambda{}{}, R{}}} = 0", a(i), a(j), a(i)), ANTI, anti(&lam(&d, i, j), &d.refl(i)), Expr::zero())?;
        add(format!("{{Lambda{}{}, R{}}} = 0", a(i), a(j), a(j)), ANTI, anti(&lam(&d, i, j), &d.refl(j)), Expr::zero())?;
        for k in (0..n).filter(|&k| k != i && k != j) {
            let label = format!("[Lambda{}{}, R{}] = 0 (k distinct)", a(i), a(j), a(k));
            add(label, ANTI, c(&lam(&d, i, j), &d.refl(k)), Expr::zero())?;
        }
    }
    Ok(s)
}

fn block_name(r: &std::ops::Range<usize>) -> String {
    if r.len() == 1 {
        format!("site {}", r.start + 1)
    } else {
        format!("sites {}..{}", r.start + 1, r.end)
    }
}

/// The coalgebra layer: sl(2) relations on every block of contiguous sites,
/// partial Casimirs and their commutation properties.
pub fn coproduct_suite(ctx: &Context) -> Result<Suite, VerifyError> {
    let n = ctx.dims;
    let cfg = SiteConfig::new(n).with_centrifugal();
    let alg = ctx.algebra(false, &[], &[])?;
    let d = Dunkl::new(cfg, alg.clone())?;
    let mut s = Suite::new("coproduct", None, n);
    let c = Expr::commutator;

    for start in 0..n {
        for end in start + 1..=n {
            let t = d.sl2(start..end)?;
            let b = block_name(&(start..end));
            let mut add = |l: &str, lhs: Expr, rhs: Expr| s.identity(Identity::new(format!("{l} on {b}"), SL2, &alg, lhs, rhs));
            add("[J3, J+] = 2 i hbar J+", c(&t.j3, &t.j_plus), t.j_plus.scale(&ih_n(2)))?;
            add("[J3, J-] = -2 i hbar J-", c(&t.j3, &t.j_minus), t.j_minus.scale(&ih_n(-2)))?;
            add("[J-, J+] = 4 i hbar J3", c(&t.j_minus, &t.j_plus), t.j3.scale(&ih_n(4)))?;
        }
    }

    let full = d.sl2(0..n)?;
    let gens = [("J+", &full.j_plus), ("J-", &full.j_minus), ("J3", &full.j3)];
    let mut left = Vec::new();
    let mut right = Vec::new();
    for m in 1..=n {
        let seed = Dunkl::seed_casimir_expr(&d.sl2(0..m)?);
        let cm = d.left_casimir_expr(m)?;
        s.identity(Identity::new(format!("seed Casimir on sites 1..{m} = C^[{m}]"), CAS_SEED, &alg, seed, cm.full.clone()))?;
        left.push(cm);
        if m < n {
            let seed = Dunkl::seed_casimir_expr(&d.sl2(n - m..n)?);
            let cm = d.right_casimir_expr(m)?;
            let label = format!("seed Casimir on sites {}..{n} = C_[{m}]", n - m + 1);
            s.identity(Identity::new(label, CAS_SEED, &alg, seed, cm.full.clone()))?;
            right.push(cm);
        }
    }
    let named = |left_side: bool, m: usize| if left_side { format!("C^[{m}]") } else { format!("C_[{m}]") };
    for (is_left, list) in [(true, &left), (false, &right)] {
        for (idx, cm) in list.iter().enumerate().skip(1) {
            let name = named(is_left, idx + 1);
            for (g, j) in gens {
                let label = format!("[{name}, {g}] = 0");
                s.identity(Identity::new(label, CAS_COMM, &alg, c(&cm.full, j), Expr::zero()))?;
                let label = format!("[{name} momentum part, {g}] = 0");
                s.identity(Identity::new(label, CAS_SPLIT, &alg, c(&cm.momentum, j), Expr::zero()))?;
                let label = format!("[{name} reflection tail, {g}] = 0");
                s.identity(Identity::new(label, CAS_SPLIT, &alg, c(&cm.reflection, j), Expr::zero()))?;
            }
        }
    }
    let top = d.right_casimir_expr(n)?;
    for (is_left, list) in [(true, &left), (false, &right)] {
        let mut all: Vec<&crate::dunkl::CasimirExprs> = list.iter().collect();
        if !is_left {
            all.push(&top);
        }
        for a in 1..all.len() {
            for b in a + 1..all.len() {
                let label = format!("[{}, {}] = 0", named(is_left, a + 1), named(is_left, b + 1));
                s.identity(Identity::new(label, CAS_INV, &alg, c(&all[a].full, &all[b].full), Expr::zero()))?;
            }
        }
    }
    s.identity(Identity::new(format!("C^[{n}] = C_[{n}]"), CAS_TOP, &alg, left[n - 1].full.clone(), top.full.clone()))?;

    for i in 0..n {
        let seed = Dunkl::seed_casimir_expr(&d.sl2(i..i + 1)?);
        let label = format!("one-site Casimir on site {} = closed form", i + 1);
        s.identity(Identity::new(label, CAS_ONE, &alg, seed, d.site_casimir_closed(i)))?;
        let label = format!("J+ on site {} with ordinary momenta", i + 1);
        s.identity(Identity::new(label, J_EXPL, &alg, d.sl2(i..i + 1)?.j_plus, d.j_plus_site_explicit(i)))?;
    }
    s.identity(Identity::new("C^[1] = closed form", CAS_ONE, &alg, left[0].full.clone(), d.site_casimir_closed(0)))?;
    if n > 1 {
        let r1 = right[0].full.clone();
        s.identity(Identity::new("C_[1] = closed form", CAS_ONE, &alg, r1, d.site_casimir_closed(n - 1)))?;
    }
    s.identity(Identity::new(format!("J3 on sites 1..{n} with ordinary momenta"), J_EXPL, &alg, full.j3.clone(), d.j3_explicit(0..n)))?;
    if n > 1 {
        s.identity(Identity::new("Lambda^2 explicit form", LAM_SQ, &alg, d.lambda_sq_range(0..n), d.lambda_sq_explicit()))?;

        let set: Vec<(Param, Rat)> =
            (0..n).flat_map(|i| [(Param::Beta(i), Rat::ZERO), (Param::Gamma(i), Rat::ZERO)]).collect();
        let (src, tgt) = special(ctx, false, &set)?;
        let ds = Dunkl::new(cfg, src.clone())?;
        let dt = Dunkl::new(SiteConfig::new(n), tgt.clone())?;
        for m in 2..=n {
            let lhs = from(ds.left_casimir_expr(m)?.momentum, &src);
            let id = Identity {
                label: format!("beta = gamma = 0: C^[{m}] momentum part = sum Lambda^2"),
                paper_ref: CAS_FLAT.into(),
                alg: tgt.clone(),
                lhs,
                rhs: Side::Expr(dt.lambda_sq_range(0..m)),
            };
            s.identity(id)?;
        }
    }
    Ok(s)
}

/// The quadratic algebra of `Lambda_ij`, `R_i` and the curved momenta
/// `Gamma_i`, with its flat and reflection-free reductions.
pub fn appendix_suite(ctx: &Context) -> Result<Suite, VerifyError> {
    let n = ctx.dims;
    let cfg = SiteConfig::new(n).with_kappa();
    let alg = ctx.algebra(false, &[], &[])?;
    let d = Dunkl::new(cfg, alg.clone())?;
    let mut s = Suite::new("appendix", None, n);
    let c = Expr::commutator;
    let anti = Expr::anticommutator;
    let a = one_based;
    let g = |k: usize| d.gamma_k(k);
    {
        let mut add = |label: String, r: &str, l: Expr, rr: Expr| s.identity(Identity::new(label, r, &alg, l, rr));
        for (i, j) in pairs(n) {
            for (k, l) in pairs(n) {
                let label = format!("[Lambda{}{}, Lambda{}{}]", a(i), a(j), a(k), a(l));
                add(label, SO_N, c(&lam(&d, i, j), &lam(&d, k, l)), so_n_rhs(&d, i, j, k, l, true))?;
            }
            for k in 0..n {
                let label = format!("[Lambda{}{}, Gamma{}]", a(i), a(j), a(k));
                add(label, APP_LG, c(&lam(&d, i, j), &g(k)), lam_gamma_rhs(&d, &g, i, j, k, true))?;
                let label = format!("[Lambda{}{}, R{}]", a(i), a(j), a(k));
                add(label, LAM_R, c(&lam(&d, i, j), &d.refl(k)), lam_r_rhs(&d, i, j, k))?;
            }
            let rhs = lam(&d, i, j).scale(&ih_n(4).mul(&ParamScalar::symbol(Param::Kappa)));
            add(format!("[Gamma{}, Gamma{}] = 4 i hbar kappa Lambda{}{}", a(i), a(j), a(i), a(j)), APP_GG, c(&g(i), &g(j)), rhs)?;
            add(format!("[R{}, R{}] = 0", a(i), a(j)), REFL, c(&d.refl(i), &d.refl(j)), Expr::zero())?;
        }
        for i in 0..n {
            for j in 0..n {
                let rhs = if delta(i, j) { (g(j) * d.refl(j)).scale_int(2) } else { Expr::zero() };
                add(format!("[Gamma{}, R{}] = 2 delta Gamma R", a(i), a(j)), APP_GR, c(&g(i), &d.refl(j)), rhs)?;
            }
        }
        for i in 0..n {
            add(format!("{{Gamma{}, R{}}} = 0", a(i), a(i)), APP_ANTI, anti(&g(i), &d.refl(i)), Expr::zero())?;
            for j in (0..n).filter(|&j| j != i) {
                add(format!("[Gamma{}, R{}] = 0 (i != j)", a(i), a(j)), APP_ANTI, c(&g(i), &d.refl(j)), Expr::zero())?;
            }
        }
        for (i, j) in pairs(n) {
            add(format!("{{Lambda{}{}, R{}}} = 0", a(i), a(j), a(i)), ANTI, anti(&lam(&d, i, j), &d.refl(i)), Expr::zero())?;
            add(format!("{{Lambda{}{}, R{}}} = 0", a(i), a(j), a(j)), ANTI, anti(&lam(&d, i, j), &d.refl(j)), Expr::zero())?;
            for k in (0..n).filter(|&k| k != i && k != j) {
                let label = format!("[Lambda{}{}, R{}] = 0 (k distinct)", a(i), a(j), a(k));
                add(label, ANTI, c(&lam(&d, i, j), &d.refl(k)), Expr::zero())?;
            }
        }
    }

    // kappa -> 0
    let (src, tgt) = special(ctx, false, &[(Param::Kappa, Rat::ZERO)])?;
    let ds = Dunkl::new(cfg, src.clone())?;
    let dt = Dunkl::new(SiteConfig::new(n), tgt.clone())?;
    let gs = |k: usize| ds.gamma_k(k);
    let pt = |k: usize| dt.pi(k);
    let lim = |label: String, reference: &str, lhs: Expr, rhs: Expr, s: &mut Suite, src: &Arc<Algebra>, tgt: &Arc<Algebra>| {
        s.identity(Identity { label, paper_ref: reference.into(), alg: tgt.clone(), lhs: from(lhs, src), rhs: Side::Expr(rhs) })
    };
    for i in 0..n {
        lim(format!("kappa -> 0: Gamma{} = pi{}", a(i), a(i)), APP_FLAT, gs(i), pt(i), &mut s, &src, &tgt)?;
        for j in 0..n {
            let rhs = if delta(i, j) { (pt(j) * dt.refl(j)).scale_int(2) } else { Expr::zero() };
            lim(format!("kappa -> 0: [Gamma{}, R{}] = flat", a(i), a(j)), APP_FLAT, c(&gs(i), &ds.refl(j)), rhs, &mut s, &src, &tgt)?;
        }
    }
    for (i, j) in pairs(n) {
        lim(format!("kappa -> 0: [Gamma{}, Gamma{}] = 0", a(i), a(j)), APP_FLAT, c(&gs(i), &gs(j)), Expr::zero(), &mut s, &src, &tgt)?;
        for k in 0..n {
            let label = format!("kappa -> 0: [Lambda{}{}, Gamma{}] = [Lambda{}{}, pi{}]", a(i), a(j), a(k), a(i), a(j), a(k));
            let rhs = lam_gamma_rhs(&dt, &pt, i, j, k, true);
            lim(label, APP_FLAT, c(&lam(&ds, i, j), &gs(k)), rhs, &mut s, &src, &tgt)?;
        }
    }

    // mu -> 0
    let (src, tgt) = special(ctx, false, &all_mu(n))?;
    let ds = Dunkl::new(cfg, src.clone())?;
    let dt = Dunkl::new(cfg, tgt.clone())?;
    let gs = |k: usize| ds.gamma_k(k);
    let gt = |k: usize| dt.gamma_k(k);
    for (i, j) in pairs(n) {
        let label = format!("mu = 0: Lambda{}{} = L{}{}", a(i), a(j), a(i), a(j));
        lim(label, APP_LIE, lam(&ds, i, j), dt.std_l(i, j), &mut s, &src, &tgt)?;
        for (k, l) in pairs(n) {
            let label = format!("mu = 0: [Lambda{}{}, Lambda{}{}] in so(N)", a(i), a(j), a(k), a(l));
            let rhs = so_n_rhs(&dt, i, j, k, l, false);
            lim(label, APP_LIE, c(&lam(&ds, i, j), &lam(&ds, k, l)), rhs, &mut s, &src, &tgt)?;
        }
        for k in 0..n {
            let label = format!("mu = 0: [Lambda{}{}, Gamma{}] Lie form", a(i), a(j), a(k));
            let rhs = lam_gamma_rhs(&dt, &gt, i, j, k, false);
            lim(label, APP_LIE, c(&lam(&ds, i, j), &gs(k)), rhs, &mut s, &src, &tgt)?;
        }
        let rhs = lam(&dt, i, j).scale(&ih_n(4).mul(&ParamScalar::symbol(Param::Kappa)));
        let label = format!("mu = 0: [Gamma{}, Gamma{}] = 4 i hbar kappa L{}{}", a(i), a(j), a(i), a(j));
        lim(label, APP_LIE, c(&gs(i), &gs(j)), rhs, &mut s, &src, &tgt)?;
    }
    Ok(s)
}

fn push_universal(s: &mut Suite, d: &Dunkl, alg: &Arc<Algebra>, h: &Expr) -> Result<(), VerifyError> {
    for (label, cm) in universal_integrals(d)? {
        let id = Identity::new(format!("[H, {label}] = 0"), UNIV, alg, Expr::commutator(h, &cm.momentum), Expr::zero());
        s.identity(id)?;
        let id = Identity::new(
            format!("[H, {label} reflection tail] = 0"),
            UNIV,
            alg,
            Expr::commutator(h, &cm.reflection),
            Expr::zero(),
        );
        s.identity(id)?;
    }
    Ok(())
}

/// Universal integrals against an arbitrary Hamiltonian.
pub fn universal_suite(name: &str, cfg: SiteConfig, build: &HamiltonianBuilder, ctx: &Context) -> Result<Suite, VerifyError> {
    let alg = ctx.algebra(cfg.radial, &[], &[])?;
    let d = Dunkl::new(cfg, alg.clone())?;
    let h = build(&d)?;
    let mut s = Suite::new("universal", Some(name.into()), ctx.dims);
    push_universal(&mut s, &d, &alg, &h)?;
    Ok(s)
}

fn spec_for(kind: ModelKind, ctx: &Context) -> Result<ModelSpec, VerifyError> {
    Ok(ModelSpec::new(kind, ctx.dims)?)
}

/// Label of the flat-limit integral matching `label`, with its factor.
fn flat_label(kind: ModelKind, label: &str) -> (String, GaussRat) {
    match kind {
        ModelKind::Higgs => {
            let i = &label[2..];
            (format!("F_{i}{i}"), GaussRat::frac(1, 2))
        }
        ModelKind::CurvedSW => (format!("F_{}", &label[2..]), GaussRat::frac(1, 2)),
        _ => (label.to_string(), GaussRat::ONE),
    }
}

fn qgen_base(kind: ModelKind) -> Option<ModelKind> {
    match kind {
        ModelKind::QGenKC => Some(ModelKind::KC),
        ModelKind::QGenCurvedKC => Some(ModelKind::CurvedKC),
        ModelKind::QGenTaubNUT => Some(ModelKind::TaubNUT),
        _ => None,
    }
}

/// Universal and model-specific integrals against `H`, the structural
/// identities of the model and its specialization chains.
pub fn model_suite(kind: ModelKind, ctx: &Context) -> Result<Suite, VerifyError> {
    let spec = spec_for(kind, ctx)?;
    let radial = spec.config.radial;
    let n = ctx.dims;
    let alg = ctx.algebra(radial, &[], &[])?;
    let m = Model::with_algebra(spec, alg.clone())?;
    let h = &m.hamiltonian;
    let mut s = Suite::new("model", Some(kind.name().into()), n);

    push_universal(&mut s, &m.dunkl, &alg, h)?;
    let extra_ref = format!("model integrals: {}", extra_ref(kind));
    for (label, e) in m.extra_integrals()? {
        s.identity(Identity::new(format!("[H, {label}] = 0"), extra_ref.clone(), &alg, Expr::commutator(h, &e), Expr::zero()))?;
    }
    for id in m.identities()? {
        s.identity(Identity::new(id.label, id.reference, &alg, id.lhs, id.rhs))?;
    }

    if let (Some(flat), Some(eps)) = (kind.flat_limit(), kind.deformation()) {
        let (src, tgt) = special(ctx, radial, &[(eps, Rat::ZERO)])?;
        let ms = Model::with_algebra(spec, src.clone())?;
        let mt = Model::with_algebra(spec_for(flat, ctx)?, tgt.clone())?;
        let reference = format!("{} -> 0 recovers the {} model", eps.name(), flat.name());
        let mut chain = |label: String, lhs: Expr, rhs: Expr| {
            s.identity(Identity { label, paper_ref: reference.clone(), alg: tgt.clone(), lhs: from(lhs, &src), rhs: Side::Expr(rhs) })
        };
        chain(format!("{} -> 0: H = H of {}", eps.name(), flat.name()), ms.hamiltonian.clone(), mt.hamiltonian.clone())?;
        let flat_extras = mt.extra_integrals()?;
        for (label, e) in ms.extra_integrals()? {
            let (fl, factor) = flat_label(kind, &label);
            if let Some((_, fe)) = flat_extras.iter().find(|(l, _)| *l == fl) {
                let times = if factor.is_one() { String::new() } else { format!("{factor} ") };
                chain(format!("{} -> 0: {label} = {times}{fl} of {}", eps.name(), flat.name()), e, fe.scale_c(factor))?;
            }
        }
    }

    let set: Vec<(Param, Rat)> = (0..n).flat_map(|i| [(Param::Mu(i), Rat::ZERO), (Param::Gamma(i), Rat::ZERO)]).collect();
    let (src, tgt) = special(ctx, radial, &set)?;
    let ms = Model::with_algebra(spec, src.clone())?;
    let mut ops = vec![("H".to_string(), ms.hamiltonian.clone())];
    ops.extend(ms.extra_integrals()?);
    for (label, e) in ops {
        s.identity(Identity {
            label: format!("mu = gamma = 0: {label} has no reflection terms"),
            paper_ref: "reflection terms enter only through mu and gamma".into(),
            alg: tgt.clone(),
            lhs: Side::ReflectionPart(Box::new(from(e, &src))),
            rhs: Side::Expr(Expr::zero()),
        })?;
    }

    if let Some(base) = qgen_base(kind) {
        let set: Vec<(Param, Rat)> = (0..n).flat_map(|i| [(Param::Beta(i), Rat::ZERO), (Param::Gamma(i), Rat::ZERO)]).collect();
        let (src, tgt) = special(ctx, radial, &set)?;
        let ms = Model::with_algebra(spec, src.clone())?;
        let mt = Model::with_algebra(spec_for(base, ctx)?, tgt.clone())?;
        let target = mt.extra_integrals()?;
        let reference = format!("beta = gamma = 0 recovers the N-th component of the {} integral", base.name());
        for (label, e) in ms.extra_integrals()? {
            if let Some((_, te)) = target.iter().find(|(l, _)| *l == label) {
                s.identity(Identity {
                    label: format!("beta = gamma = 0: {label} = {label} of {}", base.name()),
                    paper_ref: reference.clone(),
                    alg: tgt.clone(),
                    lhs: from(e, &src),
                    rhs: Side::Expr(te.clone()),
                })?;
            }
        }
    }
    Ok(s)
}

fn extra_ref(kind: ModelKind) -> &'static str {
    crate::models::catalog()
        .into_iter()
        .find(|i| i.name == kind.name())
        .map(|i| i.integrals)
        .unwrap_or("")
}

/// Jacobian rank of `{H, C^[m], C_[m]}` at `mu = gamma = 0`, at five random
/// points, plus a duplicate-function control at each.
pub fn independence_suite(kind: ModelKind, ctx: &Context) -> Result<Suite, VerifyError> {
    let spec = spec_for(kind, ctx)?;
    let n = ctx.dims;
    let set: Vec<(Param, Rat)> = (0..n).flat_map(|i| [(Param::Mu(i), Rat::ZERO), (Param::Gamma(i), Rat::ZERO)]).collect();
    let numeric = ctx.with_mode(super::Mode::Sampled);
    let alg = numeric.algebra(spec.config.radial, &[Param::Hbar], &set)?;
    let m = Model::with_algebra(spec, alg.clone())?;
    let mut functions = vec![m.hamiltonian.clone()];
    let mut names = vec!["H".to_string()];
    for (label, c) in m.universal_integrals()? {
        functions.push(c.momentum);
        names.push(label);
    }
    let expected = functions.len();
    let mut s = Suite::new("independence", Some(kind.name().into()), n);
    let set_name = names.join(", ");
    for k in 0..5u64 {
        s.push(Check::Rank(RankCheck {
            label: format!("rank {{{set_name}}} = {expected} at point {}", k + 1),
            paper_ref: RANK.into(),
            alg: alg.clone(),
            functions: functions.clone(),
            expected,
            seed: ctx.seed,
            stream: k,
        }))?;
        if expected >= 2 {
            let mut dup = functions.clone();
            *dup.last_mut().expect("nonempty") = functions[0].clone();
            s.push(Check::Rank(RankCheck {
                label: format!("duplicate control: last function replaced by H, rank = {} at point {}", expected - 1, k + 1),
                paper_ref: RANK.into(),
                alg: alg.clone(),
                functions: dup,
                expected: expected - 1,
                seed: ctx.seed,
                stream: k,
            }))?;
        }
    }
    Ok(s)
}
