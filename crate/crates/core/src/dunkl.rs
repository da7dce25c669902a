//! Named operators over Z2^N: Dunkl momenta, angular momenta, curved
//! momenta, the sl(2,R) realization over a block of sites and the seed and
//! partial Casimirs built from it.
//!
//! Axes are 0-based here. A block of sites is a half-open range of axes.

use std::ops::Range;
use std::sync::Arc;

use crate::opalg::{Algebra, Expr, NormalOp, OpError};
use crate::ring::{Atom, FieldElem, GaussRat, Param, ParamScalar, Ring, RingError, MAX_DIMS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DunklError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("angular momentum needs two distinct axes, got {0} twice")]
    SameAxes(usize),
    #[error("axis {axis} out of range for N = {dims}")]
    Axis { axis: usize, dims: usize },
    #[error("the squared angular momentum needs N >= 2")]
    NeedsTwoDims,
    #[error("site block {start}..{end} is empty or exceeds N = {dims}")]
    Sites { start: usize, end: usize, dims: usize },
    #[error("Casimir index m = {m} outside 1..={dims}")]
    CasimirIndex { m: usize, dims: usize },
    #[error("site configuration (N = {0}, radial = {1}) does not match the ring")]
    RingMismatch(usize, bool),
}

impl From<RingError> for DunklError {
    fn from(e: RingError) -> Self {
        DunklError::Op(OpError::Ring(e))
    }
}

/// Which parameters enter the realization. A disabled flag means the
/// parameter is treated as zero and never appears in a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteConfig {
    pub dims: usize,
    pub radial: bool,
    pub beta: [bool; MAX_DIMS],
    pub gamma: [bool; MAX_DIMS],
    pub kappa: bool,
    pub lambda: bool,
    pub eta: bool,
}

impl SiteConfig {
    /// Plain Dunkl realization: no centrifugal terms, no deformations.
    pub fn new(dims: usize) -> SiteConfig {
        SiteConfig {
            dims,
            radial: false,
            beta: [false; MAX_DIMS],
            gamma: [false; MAX_DIMS],
            kappa: false,
            lambda: false,
            eta: false,
        }
    }

    pub fn with_centrifugal(mut self) -> SiteConfig {
        for i in 0..self.dims.min(MAX_DIMS) {
            self.beta[i] = true;
            self.gamma[i] = true;
        }
        self
    }

    pub fn with_radial(mut self) -> SiteConfig {
        self.radial = true;
        self
    }

    pub fn with_kappa(mut self) -> SiteConfig {
        self.kappa = true;
        self
    }

    /// Ring with every parameter symbolic.
    pub fn ring(&self) -> Result<Ring, RingError> {
        Ring::new(self.dims, self.radial)
    }
}

/// Generators of one realization, as canonical operators.
#[derive(Debug, Clone)]
pub struct Sl2Triple {
    pub j_plus: NormalOp,
    pub j_minus: NormalOp,
    pub j3: NormalOp,
}

/// Generators of one realization, as expressions.
#[derive(Clone)]
pub struct Sl2Exprs {
    pub j_plus: Expr,
    pub j_minus: Expr,
    pub j3: Expr,
}

/// A partial Casimir split as `full = momentum + hbar^2 * reflection`.
#[derive(Clone)]
pub struct CasimirExprs {
    pub momentum: Expr,
    pub reflection: Expr,
    pub full: Expr,
}

#[derive(Debug, Clone)]
pub struct Casimir {
    pub momentum: NormalOp,
    pub reflection: NormalOp,
    pub full: NormalOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicKind {
    Position,
    Momentum,
    Reflection,
}

/// `i * hbar`.
pub fn ih() -> ParamScalar {
    ParamScalar::imag_unit().mul(&ParamScalar::symbol(Param::Hbar))
}

pub fn hbar_sq() -> ParamScalar {
    ParamScalar::symbol(Param::Hbar).pow(2)
}

/// Operator builder bound to one ring. Frequently reused operators are
/// normalized once and kept as canonical leaves so that larger expressions
/// share them.
pub struct Dunkl {
    cfg: SiteConfig,
    alg: Arc<Algebra>,
    x: Vec<Expr>,
    pi: Vec<Expr>,
    lambda: Vec<Vec<Option<Expr>>>,
    gamma: Vec<Expr>,
}

impl Dunkl {
    pub fn symbolic(cfg: SiteConfig) -> Result<Dunkl, DunklError> {
        Dunkl::new(cfg, Arc::new(Algebra::new(cfg.ring()?)))
    }

    pub fn new(cfg: SiteConfig, alg: Arc<Algebra>) -> Result<Dunkl, DunklError> {
        let ring = alg.ring().clone();
        if ring.dims() != cfg.dims || ring.radial() != cfg.radial {
            return Err(DunklError::RingMismatch(cfg.dims, cfg.radial));
        }
        let n = cfg.dims;
        let mut d = Dunkl { cfg, alg, x: Vec::new(), pi: Vec::new(), lambda: Vec::new(), gamma: Vec::new() };
        d.x = (0..n).map(|i| Expr::mul_by(ring.x_pow(i, 1))).collect();
        for i in 0..n {
            let raw = d.dunkl_derivative(i).scale(&ih().neg());
            d.pi.push(d.leaf(&raw)?);
        }
        let mut lambda = vec![vec![None; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let l = d.leaf(&(&d.x[i] * &d.pi[j] - &d.x[j] * &d.pi[i]))?;
                lambda[j][i] = Some(-&l);
                lambda[i][j] = Some(l);
            }
        }
        d.lambda = lambda;
        for i in 0..n {
            let g = d.curved_raw(i);
            let g = if cfg.kappa { d.leaf(&g)? } else { g };
            d.gamma.push(g);
        }
        Ok(d)
    }

    fn leaf(&self, e: &Expr) -> Result<Expr, DunklError> {
        Ok(Expr::normal((*self.alg.normalize(e)?).clone()))
    }

    pub fn config(&self) -> &SiteConfig {
        &self.cfg
    }

    pub fn ring(&self) -> &Ring {
        self.alg.ring()
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn dims(&self) -> usize {
        self.cfg.dims
    }

    pub fn normalize(&self, e: &Expr) -> Result<NormalOp, DunklError> {
        Ok((*self.alg.normalize(e)?).clone())
    }

    fn check_axis(&self, i: usize) -> Result<(), DunklError> {
        if i < self.cfg.dims {
            Ok(())
        } else {
            Err(DunklError::Axis { axis: i, dims: self.cfg.dims })
        }
    }

    fn check_sites(&self, s: &Range<usize>) -> Result<(), DunklError> {
        if s.start >= s.end || s.end > self.cfg.dims {
            return Err(DunklError::Sites { start: s.start, end: s.end, dims: self.cfg.dims });
        }
        Ok(())
    }

    // ---- coefficient helpers ----

    pub fn coeff(&self, f: FieldElem) -> Expr {
        Expr::mul_by(f)
    }

    /// Multiplication by `x_i^e`.
    pub fn x_pow(&self, i: usize, e: i8) -> Expr {
        Expr::mul_by(self.ring().x_pow(i, e))
    }

    /// Multiplication by `x_i^a x_j^b`.
    pub fn x_ratio(&self, i: usize, a: i8, j: usize, b: i8) -> Expr {
        let ring = self.ring();
        Expr::mul_by(ring.mul_raw(&ring.x_pow(i, a), &ring.x_pow(j, b)))
    }

    pub fn param(&self, p: Param) -> Expr {
        Expr::mul_by(self.ring().param(p))
    }

    /// Multiplication by `S = x^2`.
    pub fn x_sq(&self) -> Expr {
        Expr::mul_by(self.ring().from_poly(self.ring().s_poly()))
    }

    pub fn atom(&self, a: Atom) -> Expr {
        Expr::mul_by(self.ring().atom(a))
    }

    pub fn atom_inv(&self, a: Atom, m: u8) -> Expr {
        Expr::mul_by(self.ring().atom_inv(a, m))
    }

    /// Multiplication by `|x|`.
    pub fn radius(&self) -> Result<Expr, DunklError> {
        Ok(Expr::mul_by(self.ring().r()?))
    }

    pub fn constant(&self, c: GaussRat) -> Expr {
        Expr::identity().scale_c(c)
    }

    // ---- atomic operators ----

    pub fn x(&self, i: usize) -> Expr {
        self.x[i].clone()
    }

    /// `p_i = -i hbar d_i`.
    pub fn p(&self, i: usize) -> Expr {
        Expr::del(i).scale(&ih().neg())
    }

    pub fn refl(&self, i: usize) -> Expr {
        Expr::refl(i)
    }

    /// `D_i = d_i + mu_i/x_i (1 - R_i)`, built from the atoms.
    pub fn dunkl_derivative(&self, i: usize) -> Expr {
        let ring = self.ring();
        let mu = Expr::mul_by(ring.mul_raw(&ring.param(Param::Mu(i)), &ring.x_pow(i, -1)));
        Expr::del(i) + mu * (Expr::identity() - Expr::refl(i))
    }

    /// Dunkl momentum `pi_i = -i hbar D_i` (a shared canonical leaf).
    pub fn pi(&self, i: usize) -> Expr {
        self.pi[i].clone()
    }

    /// `Lambda_ij = x_i pi_j - x_j pi_i`; `None` when `i == j`.
    pub fn lambda(&self, i: usize, j: usize) -> Option<Expr> {
        self.lambda.get(i)?.get(j)?.clone()
    }

    fn lam(&self, i: usize, j: usize) -> Expr {
        self.lambda[i][j].clone().expect("distinct axes")
    }

    /// `L_ij = x_i p_j - x_j p_i`.
    pub fn std_l(&self, i: usize, j: usize) -> Expr {
        &self.x[i] * self.p(j) - &self.x[j] * self.p(i)
    }

    /// `sum mu_i R_i` over a block.
    pub fn mu_r(&self, sites: Range<usize>) -> Expr {
        Expr::sum(sites.map(|i| self.param(Param::Mu(i)) * Expr::refl(i)))
    }

    /// `(1 + 2 mu_i R_i)`.
    pub fn one_plus_2mu_r(&self, i: usize) -> Expr {
        Expr::identity() + (self.param(Param::Mu(i)) * Expr::refl(i)).scale_int(2)
    }

    pub fn x_dot_pi(&self, sites: Range<usize>) -> Expr {
        Expr::sum(sites.map(|i| &self.x[i] * &self.pi[i]))
    }

    pub fn pi_sq(&self) -> Expr {
        Expr::sum((0..self.dims()).map(|i| &self.pi[i] * &self.pi[i]))
    }

    /// `sum_{i<j in block} Lambda_ij^2`.
    pub fn lambda_sq_range(&self, sites: Range<usize>) -> Expr {
        let mut items = Vec::new();
        for i in sites.clone() {
            for j in i + 1..sites.end {
                let l = self.lam(i, j);
                items.push(&l * &l);
            }
        }
        Expr::sum(items)
    }

    /// `beta_i + gamma_i R_i`, or `None` when both are switched off.
    pub fn centrifugal_coeff(&self, i: usize) -> Option<Expr> {
        let mut items = Vec::new();
        if self.cfg.beta[i] {
            items.push(self.param(Param::Beta(i)));
        }
        if self.cfg.gamma[i] {
            items.push(self.param(Param::Gamma(i)) * Expr::refl(i));
        }
        match items.len() {
            0 => None,
            1 => items.pop(),
            _ => Some(Expr::sum(items)),
        }
    }

    /// `sum (beta_i + gamma_i R_i) / x_i^2` over a block.
    pub fn centrifugal(&self, sites: Range<usize>) -> Expr {
        Expr::sum(sites.filter_map(|i| Some(self.x_pow(i, -2) * self.centrifugal_coeff(i)?)))
    }

    fn curved_raw(&self, i: usize) -> Expr {
        if !self.cfg.kappa {
            return self.pi[i].clone();
        }
        let ring = self.ring();
        let kappa = ring.param(Param::Kappa);
        let n = self.dims();
        let inner = self.x_dot_pi(0..n) - self.mu_r(0..n).scale(&ih());
        self.atom(Atom::KMinus) * &self.pi[i]
            + Expr::mul_by(ring.mul_raw(&kappa, &ring.x_pow(i, 1))).scale_int(2) * inner
    }

    /// Curved momentum `(1 - kappa S) pi_i + 2 kappa x_i (x.pi - i hbar sum mu_j R_j)`;
    /// equal to `pi_i` when kappa is switched off.
    pub fn gamma_k(&self, i: usize) -> Expr {
        self.gamma[i].clone()
    }

    /// Generators over a block of sites.
    pub fn sl2(&self, sites: Range<usize>) -> Result<Sl2Exprs, DunklError> {
        self.check_sites(&sites)?;
        let m = sites.len() as i64;
        let pi_sq = Expr::sum(sites.clone().map(|i| &self.pi[i] * &self.pi[i]));
        let j_plus = pi_sq + self.centrifugal(sites.clone());
        let ring = self.ring();
        let mut s = ring.zero();
        for i in sites.clone() {
            s = ring.add_raw(&s, &ring.x_pow(i, 2));
        }
        let j_minus = Expr::mul_by(s);
        let shift = self.constant(GaussRat::frac(m, 2)) + self.mu_r(sites.clone());
        let j3 = self.x_dot_pi(sites) - shift.scale(&ih());
        Ok(Sl2Exprs { j_plus, j_minus, j3 })
    }

    pub fn seed_casimir_expr(t: &Sl2Exprs) -> Expr {
        let sym = (&t.j_plus * &t.j_minus + &t.j_minus * &t.j_plus).scale_c(GaussRat::frac(1, 2));
        sym - &t.j3 * &t.j3
    }

    /// Closed form of the partial Casimir of a block, split into the part
    /// carrying momenta and the reflection-only tail.
    pub fn casimir_block(&self, sites: Range<usize>) -> Result<CasimirExprs, DunklError> {
        self.check_sites(&sites)?;
        let mut mom = Vec::new();
        for i in sites.clone() {
            for j in i + 1..sites.end {
                let l = self.lam(i, j);
                mom.push(&l * &l);
                if let Some(c) = self.centrifugal_coeff(i) {
                    mom.push(self.x_ratio(j, 2, i, -2) * c);
                }
                if let Some(c) = self.centrifugal_coeff(j) {
                    mom.push(self.x_ratio(i, 2, j, -2) * c);
                }
            }
        }
        for i in sites.clone() {
            if let Some(c) = self.centrifugal_coeff(i) {
                mom.push(c);
            }
        }
        let momentum = Expr::sum(mom);
        let m = sites.len() as i64;
        let mut refl = vec![self.constant(GaussRat::frac(m * (m - 4), 4))];
        for i in sites.clone() {
            let mu = self.param(Param::Mu(i));
            let inner = &mu + Expr::refl(i).scale_int(m - 2);
            refl.push(mu * inner);
            for j in i + 1..sites.end {
                let mumu = self.param(Param::Mu(i)) * self.param(Param::Mu(j));
                refl.push((mumu * Expr::refl(i) * Expr::refl(j)).scale_int(2));
            }
        }
        let reflection = Expr::sum(refl);
        let full = &momentum + reflection.scale(&hbar_sq());
        Ok(CasimirExprs { momentum, reflection, full })
    }

    fn casimir_range(&self, m: usize, left: bool) -> Result<Range<usize>, DunklError> {
        let n = self.dims();
        if m == 0 || m > n {
            return Err(DunklError::CasimirIndex { m, dims: n });
        }
        Ok(if left { 0..m } else { n - m..n })
    }

    /// `C^[m]`, over sites `1..m`.
    pub fn left_casimir_expr(&self, m: usize) -> Result<CasimirExprs, DunklError> {
        self.casimir_block(self.casimir_range(m, true)?)
    }

    /// `C_[m]`, over sites `N-m+1..N`.
    pub fn right_casimir_expr(&self, m: usize) -> Result<CasimirExprs, DunklError> {
        self.casimir_block(self.casimir_range(m, false)?)
    }

    // ---- expanded forms written directly in d, R and coefficients ----

    /// `-hbar^2 sum (d_i^2 + 2 mu_i/x_i d_i - mu_i/x_i^2 (1 - R_i))`.
    pub fn laplacian_explicit(&self) -> Expr {
        let ring = self.ring();
        let mut items = Vec::new();
        for i in 0..self.dims() {
            let mu = ring.param(Param::Mu(i));
            items.push(Expr::del(i) * Expr::del(i));
            items.push((Expr::mul_by(ring.mul_raw(&mu, &ring.x_pow(i, -1))) * Expr::del(i)).scale_int(2));
            items.push(-(Expr::mul_by(ring.mul_raw(&mu, &ring.x_pow(i, -2))) * (Expr::identity() - Expr::refl(i))));
        }
        Expr::sum(items).scale(&hbar_sq().neg())
    }

    /// `-i hbar sum (x_i d_i + mu_i (1 - R_i))`.
    pub fn x_dot_pi_explicit(&self) -> Expr {
        let items = (0..self.dims()).map(|i| {
            &self.x[i] * Expr::del(i) + self.param(Param::Mu(i)) * (Expr::identity() - Expr::refl(i))
        });
        Expr::sum(items).scale(&ih().neg())
    }

    /// `L_ij + i hbar (mu_i x_j/x_i (1 - R_i) - mu_j x_i/x_j (1 - R_j))`.
    pub fn lambda_explicit(&self, i: usize, j: usize) -> Expr {
        let ring = self.ring();
        let a = ring.mul_raw(&ring.param(Param::Mu(i)), &ring.mul_raw(&ring.x_pow(j, 1), &ring.x_pow(i, -1)));
        let b = ring.mul_raw(&ring.param(Param::Mu(j)), &ring.mul_raw(&ring.x_pow(i, 1), &ring.x_pow(j, -1)));
        let corr = Expr::mul_by(a) * (Expr::identity() - Expr::refl(i)) - Expr::mul_by(b) * (Expr::identity() - Expr::refl(j));
        self.std_l(i, j) + corr.scale(&ih())
    }

    /// `hbar^2 (-S sum D_i^2 + (x.D)^2 + (x.D)((N - 2) + 2 sum mu_i R_i))`.
    pub fn lambda_sq_explicit(&self) -> Expr {
        let n = self.dims();
        let d: Vec<Expr> = (0..n).map(|i| self.dunkl_derivative(i)).collect();
        let lap = Expr::sum(d.iter().map(|di| di * di));
        let xd = Expr::sum((0..n).map(|i| &self.x[i] * &d[i]));
        let shift = self.constant(GaussRat::int(n as i64 - 2)) + self.mu_r(0..n).scale_int(2);
        let body = -(self.x_sq() * lap) + &xd * &xd + &xd * shift;
        body.scale(&hbar_sq())
    }

    /// `J_3` over a block written with ordinary momenta:
    /// `x.p - i hbar (m/2 + sum mu_i)`.
    pub fn j3_explicit(&self, sites: Range<usize>) -> Expr {
        let m = sites.len() as i64;
        let xp = Expr::sum(sites.clone().map(|i| &self.x[i] * self.p(i)));
        let shift = self.constant(GaussRat::frac(m, 2)) + Expr::sum(sites.map(|i| self.param(Param::Mu(i))));
        xp - shift.scale(&ih())
    }

    /// One-site `J_+` with ordinary momenta:
    /// `p^2 - 2 i hbar mu/x p + x^-2 ((beta + hbar^2 mu) + (gamma - hbar^2 mu) R)`.
    pub fn j_plus_site_explicit(&self, i: usize) -> Expr {
        let ring = self.ring();
        let p = self.p(i);
        let mu = ring.param(Param::Mu(i));
        let h2mu = ring.mul_raw(&ring.scalar(&hbar_sq()), &mu);
        let mut a = h2mu.clone();
        if self.cfg.beta[i] {
            a = ring.add_raw(&a, &ring.param(Param::Beta(i)));
        }
        let mut b = ring.neg(&h2mu);
        if self.cfg.gamma[i] {
            b = ring.add_raw(&b, &ring.param(Param::Gamma(i)));
        }
        let drift = (Expr::mul_by(ring.mul_raw(&mu, &ring.x_pow(i, -1))) * &p).scale(&ih().scale(&GaussRat::int(-2)));
        let pot = self.x_pow(i, -2) * (Expr::mul_by(a) + Expr::mul_by(b) * Expr::refl(i));
        &p * &p + drift + pot
    }

    /// One-site Casimir value `(i hbar)^2 (3/4 - mu (mu - R)) + beta + gamma R`.
    pub fn site_casimir_closed(&self, i: usize) -> Expr {
        let mu = self.param(Param::Mu(i));
        let inner = self.constant(GaussRat::frac(3, 4)) - &mu * (&mu - Expr::refl(i));
        let mut out = inner.scale(&hbar_sq().neg());
        if let Some(c) = self.centrifugal_coeff(i) {
            out = out + c;
        }
        out
    }

    // ---- canonical forms of the named operators ----

    pub fn atomic_operator(&self, kind: AtomicKind, i: usize) -> Result<NormalOp, DunklError> {
        self.check_axis(i)?;
        let e = match kind {
            AtomicKind::Position => self.x(i),
            AtomicKind::Momentum => self.p(i),
            AtomicKind::Reflection => self.refl(i),
        };
        self.normalize(&e)
    }

    pub fn dunkl_momentum(&self, i: usize) -> Result<NormalOp, DunklError> {
        self.check_axis(i)?;
        self.normalize(&self.pi(i))
    }

    pub fn ang_momentum(&self, i: usize, j: usize) -> Result<NormalOp, DunklError> {
        self.check_axis(i)?;
        self.check_axis(j)?;
        if i == j {
            return Err(DunklError::SameAxes(i));
        }
        self.normalize(&self.lam(i, j))
    }

    pub fn total_lambda_sq(&self) -> Result<NormalOp, DunklError> {
        if self.dims() < 2 {
            return Err(DunklError::NeedsTwoDims);
        }
        self.normalize(&self.lambda_sq_range(0..self.dims()))
    }

    pub fn curved_momentum(&self, i: usize) -> Result<NormalOp, DunklError> {
        self.check_axis(i)?;
        self.normalize(&self.gamma_k(i))
    }

    pub fn sl2_realization(&self, sites: Range<usize>) -> Result<Sl2Triple, DunklError> {
        let t = self.sl2(sites)?;
        Ok(Sl2Triple {
            j_plus: self.normalize(&t.j_plus)?,
            j_minus: self.normalize(&t.j_minus)?,
            j3: self.normalize(&t.j3)?,
        })
    }

    pub fn seed_casimir(t: &Sl2Triple) -> Result<NormalOp, DunklError> {
        let sym = t.j_plus.mul(&t.j_minus)?.add(&t.j_minus.mul(&t.j_plus)?)?;
        Ok(sym.scale(&GaussRat::frac(1, 2)).sub(&t.j3.mul(&t.j3)?)?)
    }

    fn casimir_normal(&self, c: CasimirExprs) -> Result<Casimir, DunklError> {
        Ok(Casimir {
            momentum: self.normalize(&c.momentum)?,
            reflection: self.normalize(&c.reflection)?,
            full: self.normalize(&c.full)?,
        })
    }

    pub fn left_casimir(&self, m: usize) -> Result<Casimir, DunklError> {
        let c = self.left_casimir_expr(m)?;
        self.casimir_normal(c)
    }

    pub fn right_casimir(&self, m: usize) -> Result<Casimir, DunklError> {
        let c = self.right_casimir_expr(m)?;
        self.casimir_normal(c)
    }
}
