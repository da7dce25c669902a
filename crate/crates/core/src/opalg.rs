//! Noncommutative operators built from multiplication by ring elements,
//! partial derivatives and reflections, and their canonical form
//! `sum c(x) R^eps d^beta` (coefficient left, reflections middle,
//! derivatives right).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use crate::ring::{den_add, DenExp, FieldElem, GaussRat, Key, ParamScalar, Poly, Ring, RingError, MAX_DIMS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("term budget exceeded: a product needs {needed} coefficient terms, budget is {budget}")]
    Budget { needed: usize, budget: usize },
}

/// Reflection mask and derivative multi-index of one canonical term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OpKey {
    pub mask: u8,
    pub deriv: [u8; MAX_DIMS],
}

impl OpKey {
    pub const IDENTITY: OpKey = OpKey { mask: 0, deriv: [0; MAX_DIMS] };

    pub fn order(&self) -> u32 {
        self.deriv.iter().map(|&d| d as u32).sum()
    }

    pub fn eps(&self, dims: usize) -> Vec<u8> {
        (0..dims).map(|i| (self.mask >> i) & 1).collect()
    }

    pub fn render(&self, dims: usize) -> String {
        let mut parts = Vec::new();
        for i in 0..dims {
            if self.mask >> i & 1 == 1 {
                parts.push(format!("R{}", i + 1));
            }
        }
        for i in 0..dims {
            match self.deriv[i] {
                0 => {}
                1 => parts.push(format!("d{}", i + 1)),
                e => parts.push(format!("d{}^{}", i + 1, e)),
            }
        }
        parts.join("*")
    }
}

/// Canonical operator: a sorted map from [`OpKey`] to nonzero coefficients.
#[derive(Clone)]
pub struct NormalOp {
    ring: Ring,
    terms: Vec<(OpKey, FieldElem)>,
}

/// Position of the smallest nonzero term, used to report failures.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Witness {
    pub eps: Vec<u8>,
    pub beta: Vec<u8>,
    pub monomial: String,
    pub coefficient: String,
    pub operator_terms: usize,
}

fn binom(n: u8, k: u8) -> i64 {
    let mut acc: i64 = 1;
    for j in 0..k as i64 {
        acc = acc * (n as i64 - j) / (j + 1);
    }
    acc
}

impl NormalOp {
    pub fn zero(ring: &Ring) -> NormalOp {
        NormalOp { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn identity(ring: &Ring) -> NormalOp {
        NormalOp::coeff(ring, ring.one())
    }

    /// Multiplication by `f`.
    pub fn coeff(ring: &Ring, f: FieldElem) -> NormalOp {
        NormalOp::single(ring, OpKey::IDENTITY, f)
    }

    fn single(ring: &Ring, key: OpKey, f: FieldElem) -> NormalOp {
        let terms = if f.is_zero() { Vec::new() } else { vec![(key, f)] };
        NormalOp { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &[(OpKey, FieldElem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of numerator terms over all coefficients.
    pub fn size(&self) -> usize {
        self.terms.iter().map(|(_, f)| f.num_len()).sum()
    }

    pub fn coefficient(&self, key: &OpKey) -> Option<&FieldElem> {
        self.terms.binary_search_by(|(k, _)| k.cmp(key)).ok().map(|i| &self.terms[i].1)
    }

    fn check_ring(&self, other: &NormalOp) -> Result<(), OpError> {
        if self.ring.dims() != other.ring.dims() {
            return Err(RingError::DimensionMismatch(self.ring.dims(), other.ring.dims()).into());
        }
        if self.ring != other.ring {
            return Err(RingError::ConfigMismatch.into());
        }
        Ok(())
    }

    /// Sums many operators; coefficients sharing a key are brought over a
    /// common denominator once.
    pub fn sum(ring: &Ring, ops: &[&NormalOp]) -> Result<NormalOp, OpError> {
        for op in ops {
            if op.ring != *ring {
                return Err(RingError::ConfigMismatch.into());
            }
        }
        let mut buckets: HashMap<(OpKey, DenExp), Vec<(Key, GaussRat)>> = HashMap::new();
        for op in ops {
            for (k, f) in &op.terms {
                buckets.entry((*k, *f.den())).or_default().extend(f.num().terms().iter().cloned());
            }
        }
        Ok(NormalOp::from_buckets(ring, buckets))
    }

    fn from_buckets(ring: &Ring, buckets: HashMap<(OpKey, DenExp), Vec<(Key, GaussRat)>>) -> NormalOp {
        let mut by_key: HashMap<OpKey, Vec<(DenExp, Poly)>> = HashMap::new();
        for ((k, d), terms) in buckets {
            let p = Poly::from_terms(terms);
            if !p.is_zero() {
                by_key.entry(k).or_default().push((d, p));
            }
        }
        let mut terms: Vec<(OpKey, FieldElem)> = by_key
            .into_iter()
            .filter_map(|(k, mut parts)| {
                parts.sort_by(|a, b| a.0.cmp(&b.0));
                let f = ring.sum_parts(parts);
                if f.is_zero() {
                    None
                } else if f.den().iter().any(|&e| e > 0) {
                    Some((k, ring.reduce(&f)))
                } else {
                    Some((k, f))
                }
            })
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        NormalOp { ring: ring.clone(), terms }
    }

    pub fn add(&self, other: &NormalOp) -> Result<NormalOp, OpError> {
        self.check_ring(other)?;
        NormalOp::sum(&self.ring, &[self, other])
    }

    pub fn sub(&self, other: &NormalOp) -> Result<NormalOp, OpError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NormalOp {
        self.scale(&GaussRat::int(-1))
    }

    pub fn scale(&self, c: &GaussRat) -> NormalOp {
        if c.is_zero() {
            return NormalOp::zero(&self.ring);
        }
        let terms = self.terms.iter().map(|(k, f)| (*k, self.ring.scale(f, c))).collect();
        NormalOp { ring: self.ring.clone(), terms }
    }

    /// Left multiplication by a function.
    pub fn scale_by(&self, f: &FieldElem) -> Result<NormalOp, OpError> {
        self.ring.check_same(f)?;
        let terms: Vec<(OpKey, FieldElem)> = self
            .terms
            .iter()
            .map(|(k, c)| (*k, self.ring.mul_raw(f, c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(NormalOp { ring: self.ring.clone(), terms })
    }

    /// Number of raw coefficient products `self * other` would generate.
    pub fn product_cost(&self, other: &NormalOp) -> usize {
        let mut cost = 0usize;
        for (ka, ca) in &self.terms {
            let branches: usize = ka.deriv.iter().map(|&d| d as usize + 1).product();
            let mut rhs = 0usize;
            for (_, cb) in &other.terms {
                // Derivatives grow numerators; count each at least once.
                rhs += cb.num_len().max(1);
            }
            cost = cost.saturating_add(ca.num_len().saturating_mul(rhs).saturating_mul(branches));
        }
        cost
    }

    /// Operator product `self ∘ other` via the higher Leibniz rule:
    /// `a R^e d^b · c R^f d^g = sum_h C(b,h) (-1)^(f·(b-h)) a σ^e(d^h c) R^(e+f) d^(b-h+g)`.
    pub fn mul(&self, other: &NormalOp) -> Result<NormalOp, OpError> {
        self.mul_budget(other, usize::MAX)
    }

    pub fn mul_budget(&self, other: &NormalOp, budget: usize) -> Result<NormalOp, OpError> {
        self.check_ring(other)?;
        let ring = &self.ring;
        let dims = ring.dims();
        if self.is_zero() || other.is_zero() {
            return Ok(NormalOp::zero(ring));
        }
        let cost = self.product_cost(other);
        if cost > budget {
            return Err(OpError::Budget { needed: cost, budget });
        }
        let mut max_d = [0u8; MAX_DIMS];
        for (k, _) in &self.terms {
            for i in 0..dims {
                max_d[i] = max_d[i].max(k.deriv[i]);
            }
        }
        let mut buckets: HashMap<(OpKey, DenExp), Vec<(Key, GaussRat)>> = HashMap::new();
        for (kb, cb) in &other.terms {
            // d^h cb for every h <= max_d, then each reflection of it.
            let derivs = derivative_table(ring, cb, &max_d);
            let mut reflected: HashMap<([u8; MAX_DIMS], u8), FieldElem> = HashMap::new();
            for (ka, ca) in &self.terms {
                for_each_below(&ka.deriv, dims, |h| {
                    let d = &derivs[&h];
                    if d.is_zero() {
                        return;
                    }
                    let mut coef: i64 = 1;
                    let mut flips = 0u32;
                    let mut out = OpKey { mask: ka.mask ^ kb.mask, deriv: [0; MAX_DIMS] };
                    for i in 0..dims {
                        let rest = ka.deriv[i] - h[i];
                        coef *= binom(ka.deriv[i], h[i]);
                        if kb.mask >> i & 1 == 1 {
                            flips += rest as u32;
                        }
                        out.deriv[i] = rest + kb.deriv[i];
                    }
                    if flips % 2 == 1 {
                        coef = -coef;
                    }
                    let f = reflected
                        .entry((h, ka.mask))
                        .or_insert_with(|| reflect_mask(ring, d, ka.mask));
                    let den = den_add(ca.den(), f.den());
                    let bucket = buckets.entry((out, den)).or_default();
                    ca.num().mul_into(f.num(), &GaussRat::int(coef), dims, bucket);
                });
            }
        }
        Ok(NormalOp::from_buckets(ring, buckets))
    }

    pub fn commutator(&self, other: &NormalOp) -> Result<NormalOp, OpError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn anticommutator(&self, other: &NormalOp) -> Result<NormalOp, OpError> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// `sum c · σ^eps(d^beta f)`.
    pub fn apply_to(&self, f: &FieldElem) -> Result<FieldElem, OpError> {
        self.ring.check_same(f)?;
        let ring = &self.ring;
        let dims = ring.dims();
        let mut max_d = [0u8; MAX_DIMS];
        for (k, _) in &self.terms {
            for i in 0..dims {
                max_d[i] = max_d[i].max(k.deriv[i]);
            }
        }
        let derivs = derivative_table(ring, f, &max_d);
        let mut parts = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let d = reflect_mask(ring, &derivs[&k.deriv], k.mask);
            let p = ring.mul_raw(c, &d);
            parts.push((*p.den(), p.num().clone()));
        }
        Ok(ring.reduce(&ring.sum_parts(parts)))
    }

    /// Re-expresses every coefficient in a ring with more parameters fixed.
    pub fn substitute(&self, target: &Ring) -> Result<NormalOp, OpError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, f) in &self.terms {
            let g = self.ring.substitute(f, target)?;
            if !g.is_zero() {
                terms.push((*k, g));
            }
        }
        Ok(NormalOp { ring: target.clone(), terms })
    }

    /// Terms carrying at least one reflection.
    pub fn reflection_part(&self) -> NormalOp {
        let terms = self.terms.iter().filter(|(k, _)| k.mask != 0).cloned().collect();
        NormalOp { ring: self.ring.clone(), terms }
    }

    /// The smallest nonzero term, or `None` for the zero operator.
    pub fn witness(&self) -> Option<Witness> {
        let dims = self.ring.dims();
        let (k, f) = self.terms.first()?;
        let (mk, mc) = f.num().terms().first()?;
        let single = self.ring.elem(Poly::monomial(*mk, mc.clone()), *f.den());
        Some(Witness {
            eps: k.eps(dims),
            beta: k.deriv[..dims].to_vec(),
            monomial: crate::ring::poly::render_key(mk),
            coefficient: single.render(),
            operator_terms: self.terms.len(),
        })
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let dims = self.ring.dims();
        self.terms
            .iter()
            .map(|(k, f)| {
                let op = k.render(dims);
                if op.is_empty() {
                    format!("({})", f.render())
                } else {
                    format!("({})*{}", f.render(), op)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl PartialEq for NormalOp {
    fn eq(&self, other: &NormalOp) -> bool {
        self.ring == other.ring && self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl fmt::Debug for NormalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Calls `f` with every multi-index `h <= top` (componentwise) over `dims` axes.
fn for_each_below<F: FnMut([u8; MAX_DIMS])>(top: &[u8; MAX_DIMS], dims: usize, mut f: F) {
    let mut h = [0u8; MAX_DIMS];
    loop {
        f(h);
        let mut i = 0;
        loop {
            if i == dims {
                return;
            }
            if h[i] < top[i] {
                h[i] += 1;
                break;
            }
            h[i] = 0;
            i += 1;
        }
    }
}

fn derivative_table(ring: &Ring, f: &FieldElem, top: &[u8; MAX_DIMS]) -> HashMap<[u8; MAX_DIMS], FieldElem> {
    let dims = ring.dims();
    let mut table: HashMap<[u8; MAX_DIMS], FieldElem> = HashMap::new();
    for_each_below(top, dims, |h| {
        let v = match (0..dims).find(|&i| h[i] > 0) {
            None => f.clone(),
            Some(i) => {
                let mut prev = h;
                prev[i] -= 1;
                let p = &table[&prev];
                if p.is_zero() {
                    p.clone()
                } else {
                    ring.partial_raw(i, p)
                }
            }
        };
        table.insert(h, v);
    });
    table
}

fn reflect_mask(ring: &Ring, f: &FieldElem, mask: u8) -> FieldElem {
    let mut out = f.clone();
    for i in 0..ring.dims() {
        if mask >> i & 1 == 1 {
            out = ring.reflect_raw(i, &out);
        }
    }
    out
}

/// Operator expression tree. `Prod` composes right to left: the last factor
/// acts first.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

pub enum Node {
    Identity,
    MulBy(FieldElem),
    Del(usize),
    Refl(usize),
    Scale(ParamScalar, Expr),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    /// A precomputed canonical form used as a leaf.
    Normal(Arc<NormalOp>),
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn identity() -> Expr {
        Expr(Arc::new(Node::Identity))
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(Node::Sum(Vec::new())))
    }

    pub fn mul_by(f: FieldElem) -> Expr {
        Expr(Arc::new(Node::MulBy(f)))
    }

    pub fn del(i: usize) -> Expr {
        Expr(Arc::new(Node::Del(i)))
    }

    pub fn refl(i: usize) -> Expr {
        Expr(Arc::new(Node::Refl(i)))
    }

    pub fn normal(op: NormalOp) -> Expr {
        Expr(Arc::new(Node::Normal(Arc::new(op))))
    }

    pub fn scaled(s: ParamScalar, e: Expr) -> Expr {
        Expr(Arc::new(Node::Scale(s, e)))
    }

    pub fn scale(&self, s: &ParamScalar) -> Expr {
        Expr::scaled(s.clone(), self.clone())
    }

    pub fn scale_c(&self, c: GaussRat) -> Expr {
        Expr::scaled(ParamScalar::constant(c), self.clone())
    }

    pub fn scale_int(&self, n: i64) -> Expr {
        self.scale_c(GaussRat::int(n))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        Expr(Arc::new(Node::Sum(items.into_iter().collect())))
    }

    pub fn prod<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        Expr(Arc::new(Node::Prod(items.into_iter().collect())))
    }

    pub fn pow(&self, n: u32) -> Expr {
        match n {
            0 => Expr::identity(),
            1 => self.clone(),
            _ => Expr::prod((0..n).map(|_| self.clone())),
        }
    }

    pub fn commutator(a: &Expr, b: &Expr) -> Expr {
        a * b - b * a
    }

    pub fn anticommutator(a: &Expr, b: &Expr) -> Expr {
        a * b + b * a
    }

    fn is_unshared(&self) -> bool {
        Arc::strong_count(&self.0) == 1
    }

    /// Acts on `f` directly from the tree, without normal ordering. This is
    /// the independent evaluation path used to cross-check canonical forms.
    pub fn apply(&self, ring: &Ring, f: &FieldElem) -> Result<FieldElem, OpError> {
        Ok(match &*self.0 {
            Node::Identity => f.clone(),
            Node::MulBy(g) => {
                ring.check_same(g)?;
                ring.mul_raw(g, f)
            }
            Node::Del(i) => ring.partial(*i, f)?,
            Node::Refl(i) => ring.reflect(*i, f)?,
            Node::Scale(s, e) => ring.mul_raw(&ring.scalar(s), &e.apply(ring, f)?),
            Node::Sum(items) => {
                let mut parts = Vec::with_capacity(items.len());
                for e in items {
                    let g = e.apply(ring, f)?;
                    parts.push((*g.den(), g.num().clone()));
                }
                ring.sum_parts(parts)
            }
            Node::Prod(items) => {
                let mut g = f.clone();
                for e in items.iter().rev() {
                    g = e.apply(ring, &g)?;
                }
                g
            }
            Node::Normal(op) => {
                if op.ring() != ring {
                    return Err(RingError::ConfigMismatch.into());
                }
                op.apply_to(f)?
            }
        })
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        // Extend a temporary sum instead of nesting.
        if self.is_unshared() {
            if let Node::Sum(items) = &*self.0 {
                let mut items = items.clone();
                items.push(rhs);
                return Expr::sum(items);
            }
        }
        Expr::sum([self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale_int(-1)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_unshared() {
            if let Node::Prod(items) = &*self.0 {
                let mut items = items.clone();
                items.push(rhs);
                return Expr::prod(items);
            }
        }
        Expr::prod([self, rhs])
    }
}

macro_rules! by_ref {
    ($tr:ident, $m:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.clone().$m(rhs.clone())
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.$m(rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.clone().$m(rhs)
            }
        }
    };
}
by_ref!(Add, add);
by_ref!(Sub, sub);
by_ref!(Mul, mul);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter)
    }
}

/// Normalizer bound to one ring, with a term budget and a memo table for
/// shared subexpressions.
pub struct Algebra {
    ring: Ring,
    budget: usize,
    memo: Mutex<HashMap<usize, (Expr, Arc<NormalOp>)>>,
}

pub const DEFAULT_TERM_BUDGET: usize = 20_000_000;

impl Algebra {
    pub fn new(ring: Ring) -> Algebra {
        Algebra::with_budget(ring, DEFAULT_TERM_BUDGET)
    }

    pub fn with_budget(ring: Ring, budget: usize) -> Algebra {
        Algebra { ring, budget, memo: Mutex::new(HashMap::new()) }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Drops memoized results (they pin their expressions in memory).
    pub fn clear_memo(&self) {
        self.memo.lock().expect("memo lock").clear();
    }

    pub fn normalize(&self, e: &Expr) -> Result<Arc<NormalOp>, OpError> {
        let shared = !e.is_unshared() && matches!(&*e.0, Node::Sum(_) | Node::Prod(_) | Node::Scale(..));
        let id = Arc::as_ptr(&e.0) as usize;
        if shared {
            if let Some((_, op)) = self.memo.lock().expect("memo lock").get(&id) {
                return Ok(op.clone());
            }
        }
        let ring = &self.ring;
        let out = match &*e.0 {
            Node::Identity => NormalOp::identity(ring),
            Node::MulBy(f) => {
                ring.check_same(f)?;
                NormalOp::coeff(ring, f.clone())
            }
            Node::Del(i) => {
                ring.check_axis(*i)?;
                let mut k = OpKey::IDENTITY;
                k.deriv[*i] = 1;
                NormalOp::single(ring, k, ring.one())
            }
            Node::Refl(i) => {
                ring.check_axis(*i)?;
                NormalOp::single(ring, OpKey { mask: 1 << i, deriv: [0; MAX_DIMS] }, ring.one())
            }
            Node::Scale(s, inner) => {
                let op = self.normalize(inner)?;
                op.scale_by(&ring.scalar(s))?
            }
            Node::Sum(items) => {
                let ops = items.iter().map(|x| self.normalize(x)).collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&NormalOp> = ops.iter().map(|o| o.as_ref()).collect();
                NormalOp::sum(ring, &refs)?
            }
            Node::Prod(items) => {
                let mut acc: Option<Arc<NormalOp>> = None;
                for x in items.iter().rev() {
                    let op = self.normalize(x)?;
                    acc = Some(match acc {
                        None => op,
                        Some(a) => Arc::new(op.mul_budget(&a, self.budget)?),
                    });
                    if acc.as_ref().is_some_and(|a| a.is_zero()) {
                        break;
                    }
                }
                return self.finish(e, shared, id, acc.map_or_else(|| NormalOp::identity(ring), |a| (*a).clone()));
            }
            Node::Normal(op) => {
                if op.ring() != ring {
                    return Err(RingError::ConfigMismatch.into());
                }
                (**op).clone()
            }
        };
        self.finish(e, shared, id, out)
    }

    fn finish(&self, e: &Expr, shared: bool, id: usize, op: NormalOp) -> Result<Arc<NormalOp>, OpError> {
        let size = op.size();
        if size > self.budget {
            return Err(OpError::Budget { needed: size, budget: self.budget });
        }
        let op = Arc::new(op);
        if shared {
            self.memo.lock().expect("memo lock").insert(id, (e.clone(), op.clone()));
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Param;

    fn setup() -> (Ring, Algebra) {
        let ring = Ring::new(2, false).unwrap();
        (ring.clone(), Algebra::new(ring))
    }

    #[test]
    fn leibniz_example() {
        let (ring, alg) = setup();
        let e = Expr::del(0) * Expr::mul_by(ring.x(0).unwrap());
        let op = alg.normalize(&e).unwrap();
        assert_eq!(op.len(), 2);
        assert_eq!(op.coefficient(&OpKey::IDENTITY), Some(&ring.one()));
        let mut k = OpKey::IDENTITY;
        k.deriv[0] = 1;
        assert_eq!(op.coefficient(&k), Some(&ring.x(0).unwrap()));
    }

    #[test]
    fn reflection_rules() {
        let (_, alg) = setup();
        let anti = Expr::refl(0) * Expr::del(0) + Expr::del(0) * Expr::refl(0);
        assert!(alg.normalize(&anti).unwrap().is_zero());
        let sq = Expr::refl(0) * Expr::refl(0);
        assert!(alg.normalize(&(sq - Expr::identity())).unwrap().is_zero());
        let other = Expr::refl(1) * Expr::del(0) - Expr::del(0) * Expr::refl(1);
        assert!(alg.normalize(&other).unwrap().is_zero());
    }

    #[test]
    fn dunkl_momentum_probe_values() {
        let (ring, alg) = setup();
        let ih = ParamScalar::imag_unit().mul(&ParamScalar::symbol(Param::Hbar));
        let mu = Expr::mul_by(ring.mul(&ring.param(Param::Mu(0)), &ring.x_pow(0, -1)).unwrap());
        let pi1 = (Expr::del(0) + mu * (Expr::identity() - Expr::refl(0))).scale(&ih.neg());
        let op = alg.normalize(&pi1).unwrap();
        let x1 = ring.x(0).unwrap();
        let want = ring.scalar(&ih.neg().mul(&ParamScalar::one().add(&ParamScalar::symbol(Param::Mu(0)).scale(&GaussRat::int(2)))));
        assert_eq!(op.apply_to(&x1).unwrap(), want);
        assert!(op.apply_to(&ring.x(1).unwrap()).unwrap().is_zero());
        let x1sq = ring.x_pow(0, 2);
        let want = ring.scalar(&ih.neg().scale(&GaussRat::int(2)));
        assert_eq!(op.apply_to(&x1sq).unwrap(), ring.mul(&want, &x1).unwrap());
        // Independent path agrees.
        assert_eq!(pi1.apply(&ring, &x1sq).unwrap(), op.apply_to(&x1sq).unwrap());
    }

    #[test]
    fn identity_is_neutral() {
        let (ring, alg) = setup();
        let a = alg.normalize(&(Expr::del(1) * Expr::mul_by(ring.x_pow(0, -2)) * Expr::refl(1))).unwrap();
        let id = NormalOp::identity(&ring);
        assert!(a.mul(&id).unwrap() == *a);
        assert!(id.mul(&a).unwrap() == *a);
        assert!(!id.is_zero());
    }

    #[test]
    fn budget_is_enforced() {
        let ring = Ring::new(2, false).unwrap();
        let alg = Algebra::with_budget(ring.clone(), 3);
        let big = Expr::mul_by(ring.from_poly(ring.s_poly())) * Expr::del(0);
        let e = &big * &big;
        assert!(matches!(alg.normalize(&e), Err(OpError::Budget { .. })));
    }

    #[test]
    fn mixed_rings_rejected() {
        let (_, alg) = setup();
        let other = Ring::new(3, false).unwrap();
        let e = Expr::mul_by(other.x(2).unwrap());
        assert!(alg.normalize(&e).is_err());
        assert!(alg.normalize(&Expr::del(2)).is_err());
    }
}
