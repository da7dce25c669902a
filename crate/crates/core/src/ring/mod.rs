//! The commutative function ring the operators act on.
//!
//! Elements are `num / den` where `num` is a Laurent polynomial in the
//! x-variables (optionally times the radial symbol `r`, with `r^2 = S`) whose
//! coefficients are polynomials in the formal parameters, and `den` is a
//! monomial in a fixed list of atoms: `S = sum x_i^2`, `Kplus = 1 + kappa S`,
//! `Kminus = 1 - kappa S`, `L = 1 + lambda S`, `Qeta = eta^2 - S`. Powers of
//! single x-variables never appear in `den`; they live in the Laurent
//! exponents of `num`.
//!
//! A [`Ring`] fixes the dimension, whether `r` is available, and an optional
//! rational value for each parameter. Assigning values can make an atom
//! constant (`kappa = 0`) or proportional to another one (`eta = 0` turns
//! `Qeta` into `-S`); such atoms are folded away at construction time so that
//! the live atoms stay pairwise coprime and the zero test stays exact.

pub mod poly;
pub mod rational;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use poly::{Key, Param, Poly, MAX_DIMS, R_SLOT, UNIT_KEY};
pub use rational::{GaussRat, ParseRatError, Rat};

use poly::{param_key, x_key, KEY_LEN};

pub const ATOM_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    S,
    KPlus,
    KMinus,
    L,
    QEta,
}

impl Atom {
    pub const ALL: [Atom; ATOM_COUNT] = [Atom::S, Atom::KPlus, Atom::KMinus, Atom::L, Atom::QEta];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Atom::S => "S",
            Atom::KPlus => "Kplus",
            Atom::KMinus => "Kminus",
            Atom::L => "L",
            Atom::QEta => "Qeta",
        }
    }

    pub fn parse(name: &str) -> Option<Atom> {
        Atom::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Exponent of each atom in a denominator, indexed by [`Atom::index`].
pub type DenExp = [u8; ATOM_COUNT];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operands come from rings with different parameter assignments")]
    ConfigMismatch,
    #[error("axis {axis} out of range for N = {dims}")]
    AxisOutOfRange { axis: usize, dims: usize },
    #[error("N must be between 1 and {MAX_DIMS}, got {0}")]
    BadDims(usize),
    #[error("the radial extension needs N >= 2")]
    RadialNeedsTwoDims,
    #[error("the radial symbol r is not enabled in this ring")]
    RadialDisabled,
    #[error("parameter {0} is not defined for N = {1}")]
    UnknownParam(Param, usize),
    #[error("parameter {0} is already fixed to {1}, cannot set it to {2}")]
    ConflictingValue(Param, Rat, Rat),
    #[error("assignment makes atom {0} vanish identically")]
    ZeroAtom(&'static str),
    #[error("target ring does not extend the source ring's assignment")]
    NotASpecialization,
}

/// A polynomial in the parameters only (no x, no r).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ParamScalar(Poly);

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar(Poly::zero())
    }

    pub fn one() -> Self {
        ParamScalar(Poly::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        ParamScalar(Poly::constant(c))
    }

    pub fn rational(c: Rat) -> Self {
        Self::constant(GaussRat::real(c))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(GaussRat::int(n))
    }

    pub fn imag_unit() -> Self {
        Self::constant(GaussRat::I)
    }

    pub fn symbol(p: Param) -> Self {
        ParamScalar(Poly::monomial(param_key(p, 1), GaussRat::ONE))
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_constant(&self) -> Option<GaussRat> {
        self.0.as_constant()
    }

    pub fn add(&self, o: &Self) -> Self {
        ParamScalar(self.0.add(&o.0))
    }

    pub fn sub(&self, o: &Self) -> Self {
        ParamScalar(self.0.sub(&o.0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        ParamScalar(self.0.mul(&o.0, 0))
    }

    pub fn neg(&self) -> Self {
        ParamScalar(self.0.neg())
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        ParamScalar(self.0.scale(c))
    }

    pub fn pow(&self, e: u32) -> Self {
        ParamScalar(self.0.pow(e, 0))
    }

    pub fn render(&self) -> String {
        self.0.render()
    }
}

impl fmt::Debug for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An element of the function ring. Only meaningful together with the
/// [`Ring`] that produced it; mixing rings is reported as an error by the
/// checked operations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    num: Poly,
    den: DenExp,
    dims: u8,
    sig: u64,
}

impl FieldElem {
    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &DenExp {
        &self.den
    }

    pub fn dims(&self) -> usize {
        self.dims as usize
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn num_len(&self) -> usize {
        self.num.len()
    }

    pub fn has_radial(&self) -> bool {
        self.num.has_radial()
    }

    /// Renders deterministically as `num` or `(num)/(atoms)`.
    pub fn render(&self) -> String {
        let dens: Vec<String> = Atom::ALL
            .iter()
            .filter(|a| self.den[a.index()] > 0)
            .map(|a| match self.den[a.index()] {
                1 => a.name().to_string(),
                e => format!("{}^{}", a.name(), e),
            })
            .collect();
        if dens.is_empty() {
            self.num.render()
        } else if self.num.len() == 1 {
            format!("{}/({})", self.num.render(), dens.join("*"))
        } else {
            format!("({})/({})", self.num.render(), dens.join("*"))
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// How an atom is represented once parameter values are known:
/// `atom = factor * x1^x1exp * target`, with `target` a live atom or 1.
#[derive(Debug, Clone, PartialEq)]
enum AtomState {
    Live,
    Folded { factor: Rat, target: Option<usize>, x1exp: i8 },
}

const POW_CACHE: usize = 6;

struct RingInner {
    dims: usize,
    radial: bool,
    assign: [Option<Rat>; KEY_LEN],
    atoms: [AtomState; ATOM_COUNT],
    /// Each atom as a polynomial after substitution.
    atom_poly: [Poly; ATOM_COUNT],
    /// Coefficient of S in each atom, so that `d_i atom = 2 b x_i`.
    atom_b: [Poly; ATOM_COUNT],
    /// Powers 0..POW_CACHE of live atoms.
    atom_pow: [Vec<Poly>; ATOM_COUNT],
    sig: u64,
}

/// Configuration handle; cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Ring(Arc<RingInner>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let assigned: Vec<String> = self.assignment().iter().map(|(p, v)| format!("{p}={v}")).collect();
        write!(f, "Ring(N={}, radial={}, [{}])", self.0.dims, self.0.radial, assigned.join(", "))
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        self.0.sig == other.0.sig
    }
}

impl Ring {
    /// Ring with every parameter symbolic.
    pub fn new(dims: usize, radial: bool) -> Result<Ring, RingError> {
        Ring::with_params(dims, radial, &[])
    }

    pub fn with_params(dims: usize, radial: bool, values: &[(Param, Rat)]) -> Result<Ring, RingError> {
        if dims == 0 || dims > MAX_DIMS {
            return Err(RingError::BadDims(dims));
        }
        if radial && dims < 2 {
            return Err(RingError::RadialNeedsTwoDims);
        }
        let mut assign: [Option<Rat>; KEY_LEN] = Default::default();
        for (p, v) in values {
            if p.axis().is_some_and(|i| i >= dims) {
                return Err(RingError::UnknownParam(*p, dims));
            }
            let slot = &mut assign[p.slot()];
            match slot {
                Some(old) if old != v => return Err(RingError::ConflictingValue(*p, old.clone(), v.clone())),
                _ => *slot = Some(v.clone()),
            }
        }
        Ring::build(dims, radial, assign)
    }

    fn build(dims: usize, radial: bool, assign: [Option<Rat>; KEY_LEN]) -> Result<Ring, RingError> {
        let sym = |p: Param| -> Poly {
            match &assign[p.slot()] {
                Some(v) => Poly::constant(GaussRat::real(v.clone())),
                None => Poly::monomial(param_key(p, 1), GaussRat::ONE),
            }
        };
        let one = Poly::one();
        let eta = sym(Param::Eta);
        let kappa = sym(Param::Kappa);
        let ab: [(Poly, Poly); ATOM_COUNT] = [
            (Poly::zero(), one.clone()),
            (one.clone(), kappa.clone()),
            (one.clone(), kappa.neg()),
            (one.clone(), sym(Param::Lambda)),
            (eta.mul(&eta, 0), one.neg()),
        ];
        let mut s = Poly::zero();
        for i in 0..dims {
            s = s.add(&Poly::monomial(x_key(i, 2), GaussRat::ONE));
        }
        let mut atoms: Vec<AtomState> = Vec::with_capacity(ATOM_COUNT);
        for (idx, (a, b)) in ab.iter().enumerate() {
            let name = Atom::ALL[idx].name();
            let (ac, bc) = (a.as_constant(), b.as_constant());
            let state = if a.is_zero() && b.is_zero() {
                return Err(RingError::ZeroAtom(name));
            } else if b.is_zero() {
                match ac {
                    Some(c) => AtomState::Folded { factor: c.re, target: None, x1exp: 0 },
                    None => return Err(RingError::ZeroAtom(name)),
                }
            } else if a.is_zero() {
                let f = match bc {
                    Some(c) => c.re,
                    None => return Err(RingError::ZeroAtom(name)),
                };
                if dims == 1 {
                    AtomState::Folded { factor: f, target: None, x1exp: 2 }
                } else if idx == Atom::S.index() {
                    AtomState::Live
                } else {
                    AtomState::Folded { factor: f, target: Some(Atom::S.index()), x1exp: 0 }
                }
            } else {
                let mut st = AtomState::Live;
                if let (Some(ai), Some(bi)) = (&ac, &bc) {
                    for (j, prev) in atoms.iter().enumerate() {
                        if *prev != AtomState::Live {
                            continue;
                        }
                        if let (Some(aj), Some(bj)) = (ab[j].0.as_constant(), ab[j].1.as_constant()) {
                            if !aj.is_zero() && &ai.re * &bj.re == &aj.re * &bi.re {
                                st = AtomState::Folded { factor: &ai.re / &aj.re, target: Some(j), x1exp: 0 };
                                break;
                            }
                        }
                    }
                }
                st
            };
            atoms.push(state);
        }
        let atom_poly: Vec<Poly> = ab.iter().map(|(a, b)| a.add(&b.mul(&s, dims))).collect();
        let atom_pow: Vec<Vec<Poly>> = atom_poly
            .iter()
            .zip(&atoms)
            .map(|(p, st)| {
                if *st == AtomState::Live {
                    let mut v = vec![Poly::one()];
                    for e in 1..=POW_CACHE {
                        v.push(v[e - 1].mul(p, dims));
                    }
                    v
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut h = DefaultHasher::new();
        dims.hash(&mut h);
        radial.hash(&mut h);
        assign.hash(&mut h);
        Ok(Ring(Arc::new(RingInner {
            dims,
            radial,
            assign,
            atoms: atoms.try_into().expect("five atoms"),
            atom_poly: atom_poly.try_into().expect("five atoms"),
            atom_b: ab.map(|(_, b)| b),
            atom_pow: atom_pow.try_into().expect("five atoms"),
            sig: h.finish(),
        })))
    }

    /// A ring with additional parameter values on top of this one's.
    pub fn specialize(&self, values: &[(Param, Rat)]) -> Result<Ring, RingError> {
        let mut all = self.assignment();
        all.extend_from_slice(values);
        Ring::with_params(self.0.dims, self.0.radial, &all)
    }

    pub fn dims(&self) -> usize {
        self.0.dims
    }

    pub fn radial(&self) -> bool {
        self.0.radial
    }

    pub fn value(&self, p: Param) -> Option<Rat> {
        self.0.assign[p.slot()].clone()
    }

    /// Assigned parameters in slot order.
    pub fn assignment(&self) -> Vec<(Param, Rat)> {
        (0..KEY_LEN)
            .filter_map(|s| Some((Param::from_slot(s)?, self.0.assign[s].clone()?)))
            .collect()
    }

    /// Whether the atom survives as a genuine denominator factor.
    pub fn atom_is_live(&self, a: Atom) -> bool {
        self.0.atoms[a.index()] == AtomState::Live
    }

    pub fn atom_poly(&self, a: Atom) -> &Poly {
        &self.0.atom_poly[a.index()]
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<(), RingError> {
        if axis < self.0.dims {
            Ok(())
        } else {
            Err(RingError::AxisOutOfRange { axis, dims: self.0.dims })
        }
    }

    pub(crate) fn check_same(&self, f: &FieldElem) -> Result<(), RingError> {
        if f.dims() != self.0.dims {
            Err(RingError::DimensionMismatch(self.0.dims, f.dims()))
        } else if f.sig != self.0.sig {
            Err(RingError::ConfigMismatch)
        } else {
            Ok(())
        }
    }

    pub(crate) fn elem(&self, num: Poly, den: DenExp) -> FieldElem {
        FieldElem { num, den, dims: self.0.dims as u8, sig: self.0.sig }
    }

    pub fn from_poly(&self, num: Poly) -> FieldElem {
        self.elem(num, [0; ATOM_COUNT])
    }

    pub fn zero(&self) -> FieldElem {
        self.from_poly(Poly::zero())
    }

    pub fn one(&self) -> FieldElem {
        self.from_poly(Poly::one())
    }

    pub fn constant(&self, c: GaussRat) -> FieldElem {
        self.from_poly(Poly::constant(c))
    }

    pub fn int(&self, n: i64) -> FieldElem {
        self.constant(GaussRat::int(n))
    }

    /// Embeds a parameter polynomial, evaluating assigned parameters.
    pub fn scalar(&self, s: &ParamScalar) -> FieldElem {
        self.from_poly(self.eval_params(s.poly()))
    }

    /// The parameter as a symbol, or its value when assigned.
    pub fn param(&self, p: Param) -> FieldElem {
        self.scalar(&ParamScalar::symbol(p))
    }

    pub fn param_scalar(&self, p: Param) -> ParamScalar {
        match self.value(p) {
            Some(v) => ParamScalar::rational(v),
            None => ParamScalar::symbol(p),
        }
    }

    pub fn x(&self, i: usize) -> Result<FieldElem, RingError> {
        self.check_axis(i)?;
        Ok(self.x_pow(i, 1))
    }

    pub(crate) fn x_pow(&self, i: usize, e: i8) -> FieldElem {
        self.from_poly(Poly::monomial(x_key(i, e), GaussRat::ONE))
    }

    pub fn r(&self) -> Result<FieldElem, RingError> {
        if !self.0.radial {
            return Err(RingError::RadialDisabled);
        }
        let mut k = UNIT_KEY;
        k[R_SLOT] = 1;
        Ok(self.from_poly(Poly::monomial(k, GaussRat::ONE)))
    }

    /// `S = x_1^2 + ... + x_N^2` as a polynomial.
    pub fn s_poly(&self) -> Poly {
        let mut s = Poly::zero();
        for i in 0..self.0.dims {
            s = s.add(&Poly::monomial(x_key(i, 2), GaussRat::ONE));
        }
        s
    }

    /// The atom itself as a ring element (a polynomial in x and parameters).
    pub fn atom(&self, a: Atom) -> FieldElem {
        self.from_poly(self.0.atom_poly[a.index()].clone())
    }

    /// `atom^(-m)`, folded according to the parameter assignment.
    pub fn atom_inv(&self, a: Atom, m: u8) -> FieldElem {
        let mut den = [0; ATOM_COUNT];
        match &self.0.atoms[a.index()] {
            AtomState::Live => {
                den[a.index()] = m;
                self.elem(Poly::one(), den)
            }
            AtomState::Folded { factor, target, x1exp } => {
                let c = GaussRat::real(factor.recip().pow(m as u32));
                if let Some(t) = target {
                    den[*t] = m;
                }
                self.elem(Poly::monomial(x_key(0, -x1exp * m as i8), c), den)
            }
        }
    }

    fn eval_params(&self, p: &Poly) -> Poly {
        let assign = &self.0.assign;
        let any = p.terms().iter().any(|(k, _)| (R_SLOT + 1..KEY_LEN).any(|s| k[s] != 0 && assign[s].is_some()));
        if !any {
            return p.clone();
        }
        Poly::from_terms(
            p.terms()
                .iter()
                .map(|(k, c)| {
                    let mut k = *k;
                    let mut c = c.clone();
                    for s in R_SLOT + 1..KEY_LEN {
                        if k[s] != 0 {
                            if let Some(v) = &assign[s] {
                                c = &c * &GaussRat::real(v.pow(k[s] as u32));
                                k[s] = 0;
                            }
                        }
                    }
                    (k, c)
                })
                .collect(),
        )
    }

    /// `num * prod atom_j^(e_j)` for live atoms.
    fn mul_atoms(&self, num: &Poly, e: &DenExp) -> Poly {
        let mut out = num.clone();
        for j in 0..ATOM_COUNT {
            if e[j] > 0 {
                out = out.mul(&self.atom_power(j, e[j]), self.0.dims);
            }
        }
        out
    }

    fn atom_power(&self, j: usize, e: u8) -> Poly {
        let cache = &self.0.atom_pow[j];
        let e = e as usize;
        if e < cache.len() {
            cache[e].clone()
        } else {
            let mut p = cache[POW_CACHE].clone();
            for _ in POW_CACHE..e {
                p = p.mul(&self.0.atom_poly[j], self.0.dims);
            }
            p
        }
    }

    /// Sums numerators given over arbitrary denominators, bringing them to
    /// the least common denominator.
    pub(crate) fn sum_parts(&self, parts: Vec<(DenExp, Poly)>) -> FieldElem {
        let mut parts: Vec<(DenExp, Poly)> = parts.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        match parts.len() {
            0 => return self.zero(),
            1 => {
                let (d, p) = parts.pop().unwrap();
                return self.elem(p, d);
            }
            _ => {}
        }
        // Parts over the same denominator merge without lifting.
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(DenExp, Poly)> = Vec::with_capacity(parts.len());
        for (d, p) in parts {
            match merged.last_mut() {
                Some((ld, lp)) if *ld == d => *lp = lp.add(&p),
                _ => merged.push((d, p)),
            }
        }
        let parts: Vec<(DenExp, Poly)> = merged.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if parts.len() <= 1 {
            return parts.into_iter().next().map_or_else(|| self.zero(), |(d, p)| self.elem(p, d));
        }
        let mut lcm = [0u8; ATOM_COUNT];
        for (d, _) in &parts {
            for j in 0..ATOM_COUNT {
                lcm[j] = lcm[j].max(d[j]);
            }
        }
        let mut terms = Vec::new();
        for (d, p) in parts {
            let mut e = lcm;
            for j in 0..ATOM_COUNT {
                e[j] -= d[j];
            }
            terms.extend(self.mul_atoms(&p, &e).into_terms());
        }
        self.elem(Poly::from_terms(terms), lcm)
    }

    pub(crate) fn add_raw(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        if a.den == b.den {
            return self.elem(a.num.add(&b.num), a.den);
        }
        self.sum_parts(vec![(a.den, a.num.clone()), (b.den, b.num.clone())])
    }

    pub(crate) fn mul_raw(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let mut den = a.den;
        for j in 0..ATOM_COUNT {
            den[j] += b.den[j];
        }
        self.elem(a.num.mul(&b.num, self.0.dims), den)
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        self.elem(a.num.neg(), a.den)
    }

    pub fn scale(&self, a: &FieldElem, c: &GaussRat) -> FieldElem {
        self.elem(a.num.scale(c), a.den)
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem, RingError> {
        self.check_same(a)?;
        self.check_same(b)?;
        Ok(self.add_raw(a, b))
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem, RingError> {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem, RingError> {
        self.check_same(a)?;
        self.check_same(b)?;
        Ok(self.mul_raw(a, b))
    }

    pub fn sum(&self, items: &[FieldElem]) -> Result<FieldElem, RingError> {
        for f in items {
            self.check_same(f)?;
        }
        Ok(self.sum_parts(items.iter().map(|f| (f.den, f.num.clone())).collect()))
    }

    pub fn partial(&self, i: usize, f: &FieldElem) -> Result<FieldElem, RingError> {
        self.check_axis(i)?;
        self.check_same(f)?;
        Ok(self.partial_raw(i, f))
    }

    pub(crate) fn partial_raw(&self, i: usize, f: &FieldElem) -> FieldElem {
        let dims = self.0.dims;
        let mut plain = Vec::new();
        let mut radial = Vec::new();
        for (k, c) in f.num.terms() {
            if k[i] != 0 {
                let mut kk = *k;
                kk[i] -= 1;
                plain.push((kk, c * &GaussRat::int(k[i] as i64)));
            }
            if k[R_SLOT] != 0 {
                // d_i r = x_i r / S
                let mut kk = *k;
                kk[i] += 1;
                radial.push((kk, c.clone()));
            }
        }
        let mut parts = vec![(f.den, Poly::from_terms(plain))];
        if !radial.is_empty() {
            let inv = self.atom_inv(Atom::S, 1);
            let mut d = f.den;
            for j in 0..ATOM_COUNT {
                d[j] += inv.den[j];
            }
            parts.push((d, Poly::from_terms(radial).mul(&inv.num, dims)));
        }
        // d_i atom^(-m) = -2 m b x_i atom^(-m-1)
        for j in 0..ATOM_COUNT {
            let m = f.den[j];
            if m == 0 {
                continue;
            }
            let mut d = f.den;
            d[j] += 1;
            let coef = self.0.atom_b[j].mul_monomial(&x_key(i, 1), &GaussRat::int(-2 * m as i64));
            parts.push((d, f.num.mul(&coef, dims)));
        }
        self.sum_parts(parts)
    }

    pub fn reflect(&self, i: usize, f: &FieldElem) -> Result<FieldElem, RingError> {
        self.check_axis(i)?;
        self.check_same(f)?;
        Ok(self.reflect_raw(i, f))
    }

    pub(crate) fn reflect_raw(&self, i: usize, f: &FieldElem) -> FieldElem {
        if f.num.terms().iter().all(|(k, _)| k[i] % 2 == 0) {
            return f.clone();
        }
        self.elem(f.num.map_coeffs(|k, c| if k[i] % 2 != 0 { -c } else { c.clone() }), f.den)
    }

    /// Multiplies by `x_i^-1`.
    pub fn div_x(&self, i: usize, f: &FieldElem) -> Result<FieldElem, RingError> {
        self.check_axis(i)?;
        self.check_same(f)?;
        Ok(self.shift_x(i, -1, f))
    }

    pub(crate) fn shift_x(&self, i: usize, e: i8, f: &FieldElem) -> FieldElem {
        self.elem(f.num.mul_monomial(&x_key(i, e), &GaussRat::ONE), f.den)
    }

    pub fn is_zero(&self, f: &FieldElem) -> bool {
        f.is_zero()
    }

    pub fn eq(&self, a: &FieldElem, b: &FieldElem) -> Result<bool, RingError> {
        Ok(self.sub(a, b)?.is_zero())
    }

    /// Cancels every live atom that divides the numerator exactly.
    pub fn reduce(&self, f: &FieldElem) -> FieldElem {
        let mut num = f.num.clone();
        let mut den = f.den;
        for j in 0..ATOM_COUNT {
            while den[j] > 0 {
                match num.div_exact(&self.0.atom_poly[j]) {
                    Some(q) => {
                        num = q;
                        den[j] -= 1;
                    }
                    None => break,
                }
            }
        }
        if num.is_zero() {
            den = [0; ATOM_COUNT];
        }
        self.elem(num, den)
    }

    /// Re-expresses `f` (from `self`) in `target`, whose assignment must
    /// extend this ring's.
    pub fn substitute(&self, f: &FieldElem, target: &Ring) -> Result<FieldElem, RingError> {
        self.check_same(f)?;
        if target.0.dims != self.0.dims {
            return Err(RingError::DimensionMismatch(self.0.dims, target.0.dims));
        }
        if self.0.radial && !target.0.radial && f.has_radial() {
            return Err(RingError::RadialDisabled);
        }
        for s in 0..KEY_LEN {
            if let Some(v) = &self.0.assign[s] {
                if target.0.assign[s].as_ref() != Some(v) {
                    return Err(RingError::NotASpecialization);
                }
            }
        }
        let mut out = target.from_poly(target.eval_params(&f.num));
        for a in Atom::ALL {
            let m = f.den[a.index()];
            if m > 0 {
                out = target.mul_raw(&out, &target.atom_inv(a, m));
            }
        }
        Ok(target.reduce(&out))
    }
}

/// Adds `b` to the exponents of `a`; exposed for the operator layer.
pub(crate) fn den_add(a: &DenExp, b: &DenExp) -> DenExp {
    let mut d = *a;
    for j in 0..ATOM_COUNT {
        d[j] += b[j];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3() -> Ring {
        Ring::new(3, true).unwrap()
    }

    #[test]
    fn add_examples() {
        let r = ring3();
        let x1 = r.x(0).unwrap();
        assert!(r.add(&x1, &r.neg(&x1)).unwrap().is_zero());
        let a = r.mul(&r.x_pow(0, -2), &r.one()).unwrap();
        let b = r.x_pow(1, -2);
        let sum = r.add(&a, &b).unwrap();
        let expect = r.mul(&r.add(&r.x_pow(0, 2), &r.x_pow(1, 2)).unwrap(), &r.mul(&r.x_pow(0, -2), &r.x_pow(1, -2)).unwrap()).unwrap();
        assert!(r.eq(&sum, &expect).unwrap());
        let rr = r.r().unwrap();
        assert_eq!(r.add(&rr, &rr).unwrap(), r.scale(&rr, &GaussRat::int(2)));
    }

    #[test]
    fn mul_examples() {
        let r = ring3();
        let rr = r.r().unwrap();
        assert_eq!(r.mul(&rr, &rr).unwrap().num(), &r.s_poly());
        let q = r.mul(&r.x(0).unwrap(), &r.mul(&r.r().unwrap(), &r.atom_inv(Atom::S, 1)).unwrap()).unwrap();
        let sq = r.mul(&q, &q).unwrap();
        assert_eq!(r.reduce(&sq).den()[Atom::S.index()], 1);
        assert!(r.eq(&sq, &r.mul(&r.x_pow(0, 2), &r.atom_inv(Atom::S, 1)).unwrap()).unwrap());
        assert!(r.mul(&r.x_pow(0, 1), &r.x_pow(0, -1)).unwrap() == r.one());
    }

    #[test]
    fn partial_examples() {
        let r = ring3();
        let f = r.mul(&r.x_pow(0, 2), &r.x_pow(1, 1)).unwrap();
        assert_eq!(r.partial(0, &f).unwrap(), r.scale(&r.mul(&r.x_pow(0, 1), &r.x_pow(1, 1)).unwrap(), &GaussRat::int(2)));
        let dr = r.partial(0, &r.r().unwrap()).unwrap();
        let expect = r.mul(&r.mul(&r.x_pow(0, 1), &r.r().unwrap()).unwrap(), &r.atom_inv(Atom::S, 1)).unwrap();
        assert!(r.eq(&dr, &expect).unwrap());
        assert_eq!(r.partial(0, &r.x_pow(0, -1)).unwrap(), r.neg(&r.x_pow(0, -2)));
        assert!(r.partial(3, &f).is_err());
    }

    #[test]
    fn atom_derivative() {
        let r = ring3();
        let k = r.atom_inv(Atom::KPlus, 2);
        let d = r.partial(1, &k).unwrap();
        let kappa = r.param(Param::Kappa);
        let expect = r.mul(&r.scale(&r.mul(&kappa, &r.x_pow(1, 1)).unwrap(), &GaussRat::int(-4)), &r.atom_inv(Atom::KPlus, 3)).unwrap();
        assert!(r.eq(&d, &expect).unwrap());
    }

    #[test]
    fn reflect_examples() {
        let r = ring3();
        let f = r.mul(&r.x_pow(0, 1), &r.x_pow(1, 1)).unwrap();
        assert_eq!(r.reflect(0, &f).unwrap(), r.neg(&f));
        assert_eq!(r.reflect(0, &r.r().unwrap()).unwrap(), r.r().unwrap());
        assert_eq!(r.reflect(0, &r.x_pow(0, -1)).unwrap(), r.neg(&r.x_pow(0, -1)));
    }

    #[test]
    fn div_x_examples() {
        let r = ring3();
        let x1 = r.x(0).unwrap();
        let f = r.sub(&x1, &r.reflect(0, &x1).unwrap()).unwrap();
        assert_eq!(r.div_x(0, &f).unwrap(), r.int(2));
        assert!(r.div_x(0, &r.zero()).unwrap().is_zero());
        let g = r.mul(&r.x_pow(0, 2), &r.x_pow(1, 1)).unwrap();
        assert_eq!(r.div_x(0, &g).unwrap(), r.mul(&r.x_pow(0, 1), &r.x_pow(1, 1)).unwrap());
    }

    #[test]
    fn zero_tests() {
        let r = ring3();
        let rr = r.r().unwrap();
        let d = r.sub(&r.mul(&rr, &rr).unwrap(), &r.from_poly(r.s_poly())).unwrap();
        assert!(r.is_zero(&d));
        // 1/(eta + r) rationalized as (eta - r)/Qeta.
        let eta = r.param(Param::Eta);
        let lhs = r.mul(&r.sub(&eta, &rr).unwrap(), &r.atom_inv(Atom::QEta, 1)).unwrap();
        let back = r.mul(&lhs, &r.add(&eta, &rr).unwrap()).unwrap();
        assert!(r.eq(&back, &r.one()).unwrap());
        assert!(!r.is_zero(&r.x(0).unwrap()));
    }

    #[test]
    fn substitution_folds_atoms() {
        let r = ring3();
        let flat = r.specialize(&[(Param::Kappa, Rat::ZERO)]).unwrap();
        let k = r.atom_inv(Atom::KPlus, 1);
        assert_eq!(r.substitute(&k, &flat).unwrap(), flat.one());
        let mu = r.specialize(&[(Param::Mu(0), Rat::new(1, 2))]).unwrap();
        let f = r.add(&r.one(), &r.scale(&r.param(Param::Mu(0)), &GaussRat::int(2))).unwrap();
        assert_eq!(r.substitute(&f, &mu).unwrap(), mu.int(2));
        let w = r.specialize(&[(Param::Hbar, Rat::ONE), (Param::Omega, Rat::new(2, 3))]).unwrap();
        let f = r.mul(&r.mul(&r.param(Param::Omega), &r.param(Param::Omega)).unwrap(), &r.mul(&r.param(Param::Hbar), &r.param(Param::Hbar)).unwrap()).unwrap();
        assert_eq!(r.substitute(&f, &w).unwrap(), w.constant(GaussRat::frac(4, 9)));
        let e0 = r.specialize(&[(Param::Eta, Rat::ZERO)]).unwrap();
        let q = r.substitute(&r.atom_inv(Atom::QEta, 1), &e0).unwrap();
        assert!(e0.eq(&q, &e0.neg(&e0.atom_inv(Atom::S, 1))).unwrap());
        // Coinciding atoms fold onto the first one.
        let same = Ring::with_params(2, false, &[(Param::Kappa, Rat::new(1, 3)), (Param::Lambda, Rat::new(1, 3))]).unwrap();
        assert!(!same.atom_is_live(Atom::L));
        assert!(same.atom_is_live(Atom::KPlus));
    }

    #[test]
    fn configuration_errors() {
        assert_eq!(Ring::new(1, true).err(), Some(RingError::RadialNeedsTwoDims));
        let a = Ring::new(2, false).unwrap();
        let b = Ring::new(3, false).unwrap();
        assert!(matches!(a.add(&a.one(), &b.one()), Err(RingError::DimensionMismatch(2, 3))));
        let one_d = Ring::new(1, false).unwrap();
        let s = one_d.atom_inv(Atom::S, 1);
        assert_eq!(s, one_d.x_pow(0, -2));
    }
}
