//! Sparse polynomials over Gaussian rationals in the x-variables (Laurent),
//! the radial symbol `r` (exponent 0 or 1) and the formal parameters.
//!
//! A monomial is a fixed-width exponent array. Slots `0..MAX_DIMS` hold the
//! x-exponents, slot [`R_SLOT`] the radial flag and the rest one slot per
//! parameter, laid out in alphabetical order of the parameter names so that
//! plain array comparison gives the canonical rendering order.

use std::collections::BTreeMap;
use std::fmt;

use super::rational::GaussRat;

pub const MAX_DIMS: usize = 6;
pub const KEY_LEN: usize = 32;
pub const R_SLOT: usize = MAX_DIMS;

pub type Key = [i8; KEY_LEN];
pub const UNIT_KEY: Key = [0; KEY_LEN];

/// Same order as `Ord` on `Key` (lexicographic, signed), compared eight
/// bytes at a time: flipping the sign bit makes signed bytes sort as
/// unsigned, and big-endian words sort like their byte strings.
#[inline]
pub fn key_cmp(a: &Key, b: &Key) -> std::cmp::Ordering {
    const FLIP: u64 = 0x8080_8080_8080_8080;
    for c in 0..KEY_LEN / 8 {
        let word = |k: &Key| {
            let mut w = [0u8; 8];
            for (d, s) in w.iter_mut().zip(&k[c * 8..c * 8 + 8]) {
                *d = *s as u8;
            }
            u64::from_be_bytes(w) ^ FLIP
        };
        let (x, y) = (word(a), word(b));
        if x != y {
            return x.cmp(&y);
        }
    }
    std::cmp::Ordering::Equal
}

/// `Key` ordered through [`key_cmp`], for ordered maps.
#[derive(Clone, Copy, PartialEq, Eq)]
struct OrdKey(Key);

impl Ord for OrdKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        key_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for OrdKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A formal parameter. Axis-indexed parameters use 0-based axes; their
/// printed names are 1-based (`mu1` is `Mu(0)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Hbar,
    Omega,
    K,
    Kappa,
    Lambda,
    Eta,
    Mu(usize),
    Beta(usize),
    Gamma(usize),
}

pub const PARAM_SLOTS: usize = KEY_LEN - R_SLOT - 1;

impl Param {
    pub fn slot(self) -> usize {
        match self {
            Param::Beta(i) => 7 + i,
            Param::Eta => 13,
            Param::Gamma(i) => 14 + i,
            Param::Hbar => 20,
            Param::K => 21,
            Param::Kappa => 22,
            Param::Lambda => 23,
            Param::Mu(i) => 24 + i,
            Param::Omega => 30,
        }
    }

    pub fn from_slot(slot: usize) -> Option<Param> {
        Some(match slot {
            7..=12 => Param::Beta(slot - 7),
            13 => Param::Eta,
            14..=19 => Param::Gamma(slot - 14),
            20 => Param::Hbar,
            21 => Param::K,
            22 => Param::Kappa,
            23 => Param::Lambda,
            24..=29 => Param::Mu(slot - 24),
            30 => Param::Omega,
            _ => return None,
        })
    }

    pub fn axis(self) -> Option<usize> {
        match self {
            Param::Mu(i) | Param::Beta(i) | Param::Gamma(i) => Some(i),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            Param::Hbar => "hbar".into(),
            Param::Omega => "omega".into(),
            Param::K => "k".into(),
            Param::Kappa => "kappa".into(),
            Param::Lambda => "lambda".into(),
            Param::Eta => "eta".into(),
            Param::Mu(i) => format!("mu{}", i + 1),
            Param::Beta(i) => format!("beta{}", i + 1),
            Param::Gamma(i) => format!("gamma{}", i + 1),
        }
    }

    /// Inverse of [`Param::name`]; axis-indexed names are checked against `dims`.
    pub fn parse(name: &str, dims: usize) -> Option<Param> {
        let fixed = match name {
            "hbar" => Some(Param::Hbar),
            "omega" => Some(Param::Omega),
            "k" => Some(Param::K),
            "kappa" => Some(Param::Kappa),
            "lambda" => Some(Param::Lambda),
            "eta" => Some(Param::Eta),
            _ => None,
        };
        if fixed.is_some() {
            return fixed;
        }
        let split = name.find(|c: char| c.is_ascii_digit())?;
        let (stem, idx) = name.split_at(split);
        if idx.starts_with('0') {
            return None;
        }
        let i: usize = idx.parse().ok()?;
        if i == 0 || i > dims {
            return None;
        }
        match stem {
            "mu" => Some(Param::Mu(i - 1)),
            "beta" => Some(Param::Beta(i - 1)),
            "gamma" => Some(Param::Gamma(i - 1)),
            _ => None,
        }
    }

    /// Every parameter meaningful in dimension `dims`, in slot order.
    pub fn all(dims: usize) -> Vec<Param> {
        (R_SLOT + 1..KEY_LEN)
            .filter_map(Param::from_slot)
            .filter(|p| p.axis().map_or(true, |i| i < dims))
            .collect()
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[inline]
pub fn key_add(a: &Key, b: &Key) -> Key {
    let mut k = *a;
    for (x, y) in k.iter_mut().zip(b.iter()) {
        *x += *y;
    }
    k
}

#[inline]
pub fn key_sub(a: &Key, b: &Key) -> Key {
    let mut k = *a;
    for (x, y) in k.iter_mut().zip(b.iter()) {
        *x -= *y;
    }
    k
}

pub fn x_key(i: usize, e: i8) -> Key {
    let mut k = UNIT_KEY;
    k[i] = e;
    k
}

pub fn param_key(p: Param, e: i8) -> Key {
    let mut k = UNIT_KEY;
    k[p.slot()] = e;
    k
}

/// Sorted, duplicate-free, zero-free list of terms.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Key, GaussRat)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: GaussRat) -> Poly {
        Poly::monomial(UNIT_KEY, c)
    }

    pub fn one() -> Poly {
        Poly::constant(GaussRat::ONE)
    }

    pub fn monomial(key: Key, c: GaussRat) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(key, c)] }
        }
    }

    /// Builds a canonical polynomial from arbitrary (unsorted, repeated) terms.
    pub fn from_terms(mut terms: Vec<(Key, GaussRat)>) -> Poly {
        terms.sort_unstable_by(|a, b| key_cmp(&a.0, &b.0));
        let mut out: Vec<(Key, GaussRat)> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match out.last_mut() {
                Some((lk, lc)) if *lk == k => *lc = &*lc + &c,
                _ => {
                    if let Some((_, lc)) = out.last() {
                        if lc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((k, c));
                }
            }
        }
        if matches!(out.last(), Some((_, c)) if c.is_zero()) {
            out.pop();
        }
        Poly { terms: out }
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

    pub fn terms(&self) -> &[(Key, GaussRat)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Key, GaussRat)> {
        self.terms
    }

    /// The constant term when the polynomial is constant.
    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.as_slice() {
            [] => Some(GaussRat::ZERO),
            [(k, c)] if *k == UNIT_KEY => Some(c.clone()),
            _ => None,
        }
    }

    pub fn lead(&self) -> Option<&(Key, GaussRat)> {
        self.terms.last()
    }

    pub fn has_radial(&self) -> bool {
        self.terms.iter().any(|(k, _)| k[R_SLOT] != 0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match key_cmp(&a[i].0, &b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(k, d)| (*k, d * c)).collect() }
    }

    /// Multiplies by `c * key` where the key carries no radial part; the
    /// term order is preserved because lex order is translation invariant.
    pub fn mul_monomial(&self, key: &Key, c: &GaussRat) -> Poly {
        debug_assert_eq!(key[R_SLOT], 0);
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, d)| (key_add(k, key), d * c)).collect() }
    }

    /// Product with `r^2` rewritten to `x_1^2 + ... + x_dims^2`.
    pub fn mul(&self, other: &Poly, dims: usize) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 && (small.terms[0].0[R_SLOT] == 0 || !big.has_radial()) {
            let (k, c) = &small.terms[0];
            if k[R_SLOT] == 0 {
                return big.mul_monomial(k, c);
            }
            // Radial monomial times an r-free polynomial: still order preserving.
            return Poly { terms: big.terms.iter().map(|(kb, d)| (key_add(kb, k), d * c)).collect() };
        }
        if !(small.has_radial() && big.has_radial()) {
            // No r^2 to rewrite, so each row is a sorted shift of `big`;
            // merging rows pairwise combines duplicates early.
            let mut rows: Vec<Poly> = small
                .terms
                .iter()
                .map(|(k, c)| Poly { terms: big.terms.iter().map(|(kb, d)| (key_add(kb, k), d * c)).collect() })
                .collect();
            while rows.len() > 1 {
                let mut next = Vec::with_capacity(rows.len().div_ceil(2));
                let mut it = rows.into_iter();
                while let Some(a) = it.next() {
                    next.push(match it.next() {
                        Some(b) => a.add(&b),
                        None => a,
                    });
                }
                rows = next;
            }
            return rows.pop().unwrap_or_default();
        }
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k = key_add(ka, kb);
                let c = ca * cb;
                if k[R_SLOT] == 2 {
                    k[R_SLOT] = 0;
                    for i in 0..dims {
                        let mut ki = k;
                        ki[i] += 2;
                        out.push((ki, c.clone()));
                    }
                } else {
                    out.push((k, c));
                }
            }
        }
        Poly::from_terms(out)
    }

    /// Pushes the raw (uncombined) terms of `self * other * c` onto `out`.
    pub fn mul_into(&self, other: &Poly, c: &GaussRat, dims: usize, out: &mut Vec<(Key, GaussRat)>) {
        for (ka, ca) in &self.terms {
            let ca = ca * c;
            for (kb, cb) in &other.terms {
                let mut k = key_add(ka, kb);
                let v = &ca * cb;
                if k[R_SLOT] == 2 {
                    k[R_SLOT] = 0;
                    for i in 0..dims {
                        let mut ki = k;
                        ki[i] += 2;
                        out.push((ki, v.clone()));
                    }
                } else {
                    out.push((k, v));
                }
            }
        }
    }

    pub fn pow(&self, e: u32, dims: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self, dims);
        }
        acc
    }

    /// Rewrites coefficients in place of the keys; zero results are dropped.
    pub fn map_coeffs<F>(&self, mut f: F) -> Poly
    where
        F: FnMut(&Key, &GaussRat) -> GaussRat,
    {
        Poly {
            terms: self
                .terms
                .iter()
                .filter_map(|(k, c)| {
                    let d = f(k, c);
                    (!d.is_zero()).then_some((*k, d))
                })
                .collect(),
        }
    }

    pub fn map_terms<F>(&self, f: F) -> Poly
    where
        F: FnMut(&(Key, GaussRat)) -> Option<(Key, GaussRat)>,
    {
        Poly::from_terms(self.terms.iter().filter_map(f).collect())
    }

    /// Componentwise minimum of the x-exponents (0 if all are nonnegative).
    fn x_floor(&self) -> [i8; MAX_DIMS] {
        let mut m = [0i8; MAX_DIMS];
        for (k, _) in &self.terms {
            for i in 0..MAX_DIMS {
                m[i] = m[i].min(k[i]);
            }
        }
        m
    }

    /// Exact quotient by `g` in the Laurent ring, or `None` when `g` does not
    /// divide. `g` must be free of `r` and of negative exponents, and must
    /// have no monomial factor (true for every denominator atom).
    pub fn div_exact(&self, g: &Poly) -> Option<Poly> {
        let (gk, gc) = g.lead()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let floor = self.x_floor();
        let divides = |k: &Key| {
            (0..MAX_DIMS).all(|i| k[i] - gk[i] >= floor[i]) && (R_SLOT + 1..KEY_LEN).all(|s| k[s] >= gk[s])
        };
        // Cheap rejection before building the work map.
        if !divides(&self.lead()?.0) {
            return None;
        }
        let ginv = gc.recip();
        let mut rem: BTreeMap<OrdKey, GaussRat> = self.terms.iter().map(|(k, c)| (OrdKey(*k), c.clone())).collect();
        let mut quot = Vec::new();
        while let Some((OrdKey(k), c)) = rem.pop_last() {
            if !divides(&k) {
                return None;
            }
            let qk = key_sub(&k, gk);
            let qc = &c * &ginv;
            for (tk, tc) in &g.terms[..g.len() - 1] {
                let kk = key_add(&qk, tk);
                let delta = &qc * tc;
                match rem.entry(OrdKey(kk)) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let v = e.get() - &delta;
                        if v.is_zero() {
                            e.remove();
                        } else {
                            e.insert(v);
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qk, qc));
        }
        quot.reverse();
        Some(Poly { terms: quot })
    }

    /// Renders as a sum of `coef*factor*...` terms in stored order.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let mono = render_key(k);
            let (neg, mag) = if c.is_real() && c.re.is_negative() { (true, -c) } else { (false, c.clone()) };
            if idx > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => s.push_str(&mag.to_string()),
                (false, true) => s.push_str(&mono),
                (false, false) => {
                    s.push_str(&mag.to_string());
                    s.push('*');
                    s.push_str(&mono);
                }
            }
        }
        s
    }
}

pub fn render_key(k: &Key) -> String {
    let mut parts = Vec::new();
    for (slot, &e) in k.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = if slot < MAX_DIMS {
            format!("x{}", slot + 1)
        } else if slot == R_SLOT {
            "r".to_string()
        } else {
            match Param::from_slot(slot) {
                Some(p) => p.name(),
                None => continue,
            }
        };
        if e == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{name}^{e}"));
        }
    }
    parts.join("*")
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
