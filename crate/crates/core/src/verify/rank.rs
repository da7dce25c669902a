//! Functional independence of reflection-free classical symbols, via the
//! exact rank of their Jacobian at a rational phase-space point.

use std::sync::Arc;
use std::time::Instant;

use crate::opalg::{Algebra, Expr, NormalOp, OpError};
use crate::ring::{Atom, FieldElem, GaussRat, Param, Poly, Rat, Ring, R_SLOT};

use super::{sample_rat, stream, CheckResult, Status, Witness};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RankError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("operator still contains reflections; set mu = gamma = 0 first")]
    Reflections,
    #[error("parameter {0} is symbolic; classical symbols need numeric values")]
    Symbolic(Param),
    #[error("no admissible point found")]
    NoPoint,
}

/// Rational point of phase space. `x` lies on a sphere of rational
/// radius `r`, so `|x|` stays rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePoint {
    pub x: Vec<Rat>,
    pub p: Vec<Rat>,
    pub r: Rat,
}

impl PhasePoint {
    /// Inverse stereographic image of a random rational vector, scaled by
    /// a random radius; coordinates are all nonzero.
    pub fn random(dims: usize, rng: &mut rand_chacha::ChaCha8Rng) -> PhasePoint {
        loop {
            let u: Vec<Rat> = (0..dims - 1).map(|_| sample_rat(rng)).collect();
            let s = u.iter().fold(Rat::ZERO, |acc, v| &acc + &(v * v));
            let rho = sample_rat(rng);
            let den = &Rat::ONE + &s;
            let scale = &rho / &den;
            let mut x: Vec<Rat> = u.iter().map(|v| &(&Rat::int(2) * v) * &scale).collect();
            x.push(&(&Rat::ONE - &s) * &scale);
            if x.iter().any(Rat::is_zero) {
                continue;
            }
            let p = (0..dims).map(|_| sample_rat(rng)).collect();
            return PhasePoint { x, p, r: rho.abs() };
        }
    }
}

/// Classical symbol of a reflection-free operator: the `hbar^|b|` part of
/// each coefficient of `d^b`, times `i^|b| p^b`.
struct Symbol {
    terms: Vec<([u8; crate::ring::MAX_DIMS], FieldElem)>,
}

fn symbol(op: &NormalOp) -> Result<Symbol, RankError> {
    let ring = op.ring();
    let hslot = Param::Hbar.slot();
    let mut terms = Vec::new();
    for (k, f) in op.terms() {
        if k.mask != 0 {
            return Err(RankError::Reflections);
        }
        let order = k.order() as i8;
        let kept: Vec<_> = f
            .num()
            .terms()
            .iter()
            .filter(|(key, _)| key[hslot] == order)
            .map(|(key, c)| {
                let mut key = *key;
                key[hslot] = 0;
                (key, c * &GaussRat::I.pow(order as u32))
            })
            .collect();
        if kept.is_empty() {
            continue;
        }
        terms.push((k.deriv, ring.elem(Poly::from_terms(kept), *f.den())));
    }
    Ok(Symbol { terms })
}

fn rat_pow(v: &Rat, e: i8) -> Rat {
    let p = v.pow(e.unsigned_abs() as u32);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Value at the point; `None` on a vanishing denominator.
fn eval(ring: &Ring, f: &FieldElem, pt: &PhasePoint) -> Result<Option<GaussRat>, RankError> {
    let n = ring.dims();
    let eval_poly = |p: &Poly| -> Result<GaussRat, RankError> {
        let mut acc = GaussRat::ZERO;
        for (key, c) in p.terms() {
            if let Some(s) = (R_SLOT + 1..key.len()).find(|&s| key[s] != 0) {
                return Err(RankError::Symbolic(Param::from_slot(s).expect("param slot")));
            }
            let mut m = Rat::ONE;
            for i in 0..n {
                m = &m * &rat_pow(&pt.x[i], key[i]);
            }
            m = &m * &rat_pow(&pt.r, key[R_SLOT]);
            acc = &acc + &(c * &GaussRat::real(m));
        }
        Ok(acc)
    };
    let mut den = GaussRat::ONE;
    for a in Atom::ALL {
        let e = f.den()[a.index()];
        if e > 0 {
            den = &den * &eval_poly(ring.atom_poly(a))?.pow(e as u32);
        }
    }
    if den.is_zero() {
        return Ok(None);
    }
    Ok(Some(&eval_poly(f.num())? / &den))
}

fn p_pow(p: &[Rat], beta: &[u8]) -> Rat {
    p.iter().zip(beta).fold(Rat::ONE, |acc, (v, &b)| &acc * &v.pow(b as u32))
}

/// Gradient in `(x, p)`; `None` when the point hits a pole.
fn gradient(ring: &Ring, s: &Symbol, pt: &PhasePoint) -> Result<Option<Vec<GaussRat>>, RankError> {
    let n = ring.dims();
    let mut g = vec![GaussRat::ZERO; 2 * n];
    for (beta, c) in &s.terms {
        let Some(cv) = eval(ring, c, pt)? else { return Ok(None) };
        let pb = GaussRat::real(p_pow(&pt.p, &beta[..n]));
        for k in 0..n {
            let dc = ring.partial(k, c).map_err(OpError::from)?;
            let Some(dv) = eval(ring, &dc, pt)? else { return Ok(None) };
            g[k] = &g[k] + &(&dv * &pb);
            if beta[k] > 0 {
                let mut b = *beta;
                b[k] -= 1;
                let dp = GaussRat::real(&Rat::int(beta[k] as i64) * &p_pow(&pt.p, &b[..n]));
                g[n + k] = &g[n + k] + &(&cv * &dp);
            }
        }
    }
    Ok(Some(g))
}

fn rank(mut rows: Vec<Vec<GaussRat>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, piv);
        let inv = rows[r][c].recip();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] * &inv;
                for j in c..cols {
                    let t = &f * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Exact Jacobian rank of the classical symbols of `ops` at `point`.
pub fn independence_rank(ops: &[NormalOp], point: &PhasePoint) -> Result<Option<usize>, RankError> {
    let Some(ring) = ops.first().map(NormalOp::ring) else { return Ok(Some(0)) };
    let mut rows = Vec::new();
    for op in ops {
        let Some(g) = gradient(ring, &symbol(op)?, point)? else { return Ok(None) };
        rows.push(g);
    }
    Ok(Some(rank(rows)))
}

/// Rank check at one seeded random point.
pub struct RankCheck {
    pub label: String,
    pub paper_ref: String,
    pub alg: Arc<Algebra>,
    pub functions: Vec<Expr>,
    pub expected: usize,
    pub seed: u64,
    pub stream: u64,
}

impl RankCheck {
    pub fn run(&self) -> CheckResult {
        let start = Instant::now();
        let done = |status, witness| CheckResult::new(&self.label, &self.paper_ref, status, start, witness);
        let ops: Result<Vec<NormalOp>, OpError> =
            self.functions.iter().map(|e| Ok((*self.alg.normalize(e)?).clone())).collect();
        let ops = match ops {
            Ok(o) => o,
            Err(e) => return done(Status::Skipped, Some(Witness::Diagnostic { message: e.to_string() })),
        };
        let mut rng = stream(self.seed, 1 << 40 | self.stream);
        for _ in 0..64 {
            let pt = PhasePoint::random(self.alg.ring().dims(), &mut rng);
            match independence_rank(&ops, &pt) {
                Ok(None) => continue,
                Ok(Some(r)) if r == self.expected => return done(Status::Pass, None),
                Ok(Some(r)) => {
                    let point = pt.x.iter().chain(&pt.p).map(Rat::to_string).collect();
                    return done(Status::Fail, Some(Witness::Rank { rank: r, expected: self.expected, point }));
                }
                Err(e) => return done(Status::Skipped, Some(Witness::Diagnostic { message: e.to_string() })),
            }
        }
        done(Status::Skipped, Some(Witness::Diagnostic { message: RankError::NoPoint.to_string() }))
    }
}
