//! Custom Hamiltonian source language.
//!
//! ```text
//! expr    := ['-'] term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := primary ('^' uint)?
//! primary := x<i> | p<i> | pi<i> | R<i> | Jp | Jm | J3 | r | inv(<atom>)
//!          | p/q | i | <param> | '(' expr ')'
//! ```
//!
//! Products keep their written order. Indices are 1-based in the source and
//! 0-based in the tree.

use std::fmt;

use dunkl_core::dunkl::{Dunkl, DunklError, SiteConfig, Sl2Exprs};
use dunkl_core::opalg::Expr;
use dunkl_core::ring::{Atom, GaussRat, Param, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvArg {
    X(usize),
    Atom(Atom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    /// Non-negative literal.
    Num(Rat),
    I,
    Param(Param),
    X(usize),
    P(usize),
    Pi(usize),
    R(usize),
    Jp,
    Jm,
    J3,
    Radius,
    Inv(InvArg),
    /// Signed terms; `true` marks subtraction.
    Sum(Vec<(bool, Ast)>),
    Prod(Vec<Ast>),
    Pow(Box<Ast>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("unknown identifier `{name}` at column {col}")]
    Unknown { col: usize, name: String },
    #[error("index {index} in `{name}` at column {col} is outside 1..={dims}")]
    Index { col: usize, name: String, index: usize, dims: usize },
    #[error("inv() at column {col} takes x1..xN or one of S, Kplus, Kminus, L, Qeta, not `{arg}`")]
    NotAtom { col: usize, arg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

/// Tokens with their 1-based columns.
fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c.is_ascii_digit() {
            let alpha = c.is_ascii_alphabetic();
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || alpha && chars[i].is_ascii_alphabetic()) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push((if alpha { Tok::Ident(word) } else { Tok::Int(word) }, col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::Open,
            ')' => Tok::Close,
            _ => return Err(ParseError::Syntax { col, msg: format!("unexpected character `{c}`") }),
        };
        out.push((t, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dims: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn col(&self) -> usize {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::End {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax { col: self.col(), msg: format!("expected {wanted}, found {}", self.peek()) }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let lead = *self.peek() == Tok::Minus;
        if lead {
            self.next();
        }
        let mut terms = vec![(lead, self.term()?)];
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.next();
            terms.push((neg, self.term()?));
        }
        if terms.len() == 1 && !lead {
            return Ok(terms.pop().expect("one term").1);
        }
        Ok(Ast::Sum(terms))
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.next();
            factors.push(self.factor()?);
        }
        if factors.len() == 1 {
            return Ok(factors.pop().expect("one factor"));
        }
        Ok(Ast::Prod(factors))
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let col = self.col();
        match self.next().0 {
            Tok::Int(s) => {
                let e = s
                    .parse::<u32>()
                    .map_err(|_| ParseError::Syntax { col, msg: format!("exponent `{s}` is too large") })?;
                Ok(Ast::Pow(Box::new(base), e))
            }
            t => Err(ParseError::Syntax { col, msg: format!("expected an exponent, found {t}") }),
        }
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        let col = self.col();
        match self.next().0 {
            Tok::Open => {
                let e = self.expr()?;
                self.expect(Tok::Close)?;
                Ok(e)
            }
            Tok::Int(n) => {
                let text = if *self.peek() == Tok::Slash {
                    self.next();
                    let dcol = self.col();
                    match self.next().0 {
                        Tok::Int(d) if d.bytes().any(|b| b != b'0') => format!("{n}/{d}"),
                        Tok::Int(_) => return Err(ParseError::Syntax { col: dcol, msg: "zero denominator".into() }),
                        t => return Err(ParseError::Syntax { col: dcol, msg: format!("expected a denominator, found {t}") }),
                    }
                } else {
                    n
                };
                let v = text.parse::<Rat>().map_err(|e| ParseError::Syntax { col, msg: e.to_string() })?;
                Ok(Ast::Num(v))
            }
            Tok::Ident(name) if name == "inv" => {
                self.expect(Tok::Open)?;
                let acol = self.col();
                let arg = match self.next().0 {
                    Tok::Ident(a) => a,
                    t => return Err(ParseError::NotAtom { col: acol, arg: t.to_string() }),
                };
                let inv = if let Some(a) = Atom::parse(&arg) {
                    InvArg::Atom(a)
                } else {
                    match self.indexed(&arg, acol)? {
                        Some(Ast::X(i)) => InvArg::X(i),
                        _ => return Err(ParseError::NotAtom { col: acol, arg }),
                    }
                };
                self.expect(Tok::Close)?;
                Ok(Ast::Inv(inv))
            }
            Tok::Ident(name) => self.ident(name, col),
            t => Err(ParseError::Syntax { col, msg: format!("expected an operand, found {t}") }),
        }
    }

    fn ident(&self, name: String, col: usize) -> Result<Ast, ParseError> {
        let fixed = match name.as_str() {
            "i" => Some(Ast::I),
            "r" => Some(Ast::Radius),
            "Jp" => Some(Ast::Jp),
            "Jm" => Some(Ast::Jm),
            "J3" => Some(Ast::J3),
            _ => None,
        };
        if let Some(a) = fixed {
            return Ok(a);
        }
        if let Some(a) = self.indexed(&name, col)? {
            return Ok(a);
        }
        Err(ParseError::Unknown { col, name })
    }

    /// Axis-indexed names (`x2`, `pi1`, `mu3`, ...), or `None` when the
    /// name is not of that shape.
    fn indexed(&self, name: &str, col: usize) -> Result<Option<Ast>, ParseError> {
        if let Some(p) = Param::parse(name, self.dims) {
            return Ok(Some(Ast::Param(p)));
        }
        let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
        let (head, digits) = name.split_at(split);
        if digits.is_empty() {
            return Ok(None);
        }
        let make: fn(usize) -> Ast = match head {
            "x" => Ast::X,
            "p" => Ast::P,
            "pi" => Ast::Pi,
            "R" => Ast::R,
            "mu" => |i| Ast::Param(Param::Mu(i)),
            "beta" => |i| Ast::Param(Param::Beta(i)),
            "gamma" => |i| Ast::Param(Param::Gamma(i)),
            _ => return Ok(None),
        };
        let out_of_range = || ParseError::Index { col, name: name.to_string(), index: digits.parse().unwrap_or(usize::MAX), dims: self.dims };
        let index: usize = digits.parse().map_err(|_| out_of_range())?;
        if index == 0 || index > self.dims || digits.starts_with('0') {
            return Err(out_of_range());
        }
        Ok(Some(make(index - 1)))
    }
}

/// Parses `src` for `dims` axes.
pub fn parse(src: &str, dims: usize) -> Result<Ast, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0, dims };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

fn inv_name(a: &InvArg) -> String {
    match a {
        InvArg::X(i) => format!("x{}", i + 1),
        InvArg::Atom(a) => a.name().to_string(),
    }
}

fn write_in(f: &mut fmt::Formatter<'_>, a: &Ast, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

/// Canonical source form; parsing it gives back the same tree.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(v) => write!(f, "{v}"),
            Ast::I => f.write_str("i"),
            Ast::Param(p) => f.write_str(&p.name()),
            Ast::X(i) => write!(f, "x{}", i + 1),
            Ast::P(i) => write!(f, "p{}", i + 1),
            Ast::Pi(i) => write!(f, "pi{}", i + 1),
            Ast::R(i) => write!(f, "R{}", i + 1),
            Ast::Jp => f.write_str("Jp"),
            Ast::Jm => f.write_str("Jm"),
            Ast::J3 => f.write_str("J3"),
            Ast::Radius => f.write_str("r"),
            Ast::Inv(a) => write!(f, "inv({})", inv_name(a)),
            Ast::Sum(terms) => {
                for (k, (neg, t)) in terms.iter().enumerate() {
                    match (k, neg) {
                        (0, true) => f.write_str("-")?,
                        (0, false) => {}
                        (_, true) => f.write_str(" - ")?,
                        (_, false) => f.write_str(" + ")?,
                    }
                    write_in(f, t, matches!(t, Ast::Sum(_)))?;
                }
                Ok(())
            }
            Ast::Prod(factors) => {
                for (k, t) in factors.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    write_in(f, t, matches!(t, Ast::Sum(_) | Ast::Prod(_)))?;
                }
                Ok(())
            }
            Ast::Pow(b, e) => {
                write_in(f, b, matches!(**b, Ast::Sum(_) | Ast::Prod(_) | Ast::Pow(..)))?;
                write!(f, "^{e}")
            }
        }
    }
}

impl Ast {
    fn any(&self, pred: &dyn Fn(&Ast) -> bool) -> bool {
        pred(self)
            || match self {
                Ast::Sum(t) => t.iter().any(|(_, a)| a.any(pred)),
                Ast::Prod(t) => t.iter().any(|a| a.any(pred)),
                Ast::Pow(b, _) => b.any(pred),
                _ => false,
            }
    }

    /// Realization the expression needs: centrifugal terms on every site
    /// (so `Jp` is the general one), `|x|` when `r` occurs, and each
    /// deformation whose parameter or atom occurs.
    pub fn site_config(&self, dims: usize) -> SiteConfig {
        let mut cfg = SiteConfig::new(dims).with_centrifugal();
        cfg.radial = self.any(&|a| *a == Ast::Radius);
        let uses = |p: Param, atoms: &[Atom]| {
            self.any(&|a| match a {
                Ast::Param(q) => *q == p,
                Ast::Inv(InvArg::Atom(x)) => atoms.contains(x),
                _ => false,
            })
        };
        cfg.kappa = uses(Param::Kappa, &[Atom::KPlus, Atom::KMinus]);
        cfg.lambda = uses(Param::Lambda, &[Atom::L]);
        cfg.eta = uses(Param::Eta, &[Atom::QEta]);
        cfg
    }

    /// The operator this tree denotes in the realization `d`.
    pub fn to_expr(&self, d: &Dunkl) -> Result<Expr, DunklError> {
        let mut sl2 = None;
        self.build(d, &mut sl2)
    }

    fn build(&self, d: &Dunkl, sl2: &mut Option<Sl2Exprs>) -> Result<Expr, DunklError> {
        let mut gen = |pick: fn(&Sl2Exprs) -> &Expr| -> Result<Expr, DunklError> {
            if sl2.is_none() {
                *sl2 = Some(d.sl2(0..d.dims())?);
            }
            Ok(pick(sl2.as_ref().expect("just set")).clone())
        };
        Ok(match self {
            Ast::Num(v) => d.constant(GaussRat::real(v.clone())),
            Ast::I => d.constant(GaussRat::I),
            Ast::Param(p) => d.param(*p),
            Ast::X(i) => d.x(*i),
            Ast::P(i) => d.p(*i),
            Ast::Pi(i) => d.pi(*i),
            Ast::R(i) => d.refl(*i),
            Ast::Jp => gen(|t| &t.j_plus)?,
            Ast::Jm => gen(|t| &t.j_minus)?,
            Ast::J3 => gen(|t| &t.j3)?,
            Ast::Radius => d.radius()?,
            Ast::Inv(InvArg::X(i)) => d.x_pow(*i, -1),
            Ast::Inv(InvArg::Atom(a)) => d.atom_inv(*a, 1),
            Ast::Sum(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                for (neg, t) in terms {
                    let e = t.build(d, sl2)?;
                    out.push(if *neg { -e } else { e });
                }
                Expr::sum(out)
            }
            Ast::Prod(factors) => {
                let mut out = Vec::with_capacity(factors.len());
                for t in factors {
                    out.push(t.build(d, sl2)?);
                }
                Expr::prod(out)
            }
            Ast::Pow(b, e) => b.build(d, sl2)?.pow(*e),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn oscillator_source() {
        let a = parse("1/2 * Jp + omega^2 * 1/2 * Jm", 2).unwrap();
        let half = Ast::Num(Rat::new(1, 2));
        let want = Ast::Sum(vec![
            (false, Ast::Prod(vec![half.clone(), Ast::Jp])),
            (false, Ast::Prod(vec![Ast::Pow(Box::new(Ast::Param(Param::Omega)), 2), half, Ast::Jm])),
        ]);
        assert_eq!(a, want);
        assert_eq!(a.to_string(), "1/2*Jp + omega^2*1/2*Jm");
    }

    #[test]
    fn simple_products() {
        assert_eq!(parse("pi1*pi1", 1).unwrap(), Ast::Prod(vec![Ast::Pi(0), Ast::Pi(0)]));
        assert_eq!(parse("p2 * x1", 2).unwrap(), Ast::Prod(vec![Ast::P(1), Ast::X(0)]));
        assert_eq!(parse("((R1))", 1).unwrap(), Ast::R(0));
        assert_eq!(parse("-mu1", 1).unwrap(), Ast::Sum(vec![(true, Ast::Param(Param::Mu(0)))]));
        assert_eq!(parse("inv(Kplus)", 1).unwrap(), Ast::Inv(InvArg::Atom(Atom::KPlus)));
        assert_eq!(parse("6/4", 1).unwrap(), Ast::Num(Rat::new(3, 2)));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("inv(x3)", 2), Err(ParseError::Index { index: 3, dims: 2, col: 5, .. })));
        assert!(matches!(parse("x0", 2), Err(ParseError::Index { .. })));
        assert!(matches!(parse("mu4", 3), Err(ParseError::Index { .. })));
        assert!(matches!(parse("inv(p1)", 2), Err(ParseError::NotAtom { col: 5, .. })));
        assert!(matches!(parse("inv(2)", 2), Err(ParseError::NotAtom { .. })));
        assert!(matches!(parse("foo + x1", 2), Err(ParseError::Unknown { col: 1, .. })));
        assert_eq!(parse("x1 + * x2", 2), Err(ParseError::Syntax { col: 6, msg: "expected an operand, found `*`".into() }));
        assert!(matches!(parse("(x1", 2), Err(ParseError::Syntax { col: 4, .. })));
        assert!(matches!(parse("x1 x2", 2), Err(ParseError::Syntax { col: 4, .. })));
        assert!(matches!(parse("1/0", 2), Err(ParseError::Syntax { col: 3, .. })));
        assert!(matches!(parse("x1 / 2", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1^y", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1 % 2", 2), Err(ParseError::Syntax { col: 4, .. })));
        assert!(matches!(parse("", 2), Err(ParseError::Syntax { col: 1, .. })));
    }

    #[test]
    fn config_follows_symbols() {
        let c = parse("Jp + k*r*inv(S)", 3).unwrap().site_config(3);
        assert!(c.radial && !c.kappa && c.beta[2]);
        let c = parse("Jp*inv(L) + lambda", 2).unwrap().site_config(2);
        assert!(c.lambda && !c.radial && !c.eta);
        assert!(parse("inv(Qeta)", 2).unwrap().site_config(2).eta);
    }

    #[test]
    fn builds_operators() {
        let a = parse("1/2 * Jp + omega^2 * 1/2 * Jm", 2).unwrap();
        let d = Dunkl::symbolic(a.site_config(2)).unwrap();
        let h = d.normalize(&a.to_expr(&d).unwrap()).unwrap();
        let by_hand = (d.pi_sq() + d.centrifugal(0..2)).scale_c(GaussRat::frac(1, 2))
            + (d.param(Param::Omega) * d.param(Param::Omega) * d.x_sq()).scale_c(GaussRat::frac(1, 2));
        assert!(h.sub(&d.normalize(&by_hand).unwrap()).unwrap().is_zero());
        let b = parse("i*p1 - hbar*pi1*x1*inv(x1) + (x1*inv(x1))^0", 1).unwrap();
        let d = Dunkl::symbolic(b.site_config(1)).unwrap();
        let op = d.normalize(&b.to_expr(&d).unwrap()).unwrap();
        // i p1 = hbar d1 and hbar pi1 = -i hbar^2 D1.
        let hbar = d.param(Param::Hbar);
        let want = &hbar * &Expr::del(0) + (&hbar * &hbar * d.dunkl_derivative(0)).scale_c(GaussRat::I) + d.constant(GaussRat::ONE);
        assert!(op.sub(&d.normalize(&want).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn radius_needs_radial_ring() {
        let a = parse("r", 2).unwrap();
        let d = Dunkl::symbolic(SiteConfig::new(2)).unwrap();
        assert!(a.to_expr(&d).is_err());
    }

    fn leaf(dims: usize) -> impl Strategy<Value = Ast> {
        let i = 0..dims;
        prop_oneof![
            (0i64..50, 1i64..9).prop_map(|(n, d)| Ast::Num(Rat::new(n, d))),
            Just(Ast::I),
            Just(Ast::Jp),
            Just(Ast::Jm),
            Just(Ast::J3),
            Just(Ast::Radius),
            prop::sample::select(vec![Param::Hbar, Param::Omega, Param::K, Param::Kappa, Param::Lambda, Param::Eta]).prop_map(Ast::Param),
            i.clone().prop_map(|i| Ast::Param(Param::Mu(i))),
            i.clone().prop_map(Ast::X),
            i.clone().prop_map(Ast::P),
            i.clone().prop_map(Ast::Pi),
            i.clone().prop_map(Ast::R),
            i.prop_map(|i| Ast::Inv(InvArg::X(i))),
            prop::sample::select(Atom::ALL.to_vec()).prop_map(|a| Ast::Inv(InvArg::Atom(a))),
        ]
    }

    fn tree(dims: usize) -> impl Strategy<Value = Ast> {
        leaf(dims).prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec((any::<bool>(), inner.clone()), 1..4).prop_filter_map("single plain term", |t| {
                    (t.len() > 1 || t[0].0).then_some(Ast::Sum(t))
                }),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Ast::Prod),
                (inner, 0u32..5).prop_map(|(b, e)| Ast::Pow(Box::new(b), e)),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(a in tree(3)) {
            let text = a.to_string();
            let back = parse(&text, 3).unwrap();
            prop_assert_eq!(&back, &a, "{}", text);
            prop_assert_eq!(parse(&back.to_string(), 3).unwrap(), back);
        }
    }
}
