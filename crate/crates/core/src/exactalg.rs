//! Exact arithmetic: big rationals and Laurent polynomials in `q^(1/2)`, `X`, `Y`.
//!
//! Every generating function in the crate is a [`LaurentPoly`]. The exponent of
//! `q` is stored in half-units (`halfq = 2 * deg_q`) so that the few formulas
//! with half-integer `q` exponents need no separate ring. Terms live in a
//! `BTreeMap` keyed by [`Monomial`], which fixes the canonical order once.
//!
//! Ratios are carried as [`RationalFunction`] values and compared by
//! cross-multiplication; nothing in this module ever divides one polynomial
//! by another.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Build a rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Errors raised by evaluation and by the text parser.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error("cannot raise zero to the negative power {0}")]
    ZeroToNegativePower(i64),
    #[error("q = {0} is not the square of a rational, but half-integer q exponents are present")]
    NonSquareQ(String),
    #[error("zero denominator in rational function")]
    ZeroDenominator,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// A monomial `q^(halfq/2) * X^xe * Y^ye`.
///
/// The derived ordering is lexicographic on `(halfq, xe, ye)`; canonical text
/// and JSON emit terms in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub halfq: i64,
    pub xe: i64,
    pub ye: i64,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { halfq: 0, xe: 0, ye: 0 };

    pub fn new(halfq: i64, xe: i64, ye: i64) -> Self {
        Monomial { halfq, xe, ye }
    }

    /// `q^k` for an integer `k`.
    pub fn q(k: i64) -> Self {
        Monomial::new(2 * k, 0, 0)
    }

    pub fn is_one(&self) -> bool {
        *self == Monomial::ONE
    }

    pub fn times(self, other: Monomial) -> Monomial {
        Monomial::new(self.halfq + other.halfq, self.xe + other.xe, self.ye + other.ye)
    }

    pub fn pow(self, k: i64) -> Monomial {
        Monomial::new(self.halfq * k, self.xe * k, self.ye * k)
    }

    /// Exchange the roles of `X` and `Y`.
    pub fn swap_xy(self) -> Monomial {
        Monomial::new(self.halfq, self.ye, self.xe)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.halfq != 0 {
            parts.push(if self.halfq % 2 == 0 { power("q", self.halfq / 2) } else { format!("q^({}/2)", self.halfq) });
        }
        if self.xe != 0 {
            parts.push(power("X", self.xe));
        }
        if self.ye != 0 {
            parts.push(power("Y", self.ye));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

fn power(var: &str, e: i64) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

/// Exact Laurent polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        LaurentPoly::term(c, Monomial::ONE)
    }

    pub fn from_int(c: i64) -> Self {
        LaurentPoly::constant(Rational::from_integer(c.into()))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        LaurentPoly::term(Rational::one(), m)
    }

    /// `q^k` for an integer `k`.
    pub fn q_pow(k: i64) -> Self {
        LaurentPoly::monomial(Monomial::q(k))
    }

    pub fn x() -> Self {
        LaurentPoly::monomial(Monomial::new(0, 1, 0))
    }

    pub fn y() -> Self {
        LaurentPoly::monomial(Monomial::new(0, 0, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::ONE).is_some_and(|c| c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (ascending monomial) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    /// Multiply every term by the monomial `m`.
    pub fn shift(&self, m: Monomial) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(k, v)| (k.times(m), v.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        let mut acc = LaurentPoly::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitute `q -> q^k` (with `k` possibly negative); `X` and `Y` are untouched.
    pub fn subs_q_power(&self, k: i64) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(Monomial::new(m.halfq * k, m.xe, m.ye), c.clone());
        }
        out
    }

    pub fn swap_xy(&self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(m, v)| (m.swap_xy(), v.clone())).collect() }
    }

    /// Specialize `X = Y = 1`.
    pub fn drop_xy(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(Monomial::new(m.halfq, 0, 0), c.clone());
        }
        out
    }

    /// Sum of all coefficients, i.e. the value at `q = X = Y = 1`.
    pub fn coefficient_sum(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |a, c| a + c)
    }

    /// Exact substitution. Half-integer `q` exponents require `q_val` to be a rational square.
    pub fn eval(&self, q_val: &Rational, x_val: &Rational, y_val: &Rational) -> Result<Rational, AlgError> {
        let has_half = self.terms.keys().any(|m| m.halfq % 2 != 0);
        let root = if has_half {
            Some(rational_sqrt(q_val).ok_or_else(|| AlgError::NonSquareQ(q_val.to_string()))?)
        } else {
            None
        };
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let qpart = match &root {
                Some(r) => rpow(r, m.halfq)?,
                None => rpow(q_val, m.halfq / 2)?,
            };
            acc += c * qpart * rpow(x_val, m.xe)? * rpow(y_val, m.ye)?;
        }
        Ok(acc)
    }

    pub fn leading(&self) -> Option<(Monomial, &Rational)> {
        self.terms.iter().next_back().map(|(m, c)| (*m, c))
    }

    pub fn trailing(&self) -> Option<(Monomial, &Rational)> {
        self.terms.iter().next().map(|(m, c)| (*m, c))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    ///
    /// Only used to expand closed forms that are known to be polynomials
    /// (q-factorial quotients and Vandermonde-type ratios). Identity checks
    /// never call this; they cross-multiply instead.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<LaurentPoly> {
        let (dl, dlc) = d.leading()?;
        let (dt, _) = d.trailing()?;
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        let inv = |m: Monomial| Monomial::new(-m.halfq, -m.xe, -m.ye);
        // In the lex order every quotient term must lie at or above this floor.
        let floor = self.trailing()?.0.times(inv(dt));
        let dlc_inv = dlc.recip();
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero();
        while let Some((rl, rc)) = rem.leading() {
            let m = rl.times(inv(dl));
            if m < floor {
                return None;
            }
            let c = rc * &dlc_inv;
            rem = &rem - &d.shift(m).scale(&c);
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Canonical JSON form: a list of `{halfq, xe, ye, num, den}` records.
    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(m, c)| TermJson {
                halfq: m.halfq,
                xe: m.xe,
                ye: m.ye,
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }

    pub fn from_json_terms(terms: &[TermJson]) -> Result<Self, AlgError> {
        let mut p = LaurentPoly::zero();
        for t in terms {
            let num: BigInt = t.num.parse().map_err(|_| AlgError::Parse(t.num.clone()))?;
            let den: BigInt = t.den.parse().map_err(|_| AlgError::Parse(t.den.clone()))?;
            if den.is_zero() {
                return Err(AlgError::ZeroDenominator);
            }
            p.add_term(Monomial::new(t.halfq, t.xe, t.ye), Rational::new(num, den));
        }
        Ok(p)
    }
}

/// One term of the JSON polynomial encoding. Big integers travel as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub halfq: i64,
    pub xe: i64,
    pub ye: i64,
    pub num: String,
    pub den: String,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        LaurentPoly::from_json_terms(&terms).map_err(serde::de::Error::custom)
    }
}

fn rpow(base: &Rational, e: i64) -> Result<Rational, AlgError> {
    if e == 0 {
        return Ok(Rational::one());
    }
    if base.is_zero() {
        return if e > 0 { Ok(Rational::zero()) } else { Err(AlgError::ZeroToNegativePower(e)) };
    }
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    Ok(if e > 0 { p } else { p.recip() })
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return rhs.clone();
        }
        let mut out = LaurentPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.times(*m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl MulAssign<&LaurentPoly> for LaurentPoly {
    fn mul_assign(&mut self, rhs: &LaurentPoly) {
        *self = &*self * rhs;
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        iter.fold(LaurentPoly::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for LaurentPoly {
    fn product<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        iter.fold(LaurentPoly::one(), |a, b| a * b)
    }
}

fn fmt_coeff(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

fn fmt_term(c: &Rational, m: &Monomial) -> String {
    if m.is_one() {
        return fmt_coeff(c);
    }
    if c.is_one() {
        m.to_string()
    } else if (-c).is_one() {
        format!("-{m}")
    } else {
        format!("{}*{}", fmt_coeff(c), m)
    }
}

/// Canonical text: terms in ascending monomial order, e.g. `1 - 2*q + (3/2)*q^(5/2)*X^2*Y^-1`.
///
/// The first term carries its own sign; later terms are joined by ` + ` or ` - `.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx == 0 {
                write!(f, "{}", fmt_term(c, m))?;
            } else if c.is_negative() {
                write!(f, " - {}", fmt_term(&-c, m))?;
            } else {
                write!(f, " + {}", fmt_term(c, m))?;
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = AlgError;

    /// Parses the canonical text form (and reasonable hand-written variants of it).
    fn from_str(s: &str) -> Result<Self, AlgError> {
        Parser::new(s).parse_poly()
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, chars: src.chars().collect(), pos: 0 }
    }

    fn err(&self, what: &str) -> AlgError {
        AlgError::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt, AlgError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.chars.get(self.pos), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("expected integer"))
    }

    fn parse_poly(&mut self) -> Result<LaurentPoly, AlgError> {
        let mut out = LaurentPoly::zero();
        let mut negate = self.eat('-');
        loop {
            let (c, m) = self.parse_term()?;
            out.add_term(m, if negate { -c } else { c });
            match self.peek() {
                None => break,
                Some('+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some('-') => {
                    self.pos += 1;
                    negate = true;
                }
                Some(_) => return Err(self.err("expected '+' or '-'")),
            }
        }
        Ok(out)
    }

    fn parse_term(&mut self) -> Result<(Rational, Monomial), AlgError> {
        let mut coeff = Rational::one();
        let mut mono = Monomial::ONE;
        loop {
            match self.peek() {
                Some('(') => {
                    self.pos += 1;
                    let n = self.integer()?;
                    let d = if self.eat('/') { self.integer()? } else { BigInt::one() };
                    if d.is_zero() {
                        return Err(AlgError::ZeroDenominator);
                    }
                    if !self.eat(')') {
                        return Err(self.err("expected ')'"));
                    }
                    coeff *= Rational::new(n, d);
                }
                Some(c) if c.is_ascii_digit() => {
                    let n = self.integer()?;
                    coeff *= Rational::from_integer(n);
                }
                Some(v @ ('q' | 'X' | 'Y')) => {
                    self.pos += 1;
                    let half = if self.eat('^') {
                        if self.eat('(') {
                            let n = self.integer()?;
                            let d = if self.eat('/') { self.integer()? } else { BigInt::one() };
                            if !self.eat(')') {
                                return Err(self.err("expected ')'"));
                            }
                            let two = BigInt::from(2);
                            if d == two {
                                (n, true)
                            } else if d.is_one() {
                                (n, false)
                            } else {
                                return Err(self.err("exponent denominator must be 1 or 2"));
                            }
                        } else {
                            (self.integer()?, false)
                        }
                    } else {
                        (BigInt::one(), false)
                    };
                    let e: i64 = i64::try_from(&half.0).map_err(|_| self.err("exponent too large"))?;
                    mono = match v {
                        'q' if half.1 => mono.times(Monomial::new(e, 0, 0)),
                        'q' => mono.times(Monomial::new(2 * e, 0, 0)),
                        'X' if !half.1 => mono.times(Monomial::new(0, e, 0)),
                        'Y' if !half.1 => mono.times(Monomial::new(0, 0, e)),
                        _ => return Err(self.err("half exponents are only allowed on q")),
                    };
                }
                _ => return Err(self.err("expected coefficient or variable")),
            }
            if !self.eat('*') {
                break;
            }
        }
        Ok((coeff, mono))
    }
}

/// A quotient `num / den` of Laurent polynomials, kept unreduced.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: LaurentPoly,
    pub den: LaurentPoly,
}

impl RationalFunction {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self, AlgError> {
        if den.is_zero() {
            return Err(AlgError::ZeroDenominator);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn one() -> Self {
        RationalFunction::from_poly(LaurentPoly::one())
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        RationalFunction { num: p, den: LaurentPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Reciprocal; `None` when the value is zero.
    pub fn recip(&self) -> Option<Self> {
        if self.num.is_zero() {
            None
        } else {
            Some(RationalFunction { num: self.den.clone(), den: self.num.clone() })
        }
    }

    /// Integer power; negative exponents need a nonzero value.
    pub fn powi(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Some(RationalFunction { num: base.num.pow(e), den: base.den.pow(e) })
    }

    pub fn mul_poly(&self, p: &LaurentPoly) -> Self {
        RationalFunction { num: &self.num * p, den: self.den.clone() }
    }

    pub fn div_poly(&self, p: &LaurentPoly) -> Option<Self> {
        if p.is_zero() {
            None
        } else {
            Some(RationalFunction { num: self.num.clone(), den: &self.den * p })
        }
    }

    /// Returns the polynomial when the denominator is a single monomial term.
    pub fn as_laurent(&self) -> Option<LaurentPoly> {
        if self.den.len() != 1 {
            return None;
        }
        let (m, c) = self.den.terms().next().map(|(m, c)| (*m, c.clone()))?;
        let inv = Monomial::new(-m.halfq, -m.xe, -m.ye);
        Some(self.num.shift(inv).scale(&c.recip()))
    }

    /// Expand to a polynomial when the denominator divides the numerator exactly.
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        self.as_laurent().or_else(|| self.num.div_exact(&self.den))
    }

    pub fn eval(&self, q: &Rational, x: &Rational, y: &Rational) -> Result<Rational, AlgError> {
        let d = self.den.eval(q, x, y)?;
        if d.is_zero() {
            return Err(AlgError::ZeroDenominator);
        }
        Ok(self.num.eval(q, x, y)? / d)
    }
}

impl PartialEq for RationalFunction {
    /// Cross-multiplication: `a/b == c/d` iff `a*d == c*b`.
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction { num: &self.num * &rhs.num, den: &self.den * &rhs.den }
    }
}

impl Mul for RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: RationalFunction) -> RationalFunction {
        &self * &rhs
    }
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction { num: &self.num + &rhs.num, den: self.den.clone() };
        }
        RationalFunction { num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den), den: &self.den * &rhs.den }
    }
}

impl std::iter::Product for RationalFunction {
    fn product<I: Iterator<Item = RationalFunction>>(iter: I) -> Self {
        iter.fold(RationalFunction::one(), |a, b| a * b)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.as_laurent() {
            return write!(f, "{p}");
        }
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// JSON form of a rational function: `{num: [...], den: [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalFunctionJson {
    pub num: LaurentPoly,
    pub den: LaurentPoly,
}

impl Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RationalFunctionJson { num: self.num.clone(), den: self.den.clone() }.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn addition_cancels() {
        assert_eq!(&(&LaurentPoly::x() + &LaurentPoly::y()) + &(&LaurentPoly::x() - &LaurentPoly::y()), p("2*X"));
        assert_eq!(&LaurentPoly::zero() + &p("q + X"), p("q + X"));
        assert_eq!(&p("q + q^-1") + &p("q^-1"), p("q + 2*q^-1"));
    }

    #[test]
    fn products() {
        assert_eq!(&p("1 + q") * &p("1 - q"), p("1 - q^2"));
        let h = p("(1/2)*X + (1/2)*Y");
        assert_eq!(&h * &h, p("(1/4)*X^2 + (1/2)*X*Y + (1/4)*Y^2"));
        assert_eq!(&p("q^(1/2)") * &p("q^(1/2)"), p("q"));
        assert_eq!(p("2*(1/2)"), LaurentPoly::one());
    }

    #[test]
    fn canonical_text_order_and_signs() {
        let poly = p("1 + (-3/2)*q^(5/2)*X^2*Y^-1");
        assert_eq!(poly.to_string(), "1 - (3/2)*q^(5/2)*X^2*Y^-1");
        assert_eq!(p("(-3/2)*q^(5/2)*X^2*Y^-1").to_string(), "(-3/2)*q^(5/2)*X^2*Y^-1");
        assert_eq!(p("q + 1").to_string(), "1 + q");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(p("-q^-1 - 2").to_string(), "-q^-1 - 2");
    }

    #[test]
    fn eval_rules() {
        let w = p("(1/2)*q*X + (1/2)*q^-1*Y");
        let one = Rational::one();
        assert_eq!(w.eval(&one, &one, &one).unwrap(), one);
        assert!(p("q^(1/2)").eval(&rat(2, 1), &one, &one).is_err());
        assert_eq!(p("q^(1/2)").eval(&rat(9, 4), &one, &one).unwrap(), rat(3, 2));
        assert_eq!(p("q^-1").eval(&Rational::zero(), &one, &one), Err(AlgError::ZeroToNegativePower(-1)));
    }

    #[test]
    fn rational_function_equality() {
        let f = RationalFunction::new(p("1 - q^2"), p("1 - q")).unwrap();
        let g = RationalFunction::from_poly(p("1 + q"));
        assert_eq!(f, g);
        assert_eq!(f.to_string(), "(1 - q^2) / (1 - q)");
        assert!(RationalFunction::new(p("1"), LaurentPoly::zero()).is_err());
    }

    #[test]
    fn exact_division() {
        assert_eq!(p("1 - q^3").div_exact(&p("1 - q")), Some(p("1 + q + q^2")));
        assert_eq!(p("X^2 - Y^2").div_exact(&p("X + Y")), Some(p("X - Y")));
        assert_eq!(p("1 + q^2").div_exact(&p("1 + q")), None);
        assert_eq!(p("q^-3 + q^-1").div_exact(&p("q^-1")), Some(p("q^-2 + 1")));
    }

    #[test]
    fn json_round_trip() {
        let poly = p("(-3/2)*q^(5/2)*X^2*Y^-1 + 1");
        let s = serde_json::to_string(&poly).unwrap();
        assert_eq!(
            s,
            r#"[{"halfq":0,"xe":0,"ye":0,"num":"1","den":"1"},{"halfq":5,"xe":2,"ye":-1,"num":"-3","den":"2"}]"#
        );
        let back: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, poly);
    }
}
