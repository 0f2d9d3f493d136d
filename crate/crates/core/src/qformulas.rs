//! Closed-form product formulas.
//!
//! The Pochhammer symbol follows the plus-sign convention
//! `(c; q)_n = (1 + c)(1 + c q) ... (1 + c q^(n-1))`; the formulas pass
//! negated arguments to recover the usual `1 - c q^k` factors. Negative
//! lengths use `(c; q)_(-k) = prod_{j=1..k} (1 + c q^(-j))^(-1)`, which keeps
//! `(c; q)_(a+b) = (c; q)_a (c q^a; q)_b` valid for all integers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{rat, LaurentPoly, Monomial, Rational, RationalFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("dent positions {0:?} are not strictly increasing")]
    NotIncreasing(Vec<i64>),
    #[error("dent position {pos} is outside 1..={max}")]
    OutOfRange { pos: i64, max: i64 },
    #[error("base dent list has {got} entries, expected {want}")]
    WrongCount { got: usize, want: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

fn check_positions(v: &[i64], max: i64) -> Result<(), SpecError> {
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpecError::NotIncreasing(v.to_vec()));
    }
    if let Some(&pos) = v.iter().find(|&&p| p < 1 || p > max) {
        return Err(SpecError::OutOfRange { pos, max });
    }
    Ok(())
}

/// Left and right dent rows of a two-sided semi-hexagon, counted from the top.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoSided {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

impl TwoSided {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self, SpecError> {
        let max = (a.len() + b.len()) as i64;
        check_positions(&a, max)?;
        check_positions(&b, max)?;
        Ok(TwoSided { a, b })
    }

    pub fn m(&self) -> i64 {
        self.a.len() as i64
    }

    pub fn n(&self) -> i64 {
        self.b.len() as i64
    }

    pub fn rows(&self) -> i64 {
        self.m() + self.n()
    }
}

/// Right-side dent rows of a quartered hexagon with `2m` rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quartered {
    pub a: Vec<i64>,
}

impl Quartered {
    pub fn new(a: Vec<i64>) -> Result<Self, SpecError> {
        check_positions(&a, 2 * a.len() as i64)?;
        Ok(Quartered { a })
    }

    pub fn m(&self) -> i64 {
        self.a.len() as i64
    }
}

/// Trapezoid with top side `a`, height `b`, and `b` dents on the base at the listed positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseDents {
    pub a: i64,
    pub b: i64,
    pub s: Vec<i64>,
}

impl BaseDents {
    pub fn new(a: i64, b: i64, s: Vec<i64>) -> Result<Self, SpecError> {
        if a < 0 || b < 0 {
            return Err(SpecError::Precondition("a and b must be non-negative".into()));
        }
        if s.len() as i64 != b {
            return Err(SpecError::WrongCount { got: s.len(), want: b as usize });
        }
        check_positions(&s, a + b)?;
        Ok(BaseDents { a, b, s })
    }
}

/// `[n]_{q^k} = 1 + q^k + ... + q^{k(n-1)}`.
pub fn q_int_base(n: i64, k: i64) -> LaurentPoly {
    (0..n.max(0)).map(|j| LaurentPoly::q_pow(k * j)).sum()
}

pub fn q_int(n: i64) -> LaurentPoly {
    q_int_base(n, 1)
}

/// `[n]_{q^k}!`, with `[0]! = 1`.
pub fn q_fact_base(n: i64, k: i64) -> LaurentPoly {
    (1..=n).map(|j| q_int_base(j, k)).product()
}

pub fn q_fact(n: i64) -> LaurentPoly {
    q_fact_base(n, 1)
}

/// The plus-sign Pochhammer `(c; qbase)_n` for a single-term `c`.
pub fn q_poch(c: &LaurentPoly, qbase: Monomial, n: i64) -> RationalFunction {
    let factor = |k: i64| &LaurentPoly::one() + &c.shift(qbase.pow(k));
    if n >= 0 {
        RationalFunction::from_poly((0..n).map(factor).product())
    } else {
        let den: LaurentPoly = (1..=-n).map(|j| factor(-j)).product();
        RationalFunction::new(LaurentPoly::one(), den).expect("Pochhammer denominator is a product of binomials")
    }
}

/// `(-q^e; q^2)_n`, the only shape the ratio formulas use.
fn neg_poch(e: i64, n: i64) -> RationalFunction {
    q_poch(&-LaurentPoly::q_pow(e), Monomial::q(2), n)
}

/// MacMahon's box product `prod (q^{i+j+k-1} - 1) / (q^{i+j+k-2} - 1)` as an unreduced quotient.
pub fn pp_q(a: i64, b: i64, c: i64) -> RationalFunction {
    pp_q_base(a, b, c, 1)
}

/// The same product with `q` replaced by `q^k`.
pub fn pp_q_base(a: i64, b: i64, c: i64, k: i64) -> RationalFunction {
    let mut num = LaurentPoly::one();
    let mut den = LaurentPoly::one();
    let one = LaurentPoly::one();
    for i in 1..=a {
        for j in 1..=b {
            for l in 1..=c {
                num = &num * &(&LaurentPoly::q_pow(k * (i + j + l - 1)) - &one);
                den = &den * &(&LaurentPoly::q_pow(k * (i + j + l - 2)) - &one);
            }
        }
    }
    RationalFunction::new(num, den).expect("MacMahon denominator has no zero factor for i+j+k >= 3")
}

/// Expanded MacMahon polynomial.
pub fn pp_q_poly(a: i64, b: i64, c: i64) -> LaurentPoly {
    pp_q(a, b, c).to_laurent().expect("MacMahon's product is a polynomial")
}

fn q_half(halfq: i64) -> LaurentPoly {
    LaurentPoly::monomial(Monomial::new(halfq, 0, 0))
}

fn pochhammer_block(x: i64, y: i64, seq: &[i64]) -> RationalFunction {
    seq.iter()
        .enumerate()
        .map(|(idx, &v)| {
            let i = idx as i64 + 1;
            let top = neg_poch(2 * (x + i), v - i);
            let bottom = neg_poch(2 * (y + i), v - i);
            &top * &bottom.recip().expect("Pochhammer values are nonzero")
        })
        .product()
}

/// Ratio `M(S_x(a;b)) / M(S_y(a;b))` for vertically weighted two-sided semi-hexagons.
pub fn ratio_s(x: i64, y: i64, spec: &TwoSided) -> RationalFunction {
    let (m, n) = (spec.m(), spec.n());
    let total = spec.a.iter().sum::<i64>() + spec.b.iter().sum::<i64>();
    // Twice the exponent, to stay in integers.
    let e2 = (y - x) * (2 * total - (m + n) * (m + n + 1));
    let pp = &pp_q_base(y, m, n, 2) * &pp_q_base(x, m, n, 2).recip().expect("nonzero");
    let pre = RationalFunction::from_poly(q_half(e2));
    &(&(&pre * &pp) * &pochhammer_block(x, y, &spec.a)) * &pochhammer_block(x, y, &spec.b)
}

/// Ratio `M(S'_x(a;b)) / M(S'_y(a;b))` as printed. For `y < x` the swapped call is inverted.
pub fn ratio_sprime(x: i64, y: i64, spec: &TwoSided) -> RationalFunction {
    if y < x {
        return ratio_sprime(y, x, spec).recip().expect("ratio of nonzero closed forms");
    }
    let (m, n) = (spec.m(), spec.n());
    let sb: i64 = spec.b.iter().sum();
    let e2 = n * (y * y - x * x) + (y - x) * (2 * sb - m * m - n * n - 2 * m * n + 4 * n);
    let pp = &pp_q_base(y, m, n, 2) * &pp_q_base(x, m, n, 2).recip().expect("nonzero");
    let x2 = LaurentPoly::x().pow(2);
    let xy = &LaurentPoly::x() * &LaurentPoly::y();
    let mut extra = LaurentPoly::one();
    for &bj in &spec.b {
        for i in 1..=(y - x) {
            extra = &extra * &(&x2 + &xy.shift(Monomial::q(2 * (x + i - bj))));
        }
    }
    let pre = RationalFunction::from_poly(&q_half(e2) * &extra);
    &(&(&pre * &pp) * &pochhammer_block(x, y, &spec.a)) * &pochhammer_block(x, y, &spec.b)
}

/// Quartered-hexagon ratio with `x`, `y` given in half-units (`x2 = 2x`).
///
/// `shift = 1` gives the unprimed formula, `shift = 0` the primed one. Half-unit
/// arguments let the same code evaluate the formula at half-integers.
pub fn ratio_q_half(x2: i64, y2: i64, spec: &Quartered, shift: i64) -> RationalFunction {
    let m = spec.m();
    let sa: i64 = spec.a.iter().sum();
    let pre = RationalFunction::from_poly(q_half(2 * (y2 - x2) * (sa - m * m)));
    let prod: RationalFunction = spec
        .a
        .iter()
        .enumerate()
        .map(|(idx, &ai)| {
            let i = idx as i64 + 1;
            let len = 2 * i - ai - 1;
            let top = neg_poch(2 * y2 + 2 * ai + 2 * shift, len);
            let bottom = neg_poch(2 * x2 + 2 * ai + 2 * shift, len);
            &top * &bottom.recip().expect("nonzero")
        })
        .product();
    &pre * &prod
}

pub fn ratio_q(x: i64, y: i64, spec: &Quartered) -> RationalFunction {
    ratio_q_half(2 * x, 2 * y, spec, 1)
}

pub fn ratio_qprime(x: i64, y: i64, spec: &Quartered) -> RationalFunction {
    ratio_q_half(2 * x, 2 * y, spec, 0)
}

/// The printed symmetric-tiling ratio. Requires `a_1 > 1` and `a_m = 2m`.
pub fn ratio_sym(x: i64, y: i64, a: &[i64]) -> Result<RationalFunction, SpecError> {
    let m = a.len() as i64;
    if m == 0 || a[0] <= 1 || a[a.len() - 1] != 2 * m {
        return Err(SpecError::Precondition(format!("symmetric ratio needs a_1 > 1 and a_m = 2m, got {a:?}")));
    }
    let head = &a[..a.len() - 1];
    let s: i64 = head.iter().sum();
    let pre = RationalFunction::from_poly(LaurentPoly::q_pow(4 * (y - x) * (s - m * (m - 1))));
    let prod: RationalFunction = head
        .iter()
        .enumerate()
        .map(|(idx, &ai)| {
            let i = idx as i64 + 1;
            let top = neg_poch(2 * (2 * y + ai - 1), 2 * i - ai);
            let bottom = neg_poch(2 * (2 * x + ai - 1), 2 * i - ai);
            &top * &bottom.recip().expect("nonzero")
        })
        .product();
    Ok(&pre * &prod.powi(2).expect("nonzero"))
}

fn vandermonde_ratio(s: &[i64]) -> RationalFunction {
    let mut num = LaurentPoly::one();
    let mut den = LaurentPoly::one();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            num = &num * &(&LaurentPoly::q_pow(2 * s[j]) - &LaurentPoly::q_pow(2 * s[i]));
            den = &den * &(&LaurentPoly::q_pow(2 * (j as i64 + 1)) - &LaurentPoly::q_pow(2 * (i as i64 + 1)));
        }
    }
    RationalFunction::new(num, den).expect("distinct indices give nonzero factors")
}

fn pow2(e: i64) -> Rational {
    if e >= 0 {
        rat(1, 1) * num_traits::pow(Rational::from_integer(2.into()), e as usize)
    } else {
        num_traits::pow(rat(1, 2), (-e) as usize)
    }
}

fn expand(f: RationalFunction, what: &str) -> LaurentPoly {
    f.to_laurent().unwrap_or_else(|| panic!("{what}: closed form failed to divide exactly"))
}

/// Tiling generating function of the vertically weighted base-dented semi-hexagon.
pub fn tgf_s_base(spec: &BaseDents) -> LaurentPoly {
    let b = spec.b;
    let s = &spec.s;
    let e: i64 = s.iter().enumerate().map(|(k, &si)| (b - 1) * (k as i64 + 2 - 2 * si)).sum();
    let mut tail = LaurentPoly::one();
    for i in 0..s.len() {
        for j in 0..i {
            let f = &LaurentPoly::q_pow(2 * (s[i] + s[j] - 2)) * &LaurentPoly::x();
            tail = &tail * &(&f + &LaurentPoly::y());
        }
    }
    let pre = LaurentPoly::term(pow2(-(b * (b - 1) / 2)), Monomial::q(e));
    let v = expand(vandermonde_ratio(s), "base-dent Vandermonde ratio");
    &(&pre * &v) * &tail
}

/// Tiling generating function of the base-dented semi-hexagon with labelled right lozenges.
pub fn tgf_sprime_base(spec: &BaseDents) -> LaurentPoly {
    let b = spec.b;
    let s = &spec.s;
    let mut e2 = 0;
    let mut two = 0;
    let mut tail = LaurentPoly::one();
    for (k, &si) in s.iter().enumerate() {
        let i = k as i64 + 1;
        two += i - si;
        e2 += (i - si) * (si - 3 + i);
        for j in 1..=(si - i) {
            let f = &LaurentPoly::q_pow(2 * (i + j - b - 1)) * &LaurentPoly::x();
            tail = &tail * &(&f + &LaurentPoly::y());
        }
    }
    let pre = LaurentPoly::term(pow2(two), Monomial::new(e2, 0, 0));
    let v = expand(vandermonde_ratio(s), "base-dent Vandermonde ratio");
    &(&pre * &v) * &tail
}

fn halved_hexagon(x: i64, n: i64, primed: bool) -> LaurentPoly {
    let d = if primed { 1 } else { 0 };
    let e: i64 = (1..=n).map(|i| (2 * i - 1) * (2 * x + i - d)).sum();
    let mut num = LaurentPoly::term(pow2(-n * n), Monomial::q(-e));
    let mut den = LaurentPoly::one();
    for i in 1..=n {
        den = &den * &q_fact_base(2 * i - 1, 2);
        num = &num * &q_int_base(2 * (x + i) - d, 2);
        for j in (i + 1)..=n {
            num = &num * &(&q_int_base(2 * (2 * x + i + j - d), 2) * &q_int_base(2 * (j - i), 2));
        }
    }
    expand(RationalFunction::new(num, den).expect("q-factorials are nonzero"), "halved hexagon")
}

/// Tiling generating function of the halved hexagon `P_{x,n}`.
pub fn tgf_p(x: i64, n: i64) -> LaurentPoly {
    halved_hexagon(x, n, false)
}

/// Tiling generating function of `P'_{x,n}` (axis lozenges weighted 1/2).
pub fn tgf_pprime(x: i64, n: i64) -> LaurentPoly {
    halved_hexagon(x, n, true)
}

/// `((q^k + q^{-k}) / 2)`, the weight of a vertical lozenge with label `k` when `X = Y = 1`.
pub fn sym_weight(k: i64) -> LaurentPoly {
    (&LaurentPoly::q_pow(k) + &LaurentPoly::q_pow(-k)).scale(&rat(1, 2))
}

/// `((X q^k + Y q^{-k}) / 2)`.
pub fn xy_weight(k: i64) -> LaurentPoly {
    let h = rat(1, 2);
    &LaurentPoly::term(h.clone(), Monomial::new(2 * k, 1, 0)) + &LaurentPoly::term(h, Monomial::new(-2 * k, 0, 1))
}

/// Unit helper so callers can build constant rational functions without importing `num_traits`.
pub fn rf_const(c: Rational) -> RationalFunction {
    RationalFunction::from_poly(LaurentPoly::constant(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn q_integers() {
        assert_eq!(q_int(2), p("1 + q"));
        assert_eq!(q_int(0), LaurentPoly::zero());
        assert_eq!(q_fact(1), LaurentPoly::one());
        assert_eq!(q_fact(3), &p("1 + q") * &p("1 + q + q^2"));
    }

    #[test]
    fn pochhammer_plus_convention() {
        let c = LaurentPoly::x();
        assert_eq!(q_poch(&c, Monomial::q(1), 0), RationalFunction::one());
        let two = q_poch(&c, Monomial::q(1), 2);
        assert_eq!(two, RationalFunction::from_poly(&p("1 + X") * &p("1 + q*X")));
    }

    #[test]
    fn pochhammer_shift_identity_negative_length() {
        // (c;q)_{a-1} = (c;q)_a (c q^a; q)_{-1}
        for a in -3..=4 {
            let c = p("(-1)*q^3");
            let lhs = q_poch(&c, Monomial::q(2), a - 1);
            let rhs = &q_poch(&c, Monomial::q(2), a) * &q_poch(&c.shift(Monomial::q(2 * a)), Monomial::q(2), -1);
            assert_eq!(lhs, rhs, "a = {a}");
        }
    }

    #[test]
    fn macmahon_small() {
        assert_eq!(pp_q_poly(1, 1, 1), p("1 + q"));
        assert_eq!(pp_q_poly(2, 0, 5), LaurentPoly::one());
        assert_eq!(pp_q_poly(1, 1, 2), p("1 + q + q^2"));
    }

    #[test]
    fn ratios_trivial_cases() {
        let s = TwoSided::new(vec![2], vec![1]).unwrap();
        assert_eq!(ratio_s(2, 2, &s), RationalFunction::one());
        assert_eq!(ratio_s(0, 3, &TwoSided::new(vec![], vec![1, 2]).unwrap()), RationalFunction::one());
        let q1 = Quartered::new(vec![1]).unwrap();
        assert_eq!(ratio_q(0, 3, &q1), RationalFunction::one());
        assert_eq!(ratio_sprime(1, 1, &s), RationalFunction::one());
        assert_eq!(ratio_sprime(0, 2, &TwoSided::new(vec![], vec![]).unwrap()), RationalFunction::one());
    }

    #[test]
    fn base_formulas_trivial() {
        assert_eq!(tgf_s_base(&BaseDents::new(2, 0, vec![]).unwrap()), LaurentPoly::one());
        assert_eq!(tgf_sprime_base(&BaseDents::new(2, 0, vec![]).unwrap()), LaurentPoly::one());
        assert_eq!(tgf_p(3, 0), LaurentPoly::one());
        // x = 0: a single tiling by vertical lozenges.
        assert_eq!(tgf_p(0, 1), sym_weight(1));
    }

    #[test]
    fn spec_validation() {
        assert!(TwoSided::new(vec![2, 2], vec![]).is_err());
        assert!(TwoSided::new(vec![3], vec![]).is_err());
        assert!(Quartered::new(vec![3]).is_err());
        assert!(BaseDents::new(1, 2, vec![1]).is_err());
    }
}
