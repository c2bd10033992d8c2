//! Dense polynomials over the rationals and reduced rational functions in
//! one indeterminate `t`. These back the Laurent-series style field: the
//! t-adic valuation of a quotient of polynomials is exactly computable.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficients ascending in the exponent of `t`; the last entry is nonzero
/// and the empty vector is the zero polynomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    /// `t^k` for `k >= 0`.
    pub fn t_pow(k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = BigRational::one();
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Order of vanishing at t = 0 (index of the lowest nonzero coefficient).
    pub fn ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + other.coeff(k));
        }
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division by a nonzero divisor; returns (quotient, remainder).
    pub fn divmod(&self, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let dd = div.degree().unwrap();
        let lead = div.coeffs[dd].clone();
        let mut rem = self.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.coeffs[rd].clone() / lead.clone();
            quot[rd - dd] = factor.clone();
            let shifted = div.mul(&Poly::t_pow(rd - dd)).scale(&factor);
            rem = rem.sub(&shifted);
        }
        (Poly::new(quot), rem)
    }

    /// Monic greatest common divisor. Remainders are renormalized to monic
    /// each round to keep coefficient heights in check.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn monic(&self) -> Poly {
        match self.degree() {
            None => Poly::zero(),
            Some(d) => {
                let lead = self.coeffs[d].clone();
                self.scale(&lead.recip())
            }
        }
    }

    /// Multiplicative inverse as a power series, truncated below `t^k`.
    /// Requires a unit constant term.
    pub fn series_inv(&self, k: usize) -> Poly {
        let c0 = self.coeff(0);
        assert!(!c0.is_zero(), "series inverse needs a unit constant term");
        let mut inv = vec![BigRational::zero(); k];
        if k == 0 {
            return Poly::zero();
        }
        inv[0] = c0.recip();
        for n in 1..k {
            let mut acc = BigRational::zero();
            for j in 1..=n {
                acc += self.coeff(j) * inv[n - j].clone();
            }
            inv[n] = -acc / c0.clone();
        }
        Poly::new(inv)
    }

    /// Truncate away all terms of exponent >= k.
    pub fn truncate(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.iter().take(k).cloned().collect())
    }

    /// Divide by `t^k`; every coefficient below `k` must vanish.
    pub fn shift_down(&self, k: usize) -> Poly {
        debug_assert!(self.ord().map_or(true, |o| o >= k));
        Poly::new(self.coeffs.iter().skip(k).cloned().collect())
    }
}

/// A rational function `num/den` kept in reduced canonical form:
/// gcd(num, den) = 1 and den is monic (den = 1 when num = 0), so equality
/// is plain structural comparison.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(RatFunc {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        // constant numerator or denominator needs no gcd
        if den.degree() == Some(0) {
            let c = den.coeffs[0].clone();
            return Some(RatFunc {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            });
        }
        if num.degree() == Some(0) {
            let lead = den.coeffs[den.degree().unwrap()].clone();
            return Some(RatFunc {
                num: num.scale(&lead.recip()),
                den: den.scale(&lead.recip()),
            });
        }
        let g = num.gcd(&den);
        let (num, _) = num.divmod(&g);
        let (den, _) = den.divmod(&g);
        let lead = den.coeffs[den.degree().unwrap()].clone();
        Some(RatFunc {
            num: num.scale(&lead.recip()),
            den: den.scale(&lead.recip()),
        })
    }

    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_poly(num: Poly) -> Self {
        RatFunc {
            num,
            den: Poly::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).unwrap()
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den)).unwrap()
    }

    pub fn div(&self, other: &RatFunc) -> Option<RatFunc> {
        if other.is_zero() {
            return None;
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// t-adic order: ord(num) - ord(den); None for the zero function.
    pub fn t_order(&self) -> Option<i64> {
        let n = self.num.ord()? as i64;
        let d = self.den.ord().unwrap() as i64;
        Some(n - d)
    }

    /// Writes `self = t^v * (f/g)` with `f(0) != 0`, `g(0) != 0` and returns
    /// the power-series expansion of `f/g` truncated below `t^k`.
    pub fn unit_part_series(&self, k: usize) -> Poly {
        let n_ord = self.num.ord().expect("zero has no unit part");
        let d_ord = self.den.ord().unwrap();
        let f = self.num.shift_down(n_ord);
        let g = self.den.shift_down(d_ord);
        f.mul(&g.series_inv(k)).truncate(k)
    }
}

fn clear_denominators(p: &Poly, scale: &BigInt) -> Vec<BigInt> {
    p.coeffs()
        .iter()
        .map(|c| c.numer() * (scale / c.denom()))
        .collect()
}

/// Renders num/den with the fraction rescaled so both polynomials have
/// coprime integer coefficients and the denominator's leading coefficient
/// is positive.
pub fn ratfunc_to_string(f: &RatFunc) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut lcm = BigInt::one();
    for c in f.num().coeffs().iter().chain(f.den().coeffs()) {
        lcm = lcm.lcm(c.denom());
    }
    let mut num = clear_denominators(f.num(), &lcm);
    let mut den = clear_denominators(f.den(), &lcm);
    let mut g = BigInt::zero();
    for c in num.iter().chain(den.iter()) {
        g = g.gcd(c);
    }
    if !g.is_one() {
        for c in num.iter_mut().chain(den.iter_mut()) {
            *c /= &g;
        }
    }
    let den_sign_ref = den.iter().find(|c| !c.is_zero()).unwrap();
    if den_sign_ref.is_negative() {
        for c in num.iter_mut().chain(den.iter_mut()) {
            *c = -c.clone();
        }
    }
    let den_is_one = den.len() == 1 && den[0].is_one();
    if den_is_one {
        int_poly_to_string(&num)
    } else {
        format!(
            "({})/({})",
            int_poly_to_string(&num),
            int_poly_to_string(&den)
        )
    }
}

fn int_poly_to_string(coeffs: &[BigInt]) -> String {
    use fmt::Write;
    let mut out = String::new();
    let mut first = true;
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                out.push('-');
            }
            first = false;
        } else if c.is_negative() {
            out.push('-');
        } else {
            out.push('+');
        }
        let show_coeff = !mag.is_one() || k == 0;
        if show_coeff {
            write!(out, "{}", mag).unwrap();
        }
        if k >= 1 {
            out.push('t');
            if k >= 2 {
                write!(out, "^{}", k).unwrap();
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyParseError(pub String);

impl fmt::Display for PolyParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse polynomial data: {}", self.0)
    }
}

/// Accepts `(p)/(q)`, a bare polynomial `p`, or an integer fraction `a/b`.
pub fn ratfunc_from_str(s: &str) -> Result<RatFunc, PolyParseError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(PolyParseError("empty string".to_string()));
    }
    if let Some(idx) = s.find(")/(") {
        let num = &s[..idx];
        let den = &s[idx + 3..];
        let num = num
            .strip_prefix('(')
            .ok_or_else(|| PolyParseError(s.clone()))?;
        let den = den
            .strip_suffix(')')
            .ok_or_else(|| PolyParseError(s.clone()))?;
        let num = poly_from_str(num)?;
        let den = poly_from_str(den)?;
        return RatFunc::new(num, den)
            .ok_or_else(|| PolyParseError("zero denominator".to_string()));
    }
    if let Some(idx) = s.find('/') {
        if !s.contains('t') && !s.contains('(') {
            let num = poly_from_str(&s[..idx])?;
            let den = poly_from_str(&s[idx + 1..])?;
            return RatFunc::new(num, den)
                .ok_or_else(|| PolyParseError("zero denominator".to_string()));
        }
    }
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(&s);
    Ok(RatFunc::from_poly(poly_from_str(inner)?))
}

pub fn poly_from_str(s: &str) -> Result<Poly, PolyParseError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(PolyParseError("empty polynomial".to_string()));
    }
    let bytes = s.as_bytes();
    let mut terms: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if (b == b'+' || b == b'-') && i > start {
            terms.push((start, i));
            start = i;
        }
    }
    terms.push((start, s.len()));
    let mut result = Poly::zero();
    for (a, b) in terms {
        let term = &s[a..b];
        result = result.add(&parse_term(term)?);
    }
    Ok(result)
}

fn parse_term(term: &str) -> Result<Poly, PolyParseError> {
    let err = || PolyParseError(term.to_string());
    let (neg, rest) = match term.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, term.strip_prefix('+').unwrap_or(term)),
    };
    if rest.is_empty() {
        return Err(err());
    }
    let (coeff_str, var_str) = match rest.find('t') {
        Some(idx) => (&rest[..idx], &rest[idx..]),
        None => (rest, ""),
    };
    let coeff_str = coeff_str.strip_suffix('*').unwrap_or(coeff_str);
    let coeff: BigRational = if coeff_str.is_empty() {
        BigRational::one()
    } else if let Some(idx) = coeff_str.find('/') {
        let n: BigInt = coeff_str[..idx].parse().map_err(|_| err())?;
        let d: BigInt = coeff_str[idx + 1..].parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        BigRational::new(n, d)
    } else {
        BigRational::from(coeff_str.parse::<BigInt>().map_err(|_| err())?)
    };
    let exp: usize = if var_str.is_empty() {
        0
    } else if var_str == "t" {
        1
    } else {
        var_str
            .strip_prefix("t^")
            .ok_or_else(err)?
            .parse()
            .map_err(|_| err())?
    };
    let coeff = if neg { -coeff } else { coeff };
    Ok(Poly::t_pow(exp).scale(&coeff))
}
