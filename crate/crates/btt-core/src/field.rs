//! Discretely valued fields with exact element arithmetic.
//!
//! Two backends share one interface: the rationals carrying the p-adic
//! valuation for a chosen prime, and rational functions in `t` over the
//! rationals carrying the t-adic valuation. Elements stay in reduced
//! canonical form after every operation, so equality is structural.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::{ratfunc_from_str, ratfunc_to_string, Poly, RatFunc};

/// Value of the valuation map: an integer or infinity (attained only at 0).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Val {
    Finite(i64),
    Infinite,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(k) => Some(k),
            Val::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Val::Infinite)
    }

    pub fn min(self, other: Val) -> Val {
        match (self, other) {
            (Val::Infinite, v) | (v, Val::Infinite) => v,
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a.min(b)),
        }
    }

    pub fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Infinite, _) | (_, Val::Infinite) => Val::Infinite,
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => core::cmp::Ordering::Equal,
            (Val::Infinite, _) => core::cmp::Ordering::Greater,
            (_, Val::Infinite) => core::cmp::Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(k) => write!(f, "{}", k),
            Val::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FieldError {
    DivisionByZero,
    NegativeValuation,
    UnsupportedEnumeration,
    NotPrime(u64),
    Parse(String),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::DivisionByZero => write!(f, "division by zero"),
            FieldError::NegativeValuation => {
                write!(f, "residue of an element with negative valuation")
            }
            FieldError::UnsupportedEnumeration => {
                write!(f, "residue field is infinite; enumeration unsupported")
            }
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::Parse(s) => write!(f, "cannot parse scalar: {}", s),
        }
    }
}

/// Image of a valuation-nonnegative element in the residue field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Residue {
    /// Integer mod p (p-adic backend).
    Mod { p: u64, value: u64 },
    /// Rational number (Laurent backend, evaluation at t = 0).
    Rat(BigRational),
}

impl Residue {
    pub fn add(&self, other: &Residue) -> Residue {
        match (self, other) {
            (Residue::Mod { p, value: a }, Residue::Mod { p: q, value: b }) => {
                assert_eq!(p, q);
                Residue::Mod {
                    p: *p,
                    value: ((*a as u128 + *b as u128) % *p as u128) as u64,
                }
            }
            (Residue::Rat(a), Residue::Rat(b)) => Residue::Rat(a + b),
            _ => panic!("mixed residue backends"),
        }
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        match (self, other) {
            (Residue::Mod { p, value: a }, Residue::Mod { p: q, value: b }) => {
                assert_eq!(p, q);
                Residue::Mod {
                    p: *p,
                    value: ((*a as u128 * *b as u128) % *p as u128) as u64,
                }
            }
            (Residue::Rat(a), Residue::Rat(b)) => Residue::Rat(a * b),
            _ => panic!("mixed residue backends"),
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residue::Mod { p, value } => write!(f, "{} mod {}", value, p),
            Residue::Rat(q) => write!(f, "{}", q),
        }
    }
}

/// A field with a surjective discrete valuation, exact element arithmetic
/// in canonical form, a distinguished uniformizer, and residue reduction.
/// All higher layers are generic over this trait.
pub trait ValuedField: Clone + PartialEq + fmt::Debug {
    type Elem: Clone + PartialEq + Eq + PartialOrd + Ord + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, FieldError>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn val(&self, a: &Self::Elem) -> Val;
    fn uniformizer_pow(&self, k: i64) -> Self::Elem;
    fn residue(&self, a: &Self::Elem) -> Result<Residue, FieldError>;

    /// Lifts of every residue-field element, when the residue field is
    /// finite. The rank-2 tree needs this to enumerate neighbors.
    fn residue_transversal(&self) -> Result<Vec<Self::Elem>, FieldError>;

    /// Canonical representative of the coset `x + pi^a O`. Representatives
    /// are scaling-compatible: rep(pi^k x, a + k) = pi^k rep(x, a).
    fn coset_rep(&self, x: &Self::Elem, a: i64) -> Self::Elem;

    fn format_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, FieldError>;

    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, FieldError> {
        self.div(&self.one(), a)
    }

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.val(a) == Val::Finite(0)
    }
}

/// The rationals with the p-adic valuation for a fixed prime p.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PAdicField {
    p: u64,
}

impl PAdicField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if is_prime_u64(p) {
            Ok(PAdicField { p })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    fn p_big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    fn int_val(&self, n: &BigInt) -> i64 {
        debug_assert!(!n.is_zero());
        let p = self.p_big();
        let mut n = n.clone();
        let mut v = 0i64;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&n, &p);
            if r.is_zero() {
                v += 1;
                n = q;
            } else {
                return v;
            }
        }
    }
}

impl ValuedField for PAdicField {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn div(&self, a: &BigRational, b: &BigRational) -> Result<BigRational, FieldError> {
        if b.is_zero() {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(a / b)
        }
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn val(&self, a: &BigRational) -> Val {
        if a.is_zero() {
            Val::Infinite
        } else {
            Val::Finite(self.int_val(a.numer()) - self.int_val(a.denom()))
        }
    }

    fn uniformizer_pow(&self, k: i64) -> BigRational {
        let p = self.p_big();
        if k >= 0 {
            BigRational::from(p.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), p.pow((-k) as u32))
        }
    }

    fn residue(&self, a: &BigRational) -> Result<Residue, FieldError> {
        match self.val(a) {
            Val::Infinite => Ok(Residue::Mod {
                p: self.p,
                value: 0,
            }),
            Val::Finite(v) if v < 0 => Err(FieldError::NegativeValuation),
            Val::Finite(v) if v > 0 => Ok(Residue::Mod {
                p: self.p,
                value: 0,
            }),
            Val::Finite(_) => {
                let p = self.p_big();
                let n = a.numer().mod_floor(&p);
                let d = a.denom().mod_floor(&p);
                let inv = mod_inverse(&d, &p).expect("denominator is a unit");
                let value = ((n * inv).mod_floor(&p)).to_u64().unwrap();
                Ok(Residue::Mod { p: self.p, value })
            }
        }
    }

    fn residue_transversal(&self) -> Result<Vec<BigRational>, FieldError> {
        Ok((0..self.p).map(|k| self.from_i64(k as i64)).collect())
    }

    fn coset_rep(&self, x: &BigRational, a: i64) -> BigRational {
        let v = match self.val(x) {
            Val::Infinite => return BigRational::zero(),
            Val::Finite(v) => v,
        };
        if v >= a {
            return BigRational::zero();
        }
        let p = self.p_big();
        let r = (a - v) as u32;
        let modulus = p.pow(r);
        // x = p^v * m/n with m, n prime to p
        let vn = self.int_val(x.numer());
        let vd = self.int_val(x.denom());
        let m = x.numer() / p.pow(vn as u32);
        let n = x.denom() / p.pow(vd as u32);
        let inv = mod_inverse(&n.mod_floor(&modulus), &modulus).expect("unit denominator");
        let w = (m.mod_floor(&modulus) * inv).mod_floor(&modulus);
        BigRational::from(w) * self.uniformizer_pow(v)
    }

    fn format_elem(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            format!("{}", a.numer())
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn parse_elem(&self, s: &str) -> Result<BigRational, FieldError> {
        let s = s.trim();
        let err = || FieldError::Parse(s.to_string());
        if let Some(idx) = s.find('/') {
            let n: BigInt = s[..idx].trim().parse().map_err(|_| err())?;
            let d: BigInt = s[idx + 1..].trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        } else {
            Ok(BigRational::from(s.parse::<BigInt>().map_err(|_| err())?))
        }
    }
}

/// Rational functions in `t` over the rationals with the t-adic valuation.
/// The residue field is the rationals (evaluation at t = 0), so residue
/// enumeration is unsupported.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentField;

impl LaurentField {
    pub fn new() -> Self {
        LaurentField
    }
}

impl Default for LaurentField {
    fn default() -> Self {
        LaurentField
    }
}

impl ValuedField for LaurentField {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        RatFunc::zero()
    }

    fn one(&self) -> RatFunc {
        RatFunc::one()
    }

    fn from_i64(&self, n: i64) -> RatFunc {
        RatFunc::constant(BigRational::from(BigInt::from(n)))
    }

    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.add(b)
    }

    fn sub(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.sub(b)
    }

    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.mul(b)
    }

    fn neg(&self, a: &RatFunc) -> RatFunc {
        a.neg()
    }

    fn div(&self, a: &RatFunc, b: &RatFunc) -> Result<RatFunc, FieldError> {
        a.div(b).ok_or(FieldError::DivisionByZero)
    }

    fn is_zero(&self, a: &RatFunc) -> bool {
        a.is_zero()
    }

    fn val(&self, a: &RatFunc) -> Val {
        match a.t_order() {
            None => Val::Infinite,
            Some(k) => Val::Finite(k),
        }
    }

    fn uniformizer_pow(&self, k: i64) -> RatFunc {
        if k >= 0 {
            RatFunc::from_poly(Poly::t_pow(k as usize))
        } else {
            RatFunc::new(Poly::one(), Poly::t_pow((-k) as usize)).unwrap()
        }
    }

    fn residue(&self, a: &RatFunc) -> Result<Residue, FieldError> {
        match self.val(a) {
            Val::Infinite => Ok(Residue::Rat(BigRational::zero())),
            Val::Finite(v) if v < 0 => Err(FieldError::NegativeValuation),
            Val::Finite(v) if v > 0 => Ok(Residue::Rat(BigRational::zero())),
            Val::Finite(_) => Ok(Residue::Rat(a.num().coeff(0) / a.den().coeff(0))),
        }
    }

    fn residue_transversal(&self) -> Result<Vec<RatFunc>, FieldError> {
        Err(FieldError::UnsupportedEnumeration)
    }

    fn coset_rep(&self, x: &RatFunc, a: i64) -> RatFunc {
        let v = match self.val(x) {
            Val::Infinite => return RatFunc::zero(),
            Val::Finite(v) => v,
        };
        if v >= a {
            return RatFunc::zero();
        }
        let r = (a - v) as usize;
        let w = x.unit_part_series(r);
        self.mul(&RatFunc::from_poly(w), &self.uniformizer_pow(v))
    }

    fn format_elem(&self, a: &RatFunc) -> String {
        ratfunc_to_string(a)
    }

    fn parse_elem(&self, s: &str) -> Result<RatFunc, FieldError> {
        ratfunc_from_str(s).map_err(|e| FieldError::Parse(e.0))
    }
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g, g >= 0.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        r0 = core::mem::replace(&mut r1, r);
        let s = &s0 - &q * &s1;
        s0 = core::mem::replace(&mut s1, s);
        let t = &t0 - &q * &t1;
        t0 = core::mem::replace(&mut t1, t);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of a modulo m, when gcd(a, m) = 1.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (g, x, _) = extended_gcd(a, m);
    if g.is_one() {
        Some(x.mod_floor(m))
    } else {
        None
    }
}

trait ModFloor {
    fn mod_floor(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor(&self, m: &BigInt) -> BigInt {
        num_integer::Integer::mod_floor(self, m)
    }
}

/// Deterministic Miller-Rabin for u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> PAdicField {
        PAdicField::new(2).unwrap()
    }

    #[test]
    fn prime_check() {
        assert!(PAdicField::new(2).is_ok());
        assert!(PAdicField::new(97).is_ok());
        assert_eq!(PAdicField::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(PAdicField::new(6), Err(FieldError::NotPrime(6)));
    }

    #[test]
    fn padic_valuation() {
        let f = q2();
        assert_eq!(f.val(&f.from_i64(12)), Val::Finite(2));
        let three_eighths = f.div(&f.from_i64(3), &f.from_i64(8)).unwrap();
        assert_eq!(f.val(&three_eighths), Val::Finite(-3));
        assert_eq!(f.val(&f.zero()), Val::Infinite);
    }

    #[test]
    fn strict_cancellation() {
        // val(1/3 + 2/3) = 0 while both summands have valuation -1 at p = 3
        let f = PAdicField::new(3).unwrap();
        let a = f.div(&f.one(), &f.from_i64(3)).unwrap();
        let b = f.div(&f.from_i64(2), &f.from_i64(3)).unwrap();
        assert_eq!(f.val(&a), Val::Finite(-1));
        assert_eq!(f.val(&f.add(&a, &b)), Val::Finite(0));
    }

    #[test]
    fn uniformizer_powers() {
        let f = q2();
        assert_eq!(f.uniformizer_pow(3), f.from_i64(8));
        assert_eq!(
            f.uniformizer_pow(-1),
            f.div(&f.one(), &f.from_i64(2)).unwrap()
        );
        let l = LaurentField::new();
        assert_eq!(l.uniformizer_pow(2), l.parse_elem("t^2").unwrap());
        assert_eq!(l.val(&l.uniformizer_pow(-4)), Val::Finite(-4));
    }

    #[test]
    fn residues() {
        let f = q2();
        assert_eq!(
            f.residue(&f.from_i64(5)).unwrap(),
            Residue::Mod { p: 2, value: 1 }
        );
        let half = f.div(&f.one(), &f.from_i64(2)).unwrap();
        assert_eq!(f.residue(&half), Err(FieldError::NegativeValuation));
        let l = LaurentField::new();
        let s = l.parse_elem("(3+t)/(1-t)").unwrap();
        assert_eq!(
            l.residue(&s).unwrap(),
            Residue::Rat(BigRational::from(BigInt::from(3)))
        );
    }

    #[test]
    fn laurent_mul_inverse() {
        let l = LaurentField::new();
        let t = l.uniformizer_pow(1);
        let tinv = l.uniformizer_pow(-1);
        assert_eq!(l.mul(&t, &tinv), l.one());
    }

    #[test]
    fn padic_coset_reps() {
        let f = q2();
        // val >= a reduces to zero
        assert!(f.is_zero(&f.coset_rep(&f.from_i64(4), 2)));
        // 1/3 mod 2O: inverse of 3 mod 2 is 1
        let third = f.div(&f.one(), &f.from_i64(3)).unwrap();
        let rep = f.coset_rep(&third, 1);
        assert_eq!(rep, f.one());
        let diff = f.sub(&third, &rep);
        assert!(f.val(&diff) >= Val::Finite(1));
        // scaling compatibility
        let x = f.div(&f.from_i64(7), &f.from_i64(6)).unwrap();
        let lhs = f.coset_rep(&f.mul(&x, &f.uniformizer_pow(3)), 5);
        let rhs = f.mul(&f.coset_rep(&x, 2), &f.uniformizer_pow(3));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn laurent_coset_reps() {
        let l = LaurentField::new();
        let x = l.parse_elem("(1)/(1-t)").unwrap();
        let rep = l.coset_rep(&x, 3);
        assert_eq!(rep, l.parse_elem("1+t+t^2").unwrap());
        let diff = l.sub(&x, &rep);
        assert!(l.val(&diff) >= Val::Finite(3));
    }

    #[test]
    fn valuation_axioms_on_random_pairs() {
        use crate::testsupport::{rand_elem, Rng};
        let f = q2();
        let l = LaurentField::new();
        let mut rng = Rng::new(77);
        for _ in 0..500 {
            let a = rand_elem(&f, &mut rng);
            let b = rand_elem(&f, &mut rng);
            assert_eq!(f.val(&f.mul(&a, &b)), f.val(&a).add(f.val(&b)));
            let sum_val = f.val(&f.add(&a, &b));
            assert!(sum_val >= f.val(&a).min(f.val(&b)));
            if f.val(&a) != f.val(&b) {
                assert_eq!(sum_val, f.val(&a).min(f.val(&b)));
            }
        }
        for _ in 0..100 {
            let a = rand_elem(&l, &mut rng);
            let b = rand_elem(&l, &mut rng);
            assert_eq!(l.val(&l.mul(&a, &b)), l.val(&a).add(l.val(&b)));
            assert!(l.val(&l.add(&a, &b)) >= l.val(&a).min(l.val(&b)));
        }
    }

    #[test]
    fn residue_is_a_ring_homomorphism() {
        use crate::testsupport::{rand_o_elem, Rng};
        let f = PAdicField::new(5).unwrap();
        let l = LaurentField::new();
        let mut rng = Rng::new(78);
        for _ in 0..300 {
            let a = rand_o_elem(&f, &mut rng);
            let b = rand_o_elem(&f, &mut rng);
            let ra = f.residue(&a).unwrap();
            let rb = f.residue(&b).unwrap();
            assert_eq!(f.residue(&f.add(&a, &b)).unwrap(), ra.add(&rb));
            assert_eq!(f.residue(&f.mul(&a, &b)).unwrap(), ra.mul(&rb));
        }
        for _ in 0..100 {
            let a = rand_o_elem(&l, &mut rng);
            let b = rand_o_elem(&l, &mut rng);
            let ra = l.residue(&a).unwrap();
            let rb = l.residue(&b).unwrap();
            assert_eq!(l.residue(&l.add(&a, &b)).unwrap(), ra.add(&rb));
            assert_eq!(l.residue(&l.mul(&a, &b)).unwrap(), ra.mul(&rb));
        }
    }

    #[test]
    fn scalar_strings() {
        let f = q2();
        let x = f.div(&f.from_i64(-3), &f.from_i64(8)).unwrap();
        assert_eq!(f.format_elem(&x), "-3/8");
        assert_eq!(f.parse_elem("-3/8").unwrap(), x);
        assert_eq!(f.format_elem(&f.from_i64(12)), "12");
    }
}
