//! Exact coefficient arithmetic: prime fields `F_d` and the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not a prime >= 2")]
    NotPrime(u64),
    #[error("multiplicative inverse of zero")]
    InverseOfZero,
    #[error("operands belong to different fields (F_{0} and F_{1})")]
    FieldMismatch(u64, u64),
    #[error("operand kind does not fit {0:?}")]
    BadOperand(FieldOp),
    #[error("value {0} is not representable in F_{1}")]
    NotRepresentable(String, u64),
}

/// A prime modulus. Construction checks primality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    modulus: u64,
}

impl FieldSpec {
    pub fn new(modulus: u64) -> Result<Self, FieldError> {
        if is_prime(modulus) {
            Ok(FieldSpec { modulus })
        } else {
            Err(FieldError::NotPrime(modulus))
        }
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn element(self, value: i64) -> FieldElement {
        let d = self.modulus as i64;
        FieldElement { value: value.rem_euclid(d) as u64, field: self }
    }

    pub fn zero(self) -> FieldElement {
        FieldElement { value: 0, field: self }
    }

    pub fn one(self) -> FieldElement {
        FieldElement { value: 1, field: self }
    }

    /// All elements in ascending order.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.modulus).map(move |value| FieldElement { value, field: self })
    }
}

impl TryFrom<u64> for FieldSpec {
    type Error = FieldError;
    fn try_from(d: u64) -> Result<Self, FieldError> {
        FieldSpec::new(d)
    }
}

impl From<FieldSpec> for u64 {
    fn from(f: FieldSpec) -> u64 {
        f.modulus
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k.saturating_mul(k) <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// An element of `F_d`, always reduced into `[0, d-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    field: FieldSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow,
}

/// Second operand of [`field_op`]: an element for the binary operations, an
/// exponent for `Pow`, nothing for `Inv`.
#[derive(Debug, Clone, Copy)]
pub enum Operand {
    Element(FieldElement),
    Exponent(u64),
    None,
}

pub fn field_op(op: FieldOp, a: FieldElement, b: Operand) -> Result<FieldElement, FieldError> {
    match (op, b) {
        (FieldOp::Add, Operand::Element(b)) => a.add(b),
        (FieldOp::Sub, Operand::Element(b)) => a.sub(b),
        (FieldOp::Mul, Operand::Element(b)) => a.mul(b),
        (FieldOp::Inv, _) => a.inv(),
        (FieldOp::Pow, Operand::Exponent(e)) => Ok(a.pow(e)),
        (FieldOp::Pow, Operand::Element(e)) => Ok(a.pow(e.value)),
        (op, _) => Err(FieldError::BadOperand(op)),
    }
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn field(self) -> FieldSpec {
        self.field
    }

    fn check(self, other: FieldElement) -> Result<u64, FieldError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch(self.field.modulus, other.field.modulus));
        }
        Ok(self.field.modulus)
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.check(other)?;
        Ok(FieldElement { value: (self.value + other.value) % d, field: self.field })
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.check(other)?;
        Ok(FieldElement { value: (self.value + d - other.value) % d, field: self.field })
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let d = self.check(other)?;
        let v = (self.value as u128 * other.value as u128) % d as u128;
        Ok(FieldElement { value: v as u64, field: self.field })
    }

    pub fn neg(self) -> FieldElement {
        let d = self.field.modulus;
        FieldElement { value: (d - self.value) % d, field: self.field }
    }

    pub fn pow(self, mut exp: u64) -> FieldElement {
        let d = self.field.modulus as u128;
        let mut base = self.value as u128 % d;
        let mut acc = 1u128 % d;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % d;
            }
            base = base * base % d;
            exp >>= 1;
        }
        FieldElement { value: acc as u64, field: self.field }
    }

    /// Inverse via Fermat: `a^(d-2)`.
    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::InverseOfZero);
        }
        Ok(self.pow(self.field.modulus - 2))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// Exact square root when this is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rational> {
        if self.is_negative() {
            return None;
        }
        let n = self.0.numer().sqrt();
        let d = self.0.denom().sqrt();
        if &(&n * &n) == self.0.numer() && &(&d * &d) == self.0.denom() {
            Some(Rational::from_big(n, d))
        } else {
            None
        }
    }

    /// Image in `F_d`: numerator times the inverse of the denominator.
    pub fn to_field(&self, field: FieldSpec) -> Result<FieldElement, FieldError> {
        let d = BigInt::from(field.modulus());
        let num = self.0.numer().mod_floor(&d).to_u64().unwrap_or(0);
        let den = self.0.denom().mod_floor(&d).to_u64().unwrap_or(0);
        let den = FieldElement { value: den, field };
        let inv = den.inv().map_err(|_| FieldError::NotRepresentable(self.to_string(), field.modulus()))?;
        FieldElement { value: num, field }.mul(inv)
    }
}

impl From<FieldElement> for Rational {
    fn from(e: FieldElement) -> Self {
        Rational::integer(e.value as i64)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(String);

impl FromStr for Rational {
    type Err = ParseRationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| err())?;
                let d: BigInt = d.trim().parse().map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Rational::from_big(n, d))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| err())?;
                Ok(Rational(BigRational::from_integer(n)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Coefficient domain of a polynomial: a prime field or the rationals.
///
/// Values of either domain are carried as [`Rational`]; in modular mode they
/// are always integers in `[0, d-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoeffDomain {
    Modular(FieldSpec),
    Rational,
}

impl CoeffDomain {
    pub fn modulus(self) -> Option<u64> {
        match self {
            CoeffDomain::Modular(f) => Some(f.modulus()),
            CoeffDomain::Rational => None,
        }
    }

    /// Bring an arbitrary rational into canonical form for this domain.
    pub fn normalize(self, value: &Rational) -> Result<Rational, FieldError> {
        match self {
            CoeffDomain::Rational => Ok(value.clone()),
            CoeffDomain::Modular(f) => value.to_field(f).map(Rational::from),
        }
    }

    fn reduce(self, value: Rational) -> Rational {
        match self {
            CoeffDomain::Rational => value,
            CoeffDomain::Modular(f) => {
                let d = BigInt::from(f.modulus());
                Rational(BigRational::from_integer(value.0.numer().mod_floor(&d)))
            }
        }
    }

    pub fn add(self, a: &Rational, b: &Rational) -> Rational {
        self.reduce(a + b)
    }

    pub fn sub(self, a: &Rational, b: &Rational) -> Rational {
        self.reduce(a - b)
    }

    pub fn mul(self, a: &Rational, b: &Rational) -> Rational {
        self.reduce(a * b)
    }

    pub fn neg(self, a: &Rational) -> Rational {
        self.reduce(-a)
    }

    pub fn inv(self, a: &Rational) -> Result<Rational, FieldError> {
        match self {
            CoeffDomain::Rational => a.recip().ok_or(FieldError::InverseOfZero),
            CoeffDomain::Modular(f) => {
                let e = a.to_field(f)?;
                e.inv().map(Rational::from)
            }
        }
    }

    /// The finite set of elementary values, ascending; `None` for the rationals.
    pub fn elements(self) -> Option<Vec<Rational>> {
        match self {
            CoeffDomain::Modular(f) => Some(f.elements().map(Rational::from).collect()),
            CoeffDomain::Rational => None,
        }
    }
}

impl fmt::Display for CoeffDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffDomain::Modular(spec) => write!(f, "F_{}", spec.modulus()),
            CoeffDomain::Rational => write!(f, "Q"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(d: u64) -> FieldSpec {
        FieldSpec::new(d).unwrap()
    }

    #[test]
    fn one_plus_one_is_zero_in_f2() {
        let a = f(2).one();
        assert_eq!(field_op(FieldOp::Add, a, Operand::Element(a)).unwrap().value(), 0);
    }

    #[test]
    fn inverse_of_two_in_f3() {
        assert_eq!(f(3).element(2).inv().unwrap().value(), 2);
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(f(5).zero().inv(), Err(FieldError::InverseOfZero));
        assert_eq!(
            field_op(FieldOp::Inv, f(5).zero(), Operand::None),
            Err(FieldError::InverseOfZero)
        );
    }

    #[test]
    fn composite_moduli_rejected() {
        for d in [0, 1, 4, 6, 9, 15] {
            assert_eq!(FieldSpec::new(d), Err(FieldError::NotPrime(d)));
        }
        assert!(FieldSpec::new(7).is_ok());
    }

    #[test]
    fn mismatched_fields() {
        let r = f(2).one().add(f(3).one());
        assert_eq!(r, Err(FieldError::FieldMismatch(2, 3)));
    }

    #[test]
    fn multiplicative_identity() {
        for a in f(5).elements() {
            assert_eq!(a.mul(f(5).one()).unwrap(), a);
        }
    }

    #[test]
    fn fermat_identity_exhaustive() {
        for d in [2, 3, 5, 7] {
            for a in f(d).elements() {
                assert_eq!(field_op(FieldOp::Pow, a, Operand::Exponent(d)).unwrap(), a);
            }
        }
    }

    #[test]
    fn inverses_multiply_to_one() {
        for d in [2, 3, 5, 7] {
            for a in f(d).elements().skip(1) {
                assert_eq!(a.mul(a.inv().unwrap()).unwrap(), f(d).one());
            }
        }
    }

    #[test]
    fn commutative_and_associative_exhaustive() {
        for d in [2, 3, 5] {
            let els: Vec<_> = f(d).elements().collect();
            for &a in &els {
                for &b in &els {
                    assert_eq!(a.add(b), b.add(a));
                    assert_eq!(a.mul(b), b.mul(a));
                    for &c in &els {
                        assert_eq!(a.add(b).unwrap().add(c), a.add(b.add(c).unwrap()));
                        assert_eq!(a.mul(b).unwrap().mul(c), a.mul(b.mul(c).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn rational_lowest_terms() {
        let r = Rational::new(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!("4/8".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_sqrt() {
        assert_eq!(Rational::new(25, 4).sqrt_exact(), Some(Rational::new(5, 2)));
        assert_eq!(Rational::integer(2).sqrt_exact(), None);
        assert_eq!(Rational::integer(-1).sqrt_exact(), None);
    }

    #[test]
    fn rational_into_field() {
        // 1/2 in F_3 is 2 since 2*2 = 4 = 1.
        assert_eq!(Rational::new(1, 2).to_field(f(3)).unwrap().value(), 2);
        assert!(Rational::new(1, 3).to_field(f(3)).is_err());
        assert_eq!(Rational::integer(-1).to_field(f(5)).unwrap().value(), 4);
    }

    #[test]
    fn domain_arithmetic() {
        let m = CoeffDomain::Modular(f(2));
        assert_eq!(m.add(&Rational::one(), &Rational::one()), Rational::zero());
        assert_eq!(m.neg(&Rational::one()), Rational::one());
        let q = CoeffDomain::Rational;
        assert_eq!(q.inv(&Rational::integer(4)).unwrap(), Rational::new(1, 4));
        assert!(q.inv(&Rational::zero()).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn brute_sum(p: i64, q: i64, r: i64, s: i64) -> (i64, i64) {
            let mut n = p * s + r * q;
            let mut d = q * s;
            if d < 0 {
                n = -n;
                d = -d;
            }
            let g = num_integer::gcd(n, d);
            (n / g, d / g)
        }

        proptest! {
            #[test]
            fn rational_addition_is_exact(p in -50i64..50, q in 1i64..50, r in -50i64..50, s in 1i64..50) {
                let sum = &Rational::new(p, q) + &Rational::new(r, s);
                let (n, d) = brute_sum(p, q, r, s);
                prop_assert_eq!(sum.numer(), &BigInt::from(n));
                prop_assert_eq!(sum.denom(), &BigInt::from(d));
            }
        }
    }
}
