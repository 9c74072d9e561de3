//! Exact rationals.
//!
//! Values that fit in `i64 / i64` stay on a machine-word fast path; anything
//! larger is promoted to a boxed [`BigRational`]. The representation is kept
//! canonical (lowest terms, positive denominator, small whenever possible), so
//! structural equality and hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64, i64),
    Big(Box<BigRational>),
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational::from_i128(num as i128, den as i128)
    }

    pub fn from_integer(v: i64) -> Rational {
        Rational(Repr::Small(v, 1))
    }

    pub fn zero() -> Rational {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Rational {
        Rational(Repr::Small(1, 1))
    }

    fn from_i128(num: i128, den: i128) -> Rational {
        debug_assert!(den != 0);
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = n.gcd(&d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new_raw(n.into(), d.into())))),
        }
    }

    pub fn from_big(r: BigRational) -> Rational {
        // BigRational is already reduced with a positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(r))),
        }
    }

    pub fn from_bigint(v: BigInt) -> Rational {
        Rational::from_big(BigRational::from_integer(v))
    }

    /// Exact value of a finite float (every f64 is a dyadic rational).
    pub fn from_f64(v: f64) -> Option<Rational> {
        BigRational::from_float(v).map(Rational::from_big)
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => {
                if b.is_negative() {
                    -1
                } else if b.is_zero() {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rational::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(b) => Rational::from_big(b.recip()),
        }
    }

    pub fn pow(&self, exp: i32) -> Rational {
        if exp < 0 {
            return self.recip().pow(-exp);
        }
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn floor(&self) -> BigInt {
        self.to_big().floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.to_big().ceil().to_integer()
    }

    /// Nearest integer, halves rounded away from zero.
    pub fn round(&self) -> BigInt {
        self.to_big().round().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                b.to_f64().unwrap_or_else(|| if b.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
            }
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    /// `"num/den"` form, always carrying the denominator.
    pub fn to_fraction_string(&self) -> String {
        match &self.0 {
            Repr::Small(n, d) => format!("{n}/{d}"),
            Repr::Big(b) => format!("{}/{}", b.numer(), b.denom()),
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    fn add_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if *b == *d {
                    Rational::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Rational::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
                }
            }
            _ => Rational::from_big(self.to_big() + o.to_big()),
        }
    }

    fn sub_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if *b == *d {
                    Rational::from_i128(*a as i128 - *c as i128, *b as i128)
                } else {
                    Rational::from_i128(*a as i128 * *d as i128 - *c as i128 * *b as i128, *b as i128 * *d as i128)
                }
            }
            _ => Rational::from_big(self.to_big() - o.to_big()),
        }
    }

    fn mul_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rational::from_big(self.to_big() * o.to_big()),
        }
    }

    fn div_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                assert!(*c != 0, "division by zero");
                Rational::from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
            }
            _ => {
                assert!(!o.is_zero(), "division by zero");
                Rational::from_big(self.to_big() / o.to_big())
            }
        }
    }

    fn neg_ref(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational::from_i128(-(*n as i128), *d as i128),
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $inner:ident, $trassign:ident, $massign:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                self.$inner(rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$inner(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                self.$inner(rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$inner(&rhs)
            }
        }
        impl $trassign<&Rational> for Rational {
            fn $massign(&mut self, rhs: &Rational) {
                *self = self.$inner(rhs);
            }
        }
        impl $trassign<Rational> for Rational {
            fn $massign(&mut self, rhs: Rational) {
                *self = self.$inner(&rhs);
            }
        }
    };
}

binop!(Add, add, add_ref, AddAssign, add_assign);
binop!(Sub, sub, sub_ref, SubAssign, sub_assign);
binop!(Mul, mul, mul_ref, MulAssign, mul_assign);
binop!(Div, div, div_ref, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_integer(v as i64)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_bigint(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational::from_big(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"p/q"` or a bare integer `"p"`. Decimal notation is rejected.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |part: &str| -> Result<BigInt, Error> {
            let ok = !part.is_empty()
                && part
                    .strip_prefix('-')
                    .or_else(|| part.strip_prefix('+'))
                    .unwrap_or(part)
                    .bytes()
                    .all(|b| b.is_ascii_digit())
                && part.bytes().any(|b| b.is_ascii_digit());
            if !ok {
                return Err(Error::Parse(format!("not a rational: {s:?}")));
            }
            part.parse::<BigInt>().map_err(|_| Error::Parse(format!("not a rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                Ok(Rational::from_big(BigRational::new(n, d)))
            }
            None => Ok(Rational::from_bigint(parse_int(s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn lowest_terms_and_sign() {
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(3, -6), r(-1, 2));
        assert_eq!(r(-3, -6).to_fraction_string(), "1/2");
        assert_eq!(r(0, -5).to_fraction_string(), "0/1");
    }

    #[test]
    fn promotes_and_demotes() {
        let big = Rational::from_integer(i64::MAX) * Rational::from_integer(i64::MAX);
        assert!(matches!(big.0, Repr::Big(_)));
        let back = &big / Rational::from_integer(i64::MAX);
        assert!(matches!(back.0, Repr::Small(_, _)));
        assert_eq!(back, Rational::from_integer(i64::MAX));
        let m = -Rational::from_integer(i64::MIN);
        assert_eq!(m.numer(), BigInt::from(i64::MIN).abs());
    }

    #[test]
    fn parse_and_print() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), r(1, 3));
        assert_eq!("-7".parse::<Rational>().unwrap(), r(-7, 1));
        assert_eq!("6/-4".parse::<Rational>().unwrap(), r(-3, 2));
        assert!("0.5".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("/3".parse::<Rational>().is_err());
        assert!("-".parse::<Rational>().is_err());
        assert_eq!(r(5, 1).to_string(), "5");
        assert_eq!(r(-5, 3).to_string(), "-5/3");
    }

    #[test]
    fn rounding() {
        assert_eq!(r(5, 2).round(), BigInt::from(3));
        assert_eq!(r(-5, 2).round(), BigInt::from(-3));
        assert_eq!(r(7, 3).floor(), BigInt::from(2));
        assert_eq!(r(-7, 3).floor(), BigInt::from(-3));
    }

    proptest! {
        #[test]
        fn field_laws_match_bigrational(
            a in -1_000_000_000_000i64..1_000_000_000_000, b in 1i64..1_000_000_000_000,
            c in -1_000_000_000_000i64..1_000_000_000_000, d in 1i64..1_000_000_000_000,
        ) {
            let x = r(a, b);
            let y = r(c, d);
            let bx = BigRational::new(a.into(), b.into());
            let by = BigRational::new(c.into(), d.into());
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            let s = (&x * &y * &y).to_fraction_string();
            prop_assert_eq!(s.parse::<Rational>().unwrap(), &x * &y * &y);
        }
    }
}
