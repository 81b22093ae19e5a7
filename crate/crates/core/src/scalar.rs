//! Scalars over a shared commutative-ring contract.
//!
//! Two backends exist: exact rationals (the default everywhere) and `f64`.
//! Mixing backends in one operation is an error, never a coercion.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(Backend, Backend),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid number literal `{0}`")]
    Parse(String),
}

/// Which number system a scalar lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("f64"),
        }
    }
}

impl FromStr for Backend {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "f64" | "float" => Ok(Backend::Float),
            other => Err(ScalarError::Parse(other.to_string())),
        }
    }
}

/// Exact rational number in lowest terms with a positive denominator.
///
/// Values that fit in `i64` numerator/denominator stay on the small path;
/// anything that overflows is promoted to a big rational and demoted again
/// as soon as it fits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(Ratio::from_integer(1)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small(Ratio::from_integer(n)))
    }

    pub fn new(numer: i64, denom: i64) -> Result<Self, ScalarError> {
        if denom == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        // Ratio::new reduces; i64::MIN edge cases go through the big path.
        if numer == i64::MIN || denom == i64::MIN {
            return Ok(Self::from_big(BigRational::new(numer.into(), denom.into())));
        }
        Ok(Rational(Repr::Small(Ratio::new(numer, denom))))
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                Rational(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => Rational(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        // Keep the divisor positive so the small path never negates a numerator.
        let small = |a: &Ratio<i64>, b: &Ratio<i64>| {
            if b.is_negative() {
                a.checked_div(&-*b)
                    .filter(|r| *r.numer() != i64::MIN)
                    .map(|r| -r)
            } else {
                a.checked_div(b)
            }
        };
        Ok(self.binary(rhs, small, |a, b| a / b))
    }

    pub fn recip(&self) -> Result<Rational, ScalarError> {
        Rational::one().checked_div(self)
    }

    fn binary(
        &self,
        rhs: &Rational,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Rational {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = small(a, b) {
                if *r.numer() != i64::MIN && *r.denom() != i64::MIN {
                    return Rational(Repr::Small(r));
                }
            }
        }
        Self::from_big(big(self.to_big(), rhs.to_big()))
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        self.binary(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(r) if *r.numer() != i64::MIN => Rational(Repr::Small(-*r)),
            _ => Rational::from_big(-self.to_big()),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Accepts `p`, `-p`, `p/q` and `-p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScalarError::Parse(s.to_string());
        let s_trim = s.trim();
        let (numer, denom) = match s_trim.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s_trim, "1"),
        };
        let numer: BigInt = numer.parse().map_err(|_| bad())?;
        let denom: BigInt = denom.parse().map_err(|_| bad())?;
        if denom.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational::from_big(BigRational::new(numer, denom)))
    }
}

/// A ring element tagged with its backend.
#[derive(Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn zero(backend: Backend) -> Self {
        match backend {
            Backend::Exact => Scalar::Exact(Rational::zero()),
            Backend::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(backend: Backend) -> Self {
        match backend {
            Backend::Exact => Scalar::Exact(Rational::one()),
            Backend::Float => Scalar::Float(1.0),
        }
    }

    pub fn from_int(n: i64, backend: Backend) -> Self {
        match backend {
            Backend::Exact => Scalar::Exact(Rational::from_integer(n)),
            Backend::Float => Scalar::Float(n as f64),
        }
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self, ScalarError> {
        Rational::new(numer, denom).map(Scalar::Exact)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64(),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Converts to the given backend. Exact to float is lossy; float to exact
    /// is rejected because it would invent precision.
    pub fn to_backend(&self, backend: Backend) -> Result<Scalar, ScalarError> {
        match (self, backend) {
            (Scalar::Exact(_), Backend::Exact) | (Scalar::Float(_), Backend::Float) => Ok(self.clone()),
            (Scalar::Exact(r), Backend::Float) => Ok(Scalar::Float(r.to_f64())),
            (Scalar::Float(_), Backend::Exact) => {
                Err(ScalarError::BackendMismatch(Backend::Float, Backend::Exact))
            }
        }
    }

    fn check(&self, rhs: &Scalar) -> Result<(), ScalarError> {
        if self.backend() == rhs.backend() {
            Ok(())
        } else {
            Err(ScalarError::BackendMismatch(self.backend(), rhs.backend()))
        }
    }

    pub fn try_add(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(rhs)?;
        Ok(self + rhs)
    }

    pub fn try_sub(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(rhs)?;
        Ok(self - rhs)
    }

    pub fn try_mul(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(rhs)?;
        Ok(self * rhs)
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(rhs)?;
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.checked_div(b).map(Scalar::Exact),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a / b)),
            _ => unreachable!(),
        }
    }

    /// `self += a * b`, the inner step of every contraction loop.
    pub(crate) fn mul_add_assign(&mut self, a: &Scalar, b: &Scalar) {
        match (self, a, b) {
            (Scalar::Float(acc), Scalar::Float(x), Scalar::Float(y)) => *acc += x * y,
            (Scalar::Exact(acc), Scalar::Exact(x), Scalar::Exact(y)) => *acc = &*acc + &(x * y),
            (acc, a, b) => panic!(
                "backend mismatch in contraction: {} += {} * {}",
                acc.backend(),
                a.backend(),
                b.backend()
            ),
        }
    }

    /// Entrywise closeness: exact scalars compare exactly and ignore `tol`.
    pub fn approx_eq(&self, rhs: &Scalar, tol: f64) -> bool {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }
}

// Operator impls assume matching backends; tensors guarantee this by
// construction, and the `try_*` methods are the checked entry points.
macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    (a, b) => panic!("backend mismatch: {} vs {}", a.backend(), b.backend()),
                }
            }
        }

        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Exact(Rational::from_integer(n))
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn rationals_are_reduced() {
        assert_eq!(q("2/4").to_string(), "1/2");
        assert_eq!(q("3/-6").to_string(), "-1/2");
        assert_eq!(q("-8/4").to_string(), "-2");
        assert_eq!(Rational::new(6, -9).unwrap(), q("-2/3"));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert_eq!(Rational::new(1, 0), Err(ScalarError::DivisionByZero));
        assert_eq!("1/0".parse::<Rational>(), Err(ScalarError::DivisionByZero));
        assert!(matches!("x".parse::<Rational>(), Err(ScalarError::Parse(_))));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::from_integer(i64::MAX);
        let sq = &big * &big;
        assert_eq!(sq.numer(), BigInt::from(i64::MAX) * BigInt::from(i64::MAX));
        let back = sq.checked_div(&big).unwrap();
        assert_eq!(back, big);
        // demoted value compares equal to the small representation
        assert!(matches!(back.0, Repr::Small(_)));
        let m = Rational::from_integer(i64::MIN + 1);
        let d = &m - &Rational::one();
        assert_eq!(d.to_string(), i64::MIN.to_string());
        assert_eq!(&d + &Rational::one(), m);
    }

    #[test]
    fn mixed_backends_are_rejected() {
        let a = Scalar::from_int(1, Backend::Exact);
        let b = Scalar::Float(1.0);
        assert_eq!(a.try_add(&b), Err(ScalarError::BackendMismatch(Backend::Exact, Backend::Float)));
        assert!(a.try_mul(&b).is_err());
        assert!(b.to_backend(Backend::Exact).is_err());
        assert_eq!(a.to_backend(Backend::Float).unwrap(), Scalar::Float(1.0));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Scalar::ratio(-3, 4).unwrap().to_string(), "-3/4");
        assert_eq!(Scalar::Float(1.0).to_string(), "1.0");
        assert_eq!(Scalar::from(5).to_string(), "5");
    }
}
