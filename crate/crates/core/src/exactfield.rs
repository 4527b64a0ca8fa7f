//! Exact arithmetic over Q and real quadratic fields Q(√D).
//!
//! [`QuadNum`] stores `a + b√D` with arbitrary-precision rational components.
//! Ordering, floors and signs are decided with rational arithmetic only;
//! [`QuadNum::to_f64`] exists for rendering.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mixed arithmetic between Q(√{0}) and Q(√{1})")]
    MismatchedField(u32, u32),
    #[error("{0} is not a square-free integer greater than 1")]
    NotSquareFree(u32),
}

/// Builds a rational from a numerator and denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds an integral rational.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn is_square_free(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u32;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Exact floor of a rational.
pub fn floor_rational(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Formats a rational as `p` or `p/q`.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let int: BigInt = if ip_abs.is_empty() { BigInt::zero() } else { ip_abs.parse().ok()? };
        let frac: BigInt = if fp.is_empty() { BigInt::zero() } else { fp.parse().ok()? };
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let mag = Rational::new(int * &scale + frac, scale);
        return Some(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// An element `a + b√D` of the real quadratic field Q(√D).
///
/// Equality is componentwise. Arithmetic between different `D` panics through
/// the operator traits; the `checked_*` methods report it as an error instead.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: Rational,
    b: Rational,
    d: u32,
}

impl QuadNum {
    pub fn new(a: Rational, b: Rational, d: u32) -> Result<Self, FieldError> {
        if !is_square_free(d) {
            return Err(FieldError::NotSquareFree(d));
        }
        Ok(QuadNum { a, b, d })
    }

    /// Constructor for callers that already hold a valid `D`.
    pub(crate) fn raw(a: Rational, b: Rational, d: u32) -> Self {
        debug_assert!(is_square_free(d));
        QuadNum { a, b, d }
    }

    pub fn from_rational(a: Rational, d: u32) -> Self {
        Self::raw(a, Rational::zero(), d)
    }

    pub fn from_int(n: i64, d: u32) -> Self {
        Self::from_rational(rint(n), d)
    }

    /// `(p + q√D) / den` from small integers.
    pub fn from_ints(p: i64, q: i64, den: i64, d: u32) -> Self {
        Self::raw(rat(p, den), rat(q, den), d)
    }

    pub fn zero(d: u32) -> Self {
        Self::from_int(0, d)
    }

    pub fn one(d: u32) -> Self {
        Self::from_int(1, d)
    }

    /// √D itself.
    pub fn sqrt_d(d: u32) -> Self {
        Self::raw(Rational::zero(), Rational::one(), d)
    }

    /// The golden ratio τ = (1+√5)/2.
    pub fn tau() -> Self {
        Self::from_ints(1, 1, 2, 5)
    }

    /// The Galois conjugate σ = (1−√5)/2 of τ.
    pub fn sigma() -> Self {
        Self::from_ints(1, -1, 2, 5)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self::raw(self.a.clone(), -self.b.clone(), self.d)
    }

    /// Field norm `a² − D b²`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * rint(self.d as i64)
    }

    /// Field trace `2a`.
    pub fn trace(&self) -> Rational {
        &self.a + &self.a
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        Ok(Self::raw(&self.a + &o.a, &self.b + &o.b, self.d))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        Ok(Self::raw(&self.a - &o.a, &self.b - &o.b, self.d))
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        let dd = rint(self.d as i64);
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Self::raw(a, b, self.d))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, FieldError> {
        self.same_field(o)?;
        self.checked_mul(&o.inv()?)
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::raw(&self.a / &n, -(&self.b / &n), self.d))
    }

    fn same_field(&self, o: &Self) -> Result<(), FieldError> {
        if self.d == o.d {
            Ok(())
        } else {
            Err(FieldError::MismatchedField(self.d, o.d))
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::raw(&self.a * r, &self.b * r, self.d)
    }

    /// Sign of the real embedding with √D > 0.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison; errors only on mismatched fields.
    pub fn compare(&self, o: &Self) -> Result<Ordering, FieldError> {
        self.same_field(o)?;
        Ok(sign_of(&(&self.a - &o.a), &(&self.b - &o.b), self.d))
    }

    /// Greatest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return floor_rational(&self.a);
        }
        // x = (P ± √M) / Q with M a non-square, so √M lies strictly between
        // consecutive integers and the floor reduces to integer division.
        let q = self.a.denom() * self.b.denom();
        let p = self.a.numer() * self.b.denom();
        let m = self.b.numer() * self.b.numer() * BigInt::from(self.d) * self.a.denom() * self.a.denom();
        let s = m.sqrt();
        if self.b.is_positive() {
            (p + s).div_floor(&q)
        } else {
            (p - s - BigInt::one()).div_floor(&q)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -((-self).floor())
    }

    /// True when the value is an integer.
    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    /// Nearest double; for rendering only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    pub fn pow(&self, k: i32) -> Self {
        let base = if k < 0 { self.inv().expect("power of zero") } else { self.clone() };
        let mut out = Self::one(self.d);
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    pub fn min(self, o: Self) -> Self {
        if self <= o {
            self
        } else {
            o
        }
    }

    pub fn max(self, o: Self) -> Self {
        if self >= o {
            self
        } else {
            o
        }
    }

    /// Components as reduced-fraction strings `[a, b]`.
    pub fn to_strings(&self) -> [String; 2] {
        [rational_string(&self.a), rational_string(&self.b)]
    }

    pub fn from_strings(a: &str, b: &str, d: u32) -> Option<Self> {
        Some(Self::raw(parse_rational(a)?, parse_rational(b)?, d))
    }
}

fn sign_of(a: &Rational, b: &Rational, d: u32) -> Ordering {
    let sa = a.cmp(&Rational::zero());
    let sb = b.cmp(&Rational::zero());
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    if let (Some(fa), Some(fb)) = (a.to_f64(), b.to_f64()) {
        let fbd = fb * (d as f64).sqrt();
        let v = fa + fbd;
        if v.is_finite() && v.abs() > 1e-9 * (fa.abs() + fbd.abs()) {
            return if v > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
    }
    let lhs = a * a;
    let rhs = b * b * rint(d as i64);
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => unreachable!("a² = D b² with D square-free and b ≠ 0"),
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadNum {
    /// Panics on mismatched fields.
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other).expect("comparison across quadratic fields")
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", rational_string(&self.a));
        }
        let b_abs = self.b.abs();
        let b_str = if b_abs.is_one() { String::new() } else { rational_string(&b_abs) };
        if self.a.is_zero() {
            let sign = if self.b.is_negative() { "-" } else { "" };
            write!(f, "{}{}√{}", sign, b_str, self.d)
        } else {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "{} {} {}√{}", rational_string(&self.a), sign, b_str, self.d)
        }
    }
}

impl<'a> Add<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn add(self, o: &QuadNum) -> QuadNum {
        self.checked_add(o).expect("quadratic field mismatch")
    }
}

impl<'a> Sub<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn sub(self, o: &QuadNum) -> QuadNum {
        self.checked_sub(o).expect("quadratic field mismatch")
    }
}

impl<'a> Mul<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn mul(self, o: &QuadNum) -> QuadNum {
        self.checked_mul(o).expect("quadratic field mismatch")
    }
}

impl<'a> Div<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn div(self, o: &QuadNum) -> QuadNum {
        self.checked_div(o).expect("division by zero or field mismatch")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: &QuadNum) -> QuadNum {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<QuadNum> for &'a QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::raw(-self.a, -self.b, self.d)
    }
}

impl<'a> Neg for &'a QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::raw(-self.a.clone(), -self.b.clone(), self.d)
    }
}

impl AddAssign<&QuadNum> for QuadNum {
    fn add_assign(&mut self, o: &QuadNum) {
        assert_eq!(self.d, o.d, "quadratic field mismatch");
        self.a += &o.a;
        self.b += &o.b;
    }
}

impl SubAssign<&QuadNum> for QuadNum {
    fn sub_assign(&mut self, o: &QuadNum) {
        assert_eq!(self.d, o.d, "quadratic field mismatch");
        self.a -= &o.a;
        self.b -= &o.b;
    }
}

impl MulAssign<&QuadNum> for QuadNum {
    fn mul_assign(&mut self, o: &QuadNum) {
        *self = &*self * o;
    }
}

/// Field operations shared by [`Rational`] and [`QuadNum`], used by the
/// generic linear algebra helpers.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for QuadNum {
    fn zero_like(&self) -> Self {
        QuadNum::zero(self.d)
    }
    fn one_like(&self) -> Self {
        QuadNum::one(self.d)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}
