//! Scalar abstraction shared by the numeric layers.
//!
//! [`Real`] is implemented for every `num_traits::Float` type and for the
//! multiprecision [`Mp`] wrapper. Error radii are always carried as `f64`
//! upper bounds next to the midpoint.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Signed, ToPrimitive, Zero};

/// Ordered real scalar with the transcendental functions needed here.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64_prec(x: f64, prec: u32) -> Self;
    fn from_bigint(n: &BigInt, prec: u32) -> Self;
    fn from_mp(x: &Mp) -> Self;
    fn to_f64(&self) -> f64;
    /// Mantissa bits.
    fn precision(&self) -> u32;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn is_zero(&self) -> bool;

    fn zero(prec: u32) -> Self {
        Self::from_f64_prec(0.0, prec)
    }

    fn one(prec: u32) -> Self {
        Self::from_f64_prec(1.0, prec)
    }

    fn from_ratio(q: &BigRational, prec: u32) -> Self {
        let n = Self::from_bigint(q.numer(), prec + 8);
        let d = Self::from_bigint(q.denom(), prec + 8);
        n / d
    }

    /// Relative rounding error of one operation at this precision.
    fn unit_roundoff(&self) -> f64 {
        2f64.powi(1 - self.precision() as i32).max(f64::MIN_POSITIVE)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Real for T
where
    T: Float + fmt::Debug + Send + Sync + 'static,
{
    fn from_f64_prec(x: f64, _prec: u32) -> Self {
        T::from(x).expect("f64 is representable")
    }
    fn from_bigint(n: &BigInt, _prec: u32) -> Self {
        T::from(n.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(T::nan)
    }
    fn from_ratio(q: &BigRational, _prec: u32) -> Self {
        T::from(q.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(T::nan)
    }
    fn from_mp(x: &Mp) -> Self {
        T::from(x.to_f64()).unwrap_or_else(T::nan)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn precision(&self) -> u32 {
        (T::epsilon().to_f64().unwrap().log2().abs() as u32) + 1
    }
    fn abs(&self) -> Self {
        Float::abs(*self)
    }
    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }
    fn ln(&self) -> Self {
        Float::ln(*self)
    }
    fn exp(&self) -> Self {
        Float::exp(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        Float::atan2(*self, *x)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Multiprecision binary float. Binary operations run at the larger of
/// the two operand precisions.
#[derive(Clone)]
pub struct Mp(BigFloat);

impl Mp {
    pub fn new(x: BigFloat) -> Self {
        Mp(x)
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn prec(&self) -> usize {
        self.0.precision().unwrap_or(64).max(64)
    }

    pub fn with_precision(&self, prec: u32) -> Mp {
        let mut x = self.0.clone();
        let _ = x.set_precision(prec.max(64) as usize, RM);
        Mp(x)
    }

    pub fn pi(prec: u32) -> Mp {
        CONSTS.with(|c| Mp(c.borrow_mut().pi(prec as usize, RM)))
    }

    /// Base-2 exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.0.is_zero() {
            None
        } else {
            self.0.exponent()
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        let s = format!("{}", self.0);
        let (mant, exp) = match s.split_once('e') {
            Some((m, e)) => (m.to_string(), e.to_string()),
            None => (s.clone(), "+0".into()),
        };
        let neg = mant.starts_with('-');
        let body = mant.trim_start_matches('-');
        let keep: String = body.chars().take(digits + 1).collect();
        format!("{}{}e{}", if neg { "-" } else { "" }, keep, exp)
    }

    fn binop(&self, o: &Mp, f: impl Fn(&BigFloat, &BigFloat, usize) -> BigFloat) -> Mp {
        let p = self.prec().max(o.prec());
        Mp(f(&self.0, &o.0, p))
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({})", self.to_decimal(20))
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Mp {
    fn eq(&self, o: &Self) -> bool {
        self.0.cmp(&o.0) == Some(0)
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.0.cmp(&o.0).map(|c| c.cmp(&0))
    }
}

macro_rules! mp_op {
    ($tr:ident, $m:ident, $call:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $m(self, o: Mp) -> Mp {
                self.binop(&o, |a, b, p| a.$call(b, p, RM))
            }
        }
        impl<'a> $tr<&'a Mp> for &'a Mp {
            type Output = Mp;
            fn $m(self, o: &'a Mp) -> Mp {
                self.binop(o, |a, b, p| a.$call(b, p, RM))
            }
        }
    };
}

mp_op!(Add, add, add);
mp_op!(Sub, sub, sub);
mp_op!(Mul, mul, mul);
mp_op!(Div, div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(self.0.neg())
    }
}

impl Real for Mp {
    fn from_f64_prec(x: f64, prec: u32) -> Self {
        Mp(BigFloat::from_f64(x, prec.max(64) as usize))
    }

    fn from_bigint(n: &BigInt, prec: u32) -> Self {
        let p = prec.max(64) as usize;
        if n.is_zero() {
            return Mp(BigFloat::new(p));
        }
        let digits = n.magnitude().to_u64_digits();
        let sign = if n.is_negative() { Sign::Neg } else { Sign::Pos };
        let e = (64 * digits.len()) as i32;
        let mut x = BigFloat::from_words(&digits, sign, e);
        let _ = x.set_precision(p.max(64 * digits.len()), RM);
        let _ = x.set_precision(p, RM);
        Mp(x)
    }

    fn from_mp(x: &Mp) -> Self {
        x.clone()
    }

    fn to_f64(&self) -> f64 {
        match self.0.as_raw_parts() {
            Some((m, _, s, e, _)) if !self.0.is_zero() => {
                let top = *m.last().unwrap() as f64;
                let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
                let v = (top + next * 2f64.powi(-64)) * 2f64.powi(e - 64);
                if s == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            _ => 0.0,
        }
    }

    fn precision(&self) -> u32 {
        self.prec() as u32
    }

    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }

    fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(self.prec(), RM))
    }

    fn ln(&self) -> Self {
        CONSTS.with(|c| Mp(self.0.ln(self.prec(), RM, &mut c.borrow_mut())))
    }

    fn exp(&self) -> Self {
        CONSTS.with(|c| Mp(self.0.exp(self.prec(), RM, &mut c.borrow_mut())))
    }

    fn atan2(&self, x: &Self) -> Self {
        let p = self.prec().max(x.prec()) as u32;
        let y = self;
        if x.0.is_zero() {
            let half = Mp::pi(p) / Mp::from_f64_prec(2.0, p);
            return if y.0.is_negative() {
                -half
            } else if y.0.is_zero() {
                Mp::zero(p)
            } else {
                half
            };
        }
        let q = y / x;
        let base = CONSTS.with(|c| Mp(q.0.atan(p as usize, RM, &mut c.borrow_mut())));
        if x.0.is_positive() {
            base
        } else if y.0.is_negative() {
            base - Mp::pi(p)
        } else {
            base + Mp::pi(p)
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Complex number over a [`Real`] scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Real> Cx<S> {
    pub fn new(re: S, im: S) -> Self {
        Cx { re, im }
    }

    pub fn real(re: S) -> Self {
        let p = re.precision();
        Cx { re, im: S::zero(p) }
    }

    pub fn conj(&self) -> Self {
        Cx::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> S {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> S {
        self.im.atan2(&self.re)
    }

    pub fn scale(&self, k: &S) -> Self {
        Cx::new(self.re.clone() * k.clone(), self.im.clone() * k.clone())
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        Cx::new(self.re.clone() / n.clone(), -self.im.clone() / n)
    }

    pub fn precision(&self) -> u32 {
        self.re.precision().max(self.im.precision())
    }
}

impl<S: Real> Add for Cx<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl<S: Real> Sub for Cx<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl<S: Real> Mul for Cx<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        Cx::new(re, im)
    }
}

impl<S: Real> Div for Cx<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}

impl<S: Real> Neg for Cx<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Cx::new(-self.re, -self.im)
    }
}

fn up(x: f64) -> f64 {
    x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

/// Real midpoint with an absolute error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct RBall<S> {
    pub mid: S,
    pub rad: f64,
}

impl<S: Real> RBall<S> {
    pub fn new(mid: S, rad: f64) -> Self {
        RBall { mid, rad }
    }

    pub fn exact(mid: S) -> Self {
        RBall { mid, rad: 0.0 }
    }

    fn round_err(&self, v: &S) -> f64 {
        v.to_f64().abs() * v.unit_roundoff()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.to_f64().abs() <= self.rad
    }

    pub fn mag(&self) -> f64 {
        up(self.mid.to_f64().abs() * (1.0 + self.mid.unit_roundoff()) + self.rad)
    }

    pub fn abs(&self) -> Self {
        RBall::new(self.mid.abs(), self.rad)
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.mid.clone() + o.mid.clone();
        let r = up(self.rad + o.rad + self.round_err(&m));
        RBall::new(m, r)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.mid.clone() - o.mid.clone();
        let r = up(self.rad + o.rad + self.round_err(&m));
        RBall::new(m, r)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.mid.clone() * o.mid.clone();
        let a = self.mid.to_f64().abs();
        let b = o.mid.to_f64().abs();
        let r = up(a * o.rad + b * self.rad + self.rad * o.rad + self.round_err(&m));
        RBall::new(m, r)
    }

    /// `None` when the divisor ball contains zero.
    pub fn div(&self, o: &Self) -> Option<Self> {
        let b = o.mid.to_f64().abs();
        if b <= o.rad {
            return None;
        }
        let m = self.mid.clone() / o.mid.clone();
        let q = self.mid.to_f64().abs() / b;
        let r = up((self.rad + q * o.rad) / (b - o.rad) + self.round_err(&m));
        Some(RBall::new(m, r))
    }

    /// Natural log of a ball bounded away from zero.
    pub fn ln(&self) -> Option<Self> {
        let a = self.mid.to_f64();
        if a <= self.rad {
            return None;
        }
        let m = self.mid.ln();
        let r = up(self.rad / (a - self.rad) + self.round_err(&m) + m.unit_roundoff());
        Some(RBall::new(m, r))
    }
}

/// Complex midpoint with an absolute error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CBall<S> {
    pub mid: Cx<S>,
    pub rad: f64,
}

impl<S: Real> CBall<S> {
    pub fn new(mid: Cx<S>, rad: f64) -> Self {
        CBall { mid, rad }
    }

    fn round_err(&self, v: &Cx<S>) -> f64 {
        let u = v.re.unit_roundoff().min(v.im.unit_roundoff());
        2.0 * (v.re.to_f64().abs() + v.im.to_f64().abs()) * u
    }

    fn unit(&self) -> f64 {
        self.mid.re.unit_roundoff().min(self.mid.im.unit_roundoff())
    }

    pub fn mag_lo(&self) -> f64 {
        (self.mid.abs().to_f64() * (1.0 - self.unit() * 4.0) - self.rad).max(0.0)
    }

    pub fn mag(&self) -> f64 {
        up(self.mid.abs().to_f64() * (1.0 + 4.0 * self.unit()) + self.rad)
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.mid.clone() + o.mid.clone();
        let r = up(self.rad + o.rad + self.round_err(&m));
        CBall::new(m, r)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.mid.clone() - o.mid.clone();
        let r = up(self.rad + o.rad + self.round_err(&m));
        CBall::new(m, r)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.mid.clone() * o.mid.clone();
        let a = self.mid.abs().to_f64();
        let b = o.mid.abs().to_f64();
        let r = up(a * o.rad + b * self.rad + self.rad * o.rad + self.round_err(&m));
        CBall::new(m, r)
    }

    /// Squared modulus as a real ball.
    pub fn norm_sqr(&self) -> RBall<S> {
        let m = self.mid.norm_sqr();
        let a = self.mid.abs().to_f64();
        let r = up(2.0 * a * self.rad + self.rad * self.rad + 4.0 * m.to_f64().abs() * m.unit_roundoff());
        RBall::new(m, r)
    }
}

/// Value at one archimedean place.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaceValue<S> {
    Real(RBall<S>),
    Complex(CBall<S>),
}

impl<S: Real> PlaceValue<S> {
    pub fn rad(&self) -> f64 {
        match self {
            PlaceValue::Real(b) => b.rad,
            PlaceValue::Complex(b) => b.rad,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, PlaceValue::Complex(_))
    }

    /// Midpoint as an `f64` pair `(re, im)`.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        match self {
            PlaceValue::Real(b) => (b.mid.to_f64(), 0.0),
            PlaceValue::Complex(b) => (b.mid.re.to_f64(), b.mid.im.to_f64()),
        }
    }

    pub fn as_complex(&self) -> CBall<S> {
        match self {
            PlaceValue::Real(b) => CBall::new(Cx::real(b.mid.clone()), b.rad),
            PlaceValue::Complex(b) => b.clone(),
        }
    }

    /// Normalized absolute value: `|x|` at real places, `|x|^2` at complex ones.
    pub fn normalized_abs(&self) -> RBall<S> {
        match self {
            PlaceValue::Real(b) => b.abs(),
            PlaceValue::Complex(b) => b.norm_sqr(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (PlaceValue::Real(a), PlaceValue::Real(b)) => PlaceValue::Real(a.mul(b)),
            _ => PlaceValue::Complex(self.as_complex().mul(&o.as_complex())),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (PlaceValue::Real(a), PlaceValue::Real(b)) => PlaceValue::Real(a.add(b)),
            _ => PlaceValue::Complex(self.as_complex().add(&o.as_complex())),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        match (self, o) {
            (PlaceValue::Real(a), PlaceValue::Real(b)) => PlaceValue::Real(a.sub(b)),
            _ => PlaceValue::Complex(self.as_complex().sub(&o.as_complex())),
        }
    }

    /// Upper bound on `|self - o|` including both radii.
    pub fn dist_upper(&self, o: &Self) -> f64 {
        match self.sub(o) {
            PlaceValue::Real(b) => b.mag(),
            PlaceValue::Complex(b) => b.mag(),
        }
    }

    /// Upper bound on the plain modulus.
    pub fn mag(&self) -> f64 {
        match self {
            PlaceValue::Real(b) => b.mag(),
            PlaceValue::Complex(b) => b.mag(),
        }
    }
}

/// Point of `A = K_1 × … × K_r` with per-coordinate error radii.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchPoint<S> {
    pub coords: Vec<PlaceValue<S>>,
}

impl<S: Real> ArchPoint<S> {
    pub fn err(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.rad()).collect()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        ArchPoint {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ArchPoint {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// Sup over places of the coordinate distance upper bounds.
    pub fn sup_dist(&self, o: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| a.dist_upper(b))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn mp_roundtrips_integers() {
        let n: BigInt = "123456789012345678901234567890".parse().unwrap();
        let x = Mp::from_bigint(&n, 200);
        assert!((x.to_f64() - 1.2345678901234568e29).abs() < 1e15);
        let y = Mp::from_bigint(&BigInt::from(-7), 128);
        assert_eq!(y.to_f64(), -7.0);
    }

    #[test]
    fn mp_transcendentals() {
        let two = Mp::from_f64_prec(2.0, 256);
        let r = two.sqrt();
        assert!(((r.clone() * r).to_f64() - 2.0).abs() < 1e-15);
        let l = Mp::from_f64_prec(1.0, 128).exp().ln();
        assert!((l.to_f64() - 1.0).abs() < 1e-15);
        let a = Mp::from_f64_prec(1.0, 128).atan2(&Mp::from_f64_prec(-1.0, 128));
        assert!((a.to_f64() - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn ratio_to_mp_is_accurate() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let x = Mp::from_ratio(&q, 256);
        let three = Mp::from_f64_prec(3.0, 256);
        let d = (x * three - Mp::one(256)).abs();
        assert!(d.to_f64() < 1e-70);
    }

    #[test]
    fn f64_scalar_through_trait() {
        let x = <f64 as Real>::from_f64_prec(4.0, 0);
        assert_eq!(Real::sqrt(&x), 2.0);
        assert_eq!(Real::precision(&x), 53);
    }

    #[test]
    fn ball_product_encloses() {
        let a = RBall::new(1.5f64, 0.1);
        let b = RBall::new(-2.0f64, 0.2);
        let c = a.mul(&b);
        for (x, y) in [(1.4, -1.8), (1.6, -2.2), (1.4, -2.2), (1.6, -1.8)] {
            assert!((x * y - c.mid).abs() <= c.rad);
        }
    }
}
