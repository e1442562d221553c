//! Binary floating point with a configurable mantissa width, plus a complex
//! type built on it. Only the operations the spectral engine needs are here:
//! field arithmetic, square root, and the complex exponential.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const MIN_PRECISION: u32 = 24;

/// `mantissa · 2^exponent`, with `|mantissa|` holding exactly `prec` bits
/// unless the value is zero.
#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat {
            mant: BigInt::zero(),
            exp: 0,
            prec: prec.max(MIN_PRECISION),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::normalized(BigInt::from(v), 0, prec)
    }

    pub fn from_bigint(v: BigInt, prec: u32) -> Self {
        Self::normalized(v, 0, prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 on non-finite value");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mant = BigInt::from(mant);
        Self::normalized(if negative { -mant } else { mant }, exp, prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let prec = prec.max(MIN_PRECISION);
        if r.is_zero() {
            return Self::zero(prec);
        }
        let num_bits = r.numer().bits() as i64;
        let den_bits = r.denom().bits() as i64;
        let shift = prec as i64 + 2 + den_bits - num_bits;
        let (scaled, exp) = if shift >= 0 {
            (r.numer() << shift as usize, -shift)
        } else {
            (r.numer() >> (-shift) as usize, -shift)
        };
        Self::normalized(scaled / r.denom(), exp, prec)
    }

    fn normalized(mant: BigInt, exp: i64, prec: u32) -> Self {
        let prec = prec.max(MIN_PRECISION);
        if mant.is_zero() {
            return Self::zero(prec);
        }
        let bits = mant.bits() as i64;
        let shift = bits - prec as i64;
        if shift > 0 {
            let sign = mant.sign();
            let half = BigUint::one() << (shift as usize - 1);
            let mut mag = (mant.magnitude() + half) >> shift as usize;
            let mut exp = exp + shift;
            if mag.bits() > prec as u64 {
                mag >>= 1;
                exp += 1;
            }
            BigFloat {
                mant: BigInt::from_biguint(sign, mag),
                exp,
                prec,
            }
        } else {
            BigFloat {
                mant: mant << (-shift) as usize,
                exp: exp + shift,
                prec,
            }
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Same value rounded to `prec` bits.
    pub fn with_precision(&self, prec: u32) -> Self {
        Self::normalized(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// `e` with `2^(e-1) <= |x| < 2^e`; `i64::MIN` for zero.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigFloat {
            mant: self.mant.clone(),
            exp: self.exp + k,
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative BigFloat");
        if self.is_zero() {
            return self.clone();
        }
        // Scale to roughly 2·prec+4 bits with an even exponent, then take an
        // integer square root.
        let target = 2 * self.prec as i64 + 4;
        let mut shift = target - self.mant.bits() as i64;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let scaled = if shift >= 0 {
            self.mant.magnitude() << shift as usize
        } else {
            self.mant.magnitude() >> (-shift) as usize
        };
        Self::normalized(BigInt::from(scaled.sqrt()), (self.exp - shift) / 2, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (self.mant.magnitude() >> shift as usize)
            .to_u64()
            .expect("at most 64 bits") as f64;
        let mut value = top;
        let mut k = self.exp + shift;
        while k > 1000 {
            value *= 2f64.powi(1000);
            k -= 1000;
            if value.is_infinite() {
                break;
            }
        }
        while k < -1000 {
            value *= 2f64.powi(-1000);
            k += 1000;
            if value == 0.0 {
                break;
            }
        }
        value *= 2f64.powi(k as i32);
        if self.is_negative() {
            -value
        } else {
            value
        }
    }

    /// Decimal rendering rounded to `digits` places after the point.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let scaled = &self.mant * BigInt::from(10u32).pow(digits as u32);
        let rounded = if self.exp >= 0 {
            scaled << self.exp as usize
        } else {
            let shift = (-self.exp) as usize;
            let half = BigInt::one() << (shift - 1);
            if scaled.is_negative() {
                -((-scaled + half) >> shift)
            } else {
                (scaled + half) >> shift
            }
        };
        let negative = rounded.is_negative();
        let mut text = rounded.magnitude().to_string();
        if digits > 0 {
            if text.len() <= digits {
                text = "0".repeat(digits + 1 - text.len()) + &text;
            }
            text.insert(text.len() - digits, '.');
        }
        if negative {
            text.insert(0, '-');
        }
        text
    }

    fn aligned(a: &BigFloat, b: &BigFloat) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        (
            &a.mant << (a.exp - e) as usize,
            &b.mant << (b.exp - e) as usize,
            e,
        )
    }

    /// Real exponential.
    pub fn exp(&self) -> Self {
        BigComplex::new(self.clone(), BigFloat::zero(self.prec)).exp().re
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl BigFloat {
    fn cmp_value(&self, other: &Self) -> Ordering {
        let (a, b, _) = Self::aligned(self, other);
        a.cmp(&b)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.prec as f64) * 0.30103) as usize);
        write!(f, "{}", self.to_decimal_string(digits))
    }
}

impl Add for &BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: &BigFloat) -> BigFloat {
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() {
            return rhs.with_precision(prec);
        }
        if rhs.is_zero() {
            return self.with_precision(prec);
        }
        // An addend entirely below the rounding position cannot matter.
        let gap = prec as i64 + 4;
        if self.magnitude() - rhs.magnitude() > gap {
            return self.with_precision(prec);
        }
        if rhs.magnitude() - self.magnitude() > gap {
            return rhs.with_precision(prec);
        }
        let (a, b, e) = BigFloat::aligned(self, rhs);
        BigFloat::normalized(a + b, e, prec)
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat {
            mant: -&self.mant,
            exp: self.exp,
            prec: self.prec,
        }
    }
}

impl Sub for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        self + &(-rhs)
    }
}

impl Mul for &BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::normalized(&self.mant * &rhs.mant, self.exp + rhs.exp, self.prec.max(rhs.prec))
    }
}

impl Div for &BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: &BigFloat) -> BigFloat {
        assert!(!rhs.is_zero(), "BigFloat division by zero");
        let prec = self.prec.max(rhs.prec);
        if self.is_zero() {
            return BigFloat::zero(prec);
        }
        let shift = prec as i64 + 2 + rhs.mant.bits() as i64 - self.mant.bits() as i64;
        let shift = shift.max(0);
        let num = &self.mant << shift as usize;
        BigFloat::normalized(num / &rhs.mant, self.exp - rhs.exp - shift, prec)
    }
}

macro_rules! forward_owned {
    ($ty:ident, $($tr:ident $method:ident),*) => {$(
        impl $tr for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty { (&self).$method(&rhs) }
        }
        impl $tr<&$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty { (&self).$method(rhs) }
        }
    )*};
}

forward_owned!(BigFloat, Add add, Sub sub, Mul mul, Div div);
forward_owned!(BigComplex, Add add, Sub sub, Mul mul, Div div);

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex::new(BigFloat::zero(prec), BigFloat::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        BigComplex::new(BigFloat::from_f64(re, prec), BigFloat::from_f64(im, prec))
    }

    pub fn from_real(re: BigFloat) -> Self {
        let prec = re.precision();
        BigComplex::new(re, BigFloat::zero(prec))
    }

    pub fn precision(&self) -> u32 {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        BigComplex::new(self.re.with_precision(prec), self.im.with_precision(prec))
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> BigFloat {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Upper bound on the binary magnitude of either component.
    pub fn magnitude(&self) -> i64 {
        self.re.magnitude().max(self.im.magnitude())
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        BigComplex::new(self.re.mul_pow2(k), self.im.mul_pow2(k))
    }

    pub fn scale(&self, s: &BigFloat) -> Self {
        BigComplex::new(&self.re * s, &self.im * s)
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        BigComplex::new(&self.re / &d, &(-&self.im) / &d)
    }

    pub fn powi(&self, k: i32) -> Self {
        let prec = self.precision();
        let mut base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = BigComplex::from_real(BigFloat::one(prec));
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `e^z` by scaling `z` down by `2^s`, summing the Taylor series, and
    /// squaring `s` times, with guard bits for the squarings.
    pub fn exp(&self) -> Self {
        let prec = self.precision();
        let s = (self.magnitude().max(0) + 8) as u32;
        let wp = prec + s + 24;
        let r = self.with_precision(wp).mul_pow2(-(s as i64));
        let mut sum = BigComplex::from_real(BigFloat::one(wp));
        let mut term = sum.clone();
        let mut k = 1i64;
        loop {
            term = (&term * &r).scale(&(&BigFloat::one(wp) / &BigFloat::from_i64(k, wp)));
            if term.is_zero() || term.magnitude() < -(wp as i64) - 4 {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum.with_precision(prec)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(15);
        let im = self.im.to_decimal_string(digits);
        if let Some(stripped) = im.strip_prefix('-') {
            write!(f, "{} - {}i", self.re.to_decimal_string(digits), stripped)
        } else {
            write!(f, "{} + {}i", self.re.to_decimal_string(digits), im)
        }
    }
}

impl Add for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-&self.re, -&self.im)
    }
}

impl Mul for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }
}

impl Div for &BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        let d = rhs.norm_sqr();
        let num = self * &rhs.conj();
        BigComplex::new(&num.re / &d, &num.im / &d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(x: f64) -> BigFloat {
        BigFloat::from_f64(x, 128)
    }

    #[test]
    fn f64_round_trip() {
        for &x in &[1.0, -2.5, 0.1, 1e-300, 6.02e23, -3.0e-310, 0.0] {
            assert_eq!(bf(x).to_f64(), x);
        }
    }

    #[test]
    fn field_operations() {
        let a = bf(1.5);
        let b = bf(-0.25);
        assert_eq!((&a + &b).to_f64(), 1.25);
        assert_eq!((&a - &b).to_f64(), 1.75);
        assert_eq!((&a * &b).to_f64(), -0.375);
        assert_eq!((&a / &b).to_f64(), -6.0);
        let third = &BigFloat::one(200) / &BigFloat::from_i64(3, 200);
        let back = &third * &BigFloat::from_i64(3, 200);
        let err = (&back - &BigFloat::one(200)).abs();
        assert!(err.magnitude() < -195);
    }

    #[test]
    fn cancellation_keeps_precision() {
        let big = BigFloat::from_i64(1, 256).mul_pow2(100);
        let tiny = BigFloat::one(256);
        let diff = &(&big + &tiny) - &big;
        assert_eq!(diff.to_f64(), 1.0);
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(BigInt::from(-5), BigInt::from(6));
        let x = BigFloat::from_rational(&r, 100);
        assert!((x.to_f64() + 5.0 / 6.0).abs() < 1e-16);
        assert_eq!(x.to_decimal_string(10), "-0.8333333333");
    }

    #[test]
    fn sqrt_and_exp() {
        let two = BigFloat::from_i64(2, 160);
        let s = two.sqrt();
        assert_eq!(s.to_decimal_string(30), "1.414213562373095048801688724210");
        let e = BigFloat::one(160).exp();
        assert_eq!(e.to_decimal_string(30), "2.718281828459045235360287471353");
        let tiny = BigFloat::from_i64(-40, 128).exp();
        assert!((tiny.to_f64() / (-40f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_exp_matches_trig() {
        let z = BigComplex::from_f64(-1.0, 1.0, 128);
        let (re, im) = z.exp().to_f64_pair();
        let e = (-1f64).exp();
        assert!((re - e * 1f64.cos()).abs() < 1e-15);
        assert!((im - e * 1f64.sin()).abs() < 1e-15);
        let w = BigComplex::from_f64(3.0, -25.0, 128).exp();
        let (re, im) = w.to_f64_pair();
        assert!((re - 3f64.exp() * 25f64.cos()).abs() < 1e-12);
        assert!((im + 3f64.exp() * 25f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn complex_arithmetic() {
        let a = BigComplex::from_f64(-1.0, -1.0, 100);
        let inv = a.recip();
        assert_eq!(inv.to_f64_pair(), (-0.5, 0.5));
        assert_eq!(a.powi(-3).to_f64_pair(), (0.25, 0.25));
        assert_eq!((&a / &a).to_f64_pair(), (1.0, 0.0));
        assert_eq!(a.abs().to_f64(), 2f64.sqrt());
    }

    #[test]
    fn ordering() {
        assert!(bf(1.0) < bf(2.0));
        assert!(bf(-1.0) < bf(0.0));
        assert_eq!(bf(0.5), BigFloat::from_f64(0.5, 64));
    }
}
