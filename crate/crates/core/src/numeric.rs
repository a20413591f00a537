//! Direction-certified evaluation of `base^exponent`.
//!
//! Values are evaluated in double-double arithmetic (about 104 significant
//! bits), rounded to the nearest `f64`, then moved one ulp in the requested
//! direction. The double-double error stays below `2^-95` relative on the
//! ranges used here, far inside the half ulp the final step absorbs.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::Rational;

/// Declared worst-case relative error of one directed evaluation.
pub const DIRECTED_REL_ERROR: f64 = 1.0 / (1u64 << 45) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Up,
    Down,
}

/// Unevaluated `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub const LN_2: DoubleDouble = DoubleDouble { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
pub const LN_3: DoubleDouble = DoubleDouble { hi: 1.0986122886681098, lo: -9.07129723500153e-17 };

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Exact for `|n| < 2^106`.
    pub fn from_u128(n: u128) -> Self {
        let hi = n as f64;
        let rest = n as i128 - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        DoubleDouble { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_pow2(self, exp: i32) -> Self {
        let f = 2f64.powi(exp);
        DoubleDouble { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        // exp(x) = 2^m * (1 + expm1(r / 512))^512 with |r| <= ln2 / 2
        let m = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * m;
        let r = r.mul_pow2(-9);
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * r / n;
            sum = sum + term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        for _ in 0..9 {
            sum = sum * 2.0 + sum * sum;
        }
        let result = sum + 1.0;
        let mut scaled = result;
        let mut m = m as i32;
        // split the scaling so huge exponents do not overflow 2^m
        while m > 1000 {
            scaled = scaled.mul_pow2(1000);
            m -= 1000;
        }
        while m < -1000 {
            scaled = scaled.mul_pow2(-1000);
            m += 1000;
        }
        scaled.mul_pow2(m)
    }

    /// Natural log of a positive value: one Newton step on `exp`.
    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "ln of non-positive value");
        let y = DoubleDouble::from_f64(self.hi.ln());
        y + self * (-y).exp() - 1.0
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, b: DoubleDouble) -> DoubleDouble {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        DoubleDouble { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, b: f64) -> DoubleDouble {
        self + DoubleDouble::from_f64(b)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, b: f64) -> DoubleDouble {
        self + DoubleDouble::from_f64(-b)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> DoubleDouble {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, b: DoubleDouble) -> DoubleDouble {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, b: DoubleDouble) -> DoubleDouble {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, b: f64) -> DoubleDouble {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, b: DoubleDouble) -> DoubleDouble {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DoubleDouble { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, b: f64) -> DoubleDouble {
        self / DoubleDouble::from_f64(b)
    }
}

/// Rounds to the nearest `f64` and steps one ulp towards `dir`.
pub fn finish(x: DoubleDouble, dir: Rounding) -> f64 {
    let v = x.to_f64();
    match dir {
        Rounding::Up => v.next_up(),
        Rounding::Down => v.next_down(),
    }
}

/// `ln n` for a positive big integer, keeping its top 104 bits.
fn ln_bigint(n: &BigInt) -> DoubleDouble {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    let shift = bits.saturating_sub(104);
    let top = (n >> shift).to_u128().expect("shifted into 104 bits");
    let ln_top = DoubleDouble::from_u128(top).ln();
    if shift == 0 {
        ln_top
    } else {
        ln_top + LN_2 * shift as f64
    }
}

pub fn ln_rational(x: &Rational) -> DoubleDouble {
    assert!(x.is_positive(), "logarithm of a non-positive rational");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Exact value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Real exponent of a power, kept symbolic so it is evaluated in extended
/// precision together with the logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exponent {
    /// `num / den * log_3(2)`.
    Log3Of2 { num: i64, den: u64 },
    /// `num / den * log_2(3)`.
    Log2Of3 { num: i64, den: u64 },
    /// An exactly representable exponent.
    Exact { value: f64 },
}

impl Exponent {
    /// `s_d / 2 = d log_3(2) / 2`, the exponent applied to squared diameters.
    pub fn half_dimension(dim: u32) -> Self {
        Exponent::Log3Of2 { num: i64::from(dim), den: 2 }
    }

    pub fn dimension(dim: u32) -> Self {
        Exponent::Log3Of2 { num: i64::from(dim), den: 1 }
    }

    /// `1 / s_d`.
    pub fn inverse_dimension(dim: u32) -> Self {
        Exponent::Log2Of3 { num: 1, den: u64::from(dim) }
    }

    pub fn to_double_double(&self) -> DoubleDouble {
        match *self {
            Exponent::Log3Of2 { num, den } => LN_2 * num as f64 / (LN_3 * den as f64),
            Exponent::Log2Of3 { num, den } => LN_3 * num as f64 / (LN_2 * den as f64),
            Exponent::Exact { value } => DoubleDouble::from_f64(value),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_double_double().to_f64()
    }
}

/// `base^exponent` rounded so the result is `>=` (Up) or `<=` (Down) the
/// exact value. A base of exactly 1 returns exactly 1.
pub fn pow_directed(base: &Rational, exponent: Exponent, dir: Rounding) -> f64 {
    assert!(base.is_positive(), "pow_directed needs a positive base");
    if base.is_one() {
        return 1.0;
    }
    let e = exponent.to_double_double();
    if e.hi == 0.0 && e.lo == 0.0 {
        return 1.0;
    }
    finish((ln_rational(base) * e).exp(), dir)
}

/// `base^exponent` in double-double, unrounded.
pub fn pow_nearest(base: &Rational, exponent: Exponent) -> DoubleDouble {
    if base.is_one() {
        return DoubleDouble::ONE;
    }
    (ln_rational(base) * exponent.to_double_double()).exp()
}

/// `x * 2^shift / count` rounded in direction `dir`, exact inputs.
pub fn scale_div_directed(x: f64, shift: i32, count: u64, dir: Rounding) -> f64 {
    assert!(count > 0 && count < 1 << 53);
    let scaled = x * 2f64.powi(shift);
    let nearest = div_directed(scaled, count as f64, dir);
    debug_assert!(nearest.is_finite());
    nearest
}

/// `x / y` for positive finite `x` and `y`, rounded in direction `dir`.
pub fn div_directed(x: f64, y: f64, dir: Rounding) -> f64 {
    let q = x / y;
    // residual x - q*y, exact via fma
    let r = (-q).mul_add(y, x);
    match dir {
        Rounding::Up if r > 0.0 => q.next_up(),
        Rounding::Down if r < 0.0 => q.next_down(),
        _ => q,
    }
}

/// `x * y` rounded in direction `dir`.
pub fn mul_directed(x: f64, y: f64, dir: Rounding) -> f64 {
    let (p, e) = two_prod(x, y);
    match dir {
        Rounding::Up if e > 0.0 => p.next_up(),
        Rounding::Down if e < 0.0 => p.next_down(),
        _ => p,
    }
}
