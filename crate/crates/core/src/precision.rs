//! Working precision.
//!
//! Numerics that must survive long chaotic runs are written against the
//! [`Real`] trait, which is implemented for `f64` and for [`BigReal`], an
//! arbitrary-precision binary float that carries its own precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, WORD_BIT_SIZE};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decimal digits carried by an IEEE double.
pub const MACHINE_DIGITS: u32 = 15;

/// Default digit count for extended runs.
pub const DEFAULT_EXTENDED_DIGITS: u32 = 400;

const GUARD_BITS: usize = 64;
const ROUNDING: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PrecisionConfig {
    #[default]
    Machine,
    Extended { digits: u32 },
}

impl PrecisionConfig {
    pub fn extended(digits: u32) -> Self {
        PrecisionConfig::Extended { digits }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PrecisionConfig::Machine => Ok(()),
            PrecisionConfig::Extended { digits } if digits >= MACHINE_DIGITS => Ok(()),
            PrecisionConfig::Extended { digits } => Err(Error::InvalidParameter(format!(
                "extended precision needs at least {MACHINE_DIGITS} digits, got {digits}"
            ))),
        }
    }

    pub fn digits(&self) -> u32 {
        match *self {
            PrecisionConfig::Machine => MACHINE_DIGITS,
            PrecisionConfig::Extended { digits } => digits,
        }
    }

    pub fn is_extended(&self) -> bool {
        matches!(self, PrecisionConfig::Extended { .. })
    }

    /// Mantissa bits used for a digit count, including guard bits.
    pub fn bits(&self) -> usize {
        bits_for_digits(self.digits())
    }

    /// Step for central finite differences.
    pub fn fd_epsilon(&self) -> f64 {
        match *self {
            PrecisionConfig::Machine => 1e-6,
            PrecisionConfig::Extended { digits } => 10f64.powf(-(digits as f64) / 3.0),
        }
    }

    /// Tolerance on ‖UᵀJU − J‖ for propagators.
    pub fn symplectic_tolerance(&self) -> f64 {
        match *self {
            PrecisionConfig::Machine => 1e-8,
            PrecisionConfig::Extended { digits } => 10f64.powf(-(digits as f64) / 2.0),
        }
    }

    /// Precision picked for a kicked-top fluctuation run: chaotic kicks
    /// beyond 30 steps go to 400 digits.
    pub fn auto_for_kicked_top(beta: f64, kicks: usize) -> Self {
        if beta.abs() >= 2.0 && kicks > 30 {
            PrecisionConfig::extended(DEFAULT_EXTENDED_DIGITS)
        } else {
            PrecisionConfig::Machine
        }
    }
}

impl fmt::Display for PrecisionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecisionConfig::Machine => write!(f, "machine"),
            PrecisionConfig::Extended { digits } => write!(f, "extended({digits})"),
        }
    }
}

pub fn bits_for_digits(digits: u32) -> usize {
    let raw = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS;
    raw.div_ceil(WORD_BIT_SIZE) * WORD_BIT_SIZE
}

/// Scalar arithmetic shared by the double and arbitrary-precision paths.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant at the precision of `self`.
    fn lit(&self, x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn atan(&self) -> Self;
    fn acos(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn abs(&self) -> Self;
    fn floor(&self) -> Self;
    fn pi(&self) -> Self;
    fn is_finite(&self) -> bool;
    /// Decimal rendering with every significant digit of the format.
    fn decimal_string(&self) -> String;

    fn zero(&self) -> Self {
        self.lit(0.0)
    }

    fn one(&self) -> Self {
        self.lit(1.0)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// `self` reduced to `[0, 2π)`.
    fn rem_two_pi(&self) -> Self {
        let two_pi = self.pi() * self.lit(2.0);
        let k = (self.clone() / two_pi.clone()).floor();
        let r = self.clone() - k * two_pi.clone();
        if r < self.zero() {
            r + two_pi
        } else if r >= two_pi {
            r - two_pi
        } else {
            r
        }
    }
}

impl Real for f64 {
    fn lit(&self, x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn acos(&self) -> Self {
        f64::acos(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn pi(&self) -> Self {
        std::f64::consts::PI
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn decimal_string(&self) -> String {
        format!("{:.16e}", self)
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Arbitrary-precision real number.
#[derive(Clone)]
pub struct BigReal {
    value: BigFloat,
    bits: usize,
}

impl BigReal {
    pub fn from_f64(x: f64, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigReal { value: BigFloat::from_f64(x, bits), bits }
    }

    pub fn parse(s: &str, digits: u32) -> Option<Self> {
        let bits = bits_for_digits(digits);
        let value = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, bits, ROUNDING, cc));
        if value.is_nan() {
            None
        } else {
            Some(BigReal { value, bits })
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }

    fn wrap(&self, value: BigFloat) -> Self {
        BigReal { value, bits: self.bits }
    }

    fn binary(
        a: BigReal,
        b: BigReal,
        op: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat,
    ) -> BigReal {
        let bits = a.bits.max(b.bits);
        BigReal { value: op(&a.value, &b.value, bits), bits }
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({:e}, {} bits)", self.to_f64(), self.bits)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.decimal_string())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl Add for BigReal {
    type Output = BigReal;
    fn add(self, rhs: BigReal) -> BigReal {
        BigReal::binary(self, rhs, |a, b, p| a.add(b, p, ROUNDING))
    }
}

impl Sub for BigReal {
    type Output = BigReal;
    fn sub(self, rhs: BigReal) -> BigReal {
        BigReal::binary(self, rhs, |a, b, p| a.sub(b, p, ROUNDING))
    }
}

impl Mul for BigReal {
    type Output = BigReal;
    fn mul(self, rhs: BigReal) -> BigReal {
        BigReal::binary(self, rhs, |a, b, p| a.mul(b, p, ROUNDING))
    }
}

impl Div for BigReal {
    type Output = BigReal;
    fn div(self, rhs: BigReal) -> BigReal {
        BigReal::binary(self, rhs, |a, b, p| a.div(b, p, ROUNDING))
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal { value: self.value.neg(), bits: self.bits }
    }
}

/// `m · 2^e` without intermediate overflow.
fn scale_pow2(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

impl Real for BigReal {
    fn lit(&self, x: f64) -> Self {
        self.wrap(BigFloat::from_f64(x, self.bits))
    }

    fn to_f64(&self) -> f64 {
        let v = &self.value;
        if v.is_nan() {
            return f64::NAN;
        }
        if v.is_inf_pos() {
            return f64::INFINITY;
        }
        if v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exponent, _)) = v.as_raw_parts() else {
            return f64::NAN;
        };
        let len = words.len();
        if len == 0 {
            return 0.0;
        }
        let top = words[len - 1] as f64;
        let next = if len > 1 { words[len - 2] as f64 } else { 0.0 };
        let mantissa = top + next * 2f64.powi(-(WORD_BIT_SIZE as i32));
        let magnitude = scale_pow2(mantissa, exponent as i64 - WORD_BIT_SIZE as i64);
        if sign == Sign::Neg {
            -magnitude
        } else {
            magnitude
        }
    }

    fn sqrt(&self) -> Self {
        self.wrap(self.value.sqrt(self.bits, ROUNDING))
    }

    fn sin(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.sin(self.bits, ROUNDING, cc)))
    }

    fn cos(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.cos(self.bits, ROUNDING, cc)))
    }

    fn tan(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.tan(self.bits, ROUNDING, cc)))
    }

    fn atan(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.atan(self.bits, ROUNDING, cc)))
    }

    fn acos(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.acos(self.bits, ROUNDING, cc)))
    }

    fn ln(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.ln(self.bits, ROUNDING, cc)))
    }

    fn exp(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.exp(self.bits, ROUNDING, cc)))
    }

    fn abs(&self) -> Self {
        self.wrap(self.value.abs())
    }

    fn floor(&self) -> Self {
        self.wrap(self.value.floor())
    }

    fn pi(&self) -> Self {
        self.wrap(with_consts(|cc| cc.pi(self.bits, ROUNDING)))
    }

    fn is_finite(&self) -> bool {
        !(self.value.is_nan() || self.value.is_inf())
    }

    fn decimal_string(&self) -> String {
        with_consts(|cc| self.value.format(Radix::Dec, ROUNDING, cc))
            .unwrap_or_else(|_| "NaN".to_string())
    }
}

/// Lifts an angle given as a double into the working precision of `proto`.
///
/// Values within a few ulps of a multiple of π/24 are taken as that exact
/// multiple, so `π/2` typed as a double becomes π/2 at full precision.
pub fn lift_angle<R: Real>(x: f64, proto: &R) -> R {
    let unit = std::f64::consts::PI / 24.0;
    let k = (x / unit).round();
    let snapped = k * unit;
    if k.abs() <= 480.0 && (snapped - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
        proto.pi() * proto.lit(k) / proto.lit(24.0)
    } else {
        proto.lit(x)
    }
}
