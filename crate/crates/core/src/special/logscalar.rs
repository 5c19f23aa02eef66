//! Scalars stored as a natural-log magnitude plus a sign or phase.
//!
//! Quantities such as `Gamma(k-1) / (4 pi m)^(k-1)` or `J_nu(x)` deep in its
//! suppressed regime leave the double range long before the parameters
//! become interesting, so amplitudes are carried as `(log|v|, sign)` and only
//! turned into linear doubles after ratios have been formed.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A real number stored as `sign * exp(log_mag)`.
///
/// Zero is the unique value with `sign == 0`, and is always paired with
/// `log_mag == -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedLogReal {
    log_mag: f64,
    sign: i8,
}

impl SignedLogReal {
    pub const ZERO: SignedLogReal = SignedLogReal {
        log_mag: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: SignedLogReal = SignedLogReal {
        log_mag: 0.0,
        sign: 1,
    };

    /// Builds a value from its parts. A zero sign or a `-inf` magnitude
    /// collapses to [`SignedLogReal::ZERO`].
    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            debug_assert!(!log_mag.is_nan(), "NaN log magnitude");
            SignedLogReal {
                log_mag,
                sign: sign.signum(),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// `exp(log_mag)` with the given sign; the caller supplies the log.
    pub fn from_ln(log_mag: f64) -> Self {
        Self::new(1, log_mag)
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Linear value; overflows to `±inf` or underflows to `0` outside the
    /// double range.
    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.log_mag.exp()
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_mag)
    }

    pub fn powf(&self, e: f64) -> Self {
        assert!(self.sign >= 0, "real power of a negative SignedLogReal");
        if self.is_zero() {
            return if e == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(1, self.log_mag * e)
    }

    pub fn powi(&self, e: i32) -> Self {
        if self.is_zero() {
            return if e == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if e % 2 == 0 { 1 } else { self.sign };
        Self::new(sign, self.log_mag * f64::from(e))
    }

    /// Multiplies by `exp(t)`.
    pub fn scale_ln(&self, t: f64) -> Self {
        Self::new(self.sign, self.log_mag + t)
    }

    /// Sum together with the cancellation it incurred, measured as
    /// `ln(max(|a|, |b|)) - ln|a + b|` (0 when no cancellation, `inf` when
    /// the sum is exactly zero).
    pub fn add_tracked(&self, other: &Self) -> (Self, f64) {
        if self.is_zero() {
            return (*other, 0.0);
        }
        if other.is_zero() {
            return (*self, 0.0);
        }
        let (big, small) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let d = small.log_mag - big.log_mag;
        if big.sign == small.sign {
            (Self::new(big.sign, big.log_mag + d.exp().ln_1p()), 0.0)
        } else {
            let r = -d.exp_m1();
            if r <= 0.0 {
                (Self::ZERO, f64::INFINITY)
            } else {
                let l = r.ln();
                (Self::new(big.sign, big.log_mag + l), -l)
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_tracked(other).0
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&-*other)
    }

    /// Compares magnitudes.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.log_mag.total_cmp(&other.log_mag)
    }
}

impl Default for SignedLogReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Neg for SignedLogReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.sign, self.log_mag)
    }
}

impl Mul for SignedLogReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }
}

impl Div for SignedLogReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by a zero SignedLogReal");
        Self::new(self.sign * rhs.sign, self.log_mag - rhs.log_mag)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// A complex number stored as `exp(log_mag) * exp(i * phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    log_mag: f64,
    phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogComplex {
                log_mag,
                phase: wrap_phase(phase),
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn from_real(v: SignedLogReal) -> Self {
        match v.sign() {
            0 => Self::ZERO,
            s if s > 0 => Self::new(v.log_mag(), 0.0),
            _ => Self::new(v.log_mag(), PI),
        }
    }

    /// `exp(log_scale) * z`.
    pub fn from_scaled(z: Complex64, log_scale: f64) -> Self {
        let c = Self::from_complex(z);
        if c.is_zero() {
            c
        } else {
            Self::new(c.log_mag + log_scale, c.phase)
        }
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    /// The value divided by `exp(log_scale)`, as an ordinary complex number.
    pub fn to_complex_scaled(&self, log_scale: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_mag - log_scale).exp(), self.phase)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }

    pub fn powi(&self, e: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self::new(self.log_mag * f64::from(e), self.phase * f64::from(e))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let scale = self.log_mag.max(other.log_mag);
        let s = self.to_complex_scaled(scale) + other.to_complex_scaled(scale);
        Self::from_scaled(s, scale)
    }
}

impl Mul for LogComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by a zero LogComplex");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag - rhs.log_mag, self.phase - rhs.phase)
    }
}

/// Formats a double as a C99 hexadecimal floating-point literal, matching
/// the output of Python's `float.hex` (`0x1.8000000000000p+1`).
pub fn f64_to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        if frac == 0 {
            return format!("{sign}0x0.0p+0");
        }
        return format!("{sign}0x0.{frac:013x}p-1022");
    }
    let e = exp - 1023;
    let esign = if e >= 0 { "+" } else { "-" };
    format!("{sign}0x1.{frac:013x}p{esign}{}", e.abs())
}

/// Parses the format produced by [`f64_to_hex`] (and any C99 hex float with
/// at most 13 fraction digits).
pub fn f64_from_hex(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let body = body.strip_prefix("0x")?;
    let (mant, exp) = body.split_once('p')?;
    let exp: i64 = exp.parse().ok()?;
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if frac_part.len() > 13 {
        return None;
    }
    let lead = u64::from_str_radix(int_part, 16).ok()?;
    let frac = if frac_part.is_empty() {
        0
    } else {
        u64::from_str_radix(frac_part, 16).ok()? << (4 * (13 - frac_part.len()))
    };
    let value = match lead {
        0 if frac == 0 => 0.0,
        0 => {
            if exp != -1022 {
                return None;
            }
            f64::from_bits(frac)
        }
        1 => {
            let biased = exp + 1023;
            if !(1..=2046).contains(&biased) {
                return None;
            }
            f64::from_bits(((biased as u64) << 52) | frac)
        }
        _ => return None,
    };
    Some(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_canonical() {
        assert_eq!(SignedLogReal::new(1, f64::NEG_INFINITY), SignedLogReal::ZERO);
        assert_eq!(SignedLogReal::new(0, 3.0), SignedLogReal::ZERO);
        assert_eq!(SignedLogReal::from_f64(0.0).sign(), 0);
    }

    #[test]
    fn exact_cancellation_reports_infinite_loss() {
        let a = SignedLogReal::from_f64(2.5);
        let (s, loss) = a.add_tracked(&-a);
        assert!(s.is_zero());
        assert!(loss.is_infinite());
    }

    #[test]
    fn cancellation_is_measured() {
        let a = SignedLogReal::from_f64(1.0);
        let b = SignedLogReal::from_f64(-0.999);
        let (s, loss) = a.add_tracked(&b);
        assert!((s.to_f64() - 1e-3).abs() < 1e-15);
        assert!((loss - 1000f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn huge_magnitudes_multiply_without_overflow() {
        let a = SignedLogReal::from_ln(5000.0);
        let b = SignedLogReal::new(-1, -4990.0);
        let p = a * b;
        assert_eq!(p.sign(), -1);
        assert!((p.to_f64() + 10f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn logcomplex_phase_wraps() {
        let z = LogComplex::new(0.0, 3.0 * PI);
        assert!((z.phase() - PI).abs() < 1e-15);
        let w = LogComplex::new(0.0, -PI);
        assert!((w.phase() - PI).abs() < 1e-15);
        let p = LogComplex::new(1.0, 3.0) * LogComplex::new(2.0, 1.0);
        assert!((p.phase() - wrap_phase(4.0)).abs() < 1e-15);
        assert!((p.log_mag() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn hex_matches_python_float_hex() {
        // Reference strings from Python's float.hex.
        assert_eq!(f64_to_hex(3.0), "0x1.8000000000000p+1");
        assert_eq!(f64_to_hex(-0.1), "-0x1.999999999999ap-4");
        assert_eq!(f64_to_hex(0.0), "0x0.0p+0");
        assert_eq!(f64_to_hex(5e-324), "0x0.0000000000001p-1022");
        assert_eq!(f64_from_hex("0x1.8p+1"), Some(3.0));
        assert_eq!(f64_from_hex("-inf"), Some(f64::NEG_INFINITY));
    }

    proptest! {
        #[test]
        fn linear_roundtrip(x in prop::num::f64::NORMAL) {
            let v = SignedLogReal::from_f64(x);
            let back = v.to_f64();
            // The stored logarithm is itself a double, so the round trip is
            // limited by half an ulp of ln|x|.
            let ln = x.abs().ln().abs();
            let bound = if ln <= 64.0 { 1e-14 } else { 2.5e-16 * ln };
            prop_assert!(((back - x) / x).abs() < bound);
        }

        #[test]
        fn hex_roundtrip_is_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(!x.is_nan());
            let back = f64_from_hex(&f64_to_hex(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn addition_matches_linear(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let s = SignedLogReal::from_f64(a).add(&SignedLogReal::from_f64(b)).to_f64();
            let scale = a.abs().max(b.abs()).max(1e-300);
            prop_assert!((s - (a + b)).abs() <= 1e-14 * scale);
        }
    }
}
