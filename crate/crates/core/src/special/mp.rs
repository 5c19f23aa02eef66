//! Thin helpers around the arbitrary-precision backend.

use astro_float::{BigFloat, RoundingMode, Word};

use super::logscalar::SignedLogReal;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

/// Rounds a working precision up to a whole number of 64-bit words.
pub(crate) fn words(bits: usize) -> usize {
    bits.div_ceil(64) * 64
}

pub(crate) fn from_f64(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

pub(crate) fn from_u64(x: u64, p: usize) -> BigFloat {
    BigFloat::from_u64(x, p)
}

/// `log2 |v|` rounded down to an integer, or `None` for zero.
pub(crate) fn exponent2(v: &BigFloat) -> Option<i64> {
    if v.is_zero() {
        None
    } else {
        v.exponent().map(i64::from)
    }
}

/// Converts to `(sign, ln|v|)` keeping about 128 bits of the mantissa, so
/// the logarithm is accurate to the double rounding of its own magnitude.
pub(crate) fn to_log(v: &BigFloat) -> SignedLogReal {
    if v.is_zero() {
        return SignedLogReal::ZERO;
    }
    let (m, _nbits, sign, e, _) = v.as_raw_parts().expect("finite BigFloat");
    let n = m.len();
    let top: Word = m[n - 1];
    let next: Word = if n >= 2 { m[n - 2] } else { 0 };
    // Value is 0.m * 2^e with the top bit of m set.
    let mant = (top as f64) * 2f64.powi(-64) + (next as f64) * 2f64.powi(-128);
    let log_mag = mant.ln() + f64::from(e) * std::f64::consts::LN_2;
    let s = if sign == astro_float::Sign::Neg { -1 } else { 1 };
    SignedLogReal::new(s, log_mag)
}

/// Nearest double (up to one extra rounding). Values outside the double
/// range saturate to infinity or flush to zero.
pub(crate) fn to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let (m, _nbits, sign, e, _) = v.as_raw_parts().expect("finite BigFloat");
    let n = m.len();
    let next: Word = if n >= 2 { m[n - 2] } else { 0 };
    let mant = (m[n - 1] as f64) * 2f64.powi(-64) + (next as f64) * 2f64.powi(-128);
    let e = i64::from(e);
    let mag = if e > 1100 {
        f64::INFINITY
    } else if e < -1200 {
        0.0
    } else {
        // Two steps keep each power of two representable.
        mant * 2f64.powi((e / 2) as i32) * 2f64.powi((e - e / 2) as i32)
    };
    if sign == astro_float::Sign::Neg {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_of_exact_values() {
        let p = 256;
        let v = from_f64(-3.0, p);
        let l = to_log(&v);
        assert_eq!(l.sign(), -1);
        assert!((l.log_mag() - 3f64.ln()).abs() < 4e-16);
        let tiny = from_f64(1e-300, p).mul(&from_f64(1e-300, p), p, RM);
        let lt = to_log(&tiny);
        assert!((lt.log_mag() - (-600.0 * std::f64::consts::LN_10)).abs() < 1e-12);
        assert!(to_log(&from_f64(0.0, p)).is_zero());
    }

    #[test]
    fn conversion_roundtrip() {
        for x in [1.0, 0.1, 123456.789, 2f64.powi(-70)] {
            let back = to_f64(&from_f64(x, 192));
            assert_eq!(back, x);
        }
    }
}
