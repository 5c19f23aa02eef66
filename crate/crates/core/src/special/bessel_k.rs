//! Modified Bessel function `K_{it}(y)` of purely imaginary order.
//!
//! For `|t| <= y` the integral `integral_0^inf exp(-y cosh u) cos(t u) du` is
//! moved onto its steepest-descent path `u + i v(u)` with
//! `sin v = |t| u / (y sinh u)`. Along that path the integrand is real and
//! positive, `K = integral_0^inf exp(-y cosh u cos v - |t| v) du`, so there
//! is no cancellation. For `|t| > y` the function oscillates and is taken
//! from `K = -pi Im I_{it}(y) / sinh(pi |t|)` using the ascending series
//! for `I_{it}`, carried in extended precision when the series cancels.

use std::f64::consts::PI;

use astro_float::BigFloat;
use num_complex::Complex64;

use super::gamma::log_gamma_complex;
use super::logscalar::SignedLogReal;
use super::mp;
use crate::config;
use crate::error::{Error, Result};
use crate::quadrature;

/// Largest supported `|t|`.
pub const MAX_ORDER: f64 = 100.0;

/// `K_{it}(y)` as a double; underflows to zero for very large `y`.
pub fn bessel_k_imag(t: f64, y: f64) -> Result<f64> {
    Ok(bessel_k_imag_log(t, y)?.to_f64())
}

/// `K_{it}(y)` in log space.
pub fn bessel_k_imag_log(t: f64, y: f64) -> Result<SignedLogReal> {
    Ok(bessel_k_imag_with_error(t, y)?.0)
}

/// `K_{it}(y)` and an estimate of its relative error.
pub fn bessel_k_imag_with_error(t: f64, y: f64) -> Result<(SignedLogReal, f64)> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("bessel_k_imag needs y > 0, got {y}")));
    }
    if !(t.abs() <= MAX_ORDER) {
        return Err(Error::domain(format!("bessel_k_imag needs |t| <= {MAX_ORDER}, got {t}")));
    }
    let t = t.abs();
    if t <= y {
        steepest_descent(t, y)
    } else {
        series(t, y)
    }
}

fn path_angle(t: f64, y: f64, u: f64) -> f64 {
    let r = if u < 1e-8 { 1.0 - u * u / 6.0 } else { u / u.sinh() };
    (t * r / y).min(1.0).asin()
}

fn steepest_descent(t: f64, y: f64) -> Result<(SignedLogReal, f64)> {
    let v0 = (t / y).min(1.0).asin();
    let peak = -y * v0.cos() - t * v0;
    let expo = |u: f64| {
        let v = path_angle(t, y, u);
        -y * u.cosh() * v.cos() - t * v - peak
    };
    let mut u_max = 1.0;
    while expo(u_max) > -80.0 {
        u_max *= 1.5;
    }
    // Split where the integrand has dropped by e^-1 so the adaptive rule
    // sees the peak at its natural width.
    let mut u_half = u_max;
    let (mut lo, mut hi) = (0.0, u_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if expo(mid) > -1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        u_half = hi;
    }
    let breaks = [0.0, u_half, (4.0 * u_half).min(u_max), u_max];
    let mut f = |u: f64| expo(u).exp();
    // The exponent is a difference of terms of size y + t, so the integrand
    // carries that much absolute rounding in its logarithm.
    let rel_tol = (1e-14f64).max(32.0 * f64::EPSILON * (y + t));
    let r = quadrature::adaptive_pieces(&breaks, 0.0, rel_tol, 40, &mut f)?;
    let v = SignedLogReal::from_f64(r.value).scale_ln(peak);
    Ok((v, (r.error / r.value).max(1e-15)))
}

/// `(y/2)^{it} / Gamma(1 + it)` as a complex double.
fn series_prefactor(t: f64, y: f64) -> Result<Complex64> {
    let lg = log_gamma_complex(Complex64::new(1.0, t))?;
    Ok((Complex64::new(0.0, t * (0.5 * y).ln()) - lg).exp())
}

fn series(t: f64, y: f64) -> Result<(SignedLogReal, f64)> {
    let f = series_prefactor(t, y)?;
    let q = 0.25 * y * y;
    // Double-precision pass: S = sum q^j / (j! (1 + it)_j).
    let mut term = Complex64::new(1.0, 0.0);
    let mut s = term;
    let mut abs_sum = 1.0;
    let mut j = 1.0;
    loop {
        term = term * q / (j * Complex64::new(j, t));
        s += term;
        abs_sum += term.norm();
        if term.norm() < 1e-18 * abs_sum && j * j > q {
            break;
        }
        j += 1.0;
    }
    let sinh = (PI * t).sinh();
    let value = -PI * (f * s).im / sinh;
    let scale = PI * f.norm() / sinh;
    let rel = if value == 0.0 {
        f64::INFINITY
    } else {
        8.0 * f64::EPSILON * scale * abs_sum / value.abs()
    };
    if rel < 1e-13 {
        return Ok((SignedLogReal::from_f64(value), rel.max(1e-15)));
    }
    let s = series_mp(t, y, config::precision_bits());
    let value = -PI * (f * s).im / sinh;
    let rel = if value == 0.0 {
        f64::INFINITY
    } else {
        8.0 * f64::EPSILON * scale * s.norm() / value.abs()
    };
    Ok((SignedLogReal::from_f64(value), rel.max(1e-15)))
}

fn series_mp(t: f64, y: f64, precision_bits: usize) -> Complex64 {
    let loss = (0.5 * y * y).max(y) / std::f64::consts::LN_2;
    let p = mp::words(precision_bits + loss as usize + 64);
    let rm = mp::RM;
    let half = mp::from_f64(0.5 * y, p);
    let q = half.mul(&half, p, rm);
    let tb = mp::from_f64(t, p);
    let t2 = tb.mul(&tb, p, rm);
    let mut re = mp::from_u64(1, p);
    let mut im = mp::from_u64(0, p);
    let mut sre = re.clone();
    let mut sim = im.clone();
    let mut j: u64 = 1;
    loop {
        let jb = mp::from_u64(j, p);
        // term *= q (j - it) / (j (j^2 + t^2))
        let den = jb.mul(&jb, p, rm).add(&t2, p, rm).mul(&jb, p, rm);
        let scale = q.div(&den, p, rm);
        let nre = re.mul(&jb, p, rm).add(&im.mul(&tb, p, rm), p, rm);
        let nim = im.mul(&jb, p, rm).sub(&re.mul(&tb, p, rm), p, rm);
        re = nre.mul(&scale, p, rm);
        im = nim.mul(&scale, p, rm);
        sre = sre.add(&re, p, rm);
        sim = sim.add(&im, p, rm);
        if (j * j) as f64 > 0.25 * y * y && small_against(&re, &im, &sre, &sim, p) {
            break;
        }
        j += 1;
    }
    Complex64::new(mp::to_f64(&sre), mp::to_f64(&sim))
}

fn small_against(re: &BigFloat, im: &BigFloat, sre: &BigFloat, sim: &BigFloat, p: usize) -> bool {
    let e = |v: &BigFloat| mp::exponent2(v).unwrap_or(i64::MIN / 2);
    e(re).max(e(im)) < e(sre).max(e(sim)) - p as i64 - 8
}

/// Direct quadrature of `integral_0^inf exp(-y cosh u) cos(t u) du`.
///
/// Loses accuracy to cancellation once `pi |t| / 2` exceeds `y` by much;
/// kept as an independent check on the main evaluator.
pub fn bessel_k_imag_direct(t: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("bessel_k_imag needs y > 0, got {y}")));
    }
    let mut u_max: f64 = 1.0;
    while -y * (u_max.cosh() - 1.0) > -750.0 {
        u_max *= 1.25;
    }
    let mut f = |u: f64| (-y * u.cosh()).exp() * (t * u).cos();
    let mut breaks = vec![0.0];
    let step = if t > 0.0 { (PI / t).min(1.0) } else { 1.0 };
    let mut u = step;
    while u < u_max {
        breaks.push(u);
        u += step;
    }
    breaks.push(u_max);
    Ok(quadrature::adaptive_pieces(&breaks, 1e-300, 1e-15, 40, &mut f)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (t, y, sign, ln|K_{it}(y)|) from mpmath.besselk at 40 digits.
    const REFERENCE: [(f64, f64, i8, f64); 15] = [
        (0.0, 1.0, 1, -0.8650643989067881),
        (1.0, 1.0, 1, -1.239848589636279),
        (1.0, 0.3, 1, -0.6402921878698223),
        (1.0, 20.0, 1, -21.302586999577855),
        (3.0, 2.0, 1, -4.251837969853142),
        (10.0, 5.0, -1, -16.038785691544124),
        (10.0, 9.9, 1, -16.091967252385217),
        (10.0, 10.0, 1, -16.135836346800662),
        (10.0, 10.1, 1, -16.181253414109026),
        (50.0, 20.0, 1, -79.58223195153008),
        (100.0, 30.0, -1, -158.4442649414509),
        (100.0, 150.0, 1, -186.91130944939707),
        (0.5, 0.001, -1, -0.4065988597926275),
        (2.0, 700.0, 1, -703.0527823660713),
        (1.0, 0.05, -1, -2.063304387079846),
    ];

    #[test]
    fn matches_reference() {
        for (t, y, sign, lm) in REFERENCE {
            let v = bessel_k_imag_log(t, y).unwrap();
            assert_eq!(v.sign(), sign, "sign of K_(i{t})({y})");
            assert!((v.log_mag() - lm).abs() < 1e-10, "K_(i{t})({y}): {} vs {lm}", v.log_mag());
        }
    }

    #[test]
    fn even_in_order() {
        let a = bessel_k_imag(2.5, 3.0).unwrap();
        let b = bessel_k_imag(-2.5, 3.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn agrees_with_cosine_integral() {
        for (t, y) in [(0.0, 1.0), (1.0, 0.5), (1.0, 4.0), (3.0, 3.5), (0.7, 0.01)] {
            let a = bessel_k_imag(t, y).unwrap();
            let b = bessel_k_imag_direct(t, y).unwrap();
            assert!(((a - b) / b).abs() < 1e-10, "t={t} y={y}: {a} vs {b}");
        }
    }

    #[test]
    fn exponential_envelope() {
        let r = bessel_k_imag(1.0, 20.0).unwrap() * 20f64.exp() * 20f64.sqrt();
        assert!(r > 0.1 && r < 10.0);
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(bessel_k_imag(1.0, 0.0), Err(Error::Domain(_))));
    }
}
