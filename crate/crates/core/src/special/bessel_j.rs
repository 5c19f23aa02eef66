//! Bessel functions of the first kind `J_nu(x)` for integer order.
//!
//! Regimes:
//! - small argument (`x^2 <= 2(nu + 1)`): ascending series in doubles, no
//!   cancellation because successive terms shrink by at least half;
//! - `x <= max(nu, 100)`: ascending series in extended precision, with the
//!   working precision raised by the measured cancellation;
//! - otherwise: periodic trapezoid rule on Bessel's integral, which is
//!   spectrally accurate once the node count exceeds `(x + nu) / 2` by a few
//!   `x^{1/3}`.

use astro_float::BigFloat;

use super::dd::Dd;
use super::gamma::log_gamma_pos;
use super::logscalar::SignedLogReal;
use super::mp;
use crate::config;
use crate::error::{Error, Result};
use crate::quadrature::KahanSum;

/// Largest supported order.
pub const MAX_ORDER: u32 = 100_000;

/// `J_nu(x)` in log space at the configured working precision.
pub fn bessel_j_log(nu: u32, x: f64) -> Result<SignedLogReal> {
    Ok(bessel_j_with_error(nu, x, config::precision_bits())?.0)
}

/// `J_nu(x)` together with an estimate of its relative error.
pub fn bessel_j_with_error(nu: u32, x: f64, precision_bits: usize) -> Result<(SignedLogReal, f64)> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_j needs finite x >= 0, got {x}")));
    }
    if nu > MAX_ORDER {
        return Err(Error::domain(format!("bessel_j order {nu} exceeds {MAX_ORDER}")));
    }
    if x == 0.0 {
        let v = if nu == 0 { SignedLogReal::ONE } else { SignedLogReal::ZERO };
        return Ok((v, 0.0));
    }
    let nuf = f64::from(nu);
    if x * x <= 2.0 * (nuf + 1.0) {
        return Ok(series_double(nu, x));
    }
    if x <= nuf.max(100.0) {
        return series_mp(nu, x, precision_bits);
    }
    Ok(trapezoid(nu, x))
}

/// `ln((x/2)^nu / nu!)`, only for sizing.
fn log_prefactor(nu: u32, x: f64) -> f64 {
    let nuf = f64::from(nu);
    if nu == 0 {
        0.0
    } else {
        nuf * (0.5 * x).ln() - log_gamma_pos(nuf + 1.0)
    }
}

/// `(x/2)^nu / nu! = v * 2^e` as a product of `nu` factors, rescaled by
/// exact powers of two; about `2 nu` roundings.
fn prefactor_scaled(nu: u32, x: f64) -> (f64, i32) {
    let half = 0.5 * x;
    let (mut v, mut e) = (1.0f64, 0i32);
    for j in 1..=nu {
        v *= half / f64::from(j);
        if v < 2f64.powi(-500) {
            v *= 2f64.powi(500);
            e -= 500;
        } else if v > 2f64.powi(500) {
            v *= 2f64.powi(-500);
            e += 500;
        }
    }
    (v, e)
}

/// Relative error of storing a value as a logarithm `l` in a double.
fn log_storage_error(l: f64) -> f64 {
    2.0 * f64::EPSILON * (l.abs() + 1.0)
}

fn series_double(nu: u32, x: f64) -> (SignedLogReal, f64) {
    let q = 0.25 * x * x;
    let nuf = f64::from(nu);
    let mut term = 1.0;
    let mut sum = KahanSum::new();
    sum.add(1.0);
    let mut j = 1.0;
    loop {
        term *= -q / (j * (nuf + j));
        sum.add(term);
        if term.abs() < 1e-18 {
            break;
        }
        j += 1.0;
    }
    let (p, e) = prefactor_scaled(nu, x);
    let v = SignedLogReal::from_f64(sum.value() * p).scale_ln(f64::from(e) * std::f64::consts::LN_2);
    let rel = (2.0 * f64::from(nu) + 6.0) * f64::EPSILON + log_storage_error(v.log_mag());
    (v, rel)
}

/// `ln sum |t_j|` for the normalized ascending series, used to size the
/// extended-precision pass.
fn log_abs_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let nuf = f64::from(nu);
    let mut lt = 0.0f64;
    let mut lmax = 0.0f64;
    let mut acc = 1.0f64;
    let mut j = 1.0;
    loop {
        lt += (q / (j * (nuf + j))).ln();
        if lt > lmax {
            acc *= (lmax - lt).exp();
            lmax = lt;
        }
        acc += (lt - lmax).exp();
        if lt < lmax - 50.0 && j * (nuf + j) > q {
            break;
        }
        j += 1.0;
    }
    lmax + acc.ln()
}

/// Rough `ln |J_nu(x)|` used only to choose the first working precision.
fn log_magnitude_guess(nu: u32, x: f64) -> f64 {
    let nuf = f64::from(nu);
    if x < nuf {
        // Debye: J ~ exp(-nu (a - tanh a)) / sqrt(2 pi nu tanh a), x = nu sech a.
        let a = (nuf / x).acosh();
        let th = a.tanh();
        -nuf * (a - th) - 0.5 * (2.0 * std::f64::consts::PI * nuf * th).ln()
    } else {
        // Oscillatory: allow for landing near a zero.
        -0.5 * x.ln() - 8.0
    }
}

fn series_mp(nu: u32, x: f64, precision_bits: usize) -> Result<(SignedLogReal, f64)> {
    let labs = log_abs_series(nu, x);
    let guess = log_magnitude_guess(nu, x) - log_prefactor(nu, x);
    let ln2 = std::f64::consts::LN_2;
    let mut loss_bits = ((labs - guess) / ln2).max(0.0).ceil() as usize;
    for _ in 0..4 {
        let p = mp::words(precision_bits + loss_bits + 64);
        let (s, terms) = series_sum_mp(nu, x, p);
        let ls = mp::to_log(&s);
        let scaled = s.mul(&prefactor_mp(nu, x, p), p, mp::RM);
        let measured = if ls.is_zero() {
            f64::INFINITY
        } else {
            (labs - ls.log_mag()) / ln2
        };
        let excess = p as f64 - measured.max(0.0) - (terms as f64).log2();
        if excess >= precision_bits as f64 {
            let v = mp::to_log(&scaled);
            let rel = 2f64.powf(-excess) + log_storage_error(v.log_mag());
            return Ok((v, rel));
        }
        if !measured.is_finite() {
            loss_bits = 2 * (p + 64);
        } else {
            loss_bits = measured.ceil() as usize + 64;
        }
    }
    Err(Error::Precision(format!(
        "ascending series for J_{nu}({x}) lost too many bits to cancellation"
    )))
}

/// `(x/2)^nu / nu!` at `p` bits.
fn prefactor_mp(nu: u32, x: f64, p: usize) -> BigFloat {
    let half = mp::from_f64(0.5 * x, p);
    let mut v = mp::from_u64(1, p);
    for j in 1..=u64::from(nu) {
        v = v.mul(&half, p, mp::RM).div(&mp::from_u64(j, p), p, mp::RM);
    }
    v
}

/// `sum_j (-x^2/4)^j / (j! (nu+1)_j)` at `p` bits; also returns the number
/// of terms used.
fn series_sum_mp(nu: u32, x: f64, p: usize) -> (BigFloat, usize) {
    let rm = mp::RM;
    let half = mp::from_f64(0.5 * x, p);
    let q = half.mul(&half, p, rm).neg();
    let mut term = mp::from_u64(1, p);
    let mut sum = term.clone();
    let nu = u64::from(nu);
    let mut j: u64 = 1;
    let target = p as i64 + 8;
    loop {
        term = term
            .mul(&q, p, rm)
            .div(&mp::from_u64(j * (nu + j), p), p, rm);
        sum = sum.add(&term, p, rm);
        let qf = 0.25 * x * x;
        if (j * (nu + j)) as f64 > qf {
            if let (Some(et), Some(es)) = (mp::exponent2(&term), mp::exponent2(&sum)) {
                if et < es - target {
                    break;
                }
            }
        }
        j += 1;
    }
    (sum, j as usize)
}

/// `(1/pi) * integral_0^pi cos(nu t - x sin t) dt` by the trapezoid rule.
fn trapezoid(nu: u32, x: f64) -> (SignedLogReal, f64) {
    let nuf = f64::from(nu);
    let n = (0.5 * (x + nuf) + 10.0 * x.cbrt() + 30.0).ceil() as u64;
    let two_n = 2 * n;
    let inv_two_pi = Dd::TWO_PI.recip();
    let xd = Dd::from_f64(x);
    let mut sum = KahanSum::new();
    for j in 0..=n {
        let frac = (u64::from(nu) * j) % two_n;
        let (s, _) = Dd::from_f64(j as f64 / two_n as f64).sincos_2pi();
        // Phase in turns: nu j / (2n) - x sin(pi j / n) / (2 pi).
        let turns = Dd::from_f64(frac as f64 / two_n as f64) - xd * s * inv_two_pi;
        let r = turns - turns.round();
        let c = (std::f64::consts::TAU * r.hi).cos();
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        sum.add(w * c);
    }
    let v = sum.value() / n as f64;
    let err_abs = 8.0 * f64::EPSILON * (n as f64).sqrt() / n as f64 + 1e-17;
    let rel = if v == 0.0 { f64::INFINITY } else { err_abs / v.abs() };
    (SignedLogReal::from_f64(v), rel)
}
