//! Logarithm of the Gamma function for real and complex arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

const EULER_GAMMA: f64 = 0.5772156649015329;

/// `1 - gamma`, the linear Taylor coefficient of `ln Gamma(2 + z)`.
const ONE_MINUS_EULER: f64 = 0.42278433509846713;

/// `zeta(j) - 1` for `j = 2..=40`.
const ZETA_MINUS_ONE: [f64; 39] = [
    0.6449340668482264,
    0.2020569031595943,
    0.08232323371113819,
    0.03692775514336993,
    0.01734306198444914,
    0.008349277381922827,
    0.00407735619794434,
    0.0020083928260822143,
    0.0009945751278180853,
    0.0004941886041194645,
    0.0002460865533080483,
    0.00012271334757848915,
    6.124813505870483e-05,
    3.058823630702049e-05,
    1.528225940865187e-05,
    7.637197637899763e-06,
    3.81729326499984e-06,
    1.908212716553939e-06,
    9.539620338727962e-07,
    4.769329867878064e-07,
    2.38450502727733e-07,
    1.1921992596531106e-07,
    5.960818905125948e-08,
    2.980350351465228e-08,
    1.4901554828365043e-08,
    7.45071178983543e-09,
    3.725334024788457e-09,
    1.862659723513049e-09,
    9.313274324196682e-10,
    4.656629065033784e-10,
    2.3283118336765053e-10,
    1.164155017270052e-10,
    5.820772087902701e-11,
    2.9103850444971e-11,
    1.4551921891041985e-11,
    7.275959835057482e-12,
    3.637979547378651e-12,
    1.818989650307066e-12,
    9.094947840263888e-13
,
];

/// `B_{2j} / (2j (2j - 1))` for the Stirling series.
const STIRLING: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    77683.0 / 5796.0,
    -236364091.0 / 1506960.0,
];

/// `ln Gamma(2 + z)` for `|z| <= 1/2` from its Taylor series at 2.
fn lgamma_near_two(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zp = z;
    for (j, c) in ZETA_MINUS_ONE.iter().enumerate() {
        zp *= -z;
        let k = (j + 2) as f64;
        let term = c * zp / k;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    ONE_MINUS_EULER * z - sum
}

/// `ln Gamma(1 + z)` for `|z| <= 1/2` from its Taylor series at 1.
fn lgamma_near_one(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zp = -z;
    for j in 2..=64 {
        zp *= -z;
        let zeta = 1.0 + ZETA_MINUS_ONE.get(j - 2).copied().unwrap_or(2f64.powi(-(j as i32)));
        let term = zeta * zp / j as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA * z + sum
}

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING.iter().take(8) {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + corr
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(log_gamma_pos(x))
}

pub(crate) fn log_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x.
        return log_gamma_pos(x + 1.0) - x.ln();
    }
    if x < 1.5 {
        return lgamma_near_one(x - 1.0);
    }
    if x <= 2.5 {
        return lgamma_near_two(x - 2.0);
    }
    if x < 15.0 {
        // Downward recurrence into [1.5, 2.5]: every factor exceeds 1.5.
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return lgamma_near_two(y - 2.0) + prod.ln();
    }
    stirling_real(x)
}

/// A logarithm of `Gamma(s)` for complex `s` away from the poles.
///
/// The imaginary part is continuous in `s` on the right half-plane but is
/// not reduced to the principal branch; callers only exponentiate it.
pub fn log_gamma_complex(s: Complex64) -> Result<Complex64> {
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        return Err(Error::domain(format!("Gamma has a pole at {s}")));
    }
    if s.re < 0.5 {
        // Reflection: Gamma(s) Gamma(1 - s) = pi / sin(pi s).
        let sin = (Complex64::new(PI, 0.0) * s).sin();
        let rest = log_gamma_complex(Complex64::new(1.0, 0.0) - s)?;
        return Ok(Complex64::new(PI.ln(), 0.0) - sin.ln() - rest);
    }
    let mut z = s;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 18.0 || z.re < 10.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING.iter().take(10) {
        corr += p * *c;
        p *= inv2;
    }
    Ok((z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + corr - shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn integer_points() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert!(rel(log_gamma(11.0).unwrap(), 3628800f64.ln()) < 1e-15);
    }

    #[test]
    fn nonpositive_is_domain_error() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-3.5), Err(Error::Domain(_))));
    }

    // mpmath.loggamma at 200 bits, evaluated at the exact double inputs.
    #[test]
    fn real_reference_values() {
        let cases = [
            (1e-5, 11.512919692895826),
            (0.3, 1.0957979948180756),
            (0.999, 0.0005780385328913802),
            (1.001, -0.0005763935982833062),
            (1.9, -0.03898427592308336),
            (2.0000001, 4.227843666532498e-08),
            (7.25, 7.0521854507385395),
            (14.9, 24.924132002217277),
            (15.1, 25.458999750992664),
            (199.0, 852.640365001133),
            (1e6, 12815504.569147611),
        ];
        for (x, want) in cases {
            let got = log_gamma(x).unwrap();
            assert!(rel(got, want) < 1e-13, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn complex_reference_values() {
        let cases = [
            (
                Complex64::new(0.5, 1.0),
                Complex64::new(-0.6527906442043729, -0.9550077243425691),
            ),
            (
                Complex64::new(23.5, 1.0),
                Complex64::new(50.01176523438861, 3.135887687763144),
            ),
            (
                Complex64::new(0.25, -30.0),
                Complex64::new(-47.05524193399432, -71.64356959601494),
            ),
        ];
        for (s, want) in cases {
            let got = log_gamma_complex(s).unwrap();
            let a = got.exp();
            let b = want.exp();
            assert!((a - b).norm() / b.norm() < 1e-12, "s = {s}: {got} vs {want}");
        }
    }

    #[test]
    fn complex_agrees_with_real_on_axis() {
        for x in [0.7, 3.3, 41.0] {
            let c = log_gamma_complex(Complex64::new(x, 0.0)).unwrap();
            assert!((c.re - log_gamma(x).unwrap()).abs() < 1e-13 * (1.0 + c.re.abs()));
            assert!(c.im.abs() < 1e-14);
        }
    }
}
