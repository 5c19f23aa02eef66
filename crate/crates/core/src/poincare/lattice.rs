//! Direct evaluation of `P_{k,m}` as a truncated lattice sum, and Fourier
//! coefficients extracted from it by a discrete Fourier transform. This path
//! shares nothing with the Kloosterman-Bessel coefficients.
//!
//! For `c >= 1` and `gcd(c, d) = 1`, with `w = cz + d` and `a = d^{-1} mod c`,
//! `e(m gamma z) = e(m a / c) e(-m / (c w))`, so each term is
//! `e(m a/c - m Re(w) / (c |w|^2)) exp(-2 pi m y / |w|^2) w^{-k}`.
//! Pairs `(c, d)` and `(-c, -d)` coincide for even `k`, which absorbs the
//! factor 1/2; `c = 0` contributes `e(mz)`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ModularParams, ModularPoint};
use crate::arithmetic::{gcd, mod_inverse};
use crate::error::{Error, Result};
use crate::special::dd::{Dd, DdComplex};
use crate::special::LogComplex;

/// Terms this many nats below the largest one are dropped.
const PRUNE_NATS: f64 = 90.0;

/// Largest `2 pi m y` for which the scaled double-double sum stays in range.
const MAX_EXPONENT: f64 = 650.0;

/// Largest ratio, in nats, of a single term to `exp(-2 pi m y)` before the
/// cancellation in the sum exceeds double-double precision.
const MAX_CANCELLATION: f64 = 40.0;

/// `exp(2 pi m y) P(x + iy)` in double-double.
fn lattice_sum_scaled(params: &ModularParams, x: f64, y: f64, cut: u64) -> Result<DdComplex> {
    let (k, m) = (params.k, params.m as f64);
    let kf = f64::from(k);
    let two_pi_my = Dd::TWO_PI.mul_f64(m).mul_f64(y);
    let lm0 = -two_pi_my.hi;
    // First pass in doubles: log magnitudes, to prune and to find the peak.
    let mut cands: Vec<(u64, i64, f64)> = Vec::new();
    let mut peak = lm0;
    for c in 1..=cut {
        let cf = c as f64;
        for d in -(cut as i64)..=(cut as i64) {
            if gcd(c, d.unsigned_abs()) != 1 {
                continue;
            }
            let re = cf * x + d as f64;
            let im = cf * y;
            let w2 = re * re + im * im;
            let lm = -2.0 * std::f64::consts::PI * m * y / w2 - 0.5 * kf * w2.ln();
            if lm > peak - PRUNE_NATS {
                peak = peak.max(lm);
                cands.push((c, d, lm));
            }
        }
    }
    if peak > lm0 + MAX_CANCELLATION {
        return Err(Error::Precision(format!(
            "lattice terms exceed the sum by e^{:.0}; double-double cannot resolve it",
            peak - lm0
        )));
    }
    // c = 0: e(mz) scaled by exp(2 pi m y) is e(mx).
    let (s, co) = Dd::prod_f64(m, x).sincos_2pi();
    let mut acc = DdComplex::new(co, s);
    for &(c, d, lm) in &cands {
        if lm < peak - PRUNE_NATS {
            continue;
        }
        let cf = c as f64;
        let re = Dd::prod_f64(cf, x).add_f64(d as f64);
        let im = Dd::prod_f64(cf, y);
        let w2 = re.sqr() + im.sqr();
        let a = if c == 1 {
            0
        } else {
            mod_inverse(d.rem_euclid(c as i64) as u64, c).expect("coprime pair")
        };
        let ma = ((params.m % c) * a) % c;
        let phase = Dd::from_f64(ma as f64) / Dd::from_f64(cf) - (re.mul_f64(m) / (w2.mul_f64(cf)));
        let (s, co) = phase.sincos_2pi();
        let mag = (two_pi_my - two_pi_my / w2).exp();
        let inv = DdComplex::new(re / w2, -(im / w2)).powu(k);
        acc = acc + DdComplex::new(co * mag, s * mag) * inv;
    }
    Ok(acc)
}

fn check_args(params: &ModularParams, y: f64, cut: u64) -> Result<()> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("lattice sum needs y > 0, got {y}")));
    }
    if cut == 0 {
        return Err(Error::domain("lattice cut must be at least 1"));
    }
    let e = 2.0 * std::f64::consts::PI * params.m as f64 * y;
    if e > MAX_EXPONENT {
        return Err(Error::domain(format!(
            "lattice evaluator needs 2 pi m y <= {MAX_EXPONENT}, got {e}"
        )));
    }
    Ok(())
}

/// `P(z)` from the lattice sum over `1 <= c <= cut`, `|d| <= cut`.
pub fn evaluate_lattice(params: &ModularParams, z: &ModularPoint, cut: u64) -> Result<LogComplex> {
    check_args(params, z.y, cut)?;
    let v = lattice_sum_scaled(params, z.x, z.y, cut)?;
    let scale = -2.0 * std::f64::consts::PI * params.m as f64 * z.y;
    Ok(LogComplex::from_scaled(Complex64::new(v.re.to_f64(), v.im.to_f64()), scale))
}

/// Coefficients `n = 1..=n_max` of `P` from one grid of `grid` equispaced
/// points at height `y`.
///
/// Values at `-x` are taken as conjugates of those at `x`, which is exact
/// for the symmetric truncation. The transform and the rescaling by
/// `exp(2 pi n y)` are carried in double-double.
pub fn oracle_coefficients(params: &ModularParams, n_max: u64, y: f64, cut: u64, grid: usize) -> Result<Vec<Complex64>> {
    check_args(params, y, cut)?;
    if grid % 2 != 0 || grid as u64 <= 2 * n_max {
        return Err(Error::Aliasing {
            grid,
            n: n_max as usize,
        });
    }
    let half: Vec<DdComplex> = (0..=grid / 2)
        .into_par_iter()
        .map(|j| lattice_sum_scaled(params, j as f64 / grid as f64, y, cut))
        .collect::<Result<_>>()?;
    let value = |j: usize| {
        if j <= grid / 2 {
            half[j]
        } else {
            let v = half[grid - j];
            DdComplex::new(v.re, -v.im)
        }
    };
    let inv_grid = Dd::from_f64(1.0 / grid as f64);
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let mut acc = DdComplex::ZERO;
        for j in 0..grid {
            let r = (n as usize * j) % grid;
            let (s, c) = (Dd::from_f64(r as f64) * inv_grid).sincos_2pi();
            // Multiply by e(-nj/G).
            acc = acc + value(j) * DdComplex::new(c, -s);
        }
        let shift = Dd::TWO_PI.mul_f64(n as f64).mul_f64(y) - Dd::TWO_PI.mul_f64(params.m as f64).mul_f64(y);
        let f = shift.exp() * inv_grid;
        out.push(Complex64::new((acc.re * f).to_f64(), (acc.im * f).to_f64()));
    }
    Ok(out)
}

/// Coefficient `n` of `P` by the lattice-sum transform.
pub fn coefficient_oracle(params: &ModularParams, n: u64, y: f64, cut: u64, grid: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("coefficient index n must be at least 1"));
    }
    if grid as u64 <= 2 * n {
        return Err(Error::Aliasing { grid, n: n as usize });
    }
    Ok(*oracle_coefficients(params, n, y, cut, grid)?.last().expect("n >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_the_cut_changes_little() {
        let p = ModularParams::new(20, 1).unwrap();
        let z = ModularPoint::new(0.17, 1.0).unwrap();
        let a = evaluate_lattice(&p, &z, 100).unwrap().to_complex();
        let b = evaluate_lattice(&p, &z, 200).unwrap().to_complex();
        assert!((a - b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn weight_k_under_inversion() {
        let p = ModularParams::new(20, 2).unwrap();
        let z = ModularPoint::new(0.3, 1.1).unwrap();
        let r2 = z.x * z.x + z.y * z.y;
        let w = ModularPoint::new(-z.x / r2, z.y / r2).unwrap();
        let a = evaluate_lattice(&p, &z, 200).unwrap().log_mag();
        let b = evaluate_lattice(&p, &w, 200).unwrap().log_mag();
        assert!((b - (a + 10.0 * r2.ln())).abs() < 1e-8);
    }

    #[test]
    fn cancellation_beyond_precision_is_reported() {
        let p = ModularParams::new(50, 50).unwrap();
        let z = ModularPoint::new(0.0, 1.0).unwrap();
        assert!(matches!(evaluate_lattice(&p, &z, 50), Err(Error::Precision(_))));
    }

    #[test]
    fn aliasing_is_rejected() {
        let p = ModularParams::new(20, 1).unwrap();
        assert!(matches!(coefficient_oracle(&p, 10, 1.0, 5, 20), Err(Error::Aliasing { .. })));
        assert!(matches!(coefficient_oracle(&p, 0, 1.0, 5, 64), Err(Error::Domain(_))));
    }

    #[test]
    fn leading_coefficient_of_weight_twelve_is_real() {
        let p = ModularParams::new(12, 1).unwrap();
        let c = oracle_coefficients(&p, 3, 1.0, 40, 16).unwrap();
        for v in c {
            assert!(v.im.abs() < 1e-12 * v.norm());
        }
    }
}
