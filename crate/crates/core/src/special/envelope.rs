//! Piecewise envelopes `f` on `[0, 1]` and `g` on `[1, inf)` bounding
//! `|J_nu(nu x)|` for `nu >= 15`.
//!
//! ```text
//! f(x) = A1 nu^{-1/2} (e x / 2)^nu                                 0 <= x <= x0
//!      = A2 nu^{-1/2} (1 - x^2)^{-1/4} exp(-nu (1 - x^2)^{3/2} / 3) x0 <= x <= x_nu
//!      = nu^{-1/3}                                                 x_nu <= x <= 1
//! g(x) = nu^{-1/3}                                                 1 <= x <= y_nu
//!      = nu^{-1/2} (x^2 - 1)^{-1/4}                                x >= y_nu
//! ```

use serde::{Deserialize, Serialize};

use super::logscalar::SignedLogReal;
use crate::error::{Error, Result};

/// Smallest order for which the envelopes are defined.
pub const MIN_ORDER: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub nu: u32,
    /// Root of `x exp((1 - x^2)^{3/2} / 3) = 2 / e`.
    pub x0: f64,
    pub x_nu: f64,
    pub y_nu: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `ln x + (1 - x^2)^{3/2} / 3 - ln(2/e)`; increasing on `(0, 1)`.
fn x0_equation(x: f64) -> f64 {
    x.ln() + (1.0 - x * x).powf(1.5) / 3.0 - (2f64.ln() - 1.0)
}

/// Solves for `x0` by bisection to full double precision.
pub fn solve_x0() -> f64 {
    let (mut lo, mut hi) = (0.3, 0.9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if x0_equation(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl EnvelopeParams {
    /// Builds the envelope for order `nu`, fixing `A2` and then `A1` from
    /// continuity at `x_nu` and `x0`.
    pub fn new(nu: u32) -> Result<Self> {
        if nu < MIN_ORDER {
            return Err(Error::domain(format!("envelopes need nu >= {MIN_ORDER}, got {nu}")));
        }
        let nuf = f64::from(nu);
        let x0 = solve_x0();
        let x_nu = (1.0 - nuf.powf(-2.0 / 3.0)).sqrt();
        let y_nu = (1.0 + nuf.powf(-2.0 / 3.0)).sqrt();
        // Middle piece without A2, evaluated at x_nu, must equal nu^{-1/3}.
        let ln_a2 = -nuf.ln() / 3.0 - middle_piece_ln(nuf, x_nu);
        // First piece without A1 at x0 must match A2 times the middle piece.
        let ln_a1 = ln_a2 + middle_piece_ln(nuf, x0) - first_piece_ln(nuf, x0);
        Ok(EnvelopeParams {
            nu,
            x0,
            x_nu,
            y_nu,
            a1: ln_a1.exp(),
            a2: ln_a2.exp(),
        })
    }

    /// `(ln f(x0-), ln f(x0+))` and the same at `x_nu`, for continuity checks.
    pub fn junction_logs(&self) -> [(f64, f64); 2] {
        let nuf = f64::from(self.nu);
        let at_x0 = (
            self.a1.ln() + first_piece_ln(nuf, self.x0),
            self.a2.ln() + middle_piece_ln(nuf, self.x0),
        );
        let at_xnu = (self.a2.ln() + middle_piece_ln(nuf, self.x_nu), -nuf.ln() / 3.0);
        [at_x0, at_xnu]
    }
}

/// `ln(nu^{-1/2} (e x / 2)^nu)`.
fn first_piece_ln(nu: f64, x: f64) -> f64 {
    -0.5 * nu.ln() + nu * (x.ln() + 1.0 - 2f64.ln())
}

/// `ln(nu^{-1/2} (1 - x^2)^{-1/4} exp(-nu (1 - x^2)^{3/2} / 3))`.
fn middle_piece_ln(nu: f64, x: f64) -> f64 {
    let w = 1.0 - x * x;
    -0.5 * nu.ln() - 0.25 * w.ln() - nu * w.powf(1.5) / 3.0
}

/// `f(x)` for `x` in `[0, 1]`.
pub fn envelope_f(p: &EnvelopeParams, x: f64) -> Result<SignedLogReal> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("envelope f is defined on [0, 1], got {x}")));
    }
    let nu = f64::from(p.nu);
    let l = if x == 0.0 {
        return Ok(SignedLogReal::ZERO);
    } else if x <= p.x0 {
        p.a1.ln() + first_piece_ln(nu, x)
    } else if x <= p.x_nu {
        p.a2.ln() + middle_piece_ln(nu, x)
    } else {
        -nu.ln() / 3.0
    };
    Ok(SignedLogReal::from_ln(l))
}

/// `g(x)` for `x >= 1`.
pub fn envelope_g(p: &EnvelopeParams, x: f64) -> Result<SignedLogReal> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain(format!("envelope g is defined on [1, inf), got {x}")));
    }
    let nu = f64::from(p.nu);
    let l = if x <= p.y_nu {
        -nu.ln() / 3.0
    } else {
        -0.5 * nu.ln() - 0.25 * (x * x - 1.0).ln()
    };
    Ok(SignedLogReal::from_ln(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x0_solves_its_equation() {
        let x0 = solve_x0();
        assert!(x0 > 0.628 && x0 < 0.630);
        let lhs = x0 * ((1.0 - x0 * x0).powf(1.5) / 3.0).exp();
        assert!((lhs - 2.0 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn constants_match_closed_forms() {
        for nu in [15, 64, 511] {
            let p = EnvelopeParams::new(nu).unwrap();
            assert!((p.a2 - (1.0f64 / 3.0).exp()).abs() < 1e-12 * p.a2);
            let a1 = p.a2 * (1.0 - p.x0 * p.x0).powf(-0.25);
            assert!((p.a1 - a1).abs() < 1e-10 * a1);
        }
    }

    #[test]
    fn continuous_at_junctions() {
        for nu in [15, 16, 32, 64, 128, 256, 512] {
            let p = EnvelopeParams::new(nu).unwrap();
            for (l, r) in p.junction_logs() {
                assert!((l - r).abs() < 1e-10, "nu = {nu}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn special_points() {
        let p = EnvelopeParams::new(40).unwrap();
        assert!(envelope_f(&p, 0.0).unwrap().is_zero());
        let third = -(40f64).ln() / 3.0;
        assert!((envelope_g(&p, p.y_nu).unwrap().log_mag() - third).abs() < 1e-12);
        // Just past y_nu the second piece takes over at the same value.
        let past = envelope_g(&p, p.y_nu * (1.0 + 1e-12)).unwrap().log_mag();
        assert!((past - third).abs() < 1e-9);
        assert!((envelope_f(&p, p.x_nu).unwrap().log_mag() - third).abs() < 1e-10);
        assert!(envelope_f(&p, 1.5).is_err());
        assert!(envelope_g(&p, 0.5).is_err());
        assert!(EnvelopeParams::new(14).is_err());
    }
}
