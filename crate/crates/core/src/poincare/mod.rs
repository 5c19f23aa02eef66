//! The Poincare series `P_{k,m}(z) = 1/2 sum_{gcd(c,d)=1} e(m gamma z) (cz + d)^{-k}`:
//! Fourier coefficients with certified truncation, two independent
//! evaluators, the Petersson norm and the normalized mass density.

pub(crate) mod coefficient;
mod evaluate;
mod lattice;
mod mass;
mod region;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coefficient::{build_table, coefficient, CoefficientEntry, CoefficientTable, TableFailure};
pub use evaluate::{evaluate, evaluate_with_error, FourierRow};
pub use lattice::{coefficient_oracle, evaluate_lattice, oracle_coefficients};
pub use mass::{
    mass_density, mass_integral, pairing_prediction, petersson_norm_log, petersson_pairing, table_for_height, y_max_for,
};
pub use region::{integrate_region, CosineRow, QuadSpec, Region, RowIntegral};

/// Weight `k` (even, at least 4) and index `m >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularParams {
    pub k: u32,
    pub m: u64,
    /// `k - 1`, the Bessel order.
    pub nu: u32,
}

impl ModularParams {
    pub fn new(k: u32, m: u64) -> Result<Self> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::domain(format!("weight must be even and at least 4, got {k}")));
        }
        if m == 0 {
            return Err(Error::domain("index m must be at least 1"));
        }
        Ok(ModularParams { k, m, nu: k - 1 })
    }

    /// `i^k`, which is `+1` for `k = 0 mod 4` and `-1` otherwise.
    pub fn i_pow_k(&self) -> i8 {
        if self.k % 4 == 0 {
            1
        } else {
            -1
        }
    }
}

/// `Q = 4 pi sqrt(mn) / nu`, where the Bessel argument `nu Q / c` crosses the
/// order.
pub fn q_cut(params: &ModularParams, n: u64) -> f64 {
    4.0 * PI * ((params.m as f64) * (n as f64)).sqrt() / f64::from(params.nu)
}

/// A point `x + iy` of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularPoint {
    pub x: f64,
    pub y: f64,
    /// Whether the point lies in the closed standard fundamental domain.
    pub reduced: bool,
}

impl ModularPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(Error::domain(format!("point must satisfy y > 0, got {x} + {y}i")));
        }
        let reduced = x.abs() <= 0.5 && x * x + y * y >= 1.0;
        Ok(ModularPoint { x, y, reduced })
    }

    /// Maps the point into the fundamental domain.
    ///
    /// Returns the reduced point and `(c, d)` of the matrix used, so that
    /// `P(z) = (cz + d)^{-k} P(gamma z)`.
    pub fn reduce(&self) -> (ModularPoint, (i64, i64)) {
        // gamma = [[a, b], [c, d]] with the current point equal to gamma z;
        // translations keep (c, d), the inversion moves (a, b) into them.
        let (mut a, mut b, mut c, mut d) = (1i64, 0i64, 0i64, 1i64);
        let (mut x, mut y) = (self.x, self.y);
        for _ in 0..200 {
            let shift = (x + 0.5).floor();
            x -= shift;
            let s = shift as i64;
            (a, b) = (a - s * c, b - s * d);
            let r2 = x * x + y * y;
            if r2 >= 1.0 - 1e-15 {
                break;
            }
            (x, y) = (-x / r2, y / r2);
            (a, b, c, d) = (-c, -d, a, b);
        }
        let p = ModularPoint {
            x,
            y,
            reduced: true,
        };
        (p, (c, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(ModularParams::new(12, 1).is_ok());
        assert!(matches!(ModularParams::new(13, 1), Err(Error::Domain(_))));
        assert!(matches!(ModularParams::new(2, 1), Err(Error::Domain(_))));
        assert!(matches!(ModularParams::new(12, 0), Err(Error::Domain(_))));
        assert_eq!(ModularParams::new(14, 3).unwrap().nu, 13);
        assert_eq!(ModularParams::new(12, 1).unwrap().i_pow_k(), 1);
        assert_eq!(ModularParams::new(14, 1).unwrap().i_pow_k(), -1);
    }

    #[test]
    fn q_cut_values() {
        let p = ModularParams::new(14, 1).unwrap();
        assert!((q_cut(&p, 1) - 4.0 * PI / 13.0).abs() < 1e-15);
        let p = ModularParams::new(200, 2000).unwrap();
        assert!((q_cut(&p, 2000) - 4.0 * PI * 2000.0 / 199.0).abs() < 1e-12);
        assert!(q_cut(&p, 3) < q_cut(&p, 4));
    }

    #[test]
    fn reduction_lands_in_domain() {
        for (x, y) in [(0.3, 0.1), (-2.7, 0.05), (0.49, 0.2), (5.0, 3.0)] {
            let z = ModularPoint::new(x, y).unwrap();
            let (r, (c, d)) = z.reduce();
            assert!(r.x.abs() <= 0.5 + 1e-12 && r.x * r.x + r.y * r.y >= 1.0 - 1e-12);
            // Im(gamma z) = y / |cz + d|^2.
            let w2 = (c as f64 * x + d as f64).powi(2) + (c as f64 * y).powi(2);
            assert!((r.y - y / w2).abs() < 1e-9 * r.y);
        }
        assert!(ModularPoint::new(0.0, 1.5).unwrap().reduced);
        assert!(!ModularPoint::new(0.0, 0.5).unwrap().reduced);
        assert!(ModularPoint::new(0.0, 0.0).is_err());
    }
}
