//! Subregions of the fundamental domain and integration over them with
//! `y` outer and `x` inner.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_batched, Integrand, QuadResult};

/// `{x_lo <= x <= x_hi, y_lo <= y <= y_hi, |z| >= 1}`, with
/// `-1/2 <= x_lo < x_hi <= 1/2`. `y_hi` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Region {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(x_lo >= -0.5 && x_hi <= 0.5 && x_lo < x_hi) {
            return Err(Error::domain(format!(
                "region x-range [{x_lo}, {x_hi}] is not inside [-1/2, 1/2]"
            )));
        }
        if !(y_lo >= 0.0 && y_lo < y_hi) || y_lo.is_nan() {
            return Err(Error::domain(format!("region y-range [{y_lo}, {y_hi}] is empty")));
        }
        let r = Region { x_lo, x_hi, y_lo, y_hi };
        if r.y_hi <= r.floor() {
            return Err(Error::domain("region lies entirely below the unit circle"));
        }
        Ok(r)
    }

    /// The whole fundamental domain.
    pub fn full() -> Self {
        Region {
            x_lo: -0.5,
            x_hi: 0.5,
            y_lo: 0.75f64.sqrt(),
            y_hi: f64::INFINITY,
        }
    }

    /// Lowest height reached inside the domain.
    pub fn floor(&self) -> f64 {
        // The circle is lowest at the largest |x|.
        let xm = self.x_lo.abs().max(self.x_hi.abs());
        let edge = (1.0 - xm * xm).sqrt();
        self.y_lo.max(edge)
    }

    /// The `x`-intervals at height `y`.
    pub fn x_intervals(&self, y: f64) -> Vec<(f64, f64)> {
        if y < self.y_lo || y > self.y_hi {
            return Vec::new();
        }
        if y >= 1.0 {
            return vec![(self.x_lo, self.x_hi)];
        }
        let s = (1.0 - y * y).sqrt();
        let mut out = Vec::with_capacity(2);
        if self.x_lo < -s {
            out.push((self.x_lo, self.x_hi.min(-s)));
        }
        if self.x_hi > s {
            out.push((self.x_lo.max(s), self.x_hi));
        }
        out
    }

    /// Heights where the shape of the `x`-section changes.
    fn y_breaks(&self, y_top: f64) -> Vec<f64> {
        let lo = self.floor();
        let mut b = vec![lo, y_top];
        for x in [self.x_lo, self.x_hi] {
            let c = (1.0 - x * x).sqrt();
            if c > lo && c < y_top {
                b.push(c);
            }
        }
        if lo < 1.0 && y_top > 1.0 {
            b.push(1.0);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Hyperbolic area `int dx dy / y^2`, in closed form.
    pub fn area(&self) -> f64 {
        let inv_top = if self.y_hi.is_finite() { 1.0 / self.y_hi } else { 0.0 };
        // Split x at the points where the circle meets y_lo and y_hi.
        let mut xs = vec![self.x_lo, self.x_hi];
        for y in [self.y_lo, self.y_hi] {
            if y < 1.0 {
                let s = (1.0 - y * y).sqrt();
                for x in [-s, s] {
                    if x > self.x_lo && x < self.x_hi {
                        xs.push(x);
                    }
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let xm = 0.5 * (a + b);
            let circle = (1.0 - xm * xm).sqrt();
            if circle >= self.y_hi {
                continue;
            }
            total += if circle > self.y_lo {
                b.asin() - a.asin() - (b - a) * inv_top
            } else {
                (b - a) * (1.0 / self.y_lo - inv_top)
            };
        }
        total
    }
}

/// Tolerances for [`integrate_region`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_depth: 40,
        }
    }
}

/// A function of `x` at fixed height that can be integrated over intervals.
pub trait RowIntegral {
    type Output: Integrand + Send;
    fn integral(&self, a: f64, b: f64) -> Self::Output;
}

/// `scale * (c_0 + sum_{j >= 1} c_j cos(2 pi j x))`, integrated exactly.
#[derive(Clone, Debug)]
pub struct CosineRow {
    pub scale: f64,
    pub coeffs: Vec<f64>,
}

impl CosineRow {
    /// Real part of `(sum_n a_n e(nx)) * conj(sum_n b_n e(nx))` for real
    /// coefficients given densely from `n = 1`.
    pub fn from_product(a: &[f64], b: &[f64], scale: f64) -> Self {
        let len = a.len().max(b.len());
        let mut coeffs = vec![0.0; len];
        // Correlation d_j = sum_n a_{n+j} b_n, for both signs of j.
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for n in 0..b.len() {
                if n + j < a.len() {
                    s += a[n + j] * b[n];
                }
            }
            if j > 0 {
                for n in 0..a.len() {
                    if n + j < b.len() {
                        s += b[n + j] * a[n];
                    }
                }
            }
            *c = s;
        }
        CosineRow { scale, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut s = self.coeffs.first().copied().unwrap_or(0.0);
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            s += c * (2.0 * PI * j as f64 * x).cos();
        }
        self.scale * s
    }
}

impl RowIntegral for CosineRow {
    type Output = f64;

    fn integral(&self, a: f64, b: f64) -> f64 {
        let mut s = self.coeffs.first().copied().unwrap_or(0.0) * (b - a);
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            let w = 2.0 * PI * j as f64;
            s += c * ((w * b).sin() - (w * a).sin()) / w;
        }
        self.scale * s
    }
}

/// `int int f dx dy` over the region below `y_top`, where `make_row(y)` gives
/// `f(., y)`. Rows for the nodes of each refinement step are built in
/// parallel and combined in node order.
pub fn integrate_region<R, F>(
    region: &Region,
    y_top: f64,
    spec: &QuadSpec,
    make_row: F,
) -> Result<QuadResult<R::Output>>
where
    R: RowIntegral,
    F: Fn(f64) -> Result<R> + Sync,
{
    let top = region.y_hi.min(y_top);
    if !top.is_finite() {
        return Err(Error::domain("region integration needs a finite top height"));
    }
    let breaks = region.y_breaks(top);
    let mut batch = |ys: &[f64]| -> Result<Vec<R::Output>> {
        ys.par_iter()
            .map(|&y| {
                let parts = region.x_intervals(y);
                if parts.is_empty() {
                    return Ok(R::Output::zero());
                }
                let row = make_row(y)?;
                Ok(parts
                    .iter()
                    .fold(R::Output::zero(), |acc, &(a, b)| acc + row.integral(a, b)))
            })
            .collect()
    };
    let mut value = R::Output::zero();
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let r = adaptive_batched(w[0], w[1], spec.abs_tol, spec.rel_tol, spec.max_depth, &mut batch)?;
        value = value + r.value;
        error += r.error;
        evaluations += r.evaluations;
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_domain_area() {
        assert!((Region::full().area() - PI / 3.0).abs() < 1e-15);
        let half = Region::new(0.0, 0.5, 0.0, f64::INFINITY).unwrap();
        assert!((half.area() - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn area_matches_quadrature() {
        for r in [
            Region::new(-0.5, 0.5, 0.75f64.sqrt(), 3.0).unwrap(),
            Region::new(-0.3, 0.2, 0.9, 1.4).unwrap(),
            Region::new(0.1, 0.45, 0.0, 0.97).unwrap(),
        ] {
            let q = integrate_region(&r, r.y_hi, &QuadSpec::default(), |y| {
                Ok(CosineRow {
                    scale: 1.0 / (y * y),
                    coeffs: vec![1.0],
                })
            })
            .unwrap();
            assert!((q.value - r.area()).abs() < 1e-9 * r.area(), "{r:?}");
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        assert!(matches!(Region::new(-0.6, 0.0, 1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(Region::new(0.0, 0.1, 0.2, 0.5), Err(Error::Domain(_))));
        assert!(matches!(Region::new(0.0, 0.1, 2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cosine_row_integrates_exactly() {
        let a = [0.5, -1.0, 0.25];
        let b = [1.0, 0.3];
        let row = CosineRow::from_product(&a, &b, 2.0);
        let direct = |x: f64| {
            let e = |n: usize| num_complex::Complex64::from_polar(1.0, 2.0 * PI * (n + 1) as f64 * x);
            let p: num_complex::Complex64 = a.iter().enumerate().map(|(n, &c)| e(n) * c).sum();
            let q: num_complex::Complex64 = b.iter().enumerate().map(|(n, &c)| e(n) * c).sum();
            2.0 * (p * q.conj()).re
        };
        for x in [-0.4, 0.0, 0.13, 0.5] {
            assert!((row.eval(x) - direct(x)).abs() < 1e-13);
        }
        let g = crate::quadrature::GaussLegendre::new(40);
        let want: f64 = g.integrate(0.1, 0.45, direct);
        assert!((row.integral(0.1, 0.45) - want).abs() < 1e-13);
    }
}
