//! Values of `P(z) = sum_n p(n) e(nx) e^{-2 pi n y}` from a coefficient table.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::coefficient::{CoefficientTable, ScaledSum};
use super::ModularPoint;
use crate::error::{Error, Result};
use crate::special::dd::Dd;
use crate::special::{LogComplex, SignedLogReal};

/// Consecutive negligible terms required before the series is cut.
const QUIET_RUN: usize = 25;

/// `e(n x)` with `n x` reduced mod 1 in double-double, so large `n` keep
/// full phase accuracy.
pub(crate) fn unit_phase(n: u64, x: f64) -> Complex64 {
    let nx = Dd::prod_f64(n as f64, x);
    let frac = (nx - nx.round()).to_f64();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

/// Running complex sum scaled by the largest magnitude seen.
struct ScaledComplex {
    scale: f64,
    sum: Complex64,
}

impl ScaledComplex {
    fn new() -> Self {
        ScaledComplex {
            scale: f64::NEG_INFINITY,
            sum: Complex64::new(0.0, 0.0),
        }
    }

    fn add(&mut self, log_mag: f64, dir: Complex64) {
        if log_mag == f64::NEG_INFINITY {
            return;
        }
        if log_mag > self.scale {
            self.sum *= (self.scale - log_mag).exp();
            self.scale = log_mag;
        }
        self.sum += dir * (log_mag - self.scale).exp();
    }

    fn value(&self) -> LogComplex {
        LogComplex::from_scaled(self.sum, self.scale)
    }
}

/// `P(z)` from the table.
///
/// Terms are accumulated in log-scaled form and the series stops once
/// `QUIET_RUN` consecutive terms fall below `tol * sum |terms|`, with `tol`
/// the table's tolerance.
pub fn evaluate(table: &CoefficientTable, z: &ModularPoint) -> Result<LogComplex> {
    Ok(evaluate_with_error(table, z)?.0)
}

/// `P(z)` and `ln` of an error bound: the certified coefficient errors, the
/// rounding of the accumulation and the cut-off allowance `tol * sum |terms|`.
pub fn evaluate_with_error(table: &CoefficientTable, z: &ModularPoint) -> Result<(LogComplex, f64)> {
    if z.y < 0.5 {
        return Err(Error::domain(format!("series evaluation needs y >= 1/2, got {}", z.y)));
    }
    let ln_tol = table.tol.ln();
    let mut sum = ScaledComplex::new();
    let mut abs = ScaledSum::new();
    let mut err = ScaledSum::new();
    let mut quiet = 0;
    for e in &table.entries {
        let lq = -2.0 * PI * e.n as f64 * z.y;
        let lm = e.value.log_mag() + lq;
        let dir = unit_phase(e.n, z.x) * f64::from(e.value.sign());
        sum.add(lm, dir);
        abs.add(SignedLogReal::from_ln(lm));
        err.add(SignedLogReal::from_ln(e.log_tail + lq));
        if lm < ln_tol + abs.value().log_mag() {
            quiet += 1;
            if quiet >= QUIET_RUN {
                let la = abs.value().log_mag();
                let rounding = la + (8.0 * e.n as f64 * f64::EPSILON).ln();
                let bound = err
                    .value()
                    .add(&SignedLogReal::from_ln(rounding))
                    .add(&SignedLogReal::from_ln(la + ln_tol));
                return Ok((sum.value(), bound.log_mag()));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::TableTooShort {
        reached: table.entries.len(),
    })
}

/// The series at a fixed height `y` as a trigonometric polynomial in `x`,
/// `P(x + iy) = exp(log_scale) * sum_n b_n e(nx)`.
#[derive(Clone, Debug)]
pub struct FourierRow {
    pub y: f64,
    pub log_scale: f64,
    /// `(n, b_n)` in increasing `n`.
    pub terms: Vec<(u64, f64)>,
}

impl FourierRow {
    /// Uses the same stopping rule as [`evaluate`], at any height.
    pub fn new(table: &CoefficientTable, y: f64) -> Result<Self> {
        let ln_tol = table.tol.ln();
        let mut logs = Vec::new();
        let mut abs = ScaledSum::new();
        let mut quiet = 0;
        for e in &table.entries {
            let lm = e.value.log_mag() - 2.0 * PI * e.n as f64 * y;
            logs.push((e.n, e.value.sign(), lm));
            abs.add(SignedLogReal::from_ln(lm));
            if lm < ln_tol + abs.value().log_mag() {
                quiet += 1;
                if quiet >= QUIET_RUN {
                    let scale = logs.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
                    let terms = logs
                        .iter()
                        .map(|&(n, s, l)| (n, f64::from(s) * (l - scale).exp()))
                        .collect();
                    return Ok(FourierRow {
                        y,
                        log_scale: scale,
                        terms,
                    });
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::TableTooShort {
            reached: table.entries.len(),
        })
    }

    /// `sum_n b_n e(nx)`, without the scale factor.
    pub fn eval_scaled(&self, x: f64) -> Complex64 {
        let step = unit_phase(1, x);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut w = Complex64::new(1.0, 0.0);
        let mut last = 0u64;
        for &(n, b) in &self.terms {
            // Re-anchor the recurrence every 64 steps to bound drift.
            if n % 64 == 0 || n != last + 1 {
                w = unit_phase(n, x);
            } else {
                w *= step;
            }
            last = n;
            acc += w * b;
        }
        acc
    }

    pub fn eval(&self, x: f64) -> LogComplex {
        LogComplex::from_scaled(self.eval_scaled(x), self.log_scale)
    }

    /// `sum_n b_n^2`, the mean of `|P|^2 / exp(2 log_scale)` over one period.
    pub fn mean_square(&self) -> f64 {
        self.terms.iter().map(|t| t.1 * t.1).sum()
    }
}
