//! Petersson norm, the normalized mass `y^k |P|^2 / <P, P>` and its integrals
//! over the fundamental domain.

use std::f64::consts::PI;

use super::coefficient::CoefficientTable;
use super::evaluate::{evaluate, FourierRow};
use super::region::{integrate_region, CosineRow, QuadSpec, Region};
use super::{build_table, ModularParams, ModularPoint};
use crate::error::{Error, Result};
use crate::quadrature::QuadResult;
use crate::special::{log_gamma, SignedLogReal};

/// Longest table [`table_for_height`] will build.
const MAX_TABLE: u64 = 1 << 16;

/// `ln <P, P> = ln Gamma(k-1) - (k-1) ln(4 pi m) + ln p(m)`.
pub fn petersson_norm_log(table: &CoefficientTable) -> Result<SignedLogReal> {
    let p = table.params;
    let e = table
        .get(p.m)
        .ok_or_else(|| Error::domain(format!("table does not contain n = m = {}", p.m)))?;
    if e.value.sign() <= 0 || e.log_tail >= e.value.log_mag() {
        return Err(Error::DegenerateNorm(e.value.to_f64()));
    }
    let k1 = f64::from(p.k - 1);
    let ln = log_gamma(k1)? - k1 * (4.0 * PI * p.m as f64).ln() + e.value.log_mag();
    Ok(SignedLogReal::from_ln(ln))
}

/// `<P_{k,m}, P_{k,m'}> = Gamma(k-1) / (4 pi m')^{k-1} p_{k,m}(m')`.
pub fn pairing_prediction(table: &CoefficientTable, m2: u64) -> Result<SignedLogReal> {
    let p = table.params;
    let e = table
        .get(m2)
        .ok_or_else(|| Error::domain(format!("table does not contain n = {m2}")))?;
    let k1 = f64::from(p.k - 1);
    Ok(e.value.scale_ln(log_gamma(k1)? - k1 * (4.0 * PI * m2 as f64).ln()))
}

/// `y^k |P(z)|^2 / <P, P>`, after reducing `z` into the fundamental domain.
pub fn mass_density(table: &CoefficientTable, z: &ModularPoint) -> Result<f64> {
    let (w, _) = z.reduce();
    let v = evaluate(table, &w)?;
    let ln = 2.0 * v.log_mag() + f64::from(table.params.k) * w.y.ln() - petersson_norm_log(table)?.log_mag();
    Ok(ln.exp())
}

/// A table long enough for the series to converge at height `y`, grown by
/// doubling from `n_start`.
pub fn table_for_height(params: &ModularParams, n_start: u64, tol: f64, y: f64) -> Result<CoefficientTable> {
    let mut table = build_table(params, n_start.max(1), tol)?;
    loop {
        match FourierRow::new(&table, y) {
            Ok(_) => return Ok(table),
            Err(Error::TableTooShort { reached }) => {
                if let Some(f) = &table.failure {
                    return Err(Error::Precision(format!(
                        "table stopped at n = {}: {}",
                        f.n, f.error
                    )));
                }
                if reached as u64 >= MAX_TABLE {
                    return Err(Error::TableTooShort { reached });
                }
                table.extend_to(2 * reached as u64);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Dense coefficients `b_1, b_2, ...` of a row, and its log scale.
fn dense(row: &FourierRow) -> Vec<f64> {
    let len = row.terms.last().map_or(0, |t| t.0 as usize);
    let mut b = vec![0.0; len];
    for &(n, v) in &row.terms {
        b[n as usize - 1] = v;
    }
    b
}

/// `ln` of `int_{-1/2}^{1/2} y^{k-2} |P(x + iy)|^2 dx / <P, P>`.
fn log_strip_mass(table: &CoefficientTable, y: f64, log_norm: f64) -> Result<f64> {
    let row = FourierRow::new(table, y)?;
    let k = f64::from(table.params.k);
    Ok(row.mean_square().ln() + 2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm)
}

/// Height `Y` above which the normalized mass is at most `tail_tol`, and the
/// bound on that tail. Searched from `y_from` upward.
///
/// Each term of `sum_n |p(n)|^2 e^{-4 pi n y} y^{k-2}` has logarithmic
/// derivative at most `-delta = -(4 pi - (k-2)/Y)` for `y >= Y`, so the tail
/// is at most the strip mass at `Y` divided by `delta`.
pub fn y_max_for(table: &CoefficientTable, y_from: f64, tail_tol: f64) -> Result<(f64, f64)> {
    let log_norm = petersson_norm_log(table)?.log_mag();
    let k = f64::from(table.params.k);
    let mut y = y_from.max(1.0).max(1.05 * (k - 2.0) / (4.0 * PI));
    for _ in 0..400 {
        let delta = 4.0 * PI - (k - 2.0) / y;
        let tail = (log_strip_mass(table, y, log_norm)? - delta.ln()).exp();
        if tail <= tail_tol {
            return Ok((y, tail));
        }
        y *= 1.05;
    }
    Err(Error::Quadrature(format!(
        "no height found with mass tail below {tail_tol:e}"
    )))
}

/// `int_region y^k |P|^2 / <P, P> dmu`. For an unbounded region the
/// integral stops at [`y_max_for`] and the tail bound is added to `error`.
pub fn mass_integral(table: &CoefficientTable, region: &Region, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    let log_norm = petersson_norm_log(table)?.log_mag();
    let k = f64::from(table.params.k);
    let (top, tail) = if region.y_hi.is_finite() {
        (region.y_hi, 0.0)
    } else {
        let tail_tol = spec.abs_tol.max(0.1 * spec.rel_tol);
        y_max_for(table, region.floor(), tail_tol)?
    };
    let mut r = integrate_region(region, top, spec, |y| {
        let row = FourierRow::new(table, y)?;
        let b = dense(&row);
        let scale = (2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm).exp();
        Ok(CosineRow::from_product(&b, &b, scale))
    })?;
    r.error += tail;
    Ok(r)
}

/// `<P_{k,m}, P_{k,m'}>` by integration over the fundamental domain, divided
/// by `<P_{k,m}, P_{k,m}>`. Both tables must share the weight.
pub fn petersson_pairing(a: &CoefficientTable, b: &CoefficientTable, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    if a.params.k != b.params.k {
        return Err(Error::domain("pairing needs equal weights"));
    }
    let log_a = petersson_norm_log(a)?.log_mag();
    let log_b = petersson_norm_log(b)?.log_mag();
    let k = f64::from(a.params.k);
    let full = Region::full();
    let tail_tol = spec.abs_tol.max(0.1 * spec.rel_tol);
    let (ya, ta) = y_max_for(a, full.floor(), tail_tol)?;
    let (yb, tb) = y_max_for(b, full.floor(), tail_tol)?;
    // Cauchy-Schwarz on the two normalized tails.
    let tail = (ta * tb).sqrt() * (0.5 * (log_b - log_a)).exp();
    let mut r = integrate_region(&full, ya.max(yb), spec, |y| {
        let (ra, rb) = (FourierRow::new(a, y)?, FourierRow::new(b, y)?);
        let scale = (ra.log_scale + rb.log_scale + (k - 2.0) * y.ln() - log_a).exp();
        Ok(CosineRow::from_product(&dense(&ra), &dense(&rb), scale))
    })?;
    r.error += tail;
    Ok(r)
}
