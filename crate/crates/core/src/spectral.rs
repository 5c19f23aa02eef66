//! The unitary Eisenstein series `E(z, 1/2 + it)` and the pairing
//! `<P E, P> / <P, P>` computed two ways: over the fundamental domain, and as
//! a one-dimensional integral over the strip after unfolding.
//!
//! With `s = 1/2 + it` and `xi(s) = pi^{-s/2} Gamma(s/2) zeta(s)`,
//! `E = y^s + phi y^{1-s} + (4 sqrt(y) / xi(1+2it)) sum_{n>=1} lambda(n) K_{it}(2 pi n y) cos(2 pi n x)`
//! with `phi = xi(2it) / xi(1+2it)` and `lambda(n) = n^{it} sigma_{-2it}(n)`,
//! which is real.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::divisors;
use crate::error::{Error, Result};
use crate::poincare::{
    integrate_region, petersson_norm_log, CoefficientTable, CosineRow, FourierRow, ModularPoint, QuadSpec,
    Region, RowIntegral,
};
use crate::quadrature::{adaptive_batched, QuadResult};
use crate::special::{bessel_k_imag, log_gamma_complex, xi};

/// Largest `|t|` accepted.
pub const MAX_T: f64 = 100.0;
/// Smallest `|t|` accepted; `phi` has a removable singularity at `t = 0`
/// that the quotient of `xi` values does not resolve.
pub const MIN_T: f64 = 1e-3;

/// Parameters of `E(z, 1/2 + it)` with a truncation tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinSpec {
    pub t: f64,
    pub tol: f64,
}

impl EisensteinSpec {
    pub fn new(t: f64, tol: f64) -> Result<Self> {
        if !(t.abs() <= MAX_T) || t.abs() < MIN_T {
            return Err(Error::domain(format!(
                "Eisenstein parameter needs {MIN_T} <= |t| <= {MAX_T}, got {t}"
            )));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::domain(format!("Eisenstein tolerance must lie in (0, 1), got {tol}")));
        }
        Ok(EisensteinSpec { t, tol })
    }
}

/// `lambda(n) = sum_{d | n} cos(t ln(n / d^2))`.
pub fn lambda(t: f64, n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    divisors(n)
        .into_iter()
        .map(|d| (t * (ln_n - 2.0 * (d as f64).ln())).cos())
        .sum()
}

/// Constants of the expansion for one `t`.
#[derive(Clone, Copy, Debug)]
pub struct Eisenstein {
    pub spec: EisensteinSpec,
    /// `phi = xi(2it) / xi(1+2it)`, of modulus one.
    pub phi: Complex64,
    /// `1 / xi(1+2it)`.
    pub inv_xi: Complex64,
}

impl Eisenstein {
    pub fn new(spec: EisensteinSpec) -> Result<Self> {
        let t = spec.t;
        let top = xi(Complex64::new(0.0, 2.0 * t))?;
        let bottom = xi(Complex64::new(1.0, 2.0 * t))?;
        let phi = (top / bottom).to_complex();
        let inv_xi = bottom.powi(-1).to_complex();
        Ok(Eisenstein { spec, phi, inv_xi })
    }

    /// `y^{1/2+it} + phi y^{1/2-it}`.
    pub fn constant_term(&self, y: f64) -> Complex64 {
        let ly = y.ln();
        let a = Complex64::from_polar(y.sqrt(), self.spec.t * ly);
        a + self.phi * a.conj()
    }

    /// `4 sqrt(y) lambda(n) K_{it}(2 pi n y) / xi(1+2it)`, the coefficient of
    /// `cos(2 pi n x)`.
    pub fn cos_coefficient(&self, n: u64, y: f64) -> Result<Complex64> {
        let k = bessel_k_imag(self.spec.t, 2.0 * PI * n as f64 * y)?;
        Ok(self.inv_xi * (4.0 * y.sqrt() * lambda(self.spec.t, n) * k))
    }

    /// Bound on `|cos_coefficient(n, y)|`: `d(n) <= 2 sqrt(n)` and
    /// `|K_{it}(u)| <= K_0(u) < sqrt(pi / 2u) e^{-u}` give `4 e^{-2 pi n y} / |xi|`.
    pub fn envelope(&self, n: u64, y: f64) -> f64 {
        4.0 * self.inv_xi.norm() * (-2.0 * PI * n as f64 * y).exp()
    }

    /// Constant term and cosine coefficients at height `y`, cut where the
    /// envelope drops below `tol` times the constant term.
    pub fn row(&self, y: f64) -> Result<(Complex64, Vec<Complex64>)> {
        let c0 = self.constant_term(y);
        let floor = self.spec.tol * c0.norm().max(f64::MIN_POSITIVE);
        let mut coeffs = Vec::new();
        let mut n = 1;
        while self.envelope(n, y) > floor {
            coeffs.push(self.cos_coefficient(n, y)?);
            n += 1;
        }
        Ok((c0, coeffs))
    }
}

/// `E(z, 1/2 + it)` for `y >= 1/2`.
pub fn eisenstein_eval(spec: &EisensteinSpec, z: &ModularPoint) -> Result<Complex64> {
    if z.y < 0.5 {
        return Err(Error::domain(format!("Eisenstein evaluation needs y >= 1/2, got {}", z.y)));
    }
    let e = Eisenstein::new(*spec)?;
    let (c0, coeffs) = e.row(z.y)?;
    let mut v = c0;
    for (i, c) in coeffs.iter().enumerate() {
        let nx = (i as f64 + 1.0) * z.x;
        v += c * (2.0 * PI * (nx - nx.round())).cos();
    }
    Ok(v)
}

/// `(Delta - (1/4 + t^2)) E` at `z` relative to `(1/4 + t^2) |E|`, with
/// `Delta = -y^2 (d_xx + d_yy)` by fourth-order differences of step `h`.
pub fn laplacian_residual(spec: &EisensteinSpec, z: &ModularPoint, h: f64) -> Result<f64> {
    let at = |dx: f64, dy: f64| eisenstein_eval(spec, &ModularPoint::new(z.x + dx, z.y + dy)?);
    let e0 = at(0.0, 0.0)?;
    let d2 = |f: &dyn Fn(f64) -> Result<Complex64>| -> Result<Complex64> {
        Ok((-f(2.0 * h)? + f(h)? * 16.0 - e0 * 30.0 + f(-h)? * 16.0 - f(-2.0 * h)?) / (12.0 * h * h))
    };
    let dxx = d2(&|d| at(d, 0.0))?;
    let dyy = d2(&|d| at(0.0, d))?;
    let ev = 0.25 + spec.t * spec.t;
    let lap = -(dxx + dyy) * (z.y * z.y);
    Ok((lap - e0 * ev).norm() / (ev * e0.norm()))
}

/// Real and imaginary cosine rows integrated together.
struct ComplexRow {
    re: CosineRow,
    im: CosineRow,
}

impl RowIntegral for ComplexRow {
    type Output = Complex64;

    fn integral(&self, a: f64, b: f64) -> Complex64 {
        Complex64::new(self.re.integral(a, b), self.im.integral(a, b))
    }
}

/// `(c_0 + sum c_j cos 2 pi j x)(e_0 + sum e_n cos 2 pi n x)` as one cosine
/// series, from `cos A cos B = (cos(A - B) + cos(A + B)) / 2`.
fn multiply_cosine(c: &[f64], e0: Complex64, e: &[Complex64]) -> Vec<Complex64> {
    let len = c.len().max(1) + e.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (j, &cj) in c.iter().enumerate() {
        out[j] += e0 * cj;
        for (i, &en) in e.iter().enumerate() {
            let n = i + 1;
            let half = en * (0.5 * cj);
            if j == 0 {
                out[n] += en * cj;
                continue;
            }
            out[j + n] += half;
            out[j.abs_diff(n)] += half;
        }
    }
    out
}

/// Normalized value of a pairing and an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingValue {
    /// `<P E, P> / <P, P>`.
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Height above which the normalized `|P|^2 |E|` mass is at most `tail_tol`.
/// For `y >= Y`, `|E| <= 2 sqrt(y) + env(Y)` and each term of the strip mass
/// times `sqrt(y)` decays at rate at least `4 pi - (k - 3/2) / Y`.
fn eisenstein_cut(table: &CoefficientTable, e: &Eisenstein, log_norm: f64, tail_tol: f64) -> Result<(f64, f64)> {
    let k = f64::from(table.params.k);
    let mut y = (1.05 * (k - 1.5) / (4.0 * PI)).max(1.0);
    for _ in 0..400 {
        let row = FourierRow::new(table, y)?;
        let strip = (row.mean_square().ln() + 2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm).exp();
        let delta = 4.0 * PI - (k - 1.5) / y;
        let env: f64 = (1..=8).map(|n| e.envelope(n, y)).sum::<f64>() * 2.0;
        let tail = strip * (2.0 * y.sqrt() + env) / delta;
        if tail <= tail_tol {
            return Ok((y, tail));
        }
        y *= 1.05;
    }
    Err(Error::Quadrature(format!("no height found with tail below {tail_tol:e}")))
}

/// `int_F y^k |P|^2 E(z, 1/2+it) dmu / <P, P>` by integration over the
/// fundamental domain, `y` adaptively and `x` exactly on the product of the
/// two cosine series.
pub fn inner_product_direct(table: &CoefficientTable, spec: &EisensteinSpec, quad: &QuadSpec) -> Result<PairingValue> {
    let e = Eisenstein::new(*spec)?;
    let log_norm = petersson_norm_log(table)?.log_mag();
    let k = f64::from(table.params.k);
    let tail_tol = quad.abs_tol.max(0.1 * quad.rel_tol);
    let (top, tail) = eisenstein_cut(table, &e, log_norm, tail_tol)?;
    let r = integrate_region(&Region::full(), top, quad, |y| {
        let row = FourierRow::new(table, y)?;
        let b = dense(&row);
        let scale = (2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm).exp();
        let p2 = CosineRow::from_product(&b, &b, scale);
        let (e0, en) = e.row(y)?;
        let prod = multiply_cosine(&p2.coeffs, e0, &en);
        Ok(ComplexRow {
            re: CosineRow {
                scale,
                coeffs: prod.iter().map(|c| c.re).collect(),
            },
            im: CosineRow {
                scale,
                coeffs: prod.iter().map(|c| c.im).collect(),
            },
        })
    })?;
    Ok(PairingValue {
        value: r.value,
        error: r.error + tail,
        evaluations: r.evaluations,
    })
}

fn dense(row: &FourierRow) -> Vec<f64> {
    let len = row.terms.last().map_or(0, |t| t.0 as usize);
    let mut b = vec![0.0; len];
    for &(n, v) in &row.terms {
        b[n as usize - 1] = v;
    }
    b
}

/// `p(m) [Gamma(k - 1/2 + it) / (4 pi m)^{k-1/2+it} + phi Gamma(k - 1/2 - it) / (4 pi m)^{k-1/2-it}] / <P, P>`,
/// the constant-term part of the unfolded integral in closed form.
pub fn constant_term_closed_form(table: &CoefficientTable, spec: &EisensteinSpec) -> Result<Complex64> {
    let e = Eisenstein::new(*spec)?;
    let p = table.params;
    let pm = table
        .get(p.m)
        .ok_or_else(|| Error::domain(format!("table does not contain n = m = {}", p.m)))?;
    let log_norm = petersson_norm_log(table)?.log_mag();
    let l4 = (4.0 * PI * p.m as f64).ln();
    let k = f64::from(p.k);
    let piece = |t: f64| -> Result<Complex64> {
        let a = Complex64::new(k - 0.5, t);
        Ok((log_gamma_complex(a)? - a * l4 + pm.value.log_mag() - log_norm).exp())
    };
    Ok(piece(spec.t)? + e.phi * piece(-spec.t)?)
}

/// `int_0^inf sum_r p(r) e^{-2 pi r y} E_{m-r}(y) e^{-2 pi m y} y^{k-2} dy / <P, P>`,
/// where `E_s` is the `s`-th exponential coefficient of `E`. With
/// `constant_only` only the `r = m` term with `E_0` is kept, which is the
/// closed form of [`constant_term_closed_form`].
///
/// The integral runs over `[y_lo, y_cut]`, `y_cut = 4 (k + 40) / (4 pi m)`.
/// `y_lo` is found by stepping down from the peak `(k - 2) / (4 pi m)`; the
/// part below `y_lo` is estimated as `y_lo |f(y_lo)| / (k/2 - 3/2)`, from the
/// growth `y^{k/2 - 5/2}` of the integrand near zero, and the step stops once
/// that estimate is below `rel_tol / 100` of the integral's scale. The
/// estimate is added to the error.
pub fn inner_product_unfolded(
    table: &CoefficientTable,
    spec: &EisensteinSpec,
    quad: &QuadSpec,
    constant_only: bool,
) -> Result<PairingValue> {
    let e = Eisenstein::new(*spec)?;
    let p = table.params;
    let (m, k) = (p.m, f64::from(p.k));
    let log_norm = petersson_norm_log(table)?.log_mag();
    let pm = *table
        .get(m)
        .ok_or_else(|| Error::domain(format!("table does not contain n = m = {m}")))?;
    let mf = m as f64;
    let peak = (k - 2.0) / (4.0 * PI * mf);
    let y_cut = 4.0 * (k + 40.0) / (4.0 * PI * mf);

    let mut work = table.clone();
    let integrand = |table: &CoefficientTable, y: f64| -> Result<(Complex64, f64)> {
        let base = -2.0 * PI * mf * y + (k - 2.0) * y.ln() - log_norm;
        if constant_only {
            let l = pm.value.log_mag() - 2.0 * PI * mf * y + base;
            let v = e.constant_term(y) * f64::from(pm.value.sign()) * l.exp();
            return Ok((v, v.norm()));
        }
        let row = FourierRow::new(table, y)?;
        let scale = (row.log_scale + base).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for &(r, b) in &row.terms {
            let s = r.abs_diff(m);
            // Exponential coefficients are half the cosine ones for s != 0.
            let es = if s == 0 {
                e.constant_term(y)
            } else {
                e.cos_coefficient(s, y)? * 0.5
            };
            acc += es * b;
            abs += (es * b).norm();
        }
        Ok((acc * scale, abs * scale))
    };
    let eval = |table: &mut CoefficientTable, y: f64| -> Result<(Complex64, f64)> {
        loop {
            match integrand(table, y) {
                Err(Error::TableTooShort { reached }) if table.failure.is_none() && reached < 1 << 16 => {
                    table.extend_to(2 * reached as u64);
                }
                other => return other,
            }
        }
    };

    // Step down from the peak to the lower cut.
    let top = eval(&mut work, peak)?.1;
    let growth = (0.5 * k - 1.5).max(1.0);
    // The integral is of order top * peak; the low tail is cut at 1% of the
    // requested accuracy on that scale.
    let low_target = 0.01 * quad.rel_tol.max(1e-13) * top * peak;
    let mut y_lo = peak;
    let mut f_lo;
    loop {
        y_lo *= 0.9;
        f_lo = eval(&mut work, y_lo)?.1;
        if y_lo * f_lo / growth < low_target {
            break;
        }
        if y_lo < 1e-3 {
            return Err(Error::Quadrature("unfolded integrand does not decay towards y = 0".into()));
        }
    }
    let low_tail = y_lo * f_lo / growth;
    // Beyond y_cut every term decays at rate at least 2 pi m - (k - 3/2) / y_cut.
    let f_cut = eval(&mut work, y_cut)?.1;
    let high_tail = f_cut / (2.0 * PI * mf - (k - 1.5) / y_cut);

    let work = work;
    let mut batch = |ys: &[f64]| -> Result<Vec<Complex64>> {
        ys.par_iter().map(|&y| integrand(&work, y).map(|v| v.0)).collect()
    };
    let mut breaks = vec![y_lo, 0.5 * peak, peak, 2.0 * peak, y_cut];
    breaks.retain(|&b| b >= y_lo && b <= y_cut);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = low_tail + high_tail;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let r: QuadResult<Complex64> =
            adaptive_batched(w[0], w[1], quad.abs_tol, quad.rel_tol, quad.max_depth, &mut batch)?;
        value += r.value;
        error += r.error;
        evaluations += r.evaluations;
    }
    Ok(PairingValue {
        value,
        error,
        evaluations,
    })
}

/// `int_F y^k |P|^2 g dmu / <P, P>` for a test function `g(x, y)`, with
/// `x` integrated by the adaptive rule. For odd `g`, `g(-x, y) = -g(x, y)`,
/// the result vanishes by the symmetry `P(-conj z) = conj P(z)`.
pub fn weighted_mass(
    table: &CoefficientTable,
    quad: &QuadSpec,
    y_top: f64,
    g: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<QuadResult<f64>> {
    struct Sampled<F> {
        row: FourierRow,
        scale: f64,
        y: f64,
        g: F,
    }
    impl<F: Fn(f64, f64) -> f64> RowIntegral for Sampled<F> {
        type Output = f64;
        fn integral(&self, a: f64, b: f64) -> f64 {
            let mut f = |x: f64| self.scale * self.row.eval_scaled(x).norm_sqr() * (self.g)(x, self.y);
            crate::quadrature::adaptive(a, b, 0.0, 1e-12, 30, &mut f).map_or(f64::NAN, |r| r.value)
        }
    }
    let log_norm = petersson_norm_log(table)?.log_mag();
    let k = f64::from(table.params.k);
    let r = integrate_region(&Region::full(), y_top, quad, |y| {
        let row = FourierRow::new(table, y)?;
        let scale = (2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm).exp();
        Ok(Sampled { row, scale, y, g: &g })
    })?;
    if !r.value.is_finite() {
        return Err(Error::Quadrature("row integration did not converge".into()));
    }
    Ok(r)
}
