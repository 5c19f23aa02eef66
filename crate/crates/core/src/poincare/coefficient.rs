//! Fourier coefficients
//! `p(n) = delta_{m,n} + 2 pi i^k (n/m)^{nu/2} sum_c K(m, n, c) / c J_nu(4 pi sqrt(mn) / c)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{q_cut, ModularParams};
use crate::arithmetic::UnitTable;
use crate::config;
use crate::error::{Error, Result};
use crate::quadrature::KahanSum;
use crate::special::gamma::log_gamma_pos;
use crate::special::{bessel_j_with_error, SignedLogReal};

/// One certified coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub n: u64,
    pub value: SignedLogReal,
    /// `ln` of the bound on `|value - p(n)|`: c-sum truncation plus rounding.
    /// Kept as a logarithm because the bound underflows long before the
    /// coefficients themselves do.
    pub log_tail: f64,
    /// Last modulus included in the c-sum.
    pub c_max: u64,
    /// `value - delta_{m,n}`, exact even when `p(m)` is close to 1.
    pub cusp: SignedLogReal,
}

impl CoefficientEntry {
    /// Certified bound relative to `|value|`.
    pub fn relative_tail(&self) -> f64 {
        (self.log_tail - self.value.log_mag()).exp()
    }
}

/// Running sum of `SignedLogReal` terms, scaled by the largest term seen.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ScaledSum {
    scale: f64,
    sum: KahanSum,
    abs: f64,
}

impl ScaledSum {
    pub(crate) fn new() -> Self {
        ScaledSum {
            scale: f64::NEG_INFINITY,
            sum: KahanSum::new(),
            abs: 0.0,
        }
    }

    pub(crate) fn add(&mut self, v: SignedLogReal) {
        if v.is_zero() {
            return;
        }
        if v.log_mag() > self.scale {
            let f = (self.scale - v.log_mag()).exp();
            self.sum.scale(f);
            self.abs *= f;
            self.scale = v.log_mag();
        }
        let t = f64::from(v.sign()) * (v.log_mag() - self.scale).exp();
        self.sum.add(t);
        self.abs += t.abs();
    }

    pub(crate) fn value(&self) -> SignedLogReal {
        SignedLogReal::from_f64(self.sum.value()).scale_ln(self.scale)
    }

    /// `sum |terms|`.
    pub(crate) fn abs(&self) -> SignedLogReal {
        SignedLogReal::from_f64(self.abs).scale_ln(self.scale)
    }
}

/// `p_{k,m}(n)` with the c-sum truncated at the first `c_max >= ceil(2Q)`
/// whose certified tail is below `tol / 2` relative to the partial value.
///
/// The tail uses `|K(m,n,c)| <= c` and `|J_nu(x)| <= (x/2)^nu / nu!`:
/// `sum_{c > C} |K/c J_nu(x0/c)| <= (x0/2)^nu / nu! * C^{1-nu} / (nu - 1)`
/// with `x0 = 4 pi sqrt(mn)`. The other half of `tol` covers rounding in the
/// Bessel values, the Kloosterman sums and the summation; if that estimate
/// exceeds it the result is a precision error.
pub fn coefficient(params: &ModularParams, n: u64, tol: f64) -> Result<CoefficientEntry> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::domain(format!("coefficient tolerance must lie in (0, 1e-4], got {tol}")));
    }
    if n == 0 {
        return Err(Error::domain("coefficient index n must be at least 1"));
    }
    let cfg = config::global();
    let bits = cfg.precision_bits as usize;
    let nu = params.nu;
    let nuf = f64::from(nu);
    let (m, mf, nf) = (params.m, params.m as f64, n as f64);
    let x0 = 4.0 * PI * (mf * nf).sqrt();
    let c_min = ((2.0 * q_cut(params, n)).ceil() as u64).max(1);
    let ln_pref = (2.0 * PI).ln() + 0.5 * nuf * (nf / mf).ln();
    let ln_tail_coef = nuf * (0.5 * x0).ln() - log_gamma_pos(nuf + 1.0) - (nuf - 1.0).ln();
    let ln_tail = |c: u64| ln_pref + ln_tail_coef + (1.0 - nuf) * (c as f64).ln();
    let delta = if n == m { SignedLogReal::ONE } else { SignedLogReal::ZERO };
    let ik = SignedLogReal::new(params.i_pow_k(), 0.0);

    let mut s = ScaledSum::new();
    let mut rounding = ScaledSum::new();
    let mut c = 0u64;
    loop {
        c += 1;
        if c > cfg.c_cap {
            let partial = delta.add(&(ik * s.value().scale_ln(ln_pref)));
            let best = (ln_tail(cfg.c_cap) - partial.log_mag()).exp();
            return Err(Error::Truncation {
                c_max: cfg.c_cap,
                best_bound: best,
            });
        }
        let table = UnitTable::new(c);
        let k = table.sum(m, n);
        let (j, jerr) = bessel_j_with_error(nu, x0 / c as f64, bits)?;
        let jc = j.scale_ln(-(c as f64).ln());
        s.add(SignedLogReal::from_f64(k.value) * jc);
        // |K| * rel(J) + rounding of the unit-table sum, both times |J| / c.
        let k_err = k.value.abs() * jerr + 4.0 * f64::EPSILON * table.units.len() as f64;
        rounding.add(SignedLogReal::from_f64(k_err) * jc.abs());
        if c < c_min {
            continue;
        }
        let cusp = ik * s.value().scale_ln(ln_pref);
        let value = delta.add(&cusp);
        if value.is_zero() {
            continue;
        }
        if ln_tail(c) <= (0.5 * tol).ln() + value.log_mag() {
            // Compensated summation: each term is rounded once on entry and
            // once per rescale, the total once more.
            let eps = f64::EPSILON;
            let summation = s.abs().scale_ln((6.0 * eps + c as f64 * eps * eps).ln());
            let round = rounding.value().add(&summation).scale_ln(ln_pref);
            let log_tail = round.add(&SignedLogReal::from_ln(ln_tail(c))).log_mag();
            let log_tail = if n == m {
                SignedLogReal::from_ln(log_tail)
                    .add(&SignedLogReal::from_ln(value.log_mag() + f64::EPSILON.ln()))
                    .log_mag()
            } else {
                log_tail
            };
            if log_tail > tol.ln() + value.log_mag() {
                return Err(Error::Precision(format!(
                    "p_{{{},{}}}({n}): rounding bound {:e} exceeds tolerance {tol:e} at {bits} bits",
                    params.k,
                    m,
                    (log_tail - value.log_mag()).exp()
                )));
            }
            return Ok(CoefficientEntry {
                n,
                value,
                log_tail,
                c_max: c,
                cusp,
            });
        }
    }
}

/// The first entry that could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFailure {
    pub n: u64,
    pub error: String,
}

/// Coefficients `p(1..=N)`, plus `p(m)` when `m > N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub params: ModularParams,
    pub tol: f64,
    pub precision_bits: u32,
    /// Entry `i` holds `n = i + 1`.
    pub entries: Vec<CoefficientEntry>,
    /// `p(m)` when it lies beyond the contiguous range, for the norm.
    pub anchor: Option<CoefficientEntry>,
    /// Set when an entry failed; `entries` then stops just before it.
    pub failure: Option<TableFailure>,
}

impl CoefficientTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_partial(&self) -> bool {
        self.failure.is_some()
    }

    pub fn get(&self, n: u64) -> Option<&CoefficientEntry> {
        if n >= 1 && (n as usize) <= self.entries.len() {
            Some(&self.entries[n as usize - 1])
        } else {
            self.anchor.as_ref().filter(|a| a.n == n)
        }
    }

    /// Order of vanishing at the cusp: the first `n` whose coefficient is
    /// certified nonzero.
    pub fn v_infinity(&self) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| !e.value.is_zero() && e.log_tail < e.value.log_mag())
            .map(|e| e.n)
    }

    /// Computes further entries up to `n_max`. A failed table is not extended.
    pub fn extend_to(&mut self, n_max: u64) {
        if self.failure.is_some() || n_max as usize <= self.entries.len() {
            return;
        }
        let start = self.entries.len() as u64 + 1;
        let (more, failure) = compute_range(&self.params, start, n_max, self.tol);
        self.entries.extend(more);
        self.failure = failure;
        if let Some(a) = self.anchor {
            if (a.n as usize) <= self.entries.len() {
                self.anchor = None;
            }
        }
    }
}

fn compute_range(params: &ModularParams, start: u64, end: u64, tol: f64) -> (Vec<CoefficientEntry>, Option<TableFailure>) {
    let results: Vec<Result<CoefficientEntry>> =
        (start..=end).into_par_iter().map(|n| coefficient(params, n, tol)).collect();
    let mut entries = Vec::with_capacity(results.len());
    for (n, r) in (start..=end).zip(results) {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => {
                return (
                    entries,
                    Some(TableFailure {
                        n,
                        error: e.to_string(),
                    }),
                )
            }
        }
    }
    (entries, None)
}

/// Coefficients `n = 1..=n_max` computed in parallel and collected in index
/// order, so the table does not depend on the thread count. When `m > n_max`
/// the entry `p(m)` is added as the table's anchor.
pub fn build_table(params: &ModularParams, n_max: u64, tol: f64) -> Result<CoefficientTable> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::domain(format!("table tolerance must lie in (0, 1e-4], got {tol}")));
    }
    if n_max == 0 {
        return Err(Error::domain("table length must be at least 1"));
    }
    let (entries, failure) = compute_range(params, 1, n_max, tol);
    let anchor = if params.m > n_max {
        Some(coefficient(params, params.m, tol)?)
    } else {
        None
    };
    Ok(CoefficientTable {
        params: *params,
        tol,
        precision_bits: config::global().precision_bits,
        entries,
        anchor,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tolerance() {
        let p = ModularParams::new(12, 1).unwrap();
        assert!(matches!(coefficient(&p, 1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(coefficient(&p, 1, 1e-3), Err(Error::Domain(_))));
        assert!(matches!(coefficient(&p, 0, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn delta_ratios_are_integers() {
        // dim S_12 = 1, so p(n)/p(1) are the coefficients of the discriminant.
        let p = ModularParams::new(12, 1).unwrap();
        let one = coefficient(&p, 1, 1e-11).unwrap();
        let mut ratios = Vec::new();
        for n in 2..=6 {
            let e = coefficient(&p, n, 1e-11).unwrap();
            let r = (e.value / one.value).to_f64();
            assert!((r - r.round()).abs() < 1e-8, "n = {n}: {r}");
            ratios.push(r.round() as i64);
        }
        // Multiplicativity of the normalized coefficients: a(6) = a(2) a(3).
        assert_eq!(ratios[4], ratios[0] * ratios[1]);
    }

    #[test]
    fn tail_is_below_tolerance() {
        let p = ModularParams::new(20, 2).unwrap();
        for n in 1..=8 {
            let e = coefficient(&p, n, 1e-12).unwrap();
            assert!(e.relative_tail() <= 1e-12, "n = {n}");
            assert!(e.c_max >= (2.0 * q_cut(&p, n)).ceil() as u64);
        }
    }

    #[test]
    fn cusp_part_excludes_delta() {
        let p = ModularParams::new(24, 3).unwrap();
        let e = coefficient(&p, 3, 1e-12).unwrap();
        let back = e.cusp.add(&SignedLogReal::ONE);
        assert!((back.to_f64() - e.value.to_f64()).abs() < 1e-15);
        let off = coefficient(&p, 2, 1e-12).unwrap();
        assert_eq!(off.cusp, off.value);
    }

    #[test]
    fn sign_flips_with_i_pow_k() {
        // With 4 pi sqrt(mn) well below nu the c = 1 term dominates and
        // J_nu is positive, so p(n) carries the sign of i^k.
        for k in [40, 42] {
            let p = ModularParams::new(k, 2).unwrap();
            let e = coefficient(&p, 1, 1e-10).unwrap();
            assert_eq!(e.value.sign(), p.i_pow_k(), "k = {k}");
        }
    }

    #[test]
    fn tiny_tolerance_fails_on_precision() {
        let p = ModularParams::new(12, 1).unwrap();
        assert!(matches!(coefficient(&p, 2, 1e-20), Err(Error::Precision(_))));
    }

    #[test]
    fn table_is_ordered_and_reports_anchor() {
        let p = ModularParams::new(16, 7).unwrap();
        let t = build_table(&p, 4, 1e-10).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.entries.iter().enumerate().all(|(i, e)| e.n == i as u64 + 1));
        assert_eq!(t.get(7).unwrap().n, 7);
        assert!(t.get(5).is_none());
        let mut t2 = t.clone();
        t2.extend_to(8);
        assert!(t2.anchor.is_none());
        assert_eq!(t2.get(7).unwrap(), t.get(7).unwrap());
        assert_eq!(t2.entries[..4], t.entries[..]);
    }
}
