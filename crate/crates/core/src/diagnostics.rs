//! Empirical checks of the coefficient bounds and the mass limit, reported
//! with the implied constants calibrated on finite grids.
//!
//! Where the bounds carry `eps_B` weights the constant is taken as `B = 1`,
//! and `x^epsilon` factors use `epsilon = 0.05`. Those are reporting
//! conventions; the bounds themselves leave the constants open.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{epsilon_weight, gcd, kloosterman_bound, sigma, sigma_truncated, UnitTable};
use crate::config;
use crate::error::{Error, Result};
use crate::poincare::coefficient::ScaledSum;
use crate::poincare::{
    coefficient, integrate_region, petersson_norm_log, q_cut, table_for_height, CoefficientTable, CosineRow,
    FourierRow, ModularParams, QuadSpec, Region, RowIntegral,
};
use crate::quadrature::GaussLegendre;
use crate::special::gamma::log_gamma_pos;
use crate::special::{bessel_j_with_error, envelope_f, envelope_g, EnvelopeParams, SignedLogReal};
use crate::zeros::{zero_equidist_report, zero_inventory, EquidistRow};

/// `B` in `eps_B`.
pub const EPS_B: f64 = 1.0;
/// `epsilon` in `x^epsilon`.
pub const EPSILON: f64 = 0.05;
/// Constant the Bessel envelopes must achieve.
pub const ENVELOPE_CONSTANT: f64 = 10.0;
/// Slack allowed in the Kloosterman bound for rounding.
pub const KLOOSTERMAN_SLACK: f64 = 1e-9;
/// Largest imaginary residual accepted in a Kloosterman sum.
pub const REALNESS_TOL: f64 = 1e-12;
/// Largest log-log slope accepted for `|p(m) - 1|` against `k`.
pub const TREND_SLOPE: f64 = -0.2;

/// One grid tuple with both sides of a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub grid: Vec<f64>,
    pub lhs: SignedLogReal,
    pub rhs: SignedLogReal,
    /// `|lhs| / |rhs|`, zero when both vanish.
    pub ratio: f64,
}

impl BoundPoint {
    pub fn new(grid: Vec<f64>, lhs: SignedLogReal, rhs: SignedLogReal) -> Self {
        let ratio = if lhs.is_zero() {
            0.0
        } else {
            (lhs.log_mag() - rhs.log_mag()).exp()
        };
        BoundPoint { grid, lhs, rhs, ratio }
    }
}

/// Slope and monotonicity of a sequence indexed by `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub k: Vec<u32>,
    pub values: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Least-squares slope of `ln value` against `ln k`.
    pub slope: f64,
}

impl Trend {
    pub fn new(k: Vec<u32>, values: Vec<f64>) -> Self {
        let strictly_decreasing = values.windows(2).all(|w| w[1] < w[0]);
        let xs: Vec<f64> = k.iter().map(|&k| f64::from(k).ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Trend {
            k,
            values,
            strictly_decreasing,
            slope: sxy / sxx,
        }
    }
}

/// Outcome of one check. `pass` holds when `sup_ratio <= calibrated_constant`
/// and any trend or side condition recorded in `notes` is met.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: String,
    /// Tuples examined. Exhaustive checks keep only the worst tuple and any
    /// violations in `points`.
    pub tuples: usize,
    pub points: Vec<BoundPoint>,
    pub sup_ratio: f64,
    pub calibrated_constant: f64,
    pub trend: Option<Trend>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn sup(points: &[BoundPoint]) -> f64 {
    points.iter().map(|p| p.ratio).fold(0.0, f64::max)
}

/// `|J_nu(nu x)|` against `f(x)` on `x_f` and `g(x)` on `x_g`, for each
/// order in `nu_set`. Passes when the ratio never exceeds
/// [`ENVELOPE_CONSTANT`] and the envelope pieces meet at `x0` and `x_nu`
/// to within `1e-10` in the logarithm.
pub fn check_bessel_envelopes(nu_set: &[u32], x_f: &[f64], x_g: &[f64]) -> Result<BoundReport> {
    let bits = config::precision_bits();
    let mut points = Vec::new();
    let mut notes = Vec::new();
    let mut joined = true;
    for &nu in nu_set {
        let p = EnvelopeParams::new(nu)?;
        for (name, (a, b)) in ["x0", "x_nu"].iter().zip(p.junction_logs()) {
            let gap = (a - b).abs();
            if gap > 1e-10 {
                joined = false;
                notes.push(format!("nu = {nu}: envelope jump {gap:e} at {name}"));
            }
        }
        let rows: Vec<BoundPoint> = x_f
            .par_iter()
            .map(|&x| (x, true))
            .chain(x_g.par_iter().map(|&x| (x, false)))
            .map(|(x, on_f)| {
                let env = if on_f { envelope_f(&p, x)? } else { envelope_g(&p, x)? };
                let (j, _) = bessel_j_with_error(nu, f64::from(nu) * x, bits)?;
                Ok(BoundPoint::new(vec![f64::from(nu), x], j.abs(), env))
            })
            .collect::<Result<_>>()?;
        points.extend(rows);
    }
    let sup_ratio = sup(&points);
    if !joined {
        notes.push("envelope continuity failed".into());
    }
    Ok(BoundReport {
        bound_id: "bessel_envelope".into(),
        tuples: points.len(),
        points,
        sup_ratio,
        calibrated_constant: ENVELOPE_CONSTANT,
        trend: None,
        notes,
        pass: joined && sup_ratio <= ENVELOPE_CONSTANT,
    })
}

/// Orders `{15, 16, 32, 64, 128, 256, 512}`, 200 points in `(0, 1]` for `f`
/// and 200 points in `[1, 20]` for `g`.
pub fn envelope_grid() -> (Vec<u32>, Vec<f64>, Vec<f64>) {
    let nu = vec![15, 16, 32, 64, 128, 256, 512];
    let xf = (1..=200).map(|i| f64::from(i) / 200.0).collect();
    let xg = (0..200).map(|i| 1.0 + 19.0 * f64::from(i) / 199.0).collect();
    (nu, xf, xg)
}

/// All `(k, m, n)` with `k` in `k_list` and `1 <= m, n <= mn_max`.
pub fn smn_grid(k_list: &[u32], mn_max: u64) -> Vec<(u32, u64, u64)> {
    k_list
        .iter()
        .flat_map(|&k| (1..=mn_max).flat_map(move |m| (1..=mn_max).map(move |n| (k, m, n))))
        .collect()
}

/// Per-modulus summary of the exhaustive Kloosterman check.
struct ModulusSummary {
    worst: Option<BoundPoint>,
    violations: Vec<BoundPoint>,
    max_residual: f64,
    asymmetric: usize,
    tuples: usize,
}

/// `|K(m, n, c)| <= 2^{omega*(c/d)} sqrt(c d)` with constant exactly 1, for
/// all `1 <= c <= c_max` and `1 <= m, n <= mn_max`. Also checks that the
/// imaginary residual stays below [`REALNESS_TOL`] and that swapping `m` and
/// `n` gives a bit-identical value.
pub fn check_kloosterman_bound(c_max: u64, mn_max: u64) -> Result<BoundReport> {
    if c_max == 0 || mn_max == 0 {
        return Err(Error::domain("Kloosterman check needs c_max, mn_max >= 1"));
    }
    let per_c: Vec<ModulusSummary> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let table = UnitTable::new(c);
            let mut s = ModulusSummary {
                worst: None,
                violations: Vec::new(),
                max_residual: 0.0,
                asymmetric: 0,
                tuples: 0,
            };
            let mut worst_ratio = -1.0;
            table.sum_all_pairs(mn_max, |m, n, k| {
                s.tuples += if m == n { 1 } else { 2 };
                s.max_residual = s.max_residual.max(k.residual_imag);
                if m != n && table.sum(n, m).value.to_bits() != k.value.to_bits() {
                    s.asymmetric += 1;
                }
                let rhs = kloosterman_bound(m, n, c);
                let ratio = k.value.abs() / rhs;
                if ratio > 1.0 + KLOOSTERMAN_SLACK {
                    s.violations.push(BoundPoint::new(
                        vec![m as f64, n as f64, c as f64],
                        SignedLogReal::from_f64(k.value.abs()),
                        SignedLogReal::from_f64(rhs),
                    ));
                }
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    s.worst = Some(BoundPoint::new(
                        vec![m as f64, n as f64, c as f64],
                        SignedLogReal::from_f64(k.value.abs()),
                        SignedLogReal::from_f64(rhs),
                    ));
                }
            });
            s
        })
        .collect();
    let mut worst: Option<BoundPoint> = None;
    let mut violations = Vec::new();
    let (mut residual, mut asymmetric, mut tuples) = (0.0f64, 0usize, 0usize);
    for s in per_c {
        if let Some(w) = s.worst {
            if worst.as_ref().map_or(true, |b| w.ratio > b.ratio) {
                worst = Some(w);
            }
        }
        violations.extend(s.violations);
        residual = residual.max(s.max_residual);
        asymmetric += s.asymmetric;
        tuples += s.tuples;
    }
    let mut notes = vec![
        format!("max imaginary residual {residual:e}"),
        format!("{} violations, {asymmetric} asymmetric pairs", violations.len()),
    ];
    let pass = violations.is_empty() && residual < REALNESS_TOL && asymmetric == 0;
    if residual >= REALNESS_TOL {
        notes.push(format!("realness residual exceeds {REALNESS_TOL:e}"));
    }
    let mut points: Vec<BoundPoint> = worst.into_iter().collect();
    points.extend(violations);
    let sup_ratio = sup(&points);
    Ok(BoundReport {
        bound_id: "kloosterman".into(),
        tuples,
        points,
        sup_ratio,
        calibrated_constant: 1.0 + KLOOSTERMAN_SLACK,
        trend: None,
        notes,
        pass,
    })
}

/// `S_{m,n}` split at `Q = 4 pi sqrt(mn) / nu` into the terms `c <= Q` and
/// `c > Q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmnSplit {
    pub q: f64,
    pub below: SignedLogReal,
    pub above: SignedLogReal,
    pub c_max: u64,
}

/// Both pieces of `S_{m,n} = sum_c K(m, n, c) / c J_nu(4 pi sqrt(mn) / c)`,
/// the upper one truncated once the tail bound falls below `tol` times the
/// larger piece. The tail bound is the one used for the coefficients.
pub fn smn_split(params: &ModularParams, n: u64, tol: f64) -> Result<SmnSplit> {
    if n == 0 {
        return Err(Error::domain("S_{m,n} needs n >= 1"));
    }
    let cfg = config::global();
    let bits = cfg.precision_bits as usize;
    let nuf = f64::from(params.nu);
    let x0 = 4.0 * PI * ((params.m * n) as f64).sqrt();
    let q = q_cut(params, n);
    let ln_tail_coef = nuf * (0.5 * x0).ln() - log_gamma_pos(nuf + 1.0) - (nuf - 1.0).ln();
    let (mut below, mut above) = (ScaledSum::new(), ScaledSum::new());
    let mut c = 0u64;
    loop {
        c += 1;
        if c > cfg.c_cap {
            return Err(Error::Truncation {
                c_max: cfg.c_cap,
                best_bound: (ln_tail_coef + (1.0 - nuf) * (cfg.c_cap as f64).ln()).exp(),
            });
        }
        let k = UnitTable::new(c).sum(params.m, n);
        let (j, _) = bessel_j_with_error(params.nu, x0 / c as f64, bits)?;
        let term = SignedLogReal::from_f64(k.value) * j.scale_ln(-(c as f64).ln());
        if c as f64 <= q {
            below.add(term);
            continue;
        }
        above.add(term);
        let scale = below.value().log_mag().max(above.value().log_mag());
        if c as f64 >= 2.0 * q && ln_tail_coef + (1.0 - nuf) * (c as f64).ln() <= tol.ln() + scale {
            return Ok(SmnSplit {
                q,
                below: below.value(),
                above: above.value(),
                c_max: c,
            });
        }
    }
}

/// Right-hand sides of the two bounds for the pieces of `S_{m,n}`:
/// `eps(Q) (sigma_{-1/2}(g) (mn)^{1/4} / k + sigma_{1/2}(g) k^{1/6} / (mn)^{1/4})`,
/// with `sigma_{1/2}` truncated at `Q` for the lower piece.
fn smn_rhs(params: &ModularParams, n: u64, truncate: bool) -> f64 {
    let k = f64::from(params.k);
    let g = gcd(params.m, n);
    let q = q_cut(params, n);
    let mn = (params.m * n) as f64;
    let s_half = if truncate { sigma_truncated(0.5, g, q) } else { sigma(0.5, g) };
    epsilon_weight(EPS_B, q) * (sigma(-0.5, g) * mn.powf(0.25) / k + s_half * k.powf(1.0 / 6.0) / mn.powf(0.25))
}

/// Calibrates the bounds on the pieces of `S_{m,n}` over `grid` of
/// `(k, m, n)`: the lower piece, the upper piece, and for `m = n` the upper
/// piece against `Q/k + k^{-1/3}`. The constants are recorded, not asserted;
/// each report passes when its constant is finite.
pub fn check_smn_split(grid: &[(u32, u64, u64)], tol: f64) -> Result<Vec<BoundReport>> {
    for &(k, _, _) in grid {
        if k < 16 {
            return Err(Error::domain(format!("S_{{m,n}} bounds need k >= 16, got {k}")));
        }
    }
    let rows: Vec<(Vec<f64>, bool, SmnSplit, f64, f64, f64)> = grid
        .par_iter()
        .map(|&(k, m, n)| {
            let p = ModularParams::new(k, m)?;
            let s = smn_split(&p, n, tol)?;
            let kf = f64::from(k);
            let diag = s.q / kf + kf.powf(-1.0 / 3.0);
            Ok((
                vec![f64::from(k), m as f64, n as f64],
                m == n,
                s,
                smn_rhs(&p, n, true),
                smn_rhs(&p, n, false),
                diag,
            ))
        })
        .collect::<Result<_>>()?;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut diagonal = Vec::new();
    for (g, is_diag, s, r_lo, r_hi, r_diag) in rows {
        let below = if r_lo > 0.0 {
            BoundPoint::new(g.clone(), s.below.abs(), SignedLogReal::from_f64(r_lo))
        } else {
            // No c <= Q and no divisor <= Q: both sides vanish.
            BoundPoint::new(g.clone(), s.below.abs(), SignedLogReal::ZERO)
        };
        lower.push(below);
        upper.push(BoundPoint::new(g.clone(), s.above.abs(), SignedLogReal::from_f64(r_hi)));
        if is_diag {
            diagonal.push(BoundPoint::new(g, s.above.abs(), SignedLogReal::from_f64(r_diag)));
        }
    }
    let report = |id: &str, points: Vec<BoundPoint>| {
        let s = sup(&points);
        BoundReport {
            bound_id: id.into(),
            tuples: points.len(),
            points,
            sup_ratio: s,
            calibrated_constant: s,
            trend: None,
            notes: vec![format!("eps_B weights at B = {EPS_B}")],
            pass: s.is_finite(),
        }
    };
    Ok(vec![
        report("smn_below_q", lower),
        report("smn_above_q", upper),
        report("smn_above_q_diagonal", diagonal),
    ])
}

/// `|p_{k,m}(n)|` against
/// `(n/m)^{(k-1)/2} ((nm)^{1/4+eps} / k + (m,n)^{1/2} k^{1/6} / (nm)^{1/4-eps})`
/// with `eps` = [`EPSILON`], over `(k, m, n)` with `n != m`.
pub fn check_pkmn_bound(grid: &[(u32, u64, u64)], tol: f64) -> Result<BoundReport> {
    let points: Vec<BoundPoint> = grid
        .par_iter()
        .map(|&(k, m, n)| {
            if k < 16 || n == m {
                return Err(Error::domain(format!("p_{{k,m}}(n) bound needs k >= 16 and n != m, got ({k}, {m}, {n})")));
            }
            let p = ModularParams::new(k, m)?;
            let e = coefficient(&p, n, tol)?;
            let (kf, mn) = (f64::from(k), (m * n) as f64);
            let g = gcd(m, n) as f64;
            let inner = mn.powf(0.25 + EPSILON) / kf + g.sqrt() * kf.powf(1.0 / 6.0) / mn.powf(0.25 - EPSILON);
            let ln_rhs = 0.5 * (kf - 1.0) * (n as f64 / m as f64).ln() + inner.ln();
            Ok(BoundPoint::new(
                vec![kf, m as f64, n as f64],
                e.value.abs(),
                SignedLogReal::from_ln(ln_rhs),
            ))
        })
        .collect::<Result<_>>()?;
    let s = sup(&points);
    Ok(BoundReport {
        bound_id: "pkmn".into(),
        tuples: points.len(),
        points,
        sup_ratio: s,
        calibrated_constant: s,
        trend: None,
        notes: vec![format!("epsilon = {EPSILON}")],
        pass: s.is_finite(),
    })
}

/// How the index grows with the weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `m` fixed.
    Fixed(u64),
    /// `m = floor(a k)`.
    Linear(f64),
    /// `m = floor(k log k)`.
    KLogK,
    /// `m = floor(k^a)`.
    Power(f64),
}

impl Schedule {
    pub fn m_of(&self, k: u32) -> u64 {
        let kf = f64::from(k);
        let m = match *self {
            Schedule::Fixed(m) => return m,
            Schedule::Linear(a) => (a * kf).floor(),
            Schedule::KLogK => (kf * kf.ln()).floor(),
            Schedule::Power(a) => kf.powf(a).floor(),
        };
        (m as u64).max(1)
    }

    /// Whether `m` grows with `k`, where the limit is expected to hold.
    pub fn is_growing(&self) -> bool {
        !matches!(self, Schedule::Fixed(_))
    }

    /// Parses `m=1`, `m=k`, `m=2k`, `m=k*logk` or `m=k^1.2`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("unrecognized schedule {s:?}"));
        let body = s.trim().strip_prefix("m=").ok_or_else(bad)?.replace(' ', "");
        if body == "k*logk" || body == "klogk" || body == "k*log(k)" {
            return Ok(Schedule::KLogK);
        }
        if let Some(e) = body.strip_prefix("k^") {
            return e.parse().map(Schedule::Power).map_err(|_| bad());
        }
        if let Some(a) = body.strip_suffix('k') {
            let a = a.trim_end_matches('*');
            return if a.is_empty() {
                Ok(Schedule::Linear(1.0))
            } else {
                a.parse().map(Schedule::Linear).map_err(|_| bad())
            };
        }
        body.parse().map(Schedule::Fixed).map_err(|_| bad())
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::Fixed(m) => write!(f, "m={m}"),
            Schedule::Linear(a) if *a == 1.0 => write!(f, "m=k"),
            Schedule::Linear(a) => write!(f, "m={a}k"),
            Schedule::KLogK => write!(f, "m=k*logk"),
            Schedule::Power(a) => write!(f, "m=k^{a}"),
        }
    }
}

/// `|p_{k,m}(m) - 1|` along `k_list` with `m` from `schedule`. Passes when
/// the sequence strictly decreases and its log-log slope is at most
/// [`TREND_SLOPE`].
pub fn check_pkmm_limit(k_list: &[u32], schedule: Schedule, tol: f64) -> Result<BoundReport> {
    let points: Vec<BoundPoint> = k_list
        .par_iter()
        .map(|&k| {
            let m = schedule.m_of(k);
            let e = coefficient(&ModularParams::new(k, m)?, m, tol)?;
            Ok(BoundPoint::new(vec![f64::from(k), m as f64], e.cusp.abs(), SignedLogReal::ONE))
        })
        .collect::<Result<_>>()?;
    let trend = Trend::new(k_list.to_vec(), points.iter().map(|p| p.ratio).collect());
    let pass = trend.strictly_decreasing && trend.slope <= TREND_SLOPE;
    let s = sup(&points);
    Ok(BoundReport {
        bound_id: "pkmm".into(),
        tuples: points.len(),
        notes: vec![format!("schedule {schedule}; slope {:.4}", trend.slope)],
        points,
        sup_ratio: s,
        calibrated_constant: s,
        trend: Some(trend),
        pass,
    })
}

/// `1` on `[lo + w, hi - w]`, rising and falling as `(1 - cos)/2` over the
/// width `w` at each end, `0` outside.
fn taper(t: f64, lo: f64, hi: f64, w: f64) -> f64 {
    if t <= lo || t >= hi {
        0.0
    } else if t < lo + w {
        0.5 * (1.0 - (PI * (t - lo) / w).cos())
    } else if t > hi - w {
        0.5 * (1.0 - (PI * (hi - t) / w).cos())
    } else {
        1.0
    }
}

/// A product of two cosine-tapered boxes, supported in a rectangle inside
/// the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    /// Taper width as a fraction of each side.
    pub taper: f64,
}

impl Bump {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, taper: f64) -> Result<Self> {
        let region = Region::new(x_lo, x_hi, y_lo, y_hi)?;
        let xm = if x_lo <= 0.0 && x_hi >= 0.0 { 0.0 } else { x_lo.abs().min(x_hi.abs()) };
        if y_lo < (1.0 - xm * xm).sqrt() || !y_hi.is_finite() {
            return Err(Error::domain(format!("bump support {region:?} must be bounded and above the arc")));
        }
        if !(taper > 0.0 && taper <= 0.5) {
            return Err(Error::domain(format!("bump taper must lie in (0, 1/2], got {taper}")));
        }
        Ok(Bump {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            taper,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (wx, wy) = (self.taper * (self.x_hi - self.x_lo), self.taper * (self.y_hi - self.y_lo));
        taper(x, self.x_lo, self.x_hi, wx) * taper(y, self.y_lo, self.y_hi, wy)
    }

    fn x_profile(&self, x: f64) -> f64 {
        taper(x, self.x_lo, self.x_hi, self.taper * (self.x_hi - self.x_lo))
    }

    fn y_profile(&self, y: f64) -> f64 {
        taper(y, self.y_lo, self.y_hi, self.taper * (self.y_hi - self.y_lo))
    }

    /// Smooth pieces of `[lo, hi]` with tapers of width `w`, each cut so
    /// that a cosine of frequency `j_max` has at most one period per piece.
    fn pieces(lo: f64, hi: f64, w: f64, j_max: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (a, b) in [(lo, lo + w), (lo + w, hi - w), (hi - w, hi)] {
            let n = ((b - a) * j_max as f64).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            out.extend((0..n).map(|i| (a + h * i as f64, a + h * (i + 1) as f64)));
        }
        out
    }

    /// `int X(x) cos(2 pi j x) dx` for `j = 0..=j_max`.
    fn x_moments(&self, j_max: usize) -> Vec<f64> {
        let w = self.taper * (self.x_hi - self.x_lo);
        let rule = GaussLegendre::g32();
        let pieces = Self::pieces(self.x_lo, self.x_hi, w, j_max);
        (0..=j_max)
            .map(|j| {
                let om = 2.0 * PI * j as f64;
                pieces
                    .iter()
                    .map(|&(a, b)| rule.integrate(a, b, |x| self.x_profile(x) * (om * x).cos()))
                    .sum()
            })
            .collect()
    }

    /// `(3/pi) int psi dmu`.
    pub fn uniform_mass(&self) -> f64 {
        let rule = GaussLegendre::g32();
        let wy = self.taper * (self.y_hi - self.y_lo);
        let ys: f64 = Self::pieces(self.y_lo, self.y_hi, wy, 8)
            .iter()
            .map(|&(a, b)| rule.integrate(a, b, |y| self.y_profile(y) / (y * y)))
            .sum();
        3.0 / PI * self.x_moments(0)[0] * ys
    }

    fn region(&self) -> Region {
        Region {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            y_lo: self.y_lo,
            y_hi: self.y_hi,
        }
    }
}

/// The bumps used by the acceptance run and the command-line default.
pub fn default_bumps() -> Vec<Bump> {
    vec![
        Bump::new(-0.3, 0.3, 1.0, 1.5, 0.25).expect("valid bump"),
        Bump::new(0.05, 0.45, 1.2, 2.2, 0.25).expect("valid bump"),
        Bump::new(-0.45, -0.05, 1.0, 1.4, 0.25).expect("valid bump"),
    ]
}

/// A row `y^k |P|^2 / <P, P>` weighted by the bump's `x` profile.
struct BumpRow<'a> {
    row: CosineRow,
    moments: &'a [f64],
}

impl RowIntegral for BumpRow<'_> {
    type Output = f64;

    /// The moments already span the whole support, which is the only
    /// interval the region hands over.
    fn integral(&self, _a: f64, _b: f64) -> f64 {
        self.row.scale * self.row.coeffs.iter().zip(self.moments).map(|(c, m)| c * m).sum::<f64>()
    }
}

/// `<psi, y^k |P|^2 / <P, P>>` for a bump `psi`.
pub fn bump_mass(table: &CoefficientTable, bump: &Bump, spec: &QuadSpec) -> Result<f64> {
    let log_norm = petersson_norm_log(table)?.log_mag();
    let k = f64::from(table.params.k);
    let j_max = FourierRow::new(table, bump.y_lo)?.terms.len();
    let moments = bump.x_moments(j_max);
    let dense = |row: &FourierRow| {
        let len = row.terms.last().map_or(0, |t| t.0 as usize);
        let mut b = vec![0.0; len];
        for &(n, v) in &row.terms {
            b[n as usize - 1] = v;
        }
        b
    };
    let r = integrate_region(&bump.region(), bump.y_hi, spec, |y| {
        let row = FourierRow::new(table, y)?;
        let b = dense(&row);
        let scale = (2.0 * row.log_scale + (k - 2.0) * y.ln() - log_norm).exp() * bump.y_profile(y);
        let row = CosineRow::from_product(&b, &b, scale);
        if row.coeffs.len() > moments.len() {
            return Err(Error::TableTooShort { reached: row.coeffs.len() });
        }
        Ok(BumpRow {
            row,
            moments: &moments,
        })
    })?;
    Ok(r.value)
}

/// `|<psi, mass> - (3/pi) <psi, 1>|` along `k_list` for each bump. The
/// trend is on the largest discrepancy over the bumps at each `k`: a growing
/// schedule passes when it strictly decreases, a fixed one when it does not.
/// Point grids are `[k, m, bump index, observed mass]`.
pub fn check_mass_convergence(k_list: &[u32], schedule: Schedule, bumps: &[Bump], tol: f64) -> Result<BoundReport> {
    let spec = QuadSpec {
        abs_tol: 0.0,
        rel_tol: 1e-8,
        max_depth: 40,
    };
    let mut points = Vec::new();
    let mut sup_by_k = Vec::new();
    for &k in k_list {
        let m = schedule.m_of(k);
        let table = table_for_height(&ModularParams::new(k, m)?, 32, tol, 0.75f64.sqrt())?;
        let rows: Vec<BoundPoint> = bumps
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let got = bump_mass(&table, b, &spec)?;
                let want = b.uniform_mass();
                Ok(BoundPoint::new(
                    vec![f64::from(k), m as f64, i as f64, got],
                    SignedLogReal::from_f64((got - want).abs()),
                    SignedLogReal::from_f64(want),
                ))
            })
            .collect::<Result<_>>()?;
        sup_by_k.push(rows.iter().map(|p| p.lhs.to_f64()).fold(0.0, f64::max));
        points.extend(rows);
    }
    let trend = Trend::new(k_list.to_vec(), sup_by_k);
    let pass = if schedule.is_growing() {
        trend.strictly_decreasing
    } else {
        !trend.strictly_decreasing
    };
    let s = sup(&points);
    Ok(BoundReport {
        bound_id: "mass_convergence".into(),
        tuples: points.len(),
        notes: vec![format!(
            "schedule {schedule}; expected {}",
            if schedule.is_growing() { "decreasing" } else { "not decreasing" }
        )],
        points,
        sup_ratio: s,
        calibrated_constant: s,
        trend: Some(trend),
        pass,
    })
}

/// Zero equidistribution along a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEquidistReport {
    pub schedule: Schedule,
    pub rows: Vec<EquidistRow>,
    /// Weights whose inventories did not certify; left out of the trend.
    pub excluded: Vec<u32>,
    pub trend: Trend,
    pub pass: bool,
}

/// Per-cell zero counts against area along `k_list`, with the same pass rule
/// as [`check_mass_convergence`] applied to the discrepancy.
pub fn check_zero_equidistribution(
    k_list: &[u32],
    schedule: Schedule,
    partition: &[Region],
    refine_tol: f64,
    tol: f64,
) -> Result<ZeroEquidistReport> {
    let mut inventories = Vec::new();
    for &k in k_list {
        let table = table_for_height(&ModularParams::new(k, schedule.m_of(k))?, 32, tol, 0.75f64.sqrt())?;
        inventories.push(zero_inventory(&table, None, refine_tol)?);
    }
    let rows = zero_equidist_report(&inventories, partition);
    let excluded: Vec<u32> = rows.iter().filter(|r| !r.certified).map(|r| r.params.k).collect();
    let kept: Vec<&EquidistRow> = rows.iter().filter(|r| r.certified).collect();
    let trend = Trend::new(
        kept.iter().map(|r| r.params.k).collect(),
        kept.iter().map(|r| r.discrepancy).collect(),
    );
    let pass = excluded.is_empty()
        && if schedule.is_growing() {
            trend.strictly_decreasing
        } else {
            !trend.strictly_decreasing
        };
    Ok(ZeroEquidistReport {
        schedule,
        rows,
        excluded,
        trend,
        pass,
    })
}
