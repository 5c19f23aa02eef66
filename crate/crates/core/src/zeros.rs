//! Zeros of `P_{k,m}` in the fundamental domain: sign scans of real
//! restrictions to the boundary, winding numbers for the interior and the
//! elliptic points, and the valence identity checked in exact rationals.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poincare::{evaluate, petersson_norm_log, CoefficientTable, ModularParams, ModularPoint, Region};
use crate::special::logscalar::wrap_phase;
use crate::special::LogComplex;

/// Boundary pieces of the fundamental domain on which `P` has a real form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    /// `z = e^{i theta}`, `theta` in `[pi/3, pi/2]`; the other half of the
    /// arc is the image under `z -> -1/z`.
    Arc,
    /// `x = 1/2`; the edge `x = -1/2` is identified with it.
    VerticalEdge,
    /// `x = 0`, `y >= 1`, which lies inside the domain.
    ImaginaryAxis,
}

impl Locus {
    /// Point of the locus at `param` (`theta` on the arc, `y` otherwise).
    pub fn point(self, param: f64) -> (f64, f64) {
        match self {
            Locus::Arc => (param.cos(), param.sin()),
            Locus::VerticalEdge => (0.5, param),
            Locus::ImaginaryAxis => (0.0, param),
        }
    }
}

/// Where a zero sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroLocus {
    Interior,
    Arc,
    VerticalEdge,
    /// The point `i`, weight 1/2.
    EllipticI,
    /// The point `rho = 1/2 + i sqrt(3)/2`, weight 1/3.
    EllipticRho,
}

/// `P` at `z` scaled by `y^{k/2} / sqrt(<P, P>)`, so that values are of order
/// one where the mass is.
fn normalized(table: &CoefficientTable, x: f64, y: f64, log_norm: f64) -> Result<LogComplex> {
    let v = evaluate(table, &ModularPoint::new(x, y)?)?;
    let shift = 0.5 * f64::from(table.params.k) * y.ln() - 0.5 * log_norm;
    Ok(LogComplex::new(v.log_mag() + shift, v.phase()))
}

/// Imaginary part allowed in a real form, relative to `max(|value|, 1e-2)`.
const REALNESS_TOL: f64 = 1e-8;

/// The real restriction of `P` to a boundary piece, in the normalization of
/// [`normalized`]: `e^{ik theta/2} P(e^{i theta})` on the arc, `P(1/2 + iy)`
/// and `P(iy)` on the lines.
///
/// On the arc `-1/z = -conj(z)`, so `conj P(z) = P(-conj z) = z^k P(z)` and the
/// rotated value is real. On the lines all `p(n)` are real.
pub fn boundary_real_form(table: &CoefficientTable, locus: Locus, param: f64) -> Result<f64> {
    let log_norm = petersson_norm_log(table)?.log_mag();
    real_form(table, locus, param, log_norm)
}

fn real_form(table: &CoefficientTable, locus: Locus, param: f64, log_norm: f64) -> Result<f64> {
    let (x, y) = locus.point(param);
    let v = normalized(table, x, y, log_norm)?;
    let rot = match locus {
        Locus::Arc => 0.5 * f64::from(table.params.k) * param,
        _ => 0.0,
    };
    let c = Complex64::from_polar(v.log_mag().exp(), v.phase() + rot);
    if c.im.abs() > REALNESS_TOL * c.re.abs().max(1e-2) {
        return Err(Error::Precision(format!(
            "real form on {locus:?} at {param} has imaginary part {:e} against {:e}",
            c.im, c.re
        )));
    }
    Ok(c.re)
}

/// One root found by a sign scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRoot {
    pub locus: Locus,
    pub parameter: f64,
    pub multiplicity: u32,
    /// Set when two roots closer than `10 refine_tol` were merged.
    pub flagged: bool,
}

/// Roots of the real form on `[lo, hi]`: sign changes on `resolution`
/// equal steps, refined by bisection to `refine_tol`. Zeros of even order
/// do not change sign and are not found.
pub fn scan_boundary_zeros(
    table: &CoefficientTable,
    locus: Locus,
    lo: f64,
    hi: f64,
    resolution: usize,
    refine_tol: f64,
) -> Result<Vec<BoundaryRoot>> {
    let log_norm = petersson_norm_log(table)?.log_mag();
    let f = |t: f64| real_form(table, locus, t, log_norm);
    scan_sign_changes(&f, lo, hi, resolution, refine_tol).map(|roots| {
        roots
            .into_iter()
            .map(|(parameter, flagged)| BoundaryRoot {
                locus,
                parameter,
                multiplicity: 1,
                flagged,
            })
            .collect()
    })
}

/// Sign changes of `f` on a uniform grid, bisected to `refine_tol`; roots
/// within `10 refine_tol` of each other are merged and flagged.
pub fn scan_sign_changes(
    f: &(dyn Fn(f64) -> Result<f64> + Sync),
    lo: f64,
    hi: f64,
    resolution: usize,
    refine_tol: f64,
) -> Result<Vec<(f64, bool)>> {
    if resolution < 100 {
        return Err(Error::domain(format!("scan resolution must be at least 100, got {resolution}")));
    }
    if !(hi > lo) || !(refine_tol > 0.0) {
        return Err(Error::domain("scan needs lo < hi and refine_tol > 0"));
    }
    let h = (hi - lo) / resolution as f64;
    let grid: Vec<f64> = (0..=resolution).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..resolution {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if a * b < 0.0 {
            let (mut l, mut r, mut fl) = (grid[i], grid[i + 1], a);
            while r - l > refine_tol {
                let mid = 0.5 * (l + r);
                let fm = f(mid)?;
                if fm == 0.0 {
                    l = mid;
                    r = mid;
                    break;
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
    }
    if vals[resolution] == 0.0 {
        roots.push(hi);
    }
    let mut out: Vec<(f64, bool)> = Vec::new();
    for r in roots {
        match out.last_mut() {
            Some(last) if r - last.0 < 10.0 * refine_tol => last.1 = true,
            _ => out.push((r, false)),
        }
    }
    Ok(out)
}

/// A closed cell `x_lo <= x <= x_hi`, `y <= y_hi`, above
/// `max(y_lo, sqrt(1 - x^2) + arc_offset)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    arc_offset: f64,
}

impl Cell {
    fn from_region(r: &Region, y_cap: f64) -> Self {
        Cell {
            x_lo: r.x_lo,
            x_hi: r.x_hi,
            y_lo: r.y_lo,
            y_hi: r.y_hi.min(y_cap),
            arc_offset: 0.0,
        }
    }

    fn bottom(&self, x: f64) -> f64 {
        self.y_lo.max((1.0 - x * x).max(0.0).sqrt() + self.arc_offset)
    }

    /// Same cell pulled inwards by `d` on every side.
    fn shrink(&self, d: f64) -> Self {
        Cell {
            x_lo: self.x_lo + d,
            x_hi: self.x_hi - d,
            y_lo: self.y_lo + d,
            y_hi: self.y_hi - d,
            arc_offset: self.arc_offset + d,
        }
    }

    /// The boundary, counterclockwise, as four paths on `[0, 1]`.
    fn contour(&self) -> [Box<dyn Fn(f64) -> (f64, f64) + Sync + '_>; 4] {
        [
            Box::new(move |s| {
                let x = self.x_lo + s * (self.x_hi - self.x_lo);
                (x, self.bottom(x))
            }),
            Box::new(move |s| {
                let b = self.bottom(self.x_hi);
                (self.x_hi, b + s * (self.y_hi - b))
            }),
            Box::new(move |s| (self.x_hi - s * (self.x_hi - self.x_lo), self.y_hi)),
            Box::new(move |s| {
                let b = self.bottom(self.x_lo);
                (self.x_lo, self.y_hi - s * (self.y_hi - b))
            }),
        ]
    }

    fn is_empty(&self) -> bool {
        self.x_hi <= self.x_lo || self.y_hi <= self.bottom(self.x_lo).max(self.bottom(self.x_hi))
    }
}

/// Phase steps larger than this are refined.
const MAX_STEP: f64 = PI / 2.0;
/// Initial samples on each contour piece.
const CONTOUR_SAMPLES: usize = 64;
/// Smallest parameter step before a zero on the contour is suspected.
const MIN_STEP: f64 = 1e-13;

/// Total change of `arg f` along a path, bisecting until consecutive phase
/// steps are below `pi/2`.
fn phase_change(path: &(dyn Fn(f64) -> (f64, f64) + Sync), f: &(dyn Fn(f64, f64) -> Result<LogComplex> + Sync)) -> Result<f64> {
    let at = |s: f64| -> Result<f64> {
        let (x, y) = path(s);
        let v = f(x, y)?;
        if v.is_zero() {
            return Err(Error::Winding(format!("function vanishes on the contour at {x} + {y}i")));
        }
        Ok(v.phase())
    };
    let grid: Vec<f64> = (0..=CONTOUR_SAMPLES).map(|i| i as f64 / CONTOUR_SAMPLES as f64).collect();
    let phases: Vec<f64> = grid.par_iter().map(|&s| at(s)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..CONTOUR_SAMPLES {
        total += refine(&at, grid[i], grid[i + 1], phases[i], phases[i + 1])?;
    }
    Ok(total)
}

fn refine(at: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, pa: f64, pb: f64) -> Result<f64> {
    let step = wrap_phase(pb - pa);
    if step.abs() < MAX_STEP {
        return Ok(step);
    }
    if b - a < MIN_STEP {
        return Err(Error::Winding(format!(
            "phase jump {step:.3} over a step of {:e}; suspected zero on the contour",
            b - a
        )));
    }
    let m = 0.5 * (a + b);
    let pm = at(m)?;
    Ok(refine(at, a, m, pa, pm)? + refine(at, m, b, pm, pb)?)
}

/// Winding number of `f` around the boundary of `cell`.
fn cell_winding(cell: &Cell, f: &(dyn Fn(f64, f64) -> Result<LogComplex> + Sync)) -> Result<i64> {
    let mut total = 0.0;
    for piece in cell.contour() {
        total += phase_change(&*piece, f)?;
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.1 {
        return Err(Error::Winding(format!("contour phase {w:.4} turns is not near an integer")));
    }
    Ok(w.round() as i64)
}

/// Winding with one retry on a cell pulled in by `margin` when the first
/// contour passes through a zero.
fn cell_winding_nudged(cell: &Cell, margin: f64, f: &(dyn Fn(f64, f64) -> Result<LogComplex> + Sync)) -> Result<i64> {
    match cell_winding(cell, f) {
        Err(Error::Winding(_)) => cell_winding(&cell.shrink(margin), f),
        other => other,
    }
}

/// Number of zeros of `P` inside `region`, with multiplicity. An unbounded
/// region is cut at [`zero_free_height`].
pub fn argument_winding(table: &CoefficientTable, region: &Region) -> Result<i64> {
    let cap = if region.y_hi.is_finite() {
        region.y_hi
    } else {
        zero_free_height(table)?.max(region.y_lo + 1.0)
    };
    let f = |x: f64, y: f64| evaluate(table, &ModularPoint::new(x, y)?);
    cell_winding_nudged(&Cell::from_region(region, cap), 1e-6, &f)
}

/// Winding number of an arbitrary function around `region`, for testing the
/// contour machinery.
pub fn winding_of(region: &Region, y_cap: f64, f: &(dyn Fn(f64, f64) -> Result<LogComplex> + Sync)) -> Result<i64> {
    cell_winding(&Cell::from_region(region, y_cap), f)
}

/// Order of vanishing of `P` at `(x0, y0)`, from the winding on a circle of
/// radius `r`.
fn order_at(table: &CoefficientTable, x0: f64, y0: f64, r: f64) -> Result<i64> {
    let circle = move |s: f64| {
        let a = 2.0 * PI * s;
        (x0 + r * a.cos(), y0 + r * a.sin())
    };
    let f = |x: f64, y: f64| evaluate(table, &ModularPoint::new(x, y)?);
    let w = phase_change(&circle, &f)? / (2.0 * PI);
    if (w - w.round()).abs() > 0.1 {
        return Err(Error::Winding(format!("winding {w:.4} at ({x0}, {y0}) is not near an integer")));
    }
    Ok(w.round() as i64)
}

/// One zero with its valence weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub x: f64,
    pub y: f64,
    pub multiplicity: u32,
    /// `1/2` at `i`, `1/3` at `rho`, `1` elsewhere.
    pub weight: (i64, i64),
    pub locus: ZeroLocus,
}

impl ZeroRecord {
    pub fn weight(&self) -> Ratio<i64> {
        Ratio::new(self.weight.0, self.weight.1)
    }
}

/// Zeros of `P_{k,m}` in the fundamental domain, up to the height above
/// which none can lie.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroInventory {
    pub params: ModularParams,
    pub v_infinity: u64,
    /// Height above which the first nonzero term dominates the rest.
    pub y_max: f64,
    pub zeros: Vec<ZeroRecord>,
    /// `sum w(p) v_p`, as `(numerator, denominator)`.
    pub total_weighted: (i64, i64),
    /// `k/12 - v_infinity - total_weighted`; zero when certified.
    pub deficit: (i64, i64),
    pub certified: bool,
}

/// Lowest `y >= 1` from which `|p(v) q^v|` exceeds the certified bound on
/// `sum_{n > v} |p(n) q^n|`, so that `P` has no zeros above it. Each ratio
/// `e^{-2 pi (n - v) y}` decreases with `y`, so the dominance persists.
pub fn zero_free_height(table: &CoefficientTable) -> Result<f64> {
    let v = table
        .v_infinity()
        .ok_or_else(|| Error::Certification("no certified nonzero coefficient in the table".into()))?;
    let lead = table.get(v).expect("v_infinity is in the table");
    let dominated = |y: f64| -> bool {
        let l0 = lead.value.log_mag() - 2.0 * PI * v as f64 * y;
        let err0 = lead.log_tail - 2.0 * PI * v as f64 * y;
        // sum over the rest, plus the table's truncation allowance.
        let mut rest = err0.exp() / l0.exp();
        for e in table.entries.iter().filter(|e| e.n > v) {
            let l = e.value.log_mag().max(e.log_tail) + std::f64::consts::LN_2 - 2.0 * PI * e.n as f64 * y;
            rest += (l - l0).exp();
        }
        // Beyond the table, the last entry's decay rate continues at worst
        // geometrically with ratio e^{-2 pi y} times the growth of |p(n)|;
        // require the last term to be negligible.
        let last = table.entries.last().expect("nonempty table");
        let tail = (last.value.log_mag().max(last.log_tail) - 2.0 * PI * last.n as f64 * y - l0).exp();
        rest + 1e3 * tail < 0.5
    };
    let mut y = 1.0;
    while !dominated(y) {
        y *= 1.02;
        if y > 1e4 {
            return Err(Error::Certification("no zero-free height found".into()));
        }
    }
    Ok(y)
}

/// Grid steps for each boundary scan.
pub const SCAN_RESOLUTION: usize = 400;

/// Radius of the circles around `i` and `rho` on which their orders are read.
const ELLIPTIC_RADIUS: f64 = 1e-4;
/// Offset of the interior contours from the boundary.
const BOUNDARY_MARGIN: f64 = 1e-5;

/// Collects all zeros in the fundamental domain and checks the valence
/// identity `v_inf + sum w(p) v_p = k/12` exactly.
///
/// Boundary zeros of odd order come from sign scans of the real forms on
/// `theta in (pi/3, pi/2)`, on `x = 1/2` and on `x = 0`; orders at `i` and
/// `rho` from windings on small circles; interior zeros from windings on
/// the two halves of the domain pulled off the boundary, located by
/// subdividing cells. Zeros of even order on the boundary are missed and
/// show up as a nonzero deficit.
///
/// `y_max` defaults to [`zero_free_height`]; a supplied value below it is a
/// domain error.
pub fn zero_inventory(table: &CoefficientTable, y_max: Option<f64>, refine_tol: f64) -> Result<ZeroInventory> {
    let params = table.params;
    let v_inf = table
        .v_infinity()
        .ok_or_else(|| Error::Certification("no certified nonzero coefficient in the table".into()))?;
    let safe = zero_free_height(table)?;
    let y_max = match y_max {
        Some(y) if y < safe => {
            return Err(Error::domain(format!(
                "y_max = {y} is below the certified zero-free height {safe:.4}"
            )))
        }
        Some(y) => y,
        None => safe,
    };
    let resolution = SCAN_RESOLUTION;
    let r = ELLIPTIC_RADIUS;
    let rho = (0.5, 0.75f64.sqrt());
    let mut zeros = Vec::new();

    let v_i = order_at(table, 0.0, 1.0, r)?;
    let v_rho = order_at(table, rho.0, rho.1, r)?;
    if v_i < 0 || v_rho < 0 {
        return Err(Error::Winding("negative order at an elliptic point".into()));
    }
    if v_i > 0 {
        zeros.push(ZeroRecord {
            x: 0.0,
            y: 1.0,
            multiplicity: v_i as u32,
            weight: (1, 2),
            locus: ZeroLocus::EllipticI,
        });
    }
    if v_rho > 0 {
        zeros.push(ZeroRecord {
            x: rho.0,
            y: rho.1,
            multiplicity: v_rho as u32,
            weight: (1, 3),
            locus: ZeroLocus::EllipticRho,
        });
    }

    let scans = [
        (Locus::Arc, PI / 3.0 + r, PI / 2.0 - r, ZeroLocus::Arc),
        (Locus::VerticalEdge, rho.1 + r, y_max, ZeroLocus::VerticalEdge),
        (Locus::ImaginaryAxis, 1.0 + r, y_max, ZeroLocus::Interior),
    ];
    for (locus, lo, hi, kind) in scans {
        if hi <= lo {
            continue;
        }
        for root in scan_boundary_zeros(table, locus, lo, hi, resolution, refine_tol)? {
            let (x, y) = locus.point(root.parameter);
            zeros.push(ZeroRecord {
                x,
                y,
                multiplicity: root.multiplicity,
                weight: (1, 1),
                locus: kind,
            });
        }
    }

    // Interior of each half, off the boundary lines and the arc.
    let d = BOUNDARY_MARGIN;
    let halves = [
        Cell {
            x_lo: -0.5 + d,
            x_hi: -d,
            y_lo: 0.0,
            y_hi: y_max,
            arc_offset: d,
        },
        Cell {
            x_lo: d,
            x_hi: 0.5 - d,
            y_lo: 0.0,
            y_hi: y_max,
            arc_offset: d,
        },
    ];
    let f = |x: f64, y: f64| evaluate(table, &ModularPoint::new(x, y)?);
    for cell in halves {
        for (x, y, mult) in locate(&cell, &f, 0)? {
            zeros.push(ZeroRecord {
                x,
                y,
                multiplicity: mult,
                weight: (1, 1),
                locus: ZeroLocus::Interior,
            });
        }
    }

    let total: Ratio<i64> = zeros
        .iter()
        .map(|z| z.weight() * Ratio::from_integer(i64::from(z.multiplicity)))
        .sum();
    let deficit = Ratio::new(i64::from(params.k), 12) - Ratio::from_integer(v_inf as i64) - total;
    Ok(ZeroInventory {
        params,
        v_infinity: v_inf,
        y_max,
        zeros,
        total_weighted: (*total.numer(), *total.denom()),
        deficit: (*deficit.numer(), *deficit.denom()),
        certified: deficit == Ratio::from_integer(0),
    })
}

/// Cells narrower than this are reported as a zero location.
const LOCATE_WIDTH: f64 = 1e-6;

/// Zeros inside `cell` with multiplicity, by winding numbers on
/// recursively quartered cells.
fn locate(
    cell: &Cell,
    f: &(dyn Fn(f64, f64) -> Result<LogComplex> + Sync),
    depth: u32,
) -> Result<Vec<(f64, f64, u32)>> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    let count = cell_winding_nudged(cell, LOCATE_WIDTH * 1e-3, f)?;
    if count < 0 {
        return Err(Error::Winding("negative winding for a holomorphic function".into()));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let bottom = cell.bottom(cell.x_lo).min(cell.bottom(cell.x_hi));
    let width = (cell.x_hi - cell.x_lo).max(cell.y_hi - bottom);
    if width < LOCATE_WIDTH || depth > 60 {
        let x = 0.5 * (cell.x_lo + cell.x_hi);
        return Ok(vec![(x, 0.5 * (cell.bottom(x) + cell.y_hi), count as u32)]);
    }
    let xm = 0.5 * (cell.x_lo + cell.x_hi);
    let ym = 0.5 * (bottom.max(cell.y_lo) + cell.y_hi);
    let mut parts = Vec::new();
    for (xl, xh) in [(cell.x_lo, xm), (xm, cell.x_hi)] {
        for (yl, yh) in [(cell.y_lo, ym), (ym, cell.y_hi)] {
            parts.push(Cell {
                x_lo: xl,
                x_hi: xh,
                y_lo: yl,
                y_hi: yh,
                arc_offset: cell.arc_offset,
            });
        }
    }
    let mut out = Vec::new();
    let mut found = 0i64;
    for p in parts {
        let z = locate(&p, f, depth + 1)?;
        found += z.iter().map(|t| i64::from(t.2)).sum::<i64>();
        out.extend(z);
    }
    if found != count {
        return Err(Error::Winding(format!(
            "subcells hold {found} zeros but their parent winds {count} times"
        )));
    }
    Ok(out)
}

/// Per-cell comparison of the zero count with the hyperbolic area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellZeros {
    pub region: Region,
    /// `(12/k) sum w(p) v_p` over zeros in the cell.
    pub observed: f64,
    /// `(3/pi) area`.
    pub expected: f64,
}

/// Zero equidistribution for one inventory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistRow {
    pub params: ModularParams,
    pub certified: bool,
    pub cells: Vec<CellZeros>,
    /// `max |observed - expected|` over cells.
    pub discrepancy: f64,
    /// `v_inf / k`.
    pub cusp_ratio: f64,
}

/// Four strips in `x` by three bands in `y`, covering the whole domain.
pub fn default_partition() -> Vec<Region> {
    let xs = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let bands = [(0.0, 1.1), (1.1, 1.5), (1.5, f64::INFINITY)];
    xs.windows(2)
        .flat_map(|w| bands.iter().map(move |&(lo, hi)| Region::new(w[0], w[1], lo, hi).expect("valid cell")))
        .collect()
}

fn contains(r: &Region, x: f64, y: f64) -> bool {
    let in_x = x >= r.x_lo && (x < r.x_hi || (r.x_hi >= 0.5 && x <= r.x_hi));
    let in_y = y >= r.y_lo && (y < r.y_hi || r.y_hi.is_infinite());
    in_x && in_y
}

/// `(12/k) sum w(p) v_p` against `(3/pi) area` on each cell of `partition`.
/// Uncertified inventories are reported with `certified = false`.
pub fn zero_equidist_report(inventories: &[ZeroInventory], partition: &[Region]) -> Vec<EquidistRow> {
    inventories
        .iter()
        .map(|inv| {
            let k = f64::from(inv.params.k);
            let cells: Vec<CellZeros> = partition
                .iter()
                .map(|r| {
                    let w: f64 = inv
                        .zeros
                        .iter()
                        .filter(|z| contains(r, z.x, z.y))
                        .map(|z| z.weight.0 as f64 / z.weight.1 as f64 * f64::from(z.multiplicity))
                        .sum();
                    CellZeros {
                        region: *r,
                        observed: 12.0 / k * w + 0.0,
                        expected: 3.0 / PI * r.area(),
                    }
                })
                .collect();
            let discrepancy = cells.iter().map(|c| (c.observed - c.expected).abs()).fold(0.0, f64::max);
            EquidistRow {
                params: inv.params,
                certified: inv.certified,
                cells,
                discrepancy,
                cusp_ratio: inv.v_infinity as f64 / k,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::table_for_height;

    fn table(k: u32) -> CoefficientTable {
        table_for_height(&ModularParams::new(k, 1).unwrap(), 32, 1e-10, 0.75f64.sqrt()).unwrap()
    }

    #[test]
    fn synthetic_sign_scans() {
        let flat = |_t: f64| Ok(1.0);
        assert!(scan_sign_changes(&flat, 0.0, 1.0, 100, 1e-12).unwrap().is_empty());
        let step = |t: f64| Ok(t - 0.3141);
        let r = scan_sign_changes(&step, 0.0, 1.0, 100, 1e-12).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 0.3141).abs() < 1e-11);
        assert!(scan_sign_changes(&step, 0.0, 1.0, 10, 1e-12).is_err());
    }

    #[test]
    fn synthetic_winding() {
        // q - q0 with q = e(z) has one simple zero at z0 in a cell around it.
        let z0 = Complex64::new(0.1, 1.3);
        let f = |x: f64, y: f64| {
            let q = |z: Complex64| (Complex64::new(0.0, 2.0 * PI) * z).exp();
            Ok(LogComplex::from_complex(q(Complex64::new(x, y)) - q(z0)))
        };
        let around = Region::new(0.0, 0.2, 1.2, 1.4).unwrap();
        assert_eq!(winding_of(&around, 10.0, &f).unwrap(), 1);
        let away = Region::new(-0.4, -0.2, 1.2, 1.4).unwrap();
        assert_eq!(winding_of(&away, 10.0, &f).unwrap(), 0);
    }

    #[test]
    fn real_forms_are_real() {
        let t = table(20);
        let log_norm = petersson_norm_log(&t).unwrap().log_mag();
        for i in 0..500 {
            let th = PI / 3.0 + (PI / 6.0) * i as f64 / 499.0;
            real_form(&t, Locus::Arc, th, log_norm).unwrap();
        }
        for y in [0.9, 1.2, 2.0] {
            real_form(&t, Locus::VerticalEdge, y, log_norm).unwrap();
            real_form(&t, Locus::ImaginaryAxis, y.max(1.0), log_norm).unwrap();
        }
    }

    #[test]
    fn high_cell_of_delta_has_no_zeros() {
        let t = table(12);
        let r = Region::new(-0.5, 0.5, 1.5, 3.0).unwrap();
        assert_eq!(argument_winding(&t, &r).unwrap(), 0);
        assert_eq!(argument_winding(&t, &Region::full()).unwrap(), 0);
    }

    #[test]
    fn partition_covers_the_domain() {
        let area: f64 = default_partition().iter().map(|r| r.area()).sum();
        assert!((area - PI / 3.0).abs() < 1e-12);
        let inv = zero_inventory(&table(48), None, 1e-10).unwrap();
        let rows = zero_equidist_report(&[inv.clone()], &default_partition());
        let total: f64 = rows[0].cells.iter().map(|c| c.observed).sum();
        let weighted = inv.total_weighted.0 as f64 / inv.total_weighted.1 as f64;
        assert!((total - 12.0 / 48.0 * weighted).abs() < 1e-12);
    }

    #[test]
    fn valence_balances_for_small_weights() {
        for (k, rho, i) in [(12, 0, 0), (16, 1, 0), (18, 0, 1)] {
            let inv = zero_inventory(&table(k), None, 1e-10).unwrap();
            assert!(inv.certified, "k = {k}: {inv:?}");
            assert_eq!(inv.v_infinity, 1);
            let count = |l: ZeroLocus| inv.zeros.iter().filter(|z| z.locus == l).map(|z| z.multiplicity).sum::<u32>();
            assert_eq!(count(ZeroLocus::EllipticRho), rho, "k = {k}");
            assert_eq!(count(ZeroLocus::EllipticI), i, "k = {k}");
        }
    }
}
