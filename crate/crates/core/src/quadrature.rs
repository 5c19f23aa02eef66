//! Deterministic one-dimensional quadrature rules.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Shared 32-point rule.
    pub fn g32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<T: Integrand>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    /// Maps the nodes onto `[a, b]`, returning `(point, weight)` pairs.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss-Legendre on `[a, b]`.
///
/// Globally adaptive: every panel carries its 16-point value on the whole
/// panel and on its two halves, with the difference as its error. The panel
/// with the largest error (leftmost on ties) is bisected until the summed
/// error is at most `max(abs_tol, rel_tol * |total|)`. Panels narrower than
/// `(b - a) 2^-max_depth` are not split further. The order of operations is
/// fixed, so results are reproducible.
pub fn adaptive<T: Integrand>(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
    f: &mut impl FnMut(f64) -> T,
) -> Result<QuadResult<T>> {
    adaptive_batched(a, b, abs_tol, rel_tol, max_depth, &mut |xs: &[f64]| {
        Ok(xs.iter().map(|&x| f(x)).collect())
    })
}

/// [`adaptive`] with the integrand applied to all nodes of a step at once,
/// so the caller may evaluate them in parallel. `f` must return one value
/// per node, in order.
pub fn adaptive_batched<T: Integrand>(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
    f: &mut impl FnMut(&[f64]) -> Result<Vec<T>>,
) -> Result<QuadResult<T>> {
    let g = GaussLegendre::g16();
    let whole = {
        let pts: Vec<(f64, f64)> = g.points(a, b).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vs = f(&xs)?;
        pts.iter().zip(vs).fold(T::zero(), |acc, (p, v)| acc + v * p.1)
    };
    let mut evals = 16;
    let mut panel = |lo: f64, hi: f64, coarse: T, evals: &mut usize| -> Result<Panel<T>> {
        let mid = 0.5 * (lo + hi);
        let pts: Vec<(f64, f64)> = g.points(lo, mid).chain(g.points(mid, hi)).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vs = f(&xs)?;
        *evals += pts.len();
        let (mut left, mut right) = (T::zero(), T::zero());
        let mut abs = 0.0;
        for (i, (p, v)) in pts.iter().zip(vs).enumerate() {
            abs += v.magnitude() * p.1.abs();
            if i < 16 {
                left = left + v * p.1;
            } else {
                right = right + v * p.1;
            }
        }
        let fine = left + right;
        // Differences below the rounding level of the panel are noise.
        let noise = 64.0 * f64::EPSILON * abs;
        let diff = (fine - coarse).magnitude();
        Ok(Panel {
            lo,
            hi,
            left,
            right,
            fine,
            err: if diff <= noise { 0.0 } else { diff },
        })
    };
    let mut panels = vec![panel(a, b, whole, &mut evals)?];
    let min_width = (b - a) * 0.5f64.powi(max_depth as i32);
    // Panels per call; far above anything the callers here need.
    const MAX_PANELS: usize = 20_000;
    loop {
        let total = panels.iter().fold(T::zero(), |acc, p| acc + p.fine);
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = abs_tol.max(rel_tol * total.magnitude());
        if err <= tol {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations: evals,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.hi - p.lo > min_width && p.err > 0.0)
            .fold(None::<(usize, f64)>, |best, (i, p)| match best {
                Some((_, e)) if e >= p.err => best,
                _ => Some((i, p.err)),
            });
        let Some((i, _)) = worst else {
            return Err(Error::Quadrature(format!(
                "adaptive rule on [{a}, {b}] cannot refine further; error {err:e} above {tol:e}"
            )));
        };
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "adaptive rule on [{a}, {b}] used {MAX_PANELS} panels; error {err:e} above {tol:e}"
            )));
        }
        let p = panels[i];
        let mid = 0.5 * (p.lo + p.hi);
        let l = panel(p.lo, mid, p.left, &mut evals)?;
        let r = panel(mid, p.hi, p.right, &mut evals)?;
        panels[i] = l;
        panels.insert(i + 1, r);
    }
}

#[derive(Clone, Copy)]
struct Panel<T> {
    lo: f64,
    hi: f64,
    left: T,
    right: T,
    fine: T,
    err: f64,
}

/// Adaptive integration over consecutive breakpoints; the error budget is
/// shared across pieces.
pub fn adaptive_pieces<T: Integrand>(
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
    f: &mut impl FnMut(f64) -> T,
) -> Result<QuadResult<T>> {
    // A coarse pass fixes the scale, so a piece that contributes nothing is
    // held to the absolute share of the total rather than to its own size.
    let g = GaussLegendre::g16();
    let scale: f64 = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| g.integrate(w[0], w[1], |x| f(x)).magnitude())
        .sum();
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let abs_tol = abs_tol.max(rel_tol * scale / pieces);
    let mut value = T::zero();
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = adaptive(w[0], w[1], abs_tol, rel_tol, max_depth, f)?;
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

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Multiplies the running sum by `f`.
    pub fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let g = GaussLegendre::new(16);
        let v: f64 = g.integrate(0.0, 2.0, |x| x.powi(31));
        assert!((v - 2f64.powi(32) / 32.0).abs() / v < 1e-14);
        let wsum: f64 = g.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // Integral of exp(-x^2 / (2 s^2)) over R is s sqrt(2 pi).
        let s = 1e-3;
        let mut f = |x: f64| (-(x * x) / (2.0 * s * s)).exp();
        let r = adaptive(-1.0, 1.0, 0.0, 1e-12, 40, &mut f).unwrap();
        let want = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.value - want).abs() / want < 1e-11);
    }

    #[test]
    fn adaptive_complex() {
        let mut f = |x: f64| Complex64::new(0.0, x).exp();
        let r = adaptive(0.0, 10.0, 0.0, 1e-13, 30, &mut f).unwrap();
        let want = (Complex64::new(0.0, 10.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((r.value - want).norm() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_lost_bits() {
        let mut k = KahanSum::new();
        k.add(1.0);
        k.add(1e100);
        k.add(1.0);
        k.add(-1e100);
        assert_eq!(k.value(), 2.0);
    }
}
