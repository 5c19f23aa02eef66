//! Double-double arithmetic (about 106 significant bits).
//!
//! Used by the lattice evaluator, whose terms must be summed to an absolute
//! accuracy far below double precision while staying fast enough for
//! hundreds of thousands of `(c, d)` pairs per point.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };
    pub const LN2: Dd = Dd {
        hi: 0.6931471805599453,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    #[inline]
    pub fn sum_f64(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod_f64(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let (hi, lo) = quick_two_sum(p, e + 2.0 * self.hi * self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    /// Multiplies by `2^e` exactly.
    #[inline]
    pub fn ldexp(self, e: i32) -> Dd {
        let s = 2f64.powi(e);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// Nearest integer, ties away from zero on the leading word.
    pub fn round(self) -> Dd {
        let r = self.hi.round();
        if r == self.hi {
            // hi is integral; the tail decides.
            let rl = self.lo.round();
            let (hi, lo) = quick_two_sum(r, rl);
            Dd { hi, lo }
        } else if (r - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // Exact half in hi; lo breaks the tie.
            let r = if (self.lo > 0.0) == (r > self.hi) {
                r
            } else {
                self.hi + (self.hi - r)
            };
            Dd::from_f64(r)
        } else {
            Dd::from_f64(r)
        }
    }

    /// `exp(self)`. Accurate to a few units in the last double-double place
    /// for arguments of modest size.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = (self - Dd::LN2.mul_f64(k)).ldexp(-8);
        // Taylor series of exp(r) - 1 with |r| < 2^-9.
        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        while term.hi.abs() > 1e-36 {
            term = (term * r) / Dd::from_f64(i);
            sum = sum + term;
            i += 1.0;
        }
        // (1 + s)^2 - 1 = s (2 + s), applied 8 times.
        for _ in 0..8 {
            sum = sum * sum.add_f64(2.0);
        }
        (sum.add_f64(1.0)).ldexp(k as i32)
    }

    /// `(sin(2 pi t), cos(2 pi t))`.
    pub fn sincos_2pi(self) -> (Dd, Dd) {
        let t = self - self.round();
        // Quarter-turn reduction: t = j/4 + r with |r| <= 1/8.
        let j4 = t.mul_f64(4.0).round();
        let j = j4.hi as i64;
        let r = t - j4.mul_f64(0.25);
        let a = Dd::TWO_PI * r;
        let (s, c) = sincos_taylor(a);
        match j.rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

/// Taylor sine and cosine for `|a| <= pi/4`.
fn sincos_taylor(a: Dd) -> (Dd, Dd) {
    let a2 = a.sqr();
    let mut s = a;
    let mut c = Dd::ONE;
    let mut ts = a;
    let mut tc = Dd::ONE;
    let mut n = 1.0;
    loop {
        ts = -(ts * a2) / Dd::from_f64((n + 1.0) * (n + 2.0));
        tc = -(tc * a2) / Dd::from_f64(n * (n + 1.0));
        s = s + ts;
        c = c + tc;
        n += 2.0;
        if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
            break;
        }
    }
    (s, c)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: DdComplex = DdComplex {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Self {
        DdComplex { re, im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    pub fn scale(self, s: Dd) -> Self {
        DdComplex {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn powu(self, mut e: u32) -> Self {
        let mut base = self;
        let mut acc = DdComplex::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl Add for DdComplex {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        DdComplex {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        DdComplex {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath at 300 bits, split hi + lo.
    #[test]
    fn exp_of_one() {
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, 2.718281828459045);
        assert!((e.lo - 1.4456468917292502e-16).abs() < 1e-30);
    }

    #[test]
    fn exp_negative() {
        let e = Dd::from_f64(-10.5).exp();
        assert_eq!(e.hi, 2.7536449349747158e-05);
        assert!((e.lo - (-2.499189668339766e-22)).abs() < 1e-35);
    }

    #[test]
    fn sincos_exact_points() {
        let (s, c) = Dd::from_f64(0.25).sincos_2pi();
        assert!((s - Dd::ONE).hi.abs() < 1e-31);
        assert!(c.hi.abs() < 1e-31);
        let (s, c) = Dd::from_f64(-3.5).sincos_2pi();
        assert!(s.hi.abs() < 1e-31);
        assert!((c + Dd::ONE).hi.abs() < 1e-31);
    }

    #[test]
    fn sincos_reference() {
        let (s, c) = Dd::from_f64(0.1).sincos_2pi();
        assert_eq!(s.hi, 0.5877852522924731);
        assert!((s.lo - 2.0282698052150037e-17).abs() < 1e-31);
        assert_eq!(c.hi, 0.8090169943749475);
        assert!((c.lo - (-4.766175266906226e-17)).abs() < 1e-31);
    }

    #[test]
    fn division_roundtrip() {
        let a = Dd::new(3.0, 1e-17);
        let b = Dd::new(7.0, -3e-18);
        let q = a / b;
        let back = q * b - a;
        assert!(back.hi.abs() < 1e-31);
    }

    #[test]
    fn complex_power_matches_repeated_product() {
        let z = DdComplex::new(Dd::from_f64(0.3), Dd::from_f64(1.1));
        let mut p = DdComplex::ONE;
        for _ in 0..13 {
            p = p * z;
        }
        let q = z.powu(13);
        assert!((p.re - q.re).hi.abs() < 1e-29);
        assert!((p.im - q.im).hi.abs() < 1e-29);
    }
}
