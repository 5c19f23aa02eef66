//! Integer and rational number-theory primitives: divisor sums, the prime
//! counter `omega*`, the weight `eps_B`, and Kloosterman sums.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gcd(a, b, c)`; `gcd3(a, b, 0) = gcd(a, b)`.
pub fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    gcd(gcd(a, b), c)
}

/// Divisors of `n >= 1` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors of zero");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Distinct prime factors of `n >= 1`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `omega*(n) = sum_{p | n} omega*(p)` with `omega*(2) = 3/2`, `omega*(p) = 1`
/// for odd `p`, and `omega*(1) = 0`.
pub fn omega_star(n: u64) -> Ratio<i64> {
    assert!(n >= 1, "omega_star of zero");
    prime_factors(n)
        .into_iter()
        .map(|p| if p == 2 { Ratio::new(3, 2) } else { Ratio::from_integer(1) })
        .sum()
}

/// `sigma_s(n) = sum_{d | n} d^s`.
pub fn sigma(s: f64, n: u64) -> f64 {
    divisors(n).into_iter().map(|d| (d as f64).powf(s)).sum()
}

/// Divisor sum restricted to `d <= q`.
pub fn sigma_truncated(s: f64, n: u64, q: f64) -> f64 {
    divisors(n)
        .into_iter()
        .filter(|&d| d as f64 <= q)
        .map(|d| (d as f64).powf(s))
        .sum()
}

/// `sigma_s(n)` for complex `s`.
pub fn sigma_complex(s: Complex64, n: u64) -> Complex64 {
    divisors(n)
        .into_iter()
        .map(|d| (s * (d as f64).ln()).exp())
        .sum()
}

/// `eps_B(x) = exp(B log(x + 3) / log log(2x + 3))`.
pub fn epsilon_weight(b: f64, x: f64) -> f64 {
    (b * (x + 3.0).ln() / (2.0 * x + 3.0).ln().ln()).exp()
}

/// Inverse of `a` modulo `c`, if it exists.
pub fn mod_inverse(a: u64, c: u64) -> Option<u64> {
    if c == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (c as i128, (a % c) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(c as i128) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KloostermanValue {
    pub value: f64,
    pub modulus: u64,
    /// `|Im|` of the accumulated complex sum before it was discarded.
    pub residual_imag: f64,
}

/// Residues coprime to `c` with their inverses, in ascending order of `x`.
pub struct UnitTable {
    pub modulus: u64,
    pub units: Vec<u64>,
    pub inverses: Vec<u64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl UnitTable {
    pub fn new(c: u64) -> Self {
        assert!(c >= 1);
        let mut units = Vec::new();
        let mut inverses = Vec::new();
        for x in 0..c {
            if gcd(x, c) == 1 {
                units.push(x);
                inverses.push(mod_inverse(x, c).expect("unit has an inverse"));
            }
        }
        let cf = c as f64;
        let cos = (0..c).map(|j| (TAU * j as f64 / cf).cos()).collect();
        let sin = (0..c).map(|j| (TAU * j as f64 / cf).sin()).collect();
        UnitTable {
            modulus: c,
            units,
            inverses,
            cos,
            sin,
        }
    }

    /// `K(m, n, c)` with summands visited in ascending `x`.
    ///
    /// Arguments are reduced mod `c` and sorted so that `K(m, n, c)` and
    /// `K(n, m, c)` perform the identical floating-point computation.
    pub fn sum(&self, m: u64, n: u64) -> KloostermanValue {
        let c = self.modulus;
        let (a, b) = canonical(m % c, n % c);
        let mut re = 0.0;
        let mut im = 0.0;
        for (&x, &xi) in self.units.iter().zip(&self.inverses) {
            let idx = ((a * x + b * xi) % c) as usize;
            re += self.cos[idx];
            im += self.sin[idx];
        }
        KloostermanValue {
            value: re,
            modulus: c,
            residual_imag: im.abs(),
        }
    }

    /// Sums for every pair `1 <= m <= n <= mn_max`, in row-major order of
    /// `(m, n)`. Each entry is bit-identical to [`UnitTable::sum`]; pairs
    /// with the same residues mod `c` reuse the previous result.
    pub fn sum_all_pairs(&self, mn_max: u64, mut visit: impl FnMut(u64, u64, KloostermanValue)) {
        let c = self.modulus;
        let mut memo: std::collections::HashMap<(u64, u64), KloostermanValue> = Default::default();
        for m in 1..=mn_max {
            for n in m..=mn_max {
                let key = canonical(m % c, n % c);
                let v = *memo.entry(key).or_insert_with(|| self.sum(key.0, key.1));
                visit(m, n, v);
            }
        }
    }
}

fn canonical(a: u64, b: u64) -> (u64, u64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// `K(m, n, c) = sum_{x mod c, (x, c) = 1} e((m x + n xbar) / c)`.
pub fn kloosterman(m: u64, n: u64, c: u64) -> Result<KloostermanValue> {
    if c == 0 {
        return Err(Error::domain("Kloosterman modulus must be at least 1"));
    }
    Ok(UnitTable::new(c).sum(m, n))
}

/// Right-hand side `2^{omega*(c/d)} sqrt(c d)` of the Kloosterman bound,
/// `d = gcd(m, n, c)`.
pub fn kloosterman_bound(m: u64, n: u64, c: u64) -> f64 {
    let d = gcd3(m, n, c);
    let w = omega_star(c / d);
    let w = *w.numer() as f64 / *w.denom() as f64;
    2f64.powf(w) * ((c * d) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct complex-exponential summation, independent of the tables.
    fn oracle(m: u64, n: u64, c: u64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..c {
            if gcd(x, c) != 1 {
                continue;
            }
            let xi = (1..=c).find(|&y| (x * y) % c == 1 % c).unwrap_or(0);
            let phase = ((m * x + n * xi) % c) as f64 / c as f64;
            s += Complex64::from_polar(1.0, TAU * phase);
        }
        s
    }

    #[test]
    fn small_values() {
        assert_eq!(kloosterman(1, 1, 1).unwrap().value, 1.0);
        assert!((kloosterman(1, 1, 3).unwrap().value + 1.0).abs() < 1e-15);
        let k = kloosterman(4, 7, 10).unwrap();
        assert!((k.value - oracle(4, 7, 10).re).abs() < 1e-13);
        assert!(k.value.abs() <= kloosterman_bound(4, 7, 10));
        assert!(kloosterman(1, 1, 0).is_err());
    }

    #[test]
    fn omega_star_values() {
        assert_eq!(omega_star(1), Ratio::from_integer(0));
        assert_eq!(omega_star(2), Ratio::new(3, 2));
        assert_eq!(omega_star(12), Ratio::new(5, 2));
        assert_eq!(omega_star(15), Ratio::from_integer(2));
    }

    #[test]
    fn divisor_sums() {
        assert_eq!(sigma(0.0, 6), 4.0);
        assert!((sigma(0.5, 4) - (1.0 + 2f64.sqrt() + 2.0)).abs() < 1e-15);
        assert_eq!(sigma_truncated(0.5, 4, 1.5), 1.0);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(gcd3(4, 6, 8), 2);
        assert_eq!(gcd3(12, 18, 0), 6);
    }

    #[test]
    fn epsilon_weight_values() {
        assert_eq!(epsilon_weight(0.0, 17.0), 1.0);
        let want = (3f64.ln() / 3f64.ln().ln()).exp();
        assert!((epsilon_weight(1.0, 0.0) - want).abs() < 1e-12 * want);
        // Decreasing up to its minimum near x = 5.69, increasing after.
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.25).collect();
        for w in grid.windows(2) {
            let (a, b) = (epsilon_weight(1.0, w[0]), epsilon_weight(1.0, w[1]));
            if w[1] <= 5.5 {
                assert!(b < a, "not decreasing at {}", w[1]);
            } else if w[0] >= 6.0 {
                assert!(b > a, "not increasing at {}", w[1]);
            }
        }
    }

    #[test]
    fn batch_is_bit_identical_to_single_calls() {
        for c in [1, 2, 7, 12, 30, 97] {
            let t = UnitTable::new(c);
            t.sum_all_pairs(15, |m, n, v| {
                let single = kloosterman(m, n, c).unwrap();
                assert_eq!(v.value.to_bits(), single.value.to_bits(), "({m},{n},{c})");
                assert_eq!(v.residual_imag.to_bits(), single.residual_imag.to_bits());
            });
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_real(m in 0u64..200, n in 0u64..200, c in 1u64..300) {
            let a = kloosterman(m, n, c).unwrap();
            let b = kloosterman(n, m, c).unwrap();
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert!(a.residual_imag <= 1e-12 * a.value.abs().max(1.0));
            prop_assert!(a.value.abs() <= c as f64 + 1e-9);
        }

        #[test]
        fn agrees_with_oracle(m in 0u64..50, n in 0u64..50, c in 1u64..120) {
            let a = kloosterman(m, n, c).unwrap().value;
            let o = oracle(m, n, c);
            prop_assert!((a - o.re).abs() < 1e-11);
            prop_assert!(o.im.abs() < 1e-11);
        }

        #[test]
        fn periodic_in_arguments(m in 0u64..50, n in 0u64..50, c in 1u64..80, s in 1u64..4) {
            let a = kloosterman(m, n, c).unwrap().value;
            let b = kloosterman(m + s * c, n + 2 * s * c, c).unwrap().value;
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn truncated_sigma_saturates(n in 1u64..500, s in -2.0f64..2.0) {
            prop_assert_eq!(sigma_truncated(s, n, n as f64), sigma(s, n));
        }
    }
}
