//! Generalized quadratic Gauss sums and the revival weights Γ(p, q; m).
//!
//! Every exponent is reduced modulo the (common) denominator in exact
//! integer arithmetic before a phase is formed, so magnitude identities such
//! as `|G(a, b, c)| = √c` (c odd) hold to rounding of a single `sin_cos` per
//! term.

use crate::error::{Error, Result};
use crate::numeric::turn;
use num_complex::Complex64;
use num_integer::Integer;
use std::fmt;
use std::str::FromStr;

/// Largest modulus accepted by the direct summations.
pub const MAX_MODULUS: u64 = 1_000_000;

/// A reduced fraction `p/q` with `q ≥ 1` and `gcd(|p|, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    p: i64,
    q: u64,
}

impl Rational {
    /// Builds `p/q` in lowest terms. The sign is carried by `p`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("rational with zero denominator"));
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Ok(Rational { p, q: q as u64 })
    }

    /// Accepts `p/q` only if it is already reduced.
    pub fn coprime(p: i64, q: u64) -> Result<Self> {
        check_coprime(p, q)?;
        Ok(Rational { p, q })
    }

    pub fn integer(p: i64) -> Self {
        Rational { p, q: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.p
    }

    pub fn denom(&self) -> u64 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `self + k` for an integer `k`.
    pub fn add_integer(&self, k: i64) -> Self {
        Rational { p: self.p + k * self.q as i64, q: self.q }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse '{s}' as a rational p/q"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                Rational::new(p, q)
            }
            None => Ok(Rational::integer(s.parse().map_err(|_| bad())?)),
        }
    }
}

/// A Gauss-sum value together with the modulus it was summed over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSumValue {
    pub value: Complex64,
    pub modulus_c: u64,
}

impl GaussSumValue {
    /// Whether `|value|` is 0 or `√d` for a divisor `d` of the modulus.
    pub fn is_sqrt_divisor(&self, tol: f64) -> bool {
        let m = self.value.norm();
        if m < tol {
            return true;
        }
        (1..=self.modulus_c).filter(|d| self.modulus_c.is_multiple_of(*d)).any(|d| (m - (d as f64).sqrt()).abs() < tol)
    }
}

fn check_modulus(c: u64) -> Result<()> {
    if c == 0 || c > MAX_MODULUS {
        return Err(Error::ModulusOutOfRange(c));
    }
    Ok(())
}

fn check_coprime(p: i64, q: u64) -> Result<()> {
    check_modulus(q)?;
    if (p.unsigned_abs()).gcd(&q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok(())
}

/// `G(a, b, c) = Σ_{r=0}^{c-1} exp(2πi (a r² + b r) / c)` by direct summation.
pub fn gauss_sum(a: i64, b: i64, c: u64) -> Result<Complex64> {
    check_modulus(c)?;
    let ci = c as i128;
    let a = (a as i128).rem_euclid(ci);
    let b = (b as i128).rem_euclid(ci);
    let mut acc = crate::numeric::CompensatedSum::new();
    for r in 0..ci {
        acc.add(turn((a * r % ci * r + b * r) % ci, c));
    }
    Ok(acc.value())
}

/// `Γ(p, q; m)` summed directly over a common denominator `2q`.
pub fn gamma_sum(p: i64, q: u64, m: i64) -> Result<Complex64> {
    check_coprime(p, q)?;
    let den = 2 * q as i128;
    let parity = p.rem_euclid(2) as i128;
    // exponent numerator over 2q: (q·(p mod 2) + 2m)·r − p·r²
    let lin = (q as i128 * parity + 2 * m as i128).rem_euclid(den);
    let quad = (p as i128).rem_euclid(den);
    let mut acc = crate::numeric::CompensatedSum::new();
    for r in 0..q as i128 {
        let e = (lin * r - quad * (r * r % den)).rem_euclid(den);
        acc.add(turn(e, 2 * q));
    }
    Ok(acc.value())
}

/// `Γ(p, q; m)` through the reductions to classical Gauss sums with known
/// closed forms; independent of [`gamma_sum`].
pub fn gamma_via_cases(p: i64, q: u64, m: i64) -> Result<Complex64> {
    check_coprime(p, q)?;
    let q_i = q as i64;
    if p.rem_euclid(2) == 0 {
        // q is odd here; Γ = G(−p/2, m, q)
        return Ok(gauss_odd_closed(-(p / 2), m, q));
    }
    let b = 2 * m + q_i;
    if q % 2 == 1 {
        // ½ G(−p, b, 2q) = ½ G(−2p, b, q) · G(−pq, b, 2)
        let odd = gauss_odd_closed(-2 * p, b, q);
        let two = turn(0, 2) + turn((-(p as i128) * q as i128 + b as i128).rem_euclid(2), 2);
        return Ok(0.5 * odd * two);
    }
    // q even: b = 2b', complete the square modulo 2q with p⁻¹ mod 2q
    let modulus = 2 * q;
    let half_b = (b / 2) as i128;
    let p_inv = mod_inverse(p, modulus).expect("p is invertible modulo 2q when gcd(p, q) = 1 and p is odd");
    let shift = turn(p_inv as i128 * (half_b * half_b).rem_euclid(modulus as i128), modulus);
    Ok(0.5 * shift * gauss_zero_mult4(-p, modulus))
}

/// Closed form of `G(a, b, c)` for odd `c` and `gcd(a, c) = 1`:
/// `exp(−2πi b² (4a)⁻¹ / c) · (a/c) · ε_c · √c`.
pub fn gauss_odd_closed(a: i64, b: i64, c: u64) -> Complex64 {
    assert!(c % 2 == 1, "modulus must be odd");
    if c == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let inv4a = mod_inverse(4 * a, c).expect("gcd(a, c) = 1");
    let b = (b as i128).rem_euclid(c as i128);
    let shift = turn(-(b * b % c as i128) * inv4a as i128, c);
    let eps = if c % 4 == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    let sign = jacobi(a, c) as f64;
    shift * eps * sign * (c as f64).sqrt()
}

/// Closed form of `G(a, 0, c)` for `4 | c`, `a` odd:
/// `(c/|a|)·(1 + i^|a|)·√c`, conjugated when `a < 0`.
pub fn gauss_zero_mult4(a: i64, c: u64) -> Complex64 {
    assert!(c.is_multiple_of(4) && a % 2 != 0);
    let abs_a = a.unsigned_abs();
    let sym = jacobi(c as i64, abs_a) as f64;
    let i_pow = turn(abs_a as i128, 4);
    let g = sym * (Complex64::new(1.0, 0.0) + i_pow) * (c as f64).sqrt();
    if a < 0 {
        g.conj()
    } else {
        g
    }
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut n = n as i128;
    let mut a = (a as i128).rem_euclid(n);
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Inverse of `a` modulo `m`, if it exists, in `[0, m)`.
pub fn mod_inverse(a: i64, m: u64) -> Option<i64> {
    let m = m as i128;
    let a = (a as i128).rem_euclid(m);
    let e = a.extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m) as i64)
}
