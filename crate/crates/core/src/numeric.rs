//! Small numerical helpers shared by the field and pairing code.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `exp(2πi · num / den)` with the fraction reduced exactly before any
/// floating-point work. Multiples of a quarter turn are returned exactly.
pub fn turn(num: i128, den: u64) -> Complex64 {
    debug_assert!(den > 0);
    let d = den as i128;
    let k = num.rem_euclid(d);
    if (4 * k) % d == 0 {
        return match (4 * k) / d {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // centre the residue so the angle stays in [-π, π]
    let k = if 2 * k > d { k - d } else { k };
    let (s, c) = (TAU * (k as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2πi · x)` for real `x`, reducing `x` modulo 1 first.
pub fn turn_f64(x: f64) -> Complex64 {
    let mut f = x - x.round();
    if f == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if f == 0.5 || f == -0.5 {
        return Complex64::new(-1.0, 0.0);
    }
    if f == 0.25 {
        return Complex64::new(0.0, 1.0);
    }
    if f == -0.25 {
        return Complex64::new(0.0, -1.0);
    }
    if f.abs() > 0.5 {
        f -= f.signum();
    }
    let (s, c) = (TAU * f).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2πi · n · ξ)` with the product reduced modulo 1.
pub fn fourier_mode(n: i64, xi: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // split ξ so that n·ξ keeps its fractional digits for large n
    let whole = xi.floor();
    let frac = xi - whole;
    turn_f64(n as f64 * frac)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl std::iter::FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// Neumaier sum of real values.
pub fn sum_f64<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in iter {
        neumaier(&mut s, &mut c, x);
    }
    s + c
}

/// Format with 17 significant digits, the precision used by every
/// numeric field in CSV and JSON outputs.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
