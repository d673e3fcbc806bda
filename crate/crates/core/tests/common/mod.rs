#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;
use talbot_core::GaussianTest;

/// Composite Simpson with `2 * half_panels` intervals.
pub fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, half_panels: usize) -> Complex64 {
    if b <= a {
        return Complex64::default();
    }
    let n = 2 * half_panels;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * (h / 3.0)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// `Σ_{|n| ≤ n_max} e^{2πinξ − iπn²ζ}`, straight from the definition.
pub fn v_series(xi: f64, zeta: f64, n_max: i64) -> Complex64 {
    (-n_max..=n_max)
        .map(|n| {
            let nf = n as f64;
            cis(2.0 * PI * nf * xi - PI * nf * nf * zeta)
        })
        .sum()
}

/// `e^{−2πir²ζ} Σ_{|n| ≤ n_max} e^{2πir²√(1−(n/r)²)ζ} e^{2πinξ}` with the
/// decaying branch for `|n| > r`, for `ζ ≥ 0`.
pub fn w_series(xi: f64, zeta: f64, r: f64, n_max: i64) -> Complex64 {
    (-n_max..=n_max)
        .map(|n| {
            let x = n as f64 / r;
            let carrier = cis(2.0 * PI * n as f64 * xi - 2.0 * PI * r * r * zeta);
            if x.abs() <= 1.0 {
                carrier * cis(2.0 * PI * r * r * (1.0 - x * x).sqrt() * zeta)
            } else {
                carrier * (-2.0 * PI * r * r * (x * x - 1.0).sqrt() * zeta).exp()
            }
        })
        .sum()
}

pub enum Series {
    V,
    W(f64),
}

impl Series {
    pub fn at(&self, xi: f64, zeta: f64, n_max: i64) -> Complex64 {
        match *self {
            Series::V => v_series(xi, zeta, n_max),
            Series::W(r) => w_series(xi, zeta, r, n_max),
        }
    }
}

const PANELS: usize = 1 << 19;

/// `∫_0^∞ φ(ζ) u(ξ, ζ) dζ`, or over the whole line with `u(ξ, |ζ|)`.
pub fn vertical_oracle(s: &Series, xi: f64, phi: &GaussianTest, n_max: i64, whole: bool) -> Complex64 {
    let (lo, hi) = (phi.center - 9.0 * phi.width, phi.center + 9.0 * phi.width);
    let upper = simpson(|z| phi.eval(z) * s.at(xi, z, n_max), lo.max(0.0), hi, PANELS);
    if !whole {
        return upper;
    }
    upper + simpson(|z| phi.eval(z) * s.at(xi, -z, n_max), lo, hi.min(0.0), PANELS)
}

/// `∫ φ(ξ) u(ξ, mξ − k) dξ` over the part of the line with `ζ > 0`, or the
/// whole line with `u(ξ, |mξ − k|)`.
pub fn oblique_oracle(s: &Series, m: f64, k: f64, phi: &GaussianTest, n_max: i64, whole: bool) -> Complex64 {
    let (lo, hi) = (phi.center - 9.0 * phi.width, phi.center + 9.0 * phi.width);
    let edge = k / m;
    let f = |x: f64| phi.eval(x) * s.at(x, (m * x - k).abs(), n_max);
    let (above, below) =
        if m > 0.0 { ((edge.max(lo), hi), (lo, edge.min(hi))) } else { ((lo, edge.min(hi)), (edge.max(lo), hi)) };
    let upper = simpson(f, above.0, above.1, PANELS);
    if !whole {
        return upper;
    }
    upper + simpson(f, below.0, below.1, PANELS)
}
