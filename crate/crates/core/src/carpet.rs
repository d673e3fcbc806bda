//! Talbot carpets and the revival combs that appear at rational times.

use crate::error::{Error, Result};
use crate::fields::{helmholtz_coeff, schrodinger_coeff_rational, validate_r, Field};
use crate::gauss::{gamma_sum, Rational};
use crate::numeric::fmt17;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// `v(·, p/q) = Σ_m weight_m δ(· − location_m)` on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaComb {
    pub p: i64,
    pub q: u64,
    /// `1/2` when `p` is odd, otherwise `0`.
    pub shift: f64,
    /// `Γ(p, q; m) / q` for `m = 0..q`.
    pub weights: Vec<Complex64>,
}

impl DeltaComb {
    /// `shift + m/q` reduced to `[0, 1)`.
    pub fn location(&self, m: u64) -> f64 {
        let x = self.shift + m as f64 / self.q as f64;
        if x >= 1.0 {
            x - 1.0
        } else {
            x
        }
    }

    pub fn locations(&self) -> Vec<f64> {
        (0..self.q).map(|m| self.location(m)).collect()
    }

    /// `Σ_m weight_m`, which equals the zero-mode coefficient 1.
    pub fn mass(&self) -> Complex64 {
        self.weights.iter().sum()
    }
}

/// The comb at `ζ = p/q`.
pub fn revival_comb(p: i64, q: u64) -> Result<DeltaComb> {
    Rational::coprime(p, q)?;
    let weights = (0..q as i64).map(|m| Ok(gamma_sum(p, q, m)? / q as f64)).collect::<Result<Vec<_>>>()?;
    let shift = if p.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
    Ok(DeltaComb { p, q, shift, weights })
}

/// `g_σ(x) = Σ_n e^{−πσ²n²} e^{2πinx} = σ⁻¹ Σ_k e^{−π(x−k)²/σ²}`, summed in
/// the spatial form.
pub fn periodized_gaussian(x: f64, sigma: f64) -> f64 {
    let x = x - x.floor();
    let reach = (1.0 + 7.0 * sigma).ceil() as i64;
    let mut s = 0.0;
    for k in -reach..=reach + 1 {
        let d = (x - k as f64) / sigma;
        s += (-PI * d * d).exp();
    }
    s / sigma
}

/// Outcome of [`smoothed_comb_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombReport {
    pub p: i64,
    pub q: u64,
    pub sigma: f64,
    pub n_max: u64,
    pub grid_points: usize,
    /// `max_j |A(ξ_j) − B(ξ_j)|`.
    pub max_abs_diff: f64,
    /// `|A(location_m)| / g_σ(0)` per tooth.
    pub peak_ratios: Vec<f64>,
}

impl CombReport {
    /// Largest relative deviation of the peak ratios from `1/√q`.
    pub fn worst_peak_deviation(&self) -> f64 {
        let target = 1.0 / (self.q as f64).sqrt();
        self.peak_ratios.iter().map(|r| (r / target - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Compares the mollified truncated field
/// `A(ξ) = Σ_{|n| ≤ n_max} e^{−πσ²n²} e^{2πinξ − iπn²p/q}` with the mollified
/// comb `B(ξ) = Σ_m weight_m g_σ(ξ − location_m)` on a uniform grid that
/// contains every tooth location.
pub fn smoothed_comb_check(p: i64, q: u64, sigma: f64, n_max: u64) -> Result<CombReport> {
    let zeta = Rational::coprime(p, q)?;
    if !(sigma > 0.0) || sigma > 1.0 / (8.0 * q as f64) {
        return Err(Error::invalid(format!(
            "sigma must lie in (0, 1/(8q)] = (0, {}], got {sigma}",
            1.0 / (8.0 * q as f64)
        )));
    }
    if (n_max as f64) < 10.0 / sigma {
        return Err(Error::invalid(format!("n_max must be at least 10/sigma = {}, got {n_max}", 10.0 / sigma)));
    }
    let comb = revival_comb(p, q)?;
    let len = 2 * q as usize * 512;
    let coeffs = (-(n_max as i64)..=n_max as i64)
        .map(|n| (n, schrodinger_coeff_rational(n, zeta) * (-PI * sigma * sigma * (n * n) as f64).exp()));
    let a = synthesize(coeffs, len);
    let locs = comb.locations();
    let b: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 / len as f64;
            comb.weights.iter().zip(&locs).map(|(w, l)| w * periodized_gaussian(x - l, sigma)).sum()
        })
        .collect();
    let max_abs_diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let peak = periodized_gaussian(0.0, sigma);
    let step = len / (2 * q as usize);
    let peak_ratios = (0..q)
        .map(|m| {
            // location_m = (q·shift·2 + 2m) / (2q) of the way round the grid
            let idx = ((2.0 * comb.shift * q as f64) as usize + 2 * m as usize) % (2 * q as usize) * step;
            a[idx].norm() / peak
        })
        .collect();
    Ok(CombReport { p, q, sigma, n_max, grid_points: len, max_abs_diff, peak_ratios })
}

/// `Σ_n c_n e^{2πinj/len}` for `j = 0..len`, folding frequencies mod `len`.
fn synthesize<I: IntoIterator<Item = (i64, Complex64)>>(coeffs: I, len: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); len];
    for (n, c) in coeffs {
        buf[n.rem_euclid(len as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    buf
}

/// Parameters of a carpet rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderParams {
    pub width: usize,
    pub height: usize,
    pub n_max: u64,
    pub sigma: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams { width: 1024, height: 1024, n_max: 4096, sigma: 0.005 }
    }
}

/// `|u|²` on a `width × height` grid over `[0, 1) × [0, 2)`, row-major with
/// row `i` at `ζ = 2i / height`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl IntensityGrid {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn zeta(&self, i: usize) -> f64 {
        2.0 * i as f64 / self.height as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn check_render(field: Field, params: &RenderParams) -> Result<()> {
    if params.width == 0 || params.height == 0 {
        return Err(Error::invalid("carpet dimensions must be positive"));
    }
    if !(params.sigma >= 0.0) || !params.sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be non-negative, got {}", params.sigma)));
    }
    match field {
        Field::Schrodinger if params.sigma == 0.0 => {
            Err(Error::invalid("the Schrödinger carpet needs sigma > 0; the bare series has no pointwise values"))
        }
        Field::Helmholtz { r } => validate_r(r),
        _ => Ok(()),
    }
}

fn row_intensity(field: Field, zeta: Rational, params: &RenderParams) -> Vec<f64> {
    let n = params.n_max as i64;
    let s2 = params.sigma * params.sigma;
    let coeffs = (-n..=n).map(|k| {
        let c = match field {
            Field::Schrodinger => schrodinger_coeff_rational(k, zeta),
            Field::Helmholtz { r } => helmholtz_coeff(k, zeta.to_f64(), r),
        };
        (k, c * (-PI * s2 * (k * k) as f64).exp())
    });
    synthesize(coeffs, params.width).iter().map(|z| z.norm_sqr()).collect()
}

/// One carpet row at an arbitrary rational time.
pub fn render_row(field: Field, zeta: Rational, params: &RenderParams) -> Result<Vec<f64>> {
    check_render(field, params)?;
    Ok(row_intensity(field, zeta, params))
}

/// Renders `|Σ_{|n| ≤ n_max} c_n(ζ) e^{−πσ²n²} e^{2πinξ}|²`.
pub fn render(field: Field, params: &RenderParams) -> Result<IntensityGrid> {
    check_render(field, params)?;
    let rows: Vec<Vec<f64>> = (0..params.height)
        .into_par_iter()
        .map(|i| {
            let zeta = Rational::new(2 * i as i64, params.height as i64).expect("positive height");
            row_intensity(field, zeta, params)
        })
        .collect();
    Ok(IntensityGrid { width: params.width, height: params.height, values: rows.concat() })
}

/// Binary 16-bit PGM, values scaled linearly from `[0, max]` to `[0, 65535]`.
pub fn write_pgm16<W: Write>(grid: &IntensityGrid, mut out: W) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n65535\n", grid.width, grid.height)?;
    let max = grid.max();
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut bytes = Vec::with_capacity(2 * grid.values.len());
    for &v in &grid.values {
        let level = (v * scale).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    out.write_all(&bytes)
}

/// `xi,intensity` for one row.
pub fn write_row_csv<W: Write>(grid: &IntensityGrid, row: usize, mut out: W) -> std::io::Result<()> {
    writeln!(out, "xi,intensity")?;
    for (j, v) in grid.row(row).iter().enumerate() {
        writeln!(out, "{},{}", fmt17(j as f64 / grid.width as f64), fmt17(*v))?;
    }
    Ok(())
}
