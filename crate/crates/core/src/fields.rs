//! Fourier coefficients and truncated evaluations of the Schrödinger field
//! `v(ξ, ζ) = Σ e^{2πinξ − iπn²ζ}` and the adapted Helmholtz field
//! `w_r(ξ, ζ) = e^{−2πir²ζ} Σ e^{2πir²√(1−(n/r)²)ζ} e^{2πinξ}`, the split of
//! `w_r` into low, mid and high frequency bands, and the pointwise bounds
//! satisfied by the low and high bands.

use crate::error::{Error, Result};
use crate::gauss::Rational;
use crate::numeric::{fourier_mode, turn, turn_f64, CompensatedSum};
use crate::quad::{integrate, QuadOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Exponent below which a decaying coefficient is treated as zero
/// (`e^{−690} ≈ 1e−300`).
pub const UNDERFLOW_EXPONENT: f64 = -690.0;

/// `r = d/λ` together with the truncation used for pointwise evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelmholtzParams {
    pub r: f64,
    pub n_max: u64,
}

impl HelmholtzParams {
    pub fn new(r: f64, n_max: u64) -> Result<Self> {
        validate_r(r)?;
        if n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        Ok(HelmholtzParams { r, n_max })
    }
}

pub(crate) fn validate_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("r must be positive and finite, got {r}")))
    }
}

/// The cutoff `μ(r) = max(1, ⌊scale · r^alpha⌋)` between the low and mid bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuSchedule {
    pub alpha: f64,
    pub scale: f64,
}

impl Default for MuSchedule {
    fn default() -> Self {
        MuSchedule { alpha: 0.2, scale: 1.0 }
    }
}

impl MuSchedule {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(Error::invalid(format!("mu exponent alpha must lie in (0, 1/4), got {alpha}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("mu scale must be positive, got {scale}")));
        }
        Ok(MuSchedule { alpha, scale })
    }

    pub fn mu(&self, r: f64) -> u64 {
        ((self.scale * r.powf(self.alpha)).floor() as u64).max(1)
    }
}

/// Which field a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    /// The free Schrödinger solution `v`.
    Schrodinger,
    /// The adapted Helmholtz solution `w_r`.
    Helmholtz { r: f64 },
}

impl Field {
    pub fn coeff(&self, n: i64, zeta: f64) -> Complex64 {
        match *self {
            Field::Schrodinger => schrodinger_coeff(n, zeta),
            Field::Helmholtz { r } => helmholtz_coeff(n, zeta, r),
        }
    }
}

/// The three frequency bands of `w_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    Mid,
    High,
}

/// Index sets `|n| ≤ μ`, `μ < |n| ≤ r + 1`, `|n| > r + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPartition {
    pub r: f64,
    pub mu: u64,
}

impl BandPartition {
    pub fn band_of(&self, n: i64) -> Band {
        let a = n.unsigned_abs();
        if a <= self.mu {
            Band::Low
        } else if a as f64 <= self.r + 1.0 {
            Band::Mid
        } else {
            Band::High
        }
    }

    /// Largest |n| in the mid band (0 if it is empty).
    pub fn mid_end(&self) -> u64 {
        ((self.r + 1.0).floor() as u64).max(self.mu)
    }
}

/// `e^{−iπn²ζ}`, with `n²ζ` reduced modulo 2.
pub fn schrodinger_coeff(n: i64, zeta: f64) -> Complex64 {
    let n2 = (n as i128 * n as i128) as f64;
    // split ζ = ⌊ζ⌋ + frac so the integer part contributes an exact sign
    let whole = zeta.floor();
    let frac = zeta - whole;
    let sign_turns = if (n as i128 * n as i128) % 2 == 1 && (whole as i64) % 2 != 0 { 0.5 } else { 0.0 };
    turn_f64(-0.5 * n2 * frac + sign_turns)
}

/// `e^{−iπn²p/q}` from the exact residue `n²p mod 2q`.
pub fn schrodinger_coeff_rational(n: i64, zeta: Rational) -> Complex64 {
    let den = 2 * zeta.denom() as i128;
    let n2 = (n as i128 * n as i128) % den;
    turn(-(n2 * zeta.numer() as i128).rem_euclid(den), 2 * zeta.denom())
}

/// `√(1 − (n/r)²)` for `|n| ≤ r`, evaluated without cancellation.
fn paraxial_root(n: i64, r: f64) -> f64 {
    let x = n.unsigned_abs() as f64 / r;
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// `r²√((n/r)² − 1) = r√((|n| − r)(|n| + r))` for `|n| > r`.
pub fn evanescent_rate(n: i64, r: f64) -> f64 {
    let a = n.unsigned_abs() as f64;
    r * ((a - r) * (a + r)).sqrt()
}

/// Coefficient of `e^{2πinξ}` in `w_r(·, ζ)`; the field is even in ζ.
pub fn helmholtz_coeff(n: i64, zeta: f64, r: f64) -> Complex64 {
    let z = zeta.abs();
    let a = n.unsigned_abs() as f64;
    if a <= r {
        // r²(√(1−(n/r)²) − 1) = −n² / (1 + √(1−(n/r)²))
        let s = paraxial_root(n, r);
        turn_f64(-z * a * a / (1.0 + s))
    } else {
        turn_f64(-r * r * z) * (-TAU * evanescent_rate(n, r) * z).exp()
    }
}

/// `helmholtz_coeff − schrodinger_coeff` for `|n| ≤ r`, evaluated through
/// the phase gap `Δ = −ζ n² x² / (2(1 + s)²)` so that small differences
/// keep full relative precision.
pub fn paraxial_gap(n: i64, zeta: f64, r: f64) -> Complex64 {
    let z = zeta.abs();
    let a = n.unsigned_abs() as f64;
    debug_assert!(a <= r);
    let s = paraxial_root(n, r);
    let x = a / r;
    let delta = -z * a * a * x * x / (2.0 * (1.0 + s) * (1.0 + s));
    // e^{2πiΔ} − 1 = 2i sin(πΔ) e^{iπΔ}
    let e = Complex64::new(0.0, 2.0 * (PI * delta).sin()) * turn_f64(0.5 * delta);
    schrodinger_coeff(n, z) * e
}

/// `Σ_{|n| ≤ n_max} c_n(ζ) e^{2πinξ}` for the given field. This is a
/// truncation of a distribution; it is meaningful pointwise only for
/// rendering and for exact finite identities.
pub fn eval_field(field: Field, xi: f64, zeta: f64, n_max: u64) -> Complex64 {
    let n_max = n_max as i64;
    (-n_max..=n_max).map(|n| field.coeff(n, zeta) * fourier_mode(n, xi)).collect::<CompensatedSum>().value()
}

/// Truncated `v` at a rational time, with exact phases.
pub fn eval_schrodinger_rational(xi: f64, zeta: Rational, n_max: u64) -> Complex64 {
    let n_max = n_max as i64;
    (-n_max..=n_max)
        .map(|n| schrodinger_coeff_rational(n, zeta) * fourier_mode(n, xi))
        .collect::<CompensatedSum>()
        .value()
}

/// Partial sum of `w_r` over one band. The high band runs up to `n_max`
/// and stops early once the coefficients drop below `e^{−690}`.
pub fn eval_band(band: Band, xi: f64, zeta: f64, r: f64, mu: u64, n_max: u64) -> Complex64 {
    let part = BandPartition { r, mu };
    let z = zeta.abs();
    let mut acc = CompensatedSum::new();
    let mut push = |n: i64| {
        acc.add(helmholtz_coeff(n, z, r) * fourier_mode(n, xi));
        acc.add(helmholtz_coeff(-n, z, r) * fourier_mode(-n, xi));
    };
    match band {
        Band::Low => {
            for n in 1..=mu.min(n_max) as i64 {
                push(n);
            }
            acc.add(helmholtz_coeff(0, z, r));
        }
        Band::Mid => {
            for n in (mu + 1)..=part.mid_end().min(n_max) {
                push(n as i64);
            }
        }
        Band::High => {
            for n in (part.mid_end() + 1)..=n_max {
                if z > 0.0 && -TAU * evanescent_rate(n as i64, r) * z < UNDERFLOW_EXPONENT {
                    break;
                }
                push(n as i64);
            }
        }
    }
    acc.value()
}

/// Evaluation grid over `(ξ, ζ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl Default for EvalGrid {
    /// 512 points over `[0, 1)` in ξ and 512 over `(0, 2]` in ζ.
    fn default() -> Self {
        EvalGrid::uniform(512, 512)
    }
}

impl EvalGrid {
    pub fn uniform(nx: usize, nz: usize) -> Self {
        EvalGrid {
            xi: (0..nx).map(|j| j as f64 / nx as f64).collect(),
            zeta: (1..=nz).map(|i| 2.0 * i as f64 / nz as f64).collect(),
        }
    }
}

/// Result of [`low_band_sup_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowBandError {
    pub sup: f64,
    /// The reference rate `μ⁴ / r`.
    pub bound: f64,
}

impl LowBandError {
    pub fn ratio(&self) -> f64 {
        self.sup / self.bound
    }
}

/// Grid maximum of `|P_{≪r} w_r − P_{≪r} v|`.
pub fn low_band_sup_error(r: f64, mu: u64, grid: &EvalGrid) -> Result<LowBandError> {
    validate_r(r)?;
    if mu as f64 > r {
        return Err(Error::invalid(format!("mu = {mu} exceeds r = {r}")));
    }
    let m = mu as i64;
    let sup = grid
        .zeta
        .par_iter()
        .map(|&z| {
            let gaps: Vec<(i64, Complex64)> = (-m..=m).map(|n| (n, paraxial_gap(n, z, r))).collect();
            grid.xi
                .iter()
                .map(|&x| gaps.iter().map(|&(n, d)| d * fourier_mode(n, x)).collect::<CompensatedSum>().value().norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let muf = mu as f64;
    Ok(LowBandError { sup, bound: muf.powi(4) / r })
}

/// The high band at `ξ = 0` and its integral comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighTail {
    /// `ln Σ_{|n| > r+1} e^{−2πr²√((n/r)²−1)ζ}`; the sum itself usually
    /// underflows double precision.
    pub log_sum: f64,
    /// `∫_r^∞ e^{−2πr²√((x/r)²−1)ζ} dx`.
    pub integral: f64,
    /// `∫_0^∞ z e^{−4πzζ} / (r³√(1 + z²/r⁴)) dz`. The substitution
    /// `z = r²√(y²−1)` actually yields the exponent `−2πzζ`, so this is
    /// asymptotically a quarter of [`integral`](Self::integral).
    pub z_integral: f64,
    /// `1 / (16π²ζ²r³)`, the leading behaviour of `z_integral`.
    pub asymptotic: f64,
    pub terms: u64,
}

impl HighTail {
    pub fn sum(&self) -> f64 {
        self.log_sum.exp()
    }
}

/// `∫_0^∞ z e^{−κζz} / (r³√(1 + z²/r⁴)) dz`, rescaled by `u = κζz`.
fn tail_integral(kappa: f64, r: f64, zeta: f64) -> Result<f64> {
    let a = kappa * zeta * r * r;
    let f = |u: f64| Complex64::new(u * (-u).exp() / (1.0 + (u / a) * (u / a)).sqrt(), 0.0);
    let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-20, max_intervals: 5_000 };
    // ∫_80^∞ u e^{−u} du < 1e−32
    let j = integrate(f, 0.0, 80.0, 16, opts)?.value.re;
    Ok(j / (kappa * kappa * zeta * zeta * r * r * r))
}

/// Sup over ξ of the high band (attained at `ξ = 0`) together with the
/// integral that dominates it.
pub fn high_tail_sup(r: f64, zeta: f64) -> Result<HighTail> {
    validate_r(r)?;
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::invalid(format!("high_tail_sup needs zeta > 0, got {zeta}")));
    }
    let start = (r + 1.0).floor() as u64 + 1;
    let exponent = |n: u64| -TAU * evanescent_rate(n as i64, r) * zeta;
    let lead = exponent(start);
    // consecutive exponents drop by at least 2πrζ
    let ratio = (-TAU * r * zeta).exp();
    let mut rel = CompensatedSum::new();
    let mut n = start;
    let mut terms = 0u64;
    loop {
        let t = (exponent(n) - lead).exp();
        rel.add(Complex64::new(t, 0.0));
        terms += 1;
        if t == 0.0 || (ratio < 1.0 && t * ratio / (1.0 - ratio) < 1e-17 * rel.value().re) {
            break;
        }
        n += 1;
    }
    let log_sum = lead + (2.0 * rel.value().re).ln();
    Ok(HighTail {
        log_sum,
        integral: tail_integral(TAU, r, zeta)?,
        z_integral: tail_integral(2.0 * TAU, r, zeta)?,
        asymptotic: 1.0 / (16.0 * PI * PI * zeta * zeta * r * r * r),
        terms,
    })
}

/// Modulus of the coefficient `n = ⌊r + 1⌋`, the one that lies in the mid
/// band but would belong to a high band starting at `r`.
pub fn borderline_term(r: f64, zeta: f64) -> Result<f64> {
    validate_r(r)?;
    if !(zeta > 0.0) {
        return Err(Error::invalid(format!("borderline_term needs zeta > 0, got {zeta}")));
    }
    if r.fract() == 0.0 {
        return Err(Error::invalid(format!("borderline_term needs non-integer r, got {r}")));
    }
    let n = (r + 1.0).floor() as i64;
    Ok((-TAU * evanescent_rate(n, r) * zeta).exp())
}
