//! Test functions used to probe the fields as distributions.
//!
//! Two families are supported: modulated, shifted Gaussians on the line
//! (closed-form Fourier transform) and trigonometric polynomials on the
//! torus. The half-line Fourier–Laplace transform
//! `Φ(x, y) = ∫_0^∞ φ(t) e^{−2πixt} e^{−2πyt} dt` of a Gaussian is computed
//! by adaptive quadrature when the frequency is moderate and by the
//! integration-by-parts expansion `Σ φ^{(k)}(0) / β^{k+1}` with a rigorous
//! remainder bound once `|β|` is large enough.

use crate::error::{Error, Result};
use crate::numeric::{sum_f64, turn_f64};
use crate::quad::{integrate, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// `φ(x) = exp(−π((x − center)/width)²) · exp(2πi · modulation · x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianTest {
    #[serde(default)]
    pub center: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
    #[serde(default)]
    pub modulation: f64,
}

fn unit_width() -> f64 {
    1.0
}

impl GaussianTest {
    pub fn new(center: f64, width: f64, modulation: f64) -> Result<Self> {
        let g = GaussianTest { center, width, modulation };
        g.validate()?;
        Ok(g)
    }

    /// `e^{−πx²}`.
    pub fn standard() -> Self {
        GaussianTest { center: 0.0, width: 1.0, modulation: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid(format!("Gaussian width must be positive, got {}", self.width)));
        }
        if !self.center.is_finite() || !self.modulation.is_finite() {
            return Err(Error::invalid("Gaussian center and modulation must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let u = (x - self.center) / self.width;
        turn_f64(self.modulation * x) * (-PI * u * u).exp()
    }

    /// `x ↦ φ(−x)`.
    pub fn reflected(&self) -> Self {
        GaussianTest { center: -self.center, width: self.width, modulation: -self.modulation }
    }

    /// `x ↦ φ(x + s)`, returned as a phase times a Gaussian.
    pub fn shifted(&self, s: f64) -> (Complex64, Self) {
        (turn_f64(self.modulation * s), GaussianTest { center: self.center - s, ..*self })
    }

    /// `sup|φ| + ‖φ′‖_{L¹(ℝ)}`, the constant in `|Φ(x, 0)| ≤ C / (2π|x|)`.
    pub fn decay_constant(&self) -> f64 {
        1.0 + 2.0 + TAU * self.modulation.abs() * self.width
    }
}

/// Full-line transform `φ̂(k) = ∫ φ(x) e^{−2πikx} dx`, in closed form.
pub fn ft(phi: &GaussianTest, k: f64) -> Complex64 {
    let d = k - phi.modulation;
    let w = phi.width;
    turn_f64(-d * phi.center) * (w * (-PI * w * w * d * d).exp())
}

/// A trigonometric polynomial given by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicTestRaw", into = "PeriodicTestRaw")]
pub struct PeriodicTest {
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicTestRaw {
    coeffs: Vec<(i64, f64, f64)>,
}

impl TryFrom<PeriodicTestRaw> for PeriodicTest {
    type Error = Error;
    fn try_from(raw: PeriodicTestRaw) -> Result<Self> {
        PeriodicTest::new(raw.coeffs.into_iter().map(|(n, re, im)| (n, Complex64::new(re, im))))
    }
}

impl From<PeriodicTest> for PeriodicTestRaw {
    fn from(p: PeriodicTest) -> Self {
        PeriodicTestRaw { coeffs: p.coeffs.iter().map(|(&n, c)| (n, c.re, c.im)).collect() }
    }
}

impl PeriodicTest {
    pub fn new<I: IntoIterator<Item = (i64, Complex64)>>(coeffs: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at n = {n}")));
            }
            if map.insert(n, c).is_some() {
                return Err(Error::invalid(format!("duplicate coefficient index {n}")));
            }
        }
        Ok(PeriodicTest { coeffs: map })
    }

    /// Highest |n| carrying a coefficient.
    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        self.coeffs.iter().map(|(&n, &c)| c * crate::numeric::fourier_mode(n, xi)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn spectral(&self) -> SpectralCoefficients {
        let n = self.degree() as i64;
        SpectralCoefficients::from_fn(n, f64::NAN, |k| periodic_coeff(self, k))
    }
}

/// `φ̂_n`, zero outside the stored range.
pub fn periodic_coeff(phi: &PeriodicTest, n: i64) -> Complex64 {
    phi.coeffs.get(&n).copied().unwrap_or_default()
}

/// A test function as described in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TestFunction {
    Gaussian(GaussianTest),
    Trigpoly(PeriodicTest),
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Gaussian(g) => g.validate(),
            TestFunction::Trigpoly(_) => Ok(()),
        }
    }

    /// The pairing weight `⟨e^{2πinξ}, φ⟩`: `φ̂(−n)` on the line, `φ̂_{−n}`
    /// on the torus.
    pub fn mode_weight(&self, n: i64) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => ft(g, -n as f64),
            TestFunction::Trigpoly(p) => periodic_coeff(p, -n),
        }
    }

    pub fn as_gaussian(&self) -> Result<&GaussianTest> {
        match self {
            TestFunction::Gaussian(g) => Ok(g),
            TestFunction::Trigpoly(_) => {
                Err(Error::invalid("vertical and oblique pairings need a Schwartz (gaussian) test function"))
            }
        }
    }
}

/// Fourier coefficients `c_n`, `|n| ≤ n_max`, of a field at fixed ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    n_max: i64,
    values: Vec<Complex64>,
    pub zeta: f64,
}

impl SpectralCoefficients {
    pub fn from_fn<F: FnMut(i64) -> Complex64>(n_max: i64, zeta: f64, mut f: F) -> Self {
        let values = (-n_max..=n_max).map(&mut f).collect();
        SpectralCoefficients { n_max, values, zeta }
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.abs() > self.n_max {
            Complex64::default()
        } else {
            self.values[(n + self.n_max) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (-self.n_max..=self.n_max).zip(self.values.iter().copied())
    }
}

/// `(Σ (1 + n²)^s |c_n|²)^{1/2}` over the stored coefficients.
pub fn hs_norm(coeffs: &SpectralCoefficients, s: f64) -> f64 {
    sum_f64(coeffs.iter().map(|(n, c)| (1.0 + (n * n) as f64).powf(s) * c.norm_sqr())).sqrt()
}

/// Negative-order Sobolev norm with a bound on the unstored coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    /// Norm of the stored coefficients alone.
    pub explicit: f64,
    /// `Σ_{|n| > N} (1 + n²)^{−s} · M²` for coefficient modulus bound `M`.
    pub tail_bound: f64,
}

impl SobolevNorm {
    pub fn upper(&self) -> f64 {
        (self.explicit * self.explicit + self.tail_bound).sqrt()
    }
}

/// `‖f‖_{H^{−s}}` of a sequence whose unstored coefficients satisfy
/// `|c_n| ≤ modulus_bound`. Requires `s > 1/2` so that the tail converges.
pub fn hs_norm_with_tail(coeffs: &SpectralCoefficients, s: f64, modulus_bound: f64) -> Result<SobolevNorm> {
    if !(s > 0.5) {
        return Err(Error::invalid(format!("Sobolev order s must exceed 1/2, got {s}")));
    }
    let explicit = hs_norm(coeffs, -s);
    let tail = 2.0 * sobolev_tail(coeffs.n_max().unsigned_abs(), s)? * modulus_bound * modulus_bound;
    Ok(SobolevNorm { explicit, tail_bound: tail })
}

/// One-sided tail `Σ_{n > N} (1 + n²)^{−s}`, `s > 1/2`.
pub fn sobolev_tail(n: u64, s: f64) -> Result<f64> {
    if !(s > 0.5) {
        return Err(Error::invalid(format!("Sobolev tail diverges for s = {s} ≤ 1/2")));
    }
    let f = |x: f64| (1.0 + x * x).powf(-s);
    let m = n.max(2000);
    let explicit = sum_f64(((n + 1)..=m).map(|k| f(k as f64)));
    let mf = m as f64;
    // ∫_M^∞ (1+x²)^{−s} dx = Σ_j binom(−s, j) M^{−(2s−1+2j)} / (2s−1+2j)
    let inv2 = 1.0 / (mf * mf);
    let mut coef = 1.0;
    let mut power = mf.powf(1.0 - 2.0 * s);
    let mut integral = 0.0;
    for j in 0..50 {
        let term = coef * power / (2.0 * s - 1.0 + 2.0 * j as f64);
        integral += term;
        if term.abs() < 1e-18 * integral.abs() {
            break;
        }
        coef *= -(s + j as f64) / (j as f64 + 1.0);
        power *= inv2;
    }
    let fp = -2.0 * s * mf * (1.0 + mf * mf).powf(-s - 1.0);
    Ok(explicit + integral - f(mf) / 2.0 - fp / 12.0)
}

// ---------------------------------------------------------------------------
// half-line transforms

/// Largest derivative order used by the asymptotic expansion.
const MAX_ORDER: usize = 40;
/// Absolute accuracy targeted by the expansion, relative to the width.
const EXPANSION_TOL: f64 = 1e-16;

/// `‖g^{(k)}‖_{L¹(ℝ)}` for `g(u) = e^{−πu²}`, padded by 1%.
fn derivative_l1_norms() -> &'static [f64; MAX_ORDER + 1] {
    static TABLE: OnceLock<[f64; MAX_ORDER + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [0.0; MAX_ORDER + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let f = |u: f64| {
                let h = gaussian_derivatives(u, k);
                Complex64::new(h[k].abs(), 0.0)
            };
            let opts = QuadOptions { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 20_000 };
            let r = integrate(f, -14.0, 14.0, 64 + 4 * k, opts).expect("derivative norms converge");
            *slot = 1.01 * r.value.re;
        }
        out
    })
}

/// `g^{(j)}(u)` for `j = 0..=k`, `g(u) = e^{−πu²}`, via the Hermite recurrence.
fn gaussian_derivatives(u: f64, k: usize) -> Vec<f64> {
    // g^{(j)}(u) = (−√π)^j H_j(√π u) e^{−πu²}
    let z = PI.sqrt() * u;
    let g = (-PI * u * u).exp();
    let mut out = Vec::with_capacity(k + 1);
    let (mut h_prev, mut h) = (0.0, 1.0);
    let mut scale = 1.0;
    for j in 0..=k {
        out.push(scale * h * g);
        let next = 2.0 * z * h - 2.0 * j as f64 * h_prev;
        h_prev = h;
        h = next;
        scale *= -PI.sqrt();
    }
    out
}

/// Precomputed data for evaluating the half-line transform of one Gaussian
/// at many frequencies.
#[derive(Debug, Clone)]
pub struct HalfLineKernel {
    phi: GaussianTest,
    /// `h^{(k)}(0)` for the unmodulated factor `h(t) = g((t − c)/w)`.
    derivs: Vec<f64>,
    /// `w^{1−k} ‖g^{(k)}‖₁`, bounding `‖h^{(k)}‖_{L¹(0,∞)}`.
    remainder: Vec<f64>,
}

impl HalfLineKernel {
    pub fn new(phi: GaussianTest) -> Self {
        let w = phi.width;
        let raw = gaussian_derivatives(-phi.center / w, MAX_ORDER);
        let norms = derivative_l1_norms();
        let derivs = raw.iter().enumerate().map(|(k, d)| d * w.powi(-(k as i32))).collect();
        let remainder = norms.iter().enumerate().map(|(k, n)| n * w.powi(1 - k as i32)).collect();
        HalfLineKernel { phi, derivs, remainder }
    }

    pub fn test_function(&self) -> &GaussianTest {
        &self.phi
    }

    /// `Φ(x, y)` for `y ≥ 0`.
    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        if !(y >= 0.0) {
            return Err(Error::invalid(format!("half-line transform needs y ≥ 0, got {y}")));
        }
        let beta = Complex64::new(TAU * y, TAU * (x - self.phi.modulation));
        match self.expansion(beta) {
            Some(v) => Ok(v),
            None => self.quadrature(x, y),
        }
    }

    /// The integration-by-parts series, if some order meets the tolerance.
    fn expansion(&self, beta: Complex64) -> Option<Complex64> {
        let mag = beta.norm();
        if mag == 0.0 {
            return None;
        }
        let tol = EXPANSION_TOL * self.phi.width;
        let inv = 1.0 / mag;
        let mut inv_pow = inv;
        let mut order = None;
        for k in 1..=MAX_ORDER {
            if self.remainder[k] * inv_pow <= tol {
                order = Some(k);
                break;
            }
            inv_pow *= inv;
        }
        let order = order?;
        let z = beta.inv();
        let mut acc = Complex64::default();
        for k in (0..order).rev() {
            acc = (acc + self.derivs[k]) * z;
        }
        Some(acc)
    }

    fn quadrature(&self, x: f64, y: f64) -> Result<Complex64> {
        let phi = self.phi;
        let upper = phi.center + 6.5 * phi.width;
        let upper = if upper <= 0.0 { phi.width } else { upper };
        let f = |t: f64| phi.eval(t) * turn_f64(-x * t) * (-TAU * y * t).exp();
        let oscillations = ((x - phi.modulation).abs() * upper).ceil() as usize;
        let initial = (4 + 2 * oscillations).min(4096);
        let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-15 * phi.width, max_intervals: 20_000 };
        Ok(integrate(f, 0.0, upper, initial, opts)?.value)
    }
}

/// `Φ(x, y) = ∫_0^∞ φ(t) e^{−2πixt} e^{−2πyt} dt`.
pub fn half_line_ft(phi: &GaussianTest, x: f64, y: f64) -> Result<Complex64> {
    HalfLineKernel::new(*phi).eval(x, y)
}
