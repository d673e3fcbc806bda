//! Pairings of `v` and `w_r` with test functions along horizontal,
//! vertical and oblique lines, the four-band error split, H^{−s} errors,
//! r-sweeps and log–log rate fits.

use crate::error::{Error, Result};
use crate::fields::{
    evanescent_rate, helmholtz_coeff, paraxial_gap, schrodinger_coeff, validate_r, Band, BandPartition, MuSchedule,
    UNDERFLOW_EXPONENT,
};
use crate::numeric::{fmt17, fourier_mode, CompensatedSum};
use crate::testfns::{ft, sobolev_tail, GaussianTest, HalfLineKernel, TestFunction};
use crate::Field;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Which part of a vertical or oblique line the test function sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restriction {
    /// Only the upper half plane `ζ > 0`.
    #[default]
    Half,
    /// The whole line, with the fields extended evenly in ζ.
    Whole,
}

impl FromStr for Restriction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Restriction::Half),
            "whole" => Ok(Restriction::Whole),
            _ => Err(Error::invalid(format!("unknown restriction {s:?} (expected half or whole)"))),
        }
    }
}

/// A line in the `(ξ, ζ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LineSpec {
    /// `ζ = const`; the fields are periodic distributions in ξ.
    Horizontal { zeta: f64 },
    /// `ξ = const`; the fields are distributions in ζ.
    Vertical {
        xi: f64,
        #[serde(default)]
        restriction: Restriction,
    },
    /// `ζ = mξ − k`, parametrised by ξ.
    Oblique {
        m: f64,
        k: f64,
        #[serde(default)]
        restriction: Restriction,
    },
}

impl LineSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite")))
            }
        };
        match *self {
            LineSpec::Horizontal { zeta } => finite(zeta, "zeta"),
            LineSpec::Vertical { xi, .. } => finite(xi, "xi"),
            LineSpec::Oblique { m, k, .. } => {
                finite(m, "m")?;
                finite(k, "k")?;
                if m == 0.0 {
                    return Err(Error::invalid("oblique lines need m ≠ 0; use a horizontal line"));
                }
                Ok(())
            }
        }
    }
}

/// A truncated pairing and, when the series converges absolutely, a bound
/// on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    pub value: Complex64,
    pub n_max: u64,
    pub tail_bound: Option<f64>,
}

impl Pairing {
    /// Fails unless the tail bound exists and is at most `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        match self.tail_bound {
            Some(b) if b <= tol => Ok(()),
            b => Err(Error::ToleranceNotAchievable {
                requested: tol,
                bound: b.unwrap_or(f64::INFINITY),
                n_max: self.n_max,
            }),
        }
    }
}

/// One half-line piece of a vertical or oblique pairing. Its terms are
/// `pre · e^{2πin·phase} · Φ(x_n, y_n)` where, with slope `a` and drift `b`,
/// `x_n = a n²/2 − b n` for `v`, `x_n = a n²/(1+√(1−(n/r)²)) − b n` for
/// `|n| ≤ r`, and `(x_n, y_n) = (a r² − b n, a r√(n²−r²))` for `|n| > r`.
#[derive(Debug, Clone)]
struct Half {
    a: f64,
    b: f64,
    phase: f64,
    pre: Complex64,
    kernel: HalfLineKernel,
    /// `|Φ(x, y)| ≤ decay / (2π|x + iy|)`.
    decay: f64,
    /// `|Φ(x, y)| ≤ ‖φ‖_{L¹}`.
    mass: f64,
}

impl Half {
    fn new(a: f64, b: f64, phase: f64, pre: Complex64, phi: GaussianTest) -> Self {
        Half { a, b, phase, pre, decay: phi.decay_constant(), mass: phi.width, kernel: HalfLineKernel::new(phi) }
    }

    fn vertical(xi: f64, phi: GaussianTest) -> Self {
        Half::new(1.0, 0.0, xi, Complex64::new(1.0, 0.0), phi)
    }

    /// Upper half of the line `ζ = mξ − k`.
    fn oblique(m: f64, k: f64, phi: GaussianTest) -> Self {
        // for m < 0 substitute ξ = −η: same coefficients, reflected φ
        let (m, phi) = if m < 0.0 { (-m, phi.reflected()) } else { (m, phi) };
        let shift = k / m;
        let (pre, shifted) = phi.shifted(shift);
        Half::new(m, 1.0, shift, pre, shifted)
    }

    fn point_v(&self, n: i64) -> (f64, f64) {
        let nf = n as f64;
        (self.a * nf * nf / 2.0 - self.b * nf, 0.0)
    }

    fn point_w(&self, n: i64, r: f64) -> (f64, f64) {
        let nf = n as f64;
        let a = nf.abs();
        if a <= r {
            let x = a / r;
            let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
            (self.a * nf * nf / (1.0 + s) - self.b * nf, 0.0)
        } else {
            (self.a * r * r - self.b * nf, self.a * evanescent_rate(n, r))
        }
    }

    fn term(&self, n: i64, (x, y): (f64, f64)) -> Result<Complex64> {
        Ok(self.pre * fourier_mode(n, self.phase) * self.kernel.eval(x, y)?)
    }

    fn bound(&self, (x, y): (f64, f64)) -> f64 {
        let d = x.hypot(y);
        if d == 0.0 {
            self.mass
        } else {
            self.mass.min(self.decay / (TAU * d))
        }
    }

    /// Bound on `Σ_{|n| > N} |v-term|`, from `|x_{±n}| ≥ a n²/2 − b n`.
    fn v_tail_bound(&self, n: u64) -> Option<f64> {
        let nf = n as f64;
        let one_side = if self.b == 0.0 {
            2.0 / (self.a * nf.max(1.0))
        } else {
            let c = 2.0 * self.b / self.a;
            if nf <= c {
                return None;
            }
            (nf / (nf - c)).ln() / self.b
        };
        Some(self.decay / PI * one_side)
    }
}

/// Per-line term generator shared by the single pairings and the sweeps.
#[derive(Debug, Clone)]
enum LineTerms {
    Horizontal { zeta: f64, phi: TestFunction },
    Halves(Vec<Half>),
}

impl LineTerms {
    fn new(line: &LineSpec, phi: &TestFunction) -> Result<Self> {
        line.validate()?;
        phi.validate()?;
        Ok(match *line {
            LineSpec::Horizontal { zeta } => LineTerms::Horizontal { zeta: zeta.abs(), phi: phi.clone() },
            LineSpec::Vertical { xi, restriction } => {
                let g = *phi.as_gaussian()?;
                let mut h = vec![Half::vertical(xi, g)];
                if restriction == Restriction::Whole {
                    h.push(Half::vertical(xi, g.reflected()));
                }
                LineTerms::Halves(h)
            }
            LineSpec::Oblique { m, k, restriction } => {
                let g = *phi.as_gaussian()?;
                let mut h = vec![Half::oblique(m, k, g)];
                if restriction == Restriction::Whole {
                    // the lower half of ζ = mξ − k is the upper half of ζ = −mξ + k
                    h.push(Half::oblique(-m, -k, g));
                }
                LineTerms::Halves(h)
            }
        })
    }

    fn v(&self, n: i64) -> Result<Complex64> {
        match self {
            LineTerms::Horizontal { zeta, phi } => Ok(schrodinger_coeff(n, *zeta) * phi.mode_weight(n)),
            LineTerms::Halves(hs) => hs.iter().map(|h| h.term(n, h.point_v(n))).sum(),
        }
    }

    fn w(&self, n: i64, r: f64) -> Result<Complex64> {
        match self {
            LineTerms::Horizontal { zeta, phi } => Ok(helmholtz_coeff(n, *zeta, r) * phi.mode_weight(n)),
            LineTerms::Halves(hs) => hs.iter().map(|h| h.term(n, h.point_w(n, r))).sum(),
        }
    }

    /// `w_n − v_n`, with the horizontal case evaluated cancellation-free.
    fn low_diff(&self, n: i64, r: f64) -> Result<Complex64> {
        match self {
            LineTerms::Horizontal { zeta, phi } => Ok(paraxial_gap(n, *zeta, r) * phi.mode_weight(n)),
            LineTerms::Halves(_) => Ok(self.w(n, r)? - self.v(n)?),
        }
    }

    fn v_tail_bound(&self, n_max: u64) -> Option<f64> {
        match self {
            LineTerms::Horizontal { phi, .. } => Some(weight_tail(phi, n_max)),
            LineTerms::Halves(hs) => hs.iter().map(|h| h.v_tail_bound(n_max)).sum(),
        }
    }

    /// The Helmholtz high band is only absolutely summable on horizontal
    /// lines: along vertical and oblique lines its terms decay like `1/n`.
    fn w_tail_bound(&self, n_max: u64) -> Option<f64> {
        match self {
            LineTerms::Horizontal { phi, .. } => Some(weight_tail(phi, n_max)),
            LineTerms::Halves(_) => None,
        }
    }

    /// Bound on `|mid band|` from the decay of the weights.
    fn mid_bound(&self, part: &BandPartition) -> f64 {
        let range = (part.mu + 1)..=part.mid_end();
        let terms = range.flat_map(|n| [n as i64, -(n as i64)]);
        match self {
            LineTerms::Horizontal { phi, .. } => terms.map(|n| phi.mode_weight(n).norm()).sum(),
            LineTerms::Halves(hs) => terms.map(|n| hs.iter().map(|h| h.bound(h.point_w(n, part.r))).sum::<f64>()).sum(),
        }
    }

    /// Smallest truncation whose v-tail bound is below `tol`.
    fn n_for_tolerance(&self, tol: f64, budget: u64) -> Result<u64> {
        let ok = |n: u64| self.v_tail_bound(n).is_some_and(|b| b <= tol);
        if ok(0) {
            return Ok(0);
        }
        let mut hi = 1u64;
        while !ok(hi) {
            if hi >= budget {
                return Err(Error::ToleranceNotAchievable {
                    requested: tol,
                    bound: self.v_tail_bound(budget).unwrap_or(f64::INFINITY),
                    n_max: budget,
                });
            }
            hi = (hi * 2).min(budget);
        }
        // invariant: ok(hi) and !ok(lo)
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// `Σ_{|n| > N} |⟨e^{2πinξ}, φ⟩|`.
fn weight_tail(phi: &TestFunction, n_max: u64) -> f64 {
    match phi {
        TestFunction::Trigpoly(p) => {
            p.iter().filter(|(n, _)| n.unsigned_abs() > n_max).fold(0.0, |acc, (_, c)| acc + c.norm())
        }
        TestFunction::Gaussian(g) => {
            let mut total = 0.0;
            for sign in [1i64, -1] {
                let mut n = n_max as i64 + 1;
                loop {
                    let k = sign * n;
                    let t = ft(g, -k as f64).norm();
                    total += t;
                    // |φ̂(−k)| peaks at k = −modulation
                    let receding = sign as f64 * (k as f64 + g.modulation) > 0.0;
                    if receding && (t < 1e-300 || t <= 1e-18 * total) {
                        break;
                    }
                    n += 1;
                }
            }
            total
        }
    }
}

fn pair_terms(terms: &LineTerms, field: Field, n_max: u64) -> Result<Pairing> {
    let n = n_max as i64;
    let value = chunked_sum(-n, n, |j| match field {
        Field::Schrodinger => terms.v(j),
        Field::Helmholtz { r } => terms.w(j, r),
    })?;
    let tail_bound = match field {
        Field::Schrodinger => terms.v_tail_bound(n_max),
        Field::Helmholtz { .. } => terms.w_tail_bound(n_max),
    };
    Ok(Pairing { value, n_max, tail_bound })
}

const CHUNK: i64 = 1 << 14;

/// Compensated sum over `lo..=hi`, evaluated in parallel chunks and merged
/// in index order so the result does not depend on scheduling.
fn chunked_sum<F>(lo: i64, hi: i64, f: F) -> Result<Complex64>
where
    F: Fn(i64) -> Result<Complex64> + Sync,
{
    let starts: Vec<i64> = (lo..=hi).step_by(CHUNK as usize).collect();
    let parts: Vec<Complex64> = starts
        .par_iter()
        .map(|&s| {
            let mut acc = CompensatedSum::new();
            for j in s..=(s + CHUNK - 1).min(hi) {
                acc.add(f(j)?);
            }
            Ok(acc.value())
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().collect::<CompensatedSum>().value())
}

fn check_field(field: Field) -> Result<()> {
    match field {
        Field::Schrodinger => Ok(()),
        Field::Helmholtz { r } => validate_r(r),
    }
}

/// `⟨u(·, ζ), φ⟩ = Σ_{|n| ≤ n_max} c_n(|ζ|) ⟨e^{2πinξ}, φ⟩`.
pub fn pair_horizontal(field: Field, zeta: f64, phi: &TestFunction, n_max: u64) -> Result<Pairing> {
    check_field(field)?;
    pair_terms(&LineTerms::new(&LineSpec::Horizontal { zeta }, phi)?, field, n_max)
}

/// `⟨u(ξ, ·), φ⟩` over `ζ > 0` (or the whole line with the even extension).
pub fn pair_vertical(
    field: Field,
    xi: f64,
    phi: &TestFunction,
    restriction: Restriction,
    n_max: u64,
) -> Result<Pairing> {
    check_field(field)?;
    pair_terms(&LineTerms::new(&LineSpec::Vertical { xi, restriction }, phi)?, field, n_max)
}

/// `⟨u(ξ, mξ − k), φ(ξ)⟩` over the part of the line with `ζ > 0`
/// (or all of it with the even extension).
pub fn pair_oblique(
    field: Field,
    m: f64,
    k: f64,
    phi: &TestFunction,
    restriction: Restriction,
    n_max: u64,
) -> Result<Pairing> {
    check_field(field)?;
    pair_terms(&LineTerms::new(&LineSpec::Oblique { m, k, restriction }, phi)?, field, n_max)
}

/// Dispatch on the line kind.
pub fn pair_line(field: Field, line: &LineSpec, phi: &TestFunction, n_max: u64) -> Result<Pairing> {
    check_field(field)?;
    pair_terms(&LineTerms::new(line, phi)?, field, n_max)
}

/// Smallest `n_max` at which the Schrödinger pairing's tail bound is below
/// `tol`, searching no further than `budget`.
pub fn n_max_for_tolerance(line: &LineSpec, phi: &TestFunction, tol: f64, budget: u64) -> Result<u64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    LineTerms::new(line, phi)?.n_for_tolerance(tol, budget)
}

/// `‖w_r(·, |ζ|) − v(·, |ζ|)‖_{H^{−s}}`.
///
/// Coefficients are summed explicitly up to the larger of `n_max` and the
/// point where `|c_n(w_r)|` underflows; beyond it `|c_n(w_r) − c_n(v)| = 1`
/// and the tail is summed analytically. If the underflow point lies past
/// `EXPLICIT_LIMIT`, the remaining differences are bounded by
/// `1 + |c_N(w_r)|` and the result is an upper bound.
pub fn hs_error(r: f64, zeta: f64, s: f64, n_max: u64) -> Result<f64> {
    validate_r(r)?;
    if !(s > 0.5) {
        return Err(Error::invalid(format!("Sobolev order s must exceed 1/2, got {s}")));
    }
    let z = zeta.abs();
    if z == 0.0 {
        return Ok(0.0);
    }
    const EXPLICIT_LIMIT: u64 = 50_000_000;
    // 2π r √(n² − r²) z > 690  ⇔  n² > r² + (690 / (2π r z))²
    let reach = (r * r + (-UNDERFLOW_EXPONENT / (TAU * r * z)).powi(2)).sqrt().ceil();
    let n_end = n_max.max(((r + 1.0).ceil()) as u64).max(if reach < EXPLICIT_LIMIT as f64 {
        reach as u64
    } else {
        EXPLICIT_LIMIT
    });
    let weight = |n: i64| (1.0 + (n as f64) * (n as f64)).powf(-s);
    let diff = |n: i64| {
        if (n.unsigned_abs() as f64) <= r {
            paraxial_gap(n, z, r)
        } else {
            helmholtz_coeff(n, z, r) - schrodinger_coeff(n, z)
        }
    };
    let explicit = chunked_sum(0, n_end as i64, |n| {
        let d = diff(n).norm_sqr() * weight(n);
        Ok(Complex64::new(if n == 0 { d } else { 2.0 * d }, 0.0))
    })?
    .re;
    let edge = (-TAU * evanescent_rate(n_end as i64 + 1, r) * z).exp();
    let tail = 2.0 * sobolev_tail(n_end, s)? * (1.0 + edge).powi(2);
    Ok((explicit + tail).sqrt())
}

/// Complex band sums for one r; `pair_w − pair_v = low + mid + high − tail_v`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandSums {
    pub pair_w: Complex64,
    pub pair_v: Complex64,
    pub low: Complex64,
    pub mid: Complex64,
    pub high: Complex64,
    pub tail_v: Complex64,
}

impl BandSums {
    /// `|pair_w − pair_v − (low + mid + high − tail_v)|`.
    pub fn identity_residual(&self) -> f64 {
        ((self.pair_w - self.pair_v) - (self.low + self.mid + self.high - self.tail_v)).norm()
    }
}

/// One row of an r-sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub r: f64,
    pub mu: u64,
    pub err_pair: f64,
    pub err_low: f64,
    pub err_mid: f64,
    pub err_high: f64,
    pub err_tail_v: f64,
    pub err_hs: Option<f64>,
    pub n_max: u64,
    /// Decay bound on `err_mid` recomputed for this row.
    pub mid_bound: f64,
    pub bands: BandSums,
}

impl SweepRecord {
    pub fn column(&self, c: Column) -> Option<f64> {
        Some(match c {
            Column::ErrPair => self.err_pair,
            Column::ErrLow => self.err_low,
            Column::ErrMid => self.err_mid,
            Column::ErrHigh => self.err_high,
            Column::ErrTailV => self.err_tail_v,
            Column::ErrHs => return self.err_hs,
        })
    }

    /// `err_pair ≤ err_low + err_mid + err_high + err_tail_v`, up to rounding.
    pub fn triangle_holds(&self) -> bool {
        let sum = self.err_low + self.err_mid + self.err_high + self.err_tail_v;
        self.err_pair <= sum * (1.0 + 1e-12) + 1e-300
    }
}

/// Error columns of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    ErrPair,
    ErrLow,
    ErrMid,
    ErrHigh,
    ErrTailV,
    ErrHs,
}

impl Column {
    pub const ALL: [Column; 6] =
        [Column::ErrPair, Column::ErrLow, Column::ErrMid, Column::ErrHigh, Column::ErrTailV, Column::ErrHs];

    pub fn name(&self) -> &'static str {
        match self {
            Column::ErrPair => "err_pair",
            Column::ErrLow => "err_low",
            Column::ErrMid => "err_mid",
            Column::ErrHigh => "err_high",
            Column::ErrTailV => "err_tail_v",
            Column::ErrHs => "err_hs",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Column::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::invalid(format!("unknown column {s:?}")))
    }
}

/// `{10, 10^{1.5}, …, 10⁴}`.
pub fn default_r_grid() -> Vec<f64> {
    (2..=8).map(|i| 10f64.powf(i as f64 / 2.0)).collect()
}

fn default_tol() -> f64 {
    1e-6
}

fn default_budget() -> u64 {
    100_000_000
}

/// Everything needed to run one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub line: LineSpec,
    pub phi: TestFunction,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub mu: MuSchedule,
    /// Sobolev order for `err_hs` (horizontal lines only).
    #[serde(default)]
    pub s: Option<f64>,
    /// Target for the Schrödinger tail bound on vertical and oblique lines.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Largest admissible `n_max`.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl SweepConfig {
    pub fn new(line: LineSpec, phi: TestFunction) -> Self {
        SweepConfig {
            line,
            phi,
            r_grid: default_r_grid(),
            mu: MuSchedule::default(),
            s: None,
            tol: default_tol(),
            budget: default_budget(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.line.validate()?;
        self.phi.validate()?;
        MuSchedule::new(self.mu.alpha, self.mu.scale)?;
        if self.r_grid.is_empty() {
            return Err(Error::invalid("r grid is empty"));
        }
        for &r in &self.r_grid {
            validate_r(r)?;
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("r grid must be strictly increasing"));
        }
        if let Some(s) = self.s {
            if !(s > 0.5) {
                return Err(Error::invalid(format!("Sobolev order s must exceed 1/2, got {s}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }

    /// Grid values that are integers, where `⌊r + 1⌋ = r + 1` sits exactly on
    /// the mid/high boundary.
    pub fn integer_radii(&self) -> Vec<f64> {
        self.r_grid.iter().copied().filter(|r| r.fract() == 0.0).collect()
    }
}

/// Truncation used for a sweep row: the whole oscillatory range plus a
/// certified tail.
fn row_n_max(terms: &LineTerms, config: &SweepConfig, r: f64) -> Result<u64> {
    let floor = r.ceil() as u64 + 2;
    let tol = match terms {
        LineTerms::Horizontal { .. } => 1e-16,
        LineTerms::Halves(_) => config.tol,
    };
    Ok(floor.max(terms.n_for_tolerance(tol, config.budget)?))
}

fn sweep_row(terms: &LineTerms, config: &SweepConfig, r: f64) -> Result<SweepRecord> {
    let mu = config.mu.mu(r);
    if mu as f64 > r {
        return Err(Error::invalid(format!("mu = {mu} exceeds r")));
    }
    let part = BandPartition { r, mu };
    let n_max = row_n_max(terms, config, r)?;
    let n = n_max as i64;
    let starts: Vec<i64> = (-n..=n).step_by(CHUNK as usize).collect();
    let parts: Vec<[Complex64; 6]> = starts
        .par_iter()
        .map(|&s| {
            let mut acc: [CompensatedSum; 6] = Default::default();
            for j in s..=(s + CHUNK - 1).min(n) {
                let v = terms.v(j)?;
                let w = terms.w(j, r)?;
                acc[0].add(w);
                acc[1].add(v);
                match part.band_of(j) {
                    Band::Low => acc[2].add(terms.low_diff(j, r)?),
                    Band::Mid => {
                        acc[3].add(w);
                        acc[5].add(v);
                    }
                    Band::High => {
                        acc[4].add(w);
                        acc[5].add(v);
                    }
                }
            }
            Ok(acc.map(|a| a.value()))
        })
        .collect::<Result<_>>()?;
    let mut acc: [CompensatedSum; 6] = Default::default();
    for p in parts {
        for (a, v) in acc.iter_mut().zip(p) {
            a.add(v);
        }
    }
    let [pair_w, pair_v, low, mid, high, tail_v] = acc.map(|a| a.value());
    let bands = BandSums { pair_w, pair_v, low, mid, high, tail_v };
    let err_hs = match (terms, config.s) {
        (LineTerms::Horizontal { zeta, .. }, Some(s)) => Some(hs_error(r, *zeta, s, n_max)?),
        _ => None,
    };
    Ok(SweepRecord {
        r,
        mu,
        err_pair: (pair_w - pair_v).norm(),
        err_low: low.norm(),
        err_mid: mid.norm(),
        err_high: high.norm(),
        err_tail_v: tail_v.norm(),
        err_hs,
        n_max,
        mid_bound: terms.mid_bound(&part),
        bands,
    })
}

/// Runs one sweep row per grid value; rows are computed in parallel and
/// returned in grid order.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let terms = LineTerms::new(&config.line, &config.phi)?;
    config
        .r_grid
        .par_iter()
        .map(|&r| sweep_row(&terms, config, r).map_err(|e| Error::AtRadius { r, source: Box::new(e) }))
        .collect()
}

/// Least-squares slope of `ln(err)` against `ln(r)`.
pub fn rate_fit(records: &[SweepRecord], column: Column) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 records, got {}", records.len())));
    }
    let mut pts = Vec::with_capacity(records.len());
    for rec in records {
        let e = rec.column(column).ok_or_else(|| Error::DegenerateFit(format!("{column} missing at r = {}", rec.r)))?;
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::DegenerateFit(format!("{column} = {e} at r = {}", rec.r)));
        }
        pts.push((rec.r.ln(), e.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all r values coincide".into()));
    }
    Ok(sxy / sxx)
}

pub const CSV_HEADER: &str = "r,mu,err_pair,err_low,err_mid,err_high,err_tail_v,err_hs";

/// Writes the sweep as CSV; a missing `err_hs` is an empty field.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt17(r.r),
            r.mu,
            fmt17(r.err_pair),
            fmt17(r.err_low),
            fmt17(r.err_mid),
            fmt17(r.err_high),
            fmt17(r.err_tail_v),
            r.err_hs.map(fmt17).unwrap_or_default()
        )?;
    }
    Ok(())
}
