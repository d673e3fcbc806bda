//! Fixtures shared by the benchmarks in `benches/`.

use talbot_core::{GaussianTest, LineSpec, Restriction, SweepConfig, TestFunction};

pub fn standard_phi() -> TestFunction {
    TestFunction::Gaussian(GaussianTest::standard())
}

pub fn vertical_line() -> LineSpec {
    LineSpec::Vertical { xi: 0.25, restriction: Restriction::Half }
}

/// A one-row sweep at `r` along `ζ = 0.3`, with the Sobolev column enabled.
pub fn horizontal_row(r: f64) -> SweepConfig {
    let mut cfg = SweepConfig::new(LineSpec::Horizontal { zeta: 0.3 }, standard_phi());
    cfg.r_grid = vec![r];
    cfg.s = Some(1.0);
    cfg
}
