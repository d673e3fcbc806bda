//! Numerics for the Talbot effect: Gauss sums at rational times, the
//! Schrödinger and Helmholtz fields on the torus, distributional pairings
//! against test functions, and carpet rendering.

// `!(x > 0.0)` is used throughout to reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carpet;
pub mod error;
pub mod fields;
pub mod gauss;
pub mod numeric;
pub mod pairings;
pub mod quad;
pub mod testfns;

pub use carpet::{CombReport, DeltaComb, IntensityGrid, RenderParams};
pub use error::{Error, Result};
pub use fields::{Band, BandPartition, EvalGrid, Field, HelmholtzParams, MuSchedule};
pub use gauss::{GaussSumValue, Rational};
pub use pairings::{Column, LineSpec, Pairing, Restriction, SweepConfig, SweepRecord};
pub use testfns::{GaussianTest, PeriodicTest, SpectralCoefficients, TestFunction};
