//! Empirical processes indexed by right-continuous functions of bounded
//! variation.
//!
//! The crate is organised bottom-up:
//!
//! * [`bvcalc`]: exact piecewise-affine-plus-jumps functions and their norms;
//! * [`stieltjes`]: signed Stieltjes measures, integration, integration by parts;
//! * [`refdist`]: reference distributions and the β-grid construction;
//! * [`empirical`]: empirical paths, the functional `∫ g dZ_n`, moduli and bounds;
//! * [`generators`]: seeded stationary sequences with known marginals;
//! * [`bootstrap`]: the moving block bootstrap and the bootstrap empirical process;
//! * [`limits`]: long-run covariance of the limiting Gaussian functional;
//! * [`harness`]: experiment configs, Monte Carlo drivers and statistics.

pub mod bootstrap;
pub mod bvcalc;
pub mod empirical;
mod error;
pub mod generators;
pub mod harness;
pub mod limits;
pub mod refdist;
pub mod rng;
pub mod special;
pub mod stieltjes;

pub use bvcalc::{BVFunction, GeneralBVFunction, Knot};
pub use empirical::{DriftTerm, EmpiricalPath};
pub use error::{Error, Result};
pub use generators::{GeneratorKind, GeneratorSpec};
pub use refdist::{BetaGrid, ContinuousLaw, ReferenceDistribution};
pub use stieltjes::StieltjesMeasure;
