//! Computational toolkit for probabilistic normed spaces in the generalized
//! Šerstnev sense.
//!
//! The crate is organised bottom-up:
//!
//! - [`distfn`]: distance distribution functions (Δ⁺, D⁺) as piecewise-linear
//!   left-continuous functions with an explicit left limit at +∞.
//! - [`tnorm`]: the minimum and product t-norms and their dual t-conorms.
//! - [`triangle`]: sup- and inf-convolution triangle functions and a sampler
//!   that audits the triangle-function laws.
//! - [`phi`]: φ-transforms and their exact quasi-inverses.
//! - [`pnspace`]: PN spaces over ℝⁿ, axiom audits, strong neighbourhoods and
//!   prefix-based convergence.
//! - [`analysis`]: probabilistic radius, boundedness classes and the
//!   boundedness/compactness probes.
//! - [`config`] and [`demo`]: JSON input formats and the end-to-end demo used by
//!   the command-line front end.

// `!(x > 0.0)` and friends reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod demo;
pub mod distfn;
pub mod error;
pub mod phi;
pub mod pnspace;
pub mod tnorm;
pub mod triangle;

pub use distfn::{DistributionFunction, ExtReal, GridSpec};
pub use error::{Error, Result};
pub use phi::{MonotonePl, PhiTransform, Tail};
pub use pnspace::{Carrier, NormFamily, PNSpace, Vector};
pub use tnorm::{TConorm, TNorm};
pub use triangle::TriangleFunction;
