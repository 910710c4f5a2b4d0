//! Exponential last-passage percolation in the quadrant, the competition
//! interface between the clusters grown from `(2,1)` and `(1,2)`, and the
//! totally asymmetric simple exclusion process with a second-class particle.
//!
//! The pieces fit together as follows:
//!
//! - [`weights`] provides a seed-addressed field of i.i.d. Exp(1) weights.
//! - [`lpp`] turns weights into passage times `G(z)` over a rectangle.
//! - [`competition`] labels the two competing clusters and extracts the
//!   competition interface `phi`, its hitting times and the angle law.
//! - [`geodesics`] backtracks maximizing paths and measures their geometry.
//! - [`exclusion`] runs TASEP from Poisson clocks (Harris construction) or
//!   from passage times, and implements the pathwise coupling between the
//!   second-class particle and the competition interface.
//! - [`stats`] runs replicated experiments and Kolmogorov-Smirnov checks.
//! - [`io`] and [`config`] hold the on-disk formats.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod competition;
pub mod config;
pub mod error;
pub mod exclusion;
pub mod geodesics;
pub mod io;
pub mod lattice;
pub mod lpp;
pub mod rng;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use lattice::{Site, Step};
