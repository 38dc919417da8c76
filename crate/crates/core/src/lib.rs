//! Dual iterated function systems on finite-dimensional C*-algebras.
//!
//! The crate computes self-similar states of weighted families of unital
//! *-endomorphisms, their support projections and upper pre-images, the
//! spectral (Monge-Kantorovich) distance of a Lipschitz seminorm, and the
//! dilation factors that control contractivity. A commutative layer of
//! finite metric spaces with point-map IFS provides exact classical oracles
//! for every noncommutative computation.

pub mod algebra;
pub mod cli;
pub mod classical;
pub mod dynamics;
pub mod error;
pub mod extended;
pub mod fractal;
pub mod linalg;
pub mod lp;
pub mod morphism;
pub mod report;
pub mod scenario;
pub mod seminorm;

pub use error::{Error, Result};
