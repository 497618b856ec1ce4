//! Constrained index-k saddle search for constructing singular and flexible
//! bar frameworks, with certification and flex continuation.
//!
//! The free edge's squared length is used as an energy on the manifold of
//! configurations where every other edge keeps its length and
//! `d(d+1)/2` coordinates are pinned. Non-degenerate saddles of that energy
//! are singular, flexible frameworks; [`analysis::certify`] checks the
//! hypotheses numerically and [`continuation::follow_branch`] traces the
//! resulting nonlinear flexes.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what the command-line tool uses.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod continuation;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod framework;
pub mod linalg;
pub mod manifold;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Configuration64 = framework::Configuration<f64>;
pub type Framework64 = framework::Framework<f64>;
pub type Framework32 = framework::Framework<f32>;
