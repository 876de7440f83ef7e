//! Construction and verification toolkit for Q-polynomial distance-regular
//! graphs: Bose-Mesner algebras, dual (pointed) algebras, Terwilliger
//! algebras, irreducible module decompositions with Wedderburn structure, and
//! association-scheme detection on subconstituents.
//!
//! The crate runs over two scalar domains. Graphs with integral adjacency
//! spectrum get exact big-rational arithmetic end to end; everything else
//! falls back to `f64` with explicit tolerance contexts and verified
//! residuals.

#![forbid(unsafe_code)]

pub mod bose_mesner;
pub mod dual;
pub mod error;
pub mod graphs;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod schemes;
pub mod talg;
pub mod tmodules;

pub use error::{Error, Result};
pub use scalar::{Exact, Matrix, Scalar, SubspaceBasis, ToleranceContext};
