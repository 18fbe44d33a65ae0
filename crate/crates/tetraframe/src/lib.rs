//! Mercedes-Benz and tetrahedral frame fields from symmetric traceless 3-tensors.
//!
//! The crate covers the algebra of `H_trace(n,3)` ([`tensor`]), frames in any
//! dimension ([`frames`]), pointwise frame recovery ([`recovery`]), the binary
//! tetrahedral group and loop classification ([`quaternion`]), a finite
//! difference Ginzburg-Landau solver on masked grids ([`grid`], [`field`],
//! [`solver`], [`seed`]), post-processing ([`analysis`]) and file formats ([`io`]).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod field;
pub mod frames;
pub mod grid;
pub mod io;
pub mod quaternion;
pub mod recovery;
pub mod seed;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
