//! Checkpoints and exports.

pub mod checkpoint;
pub mod export;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use export::{read_csv, write_csv, write_vtk};
