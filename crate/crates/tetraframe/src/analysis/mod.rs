//! Post-processing of relaxed fields.

pub mod bentcore;
pub mod report;
pub mod singular;
pub mod surface;
pub mod winding;

pub use bentcore::{bentcore_minimize, bentcore_omega, BentCoreReport, MinimizerKind};
pub use report::{analyze_field, ClusterReport, FieldReport};
pub use singular::{default_threshold, field_threshold, singular_cells, Cluster, SingularSet};
pub use surface::{junction_report, surface_mb_reduction, SurfaceReport};
pub use winding::{classify_node_loop, loop_around_cluster, winding_index_2d, ThirdIndex};
