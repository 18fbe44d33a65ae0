//! Tetrahedral fields on the unit disk: the smooth escape map and a
//! relaxation from zero that nucleates point defects.
//!
//! Runs at a coarse resolution by default; pass a config such as
//! `fixtures/disk_zero.cfg` for the full benchmark.

use std::path::Path;

use tetraframe::cli::config::{load_config, parse_config, Overrides};
use tetraframe::cli::run_relax;

const COARSE: &str = r#"
shape = { kind = "disk", radius = 1.0 }
h = 0.03125
target = "tetra"
bc_mode = "strong"
eps = 0.1
init = { kind = "zero" }
boundary = { kind = "escape_map" }
noise = 0.01
seed = 7
"#;

fn main() -> tetraframe::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => load_config(Path::new(&p), &Overrides::default())?,
        None => parse_config(COARSE, |_| None, &Overrides::default())?,
    };
    let out = run_relax(&cfg, None)?;
    let a = &out.analysis;
    println!("{} iterations, max W {:.3e}, {} singular clusters", out.relax.iterations, a.max_w, a.clusters.len());
    for c in a.interior_clusters() {
        let class = c.class.map(|c| c.to_string()).unwrap_or_else(|| c.note.clone().unwrap_or_default());
        println!("defect at ({:+.3}, {:+.3}): {class}", c.centroid[0], c.centroid[1]);
    }
    if let (Some(b), Some(ok)) = (a.boundary_class, a.classes_compose) {
        println!("boundary loop class {b}; defect classes compose to it: {ok}");
    }
    Ok(())
}
