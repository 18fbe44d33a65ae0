//! Mercedes-Benz relaxation on a triangle with a hole, with vortex indices.
//!
//! Runs a coarse version by default; pass `fixtures/triangle_hole.cfg` for the
//! full-resolution benchmark.

use std::path::Path;

use tetraframe::cli::config::{load_config, parse_config, Overrides};
use tetraframe::cli::run_relax;

const COARSE: &str = r#"
shape = { kind = "triangle_with_hole", circumradius = 1.0, hole_radius = 0.25, hole_center = [0.0, 0.0] }
h = 0.015625
target = "mb"
bc_mode = "strong"
eps = 0.04
init = { kind = "zero" }
boundary = { kind = "normal" }
noise = 0.01
seed = 7
"#;

fn main() -> tetraframe::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => load_config(Path::new(&p), &Overrides::default())?,
        None => parse_config(COARSE, |_| None, &Overrides::default())?,
    };
    let out = run_relax(&cfg, None)?;
    println!("{} iterations, energy {:.6}", out.relax.iterations, out.relax.final_energy.total());
    for c in out.analysis.interior_clusters() {
        let w = c.winding.map(|w| w.to_string()).unwrap_or_else(|| "?".into());
        println!("vortex at ({:+.3}, {:+.3}) index {w}", c.centroid[0], c.centroid[1]);
    }
    if let Some(s) = out.analysis.winding_sum {
        println!("sum of vortex indices {s}");
    }
    if let Some(h) = out.analysis.hole_winding {
        println!("index around the hole {h}");
    }
    Ok(())
}
