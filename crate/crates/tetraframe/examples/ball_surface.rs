//! Tetrahedral field in a ball with weak normal anchoring, reduced to a
//! three-fold field on the sphere to check the index sum against 2 - 2g.
//!
//! Runs a coarse grid by default; pass `fixtures/ball.cfg` for the full run.

use std::path::Path;

use tetraframe::cli::config::{load_config, parse_config, Overrides};
use tetraframe::cli::run_relax;

const COARSE: &str = r#"
shape = { kind = "ball", radius = 1.0 }
h = 0.125
target = "tetra"
bc_mode = "weak"
eps = 0.25
delta1 = 0.1
delta2 = 0.1
init = { kind = "zero" }
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
    println!("{} iterations, max |A| {:.4} (bound {:.4})", out.relax.iterations, a.max_norm, a.amplitude_bound.unwrap_or(f64::NAN));
    if let Some(s) = &a.surface {
        println!("surface index sum {} (expected {} for genus {})", s.index_sum, s.expected, s.genus);
        for c in s.charged_clusters() {
            let d = c.direction;
            println!("  boundary defect toward ({:+.2}, {:+.2}, {:+.2}) index {}", d[0], d[1], d[2], c.index);
        }
    }
    println!("{} bulk singular clusters", a.clusters.len());
    Ok(())
}
