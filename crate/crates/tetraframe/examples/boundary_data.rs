//! Normal anchoring: the rank-5 boundary system and its on-variety solutions.

use nalgebra::Vector3;
use tetraframe::tensor::{boundary_system, dirichlet_bc_from_normal};

fn main() -> tetraframe::Result<()> {
    let nu = Vector3::new(1.0, 2.0, 2.0) / 3.0;
    let (m, _) = boundary_system(&nu);
    let sv = m.singular_values();
    println!("singular values of the 6x7 system: {:?}", sv.iter().map(|s| format!("{s:.3e}")).collect::<Vec<_>>());
    let min_norm = dirichlet_bc_from_normal(&Vector3::z(), None)?;
    println!("minimum-norm solution at e3: {:?}", min_norm.q.map(|x| (x * 1e12).round() / 1e12));
    for k in 0..4 {
        let theta = k as f64 * 0.3;
        let q = dirichlet_bc_from_normal(&nu, Some(theta))?;
        println!("theta={theta:.1}: W={:.1e}  V={:.1e}", q.potential_w(), q.boundary_v(&nu)?);
    }
    Ok(())
}
