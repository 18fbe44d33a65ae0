//! Recover the four frame vectors from a tetrahedral tensor.

use tetraframe::frames::{random_rotation, tensor3_from_frame, Frame};
use tetraframe::recovery::{mu, recover_tetrahedron, DEFAULT_TOL};
use tetraframe::tensor::TracelessSymTensor3;

fn main() -> tetraframe::Result<()> {
    let truth = Frame::standard_tetrahedron().rotated(&random_rotation(3, 42));
    let q = tensor3_from_frame(&truth)?;
    let rec = recover_tetrahedron(&q, DEFAULT_TOL)?;
    println!("set distance to the generating frame: {:.2e}", rec.frame.set_distance(&truth));
    for v in rec.frame.vectors3() {
        println!("  v = ({:+.6}, {:+.6}, {:+.6})  mu = {:.12}", v[0], v[1], v[2], mu(&q, &v)?);
    }
    // Slightly perturbed tensors are projected to the variety first.
    let mut noisy = q.q;
    noisy[0] += 1e-4;
    match recover_tetrahedron(&TracelessSymTensor3::new(noisy), 1e-3) {
        Ok(r) => println!("perturbed input: residual {:.1e}, set distance {:.2e}", r.residual, r.frame.set_distance(&truth)),
        Err(e) => println!("perturbed input rejected: {e}"),
    }
    Ok(())
}
