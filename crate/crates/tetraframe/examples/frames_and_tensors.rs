//! Regular simplex frames in several dimensions and their tensors.

use tetraframe::frames::{build_simplex_matrix, random_rotation, tensor3_from_frame, tensor_from_frame, Frame};
use tetraframe::tensor::{gram_constant, traceless_dimension};

fn main() -> tetraframe::Result<()> {
    for n in 2..=5 {
        let frame = build_simplex_matrix(n)?.frame();
        let q = tensor_from_frame(&frame)?;
        let gram = q.gram();
        let target = gram_constant(n);
        let off = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
            let want = if i == j { target } else { 0.0 };
            (gram[(i, j)] - want).abs()
        });
        println!(
            "n={n}: dim H_trace={:>2}  |Q|^2={:.6}  gram constant={:.6}  max gram error={:.1e}",
            traceless_dimension(n),
            q.norm().powi(2),
            target,
            off.fold(0.0, f64::max)
        );
    }
    let r = random_rotation(3, 1);
    let rotated = Frame::standard_tetrahedron().rotated(&r);
    let t = tensor3_from_frame(&rotated)?;
    println!("rotated tetrahedron: q = {:?}", t.q.map(|x| (x * 1e6).round() / 1e6));
    println!("variety residual {:.1e}, block-sum residual {:.1e}", t.variety_residual(), t.block_sum_residual());
    Ok(())
}
