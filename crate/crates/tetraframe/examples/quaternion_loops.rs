//! Binary tetrahedral group, conjugacy classes and loop classification.

use tetraframe::quaternion::{
    classify_loop, geodesic_generator, tetra_tensor, BinaryTetraElement, ConjugacyClass,
};

fn main() -> tetraframe::Result<()> {
    let all = BinaryTetraElement::all();
    for class in ConjugacyClass::ALL {
        let members: Vec<String> = all.iter().filter(|g| ConjugacyClass::of(g) == class).map(|g| g.to_string()).collect();
        println!("{:<14} size {}  {}", class.label(), members.len(), members.join(" "));
    }
    println!();
    // The loop t -> T(G_sigma(t)) closes because T is right-invariant under 2T.
    for class in ConjugacyClass::ALL {
        let sigma = class.representative();
        let tensors = (0..200)
            .map(|k| geodesic_generator(&sigma, k as f64 / 200.0).map(|q| tetra_tensor(&q)))
            .collect::<tetraframe::Result<Vec<_>>>()?;
        let r = classify_loop(&tensors)?;
        println!("loop generated by {:<12} -> {} (holonomy {}, snap {:.1e})", sigma.to_string(), r.class, r.element, r.snap_distance);
    }
    Ok(())
}
