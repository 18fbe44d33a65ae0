//! Property tests of the tensor, recovery, quaternion and I/O layers.

use nalgebra::Vector3;
use proptest::prelude::*;

use tetraframe::field::{BcMode, FieldParams, Target};
use tetraframe::frames::{tensor2_from_frame, tensor3_from_frame, Frame};
use tetraframe::grid::{build_domain, Shape};
use tetraframe::io::checkpoint::{read_checkpoint_from, write_checkpoint_to};
use tetraframe::io::export::{csv_string, read_csv_str};
use tetraframe::quaternion::{
    quaternion_of_tensor, rotation_of, tetra_tensor, BinaryTetraElement, ConjugacyClass, UnitQuaternion,
};
use tetraframe::recovery::{mb_angle, recover_tetrahedron, DEFAULT_TOL};
use tetraframe::seed::{seed_field, SeedSpec};
use tetraframe::tensor::{project3, TracelessSymTensor2, TracelessSymTensor3};

fn quaternion() -> impl Strategy<Value = UnitQuaternion> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|[a, b, c, d]| UnitQuaternion::normalized(a, b, c, d))
}

fn tensor7() -> impl Strategy<Value = TracelessSymTensor3> {
    prop::array::uniform7(-1.5f64..1.5).prop_map(TracelessSymTensor3::new)
}

fn element() -> impl Strategy<Value = BinaryTetraElement> {
    (0usize..24).prop_map(|i| BinaryTetraElement::all()[i])
}

fn rotated_standard(q: &UnitQuaternion) -> Frame {
    let r = rotation_of(q);
    Frame::from_vectors_unchecked(Frame::standard_tetrahedron().vectors3().iter().map(|v| (r * v).as_slice().to_vec()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotated_frames_lie_on_the_variety(q in quaternion()) {
        let t = tensor3_from_frame(&rotated_standard(&q)).unwrap();
        prop_assert!(t.variety_residual() < 1e-12);
        prop_assert!(t.block_sum_residual() < 1e-12);
        prop_assert!(t.potential_w() < 1e-24);
        prop_assert!((t.to_vector() - tetra_tensor(&q).to_vector()).norm() < 1e-12);
    }

    #[test]
    fn tensor_map_is_rotation_equivariant(q in quaternion(), p in quaternion()) {
        let r = rotation_of(&p);
        let moved = tetra_tensor(&(p * q));
        let rotated = tetra_tensor(&q).rotate(&r);
        prop_assert!((moved.to_vector() - rotated.to_vector()).norm() < 1e-12);
    }

    #[test]
    fn potential_is_rotation_invariant_and_non_negative(t in tensor7(), p in quaternion()) {
        let w = t.potential_w();
        prop_assert!(w >= 0.0);
        let wr = t.rotate(&rotation_of(&p)).potential_w();
        prop_assert!((w - wr).abs() <= 1e-10 * (1.0 + w));
    }

    #[test]
    fn projection_is_idempotent(t in tensor7()) {
        let again = project3(&t.full());
        prop_assert!((again.to_vector() - t.to_vector()).norm() < 1e-13);
    }

    #[test]
    fn recovery_inverts_the_tensor_map(q in quaternion()) {
        let f = rotated_standard(&q);
        let r = recover_tetrahedron(&tetra_tensor(&q), DEFAULT_TOL).unwrap();
        prop_assert!(r.frame.set_distance(&f) < 1e-9);
        let back = quaternion_of_tensor(&tetra_tensor(&q), DEFAULT_TOL).unwrap();
        // the fibre over a tensor is the right coset q·2T
        let d = BinaryTetraElement::all().iter().map(|g| back.chordal_distance(&(q * g.to_quaternion()))).fold(f64::INFINITY, f64::min);
        prop_assert!(d < 1e-9);
    }

    #[test]
    fn planar_angle_round_trips(th in -10.0f64..10.0) {
        let t = tensor2_from_frame(&Frame::mercedes(th)).unwrap();
        let expect = TracelessSymTensor2::from_angle(th);
        prop_assert!((t.q[0] - expect.q[0]).abs() < 1e-12 && (t.q[1] - expect.q[1]).abs() < 1e-12);
        let period = std::f64::consts::TAU / 3.0;
        let d = (mb_angle(&t) - th).rem_euclid(period);
        prop_assert!(d.min(period - d) < 1e-12);
    }

    #[test]
    fn classes_are_conjugation_invariant(g in element(), h in element()) {
        prop_assert_eq!(ConjugacyClass::of(&(h * g * h.inverse())), ConjugacyClass::of(&g));
        prop_assert_eq!(ConjugacyClass::of(&g.inverse()) == ConjugacyClass::of(&g), matches!(ConjugacyClass::of(&g), ConjugacyClass::Identity | ConjugacyClass::MinusOne | ConjugacyClass::Quarter));
    }

    #[test]
    fn rotation_map_is_a_homomorphism(p in quaternion(), q in quaternion()) {
        let lhs = rotation_of(&(p * q));
        let rhs = rotation_of(&p) * rotation_of(&q);
        prop_assert!((lhs - rhs).norm() < 1e-13);
        prop_assert!((rotation_of(&p).determinant() - 1.0).abs() < 1e-13);
        let v = Vector3::new(0.3, -0.2, 0.9);
        prop_assert!(((rotation_of(&p) * v).norm() - v.norm()).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn checkpoint_and_csv_round_trips_are_bitwise(seed in any::<u64>(), noise in 0.0f64..2.0, weak in any::<bool>(), planar_mb in any::<bool>()) {
        let (shape, target) = if planar_mb {
            (Shape::Disk { radius: 1.0 }, Target::Mb)
        } else {
            (Shape::Ball { radius: 1.0 }, Target::Tetra)
        };
        let mode = if weak { BcMode::Weak } else { BcMode::Strong };
        let d = build_domain(&shape, 0.25).unwrap();
        let f = seed_field(d, target, FieldParams::new(0.1, 0.05, 0.05), mode, &SeedSpec::Zero, &SeedSpec::Zero, noise, seed).unwrap();
        let mut bytes = vec![];
        write_checkpoint_to(&mut bytes, &f, 17).unwrap();
        let (g, it) = read_checkpoint_from(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(it, 17);
        prop_assert!(g.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(g.target, f.target);
        prop_assert_eq!(g.bc_mode, f.bc_mode);
        let mut h = g.clone();
        h.values.iter_mut().for_each(|v| *v = 0.0);
        read_csv_str(&csv_string(&f), &mut h).unwrap();
        prop_assert!(h.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
