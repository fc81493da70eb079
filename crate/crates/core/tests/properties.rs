use approx::assert_relative_eq;
use maq_core::degeneration::{quasi_maximum, quasi_maximum_holds, DiscreteMetricSpace};
use maq_core::hyp3::{distance, exp_map, g_norm, log_map, parallel_transport, Isometry};
use maq_core::ma_linear::{build_structures, classify_graph_plane, graph_form_values, Mat2, Plane4};
use maq_core::quaternion::{classify_structure, spin_action, Quaternion, StructureClass};
use proptest::prelude::*;

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_array)
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat().prop_filter("nonzero", |q| q.norm() > 0.1).prop_map(|q| q.normalize())
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.2f64..3.0).prop_map(|(x, y, z)| [x, y, z])
}

fn vector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
}

fn isometry() -> impl Strategy<Value = Isometry> {
    prop_oneof![
        Just(Isometry::Identity),
        (-1.0f64..1.0, -1.0f64..1.0, 0.5f64..2.0)
            .prop_map(|(a, b, radius)| Isometry::Flip { center: [a, b], radius }),
        (0.5f64..2.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_map(|(scale, a, b)| Isometry::Similarity { scale, shift: [a, b] }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quaternion_norm_is_multiplicative(x in quat(), y in quat()) {
        assert_relative_eq!((x * y).norm(), x.norm() * y.norm(), max_relative = 1e-12, epsilon = 1e-14);
    }

    #[test]
    fn spin_action_is_special_orthogonal(x in unit_quat(), y in unit_quat()) {
        let m = spin_action(x, y).unwrap();
        prop_assert!(m.orthogonality_defect() < 1e-12);
        assert_relative_eq!(m.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_spin_is_an_automorphism(z in unit_quat()) {
        let m = spin_action(z, z).unwrap();
        match classify_structure(&m) {
            StructureClass::Automorphism(w) => {
                prop_assert!(w.max_abs_diff(z.canonical_sign()) < 1e-10);
            }
            other => prop_assert!(false, "classified as {:?}", other),
        }
    }

    #[test]
    fn plane_projector_ignores_spanning_choice(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
        s in 0.2f64..3.0, t in -3.0f64..3.0,
    ) {
        let p = Plane4::graph(Mat2::new(a, b, c, d));
        let [u, v] = p.spanning();
        let w: [f64; 4] = core::array::from_fn(|k| s * v[k] + t * u[k]);
        let q = Plane4::from_vectors(u, w).unwrap();
        prop_assert!(p.projector_distance(&q) < 1e-12);
    }

    #[test]
    fn symmetric_graphs_are_lagrangian(a in -3.0f64..3.0, b in -3.0f64..3.0, d in -3.0f64..3.0) {
        let pack = build_structures();
        let m = Mat2::new(a, b, b, d);
        let flags = classify_graph_plane(&pack, &m).unwrap();
        prop_assert!(flags.omega_k, "{:?}", flags);
        let vals = graph_form_values(&pack, &m);
        prop_assert!(vals[2].abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric_and_triangular(p in point(), q in point(), r in point()) {
        let (pq, qp) = (distance(p, q), distance(q, p));
        assert_relative_eq!(pq, qp, max_relative = 1e-12, epsilon = 1e-14);
        prop_assert!(pq <= distance(p, r) + distance(r, q) + 1e-10);
        prop_assert_eq!(distance(p, p), 0.0);
    }

    #[test]
    fn exp_inverts_log(p in point(), q in point()) {
        let back = exp_map(p, log_map(p, q));
        let scale = q[2].max(1.0);
        for k in 0..3 {
            prop_assert!((back[k] - q[k]).abs() <= 1e-9 * scale, "{:?} vs {:?}", back, q);
        }
        assert_relative_eq!(g_norm(p, log_map(p, q)), distance(p, q), max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn transport_is_an_isometry_of_fibres(p in point(), q in point(), u in vector(), v in vector()) {
        let (tu, tv) = (parallel_transport(p, q, u), parallel_transport(p, q, v));
        let lhs = maq_core::hyp3::metric(q, tu, tv);
        let rhs = maq_core::hyp3::metric(p, u, v);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-9, epsilon = 1e-9);
    }

    #[test]
    fn isometries_preserve_distance(iso in isometry(), p in point(), q in point()) {
        let d0 = distance(p, q);
        let d1 = distance(iso.apply(p), iso.apply(q));
        assert_relative_eq!(d0, d1, max_relative = 1e-9, epsilon = 1e-10);
    }

    #[test]
    fn isometries_push_unit_vectors_to_unit_vectors(iso in isometry(), p in point(), v in vector()) {
        prop_assume!(g_norm(p, v) > 1e-3);
        let (a, b) = (g_norm(p, v), g_norm(iso.apply(p), iso.push(p, v)));
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn quasi_maximum_walk_terminates_at_witness(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 1.0f64..50.0), 2..40),
        start in 0usize..40,
    ) {
        let points: Vec<[f64; 2]> = pts.iter().map(|p| [p.0, p.1]).collect();
        let f: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let space = DiscreteMetricSpace::from_planar_points(&points, f).unwrap();
        let x = start % space.len();
        let y = quasi_maximum(&space, x).unwrap();
        prop_assert!(quasi_maximum_holds(&space, x, y));
    }
}
