mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use polydg::mesh::io::{from_str, to_string};
use polydg::mesh::polygon::signed_area;
use polydg::mesh::{
    degenerate_center, gen_agglomerated, gen_degenerate_edges, gen_distorted, gen_rotating_hole,
    gen_triangular, gen_voronoi_regular, lloyd_residual, voronoi_regular_with_seeds, HoleOptions,
    PolyMesh,
};

fn area_sum(m: &PolyMesh) -> f64 {
    (0..m.n_elements()).map(|k| signed_area(&m.element_points(k))).sum()
}

fn undirected(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Element boundary edges counted against face edges (2 per interior face,
/// 1 per boundary face), plus stored normals checked against geometry.
fn check_faces(m: &PolyMesh) {
    let mut from_elements: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &m.elements {
        let n = e.vertices.len();
        for i in 0..n {
            *from_elements.entry(undirected(e.vertices[i], e.vertices[(i + 1) % n])).or_default() += 1;
        }
    }
    let mut from_faces: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &m.faces {
        let mult = if f.kind.is_interior() { 2 } else { 1 };
        *from_faces.entry(undirected(f.endpoints[0], f.endpoints[1])).or_default() += mult;
    }
    assert_eq!(from_elements, from_faces);

    for f in &m.faces {
        let [a, b] = f.endpoints.map(|v| m.vertices[v]);
        let t = b - a;
        // outward from plus for a counter-clockwise loop: tangent rotated clockwise
        let n = polydg::Point2::new(t.y, -t.x) * (1.0 / t.norm());
        assert!((n - f.normal).norm() < 1e-12);
        assert!((f.normal.norm() - 1.0).abs() < 1e-12);
        if let Some(minus) = f.minus {
            // the minus element traverses the edge b -> a, so its outward normal is -n
            let e = &m.elements[minus];
            let k = e.vertices.len();
            let found = (0..k).any(|i| e.vertices[i] == f.endpoints[1] && e.vertices[(i + 1) % k] == f.endpoints[0]);
            assert!(found, "minus element does not traverse the face reversed");
        }
    }
}

#[test]
fn voronoi_five_cells_cover_the_square() {
    for seed in [1, 7, 42] {
        let m = gen_voronoi_regular(5, 50, seed).unwrap();
        assert_eq!(m.n_elements(), 5);
        assert!((area_sum(&m) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn lloyd_converges() {
    for seed in [1, 3, 7, 11] {
        let (seeds, _) = voronoi_regular_with_seeds(5, 50, seed).unwrap();
        assert!(lloyd_residual(&seeds).unwrap() < 1e-3);
    }
    // larger meshes converge slowly but steadily
    let r = |it| lloyd_residual(&voronoi_regular_with_seeds(80, it, 3).unwrap().0).unwrap();
    let (r10, r50, r200) = (r(10), r(50), r(200));
    assert!(r50 < r10 && r200 < r50 && r200 < 1e-3, "{r10:e} {r50:e} {r200:e}");
}

#[test]
fn distorted_without_insertions_is_the_base_mesh() {
    let base = gen_voronoi_regular(20, 50, 5).unwrap();
    let d = gen_distorted(20, 0, 5).unwrap();
    assert_eq!(base, d);
}

#[test]
fn distorted_is_reproducible_and_only_adds_vertices() {
    let base = gen_voronoi_regular(20, 50, 9).unwrap();
    let a = gen_distorted(20, 3, 9).unwrap();
    let b = gen_distorted(20, 3, 9).unwrap();
    assert_eq!(a.vertices, b.vertices);
    assert_eq!(a.loops(), b.loops());
    assert_eq!(a.n_elements(), base.n_elements());
    assert!((area_sum(&a) - 1.0).abs() < 1e-10);
    let mut grew = false;
    for k in 0..base.n_elements() {
        assert!(a.elements[k].vertices.len() >= base.elements[k].vertices.len());
        grew |= a.elements[k].vertices.len() > base.elements[k].vertices.len();
    }
    assert!(grew);
}

#[test]
fn agglomerated_counts() {
    let m = gen_agglomerated(64, 8, 1).unwrap();
    assert_eq!(m.n_elements(), 8);
    assert!((area_sum(&m) - 1.0).abs() < 1e-10);
    m.validate().unwrap();
}

#[test]
fn degenerate_center_keeps_size_and_area() {
    let base = gen_degenerate_edges(0, 5).unwrap();
    let c0 = degenerate_center(&base);
    let (h0, a0) = (base.elements[c0].diameter, base.elements[c0].area);
    for level in 1..=4 {
        let m = gen_degenerate_edges(level, 5).unwrap();
        let c = degenerate_center(&m);
        assert_eq!(m.elements[c].vertices.len(), 3 << level);
        assert!((m.elements[c].diameter - h0).abs() < 1e-12);
        assert!((m.elements[c].area - a0).abs() < 1e-12);
    }
}

#[test]
fn rotating_hole_examples() {
    let opts = HoleOptions::default();
    let m = gen_rotating_hole(0.0, &opts).unwrap();
    assert!((area_sum(&m) - (1.0 - 0.4 * 0.06)).abs() < 1e-10);
    let m = gen_rotating_hole(95.0, &opts).unwrap();
    assert!(m.elements.iter().any(|e| e.vertices.len() > 3));
    let m = gen_rotating_hole(136.0, &opts).unwrap();
    m.validate().unwrap();
    assert!(m.elements.iter().all(|e| e.area > 0.0));
}

#[test]
fn face_partition_on_every_family() {
    let meshes = [
        gen_triangular(3).unwrap(),
        gen_voronoi_regular(20, 50, 2).unwrap(),
        gen_distorted(20, 3, 2).unwrap(),
        gen_agglomerated(80, 10, 2).unwrap(),
        gen_degenerate_edges(3, 5).unwrap(),
        gen_rotating_hole(30.0, &HoleOptions::default()).unwrap(),
    ];
    for m in &meshes {
        check_faces(m);
        assert!((area_sum(m) - m.domain_area).abs() < 1e-10 * m.domain_area);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn voronoi_invariants(n_el in 2usize..40, seed in any::<u64>()) {
        let m = gen_voronoi_regular(n_el, 10, seed).unwrap();
        prop_assert_eq!(m.n_elements(), n_el);
        prop_assert!((area_sum(&m) - 1.0).abs() < 1e-10);
        check_faces(&m);
        let again = gen_voronoi_regular(n_el, 10, seed).unwrap();
        prop_assert_eq!(&m.vertices, &again.vertices);
    }

    #[test]
    fn distorted_invariants(n_base in 4usize..30, ins in 0usize..4, seed in any::<u64>()) {
        let m = gen_distorted(n_base, ins, seed).unwrap();
        prop_assert!((area_sum(&m) - 1.0).abs() < 1e-10);
        check_faces(&m);
    }

    #[test]
    fn agglomerated_invariants(n_coarse in 2usize..10, seed in any::<u64>()) {
        let m = gen_agglomerated(8 * n_coarse, n_coarse, seed).unwrap();
        prop_assert_eq!(m.n_elements(), n_coarse);
        prop_assert!((area_sum(&m) - 1.0).abs() < 1e-10);
        check_faces(&m);
    }

    #[test]
    fn hole_invariants(theta in 0.0f64..180.0) {
        let m = gen_rotating_hole(theta, &HoleOptions::default()).unwrap();
        prop_assert!((area_sum(&m) - (1.0 - 0.4 * 0.06)).abs() < 1e-10);
        check_faces(&m);
    }

    #[test]
    fn text_round_trip(n_el in 2usize..30, seed in any::<u64>()) {
        let m = gen_distorted(n_el, 2, seed).unwrap();
        let back = from_str(&to_string(&m)).unwrap();
        prop_assert_eq!(&back.vertices, &m.vertices);
        prop_assert_eq!(back.loops(), m.loops());
    }
}
