//! Polygonal meshes of the unit square.
//!
//! A [`PolyMesh`] is built from a vertex table and counter-clockwise element
//! loops by [`build_connectivity`], which extracts faces by matching
//! undirected vertex pairs. Faces are numbered in order of first appearance
//! while walking elements in index order, so the numbering is reproducible.

mod generators;
mod hole;
pub mod io;
pub mod polygon;

use std::collections::HashMap;

pub use generators::{
    degenerate_center, gen_agglomerated, gen_agglomerated_with, gen_degenerate_edges, gen_distorted,
    gen_distorted_with, gen_triangular, gen_voronoi_regular, lloyd, lloyd_residual,
    voronoi_from_seeds, voronoi_regular_with_seeds, VoronoiOptions,
};
pub use hole::{gen_rotating_hole, HoleOptions};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2};

/// A polygonal element.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyElement {
    /// Counter-clockwise vertex loop.
    pub vertices: Vec<usize>,
    pub diameter: f64,
    pub area: f64,
    pub bbox: BoundingBox,
    /// Triangles (global vertex indices) covering the element.
    pub sub_triangles: Vec<[usize; 3]>,
    /// Face index of each loop edge `(vertices[i], vertices[i + 1])`.
    pub faces: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
    HoleBoundary,
}

impl FaceKind {
    pub fn is_interior(self) -> bool {
        self == FaceKind::Interior
    }
}

/// An edge of the mesh skeleton.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Endpoints in the orientation of the `plus` element's loop.
    pub endpoints: [usize; 2],
    pub length: f64,
    pub kind: FaceKind,
    pub plus: usize,
    pub minus: Option<usize>,
    /// Unit normal, outward from `plus` (and from the domain on boundary faces).
    pub normal: Point2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Point2>,
    pub elements: Vec<PolyElement>,
    pub faces: Vec<Face>,
    /// Area enclosed by the boundary cycles (outer minus holes).
    pub domain_area: f64,
    pub n_holes: usize,
}

impl PolyMesh {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn element_points(&self, k: usize) -> Vec<Point2> {
        self.elements[k].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.kind.is_interior()).count()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.len() - self.n_interior_faces()
    }

    /// Element loops as plain index vectors.
    pub fn loops(&self) -> Vec<Vec<usize>> {
        self.elements.iter().map(|e| e.vertices.clone()).collect()
    }

    /// Euler characteristic `V - E + F` counting elements as faces. Equals
    /// `1 - n_holes` for a connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        let used = self.used_vertex_count();
        used as i64 - self.faces.len() as i64 + self.elements.len() as i64
    }

    fn used_vertex_count(&self) -> usize {
        let mut used = vec![false; self.vertices.len()];
        for e in &self.elements {
            for &v in &e.vertices {
                used[v] = true;
            }
        }
        used.iter().filter(|&&u| u).count()
    }

    /// Checks the stored invariants. Intended for tests and debug runs.
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.elements.iter().map(|e| e.area).sum();
        if (total - self.domain_area).abs() > 1e-10 * self.domain_area.abs() {
            return Err(Error::Generation(format!(
                "element areas sum to {total}, domain area is {}",
                self.domain_area
            )));
        }
        for (k, e) in self.elements.iter().enumerate() {
            let pts = self.element_points(k);
            if !polygon::is_simple(&pts) {
                return Err(Error::SelfIntersecting(k));
            }
            let shoelace = polygon::signed_area(&pts);
            let tri_sum: f64 = e
                .sub_triangles
                .iter()
                .map(|t| {
                    0.5 * crate::geometry::orient(
                        self.vertices[t[0]],
                        self.vertices[t[1]],
                        self.vertices[t[2]],
                    )
                })
                .sum();
            if (shoelace - e.area).abs() > 1e-12 * e.area
                || (tri_sum - e.area).abs() > 1e-12 * e.area
            {
                return Err(Error::Generation(format!("element {k}: area mismatch")));
            }
            if pts.iter().any(|&p| !e.bbox.contains(p)) {
                return Err(Error::Generation(format!("element {k}: bbox")));
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if (f.normal.norm() - 1.0).abs() > 1e-14 {
                return Err(Error::Generation(format!("face {fi}: normal not unit")));
            }
            if let Some(m) = f.minus {
                for k in [f.plus, m] {
                    let vs = &self.elements[k].vertices;
                    if !vs.contains(&f.endpoints[0]) || !vs.contains(&f.endpoints[1]) {
                        return Err(Error::Generation(format!(
                            "face {fi}: element {k} does not contain both endpoints"
                        )));
                    }
                }
            }
        }
        // each element edge maps to exactly one face with matching endpoints
        let mut uses = vec![0usize; self.faces.len()];
        for e in &self.elements {
            let n = e.vertices.len();
            for i in 0..n {
                let (a, b) = (e.vertices[i], e.vertices[(i + 1) % n]);
                let f = &self.faces[e.faces[i]];
                let [p, q] = f.endpoints;
                if !((p == a && q == b) || (p == b && q == a)) {
                    return Err(Error::Generation("face/edge mismatch".into()));
                }
                uses[e.faces[i]] += 1;
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            let expect = if f.kind.is_interior() { 2 } else { 1 };
            if uses[fi] != expect {
                return Err(Error::Generation(format!("face {fi} used {} times", uses[fi])));
            }
        }
        Ok(())
    }
}

fn outward_normal(a: Point2, b: Point2) -> (Point2, f64) {
    let d = b - a;
    let len = d.norm();
    (Point2::new(d.y / len, -d.x / len), len)
}

/// Builds faces, neighbors, normals and per-element geometry from vertex
/// coordinates and counter-clockwise element loops.
pub fn build_connectivity(vertices: Vec<Point2>, loops: Vec<Vec<usize>>) -> Result<PolyMesh> {
    let mut elements = Vec::with_capacity(loops.len());
    for (k, lp) in loops.into_iter().enumerate() {
        if lp.len() < 3 {
            return Err(Error::TooFewVertices(k));
        }
        if let Some(&v) = lp.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::VertexOutOfRange(k, v));
        }
        let pts: Vec<Point2> = lp.iter().map(|&v| vertices[v]).collect();
        let area = polygon::signed_area(&pts);
        if area == 0.0 || !area.is_finite() {
            return Err(Error::ZeroArea(k, area));
        }
        if !polygon::is_simple(&pts) {
            return Err(Error::SelfIntersecting(k));
        }
        if area < 0.0 {
            return Err(Error::NotCounterClockwise(k));
        }
        let local = polygon::ear_clip(&pts)?;
        let sub_triangles = local.iter().map(|t| [lp[t[0]], lp[t[1]], lp[t[2]]]).collect();
        elements.push(PolyElement {
            diameter: polygon::diameter(&pts),
            area,
            bbox: BoundingBox::from_points(pts.iter().copied()),
            sub_triangles,
            faces: Vec::with_capacity(lp.len()),
            vertices: lp,
        });
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    for k in 0..elements.len() {
        let n = elements[k].vertices.len();
        for i in 0..n {
            let a = elements[k].vertices[i];
            let b = elements[k].vertices[(i + 1) % n];
            let key = (a.min(b), a.max(b));
            let fi = match lookup.get(&key) {
                Some(&fi) => {
                    let f = &mut faces[fi];
                    if f.minus.is_some() || f.plus == k {
                        return Err(Error::NonManifoldEdge(key.0, key.1));
                    }
                    if f.endpoints != [b, a] {
                        return Err(Error::InconsistentOrientation(key.0, key.1));
                    }
                    f.minus = Some(k);
                    f.kind = FaceKind::Interior;
                    fi
                }
                None => {
                    let (normal, length) = outward_normal(vertices[a], vertices[b]);
                    faces.push(Face {
                        endpoints: [a, b],
                        length,
                        kind: FaceKind::Boundary,
                        plus: k,
                        minus: None,
                        normal,
                    });
                    lookup.insert(key, faces.len() - 1);
                    faces.len() - 1
                }
            };
            elements[k].faces.push(fi);
        }
    }

    let (domain_area, n_holes) = classify_boundary(&vertices, &mut faces);
    Ok(PolyMesh { vertices, elements, faces, domain_area, n_holes })
}

/// Splits boundary faces into cycles; clockwise cycles bound holes.
fn classify_boundary(vertices: &[Point2], faces: &mut [Face]) -> (f64, usize) {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut pinched = false;
    for (fi, f) in faces.iter().enumerate() {
        if !f.kind.is_interior() && next.insert(f.endpoints[0], fi).is_some() {
            pinched = true;
        }
    }
    let mut visited = vec![false; faces.len()];
    let mut area = 0.0;
    let mut holes = 0;
    for start in 0..faces.len() {
        if faces[start].kind.is_interior() || visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        loop {
            visited[cur] = true;
            cycle.push(cur);
            let Some(&nf) = next.get(&faces[cur].endpoints[1]) else { break };
            if nf == start || visited[nf] {
                break;
            }
            cur = nf;
        }
        let pts: Vec<Point2> = cycle.iter().map(|&f| vertices[faces[f].endpoints[0]]).collect();
        let a = polygon::signed_area(&pts);
        area += a;
        if a < 0.0 && !pinched {
            holes += 1;
            for &f in &cycle {
                faces[f].kind = FaceKind::HoleBoundary;
            }
        }
    }
    (area, holes)
}

/// Polygonal sub-triangulation of a single element, returned as global
/// vertex triples.
pub fn sub_triangulate(element: &PolyElement, vertices: &[Point2]) -> Result<Vec<[usize; 3]>> {
    let pts: Vec<Point2> = element.vertices.iter().map(|&v| vertices[v]).collect();
    if !polygon::is_simple(&pts) {
        return Err(Error::Triangulation("polygon is not simple".into()));
    }
    let local = polygon::ear_clip(&pts)?;
    Ok(local
        .into_iter()
        .map(|t| [element.vertices[t[0]], element.vertices[t[1]], element.vertices[t[2]]])
        .collect())
}

/// Merges vertices closer than `tol` (grid hashing) and rewrites the loops,
/// dropping consecutive duplicates and unreferenced vertices.
pub(crate) fn weld(points: &[Point2], loops: &[Vec<usize>], tol: f64) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let cell = tol.max(f64::MIN_POSITIVE);
    let key = |p: Point2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut rep = vec![usize::MAX; points.len()];
    let mut out: Vec<Point2> = Vec::new();
    let mut used = vec![false; points.len()];
    for lp in loops {
        for &v in lp {
            used[v] = true;
        }
    }
    for (i, &p) in points.iter().enumerate() {
        if !used[i] {
            continue;
        }
        let (kx, ky) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &j in list {
                        if out[j].dist(p) <= tol {
                            found = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        rep[i] = match found {
            Some(j) => j,
            None => {
                out.push(p);
                grid.entry((kx, ky)).or_default().push(out.len() - 1);
                out.len() - 1
            }
        };
    }
    let new_loops = loops
        .iter()
        .map(|lp| {
            let mut l: Vec<usize> = Vec::with_capacity(lp.len());
            for &v in lp {
                let r = rep[v];
                if l.last() != Some(&r) {
                    l.push(r);
                }
            }
            while l.len() > 1 && l.first() == l.last() {
                l.pop();
            }
            l
        })
        .collect();
    (out, new_loops)
}

/// Drops vertices not referenced by any loop, renumbering in first-use order
/// of the original numbering.
pub(crate) fn compact(points: &[Point2], loops: Vec<Vec<usize>>) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let mut map = vec![usize::MAX; points.len()];
    let mut used = vec![false; points.len()];
    for lp in &loops {
        for &v in lp {
            used[v] = true;
        }
    }
    let mut out = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        if used[i] {
            map[i] = out.len();
            out.push(p);
        }
    }
    let loops = loops.into_iter().map(|lp| lp.into_iter().map(|v| map[v]).collect()).collect();
    (out, loops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_two_triangles() -> PolyMesh {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        build_connectivity(v, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap()
    }

    #[test]
    fn two_triangles_share_one_face() {
        let m = unit_square_two_triangles();
        assert_eq!(m.n_interior_faces(), 1);
        assert_eq!(m.n_boundary_faces(), 4);
        m.validate().unwrap();
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn single_square_has_four_boundary_faces() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let m = build_connectivity(v, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(m.n_interior_faces(), 0);
        assert_eq!(m.n_boundary_faces(), 4);
        assert!((m.domain_area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_normal_is_negated_from_minus_side() {
        let m = unit_square_two_triangles();
        let f = m.faces.iter().find(|f| f.kind.is_interior()).unwrap();
        // outward normal of the minus element along its own traversal b -> a
        let a = m.vertices[f.endpoints[1]];
        let b = m.vertices[f.endpoints[0]];
        let (n_minus, _) = outward_normal(a, b);
        assert!((f.normal.x + n_minus.x).abs() < 1e-14);
        assert!((f.normal.y + n_minus.y).abs() < 1e-14);
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.5, -1.0),
            Point2::new(0.5, 0.5),
        ];
        let err = build_connectivity(v, vec![vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]]);
        assert!(matches!(
            err,
            Err(Error::NonManifoldEdge(..)) | Err(Error::InconsistentOrientation(..))
        ));
    }

    #[test]
    fn self_intersecting_and_degenerate_loops_are_rejected() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(matches!(
            build_connectivity(v.clone(), vec![vec![0, 1, 2, 3]]),
            Err(Error::SelfIntersecting(0)) | Err(Error::ZeroArea(0, _))
        ));
        let w = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(matches!(build_connectivity(w, vec![vec![0, 1, 2]]), Err(Error::ZeroArea(0, _))));
        assert!(matches!(
            build_connectivity(v, vec![vec![0, 3, 1, 2]]),
            Err(Error::NotCounterClockwise(0)) | Err(Error::SelfIntersecting(0))
        ));
    }

    #[test]
    fn sub_triangulate_l_shape() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let m = build_connectivity(v, vec![vec![0, 1, 2, 3, 4, 5]]).unwrap();
        let t = sub_triangulate(&m.elements[0], &m.vertices).unwrap();
        assert_eq!(t.len(), 4);
        assert!((m.elements[0].area - 3.0).abs() < 1e-14);
    }
}
