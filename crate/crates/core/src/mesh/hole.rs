//! Uniform triangular mesh of the unit square with a rotated slender
//! rectangle carved out of its center.
//!
//! Cut points are created once per mesh edge and shared by the two
//! triangles on either side, so the clipped mesh is conforming by
//! construction. The boundary of each clipped triangle is recovered by
//! keeping the split edge pieces (of the triangle and of the reversed hole
//! boundary) that have the remaining region on their left and not on their
//! right.

use std::collections::HashMap;

use super::generators::gen_triangular;
use super::polygon::{merge_loops, signed_area};
use super::{build_connectivity, compact, PolyMesh};
use crate::error::{Error, Result};
use crate::geometry::{orient, Point2};

/// Clipped fragments smaller than this are merged into a neighbor.
const MIN_FRAGMENT_AREA: f64 = 1e-14;
const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoleOptions {
    /// Subdivisions of the background triangular mesh.
    pub base_n: usize,
    pub width: f64,
    pub height: f64,
}

impl Default for HoleOptions {
    fn default() -> Self {
        Self { base_n: 10, width: 0.4, height: 0.06 }
    }
}

fn rectangle(theta_deg: f64, opts: &HoleOptions) -> [Point2; 4] {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let (hw, hh) = (0.5 * opts.width, 0.5 * opts.height);
    [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        .map(|(x, y)| Point2::new(0.5 + c * x - s * y, 0.5 + s * x + c * y))
}

/// Distance-based point-on-segment test; returns the parameter along `a -> b`.
fn on_segment(a: Point2, b: Point2, p: Point2) -> Option<f64> {
    let d = b - a;
    let len2 = d.dot(d);
    let t = (p - a).dot(d) / len2;
    let eps = TOL / len2.sqrt();
    if t <= eps || t >= 1.0 - eps {
        return None;
    }
    let foot = a.lerp(b, t);
    (foot.dist(p) <= TOL).then_some(t)
}

fn strictly_inside_triangle(t: &[Point2; 3], p: Point2) -> bool {
    (0..3).all(|i| orient(t[i], t[(i + 1) % 3], p) > 0.0)
}

fn inside_or_on_convex(poly: &[Point2; 4], p: Point2) -> bool {
    (0..4).all(|i| orient(poly[i], poly[(i + 1) % 4], p) >= 0.0)
}

/// Mesh of the unit square minus a `width x height` rectangle centered at
/// `(0.5, 0.5)` rotated by `theta_deg` degrees.
pub fn gen_rotating_hole(theta_deg: f64, opts: &HoleOptions) -> Result<PolyMesh> {
    if !(opts.width > 0.0 && opts.height > 0.0) {
        return Err(Error::Config("hole dimensions must be positive".into()));
    }
    let half_diag = 0.5 * opts.width.hypot(opts.height);
    if half_diag >= 0.5 {
        return Err(Error::Config("hole must stay strictly inside the unit square".into()));
    }
    let base = gen_triangular(opts.base_n)?;
    let rect = rectangle(theta_deg, opts);

    let mut points = base.vertices.clone();
    // hole corners, aliased to mesh vertices they coincide with
    let corner_ids: Vec<usize> = rect
        .iter()
        .map(|&q| match points.iter().position(|&v| v.dist(q) <= TOL) {
            Some(v) => v,
            None => {
                points.push(q);
                points.len() - 1
            }
        })
        .collect();
    let n_base_vertices = base.vertices.len();

    // points along each hole edge: (parameter, id)
    let mut rect_points: Vec<Vec<(f64, usize)>> = (0..4)
        .map(|e| vec![(0.0, corner_ids[e]), (1.0, corner_ids[(e + 1) % 4])])
        .collect();
    for v in 0..n_base_vertices {
        if corner_ids.contains(&v) {
            continue;
        }
        for e in 0..4 {
            if let Some(s) = on_segment(rect[e], rect[(e + 1) % 4], points[v]) {
                rect_points[e].push((s, v));
            }
        }
    }

    // split points per undirected mesh edge, parameterised from min to max id
    let mut edge_splits: HashMap<(usize, usize), Vec<(f64, usize)>> = HashMap::new();
    for f in &base.faces {
        let (a, b) = (f.endpoints[0].min(f.endpoints[1]), f.endpoints[0].max(f.endpoints[1]));
        let (pa, pb) = (points[a], points[b]);
        let mut splits = Vec::new();
        for (ci, &q) in rect.iter().enumerate() {
            if corner_ids[ci] >= n_base_vertices {
                if let Some(t) = on_segment(pa, pb, q) {
                    splits.push((t, corner_ids[ci]));
                }
            }
        }
        for e in 0..4 {
            let (r0, r1) = (rect[e], rect[(e + 1) % 4]);
            let scale = pa.dist(pb) * r0.dist(r1);
            let sgn = |v: f64| if v > TOL * scale { 1 } else if v < -TOL * scale { -1 } else { 0 };
            let (oa, ob) = (orient(r0, r1, pa), orient(r0, r1, pb));
            let (o0, o1) = (orient(pa, pb, r0), orient(pa, pb, r1));
            if sgn(oa) * sgn(ob) < 0 && sgn(o0) * sgn(o1) < 0 {
                let t = oa / (oa - ob);
                let s = o0 / (o0 - o1);
                points.push(pa.lerp(pb, t));
                let id = points.len() - 1;
                splits.push((t, id));
                rect_points[e].push((s, id));
            }
        }
        splits.sort_by(|x, y| x.0.total_cmp(&y.0));
        edge_splits.insert((a, b), splits);
    }
    for rp in &mut rect_points {
        rp.sort_by(|x, y| x.0.total_cmp(&y.0));
        rp.dedup_by_key(|x| x.1);
    }
    let rect_min = Point2::new(
        rect.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
        rect.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
    );
    let rect_max = Point2::new(
        rect.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        rect.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );

    let mut loops: Vec<Vec<usize>> = Vec::new();
    for (k, el) in base.elements.iter().enumerate() {
        let tri_ids = [el.vertices[0], el.vertices[1], el.vertices[2]];
        let tri = tri_ids.map(|v| points[v]);
        let bb = &el.bbox;
        let touches = bb.max.x >= rect_min.x - TOL
            && bb.min.x <= rect_max.x + TOL
            && bb.max.y >= rect_min.y - TOL
            && bb.min.y <= rect_max.y + TOL;
        if !touches {
            loops.push(tri_ids.to_vec());
            continue;
        }
        let in_region = |p: Point2| strictly_inside_triangle(&tri, p) && !inside_or_on_convex(&rect, p);
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for i in 0..3 {
            let (a, b) = (tri_ids[i], tri_ids[(i + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let mut chain = vec![a];
            let splits = &edge_splits[&key];
            if a < b {
                chain.extend(splits.iter().map(|s| s.1));
            } else {
                chain.extend(splits.iter().rev().map(|s| s.1));
            }
            chain.push(b);
            candidates.extend(chain.windows(2).map(|w| (w[0], w[1])));
        }
        for rp in &rect_points {
            // reversed hole boundary keeps the solid region on its left
            candidates.extend(rp.windows(2).map(|w| (w[1].1, w[0].1)));
        }
        let mut kept: Vec<(usize, usize)> = Vec::new();
        for (u, v) in candidates {
            if u == v || kept.contains(&(u, v)) {
                continue;
            }
            let (pu, pv) = (points[u], points[v]);
            let d = pv - pu;
            let len = d.norm();
            let nl = Point2::new(-d.y / len, d.x / len);
            let delta = (1e-4 * len).min(1e-8);
            let mid = pu.lerp(pv, 0.5);
            if in_region(mid + nl * delta) && !in_region(mid - nl * delta) {
                kept.push((u, v));
            }
        }
        if kept.is_empty() {
            continue;
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &(u, v) in &kept {
            if next.insert(u, v).is_some() {
                return Err(Error::Generation(format!(
                    "element {k}: clipped region touches itself at a vertex (theta = {theta_deg})"
                )));
            }
        }
        let mut remaining: Vec<usize> = kept.iter().map(|e| e.0).collect();
        remaining.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        for &s in &remaining {
            if seen.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            seen.insert(s);
            let mut cur = next[&s];
            while cur != s {
                if !seen.insert(cur) {
                    return Err(Error::Generation(format!("element {k}: broken boundary chain")));
                }
                lp.push(cur);
                cur = *next.get(&cur).ok_or_else(|| {
                    Error::Generation(format!("element {k}: open boundary chain"))
                })?;
            }
            let area = signed_area(&lp.iter().map(|&v| points[v]).collect::<Vec<_>>());
            if area < 0.0 {
                return Err(Error::Generation(format!("element {k}: hole inside an element")));
            }
            loops.push(lp);
        }
    }

    let loops = merge_small_fragments(&points, loops)?;
    let (verts, loops) = compact(&points, loops);
    build_connectivity(verts, loops)
}

fn merge_small_fragments(points: &[Point2], mut loops: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    loop {
        let area = |lp: &Vec<usize>| signed_area(&lp.iter().map(|&v| points[v]).collect::<Vec<_>>());
        let Some(small) = loops.iter().position(|lp| area(lp) < MIN_FRAGMENT_AREA) else {
            return Ok(loops);
        };
        let edges: Vec<(usize, usize)> = {
            let lp = &loops[small];
            (0..lp.len()).map(|i| (lp[i], lp[(i + 1) % lp.len()])).collect()
        };
        // neighbor sharing the longest edge
        let mut best: Option<(usize, f64)> = None;
        for (j, lp) in loops.iter().enumerate() {
            if j == small {
                continue;
            }
            let n = lp.len();
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                if edges.contains(&(b, a)) {
                    let l = points[a].dist(points[b]);
                    if best.is_none_or(|(_, bl)| l > bl) {
                        best = Some((j, l));
                    }
                }
            }
        }
        let (j, _) = best.ok_or_else(|| Error::Generation("isolated tiny fragment".into()))?;
        let merged = merge_loops([loops[j].as_slice(), loops[small].as_slice()])
            .ok_or_else(|| Error::Generation("fragment merge produced a non-simple element".into()))?;
        loops[j] = merged;
        loops.remove(small);
    }
}
