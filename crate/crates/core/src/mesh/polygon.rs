//! Planar polygon utilities: areas, simplicity checks, ear clipping,
//! half-plane clipping and edge-cancelling unions of vertex loops.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{orient, Point2};

/// Signed shoelace area; positive for counter-clockwise loops.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    // shoelace relative to the first vertex to limit cancellation
    let o = poly[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += (poly[i] - o).cross(poly[i + 1] - o);
    }
    0.5 * s
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let origin = poly[0];
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = poly[i] - origin;
        let b = poly[(i + 1) % n] - origin;
        let c = a.cross(b);
        a2 += c;
        cx += (a.x + b.x) * c;
        cy += (a.y + b.y) * c;
    }
    Point2::new(origin.x + cx / (3.0 * a2), origin.y + cy / (3.0 * a2))
}

/// Maximum pairwise vertex distance.
pub fn diameter(poly: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

fn sign_tol(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

/// Is `p` (already known to be collinear with `a`-`b`) inside the closed segment?
fn within_segment(a: Point2, b: Point2, p: Point2, eps: f64) -> bool {
    let d = b - a;
    let len2 = d.dot(d);
    let t = (p - a).dot(d) / len2;
    t >= -eps && t <= 1.0 + eps
}

/// Closed-segment intersection test with a relative collinearity tolerance.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2, eps: f64) -> bool {
    let lp = p1.dist(p2);
    let lq = q1.dist(q2);
    let tol = eps * lp.max(lq) * lp.max(lq);
    let d1 = sign_tol(orient(q1, q2, p1), tol);
    let d2 = sign_tol(orient(q1, q2, p2), tol);
    let d3 = sign_tol(orient(p1, p2, q1), tol);
    let d4 = sign_tol(orient(p1, p2, q2), tol);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_segment(q1, q2, p1, eps))
        || (d2 == 0 && within_segment(q1, q2, p2, eps))
        || (d3 == 0 && within_segment(p1, p2, q1, eps))
        || (d4 == 0 && within_segment(p1, p2, q2, eps))
}

/// Checks that a closed loop is simple: non-adjacent edges do not touch and
/// adjacent edges do not fold back onto each other.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    const EPS: f64 = 1e-12;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.dist(b) == 0.0 {
            return false;
        }
        // adjacent edge folding back
        let c = poly[(i + 2) % n];
        let l = a.dist(b).max(b.dist(c));
        if orient(a, b, c).abs() <= EPS * l * l && (b - a).dot(c - b) < 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let p = poly[j];
            let q = poly[(j + 1) % n];
            if segments_intersect(a, b, p, q, EPS) {
                return false;
            }
        }
    }
    true
}

/// Even-odd point-in-polygon test.
pub fn contains_point(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn in_closed_triangle(a: Point2, b: Point2, c: Point2, p: Point2, tol: f64) -> bool {
    orient(a, b, p) >= -tol && orient(b, c, p) >= -tol && orient(c, a, p) >= -tol
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
///
/// Returns local index triples. Collinear vertices are kept; only ears with
/// strictly positive area are clipped, so every triangle is non-degenerate.
pub fn ear_clip(poly: &[Point2]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::Triangulation(format!("{n} vertices")));
    }
    let scale = diameter(poly);
    let area_tol = 1e-14 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut start = 0;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for step in 0..m {
            let k = (start + step) % m;
            let (ip, ic, inx) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ip], poly[ic], poly[inx]);
            if orient(a, b, c) <= area_tol {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ip || j == ic || j == inx {
                    return false;
                }
                let p = poly[j];
                if p == a || p == b || p == c {
                    return false;
                }
                in_closed_triangle(a, b, c, p, area_tol)
            });
            if blocked {
                continue;
            }
            tris.push([ip, ic, inx]);
            idx.remove(k);
            start = k % idx.len();
            clipped = true;
            break;
        }
        if !clipped {
            return Err(Error::Triangulation(format!(
                "no ear found with {} vertices remaining",
                idx.len()
            )));
        }
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if orient(a, b, c) <= area_tol {
        return Err(Error::Triangulation("degenerate final triangle".into()));
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Clips a convex polygon to the half-plane `normal · (x - origin) <= 0`.
pub fn clip_halfplane(poly: &[Point2], origin: Point2, normal: Point2) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = normal.dot(p - origin);
        let fq = normal.dot(q - origin);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p.lerp(q, t));
        }
    }
    out
}

/// Union of edge-adjacent vertex loops by cancelling shared edges.
///
/// Returns `None` when the remaining boundary is not one simple cycle (the
/// union has a hole or touches itself at a vertex).
pub fn merge_loops<'a, I>(loops: I) -> Option<Vec<usize>>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            let e = (lp[i], lp[(i + 1) % n]);
            let rev = (e.1, e.0);
            if let Some(c) = edges.get_mut(&rev) {
                if *c > 0 {
                    *c -= 1;
                    continue;
                }
            }
            *edges.entry(e).or_insert(0) += 1;
            order.push(e);
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut count = 0;
    let mut first: Option<usize> = None;
    for e in order {
        let c = edges.get_mut(&e).expect("edge recorded");
        if *c == 0 {
            continue;
        }
        *c -= 1;
        if next.insert(e.0, e.1).is_some() {
            return None;
        }
        count += 1;
        first = Some(first.map_or(e.0, |f: usize| f.min(e.0)));
    }
    let start = first?;
    let mut out = vec![start];
    let mut cur = next[&start];
    while cur != start {
        out.push(cur);
        if out.len() > count {
            return None;
        }
        cur = *next.get(&cur)?;
    }
    if out.len() != count {
        return None;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    fn tri_area(poly: &[Point2], t: &[usize; 3]) -> f64 {
        0.5 * orient(poly[t[0]], poly[t[1]], poly[t[2]])
    }

    #[test]
    fn triangle_is_its_own_triangulation() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let t = ear_clip(&p).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn convex_quad_gives_two_triangles() {
        let p = pts(&[(0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (0.0, 1.5)]);
        let t = ear_clip(&p).unwrap();
        assert_eq!(t.len(), 2);
        let s: f64 = t.iter().map(|t| tri_area(&p, t)).sum();
        assert!((s - signed_area(&p)).abs() < 1e-14);
    }

    #[test]
    fn l_shape_gives_four_triangles() {
        let p = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        // shoelace by hand: 2x2 square minus unit square
        let l_area = 3.0;
        assert!((signed_area(&p) - l_area).abs() < 1e-15);
        let t = ear_clip(&p).unwrap();
        assert_eq!(t.len(), 4);
        let s: f64 = t.iter().map(|t| tri_area(&p, t)).sum();
        assert!((s - l_area).abs() < 1e-12 * l_area);
        assert!(t.iter().all(|t| tri_area(&p, t) > 0.0));
    }

    #[test]
    fn collinear_vertices_do_not_produce_slivers() {
        let mut p = vec![Point2::new(0.0, 0.0)];
        for i in 1..16 {
            p.push(Point2::new(i as f64 / 16.0, 0.0));
        }
        p.push(Point2::new(1.0, 0.0));
        p.push(Point2::new(0.0, 1.0));
        let t = ear_clip(&p).unwrap();
        assert_eq!(t.len(), p.len() - 2);
        assert!(t.iter().all(|t| tri_area(&p, t) > 1e-6));
        let s: f64 = t.iter().map(|t| tri_area(&p, t)).sum();
        assert!((s - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simplicity_detects_bowtie() {
        let p = pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(!is_simple(&p));
        let q = pts(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        assert!(is_simple(&q));
    }

    #[test]
    fn merge_two_squares() {
        // 0-1-2 / 3-4-5 grid of two unit squares
        let a = [0usize, 1, 4, 3];
        let b = [1usize, 2, 5, 4];
        let m = merge_loops([&a[..], &b[..]]).unwrap();
        assert_eq!(m, vec![0, 1, 2, 5, 4, 3]);
    }

    #[test]
    fn merge_detects_ring() {
        // 3x3 grid of squares minus the middle: union has a hole
        let v = |i: usize, j: usize| i + 4 * j;
        let mut loops = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                if i == 1 && j == 1 {
                    continue;
                }
                loops.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
            }
        }
        assert!(merge_loops(loops.iter().map(|l| l.as_slice())).is_none());
    }

    #[test]
    fn halfplane_clip_of_square() {
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let c = clip_halfplane(&sq, Point2::new(0.5, 0.0), Point2::new(1.0, 0.0));
        assert!((signed_area(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn centroid_of_square() {
        let sq = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        let c = centroid(&sq);
        assert!((c.x - 1.0).abs() < 1e-15 && (c.y - 1.0).abs() < 1e-15);
    }
}
