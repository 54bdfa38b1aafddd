//! Mesh families: uniform triangles, Lloyd-relaxed clipped Voronoi
//! tessellations, distorted and agglomerated polygons, and triangles with a
//! recursively split central element.

use std::collections::{HashMap, VecDeque};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polygon::{centroid, clip_halfplane, merge_loops, signed_area};
use super::{build_connectivity, compact, weld, PolyMesh};
use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Smallest admissible Voronoi cell area.
const MIN_CELL_AREA: f64 = 1e-12;
const MAX_ATTEMPTS: u64 = 10;
/// Vertex welding tolerance on the unit square.
const WELD_TOL: f64 = 1e-10;
/// Minimum relative spacing between points inserted on one edge.
const MIN_SPACING: f64 = 0.02;

/// Uniform `n x n` grid of the unit square, each cell split along its main
/// diagonal.
pub fn gen_triangular(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::Config("triangular mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * h, j as f64 * h));
        }
    }
    let id = |i: usize, j: usize| i + (n + 1) * j;
    let mut loops = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            loops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            loops.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build_connectivity(vertices, loops)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoronoiOptions {
    pub lloyd_iters: usize,
}

impl Default for VoronoiOptions {
    fn default() -> Self {
        Self { lloyd_iters: 50 }
    }
}

struct SeedGrid {
    n: usize,
    buckets: Vec<Vec<usize>>,
}

impl SeedGrid {
    fn new(seeds: &[Point2]) -> Self {
        let n = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); n * n];
        for (i, s) in seeds.iter().enumerate() {
            let (bx, by) = Self::cell_of(n, *s);
            buckets[bx + n * by].push(i);
        }
        Self { n, buckets }
    }

    fn cell_of(n: usize, p: Point2) -> (usize, usize) {
        let c = |v: f64| ((v * n as f64).floor().max(0.0) as usize).min(n - 1);
        (c(p.x), c(p.y))
    }
}

/// Voronoi cells of `seeds` clipped to the unit square.
fn voronoi_cells(seeds: &[Point2]) -> Result<Vec<Vec<Point2>>> {
    let grid = SeedGrid::new(seeds);
    let n = grid.n as i64;
    let cell = 1.0 / grid.n as f64;
    let square = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let mut cells = Vec::with_capacity(seeds.len());
    for (i, &s) in seeds.iter().enumerate() {
        let (bx, by) = SeedGrid::cell_of(grid.n, s);
        let (bx, by) = (bx as i64, by as i64);
        let mut poly = square.clone();
        let mut r: i64 = 0;
        loop {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs().max(dy.abs()) != r {
                        continue;
                    }
                    let (cx, cy) = (bx + dx, by + dy);
                    if cx < 0 || cy < 0 || cx >= n || cy >= n {
                        continue;
                    }
                    for &j in &grid.buckets[(cx + n * cy) as usize] {
                        if j == i {
                            continue;
                        }
                        let t = seeds[j];
                        if t.dist(s) < 1e-12 {
                            return Err(Error::Generation(format!("seeds {i} and {j} coincide")));
                        }
                        let mid = s.lerp(t, 0.5);
                        poly = clip_halfplane(&poly, mid, t - s);
                    }
                }
            }
            let radius = poly.iter().map(|p| p.dist(s)).fold(0.0, f64::max);
            if r as f64 * cell > 2.0 * radius || r > n {
                break;
            }
            r += 1;
        }
        cells.push(poly);
    }
    Ok(cells)
}

fn mesh_from_cells(cells: &[Vec<Point2>]) -> Result<PolyMesh> {
    let mut points = Vec::new();
    let mut loops = Vec::with_capacity(cells.len());
    for (k, c) in cells.iter().enumerate() {
        let area = if c.len() >= 3 { signed_area(c) } else { 0.0 };
        if area < MIN_CELL_AREA {
            return Err(Error::Generation(format!("Voronoi cell {k} has area {area:e}")));
        }
        let start = points.len();
        points.extend_from_slice(c);
        loops.push((start..points.len()).collect());
    }
    let (verts, loops) = weld(&points, &loops, WELD_TOL);
    build_connectivity(verts, loops)
}

/// Lloyd-relaxed clipped Voronoi mesh from explicit seed points.
pub fn voronoi_from_seeds(seeds: &[Point2], lloyd_iters: usize) -> Result<PolyMesh> {
    let seeds = lloyd(seeds.to_vec(), lloyd_iters)?;
    mesh_from_cells(&voronoi_cells(&seeds)?)
}

/// Runs Lloyd iterations, returning the relaxed seeds.
pub fn lloyd(mut seeds: Vec<Point2>, iters: usize) -> Result<Vec<Point2>> {
    for _ in 0..iters {
        let cells = voronoi_cells(&seeds)?;
        for (s, c) in seeds.iter_mut().zip(&cells) {
            if c.len() >= 3 && signed_area(c) > 0.0 {
                *s = centroid(c);
            }
        }
    }
    Ok(seeds)
}

/// Maximum distance between each seed and the centroid of its cell.
pub fn lloyd_residual(seeds: &[Point2]) -> Result<f64> {
    let cells = voronoi_cells(seeds)?;
    Ok(seeds.iter().zip(&cells).map(|(s, c)| s.dist(centroid(c))).fold(0.0, f64::max))
}

fn random_seeds(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    (0..n).map(|_| Point2::new(rng.random::<f64>(), rng.random::<f64>())).collect()
}

/// Seeds and mesh of a regular polygonal mesh; see [`gen_voronoi_regular`].
pub fn voronoi_regular_with_seeds(
    n_el: usize,
    lloyd_iters: usize,
    seed: u64,
) -> Result<(Vec<Point2>, PolyMesh)> {
    if n_el < 2 {
        return Err(Error::Config("Voronoi mesh needs at least 2 elements".into()));
    }
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9)));
        let seeds = random_seeds(n_el, &mut rng);
        let relaxed = match lloyd(seeds, lloyd_iters) {
            Ok(s) => s,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        match voronoi_cells(&relaxed).and_then(|c| mesh_from_cells(&c)) {
            Ok(m) => return Ok((relaxed, m)),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Generation(format!(
        "no valid Voronoi mesh after {MAX_ATTEMPTS} attempts: {}",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Lloyd-relaxed Voronoi tessellation of the unit square with `n_el` cells.
/// Deterministic for a fixed `seed`; degenerate tessellations are regenerated
/// from a perturbed seed.
pub fn gen_voronoi_regular(n_el: usize, lloyd_iters: usize, seed: u64) -> Result<PolyMesh> {
    voronoi_regular_with_seeds(n_el, lloyd_iters, seed).map(|(_, m)| m)
}

/// Inserts points on faces. `params[f]` lists parameters in `(0, 1)` along
/// the face in its stored orientation.
fn insert_face_points(mesh: &PolyMesh, params: &HashMap<usize, Vec<f64>>) -> Result<PolyMesh> {
    let mut vertices = mesh.vertices.clone();
    let mut new_ids: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut faces: Vec<_> = params.keys().copied().collect();
    faces.sort_unstable();
    for f in faces {
        let face = &mesh.faces[f];
        let a = mesh.vertices[face.endpoints[0]];
        let b = mesh.vertices[face.endpoints[1]];
        let mut ts = params[&f].clone();
        ts.sort_by(f64::total_cmp);
        let ids = ts
            .iter()
            .map(|&t| {
                vertices.push(a.lerp(b, t));
                vertices.len() - 1
            })
            .collect();
        new_ids.insert(f, ids);
    }
    let loops = mesh
        .elements
        .iter()
        .map(|e| {
            let n = e.vertices.len();
            let mut lp = Vec::with_capacity(n);
            for i in 0..n {
                let a = e.vertices[i];
                lp.push(a);
                let fi = e.faces[i];
                if let Some(ids) = new_ids.get(&fi) {
                    if mesh.faces[fi].endpoints[0] == a {
                        lp.extend(ids.iter().copied());
                    } else {
                        lp.extend(ids.iter().rev().copied());
                    }
                }
            }
            lp
        })
        .collect();
    build_connectivity(vertices, loops)
}

fn spaced_params(count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..1000 {
        let mut ts: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
        ts.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        let ok = ts.iter().chain(std::iter::once(&1.0)).all(|&t| {
            let good = t - prev >= MIN_SPACING;
            prev = t;
            good
        });
        if ok {
            return ts;
        }
    }
    // fall back to evenly spaced points
    (1..=count).map(|j| j as f64 / (count + 1) as f64).collect()
}

/// Regular Voronoi mesh whose interior edges receive a random number (uniform
/// on `0..=insertions_per_edge`) of collinear points.
pub fn gen_distorted(n_base: usize, insertions_per_edge: usize, seed: u64) -> Result<PolyMesh> {
    gen_distorted_with(n_base, insertions_per_edge, seed, VoronoiOptions::default().lloyd_iters)
}

pub fn gen_distorted_with(
    n_base: usize,
    insertions_per_edge: usize,
    seed: u64,
    lloyd_iters: usize,
) -> Result<PolyMesh> {
    let base = gen_voronoi_regular(n_base, lloyd_iters, seed)?;
    if insertions_per_edge == 0 {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD157_0127_ED00_0000);
    let mut params = HashMap::new();
    for (fi, f) in base.faces.iter().enumerate() {
        if !f.kind.is_interior() {
            continue;
        }
        let count = rng.random_range(0..=insertions_per_edge);
        if count > 0 {
            params.insert(fi, spaced_params(count, &mut rng));
        }
    }
    insert_face_points(&base, &params)
}

/// Agglomerates a fine Voronoi mesh into `n_coarse` connected groups by
/// seeded region growing over the dual graph.
pub fn gen_agglomerated(n_fine: usize, n_coarse: usize, seed: u64) -> Result<PolyMesh> {
    gen_agglomerated_with(n_fine, n_coarse, seed, VoronoiOptions::default().lloyd_iters)
        .map(|(m, _, _)| m)
}

/// Returns the coarse mesh, the fine cells of each coarse element, and the
/// fine mesh.
pub fn gen_agglomerated_with(
    n_fine: usize,
    n_coarse: usize,
    seed: u64,
    lloyd_iters: usize,
) -> Result<(PolyMesh, Vec<Vec<usize>>, PolyMesh)> {
    if n_coarse == 0 || n_coarse >= n_fine {
        return Err(Error::Config(format!(
            "agglomeration needs 0 < n_coarse < n_fine (got {n_coarse}, {n_fine})"
        )));
    }
    let fine = gen_voronoi_regular(n_fine, lloyd_iters, seed)?;
    let mut adj = vec![Vec::new(); fine.n_elements()];
    for f in &fine.faces {
        if let Some(m) = f.minus {
            adj[f.plus].push(m);
            adj[m].push(f.plus);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA667_0000_0000_0001);
    for _ in 0..MAX_ATTEMPTS {
        let groups = grow_regions(&adj, n_coarse, &mut rng);
        let mut loops = Vec::with_capacity(n_coarse);
        let mut ok = true;
        for g in &groups {
            match merge_loops(g.iter().map(|&c| fine.elements[c].vertices.as_slice())) {
                Some(lp) => loops.push(lp),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let (verts, loops) = compact(&fine.vertices, loops);
        if let Ok(m) = build_connectivity(verts, loops) {
            return Ok((m, groups, fine));
        }
    }
    Err(Error::Generation(format!(
        "agglomeration into {n_coarse} simply connected groups failed after {MAX_ATTEMPTS} attempts"
    )))
}

fn grow_regions(adj: &[Vec<usize>], n_groups: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut owner = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); n_groups];
    let mut seeds: Vec<usize> = sample(rng, n, n_groups).into_vec();
    seeds.sort_unstable();
    for (g, &s) in seeds.iter().enumerate() {
        owner[s] = g;
        groups[g].push(s);
        queues[g].extend(adj[s].iter().copied());
    }
    let mut assigned = n_groups;
    while assigned < n {
        // grow the smallest group that can still grow
        let Some(g) = (0..n_groups)
            .filter(|&g| !queues[g].is_empty())
            .min_by_key(|&g| (groups[g].len(), g))
        else {
            break;
        };
        while let Some(c) = queues[g].pop_front() {
            if owner[c] == usize::MAX {
                owner[c] = g;
                groups[g].push(c);
                queues[g].extend(adj[c].iter().copied().filter(|&x| owner[x] == usize::MAX));
                assigned += 1;
                break;
            }
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Uniform triangular mesh whose central element has each edge recursively
/// halved `level` times, giving it `3 * 2^level` edges.
pub fn gen_degenerate_edges(level: usize, n_base: usize) -> Result<PolyMesh> {
    let base = gen_triangular(n_base)?;
    let center = Point2::new(0.5, 0.5);
    let (c, _) = base
        .elements
        .iter()
        .enumerate()
        .map(|(k, _)| (k, centroid(&base.element_points(k)).dist(center)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if level == 0 {
        return Ok(base);
    }
    let parts = 1usize << level;
    let ts: Vec<f64> = (1..parts).map(|j| j as f64 / parts as f64).collect();
    let params = base.elements[c].faces.iter().map(|&f| (f, ts.clone())).collect();
    insert_face_points(&base, &params)
}

/// Index of the element of a degenerate-edge mesh with the most edges.
pub fn degenerate_center(mesh: &PolyMesh) -> usize {
    (0..mesh.n_elements())
        .max_by_key(|&k| (mesh.elements[k].vertices.len(), usize::MAX - k))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_counts() {
        let m = gen_triangular(2).unwrap();
        assert_eq!(m.n_elements(), 8);
        assert_eq!(m.n_interior_faces(), 8);
        assert_eq!(m.faces.len(), 16);
        assert!((m.domain_area - 1.0).abs() < 1e-15);
        let m1 = gen_triangular(1).unwrap();
        assert_eq!(m1.n_elements(), 2);
        assert_eq!(m1.n_interior_faces(), 1);
    }

    #[test]
    fn four_symmetric_seeds_give_squares() {
        let seeds = [
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.25, 0.75),
            Point2::new(0.75, 0.75),
        ];
        let m = voronoi_from_seeds(&seeds, 0).unwrap();
        assert_eq!(m.n_elements(), 4);
        for e in &m.elements {
            assert_eq!(e.vertices.len(), 4);
            assert!((e.area - 0.25).abs() < 1e-14);
            assert!((e.diameter - 0.5f64.sqrt()).abs() < 1e-14);
        }
        assert_eq!(m.n_interior_faces(), 4);
    }

    #[test]
    fn degenerate_edge_counts() {
        for (level, edges) in [(0, 3), (1, 6), (4, 48)] {
            let m = gen_degenerate_edges(level, 5).unwrap();
            let c = degenerate_center(&m);
            assert_eq!(m.elements[c].vertices.len(), edges);
        }
    }

    #[test]
    fn region_growing_covers_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // path graph 0-1-2-...-9
        let adj: Vec<Vec<usize>> = (0..10)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i < 9 {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let g = grow_regions(&adj, 3, &mut rng);
        let total: usize = g.iter().map(|x| x.len()).sum();
        assert_eq!(total, 10);
    }
}
