//! Gauss rules on segments, triangles and sub-triangulated polygons.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::PolyMesh;

/// Highest polynomial order any rule here is built for.
pub const MAX_ORDER: usize = 80;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Points and weights of a rule; `degree` is the polynomial exactness.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::QuadratureOrder(order, MAX_ORDER));
    }
    Ok(())
}

/// Gauss-Legendre rule on `[0, 1]` exact for degree `order`.
#[derive(Clone, Debug)]
pub struct LineRule {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub degree: usize,
}

impl LineRule {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        let n = (order + 1).div_ceil(2).max(1);
        let (x, w) = gauss_legendre(n);
        Ok(Self {
            t: x.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
            w: w.iter().map(|&w| 0.5 * w).collect(),
            degree: 2 * n - 1,
        })
    }
}

/// Collapsed (Duffy) Gauss rule on the reference triangle
/// `(0,0), (1,0), (0,1)`, exact for total degree `order`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    /// Barycentric-like coordinates `(s, t)` with the point `s*(1,0) + t*(0,1)`.
    pub st: Vec<(f64, f64)>,
    /// Weights summing to 1/2.
    pub w: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        // the collapse adds one degree in the collapsed direction
        let n = (order + 2).div_ceil(2).max(1);
        let (x, wx) = gauss_legendre(n);
        let mut st = Vec::with_capacity(n * n);
        let mut w = Vec::with_capacity(n * n);
        for j in 0..n {
            let eta = 0.5 * (x[j] + 1.0);
            for i in 0..n {
                let xi = 0.5 * (x[i] + 1.0);
                st.push((xi * (1.0 - eta), eta));
                w.push(0.25 * wx[i] * wx[j] * (1.0 - eta));
            }
        }
        Ok(Self { st, w, degree: 2 * n - 2 })
    }

    /// Maps the rule onto the physical triangle `a, b, c` (any orientation).
    pub fn map(&self, a: Point2, b: Point2, c: Point2, out: &mut QuadratureRule) {
        let jac = (b - a).cross(c - a).abs();
        for (&(s, t), &w) in self.st.iter().zip(&self.w) {
            out.points.push(a + (b - a) * s + (c - a) * t);
            out.weights.push(w * jac);
        }
    }
}

/// Composite rule over the sub-triangles of element `k`.
pub fn element_quadrature_with(mesh: &PolyMesh, k: usize, rule: &TriangleRule) -> QuadratureRule {
    let el = &mesh.elements[k];
    let mut q = QuadratureRule {
        points: Vec::with_capacity(rule.w.len() * el.sub_triangles.len()),
        weights: Vec::with_capacity(rule.w.len() * el.sub_triangles.len()),
        degree: rule.degree,
    };
    for t in &el.sub_triangles {
        let [a, b, c] = t.map(|v| mesh.vertices[v]);
        rule.map(a, b, c, &mut q);
    }
    q
}

pub fn element_quadrature(mesh: &PolyMesh, k: usize, order: usize) -> Result<QuadratureRule> {
    Ok(element_quadrature_with(mesh, k, &TriangleRule::new(order)?))
}

/// Rule on the segment `a -> b`, with weights scaled by its length.
pub fn segment_quadrature_with(a: Point2, b: Point2, rule: &LineRule) -> QuadratureRule {
    let len = a.dist(b);
    QuadratureRule {
        points: rule.t.iter().map(|&t| a.lerp(b, t)).collect(),
        weights: rule.w.iter().map(|&w| w * len).collect(),
        degree: rule.degree,
    }
}

/// Gauss-Legendre rule with `ceil((order+1)/2)` points on face `f`, ordered
/// from its first to its second endpoint.
pub fn face_quadrature(mesh: &PolyMesh, f: usize, order: usize) -> Result<QuadratureRule> {
    let [a, b] = mesh.faces[f].endpoints.map(|v| mesh.vertices[v]);
    Ok(segment_quadrature_with(a, b, &LineRule::new(order)?))
}
