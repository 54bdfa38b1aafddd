//! Scaled monomial bases on element bounding boxes.
//!
//! On element `K` with bounding box center `c` and half extents `s`, the
//! basis is `x̂^a ŷ^b` for `a + b <= k`, with `x̂ = (x - c_x)/s_x` and
//! `ŷ = (y - c_y)/s_y`, in graded lexicographic order. An optional
//! orthonormalisation against the element mass matrix replaces the monomials
//! by lower-triangular combinations of them.

use crate::geometry::{BoundingBox, Point2};
use crate::quadrature::QuadratureRule;

/// Dimension of the total-degree-`k` polynomial space in two variables.
pub const fn dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(a, b)` of the monomials of total degree at most `k`, by degree
/// and then by decreasing power of `x`.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(dim(k));
    for d in 0..=k {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BasisKind {
    #[default]
    Monomial,
    /// Modified Gram-Schmidt against the element mass matrix.
    Orthonormal,
}

#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub degree: usize,
    pub center: Point2,
    pub half_extents: Point2,
    exps: Vec<(usize, usize)>,
    /// Row-major `N x N` lower-triangular coefficients; `None` means plain
    /// monomials.
    coeffs: Option<Vec<f64>>,
}

impl ElementBasis {
    pub fn new(bbox: &BoundingBox, degree: usize) -> Self {
        Self {
            degree,
            center: bbox.center(),
            half_extents: bbox.half_extents(),
            exps: exponents(degree),
            coeffs: None,
        }
    }

    /// Basis orthonormal in `L^2(K)` for the inner product defined by `quad`.
    pub fn orthonormal(bbox: &BoundingBox, degree: usize, quad: &QuadratureRule) -> Self {
        let mut b = Self::new(bbox, degree);
        let n = b.dim();
        let nq = quad.len();
        // columns of sqrt(w) * monomial values; Gram-Schmidt on the samples
        // conditions better than working with the Gram matrix
        let mut cols = vec![vec![0.0; nq]; n];
        let mut v = vec![0.0; n];
        for (q, (&p, &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
            b.monomials(p, &mut v);
            let sw = w.sqrt();
            for j in 0..n {
                cols[j][q] = sw * v[j];
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            let mut col = cols[i].clone();
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            for _ in 0..2 {
                for j in 0..i {
                    let r = dot(&col, &cols[j]);
                    for (x, y) in col.iter_mut().zip(&cols[j]) {
                        *x -= r * y;
                    }
                    for k in 0..=j {
                        row[k] -= r * c[j * n + k];
                    }
                }
            }
            let nrm = dot(&col, &col).sqrt();
            for x in &mut col {
                *x /= nrm;
            }
            for x in &mut row {
                *x /= nrm;
            }
            cols[i] = col;
            c[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        b.coeffs = Some(c);
        b
    }

    pub fn build(kind: BasisKind, bbox: &BoundingBox, degree: usize, quad: &QuadratureRule) -> Self {
        match kind {
            BasisKind::Monomial => Self::new(bbox, degree),
            BasisKind::Orthonormal => Self::orthonormal(bbox, degree, quad),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.coeffs.is_some()
    }

    fn scaled(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.half_extents.x,
            (p.y - self.center.y) / self.half_extents.y,
        )
    }

    fn powers(&self, t: f64) -> Vec<f64> {
        let mut pw = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            pw[i] = pw[i - 1] * t;
        }
        pw
    }

    fn monomials(&self, p: Point2, out: &mut [f64]) {
        let (x, y) = self.scaled(p);
        let (px, py) = (self.powers(x), self.powers(y));
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = px[a] * py[b];
        }
    }

    fn combine(&self, raw: &[f64], out: &mut [f64]) {
        match &self.coeffs {
            None => out.copy_from_slice(raw),
            Some(c) => {
                let n = self.dim();
                for i in 0..n {
                    out[i] = (0..=i).map(|j| c[i * n + j] * raw[j]).sum();
                }
            }
        }
    }

    /// Values of all basis functions at `p`.
    pub fn eval(&self, p: Point2, vals: &mut [f64]) {
        let mut raw = vec![0.0; self.dim()];
        self.monomials(p, &mut raw);
        self.combine(&raw, vals);
    }

    /// Values and physical gradients of all basis functions at `p`.
    pub fn eval_grad(&self, p: Point2, vals: &mut [f64], gx: &mut [f64], gy: &mut [f64]) {
        let n = self.dim();
        let (x, y) = self.scaled(p);
        let (px, py) = (self.powers(x), self.powers(y));
        let (sx, sy) = (1.0 / self.half_extents.x, 1.0 / self.half_extents.y);
        let mut rv = vec![0.0; n];
        let mut rx = vec![0.0; n];
        let mut ry = vec![0.0; n];
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            rv[i] = px[a] * py[b];
            rx[i] = if a > 0 { a as f64 * px[a - 1] * py[b] * sx } else { 0.0 };
            ry[i] = if b > 0 { b as f64 * px[a] * py[b - 1] * sy } else { 0.0 };
        }
        self.combine(&rv, vals);
        self.combine(&rx, gx);
        self.combine(&ry, gy);
    }

    /// Coefficients of the constant function 1 in this basis.
    pub fn constant_coefficients(&self) -> Vec<f64> {
        let n = self.dim();
        let mut c = vec![0.0; n];
        match &self.coeffs {
            None => c[0] = 1.0,
            // phi_0 = c00 * 1, and phi_i is orthogonal to it for i > 0
            Some(m) => c[0] = 1.0 / m[0],
        }
        c
    }
}

/// Element basis values and gradients tabulated at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub n: usize,
    pub n_points: usize,
    /// `vals[q * n + i]`
    pub vals: Vec<f64>,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

impl Tabulation {
    pub fn new(basis: &ElementBasis, points: &[Point2]) -> Self {
        let n = basis.dim();
        let m = points.len();
        let mut t = Self { n, n_points: m, vals: vec![0.0; n * m], gx: vec![0.0; n * m], gy: vec![0.0; n * m] };
        for (q, &p) in points.iter().enumerate() {
            let r = q * n..(q + 1) * n;
            basis.eval_grad(p, &mut t.vals[r.clone()], &mut t.gx[r.clone()], &mut t.gy[r]);
        }
        t
    }

    pub fn val(&self, q: usize) -> &[f64] {
        &self.vals[q * self.n..(q + 1) * self.n]
    }

    pub fn grad_x(&self, q: usize) -> &[f64] {
        &self.gx[q * self.n..(q + 1) * self.n]
    }

    pub fn grad_y(&self, q: usize) -> &[f64] {
        &self.gy[q * self.n..(q + 1) * self.n]
    }
}
