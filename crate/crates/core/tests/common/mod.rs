#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use polydg::assembly::sparse::{self, SpMat};
use polydg::assembly::StokesSystem;
use polydg::mesh::{build_connectivity, PolyMesh};
use polydg::Point2;

pub fn dense(a: &SpMat) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    sparse::for_each(a, |i, j, v| d[(i, j)] += v);
    d
}

/// Single-element mesh of a counter-clockwise polygon.
pub fn polygon_mesh(points: &[Point2]) -> PolyMesh {
    build_connectivity(points.to_vec(), vec![(0..points.len()).collect()]).unwrap()
}

/// Coefficients of a polynomial in `t`, lowest first.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[f64], e: usize) -> Vec<f64> {
    (0..e).fold(vec![1.0], |acc, _| poly_mul(&acc, base))
}

/// `int_P x^a y^b` by Green's theorem, `oint x^(a+1) y^b / (a+1) dy`, with
/// every edge integral expanded exactly in the edge parameter.
pub fn green_monomial(poly: &[Point2], a: usize, b: usize) -> f64 {
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let x = poly_pow(&[p.x, q.x - p.x], a + 1);
        let y = poly_pow(&[p.y, q.y - p.y], b);
        let integrand = poly_mul(&x, &y);
        let line: f64 = integrand.iter().enumerate().map(|(k, c)| c / (k + 1) as f64).sum();
        total += line * (q.y - p.y) / (a + 1) as f64;
    }
    total
}

/// Brute-force inf-sup constant from the full dense pencil `(G, M_p)`:
/// all eigenpairs are computed and the one whose eigenvector is most aligned
/// with the constant pressure in the `M_p` inner product is discarded.
pub fn brute_force_beta(sys: &StokesSystem, eta: u8) -> f64 {
    let a = dense(&sys.a);
    let b = dense(&sys.b);
    let s = dense(&sys.s);
    let m = dense(&sys.m_p);
    let ainv_bt = a.clone().cholesky().expect("A is SPD").solve(&b.transpose());
    let mut g = &b * ainv_bt;
    if eta == 1 {
        g += s;
    }
    let g = (&g + g.transpose()) * 0.5;
    let l = m.clone().cholesky().expect("M_p is SPD").l();
    let linv = l.clone().try_inverse().unwrap();
    let c = &linv * g * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let one = DVector::from_vec(sys.disc.constant_pressure());
    let m1 = &m * &one;
    let norm1 = one.dot(&m1).sqrt();
    let lt_inv = linv.transpose();
    let mut best = (0usize, -1.0f64);
    for i in 0..eig.eigenvalues.len() {
        let q = &lt_inv * eig.eigenvectors.column(i);
        let align = (q.dot(&m1) / (norm1 * q.dot(&(&m * &q)).sqrt())).abs();
        if align > best.1 {
            best = (i, align);
        }
    }
    let lambda = (0..eig.eigenvalues.len())
        .filter(|&i| i != best.0)
        .map(|i| eig.eigenvalues[i])
        .fold(f64::INFINITY, f64::min);
    lambda.max(0.0).sqrt()
}

pub fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
}

pub fn random_vec(n: usize, seed: &mut u64) -> Vec<f64> {
    (0..n).map(|_| 2.0 * lcg(seed) - 1.0).collect()
}

/// `max / min` of a sequence of positive values.
pub fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
