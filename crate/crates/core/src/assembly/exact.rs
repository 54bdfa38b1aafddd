use std::f64::consts::PI;

use crate::geometry::Point2;
use crate::quadrature::gauss_legendre;

/// Data of a manufactured Stokes problem: velocity, its gradient, pressure,
/// forcing and Dirichlet trace.
pub trait ExactSolution: Sync {
    fn velocity(&self, p: Point2) -> [f64; 2];
    /// `grad[c][d] = d u_c / d x_d`.
    fn velocity_grad(&self, p: Point2) -> [[f64; 2]; 2];
    fn pressure(&self, p: Point2) -> f64;
    fn forcing(&self, p: Point2) -> [f64; 2];
    fn dirichlet(&self, p: Point2) -> [f64; 2] {
        self.velocity(p)
    }
}

/// Homogeneous data; the discrete solution is zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroSolution;

impl ExactSolution for ZeroSolution {
    fn velocity(&self, _: Point2) -> [f64; 2] {
        [0.0; 2]
    }
    fn velocity_grad(&self, _: Point2) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn pressure(&self, _: Point2) -> f64 {
        0.0
    }
    fn forcing(&self, _: Point2) -> [f64; 2] {
        [0.0; 2]
    }
}

/// `g(t) = t (t - 1) (t - 1/2)^2`, the one-dimensional factor of the pressure
/// exponent.
fn g(t: f64) -> f64 {
    t * (t - 1.0) * (t - 0.5) * (t - 0.5)
}

fn dg(t: f64) -> f64 {
    (t - 0.5) * (4.0 * t * t - 4.0 * t + 0.5)
}

/// Divergence-free trigonometric velocity with an exponential pressure on the
/// unit square:
///
/// `u = (-cos(2 pi x) sin(2 pi y), sin(2 pi x) cos(2 pi y))`,
/// `p = 1 - exp(-phi) - mean`, `phi = g(x) + g(y)`.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedSolution {
    pub mu: f64,
    /// Mean of `1 - exp(-phi)` over the unit square, subtracted from `p`.
    pub pressure_mean: f64,
}

impl ManufacturedSolution {
    pub fn new(mu: f64) -> Self {
        // exp(-phi) separates, so the mean is 1 - (int_0^1 exp(-g))^2
        let (x, w) = gauss_legendre(40);
        let i: f64 = x.iter().zip(&w).map(|(&x, &w)| 0.5 * w * (-g(0.5 * (x + 1.0))).exp()).sum();
        Self { mu, pressure_mean: 1.0 - i * i }
    }

    fn raw_pressure(&self, p: Point2) -> f64 {
        1.0 - (-(g(p.x) + g(p.y))).exp()
    }
}

impl ExactSolution for ManufacturedSolution {
    fn velocity(&self, p: Point2) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * p.x).sin_cos();
        let (sy, cy) = (2.0 * PI * p.y).sin_cos();
        [-cx * sy, sx * cy]
    }

    fn velocity_grad(&self, p: Point2) -> [[f64; 2]; 2] {
        let (sx, cx) = (2.0 * PI * p.x).sin_cos();
        let (sy, cy) = (2.0 * PI * p.y).sin_cos();
        let t = 2.0 * PI;
        [[t * sx * sy, -t * cx * cy], [t * cx * cy, -t * sx * sy]]
    }

    fn pressure(&self, p: Point2) -> f64 {
        self.raw_pressure(p) - self.pressure_mean
    }

    fn forcing(&self, p: Point2) -> [f64; 2] {
        // -mu lap u = 8 pi^2 mu u, grad p = exp(-phi) grad phi
        let u = self.velocity(p);
        let e = (-(g(p.x) + g(p.y))).exp();
        let k = 8.0 * PI * PI * self.mu;
        [k * u[0] + e * dg(p.x), k * u[1] + e * dg(p.y)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_is_divergence_free() {
        let s = ManufacturedSolution::new(1.0);
        for i in 0..20 {
            let p = Point2::new(0.05 * i as f64 + 0.013, 0.9 - 0.037 * i as f64);
            let gr = s.velocity_grad(p);
            assert!((gr[0][0] + gr[1][1]).abs() < 1e-10);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = ManufacturedSolution::new(0.7);
        let h = 1e-5;
        let p = Point2::new(0.31, 0.77);
        let gr = s.velocity_grad(p);
        for c in 0..2 {
            let dx = (s.velocity(Point2::new(p.x + h, p.y))[c] - s.velocity(Point2::new(p.x - h, p.y))[c]) / (2.0 * h);
            let dy = (s.velocity(Point2::new(p.x, p.y + h))[c] - s.velocity(Point2::new(p.x, p.y - h))[c]) / (2.0 * h);
            assert!((dx - gr[c][0]).abs() < 1e-7);
            assert!((dy - gr[c][1]).abs() < 1e-7);
        }
        // forcing = -mu lap u + grad p, checked with second differences
        let lap = |c: usize| {
            let u = |x: f64, y: f64| s.velocity(Point2::new(x, y))[c];
            let h = 1e-4;
            (u(p.x + h, p.y) + u(p.x - h, p.y) + u(p.x, p.y + h) + u(p.x, p.y - h) - 4.0 * u(p.x, p.y)) / (h * h)
        };
        let px = (s.pressure(Point2::new(p.x + h, p.y)) - s.pressure(Point2::new(p.x - h, p.y))) / (2.0 * h);
        let py = (s.pressure(Point2::new(p.x, p.y + h)) - s.pressure(Point2::new(p.x, p.y - h))) / (2.0 * h);
        let f = s.forcing(p);
        assert!((f[0] - (-0.7 * lap(0) + px)).abs() < 1e-4);
        assert!((f[1] - (-0.7 * lap(1) + py)).abs() < 1e-4);
    }

    #[test]
    fn pressure_has_zero_mean() {
        let s = ManufacturedSolution::new(1.0);
        let (x, w) = gauss_legendre(30);
        let mut m = 0.0;
        for i in 0..30 {
            for j in 0..30 {
                let p = Point2::new(0.5 * (x[i] + 1.0), 0.5 * (x[j] + 1.0));
                m += 0.25 * w[i] * w[j] * s.pressure(p);
            }
        }
        assert!(m.abs() < 1e-14);
    }
}
