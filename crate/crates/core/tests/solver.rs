mod common;

use nalgebra::{DMatrix, DVector};

use polydg::assembly::sparse::{dot, matvec, norm};
use polydg::assembly::{Discretization, ExactSolution, ManufacturedSolution, Options, StokesSystem, ZeroSolution};
use polydg::harness::{family_mesh, Family, FamilyParams};
use polydg::mesh::polygon::contains_point;
use polydg::mesh::{gen_triangular, PolyMesh};
use polydg::solver::{apply_saddle, compute_errors, compute_errors_with_order, solve_stationary};
use polydg::Point2;

use common::dense;

#[test]
fn homogeneous_data_gives_zero() {
    let mesh = family_mesh(Family::Voronoi, 1, 0.0, &FamilyParams::default()).unwrap();
    let sys = StokesSystem::assemble(&mesh, Options::new(2, 1), &ZeroSolution).unwrap();
    let sol = solve_stationary(&sys).unwrap();
    assert!(sol.u.iter().chain(&sol.p).all(|&x| x == 0.0));
}

#[test]
fn unbordered_residual_is_small() {
    let exact = ManufacturedSolution::new(1.0);
    for family in Family::ALL {
        let mesh = family_mesh(family, 1, 30.0, &FamilyParams::default()).unwrap();
        let sys = StokesSystem::assemble(&mesh, Options::new(2, 2), &exact).unwrap();
        let sol = solve_stationary(&sys).unwrap();
        let (top, bot) = apply_saddle(&sys, &sol.u, &sol.p);
        let rhs: Vec<f64> = sys.rhs_u.iter().chain(&sys.rhs_p).copied().collect();
        let r: Vec<f64> = top.iter().chain(&bot).zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm(&r) <= 1e-9 * norm(&rhs), "{family}: {:e}", norm(&r) / norm(&rhs));
        assert!(sol.residual_norm <= 1e-9 * sol.rhs_norm);
        let p_norm = dot(&sol.p, &matvec(&sys.m_p, &sol.p)).sqrt();
        assert!(sol.mean_pressure.abs() <= 1e-10 * p_norm);
    }
}

#[test]
fn two_elements_match_dense_oracle() {
    let mesh = gen_triangular(1).unwrap();
    assert_eq!(mesh.n_elements(), 2);
    let sys = StokesSystem::assemble(&mesh, Options::new(1, 1), &ManufacturedSolution::new(1.0)).unwrap();
    let sol = solve_stationary(&sys).unwrap();

    let (nu, np) = (sys.dofs().n_u, sys.dofs().n_p);
    let n = nu + np + 1;
    let (a, b, s, m) = (dense(&sys.a), dense(&sys.b), dense(&sys.s), dense(&sys.m_p));
    let c = &m * DVector::from_vec(sys.disc.constant_pressure());
    let mut k = DMatrix::zeros(n, n);
    k.view_mut((0, 0), (nu, nu)).copy_from(&a);
    k.view_mut((nu, 0), (np, nu)).copy_from(&b);
    k.view_mut((0, nu), (nu, np)).copy_from(&b.transpose());
    k.view_mut((nu, nu), (np, np)).copy_from(&(-s));
    for i in 0..np {
        k[(nu + i, n - 1)] = c[i];
        k[(n - 1, nu + i)] = c[i];
    }
    let mut rhs = DVector::zeros(n);
    for (i, v) in sys.rhs_u.iter().chain(&sys.rhs_p).enumerate() {
        rhs[i] = *v;
    }
    let x = k.full_piv_lu().solve(&rhs).unwrap();
    let ours = DVector::from_iterator(nu + np, sol.u.iter().chain(&sol.p).copied());
    let diff = (&ours - x.rows(0, nu + np)).norm();
    assert!(diff <= 1e-10 * x.rows(0, nu + np).norm(), "{diff:e}");
    assert!((sol.multiplier - x[n - 1]).abs() <= 1e-10 * x.norm());
}

/// Piecewise-polynomial field given by coefficient vectors, evaluated on the
/// element containing the point.
struct Injected<'a> {
    disc: &'a Discretization<'a>,
    u: &'a [f64],
    p: &'a [f64],
}

impl Injected<'_> {
    fn element(&self, x: Point2) -> usize {
        let mesh: &PolyMesh = self.disc.mesh;
        (0..mesh.n_elements())
            .find(|&k| contains_point(&mesh.element_points(k), x))
            .unwrap_or_else(|| {
                // boundary points: owner of the nearest boundary face
                let mut best = (0, f64::INFINITY);
                for f in mesh.faces.iter().filter(|f| !f.kind.is_interior()) {
                    let [a, b] = f.endpoints.map(|v| mesh.vertices[v]);
                    let t = ((x - a).dot(b - a) / (b - a).dot(b - a)).clamp(0.0, 1.0);
                    let d = x.dist(a.lerp(b, t));
                    if d < best.1 {
                        best = (f.plus, d);
                    }
                }
                best.0
            })
    }
}

impl ExactSolution for Injected<'_> {
    fn velocity(&self, x: Point2) -> [f64; 2] {
        self.disc.eval_velocity(self.element(x), self.u, x).0
    }
    fn velocity_grad(&self, x: Point2) -> [[f64; 2]; 2] {
        self.disc.eval_velocity(self.element(x), self.u, x).1
    }
    fn pressure(&self, x: Point2) -> f64 {
        self.disc.eval_pressure(self.element(x), self.p, x)
    }
    fn forcing(&self, _: Point2) -> [f64; 2] {
        [0.0; 2]
    }
}

#[test]
fn self_comparison() {
    let mesh = gen_triangular(4).unwrap();
    let sys = StokesSystem::assemble(&mesh, Options::new(2, 2), &ManufacturedSolution::new(1.0)).unwrap();
    let sol = solve_stationary(&sys).unwrap();
    let inj = Injected { disc: &sys.disc, u: &sol.u, p: &sol.p };
    let e = compute_errors(&sys, &sol.u, &sol.p, &inj).unwrap();
    assert!(e.err_u_l2 <= 1e-12 && e.err_p_l2 <= 1e-12, "{e:?}");

    // a globally continuous field has no jumps at all
    let disc = &sys.disc;
    let u = disc.project_velocity(&|x| [x.x * x.y - x.y * x.y, 1.0 + x.x]).unwrap();
    let p = disc.project_pressure(&|x| x.x - 2.0 * x.y * x.y).unwrap();
    let inj = Injected { disc, u: &u, p: &p };
    let e = compute_errors(&sys, &u, &p, &inj).unwrap();
    for v in [e.err_u_l2, e.err_u_dg, e.err_p_l2, e.err_p_jump] {
        assert!(v <= 1e-12, "{e:?}");
    }
}

#[test]
fn errors_are_resolved_by_the_quadrature() {
    let mesh = gen_triangular(4).unwrap();
    let exact = ManufacturedSolution::new(1.0);
    let sys = StokesSystem::assemble(&mesh, Options::new(2, 2), &exact).unwrap();
    let sol = solve_stationary(&sys).unwrap();
    let e1 = compute_errors(&sys, &sol.u, &sol.p, &exact).unwrap();
    let order = sys.disc.opts.order() + polydg::solver::ERROR_QUAD_EXTRA;
    let e2 = compute_errors_with_order(&sys, &sol.u, &sol.p, &exact, 2 * order).unwrap();
    let pairs = [
        (e1.err_u_l2, e2.err_u_l2),
        (e1.err_u_dg, e2.err_u_dg),
        (e1.err_p_l2, e2.err_p_l2),
        (e1.err_p_jump, e2.err_p_jump),
    ];
    for (a, b) in pairs {
        assert!((a - b).abs() <= 1e-8 * b, "{a:e} vs {b:e}");
    }
    let sps = dot(&sol.p, &matvec(&sys.s, &sol.p)).sqrt();
    assert!((e1.err_p_jump - sps).abs() <= 1e-10 * sps);
}

/// Stream function `x^2 y^2` with pressure `xy - 1/4`.
struct PolynomialPair {
    mu: f64,
}

impl ExactSolution for PolynomialPair {
    fn velocity(&self, p: Point2) -> [f64; 2] {
        [2.0 * p.x * p.x * p.y, -2.0 * p.x * p.y * p.y]
    }
    fn velocity_grad(&self, p: Point2) -> [[f64; 2]; 2] {
        [[4.0 * p.x * p.y, 2.0 * p.x * p.x], [-2.0 * p.y * p.y, -4.0 * p.x * p.y]]
    }
    fn pressure(&self, p: Point2) -> f64 {
        p.x * p.y - 0.25
    }
    fn forcing(&self, p: Point2) -> [f64; 2] {
        [-4.0 * self.mu * p.y + p.y, 4.0 * self.mu * p.x + p.x]
    }
}

#[test]
fn polynomial_pairs_are_reproduced() {
    for family in [Family::Triangular, Family::Voronoi, Family::Agglomerated] {
        let mesh = family_mesh(family, 1, 0.0, &FamilyParams::default()).unwrap();
        for mu in [1.0, 0.1] {
            let exact = PolynomialPair { mu };
            let opts = Options { mu, ..Options::new(3, 2) };
            let sys = StokesSystem::assemble(&mesh, opts, &exact).unwrap();
            let sol = solve_stationary(&sys).unwrap();
            let e = compute_errors(&sys, &sol.u, &sol.p, &exact).unwrap();
            let zero = vec![0.0; sys.dofs().n_u];
            let scale = compute_errors(&sys, &zero, &vec![0.0; sys.dofs().n_p], &exact).unwrap();
            assert!(e.err_u_dg <= 1e-8 * scale.err_u_dg, "{family} mu {mu}: {e:?}");
            assert!(e.err_p_l2 <= 1e-8 * scale.err_p_l2, "{family} mu {mu}: {e:?}");
        }
    }
}

/// Harmonic velocity with boundary data and no forcing.
struct Harmonic;

impl ExactSolution for Harmonic {
    fn velocity(&self, p: Point2) -> [f64; 2] {
        [p.x * p.x - p.y * p.y, -2.0 * p.x * p.y]
    }
    fn velocity_grad(&self, p: Point2) -> [[f64; 2]; 2] {
        [[2.0 * p.x, -2.0 * p.y], [-2.0 * p.y, -2.0 * p.x]]
    }
    fn pressure(&self, _: Point2) -> f64 {
        0.0
    }
    fn forcing(&self, _: Point2) -> [f64; 2] {
        [0.0; 2]
    }
}

#[test]
fn energy_identity_at_the_discrete_solution() {
    let mesh = family_mesh(Family::Distorted, 1, 0.0, &FamilyParams::default()).unwrap();
    let sys = StokesSystem::assemble(&mesh, Options::new(2, 2), &Harmonic).unwrap();
    let sol = solve_stationary(&sys).unwrap();
    let lhs = sys.saddle_quadratic(&sol.u, &sol.p);
    let rhs = dot(&sol.u, &matvec(&sys.a, &sol.u)) + dot(&sol.p, &matvec(&sys.s, &sol.p));
    assert!(rhs > 0.0);
    assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} vs {rhs}");
}
