//! Interior-penalty velocity form, velocity-pressure coupling, pressure jump
//! stabilisation, mass matrices and right-hand side.
//!
//! Velocities are stored component-major within each element (all `x`
//! coefficients, then all `y` coefficients); pressure coefficients follow the
//! element order. The algebraic system is
//!
//! ```text
//! [ A  B^T ] [U]   [rhs_u]
//! [ B  -S  ] [P] = [rhs_p]
//! ```

mod exact;
mod forms;
pub mod sparse;

pub use exact::{ExactSolution, ManufacturedSolution, ZeroSolution};
pub use forms::{
    assemble_coupling_form, assemble_mass, assemble_pressure_stab, assemble_rhs,
    assemble_velocity_form,
};
pub use sparse::{SpMat, Triplets};

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::basis::{self, BasisKind, ElementBasis, Tabulation};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::PolyMesh;
use crate::quadrature::{element_quadrature_with, LineRule, QuadratureRule, TriangleRule};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyParams {
    pub gamma_v: f64,
    pub gamma_p: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self { gamma_v: 10.0, gamma_p: 10.0 }
    }
}

impl PenaltyParams {
    pub fn new(gamma_v: f64, gamma_p: f64) -> Result<Self> {
        if !(gamma_v > 0.0 && gamma_p > 0.0 && gamma_v.is_finite() && gamma_p.is_finite()) {
            return Err(Error::Config(format!(
                "penalty constants must be positive (gamma_v = {gamma_v}, gamma_p = {gamma_p})"
            )));
        }
        Ok(Self { gamma_v, gamma_p })
    }
}

/// Velocity penalty: `gamma_v * max(ell^2 mu / h_K)` over the neighbors of an
/// interior face, `gamma_v * ell^2 mu / h_K` on a boundary face (`h_minus =
/// None`).
pub fn sigma_v(gamma_v: f64, ell: usize, mu: f64, h_plus: f64, h_minus: Option<f64>) -> f64 {
    let s = |h: f64| (ell * ell) as f64 * mu / h;
    gamma_v * h_minus.map_or(s(h_plus), |hm| s(h_plus).max(s(hm)))
}

/// Pressure penalty `gamma_p * min(h_K / m)` on an interior face.
pub fn sigma_p(gamma_p: f64, m: usize, h_plus: f64, h_minus: f64) -> f64 {
    gamma_p * (h_plus / m as f64).min(h_minus / m as f64)
}

pub fn face_sigma_v(mesh: &PolyMesh, f: usize, gamma_v: f64, ell: usize, mu: f64) -> f64 {
    let face = &mesh.faces[f];
    let h = |k: usize| mesh.elements[k].diameter;
    sigma_v(gamma_v, ell, mu, h(face.plus), face.minus.map(h))
}

pub fn face_sigma_p(mesh: &PolyMesh, f: usize, gamma_p: f64, m: usize) -> Result<f64> {
    let face = &mesh.faces[f];
    let minus = face.minus.ok_or(Error::BoundaryFacePenalty(f))?;
    let h = |k: usize| mesh.elements[k].diameter;
    Ok(sigma_p(gamma_p, m, h(face.plus), h(minus)))
}

/// How the jump of a vector field pairs with the normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VectorJump {
    /// `[[v]] = v+ (x) n+ + v- (x) n-`.
    #[default]
    Full,
    /// Symmetrised outer products `(v n^T + n v^T) / 2`.
    Symmetric,
}

/// Which of the two equivalent expressions of the coupling form to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CouplingForm {
    /// `-(p, div v) + sum_F ({p}, [[v]] . n)` over all faces.
    #[default]
    Divergence,
    /// `(grad p, v) - sum_interior ([[p]], {v})`.
    Gradient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Velocity degree.
    pub ell: usize,
    /// Pressure degree.
    pub m: usize,
    pub mu: f64,
    pub penalty: PenaltyParams,
    pub jump: VectorJump,
    pub coupling: CouplingForm,
    pub basis: BasisKind,
    /// Overrides the default quadrature order `2 max(ell, m) + 2`.
    pub quad_order: Option<usize>,
}

impl Options {
    pub fn new(ell: usize, m: usize) -> Self {
        Self {
            ell,
            m,
            mu: 1.0,
            penalty: PenaltyParams::default(),
            jump: VectorJump::default(),
            coupling: CouplingForm::default(),
            basis: BasisKind::default(),
            quad_order: None,
        }
    }

    pub fn order(&self) -> usize {
        self.quad_order.unwrap_or(2 * self.ell.max(self.m) + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.m == 0 {
            return Err(Error::Config(format!(
                "polynomial degrees must be at least 1 (ell = {}, m = {})",
                self.ell, self.m
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be positive, got {}", self.mu)));
        }
        PenaltyParams::new(self.penalty.gamma_v, self.penalty.gamma_p)?;
        Ok(())
    }
}

/// Contiguous per-element dof blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    /// Scalar velocity basis size per element.
    pub n_ell: usize,
    pub n_m: usize,
    pub u_offsets: Vec<usize>,
    pub p_offsets: Vec<usize>,
    pub n_u: usize,
    pub n_p: usize,
}

impl DofMap {
    pub fn new(n_el: usize, ell: usize, m: usize) -> Self {
        let (n_ell, n_m) = (basis::dim(ell), basis::dim(m));
        Self {
            n_ell,
            n_m,
            u_offsets: (0..n_el).map(|k| 2 * n_ell * k).collect(),
            p_offsets: (0..n_el).map(|k| n_m * k).collect(),
            n_u: 2 * n_ell * n_el,
            n_p: n_m * n_el,
        }
    }

    pub fn u_dof(&self, k: usize, comp: usize, i: usize) -> usize {
        self.u_offsets[k] + comp * self.n_ell + i
    }

    pub fn p_dof(&self, k: usize, i: usize) -> usize {
        self.p_offsets[k] + i
    }

    pub fn u_range(&self, k: usize) -> std::ops::Range<usize> {
        self.u_offsets[k]..self.u_offsets[k] + 2 * self.n_ell
    }

    pub fn p_range(&self, k: usize) -> std::ops::Range<usize> {
        self.p_offsets[k]..self.p_offsets[k] + self.n_m
    }
}

/// Mesh, degrees, bases and quadrature shared by all forms.
#[derive(Clone, Debug)]
pub struct Discretization<'a> {
    pub mesh: &'a PolyMesh,
    pub opts: Options,
    pub dofs: DofMap,
    pub vbasis: Vec<ElementBasis>,
    pub pbasis: Vec<ElementBasis>,
    pub elem_quad: Vec<QuadratureRule>,
    pub line: LineRule,
}

/// One side of a face with its traces tabulated at the face points.
pub(crate) struct FaceSide {
    pub k: usize,
    /// `+1` on `K+`, `-1` on `K-`.
    pub eps: f64,
    /// Weight in the average: 1/2 on interior faces, 1 on boundary faces.
    pub alpha: f64,
    pub v: Tabulation,
    pub p: Tabulation,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a PolyMesh, opts: Options) -> Result<Self> {
        opts.validate()?;
        let tri = TriangleRule::new(opts.order())?;
        let line = LineRule::new(opts.order())?;
        let elem_quad: Vec<_> =
            (0..mesh.n_elements()).map(|k| element_quadrature_with(mesh, k, &tri)).collect();
        let make = |deg: usize| -> Vec<ElementBasis> {
            mesh.elements
                .iter()
                .zip(&elem_quad)
                .map(|(e, q)| ElementBasis::build(opts.basis, &e.bbox, deg, q))
                .collect()
        };
        Ok(Self {
            mesh,
            opts,
            dofs: DofMap::new(mesh.n_elements(), opts.ell, opts.m),
            vbasis: make(opts.ell),
            pbasis: make(opts.m),
            elem_quad,
            line,
        })
    }

    pub fn face_quadrature(&self, f: usize) -> QuadratureRule {
        let [a, b] = self.mesh.faces[f].endpoints.map(|v| self.mesh.vertices[v]);
        crate::quadrature::segment_quadrature_with(a, b, &self.line)
    }

    pub(crate) fn face_sides(&self, f: usize, quad: &QuadratureRule) -> Vec<FaceSide> {
        let face = &self.mesh.faces[f];
        let side = |k: usize, eps: f64, alpha: f64| FaceSide {
            k,
            eps,
            alpha,
            v: Tabulation::new(&self.vbasis[k], &quad.points),
            p: Tabulation::new(&self.pbasis[k], &quad.points),
        };
        match face.minus {
            Some(m) => vec![side(face.plus, 1.0, 0.5), side(m, -1.0, 0.5)],
            None => vec![side(face.plus, 1.0, 1.0)],
        }
    }

    pub fn sigma_v(&self, f: usize) -> f64 {
        face_sigma_v(self.mesh, f, self.opts.penalty.gamma_v, self.opts.ell, self.opts.mu)
    }

    /// Velocity value and gradient (`grad[c][d] = d u_c / d x_d`) of the
    /// discrete field `u` restricted to element `k`, at `p`.
    pub fn eval_velocity(&self, k: usize, u: &[f64], p: Point2) -> ([f64; 2], [[f64; 2]; 2]) {
        let n = self.dofs.n_ell;
        let (mut v, mut gx, mut gy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        self.vbasis[k].eval_grad(p, &mut v, &mut gx, &mut gy);
        let mut val = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for c in 0..2 {
            let co = &u[self.dofs.u_dof(k, c, 0)..self.dofs.u_dof(k, c, 0) + n];
            val[c] = sparse::dot(co, &v);
            grad[c] = [sparse::dot(co, &gx), sparse::dot(co, &gy)];
        }
        (val, grad)
    }

    pub fn eval_pressure(&self, k: usize, pvec: &[f64], p: Point2) -> f64 {
        let mut v = vec![0.0; self.dofs.n_m];
        self.pbasis[k].eval(p, &mut v);
        sparse::dot(&pvec[self.dofs.p_range(k)], &v)
    }

    /// Coefficients of the globally constant pressure 1.
    pub fn constant_pressure(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dofs.n_p];
        for k in 0..self.mesh.n_elements() {
            c[self.dofs.p_range(k)].copy_from_slice(&self.pbasis[k].constant_coefficients());
        }
        c
    }

    /// Coefficients of the constant velocity `(a, b)`.
    pub fn constant_velocity(&self, a: f64, b: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.dofs.n_u];
        for k in 0..self.mesh.n_elements() {
            let one = self.vbasis[k].constant_coefficients();
            for (i, &o) in one.iter().enumerate() {
                c[self.dofs.u_dof(k, 0, i)] = a * o;
                c[self.dofs.u_dof(k, 1, i)] = b * o;
            }
        }
        c
    }

    /// Element-wise `L^2` projection of a scalar function onto a basis family.
    fn project(&self, bases: &[ElementBasis], f: &(dyn Fn(Point2) -> f64 + Sync)) -> Result<Vec<Vec<f64>>> {
        (0..self.mesh.n_elements())
            .map(|k| {
                let q = &self.elem_quad[k];
                let t = Tabulation::new(&bases[k], &q.points);
                let n = t.n;
                let mut mass = Mat::<f64>::zeros(n, n);
                let mut rhs = Mat::<f64>::zeros(n, 1);
                for qi in 0..q.len() {
                    let w = q.weights[qi];
                    let v = t.val(qi);
                    let fv = f(q.points[qi]);
                    for i in 0..n {
                        rhs[(i, 0)] += w * fv * v[i];
                        for j in 0..n {
                            mass[(i, j)] += w * v[i] * v[j];
                        }
                    }
                }
                let llt = mass
                    .llt(Side::Lower)
                    .map_err(|e| Error::Factorization(format!("element {k} mass matrix: {e:?}")))?;
                let x = llt.solve(&rhs);
                Ok((0..n).map(|i| x[(i, 0)]).collect())
            })
            .collect()
    }

    pub fn project_velocity(&self, f: &(dyn Fn(Point2) -> [f64; 2] + Sync)) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.dofs.n_u];
        for c in 0..2 {
            let parts = self.project(&self.vbasis, &|p| f(p)[c])?;
            for (k, part) in parts.iter().enumerate() {
                let o = self.dofs.u_dof(k, c, 0);
                u[o..o + part.len()].copy_from_slice(part);
            }
        }
        Ok(u)
    }

    pub fn project_pressure(&self, f: &(dyn Fn(Point2) -> f64 + Sync)) -> Result<Vec<f64>> {
        let parts = self.project(&self.pbasis, f)?;
        Ok(parts.concat())
    }
}

/// Assembled blocks of the stationary problem.
#[derive(Clone, Debug)]
pub struct StokesSystem<'a> {
    pub disc: Discretization<'a>,
    pub a: SpMat,
    pub b: SpMat,
    pub s: SpMat,
    pub m_p: SpMat,
    pub m_u: SpMat,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
}

impl<'a> StokesSystem<'a> {
    pub fn assemble(mesh: &'a PolyMesh, opts: Options, exact: &dyn ExactSolution) -> Result<Self> {
        let disc = Discretization::new(mesh, opts)?;
        let a = assemble_velocity_form(&disc)?;
        let b = assemble_coupling_form(&disc, opts.coupling)?;
        let s = assemble_pressure_stab(&disc)?;
        let m_p = assemble_mass(&disc, forms::Field::Pressure)?;
        let m_u = assemble_mass(&disc, forms::Field::Velocity)?;
        let (rhs_u, rhs_p) = assemble_rhs(&disc, exact);
        Ok(Self { disc, a, b, s, m_p, m_u, rhs_u, rhs_p })
    }

    /// Blocks only, with zero right-hand side.
    pub fn assemble_operators(mesh: &'a PolyMesh, opts: Options) -> Result<Self> {
        Self::assemble(mesh, opts, &ZeroSolution)
    }

    pub fn mesh(&self) -> &'a PolyMesh {
        self.disc.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.disc.dofs
    }

    /// `a(v, v) + b(q, v) - b(q, v) + s(q, q)` from the assembled blocks.
    pub fn saddle_quadratic(&self, v: &[f64], q: &[f64]) -> f64 {
        let av = sparse::matvec(&self.a, v);
        let btq = sparse::matvec_t(&self.b, q);
        let bv = sparse::matvec(&self.b, v);
        let sq = sparse::matvec(&self.s, q);
        sparse::dot(v, &av) + sparse::dot(v, &btq) - sparse::dot(q, &bv) + sparse::dot(q, &sq)
    }
}

pub use forms::Field;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert!((sigma_v(10.0, 2, 1.0, 0.5, None) - 80.0).abs() < 1e-12);
        assert!((sigma_v(10.0, 2, 1.0, 0.5, Some(0.25)) - 160.0).abs() < 1e-12);
        assert!((sigma_v(10.0, 1, 0.03, 0.025, None) - 12.0).abs() < 1e-12);
        assert!((sigma_p(10.0, 2, 0.5, 0.25) - 1.25).abs() < 1e-12);
        assert!((sigma_p(10.0, 1, 0.1, 0.1) - 1.0).abs() < 1e-12);
        assert!((sigma_p(10.0, 4, 0.2, 0.4) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sigma_p_rejects_boundary_faces() {
        let m = crate::mesh::gen_triangular(1).unwrap();
        let b = m.faces.iter().position(|f| f.minus.is_none()).unwrap();
        assert!(matches!(face_sigma_p(&m, b, 10.0, 1), Err(Error::BoundaryFacePenalty(f)) if f == b));
        let i = m.faces.iter().position(|f| f.minus.is_some()).unwrap();
        assert!(face_sigma_p(&m, i, 10.0, 1).is_ok());
    }

    #[test]
    fn dof_map_is_contiguous() {
        let d = DofMap::new(3, 2, 1);
        assert_eq!((d.n_u, d.n_p), (36, 9));
        assert_eq!(d.u_dof(1, 1, 2), 12 + 6 + 2);
        assert_eq!(d.p_range(2), 6..9);
    }

    #[test]
    fn rejects_bad_options() {
        let mut o = Options::new(0, 1);
        assert!(matches!(o.validate(), Err(Error::Config(_))));
        o.ell = 1;
        o.penalty.gamma_p = -1.0;
        assert!(matches!(o.validate(), Err(Error::Config(_))));
    }
}
