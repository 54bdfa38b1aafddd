//! Bordered saddle-point solve and error norms.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky,
    SymmetricOrdering,
};
use faer::sparse::linalg::{amd, SupernodalThreshold};
use faer::{Conj, Mat, Par, Side};

use crate::assembly::sparse::{self, dot, matvec, matvec_t, norm, SpMat, Triplets};
use crate::assembly::{face_sigma_p, ExactSolution, StokesSystem, VectorJump};
use crate::error::{Error, Result};
use crate::quadrature::{element_quadrature, segment_quadrature_with, LineRule};

/// Relative residual accepted from the direct solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// Lagrange multiplier of the zero-mean constraint.
    pub multiplier: f64,
    /// `||K x - r||` of the bordered system.
    pub residual_norm: f64,
    pub rhs_norm: f64,
    /// `int p_h`.
    pub mean_pressure: f64,
}

/// Assembles
///
/// ```text
/// [ A  B^T  0 ]
/// [ B  -S   c ]
/// [ 0  c^T  0 ]
/// ```
///
/// with `c = M_p 1_c`, so that the last row enforces `int p_h = 0`.
pub fn bordered_matrix(sys: &StokesSystem, c: &[f64]) -> Result<SpMat> {
    let (nu, np) = (sys.dofs().n_u, sys.dofs().n_p);
    let n = nu + np + 1;
    let mut t = Triplets::new(n, n);
    sparse::for_each(&sys.a, |i, j, v| t.push(i, j, v));
    sparse::for_each(&sys.b, |i, j, v| {
        t.push(nu + i, j, v);
        t.push(j, nu + i, v);
    });
    sparse::for_each(&sys.s, |i, j, v| t.push(nu + i, nu + j, -v));
    for (i, &ci) in c.iter().enumerate() {
        t.push(nu + i, n - 1, ci);
        t.push(n - 1, nu + i, ci);
    }
    t.build()
}

/// Solves the bordered system with a symmetric indefinite factorization and
/// up to three sweeps of iterative refinement.
pub fn solve_stationary(sys: &StokesSystem) -> Result<DiscreteSolution> {
    let (nu, np) = (sys.dofs().n_u, sys.dofs().n_p);
    let one = sys.disc.constant_pressure();
    let c = matvec(&sys.m_p, &one);
    let k = bordered_matrix(sys, &c)?;
    let mut rhs: Vec<f64> = sys.rhs_u.iter().chain(&sys.rhs_p).copied().collect();
    rhs.push(0.0);
    let rhs_norm = norm(&rhs);

    let factor = SymmetricFactor::with_trailing(&k, &[nu + np])?;
    let n = rhs.len();
    let mut x = factor.solve(&rhs);
    let mut res = residual(&k, &x, &rhs);
    for _ in 0..3 {
        if norm(&res) <= 0.1 * RESIDUAL_TOL * rhs_norm {
            break;
        }
        let d = factor.solve(&res);
        for i in 0..n {
            x[i] -= d[i];
        }
        res = residual(&k, &x, &rhs);
    }
    let residual_norm = norm(&res);
    if !(residual_norm <= RESIDUAL_TOL * rhs_norm) && !(rhs_norm == 0.0 && residual_norm == 0.0) {
        return Err(Error::Factorization(format!(
            "saddle-point solve residual {residual_norm:e} exceeds {RESIDUAL_TOL:e} relative (rhs norm {rhs_norm:e}); gamma_v may be too small"
        )));
    }
    let u = x[..nu].to_vec();
    let mut p = x[nu..nu + np].to_vec();
    // B^T 1 = S 1 = 0, so removing the constant leaves the residual unchanged
    let shift = dot(&c, &p) / dot(&c, &one);
    for (pi, oi) in p.iter_mut().zip(&one) {
        *pi -= shift * oi;
    }
    let mean_pressure = dot(&c, &p);
    let p_norm = dot(&p, &matvec(&sys.m_p, &p)).max(0.0).sqrt();
    if mean_pressure.abs() > 1e-10 * p_norm.max(1e-300) && mean_pressure.abs() > 1e-14 {
        return Err(Error::Constraint(format!(
            "pressure mean {mean_pressure:e} exceeds tolerance (||p||_M = {p_norm:e})"
        )));
    }
    Ok(DiscreteSolution { u, p, multiplier: x[n - 1], residual_norm, rhs_norm, mean_pressure })
}

/// Supernodal `L B L^T` factorization of a symmetric indefinite matrix with
/// AMD ordering and Bunch-Kaufman pivoting inside supernodes.
///
/// Pivoting never leaves a supernode, so rows with a zero diagonal must not
/// be eliminated early; [`SymmetricFactor::with_trailing`] keeps them last.
pub struct SymmetricFactor {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    perm_fwd: Vec<usize>,
    perm_inv: Vec<usize>,
}

impl SymmetricFactor {
    pub fn new(k: &SpMat) -> Result<Self> {
        Self::with_trailing(k, &[])
    }

    /// AMD ordering with the indices in `trailing` moved to the end.
    pub fn with_trailing(k: &SpMat, trailing: &[usize]) -> Result<Self> {
        let fail = |e: &dyn std::fmt::Debug| {
            Error::Factorization(format!("symmetric factorization: {e:?}; gamma_v may be too small"))
        };
        let n = k.nrows();
        let mut amd_fwd = vec![0usize; n];
        let mut amd_inv = vec![0usize; n];
        let req = amd::order_maybe_unsorted_scratch::<usize>(n, k.compute_nnz());
        let mut mem = MemBuffer::try_new(req).map_err(|e| fail(&e))?;
        amd::order_maybe_unsorted(
            &mut amd_fwd,
            &mut amd_inv,
            k.symbolic(),
            amd::Control::default(),
            MemStack::new(&mut mem),
        )
        .map_err(|e| fail(&e))?;
        let mut order_fwd: Vec<usize> = amd_fwd.into_iter().filter(|i| !trailing.contains(i)).collect();
        order_fwd.extend_from_slice(trailing);
        let mut order_inv = vec![0usize; n];
        for (new, &old) in order_fwd.iter().enumerate() {
            order_inv[old] = new;
        }
        let ordering = faer::perm::PermRef::new_checked(&order_fwd, &order_inv, n);
        let params = CholeskySymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        };
        let symbolic = factorize_symbolic_cholesky(
            k.symbolic(),
            Side::Lower,
            SymmetricOrdering::Custom(ordering),
            params,
        )
        .map_err(|e| fail(&e))?;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut subdiag = vec![0.0; n];
        let mut perm_fwd = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        let par = Par::Seq;
        let req = symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(par, Default::default());
        let mut mem = MemBuffer::try_new(req).map_err(|e| fail(&e))?;
        symbolic.factorize_numeric_intranode_lblt(
            &mut values,
            &mut subdiag,
            &mut perm_fwd,
            &mut perm_inv,
            k.as_ref(),
            Side::Lower,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        );
        if values.iter().chain(&subdiag).any(|v| !v.is_finite()) {
            return Err(Error::Factorization(
                "symmetric factorization produced non-finite entries; gamma_v may be too small".into(),
            ));
        }
        Ok(Self { symbolic, values, subdiag, perm_fwd, perm_inv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
        let perm = faer::perm::PermRef::new_checked(&self.perm_fwd, &self.perm_inv, n);
        let f = IntranodeLbltRef::new(&self.symbolic, &self.values, &self.subdiag, perm);
        let req = self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq);
        let mut mem = MemBuffer::new(req);
        f.solve_in_place_with_conj(Conj::No, x.as_mut(), Par::Seq, MemStack::new(&mut mem));
        (0..n).map(|i| x[(i, 0)]).collect()
    }
}

fn residual(k: &SpMat, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    let kx = matvec(k, x);
    kx.iter().zip(rhs).map(|(a, b)| a - b).collect()
}

/// `[A B^T; B -S] (u, p)` restricted to the unbordered block system.
pub fn apply_saddle(sys: &StokesSystem, u: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut top = matvec(&sys.a, u);
    for (t, v) in top.iter_mut().zip(matvec_t(&sys.b, p)) {
        *t += v;
    }
    let mut bot = matvec(&sys.b, u);
    for (b, v) in bot.iter_mut().zip(matvec(&sys.s, p)) {
        *b -= v;
    }
    (top, bot)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub err_u_l2: f64,
    /// `(||mu^1/2 grad_h e||^2 + ||sigma_v^1/2 [[e]]||^2)^1/2`
    pub err_u_dg: f64,
    pub err_p_l2: f64,
    /// `s_h(p_h, p_h)^1/2` by face quadrature
    pub err_p_jump: f64,
    pub h: f64,
    pub n_u: usize,
    pub n_p: usize,
}

/// Extra quadrature order used for error integrals of non-polynomial data.
pub const ERROR_QUAD_EXTRA: usize = 6;

pub fn compute_errors(
    sys: &StokesSystem,
    u: &[f64],
    p: &[f64],
    exact: &dyn ExactSolution,
) -> Result<ErrorReport> {
    compute_errors_with_order(sys, u, p, exact, sys.disc.opts.order() + ERROR_QUAD_EXTRA)
}

pub fn compute_errors_with_order(
    sys: &StokesSystem,
    u: &[f64],
    p: &[f64],
    exact: &dyn ExactSolution,
    order: usize,
) -> Result<ErrorReport> {
    let disc = &sys.disc;
    let mesh = disc.mesh;
    let mu = disc.opts.mu;
    let (mut eu, mut egrad, mut ep) = (0.0, 0.0, 0.0);
    for k in 0..mesh.n_elements() {
        let q = element_quadrature(mesh, k, order)?;
        for (&x, &w) in q.points.iter().zip(&q.weights) {
            let (uh, gh) = disc.eval_velocity(k, u, x);
            let ue = exact.velocity(x);
            let ge = exact.velocity_grad(x);
            eu += w * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
            for c in 0..2 {
                for d in 0..2 {
                    egrad += w * mu * (gh[c][d] - ge[c][d]).powi(2);
                }
            }
            ep += w * (disc.eval_pressure(k, p, x) - exact.pressure(x)).powi(2);
        }
    }
    let line = LineRule::new(order)?;
    let (mut ejump, mut pjump) = (0.0, 0.0);
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b] = face.endpoints.map(|v| mesh.vertices[v]);
        let q = segment_quadrature_with(a, b, &line);
        let sigma = disc.sigma_v(f);
        let n = [face.normal.x, face.normal.y];
        for (&x, &w) in q.points.iter().zip(&q.weights) {
            let up = disc.eval_velocity(face.plus, u, x).0;
            let other = match face.minus {
                Some(m) => disc.eval_velocity(m, u, x).0,
                None => exact.dirichlet(x),
            };
            let j = [up[0] - other[0], up[1] - other[1]];
            ejump += w * sigma * jump_norm2(disc.opts.jump, n, j);
        }
        if let Some(m) = face.minus {
            // evaluated pointwise: p^T S p loses half the digits to cancellation
            let sigma_p = face_sigma_p(mesh, f, disc.opts.penalty.gamma_p, disc.opts.m)?;
            for (&x, &w) in q.points.iter().zip(&q.weights) {
                let jp = disc.eval_pressure(face.plus, p, x) - disc.eval_pressure(m, p, x);
                pjump += w * sigma_p * jp * jp;
            }
        }
    }
    Ok(ErrorReport {
        err_u_l2: eu.sqrt(),
        err_u_dg: (egrad + ejump).sqrt(),
        err_p_l2: ep.sqrt(),
        err_p_jump: pjump.sqrt(),
        h: mesh.h(),
        n_u: disc.dofs.n_u,
        n_p: disc.dofs.n_p,
    })
}

/// `|j (x) n|^2` or `|j (.) n|^2` for a jump vector `j`.
fn jump_norm2(jump: VectorJump, n: [f64; 2], j: [f64; 2]) -> f64 {
    let jj = j[0] * j[0] + j[1] * j[1];
    match jump {
        VectorJump::Full => jj,
        VectorJump::Symmetric => {
            let jn = j[0] * n[0] + j[1] * n[1];
            0.5 * jj + 0.5 * jn * jn
        }
    }
}
