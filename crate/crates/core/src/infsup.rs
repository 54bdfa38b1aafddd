//! Discrete inf-sup constant from the generalized eigenvalue problem
//!
//! ```text
//! (B A^-1 B^T + eta S) q = lambda M_p q,   q M_p-orthogonal to the constants
//! ```
//!
//! with `beta_h = sqrt(lambda_min)`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::assembly::sparse::{self, SpMat};
use crate::assembly::{DofMap, StokesSystem};
use crate::error::{Error, Result};

/// Number of right-hand sides per block solve when forming `A^-1 B^T`.
const BLOCK: usize = 256;

/// Relative size below which a negative `lambda_min` is treated as roundoff.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct InfSupResult {
    pub beta_h: f64,
    pub lambda_min: f64,
    pub eta: u8,
    /// `||G 1_c|| / (||G||_F ||1_c||)`
    pub deflation_residual: f64,
    /// Smallest retained eigenvalues in increasing order (at most five).
    pub spectrum_head: Vec<f64>,
}

/// Operators entering the eigenvalue problem, detached from any mesh so that
/// relabelled copies can be built in tests.
pub struct Pencil<'a> {
    pub a: &'a SpMat,
    pub b: &'a SpMat,
    pub s: &'a SpMat,
    pub m_p: &'a SpMat,
    /// Coefficients of the constant pressure.
    pub one: &'a [f64],
    /// Pressure dofs grouped by element; `M_p` must be block diagonal with
    /// respect to these groups.
    pub blocks: Vec<Vec<usize>>,
}

impl<'a> Pencil<'a> {
    pub fn from_system(sys: &'a StokesSystem, one: &'a [f64]) -> Self {
        Self {
            a: &sys.a,
            b: &sys.b,
            s: &sys.s,
            m_p: &sys.m_p,
            one,
            blocks: element_blocks(sys.dofs()),
        }
    }
}

fn element_blocks(dofs: &DofMap) -> Vec<Vec<usize>> {
    (0..dofs.p_offsets.len()).map(|k| dofs.p_range(k).collect()).collect()
}

pub fn compute_beta(sys: &StokesSystem, eta: u8) -> Result<InfSupResult> {
    let one = sys.disc.constant_pressure();
    compute_beta_pencil(&Pencil::from_system(sys, &one), eta)
}

pub fn compute_beta_pencil(pencil: &Pencil, eta: u8) -> Result<InfSupResult> {
    if eta > 1 {
        return Err(Error::Config(format!("eta must be 0 or 1, got {eta}")));
    }
    let g = schur_complement(pencil, eta)?;
    let np = g.nrows();
    if np < 2 {
        return Err(Error::Eigen("need at least two pressure unknowns".into()));
    }
    let g1 = dense_matvec(&g, pencil.one);
    let deflation_residual =
        sparse::norm(&g1) / (g.norm_l2() * sparse::norm(pencil.one)).max(f64::MIN_POSITIVE);

    let factor = MassFactor::new(pencil)?;
    let c = factor.congruence(&g);
    let w = factor.lt_mul(pencil.one);
    let house = Householder::new(&w);
    let reduced = house.reduce(&c);
    let mut evals = reduced
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("dense eigensolver: {e:?}")))?;
    evals.sort_by(f64::total_cmp);
    let lambda_max = evals.last().copied().unwrap_or(0.0).abs();
    let mut lambda_min = evals[0];
    if lambda_min < 0.0 {
        if lambda_min < -NEGATIVE_TOL * lambda_max {
            return Err(Error::Eigen(format!(
                "negative eigenvalue {lambda_min:e} (lambda_max {lambda_max:e}); operators are not semidefinite"
            )));
        }
        log::warn!("clamping lambda_min = {lambda_min:e} to zero");
        lambda_min = 0.0;
    }
    Ok(InfSupResult {
        beta_h: lambda_min.sqrt(),
        lambda_min,
        eta,
        deflation_residual,
        spectrum_head: evals.iter().take(5).copied().collect(),
    })
}

/// Dense `G = B A^-1 B^T + eta S`, symmetrized.
pub fn schur_complement(pencil: &Pencil, eta: u8) -> Result<Mat<f64>> {
    let (np, nu) = (pencil.b.nrows(), pencil.b.ncols());
    let llt = pencil.a.sp_cholesky(Side::Lower).map_err(|e| {
        Error::Factorization(format!("Cholesky of A failed: {e:?}; gamma_v may be too small"))
    })?;
    // row lists of B, i.e. columns of B^T
    let mut bt_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); np];
    sparse::for_each(pencil.b, |i, j, v| bt_cols[i].push((j, v)));

    let starts: Vec<usize> = (0..np).step_by(BLOCK).collect();
    let pieces: Vec<Mat<f64>> = starts
        .par_iter()
        .map(|&j0| {
            let nj = BLOCK.min(np - j0);
            let mut rhs = Mat::<f64>::zeros(nu, nj);
            for jj in 0..nj {
                for &(r, v) in &bt_cols[j0 + jj] {
                    rhs[(r, jj)] = v;
                }
            }
            let x = llt.solve(rhs);
            // (B X) restricted to this column block
            let mut out = Mat::<f64>::zeros(np, nj);
            sparse::for_each(pencil.b, |i, c, v| {
                for jj in 0..nj {
                    out[(i, jj)] += v * x[(c, jj)];
                }
            });
            out
        })
        .collect();
    let mut g = Mat::<f64>::zeros(np, np);
    for (&j0, piece) in starts.iter().zip(&pieces) {
        for jj in 0..piece.ncols() {
            for i in 0..np {
                g[(i, j0 + jj)] = piece[(i, jj)];
            }
        }
    }
    if eta == 1 {
        sparse::for_each(pencil.s, |i, j, v| g[(i, j)] += v);
    }
    for j in 0..np {
        for i in j + 1..np {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

fn dense_matvec(g: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; g.nrows()];
    for j in 0..g.ncols() {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += g[(i, j)] * x[j];
        }
    }
    y
}

/// Block-diagonal Cholesky factor `M_p = L L^T`, one block per element.
struct MassFactor<'a> {
    blocks: &'a [Vec<usize>],
    factors: Vec<Mat<f64>>,
}

impl<'a> MassFactor<'a> {
    fn new(pencil: &'a Pencil) -> Result<Self> {
        let np = pencil.m_p.nrows();
        let mut owner = vec![usize::MAX; np];
        for (k, b) in pencil.blocks.iter().enumerate() {
            for &i in b {
                owner[i] = k;
            }
        }
        let mut dense: Vec<Mat<f64>> =
            pencil.blocks.iter().map(|b| Mat::zeros(b.len(), b.len())).collect();
        let local: Vec<usize> = {
            let mut pos = vec![0; np];
            for b in &pencil.blocks {
                for (l, &i) in b.iter().enumerate() {
                    pos[i] = l;
                }
            }
            pos
        };
        let mut off_block = false;
        sparse::for_each(pencil.m_p, |i, j, v| {
            if owner[i] != owner[j] {
                off_block = true;
            } else {
                dense[owner[i]][(local[i], local[j])] = v;
            }
        });
        if off_block {
            return Err(Error::Eigen("pressure mass matrix is not block diagonal".into()));
        }
        let factors = dense
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.llt(Side::Lower)
                    .map(|f| f.L().to_owned())
                    .map_err(|e| Error::Eigen(format!("mass block {k} not positive definite: {e:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks: &pencil.blocks, factors })
    }

    /// `L^-1 G L^-T`
    fn congruence(&self, g: &Mat<f64>) -> Mat<f64> {
        let mut c = g.clone();
        self.solve_rows(&mut c);
        let mut ct = c.transpose().to_owned();
        self.solve_rows(&mut ct);
        ct
    }

    /// Applies `L^-1` to the rows of `c`, block by block.
    fn solve_rows(&self, c: &mut Mat<f64>) {
        for (b, l) in self.blocks.iter().zip(&self.factors) {
            for j in 0..c.ncols() {
                for (r, &i) in b.iter().enumerate() {
                    let mut v = c[(i, j)];
                    for (t, &it) in b.iter().enumerate().take(r) {
                        v -= l[(r, t)] * c[(it, j)];
                    }
                    c[(i, j)] = v / l[(r, r)];
                }
            }
        }
    }

    /// `L^T x`
    fn lt_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (b, l) in self.blocks.iter().zip(&self.factors) {
            for (r, &i) in b.iter().enumerate() {
                y[i] = b.iter().enumerate().skip(r).map(|(t, &it)| l[(t, r)] * x[it]).sum();
            }
        }
        y
    }

    /// `L^-T x`
    fn lt_solve(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for (b, l) in self.blocks.iter().zip(&self.factors) {
            for r in (0..b.len()).rev() {
                let mut v = y[b[r]];
                for t in r + 1..b.len() {
                    v -= l[(t, r)] * y[b[t]];
                }
                y[b[r]] = v / l[(r, r)];
            }
        }
        y
    }
}

/// Reflector `H = I - 2 v v^T` mapping `w` onto a multiple of `e_0`.
struct Householder {
    v: Vec<f64>,
}

impl Householder {
    fn new(w: &[f64]) -> Self {
        let nw = sparse::norm(w);
        let mut v = w.to_vec();
        v[0] += nw.copysign(w[0]);
        let nv = sparse::norm(&v);
        for x in &mut v {
            *x /= nv;
        }
        Self { v }
    }

    fn apply(&self, x: &mut [f64]) {
        let d = 2.0 * sparse::dot(&self.v, x);
        for (xi, vi) in x.iter_mut().zip(&self.v) {
            *xi -= d * vi;
        }
    }

    /// Trailing `(n-1) x (n-1)` block of `H C H`.
    fn reduce(&self, c: &Mat<f64>) -> Mat<f64> {
        let n = c.nrows();
        let v = &self.v;
        let cv = dense_matvec(c, v);
        let vcv = sparse::dot(v, &cv);
        Mat::from_fn(n - 1, n - 1, |i, j| {
            let (i, j) = (i + 1, j + 1);
            c[(i, j)] - 2.0 * v[i] * cv[j] - 2.0 * cv[i] * v[j] + 4.0 * vcv * v[i] * v[j]
        })
    }
}

/// `Z = L^-T H[:, 1..]`: an `M_p`-orthonormal basis of the pressures with
/// zero mean.
pub fn deflation_basis(pencil: &Pencil) -> Result<Mat<f64>> {
    let factor = MassFactor::new(pencil)?;
    let house = Householder::new(&factor.lt_mul(pencil.one));
    let n = pencil.one.len();
    let mut z = Mat::zeros(n, n - 1);
    let mut e = vec![0.0; n];
    for j in 1..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        house.apply(&mut e);
        let col = factor.lt_solve(&e);
        for i in 0..n {
            z[(i, j - 1)] = col[i];
        }
    }
    Ok(z)
}
