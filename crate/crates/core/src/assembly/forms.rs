use rayon::prelude::*;

use super::sparse::{SpMat, Triplets};
use super::{face_sigma_p, CouplingForm, Discretization, ExactSolution, FaceSide, VectorJump};
use crate::basis::Tabulation;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Velocity,
    Pressure,
}

/// Dense local block with its global row and column indices.
struct Block {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Block {
    fn zeros(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let n = rows.len() * cols.len();
        Self { rows, cols, vals: vec![0.0; n] }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.vals[i * self.cols.len() + j] += v;
    }
}

fn collect(nrows: usize, ncols: usize, blocks: impl IntoIterator<Item = Block>) -> Result<SpMat> {
    let mut t = Triplets::new(nrows, ncols);
    for b in blocks {
        t.add_block(&b.rows, &b.cols, &b.vals);
    }
    t.build()
}

/// Jump pairing weight `[[e_c]] : [[e_d]]` for unit jumps along a face with
/// normal `n`.
fn jump_weight(jump: VectorJump, n: [f64; 2], c: usize, d: usize) -> f64 {
    let delta = if c == d { 1.0 } else { 0.0 };
    match jump {
        VectorJump::Full => delta,
        VectorJump::Symmetric => 0.5 * delta + 0.5 * n[c] * n[d],
    }
}

/// `(e_other (.) n) : (e_own (x) grad phi)`: the pairing of a unit jump in
/// direction `other` with the gradient of the field `phi e_own`.
fn trace_term(jump: VectorJump, n: [f64; 2], own: usize, other: usize, g: [f64; 2]) -> f64 {
    let dn = g[0] * n[0] + g[1] * n[1];
    let delta = if own == other { 1.0 } else { 0.0 };
    match jump {
        VectorJump::Full => delta * dn,
        VectorJump::Symmetric => 0.5 * (delta * dn + n[own] * g[other]),
    }
}

fn u_indices(disc: &Discretization, k: usize) -> Vec<usize> {
    disc.dofs.u_range(k).collect()
}

fn p_indices(disc: &Discretization, k: usize) -> Vec<usize> {
    disc.dofs.p_range(k).collect()
}

fn faces_where(disc: &Discretization, interior_only: bool) -> Vec<usize> {
    (0..disc.mesh.faces.len())
        .filter(|&f| !interior_only || disc.mesh.faces[f].kind.is_interior())
        .collect()
}

/// Velocity form: `(mu grad u, grad v) - <mu {grad u}, [[v]]> - <mu [[u]],
/// {grad v}> + <sigma_v [[u]], [[v]]>` over all faces.
pub fn assemble_velocity_form(disc: &Discretization) -> Result<SpMat> {
    let nl = disc.dofs.n_ell;
    let mu = disc.opts.mu;
    let jump = disc.opts.jump;
    let vol = (0..disc.mesh.n_elements()).into_par_iter().map(|k| {
        let q = &disc.elem_quad[k];
        let t = Tabulation::new(&disc.vbasis[k], &q.points);
        let idx = u_indices(disc, k);
        let mut b = Block::zeros(idx.clone(), idx);
        for qi in 0..q.len() {
            let w = mu * q.weights[qi];
            let (gx, gy) = (t.grad_x(qi), t.grad_y(qi));
            for i in 0..nl {
                for j in 0..nl {
                    let v = w * (gx[i] * gx[j] + gy[i] * gy[j]);
                    b.add(i, j, v);
                    b.add(nl + i, nl + j, v);
                }
            }
        }
        b
    });
    let faces = faces_where(disc, false);
    let face_blocks = faces.par_iter().flat_map_iter(|&f| {
        let quad = disc.face_quadrature(f);
        let sides = disc.face_sides(f, &quad);
        let n = disc.mesh.faces[f].normal;
        let n = [n.x, n.y];
        let sigma = disc.sigma_v(f);
        let mut out = Vec::with_capacity(sides.len() * sides.len());
        for s in &sides {
            for t in &sides {
                let mut b = Block::zeros(u_indices(disc, s.k), u_indices(disc, t.k));
                for qi in 0..quad.len() {
                    let w = quad.weights[qi];
                    let (ps, pt) = (s.v.val(qi), t.v.val(qi));
                    let (sgx, sgy) = (s.v.grad_x(qi), s.v.grad_y(qi));
                    let (tgx, tgy) = (t.v.grad_x(qi), t.v.grad_y(qi));
                    for c in 0..2 {
                        for d in 0..2 {
                            if jump == VectorJump::Full && c != d {
                                continue;
                            }
                            let kw = sigma * s.eps * t.eps * jump_weight(jump, n, c, d);
                            for i in 0..nl {
                                let ti = trace_term(jump, n, c, d, [sgx[i], sgy[i]]);
                                for j in 0..nl {
                                    let tj = trace_term(jump, n, d, c, [tgx[j], tgy[j]]);
                                    let v = -mu * t.alpha * s.eps * ps[i] * tj
                                        - mu * s.alpha * t.eps * pt[j] * ti
                                        + kw * ps[i] * pt[j];
                                    b.add(c * nl + i, d * nl + j, w * v);
                                }
                            }
                        }
                    }
                }
                out.push(b);
            }
        }
        out
    });
    let mut blocks: Vec<Block> = vol.collect();
    blocks.extend(face_blocks.collect::<Vec<_>>());
    collect(disc.dofs.n_u, disc.dofs.n_u, blocks)
}

/// Coupling form, rows indexed by pressure dofs.
pub fn assemble_coupling_form(disc: &Discretization, form: CouplingForm) -> Result<SpMat> {
    let (nl, nm) = (disc.dofs.n_ell, disc.dofs.n_m);
    let vol = (0..disc.mesh.n_elements()).into_par_iter().map(|k| {
        let q = &disc.elem_quad[k];
        let tv = Tabulation::new(&disc.vbasis[k], &q.points);
        let tp = Tabulation::new(&disc.pbasis[k], &q.points);
        let mut b = Block::zeros(p_indices(disc, k), u_indices(disc, k));
        for qi in 0..q.len() {
            let w = q.weights[qi];
            for i in 0..nm {
                for j in 0..nl {
                    let (bx, by) = match form {
                        // -psi_i div(phi_j e_c)
                        CouplingForm::Divergence => {
                            let p = tp.val(qi)[i];
                            (-p * tv.grad_x(qi)[j], -p * tv.grad_y(qi)[j])
                        }
                        // grad psi_i . phi_j e_c
                        CouplingForm::Gradient => {
                            let v = tv.val(qi)[j];
                            (tp.grad_x(qi)[i] * v, tp.grad_y(qi)[i] * v)
                        }
                    };
                    b.add(i, j, w * bx);
                    b.add(i, nl + j, w * by);
                }
            }
        }
        b
    });
    let faces = faces_where(disc, form == CouplingForm::Gradient);
    let face_blocks = faces.par_iter().flat_map_iter(|&f| {
        let quad = disc.face_quadrature(f);
        let sides = disc.face_sides(f, &quad);
        let n = disc.mesh.faces[f].normal;
        let n = [n.x, n.y];
        let mut out = Vec::new();
        // rows: pressure on side t; columns: velocity on side s
        for t in &sides {
            for s in &sides {
                let mut b = Block::zeros(p_indices(disc, t.k), u_indices(disc, s.k));
                let coef = match form {
                    // {q} [[v]] . n
                    CouplingForm::Divergence => t.alpha * s.eps,
                    // -[[q]] . {v}
                    CouplingForm::Gradient => -t.eps * s.alpha,
                };
                for qi in 0..quad.len() {
                    let w = quad.weights[qi] * coef;
                    let (pp, pv) = (t.p.val(qi), s.v.val(qi));
                    for i in 0..nm {
                        for j in 0..nl {
                            let v = w * pp[i] * pv[j];
                            b.add(i, j, v * n[0]);
                            b.add(i, nl + j, v * n[1]);
                        }
                    }
                }
                out.push(b);
            }
        }
        out
    });
    let mut blocks: Vec<Block> = vol.collect();
    blocks.extend(face_blocks.collect::<Vec<_>>());
    collect(disc.dofs.n_p, disc.dofs.n_u, blocks)
}

/// Pressure jump penalty over interior faces.
pub fn assemble_pressure_stab(disc: &Discretization) -> Result<SpMat> {
    let nm = disc.dofs.n_m;
    let faces = faces_where(disc, true);
    let blocks: Vec<Block> = faces
        .par_iter()
        .map(|&f| -> Result<Vec<Block>> {
            let quad = disc.face_quadrature(f);
            let sides = disc.face_sides(f, &quad);
            let sigma = face_sigma_p(disc.mesh, f, disc.opts.penalty.gamma_p, disc.opts.m)?;
            let mut out = Vec::new();
            for s in &sides {
                for t in &sides {
                    let mut b = Block::zeros(p_indices(disc, s.k), p_indices(disc, t.k));
                    for qi in 0..quad.len() {
                        let w = quad.weights[qi] * sigma * s.eps * t.eps;
                        let (ps, pt) = (s.p.val(qi), t.p.val(qi));
                        for i in 0..nm {
                            for j in 0..nm {
                                b.add(i, j, w * ps[i] * pt[j]);
                            }
                        }
                    }
                    out.push(b);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    collect(disc.dofs.n_p, disc.dofs.n_p, blocks)
}

/// Block-diagonal `L^2` Gram matrix of the velocity or pressure basis.
pub fn assemble_mass(disc: &Discretization, which: Field) -> Result<SpMat> {
    let blocks = (0..disc.mesh.n_elements()).into_par_iter().map(|k| {
        let q = &disc.elem_quad[k];
        let (basis, idx) = match which {
            Field::Velocity => (&disc.vbasis[k], u_indices(disc, k)),
            Field::Pressure => (&disc.pbasis[k], p_indices(disc, k)),
        };
        let t = Tabulation::new(basis, &q.points);
        let n = t.n;
        let mut b = Block::zeros(idx.clone(), idx);
        let comps = if which == Field::Velocity { 2 } else { 1 };
        for qi in 0..q.len() {
            let v = t.val(qi);
            for i in 0..n {
                for j in 0..n {
                    let m = q.weights[qi] * v[i] * v[j];
                    for c in 0..comps {
                        b.add(c * n + i, c * n + j, m);
                    }
                }
            }
        }
        b
    });
    let n = match which {
        Field::Velocity => disc.dofs.n_u,
        Field::Pressure => disc.dofs.n_p,
    };
    collect(n, n, blocks.collect::<Vec<_>>())
}

/// Right-hand sides: `(f, v) - <mu J(g), grad v> + <sigma_v J(g), J(v)>` on
/// the boundary for the velocity rows, `<q, g . n>` on the boundary for the
/// pressure rows.
pub fn assemble_rhs(disc: &Discretization, exact: &dyn ExactSolution) -> (Vec<f64>, Vec<f64>) {
    let (nl, nm) = (disc.dofs.n_ell, disc.dofs.n_m);
    let mu = disc.opts.mu;
    let jump = disc.opts.jump;
    let mut ru = vec![0.0; disc.dofs.n_u];
    let mut rp = vec![0.0; disc.dofs.n_p];
    let loads: Vec<Vec<f64>> = (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            let q = &disc.elem_quad[k];
            let t = Tabulation::new(&disc.vbasis[k], &q.points);
            let mut l = vec![0.0; 2 * nl];
            for qi in 0..q.len() {
                let f = exact.forcing(q.points[qi]);
                let v = t.val(qi);
                for i in 0..nl {
                    l[i] += q.weights[qi] * f[0] * v[i];
                    l[nl + i] += q.weights[qi] * f[1] * v[i];
                }
            }
            l
        })
        .collect();
    for (k, l) in loads.iter().enumerate() {
        for (r, v) in disc.dofs.u_range(k).zip(l) {
            ru[r] += v;
        }
    }
    let boundary: Vec<usize> = (0..disc.mesh.faces.len())
        .filter(|&f| !disc.mesh.faces[f].kind.is_interior())
        .collect();
    let parts: Vec<(usize, Vec<f64>, Vec<f64>)> = boundary
        .par_iter()
        .map(|&f| {
            let quad = disc.face_quadrature(f);
            let sides: Vec<FaceSide> = disc.face_sides(f, &quad);
            let s = &sides[0];
            let n = disc.mesh.faces[f].normal;
            let n = [n.x, n.y];
            let sigma = disc.sigma_v(f);
            let mut lu = vec![0.0; 2 * nl];
            let mut lp = vec![0.0; nm];
            for qi in 0..quad.len() {
                let w = quad.weights[qi];
                let g = exact.dirichlet(quad.points[qi]);
                let (pv, gx, gy) = (s.v.val(qi), s.v.grad_x(qi), s.v.grad_y(qi));
                for c in 0..2 {
                    for i in 0..nl {
                        let mut v = 0.0;
                        for d in 0..2 {
                            v -= mu * g[d] * trace_term(jump, n, c, d, [gx[i], gy[i]]);
                            v += sigma * g[d] * jump_weight(jump, n, c, d) * pv[i];
                        }
                        lu[c * nl + i] += w * v;
                    }
                }
                let gn = g[0] * n[0] + g[1] * n[1];
                let pp = s.p.val(qi);
                for i in 0..nm {
                    lp[i] += w * gn * pp[i];
                }
            }
            (s.k, lu, lp)
        })
        .collect();
    for (k, lu, lp) in parts {
        for (r, v) in disc.dofs.u_range(k).zip(&lu) {
            ru[r] += v;
        }
        for (r, v) in disc.dofs.p_range(k).zip(&lp) {
            rp[r] += v;
        }
    }
    (ru, rp)
}
