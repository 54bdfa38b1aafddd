//! Triplet accumulation and small helpers on compressed sparse matrices.

use std::io::Write;
use std::path::Path;

use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

pub type SpMat = SparseColMat<usize, f64>;

/// Coordinate entries; duplicates are summed on compression.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<Triplet<usize, usize, f64>>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        if val != 0.0 {
            self.entries.push(Triplet::new(row, col, val));
        }
    }

    /// Adds a dense row-major block at the given global row and column indices.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], block: &[f64]) {
        let nc = cols.len();
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.push(r, c, block[i * nc + j]);
            }
        }
    }

    pub fn build(&self) -> Result<SpMat> {
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &self.entries)
            .map_err(|e| Error::Factorization(format!("sparse matrix creation failed: {e:?}")))
    }
}

/// Calls `f(row, col, value)` for every stored entry.
pub fn for_each(a: &SpMat, mut f: impl FnMut(usize, usize, f64)) {
    let col_ptr = a.symbolic().col_ptr();
    let rows = a.symbolic().row_idx();
    let vals = a.val();
    for j in 0..a.ncols() {
        for p in col_ptr[j]..col_ptr[j + 1] {
            f(rows[p], j, vals[p]);
        }
    }
}

pub fn frobenius(a: &SpMat) -> f64 {
    a.val().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `y = A x`
pub fn matvec(a: &SpMat, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for_each(a, |i, j, v| y[i] += v * x[j]);
    y
}

/// `y = A^T x`
pub fn matvec_t(a: &SpMat, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.ncols()];
    for_each(a, |i, j, v| y[j] += v * x[i]);
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `||A - A^T||_F`.
pub fn symmetry_defect(a: &SpMat) -> f64 {
    let mut t = Triplets::new(a.nrows(), a.ncols());
    for_each(a, |i, j, v| {
        t.entries.push(Triplet::new(i, j, v));
        t.entries.push(Triplet::new(j, i, -v));
    });
    t.build().map(|d| frobenius(&d)).unwrap_or(f64::INFINITY)
}

/// Coordinate text dump with 1-based indices.
pub fn write_matrix_market(a: &SpMat, path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.val().len())?;
    let mut res = Ok(());
    for_each(a, |i, j, v| {
        if res.is_ok() {
            res = writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v);
        }
    });
    res?;
    w.flush()?;
    Ok(())
}
