//! Compressed sparse row storage for the assembled forms.

use crate::spinor::C64;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef};

/// Square complex matrix in CSR layout.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Builds the matrix from `(row, col, value)` entries, summing duplicates.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside a {dim}×{dim} matrix");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `r` as `(column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// Product with every column of a dense block.
    pub fn mul_mat(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(self.dim, x.ncols());
        for k in 0..x.ncols() {
            let col = x.col(k);
            for r in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for (c, v) in self.row(r) {
                    acc += v * col[c];
                }
                out[(r, k)] = acc;
            }
        }
        out
    }

    /// `x^H A x`.
    pub fn quadratic(&self, x: &[C64]) -> C64 {
        self.mul_vec(x).iter().zip(x).map(|(ax, xi)| xi.conj() * ax).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim)
            .map(|r| self.row(r).find(|&(c, _)| c == r).map_or(C64::new(0.0, 0.0), |(_, v)| v))
            .collect()
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let mirror = self.row(c).find(|&(cc, _)| cc == r).map_or(C64::new(0.0, 0.0), |(_, w)| w);
                worst = worst.max((v - mirror.conj()).norm());
            }
        }
        worst
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        assert_eq!(self.dim, other.dim);
        let entries = (0..self.dim)
            .flat_map(|r| {
                self.row(r)
                    .map(move |(c, v)| (r, c, v))
                    .chain(other.row(r).map(move |(c, v)| (r, c, v * alpha)))
            })
            .collect();
        CsrMatrix::from_triplets(self.dim, entries)
    }

    pub(crate) fn to_faer(&self) -> SparseColMat<usize, C64> {
        let triplets: Vec<Triplet<usize, usize, C64>> = (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, v)| Triplet::new(r, c, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &triplets)
            .expect("CSR entries are unique and in range")
    }
}
