//! Compressed-row sparse matrices and a sparse Cholesky wrapper.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::Matrix4;

use crate::error::{Error, Result};

/// CSR storage with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRealMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates triplets; duplicates are summed in insertion order.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        if v != 0.0 {
            self.entries.push((r, c, v));
        }
    }

    /// Adds a 4×4 block with its top-left corner at `(4 bi, 4 bj)`.
    pub fn push_block(&mut self, bi: usize, bj: usize, m: &Matrix4<f64>) {
        for r in 0..4 {
            for c in 0..4 {
                self.push(4 * bi + r, 4 * bj + c, m[(r, c)]);
            }
        }
    }

    /// Adds `s · I₄` on block `(bi, bj)`.
    pub fn push_scalar_block(&mut self, bi: usize, bj: usize, s: f64) {
        for k in 0..4 {
            self.push(4 * bi + k, 4 * bj + k, s);
        }
    }

    pub fn build(self) -> SparseRealMatrix {
        SparseRealMatrix::from_triplets(self.nrows, self.ncols, &self.entries)
    }
}

impl SparseRealMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseRealMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(other.triplets().map(|(r, c, v)| (r, c, s * v)));
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Row-by-row (Gustavson) product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut cols: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                col_idx.push(c);
                values.push(acc[c]);
            }
            row_ptr[r + 1] = col_idx.len();
        }
        SparseRealMatrix { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values }
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Self {
        self.transpose().matmul(self)
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }

    /// Keeps rows and columns whose `keep` flag is set, renumbered in order.
    pub fn submatrix(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.nrows);
        assert_eq!(self.nrows, self.ncols);
        let mut map = vec![usize::MAX; keep.len()];
        let mut n = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = n;
                n += 1;
            }
        }
        let t: Vec<_> = self
            .triplets()
            .filter(|&(r, c, _)| keep[r] && keep[c])
            .map(|(r, c, v)| (map[r], map[c], v))
            .collect();
        Self::from_triplets(n, n, &t)
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Solver(format!("{e:?}")))
    }
}

/// Sparse LLᵀ factorization of a symmetric positive definite matrix.
pub struct Cholesky {
    n: usize,
    llt: Llt<usize, f64>,
}

impl Cholesky {
    pub fn factor(a: &SparseRealMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::Solver("matrix is not square".into()));
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let llt = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("cholesky: {e:?}")))?;
        Ok(Cholesky { n: a.nrows, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_many(&[b]).pop().unwrap()
    }

    pub fn solve_many(&self, rhs: &[&[f64]]) -> Vec<Vec<f64>> {
        for b in rhs {
            assert_eq!(b.len(), self.n);
        }
        let mut m = Mat::<f64>::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        self.llt.solve_in_place(m.as_mut());
        (0..rhs.len()).map(|j| (0..self.n).map(|i| m[(i, j)]).collect()).collect()
    }
}
