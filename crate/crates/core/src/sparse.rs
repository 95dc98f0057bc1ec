//! Compressed-sparse-row complex matrices for local many-body terms.

use faer::{Mat, MatRef};

use crate::linalg::{c64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<c64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![c64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(d: &[c64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    /// Duplicate entries are summed; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut t: Vec<(usize, usize, c64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<c64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dim {dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_c = Vec::with_capacity(cols.len());
        let mut keep_v = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_c.push(c);
                keep_v.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: keep_c,
            vals: keep_v,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> c64 {
        self.row(r).find(|&(cc, _)| cc == c).map(|(_, v)| v).unwrap_or(ZERO)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: c64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn sum<'a>(dim: usize, terms: impl IntoIterator<Item = &'a Self>) -> Self {
        let mut t = Vec::new();
        for m in terms {
            assert_eq!(m.dim, dim);
            t.extend(m.triplets());
        }
        Self::from_triplets(dim, t)
    }

    /// `S X`.
    pub fn mul_dense(&self, x: MatRef<c64>) -> Mat<c64> {
        assert_eq!(x.nrows(), self.dim);
        let mut y = Mat::zeros(self.dim, x.ncols());
        for j in 0..x.ncols() {
            for r in 0..self.dim {
                let mut acc = ZERO;
                for (c, v) in self.row(r) {
                    acc += v * x[(c, j)];
                }
                y[(r, j)] = acc;
            }
        }
        y
    }

    /// `X S`.
    pub fn dense_mul(&self, x: MatRef<c64>) -> Mat<c64> {
        assert_eq!(x.ncols(), self.dim);
        let mut y = Mat::zeros(x.nrows(), self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                for i in 0..x.nrows() {
                    y[(i, c)] += x[(i, r)] * v;
                }
            }
        }
        y
    }

    pub fn mul_vec(&self, x: &[c64]) -> Vec<c64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Sparse product `S T`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
            touched.clear();
        }
        Self::from_triplets(self.dim, t)
    }

    /// `i[D, S]` for a diagonal `D = diag(d)`: entries `i(d_r − d_c) S_rc`.
    pub fn diag_commutator(&self, d: &[f64]) -> Self {
        Self::from_triplets(
            self.dim,
            self.triplets()
                .map(|(r, c, v)| (r, c, v * c64::new(0.0, d[r] - d[c])))
                .collect(),
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖S − S†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint().scale(c64::new(-1.0, 0.0))).frobenius()
    }

    /// True when every nonzero entry lies in the given row/column pairs.
    pub fn all_entries(&self, mut pred: impl FnMut(usize, usize) -> bool) -> bool {
        self.triplets().all(|(r, c, _)| pred(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            vec![
                (0, 1, c64::new(1.0, 2.0)),
                (2, 0, c64::new(-1.0, 0.5)),
                (0, 1, c64::new(1.0, 0.0)),
                (1, 1, c64::new(3.0, 0.0)),
            ],
        )
    }

    #[test]
    fn duplicates_are_summed() {
        let s = sample();
        assert_eq!(s.get(0, 1), c64::new(2.0, 2.0));
        assert_eq!(s.nnz(), 3);
    }

    #[test]
    fn products_match_dense() {
        let s = sample();
        let d = s.to_dense();
        let x = Mat::from_fn(3, 2, |i, j| c64::new(i as f64, j as f64 + 1.0));
        assert!(frobenius((s.mul_dense(x.as_ref()) - &d * &x).as_ref()) < 1e-14);
        let y = Mat::from_fn(2, 3, |i, j| c64::new(i as f64 - j as f64, 0.5));
        assert!(frobenius((s.dense_mul(y.as_ref()) - &y * &d).as_ref()) < 1e-14);
        let t = s.adjoint();
        assert!(frobenius((s.matmul(&t).to_dense() - &d * d.adjoint()).as_ref()) < 1e-14);
    }

    #[test]
    fn diagonal_commutator_matches_dense() {
        let s = sample();
        let q = [0.0, 1.0, 2.0];
        let qd = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(q[i], 0.0) } else { ZERO });
        let dense = crate::linalg::commutator(qd.as_ref(), s.to_dense().as_ref());
        let dense = crate::linalg::scaled(dense.as_ref(), crate::linalg::I);
        assert!(frobenius((s.diag_commutator(&q).to_dense() - dense).as_ref()) < 1e-14);
    }
}
