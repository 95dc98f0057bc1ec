//! Lowest eigenpairs of a sparse Hermitian matrix by block-Krylov Rayleigh–Ritz.
//!
//! A block start vector lets exactly degenerate levels (up to the block size) come out
//! with their full multiplicity, which a single-vector Lanczos run cannot resolve.

use faer::Mat;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, ZERO};
use crate::sparse::SparseMatrix;

pub struct KrylovOptions {
    pub block: usize,
    pub max_basis: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            block: 4,
            max_basis: 600,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

/// Returns the `k` lowest Ritz pairs (ascending) and their largest residual norm.
pub fn lowest_eigenpairs(
    h: &SparseMatrix,
    k: usize,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, Mat<c64>, f64)> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::Numerical(format!("cannot compute {k} eigenpairs of a dimension-{n} matrix")));
    }
    let block = opts.block.max(k).min(n);
    let scale = h.max_abs().max(1.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<c64>> = Vec::new();
    let mut images: Vec<Vec<c64>> = Vec::new();
    let mut frontier: Vec<Vec<c64>> = (0..block)
        .map(|_| (0..n).map(|_| c64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
        .collect();
    let max_basis = opts.max_basis.min(n);
    let last;
    let mut gram: Vec<Vec<c64>> = Vec::new();
    loop {
        let old_m = basis.len();
        let mut next_frontier = Vec::new();
        for mut v in frontier.drain(..) {
            if basis.len() >= max_basis {
                break;
            }
            for _ in 0..2 {
                for b in &basis {
                    let ov: c64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    v.iter_mut().zip(b).for_each(|(y, x)| *y -= ov * x);
                }
            }
            let nrm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-10 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nrm);
            let hv = h.mul_vec(&v);
            next_frontier.push(hv.clone());
            basis.push(v);
            images.push(hv);
        }
        let m = basis.len();
        for row in gram.iter_mut() {
            row.resize(m, ZERO);
        }
        gram.resize(m, vec![ZERO; m]);
        for i in old_m..m {
            for j in 0..m {
                let v: c64 = basis[j].iter().zip(&images[i]).map(|(a, b)| a.conj() * b).sum();
                gram[j][i] = v;
                gram[i][j] = v.conj();
            }
        }
        let t = Mat::from_fn(m, m, |i, j| gram[i][j]);
        let t = crate::linalg::hermitian_part(t.as_ref());
        let e = eigh(t.as_ref())?;
        let kk = k.min(m);
        let mut vecs: Mat<c64> = Mat::zeros(n, kk);
        let mut worst: f64 = 0.0;
        for c in 0..kk {
            let mut r = vec![ZERO; n];
            for (j, (b, hb)) in basis.iter().zip(&images).enumerate() {
                let y = e.vectors[(j, c)];
                for i in 0..n {
                    vecs[(i, c)] += y * b[i];
                    r[i] += y * hb[i];
                }
            }
            let lam = e.values[c];
            let res = (0..n).map(|i| (r[i] - vecs[(i, c)] * lam).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(res);
        }
        let values = e.values[..kk].to_vec();
        let done = kk == k && worst < opts.tol * scale;
        if done || next_frontier.is_empty() || m >= max_basis {
            if kk < k {
                return Err(Error::Numerical(format!("Krylov space exhausted at dimension {m}")));
            }
            last = Some((values, vecs, worst));
            break;
        }
        frontier = next_frontier;
    }
    last.ok_or_else(|| Error::Numerical("Krylov iteration produced no result".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_degenerate_lowest_levels() {
        // diag(0, 0, 1, 2, ..) plus a weak coupling that keeps the ground pair degenerate
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            let d = if i < 2 { 0.0 } else { (i - 1) as f64 };
            t.push((i, i, c64::new(d, 0.0)));
        }
        for i in 2..n - 1 {
            t.push((i, i + 1, c64::new(0.1, 0.0)));
            t.push((i + 1, i, c64::new(0.1, 0.0)));
        }
        let h = SparseMatrix::from_triplets(n, t);
        let (vals, vecs, res) = lowest_eigenpairs(&h, 3, &KrylovOptions::default()).unwrap();
        assert!(res < 1e-8);
        assert!(vals[0].abs() < 1e-10 && vals[1].abs() < 1e-10);
        let dense = crate::linalg::eigvalsh(h.to_dense().as_ref()).unwrap();
        assert!((vals[2] - dense[2]).abs() < 1e-10);
        assert_eq!(vecs.ncols(), 3);
    }
}
