//! Sparse Hermitian matrices and a shift-invert eigensolver for their lowest
//! eigenvalues.
//!
//! The operators assembled here (finite-difference grids, Hermite bases,
//! Fourier modes on the torus) all have a natural ordering with a modest
//! bandwidth, so the shifted matrix is factored with a banded Cholesky
//! decomposition and the inverse drives a block Krylov iteration with full
//! reorthogonalization. Small problems go straight to a dense solve.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};

/// Problems up to this size are solved densely.
pub const DENSE_LIMIT: usize = 400;

/// Square sparse matrix stored row by row. Entries are added verbatim, so the
/// caller is responsible for Hermitian symmetry; [`SparseHermitian::hermitian_residual`]
/// checks it.
#[derive(Clone, Debug)]
pub struct SparseHermitian {
    n: usize,
    rows: Vec<BTreeMap<usize, C64>>,
}

impl SparseHermitian {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        if v != ZERO {
            *self.rows[i].entry(j).or_insert(ZERO) += v;
        }
    }

    /// Adds the dense block `m` with its top-left corner at `(i0, j0)`.
    pub fn add_block(&mut self, i0: usize, j0: usize, m: &CMat) {
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                self.add(i0 + a, j0 + b, m[(a, b)]);
            }
        }
    }

    /// The Gram matrix `D*D` of a rectangular sparse map given by its rows
    /// (each row a list of `(column, value)` with columns `< n`).
    pub fn gram(n: usize, rows: &[Vec<(usize, C64)>]) -> Self {
        let mut g = Self::new(n);
        for row in rows {
            for &(a, va) in row {
                for &(b, vb) in row {
                    g.add(a, b, va.conj() * vb);
                }
            }
        }
        g
    }

    pub fn scale(&mut self, s: f64) {
        for row in &mut self.rows {
            for v in row.values_mut() {
                *v *= s;
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i].get(&j).copied().unwrap_or(ZERO)
    }

    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.keys().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, v) in row {
                worst = worst.max((*v - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (i, row) in self.rows.iter().enumerate() {
            y[i] = row.iter().map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, v) in row {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut s = Self::new(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            for (&j, v) in &self.rows[i] {
                if let Some(&l) = pos.get(&j) {
                    s.add(k, l, *v);
                }
            }
        }
        s
    }
}

/// Lower-triangular banded Cholesky factor of a Hermitian positive-definite matrix.
struct BandCholesky {
    n: usize,
    bw: usize,
    // Row i holds L(i, k) for k in i-bw..=i at offset k + bw - i.
    l: Vec<C64>,
}

impl BandCholesky {
    fn factor(a: &SparseHermitian, shift: f64) -> Result<Self> {
        let n = a.n;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![ZERO; n * w];
        for i in 0..n {
            for (&j, v) in a.rows[i].range(i.saturating_sub(bw)..=i) {
                l[i * w + j + bw - i] = *v;
            }
            l[i * w + bw] -= C64::new(shift, 0.0);
        }
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let rj = j * w + bw - j;
            let mut d = l[rj + j].re;
            for k in lo..j {
                d -= l[rj + k].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Numerical(format!(
                    "shifted matrix is not positive definite (pivot {d:.3e} at row {j})"
                )));
            }
            let d = d.sqrt();
            l[rj + j] = C64::new(d, 0.0);
            for i in j + 1..n.min(j + bw + 1) {
                let ri = i * w + bw - i;
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[ri + j];
                for k in lo_i..j {
                    s -= l[ri + k] * l[rj + k].conj();
                }
                l[ri + j] = s / d;
            }
        }
        Ok(Self { n, bw, l })
    }

    fn solve_in_place(&self, x: &mut [C64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let ri = i * w + bw - i;
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[ri + k] * x[k];
            }
            x[i] = s / self.l[ri + i].re;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.l[k * w + bw - k + i].conj() * x[k];
            }
            x[i] = s / self.l[i * w + bw].re;
        }
    }
}

/// Settings for [`lowest_eigenvalues`].
#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Number of eigenvalues wanted.
    pub count: usize,
    /// Preferred shift below the spectrum. If `A − shift·I` turns out not to
    /// be positive definite the shift is lowered until it is.
    pub shift: f64,
    /// Krylov block size; should exceed the largest expected multiplicity.
    pub block: usize,
    /// Relative residual tolerance for Ritz pairs.
    pub tol: f64,
    pub max_basis: usize,
}

impl EigenOptions {
    pub fn new(count: usize, shift: f64) -> Self {
        Self {
            count,
            shift,
            block: 4,
            tol: 1e-9,
            max_basis: 800,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn block(mut self, block: usize) -> Self {
        self.block = block;
        self
    }
}

/// The `count` lowest eigenvalues of a sparse Hermitian matrix, ascending.
pub fn lowest_eigenvalues(a: &SparseHermitian, opts: &EigenOptions) -> Result<Vec<f64>> {
    let n = a.dim();
    let count = opts.count.min(n);
    if n <= DENSE_LIMIT {
        let mut vals = linalg::eigvalsh(&a.to_dense())?;
        vals.truncate(count);
        return Ok(vals);
    }
    // A shift close to the spectrum separates the wanted eigenvalues best;
    // move it down until the factorization certifies it lies below.
    let mut shift = opts.shift;
    let mut step = 1.0;
    let chol = loop {
        match BandCholesky::factor(a, shift) {
            Ok(ch) => break ch,
            Err(e) if step > 1e7 => return Err(e),
            Err(_) => {
                shift -= step;
                step *= 4.0;
            }
        }
    };
    let p = opts.block.max(1);
    let max_basis = opts.max_basis.min(n);
    let mut rng = StdRng::seed_from_u64(0x5eed);

    let mut q: Vec<Vec<C64>> = Vec::new();
    let mut aq: Vec<Vec<C64>> = Vec::new();
    // Upper triangle of Q*AQ, column by column.
    let mut h_cols: Vec<Vec<C64>> = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    let mut pending: Vec<Vec<C64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        })
        .collect();

    loop {
        let start = q.len();
        for mut v in pending.drain(..) {
            if orthonormalize_against(&mut v, &q) {
                let mut av = vec![ZERO; n];
                a.matvec(&v, &mut av);
                h_cols.push(q.iter().chain(std::iter::once(&v)).map(|qi| dot(qi, &av)).collect());
                q.push(v);
                aq.push(av);
            }
        }
        let m = q.len();
        if m == start {
            return Err(Error::Numerical("Krylov space exhausted".into()));
        }
        if m >= count + p || m == n || m >= max_basis {
            let h = DMatrix::from_fn(m, m, |i, j| if i <= j { h_cols[j][i] } else { h_cols[i][j].conj() });
            let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
            let (vals, vecs) = linalg::eigh(&h)?;
            let settled = previous
                .as_ref()
                .is_some_and(|prev| (0..count).all(|k| (vals[k] - prev[k]).abs() <= opts.tol * (1.0 + vals[k].abs())));
            let converged = settled
                && (0..count).all(|k| {
                    let theta = vals[k];
                    let mut r = vec![ZERO; n];
                    for col in 0..m {
                        let s = vecs[(col, k)];
                        for ((ri, a), q) in r.iter_mut().zip(&aq[col]).zip(&q[col]) {
                            *ri += (a - q * theta) * s;
                        }
                    }
                    let r2: f64 = r.iter().map(|z| z.norm_sqr()).sum();
                    r2.sqrt() <= opts.tol.sqrt() * 1e-2 * (1.0 + theta.abs())
                });
            if converged || m == n {
                return Ok(vals[..count].to_vec());
            }
            if m >= max_basis {
                return Err(Error::Numerical(format!(
                    "Krylov iteration did not converge within {max_basis} vectors"
                )));
            }
            previous = Some(vals[..count].to_vec());
        }
        // Next block: apply the shifted inverse to the newest block.
        for v in &q[start..m] {
            let mut w = v.clone();
            chol.solve_in_place(&mut w);
            pending.push(w);
        }
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Two passes of Gram–Schmidt; returns false if `v` was (numerically) in the span.
fn orthonormalize_against(v: &mut [C64], basis: &[Vec<C64>]) -> bool {
    let norm0 = dot(v, v).re.sqrt();
    if norm0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
    }
    let norm = dot(v, v).re.sqrt();
    if norm <= 1e-10 * norm0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    /// 1D Dirichlet Laplacian tensored with a 2-level Hermitian coupling,
    /// large enough to take the iterative path.
    fn test_matrix(n: usize) -> SparseHermitian {
        let mut a = SparseHermitian::new(2 * n);
        for i in 0..n {
            a.add(2 * i, 2 * i, c(2.0, 0.0));
            a.add(2 * i + 1, 2 * i + 1, c(2.5, 0.0));
            a.add(2 * i, 2 * i + 1, c(0.0, 0.3));
            a.add(2 * i + 1, 2 * i, c(0.0, -0.3));
            if i + 1 < n {
                for k in 0..2 {
                    a.add(2 * i + k, 2 * (i + 1) + k, c(-1.0, 0.0));
                    a.add(2 * (i + 1) + k, 2 * i + k, c(-1.0, 0.0));
                }
            }
        }
        a
    }

    #[test]
    fn iterative_matches_dense() {
        let a = test_matrix(700);
        assert!(a.hermitian_residual() == 0.0);
        let dense = linalg::eigvalsh(&a.to_dense()).unwrap();
        let it = lowest_eigenvalues(&a, &EigenOptions::new(12, -1.0)).unwrap();
        for (x, y) in it.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn band_cholesky_solves() {
        let a = test_matrix(50);
        let chol = BandCholesky::factor(&a, -0.5).unwrap();
        let x: Vec<C64> = (0..100).map(|i| c(i as f64, 1.0)).collect();
        let mut b = vec![ZERO; 100];
        a.matvec(&x, &mut b);
        for (bi, xi) in b.iter_mut().zip(&x) {
            *bi += xi * 0.5;
        }
        chol.solve_in_place(&mut b);
        for (bi, xi) in b.iter().zip(&x) {
            assert!((bi - xi).norm() < 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_shift() {
        let a = test_matrix(50);
        assert!(BandCholesky::factor(&a, 3.0).is_err());
    }

    #[test]
    fn gram_is_hermitian() {
        let rows = vec![vec![(0, c(1.0, 1.0)), (2, c(0.0, -2.0))], vec![(1, c(3.0, 0.0))]];
        let g = SparseHermitian::gram(3, &rows);
        assert_eq!(g.hermitian_residual(), 0.0);
        assert_eq!(g.get(0, 2), c(1.0, -1.0) * c(0.0, -2.0));
    }
}
