//! Dense complex matrix helpers shared by the other modules.
//!
//! Small-matrix algebra uses `nalgebra`; Hermitian eigensolves of any real
//! size are delegated to `faer`, which is several times faster at the sizes
//! used by the spectral simulations.

use faer::Side;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().fold(identity(1), |acc, f| kron(&acc, f))
}

pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermitian_residual(m) <= tol
}

pub fn is_skew_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m + m.adjoint())) <= tol
}

/// Linear combination `Σ w_j M_j`; the list must be nonempty.
pub fn combine(weights: &[f64], mats: &[CMat]) -> CMat {
    let (r, c) = mats[0].shape();
    let mut out = zeros(r, c);
    for (w, m) in weights.iter().zip(mats) {
        out += m * C64::new(*w, 0.0);
    }
    out
}

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolve failed: {e:?}")))
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let e = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolve failed: {e:?}")))?;
    let s = e.S().column_vector();
    let u = e.U();
    let vals = (0..n).map(|i| s[i].re).collect();
    let vecs = CMat::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((vals, vecs))
}

/// Orthogonal projector onto the span of eigenvectors with negative eigenvalue.
///
/// Fails if any eigenvalue lies within `zero_tol` of zero, since the sign
/// would then be a coin toss.
pub fn negative_projector(m: &CMat, zero_tol: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    if let Some(v) = vals.iter().find(|v| v.abs() <= zero_tol) {
        return Err(Error::DegenerateEigenvalue { value: *v });
    }
    let n = m.nrows();
    let mut p = zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        if *v < 0.0 {
            let col = vecs.column(k);
            p += &col * col.adjoint();
        }
    }
    Ok(p)
}

pub fn singular_values(m: &CMat) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    m.clone().singular_values()
}

/// Smallest singular value of a square matrix.
pub fn smallest_singular_value(m: &CMat) -> f64 {
    singular_values(m).iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Dimension of the null space, counting singular values below
/// `rel_tol · σ_max` (and all of them if the matrix vanishes).
pub fn nullity(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|s| **s > rel_tol * smax).count()
    };
    m.ncols() - rank
}

/// Orthonormal basis of the null space (columns), via the Hermitian matrix `M*M`.
pub fn null_space(m: &CMat, rel_tol: f64) -> Result<CMat> {
    let k = nullity(m, rel_tol);
    let gram = m.adjoint() * m;
    let (_, vecs) = eigh(&gram)?;
    Ok(vecs.columns(0, k).into_owned())
}

/// Block `rows × cols` of `m` starting at `(r0, c0)`.
pub fn block(m: &CMat, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat {
    m.view((r0, c0), (rows, cols)).into_owned()
}

/// Real symmetric eigen-decomposition with ascending eigenvalues.
pub fn sym_eigen_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Serde adapter writing matrices as `{rows, cols, entries: [[re, im], ...]}`
/// in row-major order.
pub mod matrix_json {
    use super::{CMat, C64};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    pub struct JsonMatrix {
        pub rows: usize,
        pub cols: usize,
        pub entries: Vec<[f64; 2]>,
    }

    impl From<&CMat> for JsonMatrix {
        fn from(m: &CMat) -> Self {
            let mut entries = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    entries.push([z.re, z.im]);
                }
            }
            JsonMatrix {
                rows: m.nrows(),
                cols: m.ncols(),
                entries,
            }
        }
    }

    impl JsonMatrix {
        pub fn into_matrix(self) -> Result<CMat, String> {
            if self.entries.len() != self.rows * self.cols {
                return Err(format!(
                    "matrix declares {}x{} but has {} entries",
                    self.rows,
                    self.cols,
                    self.entries.len()
                ));
            }
            let cols = self.cols;
            let e = self.entries;
            Ok(CMat::from_fn(self.rows, cols, |i, j| {
                let [re, im] = e[i * cols + j];
                C64::new(re, im)
            }))
        }
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        JsonMatrix::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        JsonMatrix::deserialize(d)?.into_matrix().map_err(D::Error::custom)
    }

    /// Same encoding for a list of matrices.
    pub mod list {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> Result<S::Ok, S::Error> {
            let v: Vec<JsonMatrix> = ms.iter().map(JsonMatrix::from).collect();
            v.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
            Vec::<JsonMatrix>::deserialize(d)?
                .into_iter()
                .map(|m| m.into_matrix().map_err(D::Error::custom))
                .collect()
        }
    }
}
