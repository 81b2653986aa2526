//! Local index at a singular point, computed three independent ways, and the
//! global index as a sum over singular points.
//!
//! * [`local_index_eigenspace`]: joint negative eigenspaces of the commuting
//!   Hermitian operators `L_j = c_j Z̃_j` (anticommuting normalized input).
//! * [`hermite_kernel_oracle`]: kernel of the model harmonic oscillator
//!   `K = −Δ + B̄ + (Σ x_j Z_j)²` in a tensor Hermite-function basis.
//! * [`fredholm_index_oracle`]: finite differences for `Q*Q` and `QQ*`,
//!   where `Q = Σ A_j ∂_j + Σ x_j B_j` on a Dirichlet box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::perturbation::{self, check_proper, LinearPerturbation, STRUCTURE_TOL};
use crate::sparse::{lowest_eigenvalues, EigenOptions, SparseHermitian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eigenspace,
    HermiteOracle,
    GridOracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalIndexResult {
    pub dim_ker_plus: usize,
    pub dim_ker_minus: usize,
    pub index: i64,
    pub method: Method,
}

impl LocalIndexResult {
    fn new(dim_ker_plus: usize, dim_ker_minus: usize, method: Method) -> Self {
        Self {
            dim_ker_plus,
            dim_ker_minus,
            index: dim_ker_plus as i64 - dim_ker_minus as i64,
            method,
        }
    }
}

/// Clifford matrices and perturbation coefficients at a singular point, on a
/// module whose leading `rank_plus` coordinates span `E⁺`.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub clifford: Vec<CMat>,
    pub zs: Vec<CMat>,
    pub rank_plus: usize,
}

impl LocalData {
    pub fn new(clifford: Vec<CMat>, zs: Vec<CMat>, rank_plus: usize) -> Result<Self> {
        let n = clifford.len();
        if zs.len() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                what: "number of Z_j",
                expected: n,
                found: zs.len(),
            });
        }
        let rank = clifford[0].nrows();
        if clifford.iter().chain(&zs).any(|m| m.shape() != (rank, rank)) || rank_plus > rank {
            return Err(Error::InvalidArgument("inconsistent matrix sizes".into()));
        }
        Ok(Self {
            clifford,
            zs,
            rank_plus,
        })
    }

    pub fn from_perturbation(p: &LinearPerturbation) -> Self {
        Self {
            clifford: p.module.action.clone(),
            zs: p.zs.clone(),
            rank_plus: p.module.rank_plus,
        }
    }

    /// Rotated frame and normalized coefficients, when `Z(x)²` is scalar.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.zs.len();
        let norm = perturbation::normalize_parts(&self.zs, &self.clifford, &vec![0.0; n])?;
        Ok(Self {
            clifford: norm.frame,
            zs: norm.zt,
            rank_plus: self.rank_plus,
        })
    }

    pub fn n(&self) -> usize {
        self.zs.len()
    }

    pub fn rank(&self) -> usize {
        self.zs[0].nrows()
    }

    fn rank_minus(&self) -> usize {
        self.rank() - self.rank_plus
    }

    fn plus_block(&self, m: &CMat) -> CMat {
        linalg::block(m, 0, 0, self.rank_plus, self.rank_plus)
    }

    fn minus_block(&self, m: &CMat) -> CMat {
        let (p, r) = (self.rank_plus, self.rank_minus());
        linalg::block(m, p, p, r, r)
    }

    fn minus_plus(&self, m: &CMat) -> CMat {
        linalg::block(m, self.rank_plus, 0, self.rank_minus(), self.rank_plus)
    }

    /// The operator `Q = D⁺ : E⁺ → E⁻` as a local Fredholm pair.
    pub fn fredholm_operator(&self) -> LocalFredholmOperator {
        LocalFredholmOperator {
            a: self.clifford.iter().map(|m| self.minus_plus(m)).collect(),
            b: self.zs.iter().map(|m| self.minus_plus(m)).collect(),
        }
    }
}

/// Index from the joint negative eigenspaces of `L_j^± = c_j Z_j|_{E^±}`.
///
/// Expects normalized input (`Z_jZ_k + Z_kZ_j = 2δ_jk`); use
/// [`LocalData::normalized`] first.
pub fn local_index_eigenspace(data: &LocalData) -> Result<LocalIndexResult> {
    let n = data.n();
    let l: Vec<CMat> = (0..n).map(|j| &data.clifford[j] * &data.zs[j]).collect();
    for j in 0..n {
        for k in j + 1..n {
            let residual = linalg::max_abs(&linalg::commutator(&l[j], &l[k]));
            if residual > STRUCTURE_TOL {
                return Err(Error::NonCommuting { j, k, residual });
            }
        }
    }
    let joint = |block: &dyn Fn(&CMat) -> CMat, size: usize| -> Result<usize> {
        let mut prod = linalg::identity(size);
        for lj in &l {
            let h = block(lj);
            let h = (&h + h.adjoint()) * c(0.5, 0.0);
            prod *= linalg::negative_projector(&h, STRUCTURE_TOL)?;
        }
        let t = prod.trace().re;
        let r = t.round();
        if (t - r).abs() > 1e-8 {
            return Err(Error::Numerical(format!("projector product has non-integer trace {t}")));
        }
        Ok(r as usize)
    };
    let plus = joint(&|m| data.plus_block(m), data.rank_plus)?;
    let minus = joint(&|m| data.minus_block(m), data.rank_minus())?;
    Ok(LocalIndexResult::new(plus, minus, Method::Eigenspace))
}

/// Normalizes a perturbation and applies [`local_index_eigenspace`].
pub fn local_index(p: &LinearPerturbation) -> Result<LocalIndexResult> {
    local_index_eigenspace(&LocalData::from_perturbation(p).normalized()?)
}

/// `K(x̄) = −Δ + B̄ + (Σ x_j Z_j)²` with `B̄ = Σ c_j Z_j`, stored through its
/// coefficient matrices.
#[derive(Clone, Debug)]
pub struct ModelOperator {
    pub n: usize,
    pub bbar: CMat,
    pub zs: Vec<CMat>,
    pub rank_plus: usize,
}

impl ModelOperator {
    pub fn from_data(data: &LocalData) -> Self {
        let bbar = data
            .clifford
            .iter()
            .zip(&data.zs)
            .fold(linalg::zeros(data.rank(), data.rank()), |acc, (cj, zj)| acc + cj * zj);
        Self {
            n: data.n(),
            bbar,
            zs: data.zs.clone(),
            rank_plus: data.rank_plus,
        }
    }

    pub fn rank(&self) -> usize {
        self.bbar.nrows()
    }

    /// `C(x) = (Σ x_j Z_j)²`.
    pub fn cquad(&self, x: &[f64]) -> CMat {
        let z = linalg::combine(x, &self.zs);
        &z * &z
    }

    /// Isotropic basis frequency `√(tr Σ Z_j² / (n·rank))`.
    pub fn frequency(&self) -> f64 {
        let t: f64 = self.zs.iter().map(|z| (z * z).trace().re).sum();
        (t / (self.n * self.rank()) as f64).sqrt()
    }
}

/// Position, squared position and squared momentum in the first `m`
/// eigenfunctions of `−∂² + ω²x²`, with exact matrix elements.
pub fn oscillator_matrices(m: usize, omega: f64) -> [Vec<Vec<f64>>; 3] {
    let mut x = vec![vec![0.0; m]; m];
    let mut x2 = vec![vec![0.0; m]; m];
    let mut p2 = vec![vec![0.0; m]; m];
    for k in 0..m {
        let kf = k as f64;
        x2[k][k] = (2.0 * kf + 1.0) / (2.0 * omega);
        p2[k][k] = (2.0 * kf + 1.0) * omega / 2.0;
        if k + 1 < m {
            let v = (kf + 1.0).sqrt() / (2.0 * omega).sqrt();
            x[k][k + 1] = v;
            x[k + 1][k] = v;
        }
        if k + 2 < m {
            let s = ((kf + 1.0) * (kf + 2.0)).sqrt();
            x2[k][k + 2] = s / (2.0 * omega);
            x2[k + 2][k] = s / (2.0 * omega);
            p2[k][k + 2] = -s * omega / 2.0;
            p2[k + 2][k] = -s * omega / 2.0;
        }
    }
    [x, x2, p2]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    Plus,
    Minus,
}

/// `K^±` assembled in the tensor Hermite basis with `m` levels per axis.
pub fn hermite_matrix(mo: &ModelOperator, m: usize, grading: Grading) -> SparseHermitian {
    let n = mo.n;
    let omega = mo.frequency();
    let [x, x2, p2] = oscillator_matrices(m, omega);
    let rank = mo.rank();
    let (off, r) = match grading {
        Grading::Plus => (0, mo.rank_plus),
        Grading::Minus => (mo.rank_plus, rank - mo.rank_plus),
    };
    let restrict = |a: &CMat| linalg::block(a, off, off, r, r);
    let bbar = restrict(&mo.bbar);
    let squares: Vec<CMat> = mo.zs.iter().map(|z| restrict(&(z * z))).collect();
    let mut cross = vec![vec![None; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            cross[j][k] = Some(restrict(&linalg::anticommutator(&mo.zs[j], &mo.zs[k])));
        }
    }
    let total = m.pow(n as u32);
    let stride: Vec<usize> = (0..n).map(|j| m.pow(j as u32)).collect();
    let digit = |idx: usize, j: usize| (idx / stride[j]) % m;
    let id = linalg::identity(r);
    let mut k_mat = SparseHermitian::new(total * r);
    for idx in 0..total {
        k_mat.add_block(idx * r, idx * r, &bbar);
        for j in 0..n {
            let a = digit(idx, j);
            for b in a.saturating_sub(2)..(a + 3).min(m) {
                let jdx = idx + b * stride[j] - a * stride[j];
                let blk = &id * c(p2[a][b], 0.0) + &squares[j] * c(x2[a][b], 0.0);
                k_mat.add_block(idx * r, jdx * r, &blk);
            }
            for k in j + 1..n {
                let s = cross[j][k].as_ref().expect("upper triangle");
                let bk = digit(idx, k);
                for a2 in a.saturating_sub(1)..(a + 2).min(m) {
                    for b2 in bk.saturating_sub(1)..(bk + 2).min(m) {
                        let v = x[a][a2] * x[bk][b2];
                        if v != 0.0 {
                            let jdx = idx + a2 * stride[j] - a * stride[j] + b2 * stride[k] - bk * stride[k];
                            k_mat.add_block(idx * r, jdx * r, &(s * c(v, 0.0)));
                        }
                    }
                }
            }
        }
    }
    k_mat
}

/// Eigenvalues of the model operator below which a state counts as kernel.
pub const KERNEL_TOL: f64 = 1e-6;

/// Lowest `count` eigenvalues of `K⁺` and `K⁻` in the Hermite basis.
pub fn hermite_spectrum(mo: &ModelOperator, m: usize, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let shift = -0.5;
    let solve = |g: Grading| -> Result<Vec<f64>> {
        let k = hermite_matrix(mo, m, g);
        if k.dim() == 0 {
            return Ok(Vec::new());
        }
        lowest_eigenvalues(&k, &EigenOptions::new(count, shift))
    };
    Ok((solve(Grading::Plus)?, solve(Grading::Minus)?))
}

/// Kernel dimensions of `K^±` counted in a truncated Hermite basis with
/// `cutoff` levels per axis, cross-checked against `cutoff + 2`.
pub fn hermite_kernel_oracle(mo: &ModelOperator, cutoff: usize) -> Result<LocalIndexResult> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    let count = mo.rank() + 4;
    let kernel = |m: usize| -> Result<(usize, usize)> {
        let (p, q) = hermite_spectrum(mo, m, count)?;
        let below = |v: &[f64]| v.iter().filter(|e| **e < KERNEL_TOL).count();
        Ok((below(&p), below(&q)))
    };
    let (p1, m1) = kernel(cutoff)?;
    let (p2, m2) = kernel(cutoff + 2)?;
    if (p1, m1) != (p2, m2) {
        return Err(Error::CutoffTooSmall {
            cutoff,
            next: cutoff + 2,
            counts: [p1, m1, p2, m2],
        });
    }
    Ok(LocalIndexResult::new(p1, m1, Method::HermiteOracle))
}

/// Default Hermite cutoff per axis.
pub fn default_cutoff(n: usize) -> usize {
    match n {
        1 => 40,
        2 => 16,
        _ => 10,
    }
}

/// `Q = Σ A_j ∂_j + Σ x_j B_j`, mapping `C^{m₊}`-valued functions to
/// `C^{m₋}`-valued ones.
#[derive(Clone, Debug)]
pub struct LocalFredholmOperator {
    pub a: Vec<CMat>,
    pub b: Vec<CMat>,
}

/// Measured constants of the three local Fredholm conditions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `min σ_min(Σ ξ_j A_j)` over the unit sphere.
    pub ellipticity: f64,
    /// `K` with `B(x)*B(x) ≥ K|x|²`.
    pub coercivity: f64,
    /// max |A_j*B_k − B_k*A_j| together with max |A_jB_k* − B_kA_j*|.
    pub commutation_residual: f64,
}

impl LocalFredholmOperator {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    fn sizes(&self) -> (usize, usize) {
        (self.a[0].ncols(), self.a[0].nrows())
    }

    pub fn check_conditions(&self, samples: usize) -> Result<ConditionReport> {
        let n = self.n();
        if n == 0 || self.b.len() != n {
            return Err(Error::InvalidArgument("need n ≥ 1 matrices A_j and B_j".into()));
        }
        let shape = self.a[0].shape();
        if shape.0 != shape.1 || self.a.iter().chain(&self.b).any(|m| m.shape() != shape) {
            return Err(Error::InvalidArgument("A_j, B_j must be square of one size".into()));
        }
        let ellipticity = perturbation::sampled_lower_bound(&self.a, samples);
        let coercivity = perturbation::sampled_lower_bound(&self.b, samples).powi(2);
        let mut residual = 0.0_f64;
        let mut scale = 1.0_f64;
        for aj in &self.a {
            for bk in &self.b {
                let r1 = aj.adjoint() * bk - bk.adjoint() * aj;
                let r2 = aj * bk.adjoint() - bk * aj.adjoint();
                residual = residual.max(linalg::max_abs(&r1)).max(linalg::max_abs(&r2));
                scale = scale.max(linalg::max_abs(aj) * linalg::max_abs(bk));
            }
        }
        if ellipticity <= perturbation::PROPER_TOL {
            return Err(Error::ConditionViolated {
                condition: 1,
                detail: format!("symbol not invertible (min singular value {ellipticity:.3e})"),
            });
        }
        if coercivity <= perturbation::PROPER_TOL {
            return Err(Error::ConditionViolated {
                condition: 2,
                detail: format!("B(x)*B(x) ≥ K|x|² fails (K ≈ {coercivity:.3e})"),
            });
        }
        if residual > STRUCTURE_TOL * scale {
            return Err(Error::ConditionViolated {
                condition: 3,
                detail: format!("A_j*B_k ≠ B_k*A_j (residual {residual:.3e})"),
            });
        }
        Ok(ConditionReport {
            ellipticity,
            coercivity,
            commutation_residual: residual,
        })
    }
}

/// Dirichlet box `[−R, R]^n` with `points` interior points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub radius: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn default_for(n: usize) -> Self {
        match n {
            1 => GridConfig {
                radius: 8.0,
                points: 64,
            },
            _ => GridConfig {
                radius: 6.0,
                points: 32,
            },
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.points + 1) as f64
    }
}

/// Eigenvalues examined by the gap search.
const GAP_WINDOW: usize = 10;
/// Smallest accepted ratio across the chosen gap.
const MIN_GAP_RATIO: f64 = 4.0;

/// `−Σ G_jk ∂_j∂_k + K₀ + P(x)` on the grid, where `G_jk` are the
/// second-order coefficients, `K₀` the constant term and `P(x)` the
/// quadratic potential given by `(x_j x_k)`-coefficients.
fn grid_matrix(second: &[Vec<CMat>], constant: &CMat, potential: &[Vec<CMat>], grid: GridConfig) -> SparseHermitian {
    let n = second.len();
    let r = constant.nrows();
    let np = grid.points;
    let h = grid.spacing();
    let total = np.pow(n as u32);
    let stride: Vec<usize> = (0..n).map(|j| np.pow(j as u32)).collect();
    let digit = |idx: usize, j: usize| (idx / stride[j]) % np;
    let coord = |d: usize| -grid.radius + (d + 1) as f64 * h;
    let mut k = SparseHermitian::new(total * r);
    let inv_h2 = 1.0 / (h * h);
    for idx in 0..total {
        let x: Vec<f64> = (0..n).map(|j| coord(digit(idx, j))).collect();
        let mut diag = constant.clone();
        for j in 0..n {
            diag += &second[j][j] * c(2.0 * inv_h2, 0.0);
            for l in 0..n {
                diag += &potential[j][l] * c(x[j] * x[l], 0.0);
            }
        }
        k.add_block(idx * r, idx * r, &diag);
        for j in 0..n {
            let dj = digit(idx, j);
            for (ok, jdx) in [(dj > 0, idx.wrapping_sub(stride[j])), (dj + 1 < np, idx + stride[j])] {
                if ok {
                    k.add_block(idx * r, jdx * r, &(&second[j][j] * c(-inv_h2, 0.0)));
                }
            }
            for l in j + 1..n {
                let s = &second[j][l] + &second[l][j];
                let dl = digit(idx, l);
                for (sj, sl) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                    let tj = dj as i64 + sj;
                    let tl = dl as i64 + sl;
                    if tj < 0 || tl < 0 || tj >= np as i64 || tl >= np as i64 {
                        continue;
                    }
                    let jdx = (idx as i64 + sj * stride[j] as i64 + sl * stride[l] as i64) as usize;
                    let w = -(sj * sl) as f64 * 0.25 * inv_h2;
                    k.add_block(idx * r, jdx * r, &(&s * c(w, 0.0)));
                }
            }
        }
    }
    k
}

/// Kernel threshold from the largest relative gap in the low spectrum.
///
/// `floor` stands in for "numerically zero": a value no kernel eigenvalue of
/// the discretization should exceed. Returns the threshold and gap ratio.
pub fn gap_threshold(sorted: &[f64], floor: f64) -> Result<(f64, f64)> {
    let window = &sorted[..sorted.len().min(GAP_WINDOW)];
    let mut best = (floor, 0.0_f64);
    let mut prev = floor;
    for &v in window {
        let lo = prev.max(floor);
        let ratio = v / lo;
        if ratio > best.1 {
            best = ((lo * v.max(lo)).sqrt(), ratio);
        }
        prev = v;
    }
    if best.1 < MIN_GAP_RATIO {
        return Err(Error::InconclusiveGap {
            best_ratio: best.1,
            eigenvalues: window.to_vec(),
        });
    }
    Ok(best)
}

/// Graded kernel counts of `Q*Q` and `QQ*` from their lowest eigenvalues.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpectrum {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub threshold: f64,
    pub gap_ratio: f64,
}

/// Finite-difference spectra of `Q*Q` and `QQ*` with the gap-adaptive threshold.
pub fn grid_spectrum(op: &LocalFredholmOperator, grid: GridConfig) -> Result<GridSpectrum> {
    op.check_conditions(perturbation::DEFAULT_SAMPLES)?;
    let n = op.n();
    if n > 2 {
        return Err(Error::InvalidArgument("grid oracle supports n ≤ 2".into()));
    }
    if grid.points < 4 || !(grid.radius > 0.0) {
        return Err(Error::InvalidArgument("grid needs radius > 0 and ≥ 4 points".into()));
    }
    let (a, b) = (&op.a, &op.b);
    let (mp, mm) = op.sizes();
    let pair = |f: &dyn Fn(usize, usize) -> CMat| -> Vec<Vec<CMat>> {
        (0..n).map(|j| (0..n).map(|k| f(j, k)).collect()).collect()
    };
    let sum = |f: &dyn Fn(usize) -> CMat, size: usize| (0..n).fold(linalg::zeros(size, size), |acc, j| acc + f(j));
    let ab = sum(&|j| a[j].adjoint() * &b[j], mp);
    let ba = sum(&|j| &a[j] * b[j].adjoint(), mm);
    let ab = (&ab + ab.adjoint()) * c(0.5, 0.0);
    let ba = (&ba + ba.adjoint()) * c(0.5, 0.0);
    let k_plus = grid_matrix(
        &pair(&|j, k| a[j].adjoint() * &a[k]),
        &(-&ab),
        &pair(&|j, k| b[j].adjoint() * &b[k]),
        grid,
    );
    let k_minus = grid_matrix(
        &pair(&|j, k| &a[j] * a[k].adjoint()),
        &ba,
        &pair(&|j, k| &b[j] * b[k].adjoint()),
        grid,
    );
    // The gap rule only needs a few digits.
    let opts = EigenOptions::new(GAP_WINDOW, -0.5).tol(1e-6);
    let plus = lowest_eigenvalues(&k_plus, &opts)?;
    let minus = lowest_eigenvalues(&k_minus, &opts)?;

    let bb = sum(&|j| b[j].adjoint() * &b[j], mp);
    let h = grid.spacing();
    let floor = 0.25 * h * h * linalg::singular_values(&bb).max();
    let mut merged: Vec<f64> = plus.iter().chain(&minus).copied().collect();
    merged.sort_by(f64::total_cmp);
    let (threshold, gap_ratio) = gap_threshold(&merged, floor)?;
    Ok(GridSpectrum {
        plus,
        minus,
        threshold,
        gap_ratio,
    })
}

/// Index of `Q` from the finite-difference spectra of `Q*Q` and `QQ*`.
pub fn fredholm_index(op: &LocalFredholmOperator, grid: GridConfig) -> Result<LocalIndexResult> {
    let s = grid_spectrum(op, grid)?;
    let below = |v: &[f64]| v.iter().filter(|e| **e < s.threshold).count();
    Ok(LocalIndexResult::new(
        below(&s.plus),
        below(&s.minus),
        Method::GridOracle,
    ))
}

/// Grid oracle for `D(x̄) = Σ c_j ∂_j + Σ x_j Z_j` restricted to `E⁺`.
pub fn fredholm_index_oracle(data: &LocalData, grid: GridConfig) -> Result<LocalIndexResult> {
    fredholm_index(&data.fredholm_operator(), grid)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub indices: Vec<i64>,
    pub constant: bool,
}

/// Grid-oracle index along sampled points of a path of local Fredholm
/// operators. Any sample violating the hypotheses is an error naming it.
pub fn homotopy_invariance_check(path: &[LocalFredholmOperator], grid: GridConfig) -> Result<HomotopyReport> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    let indices = path
        .iter()
        .enumerate()
        .map(|(index, op)| {
            fredholm_index(op, grid).map(|r| r.index).map_err(|e| Error::AtSample {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let constant = indices.windows(2).all(|w| w[0] == w[1]);
    Ok(HomotopyReport { indices, constant })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalIndexReport {
    pub per_point: Vec<LocalIndexResult>,
    pub total: i64,
}

/// Sum of local indices. Each point must be proper; the eigenspace formula
/// is used when `Z(x)²` is scalar, the grid oracle otherwise.
pub fn global_index(points: &[LinearPerturbation], grid: Option<GridConfig>) -> Result<GlobalIndexReport> {
    let per_point = points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let wrap = |e: Error| Error::AtPoint {
                index,
                source: Box::new(e),
            };
            let report = check_proper(p, perturbation::DEFAULT_SAMPLES);
            if let Some(why) = report.failure() {
                return Err(wrap(Error::Improper(why)));
            }
            let data = LocalData::from_perturbation(p);
            match data.normalized() {
                Ok(norm) => local_index_eigenspace(&norm),
                Err(Error::NonScalarSquare { .. }) if p.n <= 2 => {
                    fredholm_index_oracle(&data, grid.unwrap_or(GridConfig::default_for(p.n)))
                }
                Err(e) => Err(e),
            }
            .map_err(wrap)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = per_point.iter().map(|r| r.index).sum();
    Ok(GlobalIndexReport { per_point, total })
}

/// Scalar helper for tests and presets: `A = (1)`, `B = (λ)` in one dimension
/// gives `Q = ∂ + λx`.
pub fn scalar_pair(a: C64, b: C64) -> LocalFredholmOperator {
    LocalFredholmOperator {
        a: vec![CMat::from_element(1, 1, a)],
        b: vec![CMat::from_element(1, 1, b)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn oscillator_matrices_sum_to_diagonal() {
        let [_, x2, p2] = oscillator_matrices(10, 1.7);
        for a in 0..10 {
            for b in 0..10 {
                let h = p2[a][b] + 1.7 * 1.7 * x2[a][b];
                let expect = if a == b { (2 * a + 1) as f64 * 1.7 } else { 0.0 };
                assert!((h - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_oscillator_kernels() {
        // −∂² + λ + λ²x² with λ = ∓1.
        for (lambda, kernel) in [(-1.0, 1), (1.0, 0)] {
            let mo = ModelOperator {
                n: 1,
                bbar: CMat::from_element(1, 1, c(lambda, 0.0)),
                zs: vec![CMat::from_element(1, 1, c(lambda, 0.0))],
                rank_plus: 1,
            };
            let (plus, _) = hermite_spectrum(&mo, 30, 3).unwrap();
            assert!((plus[0] - (1.0 + lambda)).abs() < 1e-12);
            let r = hermite_kernel_oracle(&mo, 30).unwrap();
            assert_eq!(r.dim_ker_plus, kernel);
        }
    }

    #[test]
    fn annihilation_operator_has_index_one() {
        let r = fredholm_index(&scalar_pair(ONE, ONE), GridConfig::default_for(1)).unwrap();
        assert_eq!((r.dim_ker_plus, r.dim_ker_minus, r.index), (1, 0, 1));
        let r = fredholm_index(&scalar_pair(ONE, -ONE), GridConfig::default_for(1)).unwrap();
        assert_eq!(r.index, -1);
    }

    #[test]
    fn gap_threshold_rules() {
        let (t, ratio) = gap_threshold(&[0.01, 2.0, 2.0, 4.0], 0.05).unwrap();
        assert!(t > 0.05 && t < 2.0 && ratio > 30.0);
        let (t, _) = gap_threshold(&[2.0, 2.0, 4.0], 0.05).unwrap();
        assert!(t < 2.0);
        assert!(gap_threshold(&[1.0, 1.5, 2.0, 2.5], 0.5).is_err());
    }

    #[test]
    fn condition_violations_are_named() {
        let op = scalar_pair(ONE, linalg::ZERO);
        match op.check_conditions(100) {
            Err(Error::ConditionViolated { condition: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        let op = scalar_pair(linalg::ZERO, ONE);
        assert!(matches!(
            op.check_conditions(100),
            Err(Error::ConditionViolated { condition: 1, .. })
        ));
        // A = 1, B = i violates A*B = B*A.
        let op = scalar_pair(ONE, linalg::I);
        assert!(matches!(
            op.check_conditions(100),
            Err(Error::ConditionViolated { condition: 3, .. })
        ));
    }
}
