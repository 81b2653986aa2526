//! Worked geometric applications: Poincaré–Hopf through the de Rham
//! operator, indices of pin-bundle sections on even spheres, and the
//! vanishing of induced indices on odd-codimension submanifolds.
//!
//! Vector fields and sections are represented by their data at the zeros
//! (linearizations and constant factors), which is all the index sees.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{build_graded_module, build_irreducible_rep, CliffordRep, GradedModule, TwistSpec};
use crate::error::{Error, Result};
use crate::instances::random_well_conditioned;
use crate::linalg::{self, c, CMat, I, ONE};
use crate::local_index::{
    self, fredholm_index_oracle, local_index_eigenspace, GridConfig, LocalData, LocalIndexResult,
};
use crate::perturbation::LinearPerturbation;

/// Tolerance for the matrix identities checked here.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Smallest `|det|` accepted for a nondegenerate linearization.
pub const DET_TOL: f64 = 1e-10;

fn sign_det(m: &DMatrix<f64>) -> Result<i64> {
    let det = m.determinant();
    if !(det.abs() > DET_TOL) {
        return Err(Error::DegenerateLinearization { det });
    }
    Ok(det.signum() as i64)
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &'static str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: rows.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

// ---------------------------------------------------------------------------
// The de Rham module

/// `Λ•Rⁿ ⊗ C` with even forms first, Clifford action `l(v) = v^♭∧ − v⌟` and
/// the commuting right action `ĉ(v) = v^♭∧ + v⌟`.
#[derive(Clone, Debug)]
pub struct DeRhamModule {
    pub module: GradedModule,
    /// Basis forms as bit masks over `e₁..e_n`.
    pub basis: Vec<u32>,
    /// `ĉ(e_k)`.
    pub hat: Vec<CMat>,
}

impl DeRhamModule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 10 {
            return Err(Error::InvalidArgument(format!(
                "de Rham module needs 1 ≤ n ≤ 10, got {n}"
            )));
        }
        let mut basis: Vec<u32> = (0..1u32 << n).collect();
        basis.sort_by_key(|m| (m.count_ones() % 2, m.count_ones(), *m));
        let pos = |mask: u32| basis.iter().position(|&b| b == mask).expect("mask in basis");
        let dim = basis.len();
        let mut ext = vec![linalg::zeros(dim, dim); n];
        let mut int = vec![linalg::zeros(dim, dim); n];
        for (col, &mask) in basis.iter().enumerate() {
            for k in 0..n {
                let bit = 1u32 << k;
                // Sign from moving e_k past the lower-index factors.
                let sign = if (mask & (bit - 1)).count_ones() % 2 == 0 {
                    ONE
                } else {
                    -ONE
                };
                if mask & bit == 0 {
                    ext[k][(pos(mask | bit), col)] = sign;
                } else {
                    int[k][(pos(mask & !bit), col)] = sign;
                }
            }
        }
        let action: Vec<CMat> = (0..n).map(|k| &ext[k] - &int[k]).collect();
        let hat: Vec<CMat> = (0..n).map(|k| &ext[k] + &int[k]).collect();
        let half = dim / 2;
        let module = GradedModule::from_parts(n, half, half, action)?;
        Ok(Self { module, basis, hat })
    }

    pub fn n(&self) -> usize {
        self.module.n
    }

    /// `Z_V = V^♭∧ + V⌟` for the vector `v`.
    pub fn z_v(&self, v: &[f64]) -> CMat {
        linalg::combine(v, &self.hat)
    }

    /// Coefficients `Z_j` of `Z_{V(x)} = Σ_j x_j Z_j` for the linear field
    /// `V(x) = Jx`, that is `Z_j = Σ_k J_kj ĉ(e_k)`.
    pub fn linear_coefficients(&self, jac: &DMatrix<f64>) -> Vec<CMat> {
        (0..self.n())
            .map(|j| {
                let col: Vec<f64> = jac.column(j).iter().copied().collect();
                self.z_v(&col)
            })
            .collect()
    }

    /// The de Rham perturbation at a zero with linearization `jac`.
    pub fn perturbation(&self, jac: &DMatrix<f64>) -> Result<LinearPerturbation> {
        if jac.shape() != (self.n(), self.n()) {
            return Err(Error::DimensionMismatch {
                what: "linearization size",
                expected: self.n(),
                found: jac.nrows(),
            });
        }
        LinearPerturbation::new(self.module.clone(), self.linear_coefficients(jac), vec![0.0; self.n()])
    }
}

// ---------------------------------------------------------------------------
// Poincaré–Hopf

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldZero {
    pub label: String,
    /// `∂V_i/∂x_j`, row-major.
    pub linearization: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub n: usize,
    pub zeros: Vec<VectorFieldZero>,
}

impl VectorFieldSpec {
    fn diagonal(label: &str, d: &[f64]) -> VectorFieldZero {
        let n = d.len();
        VectorFieldZero {
            label: label.into(),
            linearization: (0..n)
                .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// Two zeros with linearization `I` (a source and a sink on `S²`).
    pub fn sphere() -> Self {
        Self {
            n: 2,
            zeros: vec![
                Self::diagonal("north", &[1.0, 1.0]),
                Self::diagonal("south", &[1.0, 1.0]),
            ],
        }
    }

    /// The four zeros of `(sin θ₁, sin θ₂)` on `T²`.
    pub fn torus() -> Self {
        Self {
            n: 2,
            zeros: vec![
                Self::diagonal("(0,0)", &[1.0, 1.0]),
                Self::diagonal("(0,pi)", &[1.0, -1.0]),
                Self::diagonal("(pi,0)", &[-1.0, 1.0]),
                Self::diagonal("(pi,pi)", &[-1.0, -1.0]),
            ],
        }
    }

    /// A single saddle `diag(1, −1)`.
    pub fn saddle() -> Self {
        Self {
            n: 2,
            zeros: vec![Self::diagonal("saddle", &[1.0, -1.0])],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "sphere" => Some(Self::sphere()),
            "torus" => Some(Self::torus()),
            "saddle" => Some(Self::saddle()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<Vec<DMatrix<f64>>> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "vector field spec needs even n ≥ 2, got {}",
                self.n
            )));
        }
        self.zeros
            .iter()
            .enumerate()
            .map(|(index, z)| {
                let m = matrix_from_rows(&z.linearization, self.n, "linearization rows")?;
                sign_det(&m).map_err(|e| Error::AtPoint {
                    index,
                    source: Box::new(e),
                })?;
                Ok(m)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroIndex {
    pub label: String,
    pub sign_det: i64,
    pub pipeline: LocalIndexResult,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareHopfReport {
    pub per_zero: Vec<ZeroIndex>,
    pub chi: i64,
}

/// Index of the de Rham operator deformed by `Z_V` at a zero with
/// linearization `jac`: the grid oracle for `n ≤ 2`, the eigenspace formula
/// (after frame normalization) above that.
pub fn de_rham_local_index(jac: &DMatrix<f64>, grid: Option<GridConfig>) -> Result<LocalIndexResult> {
    let n = jac.nrows();
    let dr = DeRhamModule::new(n)?;
    let p = dr.perturbation(jac)?;
    let data = LocalData::from_perturbation(&p);
    if n <= 2 {
        fredholm_index_oracle(&data, grid.unwrap_or(GridConfig::default_for(n)))
    } else {
        local_index_eigenspace(&data.normalized()?)
    }
}

/// Per-zero indices two ways (sign of the Jacobian determinant and the full
/// de Rham pipeline), asserted equal, and their sum.
pub fn poincare_hopf(spec: &VectorFieldSpec, grid: Option<GridConfig>) -> Result<PoincareHopfReport> {
    let jacs = spec.validate()?;
    let mut per_zero = Vec::with_capacity(jacs.len());
    for (index, (z, jac)) in spec.zeros.iter().zip(&jacs).enumerate() {
        let wrap = |e: Error| Error::AtPoint {
            index,
            source: Box::new(e),
        };
        let sd = sign_det(jac).map_err(wrap)?;
        let pipeline = de_rham_local_index(jac, grid).map_err(wrap)?;
        if pipeline.index != sd {
            return Err(wrap(Error::VerificationFailed(format!(
                "pipeline index {} differs from sign det {sd}",
                pipeline.index
            ))));
        }
        per_zero.push(ZeroIndex {
            label: z.label.clone(),
            sign_det: sd,
            pipeline,
        });
    }
    let chi = per_zero.iter().map(|z| z.sign_det).sum();
    Ok(PoincareHopfReport { per_zero, chi })
}

/// A random `n×n` linearization with singular values in `[lo, hi]` and a
/// random determinant sign.
pub fn random_linearization<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<f64> {
    random_well_conditioned(n, lo, hi, rng)
}

/// The local Fredholm operator of the de Rham model with linearization `jac`.
pub fn de_rham_operator(jac: &DMatrix<f64>) -> Result<local_index::LocalFredholmOperator> {
    let dr = DeRhamModule::new(jac.nrows())?;
    let p = dr.perturbation(jac)?;
    Ok(LocalData::from_perturbation(&p).fredholm_operator())
}

// ---------------------------------------------------------------------------
// The commuting lemma

/// `R_B = 2BBᵀ/|B|² − I`: fixes `B`, negates its orthogonal complement.
pub fn reflection(b: &[f64]) -> Result<DMatrix<f64>> {
    let v = DVector::from_column_slice(b);
    let nn = v.norm_squared();
    if !(nn > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(&v * v.transpose() * (2.0 / nn) - DMatrix::identity(b.len(), b.len()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutingLemmaReport {
    /// `max |c(B₂)c(B₁) − c(B̃₁)c(B₂)|`.
    pub residual: f64,
    /// `det R_{B₂}`.
    pub reflection_det: f64,
    /// `sign det(−R·V) = −sign det V` for a sample invertible `V`.
    pub index_flips: bool,
}

impl CommutingLemmaReport {
    pub fn holds(&self) -> bool {
        self.residual <= IDENTITY_TOL && (self.reflection_det + 1.0).abs() < 1e-9 && self.index_flips
    }
}

/// Checks `c(B₂)c(B₁) = c(B̃₁)c(B₂)` with `B̃₁ = B₁^∥ − B₁^⊥` relative to `B₂`,
/// and the determinant bookkeeping behind the index flip in even `n`.
pub fn commuting_lemma_check(b1: &[f64], b2: &[f64], rep: &CliffordRep) -> Result<CommutingLemmaReport> {
    let n = rep.n;
    if b1.len() != n || b2.len() != n {
        return Err(Error::DimensionMismatch {
            what: "vector length",
            expected: n,
            found: b1.len().max(b2.len()),
        });
    }
    let r = reflection(b2)?;
    let b1t: Vec<f64> = (&r * DVector::from_column_slice(b1)).iter().copied().collect();
    let lhs = rep.c(b2) * rep.c(b1);
    let rhs = rep.c(&b1t) * rep.c(b2);
    let residual = linalg::max_abs(&(lhs - rhs));
    let reflection_det = r.determinant();
    // Any invertible V will do; use one built from B₂ so the check is
    // deterministic.
    let v = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |i, j| 0.1 * b2[i] * b2[(j + 1) % n]);
    let index_flips = match (sign_det(&v), sign_det(&(-&r * &v))) {
        (Ok(a), Ok(b)) => n % 2 == 0 && a == -b,
        _ => false,
    };
    Ok(CommutingLemmaReport {
        residual,
        reflection_det,
        index_flips,
    })
}

// ---------------------------------------------------------------------------
// Pin sections

/// One factor of a local factorization `β = V₁V₂⋯V_r`.
#[derive(Clone, Debug, PartialEq)]
pub enum PinFactor {
    /// The vanishing factor, by its linearization.
    Linear(DMatrix<f64>),
    /// A constant nonzero vector.
    Constant(DVector<f64>),
}

/// A zero of a pin section: `V₁` vanishing with the given linearization,
/// `V₂..V_r` constant nonzero vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinSectionSpec {
    pub n: usize,
    pub linear: Vec<Vec<f64>>,
    pub tail: Vec<Vec<f64>>,
}

impl PinSectionSpec {
    pub fn factors(&self) -> Result<Vec<PinFactor>> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "pin sections need even n ≥ 2, got {}",
                self.n
            )));
        }
        let m = matrix_from_rows(&self.linear, self.n, "linearization rows")?;
        sign_det(&m)?;
        let mut out = vec![PinFactor::Linear(m)];
        for v in &self.tail {
            if v.len() != self.n {
                return Err(Error::DimensionMismatch {
                    what: "tail vector length",
                    expected: self.n,
                    found: v.len(),
                });
            }
            if !(v.iter().map(|x| x * x).sum::<f64>() > 0.0) {
                return Err(Error::ZeroVector);
            }
            out.push(PinFactor::Constant(DVector::from_column_slice(v)));
        }
        Ok(out)
    }
}

/// Clifford product of the factors at the point `y` (the linear factor
/// evaluated as `My`).
fn factor_product(factors: &[PinFactor], y: &DVector<f64>, rep: &CliffordRep) -> CMat {
    factors.iter().fold(linalg::identity(rep.dim), |acc, f| {
        let v = match f {
            PinFactor::Linear(m) => m * y,
            PinFactor::Constant(b) => b.clone(),
        };
        acc * rep.c(v.as_slice())
    })
}

/// Result of bringing the vanishing factor to the front.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extraction {
    pub index: i64,
    /// Constant factors the vanishing factor was moved past.
    pub moves: usize,
    /// Largest residual of the commuting identity over the moves.
    pub residual: f64,
}

/// Moves the unique vanishing factor to the front, reflecting its
/// linearization across each constant factor it passes
/// (`B·X = R_B X·B`), and reads off `sign det` of the result.
pub fn extract_index(factors: &[PinFactor], rep: &CliffordRep) -> Result<Extraction> {
    let linear: Vec<usize> = factors
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, PinFactor::Linear(_)))
        .map(|(i, _)| i)
        .collect();
    let &[pos] = linear.as_slice() else {
        return Err(Error::InvalidArgument(format!(
            "expected exactly one vanishing factor, found {}",
            linear.len()
        )));
    };
    let PinFactor::Linear(m) = &factors[pos] else {
        unreachable!()
    };
    let n = rep.n;
    let mut m = m.clone();
    let mut residual = 0.0_f64;
    let y = DVector::from_fn(n, |i, _| 0.3 + 0.17 * i as f64);
    for f in factors[..pos].iter().rev() {
        let PinFactor::Constant(b) = f else { unreachable!() };
        let r = reflection(b.as_slice())?;
        let x = &m * &y;
        let report_lhs = rep.c(b.as_slice()) * rep.c(x.as_slice());
        let moved = &r * &m;
        let report_rhs = rep.c((&moved * &y).as_slice()) * rep.c(b.as_slice());
        let scale = 1.0 + b.norm() * x.norm();
        residual = residual.max(linalg::max_abs(&(report_lhs - report_rhs)) / scale);
        m = moved;
    }
    Ok(Extraction {
        index: sign_det(&m)?,
        moves: pos,
        residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinZero {
    /// Axis `j` (1-based) whose projected vector vanishes here.
    pub axis: usize,
    /// `+1` at `E_j`, `−1` at `−E_j`.
    pub side: i64,
    pub index: i64,
    pub moves: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinSphereReport {
    pub m: usize,
    pub per_zero: Vec<PinZero>,
    pub total: i64,
    pub max_residual: f64,
}

/// The section `β = p(E₁)⋯p(E_{2m+1})` of the pin bundle of `S^{2m}`, where
/// `p(E_j)` is the tangential projection of the `j`-th basis vector.
///
/// At `±E_j` only `p(E_j)` vanishes, with linearization `∓I` in the tangent
/// coordinates `{E_i : i ≠ j}` (a sink or source, index 1); the other
/// factors are the constant vectors `E_i`. Moving `p(E_j)` to the front
/// passes `j − 1` factors, each a reflection of determinant `−1`.
pub fn pin_sphere_indices(m: usize) -> Result<PinSphereReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("sphere dimension 2m needs m ≥ 1".into()));
    }
    let n = 2 * m;
    let rep = build_irreducible_rep(n)?;
    let mut per_zero = Vec::new();
    let mut max_residual = 0.0_f64;
    for axis in 1..=n + 1 {
        for side in [1i64, -1] {
            let factors: Vec<PinFactor> = (1..=n + 1)
                .map(|i| {
                    if i == axis {
                        PinFactor::Linear(DMatrix::identity(n, n) * -(side as f64))
                    } else {
                        // Tangent coordinate of E_i once axis j is removed.
                        let t = if i < axis { i - 1 } else { i - 2 };
                        PinFactor::Constant(DVector::from_fn(n, |k, _| if k == t { 1.0 } else { 0.0 }))
                    }
                })
                .collect();
            let ex = extract_index(&factors, &rep)?;
            max_residual = max_residual.max(ex.residual);
            per_zero.push(PinZero {
                axis,
                side,
                index: ex.index,
                moves: ex.moves,
            });
        }
    }
    if max_residual > IDENTITY_TOL {
        return Err(Error::VerificationFailed(format!(
            "commuting identity residual {max_residual:.3e}"
        )));
    }
    let total = per_zero.iter().map(|z| z.index).sum();
    Ok(PinSphereReport {
        m,
        per_zero,
        total,
        max_residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WellDefinedReport {
    pub base_index: i64,
    pub trial_indices: Vec<i64>,
    pub stable: bool,
    /// Largest relative mismatch between a rewritten product and the
    /// original section times the appended even element.
    pub max_product_residual: f64,
}

fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 0.2 {
            return v;
        }
    }
}

/// Extracts the index from randomly rewritten factorizations of the same
/// zero and checks it never changes.
///
/// Each trial right-multiplies by an even product `w₁w₂` of constant
/// vectors, inserts a cancelling pair `u·(−u/|u|²)` at a random place and
/// moves the vanishing factor to a random position (`X·B = B·R_B X`). The
/// rewritten product is compared with the original at a sample point before
/// the index is extracted again.
pub fn pin_index_well_defined_check<R: Rng + ?Sized>(
    spec: &PinSectionSpec,
    trials: usize,
    rng: &mut R,
) -> Result<WellDefinedReport> {
    let factors = spec.factors()?;
    let n = spec.n;
    let rep = build_irreducible_rep(n)?;
    let base_index = extract_index(&factors, &rep)?.index;
    let mut trial_indices = Vec::with_capacity(trials);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let (w1, w2) = (random_vector(n, rng), random_vector(n, rng));
        let mut f = factors.clone();
        f.push(PinFactor::Constant(w1));
        f.push(PinFactor::Constant(w2));
        let target = f.clone();

        let u = random_vector(n, rng);
        let at = rng.random_range(1..=f.len());
        let u_inv = -&u / u.norm_squared();
        f.insert(at, PinFactor::Constant(u_inv));
        f.insert(at, PinFactor::Constant(u));

        let to = rng.random_range(0..f.len());
        let PinFactor::Linear(mut m) = f.remove(0) else {
            unreachable!()
        };
        for b in &f[..to] {
            let PinFactor::Constant(b) = b else { unreachable!() };
            m = reflection(b.as_slice())? * m;
        }
        f.insert(to, PinFactor::Linear(m));

        let y = random_vector(n, rng);
        let want = factor_product(&target, &y, &rep);
        let got = factor_product(&f, &y, &rep);
        let scale = linalg::max_abs(&want).max(1e-300);
        worst = worst.max(linalg::max_abs(&(got - want)) / scale);
        trial_indices.push(extract_index(&f, &rep)?.index);
    }
    if worst > 1e-10 {
        return Err(Error::VerificationFailed(format!(
            "rewritten factorization differs from the section (residual {worst:.3e})"
        )));
    }
    let stable = trial_indices.iter().all(|&i| i == base_index);
    Ok(WellDefinedReport {
        base_index,
        trial_indices,
        stable,
        max_product_residual: worst,
    })
}

// ---------------------------------------------------------------------------
// Odd-codimension submanifolds

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmanifoldSpec {
    /// Dimension of `M`.
    pub n_m: usize,
    /// Rank of the normal bundle (odd).
    pub normal_rank: usize,
    /// Coefficient of the oriented vertical volume element `e_{n+1}∧⋯∧e_{n+k}`.
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubmanifoldReport {
    pub hermitian_residual: f64,
    pub odd_residual: f64,
    pub anticommutation_residual: f64,
    pub smallest_singular_value: f64,
    pub index: i64,
}

/// `Z = i^ε c(ω)` on a module over the total space of an odd-rank bundle,
/// restricted to the tangential Clifford action of `M`.
///
/// `ε ∈ {0, 1}` makes `Z` Hermitian: `c(ω)* = (−1)^{k(k+1)/2} c(ω)` for a
/// product of `k` unit vectors, so `ε = 1` for `k ≡ 1, 2 (mod 4)`. With
/// `k = 1` this is `Z = i·c(ω)`. `Z` is invertible, odd and anticommutes
/// with `c(e_j)` for `j ≤ n_M`, so the perturbed operator has no singular
/// points and its index is the empty sum.
pub fn submanifold_vanishing(spec: &SubmanifoldSpec) -> Result<SubmanifoldReport> {
    let (n, k) = (spec.n_m, spec.normal_rank);
    if n == 0 || k % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "need dim M ≥ 1 and odd normal rank, got {n} and {k}"
        )));
    }
    if !(spec.omega != 0.0) || !spec.omega.is_finite() {
        return Err(Error::ZeroVector);
    }
    let total = n + k;
    let rep = build_irreducible_rep(total)?;
    let twist = if total % 2 == 0 {
        TwistSpec::Even { w_plus: 1, w_minus: 1 }
    } else {
        TwistSpec::Odd { w_prime: 1 }
    };
    let module = build_graded_module(&rep, twist)?;
    let c_omega = module.action[n..]
        .iter()
        .fold(linalg::identity(module.rank()), |acc, a| acc * a)
        * c(spec.omega, 0.0);
    let phase = if (k * (k + 1) / 2) % 2 == 1 { I } else { ONE };
    let z = c_omega * phase;

    let hermitian_residual = linalg::hermitian_residual(&z);
    let odd_residual = linalg::max_abs(&linalg::anticommutator(&module.grading, &z));
    let anticommutation_residual = module.action[..n]
        .iter()
        .map(|a| linalg::max_abs(&linalg::anticommutator(a, &z)))
        .fold(0.0, f64::max);
    let smallest_singular_value = linalg::smallest_singular_value(&z);
    let tol = 1e-10 * spec.omega.abs().max(1.0);
    if hermitian_residual > tol || odd_residual > tol || anticommutation_residual > tol {
        return Err(Error::VerificationFailed(format!(
            "Z fails: hermitian {hermitian_residual:.3e}, odd {odd_residual:.3e}, anticommutation {anticommutation_residual:.3e}"
        )));
    }
    if smallest_singular_value < 0.5 * spec.omega.abs() {
        return Err(Error::VerificationFailed(format!(
            "Z is not invertible (smallest singular value {smallest_singular_value:.3e})"
        )));
    }
    let index = local_index::global_index(&[], None)?.total;
    Ok(SubmanifoldReport {
        hermitian_residual,
        odd_residual,
        anticommutation_residual,
        smallest_singular_value,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_index::local_index_eigenspace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn de_rham_module_is_graded_clifford() {
        for n in 1..=4 {
            let dr = DeRhamModule::new(n).unwrap();
            assert!(dr.module.invariants().max() < 1e-14);
            for (k, h) in dr.hat.iter().enumerate() {
                assert!(linalg::hermitian_residual(h) < 1e-14);
                for a in &dr.module.action {
                    assert!(linalg::max_abs(&linalg::anticommutator(a, h)) < 1e-14);
                }
                let sq = h * h - linalg::identity(1 << n);
                assert!(linalg::max_abs(&sq) < 1e-14, "hat {k}");
            }
        }
    }

    #[test]
    fn negative_eigenspace_examples() {
        let dr = DeRhamModule::new(2).unwrap();
        let source = DMatrix::identity(2, 2);
        let data = LocalData::from_perturbation(&dr.perturbation(&source).unwrap());
        let r = local_index_eigenspace(&data.normalized().unwrap()).unwrap();
        assert_eq!((r.dim_ker_plus, r.dim_ker_minus, r.index), (1, 0, 1));
        let saddle = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let data = LocalData::from_perturbation(&dr.perturbation(&saddle).unwrap());
        let r = local_index_eigenspace(&data.normalized().unwrap()).unwrap();
        assert_eq!((r.dim_ker_plus, r.dim_ker_minus, r.index), (0, 1, -1));
    }

    #[test]
    fn higher_dimensional_pipeline_uses_the_eigenspace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let v = random_linearization(4, 0.5, 2.0, &mut rng);
            let r = de_rham_local_index(&v, None).unwrap();
            assert_eq!(r.index, sign_det(&v).unwrap());
        }
    }

    #[test]
    fn degenerate_zero_is_rejected() {
        let spec = VectorFieldSpec {
            n: 2,
            zeros: vec![VectorFieldZero {
                label: "bad".into(),
                linearization: vec![vec![1.0, 2.0], vec![2.0, 4.0]],
            }],
        };
        let err = poincare_hopf(&spec, None).unwrap_err();
        assert!(matches!(err.root(), Error::DegenerateLinearization { .. }));
    }

    #[test]
    fn commuting_lemma_special_cases() {
        let rep = build_irreducible_rep(2).unwrap();
        let perp = commuting_lemma_check(&[0.0, 1.0], &[2.0, 0.0], &rep).unwrap();
        assert!(perp.holds());
        let par = commuting_lemma_check(&[3.0, 0.0], &[1.0, 0.0], &rep).unwrap();
        assert!(par.holds());
        assert!(matches!(
            commuting_lemma_check(&[1.0, 0.0], &[0.0, 0.0], &rep),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn pin_sphere_m1() {
        let r = pin_sphere_indices(1).unwrap();
        let idx: Vec<i64> = r.per_zero.iter().map(|z| z.index).collect();
        assert_eq!(idx, vec![1, 1, -1, -1, 1, 1]);
        assert_eq!(r.total, 2);
    }

    #[test]
    fn pin_well_defined_rejects_zero_tail() {
        let spec = PinSectionSpec {
            n: 4,
            linear: (0..4)
                .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            tail: vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            pin_index_well_defined_check(&spec, 5, &mut rng),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn submanifold_rank_one() {
        let r = submanifold_vanishing(&SubmanifoldSpec {
            n_m: 2,
            normal_rank: 1,
            omega: 1.0,
        })
        .unwrap();
        assert_eq!(r.index, 0);
        assert!(r.smallest_singular_value > 0.99);
        let r3 = submanifold_vanishing(&SubmanifoldSpec {
            n_m: 2,
            normal_rank: 3,
            omega: -2.0,
        })
        .unwrap();
        assert_eq!(r3.index, 0);
        assert!(submanifold_vanishing(&SubmanifoldSpec {
            n_m: 2,
            normal_rank: 1,
            omega: 0.0,
        })
        .is_err());
    }
}
