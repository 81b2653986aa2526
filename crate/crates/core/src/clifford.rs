//! Complex Clifford representations, chirality, and graded Clifford modules.
//!
//! Generators are `g_j = i·Γ_j` where `Γ_j` is the Jordan–Wigner family of
//! Hermitian, pairwise anticommuting involutions on `(C²)^{⊗k}`:
//!
//! ```text
//! Γ_{2j-1} = σz^{⊗(j-1)} ⊗ σx ⊗ 1,   Γ_{2j} = σz^{⊗(j-1)} ⊗ σy ⊗ 1,   Γ_{2k+1} = σz^{⊗k}
//! ```
//!
//! so `g_j² = −1`. Tensor factors are always taken left to right in this
//! order, which makes every output bit-reproducible. In even dimensions the
//! basis is permuted so that the `+1` eigenspace of the chirality operator
//! comes first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, kron_all, CMat, C64, I, ONE, ZERO};

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `n` Hermitian anticommuting involutions of size `2^⌊n/2⌋`, unpermuted.
fn hermitian_family(n: usize) -> Vec<CMat> {
    let k = n / 2;
    let mut out = Vec::with_capacity(n);
    for j in 0..k {
        for p in [pauli_x(), pauli_y()] {
            let mut f = vec![pauli_z(); j];
            f.push(p);
            f.extend(std::iter::repeat_n(linalg::identity(2), k - j - 1));
            out.push(kron_all(&f));
        }
    }
    if n % 2 == 1 {
        out.push(kron_all(&vec![pauli_z(); k]));
    }
    out
}

/// Basis order putting even-parity computational states (σz^{⊗k} = +1) first.
fn chirality_order(k: usize) -> Vec<usize> {
    let dim = 1usize << k;
    let (mut even, mut odd): (Vec<usize>, Vec<usize>) = (0..dim).partition(|s| s.count_ones() % 2 == 0);
    even.append(&mut odd);
    even
}

/// Permutation matrix whose `j`-th column is the basis vector `order[j]`.
fn permutation(order: &[usize]) -> CMat {
    let n = order.len();
    let mut p = linalg::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        p[(i, j)] = ONE;
    }
    p
}

/// An irreducible complex representation of `Cl(R^n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CliffordRep {
    pub n: usize,
    pub dim: usize,
    #[serde(with = "linalg::matrix_json::list")]
    pub generators: Vec<CMat>,
    #[serde(with = "linalg::matrix_json")]
    pub chirality: CMat,
}

/// Residuals of the defining identities of a Clifford representation or module.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct InvariantReport {
    /// max |g_j g_k + g_k g_j + 2δ_jk|
    pub clifford: f64,
    /// max |g_j + g_j*|
    pub skew_adjoint: f64,
    /// max |γ² − 1| (or |ε² − 1| for a module)
    pub chirality_square: f64,
    /// max |γ g_j ∓ g_j γ| with the sign fixed by the parity of n
    /// (for a module, max |ε c_j + c_j ε|)
    pub chirality_grading: f64,
}

impl InvariantReport {
    pub fn max(&self) -> f64 {
        self.clifford
            .max(self.skew_adjoint)
            .max(self.chirality_square)
            .max(self.chirality_grading)
    }
}

fn clifford_residuals(gens: &[CMat]) -> (f64, f64) {
    let dim = gens.first().map_or(0, |g| g.nrows());
    let id = linalg::identity(dim);
    let mut cl = 0.0_f64;
    let mut skew = 0.0_f64;
    for (j, gj) in gens.iter().enumerate() {
        skew = skew.max(linalg::max_abs(&(gj + gj.adjoint())));
        for (k, gk) in gens.iter().enumerate().skip(j) {
            let mut r = linalg::anticommutator(gj, gk);
            if j == k {
                r += &id * c(2.0, 0.0);
            }
            cl = cl.max(linalg::max_abs(&r));
        }
    }
    (cl, skew)
}

impl CliffordRep {
    /// Clifford multiplication by the vector `v`.
    pub fn c(&self, v: &[f64]) -> CMat {
        linalg::combine(v, &self.generators)
    }

    /// Dimension of each half-spinor space (even `n` only meaningful).
    pub fn half_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn invariants(&self) -> InvariantReport {
        let (clifford, skew_adjoint) = clifford_residuals(&self.generators);
        let id = linalg::identity(self.dim);
        let gamma = &self.chirality;
        let chirality_square = linalg::max_abs(&(gamma * gamma - &id));
        let sign = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        let chirality_grading = self
            .generators
            .iter()
            .map(|g| linalg::max_abs(&(gamma * g + g * gamma * c(sign, 0.0))))
            .fold(0.0, f64::max);
        InvariantReport {
            clifford,
            skew_adjoint,
            chirality_square,
            chirality_grading,
        }
    }
}

/// Builds the irreducible representation of dimension `2^⌊n/2⌋`.
pub fn build_irreducible_rep(n: usize) -> Result<CliffordRep> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut generators: Vec<CMat> = hermitian_family(n).into_iter().map(|h| h * I).collect();
    let dim = generators[0].nrows();
    if n % 2 == 0 {
        let p = permutation(&chirality_order(n / 2));
        for g in &mut generators {
            *g = p.transpose() * &*g * &p;
        }
    }
    let k = n.div_ceil(2);
    let phase = I.powu(k as u32);
    let product = generators.iter().fold(linalg::identity(dim), |acc, g| acc * g);
    let mut chirality = product * phase;
    // The product is ±1 on a diagonal basis; drop rounding noise.
    chirality.iter_mut().for_each(|z| *z = c(z.re.round(), z.im.round()));
    Ok(CliffordRep {
        n,
        dim,
        generators,
        chirality,
    })
}

/// Twisting data `W` for `E = S ⊗ W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "parity", rename_all = "lowercase")]
pub enum TwistSpec {
    /// `W = W⁺ ⊕ W⁻`, for even `n`.
    Even { w_plus: usize, w_minus: usize },
    /// `W = W′ ⊕ W′`, for odd `n`.
    Odd { w_prime: usize },
}

impl TwistSpec {
    fn name(&self) -> &'static str {
        match self {
            TwistSpec::Even { .. } => "even",
            TwistSpec::Odd { .. } => "odd",
        }
    }
}

/// A Z₂-graded Clifford module with `E⁺` occupying the leading block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedModule {
    pub n: usize,
    pub rank_plus: usize,
    pub rank_minus: usize,
    #[serde(with = "linalg::matrix_json::list")]
    pub action: Vec<CMat>,
    #[serde(with = "linalg::matrix_json")]
    pub grading: CMat,
    /// How the module was built from `S ⊗ W`; absent for modules read from
    /// JSON or assembled by hand.
    #[serde(skip)]
    pub construction: Option<Construction>,
}

/// Unitary change of basis from natural `S ⊗ W` coordinates to the graded
/// coordinates of a module, with the representation and twist used.
#[derive(Clone, Debug)]
pub struct Construction {
    pub rep: CliffordRep,
    pub twist: TwistSpec,
    /// Columns are the graded basis vectors in `S ⊗ W` coordinates.
    pub basis: CMat,
}

impl GradedModule {
    /// Wraps hand-built action matrices, checking shapes and the graded
    /// Clifford identities to `1e-10`.
    pub fn from_parts(n: usize, rank_plus: usize, rank_minus: usize, action: Vec<CMat>) -> Result<Self> {
        let rank = rank_plus + rank_minus;
        if action.len() != n {
            return Err(Error::DimensionMismatch {
                what: "number of action matrices",
                expected: n,
                found: action.len(),
            });
        }
        if let Some(m) = action.iter().find(|m| m.shape() != (rank, rank)) {
            return Err(Error::DimensionMismatch {
                what: "action matrix size",
                expected: rank,
                found: m.nrows(),
            });
        }
        let mut grading = linalg::identity(rank);
        for i in rank_plus..rank {
            grading[(i, i)] = -ONE;
        }
        let m = Self {
            n,
            rank_plus,
            rank_minus,
            action,
            grading,
            construction: None,
        };
        let r = m.invariants().max();
        if r > 1e-10 {
            return Err(Error::VerificationFailed(format!(
                "action matrices violate graded Clifford identities (residual {r:.3e})"
            )));
        }
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        self.rank_plus + self.rank_minus
    }

    pub fn c(&self, v: &[f64]) -> CMat {
        linalg::combine(v, &self.action)
    }

    /// Block `E^- ← E^+` of an operator on `E`.
    pub fn minus_plus(&self, m: &CMat) -> CMat {
        linalg::block(m, self.rank_plus, 0, self.rank_minus, self.rank_plus)
    }

    /// Block `E^+ ← E^+` of an operator on `E`.
    pub fn plus_plus(&self, m: &CMat) -> CMat {
        linalg::block(m, 0, 0, self.rank_plus, self.rank_plus)
    }

    /// Block `E^- ← E^-` of an operator on `E`.
    pub fn minus_minus(&self, m: &CMat) -> CMat {
        linalg::block(m, self.rank_plus, self.rank_plus, self.rank_minus, self.rank_minus)
    }

    pub fn invariants(&self) -> InvariantReport {
        let (clifford, skew_adjoint) = clifford_residuals(&self.action);
        let eps = &self.grading;
        let id = linalg::identity(self.rank());
        InvariantReport {
            clifford,
            skew_adjoint,
            chirality_square: linalg::max_abs(&(eps * eps - id)),
            chirality_grading: self
                .action
                .iter()
                .map(|a| linalg::max_abs(&linalg::anticommutator(eps, a)))
                .fold(0.0, f64::max),
        }
    }

    /// Maps an operator given in natural `S ⊗ W` coordinates into graded
    /// coordinates. Requires a module built by [`build_graded_module`].
    pub fn from_natural(&self, m: &CMat) -> Result<CMat> {
        let b = &self
            .construction
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("module has no tensor construction".into()))?
            .basis;
        Ok(b.adjoint() * m * b)
    }
}

/// Builds `E = S ⊗ W` with its grading.
///
/// Even `n`: `E⁺ = S⁺⊗W⁺ ⊕ S⁻⊗W⁻`, `E⁻ = S⁻⊗W⁺ ⊕ S⁺⊗W⁻`, action `c ⊗ 1`.
/// Odd `n`: `E = S ⊗ (W′ ⊕ W′)` with action `c⁺ ⊗ diag(1, −1)` (that is,
/// `c⁻ = −c⁺`), graded by `E^± = S ⊗ {(w, ±w)/√2}`.
pub fn build_graded_module(rep: &CliffordRep, twist: TwistSpec) -> Result<GradedModule> {
    let even = rep.n % 2 == 0;
    let d = rep.dim;
    let (action_natural, basis, rank_plus) = match (twist, even) {
        (TwistSpec::Even { w_plus, w_minus }, true) => {
            let w = w_plus + w_minus;
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for s in 0..d {
                let gs = rep.chirality[(s, s)].re;
                for i in 0..w {
                    let gw = if i < w_plus { 1.0 } else { -1.0 };
                    if gs * gw > 0.0 {
                        plus.push(s * w + i);
                    } else {
                        minus.push(s * w + i);
                    }
                }
            }
            let rank_plus = plus.len();
            plus.append(&mut minus);
            let action = rep
                .generators
                .iter()
                .map(|g| kron(g, &linalg::identity(w)))
                .collect::<Vec<_>>();
            (action, permutation(&plus), rank_plus)
        }
        (TwistSpec::Odd { w_prime }, false) => {
            let w = w_prime;
            let mut flip = linalg::identity(2 * w);
            for i in w..2 * w {
                flip[(i, i)] = -ONE;
            }
            let action = rep.generators.iter().map(|g| kron(g, &flip)).collect::<Vec<_>>();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let total = d * 2 * w;
            let mut basis = linalg::zeros(total, total);
            for (sign_idx, sign) in [1.0, -1.0].into_iter().enumerate() {
                for s in 0..d {
                    for i in 0..w {
                        let col = sign_idx * d * w + s * w + i;
                        basis[(s * 2 * w + i, col)] = c(r, 0.0);
                        basis[(s * 2 * w + w + i, col)] = c(sign * r, 0.0);
                    }
                }
            }
            (action, basis, d * w)
        }
        _ => {
            return Err(Error::ParityMismatch {
                n: rep.n,
                twist: twist.name(),
            })
        }
    };
    let total = basis.nrows();
    let action = action_natural.iter().map(|a| basis.adjoint() * a * &basis).collect();
    let mut grading = linalg::identity(total);
    for i in rank_plus..total {
        grading[(i, i)] = -ONE;
    }
    Ok(GradedModule {
        n: rep.n,
        rank_plus,
        rank_minus: total - rank_plus,
        action,
        grading,
        construction: Some(Construction {
            rep: rep.clone(),
            twist,
            basis,
        }),
    })
}

/// True iff `r` is a positive multiple of `2^⌊(k−1)/2⌋`, the possible sizes
/// of a `k`-parameter pencil of matrices invertible away from the origin.
pub fn admissible_rank(k: usize, r: usize) -> bool {
    if k == 0 || r == 0 {
        return false;
    }
    r % (1usize << ((k - 1) / 2)) == 0
}

/// Matrices `L_1..L_k` of size `m·2^⌊(k−1)/2⌋` with `Σ x_j L_j` invertible
/// for every `x ≠ 0`.
///
/// Odd `k` uses the Hermitian family directly (`(Σx_jΓ_j)² = |x|²`); even `k`
/// uses the `S⁻ ← S⁺` blocks of the family one size up.
pub fn build_invertible_pencil(k: usize, m: usize) -> Result<Vec<CMat>> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidArgument("k and m must be at least 1".into()));
    }
    let id = linalg::identity(m);
    let base: Vec<CMat> = if k % 2 == 1 {
        hermitian_family(k)
    } else {
        let half = 1usize << (k / 2 - 1);
        let p = permutation(&chirality_order(k / 2));
        hermitian_family(k)
            .into_iter()
            .map(|g| linalg::block(&(p.transpose() * g * &p), half, 0, half, half))
            .collect()
    };
    Ok(base.iter().map(|l| kron(l, &id)).collect())
}

/// Outcome of solving for odd endomorphisms anticommuting with all of Clifford
/// multiplication on `S ⊗ C^w`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: usize,
    pub dim: usize,
    pub dim_w: usize,
    /// Dimension of `{Z : Zc_j + c_jZ = 0 ∀j, γZ + Zγ = 0}`.
    pub nullity_graded: usize,
    /// Dimension of `{Z : Zc_j + c_jZ = 0 ∀j}`.
    pub nullity_ungraded: usize,
    /// Whether every solution of the ungraded system has the form `γ ⊗ M`.
    pub ungraded_spanned_by_chirality: bool,
}

/// `vec(Z) ↦ vec(AZ + ZA)` in column-major vectorization.
fn anticommutator_operator(a: &CMat) -> CMat {
    let id = linalg::identity(a.nrows());
    kron(&a.transpose(), &id) + kron(&id, a)
}

/// Solves the linear systems showing that no odd endomorphism of `S` anticommutes
/// with Clifford multiplication.
pub fn no_perturbation_witness(rep: &CliffordRep) -> Result<WitnessReport> {
    no_perturbation_witness_twisted(rep, 1)
}

/// As [`no_perturbation_witness`] on `S ⊗ C^w` with action `c ⊗ 1`.
pub fn no_perturbation_witness_twisted(rep: &CliffordRep, dim_w: usize) -> Result<WitnessReport> {
    if rep.n % 2 != 0 {
        return Err(Error::InvalidArgument("witness requires even n".into()));
    }
    if dim_w == 0 {
        return Err(Error::InvalidArgument("dim_w must be at least 1".into()));
    }
    let idw = linalg::identity(dim_w);
    let gens: Vec<CMat> = rep.generators.iter().map(|g| kron(g, &idw)).collect();
    let gamma = kron(&rep.chirality, &idw);
    let d = gamma.nrows();
    let ops: Vec<CMat> = gens.iter().map(anticommutator_operator).collect();
    let stack = |extra: Option<&CMat>| {
        let blocks: Vec<&CMat> = ops.iter().chain(extra).collect();
        let mut m = linalg::zeros(blocks.len() * d * d, d * d);
        for (b, op) in blocks.iter().enumerate() {
            m.view_mut((b * d * d, 0), (d * d, d * d)).copy_from(op);
        }
        m
    };
    let grading_op = anticommutator_operator(&gamma);
    let graded = stack(Some(&grading_op));
    let ungraded = stack(None);
    let tol = 1e-10;
    let nullity_graded = linalg::nullity(&graded, tol);
    let solutions = linalg::null_space(&ungraded, tol)?;
    let spanned = (0..solutions.ncols()).all(|k| {
        let z = CMat::from_column_slice(d, d, solutions.column(k).as_slice());
        let gz = &gamma * z;
        gens.iter().all(|g| linalg::max_abs(&linalg::commutator(&gz, g)) < 1e-9)
    });
    Ok(WitnessReport {
        n: rep.n,
        dim: rep.dim,
        dim_w,
        nullity_graded,
        nullity_ungraded: solutions.ncols(),
        ungraded_spanned_by_chirality: spanned,
    })
}

/// Smallest singular value of `Σσ_j L_j` over `samples` deterministic points
/// of the unit sphere.
pub fn pencil_lower_bound(pencil: &[CMat], samples: usize) -> f64 {
    crate::sampling::sphere_points(pencil.len(), samples)
        .iter()
        .map(|s| linalg::smallest_singular_value(&linalg::combine(s, pencil)))
        .fold(f64::INFINITY, f64::min)
}

/// Exact determinant of `Σ x_j L_j` for small pencils (size ≤ 4).
pub fn pencil_determinant(pencil: &[CMat], x: &[f64]) -> Result<C64> {
    let m = linalg::combine(x, pencil);
    if m.nrows() > 4 {
        return Err(Error::InvalidArgument("exact determinant only for size ≤ 4".into()));
    }
    Ok(m.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_dimensional_reps() {
        let r1 = build_irreducible_rep(1).unwrap();
        assert_eq!(r1.dim, 1);
        assert_eq!(r1.generators[0][(0, 0)], I);
        assert_eq!(r1.chirality[(0, 0)], -ONE);

        let r2 = build_irreducible_rep(2).unwrap();
        assert_eq!(r2.dim, 2);
        let g = &r2.generators;
        assert!(linalg::max_abs(&linalg::anticommutator(&g[0], &g[1])) == 0.0);
        assert_eq!(r2.chirality, pauli_z());
    }

    #[test]
    fn invariants_hold_through_n_8() {
        for n in 1..=8 {
            let rep = build_irreducible_rep(n).unwrap();
            assert_eq!(rep.dim, 1 << (n / 2));
            let r = rep.invariants();
            assert!(r.max() <= 1e-12, "n={n}: {r:?}");
        }
    }

    #[test]
    fn even_chirality_is_sorted_diagonal() {
        for n in [2, 4, 6] {
            let rep = build_irreducible_rep(n).unwrap();
            let h = rep.half_dim();
            for i in 0..rep.dim {
                let expect = if i < h { ONE } else { -ONE };
                assert_eq!(rep.chirality[(i, i)], expect);
            }
        }
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(build_irreducible_rep(0).is_err());
    }

    #[test]
    fn even_module_ranks() {
        let rep = build_irreducible_rep(2).unwrap();
        let s = build_graded_module(&rep, TwistSpec::Even { w_plus: 1, w_minus: 0 }).unwrap();
        assert_eq!((s.rank_plus, s.rank_minus), (1, 1));
        assert_eq!(s.grading, rep.chirality);
        assert_eq!(s.action, rep.generators);

        let e = build_graded_module(&rep, TwistSpec::Even { w_plus: 1, w_minus: 1 }).unwrap();
        assert_eq!((e.rank_plus, e.rank_minus), (2, 2));
        assert!(e.invariants().max() < 1e-14);
    }

    #[test]
    fn odd_module_matches_tensor_form() {
        let rep = build_irreducible_rep(3).unwrap();
        let e = build_graded_module(&rep, TwistSpec::Odd { w_prime: 1 }).unwrap();
        assert_eq!(e.rank(), 4);
        assert!(e.invariants().max() < 1e-14);
        let flip = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        for (j, g) in rep.generators.iter().enumerate() {
            let natural = e.construction.as_ref().unwrap().basis.clone()
                * &e.action[j]
                * e.construction.as_ref().unwrap().basis.adjoint();
            assert!(linalg::max_abs(&(natural - kron(g, &flip))) < 1e-14);
        }
    }

    #[test]
    fn parity_mismatch_is_rejected() {
        let rep = build_irreducible_rep(3).unwrap();
        assert!(matches!(
            build_graded_module(&rep, TwistSpec::Even { w_plus: 1, w_minus: 1 }),
            Err(Error::ParityMismatch { .. })
        ));
    }

    #[test]
    fn admissible_ranks() {
        assert!(admissible_rank(3, 2));
        assert!(!admissible_rank(4, 3));
        assert!(admissible_rank(1, 1));
        assert!(!admissible_rank(5, 2));
        assert!(admissible_rank(5, 8));
    }

    #[test]
    fn small_pencils() {
        assert_eq!(build_invertible_pencil(1, 1).unwrap(), vec![linalg::identity(1)]);
        let p2 = build_invertible_pencil(2, 1).unwrap();
        assert_eq!(p2[0][(0, 0)], ONE);
        assert_eq!(p2[1][(0, 0)], I);
        let p3 = build_invertible_pencil(3, 1).unwrap();
        let x = [0.3, -1.2, 0.7];
        let det = pencil_determinant(&p3, &x).unwrap();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        assert!((det + norm2).norm() < 1e-14);
    }

    #[test]
    fn pencils_are_invertible_and_admissible() {
        for k in 1..=6 {
            for m in 1..=2 {
                let p = build_invertible_pencil(k, m).unwrap();
                let r = p[0].nrows();
                assert_eq!(r, m << ((k - 1) / 2));
                assert!(admissible_rank(k, r));
                assert!(pencil_lower_bound(&p, 1000) >= 1e-8, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn witness_small_cases() {
        for n in [2, 4] {
            let rep = build_irreducible_rep(n).unwrap();
            let w = no_perturbation_witness(&rep).unwrap();
            assert_eq!(w.nullity_graded, 0);
            assert_eq!(w.nullity_ungraded, 1);
            assert!(w.ungraded_spanned_by_chirality);
        }
        let rep = build_irreducible_rep(2).unwrap();
        let w = no_perturbation_witness_twisted(&rep, 2).unwrap();
        assert_eq!((w.nullity_graded, w.nullity_ungraded), (0, 4));
        assert!(w.ungraded_spanned_by_chirality);
        assert!(no_perturbation_witness(&build_irreducible_rep(3).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rep = build_irreducible_rep(3).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        let back: CliffordRep = serde_json::from_str(&text).unwrap();
        assert_eq!(back.generators, rep.generators);
        assert_eq!(back.dim, 2);
    }
}
