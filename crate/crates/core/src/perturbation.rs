//! Linearized perturbations at a singular point: propriety checks, the even
//! and odd constructions, and the coordinate change to anticommuting form.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clifford::{build_graded_module, CliffordRep, GradedModule, TwistSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, CMat};
use crate::sampling::sphere_points;

/// Entrywise tolerance for Hermitian, skew-adjoint and anticommutation checks.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Smallest singular value a proper perturbation must exceed on the unit sphere.
pub const PROPER_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 1000;

/// `Z(x) = Σ (x − x̄)_j Z_j` on a graded module.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearPerturbation {
    pub n: usize,
    pub basepoint: Vec<f64>,
    pub module: GradedModule,
    #[serde(rename = "Zs", with = "linalg::matrix_json::list")]
    pub zs: Vec<CMat>,
}

impl LinearPerturbation {
    /// Validates shapes and that every `Z_j` is Hermitian and odd.
    pub fn new(module: GradedModule, zs: Vec<CMat>, basepoint: Vec<f64>) -> Result<Self> {
        let n = module.n;
        if zs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "number of Z_j",
                expected: n,
                found: zs.len(),
            });
        }
        if basepoint.len() != n {
            return Err(Error::DimensionMismatch {
                what: "basepoint length",
                expected: n,
                found: basepoint.len(),
            });
        }
        let rank = module.rank();
        for (index, z) in zs.iter().enumerate() {
            if z.shape() != (rank, rank) {
                return Err(Error::DimensionMismatch {
                    what: "Z_j size",
                    expected: rank,
                    found: z.nrows(),
                });
            }
            let residual =
                linalg::hermitian_residual(z).max(linalg::max_abs(&linalg::anticommutator(&module.grading, z)));
            if residual > STRUCTURE_TOL {
                return Err(Error::NotHermitianOdd { index, residual });
            }
        }
        Ok(Self {
            n,
            basepoint,
            module,
            zs,
        })
    }

    /// Re-runs the checks of [`LinearPerturbation::new`], e.g. after deserializing.
    pub fn validated(self) -> Result<Self> {
        let GradedModule {
            n,
            rank_plus,
            rank_minus,
            action,
            ..
        } = self.module;
        let module = GradedModule::from_parts(n, rank_plus, rank_minus, action)?;
        Self::new(module, self.zs, self.basepoint)
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    /// `Σ v_j Z_j`.
    pub fn z_at(&self, v: &[f64]) -> CMat {
        linalg::combine(v, &self.zs)
    }

    /// The Clifford matrices `c(∂_j)` at the base point.
    pub fn clifford(&self) -> &[CMat] {
        &self.module.action
    }
}

/// Anticommutation of `Z` with every Clifford generator of the module.
pub fn check_anticommutation(module: &GradedModule, z: &CMat) -> Result<bool> {
    let rank = module.rank();
    if z.shape() != (rank, rank) {
        return Err(Error::DimensionMismatch {
            what: "Z size",
            expected: rank,
            found: z.nrows(),
        });
    }
    Ok(module
        .action
        .iter()
        .all(|a| linalg::max_abs(&linalg::anticommutator(a, z)) <= STRUCTURE_TOL))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProperReport {
    pub is_proper: bool,
    /// Lower bound `c` in `‖Z(x)α‖ ≥ c|x − x̄|‖α‖`.
    pub c_lower: f64,
    /// True when `c_lower` came from the quadratic form rather than sampling.
    pub c_lower_exact: bool,
    pub anticommutes: bool,
    pub rank_ok: bool,
}

impl ProperReport {
    /// Names the first failing condition.
    pub fn failure(&self) -> Option<String> {
        if self.is_proper {
            None
        } else if self.c_lower <= PROPER_TOL {
            Some(format!("Z(x) is not bounded below (c_lower = {:.3e})", self.c_lower))
        } else if !self.anticommutes {
            Some("Z does not anticommute with Clifford multiplication".into())
        } else {
            Some("module rank violates the constraint for singular points".into())
        }
    }
}

/// Evaluates the conditions for `x̄` to be a proper singular point.
pub fn check_proper(p: &LinearPerturbation, samples: usize) -> ProperReport {
    let anticommutes =
        p.zs.iter()
            .all(|z| check_anticommutation(&p.module, z).unwrap_or(false));
    let rank_ok = check_rank_constraints(p, true);
    // With Z(σ)² = q(σ)·1 the bound is exact: c = √λ_min(Q).
    let (c_lower, c_lower_exact) = match quadratic_form(&p.zs) {
        Ok(q) => {
            let (vals, _) = linalg::sym_eigen_real(&q);
            (vals[0].max(0.0).sqrt(), true)
        }
        Err(_) => (sampled_lower_bound(&p.zs, samples.max(1)), false),
    };
    ProperReport {
        is_proper: c_lower > PROPER_TOL && anticommutes && rank_ok,
        c_lower,
        c_lower_exact,
        anticommutes,
        rank_ok,
    }
}

/// `min σ_min(Σ σ_j Z_j)` over deterministic sphere samples, plus the
/// coordinate axes and the diagonals `(e_j ± e_k)/√2`.
pub fn sampled_lower_bound(zs: &[CMat], samples: usize) -> f64 {
    let n = zs.len();
    let mut points = sphere_points(n, samples);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        points.push(e);
        for k in j + 1..n {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[j] = h;
                d[k] = sign * h;
                points.push(d);
            }
        }
    }
    points
        .iter()
        .map(|s| linalg::smallest_singular_value(&linalg::combine(s, zs)))
        .fold(f64::INFINITY, f64::min)
}

/// Rank constraint on `E` for a module carrying a proper perturbation.
pub fn rank_constraint_holds(n: usize, rank: usize, has_singular_points: bool) -> bool {
    if rank == 0 {
        return false;
    }
    let base = if n % 2 == 0 { n / 2 + 1 } else { n.div_ceil(2) };
    let exponent = if has_singular_points { base.max(n) } else { base };
    rank % (1usize << exponent) == 0
}

pub fn check_rank_constraints(p: &LinearPerturbation, has_singular_points: bool) -> bool {
    rank_constraint_holds(p.n, p.rank(), has_singular_points)
}

/// `Z_j = γ ⊗ φ_j` with `φ_j = (0, φ_j⁺*; φ_j⁺, 0)` on `W⁺ ⊕ W⁻`.
///
/// Each `φ_j⁺` maps `W⁺ → W⁻`, so it has `w_minus` rows and `w_plus` columns.
pub fn build_even(rep: &CliffordRep, twist: TwistSpec, phis: &[CMat]) -> Result<LinearPerturbation> {
    let TwistSpec::Even { w_plus, w_minus } = twist else {
        return Err(Error::ParityMismatch { n: rep.n, twist: "odd" });
    };
    if rep.n % 2 != 0 {
        return Err(Error::ParityMismatch {
            n: rep.n,
            twist: "even",
        });
    }
    if w_plus != w_minus {
        return Err(Error::UnequalTwist {
            plus: w_plus,
            minus: w_minus,
        });
    }
    check_count(rep.n, phis.len())?;
    let module = build_graded_module(rep, twist)?;
    let w = w_plus + w_minus;
    let zs = phis
        .iter()
        .map(|phi| {
            if phi.shape() != (w_minus, w_plus) {
                return Err(Error::DimensionMismatch {
                    what: "phi_j shape",
                    expected: w_plus,
                    found: phi.ncols(),
                });
            }
            let mut full = linalg::zeros(w, w);
            full.view_mut((w_plus, 0), (w_minus, w_plus)).copy_from(phi);
            full.view_mut((0, w_plus), (w_plus, w_minus)).copy_from(&phi.adjoint());
            module.from_natural(&kron(&rep.chirality, &full))
        })
        .collect::<Result<Vec<_>>>()?;
    LinearPerturbation::new(module, zs, vec![0.0; rep.n])
}

/// `Z_j = 1 ⊗ (0, φ_j; −φ_j, 0)` on `S ⊗ (W′ ⊕ W′)` for skew-adjoint `φ_j`.
pub fn build_odd(rep: &CliffordRep, w_prime: usize, phis: &[CMat]) -> Result<LinearPerturbation> {
    if rep.n % 2 == 0 {
        return Err(Error::ParityMismatch { n: rep.n, twist: "odd" });
    }
    check_count(rep.n, phis.len())?;
    let module = build_graded_module(rep, TwistSpec::Odd { w_prime })?;
    let ids = linalg::identity(rep.dim);
    let zs = phis
        .iter()
        .enumerate()
        .map(|(index, phi)| {
            if phi.shape() != (w_prime, w_prime) {
                return Err(Error::DimensionMismatch {
                    what: "phi_j size",
                    expected: w_prime,
                    found: phi.nrows(),
                });
            }
            if !linalg::is_skew_hermitian(phi, STRUCTURE_TOL) {
                return Err(Error::NotSkewAdjoint {
                    index,
                    residual: linalg::max_abs(&(phi + phi.adjoint())),
                });
            }
            let mut j = linalg::zeros(2 * w_prime, 2 * w_prime);
            j.view_mut((0, w_prime), (w_prime, w_prime)).copy_from(phi);
            j.view_mut((w_prime, 0), (w_prime, w_prime)).copy_from(&(-phi));
            module.from_natural(&kron(&ids, &j))
        })
        .collect::<Result<Vec<_>>>()?;
    LinearPerturbation::new(module, zs, vec![0.0; rep.n])
}

fn check_count(n: usize, found: usize) -> Result<()> {
    if found != n {
        return Err(Error::DimensionMismatch {
            what: "number of maps",
            expected: n,
            found,
        });
    }
    Ok(())
}

/// Coordinates `y = √D·U·(x − x̄)` in which `Z̃_jZ̃_k + Z̃_kZ̃_j = 2δ_jk`.
///
/// The Clifford frame is rotated along with the coordinates: `c̃ = U·c`.
/// Without this rotation the operators `c̃_jZ̃_j` would not commute for
/// non-diagonal `Q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordinateNormalization {
    pub q: DMatrix<f64>,
    pub u: DMatrix<f64>,
    /// Diagonal of `D`, ascending.
    pub dg: Vec<f64>,
    pub basepoint: Vec<f64>,
    #[serde(rename = "Zt", with = "linalg::matrix_json::list")]
    pub zt: Vec<CMat>,
    /// Clifford matrices in the rotated frame.
    #[serde(with = "linalg::matrix_json::list")]
    pub frame: Vec<CMat>,
}

impl CoordinateNormalization {
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                let s: f64 = (0..n).map(|k| self.u[(j, k)] * (x[k] - self.basepoint[k])).sum();
                self.dg[j].sqrt() * s
            })
            .collect()
    }

    /// max |Z̃_jZ̃_k + Z̃_kZ̃_j − 2δ_jk|.
    pub fn residual(&self) -> f64 {
        anticommutation_residual(&self.zt)
    }
}

/// max |Z_jZ_k + Z_kZ_j − 2δ_jk|.
pub fn anticommutation_residual(zs: &[CMat]) -> f64 {
    let rank = zs.first().map_or(0, |z| z.nrows());
    let id = linalg::identity(rank);
    let mut worst = 0.0_f64;
    for j in 0..zs.len() {
        for k in j..zs.len() {
            let mut r = linalg::anticommutator(&zs[j], &zs[k]);
            if j == k {
                r -= &id * c(2.0, 0.0);
            }
            worst = worst.max(linalg::max_abs(&r));
        }
    }
    worst
}

/// Symmetric matrix `Q` with `Z_jZ_k + Z_kZ_j = 2Q_jk·1`, or an error if the
/// anticommutators are not scalar.
pub fn quadratic_form(zs: &[CMat]) -> Result<DMatrix<f64>> {
    let n = zs.len();
    let rank = zs[0].nrows() as f64;
    let mut q = DMatrix::zeros(n, n);
    let mut residual = 0.0_f64;
    let mut scale = 1.0_f64;
    for j in 0..n {
        for k in j..n {
            let a = linalg::anticommutator(&zs[j], &zs[k]);
            let v = a.trace().re / (2.0 * rank);
            let dev = &a - linalg::identity(a.nrows()) * c(2.0 * v, 0.0);
            residual = residual.max(linalg::max_abs(&dev));
            scale = scale.max(v.abs());
            q[(j, k)] = v;
            q[(k, j)] = v;
        }
    }
    if residual > STRUCTURE_TOL * scale {
        return Err(Error::NonScalarSquare { residual });
    }
    Ok(q)
}

pub fn normalize(p: &LinearPerturbation) -> Result<CoordinateNormalization> {
    normalize_parts(&p.zs, p.clifford(), &p.basepoint)
}

/// [`normalize`] on raw coefficient and frame matrices.
pub fn normalize_parts(zs: &[CMat], frame: &[CMat], basepoint: &[f64]) -> Result<CoordinateNormalization> {
    let n = zs.len();
    let q = quadratic_form(zs)?;
    let off_diagonal = (0..n)
        .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
        .fold(0.0_f64, |m, (j, k)| m.max(q[(j, k)].abs()));
    let (dg, u) = if off_diagonal == 0.0 {
        ((0..n).map(|j| q[(j, j)]).collect::<Vec<_>>(), DMatrix::identity(n, n))
    } else {
        let (vals, vecs) = linalg::sym_eigen_real(&q);
        (vals, vecs.transpose())
    };
    let min = dg.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > STRUCTURE_TOL) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let mix = |mats: &[CMat], row_scale: &dyn Fn(usize) -> f64| -> Vec<CMat> {
        (0..n)
            .map(|j| {
                let w: Vec<f64> = (0..n).map(|k| row_scale(j) * u[(j, k)]).collect();
                linalg::combine(&w, mats)
            })
            .collect()
    };
    let zt = mix(zs, &|j| 1.0 / dg[j].sqrt());
    let rotated = mix(frame, &|_| 1.0);
    let out = CoordinateNormalization {
        q,
        u,
        dg,
        basepoint: basepoint.to_vec(),
        zt,
        frame: rotated,
    };
    let r = out.residual();
    if r > STRUCTURE_TOL {
        return Err(Error::Numerical(format!(
            "normalized family misses anticommutation by {r:.3e}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_invertible_pencil, build_irreducible_rep};
    use crate::linalg::{I, ONE};

    fn even_pencil_perturbation(n: usize, m: usize) -> LinearPerturbation {
        let rep = build_irreducible_rep(n).unwrap();
        let phis = build_invertible_pencil(n, m).unwrap();
        let w = phis[0].nrows();
        build_even(&rep, TwistSpec::Even { w_plus: w, w_minus: w }, &phis).unwrap()
    }

    #[test]
    fn even_construction_anticommutes_and_is_proper() {
        let p = even_pencil_perturbation(2, 1);
        assert_eq!(p.rank(), 4);
        for z in &p.zs {
            assert!(check_anticommutation(&p.module, z).unwrap());
        }
        let r = check_proper(&p, 200);
        assert!(r.is_proper, "{r:?}");
        assert!(r.c_lower_exact);
        assert!((r.c_lower - 1.0).abs() < 1e-12);

        let p4 = even_pencil_perturbation(4, 1);
        assert_eq!(p4.rank(), 16);
        assert!(check_proper(&p4, 200).is_proper);
    }

    #[test]
    fn anticommutation_negative_cases() {
        let p = even_pencil_perturbation(2, 1);
        assert!(!check_anticommutation(&p.module, &p.module.action[0]).unwrap());
        assert!(!check_anticommutation(&p.module, &linalg::identity(4)).unwrap());
        assert!(check_anticommutation(&p.module, &linalg::identity(3)).is_err());
    }

    #[test]
    fn equal_phis_are_not_proper() {
        let rep = build_irreducible_rep(2).unwrap();
        let id = linalg::identity(1);
        let p = build_even(&rep, TwistSpec::Even { w_plus: 1, w_minus: 1 }, &[id.clone(), id]).unwrap();
        let r = check_proper(&p, 1000);
        assert!(!r.is_proper);
        assert!(r.c_lower < 1e-8);
    }

    #[test]
    fn vanishing_second_coefficient_is_not_proper() {
        let mut p = even_pencil_perturbation(2, 1);
        p.zs[1] = linalg::zeros(4, 4);
        let r = check_proper(&p, 1000);
        assert!(!r.is_proper);
        assert!(r.failure().unwrap().contains("bounded below"));
    }

    #[test]
    fn unequal_twist_is_rejected() {
        let rep = build_irreducible_rep(2).unwrap();
        let phi = linalg::zeros(1, 2);
        assert!(matches!(
            build_even(&rep, TwistSpec::Even { w_plus: 2, w_minus: 1 }, &[phi.clone(), phi]),
            Err(Error::UnequalTwist { .. })
        ));
    }

    #[test]
    fn odd_constructions() {
        let rep = build_irreducible_rep(3).unwrap();
        // W' = C^2 with φ_j = i·σ_j: proper, rank 8.
        let phis: Vec<CMat> = build_invertible_pencil(3, 1)
            .unwrap()
            .into_iter()
            .map(|s| s * I)
            .collect();
        let p = build_odd(&rep, 2, &phis).unwrap();
        assert_eq!(p.rank(), 8);
        assert!(check_proper(&p, 500).is_proper);

        // W' = C^1 with scalar φ_j: singular along a whole line.
        let scalars: Vec<CMat> = [1.0, 2.0, -0.5]
            .iter()
            .map(|a| CMat::from_element(1, 1, I * *a))
            .collect();
        let q = build_odd(&rep, 1, &scalars).unwrap();
        assert_eq!(q.rank(), 4);
        let r = check_proper(&q, 1000);
        assert!(!r.is_proper && !r.rank_ok);

        let bad = vec![linalg::identity(1); 3];
        assert!(matches!(build_odd(&rep, 1, &bad), Err(Error::NotSkewAdjoint { .. })));
    }

    #[test]
    fn constant_odd_perturbation_is_invertible() {
        let rep = build_irreducible_rep(3).unwrap();
        let module = build_graded_module(&rep, TwistSpec::Odd { w_prime: 1 }).unwrap();
        let mut j = linalg::zeros(2, 2);
        j[(0, 1)] = I;
        j[(1, 0)] = -I;
        let z = module.from_natural(&kron(&linalg::identity(2), &j)).unwrap();
        assert!(check_anticommutation(&module, &z).unwrap());
        assert!(linalg::smallest_singular_value(&z) > 0.99);
        assert!(rank_constraint_holds(3, 4, false));
    }

    #[test]
    fn rank_rules() {
        assert!(rank_constraint_holds(2, 4, true));
        assert!(!rank_constraint_holds(2, 6, true));
        assert!(rank_constraint_holds(3, 4, false));
        assert!(!rank_constraint_holds(3, 4, true));
        assert!(rank_constraint_holds(4, 8, false));
        assert!(!rank_constraint_holds(4, 8, true));
    }

    #[test]
    fn rank_six_module_fails_constraint() {
        let rep = build_irreducible_rep(2).unwrap();
        let module = build_graded_module(&rep, TwistSpec::Even { w_plus: 2, w_minus: 1 }).unwrap();
        let p = LinearPerturbation::new(module, vec![linalg::zeros(6, 6); 2], vec![0.0; 2]).unwrap();
        assert!(!check_rank_constraints(&p, true));
    }

    #[test]
    fn normalize_identity_and_scaling() {
        let p = even_pencil_perturbation(2, 1);
        let nrm = normalize(&p).unwrap();
        assert_eq!(nrm.u, DMatrix::identity(2, 2));
        assert_eq!(nrm.dg, vec![1.0, 1.0]);
        assert_eq!(nrm.transform(&[0.3, -0.4]), vec![0.3, -0.4]);

        let mut scaled = p.clone();
        scaled.zs.iter_mut().for_each(|z| *z *= c(2.0, 0.0));
        let nrm = normalize(&scaled).unwrap();
        assert_eq!(nrm.dg, vec![4.0, 4.0]);
        assert_eq!(nrm.transform(&[0.3, -0.4]), vec![0.6, -0.8]);
        assert!(nrm.residual() < 1e-12);
    }

    #[test]
    fn normalize_rejects_non_scalar_square() {
        let rep = build_irreducible_rep(2).unwrap();
        let phis = vec![
            CMat::from_row_slice(2, 2, &[ONE, linalg::ZERO, linalg::ZERO, c(2.0, 0.0)]),
            CMat::from_row_slice(2, 2, &[I, linalg::ZERO, linalg::ZERO, -I]),
        ];
        let p = build_even(&rep, TwistSpec::Even { w_plus: 2, w_minus: 2 }, &phis).unwrap();
        assert!(matches!(normalize(&p), Err(Error::NonScalarSquare { .. })));
        let r = check_proper(&p, 500);
        assert!(!r.c_lower_exact);
    }

    #[test]
    fn json_round_trip_preserves_perturbation() {
        let p = even_pencil_perturbation(2, 1);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"Zs\""));
        let back: LinearPerturbation = serde_json::from_str(&text).unwrap();
        let back = back.validated().unwrap();
        assert_eq!(back.zs, p.zs);
        assert_eq!(back.module.action, p.module.action);
    }
}
