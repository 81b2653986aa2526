//! Seeded random instances: orthogonal and unitary matrices and proper
//! anticommuting perturbations for cross-checking the index computations.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::clifford::{build_invertible_pencil, build_irreducible_rep, TwistSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, I};
use crate::perturbation::{build_even, build_odd, LinearPerturbation};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed unitary matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| c(normal(rng), normal(rng)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Real `n×n` matrix `O₁·diag(s)·O₂` with singular values drawn from
/// `[lo, hi]`; the determinant sign is random.
pub fn random_well_conditioned<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<f64> {
    let o1 = random_orthogonal(n, rng);
    let o2 = random_orthogonal(n, rng);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(lo..=hi)));
    o1 * s * o2
}

/// Replaces `Z_j` by `Σ_k M_jk Z_k`; anticommutation with Clifford
/// multiplication and the scalar-square property survive.
pub fn mix(p: &LinearPerturbation, m: &DMatrix<f64>) -> Result<LinearPerturbation> {
    let zs = (0..p.n)
        .map(|j| {
            let w: Vec<f64> = m.row(j).iter().copied().collect();
            linalg::combine(&w, &p.zs)
        })
        .collect();
    LinearPerturbation::new(p.module.clone(), zs, p.basepoint.clone())
}

/// A random proper perturbation with `Z(x)²` scalar, for `n ∈ {1, 2}` and
/// module rank at most 8.
///
/// Even case: `φ_j⁺` are unitarily conjugated sums of the `k = 2` pencil with
/// random orientation per copy of `W`. Odd case: `φ = i·U·diag(±1)·U*`.
/// Coordinates are then mixed by a matrix with singular values in
/// `[1/√2, √2]`, so `Q` has condition number at most 4.
pub fn random_proper_instance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LinearPerturbation> {
    let rep = build_irreducible_rep(n)?;
    let p = match n {
        1 => {
            let w = rng.random_range(1..=4);
            let u = random_unitary(w, rng);
            let signs = nalgebra::DVector::from_fn(w, |_, _| {
                if rng.random_bool(0.5) {
                    c(1.0, 0.0)
                } else {
                    c(-1.0, 0.0)
                }
            });
            let phi = &u * CMat::from_diagonal(&signs) * u.adjoint() * I;
            build_odd(&rep, w, &[phi])?
        }
        2 => {
            let w = rng.random_range(1..=2);
            let base = build_invertible_pencil(2, 1)?;
            let mut phis = vec![linalg::zeros(w, w); 2];
            for copy in 0..w {
                let orient = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                phis[0][(copy, copy)] = base[0][(0, 0)];
                phis[1][(copy, copy)] = base[1][(0, 0)] * orient;
            }
            let (u1, u2) = (random_unitary(w, rng), random_unitary(w, rng));
            let phis: Vec<CMat> = phis.iter().map(|f| &u2 * f * &u1).collect();
            build_even(&rep, TwistSpec::Even { w_plus: w, w_minus: w }, &phis)?
        }
        _ => return Err(Error::InvalidArgument("random instances exist for n = 1, 2".into())),
    };
    let h = std::f64::consts::SQRT_2;
    mix(&p, &random_well_conditioned(n, 1.0 / h, h, rng))
}

/// A random proper odd-case perturbation in `n = 3` on `W′ = C²`:
/// `φ_j = i·ε_j·U·L_j·U*` with `L_j` the Hermitian pencil of size 2, random
/// signs `ε_j` and random coordinate mixing.
pub fn random_odd_instance<R: Rng + ?Sized>(rng: &mut R) -> Result<LinearPerturbation> {
    let rep = build_irreducible_rep(3)?;
    let u = random_unitary(2, rng);
    let phis: Vec<CMat> = build_invertible_pencil(3, 1)?
        .iter()
        .map(|l| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            &u * l * u.adjoint() * (I * sign)
        })
        .collect();
    let p = build_odd(&rep, 2, &phis)?;
    let h = std::f64::consts::SQRT_2;
    mix(&p, &random_well_conditioned(3, 1.0 / h, h, rng))
}

/// Singular points of `Z(x) = Σ_j sin(x_j)·Z_j` on the flat torus `Tⁿ`, built
/// from the linear coefficients `Z_j` of `p`.
///
/// The zeros are the `2ⁿ` points with every `x_j ∈ {0, π}`; at each one the
/// linearization is `Σ_j cos(x_j)·(x − x̄)_j·Z_j`. The local indices need not
/// vanish individually, but their sum is the index of a Dirac operator on
/// `Tⁿ`, which is zero in odd dimensions.
pub fn torus_configuration(p: &LinearPerturbation) -> Result<Vec<LinearPerturbation>> {
    (0..1usize << p.n)
        .map(|mask| {
            let flipped = (0..p.n).map(|j| mask >> j & 1 == 1);
            let zs =
                p.zs.iter()
                    .zip(flipped.clone())
                    .map(|(z, f)| if f { -z } else { z.clone() })
                    .collect();
            let basepoint = flipped.map(|f| if f { std::f64::consts::PI } else { 0.0 }).collect();
            LinearPerturbation::new(p.module.clone(), zs, basepoint)
        })
        .collect()
}
