//! Global Witten-deformed operators on the circle and the flat 2-torus.
//!
//! Everything is discretized in Fourier modes `e^{ik·θ}`, `|k_j| ≤ N`. On
//! that basis derivatives are diagonal and multiplication by a trigonometric
//! polynomial is a banded convolution, so the matrices are exact up to the
//! mode cutoff. Squared operators are formed as Gram matrices `D*D` of the
//! first-order map with its output modes padded by the degree of the
//! coefficients, which is the Galerkin compression of `D*D` rather than the
//! product of two truncations.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64, ZERO};
use crate::local_index::gap_threshold;
use crate::sparse::{lowest_eigenvalues, EigenOptions, SparseHermitian};

/// Eigenvalues below this are treated as numerically zero by the gap rule.
pub const KERNEL_FLOOR: f64 = 1e-8;
/// Low eigenvalues kept per grading in a [`SpectrumResult`].
pub const RETAINED: usize = 16;
/// Decay exponent of the localization window `c₁·s^{−1/5}`.
pub const WINDOW_EXPONENT: f64 = -0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Circle,
    Torus2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `i d/dθ + s·sin θ` on functions.
    Counterexample,
    /// `d + d* + s(df∧ + ∇f⌟)` on `Ω⁰ ⊕ Ω¹` of the circle.
    MorseDeRham,
    /// `d + d* + s(V^♭∧ + V⌟)` on `Ω•` of the torus.
    VectorFieldDeRham,
}

/// Which operator the eigenvalues of a [`SpectrumResult`] belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralOperator {
    /// The first-order operator `D_s` itself (ungraded).
    Dirac,
    /// `H_s = s⁻¹D_s²` split by grading (`D_0²` at `s = 0`).
    Laplacian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralGrading {
    Plus,
    Minus,
    Ungraded,
}

impl SpectralGrading {
    pub fn label(self) -> &'static str {
        match self {
            SpectralGrading::Plus => "plus",
            SpectralGrading::Minus => "minus",
            SpectralGrading::Ungraded => "none",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub grading: SpectralGrading,
    /// Model eigenvalue this one was matched to by [`cluster_report`].
    pub cluster_mu: Option<f64>,
}

/// Kernel counts of `H_s⁺` and `H_s⁻` under the gap rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedCounts {
    pub dim_ker_plus: usize,
    pub dim_ker_minus: usize,
    pub threshold: f64,
    pub gap_ratio: f64,
}

impl GradedCounts {
    pub fn index(&self) -> i64 {
        self.dim_ker_plus as i64 - self.dim_ker_minus as i64
    }
}

/// One model eigenvalue `μ_j` with multiplicity `p_j` in a given grading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCluster {
    pub mu: f64,
    pub grading: SpectralGrading,
    pub multiplicity: usize,
}

/// Global operator description; see [`GlobalOperatorSpec::compute`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalOperatorSpec {
    pub manifold: Manifold,
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse: Option<MorseFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<TorusField>,
    pub s: f64,
    /// Fourier mode cutoff `N`.
    pub modes: usize,
}

impl GlobalOperatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes < 4 {
            return Err(Error::InvalidArgument(format!("mode cutoff {} < 4", self.modes)));
        }
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "deformation parameter {} is not ≥ 0",
                self.s
            )));
        }
        let ok = matches!(
            (self.manifold, self.kind),
            (Manifold::Circle, OperatorKind::Counterexample)
                | (Manifold::Circle, OperatorKind::MorseDeRham)
                | (Manifold::Torus2, OperatorKind::VectorFieldDeRham)
        );
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "{:?} is not available on {:?}",
                self.kind, self.manifold
            )));
        }
        Ok(())
    }

    pub fn compute(&self) -> Result<SpectrumResult> {
        self.validate()?;
        match self.kind {
            OperatorKind::Counterexample => circle_counterexample(self.s, self.modes),
            OperatorKind::MorseDeRham => {
                let f = self.morse.clone().unwrap_or_else(MorseFunction::cos_theta);
                circle_morse_witten(self.s, self.modes, &f)
            }
            OperatorKind::VectorFieldDeRham => {
                let v = self.field.clone().unwrap_or_else(TorusField::standard);
                Ok(torus_de_rham_index(&v, self.s, self.modes)?.spectrum)
            }
        }
    }
}

/// Spectrum of one global operator at one value of `s`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub s: f64,
    pub modes: usize,
    pub kind: OperatorKind,
    pub operator: SpectralOperator,
    /// Sorted by grading, then value.
    pub eigenvalues: Vec<Eigenvalue>,
    pub graded_counts: Option<GradedCounts>,
    /// Model clusters predicted by the local data, if any.
    pub model: Vec<ModelCluster>,
    /// Comparison radius `c₁·s^{−1/5}` set by [`cluster_report`].
    pub window: Option<f64>,
    /// Counterexample only: half-width `k` of the central window checked
    /// against the integers, its largest deviation, and the eigenvector
    /// magnitude flatness over that window.
    pub central_k: Option<usize>,
    pub integer_deviation: Option<f64>,
    pub flatness: Option<f64>,
}

impl SpectrumResult {
    fn new(s: f64, modes: usize, kind: OperatorKind, operator: SpectralOperator) -> Self {
        Self {
            s,
            modes,
            kind,
            operator,
            eigenvalues: Vec::new(),
            graded_counts: None,
            model: Vec::new(),
            window: None,
            central_k: None,
            integer_deviation: None,
            flatness: None,
        }
    }

    fn push_graded(&mut self, grading: SpectralGrading, values: &[f64]) {
        self.eigenvalues.extend(values.iter().map(|&value| Eigenvalue {
            value,
            grading,
            cluster_mu: None,
        }));
    }

    pub fn values(&self, grading: SpectralGrading) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .filter(|e| e.grading == grading)
            .map(|e| e.value)
            .collect()
    }

    /// Eigenvalues of `H_s = s⁻¹D_s²` with their grading. For the ungraded
    /// counterexample these are `λ²/s`.
    pub fn laplacian_values(&self) -> Vec<(SpectralGrading, f64)> {
        let mut out: Vec<(SpectralGrading, f64)> = match self.operator {
            SpectralOperator::Laplacian => self.eigenvalues.iter().map(|e| (e.grading, e.value)).collect(),
            SpectralOperator::Dirac => {
                let scale = if self.s > 0.0 { 1.0 / self.s } else { 1.0 };
                self.eigenvalues
                    .iter()
                    .map(|e| (e.grading, e.value * e.value * scale))
                    .collect()
            }
        };
        out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out
    }

    /// The central `2k + 1` eigenvalues (sorted) of an ungraded spectrum.
    pub fn central(&self, k: usize) -> Option<Vec<f64>> {
        let v: Vec<f64> = self.values(SpectralGrading::Ungraded);
        let mid = v
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)?;
        if mid < k || mid + k >= v.len() {
            return None;
        }
        Some(v[mid - k..=mid + k].to_vec())
    }
}

// ---------------------------------------------------------------------------
// Fourier coefficient helpers

type Coeffs1 = BTreeMap<i64, C64>;
type Coeffs2 = BTreeMap<(i64, i64), C64>;

/// Exponential coefficients of `a·cos(mθ) + b·sin(mθ)`.
fn trig_pair(a: f64, b: f64) -> [C64; 2] {
    [c(a / 2.0, -b / 2.0), c(a / 2.0, b / 2.0)]
}

/// Mode index for `|k| ≤ n`.
fn mode(k: i64, n: usize) -> usize {
    (k + n as i64) as usize
}

/// Sorted eigenvalues of a Hermitian matrix assembled sparsely, up to `count`.
fn lowest_dense(m: &SparseHermitian, count: usize) -> Result<Vec<f64>> {
    let mut v = linalg::eigvalsh(&m.to_dense())?;
    v.truncate(count);
    Ok(v)
}

fn graded_counts(plus: &[f64], minus: &[f64]) -> Result<GradedCounts> {
    let mut merged: Vec<f64> = plus.iter().chain(minus).copied().collect();
    merged.sort_by(f64::total_cmp);
    let (threshold, gap_ratio) = gap_threshold(&merged, KERNEL_FLOOR)?;
    let below = |v: &[f64]| v.iter().filter(|e| **e < threshold).count();
    Ok(GradedCounts {
        dim_ker_plus: below(plus),
        dim_ker_minus: below(minus),
        threshold,
        gap_ratio,
    })
}

// ---------------------------------------------------------------------------
// Circle: the no-localization counterexample

/// `D_s = i d/dθ + s·sin θ` on `2N + 1` Fourier modes.
///
/// Conjugation by `e^{−s cos θ}` turns `D_s` into `i d/dθ`, so the spectrum
/// is the integers for every `s` and the eigenfunctions have constant
/// modulus: nothing localizes. The eigenfunction for `n` has Fourier
/// coefficients `J_{m+n}(s)`-like, centred at mode `−n` with spread about
/// `s`, so the central `2k + 1` eigenvalues with
/// `k = N − ⌈2s⌉ − COUNTEREXAMPLE_MARGIN` (clipped at 0) are free of
/// truncation effects and are compared with `−k..k`.
pub fn circle_counterexample(s: f64, modes: usize) -> Result<SpectrumResult> {
    check_circle_args(s, modes)?;
    let n = modes;
    let dim = 2 * n + 1;
    let mut m = CMat::zeros(dim, dim);
    for k in -(n as i64)..=n as i64 {
        let i = mode(k, n);
        m[(i, i)] = c(-(k as f64), 0.0);
        // s·sin θ = (s/2i)(e^{iθ} − e^{−iθ}) shifts mode k to k ± 1.
        if k < n as i64 {
            m[(i + 1, i)] = c(0.0, -s / 2.0);
            m[(i, i + 1)] = c(0.0, s / 2.0);
        }
    }
    let (vals, vecs) = linalg::eigh(&m)?;

    let mut out = SpectrumResult::new(s, modes, OperatorKind::Counterexample, SpectralOperator::Dirac);
    out.push_graded(SpectralGrading::Ungraded, &vals);
    let k = n.saturating_sub((2.0 * s).ceil() as usize + COUNTEREXAMPLE_MARGIN);
    let mid = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let k = k.min(mid).min(dim - 1 - mid);
    let window = mid - k..=mid + k;
    let deviation = vals[window.clone()]
        .iter()
        .map(|v| (v - v.round()).abs())
        .fold(0.0, f64::max);
    let grid = 4 * dim;
    let mut flatness = 0.0_f64;
    for col in window {
        let v = vecs.column(col);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for g in 0..grid {
            let theta = TAU * g as f64 / grid as f64;
            // Horner in z = e^{iθ}; the overall phase e^{−iNθ} drops out of |f|.
            let z = C64::from_polar(1.0, theta);
            let f = (0..dim).rev().fold(ZERO, |acc, i| acc * z + v[i]);
            let a = f.norm() / TAU.sqrt();
            lo = lo.min(a);
            hi = hi.max(a);
        }
        flatness = flatness.max(hi - lo);
    }
    out.central_k = Some(k);
    out.integer_deviation = Some(deviation);
    out.flatness = Some(flatness);
    Ok(out)
}

/// Extra modes kept clear of the truncation edge for the Bessel tails.
pub const COUNTEREXAMPLE_MARGIN: usize = 24;

fn check_circle_args(s: f64, modes: usize) -> Result<()> {
    if modes < 4 {
        return Err(Error::InvalidArgument(format!("mode cutoff {modes} < 4")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("deformation parameter {s} is not ≥ 0")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Circle: Morse function

/// `f(θ) = Σ_m cos[m−1]·cos(mθ) + sin[m−1]·sin(mθ)` for `m ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseFunction {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

/// A nondegenerate critical point with `f″` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub theta: f64,
    pub hessian: f64,
}

impl MorseFunction {
    pub fn cos_theta() -> Self {
        Self {
            cos: vec![1.0],
            sin: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.degree()).map(|i| {
            let a = self.cos.get(i).copied().unwrap_or(0.0);
            let b = self.sin.get(i).copied().unwrap_or(0.0);
            ((i + 1) as f64, a, b)
        })
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.terms()
            .map(|(m, a, b)| a * (m * theta).cos() + b * (m * theta).sin())
            .sum()
    }

    pub fn d1(&self, theta: f64) -> f64 {
        self.terms()
            .map(|(m, a, b)| m * (-a * (m * theta).sin() + b * (m * theta).cos()))
            .sum()
    }

    pub fn d2(&self, theta: f64) -> f64 {
        self.terms()
            .map(|(m, a, b)| -m * m * (a * (m * theta).cos() + b * (m * theta).sin()))
            .sum()
    }

    /// Exponential coefficients of `f′` (`r = 1`) or `f″` (`r = 2`).
    fn derivative_coeffs(&self, r: u32) -> Coeffs1 {
        let mut out = Coeffs1::new();
        for (m, a, b) in self.terms() {
            let [cp, cm] = trig_pair(a, b);
            let k = m as i64;
            out.insert(k, cp * C64::new(0.0, m).powu(r));
            out.insert(-k, cm * C64::new(0.0, -m).powu(r));
        }
        out
    }

    /// All critical points, found by Newton's method from a fine grid.
    /// A degenerate critical point is an error.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        if self.degree() == 0 {
            return Err(Error::InvalidArgument("f is constant".into()));
        }
        let samples = 64 * self.degree();
        let mut found: Vec<CriticalPoint> = Vec::new();
        for g in 0..samples {
            let mut t = TAU * (g as f64 + 0.5) / samples as f64;
            for _ in 0..100 {
                let h = self.d2(t);
                if h == 0.0 {
                    break;
                }
                let step = self.d1(t) / h;
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            if self.d1(t).abs() > 1e-11 {
                continue;
            }
            let t = t.rem_euclid(TAU);
            let h = self.d2(t);
            if h.abs() < 1e-8 {
                return Err(Error::DegenerateLinearization { det: h });
            }
            if !found.iter().any(|p| angle_distance(p.theta, t) < 1e-7) {
                found.push(CriticalPoint { theta: t, hessian: h });
            }
        }
        found.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        Ok(found)
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Model eigenvalues at the critical points, up to `levels` oscillator levels.
///
/// Near a critical point with `f″ = h`, `H_s^±` is modelled by the
/// oscillator `−∂² + h²x² ∓ h`, with eigenvalues `|h|(2j + 1) ∓ h`.
pub fn morse_model(critical: &[CriticalPoint], levels: usize) -> Vec<ModelCluster> {
    let mut out = Vec::new();
    for (grading, sign) in [(SpectralGrading::Plus, -1.0), (SpectralGrading::Minus, 1.0)] {
        let mut mus: Vec<f64> = Vec::new();
        for p in critical {
            let h = p.hessian;
            for j in 0..levels {
                mus.push(h.abs() * (2 * j + 1) as f64 + sign * h);
            }
        }
        mus.sort_by(f64::total_cmp);
        let top = mus.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        // Keep levels that every critical point fully resolves.
        let cap = critical
            .iter()
            .map(|p| p.hessian.abs() * (2 * levels - 1) as f64 - p.hessian.abs())
            .fold(f64::INFINITY, f64::min)
            .max(top);
        let mut clusters: Vec<ModelCluster> = Vec::new();
        for mu in mus.into_iter().filter(|m| *m <= cap + 1e-12) {
            match clusters.last_mut() {
                Some(last) if (last.mu - mu).abs() < 1e-9 => last.multiplicity += 1,
                _ => clusters.push(ModelCluster {
                    mu,
                    grading,
                    multiplicity: 1,
                }),
            }
        }
        out.extend(clusters);
    }
    out
}

/// Model levels used by [`circle_morse_witten`].
pub const MORSE_LEVELS: usize = 3;

/// `H_s = s⁻¹D_s²` for `D_s = d + d* + s(df∧ + ∇f⌟)` on `Ω⁰ ⊕ Ω¹(S¹)`.
///
/// With `u = u₀ + u₁dθ`, `D_s⁺u₀ = u₀′ + s f′u₀` and `D_s⁻u₁ = −u₁′ + s f′u₁`,
/// so `H_s⁺ = s⁻¹(−∂² + s²f′² − s f″)`. The kernel of `D_s⁺` is spanned by
/// `e^{−sf}` and that of `D_s⁻` by `e^{sf}`, giving index `0 = χ(S¹)`.
pub fn circle_morse_witten(s: f64, modes: usize, f: &MorseFunction) -> Result<SpectrumResult> {
    check_circle_args(s, modes)?;
    let critical = f.critical_points()?;
    let n = modes as i64;
    let d = f.degree() as i64;
    let g = f.derivative_coeffs(1);
    let dim = 2 * modes + 1;
    let first_order = |sign: f64| -> Vec<Vec<(usize, C64)>> {
        (-(n + d)..=n + d)
            .map(|p| {
                let mut row = Vec::new();
                for q in (p - d).max(-n)..=(p + d).min(n) {
                    let mut v = g.get(&(p - q)).copied().unwrap_or(ZERO) * s;
                    if p == q {
                        v += c(0.0, sign * q as f64);
                    }
                    if v != ZERO {
                        row.push((mode(q, modes), v));
                    }
                }
                row
            })
            .collect()
    };
    let scale = if s > 0.0 { 1.0 / s } else { 1.0 };
    let mut h_plus = SparseHermitian::gram(dim, &first_order(1.0));
    let mut h_minus = SparseHermitian::gram(dim, &first_order(-1.0));
    h_plus.scale(scale);
    h_minus.scale(scale);
    let plus = lowest_dense(&h_plus, RETAINED)?;
    let minus = lowest_dense(&h_minus, RETAINED)?;

    let mut out = SpectrumResult::new(s, modes, OperatorKind::MorseDeRham, SpectralOperator::Laplacian);
    out.graded_counts = Some(graded_counts(&plus, &minus)?);
    out.push_graded(SpectralGrading::Plus, &plus);
    out.push_graded(SpectralGrading::Minus, &minus);
    out.model = morse_model(&critical, MORSE_LEVELS);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Torus: vector field deformation of the de Rham operator

/// `a·cos(k·θ) + b·sin(k·θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: [i64; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// A real trigonometric-polynomial vector field `V = (V₁, V₂)` on `T²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusField {
    pub v1: Vec<TrigTerm>,
    pub v2: Vec<TrigTerm>,
}

/// A zero of a torus field with its linearization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldZero {
    pub theta: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    pub sign: i64,
}

impl TorusField {
    /// `V = (sin θ₁, sin θ₂)`: four zeros with linearizations `diag(±1, ±1)`.
    pub fn standard() -> Self {
        let sin = |k: [i64; 2]| TrigTerm { k, cos: 0.0, sin: 1.0 };
        Self {
            v1: vec![sin([1, 0])],
            v2: vec![sin([0, 1])],
        }
    }

    /// The constant field `(a, b)`.
    pub fn constant(a: f64, b: f64) -> Self {
        let cst = |v: f64| TrigTerm {
            k: [0, 0],
            cos: v,
            sin: 0.0,
        };
        Self {
            v1: vec![cst(a)],
            v2: vec![cst(b)],
        }
    }

    fn component(&self, j: usize) -> &[TrigTerm] {
        if j == 0 {
            &self.v1
        } else {
            &self.v2
        }
    }

    /// Largest `|k_j|` over all terms.
    pub fn degree(&self) -> i64 {
        self.v1
            .iter()
            .chain(&self.v2)
            .flat_map(|t| [t.k[0].abs(), t.k[1].abs()])
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, theta: [f64; 2]) -> [f64; 2] {
        let comp = |terms: &[TrigTerm]| -> f64 {
            terms
                .iter()
                .map(|t| {
                    let a = t.k[0] as f64 * theta[0] + t.k[1] as f64 * theta[1];
                    t.cos * a.cos() + t.sin * a.sin()
                })
                .sum()
        };
        [comp(&self.v1), comp(&self.v2)]
    }

    /// `J_ij = ∂V_i/∂θ_j`.
    pub fn jacobian(&self, theta: [f64; 2]) -> [[f64; 2]; 2] {
        let mut jac = [[0.0; 2]; 2];
        for (i, row) in jac.iter_mut().enumerate() {
            for t in self.component(i) {
                let a = t.k[0] as f64 * theta[0] + t.k[1] as f64 * theta[1];
                let da = -t.cos * a.sin() + t.sin * a.cos();
                row[0] += da * t.k[0] as f64;
                row[1] += da * t.k[1] as f64;
            }
        }
        jac
    }

    fn coeffs(&self, j: usize) -> Coeffs2 {
        let mut out = Coeffs2::new();
        for t in self.component(j) {
            let (k1, k2) = (t.k[0], t.k[1]);
            if k1 == 0 && k2 == 0 {
                *out.entry((0, 0)).or_insert(ZERO) += c(t.cos, 0.0);
                continue;
            }
            let [cp, cm] = trig_pair(t.cos, t.sin);
            *out.entry((k1, k2)).or_insert(ZERO) += cp;
            *out.entry((-k1, -k2)).or_insert(ZERO) += cm;
        }
        out.retain(|_, v| *v != ZERO);
        out
    }

    /// Zeros on `[0, 2π)²` by Newton's method from a sampling grid. A
    /// degenerate zero is an error.
    pub fn zeros(&self) -> Result<Vec<FieldZero>> {
        let samples = 24 * self.degree().max(1) as usize;
        let mut found: Vec<FieldZero> = Vec::new();
        for g1 in 0..samples {
            for g2 in 0..samples {
                let mut t = [
                    TAU * (g1 as f64 + 0.5) / samples as f64,
                    TAU * (g2 as f64 + 0.5) / samples as f64,
                ];
                for _ in 0..100 {
                    let v = self.eval(t);
                    let j = self.jacobian(t);
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    if det == 0.0 {
                        break;
                    }
                    let d0 = (j[1][1] * v[0] - j[0][1] * v[1]) / det;
                    let d1 = (-j[1][0] * v[0] + j[0][0] * v[1]) / det;
                    t = [t[0] - d0, t[1] - d1];
                    if d0.abs().max(d1.abs()) < 1e-15 {
                        break;
                    }
                }
                let v = self.eval(t);
                if v[0].abs().max(v[1].abs()) > 1e-11 {
                    continue;
                }
                let t = [t[0].rem_euclid(TAU), t[1].rem_euclid(TAU)];
                if found
                    .iter()
                    .any(|z| angle_distance(z.theta[0], t[0]).max(angle_distance(z.theta[1], t[1])) < 1e-7)
                {
                    continue;
                }
                let jac = self.jacobian(t);
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det.abs() < 1e-8 {
                    return Err(Error::DegenerateLinearization { det });
                }
                found.push(FieldZero {
                    theta: t,
                    jacobian: jac,
                    sign: det.signum() as i64,
                });
            }
        }
        found.sort_by(|a, b| {
            a.theta[0]
                .total_cmp(&b.theta[0])
                .then(a.theta[1].total_cmp(&b.theta[1]))
        });
        Ok(found)
    }

    /// Sampled `(min |V|², max Σ_j |∂_jV|)`, used to place the eigensolver
    /// shift: `H_s ≥ s·min|V|² − max Σ_j |∂_jV|`.
    fn shift_bounds(&self) -> (f64, f64) {
        let m = 64;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for a in 0..m {
            for b in 0..m {
                let t = [TAU * a as f64 / m as f64, TAU * b as f64 / m as f64];
                let v = self.eval(t);
                let j = self.jacobian(t);
                lo = lo.min(v[0] * v[0] + v[1] * v[1]);
                let d = (j[0][0].powi(2) + j[1][0].powi(2)).sqrt() + (j[0][1].powi(2) + j[1][1].powi(2)).sqrt();
                hi = hi.max(d);
            }
        }
        (lo, hi)
    }
}

/// Spectral and combinatorial index of a vector field deformation on `T²`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusIndexReport {
    pub spectrum: SpectrumResult,
    pub zeros: Vec<FieldZero>,
    /// `Σ sign det(∂V)` over the zeros.
    pub combinatorial_index: i64,
    pub spectral_index: i64,
    /// At `s = 0` only: kernel dimensions in form degrees 0, 1, 2.
    pub degree_kernels: Option<[usize; 3]>,
}

/// Eigenvalues requested per grading on the torus.
const TORUS_COUNT: usize = 10;

/// Form components: even `(u₀, u₁₂)`, odd `(u₁, u₂)` where `u₁₂` is the
/// `dθ₁∧dθ₂` coefficient. Each entry of the 2×2 operator matrix is
/// `Σ_j a_j∂_j + s Σ_j b_jV_j` and is stored as `(a, b)`.
type Entry = ([f64; 2], [f64; 2]);

/// `D⁺ : (u₀, u₁₂) ↦ (u₁, u₂)` for `D = d + d* + s(V^♭∧ + V⌟)`.
const D_PLUS: [[Entry; 2]; 2] = [
    [([1.0, 0.0], [1.0, 0.0]), ([0.0, 1.0], [0.0, -1.0])],
    [([0.0, 1.0], [0.0, 1.0]), ([-1.0, 0.0], [1.0, 0.0])],
];
/// `D⁻ = (D⁺)* : (u₁, u₂) ↦ (u₀, u₁₂)`.
const D_MINUS: [[Entry; 2]; 2] = [
    [([-1.0, 0.0], [1.0, 0.0]), ([0.0, -1.0], [0.0, 1.0])],
    [([0.0, -1.0], [0.0, -1.0]), ([1.0, 0.0], [1.0, 0.0])],
];

/// Mode-major, component-minor index, which keeps the bandwidth near
/// `4(2N + 1)`.
fn torus_index(k: (i64, i64), comp: usize, n: usize) -> usize {
    let m = 2 * n + 1;
    (mode(k.0, n) * m + mode(k.1, n)) * 2 + comp
}

fn torus_first_order(op: &[[Entry; 2]; 2], v: &[Coeffs2; 2], s: f64, n: usize, d: i64) -> Vec<Vec<(usize, C64)>> {
    let ni = n as i64;
    let mut rows = Vec::new();
    for p1 in -(ni + d)..=ni + d {
        for p2 in -(ni + d)..=ni + d {
            for row_op in op {
                let mut row: BTreeMap<usize, C64> = BTreeMap::new();
                for (b, (a_der, b_field)) in row_op.iter().enumerate() {
                    if (p1.abs() <= ni) && (p2.abs() <= ni) {
                        let v = c(0.0, a_der[0] * p1 as f64 + a_der[1] * p2 as f64);
                        if v != ZERO {
                            *row.entry(torus_index((p1, p2), b, n)).or_insert(ZERO) += v;
                        }
                    }
                    for (j, coeffs) in v.iter().enumerate() {
                        if b_field[j] == 0.0 {
                            continue;
                        }
                        for (&(k1, k2), val) in coeffs {
                            let q = (p1 - k1, p2 - k2);
                            if q.0.abs() <= ni && q.1.abs() <= ni {
                                *row.entry(torus_index(q, b, n)).or_insert(ZERO) += val * (s * b_field[j]);
                            }
                        }
                    }
                }
                row.retain(|_, v| *v != ZERO);
                if !row.is_empty() {
                    rows.push(row.into_iter().collect());
                }
            }
        }
    }
    rows
}

/// Graded small-eigenvalue counts of `H_s = s⁻¹D_s²` on `Ω•(T²) ⊗ C` with
/// `(2N + 1)²` modes per component, compared with `Σ sign det(∂V)` over the
/// zeros of `V`.
pub fn torus_de_rham_index(field: &TorusField, s: f64, modes: usize) -> Result<TorusIndexReport> {
    if modes < 8 {
        return Err(Error::InvalidArgument(format!("torus mode cutoff {modes} < 8")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("deformation parameter {s} is not ≥ 0")));
    }
    let zeros = field.zeros()?;
    let combinatorial_index = zeros.iter().map(|z| z.sign).sum();
    let v = [field.coeffs(0), field.coeffs(1)];
    let d = field.degree();
    let dim = 2 * (2 * modes + 1).pow(2);
    let scale = if s > 0.0 { 1.0 / s } else { 1.0 };
    let mut h_plus = SparseHermitian::gram(dim, &torus_first_order(&D_PLUS, &v, s, modes, d));
    let mut h_minus = SparseHermitian::gram(dim, &torus_first_order(&D_MINUS, &v, s, modes, d));
    h_plus.scale(scale);
    h_minus.scale(scale);

    let (min_v2, max_dv) = field.shift_bounds();
    let shift = (s * min_v2 - max_dv).max(0.0) * 0.9 - 0.5;
    let opts = EigenOptions::new(TORUS_COUNT, shift);
    let plus = lowest_eigenvalues(&h_plus, &opts)?;
    let minus = lowest_eigenvalues(&h_minus, &opts)?;
    let counts = graded_counts(&plus, &minus)?;

    let degree_kernels = if s == 0.0 {
        Some(degree_kernels(&h_plus, &h_minus, modes)?)
    } else {
        None
    };
    let mut spectrum = SpectrumResult::new(s, modes, OperatorKind::VectorFieldDeRham, SpectralOperator::Laplacian);
    spectrum.graded_counts = Some(counts);
    spectrum.push_graded(SpectralGrading::Plus, &plus);
    spectrum.push_graded(SpectralGrading::Minus, &minus);
    Ok(TorusIndexReport {
        spectral_index: counts.index(),
        spectrum,
        zeros,
        combinatorial_index,
        degree_kernels,
    })
}

/// Kernel dimensions per form degree of the undeformed Laplacian, which is
/// block diagonal in the degree.
fn degree_kernels(h_plus: &SparseHermitian, h_minus: &SparseHermitian, modes: usize) -> Result<[usize; 3]> {
    let dim = h_plus.dim();
    let comp = |c: usize| -> Vec<usize> { (0..dim).filter(|i| i % 2 == c).collect() };
    let (even0, even2) = (comp(0), comp(1));
    for (i, j) in even0.iter().zip(&even2) {
        if h_plus.get(*i, *j) != ZERO || h_plus.get(*j, *i) != ZERO {
            return Err(Error::VerificationFailed("degree 0 and 2 couple at s = 0".into()));
        }
    }
    let kernel = |m: &SparseHermitian| -> Result<usize> {
        let vals = lowest_eigenvalues(m, &EigenOptions::new(TORUS_COUNT, -0.5))?;
        let (t, _) = gap_threshold(&vals, KERNEL_FLOOR)?;
        Ok(vals.iter().filter(|v| **v < t).count())
    };
    let _ = modes;
    Ok([
        kernel(&h_plus.submatrix(&even0))?,
        kernel(h_minus)?,
        kernel(&h_plus.submatrix(&even2))?,
    ])
}

// ---------------------------------------------------------------------------
// Cluster fits over a sweep

/// Per-`s` outcome of [`cluster_report`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub window: f64,
    /// Largest distance from a low eigenvalue to its nearest model value.
    pub max_distance: f64,
    /// Eigenvalues below the examined range.
    pub low_count: usize,
    /// `(μ_j, grading, p_j, observed count in the window)`.
    pub observed: Vec<(f64, SpectralGrading, usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterFit {
    /// `C = max_s s^{1/5}·(max matched distance)`.
    pub c: f64,
    /// Least-squares slope of `log(distance)` against `log(s)`, when defined.
    pub fitted_exponent: Option<f64>,
    pub distances_nonincreasing: bool,
    pub points: Vec<SweepPoint>,
    pub violations: Vec<String>,
    /// Window overlaps between distinct model values (not fatal).
    pub overlaps: Vec<String>,
}

/// Upper end of the examined range for the model values of one grading:
/// halfway past the largest `μ` by the smallest spacing (or by 1).
fn examined_top(mus: &[f64]) -> f64 {
    let max = mus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spacing = mus
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 1e-9)
        .fold(f64::INFINITY, f64::min);
    if spacing.is_finite() {
        max + spacing / 2.0
    } else {
        max + 1.0
    }
}

/// Matches the low spectrum at each `s` to the model, fits the window
/// constant and counts eigenvalues per window.
///
/// Eigenvalues are taken from [`SpectrumResult::laplacian_values`]; each one
/// below the examined range is assigned to the nearest `μ_j` of its grading.
/// The window is `c₁·s^{−1/5}` with `c₁` just above the fitted `C`, so every
/// matched eigenvalue lies inside its window and violations are purely
/// multiplicity mismatches. Records the window and the assignments on each
/// result.
pub fn cluster_report(sweep: &mut [SpectrumResult], model: &[ModelCluster]) -> Result<ClusterFit> {
    if sweep.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "sweep has {} points; need ≥ 3",
            sweep.len()
        )));
    }
    if model.is_empty() {
        return Err(Error::InvalidArgument("empty cluster model".into()));
    }
    if sweep.iter().any(|r| !(r.s > 0.0)) {
        return Err(Error::InvalidArgument("cluster fits need s > 0".into()));
    }
    let gradings: Vec<SpectralGrading> = {
        let mut g: Vec<_> = model.iter().map(|m| m.grading).collect();
        g.sort();
        g.dedup();
        g
    };
    let mus_of = |g: SpectralGrading| -> Vec<f64> {
        let mut v: Vec<f64> = model.iter().filter(|m| m.grading == g).map(|m| m.mu).collect();
        v.sort_by(f64::total_cmp);
        v
    };

    // Match and measure.
    let mut distances = Vec::with_capacity(sweep.len());
    let mut lows: Vec<Vec<(SpectralGrading, f64, f64)>> = Vec::with_capacity(sweep.len());
    for r in sweep.iter() {
        let values = r.laplacian_values();
        let mut matched = Vec::new();
        let mut worst = 0.0_f64;
        for &g in &gradings {
            let mus = mus_of(g);
            let top = examined_top(&mus);
            for &(_, v) in values.iter().filter(|(gg, v)| *gg == g && *v < top) {
                let mu = mus
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()))
                    .unwrap_or(0.0);
                worst = worst.max((v - mu).abs());
                matched.push((g, v, mu));
            }
        }
        distances.push(worst);
        lows.push(matched);
    }
    let c_fit = sweep
        .iter()
        .zip(&distances)
        .map(|(r, d)| r.s.powf(-WINDOW_EXPONENT) * d)
        .fold(0.0, f64::max);
    let c1 = c_fit * (1.0 + 1e-6) + 1e-12;

    let mut points = Vec::new();
    let mut violations = Vec::new();
    let mut overlaps = Vec::new();
    for ((r, matched), &dist) in sweep.iter_mut().zip(&lows).zip(&distances) {
        let w = c1 * r.s.powf(WINDOW_EXPONENT);
        let mut observed = Vec::new();
        for m in model {
            let count = matched
                .iter()
                .filter(|(g, v, _)| *g == m.grading && (v - m.mu).abs() < w)
                .count();
            if count != m.multiplicity {
                violations.push(format!(
                    "s = {}: {} eigenvalues of grading {} within {:.3e} of μ = {}, expected {}",
                    r.s,
                    count,
                    m.grading.label(),
                    w,
                    m.mu,
                    m.multiplicity
                ));
            }
            observed.push((m.mu, m.grading, m.multiplicity, count));
        }
        for &g in &gradings {
            let mus = mus_of(g);
            for pair in mus.windows(2) {
                if pair[1] - pair[0] > 1e-9 && pair[1] - pair[0] < 2.0 * w {
                    overlaps.push(format!(
                        "s = {}: windows around μ = {} and μ = {} overlap ({})",
                        r.s,
                        pair[0],
                        pair[1],
                        g.label()
                    ));
                }
            }
        }
        let expected: usize = model.iter().map(|m| m.multiplicity).sum();
        if matched.len() != expected {
            violations.push(format!(
                "s = {}: {} eigenvalues below the examined range, model predicts {}",
                r.s,
                matched.len(),
                expected
            ));
        }
        r.window = Some(w);
        let laplacian = r.operator == SpectralOperator::Laplacian;
        for e in r.eigenvalues.iter_mut() {
            e.cluster_mu = matched
                .iter()
                .find(|(g, v, _)| laplacian && *g == e.grading && *v == e.value)
                .map(|(_, _, mu)| *mu);
        }
        points.push(SweepPoint {
            s: r.s,
            window: w,
            max_distance: dist,
            low_count: matched.len(),
            observed,
        });
    }

    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.s, p.max_distance)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let distances_nonincreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-14);
    let fitted_exponent = fit_exponent(&sorted);
    Ok(ClusterFit {
        c: c_fit,
        fitted_exponent,
        distances_nonincreasing,
        points,
        violations,
        overlaps,
    })
}

/// Slope of the least-squares line through `(log s, log d)` over points with
/// `d > 0`; `None` with fewer than two such points.
fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(s, d)| (s.ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `k` log-spaced points from `a` to `b` inclusive.
pub fn geometric_range(a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b >= a) || !b.is_finite() || k == 0 || (k == 1 && a != b) {
        return Err(Error::InvalidArgument(format!("invalid geometric range {a}:{b}:{k}")));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..k)
        .map(|i| {
            if i == 0 {
                a
            } else if i == k - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (k - 1) as f64).exp()
            }
        })
        .collect())
}

pub const CSV_HEADER: &str = "s,k,eigenvalue,grading,cluster_mu";

/// Writes one CSV row per retained eigenvalue, `k` counting within a grading.
pub fn write_csv<W: Write>(out: &mut W, results: &[SpectrumResult]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let mut counters: BTreeMap<SpectralGrading, usize> = BTreeMap::new();
        for e in &r.eigenvalues {
            let k = counters.entry(e.grading).or_insert(0);
            let mu = e.cluster_mu.map(|m| format!("{m}")).unwrap_or_default();
            writeln!(out, "{},{},{:.12e},{},{}", r.s, k, e.value, e.grading.label(), mu)?;
            *k += 1;
        }
    }
    Ok(())
}

/// `(2k + 1)`-point helper for tests and reports: `−k..k` as floats.
pub fn integer_window(k: usize) -> Vec<f64> {
    (-(k as i64)..=k as i64).map(|v| v as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn counterexample_at_zero_is_the_integers() {
        let r = circle_counterexample(0.0, 16).unwrap();
        let v = r.values(SpectralGrading::Ungraded);
        assert_eq!(v.len(), 33);
        for (a, b) in v.iter().zip(integer_window(16)) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r.central_k, Some(0));
        assert_eq!(r.central(16).unwrap(), v);
        assert!(r.flatness.unwrap() < 1e-12);
    }

    #[test]
    fn counterexample_spectrum_ignores_s() {
        let r = circle_counterexample(10.0, 64).unwrap();
        assert_eq!(r.central_k, Some(20));
        assert!(r.integer_deviation.unwrap() < 1e-6, "{r:?}");
        assert!(r.flatness.unwrap() < 1e-6);
    }

    #[test]
    fn morse_critical_points_of_cos() {
        let cp = MorseFunction::cos_theta().critical_points().unwrap();
        assert_eq!(cp.len(), 2);
        assert!(cp[0].theta.abs() < 1e-12 && (cp[0].hessian + 1.0).abs() < 1e-12);
        assert!((cp[1].theta - PI).abs() < 1e-12 && (cp[1].hessian - 1.0).abs() < 1e-12);
        // f′ = −sin θ (1 + cos θ) has a triple zero at π.
        let degenerate = MorseFunction {
            cos: vec![1.0, 0.25],
            sin: vec![],
        };
        assert!(matches!(
            degenerate.critical_points(),
            Err(Error::DegenerateLinearization { .. })
        ));
    }

    #[test]
    fn morse_model_for_cos() {
        let model = morse_model(&MorseFunction::cos_theta().critical_points().unwrap(), 3);
        let plus: Vec<(f64, usize)> = model
            .iter()
            .filter(|m| m.grading == SpectralGrading::Plus)
            .map(|m| (m.mu, m.multiplicity))
            .collect();
        assert_eq!(plus, vec![(0.0, 1), (2.0, 2), (4.0, 2)]);
    }

    #[test]
    fn morse_index_vanishes() {
        let r = circle_morse_witten(30.0, 64, &MorseFunction::cos_theta()).unwrap();
        let g = r.graded_counts.unwrap();
        assert_eq!((g.dim_ker_plus, g.dim_ker_minus), (1, 1));
        assert!(r.eigenvalues.iter().all(|e| e.value > -1e-9));
    }

    #[test]
    fn standard_field_zeros() {
        let z = TorusField::standard().zeros().unwrap();
        assert_eq!(z.len(), 4);
        let signs: Vec<i64> = z.iter().map(|z| z.sign).collect();
        assert_eq!(signs, vec![1, -1, -1, 1]);
        assert!(TorusField::constant(1.0, 0.0).zeros().unwrap().is_empty());
    }

    #[test]
    fn degenerate_field_is_rejected() {
        // 1 − cos θ₁ vanishes to second order.
        let f = TorusField {
            v1: vec![
                TrigTerm {
                    k: [0, 0],
                    cos: 1.0,
                    sin: 0.0,
                },
                TrigTerm {
                    k: [1, 0],
                    cos: -1.0,
                    sin: 0.0,
                },
            ],
            v2: vec![TrigTerm {
                k: [0, 1],
                cos: 0.0,
                sin: 1.0,
            }],
        };
        assert!(matches!(f.zeros(), Err(Error::DegenerateLinearization { .. })));
    }

    #[test]
    fn exact_model_gives_zero_violations() {
        let model = morse_model(&MorseFunction::cos_theta().critical_points().unwrap(), 3);
        let mut sweep: Vec<SpectrumResult> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&s| {
                let mut r = SpectrumResult::new(s, 8, OperatorKind::MorseDeRham, SpectralOperator::Laplacian);
                for m in &model {
                    for _ in 0..m.multiplicity {
                        r.push_graded(m.grading, &[m.mu]);
                    }
                }
                r.eigenvalues
                    .sort_by(|a, b| a.grading.cmp(&b.grading).then(a.value.total_cmp(&b.value)));
                r
            })
            .collect();
        let fit = cluster_report(&mut sweep, &model).unwrap();
        assert_eq!(fit.c, 0.0);
        assert!(fit.violations.is_empty(), "{:?}", fit.violations);
    }

    #[test]
    fn geometric_ranges() {
        let r = geometric_range(10.0, 1000.0, 5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], 10.0);
        assert_eq!(r[4], 1000.0);
        assert!((r[2] - 100.0).abs() < 1e-9);
        assert!(geometric_range(0.0, 1.0, 3).is_err());
        assert!(geometric_range(5.0, 1.0, 3).is_err());
    }

    #[test]
    fn csv_has_exact_header() {
        let r = circle_counterexample(0.0, 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,k,eigenvalue,grading,cluster_mu\n"));
        assert_eq!(text.lines().count(), 10);
    }
}
