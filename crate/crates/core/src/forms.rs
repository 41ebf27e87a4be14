//! Jet-based calculus of (1,1)-forms on charts of punctured complex space
//! and on Hopf quotients: d^c and dd^c assembly, pluriclosedness and
//! plurinegativity checks, pullbacks, and quotient-descent verification.
//!
//! Convention throughout: d^c = i(∂̄ − ∂), so dd^c = 2i ∂∂̄.

use crate::czlinalg::{ComplexMatrix, LinalgError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

/// Queries closer to the puncture than this are rejected.
pub const SINGULAR_GUARD: f64 = 1e-9;

/// Entrywise tolerance for Hermitian symmetry of coefficient jets.
pub const JET_SYMMETRY_TOL: f64 = 1e-12;

/// Smallest eigenvalue accepted when a form claims strict positivity.
pub const POSITIVITY_THRESHOLD: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error)]
pub enum FormError {
    #[error("query at the singular point: |z| = {radius:.3e} within guard {SINGULAR_GUARD:.0e}")]
    SingularPoint { radius: f64 },
    #[error("point outside the form domain: |z| = {radius:.3e} not in [{inner}, {outer}]")]
    OutsideDomain { radius: f64, inner: f64, outer: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("coefficient jet violates Hermitian symmetry by {defect:.3e} in {context}")]
    JetSymmetry { defect: f64, context: &'static str },
    #[error("positivity claim fails: smallest coefficient eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("unsupported dimension {n}: {context}")]
    UnsupportedDimension { n: usize, context: &'static str },
    #[error("unknown builtin form {name:?}")]
    UnknownBuiltin { name: String },
    #[error("contraction factor {lambda} must exceed 1")]
    BadContraction { lambda: f64 },
    #[error("empty sample request")]
    EmptySample,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Exterior form of fixed degree on ℝ²ⁿ with complex coefficients, stored
/// densely over sorted index combinations. Real coordinates are ordered
/// x₁, y₁, x₂, y₂, …, so dx_j has index 2j and dy_j has index 2j+1.
#[derive(Debug, Clone)]
pub struct RealForm {
    n: usize,
    degree: usize,
    combos: Arc<Vec<Vec<usize>>>,
    coeffs: Vec<Complex64>,
}

fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    if k > dim {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next lexicographic combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + dim - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

impl RealForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        let combos = combinations(2 * n, degree);
        let len = combos.len();
        Self {
            n,
            degree,
            combos: Arc::new(combos),
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// dz_j = dx_j + i dy_j
    pub fn dz(n: usize, j: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.coeffs[2 * j] = Complex64::new(1.0, 0.0);
        f.coeffs[2 * j + 1] = I;
        f
    }

    /// dz̄_j = dx_j − i dy_j
    pub fn dzbar(n: usize, j: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.coeffs[2 * j] = Complex64::new(1.0, 0.0);
        f.coeffs[2 * j + 1] = -I;
        f
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn combos(&self) -> &[Vec<usize>] {
        &self.combos
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn position(&self, combo: &[usize]) -> usize {
        self.combos
            .binary_search_by(|probe| probe.as_slice().cmp(combo))
            .expect("sorted index combination")
    }

    /// Coefficient of the basis form with the given (distinct) indices,
    /// accounting for the permutation sign.
    pub fn component(&self, indices: &[usize]) -> Complex64 {
        assert_eq!(indices.len(), self.degree);
        let mut sorted: Vec<usize> = indices.to_vec();
        let mut sign = 1.0;
        // bubble sort, tracking transpositions
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[self.position(&sorted)] * sign
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.degree, other.degree);
        assert_eq!(self.n, other.n);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n, self.degree + other.degree);
        if out.coeffs.is_empty() {
            return out;
        }
        let mut merged = Vec::with_capacity(self.degree + other.degree);
        for (ca, a) in self.coeffs.iter().zip(self.combos.iter()) {
            if ca.norm_sqr() == 0.0 {
                continue;
            }
            'pairs: for (cb, b) in other.coeffs.iter().zip(other.combos.iter()) {
                if cb.norm_sqr() == 0.0 {
                    continue;
                }
                // shuffle sign: one transposition per pair (a_i, b_j) out of order
                let mut inversions = 0usize;
                for &ai in a.iter() {
                    for &bj in b.iter() {
                        if ai == bj {
                            continue 'pairs;
                        }
                        if ai > bj {
                            inversions += 1;
                        }
                    }
                }
                merged.clear();
                merged.extend_from_slice(a);
                merged.extend_from_slice(b);
                merged.sort_unstable();
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                let pos = out.position(&merged);
                out.coeffs[pos] += ca * cb * sign;
            }
        }
        out
    }

    /// Evaluates on a tuple of tangent vectors in ℝ²ⁿ.
    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> Complex64 {
        assert_eq!(vectors.len(), self.degree);
        let k = self.degree;
        let mut total = Complex64::new(0.0, 0.0);
        for (c, combo) in self.coeffs.iter().zip(self.combos.iter()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let minor = DMatrix::<f64>::from_fn(k, k, |r, col| vectors[col][combo[r]]);
            total += c * minor.determinant();
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

/// Value and Wirtinger derivatives of the coefficient matrix w_{jk̄} at a
/// point: first derivatives in every z_m and z̄_m direction and the mixed
/// second derivatives ∂²/∂z_m∂z̄_l.
#[derive(Debug, Clone)]
pub struct CoefficientJet {
    value: DMatrix<Complex64>,
    dz: Vec<DMatrix<Complex64>>,
    dzbar: Vec<DMatrix<Complex64>>,
    dzdzbar: Vec<Vec<DMatrix<Complex64>>>,
}

impl CoefficientJet {
    pub fn new(
        value: DMatrix<Complex64>,
        dz: Vec<DMatrix<Complex64>>,
        dzbar: Vec<DMatrix<Complex64>>,
        dzdzbar: Vec<Vec<DMatrix<Complex64>>>,
    ) -> Result<Self, FormError> {
        let n = value.nrows();
        if value.ncols() != n || dz.len() != n || dzbar.len() != n || dzdzbar.len() != n {
            return Err(FormError::DimensionMismatch {
                left: n,
                right: value.ncols().max(dz.len()).max(dzbar.len()).max(dzdzbar.len()),
            });
        }
        for m in dz.iter().chain(dzbar.iter()).chain(dzdzbar.iter().flatten()) {
            if m.nrows() != n || m.ncols() != n {
                return Err(FormError::DimensionMismatch {
                    left: n,
                    right: m.nrows().max(m.ncols()),
                });
            }
        }
        if dzdzbar.iter().any(|row| row.len() != n) {
            return Err(FormError::DimensionMismatch { left: n, right: 0 });
        }

        // reality of the (1,1)-form, propagated through the derivatives:
        //   w_{jk̄} = conj(w_{kj̄})
        //   ∂w/∂z_m = conj(∂w'/∂z̄_m)     with ' the transposed pair
        //   ∂²w/∂z_m∂z̄_l = conj(∂²w'/∂z_l∂z̄_m)
        let defect = |m: &DMatrix<Complex64>, other: &DMatrix<Complex64>| -> f64 {
            (m - other.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        };
        let d0 = defect(&value, &value);
        if d0 > JET_SYMMETRY_TOL {
            return Err(FormError::JetSymmetry {
                defect: d0,
                context: "coefficient value",
            });
        }
        for m in 0..n {
            let d1 = defect(&dz[m], &dzbar[m]);
            if d1 > JET_SYMMETRY_TOL {
                return Err(FormError::JetSymmetry {
                    defect: d1,
                    context: "first derivatives",
                });
            }
        }
        for m in 0..n {
            for l in 0..n {
                let d2 = defect(&dzdzbar[m][l], &dzdzbar[l][m]);
                if d2 > JET_SYMMETRY_TOL {
                    return Err(FormError::JetSymmetry {
                        defect: d2,
                        context: "second derivatives",
                    });
                }
            }
        }
        Ok(Self {
            value,
            dz,
            dzbar,
            dzdzbar,
        })
    }

    pub fn dimension(&self) -> usize {
        self.value.nrows()
    }

    pub fn value(&self) -> &DMatrix<Complex64> {
        &self.value
    }

    /// ∂w_{jk̄}/∂z_m
    pub fn dz(&self, m: usize) -> &DMatrix<Complex64> {
        &self.dz[m]
    }

    /// ∂w_{jk̄}/∂z̄_m
    pub fn dzbar(&self, m: usize) -> &DMatrix<Complex64> {
        &self.dzbar[m]
    }

    /// ∂²w_{jk̄}/∂z_m∂z̄_l
    pub fn dzdzbar(&self, m: usize, l: usize) -> &DMatrix<Complex64> {
        &self.dzdzbar[m][l]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    PuncturedSpace,
    Shell { inner: f64, outer: f64 },
    HopfQuotient { lambda: f64 },
}

impl Domain {
    fn admit(&self, radius: f64) -> Result<(), FormError> {
        match *self {
            Domain::PuncturedSpace | Domain::HopfQuotient { .. } => {
                if radius <= SINGULAR_GUARD {
                    Err(FormError::SingularPoint { radius })
                } else {
                    Ok(())
                }
            }
            Domain::Shell { inner, outer } => {
                if radius < inner || radius > outer {
                    Err(FormError::OutsideDomain {
                        radius,
                        inner,
                        outer,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Closed annular sampling region inner ≤ ‖z‖ ≤ outer.
#[derive(Debug, Clone, Copy)]
pub struct ShellRegion {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub region: ShellRegion,
}

pub fn shell_samples(n: usize, spec: &SampleSpec) -> Result<Vec<Vec<Complex64>>, FormError> {
    if spec.count == 0 {
        return Err(FormError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let r = spec.region.inner + (spec.region.outer - spec.region.inner) * rng.random::<f64>();
        for z in &mut v {
            *z *= r / norm;
        }
        out.push(v);
    }
    Ok(out)
}

type Oracle = dyn Fn(&[Complex64]) -> Result<CoefficientJet, FormError> + Send + Sync;

/// A (1,1)-form w = i Σ w_{jk̄} dz_j ∧ dz̄_k given through a coefficient-jet
/// oracle on a chart.
#[derive(Clone)]
pub struct Form11 {
    n: usize,
    domain: Domain,
    claims_positive: bool,
    label: Option<String>,
    oracle: Arc<Oracle>,
}

impl std::fmt::Debug for Form11 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Form11")
            .field("n", &self.n)
            .field("domain", &self.domain)
            .field("claims_positive", &self.claims_positive)
            .field("label", &self.label)
            .finish()
    }
}

impl Form11 {
    pub fn new(
        n: usize,
        domain: Domain,
        claims_positive: bool,
        oracle: impl Fn(&[Complex64]) -> Result<CoefficientJet, FormError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            domain,
            claims_positive,
            label: None,
            oracle: Arc::new(oracle),
        }
    }

    /// Attaches a human-readable name used by report emitters.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn claims_positive(&self) -> bool {
        self.claims_positive
    }

    pub fn jet_at(&self, z: &[Complex64]) -> Result<CoefficientJet, FormError> {
        if z.len() != self.n {
            return Err(FormError::DimensionMismatch {
                left: z.len(),
                right: self.n,
            });
        }
        let radius = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        self.domain.admit(radius)?;
        let jet = (self.oracle)(z)?;
        if jet.dimension() != self.n {
            return Err(FormError::DimensionMismatch {
                left: jet.dimension(),
                right: self.n,
            });
        }
        if self.claims_positive {
            let eig = nalgebra::SymmetricEigen::new(jet.value.clone());
            let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min_eigenvalue > POSITIVITY_THRESHOLD) {
                return Err(FormError::NotPositive { min_eigenvalue });
            }
        }
        Ok(jet)
    }

    pub fn coefficients_at(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>, FormError> {
        Ok(self.jet_at(z)?.value.clone())
    }
}

/// Real 3-form at a point; assembled coefficients are stored with their
/// imaginary leak tracked separately.
#[derive(Debug, Clone)]
pub struct Form3 {
    form: RealForm,
    pub max_imag_leak: f64,
}

/// Real 4-form of bidegree (2,2) at a point.
#[derive(Debug, Clone)]
pub struct Form22 {
    form: RealForm,
    pub max_imag_leak: f64,
}

impl Form3 {
    pub fn component(&self, indices: &[usize; 3]) -> f64 {
        self.form.component(indices).re
    }

    pub fn max_component_abs(&self) -> f64 {
        self.form.max_abs()
    }

    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> f64 {
        self.form.evaluate(vectors).re
    }

    pub fn raw(&self) -> &RealForm {
        &self.form
    }
}

impl Form22 {
    pub fn component(&self, indices: &[usize; 4]) -> f64 {
        self.form.component(indices).re
    }

    pub fn max_component_abs(&self) -> f64 {
        self.form.max_abs()
    }

    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> f64 {
        self.form.evaluate(vectors).re
    }

    /// Top-degree coefficient against dx₁∧dy₁∧…∧dx_n∧dy_n; only defined when
    /// the form already has top degree (n = 2).
    pub fn top_coefficient(&self) -> f64 {
        assert_eq!(
            self.form.degree(),
            2 * self.form.dimension(),
            "top coefficient requires a top-degree form"
        );
        self.form.coefficients()[0].re
    }

    /// Pairs against the positive (1,1)-direction i·α∧ᾱ, α = Σ u_j dz_j,
    /// returning the coefficient of the result against the volume form.
    pub fn pair_against_direction(&self, u: &[Complex64]) -> f64 {
        let n = self.form.dimension();
        assert_eq!(u.len(), n);
        let mut alpha = RealForm::zero(n, 1);
        let mut alpha_bar = RealForm::zero(n, 1);
        for (j, &c) in u.iter().enumerate() {
            alpha.add_assign(&RealForm::dz(n, j).scale(c));
            alpha_bar.add_assign(&RealForm::dzbar(n, j).scale(c.conj()));
        }
        let direction = alpha.wedge(&alpha_bar).scale(I);
        let top = self.form.wedge(&direction);
        top.coefficients()[0].re
    }

    pub fn raw(&self) -> &RealForm {
        &self.form
    }
}

/// d^c w = i(∂̄ − ∂)w assembled from first-derivative jets:
/// Σ_m ∂w_{jk̄}/∂z_m dz_m∧dz_j∧dz̄_k − Σ_l ∂w_{jk̄}/∂z̄_l dz̄_l∧dz_j∧dz̄_k.
pub fn dc_at(w: &Form11, z: &[Complex64]) -> Result<Form3, FormError> {
    let jet = w.jet_at(z)?;
    let n = w.dimension();
    let mut total = RealForm::zero(n, 3);
    for j in 0..n {
        for k in 0..n {
            let base = RealForm::dz(n, j).wedge(&RealForm::dzbar(n, k));
            for m in 0..n {
                let hol = jet.dz(m)[(j, k)];
                if hol.norm_sqr() > 0.0 {
                    total.add_assign(&RealForm::dz(n, m).wedge(&base).scale(hol));
                }
                let anti = jet.dzbar(m)[(j, k)];
                if anti.norm_sqr() > 0.0 {
                    total.add_assign(&RealForm::dzbar(n, m).wedge(&base).scale(-anti));
                }
            }
        }
    }
    Ok(Form3 {
        max_imag_leak: total.max_imag(),
        form: total,
    })
}

/// dd^c w = 2i ∂∂̄ w assembled from second-derivative jets:
/// −2 Σ ∂²w_{jk̄}/∂z_m∂z̄_l dz_m∧dz̄_l∧dz_j∧dz̄_k.
pub fn ddc_at(w: &Form11, z: &[Complex64]) -> Result<Form22, FormError> {
    let jet = w.jet_at(z)?;
    let n = w.dimension();
    let mut total = RealForm::zero(n, 4);
    for j in 0..n {
        for k in 0..n {
            let base = RealForm::dz(n, j).wedge(&RealForm::dzbar(n, k));
            for m in 0..n {
                if m == j {
                    continue;
                }
                for l in 0..n {
                    if l == k {
                        continue;
                    }
                    let c = jet.dzdzbar(m, l)[(j, k)];
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    let lead = RealForm::dz(n, m).wedge(&RealForm::dzbar(n, l));
                    total.add_assign(&lead.wedge(&base).scale(c * (-2.0)));
                }
            }
        }
    }
    Ok(Form22 {
        max_imag_leak: total.max_imag(),
        form: total,
    })
}

#[derive(Debug, Clone)]
pub struct ClosednessReport {
    pub pluriclosed: bool,
    pub max_residual: f64,
    pub samples: usize,
}

pub fn is_pluriclosed(
    w: &Form11,
    sampler: &SampleSpec,
    tol: f64,
) -> Result<ClosednessReport, FormError> {
    let points = shell_samples(w.dimension(), sampler)?;
    let mut max_residual: f64 = 0.0;
    for z in &points {
        let ddc = ddc_at(w, z)?;
        max_residual = max_residual.max(ddc.max_component_abs());
    }
    Ok(ClosednessReport {
        pluriclosed: max_residual <= tol,
        max_residual,
        samples: points.len(),
    })
}

#[derive(Debug, Clone)]
pub struct NegativityReport {
    pub plurinegative: bool,
    pub max_pairing: f64,
    pub samples: usize,
}

/// Tests dd^c w ≤ 0. For n = 2 the single top-degree coefficient decides;
/// for n = 3 the form is paired against 50 seeded decomposable positive
/// directions per sample point.
pub fn is_plurinegative(
    w: &Form11,
    sampler: &SampleSpec,
    tol: f64,
) -> Result<NegativityReport, FormError> {
    let n = w.dimension();
    if n != 2 && n != 3 {
        return Err(FormError::UnsupportedDimension {
            n,
            context: "plurinegativity is tested through top pairings in n = 2, 3",
        });
    }
    let points = shell_samples(n, sampler)?;
    let mut dir_rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ 0x9e3779b97f4a7c15);
    let mut max_pairing = f64::NEG_INFINITY;
    for z in &points {
        let ddc = ddc_at(w, z)?;
        if n == 2 {
            max_pairing = max_pairing.max(ddc.top_coefficient());
        } else {
            for _ in 0..50 {
                let u: Vec<Complex64> = (0..n)
                    .map(|_| {
                        Complex64::new(
                            dir_rng.sample(rand_distr::StandardNormal),
                            dir_rng.sample(rand_distr::StandardNormal),
                        )
                    })
                    .collect();
                max_pairing = max_pairing.max(ddc.pair_against_direction(&u));
            }
        }
    }
    Ok(NegativityReport {
        plurinegative: max_pairing <= tol,
        max_pairing,
        samples: points.len(),
    })
}

/// Builds the diagonal radial form w_{jk̄} = δ_{jk} g(‖z‖²) from g and its
/// first two derivatives.
fn radial_form(
    n: usize,
    g: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    domain: Domain,
    claims_positive: bool,
) -> Form11 {
    Form11::new(n, domain, claims_positive, move |z: &[Complex64]| {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let (g0, g1, g2) = g(s);
        let value = DMatrix::from_diagonal_element(n, n, Complex64::new(g0, 0.0));
        let dz: Vec<DMatrix<Complex64>> = (0..n)
            .map(|m| DMatrix::from_diagonal_element(n, n, z[m].conj() * g1))
            .collect();
        let dzbar: Vec<DMatrix<Complex64>> = (0..n)
            .map(|m| DMatrix::from_diagonal_element(n, n, z[m] * g1))
            .collect();
        let dzdzbar: Vec<Vec<DMatrix<Complex64>>> = (0..n)
            .map(|m| {
                (0..n)
                    .map(|l| {
                        let mut c = z[m].conj() * z[l] * g2;
                        if m == l {
                            c += Complex64::new(g1, 0.0);
                        }
                        DMatrix::from_diagonal_element(n, n, c)
                    })
                    .collect()
            })
            .collect();
        CoefficientJet::new(value, dz, dzbar, dzdzbar)
    })
}

/// The Hopf-type metric form w = (i/2) Σ dz_j∧dz̄_j / ‖z‖² on punctured
/// space, with exact analytic jets: w_{jk̄} = δ_{jk}/(2‖z‖²).
pub fn hopf_metric(n: usize) -> Result<Form11, FormError> {
    if n < 2 {
        return Err(FormError::UnsupportedDimension {
            n,
            context: "the quotient construction needs n ≥ 2",
        });
    }
    Ok(radial_form(
        n,
        |s| {
            let g0 = 0.5 / s;
            let g1 = -0.5 / (s * s);
            let g2 = 1.0 / (s * s * s);
            (g0, g1, g2)
        },
        Domain::PuncturedSpace,
        true,
    ))
}

/// Constant Euclidean form (i/2) Σ dz_j∧dz̄_j.
pub fn euclidean_metric(n: usize) -> Form11 {
    radial_form(
        n,
        |_| (0.5, 0.0, 0.0),
        Domain::Shell {
            inner: 0.0,
            outer: f64::INFINITY,
        },
        true,
    )
}

/// Gaussian-weighted form (i/2) e^{−‖z‖²} Σ dz_j∧dz̄_j; plurinegative near
/// the origin.
pub fn gauss_weighted_metric(n: usize) -> Form11 {
    radial_form(
        n,
        |s| {
            let e = 0.5 * (-s).exp();
            (e, -e, e)
        },
        Domain::Shell {
            inner: 0.0,
            outer: f64::INFINITY,
        },
        true,
    )
}

pub const BUILTIN_FORMS: [&str; 4] = ["euclidean", "hopf2", "hopf3", "gauss-weighted"];

/// Built-in forms addressable by name. "hopf2" and "hopf3" fix their own
/// dimension; "euclidean" and "gauss-weighted" accept any n ≥ 1.
pub fn builtin_form(name: &str, n: usize) -> Result<Form11, FormError> {
    let built = builtin_form_unlabeled(name, n)?;
    Ok(built.with_label(name))
}

fn builtin_form_unlabeled(name: &str, n: usize) -> Result<Form11, FormError> {
    match name {
        "hopf2" => {
            if n != 2 {
                return Err(FormError::DimensionMismatch { left: n, right: 2 });
            }
            hopf_metric(2)
        }
        "hopf3" => {
            if n != 3 {
                return Err(FormError::DimensionMismatch { left: n, right: 3 });
            }
            hopf_metric(3)
        }
        "euclidean" => {
            if n == 0 {
                return Err(FormError::UnsupportedDimension {
                    n,
                    context: "forms need at least one variable",
                });
            }
            Ok(euclidean_metric(n))
        }
        "gauss-weighted" => {
            if n == 0 {
                return Err(FormError::UnsupportedDimension {
                    n,
                    context: "forms need at least one variable",
                });
            }
            Ok(gauss_weighted_metric(n))
        }
        other => Err(FormError::UnknownBuiltin {
            name: other.to_string(),
        }),
    }
}

/// Default chart dimension for a builtin name.
pub fn builtin_default_dimension(name: &str) -> Option<usize> {
    match name {
        "hopf2" | "euclidean" | "gauss-weighted" => Some(2),
        "hopf3" => Some(3),
        _ => None,
    }
}

/// Value and Jacobian of a holomorphic map at a source point;
/// jacobian[(j, a)] = ∂f_j/∂ζ_a.
#[derive(Debug, Clone)]
pub struct HoloMapJet {
    pub value: Vec<Complex64>,
    pub jacobian: DMatrix<Complex64>,
}

/// Pullback coefficients (f^*w)_{ab̄} = Σ w_{jk̄}(f) ∂f_j/∂ζ_a conj(∂f_k/∂ζ_b).
pub fn pullback(w: &Form11, map: &HoloMapJet) -> Result<ComplexMatrix, FormError> {
    if map.value.len() != w.dimension() || map.jacobian.nrows() != w.dimension() {
        return Err(FormError::DimensionMismatch {
            left: map.value.len().max(map.jacobian.nrows()),
            right: w.dimension(),
        });
    }
    let coeff = w.coefficients_at(&map.value)?;
    let raw = map.jacobian.transpose() * coeff * map.jacobian.map(|z| z.conj());
    let herm = (&raw + raw.adjoint()).scale(0.5);
    Ok(ComplexMatrix::hermitian(herm)?)
}

/// The quotient of punctured ℂⁿ by z ∼ λz, with fundamental annulus
/// ‖z‖ ∈ [1, λ).
#[derive(Debug, Clone, Copy)]
pub struct HopfManifold {
    n: usize,
    lambda: f64,
}

impl HopfManifold {
    pub fn new(n: usize, lambda: f64) -> Result<Self, FormError> {
        if !(lambda > 1.0) {
            return Err(FormError::BadContraction { lambda });
        }
        if n < 2 {
            return Err(FormError::UnsupportedDimension {
                n,
                context: "the quotient construction needs n ≥ 2",
            });
        }
        Ok(Self { n, lambda })
    }

    /// The standard doubling quotient.
    pub fn standard(n: usize) -> Self {
        Self { n, lambda: 2.0 }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Scales z by a power of λ into the fundamental annulus.
    pub fn representative(&self, z: &[Complex64]) -> Result<Vec<Complex64>, FormError> {
        let radius = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if radius <= SINGULAR_GUARD {
            return Err(FormError::SingularPoint { radius });
        }
        let k = radius.ln() / self.lambda.ln();
        let shift = self.lambda.powi(-(k.floor() as i32));
        let mut out: Vec<Complex64> = z.iter().map(|c| c * shift).collect();
        // floating roundoff can leave the norm a hair outside [1, λ)
        let r2 = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r2 < 1.0 {
            for c in &mut out {
                *c *= self.lambda;
            }
        } else if r2 >= self.lambda {
            for c in &mut out {
                *c /= self.lambda;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct DescentReport {
    pub descends: bool,
    pub max_residual: f64,
    pub samples: usize,
}

/// A form on punctured space descends to the quotient iff
/// λ² w_{jk̄}(λz) = w_{jk̄}(z).
pub fn descends_to_hopf(
    w: &Form11,
    h: &HopfManifold,
    sampler: &SampleSpec,
    tol: f64,
) -> Result<DescentReport, FormError> {
    if w.dimension() != h.dimension() {
        return Err(FormError::DimensionMismatch {
            left: w.dimension(),
            right: h.dimension(),
        });
    }
    let points = shell_samples(w.dimension(), sampler)?;
    let lambda = h.lambda();
    let mut max_residual: f64 = 0.0;
    for z in &points {
        let here = w.coefficients_at(z)?;
        let scaled: Vec<Complex64> = z.iter().map(|c| c * lambda).collect();
        let there = w.coefficients_at(&scaled)?;
        let residual = (there.scale(lambda * lambda) - here)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        max_residual = max_residual.max(residual);
    }
    Ok(DescentReport {
        descends: max_residual <= tol,
        max_residual,
        samples: points.len(),
    })
}

/// Richardson-extrapolated central differences for the Wirtinger pair
/// (∂f/∂z_m, ∂f/∂z̄_m); error O(h⁴) per component, evaluations confined to
/// a polydisk of radius 2h (4h when nested for second derivatives).
fn wirtinger_pair(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    z: &[Complex64],
    m: usize,
    h: f64,
) -> (Complex64, Complex64) {
    let central = |offset: Complex64| {
        let step = |sign: f64| {
            let mut p = z.to_vec();
            p[m] += offset * sign;
            f(&p)
        };
        (step(1.0) - step(-1.0)) / (2.0 * offset.norm())
    };
    let richardson = |offset: Complex64| {
        (central(offset) * 4.0 - central(offset * 2.0)) / 3.0
    };
    let dx = richardson(Complex64::new(h, 0.0));
    let dy = richardson(Complex64::new(0.0, h));
    ((dx - I * dy) * 0.5, (dx + I * dy) * 0.5)
}

/// Degree-2 scalar jet by finite differences, for callers who only have a
/// point evaluator. The cubic remainder bound cannot be measured from point
/// values, so the caller supplies it along with the validity radius.
pub fn finite_difference_scalar_jet(
    f: impl Fn(&[Complex64]) -> f64,
    z: &[Complex64],
    h: f64,
    cubic_bound: f64,
    r_jet: f64,
) -> Result<crate::morse::ScalarJet2, crate::morse::MorseError> {
    let n = z.len();
    let fc = |p: &[Complex64]| Complex64::new(f(p), 0.0);
    let value = f(z);
    let mut dz = DVector::zeros(n);
    for m in 0..n {
        dz[m] = wirtinger_pair(&fc, z, m, h).0;
    }
    let mut dzdz = DMatrix::zeros(n, n);
    let mut dzdzbar = DMatrix::zeros(n, n);
    for m in 0..n {
        for l in 0..n {
            let inner_hol = |p: &[Complex64]| wirtinger_pair(&fc, p, l, h).0;
            dzdz[(m, l)] = wirtinger_pair(&inner_hol, z, m, h).0;
            dzdzbar[(l, m)] = wirtinger_pair(&inner_hol, z, m, h).1;
        }
    }
    let dzdz = (&dzdz + dzdz.transpose()).scale(0.5);
    let dzdzbar = (&dzdzbar + dzdzbar.adjoint()).scale(0.5);
    crate::morse::ScalarJet2::new(
        value,
        dz,
        ComplexMatrix::symmetric(dzdz)?,
        ComplexMatrix::hermitian(dzdzbar)?,
        cubic_bound,
        r_jet,
    )
}

/// Coefficient jet by finite differences from a matrix-valued evaluator.
pub fn finite_difference_coefficient_jet(
    f: impl Fn(&[Complex64]) -> DMatrix<Complex64>,
    z: &[Complex64],
    h: f64,
) -> Result<CoefficientJet, FormError> {
    let n = z.len();
    let probe = f(z);
    if probe.nrows() != n || probe.ncols() != n {
        return Err(FormError::DimensionMismatch {
            left: probe.nrows(),
            right: n,
        });
    }
    let mut dz = vec![DMatrix::zeros(n, n); n];
    let mut dzbar = vec![DMatrix::zeros(n, n); n];
    let mut dzdzbar = vec![vec![DMatrix::zeros(n, n); n]; n];
    for j in 0..n {
        for k in 0..n {
            let entry = |p: &[Complex64]| f(p)[(j, k)];
            for m in 0..n {
                let (hol, anti) = wirtinger_pair(&entry, z, m, h);
                dz[m][(j, k)] = hol;
                dzbar[m][(j, k)] = anti;
                for l in 0..n {
                    let inner_anti = |p: &[Complex64]| wirtinger_pair(&entry, p, l, h).1;
                    dzdzbar[m][l][(j, k)] = wirtinger_pair(&inner_anti, z, m, h).0;
                }
            }
        }
    }
    // symmetrize the derivative consistency relations before validation so
    // the O(h⁴) truncation noise cannot trip the 1e-12 gate
    for m in 0..n {
        let sym = (&dz[m] + dzbar[m].adjoint()).scale(0.5);
        dzbar[m] = sym.adjoint();
        dz[m] = sym;
    }
    for m in 0..n {
        for l in m..n {
            let sym = (&dzdzbar[m][l] + dzdzbar[l][m].adjoint()).scale(0.5);
            dzdzbar[l][m] = sym.adjoint();
            dzdzbar[m][l] = sym;
        }
    }
    CoefficientJet::new(probe, dz, dzbar, dzdzbar)
}
