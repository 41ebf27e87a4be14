//! Reduction of a strictly plurisubharmonic Morse germ to the canonical
//! quadratic shape a_j (z_j² + z̄_j²) summed against the unit Levi form, with
//! the invariants (a_1 ≥ … ≥ a_n; q) and a sampled lower-bound certificate
//! for the attached quadratic minorant.

use crate::czlinalg::{
    self, ComplexMatrix, LinalgError, Symmetry,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Gradient magnitude above which a jet is rejected as non-critical.
pub const CRITICAL_TOL: f64 = 1e-10;

/// Half-integrality window flagged as a degenerate Morse direction.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Tie-break slack for counting a_j ≥ 1/2; absorbs roundoff on invariants
/// that are exactly one half.
pub const Q_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MorseError {
    #[error("not a critical point: |dρ| = {grad_norm:.3e} exceeds {CRITICAL_TOL:.0e}")]
    NotCriticalPoint { grad_norm: f64 },
    #[error("degenerate Morse point: an invariant sits within {DEGENERACY_TOL:.0e} of 1/2")]
    DegenerateMorsePoint,
    #[error("minorant parameters rejected: {reason}")]
    InvalidMinorantParams { reason: String },
    #[error("ball radius {radius} unsupported: quadratic gap {gap:.3e} cannot absorb the cubic remainder (needs {needed:.3e}); worst sampled point {witness:?}")]
    RadiusTooAggressive {
        radius: f64,
        gap: f64,
        needed: f64,
        witness: Option<Vec<Complex64>>,
    },
    #[error("minorant violated at {point:?}: function lower bound {rho_low:.6e} < minorant {rho1:.6e}")]
    MinorantViolation {
        point: Vec<Complex64>,
        rho_low: f64,
        rho1: f64,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Degree-2 jet of a real-valued function on ℂⁿ at a base point.
///
/// `dzdz` stores ∂²ρ/∂z_j∂z_k and `dzdzbar` stores the Levi form
/// ∂²ρ/∂z_j∂z̄_k; the z̄-derivatives are their conjugates because ρ is real.
/// `cubic_bound` is a constant M with |ρ(z) − jet(z)| ≤ M‖z‖³ on the ball
/// ‖z‖ ≤ `r_jet`.
#[derive(Debug, Clone)]
pub struct ScalarJet2 {
    value: f64,
    dz: DVector<Complex64>,
    dzdz: ComplexMatrix,
    dzdzbar: ComplexMatrix,
    cubic_bound: f64,
    r_jet: f64,
}

impl ScalarJet2 {
    pub fn new(
        value: f64,
        dz: DVector<Complex64>,
        dzdz: ComplexMatrix,
        dzdzbar: ComplexMatrix,
        cubic_bound: f64,
        r_jet: f64,
    ) -> Result<Self, MorseError> {
        if dzdz.symmetry() != Symmetry::Symmetric {
            return Err(LinalgError::WrongTag {
                expected: Symmetry::Symmetric,
                got: dzdz.symmetry(),
            }
            .into());
        }
        if dzdzbar.symmetry() != Symmetry::Hermitian {
            return Err(LinalgError::WrongTag {
                expected: Symmetry::Hermitian,
                got: dzdzbar.symmetry(),
            }
            .into());
        }
        if dz.len() != dzdz.dim() {
            return Err(MorseError::DimensionMismatch {
                left: dz.len(),
                right: dzdz.dim(),
            });
        }
        if dzdz.dim() != dzdzbar.dim() {
            return Err(MorseError::DimensionMismatch {
                left: dzdz.dim(),
                right: dzdzbar.dim(),
            });
        }
        if !(cubic_bound >= 0.0 && cubic_bound.is_finite()) {
            return Err(MorseError::InvalidMinorantParams {
                reason: format!("cubic bound {cubic_bound} must be a finite nonnegative real"),
            });
        }
        if !(r_jet > 0.0) {
            return Err(MorseError::InvalidMinorantParams {
                reason: format!("jet ball radius {r_jet} must be positive"),
            });
        }
        Ok(Self {
            value,
            dz,
            dzdz,
            dzdzbar,
            cubic_bound,
            r_jet,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dz.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dz(&self) -> &DVector<Complex64> {
        &self.dz
    }

    pub fn dzdz(&self) -> &ComplexMatrix {
        &self.dzdz
    }

    pub fn dzdzbar(&self) -> &ComplexMatrix {
        &self.dzdzbar
    }

    pub fn cubic_bound(&self) -> f64 {
        self.cubic_bound
    }

    pub fn r_jet(&self) -> f64 {
        self.r_jet
    }

    /// Evaluates the degree-2 Taylor polynomial at z. Real by construction.
    pub fn quadratic_value(&self, z: &[Complex64]) -> f64 {
        let n = self.dimension();
        assert_eq!(z.len(), n, "point dimension mismatch");
        let mut linear = Complex64::new(0.0, 0.0);
        let mut quad_hol = Complex64::new(0.0, 0.0);
        let mut levi = 0.0;
        for j in 0..n {
            linear += self.dz[j] * z[j];
            for k in 0..n {
                quad_hol += self.dzdz.matrix()[(j, k)] * z[j] * z[k];
                levi += (self.dzdzbar.matrix()[(j, k)] * z[j] * z[k].conj()).re;
            }
        }
        self.value + 2.0 * linear.re + quad_hol.re + levi
    }
}

/// Result of the critical-point reduction: invariants a (descending), the
/// count q of directions with a_j ≥ 1/2, and the composed substitution
/// z = C_total z′ realizing the canonical quadratic.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub a: Vec<f64>,
    pub q: usize,
    pub c_total: DMatrix<Complex64>,
    pub degenerate_flags: Vec<bool>,
}

impl NormalForm {
    pub fn dimension(&self) -> usize {
        self.a.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate_flags.iter().any(|&f| f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorseCase {
    Case1,
    Case2,
}

/// Parameters (δ, δ₁, ball radius) for the quadratic minorant attached to a
/// normal form. Admissibility depends on the invariants a and q, so they are
/// revalidated against the normal form at every use.
#[derive(Debug, Clone, Copy)]
pub struct MinorantParams {
    pub delta: f64,
    pub delta1: f64,
    pub radius: f64,
}

impl MinorantParams {
    pub fn validate(&self, nf: &NormalForm) -> Result<(), MorseError> {
        let reject = |reason: String| Err(MorseError::InvalidMinorantParams { reason });
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return reject(format!("delta {} must be positive", self.delta));
        }
        if !(self.delta1 > 0.0 && self.delta1.is_finite()) {
            return reject(format!("delta1 {} must be positive", self.delta1));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return reject(format!("radius {} must be positive", self.radius));
        }
        let tail_gap = nf.a[nf.q..]
            .iter()
            .map(|a| 1.0 - 2.0 * a)
            .fold(f64::INFINITY, f64::min);
        if !(self.delta1 < tail_gap) {
            return reject(format!(
                "delta1 {} must fall below the smallest tail gap 1 - 2a_j = {tail_gap:.6}",
                self.delta1
            ));
        }
        if !(self.delta <= tail_gap - self.delta1) {
            return reject(format!(
                "delta {} exceeds the admissible bound {:.6}",
                self.delta,
                tail_gap - self.delta1
            ));
        }
        Ok(())
    }
}

/// The Levi part of the germ, Σ_{jk} H_{jk} z_j z̄_k, rewritten as the
/// sesquilinear form z^H G z: G is the entrywise conjugate of H.
pub fn levi_quadratic_form(h: &ComplexMatrix) -> Result<ComplexMatrix, MorseError> {
    Ok(ComplexMatrix::hermitian(h.matrix().map(|z| z.conj()))?)
}

/// Reads the holomorphic quadratic coefficient matrix and the Levi form off
/// a critical jet: Q = dzdz/2 and H = dzdzbar.
pub fn extract_quadratic_germ(
    jet: &ScalarJet2,
) -> Result<(ComplexMatrix, ComplexMatrix), MorseError> {
    let grad_norm = jet.dz.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if grad_norm > CRITICAL_TOL {
        return Err(MorseError::NotCriticalPoint { grad_norm });
    }
    let q = ComplexMatrix::symmetric(jet.dzdz.matrix().scale(0.5))?;
    Ok((q, jet.dzdzbar.clone()))
}

/// Reduces a strictly plurisubharmonic critical jet to canonical shape.
///
/// The Levi form is brought to the identity, the holomorphic quadratic part
/// is Takagi-factorized in the new frame, and the conjugate unitary change
/// diagonalizes it with nonnegative coefficients while keeping the Levi form
/// untouched. Descending Takagi values make the renumbering the identity.
pub fn normalize_critical_point(jet: &ScalarJet2) -> Result<NormalForm, MorseError> {
    let (q_mat, h) = extract_quadratic_germ(jet)?;
    // The Levi term pairs z_j with z̄_k, so as a sesquilinear form z^H G z
    // its matrix is the conjugate of the stored derivative matrix.
    let g = levi_quadratic_form(&h)?;
    let levi = czlinalg::levi_normalize(&g)?;
    let q1 = czlinalg::transform_quadratic(&q_mat, &levi.c)?;
    let takagi = czlinalg::takagi_factorize(&q1)?;
    let c2 = takagi.u.map(|z| z.conj());
    let c_total = &levi.c * &c2;
    let a: Vec<f64> = takagi.d.iter().copied().collect();
    let q = a.iter().filter(|&&v| v >= 0.5 - Q_TIE_TOL).count();
    let degenerate_flags: Vec<bool> = a.iter().map(|v| (v - 0.5).abs() <= DEGENERACY_TOL).collect();
    Ok(NormalForm {
        a,
        q,
        c_total,
        degenerate_flags,
    })
}

/// Number of negative directions of the real Hessian: in canonical
/// coordinates the Hessian is diagonal with entries 1 + 2a_j on x_j and
/// 1 − 2a_j on y_j, so the index is #{j : a_j > 1/2}.
pub fn real_hessian_index(nf: &NormalForm) -> Result<usize, MorseError> {
    if nf.is_degenerate() {
        return Err(MorseError::DegenerateMorsePoint);
    }
    Ok(nf.a.iter().filter(|&&v| v > 0.5).count())
}

pub fn classify_case(nf: &NormalForm) -> MorseCase {
    if nf.q == nf.dimension() {
        MorseCase::Case2
    } else {
        MorseCase::Case1
    }
}

/// Evaluates the quadratic minorant
/// Σ_{j≤q} [(2a_j − δ₁ + 1) x_j² − (2a_j + δ₁ − 1) y_j²] + δ Σ_{j>q} |z_j|²
/// at a point in normalized coordinates.
pub fn minorant_value(
    nf: &NormalForm,
    params: &MinorantParams,
    z: &[Complex64],
) -> Result<f64, MorseError> {
    params.validate(nf)?;
    if z.len() != nf.dimension() {
        return Err(MorseError::DimensionMismatch {
            left: z.len(),
            right: nf.dimension(),
        });
    }
    let mut total = 0.0;
    for (j, &a) in nf.a.iter().enumerate() {
        let x = z[j].re;
        let y = z[j].im;
        if j < nf.q {
            total += (2.0 * a - params.delta1 + 1.0) * x * x
                - (2.0 * a + params.delta1 - 1.0) * y * y;
        } else {
            total += params.delta * (x * x + y * y);
        }
    }
    Ok(total)
}

/// Sampled certificate for ρ ≥ ρ₁ on the ball ‖z‖ ≤ radius.
#[derive(Debug, Clone)]
pub struct MarginReport {
    pub min_margin: f64,
    pub worst_point: Vec<Complex64>,
    pub samples: usize,
    pub gap_coefficient: f64,
    pub effective_cubic_bound: f64,
}

/// Checks the minorant against the worst function compatible with the jet:
/// at each sample the quadratic value minus M_eff ‖z‖³ must dominate the
/// minorant, where M_eff rescales the jet's cubic bound through the frame
/// change. A precheck requires the quadratic gap coefficient to absorb the
/// remainder on the whole ball before any sampling is trusted.
pub fn verify_minorant(
    jet: &ScalarJet2,
    nf: &NormalForm,
    params: &MinorantParams,
    samples: usize,
    seed: u64,
) -> Result<MarginReport, MorseError> {
    params.validate(nf)?;
    let n = nf.dimension();
    if jet.dimension() != n {
        return Err(MorseError::DimensionMismatch {
            left: jet.dimension(),
            right: n,
        });
    }

    let c_norm = operator_norm(&nf.c_total);
    let m_eff = jet.cubic_bound * c_norm.powi(3);
    if params.radius * c_norm > jet.r_jet {
        return Err(MorseError::InvalidMinorantParams {
            reason: format!(
                "radius {} leaves the jet ball: {} * {} > {}",
                params.radius, params.radius, c_norm, jet.r_jet
            ),
        });
    }

    let tail_gap = nf.a[nf.q..]
        .iter()
        .map(|a| 1.0 - 2.0 * a - params.delta)
        .fold(f64::INFINITY, f64::min);
    let gap_coefficient = params.delta1.min(tail_gap);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |radius: f64| -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let r = radius * rng.random::<f64>().powf(1.0 / (2.0 * n as f64));
        for z in &mut v {
            *z *= r / norm;
        }
        v
    };

    if gap_coefficient < m_eff * params.radius {
        // The ball is too large for the remainder budget; hunt for a point
        // that exhibits the failure concretely.
        let mut witness = None;
        let mut worst = f64::INFINITY;
        for _ in 0..samples.max(64) {
            let z = draw(params.radius);
            let margin = lower_margin(jet, nf, params, &z, m_eff)?;
            if margin < worst {
                worst = margin;
                if margin < 0.0 {
                    witness = Some(z);
                }
            }
        }
        return Err(MorseError::RadiusTooAggressive {
            radius: params.radius,
            gap: gap_coefficient,
            needed: m_eff * params.radius,
            witness,
        });
    }

    let mut min_margin = f64::INFINITY;
    let mut worst_point = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..samples {
        let z = draw(params.radius);
        let margin = lower_margin(jet, nf, params, &z, m_eff)?;
        if margin < min_margin {
            min_margin = margin;
            worst_point = z.clone();
        }
        if margin < 0.0 {
            let rho1 = minorant_value(nf, params, &z)?;
            return Err(MorseError::MinorantViolation {
                point: z,
                rho_low: margin + rho1,
                rho1,
            });
        }
    }
    Ok(MarginReport {
        min_margin,
        worst_point,
        samples,
        gap_coefficient,
        effective_cubic_bound: m_eff,
    })
}

fn lower_margin(
    jet: &ScalarJet2,
    nf: &NormalForm,
    params: &MinorantParams,
    z: &[Complex64],
    m_eff: f64,
) -> Result<f64, MorseError> {
    let n = nf.dimension();
    // evaluate the jet in its own frame through z = C_total z'
    let zp = DVector::from_column_slice(z);
    let original = &nf.c_total * &zp;
    let quad = jet.quadratic_value(original.as_slice()) - jet.value();
    let norm = zp.norm();
    let rho_low = quad - m_eff * norm.powi(3);
    let rho1 = minorant_value(nf, params, z)?;
    let _ = n;
    Ok(rho_low - rho1)
}

fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
