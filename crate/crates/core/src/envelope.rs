//! Hartogs figures, the wedge domain cut out by a quadratic minorant, the
//! tube torus around the real unit sphere, and the continuity-principle
//! sweep along the quadric slices ‖x‖² − ‖y‖² = t, (x, y) = 0.

use crate::morse::{classify_case, MorseCase, NormalForm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

/// Safety factor pulling the tube radius strictly inside 1/√δ₀.
pub const ETA_SAFETY: f64 = 1e-6;

/// Tolerance for the exact-origin check of the degenerate slice.
pub const ORIGIN_TOL: f64 = 1e-12;

/// Boundary-ring margins must match their closed form this tightly.
pub const RING_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("point outside the ambient polydisk: max coordinate modulus {norm}")]
    OutsidePolydisk { norm: f64 },
    #[error("point outside the unit ball: |z| = {norm}")]
    OutsideUnitBall { norm: f64 },
    #[error("wrong case: every direction is expanding, no residual disk factor remains")]
    WrongCase,
    #[error("scaling produced non-contracting delta0 = {delta0}; need 0 < delta0 < 1")]
    NonContracting { delta0: f64 },
    #[error("parameter {name} = {value} outside its admissible range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("slice parameter t = {t} outside [0, {max}]")]
    SliceOutOfRange { t: f64, max: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("quadric slices need n >= 2 to hold an orthogonal pair, got {n}")]
    TooSmall { n: usize },
}

/// Ambient data for the model figure: the annulus-or-core condition inside
/// the polydisk Δⁿ × Δᵏ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HartogsFigureParams {
    pub n: usize,
    pub k: usize,
    pub r: f64,
}

impl HartogsFigureParams {
    pub fn new(n: usize, k: usize, r: f64) -> Result<Self, EnvelopeError> {
        if n == 0 {
            return Err(EnvelopeError::BadParameter { name: "n", value: 0.0 });
        }
        if k == 0 {
            return Err(EnvelopeError::BadParameter { name: "k", value: 0.0 });
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(EnvelopeError::BadParameter { name: "r", value: r });
        }
        Ok(Self { n, k, r })
    }
}

/// Membership in the model figure: the z″ factor lies in the outer annulus,
/// or the z′ factor lies in the small core.
pub fn in_hartogs_figure(
    z_prime: &[Complex64],
    z_dblprime: &[Complex64],
    p: &HartogsFigureParams,
) -> Result<bool, EnvelopeError> {
    if z_prime.len() != p.n {
        return Err(EnvelopeError::DimensionMismatch {
            left: z_prime.len(),
            right: p.n,
        });
    }
    if z_dblprime.len() != p.k {
        return Err(EnvelopeError::DimensionMismatch {
            left: z_dblprime.len(),
            right: p.k,
        });
    }
    let sup = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let sup_p = sup(z_prime);
    let sup_d = sup(z_dblprime);
    if sup_p >= 1.0 || sup_d >= 1.0 {
        return Err(EnvelopeError::OutsidePolydisk {
            norm: sup_p.max(sup_d),
        });
    }
    let norm2 = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let annulus = {
        let nd = norm2(z_dblprime);
        nd > 1.0 - p.r && nd < 1.0
    };
    Ok(annulus || norm2(z_prime) < p.r)
}

/// The figure carved out of the unit ball by a mixed-signature normal form:
/// a wedge where the expanding part of the minorant dominates, glued to a
/// collar where the residual disk factor is large.
#[derive(Debug, Clone)]
pub struct Case1Figure {
    pub nf: NormalForm,
    pub delta: f64,
    pub delta1: f64,
    pub eps: f64,
}

impl Case1Figure {
    pub fn new(
        nf: NormalForm,
        delta: f64,
        delta1: f64,
        eps: f64,
    ) -> Result<Self, EnvelopeError> {
        if classify_case(&nf) == MorseCase::Case2 {
            return Err(EnvelopeError::WrongCase);
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(EnvelopeError::BadParameter { name: "eps", value: eps });
        }
        if !(delta > 0.0) {
            return Err(EnvelopeError::BadParameter { name: "delta", value: delta });
        }
        if !(delta1 > 0.0 && delta1 < 1.0) {
            return Err(EnvelopeError::BadParameter { name: "delta1", value: delta1 });
        }
        Ok(Self { nf, delta, delta1, eps })
    }

    /// φ(z) = Σ_{j≤q} [(2a_j − δ₁ + 1) x_j² − (2a_j + δ₁ − 1) y_j²]
    pub fn phi(&self, z: &[Complex64]) -> f64 {
        self.nf.a[..self.nf.q]
            .iter()
            .zip(z)
            .map(|(&a, c)| {
                (2.0 * a - self.delta1 + 1.0) * c.re * c.re
                    - (2.0 * a + self.delta1 - 1.0) * c.im * c.im
            })
            .sum()
    }

    /// ψ(z) = δ Σ_{j>q} |z_j|²
    pub fn psi(&self, z: &[Complex64]) -> f64 {
        self.delta * z[self.nf.q..].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Two-clause membership: (φ > 0 and ψ < 1) or (φ > −ε and ψ > ε).
pub fn case1_contains(f: &Case1Figure, z: &[Complex64]) -> Result<bool, EnvelopeError> {
    if classify_case(&f.nf) == MorseCase::Case2 {
        return Err(EnvelopeError::WrongCase);
    }
    if z.len() != f.nf.dimension() {
        return Err(EnvelopeError::DimensionMismatch {
            left: z.len(),
            right: f.nf.dimension(),
        });
    }
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm >= 1.0 {
        return Err(EnvelopeError::OutsideUnitBall { norm });
    }
    let phi = f.phi(z);
    let psi = f.psi(z);
    Ok((phi > 0.0 && psi < 1.0) || (phi > -f.eps && psi > f.eps))
}

/// Margin of membership in the wedge {‖x‖² > δ₀‖y‖²}.
pub fn d1plus_margin(delta0: f64, z: &[Complex64]) -> Result<f64, EnvelopeError> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(EnvelopeError::NonContracting { delta0 });
    }
    let x2: f64 = z.iter().map(|c| c.re * c.re).sum();
    let y2: f64 = z.iter().map(|c| c.im * c.im).sum();
    Ok(x2 - delta0 * y2)
}

/// Product of the real unit sphere with an imaginary ball of radius η.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TubeTorus {
    pub eta: f64,
}

impl TubeTorus {
    pub fn new(eta: f64) -> Result<Self, EnvelopeError> {
        if !(eta > 1.0) {
            return Err(EnvelopeError::BadParameter { name: "eta", value: eta });
        }
        Ok(Self { eta })
    }

    /// The widest tube that still sits strictly inside the wedge for the
    /// given contraction ratio: η = (1 − 1e−6)/√δ₀.
    pub fn for_contraction(delta0: f64) -> Result<Self, EnvelopeError> {
        if !(delta0 > 0.0 && delta0 < 1.0) {
            return Err(EnvelopeError::NonContracting { delta0 });
        }
        Self::new((1.0 - ETA_SAFETY) / delta0.sqrt())
    }
}

pub fn tube_torus_contains(t: &TubeTorus, z: &[Complex64]) -> bool {
    let x2: f64 = z.iter().map(|c| c.re * c.re).sum();
    let y2: f64 = z.iter().map(|c| c.im * c.im).sum();
    (x2.sqrt() - 1.0).abs() <= 1e-12 && y2.sqrt() <= t.eta
}

/// Contraction ratio δ₀ = max_j c_j/b_j induced by an all-expanding normal
/// form, with b_j = 2a_j − δ₁ + 1 and c_j = 2a_j + δ₁ − 1.
pub fn case2_scaling(nf: &NormalForm, delta1: f64) -> Result<f64, EnvelopeError> {
    if classify_case(nf) != MorseCase::Case2 {
        return Err(EnvelopeError::WrongCase);
    }
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(EnvelopeError::BadParameter {
            name: "delta1",
            value: delta1,
        });
    }
    let delta0 = nf
        .a
        .iter()
        .map(|&a| (2.0 * a + delta1 - 1.0) / (2.0 * a - delta1 + 1.0))
        .fold(0.0, f64::max);
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(EnvelopeError::NonContracting { delta0 });
    }
    Ok(delta0)
}

fn orthonormal_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn < 1e-8 {
            continue;
        }
        let v: Vec<f64> = v.iter().map(|x| x / vn).collect();
        let u_raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let dot: f64 = u_raw.iter().zip(&v).map(|(a, b)| a * b).sum();
        let u: Vec<f64> = u_raw.iter().zip(&v).map(|(a, b)| a - dot * b).collect();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if un < 1e-8 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|x| x / un).collect();
        return (u, v);
    }
}

/// One slice point z = a·u + i·b·v with a = √(t + b²); the construction puts
/// ‖x‖² − ‖y‖² = t and (x, y) = 0 by design.
fn quadric_point(rng: &mut ChaCha8Rng, n: usize, t: f64, b: f64) -> Vec<Complex64> {
    let (u, v) = orthonormal_pair(rng, n);
    let a = (t + b * b).sqrt();
    (0..n)
        .map(|j| Complex64::new(a * u[j], b * v[j]))
        .collect()
}

/// Stratified slice samples. Even indices take b = 0 (rank-one pairs, the
/// stratum containing the origin at t = 0); among odd indices, half pin
/// b to its maximum so the sample lands exactly on the boundary ring
/// ‖z‖ = R, the rest draw b uniformly.
fn quadric_samples(
    rng: &mut ChaCha8Rng,
    n: usize,
    t: f64,
    radius: f64,
    count: usize,
) -> Vec<(Vec<Complex64>, bool)> {
    let b_max = ((radius * radius - t) / 2.0).max(0.0).sqrt();
    (0..count)
        .map(|i| {
            let (b, ring) = match i % 4 {
                0 | 2 => (0.0, false),
                1 => (b_max, true),
                _ => (rng.random::<f64>() * b_max, false),
            };
            (quadric_point(rng, n, t, b), ring)
        })
        .collect()
}

pub fn sample_quadric_slice(
    n: usize,
    t: f64,
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>, EnvelopeError> {
    if n < 2 {
        return Err(EnvelopeError::TooSmall { n });
    }
    if !(radius > 0.0) {
        return Err(EnvelopeError::BadParameter {
            name: "radius",
            value: radius,
        });
    }
    if !(0.0..=radius * radius).contains(&t) {
        return Err(EnvelopeError::SliceOutOfRange {
            t,
            max: radius * radius,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(quadric_samples(&mut rng, n, t, radius, count)
        .into_iter()
        .map(|(z, _)| z)
        .collect())
}

/// Closed-form wedge margin on the boundary ring of a slice: with
/// ‖x‖² + ‖y‖² = R² and ‖x‖² − ‖y‖² = t,
/// the margin is [(1 − δ₀)R² + (1 + δ₀)t]/2.
pub fn boundary_ring_margin(t: f64, delta0: f64, radius: f64) -> Result<f64, EnvelopeError> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(EnvelopeError::NonContracting { delta0 });
    }
    if !(radius > 0.0) {
        return Err(EnvelopeError::BadParameter {
            name: "radius",
            value: radius,
        });
    }
    let r2 = radius * radius;
    if !(0.0..=r2).contains(&t) {
        return Err(EnvelopeError::SliceOutOfRange { t, max: r2 });
    }
    Ok(((1.0 - delta0) * r2 + (1.0 + delta0) * t) / 2.0)
}

/// Record of one full continuity-principle sweep: the slice family starts at
/// the top sphere (inside the wedge), keeps its boundary rings inside the
/// wedge the whole way down, and ends on a slice through the origin.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCertificate {
    pub delta0: f64,
    pub eta: f64,
    pub radius: f64,
    pub t_grid: Vec<f64>,
    pub samples_per_slice: usize,
    pub min_margin: f64,
    pub max_ring_mismatch: f64,
    pub origin_distance: f64,
    pub verdict: bool,
}

pub fn sweep_certificate(
    n: usize,
    delta0: f64,
    t_steps: usize,
    samples_per_slice: usize,
    seed: u64,
) -> Result<SweepCertificate, EnvelopeError> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(EnvelopeError::NonContracting { delta0 });
    }
    if n < 2 {
        return Err(EnvelopeError::TooSmall { n });
    }
    if t_steps < 2 {
        return Err(EnvelopeError::BadParameter {
            name: "t_steps",
            value: t_steps as f64,
        });
    }
    if samples_per_slice < 4 {
        return Err(EnvelopeError::BadParameter {
            name: "samples_per_slice",
            value: samples_per_slice as f64,
        });
    }
    let eta = TubeTorus::for_contraction(delta0)?.eta;
    let radius = (1.0 + eta * eta).sqrt();
    // r2 is reproduced bitwise wherever radius is squared downstream
    let r2 = radius * radius;
    // exact endpoints: t runs from R² down to 0
    let t_grid: Vec<f64> = (0..t_steps)
        .map(|i| r2 * (t_steps - 1 - i) as f64 / (t_steps - 1) as f64)
        .collect();

    let mut min_margin = f64::INFINITY;
    let mut max_ring_mismatch: f64 = 0.0;
    let mut origin_distance = f64::INFINITY;
    for (i, &t) in t_grid.iter().enumerate() {
        let slice_seed = seed ^ (i as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(slice_seed);
        for (z, ring) in quadric_samples(&mut rng, n, t, radius, samples_per_slice) {
            let margin = d1plus_margin(delta0, &z)?;
            if i == 0 {
                // the whole starting slice must sit inside the wedge
                min_margin = min_margin.min(margin);
            }
            if ring {
                min_margin = min_margin.min(margin);
                let closed = boundary_ring_margin(t, delta0, radius)?;
                max_ring_mismatch = max_ring_mismatch.max((margin - closed).abs());
            }
            if t == 0.0 {
                let dist = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                origin_distance = origin_distance.min(dist);
            }
        }
    }

    let verdict = min_margin > 0.0
        && origin_distance <= ORIGIN_TOL
        && max_ring_mismatch <= RING_MATCH_TOL;
    Ok(SweepCertificate {
        delta0,
        eta,
        radius,
        t_grid,
        samples_per_slice,
        min_margin,
        max_ring_mismatch,
        origin_distance,
        verdict,
    })
}
