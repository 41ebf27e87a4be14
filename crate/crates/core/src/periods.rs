//! Period integrals of d^c w over 3-spheres in ℂ², the spherical-shell
//! obstruction verdict, and the branch-count bound they imply.
//!
//! Quadrature runs over Hopf coordinates
//! z₁ = c₁ + ρ cosθ e^{iφ₁}, z₂ = c₂ + ρ sinθ e^{iφ₂},
//! Gauss-Legendre in θ ∈ [0, π/2] and periodic trapezoid in each φ.

use crate::forms::{dc_at, ddc_at, Form11, FormError};
use crate::quad::{gauss_legendre_on, Kahan};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error("period cycles live in two complex variables, got a form on {n}")]
    UnsupportedDimension { n: usize },
    #[error("radius {radius} must be positive")]
    BadRadius { radius: f64 },
    #[error("quadrature grid too coarse: {axis} needs at least {min} nodes, got {got}")]
    GridTooCoarse {
        axis: &'static str,
        min: usize,
        got: usize,
    },
    #[error("minimal cycle period {value} must be positive")]
    BadMinCyclePeriod { value: f64 },
    #[error("tolerance {value} must be nonnegative")]
    BadTolerance { value: f64 },
    #[error("shell radii must satisfy 0 < rho1 <= rho2, got {rho1} and {rho2}")]
    BadShell { rho1: f64, rho2: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Outward,
    Inward,
}

impl Orientation {
    /// The coordinate frame (T_θ, T_φ₁, T_φ₂) is negatively oriented as the
    /// boundary of the ball: det(ν, T_θ, T_φ₁, T_φ₂) = −ρ³ sinθ cosθ.
    fn frame_sign(self) -> f64 {
        match self {
            Orientation::Outward => -1.0,
            Orientation::Inward => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi1: usize,
    pub n_phi2: usize,
}

impl QuadratureGrid {
    pub const DEFAULT: Self = Self {
        n_theta: 64,
        n_phi1: 64,
        n_phi2: 64,
    };

    fn validate(&self) -> Result<(), PeriodError> {
        let check = |axis: &'static str, got: usize, min: usize| {
            if got < min {
                Err(PeriodError::GridTooCoarse { axis, min, got })
            } else {
                Ok(())
            }
        };
        check("theta", self.n_theta, 2)?;
        check("phi1", self.n_phi1, 4)?;
        check("phi2", self.n_phi2, 4)
    }

    /// One refinement step: every axis grows by half.
    fn refined(&self) -> Self {
        let up = |n: usize| (3 * n).div_ceil(2);
        Self {
            n_theta: up(self.n_theta),
            n_phi1: up(self.n_phi1),
            n_phi2: up(self.n_phi2),
        }
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// An oriented round 3-sphere in ℂ² with its quadrature resolution.
#[derive(Debug, Clone, Copy)]
pub struct SphereCycle {
    pub center: [Complex64; 2],
    pub radius: f64,
    pub orientation: Orientation,
    pub grid: QuadratureGrid,
}

impl SphereCycle {
    pub fn new(
        center: [Complex64; 2],
        radius: f64,
        orientation: Orientation,
        grid: QuadratureGrid,
    ) -> Result<Self, PeriodError> {
        if !(radius > 0.0) {
            return Err(PeriodError::BadRadius { radius });
        }
        grid.validate()?;
        Ok(Self {
            center,
            radius,
            orientation,
            grid,
        })
    }

    /// The unit sphere about the origin, outward, at default resolution.
    pub fn unit() -> Self {
        Self {
            center: [Complex64::new(0.0, 0.0); 2],
            radius: 1.0,
            orientation: Orientation::Outward,
            grid: QuadratureGrid::DEFAULT,
        }
    }

    /// Origin-centered sphere of the given radius, outward, default grid.
    pub fn origin(radius: f64) -> Result<Self, PeriodError> {
        Self::new(
            [Complex64::new(0.0, 0.0); 2],
            radius,
            Orientation::Outward,
            QuadratureGrid::DEFAULT,
        )
    }

    pub fn describe(&self) -> String {
        let side = match self.orientation {
            Orientation::Outward => "outward",
            Orientation::Inward => "inward",
        };
        format!(
            "S3(rho={}, center=({}, {}), {}, {}x{}x{})",
            self.radius,
            self.center[0],
            self.center[1],
            side,
            self.grid.n_theta,
            self.grid.n_phi1,
            self.grid.n_phi2
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodReport {
    pub value: f64,
    pub error_estimate: f64,
    pub cycle: String,
    pub form: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoObstruction,
    ShellObstruction,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionVerdict {
    pub period: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn tangent(a: Complex64, b: Complex64) -> DVector<f64> {
    DVector::from_column_slice(&[a.re, a.im, b.re, b.im])
}

fn raw_sphere_integral(
    w: &Form11,
    cycle: &SphereCycle,
    grid: &QuadratureGrid,
) -> Result<f64, PeriodError> {
    let rho = cycle.radius;
    let (thetas, tweights) = gauss_legendre_on(0.0, FRAC_PI_2, grid.n_theta);
    let wp1 = TAU / grid.n_phi1 as f64;
    let wp2 = TAU / grid.n_phi2 as f64;
    let mut acc = Kahan::default();
    for (&theta, &wt) in thetas.iter().zip(&tweights) {
        let (sin_t, cos_t) = theta.sin_cos();
        for i1 in 0..grid.n_phi1 {
            let e1 = Complex64::from_polar(1.0, TAU * i1 as f64 / grid.n_phi1 as f64);
            for i2 in 0..grid.n_phi2 {
                let e2 = Complex64::from_polar(1.0, TAU * i2 as f64 / grid.n_phi2 as f64);
                let z = [
                    cycle.center[0] + rho * cos_t * e1,
                    cycle.center[1] + rho * sin_t * e2,
                ];
                let t_theta = tangent(-rho * sin_t * e1, rho * cos_t * e2);
                let t_phi1 = tangent(Complex64::i() * rho * cos_t * e1, Complex64::new(0.0, 0.0));
                let t_phi2 = tangent(Complex64::new(0.0, 0.0), Complex64::i() * rho * sin_t * e2);
                let dc = dc_at(w, &z)?;
                let f = dc.evaluate(&[t_theta, t_phi1, t_phi2]);
                acc.add(wt * wp1 * wp2 * f);
            }
        }
    }
    Ok(acc.total())
}

/// ∫ over the cycle of d^c w, with a one-step grid-refinement error
/// estimate. The reported value comes from the cycle's own grid.
pub fn sphere_period(w: &Form11, cycle: &SphereCycle) -> Result<PeriodReport, PeriodError> {
    if w.dimension() != 2 {
        return Err(PeriodError::UnsupportedDimension { n: w.dimension() });
    }
    if !(cycle.radius > 0.0) {
        return Err(PeriodError::BadRadius {
            radius: cycle.radius,
        });
    }
    cycle.grid.validate()?;
    let sign = cycle.orientation.frame_sign();
    let base = sign * raw_sphere_integral(w, cycle, &cycle.grid)?;
    let fine = sign * raw_sphere_integral(w, cycle, &cycle.grid.refined())?;
    Ok(PeriodReport {
        value: base,
        error_estimate: (base - fine).abs(),
        cycle: cycle.describe(),
        form: w.label().unwrap_or("anonymous").to_string(),
    })
}

/// Branch-count bound: the number of sheets a one-dimensional analytic set
/// can have over a disc is at most |boundary period| / (smallest positive
/// cycle period), rounded down.
pub fn branch_bound(boundary_period: f64, min_cycle_period: f64) -> Result<u64, PeriodError> {
    if !(min_cycle_period > 0.0) {
        return Err(PeriodError::BadMinCyclePeriod {
            value: min_cycle_period,
        });
    }
    Ok((boundary_period.abs() / min_cycle_period).floor() as u64)
}

/// A nonzero d^c w period over the contour certifies that the contour cannot
/// bound in the form's domain.
pub fn plateau_obstruction(
    w: &Form11,
    contour: &SphereCycle,
    tol: f64,
) -> Result<ObstructionVerdict, PeriodError> {
    if !(tol >= 0.0) {
        return Err(PeriodError::BadTolerance { value: tol });
    }
    let report = sphere_period(w, contour)?;
    let verdict = if report.value.abs() > tol {
        Verdict::ShellObstruction
    } else {
        Verdict::NoObstruction
    };
    Ok(ObstructionVerdict {
        period: report.value,
        tolerance: tol,
        verdict,
    })
}

/// Quadrature of dd^c w over the shell ρ₁ ≤ ‖z − center‖ ≤ ρ₂ with the
/// standard orientation of ℂ², in spherical coordinates (r, θ, φ₁, φ₂).
/// By Stokes this equals period(ρ₂) − period(ρ₁) for outward spheres.
pub fn shell_integral_ddc(
    w: &Form11,
    center: [Complex64; 2],
    rho1: f64,
    rho2: f64,
    n_radial: usize,
    angular: &QuadratureGrid,
) -> Result<f64, PeriodError> {
    if w.dimension() != 2 {
        return Err(PeriodError::UnsupportedDimension { n: w.dimension() });
    }
    if !(rho1 > 0.0 && rho1 <= rho2) {
        return Err(PeriodError::BadShell { rho1, rho2 });
    }
    if n_radial < 2 {
        return Err(PeriodError::GridTooCoarse {
            axis: "radial",
            min: 2,
            got: n_radial,
        });
    }
    angular.validate()?;
    let (radii, rweights) = gauss_legendre_on(rho1, rho2, n_radial);
    let (thetas, tweights) = gauss_legendre_on(0.0, FRAC_PI_2, angular.n_theta);
    let wp1 = TAU / angular.n_phi1 as f64;
    let wp2 = TAU / angular.n_phi2 as f64;
    let mut acc = Kahan::default();
    for (&rho, &wr) in radii.iter().zip(&rweights) {
        for (&theta, &wt) in thetas.iter().zip(&tweights) {
            let (sin_t, cos_t) = theta.sin_cos();
            for i1 in 0..angular.n_phi1 {
                let e1 = Complex64::from_polar(1.0, TAU * i1 as f64 / angular.n_phi1 as f64);
                for i2 in 0..angular.n_phi2 {
                    let e2 = Complex64::from_polar(1.0, TAU * i2 as f64 / angular.n_phi2 as f64);
                    let z = [center[0] + rho * cos_t * e1, center[1] + rho * sin_t * e2];
                    let t_r = tangent(cos_t * e1, sin_t * e2);
                    let t_theta = tangent(-rho * sin_t * e1, rho * cos_t * e2);
                    let t_phi1 =
                        tangent(Complex64::i() * rho * cos_t * e1, Complex64::new(0.0, 0.0));
                    let t_phi2 =
                        tangent(Complex64::new(0.0, 0.0), Complex64::i() * rho * sin_t * e2);
                    let ddc = ddc_at(w, &z)?;
                    let f = ddc.evaluate(&[t_r, t_theta, t_phi1, t_phi2]);
                    // the coordinate frame is negatively oriented, as for the
                    // sphere frame above
                    acc.add(-wr * wt * wp1 * wp2 * f);
                }
            }
        }
    }
    Ok(acc.total())
}
