//! Graph volumes of holomorphic disc families, boundedness scans with the
//! log-divergence diagnostic, the minimal-cycle volume threshold, and the
//! pairwise volume-gap check.
//!
//! For a disc ζ ↦ f_s(ζ) the graph volume is area + ∫ f_s^* w, computed on
//! a polar grid whose radial panels halve geometrically toward ζ = 0.

use crate::forms::{builtin_form, Form11, FormError};
use crate::quad::{gauss_legendre_on, Kahan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use thiserror::Error;

/// Largest Cauchy-Riemann residual a disc family's map may show.
pub const HOLOMORPHY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("inner cutoff {r_cut} must lie in [0, 1)")]
    BadCutoff { r_cut: f64 },
    #[error("annulus radii must satisfy 0 <= inner < outer <= 1, got {inner} and {outer}")]
    BadAnnulus { inner: f64, outer: f64 },
    #[error("quadrature grid too coarse: {axis} needs at least {min}, got {got}")]
    GridTooCoarse {
        axis: &'static str,
        min: usize,
        got: usize,
    },
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("sample count must be positive")]
    EmptySample,
    #[error("no grid parameters within radius {radius} of the base point")]
    EmptyNeighborhood { radius: f64 },
    #[error("gap threshold {value} must be positive")]
    BadNu { value: f64 },
    #[error("volume table is empty")]
    EmptyTable,
    #[error("table entries must be positive, got ({subset_volume}, {min_cycle_volume})")]
    NonpositiveEntry {
        subset_volume: f64,
        min_cycle_volume: f64,
    },
    #[error("map is not holomorphic: Cauchy-Riemann residual {residual} at s = {s}")]
    NotHolomorphic { residual: f64, s: Complex64 },
    #[error("map image at zeta = {zeta} hits the form singularity (image radius {radius})")]
    SingularImage { zeta: Complex64, radius: f64 },
    #[error("map produced a point in {got} variables, target form lives in {want}")]
    MapDimension { got: usize, want: usize },
    #[error("unknown disc family '{name}'")]
    UnknownFamily { name: String },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Value and ζ-derivative of a disc map at one point.
#[derive(Debug, Clone)]
pub struct DiscMapJet {
    pub value: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
}

type MapOracle = dyn Fn(Complex64, Complex64) -> Result<DiscMapJet, VolumeError> + Send + Sync;

/// A family of holomorphic discs in the domain of a fixed (1,1)-form,
/// indexed by a finite parameter grid.
#[derive(Clone)]
pub struct DiscFamily {
    grid: Vec<Complex64>,
    target: Form11,
    r_cut: f64,
    label: Option<String>,
    oracle: Arc<MapOracle>,
}

impl std::fmt::Debug for DiscFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscFamily")
            .field("grid", &self.grid)
            .field("target", &self.target)
            .field("r_cut", &self.r_cut)
            .field("label", &self.label)
            .finish()
    }
}

impl DiscFamily {
    /// Rejects maps that fail the Cauchy-Riemann check at the first grid
    /// parameter.
    pub fn new(
        grid: Vec<Complex64>,
        target: Form11,
        r_cut: f64,
        oracle: impl Fn(Complex64, Complex64) -> Result<DiscMapJet, VolumeError>
            + Send
            + Sync
            + 'static,
    ) -> Result<Self, VolumeError> {
        if !(0.0..1.0).contains(&r_cut) {
            return Err(VolumeError::BadCutoff { r_cut });
        }
        let fam = Self {
            grid,
            target,
            r_cut,
            label: None,
            oracle: Arc::new(oracle),
        };
        if let Some(&s) = fam.grid.first() {
            let residual = holomorphy_residual(&fam, s, 16, 0x5eed)?;
            if !(residual <= HOLOMORPHY_TOL) {
                return Err(VolumeError::NotHolomorphic { residual, s });
            }
        }
        Ok(fam)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn grid(&self) -> &[Complex64] {
        &self.grid
    }

    pub fn target(&self) -> &Form11 {
        &self.target
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn map_jet(&self, s: Complex64, zeta: Complex64) -> Result<DiscMapJet, VolumeError> {
        let jet = (self.oracle)(s, zeta)?;
        let want = self.target.dimension();
        if jet.value.len() != want || jet.derivative.len() != want {
            return Err(VolumeError::MapDimension {
                got: jet.value.len().max(jet.derivative.len()),
                want,
            });
        }
        Ok(jet)
    }
}

/// Max over random disc samples of the Cauchy-Riemann residual |∂f/∂ζ̄| and
/// the mismatch between the oracle derivative and a finite-difference ∂f/∂ζ.
pub fn holomorphy_residual(
    fam: &DiscFamily,
    s: Complex64,
    count: usize,
    seed: u64,
) -> Result<f64, VolumeError> {
    if count == 0 {
        return Err(VolumeError::EmptySample);
    }
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let u: f64 = rng.random();
        let r = (fam.r_cut * fam.r_cut + u * (1.0 - fam.r_cut * fam.r_cut))
            .sqrt()
            .min(1.0 - 2.0 * h);
        let angle = TAU * rng.random::<f64>();
        let zeta = Complex64::from_polar(r, angle);
        let jet = (fam.oracle)(s, zeta)?;
        let px = (fam.oracle)(s, zeta + h)?.value;
        let mx = (fam.oracle)(s, zeta - h)?.value;
        let py = (fam.oracle)(s, zeta + Complex64::new(0.0, h))?.value;
        let my = (fam.oracle)(s, zeta - Complex64::new(0.0, h))?.value;
        for j in 0..jet.value.len().min(px.len()) {
            let fx = (px[j] - mx[j]) / (2.0 * h);
            let fy = (py[j] - my[j]) / (2.0 * h);
            let dbar = 0.5 * (fx + Complex64::i() * fy);
            let dz = 0.5 * (fx - Complex64::i() * fy);
            worst = worst
                .max(dbar.norm())
                .max((dz - jet.derivative[j]).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscQuadrature {
    /// Gauss-Legendre nodes per radial panel.
    pub n_radial: usize,
    /// Periodic trapezoid nodes per circle.
    pub n_angular: usize,
    /// Geometric panel subdivisions (ratio 1/2) toward ζ = 0.
    pub levels: usize,
}

impl DiscQuadrature {
    pub const DEFAULT: Self = Self {
        n_radial: 16,
        n_angular: 32,
        levels: 20,
    };

    fn validate(&self) -> Result<(), VolumeError> {
        let check = |axis: &'static str, got: usize, min: usize| {
            if got < min {
                Err(VolumeError::GridTooCoarse { axis, min, got })
            } else {
                Ok(())
            }
        };
        check("radial", self.n_radial, 2)?;
        check("angular", self.n_angular, 4)?;
        check("levels", self.levels, 1)
    }

    fn refined(&self) -> Self {
        let up = |n: usize| (3 * n).div_ceil(2);
        Self {
            n_radial: up(self.n_radial),
            n_angular: up(self.n_angular),
            levels: self.levels,
        }
    }
}

impl Default for DiscQuadrature {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Radial panels covering [inner, outer], halving toward zero.
fn radial_panels(inner: f64, outer: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut panels = Vec::new();
    let mut hi = outer;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        if lo <= inner {
            panels.push((inner, hi));
            return panels;
        }
        panels.push((lo, hi));
        hi = lo;
    }
    panels.push((inner, hi));
    panels
}

/// Pullback of the target form under the disc map, as a density against the
/// Euclidean area element: 2 Σ w_{jk̄}(f(ζ)) f_j'(ζ) conj(f_k'(ζ)).
fn pullback_density(fam: &DiscFamily, s: Complex64, zeta: Complex64) -> Result<f64, VolumeError> {
    let jet = fam.map_jet(s, zeta)?;
    let w = match fam.target.jet_at(&jet.value) {
        Ok(w) => w,
        Err(FormError::SingularPoint { radius }) => {
            return Err(VolumeError::SingularImage { zeta, radius })
        }
        Err(e) => return Err(e.into()),
    };
    let m = w.value();
    let n = jet.value.len();
    let mut c = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            c += m[(j, k)] * jet.derivative[j] * jet.derivative[k].conj();
        }
    }
    Ok(2.0 * c.re)
}

fn pullback_integral(
    fam: &DiscFamily,
    s: Complex64,
    inner: f64,
    outer: f64,
    spec: &DiscQuadrature,
) -> Result<f64, VolumeError> {
    let wa = TAU / spec.n_angular as f64;
    let mut acc = Kahan::default();
    for (lo, hi) in radial_panels(inner, outer, spec.levels) {
        let (radii, weights) = gauss_legendre_on(lo, hi, spec.n_radial);
        for (&r, &wr) in radii.iter().zip(&weights) {
            for k in 0..spec.n_angular {
                let zeta = Complex64::from_polar(r, TAU * k as f64 / spec.n_angular as f64);
                let density = pullback_density(fam, s, zeta)?;
                acc.add(wr * wa * r * density);
            }
        }
    }
    Ok(acc.total())
}

/// Graph volume of one disc of the family over the annulus
/// inner ≤ |ζ| ≤ outer: area plus the pullback integral, with a
/// grid-refinement error estimate.
pub fn annulus_graph_volume(
    fam: &DiscFamily,
    s: Complex64,
    inner: f64,
    outer: f64,
    spec: &DiscQuadrature,
) -> Result<(f64, f64), VolumeError> {
    if !(0.0 <= inner && inner < outer && outer <= 1.0) {
        return Err(VolumeError::BadAnnulus { inner, outer });
    }
    spec.validate()?;
    let area = PI * (outer * outer - inner * inner);
    let base = area + pullback_integral(fam, s, inner, outer, spec)?;
    let fine = area + pullback_integral(fam, s, inner, outer, &spec.refined())?;
    Ok((base, (base - fine).abs()))
}

/// Graph volume over the family's own (cut) disc.
pub fn disc_graph_volume(
    fam: &DiscFamily,
    s: Complex64,
    spec: &DiscQuadrature,
) -> Result<(f64, f64), VolumeError> {
    annulus_graph_volume(fam, s, fam.r_cut, 1.0, spec)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeEntry {
    /// Parameter as (re, im).
    pub s: [f64; 2],
    pub volume: f64,
    pub error: f64,
}

impl VolumeEntry {
    pub fn parameter(&self) -> Complex64 {
        Complex64::new(self.s[0], self.s[1])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeScan {
    pub entries: Vec<VolumeEntry>,
    pub c0: f64,
    pub bounded: bool,
    /// Fitted slope of volume against log(1/|s|) over the smaller-|s| half
    /// of the grid; None when the fit is degenerate.
    pub divergence_slope: Option<f64>,
}

fn divergence_slope(entries: &[VolumeEntry]) -> Option<f64> {
    let mut sorted: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.parameter().norm(), e.volume))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.truncate(entries.len().div_ceil(2));
    if sorted.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|(r, _)| *r > 0.0)
        .map(|&(r, v)| ((1.0 / r).ln(), v))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let xbar = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    if sxx <= 1e-18 {
        return None;
    }
    Some(sxy / sxx)
}

/// Volumes across the whole parameter grid, checked against the bound c0.
pub fn family_volume_scan(fam: &DiscFamily, c0: f64) -> Result<VolumeScan, VolumeError> {
    if fam.grid.is_empty() {
        return Err(VolumeError::EmptyGrid);
    }
    let spec = DiscQuadrature::DEFAULT;
    let mut entries = Vec::with_capacity(fam.grid.len());
    for &s in &fam.grid {
        let (volume, error) = disc_graph_volume(fam, s, &spec)?;
        entries.push(VolumeEntry {
            s: [s.re, s.im],
            volume,
            error,
        });
    }
    let bounded = entries.iter().all(|e| e.volume <= c0);
    let divergence_slope = divergence_slope(&entries);
    Ok(VolumeScan {
        entries,
        c0,
        bounded,
        divergence_slope,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NuEntry {
    /// vol(A_{q−j}): volume of the candidate compact analytic subset.
    pub subset_volume: f64,
    /// ν_j: caller-supplied minimal volume of j-dimensional compact
    /// analytic subsets.
    pub min_cycle_volume: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NuTable {
    pub entries: Vec<NuEntry>,
}

/// ν = min over the table of subset_volume · min_cycle_volume.
pub fn nu_threshold(table: &NuTable) -> Result<f64, VolumeError> {
    if table.entries.is_empty() {
        return Err(VolumeError::EmptyTable);
    }
    let mut nu = f64::INFINITY;
    for e in &table.entries {
        if !(e.subset_volume > 0.0 && e.min_cycle_volume > 0.0) {
            return Err(VolumeError::NonpositiveEntry {
                subset_volume: e.subset_volume,
                min_cycle_volume: e.min_cycle_volume,
            });
        }
        nu = nu.min(e.subset_volume * e.min_cycle_volume);
    }
    Ok(nu)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapReport {
    /// True iff every pair in the window keeps |vol₁ − vol₂| < ν/2.
    pub pass: bool,
    pub max_gap: f64,
    pub pairs: usize,
}

/// Checks the pairwise volume-gap condition over the grid parameters lying
/// within the given radius of s0.
pub fn lemma15_gap_check(
    scan: &VolumeScan,
    nu: f64,
    s0: Complex64,
    radius: f64,
) -> Result<GapReport, VolumeError> {
    if !(nu > 0.0) {
        return Err(VolumeError::BadNu { value: nu });
    }
    let window: Vec<&VolumeEntry> = scan
        .entries
        .iter()
        .filter(|e| (e.parameter() - s0).norm() <= radius)
        .collect();
    if window.is_empty() {
        return Err(VolumeError::EmptyNeighborhood { radius });
    }
    let mut max_gap = 0.0f64;
    let mut pairs = 0usize;
    for (i, a) in window.iter().enumerate() {
        for b in &window[i + 1..] {
            max_gap = max_gap.max((a.volume - b.volume).abs());
            pairs += 1;
        }
    }
    Ok(GapReport {
        pass: max_gap < 0.5 * nu,
        max_gap,
        pairs,
    })
}

pub const BUILTIN_FAMILIES: [&str; 2] = ["constant", "hopf-inclusion"];

/// Disc families addressable by name: "constant" maps every ζ to a fixed
/// point with the flat metric as target; "hopf-inclusion" is
/// f_s(ζ) = (ζ, s) into the invariant metric on punctured ℂ².
pub fn builtin_family(name: &str, grid: Vec<Complex64>) -> Result<DiscFamily, VolumeError> {
    match name {
        "constant" => DiscFamily::new(grid, builtin_form("euclidean", 2)?, 0.0, |_, _| {
            Ok(DiscMapJet {
                value: vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)],
                derivative: vec![Complex64::new(0.0, 0.0); 2],
            })
        })
        .map(|f| f.with_label(name)),
        "hopf-inclusion" => DiscFamily::new(grid, builtin_form("hopf2", 2)?, 0.0, |s, zeta| {
            Ok(DiscMapJet {
                value: vec![zeta, s],
                derivative: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            })
        })
        .map(|f| f.with_label(name)),
        _ => Err(VolumeError::UnknownFamily {
            name: name.to_string(),
        }),
    }
}
