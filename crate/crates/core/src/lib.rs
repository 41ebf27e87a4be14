//! Numerical toolkit for explicit constructions in pluriclosed Hermitian
//! geometry.
//!
//! The crate is organized around a pipeline that mirrors how one actually
//! verifies these constructions at a desk:
//!
//! * [`czlinalg`]: complex matrix factorizations (Takagi, Levi
//!   normalization) used by the normal-form reduction.
//! * [`morse`]: strictly plurisubharmonic Morse germs, their canonical
//!   quadratic normal form and the quadratic minorant.
//! * [`envelope`]: Hartogs figures, the domains cut out by the minorant,
//!   tube tori, and continuity-principle sweep certificates along a family
//!   of quadrics.
//! * [`forms`]: jet-based (1,1)-form calculus on punctured complex space
//!   and Hopf quotients: d^c, dd^c, pluriclosedness and plurinegativity.
//! * [`periods`]: period integrals of d^c w over 3-spheres, the
//!   spherical-shell obstruction, and branch-count bounds.
//! * [`volumes`]: graph-volume quadrature for holomorphic disc families
//!   and the volume-gap predicates they feed.
//!
//! Convention used throughout: `d^c = i(∂̄ − ∂)`, hence `dd^c = 2i ∂∂̄`.
//! All sign-sensitive quantities in this crate state this convention in
//! their documentation.

pub mod czlinalg;
pub mod envelope;
pub mod forms;
pub mod morse;
pub mod periods;
mod quad;
pub mod volumes;

/// The d^c convention string embedded in reports.
pub const DC_CONVENTION: &str = "dc=i(dbar-d)";
