//! Numerical audit toolkit for the critical Hartree equation on the
//! Heisenberg group H^n: group calculus with exact jets, the Cayley
//! transform, Funk-Hecke spectral data, bubble solutions, Pohozaev
//! balances and the reduced energy.

pub mod bubble;
pub mod cayley;
pub mod constants;
pub mod error;
pub mod hgroup;
pub mod jet;
pub mod parallel;
pub mod params;
pub mod pohozaev;
pub mod quadrature;
pub mod reduced;
pub mod special;
pub mod spectral;
pub mod sphere;

pub use error::{HnError, Result};
pub use hgroup::{GroupElement, ScalarField};
pub use jet::Jet2;
pub use params::Params;
pub use quadrature::{IntegralEstimate, Method, QuadratureSpec};
pub use sphere::{HarmonicIndex, SpherePoint, SphereSampler};
