//! Certification of bosonic nonclassicality from a few Fock-state
//! probabilities.
//!
//! The crate is organized around the reduced probability vectors
//! `(P_0, ..., P_N)` measured by photon-number-resolving detectors:
//!
//! - [`dist`]: the vectors themselves, factorial weights `Q_k = k! P_k`,
//!   and generators for common state families;
//! - [`majorization`]: the exponent-tuple order that organizes the
//!   multiplicative criteria into a hierarchy;
//! - [`criteria`]: the criteria `K_J` and `K_{inf,N}` with shared
//!   violation thresholds;
//! - [`completeness`]: the exact classical/nonclassical decision in
//!   `(P_0, P_1, P_2)` and the certificate decomposition;
//! - [`geometry`]: the boundary of the classical set — supporting
//!   hyperplanes, tangency, curvature transitions, and membership tests;
//! - [`phasespace`]: Wigner-function cross-checks.

pub mod completeness;
pub mod criteria;
pub mod dist;
pub mod error;
pub mod geometry;
pub mod majorization;
pub mod numeric;
pub mod phasespace;

pub use completeness::{
    cross_validate, decide, decompose, fit_coherent_mixture, ClassicalDecomposition, CrossCheck,
    TripleVerdict,
};
pub use criteria::{certify, CertificationReport, CertifyOptions, CriterionVerdict};
pub use dist::{FactorialWeights, FockDistribution, StateFamily};
pub use error::{Error, Result};
pub use phasespace::{min_wigner, NegativityReport, PhasePoint, WignerState};
