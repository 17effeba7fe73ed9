//! Quantum-state disturbance in the protective measurement of a spin-½
//! particle by a weak inhomogeneous magnetic field on top of a strong
//! uniform protection field.
//!
//! The model is fully described by the dimensionless set
//! [`MeasurementGeometry`] `(ξ, γ, η, ω₀T)` and a [`CouplingProfile`].
//!
//! - [`exact`]: closed-form solution for constant coupling, envelopes and
//!   momentum-shift reversal.
//! - [`dyson`]: first-order amplitudes for arbitrary coupling profiles.
//! - [`oracle`]: numerical reference propagator.
//! - [`multimeas`]: simultaneous versus successive three-field measurement.
//! - [`reconstruct`]: state reconstruction and fidelity.
//! - [`design`]: SI-unit experiment estimates.

pub mod design;
pub mod dyson;
pub mod error;
pub mod exact;
pub mod model;
pub mod multimeas;
pub mod oracle;
mod quad;
pub mod reconstruct;

pub use error::{Error, Result};
pub use model::{
    direction_angles, sinc, CouplingKind, CouplingProfile, FieldSpec, MeasurementGeometry, ProfileTable,
};
pub use num_complex::Complex64 as C64;
