//! Quantum teleportation viewed as a generalized measurement.
//!
//! The crate simulates the standard protocol, its description as a
//! four-outcome POVM that steers Bob's half of a singlet into a chosen
//! ensemble, conclusive teleportation over partially entangled pure states
//! and quasi-conclusive teleportation over a singlet/`|00⟩` mixture after
//! bilocal filtering.
//!
//! Modules, bottom up:
//! - [`linalg`]: small dense complex matrices, partial traces, Hermitian
//!   eigensolver
//! - [`states`]: pure states, density matrices, Bell basis, Schmidt form
//! - [`povm`]: POVMs, Kraus sets, the named measurement builders and
//!   ancilla-induced POVMs
//! - [`steering`]: ensembles generated at a distance
//! - [`protocols`]: end-to-end protocols and their closed-form figures
//! - [`cli`]: the reproducible experiment runner behind the binary

pub mod cli;
pub mod error;
pub mod linalg;
pub mod povm;
pub mod protocols;
pub mod states;
pub mod steering;

pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix, Tolerance};
pub use povm::{KrausSet, MeasurementOutcome, Povm};
pub use states::{BellLabel, DensityMatrix, PureState, SchmidtPair};
pub use steering::{Ensemble, SteeringResult};
