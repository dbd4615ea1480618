//! Simulator and security analyzer for one-bit quantum message
//! authentication with a shared singlet key and a public tagging unitary.
//!
//! Conventions used everywhere: the message space is spanned by the
//! computational basis `φ0..φ3`, Bob accepts outcomes 0 and 1, and joint
//! states are ordered A ⊗ B ⊗ E with index `8a + 4b + e`.

pub mod adversary;
pub mod cli;
pub mod conditions;
pub mod designer;
pub mod error;
pub mod fixtures;
pub mod matcore;
pub mod protocol;
pub mod rng;
pub mod tolerance;

pub use error::{Error, Result};
pub use matcore::ComplexMatrix;
pub use protocol::TaggingUnitary;
pub use tolerance::Tolerances;
