//! Dense complex linear algebra for 2–64 dimensional spaces.

mod eigen;
mod haar;
mod json;
mod matrix;

pub use eigen::{eig_hermitian, eig_hermitian_with, expi_hermitian, HermitianEigen};
pub use haar::{haar_random_state, haar_random_unitary, qr};
pub use json::{matrix_from_json, matrix_to_json};
pub use matrix::{apply, inner, is_unitary, norm, partial_trace, ComplexMatrix, UnitarityCheck, ONE, ZERO};
