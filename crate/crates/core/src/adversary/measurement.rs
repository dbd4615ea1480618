//! Key-distinguishing measurement.
//!
//! If `{|φ_i⟩}` and `{U|φ_i⟩}` (i = 0, 1) span orthogonal subspaces, Eve can
//! tell which tagging branch occurred, collapse the key, and then forge with
//! certainty. That happens exactly when the `M0` block vanishes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::protocol::TaggingUnitary;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyDistinguishability {
    pub distinguishable: bool,
    /// `gram[i][j] = ⟨φ_i|U|φ_j⟩` as `[re, im]`.
    pub gram: [[[f64; 2]; 2]; 2],
    pub max_overlap: f64,
}

pub fn key_distinguishability(u: &TaggingUnitary, tol: &Tolerances) -> KeyDistinguishability {
    let mut gram = [[[0.0; 2]; 2]; 2];
    let mut max_overlap: f64 = 0.0;
    for (i, row) in gram.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let z: Complex64 = u.entry(i, j);
            *cell = [z.re, z.im];
            max_overlap = max_overlap.max(z.norm());
        }
    }
    KeyDistinguishability {
        distinguishable: max_overlap <= tol.condition,
        gram,
        max_overlap,
    }
}
