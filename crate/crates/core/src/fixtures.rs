//! Named tagging unitaries and attack operators used throughout the tests,
//! the CLI `demo`, and the FFI.

use num_complex::Complex64;

use crate::matcore::{inner, norm, ComplexMatrix, ONE, ZERO};
use crate::protocol::TaggingUnitary;

/// Pinned copy of [`worked_example`] as matrix JSON.
pub const WORKED_EXAMPLE_JSON: &str = include_str!("../fixtures/worked_example.json");

pub fn identity() -> TaggingUnitary {
    TaggingUnitary::new(ComplexMatrix::identity(4)).expect("identity is unitary")
}

/// Block-anti-diagonal unitary exchanging `φ0 ↔ φ2` and `φ1 ↔ φ3`.
pub fn x_block() -> TaggingUnitary {
    let u = ComplexMatrix::from_real_rows(&[
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
    ]);
    TaggingUnitary::new(u).expect("permutation is unitary")
}

/// Unitary completion of the block `M0 = [[½, ½], [0, 0]]`.
///
/// Row 0 is `(½, ½, ½, ½)`; row 1 is forced (up to phase) to
/// `(0, 0, 1/√2, −1/√2)`; rows 2 and 3 come from Gram–Schmidt on `e0, e1`.
pub fn worked_example() -> TaggingUnitary {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |xs: [f64; 4]| xs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let rows = vec![r([0.5, 0.5, 0.5, 0.5]), r([0.0, 0.0, h, -h])];
    TaggingUnitary::new(complete_rows(&rows)).expect("Gram–Schmidt completion is unitary")
}

/// Extends orthonormal rows to a full unitary by Gram–Schmidt over the
/// standard basis.
pub fn complete_rows(rows: &[Vec<Complex64>]) -> ComplexMatrix {
    let n = rows.first().map_or(0, Vec::len);
    let mut basis: Vec<Vec<Complex64>> = rows.to_vec();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let p = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|z| z / nv).collect());
        }
    }
    let refs: Vec<&[Complex64]> = basis.iter().map(Vec::as_slice).collect();
    ComplexMatrix::from_rows(&refs)
}

/// `σ_x ⊕ 1₂`: swaps `φ0 ↔ φ1`, fixes the reject subspace.
pub fn swap_accept_subspace() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// `σ_x ⊕ σ_x`.
pub fn swap_both_subspaces() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

/// A unitary that passes the column-relation check for message attacks yet
/// admits a certainty substitution attack.
///
/// `M0` columns are `(0.4, 0.3)` and `(0.3, 0.4)` (so `M0^0 = σ_x M0^1`) and
/// the `M2` columns are neither orthogonal nor parallel.
pub fn column_relation_counterexample() -> TaggingUnitary {
    let (a, b) = (0.3_f64, 0.4_f64);
    let n = (1.0 - a * a - b * b).sqrt();
    // bottom parts x, y with |x| = |y| = n and ⟨x, y⟩ = −2ab
    let cos_t = -2.0 * a * b / (n * n);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let c0 = [b, a, n, 0.0];
    let c1 = [a, b, n * cos_t, n * sin_t];
    let cols: Vec<Vec<Complex64>> = [c0, c1]
        .iter()
        .map(|c| c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect();
    // rows of the completion are the columns of U
    let w = complete_rows(&cols);
    TaggingUnitary::new(w.transpose()).expect("completion is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{is_unitary, matrix_from_json, matrix_to_json};

    #[test]
    fn worked_example_entries() {
        let u = worked_example();
        let s3 = 3f64.sqrt();
        let s6 = 6f64.sqrt();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = ComplexMatrix::from_real_rows(&[
            &[0.5, 0.5, 0.5, 0.5],
            &[0.0, 0.0, h, -h],
            &[s3 / 2.0, -1.0 / (2.0 * s3), -1.0 / (2.0 * s3), -1.0 / (2.0 * s3)],
            &[0.0, 2.0 / s6, -1.0 / s6, -1.0 / s6],
        ]);
        assert!(u.matrix().max_abs_diff(&expect) < 1e-15);
        assert_eq!(u.row_bar(0, 0), [Complex64::new(0.5, 0.0); 2]);
        assert_eq!(u.row_bar(0, 1), [ZERO; 2]);
    }

    #[test]
    fn pinned_fixture_file_matches_construction() {
        let pinned = matrix_from_json(WORKED_EXAMPLE_JSON).unwrap();
        assert_eq!(&pinned, worked_example().matrix());
        assert_eq!(WORKED_EXAMPLE_JSON.trim(), matrix_to_json(worked_example().matrix()));
    }

    #[test]
    fn counterexample_columns() {
        let u = column_relation_counterexample();
        assert!(is_unitary(u.matrix(), 1e-12).unitary);
        let m00 = u.col(0, 0);
        let m01 = u.col(0, 1);
        assert!((m00[0].re - 0.4).abs() < 1e-12 && (m00[1].re - 0.3).abs() < 1e-12);
        assert!((m01[0].re - 0.3).abs() < 1e-12 && (m01[1].re - 0.4).abs() < 1e-12);
        let ip = inner(&u.col(2, 0), &u.col(2, 1));
        assert!((ip.re + 0.24).abs() < 1e-12);
    }
}
