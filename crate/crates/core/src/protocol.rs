//! Exact simulation of the one-qubit-key authentication protocol.
//!
//! The global register is key-A (2) ⊗ key-B (2) ⊗ message E (4), amplitude
//! index `8a + 4b + e`. The message basis is the computational basis of E:
//! `e0, e1` carry the bits, `e2, e3` are the reject outcomes.
//!
//! * Alice: `E_AE = |0⟩⟨0|_A ⊗ 1 + |1⟩⟨1|_A ⊗ U`
//! * Bob:   `D_BE = |0⟩⟨0|_B ⊗ U† + |1⟩⟨1|_B ⊗ 1`, then a projective
//!   measurement of E; outcomes 0 and 1 are accepted.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{apply, inner, is_unitary, partial_trace, ComplexMatrix, ONE, ZERO};
use crate::tolerance::Tolerances;

pub const KEY_DIM: usize = 4;
pub const MESSAGE_DIM: usize = 4;
pub const JOINT_DIM: usize = KEY_DIM * MESSAGE_DIM;

/// Orthonormal message basis `|φ0⟩ … |φ3⟩`.
///
/// Fixed to the computational basis; other bases are handled by conjugating
/// the tagging unitary with [`TaggingUnitary::in_basis`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MessageBasis;

impl MessageBasis {
    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        assert!(i < MESSAGE_DIM);
        let mut v = vec![ZERO; MESSAGE_DIM];
        v[i] = ONE;
        v
    }

    /// Accept projector `|φ0⟩⟨φ0| + |φ1⟩⟨φ1|`.
    pub fn accept_projector(&self) -> ComplexMatrix {
        ComplexMatrix::diag(&[ONE, ONE, ZERO, ZERO])
    }
}

/// Public 4×4 tagging unitary `U` with the 2×2 block notation
///
/// ```text
/// U = | M0  M1 |
///     | M2  M3 |
/// ```
///
/// `row_bar(i, j)` is row `j` of block `i`; `col(i, j)` is column `j` of
/// block `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggingUnitary {
    u: ComplexMatrix,
}

impl TaggingUnitary {
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(u, Tolerances::default().unitarity)
    }

    pub fn with_tolerance(u: ComplexMatrix, tol: f64) -> Result<Self> {
        if u.rows() != MESSAGE_DIM || u.cols() != MESSAGE_DIM {
            return Err(Error::DimensionMismatch {
                expected: "4×4 tagging unitary".into(),
                actual: format!("{}×{}", u.rows(), u.cols()),
            });
        }
        let check = is_unitary(&u, tol);
        if !check.unitary {
            return Err(Error::NotUnitary {
                deviation: check.deviation,
                tolerance: tol,
            });
        }
        Ok(Self { u })
    }

    /// Rewrites `u`, given in a basis whose vectors are the columns of
    /// `basis`, in the computational message basis: `B† U B`.
    pub fn in_basis(u: &ComplexMatrix, basis: &ComplexMatrix) -> Result<Self> {
        if !is_unitary(basis, Tolerances::default().unitarity).unitary {
            return Err(Error::invalid("message basis is not orthonormal"));
        }
        Self::new(basis.adjoint().matmul(u).matmul(basis))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        self.u.adjoint()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.u[(i, j)]
    }

    /// Block `M_i`, `i ∈ 0..4` in reading order.
    pub fn block(&self, i: usize) -> ComplexMatrix {
        let (r0, c0) = block_origin(i);
        self.u.submatrix(r0, c0, 2, 2)
    }

    /// Row `j` of block `i` (`M̄_i^j`).
    pub fn row_bar(&self, i: usize, j: usize) -> [Complex64; 2] {
        let (r0, c0) = block_origin(i);
        [self.u[(r0 + j, c0)], self.u[(r0 + j, c0 + 1)]]
    }

    /// Column `j` of block `i` (`M_i^j`).
    pub fn col(&self, i: usize, j: usize) -> [Complex64; 2] {
        let (r0, c0) = block_origin(i);
        [self.u[(r0, c0 + j)], self.u[(r0 + 1, c0 + j)]]
    }
}

fn block_origin(i: usize) -> (usize, usize) {
    assert!(i < 4, "block index {i} out of range");
    (2 * (i / 2), 2 * (i % 2))
}

fn check_bit(message: u8) -> Result<usize> {
    match message {
        0 | 1 => Ok(message as usize),
        other => Err(Error::invalid(format!("message must be 0 or 1, got {other}"))),
    }
}

/// Pure state of A ⊗ B ⊗ E, index `8a + 4b + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amps: Vec<Complex64>,
}

impl JointState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != JOINT_DIM {
            return Err(Error::DimensionMismatch {
                expected: format!("{JOINT_DIM} amplitudes"),
                actual: format!("{}", amps.len()),
            });
        }
        let n = crate::matcore::norm(&amps);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm is {n}, expected 1")));
        }
        Ok(Self { amps })
    }

    /// `key ⊗ message` for a 4-dim key state and a 4-dim message state.
    pub fn product(key: &[Complex64], message: &[Complex64]) -> Result<Self> {
        if key.len() != KEY_DIM || message.len() != MESSAGE_DIM {
            return Err(Error::invalid("key and message must both be 4-dimensional"));
        }
        let mut amps = Vec::with_capacity(JOINT_DIM);
        for k in key {
            for m in message {
                amps.push(k * m);
            }
        }
        Self::new(amps)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        crate::matcore::norm(&self.amps)
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amps)
    }

    /// Reduced state of the message register.
    pub fn message_density(&self) -> ComplexMatrix {
        // Direct sum over the key index; same result as partial_trace with
        // dims [2, 2, 4] keep {2}.
        ComplexMatrix::from_fn(MESSAGE_DIM, MESSAGE_DIM, |i, j| {
            (0..KEY_DIM)
                .map(|k| self.amps[k * MESSAGE_DIM + i] * self.amps[k * MESSAGE_DIM + j].conj())
                .sum()
        })
    }

    /// Reduced state of the key pair AB.
    pub fn key_density(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(KEY_DIM, KEY_DIM, |i, j| {
            (0..MESSAGE_DIM)
                .map(|e| self.amps[i * MESSAGE_DIM + e] * self.amps[j * MESSAGE_DIM + e].conj())
                .sum()
        })
    }

    /// Applies `op_for_key(k)` to the message block of each key index `k`.
    fn map_message_blocks(&self, op_for_key: impl Fn(usize) -> Option<ComplexMatrix>) -> Self {
        let mut amps = self.amps.clone();
        for k in 0..KEY_DIM {
            if let Some(op) = op_for_key(k) {
                let block = &self.amps[k * MESSAGE_DIM..(k + 1) * MESSAGE_DIM];
                amps[k * MESSAGE_DIM..(k + 1) * MESSAGE_DIM].copy_from_slice(&apply(&op, block));
            }
        }
        Self { amps }
    }

    /// Applies a 4×4 operator to the message register only.
    pub fn apply_message_op(&self, op: &ComplexMatrix) -> Self {
        self.map_message_blocks(|_| Some(op.clone()))
    }
}

/// Singlet `(|01⟩ − |10⟩)/√2` on AB, index `2a + b`.
pub fn make_singlet() -> [Complex64; KEY_DIM] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), ZERO]
}

/// Alice's controlled tagging `E_AE` applied to an arbitrary joint state.
pub fn apply_encoding(u: &TaggingUnitary, state: &JointState) -> JointState {
    // key index k = 2a + b; a = 1 ⇔ k ∈ {2, 3}
    state.map_message_blocks(|k| (k >= 2).then(|| u.matrix().clone()))
}

/// Bob's controlled un-tagging `D_BE`.
pub fn decode(u: &TaggingUnitary, state: &JointState) -> JointState {
    // b = 0 ⇔ k ∈ {0, 2}
    let ud = u.adjoint();
    state.map_message_blocks(|k| (k % 2 == 0).then(|| ud.clone()))
}

/// Singlet ⊗ `|φ_message⟩` followed by Alice's encoding.
pub fn encode(u: &TaggingUnitary, message: u8) -> Result<JointState> {
    let m = check_bit(message)?;
    let start = JointState::product(&make_singlet(), &MessageBasis.vector(m))?;
    Ok(apply_encoding(u, &start))
}

/// Closed form of the transmitted message state, `½(ρ_i + U ρ_i U†)`.
pub fn channel_density(u: &TaggingUnitary, message: u8) -> Result<ComplexMatrix> {
    let m = check_bit(message)?;
    let rho = ComplexMatrix::outer(&MessageBasis.vector(m));
    let tagged = u.matrix().conjugate(&rho);
    Ok((&rho + &tagged).scale(Complex64::new(0.5, 0.0)))
}

/// Message state obtained by simulating the full 16-dim encoding and tracing
/// out the key.
pub fn channel_density_simulated(u: &TaggingUnitary, message: u8) -> Result<ComplexMatrix> {
    let state = encode(u, message)?;
    partial_trace(&state.density(), &[2, 2, MESSAGE_DIM], &[2])
}

/// Message state Alice would send with a classical key bit `key`: `U` is
/// applied iff the bit is 1.
pub fn encode_classical(u: &TaggingUnitary, message: u8, key: u8) -> Result<Vec<Complex64>> {
    let m = check_bit(message)?;
    let k = check_bit(key)?;
    let phi = MessageBasis.vector(m);
    Ok(if k == 1 { apply(u.matrix(), &phi) } else { phi })
}

/// Channel state averaged over a uniformly random classical key bit.
pub fn channel_density_classical_key(u: &TaggingUnitary, message: u8) -> Result<ComplexMatrix> {
    let mut rho = ComplexMatrix::zeros(MESSAGE_DIM, MESSAGE_DIM);
    for key in 0..2u8 {
        let psi = encode_classical(u, message, key)?;
        rho = &rho + &ComplexMatrix::outer(&psi).scale(Complex64::new(0.5, 0.0));
    }
    Ok(rho)
}

/// Born probabilities of Bob's four outcomes on E.
pub fn outcome_probabilities(state: &JointState) -> [f64; 4] {
    let mut p = [0.0; 4];
    for (idx, z) in state.amps.iter().enumerate() {
        p[idx % MESSAGE_DIM] += z.norm_sqr();
    }
    p
}

/// Probability that Bob accepts, `Tr(ρ_E P)`.
pub fn acceptance_probability(state: &JointState) -> f64 {
    let p = outcome_probabilities(state);
    p[0] + p[1]
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub accepted: bool,
    pub post_state: JointState,
}

/// Samples Bob's projective measurement of E and collapses the state.
pub fn bob_measure<R: Rng + ?Sized>(state: &JointState, rng: &mut R) -> Measurement {
    let probs = outcome_probabilities(state);
    let outcome = sample_index(&probs, rng);
    let mut amps = vec![ZERO; JOINT_DIM];
    let scale = 1.0 / probs[outcome].sqrt();
    for k in 0..KEY_DIM {
        let idx = k * MESSAGE_DIM + outcome;
        amps[idx] = state.amps[idx] * scale;
    }
    Measurement {
        outcome,
        accepted: outcome < 2,
        post_state: JointState { amps },
    }
}

/// Inverse-CDF draw from a discrete distribution. Zero-probability entries
/// are never returned.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let r: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        acc += p;
        if r < acc {
            return i;
        }
    }
    last
}

/// `⟨ψ_singlet| Tr_E(|state⟩⟨state|) |ψ_singlet⟩`.
pub fn key_fidelity(state: &JointState) -> f64 {
    let s = make_singlet();
    let rho = state.key_density();
    let rs = apply(&rho, &s);
    inner(&s, &rs).re.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(rename = "message")]
    pub message_sent: u8,
    pub outcome: usize,
    pub accepted: bool,
    #[serde(rename = "decoded")]
    pub decoded_bit: Option<u8>,
    #[serde(rename = "key_fidelity")]
    pub key_fidelity_after: f64,
}

/// Encode, decode, measure.
pub fn run_honest<R: Rng + ?Sized>(u: &TaggingUnitary, message: u8, rng: &mut R) -> Result<RunRecord> {
    let sent = encode(u, message)?;
    let received = decode(u, &sent);
    let m = bob_measure(&received, rng);
    Ok(RunRecord {
        message_sent: message,
        outcome: m.outcome,
        accepted: m.accepted,
        decoded_bit: m.accepted.then_some(m.outcome as u8),
        key_fidelity_after: key_fidelity(&m.post_state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matcore::{haar_random_unitary, ComplexMatrix};
    use crate::rng::seeded;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn singlet_properties() {
        let s = make_singlet();
        assert!((crate::matcore::norm(&s) - 1.0).abs() < 1e-15);
        let rho = ComplexMatrix::outer(&s);
        let a = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(a.max_abs_diff(&ComplexMatrix::identity(2).scale(c(0.5))) < 1e-15);
        // swap(A, B): index 2a + b → 2b + a
        let swapped = [s[0], s[2], s[1], s[3]];
        for k in 0..4 {
            assert_eq!(swapped[k], -s[k]);
        }
    }

    #[test]
    fn block_accessors_match_entries() {
        let u = TaggingUnitary::new(haar_random_unitary(4, &mut seeded(2))).unwrap();
        for i in 0..4 {
            let (r0, c0) = (2 * (i / 2), 2 * (i % 2));
            let b = u.block(i);
            for j in 0..2 {
                assert_eq!(u.row_bar(i, j), [b[(j, 0)], b[(j, 1)]]);
                assert_eq!(u.col(i, j), [b[(0, j)], b[(1, j)]]);
                assert_eq!(u.row_bar(i, j)[0], u.entry(r0 + j, c0));
                assert_eq!(u.col(i, j)[1], u.entry(r0 + 1, c0 + j));
            }
        }
    }

    #[test]
    fn rejects_bad_unitaries() {
        assert!(matches!(
            TaggingUnitary::new(ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let d = ComplexMatrix::diag(&[ONE, ONE, ONE, c(2.0)]);
        assert!(matches!(TaggingUnitary::new(d), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn encode_with_identity_is_product() {
        let u = fixtures::identity();
        let s = encode(&u, 0).unwrap();
        let expect = JointState::product(&make_singlet(), &MessageBasis.vector(0)).unwrap();
        assert_eq!(s, expect);
        assert!(encode(&u, 2).is_err());
    }

    #[test]
    fn encode_x_block_matches_kron_product() {
        let u = fixtures::x_block();
        let s = encode(&u, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (|01⟩|φ0⟩ − |10⟩|φ2⟩)/√2
        let mut expect = vec![ZERO; 16];
        expect[4] = c(h);
        expect[8 + 2] = c(-h);
        assert!(s.amplitudes().iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-15));

        // cross-check: E_AE as a 16×16 matrix
        let p0 = ComplexMatrix::diag(&[ONE, ZERO]);
        let p1 = ComplexMatrix::diag(&[ZERO, ONE]);
        let i2 = ComplexMatrix::identity(2);
        let e_ae = &p0.tensor(&i2).tensor(&ComplexMatrix::identity(4)) + &p1.tensor(&i2).tensor(u.matrix());
        let start = ComplexMatrix::column_vector(&make_singlet()).tensor(&ComplexMatrix::basis_vector(4, 0));
        let direct = e_ae.matmul(&start);
        assert!(direct.max_abs_diff(&ComplexMatrix::column_vector(s.amplitudes())) < 1e-15);
    }

    #[test]
    fn channel_density_examples() {
        let rho = channel_density(&fixtures::identity(), 0).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::diag(&[ONE, ZERO, ZERO, ZERO])) < 1e-15);
        let xb = fixtures::x_block();
        let rho = channel_density_simulated(&xb, 0).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::diag(&[c(0.5), ZERO, c(0.5), ZERO])) < 1e-15);
    }

    #[test]
    fn channel_density_is_a_density_operator() {
        let mut rng = seeded(17);
        for _ in 0..20 {
            let u = TaggingUnitary::new(haar_random_unitary(4, &mut rng)).unwrap();
            for m in 0..2 {
                let rho = channel_density(&u, m).unwrap();
                assert!(rho.hermitian_deviation() < 1e-15);
                assert!((rho.trace() - ONE).norm() < 1e-12);
                let eig = crate::matcore::eig_hermitian(&rho).unwrap();
                assert!(eig.eigenvalues.iter().all(|&l| (-1e-12..=1.0 + 1e-12).contains(&l)));
                let sim = channel_density_simulated(&u, m).unwrap();
                assert!(rho.max_abs_diff(&sim) < 1e-10);
            }
        }
    }

    #[test]
    fn decode_restores_message_and_key() {
        let u = fixtures::worked_example();
        for m in 0..2u8 {
            let out = decode(&u, &encode(&u, m).unwrap());
            let expect = JointState::product(&make_singlet(), &MessageBasis.vector(m as usize)).unwrap();
            let diff = out
                .amplitudes()
                .iter()
                .zip(expect.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15, "message {m}: {diff}");
            assert!((key_fidelity(&out) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decode_with_identity_is_identity() {
        let mut rng = seeded(4);
        let amps = crate::matcore::haar_random_state(16, &mut rng);
        let s = JointState::new(amps).unwrap();
        assert_eq!(decode(&fixtures::identity(), &s), s);
    }

    #[test]
    fn measurement_of_basis_states() {
        let mut rng = seeded(0);
        for (e, accepted) in [(0, true), (2, false)] {
            let s = JointState::product(&make_singlet(), &MessageBasis.vector(e)).unwrap();
            for _ in 0..100 {
                let m = bob_measure(&s, &mut rng);
                assert_eq!(m.outcome, e);
                assert_eq!(m.accepted, accepted);
            }
        }
    }

    #[test]
    fn key_fidelity_cases() {
        let s = JointState::product(&make_singlet(), &MessageBasis.vector(3)).unwrap();
        assert!((key_fidelity(&s) - 1.0).abs() < 1e-15);
        let zero_zero = [ONE, ZERO, ZERO, ZERO];
        let s = JointState::product(&zero_zero, &MessageBasis.vector(0)).unwrap();
        assert_eq!(key_fidelity(&s), 0.0);
    }

    #[test]
    fn honest_runs() {
        let mut rng = seeded(8);
        let cases = [
            (fixtures::identity(), 0u8),
            (fixtures::x_block(), 1),
            (fixtures::worked_example(), 0),
        ];
        for (u, m) in cases {
            let r = run_honest(&u, m, &mut rng).unwrap();
            assert_eq!(r.outcome, m as usize);
            assert!(r.accepted);
            assert_eq!(r.decoded_bit, Some(m));
            assert!((r.key_fidelity_after - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_key_average_matches_closed_form() {
        let u = fixtures::worked_example();
        for m in 0..2 {
            let a = channel_density_classical_key(&u, m).unwrap();
            let b = channel_density(&u, m).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn run_record_json_field_names() {
        let r = RunRecord {
            message_sent: 1,
            outcome: 1,
            accepted: true,
            decoded_bit: Some(1),
            key_fidelity_after: 1.0,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"message":1,"outcome":1,"accepted":true,"decoded":1,"key_fidelity":1.0}"#
        );
    }

    #[test]
    fn in_basis_conjugates() {
        let mut rng = seeded(21);
        let b = haar_random_unitary(4, &mut rng);
        let u = haar_random_unitary(4, &mut rng);
        let t = TaggingUnitary::in_basis(&u, &b).unwrap();
        assert!(t.matrix().max_abs_diff(&b.adjoint().matmul(&u).matmul(&b)) < 1e-15);
    }
}
