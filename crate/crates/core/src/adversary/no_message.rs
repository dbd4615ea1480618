//! Eve sends a state of her own before Alice transmits anything.
//!
//! With `|ε⟩ = Σ e_i |φ_i⟩` Bob accepts with probability
//!
//! ```text
//! P_f = ½ Σ_{i=0,1} ( |e_i|² + |⟨ε|U|φ_i⟩|² ) = Tr(|ε⟩⟨ε| Q) / 2,   Q = U P U† + P
//! ```
//!
//! so the optimum is `λ_max(Q)/2`, attained by the top eigenvector.

use num_complex::Complex64;
use rand::Rng;

use super::{AttackResult, Method};
use crate::error::{Error, Result};
use crate::matcore::{apply, eig_hermitian, inner, ComplexMatrix, ZERO};
use crate::protocol::{bob_measure, decode, make_singlet, JointState, MessageBasis, TaggingUnitary};

/// Eve's injected pure state, coefficients in the message basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EveNoMessageState {
    coeffs: [Complex64; 4],
}

impl EveNoMessageState {
    pub fn new(coeffs: [Complex64; 4]) -> Result<Self> {
        let n: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("Eve's state has squared norm {n}, expected 1")));
        }
        Ok(Self { coeffs })
    }

    pub fn from_slice(v: &[Complex64]) -> Result<Self> {
        let coeffs: [Complex64; 4] = v
            .try_into()
            .map_err(|_| Error::invalid(format!("Eve's state must have 4 entries, got {}", v.len())))?;
        Self::new(coeffs)
    }

    /// State with `e2 = e3 = 0`, `|e0| = abs_e0` and cross-term phase `theta`
    /// relative to `u`, so that the `cos θ` term of the restricted
    /// expression is reproduced exactly.
    pub fn from_restricted(u: &TaggingUnitary, abs_e0: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&abs_e0) {
            return Err(Error::invalid(format!("|e0| must lie in [0, 1], got {abs_e0}")));
        }
        let w = row_overlap(u);
        let w_arg = if w.norm() > 0.0 { w.arg() } else { 0.0 };
        let e1 = Complex64::from_polar((1.0 - abs_e0 * abs_e0).max(0.0).sqrt(), theta - w_arg);
        Self::new([Complex64::new(abs_e0, 0.0), e1, ZERO, ZERO])
    }

    pub fn coeffs(&self) -> &[Complex64; 4] {
        &self.coeffs
    }

    pub fn abs_e0(&self) -> f64 {
        self.coeffs[0].norm()
    }

    /// `θ_E = arg(ē0 e1 w)` with `w = Σ_i U_0i conj(U_1i)`; zero when the
    /// cross term vanishes.
    pub fn theta(&self, u: &TaggingUnitary) -> f64 {
        let z = self.coeffs[0].conj() * self.coeffs[1] * row_overlap(u);
        if z.norm() > 0.0 {
            z.arg()
        } else {
            0.0
        }
    }
}

/// `Σ_i U_0i conj(U_1i)`, whose modulus is `|M̄₀¹ M̄₀⁰†|`.
pub(crate) fn row_overlap(u: &TaggingUnitary) -> Complex64 {
    let r0 = u.row_bar(0, 0);
    let r1 = u.row_bar(0, 1);
    r0[0] * r1[0].conj() + r0[1] * r1[1].conj()
}

pub fn no_message_pf(u: &TaggingUnitary, eve: &EveNoMessageState) -> f64 {
    let e = eve.coeffs();
    let mut p = 0.0;
    for i in 0..2 {
        let u_phi = u.matrix().column(i);
        p += e[i].norm_sqr() + inner(e, &u_phi).norm_sqr();
    }
    0.5 * p
}

/// Acceptance probability for a mixed injected state, `Tr(ρ Q)/2`.
pub fn no_message_pf_mixed(u: &TaggingUnitary, rho: &ComplexMatrix) -> f64 {
    0.5 * rho.matmul(&q_operator(u)).trace().re
}

/// The restricted expression with `e2 = e3 = 0`:
/// `½ + ½[(|M̄₀⁰|² − |M̄₀¹|²)|e0|² + 2|M̄₀¹M̄₀⁰†| |e0| √(1−|e0|²) cos θ + |M̄₀¹|²]`.
pub fn no_message_pf_restricted(u: &TaggingUnitary, abs_e0: f64, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&abs_e0) {
        return Err(Error::invalid(format!("|e0| must lie in [0, 1], got {abs_e0}")));
    }
    let (x, y, z) = restricted_coefficients(u);
    let s = abs_e0;
    let inner_term = x * s * s + y * s * (1.0 - s * s).max(0.0).sqrt() * theta.cos() + z;
    Ok(0.5 + 0.5 * inner_term)
}

/// `(x, y, z) = (|M̄₀⁰|² − |M̄₀¹|², 2|M̄₀¹M̄₀⁰†|, |M̄₀¹|²)`.
pub fn restricted_coefficients(u: &TaggingUnitary) -> (f64, f64, f64) {
    let sq = |r: [Complex64; 2]| r[0].norm_sqr() + r[1].norm_sqr();
    let n0 = sq(u.row_bar(0, 0));
    let n1 = sq(u.row_bar(0, 1));
    (n0 - n1, 2.0 * row_overlap(u).norm(), n1)
}

/// Exact maximum of the restricted expression over `|e0| ∈ [0,1]`, `θ`.
///
/// With `|e0| = cos φ` and `θ = 0` the bracket is
/// `x/2 + (x/2) cos 2φ + (y/2) sin 2φ + z`, maximal at `2φ = atan2(y, x)`.
pub fn no_message_restricted_max(u: &TaggingUnitary) -> Result<AttackResult> {
    let (x, y, z) = restricted_coefficients(u);
    let two_phi = y.atan2(x);
    let abs_e0 = (0.5 * two_phi).cos();
    let bracket = 0.5 * x + 0.5 * x.hypot(y) + z;
    let state = EveNoMessageState::from_restricted(u, abs_e0.clamp(0.0, 1.0), 0.0)?;
    Ok(AttackResult::exact(
        0.5 + 0.5 * bracket,
        Method::ClosedForm,
        ComplexMatrix::column_vector(state.coeffs()),
    ))
}

/// `Q = U P U† + P`.
pub fn q_operator(u: &TaggingUnitary) -> ComplexMatrix {
    let p = MessageBasis.accept_projector();
    &u.matrix().conjugate(&p) + &p
}

pub fn no_message_optimal(u: &TaggingUnitary) -> AttackResult {
    let eig = eig_hermitian(&q_operator(u)).expect("Q is Hermitian by construction");
    AttackResult::exact(
        eig.max_eigenvalue() / 2.0,
        Method::EigenOptimal,
        ComplexMatrix::column_vector(&eig.top_eigenvector()),
    )
}

/// Fraction of `trials` full protocol runs (singlet key, Bob decodes and
/// measures) in which Eve's injected state is accepted.
pub fn simulate_no_message<R: Rng + ?Sized>(
    u: &TaggingUnitary,
    eve: &EveNoMessageState,
    trials: usize,
    rng: &mut R,
) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let injected = JointState::product(&make_singlet(), eve.coeffs()).expect("normalized by construction");
    let mut accepted = 0usize;
    for _ in 0..trials {
        let received = decode(u, &injected);
        if bob_measure(&received, rng).accepted {
            accepted += 1;
        }
    }
    accepted as f64 / trials as f64
}

/// Acceptance probability from the decoded density operator,
/// `Tr(½(ρ + U†ρU) P)`; an independent route to [`no_message_pf`].
pub fn no_message_pf_via_decoded_state(u: &TaggingUnitary, eve: &EveNoMessageState) -> f64 {
    let ud = u.adjoint();
    let v = apply(&ud, eve.coeffs());
    let e = eve.coeffs();
    0.5 * (e[0].norm_sqr() + e[1].norm_sqr() + v[0].norm_sqr() + v[1].norm_sqr())
}
