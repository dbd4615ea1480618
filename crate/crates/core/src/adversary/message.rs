//! Message substitution: Eve applies a unitary `V` to Alice's message in the
//! channel, hoping Bob decodes the other bit.
//!
//! ```text
//! P_f'(i) = ½ ( |⟨φ_j|V|φ_i⟩|² + |⟨φ_j|U†VU|φ_i⟩|² ),   j ≠ i
//! ```

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AttackResult, Method};
use crate::conditions::{column_relation, lower_columns_related};
use crate::error::{Error, Result};
use crate::matcore::{inner, is_unitary, norm, ComplexMatrix, ONE, ZERO};
use crate::protocol::{bob_measure, decode, encode, TaggingUnitary};
use crate::tolerance::Tolerances;

/// Alice's message distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub p0: f64,
    pub p1: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self { p0: 0.5, p1: 0.5 }
    }
}

impl Priors {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        if !(p0.is_finite() && p1.is_finite()) || p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "priors must be non-negative and sum to 1, got ({p0}, {p1})"
            )));
        }
        Ok(Self { p0, p1 })
    }

    /// Parses `p0,p1`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("priors `{s}` are not `p0,p1`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("prior `{t}` is not a number")))
        };
        Self::new(parse(a)?, parse(b)?)
    }

    pub fn get(&self, i: usize) -> f64 {
        if i == 0 {
            self.p0
        } else {
            self.p1
        }
    }
}

/// `P_f'(i)` for one sent bit.
pub fn message_attack_pf_single(u: &TaggingUnitary, v: &ComplexMatrix, i: usize) -> f64 {
    let j = 1 - i;
    let conj = u.adjoint().matmul(v).matmul(u.matrix());
    0.5 * (v[(j, i)].norm_sqr() + conj[(j, i)].norm_sqr())
}

pub fn message_attack_pf(u: &TaggingUnitary, v: &ComplexMatrix, priors: Priors) -> Result<f64> {
    if v.rows() != 4 || v.cols() != 4 {
        return Err(Error::invalid(format!(
            "attack must be 4×4, got {}×{}",
            v.rows(),
            v.cols()
        )));
    }
    let check = is_unitary(v, Tolerances::default().unitarity);
    if !check.unitary {
        return Err(Error::NotUnitary {
            deviation: check.deviation,
            tolerance: Tolerances::default().unitarity,
        });
    }
    Ok(unchecked_pf(u, v, priors))
}

pub(crate) fn unchecked_pf(u: &TaggingUnitary, v: &ComplexMatrix, priors: Priors) -> f64 {
    let conj = u.adjoint().matmul(v).matmul(u.matrix());
    let mut p = 0.0;
    for i in 0..2 {
        let j = 1 - i;
        p += priors.get(i) * 0.5 * (v[(j, i)].norm_sqr() + conj[(j, i)].norm_sqr());
    }
    p
}

/// Full-protocol Monte Carlo: Alice sends a bit drawn from `priors`, Eve
/// applies `v`, Bob decodes and measures. Returns the fraction of runs in
/// which Bob accepts the flipped bit.
pub fn simulate_message_attack<R: Rng + ?Sized>(
    u: &TaggingUnitary,
    v: &ComplexMatrix,
    priors: Priors,
    trials: usize,
    rng: &mut R,
) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let sent = [encode(u, 0).expect("bit 0"), encode(u, 1).expect("bit 1")];
    let tampered: Vec<_> = sent.iter().map(|s| decode(u, &s.apply_message_op(v))).collect();
    let mut success = 0usize;
    for _ in 0..trials {
        let m = if rng.random::<f64>() < priors.p0 { 0 } else { 1 };
        let outcome = bob_measure(&tampered[m], rng).outcome;
        if outcome == 1 - m {
            success += 1;
        }
    }
    success as f64 / trials as f64
}

/// Certainty attack of the block-diagonal form `V = M0^E ⊕ M1^E`, returned
/// only when the column relations on `M0` and `M2` hold (see
/// [`crate::conditions::check_condition3`]).
pub fn perfect_message_attack(u: &TaggingUnitary, tol: &Tolerances) -> Option<ComplexMatrix> {
    if !column_relation(u, tol).holds || !lower_columns_related(u, tol).holds {
        return None;
    }
    swap_attack(u, tol)
}

/// Constructs `V = e^{iα}S(β)σ_x ⊕ M1^E` with `V U|φ_i⟩ ∝ U|φ_j⟩` whenever
/// `M0^0 = e^{iγ}S(δ)σ_x M0^1` holds, regardless of the lower-block
/// relation. Returns `None` if that relation fails or the construction does
/// not reach `P_f' = 1` within `1e-9`.
pub fn swap_attack(u: &TaggingUnitary, tol: &Tolerances) -> Option<ComplexMatrix> {
    let rel = column_relation(u, tol);
    if !rel.holds {
        return None;
    }
    let (gamma, delta) = (rel.gamma, rel.delta);
    // α = 0: V c0 = e^{iη0} c1, V c1 = e^{iη1} c0
    let eta0 = gamma + delta;
    let eta1 = -gamma;
    let upper = ComplexMatrix::from_rows(&[&[ZERO, ONE], &[Complex64::from_polar(1.0, delta), ZERO]]);

    let x = u.col(2, 0);
    let y = u.col(2, 1);
    let lower = lower_swap(
        &x,
        &y,
        Complex64::from_polar(1.0, eta0),
        Complex64::from_polar(1.0, eta1),
    )?;

    let mut v = ComplexMatrix::zeros(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            v[(r, c)] = upper[(r, c)];
            v[(r + 2, c + 2)] = lower[(r, c)];
        }
    }
    let ok = is_unitary(&v, 1e-9).unitary
        && (message_attack_pf_single(u, &v, 0) - 1.0).abs() <= 1e-9
        && (message_attack_pf_single(u, &v, 1) - 1.0).abs() <= 1e-9;
    ok.then_some(v)
}

/// Unitary 2×2 `M` with `M x = w0 y` and `M y = w1 x`, if one exists.
fn lower_swap(x: &[Complex64; 2], y: &[Complex64; 2], w0: Complex64, w1: Complex64) -> Option<ComplexMatrix> {
    let nx = norm(x);
    let ny = norm(y);
    if nx < 1e-9 && ny < 1e-9 {
        return Some(ComplexMatrix::identity(2));
    }
    let det = x[0] * y[1] - x[1] * y[0];
    if det.norm() > 1e-7 * nx * ny {
        // M [x y] = [w0 y, w1 x]
        let inv_det = ONE / det;
        let inv = [[y[1] * inv_det, -y[0] * inv_det], [-x[1] * inv_det, x[0] * inv_det]];
        let img = [[w0 * y[0], w1 * x[0]], [w0 * y[1], w1 * x[1]]];
        let m = ComplexMatrix::from_fn(2, 2, |r, c| img[r][0] * inv[0][c] + img[r][1] * inv[1][c]);
        return Some(m);
    }
    // parallel: M acts as a phase on span{x} and as the identity elsewhere
    if nx < 1e-9 {
        return None;
    }
    let xh = [x[0] / nx, x[1] / nx];
    let mu = w0 * inner(&xh, y) / nx;
    if (mu.norm() - 1.0).abs() > 1e-7 {
        return None;
    }
    let perp = [-xh[1].conj(), xh[0].conj()];
    Some(ComplexMatrix::from_fn(2, 2, |r, c| {
        mu * xh[r] * xh[c].conj() + perp[r] * perp[c].conj()
    }))
}

/// Convenience: best of the perfect construction (if any) as an
/// [`AttackResult`].
pub fn perfect_attack_result(u: &TaggingUnitary, tol: &Tolerances) -> Option<AttackResult> {
    perfect_message_attack(u, tol).map(|v| {
        let p = unchecked_pf(u, &v, Priors::default());
        AttackResult::exact(p, Method::ClosedForm, v)
    })
}
