//! Security checklist for a tagging unitary.
//!
//! With `M̄_0^j` the rows and `M_i^j` the columns of the 2×2 blocks of `U`:
//!
//! 1. (`y = 0`) both `|M̄_0^0|² < 1` and `|M̄_0^1|² < 1`;
//! 2. (`y > 0`) the no-message bound `ec_gorda_lhs(x, y, z) < 1`;
//! 3. `M_0^0 ≠ e^{iγ} S(δ) σ_x M_0^1` for all `γ, δ`, or the lower columns
//!    `M_2^0, M_2^1` are neither orthogonal nor phase-equivalent;
//! 4. `M_0^0 ≠ 0` or `M_0^1 ≠ 0` (implied by 3).
//!
//! Strict inequalities use the `condition` tolerance and every check carries
//! a signed margin (positive = satisfied) so borderline inputs are visible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adversary::no_message::restricted_coefficients;
use crate::adversary::{
    best_message_attack, no_message_optimal, no_message_restricted_max, swap_attack, Priors, SearchConfig,
};
use crate::error::{Error, Result};
use crate::matcore::{inner, norm, ComplexMatrix};
use crate::protocol::TaggingUnitary;
use crate::tolerance::Tolerances;

/// Left-hand side of the overlapping-rows no-message bound,
/// `½x{1 + r(1 + r²)^{-1/2}} + ½y(1 + r²)^{1/2} + z` with `r = x/y`.
///
/// This dominates the exact restricted maximum `½x + ½√(x² + y²) + z` by
/// `½x²/√(x² + y²)`, so a unitary passing this test also passes the exact one.
pub fn ec_gorda_lhs(x: f64, y: f64, z: f64) -> Result<f64> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::invalid(format!(
            "y must be positive (got {y}); use the y = 0 case"
        )));
    }
    let r = x / y;
    let s = (1.0 + r * r).sqrt();
    Ok(0.5 * x * (1.0 + r / s) + 0.5 * y * s + z)
}

/// `(x, y, z)` of the restricted no-message problem.
pub fn xyz(u: &TaggingUnitary) -> (f64, f64, f64) {
    restricted_coefficients(u)
}

/// Whether `M_0^0 = e^{iγ} S(δ) σ_x M_0^1`, i.e.
/// `M_0^0[0] = e^{iγ} M_0^1[1]` and `M_0^0[1] = e^{i(γ+δ)} M_0^1[0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRelation {
    pub holds: bool,
    /// Largest modulus mismatch between paired entries.
    pub distance: f64,
    /// Witness phases (0 where an entry pair vanishes and leaves them free).
    pub gamma: f64,
    pub delta: f64,
}

pub fn column_relation(u: &TaggingUnitary, tol: &Tolerances) -> ColumnRelation {
    let a = u.col(0, 0);
    let b = u.col(0, 1);
    let pairs = [(a[0], b[1]), (a[1], b[0])];
    let distance = pairs
        .iter()
        .map(|(p, q)| (p.norm() - q.norm()).abs())
        .fold(0.0, f64::max);
    // Each nonzero pair pins one phase: pair 0 → γ, pair 1 → γ + δ.
    let phase = |(p, q): (Complex64, Complex64)| (p.norm() > tol.phase).then(|| (p * q.conj()).arg());
    let g = phase(pairs[0]);
    let gd = phase(pairs[1]);
    let gamma = g.or(gd).unwrap_or(0.0);
    let delta = gd.map(|v| v - gamma).unwrap_or(0.0);
    ColumnRelation {
        holds: distance <= tol.phase,
        distance,
        gamma,
        delta,
    }
}

/// Whether the lower columns `M_2^0, M_2^1` are orthogonal or
/// phase-equivalent — the situation in which condition 3's second clause
/// offers no protection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerColumns {
    pub holds: bool,
    /// `|M_2^0† M_2^1|`.
    pub overlap: f64,
    /// `min_χ ‖M_2^0 − e^{iχ} M_2^1‖`.
    pub phase_distance: f64,
}

pub fn lower_columns_related(u: &TaggingUnitary, tol: &Tolerances) -> LowerColumns {
    let x = u.col(2, 0);
    let y = u.col(2, 1);
    let overlap = inner(&x, &y).norm();
    let phase_distance = phase_distance(&x, &y);
    LowerColumns {
        holds: overlap <= tol.condition || phase_distance <= tol.phase,
        overlap,
        phase_distance,
    }
}

/// `min_χ ‖a − e^{iχ} b‖ = √(‖a‖² + ‖b‖² − 2|⟨a, b⟩|)`.
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    (na * na + nb * nb - 2.0 * inner(a, b).norm()).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case1Check {
    /// `y = 0` within tolerance.
    pub applies: bool,
    pub satisfied: bool,
    pub margin: f64,
    /// `|M̄_0^0|², |M̄_0^1|²`.
    pub row_norms_sq: [f64; 2],
}

pub fn check_case1(u: &TaggingUnitary, tol: &Tolerances) -> Case1Check {
    let (_, y, _) = xyz(u);
    let row_norms_sq = [norm(&u.row_bar(0, 0)).powi(2), norm(&u.row_bar(0, 1)).powi(2)];
    let margin = 1.0 - tol.condition - row_norms_sq[0].max(row_norms_sq[1]);
    Case1Check {
        applies: y / 2.0 <= tol.condition,
        satisfied: margin > 0.0,
        margin,
        row_norms_sq,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case2Check {
    pub applies: bool,
    pub satisfied: bool,
    /// `1 − tol − lhs`; absent when the case does not apply.
    pub margin: Option<f64>,
    pub lhs: Option<f64>,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn check_case2(u: &TaggingUnitary, tol: &Tolerances) -> Case2Check {
    let (x, y, z) = xyz(u);
    let applies = y / 2.0 > tol.condition;
    let lhs = applies.then(|| ec_gorda_lhs(x, y, z).expect("y > 0"));
    let margin = lhs.map(|l| 1.0 - tol.condition - l);
    Case2Check {
        applies,
        satisfied: margin.is_some_and(|m| m > 0.0),
        margin,
        lhs,
        x,
        y,
        z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition3Clause {
    /// `M_0^0` is not related to `M_0^1` by any `e^{iγ}S(δ)σ_x`.
    UpperColumnsUnrelated,
    /// The upper relation holds, but `M_2^0, M_2^1` overlap without being
    /// phase-equivalent.
    LowerColumnsOverlap,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition3Check {
    pub satisfied: bool,
    pub margin: f64,
    pub clause: Condition3Clause,
    pub upper: ColumnRelation,
    pub lower: LowerColumns,
}

pub fn check_condition3(u: &TaggingUnitary, tol: &Tolerances) -> Condition3Check {
    let upper = column_relation(u, tol);
    let lower = lower_columns_related(u, tol);
    let upper_margin = upper.distance - tol.phase;
    let lower_margin = (lower.overlap - tol.condition).min(lower.phase_distance - tol.phase);
    let clause = if !upper.holds {
        Condition3Clause::UpperColumnsUnrelated
    } else if !lower.holds {
        Condition3Clause::LowerColumnsOverlap
    } else {
        Condition3Clause::Violated
    };
    Condition3Check {
        satisfied: clause != Condition3Clause::Violated,
        margin: upper_margin.max(lower_margin),
        clause,
        upper,
        lower,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition4Check {
    pub satisfied: bool,
    pub margin: f64,
    /// `|M_0^0|, |M_0^1|`.
    pub column_norms: [f64; 2],
    /// Condition 3 ⇒ condition 4 held on this input.
    pub implied_by_condition3: bool,
}

pub fn check_condition4(u: &TaggingUnitary, tol: &Tolerances) -> Condition4Check {
    let column_norms = [norm(&u.col(0, 0)), norm(&u.col(0, 1))];
    let margin = column_norms[0].max(column_norms[1]) - tol.condition;
    let satisfied = margin > 0.0;
    let c3 = check_condition3(u, tol).satisfied;
    Condition4Check {
        satisfied,
        margin,
        column_norms,
        implied_by_condition3: !c3 || satisfied,
    }
}

/// Numbers that are informative but not part of the pass/fail decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    /// Optimal no-message forgery probability `λ_max(Q)/2`.
    pub no_message_optimal: f64,
    /// Exact maximum over the restricted family `e_2 = e_3 = 0`.
    pub no_message_restricted_max: f64,
    /// Best substitution attack found by search (a lower bound on the optimum).
    pub best_message_attack: Option<f64>,
    pub search_budget: usize,
    pub search_seed: u64,
    /// A certainty substitution attack exists by direct construction, even
    /// though it may pass the checklist.
    pub certainty_message_attack: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub case1: Case1Check,
    pub case2: Case2Check,
    pub condition3: Condition3Check,
    pub condition4: Condition4Check,
    pub overall_secure: bool,
    pub redundancy_note: String,
    pub advisory: Advisory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    /// Search evaluations for the advisory message attack; 0 skips it.
    pub budget: usize,
    pub seed: u64,
    pub priors: Priors,
    pub tolerances: Tolerances,
    pub search: SearchConfig,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            budget: 10_000,
            seed: 0,
            priors: Priors::default(),
            tolerances: Tolerances::default(),
            search: SearchConfig::default(),
        }
    }
}

/// Validates a raw matrix: checks shape and unitarity first.
pub fn validate(u: &ComplexMatrix, opts: &ValidateOptions) -> Result<ConditionReport> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4×4".into(),
            actual: format!("{}×{}", u.rows(), u.cols()),
        });
    }
    let tu = TaggingUnitary::with_tolerance(u.clone(), opts.tolerances.unitarity)?;
    Ok(validate_unitary(&tu, opts))
}

pub fn validate_unitary(u: &TaggingUnitary, opts: &ValidateOptions) -> ConditionReport {
    let tol = &opts.tolerances;
    let case1 = check_case1(u, tol);
    let case2 = check_case2(u, tol);
    let condition3 = check_condition3(u, tol);
    let condition4 = check_condition4(u, tol);
    let no_message_ok = if case1.applies {
        case1.satisfied
    } else {
        case2.satisfied
    };
    let overall_secure = no_message_ok && condition3.satisfied;

    let redundancy_note = if condition4.implied_by_condition3 {
        "condition 4 is implied by condition 3 and does not enter overall_secure".to_string()
    } else {
        "condition 3 held while condition 4 failed on this input".to_string()
    };

    let best = (opts.budget > 0)
        .then(|| best_message_attack(u, opts.priors, opts.budget, opts.seed, &opts.search).probability);
    let advisory = Advisory {
        no_message_optimal: no_message_optimal(u).probability,
        no_message_restricted_max: no_message_restricted_max(u).map(|r| r.probability).unwrap_or(f64::NAN),
        best_message_attack: best,
        search_budget: opts.budget,
        search_seed: opts.seed,
        certainty_message_attack: swap_attack(u, tol).is_some(),
    };

    ConditionReport {
        case1,
        case2,
        condition3,
        condition4,
        overall_secure,
        redundancy_note,
        advisory,
    }
}
