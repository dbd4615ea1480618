//! Derivative-free search over the unitary group.
//!
//! Local moves right-multiply the current point by `exp(i s G_k)` for one of
//! the `n²` Hermitian basis generators `G_k` (diagonal `E_kk`, symmetric
//! `E_jl + E_lj`, antisymmetric `−iE_jl + iE_lj`). A pass tries `±s` on
//! every generator; when no move improves, the step halves until it falls
//! under the floor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::message::{unchecked_pf, Priors};
use super::{AttackResult, Method};
use crate::matcore::{haar_random_unitary, ComplexMatrix};
use crate::protocol::TaggingUnitary;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Haar restarts; the budget is split evenly between them.
    pub restarts: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub step_floor: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            initial_step: 0.3,
            shrink: 0.5,
            step_floor: 1e-6,
        }
    }
}

/// One accepted move of a local refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct LocalOutcome {
    pub point: ComplexMatrix,
    pub value: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

/// Number of Hermitian generators for dimension `n`.
pub fn generator_count(n: usize) -> usize {
    n * n
}

/// `point · exp(i s G_k)`, touching at most two columns.
pub fn generator_step(point: &ComplexMatrix, k: usize, s: f64) -> ComplexMatrix {
    let n = point.cols();
    let mut out = point.clone();
    if k < n {
        let ph = Complex64::from_polar(1.0, s);
        for r in 0..n {
            out[(r, k)] *= ph;
        }
        return out;
    }
    let (j, l, antisym) = pair_of(n, k - n);
    let (c, sn) = (s.cos(), s.sin());
    // 2×2 block g acting on columns (j, l): new_j = v_j g00 + v_l g10, new_l = v_j g01 + v_l g11
    let g = if antisym {
        [
            [Complex64::new(c, 0.0), Complex64::new(sn, 0.0)],
            [Complex64::new(-sn, 0.0), Complex64::new(c, 0.0)],
        ]
    } else {
        [
            [Complex64::new(c, 0.0), Complex64::new(0.0, sn)],
            [Complex64::new(0.0, sn), Complex64::new(c, 0.0)],
        ]
    };
    for r in 0..n {
        let (vj, vl) = (point[(r, j)], point[(r, l)]);
        out[(r, j)] = vj * g[0][0] + vl * g[1][0];
        out[(r, l)] = vj * g[0][1] + vl * g[1][1];
    }
    out
}

fn pair_of(n: usize, idx: usize) -> (usize, usize, bool) {
    let pair = idx / 2;
    let antisym = idx % 2 == 1;
    let mut count = 0;
    for j in 0..n {
        for l in (j + 1)..n {
            if count == pair {
                return (j, l, antisym);
            }
            count += 1;
        }
    }
    unreachable!("generator index out of range")
}

/// Coordinate ascent from `start`, maximizing `objective` with at most
/// `budget` evaluations (the start point counts as one).
pub fn refine<F>(start: ComplexMatrix, objective: &F, budget: usize, config: &SearchConfig) -> LocalOutcome
where
    F: Fn(&ComplexMatrix) -> f64 + ?Sized,
{
    let mut point = start;
    let mut value = objective(&point);
    let mut evaluations = 1;
    let mut trace = vec![TracePoint { iter: 0, value }];
    let gens = generator_count(point.cols());
    let mut step = config.initial_step;

    'outer: while evaluations < budget && step >= config.step_floor {
        let mut improved = false;
        for k in 0..gens {
            for sign in [1.0, -1.0] {
                if evaluations >= budget {
                    break 'outer;
                }
                let cand = generator_step(&point, k, sign * step);
                let f = objective(&cand);
                evaluations += 1;
                if f > value {
                    point = cand;
                    value = f;
                    improved = true;
                    trace.push(TracePoint {
                        iter: evaluations - 1,
                        value,
                    });
                    break;
                }
            }
        }
        if !improved {
            step *= config.shrink;
        }
    }
    LocalOutcome {
        point,
        value,
        evaluations,
        trace,
    }
}

/// Multi-start maximization over `U(n)`.
///
/// Restart `r` draws its Haar start from stream `r` of `seed`. Results are
/// merged by value with ties going to the lowest restart index, so the
/// answer does not depend on how many worker threads ran.
pub fn maximize_unitary<F>(
    n: usize,
    objective: &F,
    budget: usize,
    seed: u64,
    config: &SearchConfig,
) -> (LocalOutcome, usize)
where
    F: Fn(&ComplexMatrix) -> f64 + Sync + ?Sized,
{
    let restarts = config.restarts.max(1).min(budget.max(1));
    let per = budget.max(1) / restarts;
    let extra = budget.max(1) % restarts;
    let outcomes: Vec<LocalOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let start = haar_random_unitary(n, &mut rng);
            let b = per + usize::from(r < extra);
            refine(start, objective, b, config)
        })
        .collect();
    let total: usize = outcomes.iter().map(|o| o.evaluations).sum();
    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best_idx].value {
            best_idx = i;
        }
    }
    let best = outcomes.into_iter().nth(best_idx).expect("at least one restart");
    (best, total)
}

/// Best substitution attack found by multi-start search with `budget`
/// objective evaluations.
pub fn best_message_attack(
    u: &TaggingUnitary,
    priors: Priors,
    budget: usize,
    seed: u64,
    config: &SearchConfig,
) -> AttackResult {
    let objective = |v: &ComplexMatrix| unchecked_pf(u, v, priors);
    let (best, total) = maximize_unitary(4, &objective, budget, seed, config);
    AttackResult {
        probability: best.value.clamp(0.0, 1.0),
        method: Method::Search,
        strategy: best.point,
        budget: Some(budget),
        seed: Some(seed),
        evaluations: total,
    }
}
