//! Heuristic search for tagging unitaries that pass the checklist and keep
//! both forgery probabilities low.
//!
//! A candidate's score is the worst case over the no-message optimum and the
//! best substitution attack found by a fixed-seed inner search (so the score
//! is a deterministic function of the candidate). Candidates failing the
//! checklist score `+∞` and are never accepted. Nothing here certifies
//! optimality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::adversary::search::{refine, SearchConfig};
use crate::adversary::{best_message_attack, no_message_optimal, Priors};
use crate::conditions::{validate_unitary, ValidateOptions};
use crate::error::{Error, Result};
use crate::matcore::{haar_random_unitary, ComplexMatrix};
use crate::protocol::TaggingUnitary;
use crate::rng::stream;
use crate::tolerance::Tolerances;

/// How the two attack probabilities combine into one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ScoreRule {
    #[default]
    WorstCase,
    /// `w·pf_no_message + (1 − w)·pf_message_best`.
    WeightedSum { no_message_weight: f64 },
}

impl ScoreRule {
    fn combine(&self, no_message: f64, message: f64) -> f64 {
        match *self {
            ScoreRule::WorstCase => no_message.max(message),
            ScoreRule::WeightedSum { no_message_weight: w } => w * no_message + (1.0 - w) * message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityScore {
    pub pf_no_message: f64,
    pub pf_message_best: f64,
    pub secure: bool,
    /// `+∞` for insecure candidates; serialized as `null`.
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub score: f64,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Knobs shared by [`security_score`] and [`optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreConfig {
    /// Evaluations for the inner message-attack search.
    pub budget: usize,
    /// Seed of the inner search; held fixed across candidates.
    pub seed: u64,
    pub priors: Priors,
    pub rule: ScoreRule,
    pub tolerances: Tolerances,
    pub search: SearchConfig,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            seed: 0,
            priors: Priors::default(),
            rule: ScoreRule::default(),
            tolerances: Tolerances::default(),
            search: SearchConfig {
                restarts: 2,
                ..SearchConfig::default()
            },
        }
    }
}

pub fn security_score(u: &TaggingUnitary, cfg: &ScoreConfig) -> SecurityScore {
    let opts = ValidateOptions {
        budget: 0,
        seed: cfg.seed,
        priors: cfg.priors,
        tolerances: cfg.tolerances,
        search: cfg.search,
    };
    let secure = validate_unitary(u, &opts).overall_secure;
    let pf_no_message = no_message_optimal(u).probability;
    let pf_message_best = best_message_attack(u, cfg.priors, cfg.budget, cfg.seed, &cfg.search).probability;
    SecurityScore {
        pf_no_message,
        pf_message_best,
        secure,
        score: if secure {
            cfg.rule.combine(pf_no_message, pf_message_best)
        } else {
            f64::INFINITY
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub restarts: usize,
    /// Message-attack evaluations per restart, shared between all the score
    /// evaluations of that restart.
    pub budget: usize,
    /// Seed for the Haar starts (restart `r` uses stream `r`).
    pub seed: u64,
    /// Replaces the Haar start of restart 0.
    pub warm_start: Option<TaggingUnitary>,
    pub score: ScoreConfig,
    /// Step schedule of the outer refinement.
    pub refine: SearchConfig,
    /// Haar draws per restart before giving up on finding a secure start.
    pub max_start_attempts: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            budget: 2_000,
            seed: 0,
            warm_start: None,
            score: ScoreConfig::default(),
            refine: SearchConfig::default(),
            max_start_attempts: 100,
        }
    }
}

/// One line of the JSONL trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub restart: usize,
    pub iter: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub unitary: ComplexMatrix,
    pub score: SecurityScore,
    pub restart: usize,
    pub trace: Vec<TraceRecord>,
    /// Always true: the search carries no optimality certificate.
    pub heuristic: bool,
}

impl OptimizeResult {
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.trace {
            out.push_str(&serde_json::to_string(rec).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

struct RestartOutcome {
    point: ComplexMatrix,
    score: f64,
    trace: Vec<TraceRecord>,
}

/// Multi-start descent on the score. Restarts run concurrently; the best
/// score wins, ties going to the lowest restart index.
pub fn optimize(cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    if cfg.restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    let steps = (cfg.budget / cfg.score.budget.max(1)).max(1);
    let score_of = |m: &ComplexMatrix| -> f64 {
        match TaggingUnitary::with_tolerance(m.clone(), 1e-9) {
            Ok(u) => security_score(&u, &cfg.score).score,
            Err(_) => f64::INFINITY,
        }
    };
    let objective = |m: &ComplexMatrix| -score_of(m);

    let outcomes: Vec<Result<RestartOutcome>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = match (&cfg.warm_start, r) {
                (Some(w), 0) => w.matrix().clone(),
                _ => secure_start(cfg, r)?,
            };
            let local = refine(start, &objective, steps, &cfg.refine);
            let trace = local
                .trace
                .iter()
                .map(|t| TraceRecord {
                    restart: r,
                    iter: t.iter,
                    score: -t.value,
                })
                .collect();
            Ok(RestartOutcome {
                point: local.point,
                score: -local.value,
                trace,
            })
        })
        .collect();
    let outcomes: Vec<RestartOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.score < outcomes[best].score {
            best = i;
        }
    }
    let trace = outcomes.iter().flat_map(|o| o.trace.iter().copied()).collect();
    let winner = &outcomes[best];
    let u = TaggingUnitary::with_tolerance(winner.point.clone(), 1e-9)?;
    let score = security_score(&u, &cfg.score);
    if !score.secure {
        return Err(Error::NoSecureCandidate { attempts: cfg.restarts });
    }
    Ok(OptimizeResult {
        unitary: winner.point.clone(),
        score,
        restart: best,
        trace,
        heuristic: true,
    })
}

fn secure_start(cfg: &OptimizeConfig, restart: usize) -> Result<ComplexMatrix> {
    let mut rng = stream(cfg.seed, restart as u64);
    let opts = ValidateOptions {
        budget: 0,
        tolerances: cfg.score.tolerances,
        ..ValidateOptions::default()
    };
    for _ in 0..cfg.max_start_attempts.max(1) {
        let m = haar_random_unitary(4, &mut rng);
        let u = TaggingUnitary::with_tolerance(m.clone(), 1e-9)?;
        if validate_unitary(&u, &opts).overall_secure {
            return Ok(m);
        }
    }
    Err(Error::NoSecureCandidate {
        attempts: cfg.max_start_attempts,
    })
}
