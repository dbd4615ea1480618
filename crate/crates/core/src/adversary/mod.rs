//! Forgery strategies against the protocol and their optimal success
//! probabilities.
//!
//! * no-message: Eve injects a state of her choice ([`no_message`])
//! * message substitution: Eve applies a unitary to Alice's message
//!   ([`message`], [`search`])
//! * key measurement: Eve tries to learn which tagging branch occurred
//!   ([`measurement`])
//! * key reuse: Eve entangles an ancilla with the key for a later forgery
//!   ([`key_reuse`])

pub mod key_reuse;
pub mod measurement;
pub mod message;
pub mod no_message;
pub mod search;

use serde::{Deserialize, Serialize};

use crate::matcore::ComplexMatrix;

pub use key_reuse::{
    key_reuse_feasibility, simulate_key_reuse, KeyReuseAttackSpec, KeyReuseFeasibility, KeyReuseStats,
};
pub use measurement::{key_distinguishability, KeyDistinguishability};
pub use message::{
    message_attack_pf, message_attack_pf_single, perfect_message_attack, simulate_message_attack, swap_attack, Priors,
};
pub use no_message::{
    no_message_optimal, no_message_pf, no_message_pf_mixed, no_message_pf_restricted, no_message_restricted_max,
    simulate_no_message, EveNoMessageState,
};
pub use search::{best_message_attack, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    EigenOptimal,
    GridOracle,
    Search,
}

/// A forgery probability together with the strategy achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub probability: f64,
    pub method: Method,
    /// Eve's state (4×1) or attack unitary (4×4).
    pub strategy: ComplexMatrix,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub evaluations: usize,
}

impl AttackResult {
    pub(crate) fn exact(probability: f64, method: Method, strategy: ComplexMatrix) -> Self {
        Self {
            probability: probability.clamp(0.0, 1.0),
            method,
            strategy,
            budget: None,
            seed: None,
            evaluations: 1,
        }
    }
}
