//! Key reuse across rounds, and Eve's attempt to entangle an ancilla with
//! the key so that she can forge in a later round.
//!
//! Eve's target is the key–ancilla state
//! `α|01⟩|φ⟩ − β|10⟩|φ_⊥⟩`; from it she forges by re-running the tagging
//! with her ancilla as the control (`φ → 1`, `φ_⊥ → U`). Reaching it with
//! certainty requires a unitary on E ⊗ ancilla mapping `|φ_i⟩|ψ⟩` and
//! `U|φ_i⟩|ψ⟩` onto states with orthogonal ancilla parts, which is impossible
//! when `⟨φ_i|U|φ_i⟩ ≠ 0`.
//!
//! Register layout during a round: A ⊗ B ⊗ E ⊗ ancilla with index
//! `((2a + b)·4 + e)·d + k`; Eve's interaction acts on E ⊗ ancilla with
//! index `e·d + k`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{apply, inner, is_unitary, norm, ComplexMatrix, ZERO};
use crate::protocol::{make_singlet, sample_index, TaggingUnitary, MESSAGE_DIM};
use crate::tolerance::Tolerances;

const KEY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyReuseFeasibility {
    /// Certainty forgery after key reuse is impossible.
    pub ruled_out: bool,
    /// An `i` with `|⟨φ_i|U|φ_i⟩| > tol`.
    pub witness: Option<usize>,
    pub overlaps: [f64; 2],
}

pub fn key_reuse_feasibility(u: &TaggingUnitary, tol: &Tolerances) -> KeyReuseFeasibility {
    let overlaps = [u.entry(0, 0).norm(), u.entry(1, 1).norm()];
    let witness = (0..2).find(|&i| overlaps[i] > tol.condition);
    KeyReuseFeasibility {
        ruled_out: witness.is_some(),
        witness,
        overlaps,
    }
}

/// Eve's key–ancilla target `α|01⟩|φ⟩ − β|10⟩|φ_⊥⟩` plus the control basis
/// she uses for the reuse-round forgery.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyReuseAttackSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub phi: Vec<Complex64>,
    pub phi_perp: Vec<Complex64>,
}

impl KeyReuseAttackSpec {
    pub fn new(alpha: Complex64, beta: Complex64, phi: Vec<Complex64>, phi_perp: Vec<Complex64>) -> Result<Self> {
        if (alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("|α|² + |β|² must equal 1"));
        }
        if phi.len() != phi_perp.len() || phi.len() < 2 {
            return Err(Error::invalid("ancilla states must share a dimension of at least 2"));
        }
        if (norm(&phi) - 1.0).abs() > 1e-12 || (norm(&phi_perp) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("ancilla states must be normalized"));
        }
        if inner(&phi, &phi_perp).norm() > 1e-12 {
            return Err(Error::invalid("ancilla states must be orthogonal"));
        }
        Ok(Self {
            alpha,
            beta,
            phi,
            phi_perp,
        })
    }

    /// Qubit ancilla with `φ = |0⟩`, `φ_⊥ = |1⟩` and `α = β = 1/√2`.
    pub fn qubit_default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Self::new(h, h, vec![one, ZERO], vec![ZERO, one]).expect("valid by construction")
    }

    pub fn ancilla_dim(&self) -> usize {
        self.phi.len()
    }

    /// The target state on key ⊗ ancilla, index `(2a + b)·d + k`.
    pub fn target_state(&self) -> Vec<Complex64> {
        let d = self.ancilla_dim();
        let mut t = vec![ZERO; KEY * d];
        for k in 0..d {
            t[d + k] = self.alpha * self.phi[k];
            t[2 * d + k] = -self.beta * self.phi_perp[k];
        }
        t
    }

    /// Controlled tagging on E ⊗ ancilla with the ancilla as control:
    /// `1 ⊗ Π_φ + U ⊗ Π_⊥ + 1 ⊗ (1 − Π_φ − Π_⊥)`.
    pub fn forgery_operator(&self, u: &TaggingUnitary) -> ComplexMatrix {
        let d = self.ancilla_dim();
        let p_perp = ComplexMatrix::outer(&self.phi_perp);
        let rest = &ComplexMatrix::identity(d) - &p_perp;
        &ComplexMatrix::identity(MESSAGE_DIM).tensor(&rest) + &u.matrix().tensor(&p_perp)
    }
}

/// Everything Eve brings to a key-reuse attack.
#[derive(Debug, Clone)]
pub struct KeyReuseEve {
    pub spec: KeyReuseAttackSpec,
    /// Unitary on E ⊗ ancilla applied to every authentic message in flight.
    pub interaction: ComplexMatrix,
    pub ancilla_init: Vec<Complex64>,
}

impl KeyReuseEve {
    pub fn new(spec: KeyReuseAttackSpec, interaction: ComplexMatrix, ancilla_init: Vec<Complex64>) -> Result<Self> {
        let d = spec.ancilla_dim();
        if interaction.rows() != MESSAGE_DIM * d || interaction.cols() != MESSAGE_DIM * d {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}×{0} interaction", MESSAGE_DIM * d),
                actual: format!("{}×{}", interaction.rows(), interaction.cols()),
            });
        }
        let check = is_unitary(&interaction, 1e-10);
        if !check.unitary {
            return Err(Error::NotUnitary {
                deviation: check.deviation,
                tolerance: 1e-10,
            });
        }
        if ancilla_init.len() != d || (norm(&ancilla_init) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "initial ancilla state must be a unit vector of the ancilla dimension",
            ));
        }
        Ok(Self {
            spec,
            interaction,
            ancilla_init,
        })
    }

    /// Eve does nothing: identity interaction, qubit ancilla in `|0⟩`.
    pub fn passive() -> Self {
        let spec = KeyReuseAttackSpec::qubit_default();
        let init = spec.phi.clone();
        Self::new(spec, ComplexMatrix::identity(MESSAGE_DIM * 2), init).expect("valid by construction")
    }

    /// Flips the ancilla iff the message lies outside the accept subspace,
    /// `W = P ⊗ 1 + (1 − P) ⊗ σ_x`. Against a `U` that maps the accept
    /// subspace onto its complement this produces the target state exactly.
    pub fn branch_marking() -> Self {
        let spec = KeyReuseAttackSpec::qubit_default();
        let init = spec.phi.clone();
        let p = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), ZERO, ZERO]);
        let q = &ComplexMatrix::identity(MESSAGE_DIM) - &p;
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let w = &p.tensor(&ComplexMatrix::identity(2)) + &q.tensor(&sx);
        Self::new(spec, w, init).expect("valid by construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyReuseStats {
    pub trials: usize,
    pub rounds: usize,
    pub acceptance_per_round: Vec<f64>,
    /// Fraction of rounds (among all trials) where Bob accepted the bit Alice sent.
    pub correct_decoding_per_round: Vec<f64>,
    pub key_fidelity_per_round: Vec<f64>,
    pub final_key_fidelity: f64,
    /// Mean `|⟨target|key ⊗ ancilla⟩|²` after the honest rounds.
    pub target_overlap: f64,
    /// Fraction of trials where Eve's reuse-round forgery was accepted as her bit.
    pub forgery_success: f64,
}

/// Simulates `rounds` authentic rounds under Eve's interaction, keeping the
/// key after accepted rounds (a rejected round restarts from a fresh singlet
/// and Eve's initial ancilla), followed by one reuse round in which Eve
/// forges a uniformly random bit.
pub fn simulate_key_reuse<R: Rng + ?Sized>(
    u: &TaggingUnitary,
    rounds: usize,
    eve: &KeyReuseEve,
    trials: usize,
    rng: &mut R,
) -> Result<KeyReuseStats> {
    if rounds == 0 {
        return Err(Error::invalid("rounds must be at least 1"));
    }
    let d = eve.spec.ancilla_dim();
    let sim = RoundSimulator::new(u, eve);
    let target = eve.spec.target_state();

    let mut accepted = vec![0usize; rounds];
    let mut correct = vec![0usize; rounds];
    let mut fidelity = vec![0.0; rounds];
    let mut overlap = 0.0;
    let mut forged = 0usize;

    // Key states reachable from a fresh key form a tree indexed by the
    // (message, outcome) history since the last reset; each node's Born
    // distributions are computed once and only the sampling repeats.
    let mut tree = vec![StateNode::new(sim.fresh(), d, &target)];
    for _ in 0..trials {
        let mut node = 0;
        for r in 0..rounds {
            let message = rng.random_range(0..2usize);
            if tree[node].authentic[message].is_none() {
                tree[node].authentic[message] = Some(sim.authentic_round(&tree[node].state, message));
            }
            let step = tree[node].authentic[message].as_ref().expect("filled above");
            let outcome = sample_index(&step.probs, rng);
            if outcome < 2 {
                accepted[r] += 1;
                if outcome == message {
                    correct[r] += 1;
                }
                node = match tree[node].children[message][outcome] {
                    Some(child) => child,
                    None => {
                        let post = step.posts[outcome].clone();
                        tree.push(StateNode::new(post, d, &target));
                        let child = tree.len() - 1;
                        tree[node].children[message][outcome] = Some(child);
                        child
                    }
                };
            } else {
                node = 0;
            }
            fidelity[r] += tree[node].fidelity;
        }
        overlap += tree[node].target_overlap;
        let forged_bit = rng.random_range(0..2usize);
        if tree[node].forgery[forged_bit].is_none() {
            tree[node].forgery[forged_bit] = Some(sim.forgery_round(&tree[node].state, forged_bit).probs);
        }
        let probs = tree[node].forgery[forged_bit].expect("filled above");
        if sample_index(&probs, rng) == forged_bit {
            forged += 1;
        }
    }

    let t = trials.max(1) as f64;
    let per = |v: &[usize]| v.iter().map(|&c| c as f64 / t).collect::<Vec<_>>();
    let fidelity: Vec<f64> = fidelity.iter().map(|f| f / t).collect();
    Ok(KeyReuseStats {
        trials,
        rounds,
        acceptance_per_round: per(&accepted),
        correct_decoding_per_round: per(&correct),
        final_key_fidelity: *fidelity.last().expect("rounds ≥ 1"),
        key_fidelity_per_round: fidelity,
        target_overlap: overlap / t,
        forgery_success: forged as f64 / t,
    })
}

/// `⟨ψ⁻| Tr_anc |key_anc⟩⟨key_anc| |ψ⁻⟩`.
fn singlet_fidelity(key_anc: &[Complex64], d: usize) -> f64 {
    let s = make_singlet();
    (0..d)
        .map(|k| {
            (0..KEY)
                .map(|ka| s[ka].conj() * key_anc[ka * d + k])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

struct RoundSimulator<'a> {
    u: &'a TaggingUnitary,
    u_adj: ComplexMatrix,
    interaction: &'a ComplexMatrix,
    forgery: ComplexMatrix,
    init: Vec<Complex64>,
    d: usize,
}

impl<'a> RoundSimulator<'a> {
    fn new(u: &'a TaggingUnitary, eve: &'a KeyReuseEve) -> Self {
        Self {
            u,
            u_adj: u.adjoint(),
            interaction: &eve.interaction,
            forgery: eve.spec.forgery_operator(u),
            init: eve.ancilla_init.clone(),
            d: eve.spec.ancilla_dim(),
        }
    }

    fn fresh(&self) -> Vec<Complex64> {
        let s = make_singlet();
        let mut v = Vec::with_capacity(KEY * self.d);
        for ka in s {
            for &k in &self.init {
                v.push(ka * k);
            }
        }
        v
    }

    /// key ⊗ anc with a fresh message register in `|φ_m⟩`.
    fn attach_message(&self, key_anc: &[Complex64], m: usize) -> Vec<Complex64> {
        let d = self.d;
        let mut full = vec![ZERO; KEY * MESSAGE_DIM * d];
        for ka in 0..KEY {
            for k in 0..d {
                full[(ka * MESSAGE_DIM + m) * d + k] = key_anc[ka * d + k];
            }
        }
        full
    }

    /// Applies a 4×4 operator on E for the key indices selected by `which`.
    fn apply_on_message(&self, full: &mut [Complex64], op: &ComplexMatrix, which: impl Fn(usize) -> bool) {
        let d = self.d;
        for ka in (0..KEY).filter(|&ka| which(ka)) {
            for k in 0..d {
                let v: Vec<Complex64> = (0..MESSAGE_DIM).map(|e| full[(ka * MESSAGE_DIM + e) * d + k]).collect();
                let w = apply(op, &v);
                for e in 0..MESSAGE_DIM {
                    full[(ka * MESSAGE_DIM + e) * d + k] = w[e];
                }
            }
        }
    }

    /// Applies an operator on E ⊗ ancilla for every key index.
    fn apply_on_channel(&self, full: &mut [Complex64], op: &ComplexMatrix) {
        let block = MESSAGE_DIM * self.d;
        for ka in 0..KEY {
            let v = &full[ka * block..(ka + 1) * block];
            let w = apply(op, v);
            full[ka * block..(ka + 1) * block].copy_from_slice(&w);
        }
    }

    /// Decodes and returns the distribution of Bob's outcome together with
    /// the renormalized key ⊗ ancilla state for each accepted outcome.
    fn bob(&self, full: &mut [Complex64]) -> Step {
        let d = self.d;
        // b = 0 ⇔ key index even
        self.apply_on_message(full, &self.u_adj, |ka| ka % 2 == 0);
        let mut probs = [0.0; MESSAGE_DIM];
        for (idx, z) in full.iter().enumerate() {
            probs[(idx / d) % MESSAGE_DIM] += z.norm_sqr();
        }
        let posts = [0, 1].map(|outcome| {
            let mut post = vec![ZERO; KEY * d];
            if probs[outcome] > 0.0 {
                let scale = 1.0 / probs[outcome].sqrt();
                for ka in 0..KEY {
                    for k in 0..d {
                        post[ka * d + k] = full[(ka * MESSAGE_DIM + outcome) * d + k] * scale;
                    }
                }
            }
            post
        });
        Step { probs, posts }
    }

    fn authentic_round(&self, key_anc: &[Complex64], m: usize) -> Step {
        let mut full = self.attach_message(key_anc, m);
        // a = 1 ⇔ key index ≥ 2
        self.apply_on_message(&mut full, self.u.matrix(), |ka| ka >= 2);
        self.apply_on_channel(&mut full, self.interaction);
        self.bob(&mut full)
    }

    fn forgery_round(&self, key_anc: &[Complex64], m: usize) -> Step {
        let mut full = self.attach_message(key_anc, m);
        self.apply_on_channel(&mut full, &self.forgery);
        self.bob(&mut full)
    }
}

/// Outcome distribution of one round and the post-measurement key states
/// for the two accepting outcomes.
struct Step {
    probs: [f64; MESSAGE_DIM],
    posts: [Vec<Complex64>; 2],
}

struct StateNode {
    state: Vec<Complex64>,
    fidelity: f64,
    target_overlap: f64,
    authentic: [Option<Step>; 2],
    forgery: [Option<[f64; MESSAGE_DIM]>; 2],
    /// `children[message][outcome]` for accepted outcomes.
    children: [[Option<usize>; 2]; 2],
}

impl StateNode {
    fn new(state: Vec<Complex64>, d: usize, target: &[Complex64]) -> Self {
        Self {
            fidelity: singlet_fidelity(&state, d),
            target_overlap: inner(target, &state).norm_sqr(),
            state,
            authentic: [None, None],
            forgery: [None, None],
            children: [[None; 2]; 2],
        }
    }
}
