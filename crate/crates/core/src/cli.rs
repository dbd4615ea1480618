//! `qauth` command-line front end.
//!
//! Every subcommand writes one JSON document (stdout or `--out`) wrapped in
//! an envelope carrying the tool version, seed, tolerances and the SHA-256 of
//! the canonical input matrix, so a report is enough to reproduce itself.
//! Identical invocations produce byte-identical output.
//!
//! Exit codes: 0 success / secure, 3 insecure (`validate`), 2 invalid input,
//! 1 anything else. Stderr is for humans only.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::adversary::key_reuse::KeyReuseEve;
use crate::adversary::{
    self, best_message_attack, key_distinguishability, key_reuse_feasibility, message_attack_pf, no_message_optimal,
    no_message_restricted_max, perfect_message_attack, simulate_key_reuse, simulate_message_attack,
    simulate_no_message, swap_attack, AttackResult, EveNoMessageState, KeyDistinguishability, KeyReuseFeasibility,
    KeyReuseStats, Priors, SearchConfig,
};
use crate::conditions::{validate_unitary, ConditionReport, ValidateOptions};
use crate::designer::{optimize, OptimizeConfig, OptimizeResult, ScoreConfig};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::matcore::{matrix_from_json, matrix_to_json};
use crate::protocol::{run_honest, RunRecord, TaggingUnitary};
use crate::rng::{seeded, stream};
use crate::tolerance::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INSECURE: i32 = 3;

const TOOL: &str = "qauth";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "qauth",
    version,
    about = "Security analyzer for singlet-keyed quantum authentication of one classical bit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tagging unitary against the security checklist.
    Validate(CommonArgs),
    /// Run honest protocol rounds for both message bits.
    Simulate(SimulateArgs),
    /// Run every attack family plus Monte Carlo cross-checks.
    Attack(CommonArgs),
    /// Search for secure tagging unitaries with low forgery probabilities.
    Optimize(OptimizeArgs),
    /// Validate and attack the built-in worked-example unitary.
    Demo(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Tagging unitary as matrix JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials (per message bit for `simulate`).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Objective evaluations for attack searches.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Message priors as `p0,p1`.
    #[arg(long, default_value = "0.5,0.5")]
    pub priors: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance override `NAME=VALUE`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Emit only the summary, not one record per run.
    #[arg(long)]
    pub no_records: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Message-attack evaluations per candidate score.
    #[arg(long, default_value_t = 200)]
    pub inner_budget: usize,
    /// Matrix JSON used as the start of restart 0.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Trace JSONL path (defaults to `<out>.trace.jsonl` when `--out` is set).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub budget: usize,
    pub priors: Priors,
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_args(command: &'static str, a: &CommonArgs) -> Result<Self> {
        let mut tolerances = Tolerances::default();
        for t in &a.tol {
            tolerances.apply_override(t)?;
        }
        Ok(Self {
            command,
            input: a.input.clone(),
            seed: a.seed,
            trials: a.trials,
            budget: a.budget,
            priors: Priors::parse(&a.priors)?,
            out: a.out.clone(),
            tolerances,
        })
    }

    fn validate_options(&self) -> ValidateOptions {
        ValidateOptions {
            budget: self.budget,
            seed: self.seed,
            priors: self.priors,
            tolerances: self.tolerances,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    trials: usize,
    budget: usize,
    priors: [f64; 2],
    tolerances: &'a Tolerances,
    input_sha256: Option<String>,
    result: T,
}

/// Hex SHA-256 of the canonical matrix JSON of `u`.
pub fn matrix_sha256(u: &TaggingUnitary) -> String {
    let digest = Sha256::digest(matrix_to_json(u.matrix()).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads, parses and checks a tagging unitary file.
pub fn load_unitary(path: &Path, tol: &Tolerances) -> Result<TaggingUnitary> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let m = matrix_from_json(&text)?;
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4×4 tagging unitary".into(),
            actual: format!("{}×{}", m.rows(), m.cols()),
        });
    }
    TaggingUnitary::with_tolerance(m, tol.unitarity)
}

fn require_input(cfg: &RunConfig) -> Result<TaggingUnitary> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("`{}` needs --input PATH", cfg.command)))?;
    load_unitary(path, &cfg.tolerances)
}

/// A simulated frequency next to the probability it should estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloCheck {
    pub analytic: f64,
    pub empirical: f64,
    pub trials: usize,
    pub delta: f64,
    /// `3√(p(1 − p)/N)`.
    pub bound: f64,
    pub within: bool,
}

impl MonteCarloCheck {
    pub fn new(analytic: f64, empirical: f64, trials: usize) -> Self {
        let p = analytic.clamp(0.0, 1.0);
        let bound = if trials == 0 {
            0.0
        } else {
            3.0 * (p * (1.0 - p) / trials as f64).sqrt()
        };
        let delta = empirical - analytic;
        Self {
            analytic,
            empirical,
            trials,
            delta,
            bound,
            within: trials == 0 || delta.abs() <= bound + 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoMessageFamily {
    pub optimal: AttackResult,
    pub restricted: AttackResult,
    pub optimal_monte_carlo: MonteCarloCheck,
    pub restricted_monte_carlo: MonteCarloCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct MessageFamily {
    /// Certainty construction when the checklist says one exists, otherwise
    /// the best search result.
    pub best: AttackResult,
    /// A certainty attack exists by direct construction.
    pub certainty_construction: bool,
    pub monte_carlo: MonteCarloCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct KeyReuseFamily {
    pub feasibility: KeyReuseFeasibility,
    /// One honest round then a reuse-round forgery, with Eve marking the
    /// tagging branch on a qubit ancilla.
    pub branch_marking: KeyReuseStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub no_message: NoMessageFamily,
    pub message: MessageFamily,
    pub measurement: KeyDistinguishability,
    pub key_reuse: KeyReuseFamily,
    pub honest_acceptance: MonteCarloCheck,
}

/// All four attack families with Monte Carlo cross-checks. Each simulation
/// draws from its own stream of `seed`.
pub fn attack_report(u: &TaggingUnitary, cfg: &RunConfig) -> Result<AttackReport> {
    let n = cfg.trials;

    let optimal = no_message_optimal(u);
    let restricted = no_message_restricted_max(u)?;
    let mc_state = |r: &AttackResult, k: u64| -> Result<MonteCarloCheck> {
        let eve = EveNoMessageState::from_slice(r.strategy.data())?;
        let f = simulate_no_message(u, &eve, n, &mut stream(cfg.seed, k));
        Ok(MonteCarloCheck::new(r.probability, f, n))
    };
    let no_message = NoMessageFamily {
        optimal_monte_carlo: mc_state(&optimal, 1)?,
        restricted_monte_carlo: mc_state(&restricted, 2)?,
        optimal,
        restricted,
    };

    let best = match perfect_message_attack(u, &cfg.tolerances) {
        Some(v) => {
            let p = message_attack_pf(u, &v, cfg.priors)?;
            AttackResult {
                probability: p,
                method: adversary::Method::ClosedForm,
                strategy: v,
                budget: None,
                seed: None,
                evaluations: 1,
            }
        }
        None => best_message_attack(u, cfg.priors, cfg.budget, cfg.seed, &SearchConfig::default()),
    };
    let f = simulate_message_attack(u, &best.strategy, cfg.priors, n, &mut stream(cfg.seed, 3));
    let message = MessageFamily {
        monte_carlo: MonteCarloCheck::new(best.probability, f, n),
        certainty_construction: swap_attack(u, &cfg.tolerances).is_some(),
        best,
    };

    let key_reuse = KeyReuseFamily {
        feasibility: key_reuse_feasibility(u, &cfg.tolerances),
        branch_marking: simulate_key_reuse(u, 1, &KeyReuseEve::branch_marking(), n, &mut stream(cfg.seed, 4))?,
    };

    let mut rng = stream(cfg.seed, 5);
    let mut accepted = 0usize;
    for i in 0..n {
        if run_honest(u, (i % 2) as u8, &mut rng)?.accepted {
            accepted += 1;
        }
    }
    let honest = if n == 0 { 0.0 } else { accepted as f64 / n as f64 };

    Ok(AttackReport {
        no_message,
        message,
        measurement: key_distinguishability(u, &cfg.tolerances),
        key_reuse,
        honest_acceptance: MonteCarloCheck::new(1.0, honest, n),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub trials_per_message: usize,
    pub total: usize,
    pub empty: bool,
    pub acceptance_rate: Option<f64>,
    pub decode_accuracy: Option<f64>,
    pub mean_key_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub summary: SimulationSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<RunRecord>>,
}

/// `trials` honest runs for message 0, then for message 1, from one stream.
pub fn simulate_report(u: &TaggingUnitary, trials: usize, seed: u64, keep_records: bool) -> Result<SimulationReport> {
    let mut rng = seeded(seed);
    let mut records = Vec::with_capacity(if keep_records { 2 * trials } else { 0 });
    let (mut accepted, mut correct, mut fid) = (0usize, 0usize, 0.0);
    for m in 0..2u8 {
        for _ in 0..trials {
            let r = run_honest(u, m, &mut rng)?;
            accepted += usize::from(r.accepted);
            correct += usize::from(r.decoded_bit == Some(m));
            fid += r.key_fidelity_after;
            if keep_records {
                records.push(r);
            }
        }
    }
    let total = 2 * trials;
    let rate = |x: f64| (total > 0).then(|| x / total as f64);
    Ok(SimulationReport {
        summary: SimulationSummary {
            trials_per_message: trials,
            total,
            empty: total == 0,
            acceptance_rate: rate(accepted as f64),
            decode_accuracy: rate(correct as f64),
            mean_key_fidelity: rate(fid),
        },
        records: keep_records.then_some(records),
    })
}

#[derive(Debug, Clone, Serialize)]
struct DemoReport {
    validation: ConditionReport,
    attacks: AttackReport,
}

#[derive(Debug, Clone, Serialize)]
struct OptimizeReport<'a> {
    restarts: usize,
    inner_budget: usize,
    #[serde(flatten)]
    outcome: &'a OptimizeResult,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => EXIT_INVALID,
            };
        }
    };
    match dispatch(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Io(_) | Error::NoSecureCandidate { .. } => EXIT_FAILURE,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate(a) => {
            let cfg = RunConfig::from_args("validate", a)?;
            let u = require_input(&cfg)?;
            let report = validate_unitary(&u, &cfg.validate_options());
            let secure = report.overall_secure;
            emit(&cfg, Some(&u), &report, stdout)?;
            let _ = writeln!(stderr, "{}", if secure { "secure" } else { "insecure" });
            Ok(if secure { EXIT_OK } else { EXIT_INSECURE })
        }
        Command::Simulate(s) => {
            let cfg = RunConfig::from_args("simulate", &s.common)?;
            let u = require_input(&cfg)?;
            let report = simulate_report(&u, cfg.trials, cfg.seed, !s.no_records)?;
            emit(&cfg, Some(&u), &report, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Attack(a) => {
            let cfg = RunConfig::from_args("attack", a)?;
            let u = require_input(&cfg)?;
            let report = attack_report(&u, &cfg)?;
            emit(&cfg, Some(&u), &report, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Demo(a) => {
            let cfg = RunConfig::from_args("demo", a)?;
            let u = fixtures::worked_example();
            let validation = validate_unitary(&u, &cfg.validate_options());
            let attacks = attack_report(&u, &cfg)?;
            tell_story(&validation, &attacks, stderr);
            let secure = validation.overall_secure;
            emit(&cfg, Some(&u), &DemoReport { validation, attacks }, stdout)?;
            Ok(if secure { EXIT_OK } else { EXIT_INSECURE })
        }
        Command::Optimize(o) => {
            let cfg = RunConfig::from_args("optimize", &o.common)?;
            let warm = match &o.warm_start {
                Some(p) => Some(load_unitary(p, &cfg.tolerances)?),
                None => None,
            };
            let ocfg = OptimizeConfig {
                restarts: o.restarts,
                budget: cfg.budget,
                seed: cfg.seed,
                warm_start: warm.clone(),
                score: ScoreConfig {
                    budget: o.inner_budget,
                    seed: cfg.seed,
                    priors: cfg.priors,
                    tolerances: cfg.tolerances,
                    ..ScoreConfig::default()
                },
                ..OptimizeConfig::default()
            };
            let result = optimize(&ocfg)?;
            let trace_path = o.trace.clone().or_else(|| {
                cfg.out
                    .as_ref()
                    .map(|p| PathBuf::from(format!("{}.trace.jsonl", p.display())))
            });
            if let Some(p) = trace_path {
                std::fs::write(p, result.trace_jsonl())?;
            }
            let report = OptimizeReport {
                restarts: o.restarts,
                inner_budget: o.inner_budget,
                outcome: &result,
            };
            emit(&cfg, warm.as_ref(), &report, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn emit<T: Serialize>(
    cfg: &RunConfig,
    input: Option<&TaggingUnitary>,
    result: &T,
    stdout: &mut dyn Write,
) -> Result<()> {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command: cfg.command,
        seed: cfg.seed,
        trials: cfg.trials,
        budget: cfg.budget,
        priors: [cfg.priors.p0, cfg.priors.p1],
        tolerances: &cfg.tolerances,
        input_sha256: input.map(matrix_sha256),
        result,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn tell_story(v: &ConditionReport, a: &AttackReport, out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "worked example: M0 = [[1/2, 1/2], [0, 0]], completed by Gram-Schmidt"
    );
    let _ = writeln!(
        out,
        "  case 1 (rows do not overlap): |row0|^2 = {:.3}, |row1|^2 = {:.3} -> {}",
        v.case1.row_norms_sq[0],
        v.case1.row_norms_sq[1],
        pass(v.case1.satisfied)
    );
    let _ = writeln!(
        out,
        "  condition 3: {:?} -> {}",
        v.condition3.clause,
        pass(v.condition3.satisfied)
    );
    let _ = writeln!(out, "  condition 4: {}", pass(v.condition4.satisfied));
    let _ = writeln!(
        out,
        "  overall: {}",
        if v.overall_secure { "secure" } else { "insecure" }
    );
    let _ = writeln!(
        out,
        "  no-message forgery: optimal {:.5}, restricted family {:.5}",
        a.no_message.optimal.probability, a.no_message.restricted.probability
    );
    let _ = writeln!(
        out,
        "  message substitution (best found): {:.5}",
        a.message.best.probability
    );
    let _ = writeln!(
        out,
        "  key distinguishable by measurement: {}",
        a.measurement.distinguishable
    );
    let _ = writeln!(
        out,
        "  certainty forgery after key reuse ruled out: {}",
        a.key_reuse.feasibility.ruled_out
    );
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}
