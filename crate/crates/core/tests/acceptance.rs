//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines always show.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use qauth_core::adversary::key_reuse::{KeyReuseAttackSpec, KeyReuseEve};
use qauth_core::adversary::{
    best_message_attack, key_reuse_feasibility, message_attack_pf, no_message_optimal, no_message_pf,
    no_message_pf_restricted, perfect_message_attack, simulate_key_reuse, EveNoMessageState, Priors, SearchConfig,
};
use qauth_core::cli::{attack_report, simulate_report, MonteCarloCheck, RunConfig};
use qauth_core::conditions::{check_condition3, check_condition4, ec_gorda_lhs, validate_unitary, ValidateOptions};
use qauth_core::fixtures;
use qauth_core::matcore::{haar_random_state, haar_random_unitary, norm};
use qauth_core::protocol::{channel_density, channel_density_classical_key, channel_density_simulated, run_honest};
use qauth_core::rng::{seeded, stream};
use qauth_core::{TaggingUnitary, Tolerances};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn haar_u(seed: u64, i: u64) -> TaggingUnitary {
    TaggingUnitary::new(haar_random_unitary(4, &mut stream(seed, i))).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion1() -> Outcome {
    let worst = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_u(1, i);
            let mut rng = stream(101, i);
            let mut worst_fid: f64 = 0.0;
            for m in 0..2u8 {
                for _ in 0..1_000 {
                    let r = run_honest(&u, m, &mut rng).map_err(|e| e.to_string())?;
                    ensure(r.accepted && r.decoded_bit == Some(m), || {
                        format!("u#{i} bit {m}: outcome {}", r.outcome)
                    })?;
                    worst_fid = worst_fid.max((1.0 - r.key_fidelity_after).abs());
                }
            }
            Ok(worst_fid)
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("key fidelity off by {worst:e}"))?;
    Ok(format!("200,000 runs decoded, max |1 - fidelity| = {worst:.1e}"))
}

fn criterion2() -> Outcome {
    let mut worst_trace: f64 = 0.0;
    let mut worst_classical: f64 = 0.0;
    for i in 0..100 {
        let u = haar_u(2, i);
        for m in 0..2u8 {
            let closed = channel_density(&u, m).unwrap();
            worst_trace = worst_trace.max(closed.max_abs_diff(&channel_density_simulated(&u, m).unwrap()));
            worst_classical = worst_classical.max(closed.max_abs_diff(&channel_density_classical_key(&u, m).unwrap()));
        }
    }
    ensure(worst_trace <= 1e-10 && worst_classical <= 1e-10, || {
        format!("partial trace {worst_trace:e}, classical key {worst_classical:e}")
    })?;
    Ok(format!(
        "max deviation: partial trace {worst_trace:.1e}, classical-key mode {worst_classical:.1e}"
    ))
}

/// Uses only `no_message_pf`: 5·10⁴ Haar states, then 5·10⁴ random
/// perturbation steps from the best one with an adaptive step size.
fn random_oracle(u: &TaggingUnitary, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let pf = |v: &[Complex64]| no_message_pf(u, &EveNoMessageState::from_slice(v).unwrap());
    let mut best = haar_random_state(4, &mut rng);
    let mut best_val = pf(&best);
    for _ in 1..50_000 {
        let s = haar_random_state(4, &mut rng);
        let v = pf(&s);
        if v > best_val {
            best = s;
            best_val = v;
        }
    }
    let mut sigma = 0.1;
    let mut misses = 0;
    for _ in 0..50_000 {
        let mut cand: Vec<Complex64> = best
            .iter()
            .map(|z| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                z + Complex64::new(a, b) * sigma
            })
            .collect();
        let n = norm(&cand);
        cand.iter_mut().for_each(|z| *z /= n);
        let v = pf(&cand);
        if v > best_val {
            best = cand;
            best_val = v;
            misses = 0;
        } else {
            misses += 1;
            if misses == 100 {
                sigma = (sigma * 0.5).max(1e-6);
                misses = 0;
            }
        }
    }
    best_val
}

/// Maximum of the restricted family over a fine `(|e0|, θ)` grid.
fn grid_oracle(u: &TaggingUnitary) -> f64 {
    let mut best: f64 = 0.0;
    for a in 0..=400 {
        for t in 0..256 {
            let v = no_message_pf_restricted(u, a as f64 / 400.0, 2.0 * PI * t as f64 / 256.0).unwrap();
            best = best.max(v);
        }
    }
    best
}

fn criterion3() -> Outcome {
    let xb = no_message_optimal(&fixtures::x_block()).probability;
    let id = no_message_optimal(&fixtures::identity()).probability;
    ensure((xb - 0.5).abs() <= 1e-12, || format!("X_block gives {xb}"))?;
    ensure((id - 1.0).abs() <= 1e-12, || format!("identity gives {id}"))?;
    let gaps = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_u(3, i);
            let eig = no_message_optimal(&u).probability;
            let r = random_oracle(&u, 300 + i);
            let g = grid_oracle(&u);
            ensure(eig >= r - 1e-9 && eig >= g - 1e-9, || {
                format!("u#{i}: eigen {eig} below oracle ({r}, {g})")
            })?;
            let gap = eig - r.max(g);
            ensure(gap <= 1e-3, || {
                format!("u#{i}: eigen {eig} vs best oracle {}", r.max(g))
            })?;
            Ok(gap)
        })
        .collect::<Result<Vec<f64>, String>>()?;
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(format!(
        "X_block {xb}, identity {id}; 50 Haar u: eigen - best oracle <= {worst:.1e}"
    ))
}

fn criterion4() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let u = haar_u(4, i);
        for a in 0..=100 {
            for t in 0..64 {
                let s = a as f64 / 100.0;
                let th = 2.0 * PI * t as f64 / 64.0;
                let state = EveNoMessageState::from_restricted(&u, s, th).unwrap();
                let d = (no_message_pf_restricted(&u, s, th).unwrap() - no_message_pf(&u, &state)).abs();
                worst = worst.max(d);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("50 u x 101 x 64 grid, max deviation {worst:.1e}"))
}

fn criterion5() -> Outcome {
    let tol = Tolerances::default();
    let pi = message_attack_pf(
        &fixtures::identity(),
        &fixtures::swap_accept_subspace(),
        Priors::default(),
    )
    .unwrap();
    ensure((pi - 1.0).abs() <= 1e-12, || format!("identity swap gives {pi}"))?;
    let xb = fixtures::x_block();
    let v = perfect_message_attack(&xb, &tol).ok_or("no perfect attack found for X_block")?;
    let px = message_attack_pf(&xb, &v, Priors::default()).unwrap();
    ensure((px - 1.0).abs() <= 1e-9, || format!("X_block attack gives {px}"))?;
    let pe = fixtures::worked_example();
    ensure(perfect_message_attack(&pe, &tol).is_none(), || {
        "worked example has a perfect attack".into()
    })?;
    let best = best_message_attack(&pe, Priors::default(), 10_000, 0, &SearchConfig::default()).probability;
    ensure(best <= 1.0 - 1e-4, || format!("search reached {best}"))?;
    Ok(format!(
        "identity {pi}, X_block {px}, worked example best search {best:.5}"
    ))
}

fn criterion6() -> Outcome {
    let opts = ValidateOptions {
        budget: 0,
        ..ValidateOptions::default()
    };
    let id = validate_unitary(&fixtures::identity(), &opts).overall_secure;
    let xb = validate_unitary(&fixtures::x_block(), &opts).overall_secure;
    let pe = validate_unitary(&fixtures::worked_example(), &opts).overall_secure;
    ensure(!id && !xb && pe, || {
        format!("identity {id}, X_block {xb}, worked example {pe}")
    })?;
    let tol = Tolerances::default();
    let counter = (0..1_000)
        .filter(|&i| {
            let u = haar_u(6, i);
            check_condition3(&u, &tol).satisfied && !check_condition4(&u, &tol).satisfied
        })
        .count();
    ensure(counter == 0, || format!("{counter} redundancy counterexamples"))?;
    Ok("identity insecure, X_block insecure, worked example secure; 0/1000 redundancy counterexamples".into())
}

fn criterion7() -> Outcome {
    let a = ec_gorda_lhs(0.0, 1.0, 0.0).map_err(|e| e.to_string())?;
    ensure((a - 0.5).abs() <= 1e-12, || format!("(0,1,0) gives {a}"))?;
    // x = y ⇒ x/y = 1: ½·½(1 + 1/√2) + ½·½·√2 + ¼
    let hand = 0.25 + 0.25 / 2f64.sqrt() + 0.25 * 2f64.sqrt() + 0.25;
    let b = ec_gorda_lhs(0.5, 0.5, 0.25).map_err(|e| e.to_string())?;
    ensure((b - hand).abs() <= 1e-9, || {
        format!("(0.5,0.5,0.25) gives {b}, hand {hand}")
    })?;
    Ok(format!("(0,1,0) -> {a}, (0.5,0.5,0.25) -> {b:.6}"))
}

fn criterion8() -> Outcome {
    let tol = Tolerances::default();
    // the criterion itself on 1000 Haar unitaries and the fixtures
    for i in 0..1_000 {
        let u = haar_u(8, i);
        let f = key_reuse_feasibility(&u, &tol);
        let overlap = u.entry(0, 0).norm().max(u.entry(1, 1).norm());
        ensure(f.ruled_out == (overlap > 1e-9), || {
            format!("u#{i}: ruled_out {} at overlap {overlap}", f.ruled_out)
        })?;
    }
    ensure(!key_reuse_feasibility(&fixtures::x_block(), &tol).ruled_out, || {
        "X_block ruled out".into()
    })?;

    let targets = [fixtures::worked_example(), haar_u(8, 5_000)];
    let mut best: f64 = 0.0;
    for (t, u) in targets.iter().enumerate() {
        ensure(key_reuse_feasibility(u, &tol).ruled_out, || {
            format!("target {t} not ruled out")
        })?;
        let worst = (0..1_000u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(800 + t as u64, k);
                let w = haar_random_unitary(8, &mut rng);
                let spec = KeyReuseAttackSpec::qubit_default();
                let init = spec.phi.clone();
                let eve = KeyReuseEve::new(spec, w, init).unwrap();
                simulate_key_reuse(u, 1, &eve, 10_000, &mut rng)
                    .unwrap()
                    .forgery_success
            })
            .reduce(|| 0.0, f64::max);
        ensure(worst < 1.0, || {
            format!("target {t}: a sampled interaction forged every time")
        })?;
        best = best.max(worst);
    }
    // sanity contrast: the same machinery does reach certainty when allowed
    let xb = simulate_key_reuse(
        &fixtures::x_block(),
        1,
        &KeyReuseEve::branch_marking(),
        10_000,
        &mut seeded(88),
    )
    .unwrap()
    .forgery_success;
    ensure(xb == 1.0, || format!("branch marking against X_block only {xb}"))?;
    Ok(format!(
        "criterion matches overlaps on 1000 u; 2 x 1000 Haar interactions x 1e4 trials, best reuse forgery {best:.4} (X_block contrast: {xb})"
    ))
}

fn criterion9() -> Outcome {
    let mut us = vec![fixtures::identity(), fixtures::x_block(), fixtures::worked_example()];
    us.extend((0..3).map(|i| haar_u(9, i)));
    let mut checks = 0;
    let mut worst_ratio: f64 = 0.0;
    for (k, u) in us.iter().enumerate() {
        let cfg = RunConfig {
            command: "attack",
            input: None,
            seed: 900 + k as u64,
            trials: 100_000,
            budget: 5_000,
            priors: Priors::default(),
            out: None,
            tolerances: Tolerances::default(),
        };
        let r = attack_report(u, &cfg).map_err(|e| e.to_string())?;
        let sim = simulate_report(u, 50_000, cfg.seed, false).map_err(|e| e.to_string())?;
        let honest = MonteCarloCheck::new(1.0, sim.summary.acceptance_rate.unwrap(), 100_000);
        for (name, c) in [
            ("no-message optimal", r.no_message.optimal_monte_carlo),
            ("no-message restricted", r.no_message.restricted_monte_carlo),
            ("message attack", r.message.monte_carlo),
            ("honest acceptance (attack)", r.honest_acceptance),
            ("honest acceptance (simulate)", honest),
        ] {
            ensure(c.within, || {
                format!("u#{k} {name}: analytic {} vs empirical {}", c.analytic, c.empirical)
            })?;
            checks += 1;
            if c.bound > 0.0 {
                worst_ratio = worst_ratio.max(c.delta.abs() / (c.bound / 3.0));
            }
        }
    }
    Ok(format!(
        "{checks} probabilities checked at N = 1e5, worst |delta| = {worst_ratio:.2} sigma"
    ))
}

fn criterion10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_qauth");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("u.json");
    std::fs::write(&input, fixtures::WORKED_EXAMPLE_JSON).unwrap();
    let input = input.to_str().unwrap().to_owned();
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "--input", &input, "--seed", "5", "--budget", "2000"],
        vec!["simulate", "--input", &input, "--seed", "5", "--trials", "500"],
        vec![
            "attack", "--input", &input, "--seed", "5", "--trials", "2000", "--budget", "2000",
        ],
        vec!["optimize", "--seed", "7", "--restarts", "2", "--budget", "600"],
        vec!["demo", "--seed", "5", "--trials", "2000", "--budget", "2000"],
    ];
    for args in &runs {
        let a = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        ensure(!a.stdout.is_empty(), || format!("{}: empty report", args[0]))?;
        ensure(a.stdout == b.stdout, || format!("{}: reports differ", args[0]))?;
        ensure(a.status.code() == b.status.code(), || {
            format!("{}: exit codes differ", args[0])
        })?;
    }
    Ok(format!(
        "{} subcommands byte-identical across repeated runs",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("honest decoding is deterministic", criterion1),
        ("channel density equals partial trace", criterion2),
        ("no-message optimum vs oracles", criterion3),
        ("restricted form matches general form", criterion4),
        ("message-attack certainties", criterion5),
        ("conditions checklist", criterion6),
        ("overlap-bound spot values", criterion7),
        ("key-reuse impossibility", criterion8),
        ("Monte Carlo agreement", criterion9),
        ("byte-identical reports", criterion10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
