//! WebAssembly bindings for the browser demo. Every export takes plain
//! arguments and returns a JSON string.

use delib_core::axioms::{satisfies_ejr, satisfies_pjr};
use delib_core::dynamics::{run_deliberation, RoundStreams, UpdateMode};
use delib_core::grouping::{golfer_cost, make_groups, update_meetings, MeetingCounts, Strategy};
use delib_core::population::{init_population, PopulationConfig};
use delib_core::rng::stream;
use delib_core::rules::{coverage_score, pav_score, run_rule, ApprovalProfile, Rule, RuleOptions, TieBreaker};
use delib_core::sets::CandidateSet;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Election {
    rule: &'static str,
    committee: Vec<usize>,
    av: f64,
    coverage: usize,
    pav: f64,
    ejr: bool,
    pjr: bool,
}

/// Elect a committee of size `k` under every rule. `ballots` holds one
/// ballot per line, candidates as whitespace- or comma-separated ids.
pub fn elect_json(ballots: &str, m: usize, k: usize, seed: u64) -> Result<String, String> {
    let mut parsed = Vec::new();
    for (i, line) in ballots.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut b = CandidateSet::EMPTY;
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let c: usize = tok.parse().map_err(|_| format!("line {}: {tok:?} is not a candidate id", i + 1))?;
            if c >= m {
                return Err(format!("line {}: candidate {c} not below m={m}", i + 1));
            }
            b.insert(c);
        }
        parsed.push(b);
    }
    let profile = ApprovalProfile::new(m, parsed).map_err(|e| e.to_string())?;
    let tie = TieBreaker::random(m, &mut stream(seed, 0, "tiebreak"));
    let mut out = Vec::new();
    for rule in Rule::ALL {
        let outcome = run_rule(rule, &profile, k, &tie, &RuleOptions::default()).map_err(|e| e.to_string())?;
        let w = outcome.committee;
        out.push(Election {
            rule: rule.name(),
            committee: w.iter().collect(),
            av: delib_core::rules::av_score(&profile, &w),
            coverage: coverage_score(&profile, &w),
            pav: pav_score(&profile, &w),
            ejr: satisfies_ejr(&profile, &w, k).map_err(|e| e.to_string())?.satisfied,
            pjr: satisfies_pjr(&profile, &w, k).map_err(|e| e.to_string())?.satisfied,
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Trace {
    strategy: &'static str,
    variance: Vec<f64>,
}

/// Utility variance after each deliberation round for every strategy,
/// starting from one shared population.
pub fn variance_traces_json(seed: u64, n_maj: usize, n_min: usize, g: usize, rounds: usize) -> Result<String, String> {
    let cfg = PopulationConfig {
        n_maj,
        n_min,
        ..PopulationConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let population = init_population(&cfg, &mut stream(seed, 0, "population")).map_err(|e| e.to_string())?;
    let streams = RoundStreams {
        master_seed: seed,
        replication: 0,
    };
    let mut out = Vec::new();
    for strategy in Strategy::ALL {
        let mut agents = population.agents.clone();
        let trace = run_deliberation(&mut agents, strategy, g, rounds, UpdateMode::Sequential, &streams).map_err(|e| e.to_string())?;
        out.push(Trace {
            strategy: strategy.name(),
            variance: trace.variance,
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Schedules {
    golfer: Vec<u64>,
    random: Vec<u64>,
}

/// Cumulative repeated-meeting cost per round for golfer and random schedules.
pub fn schedule_costs_json(seed: u64, n: usize, g: usize, rounds: usize) -> Result<String, String> {
    if n < 2 || g == 0 || g > n {
        return Err(format!("need 2 <= n and 1 <= g <= n, got n={n} g={g}"));
    }
    let blocs = vec![delib_core::population::Bloc::Majority; n];
    let run = |strategy: Strategy| -> Result<Vec<u64>, String> {
        let mut counts = MeetingCounts::new(n);
        let mut total = 0;
        let mut series = Vec::new();
        for round in 0..rounds {
            let mut rng = stream(seed, round as u64, strategy.name());
            let plan = make_groups(strategy, &blocs, g, &counts, &mut rng).map_err(|e| e.to_string())?;
            total += golfer_cost(&plan, &counts);
            counts = update_meetings(&counts, &plan);
            series.push(total);
        }
        Ok(series)
    };
    let out = Schedules {
        golfer: run(Strategy::IterGolfer)?,
        random: run(Strategy::IterRandom)?,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn elect(ballots: &str, m: usize, k: usize, seed: u64) -> Result<String, JsError> {
    elect_json(ballots, m, k, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn variance_traces(seed: u64, n_maj: usize, n_min: usize, g: usize, rounds: usize) -> Result<String, JsError> {
    variance_traces_json(seed, n_maj, n_min, g, rounds).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn schedule_costs(seed: u64, n: usize, g: usize, rounds: usize) -> Result<String, JsError> {
    schedule_costs_json(seed, n, g, rounds).map_err(|e| JsError::new(&e))
}
