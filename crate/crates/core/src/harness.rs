//! Replication driver and experiment aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::axioms::{satisfies_ejr, satisfies_pjr};
use crate::config::ExperimentConfig;
use crate::dynamics::{run_deliberation, DeliberationTrace, RoundStreams};
use crate::error::{Error, Result};
use crate::grouping::Strategy;
use crate::metrics::{
    intergroup_disagreement, minority_supported_candidates, objective_scores, paired_tests, representation_ratio_with,
    utilitarian_ratio_with, utility_variance, ConsensusStats, ObjectiveScores, PairedTestResult, MIN_PAIRED_SAMPLES,
};
use crate::population::{derive_ballot, init_population, rerank_from_utilities, Agent, Bloc, Population};
use crate::rng::{phase, stream};
use crate::rules::{
    av_committee, cc_committee_with, coverage_score, optimal_welfare_committee, run_rule, ApprovalProfile, Committee, Diagnostics,
    Rule, TieBreaker,
};
use crate::sets::CandidateSet;

/// Either the pre-deliberation baseline or a deliberation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition(pub Option<Strategy>);

impl Condition {
    pub const INITIAL: Condition = Condition(None);

    pub fn name(self) -> &'static str {
        self.0.map_or("initial", Strategy::name)
    }

    /// Baseline first, then the strategies in presentation order.
    pub fn all() -> Vec<Condition> {
        std::iter::once(Condition::INITIAL)
            .chain(Strategy::ALL.into_iter().map(|s| Condition(Some(s))))
            .collect()
    }

    fn sort_key(self) -> usize {
        self.0.map_or(0, |s| 1 + Strategy::ALL.iter().position(|&x| x == s).expect("listed"))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("initial") {
            Ok(Condition::INITIAL)
        } else {
            s.parse().map(|st| Condition(Some(st)))
        }
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub replication: u64,
    pub strategy: Condition,
    pub rule: Rule,
    pub scores: ObjectiveScores,
    pub consensus: ConsensusStats,
    pub attempts: usize,
    pub ms: u64,
    pub committee: Committee,
    /// MES seat prices, empty for the other rules.
    pub q: Vec<f64>,
    /// Seats filled by the MES completion step.
    pub completion: usize,
}

/// An eligible starting point for one replication.
#[derive(Debug, Clone)]
pub struct Instance {
    pub population: Population,
    pub profile: ApprovalProfile,
    pub attempts: usize,
}

fn profile_of(agents: &[Agent], m: usize) -> Result<ApprovalProfile> {
    ApprovalProfile::new(m, agents.iter().map(derive_ballot).collect())
}

/// Resample populations until both `RR(AV) < threshold` and
/// `UR(CC) < threshold` on the initial profile.
pub fn generate_eligible_instance(cfg: &ExperimentConfig, replication: u64, tie: &TieBreaker) -> Result<Instance> {
    cfg.validate()?;
    let k = cfg.population.k;
    for attempt in 1..=cfg.max_attempts {
        let tag = format!("{}:{attempt}", phase::POPULATION);
        let population = init_population(&cfg.population, &mut stream(cfg.master_seed, replication, &tag))?;
        let profile = profile_of(&population.agents, cfg.population.m)?;
        let utilities = population.utilities();
        let av = av_committee(&profile, k, tie)?;
        // coverage never exceeds n, so this already bounds RR(AV) from below
        if coverage_score(&profile, &av.committee) as f64 >= cfg.eligibility_threshold * profile.n() as f64 {
            continue;
        }
        let cc = cc_committee_with(&profile, k, tie, cfg.cc_tiebreak)?;
        let max_coverage = coverage_score(&profile, &cc.committee);
        let (_, optimal) = optimal_welfare_committee(&utilities, k)?;
        let rr_av = representation_ratio_with(&profile, &av.committee, max_coverage)?;
        let ur_cc = utilitarian_ratio_with(&utilities, &cc.committee, optimal)?;
        if rr_av < cfg.eligibility_threshold && ur_cc < cfg.eligibility_threshold {
            return Ok(Instance {
                population,
                profile,
                attempts: attempt,
            });
        }
    }
    Err(Error::EligibilityExhausted {
        attempts: cfg.max_attempts,
    })
}

pub fn tie_breaker(cfg: &ExperimentConfig, replication: u64) -> TieBreaker {
    TieBreaker::random(cfg.population.m, &mut stream(cfg.master_seed, replication, phase::TIEBREAK))
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    replication: u64,
    tie: &'a TieBreaker,
    blocs: Vec<Bloc>,
    minority_set: CandidateSet,
    attempts: usize,
}

impl Context<'_> {
    fn score_condition(&self, condition: Condition, agents: &[Agent], out: &mut Vec<RunRecord>) -> Result<()> {
        let k = self.cfg.population.k;
        let profile = profile_of(agents, self.cfg.population.m)?;
        let utilities: Vec<_> = agents.iter().map(|a| a.utilities.clone()).collect();
        let consensus = ConsensusStats {
            utility_variance: utility_variance(agents),
            intergroup_disagreement: intergroup_disagreement(&profile, &self.blocs)?,
        };
        let (_, optimal) = optimal_welfare_committee(&utilities, k)?;
        let mut max_coverage = None;
        for &rule in &self.cfg.rules {
            let start = self.cfg.record_timing.then(Instant::now);
            let outcome = run_rule(rule, &profile, k, self.tie, &self.cfg.rule_options())?;
            let coverage = match (rule, max_coverage) {
                (_, Some(c)) => c,
                (Rule::Cc, None) => coverage_score(&profile, &outcome.committee),
                (_, None) => coverage_score(&profile, &cc_committee_with(&profile, k, self.tie, self.cfg.cc_tiebreak)?.committee),
            };
            max_coverage = Some(coverage);
            let ejr = satisfies_ejr(&profile, &outcome.committee, k)?.satisfied;
            let pjr = satisfies_pjr(&profile, &outcome.committee, k)?.satisfied;
            let scores = objective_scores(&profile, &utilities, &outcome.committee, optimal, coverage, self.minority_set, ejr, pjr)?;
            let (q, completion) = match outcome.diagnostics {
                Diagnostics::Mes { q, completion } => (q, completion),
                Diagnostics::None => (Vec::new(), 0),
            };
            out.push(RunRecord {
                replication: self.replication,
                strategy: condition,
                rule,
                scores,
                consensus,
                attempts: self.attempts,
                ms: start.map_or(0, |t| t.elapsed().as_millis() as u64),
                committee: outcome.committee,
                q,
                completion,
            });
        }
        Ok(())
    }
}

/// Agents after deliberating under `strategy`, with rankings and ballots rebuilt.
pub fn deliberate(
    cfg: &ExperimentConfig,
    replication: u64,
    population: &Population,
    strategy: Strategy,
) -> Result<(Vec<Agent>, DeliberationTrace)> {
    let mut agents = population.agents.clone();
    let streams = RoundStreams {
        master_seed: cfg.master_seed,
        replication,
    };
    let trace = run_deliberation(&mut agents, strategy, cfg.g, cfg.rounds, cfg.update_mode, &streams)?;
    for a in &mut agents {
        a.ranking = rerank_from_utilities(a);
    }
    Ok((agents, trace))
}

/// All records of one replication: the baseline for every rule, then every
/// strategy for every rule.
pub fn run_replication(cfg: &ExperimentConfig, replication: u64) -> Result<Vec<RunRecord>> {
    let tie = tie_breaker(cfg, replication);
    let instance = generate_eligible_instance(cfg, replication, &tie)?;
    let blocs = instance.population.blocs();
    let ctx = Context {
        cfg,
        replication,
        tie: &tie,
        minority_set: minority_supported_candidates(&instance.profile, &blocs, cfg.minority_rule)?,
        blocs,
        attempts: instance.attempts,
    };
    let mut out = Vec::with_capacity((cfg.strategies.len() + 1) * cfg.rules.len());
    ctx.score_condition(Condition::INITIAL, &instance.population.agents, &mut out)?;
    for &strategy in &cfg.strategies {
        let (agents, _) = deliberate(cfg, replication, &instance.population, strategy)?;
        ctx.score_condition(Condition(Some(strategy)), &agents, &mut out)?;
    }
    Ok(out)
}

/// Run every replication, in parallel on `threads` workers (all cores when
/// `None`). Records come back sorted by replication, condition and rule.
pub fn run_records(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let per_rep: Vec<Vec<RunRecord>> = pool.install(|| {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|r| run_replication(cfg, r))
            .collect::<Result<_>>()
    })?;
    let mut records: Vec<RunRecord> = per_rep.into_iter().flatten().collect();
    canonical_sort(&mut records);
    Ok(records)
}

pub fn canonical_sort(records: &mut [RunRecord]) {
    records.sort_by_key(|r| (r.replication, r.strategy.sort_key(), r.rule));
}

/// Names of the per-record quantities that are aggregated.
pub const OBJECTIVES: [&str; 9] = ["ur", "rr", "uragg", "vs", "ejr", "pjr", "minority_preserved", "variance", "disagreement"];

pub fn objective_value(r: &RunRecord, objective: &str) -> Option<f64> {
    let s = &r.scores;
    Some(match objective {
        "ur" => s.ur,
        "rr" => s.rr,
        "uragg" => s.uragg,
        "vs" => s.vs,
        "ejr" => f64::from(u8::from(s.ejr_ok)),
        "pjr" => f64::from(u8::from(s.pjr_ok)),
        "minority_preserved" => s.minority_preserved as f64,
        "variance" => r.consensus.utility_variance,
        "disagreement" => r.consensus.intergroup_disagreement,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Standard error of the mean, zero for a single observation.
    pub se: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        let mean = if n == 0 { f64::NAN } else { values.iter().sum::<f64>() / n as f64 };
        let se = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Summary { mean, se, count: n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub strategy: Condition,
    pub rule: Rule,
    pub objectives: BTreeMap<String, Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rule: Rule,
    pub objective: String,
    pub a: Condition,
    pub b: Condition,
    /// `None` when fewer than the minimum number of paired replications exist.
    pub test: Option<PairedTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub replications: usize,
    pub attempts: Summary,
    pub cells: Vec<CellSummary>,
    pub significance: Vec<Comparison>,
    /// Set when too few replications exist for paired tests.
    pub insufficient_data: bool,
}

impl AggregateReport {
    pub fn cell(&self, strategy: Condition, rule: Rule) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.strategy == strategy && c.rule == rule)
    }

    pub fn mean(&self, strategy: Condition, rule: Rule, objective: &str) -> Option<f64> {
        self.cell(strategy, rule)?.objectives.get(objective).map(|s| s.mean)
    }

    pub fn comparison(&self, rule: Rule, objective: &str, a: Condition, b: Condition) -> Option<&Comparison> {
        self.significance
            .iter()
            .find(|c| c.rule == rule && c.objective == objective && ((c.a == a && c.b == b) || (c.a == b && c.b == a)))
    }
}

/// Per-replication series of `objective` for one cell, ordered by replication.
pub fn series(records: &[RunRecord], strategy: Condition, rule: Rule, objective: &str) -> Vec<(u64, f64)> {
    let mut v: Vec<(u64, f64)> = records
        .iter()
        .filter(|r| r.strategy == strategy && r.rule == rule)
        .filter_map(|r| objective_value(r, objective).map(|x| (r.replication, x)))
        .collect();
    v.sort_by_key(|p| p.0);
    v
}

/// Pair two series on replication id.
fn paired(a: &[(u64, f64)], b: &[(u64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let lookup: BTreeMap<u64, f64> = b.iter().copied().collect();
    a.iter()
        .filter_map(|&(rep, x)| lookup.get(&rep).map(|&y| (x, y)))
        .unzip()
}

pub fn aggregate(records: &[RunRecord]) -> Result<AggregateReport> {
    let mut conditions: Vec<Condition> = records.iter().map(|r| r.strategy).collect();
    conditions.sort_by_key(|c| c.sort_key());
    conditions.dedup();
    let mut rules: Vec<Rule> = records.iter().map(|r| r.rule).collect();
    rules.sort();
    rules.dedup();
    let mut reps: Vec<u64> = records.iter().map(|r| r.replication).collect();
    reps.sort_unstable();
    reps.dedup();

    let mut attempts = BTreeMap::new();
    for r in records {
        attempts.entry(r.replication).or_insert(r.attempts as f64);
    }
    let attempts: Vec<f64> = attempts.into_values().collect();

    let mut cells = Vec::new();
    let mut significance = Vec::new();
    let insufficient_data = reps.len() < MIN_PAIRED_SAMPLES;
    for &rule in &rules {
        let mut cached: BTreeMap<(Condition, &str), Vec<(u64, f64)>> = BTreeMap::new();
        for &cond in &conditions {
            let mut objectives = BTreeMap::new();
            for objective in OBJECTIVES {
                let s = series(records, cond, rule, objective);
                if s.is_empty() {
                    continue;
                }
                let values: Vec<f64> = s.iter().map(|p| p.1).collect();
                objectives.insert(objective.to_string(), Summary::of(&values));
                cached.insert((cond, objective), s);
            }
            if !objectives.is_empty() {
                cells.push(CellSummary {
                    strategy: cond,
                    rule,
                    objectives,
                });
            }
        }
        for objective in OBJECTIVES {
            for (i, &a) in conditions.iter().enumerate() {
                for &b in &conditions[i + 1..] {
                    let (Some(sa), Some(sb)) = (cached.get(&(a, objective)), cached.get(&(b, objective))) else {
                        continue;
                    };
                    let (xa, xb) = paired(sa, sb);
                    let test = if xa.len() >= MIN_PAIRED_SAMPLES {
                        Some(paired_tests(&xa, &xb)?)
                    } else {
                        None
                    };
                    significance.push(Comparison {
                        rule,
                        objective: objective.to_string(),
                        a,
                        b,
                        test,
                    });
                }
            }
        }
    }
    Ok(AggregateReport {
        replications: reps.len(),
        attempts: Summary::of(&attempts),
        cells,
        significance,
        insufficient_data,
    })
}

/// Run all replications and aggregate them.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<(Vec<RunRecord>, AggregateReport)> {
    let records = run_records(cfg, threads)?;
    let report = aggregate(&records)?;
    Ok((records, report))
}
