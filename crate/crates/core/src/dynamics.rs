//! Bounded-confidence deliberation.
//!
//! Within a group every agent speaks once per round, in a fresh random
//! order. After each speech every other member moves each of its candidate
//! utilities toward the speaker's, but only for candidates where the two
//! are within the listener's confidence bound.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::{make_groups, GroupPlan, MeetingCounts, Strategy};
use crate::metrics::utility_variance;
use crate::population::Agent;
use crate::rng::{schedule_tag, stream, Stream};

/// What a speaker reports during a group round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// Current utilities, including updates from earlier speeches.
    #[default]
    Sequential,
    /// Utilities held at the start of the group's round.
    Batched,
}

/// Per-round population variance, starting with the pre-deliberation value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeliberationTrace {
    pub variance: Vec<f64>,
    pub plans: Vec<GroupPlan>,
}

pub fn influence_weight(listener: &Agent, speaker: &Agent) -> Result<f64> {
    if listener.id == speaker.id {
        return Err(Error::invalid(format!("agent {} cannot listen to itself", listener.id)));
    }
    Ok(if listener.bloc == speaker.bloc {
        listener.alpha
    } else {
        listener.beta
    })
}

/// Move `listener` toward `speaker` by weight `w` on every coordinate within
/// `delta`. Other coordinates are left bit-identical.
pub fn bc_update_in_place(listener: &mut [f64], speaker: &[f64], w: f64, delta: f64) {
    for (l, &s) in listener.iter_mut().zip(speaker) {
        let gap = s - *l;
        if gap.abs() <= delta {
            // convex step, clamped to the segment so rounding never leaves it
            let next = *l + w * gap;
            *l = next.clamp(l.min(s), l.max(s));
        }
    }
}

pub fn bc_update(listener: &[f64], speaker: &[f64], w: f64, delta: f64) -> Vec<f64> {
    let mut out = listener.to_vec();
    bc_update_in_place(&mut out, speaker, w, delta);
    out
}

/// One round of speeches inside `group`.
pub fn run_group_round<R: Rng + ?Sized>(group: &[usize], agents: &mut [Agent], mode: UpdateMode, rng: &mut R) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(group.len());
    for &a in group {
        if a >= agents.len() {
            return Err(Error::invalid(format!("agent {a} not in population")));
        }
        if !seen.insert(a) {
            return Err(Error::invalid(format!("agent {a} listed twice in group")));
        }
    }
    let mut speakers = group.to_vec();
    speakers.shuffle(rng);
    let opening: Vec<Vec<f64>> = match mode {
        UpdateMode::Batched => group.iter().map(|&a| agents[a].utilities.clone()).collect(),
        UpdateMode::Sequential => Vec::new(),
    };
    let mut report = Vec::new();
    for &s in &speakers {
        report.clear();
        match mode {
            UpdateMode::Sequential => report.extend_from_slice(&agents[s].utilities),
            UpdateMode::Batched => {
                let at = group.iter().position(|&a| a == s).expect("speaker in group");
                report.extend_from_slice(&opening[at]);
            }
        }
        for &l in group {
            if l == s {
                continue;
            }
            let w = influence_weight(&agents[l], &agents[s])?;
            let listener = &mut agents[l];
            bc_update_in_place(&mut listener.utilities, &report, w, listener.delta);
        }
    }
    Ok(())
}

/// Number of rounds actually run for `strategy` when `requested` are asked for.
pub fn effective_rounds(strategy: Strategy, requested: usize) -> usize {
    if strategy.is_iterative() {
        requested
    } else {
        requested.min(1)
    }
}

/// Source of per-round random streams for one replication.
#[derive(Debug, Clone, Copy)]
pub struct RoundStreams {
    pub master_seed: u64,
    pub replication: u64,
}

impl RoundStreams {
    pub fn round(&self, strategy: Strategy, round: usize) -> Stream {
        stream(self.master_seed, self.replication, &schedule_tag(strategy.name(), round))
    }
}

/// Deliberate for up to `rounds` rounds. Single-round strategies run at most
/// once and reuse their plan; iterative ones regroup every round.
pub fn run_deliberation(
    agents: &mut [Agent],
    strategy: Strategy,
    g: usize,
    rounds: usize,
    mode: UpdateMode,
    streams: &RoundStreams,
) -> Result<DeliberationTrace> {
    let n = agents.len();
    let blocs: Vec<_> = agents.iter().map(|a| a.bloc).collect();
    let mut counts = MeetingCounts::new(n);
    let mut trace = DeliberationTrace {
        variance: vec![utility_variance(agents)],
        plans: Vec::new(),
    };
    for round in 0..effective_rounds(strategy, rounds) {
        let mut rng = streams.round(strategy, round);
        let plan = make_groups(strategy, &blocs, g, &counts, &mut rng)?;
        for group in &plan.groups {
            run_group_round(group, agents, mode, &mut rng)?;
        }
        if strategy.is_iterative() {
            counts.record(&plan);
        }
        trace.variance.push(utility_variance(agents));
        trace.plans.push(plan);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{init_population, Bloc, PopulationConfig, Ranking};

    fn agent(id: usize, bloc: Bloc, u: &[f64], delta: f64, alpha: f64, beta: f64) -> Agent {
        Agent {
            id,
            bloc,
            ranking: Ranking::identity(u.len()),
            utilities: u.to_vec(),
            delta,
            alpha,
            beta,
            ballot_size: 1,
        }
    }

    #[test]
    fn weights_follow_blocs() {
        let maj = agent(0, Bloc::Majority, &[0.5], 1.0, 0.8, 0.3);
        let maj2 = agent(1, Bloc::Majority, &[0.5], 1.0, 0.6, 0.1);
        let min = agent(2, Bloc::Minority, &[0.5], 1.0, 0.7, 0.2);
        let min2 = agent(3, Bloc::Minority, &[0.5], 1.0, 0.9, 0.4);
        assert_eq!(influence_weight(&maj, &maj2).unwrap(), 0.8);
        assert_eq!(influence_weight(&maj, &min).unwrap(), 0.3);
        assert_eq!(influence_weight(&min, &min2).unwrap(), 0.7);
        assert!(influence_weight(&maj, &maj).is_err());
    }

    #[test]
    fn update_examples() {
        assert!((bc_update(&[0.4], &[0.8], 0.25, 0.5)[0] - 0.5).abs() < 1e-15);
        assert_eq!(bc_update(&[0.4], &[0.8], 0.25, 0.3), vec![0.4]);
        let l = [0.1, 0.7, 0.33];
        assert_eq!(bc_update(&l, &[0.2, 0.6, 0.9], 0.0, 1.0), l.to_vec());
    }

    #[test]
    fn singleton_and_identical_groups_are_inert() {
        let mut agents = vec![agent(0, Bloc::Majority, &[0.3, 0.6], 1.0, 0.5, 0.2)];
        let before = agents.clone();
        run_group_round(&[0], &mut agents, UpdateMode::Sequential, &mut stream(1, 0, "t")).unwrap();
        assert_eq!(agents, before);

        let mut pair = vec![
            agent(0, Bloc::Majority, &[0.3, 0.6], 1.0, 0.9, 0.2),
            agent(1, Bloc::Minority, &[0.3, 0.6], 0.2, 0.4, 0.4),
        ];
        let before = pair.clone();
        run_group_round(&[0, 1], &mut pair, UpdateMode::Sequential, &mut stream(2, 0, "t")).unwrap();
        assert_eq!(pair, before);
    }

    #[test]
    fn sequential_speeches_compound() {
        // agent 0 at 0.0, agent 1 at 1.0; whichever speaks first moves the
        // other to 0.5, and the second speech moves the first speaker a
        // quarter of the way.
        for seed in 0..20 {
            let mut agents = vec![
                agent(0, Bloc::Majority, &[0.0], 1.0, 0.5, 0.1),
                agent(1, Bloc::Majority, &[1.0], 1.0, 0.5, 0.1),
            ];
            let mut rng = stream(seed, 0, "t");
            let mut order = vec![0, 1];
            order.shuffle(&mut stream(seed, 0, "t"));
            run_group_round(&[0, 1], &mut agents, UpdateMode::Sequential, &mut rng).unwrap();
            let (first, second) = (order[0], order[1]);
            assert_eq!(agents[second].utilities[0], 0.5);
            let expected = if first == 0 { 0.25 } else { 0.75 };
            assert_eq!(agents[first].utilities[0], expected);
        }
    }

    #[test]
    fn group_validation() {
        let mut agents = vec![agent(0, Bloc::Majority, &[0.5], 1.0, 0.5, 0.1), agent(1, Bloc::Minority, &[0.5], 1.0, 0.5, 0.1)];
        assert!(run_group_round(&[0, 0], &mut agents, UpdateMode::Sequential, &mut stream(3, 0, "t")).is_err());
        assert!(run_group_round(&[0, 5], &mut agents, UpdateMode::Sequential, &mut stream(3, 0, "t")).is_err());
    }

    fn default_agents(seed: u64) -> Vec<Agent> {
        init_population(&PopulationConfig::default(), &mut stream(seed, 0, "pop")).unwrap().agents
    }

    #[test]
    fn deliberation_round_counts() {
        let streams = RoundStreams { master_seed: 4, replication: 0 };
        let mut agents = default_agents(4);
        let trace = run_deliberation(&mut agents, Strategy::Large, 10, 5, UpdateMode::Sequential, &streams).unwrap();
        assert_eq!(trace.plans.len(), 1);
        assert_eq!(trace.plans[0].groups.len(), 1);
        assert_eq!(trace.variance.len(), 2);

        let mut agents = default_agents(4);
        let trace = run_deliberation(&mut agents, Strategy::IterRandom, 10, 5, UpdateMode::Sequential, &streams).unwrap();
        assert_eq!(trace.plans.len(), 5);
        assert!(trace.plans.windows(2).all(|w| w[0] != w[1]));

        let mut agents = default_agents(4);
        let before = agents.clone();
        let trace = run_deliberation(&mut agents, Strategy::Heterogeneous, 10, 0, UpdateMode::Sequential, &streams).unwrap();
        assert_eq!(agents, before);
        assert_eq!(trace.variance.len(), 1);
    }

    #[test]
    fn deliberation_is_seeded() {
        let streams = RoundStreams { master_seed: 5, replication: 2 };
        for mode in [UpdateMode::Sequential, UpdateMode::Batched] {
            let mut a = default_agents(5);
            let mut b = default_agents(5);
            run_deliberation(&mut a, Strategy::IterGolfer, 10, 5, mode, &streams).unwrap();
            run_deliberation(&mut b, Strategy::IterGolfer, 10, 5, mode, &streams).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn consensus_is_fixed_point() {
        let streams = RoundStreams { master_seed: 6, replication: 0 };
        let mut agents = default_agents(6);
        let shared = agents[0].utilities.clone();
        for a in &mut agents {
            a.utilities.clone_from(&shared);
        }
        let before = agents.clone();
        for s in Strategy::ALL {
            run_deliberation(&mut agents, s, 10, 5, UpdateMode::Sequential, &streams).unwrap();
            assert_eq!(agents, before, "{s}");
        }
    }
}
