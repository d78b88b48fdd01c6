//! Deliberation group formation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::Bloc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Single-bloc groups only.
    Homogeneous,
    /// Every group mirrors the population's bloc ratio.
    Heterogeneous,
    /// Uniformly random balanced partition.
    Random,
    /// One group holding everyone.
    Large,
    /// A fresh random partition every round.
    IterRandom,
    /// Per-round partitions that avoid repeated pairings.
    IterGolfer,
}

impl Strategy {
    /// Presentation order, least to most exposure.
    pub const ALL: [Strategy; 6] = [
        Strategy::Homogeneous,
        Strategy::Random,
        Strategy::Heterogeneous,
        Strategy::IterRandom,
        Strategy::IterGolfer,
        Strategy::Large,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Homogeneous => "homogeneous",
            Strategy::Heterogeneous => "heterogeneous",
            Strategy::Random => "random",
            Strategy::Large => "large",
            Strategy::IterRandom => "iter_random",
            Strategy::IterGolfer => "iter_golfer",
        }
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Strategy::IterRandom | Strategy::IterGolfer)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?}")))
    }
}

/// A partition of agent ids into deliberation groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub groups: Vec<Vec<usize>>,
}

impl GroupPlan {
    /// Check that the groups are non-empty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::invalid("empty group"));
            }
            for &a in group {
                if a >= n || std::mem::replace(&mut seen[a], true) {
                    return Err(Error::invalid(format!("agent {a} duplicated or out of range")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("plan does not cover every agent"));
        }
        Ok(())
    }
}

/// How often each unordered pair of agents has shared a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetingCounts {
    n: usize,
    counts: Vec<u32>,
}

impl MeetingCounts {
    pub fn new(n: usize) -> Self {
        MeetingCounts {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.counts[a * self.n + b]
    }

    pub fn set(&mut self, a: usize, b: usize, value: u32) {
        self.counts[a * self.n + b] = value;
        self.counts[b * self.n + a] = value;
    }

    /// Count one more meeting for every co-grouped pair of `plan`.
    pub fn record(&mut self, plan: &GroupPlan) {
        for group in &plan.groups {
            for (x, &a) in group.iter().enumerate() {
                for &b in &group[x + 1..] {
                    self.counts[a * self.n + b] += 1;
                    self.counts[b * self.n + a] += 1;
                }
            }
        }
    }

    #[inline]
    fn sq(&self, a: usize, b: usize) -> u64 {
        let f = u64::from(self.get(a, b));
        f * f
    }

    /// Cost of placing `a` alongside `members` (excluding `skip`).
    fn placement_cost(&self, a: usize, members: &[usize], skip: usize) -> u64 {
        members.iter().filter(|&&b| b != a && b != skip).map(|&b| self.sq(a, b)).sum()
    }
}

pub fn update_meetings(counts: &MeetingCounts, plan: &GroupPlan) -> MeetingCounts {
    let mut next = counts.clone();
    next.record(plan);
    next
}

/// Sum over groups and unordered member pairs of the squared prior meeting count.
pub fn golfer_cost(plan: &GroupPlan, counts: &MeetingCounts) -> u64 {
    plan.groups
        .iter()
        .map(|group| {
            let mut cost = 0;
            for (x, &a) in group.iter().enumerate() {
                for &b in &group[x + 1..] {
                    cost += counts.sq(a, b);
                }
            }
            cost
        })
        .sum()
}

/// Sizes of `g` groups over `n` agents, differing by at most one.
fn balanced_sizes(n: usize, g: usize) -> Vec<usize> {
    (0..g).map(|j| n / g + usize::from(j < n % g)).collect()
}

fn split(members: &[usize], sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        out.push(members[at..at + s].to_vec());
        at += s;
    }
    out
}

fn check_g(n: usize, g: usize) -> Result<()> {
    if g == 0 {
        return Err(Error::invalid("group count must be positive"));
    }
    if g > n {
        return Err(Error::invalid(format!("{g} groups for {n} agents")));
    }
    Ok(())
}

fn random_plan<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> GroupPlan {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    GroupPlan {
        groups: split(&ids, &balanced_sizes(n, g)),
    }
}

fn bloc_members<R: Rng + ?Sized>(blocs: &[Bloc], bloc: Bloc, rng: &mut R) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..blocs.len()).filter(|&i| blocs[i] == bloc).collect();
    ids.shuffle(rng);
    ids
}

fn homogeneous_plan<R: Rng + ?Sized>(blocs: &[Bloc], g: usize, rng: &mut R) -> Result<GroupPlan> {
    let majority = bloc_members(blocs, Bloc::Majority, rng);
    let minority = bloc_members(blocs, Bloc::Minority, rng);
    if majority.is_empty() || minority.is_empty() {
        // a single bloc is trivially homogeneous
        return Ok(random_plan(blocs.len(), g, rng));
    }
    if g < 2 {
        return Err(Error::invalid("homogeneous groups need g >= 2 when both blocs are present"));
    }
    let n = blocs.len();
    let share = (g * majority.len()) as f64 / n as f64;
    let g_maj = (share.round() as usize)
        .clamp(1, g - 1)
        .min(majority.len())
        .max(g.saturating_sub(minority.len()));
    let g_min = g - g_maj;
    let mut groups = split(&majority, &balanced_sizes(majority.len(), g_maj));
    groups.extend(split(&minority, &balanced_sizes(minority.len(), g_min)));
    Ok(GroupPlan { groups })
}

fn heterogeneous_plan<R: Rng + ?Sized>(blocs: &[Bloc], g: usize, rng: &mut R) -> GroupPlan {
    let majority = bloc_members(blocs, Bloc::Majority, rng);
    let minority = bloc_members(blocs, Bloc::Minority, rng);
    let sizes = balanced_sizes(blocs.len(), g);
    let mut groups: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    // deal minority round-robin, then top every group up with majority agents
    for (x, &a) in minority.iter().enumerate() {
        groups[x % g].push(a);
    }
    let mut rest = majority.into_iter();
    for (group, &size) in groups.iter_mut().zip(&sizes) {
        while group.len() < size {
            group.push(rest.next().expect("sizes sum to n"));
        }
    }
    GroupPlan { groups }
}

/// Greedy golfer construction followed by pairwise-swap descent.
///
/// Agents are placed in random order into the open group with the lowest
/// incremental cost `Σ f(a, b)²`; ties go to the emptier group, then to a
/// random group order. Swaps of two agents between groups are then applied
/// while any strictly lowers the plan's cost.
pub fn make_golfer_plan<R: Rng + ?Sized>(n: usize, g: usize, counts: &MeetingCounts, rng: &mut R) -> Result<GroupPlan> {
    check_g(n, g)?;
    if counts.n() != n {
        return Err(Error::invalid(format!("meeting counts over {} agents, plan over {n}", counts.n())));
    }
    let capacity = balanced_sizes(n, g);
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(rng);
    let mut group_order: Vec<usize> = (0..g).collect();
    group_order.shuffle(rng);

    let mut groups: Vec<Vec<usize>> = capacity.iter().map(|&c| Vec::with_capacity(c)).collect();
    for &a in &agents {
        let target = group_order
            .iter()
            .copied()
            .filter(|&j| groups[j].len() < capacity[j])
            .min_by_key(|&j| (counts.placement_cost(a, &groups[j], usize::MAX), groups[j].len() + capacity[0] - capacity[j]))
            .expect("capacity sums to n");
        groups[target].push(a);
    }

    loop {
        let mut improved = false;
        for x in 0..g {
            for y in x + 1..g {
                for i in 0..groups[x].len() {
                    for j in 0..groups[y].len() {
                        let (a, b) = (groups[x][i], groups[y][j]);
                        let before = counts.placement_cost(a, &groups[x], a) + counts.placement_cost(b, &groups[y], b);
                        let after = counts.placement_cost(a, &groups[y], b) + counts.placement_cost(b, &groups[x], a);
                        if after < before {
                            groups[x][i] = b;
                            groups[y][j] = a;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(GroupPlan { groups })
}

/// Build the groups for one deliberation round.
pub fn make_groups<R: Rng + ?Sized>(strategy: Strategy, blocs: &[Bloc], g: usize, counts: &MeetingCounts, rng: &mut R) -> Result<GroupPlan> {
    let n = blocs.len();
    let g = if strategy == Strategy::Large { 1 } else { g };
    check_g(n, g)?;
    let plan = match strategy {
        Strategy::Large => GroupPlan {
            groups: vec![(0..n).collect()],
        },
        Strategy::Random | Strategy::IterRandom => random_plan(n, g, rng),
        Strategy::Homogeneous => homogeneous_plan(blocs, g, rng)?,
        Strategy::Heterogeneous => heterogeneous_plan(blocs, g, rng),
        Strategy::IterGolfer => make_golfer_plan(n, g, counts, rng)?,
    };
    debug_assert!(plan.validate(n).is_ok());
    Ok(plan)
}
