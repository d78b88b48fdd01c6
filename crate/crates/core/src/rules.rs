//! Approval-based committee rules: AV, CC, PAV and the Method of Equal Shares.
//!
//! CC and PAV are solved exactly by a depth-first branch and bound over
//! candidates taken in tie-breaker priority order. Because subsets are
//! visited in lexicographic order and only strictly worse subtrees are cut
//! once an optimum has been seen, the solver returns the lexicographically
//! first optimal committee under the priority.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::UtilityVector;
use crate::sets::{CandidateSet, VoterSet, MAX_CANDIDATES};

/// Approval ballots with per-candidate supporter caches.
#[derive(Debug, Clone, PartialEq)]
pub struct ApprovalProfile {
    m: usize,
    ballots: Vec<CandidateSet>,
    supporters: Vec<VoterSet>,
    supporter_lists: Vec<Vec<u32>>,
}

impl ApprovalProfile {
    pub fn new(m: usize, ballots: Vec<CandidateSet>) -> Result<Self> {
        if m == 0 || m > MAX_CANDIDATES {
            return Err(Error::invalid(format!("candidate count {m} outside 1..={MAX_CANDIDATES}")));
        }
        if ballots.is_empty() {
            return Err(Error::invalid("profile without voters"));
        }
        let n = ballots.len();
        let mut supporters = vec![VoterSet::empty(n); m];
        let mut supporter_lists = vec![Vec::new(); m];
        for (i, ballot) in ballots.iter().enumerate() {
            if ballot.is_empty() {
                return Err(Error::invalid(format!("ballot {i} is empty")));
            }
            if ballot.bound() > m {
                return Err(Error::invalid(format!("ballot {i} names a candidate >= {m}")));
            }
            for c in ballot.iter() {
                supporters[c].insert(i);
                supporter_lists[c].push(i as u32);
            }
        }
        Ok(ApprovalProfile {
            m,
            ballots,
            supporters,
            supporter_lists,
        })
    }

    pub fn n(&self) -> usize {
        self.ballots.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ballots(&self) -> &[CandidateSet] {
        &self.ballots
    }

    /// Voters approving `c`.
    pub fn supporters(&self, c: usize) -> &VoterSet {
        &self.supporters[c]
    }

    /// Approval score `V(c)`.
    pub fn score(&self, c: usize) -> usize {
        self.supporter_lists[c].len()
    }

    pub fn scores(&self) -> Vec<usize> {
        (0..self.m).map(|c| self.score(c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct Committee {
    pub members: CandidateSet,
}

impl Committee {
    pub fn new(members: CandidateSet) -> Self {
        Committee { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.members.iter()
    }
}

impl FromIterator<usize> for Committee {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Committee::new(iter.into_iter().collect())
    }
}

impl From<Vec<usize>> for Committee {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<Committee> for Vec<usize> {
    fn from(c: Committee) -> Self {
        c.iter().collect()
    }
}

/// Candidate priority used to break ties; `order[0]` is preferred first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreaker {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl TieBreaker {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut rank = vec![usize::MAX; m];
        for (p, &c) in order.iter().enumerate() {
            if c >= m || rank[c] != usize::MAX {
                return Err(Error::invalid(format!("{order:?} is not a permutation of 0..{m}")));
            }
            rank[c] = p;
        }
        Ok(TieBreaker { order, rank })
    }

    pub fn identity(m: usize) -> Self {
        TieBreaker::new((0..m).collect()).expect("identity is a permutation")
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        TieBreaker::new(order).expect("shuffle is a permutation")
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `c` in the priority order (lower wins).
    pub fn rank(&self, c: usize) -> usize {
        self.rank[c]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Av,
    Cc,
    Pav,
    Mes,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Av, Rule::Cc, Rule::Pav, Rule::Mes];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Av => "av",
            Rule::Cc => "cc",
            Rule::Pav => "pav",
            Rule::Mes => "mes",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown rule {s:?}")))
    }
}

/// How MES fills seats left over when no candidate is affordable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MesCompletion {
    /// Highest remaining approval score, ties by priority.
    #[default]
    Av,
    /// Remaining candidates in tie-breaker priority order.
    SeqPriority,
}

/// How CC chooses among committees of maximal coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcTieBreak {
    /// Highest AV score, then priority.
    #[default]
    AvScore,
    /// Priority alone.
    Priority,
}

/// Rule parameters that are not part of the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleOptions {
    pub mes_completion: MesCompletion,
    pub cc_tiebreak: CcTieBreak,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum Diagnostics {
    #[default]
    None,
    Mes {
        /// Price paid per supporter for each phase-one seat, in selection order.
        q: Vec<f64>,
        /// Seats filled by the completion rule.
        completion: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    pub committee: Committee,
    /// The rule's objective on `committee`. MES has no objective of its own
    /// and reports the committee's AV score.
    pub score: f64,
    pub diagnostics: Diagnostics,
}

fn check_k(profile: &ApprovalProfile, k: usize, tie: &TieBreaker) -> Result<()> {
    if k == 0 || k > profile.m() {
        return Err(Error::invalid(format!("committee size {k} outside 1..={}", profile.m())));
    }
    if tie.len() != profile.m() {
        return Err(Error::invalid(format!(
            "tie-breaker over {} candidates for a profile over {}",
            tie.len(),
            profile.m()
        )));
    }
    Ok(())
}

pub fn av_score(profile: &ApprovalProfile, w: &Committee) -> f64 {
    w.iter().map(|c| profile.score(c)).sum::<usize>() as f64
}

/// Top `k` of `candidates` by approval score, ties by priority.
fn top_by_score(profile: &ApprovalProfile, candidates: impl Iterator<Item = usize>, k: usize, tie: &TieBreaker) -> Vec<usize> {
    let mut cands: Vec<usize> = candidates.collect();
    cands.sort_by_key(|&c| (std::cmp::Reverse(profile.score(c)), tie.rank(c)));
    cands.truncate(k);
    cands
}

pub fn av_committee(profile: &ApprovalProfile, k: usize, tie: &TieBreaker) -> Result<RuleOutcome> {
    check_k(profile, k, tie)?;
    let committee: Committee = top_by_score(profile, 0..profile.m(), k, tie).into_iter().collect();
    Ok(RuleOutcome {
        score: av_score(profile, &committee),
        committee,
        diagnostics: Diagnostics::None,
    })
}

/// Number of voters with at least one approved member in `w`.
pub fn coverage_score(profile: &ApprovalProfile, w: &Committee) -> usize {
    profile.ballots().iter().filter(|b| b.intersects(w.members)).count()
}

/// Harmonic number `h(t)`.
pub fn harmonic(t: usize) -> f64 {
    (1..=t).map(|i| 1.0 / i as f64).sum()
}

pub fn pav_score(profile: &ApprovalProfile, w: &Committee) -> f64 {
    profile
        .ballots()
        .iter()
        .map(|b| harmonic(b.intersection(w.members).len()))
        .sum()
}

/// Incremental objective over partial committees, in exact integer units.
trait Objective {
    /// Value added by including `c` in the current partial committee.
    fn gain(&self, c: usize) -> u64;
    fn push(&mut self, c: usize);
    fn pop(&mut self, c: usize);
}

/// PAV scaled by `lcm(1..=k)` so that every harmonic step is integral.
struct PavObjective<'a> {
    profile: &'a ApprovalProfile,
    weights: Vec<u64>,
    counts: Vec<usize>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl<'a> PavObjective<'a> {
    fn new(profile: &'a ApprovalProfile, k: usize) -> Self {
        let scale = (1..=k as u64).fold(1u64, |l, i| l / gcd(l, i) * i);
        PavObjective {
            profile,
            weights: (1..=k as u64).map(|i| scale / i).chain(std::iter::once(0)).collect(),
            counts: vec![0; profile.n()],
        }
    }
}

impl Objective for PavObjective<'_> {
    #[inline]
    fn gain(&self, c: usize) -> u64 {
        self.profile.supporter_lists[c]
            .iter()
            .map(|&i| self.weights[self.counts[i as usize]])
            .sum()
    }

    fn push(&mut self, c: usize) {
        for &i in &self.profile.supporter_lists[c] {
            self.counts[i as usize] += 1;
        }
    }

    fn pop(&mut self, c: usize) {
        for &i in &self.profile.supporter_lists[c] {
            self.counts[i as usize] -= 1;
        }
    }
}

/// Coverage, optionally with AV score as a second key:
/// `coverage * (n*k + 1) + av`.
struct CcObjective<'a> {
    profile: &'a ApprovalProfile,
    scale: u64,
    with_av: bool,
    uncovered: Vec<VoterSet>,
}

impl<'a> CcObjective<'a> {
    fn new(profile: &'a ApprovalProfile, k: usize, tiebreak: CcTieBreak) -> Self {
        let with_av = tiebreak == CcTieBreak::AvScore;
        CcObjective {
            profile,
            scale: if with_av { (profile.n() * k + 1) as u64 } else { 1 },
            with_av,
            uncovered: vec![VoterSet::full(profile.n())],
        }
    }
}

impl Objective for CcObjective<'_> {
    #[inline]
    fn gain(&self, c: usize) -> u64 {
        let top = self.uncovered.last().expect("root frame");
        let covered = top.intersection_len(&self.profile.supporters[c]) as u64 * self.scale;
        if self.with_av {
            covered + self.profile.score(c) as u64
        } else {
            covered
        }
    }

    fn push(&mut self, c: usize) {
        let mut next = self.uncovered.last().expect("root frame").clone();
        next.subtract(&self.profile.supporters[c]);
        self.uncovered.push(next);
    }

    fn pop(&mut self, _c: usize) {
        self.uncovered.pop();
    }
}

struct BranchAndBound<'o, O> {
    objective: &'o mut O,
    order: Vec<usize>,
    k: usize,
    best: u64,
    found: bool,
    chosen: Vec<usize>,
    incumbent: Vec<usize>,
    nodes: u64,
}

impl<O: Objective> BranchAndBound<'_, O> {
    #[inline]
    fn admits(&self, value: u64) -> bool {
        value > self.best || (value == self.best && !self.found)
    }

    fn search(&mut self, start: usize, score: u64) {
        self.nodes += 1;
        let m = self.order.len();
        let slots = self.k - self.chosen.len();
        let last = m - slots;
        let gains: Vec<u64> = self.order[start..].iter().map(|&c| self.objective.gain(c)).collect();
        // gains[j - start] belongs to order[j]; suffix_top[j - start] is the
        // sum of the `slots - 1` largest gains strictly after position j.
        let span = m - start;
        let mut suffix_top = vec![0u64; span];
        let mut best_after: Vec<u64> = Vec::with_capacity(slots);
        for j in (0..span).rev() {
            suffix_top[j] = best_after.iter().sum();
            if slots > 1 {
                let g = gains[j];
                let at = best_after.partition_point(|&x| x >= g);
                if at < slots - 1 {
                    best_after.insert(at, g);
                    best_after.truncate(slots - 1);
                }
            }
        }
        for j in start..=last {
            let c = self.order[j];
            let child = score + gains[j - start];
            if !self.admits(child + suffix_top[j - start]) {
                continue;
            }
            self.chosen.push(c);
            if slots == 1 {
                self.best = child;
                self.found = true;
                self.incumbent.clone_from(&self.chosen);
            } else {
                self.objective.push(c);
                self.search(j + 1, child);
                self.objective.pop(c);
            }
            self.chosen.pop();
        }
    }
}

/// Greedy committee used as the initial incumbent: value and members.
fn greedy<O: Objective>(objective: &mut O, order: &[usize], k: usize) -> (u64, Vec<usize>) {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut value = 0;
    for _ in 0..k {
        let (g, c) = order
            .iter()
            .filter(|c| !chosen.contains(c))
            .map(|&c| (objective.gain(c), c))
            // max gain, earliest in priority among equals
            .fold(None, |acc: Option<(u64, usize)>, (g, c)| match acc {
                Some((bg, _)) if bg >= g => acc,
                _ => Some((g, c)),
            })
            .expect("k <= m");
        objective.push(c);
        chosen.push(c);
        value += g;
    }
    for &c in chosen.iter().rev() {
        objective.pop(c);
    }
    (value, chosen)
}

/// Lexicographically first (under `tie`) maximiser of an objective over
/// all size-`k` committees. Returns the committee, its scaled value and the
/// number of search nodes expanded.
fn maximise<O: Objective>(objective: &mut O, k: usize, tie: &TieBreaker) -> (Committee, u64, u64) {
    let order = tie.order().to_vec();
    let (greedy_value, greedy_members) = greedy(objective, &order, k);
    let mut bb = BranchAndBound {
        objective,
        order,
        k,
        best: greedy_value,
        found: false,
        chosen: Vec::with_capacity(k),
        incumbent: greedy_members,
        nodes: 0,
    };
    bb.search(0, 0);
    debug_assert!(bb.found, "the greedy value is attainable");
    let committee = bb.incumbent.iter().copied().collect();
    (committee, bb.best, bb.nodes)
}

/// Exact Chamberlin-Courant. Among committees of maximal coverage the one
/// with the highest AV score wins, then the lexicographically first under
/// the tie-breaker.
pub fn cc_committee(profile: &ApprovalProfile, k: usize, tie: &TieBreaker) -> Result<RuleOutcome> {
    cc_committee_with(profile, k, tie, CcTieBreak::AvScore)
}

/// Exact Chamberlin-Courant with an explicit rule for co-optimal committees.
pub fn cc_committee_with(profile: &ApprovalProfile, k: usize, tie: &TieBreaker, tiebreak: CcTieBreak) -> Result<RuleOutcome> {
    check_k(profile, k, tie)?;
    let mut objective = CcObjective::new(profile, k, tiebreak);
    let (committee, _, _) = maximise(&mut objective, k, tie);
    Ok(RuleOutcome {
        score: coverage_score(profile, &committee) as f64,
        committee,
        diagnostics: Diagnostics::None,
    })
}

/// Exact PAV, lexicographically first optimum under the tie-breaker.
pub fn pav_committee(profile: &ApprovalProfile, k: usize, tie: &TieBreaker) -> Result<RuleOutcome> {
    check_k(profile, k, tie)?;
    let mut objective = PavObjective::new(profile, k);
    let (committee, _, _) = maximise(&mut objective, k, tie);
    Ok(RuleOutcome {
        score: pav_score(profile, &committee),
        committee,
        diagnostics: Diagnostics::None,
    })
}

/// Search nodes the exact solvers expand on this instance, `(cc, pav)`.
pub fn solver_effort(profile: &ApprovalProfile, k: usize, tie: &TieBreaker) -> Result<(u64, u64)> {
    check_k(profile, k, tie)?;
    let (_, _, cc) = maximise(&mut CcObjective::new(profile, k, CcTieBreak::AvScore), k, tie);
    let (_, _, pav) = maximise(&mut PavObjective::new(profile, k), k, tie);
    Ok((cc, pav))
}

/// Budget slack tolerated when deciding affordability.
const MES_EPS: f64 = 1e-9;

/// Smallest `q` with `Σ min(q, b_i) = 1` over the given budgets, or `None`
/// if the budgets cannot cover a unit cost.
pub fn mes_price(budgets: &mut [f64]) -> Option<f64> {
    let total: f64 = budgets.iter().sum();
    if total < 1.0 - MES_EPS {
        return None;
    }
    budgets.sort_by(f64::total_cmp);
    let mut remaining = 1.0;
    let s = budgets.len();
    for (t, &b) in budgets.iter().enumerate() {
        let q = remaining / (s - t) as f64;
        if b >= q {
            return Some(q);
        }
        remaining -= b;
    }
    // only reachable within the affordability slack
    budgets.last().copied()
}

fn same_price(a: f64, b: f64) -> bool {
    (a - b).abs() <= MES_EPS * a.abs().max(b.abs()).max(1e-3)
}

/// Method of Equal Shares with unit costs and budgets `k/n`.
pub fn mes_committee(profile: &ApprovalProfile, k: usize, tie: &TieBreaker, completion: MesCompletion) -> Result<RuleOutcome> {
    check_k(profile, k, tie)?;
    let n = profile.n();
    let mut budgets = vec![k as f64 / n as f64; n];
    let mut members = CandidateSet::EMPTY;
    let mut prices = Vec::new();
    let mut scratch = Vec::with_capacity(n);
    while members.len() < k {
        let mut pick: Option<(f64, usize)> = None;
        for &c in tie.order() {
            if members.contains(c) || profile.score(c) == 0 {
                continue;
            }
            scratch.clear();
            scratch.extend(profile.supporter_lists[c].iter().map(|&i| budgets[i as usize]));
            let Some(q) = mes_price(&mut scratch) else { continue };
            // candidates arrive in priority order, so only a strictly lower price displaces
            match pick {
                Some((bq, _)) if q > bq || same_price(q, bq) => {}
                _ => pick = Some((q, c)),
            }
        }
        let Some((q, c)) = pick else { break };
        for &i in &profile.supporter_lists[c] {
            let b = &mut budgets[i as usize];
            *b = (*b - q.min(*b)).max(0.0);
        }
        members.insert(c);
        prices.push(q);
    }
    let phase_one = members.len();
    if phase_one < k {
        let rest = (0..profile.m()).filter(|&c| !members.contains(c));
        let fill: Vec<usize> = match completion {
            MesCompletion::Av => top_by_score(profile, rest, k - phase_one, tie),
            MesCompletion::SeqPriority => {
                let mut rest: Vec<usize> = rest.collect();
                rest.sort_by_key(|&c| tie.rank(c));
                rest.truncate(k - phase_one);
                rest
            }
        };
        for c in fill {
            members.insert(c);
        }
    }
    let committee = Committee::new(members);
    Ok(RuleOutcome {
        score: av_score(profile, &committee),
        committee,
        diagnostics: Diagnostics::Mes {
            q: prices,
            completion: k - phase_one,
        },
    })
}

pub fn run_rule(rule: Rule, profile: &ApprovalProfile, k: usize, tie: &TieBreaker, options: &RuleOptions) -> Result<RuleOutcome> {
    match rule {
        Rule::Av => av_committee(profile, k, tie),
        Rule::Cc => cc_committee_with(profile, k, tie, options.cc_tiebreak),
        Rule::Pav => pav_committee(profile, k, tie),
        Rule::Mes => mes_committee(profile, k, tie, options.mes_completion),
    }
}

fn candidate_totals(utilities: &[UtilityVector], m: usize) -> Vec<f64> {
    let mut totals = vec![0.0; m];
    for u in utilities {
        for (t, &x) in totals.iter_mut().zip(u) {
            *t += x;
        }
    }
    totals
}

/// Utilitarian welfare `Σ_i Σ_{c∈W} u_i(c)`.
pub fn social_welfare(utilities: &[UtilityVector], w: &Committee) -> f64 {
    let m = utilities.first().map_or(0, Vec::len);
    let totals = candidate_totals(utilities, m);
    w.iter().map(|c| totals[c]).sum()
}

/// Welfare is additive over candidates, so the optimum is the top `k` by
/// total utility (ties by candidate id).
pub fn optimal_welfare_committee(utilities: &[UtilityVector], k: usize) -> Result<(Committee, f64)> {
    let m = utilities.first().map_or(0, Vec::len);
    if k == 0 || k > m {
        return Err(Error::invalid(format!("committee size {k} outside 1..={m}")));
    }
    let totals = candidate_totals(utilities, m);
    let mut cands: Vec<usize> = (0..m).collect();
    cands.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    let committee: Committee = cands[..k].iter().copied().collect();
    Ok((committee, committee.iter().map(|c| totals[c]).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;

    fn set(v: &[usize]) -> CandidateSet {
        v.iter().copied().collect()
    }

    fn committee(v: &[usize]) -> Committee {
        Committee::new(set(v))
    }

    /// A1 = A2 = {a, b}, A3 = {c}, A4 = {c, d}.
    fn e1() -> ApprovalProfile {
        ApprovalProfile::new(4, vec![set(&[A, B]), set(&[A, B]), set(&[C]), set(&[C, D])]).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(ApprovalProfile::new(3, vec![]).is_err());
        assert!(ApprovalProfile::new(3, vec![CandidateSet::EMPTY]).is_err());
        assert!(ApprovalProfile::new(3, vec![set(&[3])]).is_err());
        let p = e1();
        assert_eq!(p.scores(), vec![2, 2, 2, 1]);
    }

    #[test]
    fn av_examples() {
        let p = e1();
        assert_eq!(av_score(&p, &committee(&[A, B])), 4.0);
        assert_eq!(av_score(&p, &committee(&[C, D])), 3.0);
        let nobody = ApprovalProfile::new(6, vec![set(&[A]), set(&[B])]).unwrap();
        assert_eq!(av_score(&nobody, &committee(&[4, 5])), 0.0);

        // E1: {a, b}, {a, c}, {b, c} all score 4, priority decides
        let out = av_committee(&p, 2, &TieBreaker::new(vec![C, D, B, A]).unwrap()).unwrap();
        assert_eq!(out.committee, committee(&[B, C]));
        assert_eq!(out.score, 4.0);
        let out = av_committee(&p, 2, &TieBreaker::identity(4)).unwrap();
        assert_eq!(out.committee, committee(&[A, B]));
    }

    #[test]
    fn av_full_tie_uses_priority() {
        let p = ApprovalProfile::new(4, vec![CandidateSet::full(4); 3]).unwrap();
        let out = av_committee(&p, 2, &TieBreaker::new(vec![3, 1, 0, 2]).unwrap()).unwrap();
        assert_eq!(out.committee, committee(&[3, 1]));
        assert_eq!(out.score, 6.0);
    }

    #[test]
    fn coverage_examples() {
        let p = e1();
        assert_eq!(coverage_score(&p, &committee(&[A, C])), 4);
        assert_eq!(coverage_score(&p, &committee(&[A, B])), 2);
        let wide = ApprovalProfile::new(6, vec![set(&[A]), set(&[B])]).unwrap();
        assert_eq!(coverage_score(&wide, &committee(&[4, 5])), 0);
    }

    #[test]
    fn cc_examples() {
        let p = e1();
        // coverage 4 for {a, c} and {b, c}; both have AV score 4, so priority decides
        let out = cc_committee(&p, 2, &TieBreaker::identity(4)).unwrap();
        assert_eq!(out.committee, committee(&[A, C]));
        assert_eq!(out.score, 4.0);
        let out = cc_committee(&p, 2, &TieBreaker::new(vec![D, B, C, A]).unwrap()).unwrap();
        assert_eq!(out.committee, committee(&[B, C]));

        let all = ApprovalProfile::new(4, vec![set(&[A, B]), set(&[C]), set(&[D])]).unwrap();
        let out = cc_committee(&all, 4, &TieBreaker::identity(4)).unwrap();
        assert_eq!(out.score, 3.0);
    }

    #[test]
    fn cc_prefers_av_among_full_coverage() {
        // x approved by all; {x, y} and {x, z} both cover everyone, y has more support
        let p = ApprovalProfile::new(3, vec![set(&[0, 1]), set(&[0, 1]), set(&[0, 2])]).unwrap();
        let out = cc_committee(&p, 2, &TieBreaker::new(vec![2, 1, 0]).unwrap()).unwrap();
        assert_eq!(out.committee, committee(&[0, 1]));
        assert_eq!(out.score, 3.0);
    }

    #[test]
    fn pav_examples() {
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        let p = e1();
        assert!((pav_score(&p, &committee(&[A, B])) - 3.0).abs() < 1e-12);
        assert!((pav_score(&p, &committee(&[A, C])) - 4.0).abs() < 1e-12);

        let out = pav_committee(&p, 2, &TieBreaker::identity(4)).unwrap();
        assert_eq!(out.committee, committee(&[A, C]));
        assert!((out.score - 4.0).abs() < 1e-12);
        let out = pav_committee(&p, 2, &TieBreaker::new(vec![B, D, A, C]).unwrap()).unwrap();
        assert_eq!(out.committee, committee(&[B, C]));
    }

    #[test]
    fn pav_single_minded() {
        let p = ApprovalProfile::new(4, vec![set(&[2]); 5]).unwrap();
        let out = pav_committee(&p, 2, &TieBreaker::identity(4)).unwrap();
        assert!(out.committee.members.contains(2));
        assert!((out.score - 5.0).abs() < 1e-12);
    }

    #[test]
    fn pav_matches_av_for_single_seat() {
        let p = e1();
        for order in [vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![1, 3, 0, 2]] {
            let tie = TieBreaker::new(order).unwrap();
            assert_eq!(pav_committee(&p, 1, &tie).unwrap().committee, av_committee(&p, 1, &tie).unwrap().committee);
        }
    }

    #[test]
    fn mes_examples() {
        // budgets k/n = 0.5; a and c are both affordable at q = 0.5
        let out = mes_committee(&e1(), 2, &TieBreaker::identity(4), MesCompletion::Av).unwrap();
        assert_eq!(out.committee, committee(&[A, C]));
        match out.diagnostics {
            Diagnostics::Mes { q, completion } => {
                assert_eq!(q, vec![0.5, 0.5]);
                assert_eq!(completion, 0);
            }
            other => panic!("{other:?}"),
        }

        let unanimous = ApprovalProfile::new(3, vec![set(&[1]); 4]).unwrap();
        let out = mes_committee(&unanimous, 1, &TieBreaker::identity(3), MesCompletion::Av).unwrap();
        assert_eq!(out.committee, committee(&[1]));
        assert_eq!(out.diagnostics, Diagnostics::Mes { q: vec![0.25], completion: 0 });
    }

    #[test]
    fn mes_completion_after_stall() {
        // n = 4, k = 2, budgets 0.5. b is bought first at q = 1/3 by voters 0, 1, 3,
        // leaving them 1/6 each; nothing else reaches a unit cost afterwards.
        let p = ApprovalProfile::new(4, vec![set(&[A, B]), set(&[A, B]), set(&[C]), set(&[D, B])]).unwrap();
        let out = mes_committee(&p, 2, &TieBreaker::identity(4), MesCompletion::Av).unwrap();
        assert_eq!(out.committee, committee(&[A, B]));
        let Diagnostics::Mes { q, completion } = out.diagnostics else { panic!() };
        assert_eq!(completion, 1);
        assert_eq!(q.len(), 1);
        assert!((q[0] - 1.0 / 3.0).abs() < 1e-12);
        // completion takes the highest-V remaining candidate: a (V = 2)
        let seq = mes_committee(&p, 2, &TieBreaker::new(vec![D, C, B, A]).unwrap(), MesCompletion::SeqPriority).unwrap();
        assert_eq!(seq.committee, committee(&[B, D]));
    }

    #[test]
    fn mes_price_water_filling() {
        assert_eq!(mes_price(&mut [0.5, 0.5]), Some(0.5));
        assert_eq!(mes_price(&mut [0.1, 0.9, 0.9]), Some(0.45));
        assert_eq!(mes_price(&mut [0.2, 0.2]), None);
        let mut fifths = vec![0.05; 20];
        assert!((mes_price(&mut fifths).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn welfare_examples() {
        let u = vec![vec![0.9, 0.1, 0.5], vec![0.8, 0.2, 0.4]];
        let (w, sw) = optimal_welfare_committee(&u, 2).unwrap();
        assert_eq!(w, committee(&[0, 2]));
        assert!((sw - 2.6).abs() < 1e-12);
        assert_eq!(social_welfare(&u, &w), sw);
        assert!((social_welfare(&u, &committee(&[0, 1])) - 2.0).abs() < 1e-12);
        let (_, all) = optimal_welfare_committee(&u, 3).unwrap();
        assert!((all - 2.9).abs() < 1e-12);
        assert_eq!(social_welfare(&[vec![0.0; 3]], &committee(&[0, 1])), 0.0);
        let (single, _) = optimal_welfare_committee(&[vec![0.3, 0.9, 0.6, 0.1]], 2).unwrap();
        assert_eq!(single, committee(&[1, 2]));
    }

    #[test]
    fn k_out_of_range() {
        let p = e1();
        let tie = TieBreaker::identity(4);
        assert!(av_committee(&p, 0, &tie).is_err());
        assert!(pav_committee(&p, 5, &tie).is_err());
        assert!(cc_committee(&p, 2, &TieBreaker::identity(3)).is_err());
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("stv".parse::<Rule>().is_err());
    }
}
