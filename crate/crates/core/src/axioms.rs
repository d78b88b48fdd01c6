//! Exact EJR and PJR checks with violation witnesses.
//!
//! Both axioms reduce to the same search: given a pool of eligible voters,
//! is there a set `S` of `T` candidates approved in common by at least
//! `Tn/k` of them? Only candidates individually approved by enough eligible
//! voters can be part of `S`, and partial sets whose common supporters drop
//! below the threshold are abandoned immediately.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{ApprovalProfile, Committee};
use crate::sets::{CandidateSet, VoterSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesivenessWitness {
    pub t: usize,
    /// At least `t` candidates every voter in `voters` approves.
    pub common_candidates: CandidateSet,
    pub voters: Vec<usize>,
    /// For PJR: the members of `W` the group's approvals are confined to.
    pub confined_to: Option<CandidateSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub satisfied: bool,
    pub witness: Option<CohesivenessWitness>,
}

impl AxiomVerdict {
    fn satisfied() -> Self {
        AxiomVerdict {
            satisfied: true,
            witness: None,
        }
    }

    fn violated(witness: CohesivenessWitness) -> Self {
        AxiomVerdict {
            satisfied: false,
            witness: Some(witness),
        }
    }
}

/// Smallest group size `s` with `s * k >= t * n`.
pub fn cohesion_threshold(n: usize, t: usize, k: usize) -> usize {
    (t * n).div_ceil(k)
}

pub fn is_t_cohesive(profile: &ApprovalProfile, voters: &[usize], t: usize, k: usize) -> Result<bool> {
    if voters.is_empty() {
        return Err(Error::invalid("empty voter group"));
    }
    if t == 0 || k == 0 {
        return Err(Error::invalid("t and k must be positive"));
    }
    let mut common = CandidateSet::full(profile.m());
    for &i in voters {
        let ballot = profile
            .ballots()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("voter {i} not in profile")))?;
        common = common.intersection(*ballot);
    }
    Ok(common.len() >= t && voters.len() * k >= t * profile.n())
}

struct CohesiveSearch<'a> {
    profile: &'a ApprovalProfile,
    t: usize,
    threshold: usize,
    pool: Vec<usize>,
    // frames[d] = eligible voters approving the first d chosen candidates
    frames: Vec<VoterSet>,
    chosen: Vec<usize>,
}

impl<'a> CohesiveSearch<'a> {
    fn run(profile: &'a ApprovalProfile, eligible: &VoterSet, t: usize, threshold: usize) -> Option<(CandidateSet, VoterSet)> {
        if eligible.len() < threshold {
            return None;
        }
        let mut pool: Vec<(usize, usize)> = (0..profile.m())
            .map(|c| (eligible.intersection_len(profile.supporters(c)), c))
            .filter(|&(support, _)| support >= threshold)
            .collect();
        if pool.len() < t {
            return None;
        }
        pool.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut search = CohesiveSearch {
            profile,
            t,
            threshold,
            pool: pool.into_iter().map(|(_, c)| c).collect(),
            frames: vec![eligible.clone(); t + 1],
            chosen: Vec::with_capacity(t),
        };
        if search.descend(0) {
            Some((search.chosen.iter().copied().collect(), search.frames[t].clone()))
        } else {
            None
        }
    }

    fn descend(&mut self, from: usize) -> bool {
        let depth = self.chosen.len();
        if depth == self.t {
            return true;
        }
        let needed = self.t - depth;
        for j in from..self.pool.len() {
            if self.pool.len() - j < needed {
                break;
            }
            let c = self.pool[j];
            let (head, tail) = self.frames.split_at_mut(depth + 1);
            tail[0].assign_intersection(&head[depth], self.profile.supporters(c));
            if tail[0].len() < self.threshold {
                continue;
            }
            self.chosen.push(c);
            if self.descend(j + 1) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}

fn overlap(profile: &ApprovalProfile, w: &Committee) -> Vec<CandidateSet> {
    profile.ballots().iter().map(|b| b.intersection(w.members)).collect()
}

fn check_size(w: &Committee, k: usize) -> Result<()> {
    if w.len() != k || k == 0 {
        return Err(Error::invalid(format!("committee of size {} checked against k={k}", w.len())));
    }
    Ok(())
}

/// EJR: every `T`-cohesive group has a member with at least `T` approved
/// winners.
pub fn satisfies_ejr(profile: &ApprovalProfile, w: &Committee, k: usize) -> Result<AxiomVerdict> {
    check_size(w, k)?;
    let n = profile.n();
    let overlap = overlap(profile, w);
    for t in 1..=k {
        let mut eligible = VoterSet::empty(n);
        for (i, o) in overlap.iter().enumerate() {
            if o.len() < t {
                eligible.insert(i);
            }
        }
        let threshold = cohesion_threshold(n, t, k);
        if let Some((common, voters)) = CohesiveSearch::run(profile, &eligible, t, threshold) {
            return Ok(AxiomVerdict::violated(CohesivenessWitness {
                t,
                common_candidates: common,
                voters: voters.iter().collect(),
                confined_to: None,
            }));
        }
    }
    Ok(AxiomVerdict::satisfied())
}

/// All subsets of `members` with exactly `size` elements.
fn subsets_of_size(members: &[usize], size: usize) -> Vec<CandidateSet> {
    fn rec(members: &[usize], size: usize, from: usize, acc: CandidateSet, out: &mut Vec<CandidateSet>) {
        if acc.len() == size {
            out.push(acc);
            return;
        }
        for j in from..members.len() {
            let mut next = acc;
            next.insert(members[j]);
            rec(members, size, j + 1, next, out);
        }
    }
    let mut out = Vec::new();
    rec(members, size, 0, CandidateSet::EMPTY, &mut out);
    out
}

/// PJR: every `T`-cohesive group jointly approves at least `T` winners.
///
/// A violation is a group whose approved winners all lie inside some
/// `W' ⊆ W` with `|W'| = T - 1`; enlarging `W'` only admits more voters, so
/// subsets of exactly that size suffice. The search is exponential in `k`.
pub fn satisfies_pjr(profile: &ApprovalProfile, w: &Committee, k: usize) -> Result<AxiomVerdict> {
    check_size(w, k)?;
    let n = profile.n();
    let overlap = overlap(profile, w);
    let members: Vec<usize> = w.iter().collect();
    for t in 1..=k {
        let threshold = cohesion_threshold(n, t, k);
        for confined in subsets_of_size(&members, t - 1) {
            let mut eligible = VoterSet::empty(n);
            for (i, o) in overlap.iter().enumerate() {
                if o.is_subset(confined) {
                    eligible.insert(i);
                }
            }
            if let Some((common, voters)) = CohesiveSearch::run(profile, &eligible, t, threshold) {
                return Ok(AxiomVerdict::violated(CohesivenessWitness {
                    t,
                    common_candidates: common,
                    voters: voters.iter().collect(),
                    confined_to: Some(confined),
                }));
            }
        }
    }
    Ok(AxiomVerdict::satisfied())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> CandidateSet {
        v.iter().copied().collect()
    }

    fn e1() -> ApprovalProfile {
        ApprovalProfile::new(4, vec![set(&[0, 1]), set(&[0, 1]), set(&[2]), set(&[2, 3])]).unwrap()
    }

    #[test]
    fn cohesiveness_examples() {
        let p = e1();
        assert!(is_t_cohesive(&p, &[0, 1], 1, 2).unwrap());
        // two common candidates but 2 * 2 < 2 * 4
        assert!(!is_t_cohesive(&p, &[0, 1], 2, 2).unwrap());
        assert!(is_t_cohesive(&p, &[2, 3], 1, 2).unwrap());
        assert!(is_t_cohesive(&p, &[], 1, 2).is_err());
    }

    #[test]
    fn threshold_is_exact_ceiling() {
        assert_eq!(cohesion_threshold(100, 1, 5), 20);
        assert_eq!(cohesion_threshold(100, 3, 7), 43);
        assert_eq!(cohesion_threshold(4, 1, 2), 2);
    }

    #[test]
    fn ejr_examples() {
        let p = e1();
        let v = satisfies_ejr(&p, &Committee::from(vec![0, 1]), 2).unwrap();
        assert!(!v.satisfied);
        let w = v.witness.unwrap();
        assert_eq!((w.t, w.common_candidates, w.voters), (1, set(&[2]), vec![2, 3]));

        assert!(satisfies_ejr(&p, &Committee::from(vec![0, 2]), 2).unwrap().satisfied);

        let shared = ApprovalProfile::new(5, vec![set(&[1, 3]); 6]).unwrap();
        assert!(satisfies_ejr(&shared, &Committee::from(vec![1, 3]), 2).unwrap().satisfied);
    }

    #[test]
    fn pjr_examples() {
        let p = e1();
        let v = satisfies_pjr(&p, &Committee::from(vec![0, 1]), 2).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.t, 1);
        assert_eq!(w.common_candidates, set(&[2]));
        assert_eq!(w.confined_to, Some(CandidateSet::EMPTY));
        assert_eq!(w.voters, vec![2, 3]);
        assert!(satisfies_pjr(&p, &Committee::from(vec![0, 2]), 2).unwrap().satisfied);
    }

    #[test]
    fn no_cohesive_group_is_vacuous() {
        // four voters with disjoint singleton ballots, k = 2: groups need 2 voters
        let p = ApprovalProfile::new(6, vec![set(&[0]), set(&[1]), set(&[2]), set(&[3])]).unwrap();
        let w = Committee::from(vec![4, 5]);
        assert!(satisfies_pjr(&p, &w, 2).unwrap().satisfied);
        assert!(satisfies_ejr(&p, &w, 2).unwrap().satisfied);
    }

    #[test]
    fn pjr_weaker_than_ejr() {
        // k = 2, n = 4. Voters 0..3 approve {a, b}; the committee {a, c}
        // gives voters 0,1,2,3 one winner each. The group is 2-cohesive
        // (4 >= 2*4/2 with common {a, b}) and jointly approves only a, so both fail.
        let p = ApprovalProfile::new(3, vec![set(&[0, 1]); 4]).unwrap();
        let w = Committee::from(vec![0, 2]);
        assert!(!satisfies_ejr(&p, &w, 2).unwrap().satisfied);
        assert!(!satisfies_pjr(&p, &w, 2).unwrap().satisfied);

        // Voters 0,1 approve {a, b, c}, voters 2,3 approve {a, b, d}; committee
        // {c, d}: the group {0,1,2,3} is 2-cohesive on {a, b}; it jointly approves
        // c and d (PJR holds) but no voter has two winners (EJR fails).
        let p = ApprovalProfile::new(4, vec![set(&[0, 1, 2]), set(&[0, 1, 2]), set(&[0, 1, 3]), set(&[0, 1, 3])]).unwrap();
        let w = Committee::from(vec![2, 3]);
        assert!(!satisfies_ejr(&p, &w, 2).unwrap().satisfied);
        assert!(satisfies_pjr(&p, &w, 2).unwrap().satisfied);
    }

    #[test]
    fn committee_size_must_match() {
        assert!(satisfies_ejr(&e1(), &Committee::from(vec![0]), 2).is_err());
    }
}
