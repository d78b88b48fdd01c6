//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use delib_core::axioms::{satisfies_ejr, satisfies_pjr};
use delib_core::rules::{
    av_committee, av_score, cc_committee, coverage_score, mes_committee, pav_committee, pav_score, ApprovalProfile, Committee,
    Diagnostics, MesCompletion, TieBreaker,
};
use delib_core::sets::CandidateSet;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Election {
    pub m: usize,
    pub k: usize,
    pub ballots: Vec<Vec<usize>>,
    pub priority: Vec<usize>,
}

impl Election {
    pub fn n(&self) -> usize {
        self.ballots.len()
    }

    pub fn profile(&self) -> ApprovalProfile {
        let ballots = self.ballots.iter().map(|b| b.iter().copied().collect::<CandidateSet>()).collect();
        ApprovalProfile::new(self.m, ballots).expect("valid profile")
    }

    pub fn tie(&self) -> TieBreaker {
        TieBreaker::new(self.priority.clone()).expect("permutation")
    }

    pub fn approves(&self, i: usize, c: usize) -> bool {
        self.ballots[i].contains(&c)
    }
}

/// n ≤ 8, m ≤ 6, k ≤ 3, every ballot nonempty.
pub fn random_election<R: Rng>(rng: &mut R) -> Election {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=m.min(3));
    election_from_masks(m, k, (0..n).map(|_| rng.gen_range(1u32..(1 << m))).collect(), rng.gen())
}

pub fn election_from_masks(m: usize, k: usize, masks: Vec<u32>, shuffle_seed: u64) -> Election {
    let ballots = masks
        .iter()
        .map(|&mask| {
            let mask = if mask & ((1 << m) - 1) == 0 { 1 } else { mask };
            (0..m).filter(|c| mask >> c & 1 == 1).collect()
        })
        .collect();
    // Fisher-Yates driven by a tiny LCG so that proptest inputs stay plain integers
    let mut priority: Vec<usize> = (0..m).collect();
    let mut s = shuffle_seed | 1;
    for i in (1..m).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        priority.swap(i, (s >> 33) as usize % (i + 1));
    }
    Election { m, k, ballots, priority }
}

pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..m {
            cur.push(c);
            go(c + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

fn hits(e: &Election, i: usize, w: &[usize]) -> usize {
    w.iter().filter(|&&c| e.approves(i, c)).count()
}

pub fn brute_av(e: &Election, w: &[usize]) -> f64 {
    (0..e.n()).map(|i| hits(e, i, w) as f64).sum()
}

pub fn brute_cc(e: &Election, w: &[usize]) -> usize {
    (0..e.n()).filter(|&i| hits(e, i, w) > 0).count()
}

pub fn brute_pav(e: &Election, w: &[usize]) -> f64 {
    (0..e.n()).map(|i| (1..=hits(e, i, w)).map(|j| 1.0 / j as f64).sum::<f64>()).sum()
}

/// EJR straight from the definition: every voter group `S` with
/// `|S| >= l n / k` and `l` commonly approved candidates has a member with
/// at least `l` approved winners.
pub fn brute_ejr(e: &Election, w: &[usize]) -> bool {
    brute_axiom(e, |group, l| group.iter().any(|&i| hits(e, i, w) >= l))
}

/// PJR: such a group jointly approves at least `l` winners.
pub fn brute_pjr(e: &Election, w: &[usize]) -> bool {
    brute_axiom(e, |group, l| w.iter().filter(|&&c| group.iter().any(|&i| e.approves(i, c))).count() >= l)
}

fn brute_axiom(e: &Election, ok: impl Fn(&[usize], usize) -> bool) -> bool {
    let n = e.n();
    for mask in 1u32..(1 << n) {
        let group: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let common = (0..e.m).filter(|&c| group.iter().all(|&i| e.approves(i, c))).count();
        for l in 1..=e.k {
            if group.len() * e.k >= l * n && common >= l && !ok(&group, l) {
                return false;
            }
        }
    }
    true
}

/// The equal-shares round loop written out plainly: budgets `k/n`, each
/// round buy the affordable candidate with the lowest per-supporter price,
/// found here by bisection rather than water-filling.
pub fn literal_mes(e: &Election, completion: MesCompletion) -> (Vec<usize>, Vec<f64>) {
    let n = e.n();
    let rank = |c: usize| e.priority.iter().position(|&x| x == c).unwrap();
    let mut budget = vec![e.k as f64 / n as f64; n];
    let mut w: Vec<usize> = Vec::new();
    let mut prices = Vec::new();
    while w.len() < e.k {
        let mut best: Option<(f64, usize)> = None;
        for &c in &e.priority {
            if w.contains(&c) {
                continue;
            }
            let supporters: Vec<usize> = (0..n).filter(|&i| e.approves(i, c)).collect();
            let total: f64 = supporters.iter().map(|&i| budget[i]).sum();
            if supporters.is_empty() || total < 1.0 - 1e-9 {
                continue;
            }
            let pays = |q: f64| supporters.iter().map(|&i| budget[i].min(q)).sum::<f64>();
            let (mut lo, mut hi) = (0.0f64, supporters.iter().map(|&i| budget[i]).fold(0.0, f64::max));
            if pays(hi) >= 1.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if pays(mid) >= 1.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            let q = hi;
            let better = match best {
                None => true,
                Some((bq, _)) => q < bq - 1e-9 * bq.max(1e-3),
            };
            if better {
                best = Some((q, c));
            }
        }
        let Some((q, c)) = best else { break };
        for i in 0..n {
            if e.approves(i, c) {
                budget[i] = (budget[i] - budget[i].min(q)).max(0.0);
            }
        }
        w.push(c);
        prices.push(q);
    }
    let mut rest: Vec<usize> = (0..e.m).filter(|c| !w.contains(c)).collect();
    match completion {
        MesCompletion::Av => {
            let score = |c: usize| (0..n).filter(|&i| e.approves(i, c)).count();
            rest.sort_by_key(|&c| (std::cmp::Reverse(score(c)), rank(c)));
        }
        MesCompletion::SeqPriority => rest.sort_by_key(|&c| rank(c)),
    }
    let missing = e.k - w.len();
    w.extend(rest.into_iter().take(missing));
    w.sort_unstable();
    (w, prices)
}

/// Compare every solver and axiom check against the brute-force references.
pub fn check_election(e: &Election) -> Result<(), String> {
    let profile = e.profile();
    let tie = e.tie();
    let all = subsets(e.m, e.k);
    let best_av = all.iter().map(|w| brute_av(e, w)).fold(f64::MIN, f64::max);
    let best_cc = all.iter().map(|w| brute_cc(e, w)).max().unwrap();
    let best_pav = all.iter().map(|w| brute_pav(e, w)).fold(f64::MIN, f64::max);

    let av = av_committee(&profile, e.k, &tie).map_err(|x| x.to_string())?;
    let cc = cc_committee(&profile, e.k, &tie).map_err(|x| x.to_string())?;
    let pav = pav_committee(&profile, e.k, &tie).map_err(|x| x.to_string())?;
    for (name, out) in [("av", &av), ("cc", &cc), ("pav", &pav)] {
        if out.committee.len() != e.k {
            return Err(format!("{name} committee has {} members", out.committee.len()));
        }
    }
    let av_w: Vec<usize> = av.committee.iter().collect();
    let cc_w: Vec<usize> = cc.committee.iter().collect();
    let pav_w: Vec<usize> = pav.committee.iter().collect();
    if brute_av(e, &av_w) != best_av || av_score(&profile, &av.committee) != best_av {
        return Err(format!("AV {av_w:?} scores below {best_av}"));
    }
    if brute_cc(e, &cc_w) != best_cc || coverage_score(&profile, &cc.committee) != best_cc {
        return Err(format!("CC {cc_w:?} covers fewer than {best_cc}"));
    }
    if (brute_pav(e, &pav_w) - best_pav).abs() > 1e-9 || (pav_score(&profile, &pav.committee) - best_pav).abs() > 1e-9 {
        return Err(format!("PAV {pav_w:?} scores below {best_pav}"));
    }
    if (pav.score - best_pav).abs() > 1e-9 {
        return Err(format!("PAV reported score {} but optimum is {best_pav}", pav.score));
    }

    for completion in [MesCompletion::Av, MesCompletion::SeqPriority] {
        let mes = mes_committee(&profile, e.k, &tie, completion).map_err(|x| x.to_string())?;
        let got: Vec<usize> = mes.committee.iter().collect();
        let (want, want_q) = literal_mes(e, completion);
        if got != want {
            return Err(format!("MES {completion:?} gave {got:?}, literal loop gave {want:?}"));
        }
        let Diagnostics::Mes { q, completion: filled } = mes.diagnostics else {
            return Err("MES diagnostics missing".into());
        };
        if q.len() != want_q.len() || filled != e.k - want_q.len() {
            return Err(format!("MES bought {} seats in phase one, literal loop {}", q.len(), want_q.len()));
        }
        if q.iter().zip(&want_q).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(format!("MES prices {q:?} differ from {want_q:?}"));
        }
    }

    for w in &all {
        let committee = Committee::from(w.clone());
        let ejr = satisfies_ejr(&profile, &committee, e.k).map_err(|x| x.to_string())?;
        let pjr = satisfies_pjr(&profile, &committee, e.k).map_err(|x| x.to_string())?;
        if ejr.satisfied != brute_ejr(e, w) {
            return Err(format!("EJR verdict {} wrong for {w:?}", ejr.satisfied));
        }
        if pjr.satisfied != brute_pjr(e, w) {
            return Err(format!("PJR verdict {} wrong for {w:?}", pjr.satisfied));
        }
    }
    Ok(())
}
