//! Evaluation objectives, consensus diagnostics and paired significance tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::population::{Agent, Bloc, UtilityVector};
use crate::rules::{cc_committee, coverage_score, optimal_welfare_committee, social_welfare, ApprovalProfile, Committee, TieBreaker};
use crate::sets::CandidateSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScores {
    pub ur: f64,
    pub rr: f64,
    pub uragg: f64,
    pub vs: f64,
    pub ejr_ok: bool,
    pub pjr_ok: bool,
    pub minority_preserved: usize,
    pub committee_approvals: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConsensusStats {
    pub utility_variance: f64,
    pub intergroup_disagreement: f64,
}

/// Which candidates count as minority-supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinorityRule {
    /// Minority approval fraction strictly above the majority's.
    #[default]
    Strict,
    /// Fraction at least the majority's, among candidates some minority voter approves.
    AtLeast,
}

fn check_len(w: &Committee, k: usize) -> Result<()> {
    if w.len() != k {
        return Err(Error::invalid(format!("committee of size {} where k={k}", w.len())));
    }
    Ok(())
}

pub fn utilitarian_ratio(utilities: &[UtilityVector], w: &Committee, k: usize) -> Result<f64> {
    check_len(w, k)?;
    let (_, best) = optimal_welfare_committee(utilities, k)?;
    utilitarian_ratio_with(utilities, w, best)
}

/// As [`utilitarian_ratio`] with the optimal welfare already known.
pub fn utilitarian_ratio_with(utilities: &[UtilityVector], w: &Committee, optimal: f64) -> Result<f64> {
    if optimal <= 0.0 {
        return Err(Error::UndefinedRatio("optimal welfare is zero"));
    }
    Ok((social_welfare(utilities, w) / optimal).min(1.0))
}

pub fn representation_ratio(profile: &ApprovalProfile, w: &Committee, k: usize) -> Result<f64> {
    check_len(w, k)?;
    let best = cc_committee(profile, k, &TieBreaker::identity(profile.m()))?;
    representation_ratio_with(profile, w, coverage_score(profile, &best.committee))
}

/// As [`representation_ratio`] with the maximum coverage already known.
pub fn representation_ratio_with(profile: &ApprovalProfile, w: &Committee, max_coverage: usize) -> Result<f64> {
    if max_coverage == 0 {
        return Err(Error::UndefinedRatio("maximum coverage is zero"));
    }
    Ok(coverage_score(profile, w) as f64 / max_coverage as f64)
}

pub fn uragg(ur: f64, rr: f64) -> f64 {
    ur * rr
}

/// Mean number of winners per voter.
pub fn voter_satisfaction(profile: &ApprovalProfile, w: &Committee) -> f64 {
    let total: usize = profile.ballots().iter().map(|b| b.intersection(w.members).len()).sum();
    total as f64 / profile.n() as f64
}

/// Per-candidate population variance across agents, averaged over candidates.
pub fn utility_variance(agents: &[Agent]) -> f64 {
    let Some(first) = agents.first() else {
        return 0.0;
    };
    let m = first.utilities.len();
    if m == 0 {
        return 0.0;
    }
    let n = agents.len() as f64;
    let mut total = 0.0;
    for j in 0..m {
        let mean = agents.iter().map(|a| a.utilities[j]).sum::<f64>() / n;
        total += agents.iter().map(|a| (a.utilities[j] - mean).powi(2)).sum::<f64>() / n;
    }
    total / m as f64
}

fn split_blocs(profile: &ApprovalProfile, blocs: &[Bloc]) -> Result<(Vec<CandidateSet>, Vec<CandidateSet>)> {
    if blocs.len() != profile.n() {
        return Err(Error::invalid(format!("{} bloc labels for {} voters", blocs.len(), profile.n())));
    }
    let mut minority = Vec::new();
    let mut majority = Vec::new();
    for (b, &bloc) in profile.ballots().iter().zip(blocs) {
        match bloc {
            Bloc::Minority => minority.push(*b),
            Bloc::Majority => majority.push(*b),
        }
    }
    if minority.is_empty() || majority.is_empty() {
        return Err(Error::invalid("both blocs must be nonempty"));
    }
    Ok((minority, majority))
}

/// Mean over all (minority, majority) voter pairs of
/// `1 - |A ∩ B| / min(|A|, |B|)`.
pub fn intergroup_disagreement(profile: &ApprovalProfile, blocs: &[Bloc]) -> Result<f64> {
    let (minority, majority) = split_blocs(profile, blocs)?;
    let mut total = 0.0;
    for a in &minority {
        for b in &majority {
            let shared = a.intersection(*b).len() as f64;
            total += 1.0 - shared / a.len().min(b.len()) as f64;
        }
    }
    Ok(total / (minority.len() * majority.len()) as f64)
}

pub fn minority_supported_candidates(profile: &ApprovalProfile, blocs: &[Bloc], rule: MinorityRule) -> Result<CandidateSet> {
    let (minority, majority) = split_blocs(profile, blocs)?;
    let (n_min, n_maj) = (minority.len(), majority.len());
    let mut out = CandidateSet::EMPTY;
    for c in 0..profile.m() {
        let v_min = minority.iter().filter(|b| b.contains(c)).count();
        let v_maj = majority.iter().filter(|b| b.contains(c)).count();
        // compare v_min / n_min with v_maj / n_maj without division
        let (lhs, rhs) = (v_min * n_maj, v_maj * n_min);
        let supported = match rule {
            MinorityRule::Strict => lhs > rhs,
            MinorityRule::AtLeast => v_min > 0 && lhs >= rhs,
        };
        if supported {
            out.insert(c);
        }
    }
    Ok(out)
}

pub fn minority_preservation(minority_set: CandidateSet, w: &Committee) -> usize {
    minority_set.intersection(w.members).len()
}

/// Approval counts of the committee members, ascending.
pub fn committee_approval_profile(profile: &ApprovalProfile, w: &Committee) -> Vec<usize> {
    let mut v: Vec<usize> = w.iter().map(|c| profile.score(c)).collect();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub n: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub t_pvalue: f64,
    /// `min(W+, W-)` over the nonzero differences.
    pub wilcoxon_statistic: f64,
    pub wilcoxon_pvalue: f64,
    /// The differences had (numerically) zero spread.
    pub t_degenerate: bool,
    /// Every difference was zero.
    pub wilcoxon_degenerate: bool,
}

pub const MIN_PAIRED_SAMPLES: usize = 10;
/// Largest sample size using the exact signed-rank distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;

pub fn paired_tests(a: &[f64], b: &[f64]) -> Result<PairedTestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("paired samples of lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < MIN_PAIRED_SAMPLES {
        return Err(Error::invalid(format!("paired tests need at least {MIN_PAIRED_SAMPLES} pairs, got {}", a.len())));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite sample value"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (t_statistic, t_pvalue, t_degenerate) = paired_t(&d);
    let (wilcoxon_statistic, wilcoxon_pvalue, wilcoxon_degenerate) = signed_rank(&d);
    Ok(PairedTestResult {
        n: d.len(),
        mean_difference: d.iter().sum::<f64>() / d.len() as f64,
        t_statistic,
        t_pvalue,
        wilcoxon_statistic,
        wilcoxon_pvalue,
        t_degenerate,
        wilcoxon_degenerate,
    })
}

fn paired_t(d: &[f64]) -> (f64, f64, bool) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    let scale = d.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if sd <= 1e-12 * scale || sd == 0.0 {
        return if mean == 0.0 || mean.abs() <= 1e-12 * scale {
            (0.0, 1.0, true)
        } else {
            (mean.signum() * f64::INFINITY, 0.0, true)
        };
    }
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("positive degrees of freedom");
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    (t, p, false)
}

/// Average ranks of `|d|`, 1-based, with tied values sharing their mean rank.
fn abs_ranks(d: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut ranks = vec![0.0; d.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && d[idx[end]].abs() == d[idx[start]].abs() {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// `P(W <= w)` under the null for `n` untied ranks.
fn signed_rank_cdf(n: usize, w: usize) -> f64 {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(n as i32);
    counts[..=w.min(max)].iter().sum::<f64>() / total
}

fn signed_rank(d: &[f64]) -> (f64, f64, bool) {
    let nonzero: Vec<f64> = d.iter().copied().filter(|&x| x != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return (0.0, 1.0, true);
    }
    let (ranks, ties) = abs_ranks(&nonzero);
    let w_plus: f64 = nonzero.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let stat = w_plus.min(total - w_plus);
    let tied = ties.iter().any(|&t| t > 1);
    let p = if n <= WILCOXON_EXACT_MAX && !tied {
        2.0 * signed_rank_cdf(n, stat as usize)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let correction: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - correction;
        if var <= 0.0 {
            1.0
        } else {
            let z = (stat - mean) / var.sqrt();
            2.0 * Normal::new(0.0, 1.0).expect("unit normal").cdf(-z.abs())
        }
    };
    (stat, p.min(1.0), false)
}

/// Objective scores of one committee, given the per-instance optima.
#[allow(clippy::too_many_arguments)]
pub fn objective_scores(
    profile: &ApprovalProfile,
    utilities: &[UtilityVector],
    w: &Committee,
    optimal_welfare: f64,
    max_coverage: usize,
    minority_set: CandidateSet,
    ejr_ok: bool,
    pjr_ok: bool,
) -> Result<ObjectiveScores> {
    let ur = utilitarian_ratio_with(utilities, w, optimal_welfare)?;
    let rr = representation_ratio_with(profile, w, max_coverage)?;
    Ok(ObjectiveScores {
        ur,
        rr,
        uragg: uragg(ur, rr),
        vs: voter_satisfaction(profile, w),
        ejr_ok,
        pjr_ok,
        minority_preserved: minority_preservation(minority_set, w),
        committee_approvals: committee_approval_profile(profile, w),
    })
}
