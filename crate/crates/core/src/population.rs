//! Synthetic two-bloc voter populations.
//!
//! Each agent holds a Mallows-sampled ranking around its bloc's reference
//! ranking, a cardinal utility vector consistent with that ranking, its
//! bounded-confidence parameters and a ballot size. Approval ballots are
//! always a prefix of the agent's current ranking.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{CandidateSet, MAX_CANDIDATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bloc {
    Majority,
    Minority,
}

/// A strict order over all candidates, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut seen = vec![false; m];
        for &c in &order {
            if c >= m || std::mem::replace(&mut seen[c], true) {
                return Err(Error::invalid(format!("{order:?} is not a permutation of 0..{m}")));
            }
        }
        Ok(Ranking(order))
    }

    pub fn identity(m: usize) -> Self {
        Ranking((0..m).collect())
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        Ranking(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `pos[c]` = position of candidate `c`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (p, &c) in self.0.iter().enumerate() {
            pos[c] = p;
        }
        pos
    }

    /// The `len` most preferred candidates.
    pub fn top(&self, len: usize) -> CandidateSet {
        self.0.iter().take(len).copied().collect()
    }
}

/// Cardinal utilities, indexed by candidate id.
pub type UtilityVector = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub bloc: Bloc,
    pub ranking: Ranking,
    pub utilities: UtilityVector,
    /// Confidence bound.
    pub delta: f64,
    /// Influence weight toward same-bloc speakers.
    pub alpha: f64,
    /// Influence weight toward cross-bloc speakers, never above `alpha`.
    pub beta: f64,
    pub ballot_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSampling {
    #[default]
    Uniform,
    /// Normal(0.5, 0.15) truncated to each parameter's support.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationConfig {
    pub n_maj: usize,
    pub n_min: usize,
    pub m: usize,
    pub phi: f64,
    pub k: usize,
    pub param_sampling: ParamSampling,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n_maj: 80,
            n_min: 20,
            m: 50,
            phi: 0.2,
            k: 5,
            param_sampling: ParamSampling::Uniform,
        }
    }
}

impl PopulationConfig {
    pub fn n(&self) -> usize {
        self.n_maj + self.n_min
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_maj <= self.n_min {
            return Err(Error::config(format!(
                "need n_maj > n_min > 0, got n_maj={} n_min={}",
                self.n_maj, self.n_min
            )));
        }
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::config(format!("phi={} outside [0, 1]", self.phi)));
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::config(format!("need 1 <= k <= m, got k={} m={}", self.k, self.m)));
        }
        if self.m > MAX_CANDIDATES {
            return Err(Error::config(format!("m={} exceeds the supported {MAX_CANDIDATES}", self.m)));
        }
        Ok(())
    }
}

/// Agents plus the two bloc reference rankings they were drawn around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub agents: Vec<Agent>,
    pub reference_majority: Ranking,
    pub reference_minority: Ranking,
}

impl Population {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn blocs(&self) -> Vec<Bloc> {
        self.agents.iter().map(|a| a.bloc).collect()
    }

    pub fn utilities(&self) -> Vec<UtilityVector> {
        self.agents.iter().map(|a| a.utilities.clone()).collect()
    }

    pub fn ballots(&self) -> Vec<CandidateSet> {
        self.agents.iter().map(derive_ballot).collect()
    }
}

/// Number of discordant candidate pairs between two rankings.
pub fn kendall_tau(r1: &Ranking, r2: &Ranking) -> Result<usize> {
    if r1.len() != r2.len() {
        return Err(Error::invalid(format!(
            "rankings over {} and {} candidates",
            r1.len(),
            r2.len()
        )));
    }
    let pos2 = r2.positions();
    let seq: Vec<usize> = r1.order().iter().map(|&c| pos2[c]).collect();
    let mut discordant = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                discordant += 1;
            }
        }
    }
    Ok(discordant)
}

/// Draw from the Mallows model `P(r) ∝ phi^d(r, reference)` by repeated
/// insertion: the i-th reference item lands at position `j <= i` with
/// probability proportional to `phi^(i - j)`.
pub fn sample_mallows<R: Rng + ?Sized>(reference: &Ranking, phi: f64, rng: &mut R) -> Result<Ranking> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::invalid(format!("phi={phi} outside [0, 1]")));
    }
    let m = reference.len();
    let mut out: Vec<usize> = Vec::with_capacity(m);
    // weights[d] = phi^d, d = number of already placed items the new one jumps over
    let mut weights = Vec::with_capacity(m);
    let mut w = 1.0;
    for _ in 0..m {
        weights.push(w);
        w *= phi;
    }
    for (i, &item) in reference.order().iter().enumerate() {
        let total: f64 = weights[..=i].iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut jump = 0;
        while jump < i && u >= weights[jump] {
            u -= weights[jump];
            jump += 1;
        }
        out.insert(i - jump, item);
    }
    Ok(Ranking(out))
}

/// Map sorted-descending draws onto candidates in ranking order.
pub fn utilities_from_draws(ranking: &Ranking, mut draws: Vec<f64>) -> UtilityVector {
    draws.sort_by(|a, b| b.total_cmp(a));
    let mut u = vec![0.0; ranking.len()];
    for (&c, v) in ranking.order().iter().zip(draws) {
        u[c] = v;
    }
    u
}

pub fn generate_utilities<R: Rng + ?Sized>(ranking: &Ranking, rng: &mut R) -> UtilityVector {
    let draws = (0..ranking.len()).map(|_| rng.gen::<f64>()).collect();
    utilities_from_draws(ranking, draws)
}

/// Round a continuous ballot-size draw and clamp it to `[1, m]`.
pub fn ballot_size_from_draw(x: f64, m: usize) -> usize {
    let r = x.round();
    if r < 1.0 {
        1
    } else if r > m as f64 {
        m
    } else {
        r as usize
    }
}

pub fn sample_ballot_size<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> usize {
    let normal = Normal::new(2.0 * k as f64, 1.0).expect("unit stddev");
    ballot_size_from_draw(normal.sample(rng), m)
}

/// The `ballot_size` top candidates of the agent's current ranking.
pub fn derive_ballot(agent: &Agent) -> CandidateSet {
    agent.ranking.top(agent.ballot_size)
}

/// Re-sort candidates by utility, keeping the previous ranking's order
/// among exact ties.
pub fn rerank_from_utilities(agent: &Agent) -> Ranking {
    let mut order = agent.ranking.order().to_vec();
    order.sort_by(|&a, &b| agent.utilities[b].total_cmp(&agent.utilities[a]));
    Ranking(order)
}

fn truncated_normal<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    let normal = Normal::new(0.5, 0.15).expect("positive stddev");
    for _ in 0..64 {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
    // support far out in the tail, fall back to uniform
    rng.gen_range(lo..=hi)
}

fn sample_params<R: Rng + ?Sized>(mode: ParamSampling, rng: &mut R) -> (f64, f64, f64) {
    match mode {
        ParamSampling::Uniform => {
            let delta = rng.gen::<f64>();
            let alpha = rng.gen::<f64>();
            let beta = rng.gen::<f64>() * alpha;
            (delta, alpha, beta)
        }
        ParamSampling::Normal => {
            let delta = truncated_normal(0.0, 1.0, rng);
            let alpha = truncated_normal(0.0, 1.0, rng);
            let beta = truncated_normal(0.0, alpha, rng);
            (delta, alpha, beta)
        }
    }
}

pub fn init_population<R: Rng + ?Sized>(cfg: &PopulationConfig, rng: &mut R) -> Result<Population> {
    cfg.validate()?;
    let reference_majority = Ranking::random(cfg.m, rng);
    let reference_minority = Ranking::random(cfg.m, rng);
    let mut agents = Vec::with_capacity(cfg.n());
    for id in 0..cfg.n() {
        let (bloc, reference) = if id < cfg.n_maj {
            (Bloc::Majority, &reference_majority)
        } else {
            (Bloc::Minority, &reference_minority)
        };
        let ranking = sample_mallows(reference, cfg.phi, rng)?;
        let utilities = generate_utilities(&ranking, rng);
        let (delta, alpha, beta) = sample_params(cfg.param_sampling, rng);
        let ballot_size = sample_ballot_size(cfg.k, cfg.m, rng);
        agents.push(Agent {
            id,
            bloc,
            ranking,
            utilities,
            delta,
            alpha,
            beta,
            ballot_size,
        });
    }
    Ok(Population {
        agents,
        reference_majority,
        reference_minority,
    })
}
