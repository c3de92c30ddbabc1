//! Seeded Markov-chain simulation of unit payment traffic.
//!
//! Each step draws an ordered pair from a weighted traffic distribution
//! and attempts a unit payment in the current configuration. Applied
//! payments move the chain; blocked ones leave it in place. When the
//! traffic weights are symmetric the induced chain on classes is doubly
//! stochastic, so visit frequencies converge to the uniform distribution
//! over the reachable classes and per-pair success rates converge to the
//! exact liquidities. The report tracks both, plus the diagnostics used
//! to judge convergence.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::classes::ClassSpace;
use crate::error::{Error, Result};
use crate::network::{Configuration, CreditNetwork, ScoreVector, Transaction, VertexId};
use crate::predicate::{ConstrainedNetwork, TransactionOutcome};

/// xoshiro256** generator, seeded by expanding a single word through
/// splitmix64. Deterministic across platforms; the same seed always
/// reproduces the same run.
#[derive(Debug, Clone)]
pub struct SimRng {
    state: [u64; 4],
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut split = || {
            x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        let state = [split(), split(), split(), split()];
        SimRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw from `0..bound`, unbiased by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }
}

/// Weighted distribution over ordered transacting pairs.
#[derive(Debug, Clone)]
pub struct TransactionDistribution {
    pairs: Vec<(VertexId, VertexId)>,
    cumulative: Vec<u64>,
}

impl TransactionDistribution {
    /// Builds a distribution from `(pair, weight)` entries. Zero-weight
    /// entries are dropped; duplicates and self-pairs are rejected.
    pub fn new(
        entries: impl IntoIterator<Item = ((VertexId, VertexId), u64)>,
    ) -> Result<Self> {
        let mut kept: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
        for ((x, y), weight) in entries {
            if x == y {
                return Err(Error::InvalidParams(format!(
                    "transacting pair with equal endpoints {}",
                    x.0
                )));
            }
            if kept.insert((x, y), weight).is_some() {
                return Err(Error::InvalidParams(format!(
                    "duplicate transacting pair {} -> {}",
                    x.0, y.0
                )));
            }
        }
        let mut pairs = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0u64;
        for ((x, y), weight) in kept {
            if weight == 0 {
                continue;
            }
            total = total.checked_add(weight).ok_or_else(|| {
                Error::InvalidParams("traffic weights overflow".into())
            })?;
            pairs.push((x, y));
            cumulative.push(total);
        }
        if pairs.is_empty() {
            return Err(Error::InvalidParams(
                "traffic distribution has no positive-weight pairs".into(),
            ));
        }
        Ok(TransactionDistribution { pairs, cumulative })
    }

    /// Every ordered pair of distinct vertices with weight one.
    pub fn uniform_pairs(network: &CreditNetwork) -> Result<Self> {
        let entries = network.vertices().flat_map(|x| {
            network
                .vertices()
                .filter(move |&y| y != x)
                .map(move |y| ((x, y), 1))
        });
        Self::new(entries)
    }

    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    /// Whether each pair's weight equals its reverse's. Symmetric traffic
    /// makes the class chain doubly stochastic.
    pub fn is_symmetric(&self) -> bool {
        let weight = |p: &(VertexId, VertexId)| -> u64 {
            match self.pairs.binary_search(p) {
                Ok(i) => {
                    self.cumulative[i] - if i == 0 { 0 } else { self.cumulative[i - 1] }
                }
                Err(_) => 0,
            }
        };
        self.pairs
            .iter()
            .all(|&(x, y)| weight(&(x, y)) == weight(&(y, x)))
    }

    pub fn sample(&self, rng: &mut SimRng) -> (VertexId, VertexId) {
        let total = *self.cumulative.last().expect("nonempty distribution");
        let x = rng.below(total);
        let i = self.cumulative.partition_point(|&c| c <= x);
        self.pairs[i]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimParams {
    /// Measured steps, after burn-in.
    pub steps: u64,
    /// Steps walked before measurement starts.
    pub burn_in: u64,
    pub seed: u64,
}

/// Counters for one ordered pair over the measured window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairStats {
    pub attempts: u64,
    pub successes: u64,
    pub no_route: u64,
    pub predicate_blocked: u64,
}

impl PairStats {
    fn absorb(&mut self, other: &PairStats) {
        self.attempts += other.attempts;
        self.successes += other.successes;
        self.no_route += other.no_route;
        self.predicate_blocked += other.predicate_blocked;
    }

    /// Fraction of attempts that were applied.
    pub fn success_rate(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.successes as f64 / self.attempts as f64)
    }

    /// Fraction of attempts that at least found a route, whether or not
    /// the predicate then let them through.
    pub fn route_rate(&self) -> Option<f64> {
        (self.attempts > 0)
            .then(|| (self.successes + self.predicate_blocked) as f64 / self.attempts as f64)
    }
}

/// Everything measured during one simulation run.
#[derive(Debug, Clone)]
pub struct SimReport {
    network: Arc<CreditNetwork>,
    params: SimParams,
    /// Per pair, counters for the first and second half of the window.
    stats: BTreeMap<(VertexId, VertexId), [PairStats; 2]>,
    class_visits: BTreeMap<ScoreVector, u64>,
    final_configuration: Configuration,
}

impl SimReport {
    pub fn params(&self) -> SimParams {
        self.params
    }

    pub fn final_configuration(&self) -> &Configuration {
        &self.final_configuration
    }

    /// Post-burn-in visit counts per class; they sum to the measured steps.
    pub fn class_visits(&self) -> &BTreeMap<ScoreVector, u64> {
        &self.class_visits
    }

    pub fn pair_stats(&self, payer: VertexId, payee: VertexId) -> Option<PairStats> {
        self.stats.get(&(payer, payee)).map(|halves| {
            let mut total = halves[0];
            total.absorb(&halves[1]);
            total
        })
    }

    /// Empirical liquidity of a pair: its success rate over the measured
    /// window.
    pub fn estimate_liquidity(&self, payer: VertexId, payee: VertexId) -> Result<f64> {
        self.pair_stats(payer, payee)
            .and_then(|s| s.success_rate())
            .ok_or(Error::PairNotSimulated)
    }

    /// Largest gap between a pair's success rates in the two halves of
    /// the measured window; large values mean the chain has not settled.
    pub fn split_half_divergence(&self) -> f64 {
        self.stats
            .values()
            .filter_map(|halves| {
                let a = halves[0].success_rate()?;
                let b = halves[1].success_rate()?;
                Some((a - b).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Total variation distance between the empirical class distribution
    /// and the uniform distribution over `space`.
    pub fn tv_distance_to_uniform(&self, space: &ClassSpace) -> Result<f64> {
        let measured: u64 = self.class_visits.values().sum();
        if measured == 0 || space.is_empty() {
            return Err(Error::InvalidParams(
                "total variation needs measured steps and a nonempty class space".into(),
            ));
        }
        let mut seen = vec![0u64; space.len()];
        for (score, &count) in &self.class_visits {
            match space.class_index(score) {
                Some(i) => seen[i] += count,
                None => {
                    return Err(Error::InvalidParams(
                        "simulation visited a class outside the class space".into(),
                    ))
                }
            }
        }
        let uniform = 1.0 / space.len() as f64;
        let gap: f64 = seen
            .iter()
            .map(|&count| (count as f64 / measured as f64 - uniform).abs())
            .sum();
        Ok(gap / 2.0)
    }

    /// CSV export: one row per simulated pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "payer,payee,attempts,successes,no_route,predicate_blocked,success_rate,route_rate"
        );
        for (&(x, y), halves) in &self.stats {
            let mut total = halves[0];
            total.absorb(&halves[1]);
            let fmt = |r: Option<f64>| {
                r.map_or_else(|| "undefined".to_string(), |r| format!("{r:.6}"))
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.network.label(x),
                self.network.label(y),
                total.attempts,
                total.successes,
                total.no_route,
                total.predicate_blocked,
                fmt(total.success_rate()),
                fmt(total.route_rate())
            );
        }
        out
    }
}

/// Runs the payment chain from the constrained network's start
/// configuration. Burn-in steps move the chain without being measured.
pub fn simulate(
    constrained: &ConstrainedNetwork,
    traffic: &TransactionDistribution,
    params: &SimParams,
) -> Result<SimReport> {
    let network = constrained.network();
    for &(x, y) in traffic.pairs() {
        network.check_vertex(x)?;
        network.check_vertex(y)?;
    }
    let total_steps = params
        .burn_in
        .checked_add(params.steps)
        .ok_or_else(|| Error::InvalidParams("step count overflows".into()))?;

    let mut rng = SimRng::new(params.seed);
    let mut current = constrained.start().clone();
    let mut stats: BTreeMap<(VertexId, VertexId), [PairStats; 2]> = traffic
        .pairs()
        .iter()
        .map(|&p| (p, [PairStats::default(); 2]))
        .collect();
    let mut class_visits: BTreeMap<ScoreVector, u64> = BTreeMap::new();

    for step in 0..total_steps {
        let (x, y) = traffic.sample(&mut rng);
        let outcome = constrained.attempt_transaction(&current, &Transaction::unit(x, y))?;
        let result = match outcome {
            TransactionOutcome::Applied(next) => {
                current = next;
                Ok(())
            }
            TransactionOutcome::NoRoute => Err(false),
            TransactionOutcome::PredicateViolation => Err(true),
        };
        if step < params.burn_in {
            continue;
        }
        let half = usize::from((step - params.burn_in) * 2 >= params.steps);
        let row = &mut stats.get_mut(&(x, y)).expect("sampled pair is known")[half];
        row.attempts += 1;
        match result {
            Ok(()) => row.successes += 1,
            Err(false) => row.no_route += 1,
            Err(true) => row.predicate_blocked += 1,
        }
        *class_visits.entry(current.score_vector()).or_default() += 1;
    }

    Ok(SimReport {
        network: Arc::clone(network),
        params: *params,
        stats,
        class_visits,
        final_configuration: current,
    })
}
