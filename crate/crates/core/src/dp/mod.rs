//! Counting admitted score vectors without enumerating configurations:
//! closed forms for stars, a subtree convolution for trees, and a
//! decomposition-driven dynamic program for graphs of small treewidth.
//!
//! These paths count every score vector whose per-vertex scores fall in the
//! given [`ScoreSet`]s, matching a filtered full-configuration scan. Each is
//! validated against the brute-force oracles in [`crate::classes`].

pub mod decomp;
pub mod star;
pub mod tree;
pub mod treewidth;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::network::{CreditNetwork, VertexId};
use crate::predicate::ScorePredicate;

pub(crate) fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Per-vertex sets of admitted scores. A vertex without an explicit set
/// admits its full physical range `0..=degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreSet {
    admitted: Vec<Option<BTreeSet<u64>>>,
}

impl ScoreSet {
    pub fn unconstrained(vertex_count: usize) -> Self {
        ScoreSet {
            admitted: vec![None; vertex_count],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.admitted.len()
    }

    /// Replaces the admitted set of `v` with the given scores.
    pub fn restrict(&mut self, v: VertexId, scores: impl IntoIterator<Item = u64>) {
        self.admitted[v.0] = Some(scores.into_iter().collect());
    }

    /// Admits only the interval `lo..=hi` at `v`.
    pub fn interval(&mut self, v: VertexId, lo: u64, hi: u64) {
        self.restrict(v, lo..=hi);
    }

    /// Pins the score of `v` to exactly `k`.
    pub fn fix(&mut self, v: VertexId, k: u64) {
        self.restrict(v, [k]);
    }

    pub fn is_constrained(&self, v: VertexId) -> bool {
        self.admitted[v.0].is_some()
    }

    pub fn admits(&self, v: VertexId, score: u64) -> bool {
        match &self.admitted[v.0] {
            Some(set) => set.contains(&score),
            None => true,
        }
    }

    /// The admitted scores of `v` within its physical range.
    pub fn admitted_scores(&self, v: VertexId, degree: u64) -> Vec<u64> {
        (0..=degree).filter(|&s| self.admits(v, s)).collect()
    }

    /// The same constraint expressed as a predicate, for cross-checking
    /// against enumeration-based paths. Each admitted set becomes a
    /// disjunction of interval bounds over its maximal runs.
    pub fn to_predicate(&self, network: &CreditNetwork) -> Result<ScorePredicate> {
        if self.admitted.len() != network.vertex_count() {
            return Err(Error::InvalidParams(format!(
                "score set covers {} vertices, network has {}",
                self.admitted.len(),
                network.vertex_count()
            )));
        }
        let mut parts = Vec::new();
        for v in network.vertices() {
            let degree = network.degree(v);
            let scores = self.admitted_scores(v, degree);
            if !self.is_constrained(v) {
                continue;
            }
            if scores.is_empty() {
                // An unsatisfiable constraint: score >= 1 and score <= 0.
                parts.push(ScorePredicate::and(vec![
                    ScorePredicate::node_bound(network, v, 0, 0)?,
                    ScorePredicate::not(ScorePredicate::node_bound(network, v, 0, 0)?),
                ]));
                continue;
            }
            let mut runs: Vec<(u64, u64)> = Vec::new();
            for s in scores {
                match runs.last_mut() {
                    Some((_, hi)) if *hi + 1 == s => *hi = s,
                    _ => runs.push((s, s)),
                }
            }
            let alts = runs
                .into_iter()
                .map(|(lo, hi)| ScorePredicate::node_bound(network, v, lo, hi))
                .collect::<Result<Vec<_>>>()?;
            parts.push(if alts.len() == 1 {
                alts.into_iter().next().unwrap()
            } else {
                ScorePredicate::or(alts)
            });
        }
        Ok(ScorePredicate::and(parts))
    }

    /// Restriction of the payer's admitted set to scores from which a unit
    /// payment keeps the vertex admitted: `s` stays only if `s >= 1` and
    /// `s - 1` is admitted.
    pub(crate) fn payer_restricted(&self, v: VertexId, degree: u64) -> BTreeSet<u64> {
        (1..=degree)
            .filter(|&s| self.admits(v, s) && self.admits(v, s - 1))
            .collect()
    }

    /// Restriction of the payee's admitted set to scores at which receiving
    /// a unit keeps the vertex admitted: `s` stays only if `s + 1 <= degree`
    /// and `s + 1` is admitted.
    pub(crate) fn payee_restricted(&self, v: VertexId, degree: u64) -> BTreeSet<u64> {
        (0..degree)
            .filter(|&s| self.admits(v, s) && self.admits(v, s + 1))
            .collect()
    }
}
