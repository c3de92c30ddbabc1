//! Score predicates and constraint-aware transaction handling.
//!
//! A predicate is a Boolean combination of linear inequalities over vertex
//! scores. Because equivalent configurations share a score vector, a
//! predicate is automatically well formed on equivalence classes: it cannot
//! distinguish two configurations that behave identically.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::{
    Configuration, CreditNetwork, ScoreVector, Transaction, VertexId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// A sparse linear inequality `sum(coeff_v * score_v) <= bound` (or `>=`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearInequality {
    pub coeffs: BTreeMap<VertexId, i64>,
    pub sense: Sense,
    pub bound: i128,
}

impl LinearInequality {
    pub fn new(coeffs: BTreeMap<VertexId, i64>, sense: Sense, bound: i128) -> Self {
        LinearInequality {
            coeffs,
            sense,
            bound,
        }
    }

    pub fn holds(&self, scores: &ScoreVector) -> bool {
        let lhs: i128 = self
            .coeffs
            .iter()
            .map(|(&v, &c)| c as i128 * scores.get(v) as i128)
            .sum();
        match self.sense {
            Sense::Le => lhs <= self.bound,
            Sense::Ge => lhs >= self.bound,
        }
    }
}

/// Boolean combination of linear inequalities over a score vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorePredicate {
    True,
    Leaf(LinearInequality),
    And(Vec<ScorePredicate>),
    Or(Vec<ScorePredicate>),
    Not(Box<ScorePredicate>),
}

impl ScorePredicate {
    /// The trivially satisfied predicate.
    pub fn always() -> Self {
        ScorePredicate::True
    }

    pub fn and(parts: Vec<ScorePredicate>) -> Self {
        ScorePredicate::And(parts)
    }

    pub fn or(parts: Vec<ScorePredicate>) -> Self {
        ScorePredicate::Or(parts)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: ScorePredicate) -> Self {
        ScorePredicate::Not(Box::new(inner))
    }

    pub fn evaluate(&self, scores: &ScoreVector) -> bool {
        match self {
            ScorePredicate::True => true,
            ScorePredicate::Leaf(ineq) => ineq.holds(scores),
            ScorePredicate::And(parts) => parts.iter().all(|p| p.evaluate(scores)),
            ScorePredicate::Or(parts) => parts.iter().any(|p| p.evaluate(scores)),
            ScorePredicate::Not(inner) => !inner.evaluate(scores),
        }
    }

    /// Requires `lo <= score(v) <= hi`. The bounds must fit inside the
    /// physically attainable range `0..=degree(v)`.
    pub fn node_bound(
        network: &CreditNetwork,
        v: VertexId,
        lo: u64,
        hi: u64,
    ) -> Result<ScorePredicate> {
        network.check_vertex(v)?;
        let degree = network.degree(v);
        if lo > hi || hi > degree {
            return Err(Error::InvalidBounds { lo, hi, degree });
        }
        let ge = LinearInequality::new([(v, 1)].into(), Sense::Ge, lo as i128);
        let le = LinearInequality::new([(v, 1)].into(), Sense::Le, hi as i128);
        Ok(ScorePredicate::And(vec![
            ScorePredicate::Leaf(ge),
            ScorePredicate::Leaf(le),
        ]))
    }

    /// Requires `score(v) == k`.
    pub fn node_fixed(network: &CreditNetwork, v: VertexId, k: u64) -> Result<ScorePredicate> {
        Self::node_bound(network, v, k, k)
    }

    /// Caps the aggregate amount a group may owe the rest of the network.
    ///
    /// The group's aggregate indegree is the residual directed from outside
    /// into the group, which equals `boundary_capacity - (sum of member
    /// scores - internal_capacity)`. The returned predicate bounds it by
    /// `max_indegree`.
    pub fn group_bound(
        network: &CreditNetwork,
        members: &[VertexId],
        max_indegree: u64,
    ) -> Result<ScorePredicate> {
        if members.is_empty() {
            return Err(Error::InvalidGroup("empty member list".into()));
        }
        let mut in_group = vec![false; network.vertex_count()];
        for &v in members {
            network.check_vertex(v)?;
            if in_group[v.0] {
                return Err(Error::InvalidGroup(format!(
                    "vertex {} listed twice",
                    network.label(v)
                )));
            }
            in_group[v.0] = true;
        }
        if members.len() == network.vertex_count() {
            return Err(Error::InvalidGroup(
                "group must be a proper subset of the vertices".into(),
            ));
        }
        let mut boundary = 0i128;
        let mut internal = 0i128;
        for e in network.edges() {
            match (in_group[e.lo.0], in_group[e.hi.0]) {
                (true, true) => internal += e.capacity as i128,
                (true, false) | (false, true) => boundary += e.capacity as i128,
                (false, false) => {}
            }
        }
        // boundary + internal - sum(scores) <= max_indegree, rearranged so
        // the scores sit on the left-hand side.
        let coeffs: BTreeMap<VertexId, i64> = members.iter().map(|&v| (v, -1)).collect();
        let bound = max_indegree as i128 - boundary - internal;
        Ok(ScorePredicate::Leaf(LinearInequality::new(
            coeffs,
            Sense::Le,
            bound,
        )))
    }
}

/// Outcome of attempting a payment against a constrained network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransactionOutcome {
    /// The payment routed and the successor satisfies the predicate.
    Applied(Configuration),
    /// No residual route exists for the requested amount.
    NoRoute,
    /// A route exists but the successor scores violate the predicate.
    PredicateViolation,
}

/// A credit network together with a score predicate and a starting
/// configuration at which the predicate holds.
#[derive(Debug, Clone)]
pub struct ConstrainedNetwork {
    network: Arc<CreditNetwork>,
    predicate: ScorePredicate,
    start: Configuration,
}

impl ConstrainedNetwork {
    pub fn new(
        network: Arc<CreditNetwork>,
        predicate: ScorePredicate,
        start: Configuration,
    ) -> Result<Self> {
        if *start.network() != network {
            return Err(Error::NetworkMismatch);
        }
        if !predicate.evaluate(&start.score_vector()) {
            return Err(Error::PredicateViolated);
        }
        Ok(ConstrainedNetwork {
            network,
            predicate,
            start,
        })
    }

    /// Constraint-free wrapper around a network and start configuration.
    pub fn unconstrained(start: Configuration) -> Self {
        ConstrainedNetwork {
            network: Arc::clone(start.network()),
            predicate: ScorePredicate::always(),
            start,
        }
    }

    pub fn network(&self) -> &Arc<CreditNetwork> {
        &self.network
    }

    pub fn predicate(&self) -> &ScorePredicate {
        &self.predicate
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    /// Attempts `t` from `current`: first a route is sought, then the
    /// successor's scores are checked against the predicate. Only fully
    /// successful attempts produce a new configuration.
    pub fn attempt_transaction(
        &self,
        current: &Configuration,
        t: &Transaction,
    ) -> Result<TransactionOutcome> {
        if *current.network() != self.network {
            return Err(Error::NetworkMismatch);
        }
        self.network.check_vertex(t.payer)?;
        self.network.check_vertex(t.payee)?;
        if t.payer == t.payee || t.amount == 0 {
            return Err(Error::InvalidParams(
                "transaction needs distinct endpoints and positive amount".into(),
            ));
        }
        let route = match current.find_route(t) {
            Some(r) => r,
            None => return Ok(TransactionOutcome::NoRoute),
        };
        let successor_scores = current
            .score_vector()
            .after_payment(t.payer, t.payee, t.amount);
        if !self.predicate.evaluate(&successor_scores) {
            return Ok(TransactionOutcome::PredicateViolation);
        }
        let next = current.apply_payment(&route, t.amount)?;
        debug_assert_eq!(next.score_vector(), successor_scores);
        Ok(TransactionOutcome::Applied(next))
    }
}

/// Result of compiling per-vertex score caps into plain network structure.
///
/// Every original vertex `v` gains a satellite vertex joined to it by an
/// edge of capacity `cap(v)`; payments between original vertices are issued
/// between their satellites instead. Satellite scores start at the original
/// start scores and from then on track them exactly, while every original
/// vertex's score stays constant, so the satellite edge enforces
/// `score <= cap` with no predicate at all.
#[derive(Debug, Clone)]
pub struct GadgetExpansion {
    pub network: Arc<CreditNetwork>,
    pub start: Configuration,
    /// `satellite[v]` is the satellite vertex attached to original vertex `v`.
    pub satellite: Vec<VertexId>,
}

impl GadgetExpansion {
    /// The expansion viewed as an unconstrained network.
    pub fn constrained(&self) -> ConstrainedNetwork {
        ConstrainedNetwork::unconstrained(self.start.clone())
    }
}

/// Builds the satellite expansion of `network` for per-vertex caps `caps`,
/// starting from `start`. Fails if a start score already exceeds its cap.
pub fn build_gadget(
    network: &CreditNetwork,
    caps: &[u64],
    start: &Configuration,
) -> Result<GadgetExpansion> {
    let n = network.vertex_count();
    if caps.len() != n {
        return Err(Error::InvalidParams(format!(
            "expected {n} caps, got {}",
            caps.len()
        )));
    }
    if **start.network() != *network {
        return Err(Error::NetworkMismatch);
    }
    let start_scores = start.score_vector();
    for v in network.vertices() {
        if start_scores.get(v) > caps[v.0] {
            return Err(Error::CapExceeded {
                vertex: v.0,
                score: start_scores.get(v),
                cap: caps[v.0],
            });
        }
    }

    let mut labels = network.labels().to_vec();
    labels.extend(network.labels().iter().map(|l| format!("F({l})")));
    let mut edge_list: Vec<(usize, usize, u64)> = network
        .edges()
        .iter()
        .map(|e| (e.lo.0, e.hi.0, e.capacity))
        .collect();
    for v in 0..n {
        edge_list.push((v, n + v, caps[v]));
    }
    let expanded = Arc::new(CreditNetwork::new(labels, &edge_list)?);

    // Original edges keep their residual split; each satellite edge starts
    // with the satellite side able to pay exactly the original start score.
    let mut residuals: Vec<(u64, u64)> = start.residuals().to_vec();
    for v in network.vertices() {
        let k = start_scores.get(v);
        // The satellite has the higher index, so its residual is the second
        // component of the pair.
        residuals.push((caps[v.0] - k, k));
    }
    let start = Configuration::new(Arc::clone(&expanded), residuals)?;
    let satellite = (0..n).map(|v| VertexId(n + v)).collect();
    Ok(GadgetExpansion {
        network: expanded,
        start,
        satellite,
    })
}
