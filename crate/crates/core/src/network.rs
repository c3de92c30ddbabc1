//! Credit network model: vertices joined by trust lines of fixed capacity,
//! with a configuration assigning each line's capacity to the two directions.
//!
//! Direction convention used throughout the crate: the residual `r(u -> v)`
//! is the amount `u` can still pay `v` across their shared edge. A payment
//! from `u` to `v` consumes `r(u -> v)` and replenishes `r(v -> u)` on every
//! edge along its route. A vertex's score is the total residual directed away
//! from it, so a payer's score drops by the payment amount and the payee's
//! rises by the same amount.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Dense index of a vertex within its network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected trust line between two distinct vertices.
///
/// Endpoints are stored with the lower index first; parallel edges are
/// permitted and keep distinct ids. A capacity of zero is legal and makes the
/// edge inert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CreditEdge {
    pub lo: VertexId,
    pub hi: VertexId,
    pub capacity: u64,
}

impl CreditEdge {
    /// The endpoint opposite `v`, if `v` is an endpoint at all.
    pub fn other(&self, v: VertexId) -> Option<VertexId> {
        if v == self.lo {
            Some(self.hi)
        } else if v == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

/// Immutable multigraph of vertices, labels and trust lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreditNetwork {
    labels: Vec<String>,
    edges: Vec<CreditEdge>,
    /// Per vertex: incident `(edge_id, other endpoint)` sorted by edge id.
    adjacency: Vec<Vec<(usize, VertexId)>>,
}

impl CreditNetwork {
    /// Builds a network from vertex labels and `(u, v, capacity)` edge
    /// triples. Labels must be unique and non-empty; self loops are rejected.
    pub fn new(labels: Vec<String>, edge_list: &[(usize, usize, u64)]) -> Result<Self> {
        let n = labels.len();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidNetwork(format!("vertex {i} has an empty label")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidNetwork(format!("duplicate label {l:?}")));
            }
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v, capacity) in edge_list {
            if u >= n {
                return Err(Error::UnknownVertex(u));
            }
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if u == v {
                return Err(Error::InvalidNetwork(format!("self loop at vertex {u}")));
            }
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            let id = edges.len();
            edges.push(CreditEdge {
                lo: VertexId(lo),
                hi: VertexId(hi),
                capacity,
            });
            adjacency[lo].push((id, VertexId(hi)));
            adjacency[hi].push((id, VertexId(lo)));
        }
        Ok(CreditNetwork {
            labels,
            edges,
            adjacency,
        })
    }

    /// Convenience constructor labelling vertices `v0`, `v1`, ...
    pub fn with_default_labels(n: usize, edge_list: &[(usize, usize, u64)]) -> Result<Self> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), edge_list)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[CreditEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &CreditEdge {
        &self.edges[id]
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(VertexId)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.labels.len()).map(VertexId)
    }

    /// Incident `(edge_id, other endpoint)` pairs in ascending edge id order.
    pub fn incident(&self, v: VertexId) -> &[(usize, VertexId)] {
        &self.adjacency[v.0]
    }

    /// Weighted degree: total capacity incident to `v`.
    pub fn degree(&self, v: VertexId) -> u64 {
        self.adjacency[v.0]
            .iter()
            .map(|&(e, _)| self.edges[e].capacity)
            .sum()
    }

    /// Sum of all edge capacities.
    pub fn total_capacity(&self) -> u64 {
        self.edges.iter().map(|e| e.capacity).sum()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.0 < self.labels.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.0))
        }
    }
}

/// Per-vertex scores of a configuration. The score of `v` is the total
/// residual directed away from `v`; scores sum to the network's total
/// capacity and identify a configuration up to reroutings that do not affect
/// any future payment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScoreVector(Vec<u64>);

impl ScoreVector {
    pub fn new(scores: Vec<u64>) -> Self {
        ScoreVector(scores)
    }

    pub fn get(&self, v: VertexId) -> u64 {
        self.0[v.0]
    }

    pub fn scores(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Score vector after a payment of `amount` from `payer` to `payee`.
    /// Requires `amount <= score(payer)`, which holds whenever a route for
    /// the payment exists.
    pub fn after_payment(&self, payer: VertexId, payee: VertexId, amount: u64) -> ScoreVector {
        let mut s = self.0.clone();
        s[payer.0] -= amount;
        s[payee.0] += amount;
        ScoreVector(s)
    }
}

/// A requested payment: `amount` units from `payer` to `payee`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transaction {
    pub payer: VertexId,
    pub payee: VertexId,
    pub amount: u64,
}

impl Transaction {
    pub fn unit(payer: VertexId, payee: VertexId) -> Self {
        Transaction {
            payer,
            payee,
            amount: 1,
        }
    }
}

/// A concrete route for a payment: the vertex sequence together with the
/// specific edge taken on each hop (needed when parallel edges exist).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<usize>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }
}

/// Immutable snapshot of every edge's residual split.
///
/// For edge `e` the pair is `(r(lo -> hi), r(hi -> lo))`; the two parts
/// always sum to the edge capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    network: Arc<CreditNetwork>,
    residuals: Vec<(u64, u64)>,
}

impl Configuration {
    /// Builds a configuration from explicit residual splits, one
    /// `(toward hi, toward lo)` pair per edge in edge id order.
    pub fn new(network: Arc<CreditNetwork>, residuals: Vec<(u64, u64)>) -> Result<Self> {
        if residuals.len() != network.edge_count() {
            return Err(Error::InvalidNetwork(format!(
                "expected {} residual pairs, got {}",
                network.edge_count(),
                residuals.len()
            )));
        }
        for (id, (&(f, b), e)) in residuals.iter().zip(network.edges()).enumerate() {
            if f + b != e.capacity {
                return Err(Error::InvalidNetwork(format!(
                    "edge {id}: residuals {f}+{b} do not sum to capacity {}",
                    e.capacity
                )));
            }
        }
        Ok(Configuration { network, residuals })
    }

    /// Each capacity split as evenly as possible, the lower-indexed endpoint
    /// receiving the larger share of odd capacities.
    pub fn even_split(network: Arc<CreditNetwork>) -> Self {
        let residuals = network
            .edges()
            .iter()
            .map(|e| {
                let toward_hi = e.capacity.div_ceil(2);
                (toward_hi, e.capacity - toward_hi)
            })
            .collect();
        Configuration { network, residuals }
    }

    pub fn network(&self) -> &Arc<CreditNetwork> {
        &self.network
    }

    pub fn residuals(&self) -> &[(u64, u64)] {
        &self.residuals
    }

    /// Residual available for `from` to pay across edge `edge_id`.
    pub fn residual(&self, edge_id: usize, from: VertexId) -> u64 {
        let e = self.network.edge(edge_id);
        if from == e.lo {
            self.residuals[edge_id].0
        } else {
            debug_assert_eq!(from, e.hi);
            self.residuals[edge_id].1
        }
    }

    /// The score of every vertex: total residual directed away from it.
    pub fn score_vector(&self) -> ScoreVector {
        let mut scores = vec![0u64; self.network.vertex_count()];
        for (id, &(toward_hi, toward_lo)) in self.residuals.iter().enumerate() {
            let e = self.network.edge(id);
            scores[e.lo.0] += toward_hi;
            scores[e.hi.0] += toward_lo;
        }
        ScoreVector(scores)
    }

    /// Breadth-first search for a route able to carry `t.amount` on every
    /// hop. Returns a minimum-hop route; neighbors are expanded in ascending
    /// edge id order, so ties resolve toward lower edge ids deterministically.
    pub fn find_route(&self, t: &Transaction) -> Option<Route> {
        self.network.check_vertex(t.payer).ok()?;
        self.network.check_vertex(t.payee).ok()?;
        if t.payer == t.payee || t.amount == 0 {
            return None;
        }
        let n = self.network.vertex_count();
        let mut parent: Vec<Option<(VertexId, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[t.payer.0] = true;
        let mut queue = VecDeque::from([t.payer]);
        'search: while let Some(u) = queue.pop_front() {
            for &(edge_id, w) in self.network.incident(u) {
                if seen[w.0] || self.residual(edge_id, u) < t.amount {
                    continue;
                }
                seen[w.0] = true;
                parent[w.0] = Some((u, edge_id));
                if w == t.payee {
                    break 'search;
                }
                queue.push_back(w);
            }
        }
        if !seen[t.payee.0] {
            return None;
        }
        let mut vertices = vec![t.payee];
        let mut edges = Vec::new();
        let mut cur = t.payee;
        while let Some((prev, edge_id)) = parent[cur.0] {
            edges.push(edge_id);
            vertices.push(prev);
            cur = prev;
        }
        vertices.reverse();
        edges.reverse();
        Some(Route { vertices, edges })
    }

    /// Applies a payment of `amount` along `route`, hop by hop, returning the
    /// resulting configuration. Fails if any hop lacks residual at its turn;
    /// closed walks (payer equal to payee) are allowed.
    pub fn apply_payment(&self, route: &Route, amount: u64) -> Result<Configuration> {
        if route.vertices.len() != route.edges.len() + 1 || route.edges.is_empty() {
            return Err(Error::InvalidParams(
                "route must have one more vertex than edges and at least one hop".into(),
            ));
        }
        let mut residuals = self.residuals.clone();
        for (hop, &edge_id) in route.edges.iter().enumerate() {
            if edge_id >= self.network.edge_count() {
                return Err(Error::InvalidParams(format!("unknown edge {edge_id} on route")));
            }
            let e = self.network.edge(edge_id);
            let from = route.vertices[hop];
            let to = route.vertices[hop + 1];
            if !(from == e.lo && to == e.hi || from == e.hi && to == e.lo) {
                return Err(Error::InvalidParams(format!(
                    "edge {edge_id} does not join hop {hop} of the route"
                )));
            }
            let (toward_hi, toward_lo) = residuals[edge_id];
            if from == e.lo {
                if toward_hi < amount {
                    return Err(Error::InsufficientResidual {
                        edge: edge_id,
                        available: toward_hi,
                        needed: amount,
                    });
                }
                residuals[edge_id] = (toward_hi - amount, toward_lo + amount);
            } else {
                if toward_lo < amount {
                    return Err(Error::InsufficientResidual {
                        edge: edge_id,
                        available: toward_lo,
                        needed: amount,
                    });
                }
                residuals[edge_id] = (toward_hi + amount, toward_lo - amount);
            }
        }
        Ok(Configuration {
            network: Arc::clone(&self.network),
            residuals,
        })
    }
}

/// Whether two configurations of the same network are interchangeable for
/// every future payment, which holds exactly when their score vectors agree.
pub fn configurations_equivalent(a: &Configuration, b: &Configuration) -> Result<bool> {
    if !Arc::ptr_eq(&a.network, &b.network) && *a.network != *b.network {
        return Err(Error::NetworkMismatch);
    }
    Ok(a.score_vector() == b.score_vector())
}
