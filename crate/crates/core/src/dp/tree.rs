//! Exact counting and liquidity on trees in one bottom-up pass.
//!
//! On a tree every configuration has a distinct score vector (there is no
//! cycle to shift flow around), so counting admitted score vectors is the
//! same as counting admitted configurations. The pass roots the tree at
//! vertex 0 and computes, per vertex `v` and per residual `k` directed from
//! the parent toward `v`, the number of admitted fillings of the subtree
//! below `v`. Children combine by convolution: each child edge residual
//! directed away from `v` contributes to `v`'s own score.
//!
//! Liquidity of an ordered pair is the ratio of two such counts. The
//! numerator run forces a free unit along every hop of the unique
//! connecting path and replaces the endpoint score sets with the scores
//! from which the unit payment keeps the endpoint admitted.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{big_ratio, ScoreSet};
use crate::error::{Error, Result};
use crate::network::{CreditNetwork, VertexId};

struct Rooted {
    /// Per vertex: parent edge id and parent vertex (`None` at the root).
    parent: Vec<Option<(usize, VertexId)>>,
    /// Per vertex: children as (edge id, child vertex).
    children: Vec<Vec<(usize, VertexId)>>,
    depth: Vec<usize>,
    /// Vertices ordered so that every child precedes its parent.
    bottom_up: Vec<VertexId>,
}

fn root_tree(network: &CreditNetwork) -> Result<Rooted> {
    let n = network.vertex_count();
    if n == 0 {
        return Err(Error::NotATree("network has no vertices".into()));
    }
    if network.edge_count() + 1 != n {
        return Err(Error::NotATree(format!(
            "{} edges on {} vertices",
            network.edge_count(),
            n
        )));
    }
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut depth = vec![0usize; n];
    let mut order = vec![VertexId(0)];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(edge_id, w) in network.incident(v) {
            if seen[w.0] {
                continue;
            }
            seen[w.0] = true;
            parent[w.0] = Some((edge_id, v));
            children[v.0].push((edge_id, w));
            depth[w.0] = depth[v.0] + 1;
            order.push(w);
        }
    }
    if order.len() != n {
        return Err(Error::NotATree("network is not connected".into()));
    }
    order.reverse();
    Ok(Rooted {
        parent,
        children,
        depth,
        bottom_up: order,
    })
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

/// Counts fillings with the given per-vertex admitted scores, optionally
/// forcing a free unit on some edges. `needs_unit_from` maps an edge id to
/// the vertex whose outgoing residual on that edge must be at least one.
fn count_with(
    network: &CreditNetwork,
    rooted: &Rooted,
    admitted: &[Vec<u64>],
    needs_unit_from: &BTreeMap<usize, VertexId>,
) -> BigUint {
    let n = network.vertex_count();
    // table[v] = counts indexed by the residual directed from the parent
    // toward v, once v has been processed.
    let mut table: Vec<Vec<BigUint>> = vec![Vec::new(); n];
    let mut total = BigUint::zero();
    for &v in &rooted.bottom_up {
        let mut below = vec![BigUint::one()];
        for &(edge_id, w) in &rooted.children[v.0] {
            let mut child = std::mem::take(&mut table[w.0]);
            let cap = network.edge(edge_id).capacity as usize;
            match needs_unit_from.get(&edge_id) {
                // Travelling v -> w consumes the residual toward w.
                Some(&src) if src == v => child[0] = BigUint::zero(),
                // Travelling w -> v consumes the residual toward v.
                Some(_) => child[cap] = BigUint::zero(),
                None => {}
            }
            below = convolve(&below, &child);
        }
        match rooted.parent[v.0] {
            None => {
                for &score in &admitted[v.0] {
                    if let Some(c) = below.get(score as usize) {
                        total += c;
                    }
                }
            }
            Some((edge_id, _)) => {
                let cap = network.edge(edge_id).capacity;
                let mut row = Vec::with_capacity(cap as usize + 1);
                for k in 0..=cap {
                    let toward_parent = cap - k;
                    let mut c = BigUint::zero();
                    for &score in &admitted[v.0] {
                        if score < toward_parent {
                            continue;
                        }
                        if let Some(x) = below.get((score - toward_parent) as usize) {
                            c += x;
                        }
                    }
                    row.push(c);
                }
                table[v.0] = row;
            }
        }
    }
    total
}

fn plain_admitted(network: &CreditNetwork, scores: &ScoreSet) -> Vec<Vec<u64>> {
    network
        .vertices()
        .map(|v| scores.admitted_scores(v, network.degree(v)))
        .collect()
}

fn check_scores(network: &CreditNetwork, scores: &ScoreSet) -> Result<()> {
    if scores.vertex_count() != network.vertex_count() {
        return Err(Error::InvalidParams(format!(
            "score set covers {} vertices, network has {}",
            scores.vertex_count(),
            network.vertex_count()
        )));
    }
    Ok(())
}

/// Number of classes of a tree network whose scores all fall in `scores`.
pub fn tree_class_count(network: &CreditNetwork, scores: &ScoreSet) -> Result<BigUint> {
    check_scores(network, scores)?;
    let rooted = root_tree(network)?;
    let admitted = plain_admitted(network, scores);
    Ok(count_with(network, &rooted, &admitted, &BTreeMap::new()))
}

/// Exact liquidity of the ordered pair over all admitted classes: the
/// fraction where a unit payment routes along the connecting path and both
/// endpoints remain admitted afterwards.
pub fn tree_liquidity(
    network: &CreditNetwork,
    scores: &ScoreSet,
    payer: VertexId,
    payee: VertexId,
) -> Result<BigRational> {
    check_scores(network, scores)?;
    network.check_vertex(payer)?;
    network.check_vertex(payee)?;
    if payer == payee {
        return Err(Error::InvalidParams(
            "payer and payee must be distinct".into(),
        ));
    }
    let rooted = root_tree(network)?;
    let admitted = plain_admitted(network, scores);
    let denom = count_with(network, &rooted, &admitted, &BTreeMap::new());
    if denom.is_zero() {
        return Err(Error::InvalidParams(
            "score constraints admit no configurations".into(),
        ));
    }

    // Walk both endpoints up to their meeting point, recording for every
    // path edge the vertex whose outgoing residual the payment consumes.
    let mut needs_unit_from = BTreeMap::new();
    let (mut a, mut b) = (payer, payee);
    while rooted.depth[a.0] > rooted.depth[b.0] {
        let (edge_id, p) = rooted.parent[a.0].unwrap();
        needs_unit_from.insert(edge_id, a);
        a = p;
    }
    while rooted.depth[b.0] > rooted.depth[a.0] {
        let (edge_id, p) = rooted.parent[b.0].unwrap();
        needs_unit_from.insert(edge_id, p);
        b = p;
    }
    while a != b {
        let (edge_a, pa) = rooted.parent[a.0].unwrap();
        needs_unit_from.insert(edge_a, a);
        a = pa;
        let (edge_b, pb) = rooted.parent[b.0].unwrap();
        needs_unit_from.insert(edge_b, pb);
        b = pb;
    }

    let mut restricted = admitted;
    restricted[payer.0] = scores
        .payer_restricted(payer, network.degree(payer))
        .into_iter()
        .collect();
    restricted[payee.0] = scores
        .payee_restricted(payee, network.degree(payee))
        .into_iter()
        .collect();
    let num = count_with(network, &rooted, &restricted, &needs_unit_from);
    Ok(big_ratio(num, denom))
}
