//! Exact class counting and liquidity on graphs of bounded treewidth.
//!
//! Counting classes means counting distinct realizable score vectors, and
//! on graphs with cycles several configurations can share one, so fillings
//! cannot simply be summed bag by bag. Instead, a dynamic-programming key
//! is the full set of outcomes still achievable for one commitment of
//! scores to the already-removed vertices, and the stored multiplicity is
//! the number of commitments sharing exactly that outcome set:
//!
//! - an outcome is a pair of partial bag scores (capacity already granted
//!   to each bag vertex by decided edges) and, when liquidity is asked
//!   for, a directed reachability matrix over the bag plus endpoints;
//! - removing a vertex commits it to one admitted score, splits every
//!   remaining residual of its edges, and folds the results back into a
//!   new outcome set; commitments whose set comes out empty die, distinct
//!   commitments landing on the same set pool their multiplicities;
//! - joining two subtrees pairs outcomes (scores add, reachability
//!   unions) and multiplies multiplicities.
//!
//! At the empty root bag every commitment is a complete score vector, so
//! the multiplicity total is the class count. Whether a unit payment can
//! route is a property of the class, not the configuration: every
//! surviving outcome of a commitment agrees on payer-to-payee
//! reachability (asserted), and the liquidity numerator sums the
//! commitments whose matrix connects the pair.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use super::decomp::{NiceDecomposition, StepKind, TreeDecomposition};
use super::{big_ratio, ScoreSet};
use crate::error::{Error, Result};
use crate::network::{CreditNetwork, VertexId};

/// Default cap on outcome-set operations before the solver gives up.
pub const DEFAULT_DP_BUDGET: u64 = 10_000_000;

/// Outcome sets track at most this many vertices (bag plus endpoints).
const MAX_TRACKED: usize = 32;

type Profile = Vec<u64>;
type Reach = Vec<u32>;
type Element = (Profile, Reach);
type StateKey = Vec<Element>;
type Dp = BTreeMap<StateKey, BigUint>;

/// Number of classes of the network whose scores all fall in `scores`,
/// computed along the given tree decomposition.
pub fn treewidth_class_count(
    network: &CreditNetwork,
    decomposition: &TreeDecomposition,
    scores: &ScoreSet,
    budget: u64,
) -> Result<BigUint> {
    decomposition.validate(network)?;
    check_scores(network, scores)?;
    let nice = decomposition.to_nice();
    let admitted = plain_admitted(network, scores);
    let mut solver = Solver::new(network, &nice, admitted, Vec::new(), budget)?;
    let root = solver.run()?;
    let mut total = BigUint::zero();
    for (key, mult) in &root {
        assert_eq!(
            key.as_slice(),
            &[(Vec::new(), Vec::new())],
            "empty root bag admits a single outcome"
        );
        total += mult;
    }
    Ok(total)
}

/// Exact liquidity of the ordered pair over all admitted classes: the
/// fraction where a unit payment can route from payer to payee and both
/// endpoints remain admitted afterwards.
pub fn treewidth_liquidity(
    network: &CreditNetwork,
    decomposition: &TreeDecomposition,
    scores: &ScoreSet,
    payer: VertexId,
    payee: VertexId,
    budget: u64,
) -> Result<BigRational> {
    decomposition.validate(network)?;
    check_scores(network, scores)?;
    network.check_vertex(payer)?;
    network.check_vertex(payee)?;
    if payer == payee {
        return Err(Error::InvalidParams(
            "payer and payee must be distinct".into(),
        ));
    }
    let denom = treewidth_class_count(network, decomposition, scores, budget)?;
    if denom.is_zero() {
        return Err(Error::InvalidParams(
            "score constraints admit no configurations".into(),
        ));
    }

    let nice = decomposition.to_nice();
    let mut admitted = plain_admitted(network, scores);
    admitted[payer.0] = scores
        .payer_restricted(payer, network.degree(payer))
        .into_iter()
        .collect();
    admitted[payee.0] = scores
        .payee_restricted(payee, network.degree(payee))
        .into_iter()
        .collect();
    let mut extra = vec![payer, payee];
    extra.sort();
    let mut solver = Solver::new(network, &nice, admitted, extra.clone(), budget)?;
    let root = solver.run()?;

    let payer_pos = extra.binary_search(&payer).unwrap();
    let payee_pos = extra.binary_search(&payee).unwrap();
    let mut num = BigUint::zero();
    for (key, mult) in &root {
        assert_eq!(
            key.len(),
            1,
            "every configuration of one class agrees on reachability"
        );
        let (profile, reach) = &key[0];
        assert!(profile.is_empty());
        if reach[payer_pos] >> payee_pos & 1 == 1 {
            num += mult;
        }
    }
    Ok(big_ratio(num, denom))
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

fn plain_admitted(network: &CreditNetwork, scores: &ScoreSet) -> Vec<Vec<u64>> {
    network
        .vertices()
        .map(|v| scores.admitted_scores(v, network.degree(v)))
        .collect()
}

struct Solver<'a> {
    network: &'a CreditNetwork,
    nice: &'a NiceDecomposition,
    admitted: Vec<Vec<u64>>,
    /// Sorted endpoints kept in every reachability matrix; empty for pure
    /// counting, which skips reachability entirely.
    extra: Vec<VertexId>,
    track_reach: bool,
    budget: u64,
    used: u64,
}

impl<'a> Solver<'a> {
    fn new(
        network: &'a CreditNetwork,
        nice: &'a NiceDecomposition,
        admitted: Vec<Vec<u64>>,
        extra: Vec<VertexId>,
        budget: u64,
    ) -> Result<Self> {
        let track_reach = !extra.is_empty();
        for node in nice.nodes() {
            let t = if track_reach {
                tracked(&node.bag, &extra).len()
            } else {
                node.bag.len()
            };
            if t > MAX_TRACKED {
                return Err(Error::InvalidDecomposition(format!(
                    "bag of {} vertices exceeds the solver limit of {MAX_TRACKED}",
                    node.bag.len()
                )));
            }
        }
        Ok(Solver {
            network,
            nice,
            admitted,
            extra,
            track_reach,
            budget,
            used: 0,
        })
    }

    fn spend(&mut self, amount: u64) -> Result<()> {
        self.used = self.used.saturating_add(amount);
        if self.used > self.budget {
            return Err(Error::BudgetExceeded {
                what: "outcome-set operations",
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn run(&mut self) -> Result<Dp> {
        let nice = self.nice;
        let nodes = nice.nodes();
        let mut tables: Vec<Option<Dp>> = vec![None; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            let children: Vec<Dp> = node
                .children
                .iter()
                .map(|&c| tables[c].take().expect("children precede parents"))
                .collect();
            let table = match node.kind {
                StepKind::Leaf => self.leaf(),
                StepKind::Introduce(v) => {
                    self.introduce(&nodes[node.children[0]].bag, v, children)?
                }
                StepKind::Forget(v) => {
                    self.forget(&nodes[node.children[0]].bag, &node.bag, v, children)?
                }
                StepKind::Join => self.join(children)?,
            };
            tables[i] = Some(table);
        }
        Ok(tables[nice.root()].take().expect("root is processed"))
    }

    fn leaf(&self) -> Dp {
        let reach = if self.track_reach {
            identity(self.extra.len())
        } else {
            Vec::new()
        };
        let mut dp = Dp::new();
        dp.insert(vec![(Vec::new(), reach)], BigUint::from(1u32));
        dp
    }

    fn introduce(&mut self, child_bag: &[VertexId], v: VertexId, children: Vec<Dp>) -> Result<Dp> {
        let child = children.into_iter().next().expect("introduce has a child");
        let mut bag = child_bag.to_vec();
        let profile_pos = bag.binary_search(&v).unwrap_err();
        bag.insert(profile_pos, v);
        // Endpoints are tracked from the start; anything else gains a
        // fresh diagonal-only row.
        let reach_pos = if self.track_reach && !self.extra.contains(&v) {
            Some(
                tracked(child_bag, &self.extra)
                    .binary_search(&v)
                    .unwrap_err(),
            )
        } else {
            None
        };
        let mut dp = Dp::new();
        for (key, mult) in child {
            self.spend(key.len() as u64)?;
            let mut out: StateKey = key
                .into_iter()
                .map(|(mut profile, mut reach)| {
                    profile.insert(profile_pos, 0);
                    if let Some(pos) = reach_pos {
                        insert_tracked(&mut reach, pos);
                    }
                    (profile, reach)
                })
                .collect();
            out.sort();
            *dp.entry(out).or_default() += mult;
        }
        Ok(dp)
    }

    fn forget(
        &mut self,
        child_bag: &[VertexId],
        new_bag: &[VertexId],
        v: VertexId,
        children: Vec<Dp>,
    ) -> Result<Dp> {
        let child = children.into_iter().next().expect("forget has a child");
        let profile_pos = child_bag.binary_search(&v).unwrap();
        let child_tracked = tracked(child_bag, &self.extra);
        let reach_pos = child_tracked.binary_search(&v).ok();
        let drop_row = self.track_reach && !self.extra.contains(&v);

        // Every edge from v into the remaining bag is decided now; edges
        // to vertices removed earlier were decided at those removals.
        struct DecidedEdge {
            cap: u64,
            other_profile_pos: usize,
            other_reach_pos: usize,
        }
        let mut decided: Vec<DecidedEdge> = Vec::new();
        for &(edge_id, other) in self.network.incident(v) {
            if let Ok(other_profile_pos) = new_bag.binary_search(&other) {
                decided.push(DecidedEdge {
                    cap: self.network.edge(edge_id).capacity,
                    other_profile_pos,
                    other_reach_pos: if self.track_reach {
                        child_tracked.binary_search(&other).unwrap()
                    } else {
                        0
                    },
                });
            }
        }
        let caps: Vec<u64> = decided.iter().map(|e| e.cap).collect();
        let admitted_v = self.admitted[v.0].clone();

        let mut dp = Dp::new();
        for (key, mult) in child {
            for &score in &admitted_v {
                let mut outcomes: BTreeSet<Element> = BTreeSet::new();
                for (profile, reach) in &key {
                    let granted = profile[profile_pos];
                    if score < granted {
                        continue;
                    }
                    let splits = compositions(&caps, score - granted);
                    self.spend(splits.len().max(1) as u64)?;
                    for split in splits {
                        let mut out_profile = profile.clone();
                        out_profile.remove(profile_pos);
                        let mut out_reach = reach.clone();
                        for (edge, &toward_v_side) in decided.iter().zip(&split) {
                            // toward_v_side is the residual v keeps; the
                            // rest is granted to the other endpoint.
                            out_profile[edge.other_profile_pos] += edge.cap - toward_v_side;
                            if self.track_reach {
                                let j = reach_pos.expect("v is tracked in the child");
                                let o = edge.other_reach_pos;
                                if toward_v_side >= 1 {
                                    out_reach[j] |= 1 << o;
                                }
                                if edge.cap - toward_v_side >= 1 {
                                    out_reach[o] |= 1 << j;
                                }
                            }
                        }
                        if self.track_reach {
                            close(&mut out_reach);
                            if drop_row {
                                remove_tracked(&mut out_reach, reach_pos.unwrap());
                            }
                        }
                        outcomes.insert((out_profile, out_reach));
                    }
                }
                if outcomes.is_empty() {
                    continue;
                }
                let out: StateKey = outcomes.into_iter().collect();
                *dp.entry(out).or_default() += mult.clone();
            }
        }
        Ok(dp)
    }

    fn join(&mut self, children: Vec<Dp>) -> Result<Dp> {
        let mut iter = children.into_iter();
        let left = iter.next().expect("join has two children");
        let right = iter.next().expect("join has two children");
        let mut dp = Dp::new();
        for (key_l, mult_l) in &left {
            for (key_r, mult_r) in &right {
                self.spend((key_l.len() * key_r.len()) as u64)?;
                let mut outcomes: BTreeSet<Element> = BTreeSet::new();
                for (profile_l, reach_l) in key_l {
                    for (profile_r, reach_r) in key_r {
                        let profile = profile_l
                            .iter()
                            .zip(profile_r)
                            .map(|(a, b)| a + b)
                            .collect();
                        let mut reach = reach_l.clone();
                        if self.track_reach {
                            for (row, other_row) in reach.iter_mut().zip(reach_r) {
                                *row |= *other_row;
                            }
                            close(&mut reach);
                        }
                        outcomes.insert((profile, reach));
                    }
                }
                let out: StateKey = outcomes.into_iter().collect();
                *dp.entry(out).or_default() += mult_l * mult_r;
            }
        }
        Ok(dp)
    }
}

fn tracked(bag: &[VertexId], extra: &[VertexId]) -> Vec<VertexId> {
    let mut t: Vec<VertexId> = bag.to_vec();
    for &v in extra {
        if let Err(pos) = t.binary_search(&v) {
            t.insert(pos, v);
        }
    }
    t
}

fn identity(n: usize) -> Reach {
    (0..n).map(|i| 1u32 << i).collect()
}

/// Inserts a fresh tracked vertex at `pos`: a zero column in every row and
/// a diagonal-only row.
fn insert_tracked(reach: &mut Reach, pos: usize) {
    let low_mask = (1u32 << pos) - 1;
    for row in reach.iter_mut() {
        let low = *row & low_mask;
        let high = *row & !low_mask;
        *row = low | (high << 1);
    }
    reach.insert(pos, 1 << pos);
}

/// Removes the tracked vertex at `pos` from all rows and columns.
fn remove_tracked(reach: &mut Reach, pos: usize) {
    reach.remove(pos);
    let low_mask = (1u32 << pos) - 1;
    for row in reach.iter_mut() {
        let low = *row & low_mask;
        let high = (*row >> 1) & !low_mask;
        *row = low | high;
    }
}

/// Transitive closure of the row bitmasks.
fn close(reach: &mut Reach) {
    let n = reach.len();
    for k in 0..n {
        let row_k = reach[k];
        for i in 0..n {
            if reach[i] >> k & 1 == 1 {
                reach[i] |= row_k;
            }
        }
    }
}

/// All ways to write `total` as an ordered sum bounded by `caps`.
fn compositions(caps: &[u64], total: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; caps.len()];
    let suffix_caps: Vec<u64> = {
        let mut s = vec![0u64; caps.len() + 1];
        for i in (0..caps.len()).rev() {
            s[i] = s[i + 1] + caps[i];
        }
        s
    };
    fn rec(
        caps: &[u64],
        suffix_caps: &[u64],
        pos: usize,
        left: u64,
        current: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if pos == caps.len() {
            if left == 0 {
                out.push(current.clone());
            }
            return;
        }
        if left > suffix_caps[pos] {
            return;
        }
        let hi = caps[pos].min(left);
        for a in 0..=hi {
            current[pos] = a;
            rec(caps, suffix_caps, pos + 1, left - a, current, out);
        }
        current[pos] = 0;
    }
    rec(caps, &suffix_caps, 0, total, &mut current, &mut out);
    out
}
