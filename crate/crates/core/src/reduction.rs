//! Edge expansion, the reduction from well-connected networks to stars,
//! and a before/after experiment for credit modifications.
//!
//! The reduction trades a network whose every vertex keeps its score
//! inside a window around half its degree for a star: each vertex becomes
//! a leaf whose edge capacity is the window's width in steps, and the
//! center's score is pinned (by conservation, not by a predicate) to half
//! the total leaf capacity. Leaf scores translate back to original scores
//! by a per-vertex offset. When the window radii stay below the floor of
//! the network's edge expansion, the windowed score vectors of the
//! original network and the balanced star slice match one to one, so all
//! pair liquidities carry over exactly and the star's closed forms apply.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::classes::{enumerate_all_configurations, ratio};
use crate::dp::star::{star_class_counts, star_liquidity};
use crate::dp::ScoreSet;
use crate::error::{Error, Result};
use crate::network::{Configuration, CreditNetwork, Route, ScoreVector, Transaction, VertexId};
use crate::predicate::{ConstrainedNetwork, TransactionOutcome};

/// Minimum over nonempty vertex sets `S` with `2|S| <= n` of the ratio
/// between the capacity leaving `S` and `|S|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionReport {
    pub h: BigRational,
    /// The minimizing set, lexicographically smallest among minimizers.
    pub witness: Vec<VertexId>,
}

impl ExpansionReport {
    /// Floor of the expansion as an integer.
    pub fn floor(&self) -> u64 {
        self.h.floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

/// Exhaustive edge expansion over all small vertex sets.
pub fn edge_expansion(network: &CreditNetwork, budget: u64) -> Result<ExpansionReport> {
    let n = network.vertex_count();
    if n < 2 {
        return Err(Error::InvalidParams(
            "edge expansion needs at least two vertices".into(),
        ));
    }
    if n >= 63 || (1u64 << n) > budget {
        return Err(Error::BudgetExceeded {
            what: "vertex subsets",
            budget,
        });
    }
    let mut best: Option<(BigRational, Vec<VertexId>)> = None;
    for mask in 1u64..(1 << n) {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let mut boundary = 0u64;
        for edge in network.edges() {
            if (mask >> edge.lo.0 & 1) != (mask >> edge.hi.0 & 1) {
                boundary += edge.capacity;
            }
        }
        let h = ratio(boundary, size as u64);
        let replace = match &best {
            None => true,
            Some((best_h, best_witness)) => {
                h < *best_h || (h == *best_h && {
                    let witness: Vec<VertexId> =
                        (0..n).filter(|i| mask >> i & 1 == 1).map(VertexId).collect();
                    witness < *best_witness
                })
            }
        };
        if replace {
            let witness = (0..n).filter(|i| mask >> i & 1 == 1).map(VertexId).collect();
            best = Some((h, witness));
        }
    }
    let (h, witness) = best.expect("at least one singleton set exists");
    Ok(ExpansionReport { h, witness })
}

/// Liquidity interval guaranteed for any leaf pair of a star produced by
/// the reduction when the expansion floor is `h_floor`:
/// `[1 - 2/h_floor, 1 - 1/(h_floor + 1)]`.
pub fn expansion_liquidity_interval(h_floor: u64) -> Result<(BigRational, BigRational)> {
    if h_floor == 0 {
        return Err(Error::InvalidParams(
            "liquidity interval needs an expansion floor of at least one".into(),
        ));
    }
    let one = BigRational::one();
    let lo = &one - BigRational::new(BigInt::from(2), BigInt::from(h_floor));
    let hi = &one - BigRational::new(BigInt::from(1), BigInt::from(h_floor + 1));
    Ok((lo, hi))
}

/// Result of compiling a windowed network into a star.
#[derive(Debug, Clone)]
pub struct ReductionSpec {
    /// Star network: original vertices as leaves (labels kept), one fresh
    /// center appended last.
    pub star: Arc<CreditNetwork>,
    pub center: VertexId,
    /// The center score of the slice corresponding to the windows; every
    /// payment between leaves preserves it.
    pub center_score: u64,
    /// Normalized per-vertex radii; also the star's leaf capacities.
    pub radii: Vec<u64>,
    /// Admitted score window per original vertex.
    pub windows: Vec<(u64, u64)>,
    /// Per-vertex offset: original score = star leaf score + offset.
    pub offsets: Vec<u64>,
    /// Edge expansion of the original network.
    pub h: BigRational,
}

impl ReductionSpec {
    /// The windows as a score set over the original network's vertices.
    pub fn windows_score_set(&self) -> ScoreSet {
        let mut s = ScoreSet::unconstrained(self.windows.len());
        for (v, &(lo, hi)) in self.windows.iter().enumerate() {
            s.interval(VertexId(v), lo, hi);
        }
        s
    }

    /// A configuration of the star within the reduced slice.
    pub fn star_start(&self) -> Configuration {
        let mut remaining = self.center_score;
        let mut residuals = Vec::with_capacity(self.radii.len());
        for &cap in &self.radii {
            let toward_leaf = cap.min(remaining);
            remaining -= toward_leaf;
            residuals.push((cap - toward_leaf, toward_leaf));
        }
        debug_assert_eq!(remaining, 0);
        Configuration::new(Arc::clone(&self.star), residuals)
            .expect("residuals split the star capacities")
    }

    /// Exact liquidity of an ordered pair of original vertices, via the
    /// star's closed form.
    pub fn pair_liquidity(&self, payer: VertexId, payee: VertexId) -> Result<BigRational> {
        star_liquidity(&self.radii, self.center_score, payer.0, payee.0)
    }

    /// Number of classes in the reduced slice.
    pub fn class_count(&self) -> num_bigint::BigUint {
        star_class_counts(&self.radii)[self.center_score as usize].clone()
    }
}

/// Compiles a network with per-vertex score radii into a star.
///
/// Radius `r` at vertex `v` means `v`'s score may wander `r/2` steps each
/// way around half its degree. Radii above the floor of the edge
/// expansion are rejected; a radius whose parity differs from the
/// degree's is rounded down one step so the window has integer ends.
pub fn expander_to_star(
    network: &CreditNetwork,
    radii: &[u64],
    budget: u64,
) -> Result<ReductionSpec> {
    let n = network.vertex_count();
    if radii.len() != n {
        return Err(Error::InvalidParams(format!(
            "{} radii for {} vertices",
            radii.len(),
            n
        )));
    }
    let expansion = edge_expansion(network, budget)?;
    let h_floor = expansion.floor();
    let mut normalized = Vec::with_capacity(n);
    for (v, &r) in radii.iter().enumerate() {
        if r > h_floor {
            return Err(Error::ExpansionViolated {
                vertex: v,
                r,
                h_floor,
            });
        }
        let degree = network.degree(VertexId(v));
        let r = if r % 2 == degree % 2 {
            r
        } else if r == 0 {
            return Err(Error::EmptyWindow { vertex: v, degree });
        } else {
            r - 1
        };
        normalized.push(r);
    }
    let total: u64 = normalized.iter().sum();
    if total % 2 != 0 {
        return Err(Error::OddTotal);
    }

    let mut windows = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for (v, &r) in normalized.iter().enumerate() {
        let degree = network.degree(VertexId(v));
        let lo = (degree - r) / 2;
        windows.push((lo, lo + r));
        offsets.push(lo);
    }

    let mut labels: Vec<String> = network.labels().to_vec();
    let mut center_label = String::from("center");
    let mut suffix = 0;
    while labels.contains(&center_label) {
        suffix += 1;
        center_label = format!("center_{suffix}");
    }
    labels.push(center_label);
    let star_edges: Vec<(usize, usize, u64)> = normalized
        .iter()
        .enumerate()
        .map(|(v, &r)| (v, n, r))
        .collect();
    let star = Arc::new(CreditNetwork::new(labels, &star_edges)?);

    Ok(ReductionSpec {
        star,
        center: VertexId(n),
        center_score: total / 2,
        radii: normalized,
        windows,
        offsets,
        h: expansion.h,
    })
}

/// Builds a configuration with the given score vector by repeatedly
/// routing surplus toward deficit.
///
/// Starting from the even split, any vertex above its target can always
/// reach one below it: following nonempty residuals from the surplus
/// vertex encloses a set whose scores sum to exactly its internal
/// capacity, while realizable targets never sum below that, so the set
/// contains a deficit vertex. Each payment shrinks the total absolute
/// deviation, so the loop terminates; if the targets are not realizable
/// the reachable set runs out of deficit vertices instead.
pub fn realize_scores(
    network: &Arc<CreditNetwork>,
    target: &ScoreVector,
) -> Result<Configuration> {
    let n = network.vertex_count();
    if target.len() != n {
        return Err(Error::InvalidParams(format!(
            "target has {} scores for {} vertices",
            target.len(),
            n
        )));
    }
    let total: u64 = target.scores().iter().sum();
    if total != network.total_capacity() {
        return Err(Error::UnrealizableScores);
    }
    let mut config = Configuration::even_split(Arc::clone(network));
    loop {
        let scores = config.score_vector();
        let surplus = match network
            .vertices()
            .find(|&v| scores.get(v) > target.get(v))
        {
            Some(v) => v,
            None => return Ok(config),
        };

        // Breadth-first search along nonempty residuals, recording hops.
        let mut parent: Vec<Option<(usize, VertexId)>> = vec![None; n];
        let mut queue = std::collections::VecDeque::from([surplus]);
        let mut seen = vec![false; n];
        seen[surplus.0] = true;
        let mut found = None;
        'search: while let Some(x) = queue.pop_front() {
            for &(edge_id, y) in network.incident(x) {
                if seen[y.0] || config.residual(edge_id, x) == 0 {
                    continue;
                }
                seen[y.0] = true;
                parent[y.0] = Some((edge_id, x));
                if scores.get(y) < target.get(y) {
                    found = Some(y);
                    break 'search;
                }
                queue.push_back(y);
            }
        }
        let deficit = found.ok_or(Error::UnrealizableScores)?;

        let mut vertices = vec![deficit];
        let mut edges = Vec::new();
        let mut cursor = deficit;
        while let Some((edge_id, prev)) = parent[cursor.0] {
            edges.push(edge_id);
            vertices.push(prev);
            cursor = prev;
        }
        vertices.reverse();
        edges.reverse();
        let bottleneck = vertices
            .iter()
            .zip(&edges)
            .map(|(&from, &edge_id)| config.residual(edge_id, from))
            .min()
            .expect("route has at least one hop");
        let amount = (scores.get(surplus) - target.get(surplus))
            .min(target.get(deficit) - scores.get(deficit))
            .min(bottleneck);
        let route = Route { vertices, edges };
        config = config.apply_payment(&route, amount)?;
    }
}

/// Exact liquidity of a pair over every admitted class of the network,
/// by full enumeration with one realized witness per class.
pub fn scan_liquidity(
    network: &Arc<CreditNetwork>,
    scores: &ScoreSet,
    payer: VertexId,
    payee: VertexId,
    budget: u64,
) -> Result<Option<BigRational>> {
    let predicate = scores.to_predicate(network)?;
    let all = enumerate_all_configurations(network, budget)?;
    let mut admitted = 0u64;
    let mut applied = 0u64;
    for sv in all.keys() {
        if !network.vertices().all(|v| scores.admits(v, sv.get(v))) {
            continue;
        }
        admitted += 1;
        let witness = realize_scores(network, sv)?;
        let constrained =
            ConstrainedNetwork::new(Arc::clone(network), predicate.clone(), witness.clone())?;
        let outcome =
            constrained.attempt_transaction(&witness, &Transaction::unit(payer, payee))?;
        if matches!(outcome, TransactionOutcome::Applied(_)) {
            applied += 1;
        }
    }
    Ok((admitted > 0).then(|| ratio(applied, admitted)))
}

/// Outcome of checking a reduction against the original network.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// Admitted classes on the original network (and, when the sets
    /// match, in the reduced slice).
    pub class_count: u64,
    /// Whether the translated star slice equals the windowed score
    /// vectors of the original network.
    pub score_sets_match: bool,
    /// Ordered pairs whose exact liquidity differs between the sides.
    pub mismatched_pairs: Vec<(VertexId, VertexId)>,
}

impl ReductionReport {
    pub fn all_match(&self) -> bool {
        self.score_sets_match && self.mismatched_pairs.is_empty()
    }
}

/// Verifies a reduction exhaustively: translated score-vector sets must
/// coincide and every ordered pair's exact liquidity must agree between
/// the windowed network and the star's closed form.
pub fn verify_reduction(
    network: &Arc<CreditNetwork>,
    spec: &ReductionSpec,
    budget: u64,
) -> Result<ReductionReport> {
    let n = network.vertex_count();
    let windows = spec.windows_score_set();

    let mut original: BTreeSet<Vec<u64>> = BTreeSet::new();
    for sv in enumerate_all_configurations(network, budget)?.keys() {
        if network.vertices().all(|v| windows.admits(v, sv.get(v))) {
            original.insert(sv.scores().to_vec());
        }
    }

    let mut translated: BTreeSet<Vec<u64>> = BTreeSet::new();
    for sv in enumerate_all_configurations(&spec.star, budget)?.keys() {
        if sv.get(spec.center) != spec.center_score {
            continue;
        }
        let scores: Vec<u64> = (0..n)
            .map(|v| sv.get(VertexId(v)) + spec.offsets[v])
            .collect();
        translated.insert(scores);
    }

    let score_sets_match = original == translated;
    let mut mismatched_pairs = Vec::new();
    for payer in network.vertices() {
        for payee in network.vertices() {
            if payer == payee {
                continue;
            }
            let on_network = scan_liquidity(network, &windows, payer, payee, budget)?;
            let on_star = spec.pair_liquidity(payer, payee)?;
            if on_network != Some(on_star) {
                mismatched_pairs.push((payer, payee));
            }
        }
    }
    Ok(ReductionReport {
        class_count: original.len() as u64,
        score_sets_match,
        mismatched_pairs,
    })
}

/// A credit modification whose effect on liquidity is measured.
#[derive(Debug, Clone)]
pub enum Modification {
    /// Add one edge of the given capacity.
    AddEdge {
        endpoints: (VertexId, VertexId),
        capacity: u64,
    },
    /// Replace the whole network by its reduced star, using the given
    /// per-vertex radii.
    ReplaceWithStar { radii: Vec<u64> },
}

/// One ordered pair's before/after comparison.
#[derive(Debug, Clone)]
pub struct MonotonicityRow {
    pub payer: VertexId,
    pub payee: VertexId,
    pub before: BigRational,
    pub after: BigRational,
    /// after / before; absent when the pair had no liquidity before.
    pub ratio: Option<BigRational>,
    pub decreased: bool,
    /// Whether the post-modification liquidity falls below the floor a
    /// hub-and-spoke layout with these endpoint capacities guarantees,
    /// `1 - min(1, 4 / (c_payer + c_payee))`.
    pub below_star_floor: bool,
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub modification: String,
    /// Edge expansion of the base network.
    pub h: BigRational,
    pub rows: Vec<MonotonicityRow>,
}

impl MonotonicityReport {
    pub fn any_decreased(&self) -> bool {
        self.rows.iter().any(|r| r.decreased)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# modification: {}", self.modification);
        let _ = writeln!(out, "# base edge expansion h = {}", self.h);
        let _ = writeln!(
            out,
            "payer,payee,before,after,ratio,decreased,below_star_floor"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.payer.0,
                row.payee.0,
                row.before,
                row.after,
                row.ratio
                    .as_ref()
                    .map_or_else(|| "undefined".to_string(), |r| r.to_string()),
                row.decreased,
                row.below_star_floor
            );
        }
        out
    }
}

fn star_floor(cap_payer: u64, cap_payee: u64) -> BigRational {
    let one = BigRational::one();
    let spread = cap_payer + cap_payee;
    if spread <= 4 {
        BigRational::zero()
    } else {
        &one - BigRational::new(BigInt::from(4), BigInt::from(spread))
    }
}

/// Measures every ordered pair's exact liquidity before and after a
/// modification of the network. `scores` constrains both sides of an
/// edge addition; a star replacement defines its own windows and
/// requires an unconstrained starting point.
pub fn monotonicity_experiment(
    network: &Arc<CreditNetwork>,
    scores: &ScoreSet,
    modification: &Modification,
    budget: u64,
) -> Result<MonotonicityReport> {
    let n = network.vertex_count();
    if scores.vertex_count() != n {
        return Err(Error::InvalidParams(format!(
            "{} score sets for {} vertices",
            scores.vertex_count(),
            n
        )));
    }
    let h = edge_expansion(network, budget)?.h;
    let mut rows = Vec::new();

    match modification {
        Modification::AddEdge {
            endpoints: (u, v),
            capacity,
        } => {
            network.check_vertex(*u)?;
            network.check_vertex(*v)?;
            let mut edges: Vec<(usize, usize, u64)> = network
                .edges()
                .iter()
                .map(|e| (e.lo.0, e.hi.0, e.capacity))
                .collect();
            edges.push((u.0, v.0, *capacity));
            let modified =
                Arc::new(CreditNetwork::new(network.labels().to_vec(), &edges)?);
            for payer in network.vertices() {
                for payee in network.vertices() {
                    if payer == payee {
                        continue;
                    }
                    let before = scan_liquidity(network, scores, payer, payee, budget)?
                        .ok_or(Error::UnrealizableScores)?;
                    let after = scan_liquidity(&modified, scores, payer, payee, budget)?
                        .ok_or(Error::UnrealizableScores)?;
                    rows.push(build_row(
                        payer,
                        payee,
                        before,
                        after,
                        network.degree(payer),
                        network.degree(payee),
                    ));
                }
            }
            Ok(MonotonicityReport {
                modification: format!(
                    "add edge {}-{} capacity {}",
                    network.label(*u),
                    network.label(*v),
                    capacity
                ),
                h,
                rows,
            })
        }
        Modification::ReplaceWithStar { radii } => {
            if (0..n).any(|v| scores.is_constrained(VertexId(v))) {
                return Err(Error::InvalidParams(
                    "star replacement defines its own score windows; start from an \
                     unconstrained network"
                        .into(),
                ));
            }
            let spec = expander_to_star(network, radii, budget)?;
            let windows = spec.windows_score_set();
            for payer in network.vertices() {
                for payee in network.vertices() {
                    if payer == payee {
                        continue;
                    }
                    let before = scan_liquidity(network, &windows, payer, payee, budget)?
                        .ok_or(Error::UnrealizableScores)?;
                    let after = spec.pair_liquidity(payer, payee)?;
                    rows.push(build_row(
                        payer,
                        payee,
                        before,
                        after,
                        spec.radii[payer.0],
                        spec.radii[payee.0],
                    ));
                }
            }
            Ok(MonotonicityReport {
                modification: format!(
                    "replace with star, center score {}",
                    spec.center_score
                ),
                h,
                rows,
            })
        }
    }
}

fn build_row(
    payer: VertexId,
    payee: VertexId,
    before: BigRational,
    after: BigRational,
    cap_payer: u64,
    cap_payee: u64,
) -> MonotonicityRow {
    let ratio = (!before.is_zero()).then(|| &after / &before);
    let decreased = after < before;
    let below_star_floor = after < star_floor(cap_payer, cap_payee);
    MonotonicityRow {
        payer,
        payee,
        before,
        after,
        ratio,
        decreased,
        below_star_floor,
    }
}
