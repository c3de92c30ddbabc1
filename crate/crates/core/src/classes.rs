//! Exhaustive enumeration of payment state spaces, plus two independent
//! brute-force oracles (full configuration scans and forest counts) used to
//! validate every faster counting path in the crate.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::network::{Configuration, CreditNetwork, ScoreVector, Transaction, VertexId};
use crate::predicate::{ConstrainedNetwork, TransactionOutcome};

/// Default ceiling on the number of classes an enumeration may discover.
pub const DEFAULT_CLASS_BUDGET: u64 = 10_000_000;

/// Default ceiling on the number of edge subsets a forest scan may visit.
pub const DEFAULT_SUBSET_BUDGET: u64 = 1 << 24;

/// The reachable state space of a constrained network under unit payments
/// between a fixed set of transacting pairs.
///
/// Classes are indexed in lexicographic score-vector order. For each class
/// and each ordered transacting pair the table stores the successor class,
/// or `None` when the payment is blocked (no route, or predicate violation).
#[derive(Debug, Clone)]
pub struct ClassSpace {
    constrained: ConstrainedNetwork,
    classes: Vec<ScoreVector>,
    witnesses: Vec<Configuration>,
    ordered_pairs: Vec<(VertexId, VertexId)>,
    transitions: Vec<Vec<Option<usize>>>,
    start_class: usize,
}

impl ClassSpace {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[ScoreVector] {
        &self.classes
    }

    pub fn class_index(&self, s: &ScoreVector) -> Option<usize> {
        self.classes.binary_search(s).ok()
    }

    pub fn start_class(&self) -> usize {
        self.start_class
    }

    /// A configuration realizing class `i`.
    pub fn witness(&self, i: usize) -> &Configuration {
        &self.witnesses[i]
    }

    /// The ordered transacting pairs, sorted, both directions of every
    /// unordered input pair.
    pub fn ordered_pairs(&self) -> &[(VertexId, VertexId)] {
        &self.ordered_pairs
    }

    /// Successor of class `i` under ordered pair `p`, `None` when blocked.
    pub fn transition(&self, i: usize, p: usize) -> Option<usize> {
        self.transitions[i][p]
    }

    pub fn constrained(&self) -> &ConstrainedNetwork {
        &self.constrained
    }

    /// Whether a unit payment from `x` to `y` succeeds in class `i`: a
    /// residual route must exist and the successor scores must satisfy the
    /// predicate. The pair need not be one of the transacting pairs.
    pub fn payment_succeeds(&self, i: usize, x: VertexId, y: VertexId) -> Result<bool> {
        let net = self.constrained.network();
        net.check_vertex(x)?;
        net.check_vertex(y)?;
        if x == y {
            return Err(Error::InvalidParams("payer equals payee".into()));
        }
        let witness = &self.witnesses[i];
        if witness.find_route(&Transaction::unit(x, y)).is_none() {
            return Ok(false);
        }
        let successor = self.classes[i].after_payment(x, y, 1);
        Ok(self.constrained.predicate().evaluate(&successor))
    }

    /// Fraction of classes in which a unit payment from `x` to `y` succeeds,
    /// as an exact rational.
    pub fn exact_liquidity(&self, x: VertexId, y: VertexId) -> Result<BigRational> {
        let mut good = 0u64;
        for i in 0..self.classes.len() {
            if self.payment_succeeds(i, x, y)? {
                good += 1;
            }
        }
        Ok(BigRational::new(
            BigUint::from(good).into(),
            BigUint::from(self.classes.len() as u64).into(),
        ))
    }

    /// CSV export: one row per class with its scores and the successor of
    /// every ordered transacting pair (`blocked` when the payment fails).
    pub fn to_csv(&self) -> String {
        let net = self.constrained.network();
        let mut header = vec!["class".to_string(), "start".to_string()];
        header.extend(net.labels().iter().map(|l| format!("S_{l}")));
        header.extend(
            self.ordered_pairs
                .iter()
                .map(|&(x, y)| format!("{}->{}", net.label(x), net.label(y))),
        );
        let mut out = header.join(",");
        out.push('\n');
        for (i, class) in self.classes.iter().enumerate() {
            let mut row = vec![i.to_string(), (i == self.start_class).to_string()];
            row.extend(class.scores().iter().map(|s| s.to_string()));
            row.extend(self.transitions[i].iter().map(|t| match t {
                Some(j) => j.to_string(),
                None => "blocked".to_string(),
            }));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Breadth-first closure of the start configuration under unit payments
/// between `pairs` (both directions of each). `budget` caps the number of
/// classes discovered.
pub fn enumerate_reachable(
    constrained: &ConstrainedNetwork,
    pairs: &[(VertexId, VertexId)],
    budget: u64,
) -> Result<ClassSpace> {
    let net = constrained.network();
    let mut ordered_pairs = Vec::with_capacity(pairs.len() * 2);
    for &(x, y) in pairs {
        net.check_vertex(x)?;
        net.check_vertex(y)?;
        if x == y {
            return Err(Error::InvalidParams("transacting pair with equal endpoints".into()));
        }
        ordered_pairs.push((x, y));
        ordered_pairs.push((y, x));
    }
    ordered_pairs.sort();
    ordered_pairs.dedup();

    let start = constrained.start().clone();
    let start_score = start.score_vector();
    let mut index: HashMap<ScoreVector, usize> = HashMap::new();
    let mut discovered: Vec<ScoreVector> = Vec::new();
    let mut witnesses: Vec<Configuration> = Vec::new();
    index.insert(start_score.clone(), 0);
    discovered.push(start_score);
    witnesses.push(start);

    let mut transitions: Vec<Vec<Option<usize>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut row = Vec::with_capacity(ordered_pairs.len());
        for &(x, y) in &ordered_pairs {
            let t = Transaction::unit(x, y);
            let witness = witnesses[i].clone();
            let outcome = constrained.attempt_transaction(&witness, &t)?;
            match outcome {
                TransactionOutcome::Applied(next) => {
                    let score = next.score_vector();
                    let j = match index.get(&score) {
                        Some(&j) => j,
                        None => {
                            let j = discovered.len();
                            if discovered.len() as u64 >= budget {
                                return Err(Error::BudgetExceeded {
                                    what: "class enumeration",
                                    budget,
                                });
                            }
                            index.insert(score.clone(), j);
                            discovered.push(score);
                            witnesses.push(next);
                            queue.push_back(j);
                            j
                        }
                    };
                    row.push(Some(j));
                }
                TransactionOutcome::NoRoute | TransactionOutcome::PredicateViolation => {
                    row.push(None);
                }
            }
        }
        transitions.push(row);
    }

    // Renumber classes into lexicographic score order.
    let mut order: Vec<usize> = (0..discovered.len()).collect();
    order.sort_by(|&a, &b| discovered[a].cmp(&discovered[b]));
    let mut rank = vec![0usize; order.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let classes: Vec<ScoreVector> = order.iter().map(|&o| discovered[o].clone()).collect();
    let witnesses: Vec<Configuration> = order.iter().map(|&o| witnesses[o].clone()).collect();
    let transitions: Vec<Vec<Option<usize>>> = order
        .iter()
        .map(|&o| transitions[o].iter().map(|t| t.map(|j| rank[j])).collect())
        .collect();

    Ok(ClassSpace {
        constrained: constrained.clone(),
        classes,
        witnesses,
        ordered_pairs,
        transitions,
        start_class: rank[0],
    })
}

/// Scans every residual split of every edge and tallies configurations per
/// score vector. The product of `(capacity + 1)` over all edges must stay
/// within `budget`.
pub fn enumerate_all_configurations(
    network: &CreditNetwork,
    budget: u64,
) -> Result<BTreeMap<ScoreVector, BigUint>> {
    let mut combinations = 1u64;
    for e in network.edges() {
        combinations = combinations
            .checked_mul(e.capacity + 1)
            .filter(|&c| c <= budget)
            .ok_or(Error::BudgetExceeded {
                what: "configuration scan",
                budget,
            })?;
    }
    let m = network.edge_count();
    let mut tally: BTreeMap<ScoreVector, BigUint> = BTreeMap::new();
    let mut toward_hi = vec![0u64; m];
    loop {
        let mut scores = vec![0u64; network.vertex_count()];
        for (id, e) in network.edges().iter().enumerate() {
            scores[e.lo.0] += toward_hi[id];
            scores[e.hi.0] += e.capacity - toward_hi[id];
        }
        *tally.entry(ScoreVector::new(scores)).or_insert_with(BigUint::zero) += 1u32;

        // Odometer step over the per-edge splits.
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(tally);
            }
            if toward_hi[pos] < network.edge(pos).capacity {
                toward_hi[pos] += 1;
                break;
            }
            toward_hi[pos] = 0;
            pos += 1;
        }
    }
}

/// Forest counts of the multigraph expansion of a network: each capacity-`c`
/// edge becomes `c` parallel unit edges, and every acyclic subset of the
/// expanded edge set is counted.
///
/// `total` is the number of such forests; `joining(x, y)` counts the forests
/// in which `x` and `y` are connected. The total coincides with the number
/// of distinct score vectors of the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestCount {
    vertex_count: usize,
    pub total: BigUint,
    /// Upper-triangular pair counts, indexed via `pair_index`.
    joining: Vec<BigUint>,
}

impl ForestCount {
    fn pair_slot(&self, x: VertexId, y: VertexId) -> Result<Option<usize>> {
        if x.0 >= self.vertex_count {
            return Err(Error::UnknownVertex(x.0));
        }
        if y.0 >= self.vertex_count {
            return Err(Error::UnknownVertex(y.0));
        }
        if x == y {
            return Ok(None);
        }
        let (a, b) = if x.0 < y.0 { (x.0, y.0) } else { (y.0, x.0) };
        // Row-major position in the strict upper triangle.
        Ok(Some(a * self.vertex_count - a * (a + 1) / 2 + (b - a - 1)))
    }

    /// Number of forests connecting `x` and `y` (the total when `x == y`).
    pub fn joining(&self, x: VertexId, y: VertexId) -> Result<BigUint> {
        match self.pair_slot(x, y)? {
            Some(i) => Ok(self.joining[i].clone()),
            None => Ok(self.total.clone()),
        }
    }
}

/// Brute-force forest scan of the multigraph expansion. The number of edge
/// subsets, `2^(sum of capacities)`, must stay within `budget`.
pub fn count_forests(network: &CreditNetwork, budget: u64) -> Result<ForestCount> {
    let mut unit_edges: Vec<(usize, usize)> = Vec::new();
    for e in network.edges() {
        for _ in 0..e.capacity {
            unit_edges.push((e.lo.0, e.hi.0));
        }
    }
    let m = unit_edges.len();
    if m >= 63 || 1u64 << m > budget {
        return Err(Error::BudgetExceeded {
            what: "forest scan",
            budget,
        });
    }
    let n = network.vertex_count();
    let pair_count = n * (n - 1) / 2;
    let mut total = 0u64;
    let mut joining = vec![0u64; pair_count];
    let mut parent = vec![0usize; n];

    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    'subset: for mask in 0u64..(1u64 << m) {
        for (v, p) in parent.iter_mut().enumerate() {
            *p = v;
        }
        for (i, &(u, v)) in unit_edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                continue 'subset;
            }
            parent[ru] = rv;
        }
        total += 1;
        let mut slot = 0;
        for a in 0..n {
            let ra = find(&mut parent, a);
            for b in a + 1..n {
                if ra == find(&mut parent, b) {
                    joining[slot] += 1;
                }
                slot += 1;
            }
        }
    }

    Ok(ForestCount {
        vertex_count: n,
        total: total.into(),
        joining: joining.into_iter().map(BigUint::from).collect(),
    })
}

/// All unordered vertex pairs of a network, the default transacting set.
pub fn all_pairs(network: &CreditNetwork) -> Vec<(VertexId, VertexId)> {
    let n = network.vertex_count();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((VertexId(a), VertexId(b)));
        }
    }
    pairs
}

/// Ratio helper for class counts.
pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigUint::from(num).into(), BigUint::from(den).into())
}
