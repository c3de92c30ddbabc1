//! Tree decompositions: validation of user-supplied bags, a min-degree
//! construction heuristic, and conversion to the nice form consumed by the
//! counting pass in [`crate::dp::treewidth`].
//!
//! A decomposition assigns a bag of vertices to each node of a tree so
//! that every vertex appears somewhere, every network edge has both
//! endpoints together in some bag, and the nodes containing any given
//! vertex form a connected subtree.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::network::{CreditNetwork, VertexId};

#[derive(Debug, Clone)]
pub struct TreeDecomposition {
    bags: Vec<Vec<VertexId>>,
    links: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Validates bags and links against the network. Bags are sorted and
    /// deduplicated; links must form a tree over the bag indices.
    pub fn new(
        network: &CreditNetwork,
        bags: Vec<Vec<VertexId>>,
        links: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let bags: Vec<Vec<VertexId>> = bags
            .into_iter()
            .map(|bag| {
                let set: BTreeSet<VertexId> = bag.into_iter().collect();
                set.into_iter().collect()
            })
            .collect();
        validate_parts(network, &bags, &links)?;
        Ok(TreeDecomposition { bags, links })
    }

    /// Re-checks this decomposition against a network; needed when the
    /// two arrive separately.
    pub fn validate(&self, network: &CreditNetwork) -> Result<()> {
        validate_parts(network, &self.bags, &self.links)
    }

    /// Builds a decomposition by repeatedly eliminating a vertex of
    /// minimum degree (smallest index on ties) and turning its remaining
    /// neighborhood into a clique.
    pub fn min_degree(network: &CreditNetwork) -> TreeDecomposition {
        let n = network.vertex_count();
        if n == 0 {
            return TreeDecomposition {
                bags: vec![Vec::new()],
                links: Vec::new(),
            };
        }
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for edge in network.edges() {
            adj[edge.lo.0].insert(edge.hi.0);
            adj[edge.hi.0].insert(edge.lo.0);
        }
        let mut alive: BTreeSet<usize> = (0..n).collect();
        let mut bags = Vec::with_capacity(n);
        let mut elim_index = vec![usize::MAX; n];
        let mut neighbors_at_elim: Vec<Vec<usize>> = vec![Vec::new(); n];
        for round in 0..n {
            let &v = alive
                .iter()
                .min_by_key(|&&v| (adj[v].len(), v))
                .expect("alive set is nonempty");
            let neighbors: Vec<usize> = adj[v].iter().copied().collect();
            let mut bag: Vec<VertexId> = vec![VertexId(v)];
            bag.extend(neighbors.iter().map(|&u| VertexId(u)));
            bag.sort();
            bags.push(bag);
            elim_index[v] = round;
            neighbors_at_elim[v] = neighbors.clone();
            for &u in &neighbors {
                adj[u].remove(&v);
            }
            for i in 0..neighbors.len() {
                for j in i + 1..neighbors.len() {
                    adj[neighbors[i]].insert(neighbors[j]);
                    adj[neighbors[j]].insert(neighbors[i]);
                }
            }
            adj[v].clear();
            alive.remove(&v);
        }
        let order: Vec<usize> = {
            let mut o = vec![0; n];
            for v in 0..n {
                o[elim_index[v]] = v;
            }
            o
        };
        let mut links = Vec::with_capacity(n - 1);
        for round in 0..n - 1 {
            let v = order[round];
            let parent = neighbors_at_elim[v]
                .iter()
                .map(|&u| elim_index[u])
                .min()
                // An isolated elimination attaches to the next bag so the
                // decomposition stays a single tree.
                .unwrap_or(round + 1);
            links.push((round, parent));
        }
        TreeDecomposition { bags, links }
    }

    pub fn bags(&self) -> &[Vec<VertexId>] {
        &self.bags
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Expands the decomposition into a rooted chain of elementary steps:
    /// empty leaves, single-vertex introductions and removals, and joins
    /// of equal bags, ending in an empty root bag. Children always come
    /// before parents in the returned node list.
    pub fn to_nice(&self) -> NiceDecomposition {
        let b = self.bags.len();
        let mut adjacent = vec![Vec::new(); b];
        for &(x, y) in &self.links {
            adjacent[x].push(y);
            adjacent[y].push(x);
        }
        let mut nodes = Vec::new();
        // Iterative post-order over the decomposition tree rooted at 0.
        let mut result: Vec<Option<usize>> = vec![None; b];
        let mut stack = vec![(0usize, usize::MAX, false)];
        while let Some((node, parent, expanded)) = stack.pop() {
            if !expanded {
                stack.push((node, parent, true));
                for &c in &adjacent[node] {
                    if c != parent {
                        stack.push((c, node, false));
                    }
                }
                continue;
            }
            let bag = &self.bags[node];
            let mut parts = Vec::new();
            for &c in &adjacent[node] {
                if c == parent {
                    continue;
                }
                let child_idx = result[c].expect("children are processed first");
                parts.push(morph(&mut nodes, child_idx, &self.bags[c], bag));
            }
            let built = match parts.len() {
                0 => {
                    let leaf = push_node(&mut nodes, Vec::new(), StepKind::Leaf, Vec::new());
                    morph(&mut nodes, leaf, &[], bag)
                }
                _ => {
                    let mut acc = parts[0];
                    for &p in &parts[1..] {
                        acc = push_node(&mut nodes, bag.clone(), StepKind::Join, vec![acc, p]);
                    }
                    acc
                }
            };
            result[node] = Some(built);
        }
        let top = result[0].expect("root bag is processed");
        let root = morph(&mut nodes, top, &self.bags[0], &[]);
        NiceDecomposition { nodes, root }
    }
}

fn validate_parts(
    network: &CreditNetwork,
    bags: &[Vec<VertexId>],
    links: &[(usize, usize)],
) -> Result<()> {
    let b = bags.len();
    if b == 0 {
        return Err(Error::InvalidDecomposition("no bags".into()));
    }
    if links.len() + 1 != b {
        return Err(Error::InvalidDecomposition(format!(
            "{} links cannot form a tree over {} bags",
            links.len(),
            b
        )));
    }
    for (i, bag) in bags.iter().enumerate() {
        for &v in bag {
            if network.check_vertex(v).is_err() {
                return Err(Error::InvalidDecomposition(format!(
                    "bag {i} mentions unknown vertex {}",
                    v.0
                )));
            }
        }
    }
    let mut adjacent = vec![Vec::new(); b];
    for &(x, y) in links {
        if x >= b || y >= b || x == y {
            return Err(Error::InvalidDecomposition(format!(
                "link ({x}, {y}) does not join two distinct bags"
            )));
        }
        adjacent[x].push(y);
        adjacent[y].push(x);
    }
    if !connected_over(b, &adjacent, (0..b).collect()) {
        return Err(Error::InvalidDecomposition(
            "links do not connect all bags".into(),
        ));
    }
    for v in network.vertices() {
        let holders: Vec<usize> = (0..b).filter(|&i| bags[i].contains(&v)).collect();
        if holders.is_empty() {
            return Err(Error::InvalidDecomposition(format!(
                "vertex {} appears in no bag",
                v.0
            )));
        }
        if !connected_over(b, &adjacent, holders) {
            return Err(Error::InvalidDecomposition(format!(
                "bags containing vertex {} are not connected",
                v.0
            )));
        }
    }
    for edge in network.edges() {
        let covered = bags
            .iter()
            .any(|bag| bag.contains(&edge.lo) && bag.contains(&edge.hi));
        if !covered {
            return Err(Error::InvalidDecomposition(format!(
                "no bag contains both endpoints of the edge {}-{}",
                edge.lo.0, edge.hi.0
            )));
        }
    }
    Ok(())
}

fn connected_over(b: usize, adjacent: &[Vec<usize>], members: Vec<usize>) -> bool {
    let mut member = vec![false; b];
    for &i in &members {
        member[i] = true;
    }
    let mut seen = vec![false; b];
    let mut queue = vec![members[0]];
    seen[members[0]] = true;
    let mut found = 0;
    while let Some(x) = queue.pop() {
        found += 1;
        for &y in &adjacent[x] {
            if member[y] && !seen[y] {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    found == members.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Leaf,
    Introduce(VertexId),
    Forget(VertexId),
    Join,
}

#[derive(Debug, Clone)]
pub struct NiceNode {
    pub bag: Vec<VertexId>,
    pub kind: StepKind,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NiceDecomposition {
    nodes: Vec<NiceNode>,
    root: usize,
}

impl NiceDecomposition {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }
}

fn push_node(
    nodes: &mut Vec<NiceNode>,
    bag: Vec<VertexId>,
    kind: StepKind,
    children: Vec<usize>,
) -> usize {
    nodes.push(NiceNode {
        bag,
        kind,
        children,
    });
    nodes.len() - 1
}

/// Chains forgets and introductions to morph `from` into `to`, returning
/// the index of the node whose bag equals `to`.
fn morph(nodes: &mut Vec<NiceNode>, start: usize, from: &[VertexId], to: &[VertexId]) -> usize {
    let from_set: BTreeSet<VertexId> = from.iter().copied().collect();
    let to_set: BTreeSet<VertexId> = to.iter().copied().collect();
    let mut cur = start;
    let mut bag = from_set.clone();
    for &v in from_set.difference(&to_set) {
        bag.remove(&v);
        cur = push_node(
            nodes,
            bag.iter().copied().collect(),
            StepKind::Forget(v),
            vec![cur],
        );
    }
    for &v in to_set.difference(&from_set) {
        bag.insert(v);
        cur = push_node(
            nodes,
            bag.iter().copied().collect(),
            StepKind::Introduce(v),
            vec![cur],
        );
    }
    cur
}
