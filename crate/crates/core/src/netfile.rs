//! Line-oriented text format for networks, start configurations, score
//! constraints, traffic rates and optional tree decompositions.
//!
//! Grammar, one statement per line, `#` starting a comment:
//!
//! ```text
//! vertex <label>
//! edge <a> <b> <capacity>
//! init <a> <b> <residual from a toward b>
//! bound <label> <lo> <hi>
//! fixed <label> <score>
//! group <max indegree> <label> [<label> ...]
//! pair <a> <b> <rate>
//! bag <label> [<label> ...]
//! bagedge <bag index> <bag index>
//! ```
//!
//! Labels must be declared by a `vertex` line before use. Each `init`
//! line sets the split of the first not-yet-initialized edge between its
//! endpoints; edges left uninitialized default to the even split. A
//! `pair` line fixes the traffic rate of both directions at once and may
//! not be repeated for the same two vertices; files without `pair` lines
//! default to rate one between every pair. `bag` and `bagedge` lines
//! supply a tree decomposition (bags are indexed in declaration order).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::dp::decomp::TreeDecomposition;
use crate::error::{Error, Result};
use crate::network::{Configuration, CreditNetwork, VertexId};
use crate::predicate::{ConstrainedNetwork, ScorePredicate};
use crate::sim::TransactionDistribution;

/// One score-constraint statement, kept in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Bound { v: VertexId, lo: u64, hi: u64 },
    Fixed { v: VertexId, score: u64 },
    Group { max_indegree: u64, members: Vec<VertexId> },
}

/// A fully resolved input file.
#[derive(Debug, Clone)]
pub struct NetworkFile {
    pub network: Arc<CreditNetwork>,
    pub start: Configuration,
    pub constraints: Vec<Constraint>,
    /// Unordered transacting pairs with rates, in file order; empty when
    /// the file relies on the default of rate one between every pair.
    pub pairs: Vec<(VertexId, VertexId, u64)>,
    pub decomposition: Option<TreeDecomposition>,
}

impl NetworkFile {
    /// All constraint statements compiled into one predicate.
    pub fn predicate(&self) -> Result<ScorePredicate> {
        let mut parts = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            parts.push(match c {
                Constraint::Bound { v, lo, hi } => {
                    ScorePredicate::node_bound(&self.network, *v, *lo, *hi)?
                }
                Constraint::Fixed { v, score } => {
                    ScorePredicate::node_fixed(&self.network, *v, *score)?
                }
                Constraint::Group {
                    max_indegree,
                    members,
                } => ScorePredicate::group_bound(&self.network, members, *max_indegree)?,
            });
        }
        Ok(match parts.len() {
            0 => ScorePredicate::always(),
            1 => parts.pop().expect("one part"),
            _ => ScorePredicate::and(parts),
        })
    }

    /// The network, start configuration and predicate bundled together.
    pub fn constrained(&self) -> Result<ConstrainedNetwork> {
        ConstrainedNetwork::new(
            Arc::clone(&self.network),
            self.predicate()?,
            self.start.clone(),
        )
    }

    /// The unordered transacting pairs; every pair of distinct vertices
    /// when the file declares none.
    pub fn transacting_pairs(&self) -> Vec<(VertexId, VertexId)> {
        if self.pairs.is_empty() {
            let mut out = Vec::new();
            for x in self.network.vertices() {
                for y in self.network.vertices() {
                    if x < y {
                        out.push((x, y));
                    }
                }
            }
            out
        } else {
            self.pairs.iter().map(|&(x, y, _)| (x, y)).collect()
        }
    }

    /// The traffic distribution over ordered pairs, both directions of
    /// every declared pair at its rate.
    pub fn traffic(&self) -> Result<TransactionDistribution> {
        if self.pairs.is_empty() {
            return TransactionDistribution::uniform_pairs(&self.network);
        }
        let entries = self
            .pairs
            .iter()
            .flat_map(|&(x, y, rate)| [((x, y), rate), ((y, x), rate)]);
        TransactionDistribution::new(entries)
    }

    /// Canonical text form; parsing it reproduces this file.
    pub fn serialize(&self) -> String {
        let net = &self.network;
        let mut out = String::new();
        for label in net.labels() {
            let _ = writeln!(out, "vertex {label}");
        }
        for edge in net.edges() {
            let _ = writeln!(
                out,
                "edge {} {} {}",
                net.label(edge.lo),
                net.label(edge.hi),
                edge.capacity
            );
        }
        for (id, edge) in net.edges().iter().enumerate() {
            let _ = writeln!(
                out,
                "init {} {} {}",
                net.label(edge.lo),
                net.label(edge.hi),
                self.start.residual(id, edge.lo)
            );
        }
        for c in &self.constraints {
            match c {
                Constraint::Bound { v, lo, hi } => {
                    let _ = writeln!(out, "bound {} {lo} {hi}", net.label(*v));
                }
                Constraint::Fixed { v, score } => {
                    let _ = writeln!(out, "fixed {} {score}", net.label(*v));
                }
                Constraint::Group {
                    max_indegree,
                    members,
                } => {
                    let labels: Vec<&str> =
                        members.iter().map(|&m| net.label(m)).collect();
                    let _ = writeln!(out, "group {max_indegree} {}", labels.join(" "));
                }
            }
        }
        for &(x, y, rate) in &self.pairs {
            let _ = writeln!(out, "pair {} {} {rate}", net.label(x), net.label(y));
        }
        if let Some(decomp) = &self.decomposition {
            for bag in decomp.bags() {
                let labels: Vec<&str> = bag.iter().map(|&v| net.label(v)).collect();
                let _ = writeln!(out, "bag {}", labels.join(" "));
            }
            for &(i, j) in decomp.links() {
                let _ = writeln!(out, "bagedge {i} {j}");
            }
        }
        out
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_u64(line: usize, token: &str, what: &str) -> Result<u64> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("{what} must be a nonnegative integer, got {token:?}")))
}

struct RawStatement<'a> {
    line: usize,
    keyword: &'a str,
    args: Vec<&'a str>,
}

/// Parses the text format into a resolved [`NetworkFile`].
pub fn parse_network(input: &str) -> Result<NetworkFile> {
    let mut statements = Vec::new();
    for (i, raw_line) in input.lines().enumerate() {
        let line = i + 1;
        let text = raw_line.split('#').next().unwrap_or("");
        let mut tokens = text.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        statements.push(RawStatement {
            line,
            keyword,
            args: tokens.collect(),
        });
    }

    // First pass: vertices and edges, so the network can be built before
    // anything that refers to it is resolved.
    let mut labels: Vec<String> = Vec::new();
    let mut ids: BTreeMap<&str, VertexId> = BTreeMap::new();
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    let mut edge_lines: Vec<usize> = Vec::new();
    for s in &statements {
        match s.keyword {
            "vertex" => {
                let [label] = s.args[..] else {
                    return Err(parse_err(s.line, "vertex takes one label"));
                };
                if ids.contains_key(label) {
                    return Err(parse_err(s.line, format!("duplicate vertex {label:?}")));
                }
                ids.insert(label, VertexId(labels.len()));
                labels.push(label.to_string());
            }
            "edge" => {
                let [a, b, cap] = s.args[..] else {
                    return Err(parse_err(s.line, "edge takes two labels and a capacity"));
                };
                let a = resolve(&ids, s.line, a)?;
                let b = resolve(&ids, s.line, b)?;
                let cap = parse_u64(s.line, cap, "capacity")?;
                edges.push((a.0, b.0, cap));
                edge_lines.push(s.line);
            }
            "init" | "bound" | "fixed" | "group" | "pair" | "bag" | "bagedge" => {}
            other => {
                return Err(parse_err(s.line, format!("unknown statement {other:?}")));
            }
        }
    }
    if labels.is_empty() {
        return Err(parse_err(1, "file declares no vertices"));
    }
    let network = match CreditNetwork::new(labels, &edges) {
        Ok(net) => Arc::new(net),
        Err(e) => {
            // Self-loops are the only constructor failure the scan above
            // can still run into; blame the first offending edge line.
            let line = edges
                .iter()
                .zip(&edge_lines)
                .find(|((a, b, _), _)| a == b)
                .map(|(_, &line)| line)
                .unwrap_or(1);
            return Err(parse_err(line, e.to_string()));
        }
    };

    // Second pass: everything that needs the finished network.
    let mut residuals: Vec<Option<(u64, u64)>> = vec![None; network.edge_count()];
    let mut constraints = Vec::new();
    let mut pairs: Vec<(VertexId, VertexId, u64)> = Vec::new();
    let mut bags: Vec<Vec<VertexId>> = Vec::new();
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut first_bag_line = None;
    for s in &statements {
        match s.keyword {
            "vertex" | "edge" => {}
            "init" => {
                let [a, b, amount] = s.args[..] else {
                    return Err(parse_err(s.line, "init takes two labels and a residual"));
                };
                let a = resolve(&ids, s.line, a)?;
                let b = resolve(&ids, s.line, b)?;
                let amount = parse_u64(s.line, amount, "residual")?;
                let slot = network
                    .incident(a)
                    .iter()
                    .filter(|&&(_, other)| other == b)
                    .map(|&(id, _)| id)
                    .find(|&id| residuals[id].is_none());
                let Some(id) = slot else {
                    return Err(parse_err(
                        s.line,
                        format!(
                            "no uninitialized edge between {} and {}",
                            network.label(a),
                            network.label(b)
                        ),
                    ));
                };
                let edge = network.edge(id);
                if amount > edge.capacity {
                    return Err(parse_err(
                        s.line,
                        format!("residual {amount} exceeds capacity {}", edge.capacity),
                    ));
                }
                residuals[id] = Some(if a == edge.lo {
                    (amount, edge.capacity - amount)
                } else {
                    (edge.capacity - amount, amount)
                });
            }
            "bound" => {
                let [label, lo, hi] = s.args[..] else {
                    return Err(parse_err(s.line, "bound takes a label and two scores"));
                };
                let v = resolve(&ids, s.line, label)?;
                let lo = parse_u64(s.line, lo, "bound")?;
                let hi = parse_u64(s.line, hi, "bound")?;
                ScorePredicate::node_bound(&network, v, lo, hi)
                    .map_err(|e| parse_err(s.line, e.to_string()))?;
                constraints.push(Constraint::Bound { v, lo, hi });
            }
            "fixed" => {
                let [label, score] = s.args[..] else {
                    return Err(parse_err(s.line, "fixed takes a label and a score"));
                };
                let v = resolve(&ids, s.line, label)?;
                let score = parse_u64(s.line, score, "score")?;
                ScorePredicate::node_fixed(&network, v, score)
                    .map_err(|e| parse_err(s.line, e.to_string()))?;
                constraints.push(Constraint::Fixed { v, score });
            }
            "group" => {
                let Some((&max, members)) = s.args.split_first() else {
                    return Err(parse_err(s.line, "group takes a limit and labels"));
                };
                let max_indegree = parse_u64(s.line, max, "group limit")?;
                let members = members
                    .iter()
                    .map(|m| resolve(&ids, s.line, m))
                    .collect::<Result<Vec<_>>>()?;
                ScorePredicate::group_bound(&network, &members, max_indegree)
                    .map_err(|e| parse_err(s.line, e.to_string()))?;
                constraints.push(Constraint::Group {
                    max_indegree,
                    members,
                });
            }
            "pair" => {
                let [a, b, rate] = s.args[..] else {
                    return Err(parse_err(s.line, "pair takes two labels and a rate"));
                };
                let x = resolve(&ids, s.line, a)?;
                let y = resolve(&ids, s.line, b)?;
                let rate = parse_u64(s.line, rate, "rate")?;
                if x == y {
                    return Err(parse_err(s.line, "pair endpoints must differ"));
                }
                if pairs
                    .iter()
                    .any(|&(px, py, _)| (px, py) == (x, y) || (px, py) == (y, x))
                {
                    return Err(parse_err(
                        s.line,
                        format!(
                            "pair {} {} already has a rate",
                            network.label(x),
                            network.label(y)
                        ),
                    ));
                }
                pairs.push((x, y, rate));
            }
            "bag" => {
                first_bag_line.get_or_insert(s.line);
                let bag = s
                    .args
                    .iter()
                    .map(|m| resolve(&ids, s.line, m))
                    .collect::<Result<Vec<_>>>()?;
                bags.push(bag);
            }
            "bagedge" => {
                let [i, j] = s.args[..] else {
                    return Err(parse_err(s.line, "bagedge takes two bag indices"));
                };
                let i = parse_u64(s.line, i, "bag index")? as usize;
                let j = parse_u64(s.line, j, "bag index")? as usize;
                links.push((i, j));
                first_bag_line.get_or_insert(s.line);
            }
            _ => unreachable!("first pass rejects unknown keywords"),
        }
    }

    let residuals = residuals
        .iter()
        .zip(network.edges())
        .map(|(r, e)| {
            r.unwrap_or_else(|| {
                let toward_hi = e.capacity.div_ceil(2);
                (toward_hi, e.capacity - toward_hi)
            })
        })
        .collect();
    let start = Configuration::new(Arc::clone(&network), residuals)
        .expect("residual splits were checked per line");

    let decomposition = if bags.is_empty() && links.is_empty() {
        None
    } else {
        let line = first_bag_line.expect("bag statements exist");
        let decomp = TreeDecomposition::new(&network, bags, links)
            .map_err(|e| parse_err(line, e.to_string()))?;
        Some(decomp)
    };

    Ok(NetworkFile {
        network,
        start,
        constraints,
        pairs,
        decomposition,
    })
}

fn resolve(ids: &BTreeMap<&str, VertexId>, line: usize, label: &str) -> Result<VertexId> {
    ids.get(label)
        .copied()
        .ok_or_else(|| parse_err(line, format!("unknown vertex {label:?}")))
}
