//! Liquidity analysis for credit networks whose participants are bound by
//! score constraints.
//!
//! The crate models a network of trust lines as an undirected multigraph with
//! integer capacities. A [`network::Configuration`] records how much of each
//! line's capacity is available in each direction; payments route along
//! residual paths and shift those splits. Configurations sharing a score
//! vector behave identically for all future payments, so analysis works on
//! score vectors throughout.
//!
//! Modules:
//! - [`network`]: graph, configurations, routing, payments.
//! - [`predicate`]: score predicates, constrained networks, the fake-vertex
//!   expansion that compiles node caps away.
//! - [`classes`]: exhaustive state-space enumeration and brute-force oracles.
//! - [`dp`]: closed-form and dynamic-programming counting for stars, trees
//!   and bounded-treewidth graphs.
//! - [`reduction`]: edge expansion and the reduction from well-connected
//!   graphs to constrained stars.
//! - [`sim`]: seeded Markov-chain simulation of payment traffic.
//! - [`netfile`]: the text format used by the command-line tool.

#![forbid(unsafe_code)]

pub mod classes;
pub mod dp;
mod error;
pub mod netfile;
pub mod network;
pub mod predicate;
pub mod reduction;
pub mod sim;

pub use error::{Error, Result};
pub use network::{
    configurations_equivalent, Configuration, CreditEdge, CreditNetwork, Route, ScoreVector,
    Transaction, VertexId,
};
pub use predicate::{
    build_gadget, ConstrainedNetwork, GadgetExpansion, LinearInequality, ScorePredicate, Sense,
    TransactionOutcome,
};
