//! Acceptance suite: twelve end-to-end checks covering exact liquidity,
//! the closed-form star bounds, the expander-to-star reduction, the
//! node-cap gadget, and the Markov-chain sampler.
//!
//! Each check prints one `[PASS]`/`[FAIL] acceptance N` line (shown with
//! `cargo test --test acceptance -- --nocapture`) and fails the build when
//! its assertions do not hold. Numeric tolerances are pinned right here.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use creditnet::classes::{
    all_pairs, count_forests, enumerate_all_configurations, enumerate_reachable, ratio, ClassSpace,
};
use creditnet::dp::decomp::TreeDecomposition;
use creditnet::dp::star::{star_failure_bounds, star_liquidity, unconstrained_star_failure};
use creditnet::dp::tree::{tree_class_count, tree_liquidity};
use creditnet::dp::treewidth::{treewidth_class_count, treewidth_liquidity};
use creditnet::dp::ScoreSet;
use creditnet::reduction::{
    edge_expansion, expander_to_star, expansion_liquidity_interval, monotonicity_experiment,
    scan_liquidity, verify_reduction, Modification, ReductionSpec,
};
use creditnet::sim::{simulate, SimParams, SimRng, TransactionDistribution};
use creditnet::{
    build_gadget, Configuration, ConstrainedNetwork, CreditNetwork, Error, Route, ScorePredicate,
    VertexId,
};

use common::*;

/// Largest accepted total-variation distance from the uniform class
/// distribution after a million measured steps.
const TV_TOLERANCE: f64 = 0.02;
/// Largest accepted gap between a simulated liquidity estimate and the
/// exact value after a million measured steps.
const MC_TOLERANCE: f64 = 0.01;

fn criterion(number: u32, claim: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("[PASS] acceptance {number}: {claim}"),
        Err(cause) => {
            println!("[FAIL] acceptance {number}: {claim}");
            resume_unwind(cause);
        }
    }
}

/// Four unit spokes with the hub score pinned at 2: every leaf pair has
/// liquidity exactly 1/3.
fn pinned_star() -> ConstrainedNetwork {
    let net = star(&[1, 1, 1, 1]);
    let start = Configuration::new(Arc::clone(&net), vec![(0, 1), (0, 1), (1, 0), (1, 0)]).unwrap();
    let predicate = ScorePredicate::node_fixed(&net, VertexId(4), 2).unwrap();
    ConstrainedNetwork::new(net, predicate, start).unwrap()
}

/// The pinned star with an extra unit edge between leaves 2 and 3.
fn bridged_star() -> ConstrainedNetwork {
    let net = Arc::new(
        CreditNetwork::with_default_labels(
            5,
            &[(0, 4, 1), (1, 4, 1), (2, 4, 1), (3, 4, 1), (2, 3, 1)],
        )
        .unwrap(),
    );
    let start = Configuration::new(
        Arc::clone(&net),
        vec![(0, 1), (0, 1), (1, 0), (1, 0), (1, 0)],
    )
    .unwrap();
    let predicate = ScorePredicate::node_fixed(&net, VertexId(4), 2).unwrap();
    ConstrainedNetwork::new(net, predicate, start).unwrap()
}

/// Path a-b-c with capacities 2,2 and the middle score pinned at 2.
fn pinned_path() -> ConstrainedNetwork {
    let net = Arc::new(CreditNetwork::with_default_labels(3, &[(0, 1, 2), (1, 2, 2)]).unwrap());
    let start = Configuration::even_split(Arc::clone(&net));
    let predicate = ScorePredicate::node_fixed(&net, VertexId(1), 2).unwrap();
    ConstrainedNetwork::new(net, predicate, start).unwrap()
}

fn unconstrained_even(net: &Arc<CreditNetwork>) -> ConstrainedNetwork {
    ConstrainedNetwork::unconstrained(Configuration::even_split(Arc::clone(net)))
}

fn reachable_space(constrained: &ConstrainedNetwork) -> ClassSpace {
    enumerate_reachable(constrained, &all_pairs(constrained.network()), CLASS_BUDGET).unwrap()
}

#[test]
fn a01_pinned_star_and_bridge_family() {
    criterion(
        1,
        "pinned star pays 1/3 everywhere; a leaf bridge of capacity n drops the others to (n+2)/(4n+6)",
        || {
            let base = star(&[1, 1, 1, 1]);
            let hub = VertexId(4);
            let mut pinned = ScoreSet::unconstrained(5);
            pinned.fix(hub, 2);
            for (x, y) in ordered_pairs(&base) {
                if x == hub || y == hub {
                    continue;
                }
                let liquidity = scan_liquidity(&base, &pinned, x, y, CLASS_BUDGET)
                    .unwrap()
                    .unwrap();
                assert_eq!(liquidity, ratio(1, 3), "base star pair {x:?}->{y:?}");
            }

            let quarter = ratio(1, 4);
            let mut previous: Option<BigRational> = None;
            for n in 0..=10u64 {
                let net = Arc::new(
                    CreditNetwork::with_default_labels(
                        5,
                        &[(0, 4, 1), (1, 4, 1), (2, 4, 1), (3, 4, 1), (2, 3, n)],
                    )
                    .unwrap(),
                );
                let liquidity = scan_liquidity(&net, &pinned, VertexId(0), VertexId(1), CLASS_BUDGET)
                    .unwrap()
                    .unwrap();
                assert_eq!(liquidity, ratio(n + 2, 4 * n + 6), "bridge capacity {n}");
                assert!(liquidity > quarter, "bridge capacity {n} stays above 1/4");
                if let Some(p) = &previous {
                    assert!(liquidity < *p, "liquidity must strictly decrease at capacity {n}");
                }
                previous = Some(liquidity);
            }
        },
    );
}

#[test]
fn a02_two_leaf_star_failure_formula() {
    criterion(
        2,
        "class-space liquidity on two-leaf stars matches the closed-form failure probability",
        || {
            for ci in 1..=6u64 {
                for cj in 1..=6u64 {
                    let net = star(&[ci, cj]);
                    let space = reachable_space(&unconstrained_even(&net));
                    assert_eq!(space.len() as u64, (ci + 1) * (cj + 1), "caps ({ci}, {cj})");
                    let liquidity = space.exact_liquidity(VertexId(0), VertexId(1)).unwrap();
                    let failure = BigRational::one() - liquidity;
                    assert_eq!(
                        failure,
                        unconstrained_star_failure(ci, cj),
                        "caps ({ci}, {cj})"
                    );
                }
            }
        },
    );
}

fn nondecreasing_profiles(len: usize, max_cap: u64) -> Vec<Vec<u64>> {
    fn rec(len: usize, max_cap: u64, min: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for c in min..=max_cap {
            cur.push(c);
            rec(len, max_cap, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, max_cap, 1, &mut Vec::new(), &mut out);
    out
}

#[test]
fn a03_failure_bounds_sweep() {
    criterion(
        3,
        "every balanced-center star failure probability sits inside the capacity sandwich",
        || {
            let mut checked = 0u64;
            for leaves in 2..=6usize {
                for caps in nondecreasing_profiles(leaves, 5) {
                    let center = caps.iter().sum::<u64>() / 2;
                    for i in 0..leaves {
                        for j in 0..leaves {
                            if i == j {
                                continue;
                            }
                            let failure = BigRational::one()
                                - star_liquidity(&caps, center, i, j).unwrap();
                            let (lo, hi) = star_failure_bounds(caps[i], caps[j]);
                            assert!(
                                failure >= lo && failure <= hi,
                                "caps {caps:?} pair ({i},{j}): {failure} outside [{lo}, {hi}]"
                            );
                            checked += 1;
                        }
                    }
                }
            }
            assert!(checked > 5_000, "sweep visited only {checked} pairs");
        },
    );
}

/// Random admissible radii for `network`: at most the expansion floor,
/// bumped to 1 on odd-degree vertices so no window is empty.
fn admissible_radii(rng: &mut SimRng, network: &CreditNetwork, floor: u64) -> Vec<u64> {
    network
        .vertices()
        .map(|v| {
            let r = rng.below(floor + 1);
            if r == 0 && network.degree(v) % 2 == 1 {
                1
            } else {
                r
            }
        })
        .collect()
}

/// Random connected unit-capacity graph whose expansion floor is at least 1
/// and whose configuration space stays small enough to enumerate.
fn random_expander(rng: &mut SimRng) -> Option<(Arc<CreditNetwork>, u64)> {
    let n = 4 + rng.below(3) as usize;
    let extra = n + rng.below(n as u64 + 1) as usize;
    let net = random_connected(rng, n, extra, 1);
    if config_space_size(&net) > 1 << 14 {
        return None;
    }
    let floor = edge_expansion(&net, SUBSET_BUDGET).unwrap().floor();
    (floor >= 1).then_some((net, floor))
}

#[test]
fn a04_reduction_equivalence() {
    criterion(
        4,
        "the star reduction preserves classes and liquidity, and oversized radii break it",
        || {
            // Unit K4 with radius 1 everywhere reduces to the pinned star of
            // four unit leaves: six classes, every pair at 1/3.
            let k4 = clique(4);
            let spec = expander_to_star(&k4, &[1; 4], SUBSET_BUDGET).unwrap();
            assert_eq!(spec.radii, vec![1; 4]);
            assert_eq!(spec.center_score, 2);
            let report = verify_reduction(&k4, &spec, CLASS_BUDGET).unwrap();
            assert!(report.all_match(), "K4 radius 1: {report:?}");
            assert_eq!(report.class_count, 6);
            for (x, y) in ordered_pairs(&k4) {
                assert_eq!(spec.pair_liquidity(x, y).unwrap(), ratio(1, 3));
            }

            // Unit C4 with radius 1: parity normalization shrinks every
            // window to a point and the reduction still matches.
            let c4 = cycle(4);
            let spec = expander_to_star(&c4, &[1; 4], SUBSET_BUDGET).unwrap();
            let report = verify_reduction(&c4, &spec, CLASS_BUDGET).unwrap();
            assert!(report.all_match(), "C4 radius 1: {report:?}");
            assert_eq!(report.class_count, 1);

            // Twenty random graphs with random admissible radii.
            let mut rng = SimRng::new(0xACC4);
            let mut done = 0;
            let mut attempts = 0;
            while done < 20 {
                attempts += 1;
                assert!(attempts < 500, "generator stalled after {done} instances");
                let Some((net, floor)) = random_expander(&mut rng) else {
                    continue;
                };
                let radii = admissible_radii(&mut rng, &net, floor);
                let spec = expander_to_star(&net, &radii, SUBSET_BUDGET).unwrap();
                let report = verify_reduction(&net, &spec, CLASS_BUDGET).unwrap();
                assert!(
                    report.all_match(),
                    "random instance {done} radii {radii:?}: {report:?}"
                );
                done += 1;
            }

            // Negative control. The constructor refuses radii above the
            // expansion floor outright; forcing such a spec through breaks
            // the class bijection (K4 realizes 38 score vectors, while the
            // radius-3 star slice holds 44).
            assert!(matches!(
                expander_to_star(&k4, &[3; 4], SUBSET_BUDGET),
                Err(Error::ExpansionViolated { .. })
            ));
            let forced = ReductionSpec {
                star: star(&[3, 3, 3, 3]),
                center: VertexId(4),
                center_score: 6,
                radii: vec![3; 4],
                windows: vec![(0, 3); 4],
                offsets: vec![0; 4],
                h: edge_expansion(&k4, SUBSET_BUDGET).unwrap().h,
            };
            let report = verify_reduction(&k4, &forced, CLASS_BUDGET).unwrap();
            assert!(
                !report.score_sets_match,
                "oversized radii must break the score-set bijection"
            );
        },
    );
}

#[test]
fn a05_expansion_liquidity_interval() {
    criterion(
        5,
        "radii saturated at the expansion floor keep every pair inside the liquidity interval",
        || {
            for n in [4usize, 5, 6] {
                let net = clique(n);
                let floor = edge_expansion(&net, SUBSET_BUDGET).unwrap().floor();
                assert!(floor >= 2, "K{n} has expansion floor {floor}");
                let spec = expander_to_star(&net, &vec![floor; n], SUBSET_BUDGET).unwrap();
                let (lo, hi) = expansion_liquidity_interval(floor).unwrap();
                for (x, y) in ordered_pairs(&net) {
                    let liquidity = spec.pair_liquidity(x, y).unwrap();
                    assert!(
                        liquidity >= lo && liquidity <= hi,
                        "K{n} pair {x:?}->{y:?}: {liquidity} outside [{lo}, {hi}]"
                    );
                }
            }

            // Spot value: K5 at radius 3 lands on 26/51 through the closed
            // form and through the per-class scan of the original graph.
            let k5 = clique(5);
            let spec = expander_to_star(&k5, &[3; 5], SUBSET_BUDGET).unwrap();
            assert_eq!(
                spec.pair_liquidity(VertexId(0), VertexId(1)).unwrap(),
                ratio(26, 51)
            );
            let report = verify_reduction(&k5, &spec, CLASS_BUDGET).unwrap();
            assert!(report.all_match(), "K5 radius 3: {report:?}");
        },
    );
}

#[test]
fn a06_forest_correspondence() {
    criterion(
        6,
        "unconstrained class counts and liquidity match the acyclic-subset counts",
        || {
            let mut instances: Vec<Arc<CreditNetwork>> = vec![
                Arc::new(CreditNetwork::with_default_labels(2, &[(0, 1, 3)]).unwrap()),
                Arc::new(CreditNetwork::with_default_labels(2, &[(0, 1, 2), (0, 1, 1)]).unwrap()),
                clique(3),
            ];
            let mut rng = SimRng::new(0xACC6);
            while instances.len() < 13 {
                let n = 2 + rng.below(6) as usize;
                let extra = rng.below(4) as usize;
                let net = random_connected(&mut rng, n, extra, 3);
                if net.total_capacity() > 16 {
                    continue;
                }
                instances.push(net);
            }
            for net in &instances {
                let forests = count_forests(net, SUBSET_BUDGET).unwrap();
                let by_class = enumerate_all_configurations(net, CLASS_BUDGET).unwrap();
                let space = reachable_space(&unconstrained_even(net));
                assert_eq!(by_class.len(), space.len(), "enumeration vs reachable");
                assert_eq!(BigUint::from(space.len()), forests.total, "class count");
                for (x, y) in ordered_pairs(net) {
                    let expected = BigRational::new(
                        forests.joining(x, y).unwrap().into(),
                        forests.total.clone().into(),
                    );
                    assert_eq!(
                        space.exact_liquidity(x, y).unwrap(),
                        expected,
                        "pair {x:?}->{y:?}"
                    );
                }
            }
        },
    );
}

#[test]
fn a07_tree_dp_agreement() {
    criterion(
        7,
        "tree counting and liquidity agree with brute force on random constrained trees",
        || {
            let path = Arc::new(
                CreditNetwork::with_default_labels(3, &[(0, 1, 2), (1, 2, 2)]).unwrap(),
            );
            let mut pinned = ScoreSet::unconstrained(3);
            pinned.fix(VertexId(1), 2);
            assert_eq!(tree_class_count(&path, &pinned).unwrap(), BigUint::from(3u32));
            assert_eq!(
                tree_liquidity(&path, &pinned, VertexId(0), VertexId(2)).unwrap(),
                ratio(2, 3)
            );

            let mut rng = SimRng::new(0xACC7);
            for round in 0..100 {
                let n = 2 + rng.below(7) as usize;
                let net = random_connected(&mut rng, n, 0, 3);
                let scores = windows_around_even(&mut rng, &net);
                let count = tree_class_count(&net, &scores).unwrap();
                assert_eq!(
                    count,
                    BigUint::from(admitted_class_count(&net, &scores, CLASS_BUDGET)),
                    "round {round} class count"
                );
                for _ in 0..2 {
                    let x = VertexId(rng.below(n as u64) as usize);
                    let y = VertexId(rng.below(n as u64) as usize);
                    if x == y {
                        continue;
                    }
                    let dp = tree_liquidity(&net, &scores, x, y).unwrap();
                    let oracle = scan_liquidity(&net, &scores, x, y, CLASS_BUDGET)
                        .unwrap()
                        .unwrap();
                    assert_eq!(dp, oracle, "round {round} pair {x:?}->{y:?}");
                }
            }
        },
    );
}

#[test]
fn a08_treewidth_dp_agreement() {
    criterion(
        8,
        "decomposition counting and liquidity agree with brute force on random graphs",
        || {
            let k4 = clique(4);
            let mut windows = ScoreSet::unconstrained(4);
            for v in k4.vertices() {
                windows.interval(v, 1, 2);
            }
            let decomp = TreeDecomposition::min_degree(&k4);
            assert!(decomp.width() <= 3);
            assert_eq!(
                treewidth_class_count(&k4, &decomp, &windows, CLASS_BUDGET).unwrap(),
                BigUint::from(6u32)
            );
            assert_eq!(
                treewidth_liquidity(&k4, &decomp, &windows, VertexId(0), VertexId(1), CLASS_BUDGET)
                    .unwrap(),
                ratio(1, 3)
            );

            let mut rng = SimRng::new(0xACC8);
            let mut done = 0;
            let mut attempts = 0;
            while done < 50 {
                attempts += 1;
                assert!(attempts < 2_000, "generator stalled after {done} instances");
                let n = 3 + rng.below(6) as usize;
                let extra = rng.below(4) as usize;
                let net = random_connected(&mut rng, n, extra, 2);
                if net.edge_count() > 10 {
                    continue;
                }
                let decomp = TreeDecomposition::min_degree(&net);
                if decomp.width() > 3 {
                    continue;
                }
                let scores = windows_around_even(&mut rng, &net);
                let count = treewidth_class_count(&net, &decomp, &scores, CLASS_BUDGET).unwrap();
                assert_eq!(
                    count,
                    BigUint::from(admitted_class_count(&net, &scores, CLASS_BUDGET)),
                    "instance {done} class count"
                );
                for _ in 0..2 {
                    let x = VertexId(rng.below(n as u64) as usize);
                    let y = VertexId(rng.below(n as u64) as usize);
                    if x == y {
                        continue;
                    }
                    let dp =
                        treewidth_liquidity(&net, &decomp, &scores, x, y, CLASS_BUDGET).unwrap();
                    let oracle = scan_liquidity(&net, &scores, x, y, CLASS_BUDGET)
                        .unwrap()
                        .unwrap();
                    assert_eq!(dp, oracle, "instance {done} pair {x:?}->{y:?}");
                }
                done += 1;
            }
        },
    );
}

#[test]
fn a09_gadget_equivalence() {
    criterion(
        9,
        "the satellite gadget reproduces node-capped class spaces and liquidity exactly",
        || {
            let mut rng = SimRng::new(0xACC9);
            let mut done = 0;
            let mut attempts = 0;
            while done < 20 {
                attempts += 1;
                assert!(attempts < 500, "generator stalled after {done} instances");
                let n = 2 + rng.below(5) as usize;
                let extra = rng.below(3) as usize;
                let net = random_connected(&mut rng, n, extra, 2);
                if net.edge_count() > 8 {
                    continue;
                }
                let start = Configuration::even_split(Arc::clone(&net));
                let start_scores = start.score_vector();
                let caps: Vec<u64> = net
                    .vertices()
                    .map(|v| {
                        let lo = start_scores.get(v);
                        lo + rng.below(net.degree(v) - lo + 1)
                    })
                    .collect();

                let predicate = ScorePredicate::and(
                    net.vertices()
                        .map(|v| ScorePredicate::node_bound(&net, v, 0, caps[v.0]).unwrap())
                        .collect(),
                );
                let constrained =
                    ConstrainedNetwork::new(Arc::clone(&net), predicate, start.clone()).unwrap();
                let space_c = reachable_space(&constrained);

                let gadget = build_gadget(&net, &caps, &start).unwrap();
                let mut satellite_pairs = Vec::new();
                for (x, y) in ordered_pairs(&net) {
                    satellite_pairs.push((gadget.satellite[x.0], gadget.satellite[y.0]));
                }
                let space_g =
                    enumerate_reachable(&gadget.constrained(), &satellite_pairs, CLASS_BUDGET)
                        .unwrap();

                assert_eq!(space_c.len(), space_g.len(), "instance {done} class count");
                let originals: BTreeSet<Vec<u64>> = space_c
                    .classes()
                    .iter()
                    .map(|s| s.scores().to_vec())
                    .collect();
                let projected: BTreeSet<Vec<u64>> = space_g
                    .classes()
                    .iter()
                    .map(|s| gadget.satellite.iter().map(|&f| s.get(f)).collect())
                    .collect();
                assert_eq!(
                    projected.len(),
                    space_g.len(),
                    "instance {done}: projection must stay injective"
                );
                assert_eq!(originals, projected, "instance {done} projected score sets");

                for (x, y) in ordered_pairs(&net) {
                    let on_network = space_c.exact_liquidity(x, y).unwrap();
                    let on_gadget = space_g
                        .exact_liquidity(gadget.satellite[x.0], gadget.satellite[y.0])
                        .unwrap();
                    assert_eq!(on_network, on_gadget, "instance {done} pair {x:?}->{y:?}");
                }
                done += 1;
            }
        },
    );
}

/// Every simple route from `from` to `to` along edges with a positive
/// residual in the direction of travel, capped at `limit` routes.
fn residual_routes(config: &Configuration, from: VertexId, to: VertexId, limit: usize) -> Vec<Route> {
    fn go(
        config: &Configuration,
        here: VertexId,
        to: VertexId,
        visited: &mut Vec<bool>,
        vertices: &mut Vec<VertexId>,
        edges: &mut Vec<usize>,
        out: &mut Vec<Route>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if here == to {
            out.push(Route {
                vertices: vertices.clone(),
                edges: edges.clone(),
            });
            return;
        }
        let incident: Vec<(usize, VertexId)> = config.network().incident(here).to_vec();
        for (edge_id, other) in incident {
            if visited[other.0] || config.residual(edge_id, here) == 0 {
                continue;
            }
            visited[other.0] = true;
            vertices.push(other);
            edges.push(edge_id);
            go(config, other, to, visited, vertices, edges, out, limit);
            edges.pop();
            vertices.pop();
            visited[other.0] = false;
        }
    }
    let mut visited = vec![false; config.network().vertex_count()];
    visited[from.0] = true;
    let mut out = Vec::new();
    go(
        config,
        from,
        to,
        &mut visited,
        &mut vec![from],
        &mut Vec::new(),
        &mut out,
        limit,
    );
    out
}

/// Partition refinement over the class graph: succeeds when every class ends
/// up alone in its block, i.e. some transaction sequence separates any two.
fn all_distinguishable(space: &ClassSpace) -> bool {
    let n = space.len();
    let pair_count = space.ordered_pairs().len();
    let mut block = vec![0usize; n];
    let mut blocks = 1usize;
    loop {
        let mut ids: BTreeMap<Vec<(bool, usize)>, usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut signature = Vec::with_capacity(pair_count + 1);
            signature.push((true, block[i]));
            for p in 0..pair_count {
                match space.transition(i, p) {
                    Some(j) => signature.push((true, block[j])),
                    None => signature.push((false, block[i])),
                }
            }
            let fresh = ids.len();
            next.push(*ids.entry(signature).or_insert(fresh));
        }
        let refined = ids.len();
        block = next;
        if refined == blocks {
            return blocks == n;
        }
        blocks = refined;
    }
}

#[test]
fn a10_chain_properties() {
    criterion(
        10,
        "routes never change the successor class, symmetric traffic mixes to uniform, and distinct classes are observably distinct",
        || {
            // (a) The successor score vector is route-independent.
            let mut rng = SimRng::new(0xACC10);
            let nets = [
                clique(4),
                cycle(4),
                star(&[2, 2, 2]),
                random_connected(&mut rng, 5, 4, 2),
            ];
            let mut comparisons = 0u64;
            let mut spins = 0u64;
            while comparisons < 10_000 {
                spins += 1;
                assert!(spins < 100_000, "route sampler stalled at {comparisons}");
                for net in &nets {
                    let config = random_configuration(&mut rng, net);
                    let n = net.vertex_count() as u64;
                    let x = VertexId(rng.below(n) as usize);
                    let y = VertexId(rng.below(n) as usize);
                    if x == y {
                        continue;
                    }
                    let routes = residual_routes(&config, x, y, 40);
                    if routes.len() < 2 {
                        continue;
                    }
                    let a = rng.below(routes.len() as u64) as usize;
                    let b = rng.below(routes.len() as u64) as usize;
                    if a == b {
                        continue;
                    }
                    let via_a = config.apply_payment(&routes[a], 1).unwrap().score_vector();
                    let via_b = config.apply_payment(&routes[b], 1).unwrap().score_vector();
                    assert_eq!(via_a, via_b, "routes {a} and {b} disagree on {x:?}->{y:?}");
                    comparisons += 1;
                }
            }

            // (b) Under uniform symmetric traffic the visit distribution over
            // classes approaches uniform.
            let mixing: Vec<(&str, ConstrainedNetwork)> = vec![
                ("unit K4", unconstrained_even(&clique(4))),
                ("unit C4", unconstrained_even(&cycle(4))),
                ("pinned star", pinned_star()),
            ];
            for (name, constrained) in mixing {
                let space = reachable_space(&constrained);
                assert!(space.len() <= 200, "{name} has {} classes", space.len());
                let traffic = TransactionDistribution::uniform_pairs(constrained.network()).unwrap();
                let params = SimParams {
                    steps: 1_000_000,
                    burn_in: 10_000,
                    seed: 0xACC1_0B,
                };
                let report = simulate(&constrained, &traffic, &params).unwrap();
                let tv = report.tv_distance_to_uniform(&space).unwrap();
                assert!(tv < TV_TOLERANCE, "{name}: total variation {tv}");
            }

            // (c) No two distinct reachable classes behave alike forever.
            let observable: Vec<(&str, ConstrainedNetwork)> = vec![
                (
                    "single edge",
                    unconstrained_even(&Arc::new(
                        CreditNetwork::with_default_labels(2, &[(0, 1, 3)]).unwrap(),
                    )),
                ),
                ("pinned path", pinned_path()),
                ("pinned star", pinned_star()),
                ("bridged star", bridged_star()),
                ("unit C4", unconstrained_even(&cycle(4))),
                ("unit K4", unconstrained_even(&clique(4))),
            ];
            for (name, constrained) in observable {
                let space = reachable_space(&constrained);
                assert!(space.len() <= 50, "{name} has {} classes", space.len());
                assert!(
                    all_distinguishable(&space),
                    "{name}: some classes are observationally equivalent"
                );
            }
        },
    );
}

#[test]
fn a11_monte_carlo_convergence() {
    criterion(
        11,
        "million-step simulation estimates land within 0.01 of exact liquidity on every pair",
        || {
            let instances: Vec<(&str, ConstrainedNetwork)> = vec![
                (
                    "single edge",
                    unconstrained_even(&Arc::new(
                        CreditNetwork::with_default_labels(2, &[(0, 1, 3)]).unwrap(),
                    )),
                ),
                ("pinned path", pinned_path()),
                ("pinned star", pinned_star()),
                ("unit C4", unconstrained_even(&cycle(4))),
                ("unit K4", unconstrained_even(&clique(4))),
            ];
            for (name, constrained) in &instances {
                let space = reachable_space(constrained);
                let traffic = TransactionDistribution::uniform_pairs(constrained.network()).unwrap();
                let params = SimParams {
                    steps: 1_000_000,
                    burn_in: 10_000,
                    seed: 0xACC11,
                };
                let report = simulate(constrained, &traffic, &params).unwrap();
                for &(x, y) in space.ordered_pairs() {
                    let exact = space.exact_liquidity(x, y).unwrap().to_f64().unwrap();
                    let estimate = report.estimate_liquidity(x, y).unwrap();
                    assert!(
                        (estimate - exact).abs() <= MC_TOLERANCE,
                        "{name} {x:?}->{y:?}: estimate {estimate} vs exact {exact}"
                    );
                }
            }

            // Same seed, same trajectory, same report.
            let constrained = pinned_path();
            let traffic = TransactionDistribution::uniform_pairs(constrained.network()).unwrap();
            let params = SimParams {
                steps: 50_000,
                burn_in: 1_000,
                seed: 7,
            };
            let first = simulate(&constrained, &traffic, &params).unwrap();
            let second = simulate(&constrained, &traffic, &params).unwrap();
            assert_eq!(first.to_csv(), second.to_csv(), "seeded runs must agree");
        },
    );
}

#[test]
fn a12_monotonicity_reports() {
    criterion(
        12,
        "the credit-addition experiment reports complete before/after ratios",
        || {
            // The pinned-star family: bridge the last two leaves with
            // capacities 0..=10 and report every ordered pair.
            let base = star(&[1, 1, 1, 1]);
            let mut pinned = ScoreSet::unconstrained(5);
            pinned.fix(VertexId(4), 2);
            for n in 0..=10u64 {
                let modification = Modification::AddEdge {
                    endpoints: (VertexId(2), VertexId(3)),
                    capacity: n,
                };
                let report =
                    monotonicity_experiment(&base, &pinned, &modification, CLASS_BUDGET).unwrap();
                assert_eq!(report.rows.len(), 20, "bridge capacity {n} row count");
                for row in &report.rows {
                    match &row.ratio {
                        Some(ratio) => assert_eq!(
                            &row.before * ratio,
                            row.after.clone(),
                            "bridge capacity {n}: ratio column must be after/before"
                        ),
                        None => assert_eq!(
                            row.before,
                            BigRational::from_integer(0.into()),
                            "bridge capacity {n}: only zero-liquidity pairs lack a ratio"
                        ),
                    }
                }
                let csv = report.to_csv();
                assert!(csv.starts_with("# modification:"), "report header");
                assert_eq!(csv.lines().count(), 23, "two comments, a header, twenty rows");
            }

            // Ten random graphs replaced by their reduced stars.
            let mut rng = SimRng::new(0xACC12);
            let mut done = 0;
            let mut attempts = 0;
            while done < 10 {
                attempts += 1;
                assert!(attempts < 500, "generator stalled after {done} instances");
                let Some((net, floor)) = random_expander(&mut rng) else {
                    continue;
                };
                let radii = admissible_radii(&mut rng, &net, floor);
                let unconstrained = ScoreSet::unconstrained(net.vertex_count());
                let modification = Modification::ReplaceWithStar { radii };
                let report =
                    monotonicity_experiment(&net, &unconstrained, &modification, CLASS_BUDGET)
                        .unwrap();
                let n = net.vertex_count();
                assert_eq!(report.rows.len(), n * (n - 1), "instance {done} row count");
                for row in &report.rows {
                    if let Some(ratio) = &row.ratio {
                        assert_eq!(&row.before * ratio, row.after.clone(), "instance {done}");
                    }
                }
                done += 1;
            }
        },
    );
}
