//! Command-line frontend for credit network liquidity analysis.
//!
//! Exit codes: 0 on success, 1 when a computation exceeds its budget,
//! 2 for unreadable or invalid input.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use creditnet::classes::{
    count_forests, enumerate_reachable, DEFAULT_CLASS_BUDGET, DEFAULT_SUBSET_BUDGET,
};
use creditnet::dp::decomp::TreeDecomposition;
use creditnet::dp::star::star_liquidity;
use creditnet::dp::tree::tree_liquidity;
use creditnet::dp::treewidth::treewidth_liquidity;
use creditnet::dp::ScoreSet;
use creditnet::netfile::{parse_network, Constraint, NetworkFile};
use creditnet::reduction::{
    edge_expansion, expander_to_star, expansion_liquidity_interval, monotonicity_experiment,
    verify_reduction, Modification,
};
use creditnet::sim::{simulate, SimParams};
use creditnet::{build_gadget, Error, Result, VertexId};

#[derive(Parser)]
#[command(
    name = "creditnet",
    version,
    about = "Exact and simulated liquidity analysis for constrained credit networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every class reachable from the start configuration as CSV.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
    /// Exact or estimated liquidity of one ordered pair.
    Liquidity {
        file: PathBuf,
        payer: String,
        payee: String,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
        /// Measured steps (mc method).
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Unmeasured steps walked first (mc method).
        #[arg(long, default_value_t = 1_000)]
        burnin: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Count forests of the multigraph expansion. The total equals the
    /// number of unconstrained classes; each pair's connected fraction is
    /// its unconstrained liquidity.
    Forests {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// Edge expansion of the network with its minimizing vertex set.
    Expansion {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
    /// Compile a windowed well-connected network into an equivalent star,
    /// emitted as a network file.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        radii: RadiiArgs,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
    /// Exhaustively check a reduction: translated score sets and every
    /// ordered pair's exact liquidity.
    VerifyReduction {
        file: PathBuf,
        #[command(flatten)]
        radii: RadiiArgs,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
    /// Compile per-vertex score caps into satellite vertices, emitted as
    /// an unconstrained network file.
    Gadget { file: PathBuf },
    /// Run the payment chain and report per-pair counters as CSV.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 1_000)]
        burnin: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also report the total variation distance between the empirical
        /// class distribution and uniform.
        #[arg(long)]
        tv: bool,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
    /// Before/after liquidity of every ordered pair under a modification.
    Monotonicity {
        file: PathBuf,
        /// Add one edge: two labels and a capacity.
        #[arg(long, num_args = 3, value_names = ["A", "B", "CAPACITY"])]
        add_edge: Option<Vec<String>>,
        /// Replace the network by its reduced star with these radii.
        #[arg(long, value_delimiter = ',', conflicts_with = "add_edge")]
        star_radii: Option<Vec<u64>>,
        #[arg(long, default_value_t = DEFAULT_CLASS_BUDGET)]
        budget: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Enumerate classes reachable from the start configuration.
    Exact,
    /// Subtree convolution; the network must be a tree.
    Tree,
    /// Dynamic programming over a tree decomposition.
    Treewidth,
    /// Closed form; the network must be a star with a fixed hub score.
    Star,
    /// Markov-chain estimate from seeded payment traffic.
    Mc,
}

#[derive(Args)]
struct RadiiArgs {
    /// Per-vertex score radii, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "radius")]
    radii: Option<Vec<u64>>,
    /// One radius applied to every vertex.
    #[arg(long)]
    radius: Option<u64>,
}

impl RadiiArgs {
    fn resolve(&self, vertex_count: usize) -> Result<Vec<u64>> {
        match (&self.radii, self.radius) {
            (Some(r), None) => Ok(r.clone()),
            (None, Some(r)) => Ok(vec![r; vertex_count]),
            (None, None) => Err(Error::InvalidParams(
                "provide --radius or --radii".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap rejects conflicting radii flags"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load(path: &Path) -> Result<NetworkFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text)
}

fn vertex(file: &NetworkFile, label: &str) -> Result<VertexId> {
    file.network
        .vertex_by_label(label)
        .ok_or_else(|| Error::InvalidParams(format!("unknown vertex label {label:?}")))
}

/// Always prints the denominator, so whole numbers stay recognizable as
/// exact rationals.
fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn fmt_witness(file: &NetworkFile, witness: &[VertexId]) -> String {
    let labels: Vec<&str> = witness.iter().map(|&v| file.network.label(v)).collect();
    format!("{{{}}}", labels.join(", "))
}

/// The file's constraints as per-vertex admitted score sets. Repeated
/// statements about one vertex intersect.
fn score_windows(file: &NetworkFile) -> Result<ScoreSet> {
    let n = file.network.vertex_count();
    let mut sets: Vec<Option<BTreeSet<u64>>> = vec![None; n];
    for c in &file.constraints {
        let (v, set): (VertexId, BTreeSet<u64>) = match c {
            Constraint::Bound { v, lo, hi } => (*v, (*lo..=*hi).collect()),
            Constraint::Fixed { v, score } => (*v, BTreeSet::from([*score])),
            Constraint::Group { .. } => {
                return Err(Error::InvalidParams(
                    "this method supports per-vertex score bounds only".into(),
                ))
            }
        };
        match &mut sets[v.0] {
            None => sets[v.0] = Some(set),
            Some(prev) => *prev = prev.intersection(&set).copied().collect(),
        }
    }
    let mut scores = ScoreSet::unconstrained(n);
    for (v, set) in sets.into_iter().enumerate() {
        if let Some(set) = set {
            scores.restrict(VertexId(v), set);
        }
    }
    Ok(scores)
}

/// Splits a star-shaped network into its hub and leaf capacities.
/// `exclude` names vertices that must end up as leaves.
fn star_shape(
    file: &NetworkFile,
    exclude: &[VertexId],
) -> Result<(VertexId, Vec<VertexId>, Vec<u64>)> {
    let net = &file.network;
    if net.edge_count() == 0 {
        return Err(Error::InvalidParams("network has no edges".into()));
    }
    let hub = net
        .vertices()
        .find(|&v| {
            !exclude.contains(&v) && net.edges().iter().all(|e| e.lo == v || e.hi == v)
        })
        .ok_or_else(|| {
            Error::InvalidParams(
                "network is not a star with the chosen vertices as leaves".into(),
            )
        })?;
    let mut leaves = Vec::new();
    let mut caps = Vec::new();
    for v in net.vertices().filter(|&v| v != hub) {
        let incident = net.incident(v);
        if incident.len() != 1 {
            return Err(Error::InvalidParams(format!(
                "leaf {} must have exactly one edge to the hub",
                net.label(v)
            )));
        }
        leaves.push(v);
        caps.push(net.edge(incident[0].0).capacity);
    }
    Ok((hub, leaves, caps))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Enumerate { file, budget } => {
            let file = load(&file)?;
            let constrained = file.constrained()?;
            let space = enumerate_reachable(&constrained, &file.transacting_pairs(), budget)?;
            eprintln!("classes = {}", space.len());
            print!("{}", space.to_csv());
            Ok(())
        }
        Command::Liquidity {
            file,
            payer,
            payee,
            method,
            budget,
            steps,
            burnin,
            seed,
        } => {
            let file = load(&file)?;
            let x = vertex(&file, &payer)?;
            let y = vertex(&file, &payee)?;
            if x == y {
                return Err(Error::InvalidParams("payer equals payee".into()));
            }
            match method {
                Method::Exact => {
                    let constrained = file.constrained()?;
                    let space =
                        enumerate_reachable(&constrained, &file.transacting_pairs(), budget)?;
                    println!("{}", fmt_rational(&space.exact_liquidity(x, y)?));
                }
                Method::Tree => {
                    let scores = score_windows(&file)?;
                    let l = tree_liquidity(&file.network, &scores, x, y)?;
                    println!("{}", fmt_rational(&l));
                }
                Method::Treewidth => {
                    let scores = score_windows(&file)?;
                    let decomp = match &file.decomposition {
                        Some(d) => d.clone(),
                        None => TreeDecomposition::min_degree(&file.network),
                    };
                    let l = treewidth_liquidity(&file.network, &decomp, &scores, x, y, budget)?;
                    println!("{}", fmt_rational(&l));
                }
                Method::Star => {
                    let (hub, leaves, caps) = star_shape(&file, &[x, y])?;
                    let hub_score = file.start.score_vector().get(hub);
                    for c in &file.constraints {
                        let ok = matches!(
                            c,
                            Constraint::Fixed { v, score } if *v == hub && *score == hub_score
                        );
                        if !ok {
                            return Err(Error::InvalidParams(
                                "the star closed form supports only a fixed hub score \
                                 matching the start configuration"
                                    .into(),
                            ));
                        }
                    }
                    let pos = |v: VertexId| {
                        leaves
                            .iter()
                            .position(|&l| l == v)
                            .expect("endpoints are leaves")
                    };
                    let l = star_liquidity(&caps, hub_score, pos(x), pos(y))?;
                    println!("{}", fmt_rational(&l));
                }
                Method::Mc => {
                    let constrained = file.constrained()?;
                    let traffic = file.traffic()?;
                    let params = SimParams {
                        steps,
                        burn_in: burnin,
                        seed,
                    };
                    let report = simulate(&constrained, &traffic, &params)?;
                    println!("{:.6}", report.estimate_liquidity(x, y)?);
                }
            }
            Ok(())
        }
        Command::Forests { file, budget } => {
            let file = load(&file)?;
            let forests = count_forests(&file.network, budget)?;
            println!("forests = {}", forests.total);
            let net = &file.network;
            for a in net.vertices() {
                for b in net.vertices() {
                    if a < b {
                        println!(
                            "{} {} = {}/{}",
                            net.label(a),
                            net.label(b),
                            forests.joining(a, b)?,
                            forests.total
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Expansion { file, budget } => {
            let file = load(&file)?;
            let report = edge_expansion(&file.network, budget)?;
            println!("h = {}", fmt_rational(&report.h));
            println!("witness = {}", fmt_witness(&file, &report.witness));
            let floor = report.floor();
            println!("floor = {floor}");
            if floor >= 1 {
                let (lo, hi) = expansion_liquidity_interval(floor)?;
                println!(
                    "star liquidity interval = [{}, {}]",
                    fmt_rational(&lo),
                    fmt_rational(&hi)
                );
            }
            Ok(())
        }
        Command::Reduce {
            file,
            radii,
            budget,
        } => {
            let file = load(&file)?;
            let radii = radii.resolve(file.network.vertex_count())?;
            let spec = expander_to_star(&file.network, &radii, budget)?;
            eprintln!("h = {}", fmt_rational(&spec.h));
            for v in file.network.vertices() {
                let (lo, hi) = spec.windows[v.0];
                eprintln!(
                    "window {} = [{lo}, {hi}], offset {}",
                    file.network.label(v),
                    spec.offsets[v.0]
                );
            }
            let star_file = NetworkFile {
                network: Arc::clone(&spec.star),
                start: spec.star_start(),
                constraints: vec![Constraint::Fixed {
                    v: spec.center,
                    score: spec.center_score,
                }],
                pairs: Vec::new(),
                decomposition: None,
            };
            print!("{}", star_file.serialize());
            Ok(())
        }
        Command::VerifyReduction {
            file,
            radii,
            budget,
        } => {
            let file = load(&file)?;
            let radii = radii.resolve(file.network.vertex_count())?;
            let spec = expander_to_star(&file.network, &radii, budget)?;
            let report = verify_reduction(&file.network, &spec, budget)?;
            println!("h = {}", fmt_rational(&spec.h));
            println!("classes = {}", report.class_count);
            println!("score sets match = {}", report.score_sets_match);
            println!("mismatched pairs = {}", report.mismatched_pairs.len());
            for &(a, b) in &report.mismatched_pairs {
                println!(
                    "mismatch: {} -> {}",
                    file.network.label(a),
                    file.network.label(b)
                );
            }
            Ok(())
        }
        Command::Gadget { file } => {
            let file = load(&file)?;
            let net = &file.network;
            let mut caps: Vec<u64> = net.vertices().map(|v| net.degree(v)).collect();
            for c in &file.constraints {
                match c {
                    Constraint::Bound { v, lo: 0, hi } => caps[v.0] = caps[v.0].min(*hi),
                    _ => {
                        return Err(Error::InvalidParams(
                            "gadget expansion supports only caps: bound lines with a \
                             low end of zero"
                                .into(),
                        ))
                    }
                }
            }
            let gadget = build_gadget(net, &caps, &file.start)?;
            for v in net.vertices() {
                eprintln!(
                    "satellite of {} = {}, cap {}",
                    net.label(v),
                    gadget.network.label(gadget.satellite[v.0]),
                    caps[v.0]
                );
            }
            let expanded = NetworkFile {
                network: Arc::clone(&gadget.network),
                start: gadget.start.clone(),
                constraints: Vec::new(),
                pairs: Vec::new(),
                decomposition: None,
            };
            print!("{}", expanded.serialize());
            Ok(())
        }
        Command::Simulate {
            file,
            steps,
            burnin,
            seed,
            tv,
            budget,
        } => {
            let file = load(&file)?;
            let constrained = file.constrained()?;
            let traffic = file.traffic()?;
            let params = SimParams {
                steps,
                burn_in: burnin,
                seed,
            };
            let report = simulate(&constrained, &traffic, &params)?;
            print!("{}", report.to_csv());
            eprintln!("split-half divergence = {:.6}", report.split_half_divergence());
            if tv {
                let space =
                    enumerate_reachable(&constrained, &file.transacting_pairs(), budget)?;
                eprintln!(
                    "total variation vs uniform = {:.6}",
                    report.tv_distance_to_uniform(&space)?
                );
            }
            Ok(())
        }
        Command::Monotonicity {
            file,
            add_edge,
            star_radii,
            budget,
        } => {
            let file = load(&file)?;
            let modification = match (add_edge, star_radii) {
                (Some(args), None) => {
                    let [a, b, cap] = &args[..] else {
                        return Err(Error::InvalidParams(
                            "--add-edge takes two labels and a capacity".into(),
                        ));
                    };
                    let capacity = cap.parse().map_err(|_| {
                        Error::InvalidParams(format!("bad capacity {cap:?}"))
                    })?;
                    Modification::AddEdge {
                        endpoints: (vertex(&file, a)?, vertex(&file, b)?),
                        capacity,
                    }
                }
                (None, Some(radii)) => Modification::ReplaceWithStar { radii },
                (None, None) => {
                    return Err(Error::InvalidParams(
                        "provide --add-edge or --star-radii".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap rejects conflicting modifications"),
            };
            let scores = score_windows(&file)?;
            let report =
                monotonicity_experiment(&file.network, &scores, &modification, budget)?;
            print!("{}", report.to_csv());
            if report.any_decreased() {
                eprintln!("some pairs lost liquidity");
            }
            Ok(())
        }
    }
}
