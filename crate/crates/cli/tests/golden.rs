//! End-to-end command tests pinning the exact output of every subcommand on
//! the small corpus networks, plus the documented exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/corpus")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn creditnet(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_creditnet"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn ok(args: &[&str]) -> Run {
    let run = creditnet(args);
    assert_eq!(run.code, 0, "command {args:?} failed: {}", run.stderr);
    run
}

#[test]
fn enumerate_prints_the_class_table() {
    let run = ok(&["enumerate", &corpus("single_edge.net")]);
    assert_eq!(run.stderr, "classes = 4\n");
    assert_eq!(
        run.stdout,
        "class,start,S_a,S_b,a->b,b->a\n\
         0,false,0,3,blocked,1\n\
         1,false,1,2,0,2\n\
         2,true,2,1,1,3\n\
         3,false,3,0,2,blocked\n"
    );
}

#[test]
fn liquidity_methods_agree_on_the_corpus() {
    let cases: &[(&str, &[&str], &str)] = &[
        ("single_edge.net", &["a", "b"], "3/4"),
        ("example1_star.net", &["a", "b"], "1/3"),
        ("example1_star.net", &["a", "b", "--method", "star"], "1/3"),
        ("example1_star.net", &["a", "b", "--method", "tree"], "1/3"),
        ("example1_star.net", &["a", "b", "--method", "treewidth"], "1/3"),
        ("example1_bridge.net", &["a", "b"], "3/10"),
        ("path22.net", &["a", "c"], "2/3"),
        ("path22.net", &["a", "c", "--method", "tree"], "2/3"),
        ("path22.net", &["a", "c", "--method", "treewidth"], "2/3"),
        ("k4.net", &["a", "b"], "12/19"),
        ("k4.net", &["a", "b", "--method", "treewidth"], "12/19"),
        ("c4.net", &["a", "b"], "8/15"),
        ("c4.net", &["a", "b", "--method", "treewidth"], "8/15"),
        ("c4.net", &["a", "c"], "2/5"),
        ("c4.net", &["a", "c", "--method", "treewidth"], "2/5"),
        ("k4_windows.net", &["a", "b"], "1/3"),
    ];
    for (file, rest, expected) in cases {
        let path = corpus(file);
        let mut args = vec!["liquidity", path.as_str()];
        args.extend_from_slice(rest);
        let run = ok(&args);
        assert_eq!(run.stdout, format!("{expected}\n"), "{file} {rest:?}");
    }
}

#[test]
fn monte_carlo_liquidity_is_seed_stable() {
    let path = corpus("path22.net");
    let args = [
        "liquidity", path.as_str(), "a", "c",
        "--method", "mc", "--steps", "40000", "--seed", "5",
    ];
    let first = ok(&args);
    assert_eq!(first.stdout, "0.656047\n");
    let second = ok(&args);
    assert_eq!(second.stdout, first.stdout);
}

#[test]
fn forests_reports_pair_counts() {
    let run = ok(&["forests", &corpus("k4.net")]);
    assert_eq!(
        run.stdout,
        "forests = 38\n\
         a b = 24/38\na c = 24/38\na d = 24/38\nb c = 24/38\nb d = 24/38\nc d = 24/38\n"
    );
    assert_eq!(run.stderr, "");
}

#[test]
fn expansion_reports_witness_and_interval() {
    let run = ok(&["expansion", &corpus("k5.net")]);
    assert_eq!(
        run.stdout,
        "h = 3/1\nwitness = {a, b}\nfloor = 3\nstar liquidity interval = [1/3, 3/4]\n"
    );
    let run = ok(&["expansion", &corpus("k4.net")]);
    assert_eq!(
        run.stdout,
        "h = 2/1\nwitness = {a, b}\nfloor = 2\nstar liquidity interval = [0/1, 2/3]\n"
    );
}

#[test]
fn reduce_emits_a_star_file_with_matching_liquidity() {
    let run = ok(&["reduce", &corpus("k5.net"), "--radius", "2"]);
    assert_eq!(
        run.stdout,
        "vertex a\nvertex b\nvertex c\nvertex d\nvertex e\nvertex center\n\
         edge a center 2\nedge b center 2\nedge c center 2\nedge d center 2\nedge e center 2\n\
         init a center 0\ninit b center 0\ninit c center 1\ninit d center 2\ninit e center 2\n\
         fixed center 5\n"
    );
    assert_eq!(
        run.stderr,
        "h = 3/1\n\
         window a = [1, 3], offset 1\n\
         window b = [1, 3], offset 1\n\
         window c = [1, 3], offset 1\n\
         window d = [1, 3], offset 1\n\
         window e = [1, 3], offset 1\n"
    );

    let dir = std::env::temp_dir().join(format!("creditnet-golden-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let star = dir.join("k5_star.net");
    fs::write(&star, &run.stdout).unwrap();
    let run = ok(&["liquidity", star.to_str().unwrap(), "a", "b", "--method", "star"]);
    assert_eq!(run.stdout, "26/51\n");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_reduction_passes_on_k4() {
    let run = ok(&["verify-reduction", &corpus("k4.net"), "--radius", "2"]);
    assert_eq!(
        run.stdout,
        "h = 2/1\nclasses = 6\nscore sets match = true\nmismatched pairs = 0\n"
    );
}

#[test]
fn gadget_compiles_node_caps_into_satellites() {
    let run = ok(&["gadget", &corpus("gadget_star.net")]);
    assert_eq!(
        run.stdout,
        "vertex a\nvertex b\nvertex hub\nvertex F(a)\nvertex F(b)\nvertex F(hub)\n\
         edge a hub 2\nedge b hub 2\n\
         edge a F(a) 1\nedge b F(b) 2\nedge hub F(hub) 4\n\
         init a hub 1\ninit b hub 1\n\
         init a F(a) 0\ninit b F(b) 1\ninit hub F(hub) 2\n"
    );
}

#[test]
fn simulate_is_deterministic_and_reports_diagnostics() {
    let path = corpus("path22.net");
    let args = ["simulate", path.as_str(), "--steps", "20000", "--seed", "3", "--tv"];
    let run = ok(&args);
    assert_eq!(
        run.stdout,
        "payer,payee,attempts,successes,no_route,predicate_blocked,success_rate,route_rate\n\
         a,b,3460,0,1222,2238,0.000000,0.646821\n\
         a,c,3303,2203,1100,0,0.666969,0.666969\n\
         b,a,3396,0,1058,2338,0.000000,0.688457\n\
         b,c,3329,0,1164,2165,0.000000,0.650345\n\
         c,a,3221,2202,1019,0,0.683639,0.683639\n\
         c,b,3291,0,1013,2278,0.000000,0.692191\n"
    );
    assert_eq!(
        run.stderr,
        "split-half divergence = 0.030220\ntotal variation vs uniform = 0.020283\n"
    );
    let again = ok(&args);
    assert_eq!(again.stdout, run.stdout);
}

#[test]
fn monotonicity_reports_the_bridge_decrease() {
    let run = ok(&[
        "monotonicity",
        &corpus("example1_star.net"),
        "--add-edge", "c", "d", "1",
    ]);
    assert_eq!(
        run.stdout,
        "# modification: add edge c-d capacity 1\n\
         # base edge expansion h = 1\n\
         payer,payee,before,after,ratio,decreased,below_star_floor\n\
         0,1,0,0,undefined,false,true\n\
         0,2,0,0,undefined,false,true\n\
         0,3,0,0,undefined,false,true\n\
         0,4,0,0,undefined,false,true\n\
         1,0,0,0,undefined,false,true\n\
         1,2,1/3,3/10,9/10,true,false\n\
         1,3,1/3,2/5,6/5,false,false\n\
         1,4,1/3,2/5,6/5,false,false\n\
         2,0,0,0,undefined,false,true\n\
         2,1,1/3,3/10,9/10,true,false\n\
         2,3,1/3,2/5,6/5,false,false\n\
         2,4,1/3,2/5,6/5,false,false\n\
         3,0,0,0,undefined,false,true\n\
         3,1,1/3,2/5,6/5,false,false\n\
         3,2,1/3,2/5,6/5,false,false\n\
         3,4,1/3,3/5,9/5,false,false\n\
         4,0,0,0,undefined,false,true\n\
         4,1,1/3,2/5,6/5,false,false\n\
         4,2,1/3,2/5,6/5,false,false\n\
         4,3,1/3,3/5,9/5,false,false\n"
    );
    assert_eq!(run.stderr, "some pairs lost liquidity\n");
}

#[test]
fn star_replacement_keeps_k4_liquidity() {
    let run = ok(&[
        "monotonicity",
        &corpus("k4.net"),
        "--star-radii", "2,2,2,2",
    ]);
    assert_eq!(
        run.stdout,
        "# modification: replace with star, center score 2\n\
         # base edge expansion h = 2\n\
         payer,payee,before,after,ratio,decreased,below_star_floor\n\
         0,1,1/3,1/3,1,false,false\n\
         0,2,1/3,1/3,1,false,false\n\
         0,3,1/3,1/3,1,false,false\n\
         1,0,1/3,1/3,1,false,false\n\
         1,2,1/3,1/3,1,false,false\n\
         1,3,1/3,1/3,1,false,false\n\
         2,0,1/3,1/3,1,false,false\n\
         2,1,1/3,1/3,1,false,false\n\
         2,3,1/3,1/3,1,false,false\n\
         3,0,1/3,1/3,1,false,false\n\
         3,1,1/3,1/3,1,false,false\n\
         3,2,1/3,1/3,1,false,false\n"
    );
    assert_eq!(run.stderr, "");
}

#[test]
fn failures_exit_with_the_documented_codes() {
    // Unknown vertex label: usage error.
    let run = creditnet(&["liquidity", &corpus("single_edge.net"), "a", "z"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("unknown vertex label"), "{}", run.stderr);

    // Exhausted enumeration budget: resource error.
    let run = creditnet(&["enumerate", &corpus("k4.net"), "--budget", "3"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("budget of 3 exhausted"), "{}", run.stderr);

    // The tree method refuses non-trees.
    let run = creditnet(&["liquidity", &corpus("k4.net"), "a", "b", "--method", "tree"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("network is not a tree"), "{}", run.stderr);

    // The star method refuses non-stars.
    let run = creditnet(&["liquidity", &corpus("k4.net"), "a", "b", "--method", "star"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("not a star"), "{}", run.stderr);

    // Unreadable input file.
    let run = creditnet(&["enumerate", "/nonexistent.net"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("cannot read"), "{}", run.stderr);
}
