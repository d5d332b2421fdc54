use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vconn"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("spawn vconn");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vconn-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const PATH4: &str = "4 3\n0 1\n1 2\n2 3\n";
const STAR5: &str = "5 4\n0 1\n0 2\n0 3\n0 4\n";

#[test]
fn build_and_query_path() {
    let dir = workdir("path");
    let graph = dir.join("path.txt");
    fs::write(&graph, PATH4).unwrap();
    let oracle = dir.join("path.vco");
    let (code, out, _) = run(&["build", graph.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("n=4 m=3 k=2"), "{out}");
    let (code, out, _) = run(&["query", oracle.to_str().unwrap(), "0", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "vconn(0,3) = 1");
}

#[test]
fn exit_code_contract() {
    let dir = workdir("codes");
    let graph = dir.join("g.txt");
    fs::write(&graph, PATH4).unwrap();
    let bad = dir.join("bad.txt");
    fs::write(&bad, "4 2\n0 nope\n").unwrap();

    let (code, _, _) = run(&["build", graph.to_str().unwrap(), "--k", "0"]);
    assert_eq!(code, 1);
    let (code, _, err) = run(&["build", bad.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("line 2") || err.contains(":2"), "{err}");

    let oracle = dir.join("g.vco");
    let (code, _, _) = run(&["build", graph.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["query", oracle.to_str().unwrap(), "0", "0"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["query", oracle.to_str().unwrap(), "0", "99"]);
    assert_eq!(code, 1);
    // cut requested from an oracle built without --store-cuts
    let (code, _, _) = run(&["query", oracle.to_str().unwrap(), "0", "3", "--cut"]);
    assert_eq!(code, 1);
    // unknown flag is a usage error
    let (code, _, _) = run(&["build", graph.to_str().unwrap(), "--bogus"]);
    assert_eq!(code, 1);
}

#[test]
fn query_with_cut() {
    let dir = workdir("cut");
    let graph = dir.join("g.txt");
    fs::write(&graph, PATH4).unwrap();
    let oracle = dir.join("g.vco");
    let (code, _, _) = run(&["build", graph.to_str().unwrap(), "--k", "2", "--store-cuts"]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["query", oracle.to_str().unwrap(), "0", "3", "--cut"]);
    assert_eq!(code, 0);
    assert!(out.contains("vconn(0,3) = 1"), "{out}");
    assert!(out.contains("cut:"), "{out}");
}

#[test]
fn batch_query_stable_order() {
    let dir = workdir("batch");
    let graph = dir.join("g.txt");
    fs::write(&graph, PATH4).unwrap();
    let oracle = dir.join("g.vco");
    run(&["build", graph.to_str().unwrap(), "--k", "3"]);
    let pairs = dir.join("pairs.txt");
    fs::write(&pairs, "0 3\n1 2\n# comment\n0 1\n").unwrap();
    let (code, out, _) = run(&["batch-query", oracle.to_str().unwrap(), pairs.to_str().unwrap()]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "vconn(0,3) = 1");
    assert_eq!(lines[1], "vconn(1,2) = 1");
    assert_eq!(lines[2], "vconn(0,1) = 1");
}

#[test]
fn ghtree_star_and_verify() {
    let dir = workdir("ghtree");
    let graph = dir.join("star.txt");
    fs::write(&graph, STAR5).unwrap();
    let terms = dir.join("leaves.txt");
    fs::write(&terms, "1 2 3 4\n").unwrap();
    let tree = dir.join("star.tree");
    let (code, _, err) = run(&[
        "ghtree",
        graph.to_str().unwrap(),
        "--terminals",
        terms.to_str().unwrap(),
        "--k",
        "5",
        "--out",
        tree.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&tree).unwrap();
    // every leaf pair separates at the single center vertex
    assert!(text.lines().filter(|l| l.ends_with(" 1") && l.split_whitespace().count() == 3).count() >= 3, "{text}");

    let (code, out, _) = run(&["verify", graph.to_str().unwrap(), tree.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");

    // tamper with the first weight-1 edge
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let idx = lines
        .iter()
        .position(|l| l.split_whitespace().count() == 3 && l.ends_with(" 1") && !l.starts_with("mode"))
        .unwrap();
    lines[idx] = format!("{} 3", lines[idx].rsplit_once(' ').unwrap().0);
    fs::write(&tree, lines.join("\n") + "\n").unwrap();
    let (code, _, err) = run(&["verify", graph.to_str().unwrap(), tree.to_str().unwrap()]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("verification failed"), "{err}");
}

#[test]
fn ghtree_requires_exactly_one_mode() {
    let dir = workdir("mode");
    let graph = dir.join("g.txt");
    fs::write(&graph, PATH4).unwrap();
    let (code, _, _) = run(&["ghtree", graph.to_str().unwrap(), "--terminals", "all"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&[
        "ghtree", graph.to_str().unwrap(), "--terminals", "all", "--k", "2", "--eps", "0.5",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn deterministic_across_threads() {
    let dir = workdir("det");
    let graph = dir.join("g.txt");
    let mut text = String::from("30 60\n");
    let mut state = 12345u64;
    let mut edges = std::collections::BTreeSet::new();
    while edges.len() < 60 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = (state >> 33) as usize % 30;
        let v = (state >> 13) as usize % 30;
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    for (u, v) in &edges {
        text += &format!("{u} {v}\n");
    }
    fs::write(&graph, text).unwrap();
    let (o1, o2) = (dir.join("a.vco"), dir.join("b.vco"));
    let (code, _, err) = run(&[
        "build", graph.to_str().unwrap(), "--k", "3", "--seed", "9",
        "--threads", "1", "--out", o1.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&[
        "build", graph.to_str().unwrap(), "--k", "3", "--seed", "9",
        "--threads", "4", "--out", o2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read(&o1).unwrap(), fs::read(&o2).unwrap());
}

#[test]
fn json_output_parses() {
    let dir = workdir("json");
    let graph = dir.join("g.txt");
    fs::write(&graph, PATH4).unwrap();
    let oracle = dir.join("g.vco");
    let (code, out, _) = run(&["--json", "build", graph.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 4);
    let (code, out, _) = run(&["--json", "query", oracle.to_str().unwrap(), "0", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["vconn"], 1);
}

#[test]
fn lb_modes_and_guards() {
    let (code, out, _) = run(&[
        "lb", "--n", "12", "--c", "320", "--r", "10", "--count", "2", "--mode", "cthresh",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("decoded 2/2"), "{out}");

    // kappa mode is gated to small n
    let (code, _, err) = run(&["lb", "--n", "48", "--mode", "kappa"]);
    assert_eq!(code, 1);
    assert!(err.contains("32"), "{err}");

    // the default c is too small for the eligibility step; honest build error
    let (code, _, err) = run(&["lb", "--n", "24", "--count", "1"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("eligibility"), "{err}");
}

#[test]
fn bench_emits_csv() {
    let dir = workdir("bench");
    let cfg = dir.join("bench.toml");
    fs::write(&cfg, "seed = 3\nqueries = 50\n\n[[case]]\nn = 16\np = 0.3\nk = 2\n\n[[case]]\nn = 20\np = 0.2\nk = 3\n").unwrap();
    let (code, out, err) = run(&["bench", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,m,k,build_ms,bytes,avg_query_ns,trees_built");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("16,"));
    assert!(lines[2].starts_with("20,"));

    let (code, _, _) = run(&["bench", dir.join("missing.toml").to_str().unwrap()]);
    assert_eq!(code, 3);
}
