//! vconn: build and query k-vertex-connectivity oracles, construct and
//! verify element-connectivity Gomory-Hu trees, run the lower-bound gadget
//! experiment, and benchmark build/query performance.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use vconn_core::ghtree::{approx_gh_tree, k_gh_tree, tree_from_text, tree_to_text, verify_gh_tree, GhConfig};
use vconn_core::graph::{parse_edge_list, random_gnp, Graph};
use vconn_core::lb;
use vconn_core::oracle::{build_oracle, OracleOpts, VConnOracle, VCutAnswer};
use vconn_core::{Error, Vertex};

/// exit codes: 1 usage/validation, 2 parse, 3 build or I/O, 4 verification
struct Failure {
    code: u8,
    msg: String,
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

fn from_core(e: Error) -> Failure {
    let code = match &e {
        Error::InvalidArgument(_) | Error::InvalidState(_) => 1,
        Error::Parse { .. } | Error::Format(_) => 2,
        Error::Build(_) | Error::Io(_) => 3,
    };
    Failure { code, msg: e.to_string() }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure { code: 3, msg: format!("{}: {e}", path.display()) })
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    parse_edge_list(&read_file(path)?)
        .map_err(|e| Failure { code: 2, msg: format!("{}: {e}", path.display()) })
}

#[derive(Parser)]
#[command(name = "vconn", version, about = "k-vertex-connectivity oracles")]
struct Cli {
    /// emit machine-readable JSON summaries instead of plain text
    #[arg(long, global = true)]
    json: bool,
    /// worker threads for parallel builds (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an oracle from an edge-list graph file
    Build {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// store witness cuts (disables sparsification)
        #[arg(long)]
        store_cuts: bool,
        #[arg(long)]
        no_sparsify: bool,
        /// output path (default: graph file with .vco extension)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query min{kappa(u,v), k} from an oracle file
    Query {
        oracle: PathBuf,
        u: Vertex,
        v: Vertex,
        /// also print a witness cut (requires an oracle built with --store-cuts)
        #[arg(long)]
        cut: bool,
    },
    /// Query every "u v" pair listed in a file, in file order
    BatchQuery { oracle: PathBuf, pairs: PathBuf },
    /// Build a Gomory-Hu tree for element connectivity over a terminal set
    Ghtree {
        graph: PathBuf,
        /// terminals: a file of vertex ids, or "all"
        #[arg(long)]
        terminals: String,
        /// k-bounded tree (exact below k)
        #[arg(long)]
        k: Option<usize>,
        /// (1+eps)-approximate tree
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a tree file against its graph; exits 4 on the first violation
    Verify { graph: PathBuf, tree: PathBuf },
    /// Run the space lower-bound gadget experiment
    Lb {
        /// codeword dimension, a multiple of 6 in [12, 64]
        #[arg(long, default_value_t = 24)]
        n: usize,
        /// width multiplier of the inner matrix B (cn rows)
        #[arg(long, default_value_t = 8)]
        c: usize,
        /// random ones per row of A (default: ceil(c*log2(n)))
        #[arg(long)]
        r: Option<usize>,
        /// codebook size
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// decode from vertex connectivities (kappa, n <= 32) or from the
        /// product matrix threshold (cthresh)
        #[arg(long, value_enum, default_value_t = ModeArg::Cthresh)]
        mode: ModeArg,
    },
    /// Run a build/query benchmark sweep from a TOML config, emitting CSV
    Bench { config: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Kappa,
    Cthresh,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("--threads must be >= 1");
            return ExitCode::from(1);
        }
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("thread pool already initialized");
            return ExitCode::from(1);
        }
    }
    let json = cli.json;
    let r = match cli.cmd {
        Cmd::Build { graph, k, seed, store_cuts, no_sparsify, out } => {
            cmd_build(&graph, k, seed, store_cuts, no_sparsify, out.as_deref(), json)
        }
        Cmd::Query { oracle, u, v, cut } => cmd_query(&oracle, u, v, cut, json),
        Cmd::BatchQuery { oracle, pairs } => cmd_batch_query(&oracle, &pairs),
        Cmd::Ghtree { graph, terminals, k, eps, seed, out } => {
            cmd_ghtree(&graph, &terminals, k, eps, seed, out.as_deref())
        }
        Cmd::Verify { graph, tree } => cmd_verify(&graph, &tree),
        Cmd::Lb { n, c, r, count, seed, mode } => cmd_lb(n, c, r, count, seed, mode, json),
        Cmd::Bench { config } => cmd_bench(&config),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_build(
    graph: &Path,
    k: usize,
    seed: u64,
    store_cuts: bool,
    no_sparsify: bool,
    out: Option<&Path>,
    json: bool,
) -> CmdResult {
    if k < 1 {
        return Err(usage("--k must be >= 1"));
    }
    let g = read_graph(graph)?;
    let opts = OracleOpts {
        store_cuts,
        sparsify_first: !no_sparsify,
        ..OracleOpts::default()
    };
    let start = Instant::now();
    let oracle = build_oracle(&g, k, seed, &opts).map_err(from_core)?;
    let bytes = oracle.serialize();
    let build_ms = start.elapsed().as_millis();
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| graph.with_extension("vco"));
    fs::write(&out_path, &bytes)
        .map_err(|e| Failure { code: 3, msg: format!("{}: {e}", out_path.display()) })?;
    if json {
        println!(
            "{}",
            json!({
                "n": g.n(), "m": g.m(), "k": k, "sets": oracle.set_count(),
                "trees": oracle.tree_count(), "bytes": bytes.len(),
                "build_ms": build_ms, "out": out_path.display().to_string(),
            })
        );
    } else {
        println!(
            "n={} m={} k={k} sets={} trees={} bytes={} build_ms={build_ms} out={}",
            g.n(),
            g.m(),
            oracle.set_count(),
            oracle.tree_count(),
            bytes.len(),
            out_path.display()
        );
    }
    Ok(())
}

fn load_oracle(path: &Path) -> Result<VConnOracle, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure { code: 3, msg: format!("{}: {e}", path.display()) })?;
    VConnOracle::deserialize(&bytes)
        .map_err(|e| Failure { code: 2, msg: format!("{}: {e}", path.display()) })
}

fn cmd_query(path: &Path, u: Vertex, v: Vertex, cut: bool, json: bool) -> CmdResult {
    let oracle = load_oracle(path)?;
    let ans = oracle.vconn(u, v).map_err(from_core)?;
    let cut_desc = if cut {
        Some(match oracle.vcut(u, v).map_err(from_core)? {
            VCutAnswer::AtLeastK => (None, None),
            VCutAnswer::Cut(c) => (
                Some(c.vertices.iter().copied().collect::<Vec<_>>()),
                Some(c.edges.iter().copied().collect::<Vec<_>>()),
            ),
        })
    } else {
        None
    };
    if json {
        let cut_json = cut_desc.as_ref().map(|(vs, es)| match vs {
            None => json!(">=k"),
            Some(vs) => json!({"vertices": vs, "edges": es}),
        });
        println!("{}", json!({"u": u, "v": v, "vconn": ans, "cut": cut_json}));
    } else {
        println!("vconn({u},{v}) = {ans}");
        if let Some((vs, es)) = cut_desc {
            match vs {
                None => println!("cut: >=k"),
                Some(vs) => println!("cut: vertices {vs:?} edges {:?}", es.unwrap()),
            }
        }
    }
    Ok(())
}

fn cmd_batch_query(path: &Path, pairs: &Path) -> CmdResult {
    let oracle = load_oracle(path)?;
    let text = read_file(pairs)?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<Vertex, Failure> {
            s.and_then(|x| x.parse().ok()).ok_or(Failure {
                code: 2,
                msg: format!("{}:{}: expected \"u v\"", pairs.display(), idx + 1),
            })
        };
        let (u, v) = (parse(it.next())?, parse(it.next())?);
        let ans = oracle.vconn(u, v).map_err(from_core)?;
        println!("vconn({u},{v}) = {ans}");
    }
    Ok(())
}

fn parse_terminals(spec: &str, g: &Graph) -> Result<BTreeSet<Vertex>, Failure> {
    if spec == "all" {
        return Ok((0..g.n()).collect());
    }
    let text = read_file(Path::new(spec))?;
    let mut set = BTreeSet::new();
    for tok in text.split_whitespace() {
        let v: Vertex = tok
            .parse()
            .map_err(|_| Failure { code: 2, msg: format!("{spec}: bad terminal id {tok:?}") })?;
        if v >= g.n() {
            return Err(usage(format!("terminal {v} out of range (n = {})", g.n())));
        }
        set.insert(v);
    }
    Ok(set)
}

fn cmd_ghtree(
    graph: &Path,
    terminals: &str,
    k: Option<usize>,
    eps: Option<f64>,
    seed: u64,
    out: Option<&Path>,
) -> CmdResult {
    let g = read_graph(graph)?;
    let u_set = parse_terminals(terminals, &g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GhConfig::default();
    let (tree, _) = match (k, eps) {
        (Some(k), None) => k_gh_tree(&g, &u_set, k, &cfg, &mut rng).map_err(from_core)?,
        (None, Some(eps)) => {
            approx_gh_tree(&g, &u_set, &BTreeSet::new(), eps, &cfg, &mut rng).map_err(from_core)?
        }
        _ => return Err(usage("exactly one of --k or --eps is required")),
    };
    let text = tree_to_text(&tree);
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure { code: 3, msg: format!("{}: {e}", p.display()) })?,
        None => print!("{text}"),
    }
    eprintln!("tree: {} nodes, {} edges, {} terminals", tree.nodes, tree.edges.len(), tree.f.len());
    Ok(())
}

fn cmd_verify(graph: &Path, tree_path: &Path) -> CmdResult {
    let g = read_graph(graph)?;
    let tree = tree_from_text(&read_file(tree_path)?)
        .map_err(|e| Failure { code: 2, msg: format!("{}: {e}", tree_path.display()) })?;
    let u_set: BTreeSet<Vertex> = tree.f.keys().copied().collect();
    let violations = verify_gh_tree(&g, &u_set, &tree);
    if violations.is_empty() {
        println!("ok: {} terminals verified", u_set.len());
        Ok(())
    } else {
        Err(Failure { code: 4, msg: format!("verification failed: {}", violations[0]) })
    }
}

fn cmd_lb(
    n: usize,
    c: usize,
    r: Option<usize>,
    count: usize,
    seed: u64,
    mode: ModeArg,
    json: bool,
) -> CmdResult {
    if mode == ModeArg::Kappa && n > 32 {
        return Err(usage("kappa mode computes all-pairs max flows; the limit is n <= 32"));
    }
    let r = r.unwrap_or_else(|| (c as f64 * (n as f64).log2()).ceil() as usize);
    let lb_mode = match mode {
        ModeArg::Kappa => lb::LbMode::Kappa,
        ModeArg::Cthresh => lb::LbMode::CThresh,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let cb = lb::build_codebook(n, count, &mut rng).map_err(from_core)?;
    let mut reports = Vec::with_capacity(count);
    for i in 0..count {
        reports.push(lb::decode_roundtrip(&cb, i, c, r, lb_mode, &mut rng).map_err(from_core)?);
    }
    let successes = reports.iter().filter(|r| r.success).count();
    let total_ms = start.elapsed().as_millis();
    if json {
        println!(
            "{}",
            json!({
                "n": n, "c": c, "r": r, "count": count,
                "mode": if mode == ModeArg::Kappa { "kappa" } else { "cthresh" },
                "distances": reports.iter().map(|r| r.distance_to_original).collect::<Vec<_>>(),
                "decode_radius": n * n / 6,
                "decoded": reports.iter().map(|r| r.decoded_index).collect::<Vec<_>>(),
                "successes": successes, "total_ms": total_ms,
            })
        );
    } else {
        println!("lb experiment: n={n} c={c} r={r} count={count}");
        for rep in &reports {
            println!(
                "word {}: distance {} (radius {}), decoded {} -> {}",
                rep.index,
                rep.distance_to_original,
                rep.decode_radius,
                rep.decoded_index,
                if rep.success { "ok" } else { "FAIL" }
            );
        }
        println!("decoded {successes}/{count} in {total_ms} ms");
    }
    Ok(())
}

fn toml_usize(t: &toml::Table, key: &str, what: &str) -> Result<usize, Failure> {
    t.get(key)
        .and_then(|v| v.as_integer())
        .filter(|&v| v >= 0)
        .map(|v| v as usize)
        .ok_or(Failure { code: 2, msg: format!("bench config: {what} needs integer `{key}`") })
}

fn cmd_bench(config: &Path) -> CmdResult {
    let table: toml::Table = read_file(config)?
        .parse()
        .map_err(|e| Failure { code: 2, msg: format!("{}: {e}", config.display()) })?;
    let seed = table.get("seed").and_then(|v| v.as_integer()).unwrap_or(0) as u64;
    let queries = table
        .get("queries")
        .and_then(|v| v.as_integer())
        .unwrap_or(1000)
        .max(1) as usize;
    let cases = table
        .get("case")
        .and_then(|v| v.as_array())
        .ok_or(Failure { code: 2, msg: "bench config: need at least one [[case]]".into() })?;
    println!("n,m,k,build_ms,bytes,avg_query_ns,trees_built");
    for (idx, case) in cases.iter().enumerate() {
        let case = case
            .as_table()
            .ok_or(Failure { code: 2, msg: format!("bench config: case {idx} is not a table") })?;
        let n = toml_usize(case, "n", &format!("case {idx}"))?;
        let k = toml_usize(case, "k", &format!("case {idx}"))?;
        let p = case.get("p").and_then(|v| v.as_float()).unwrap_or(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ idx as u64);
        let g = random_gnp(n, p, &mut rng);
        let start = Instant::now();
        let oracle = build_oracle(&g, k, seed, &OracleOpts::default()).map_err(from_core)?;
        let build_ms = start.elapsed().as_millis();
        let bytes = oracle.serialize().len();
        let pairs: Vec<(Vertex, Vertex)> = (0..queries)
            .map(|_| {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                (u, v)
            })
            .collect();
        let start = Instant::now();
        for &(u, v) in &pairs {
            std::hint::black_box(oracle.vconn(u, v).map_err(from_core)?);
        }
        let avg_query_ns = start.elapsed().as_nanos() as u64 / queries as u64;
        println!(
            "{n},{},{k},{build_ms},{bytes},{avg_query_ns},{}",
            g.m(),
            oracle.tree_count()
        );
    }
    Ok(())
}
