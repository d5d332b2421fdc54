//! Gomory-Hu trees for element connectivity: the recursive construction of
//! (1+ε)-approximate trees and their k-bounded exact specialization, with a
//! cut stored per tree edge in the original graph's vocabulary.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CutSet, Graph, SubdivisionMap, Vertex};
use crate::isolating::{isolating_cuts, IsolatingCut};
use crate::maxflow::element_connectivity;

/// Whether a tree is exact-below-k or uniformly approximate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreeKind {
    KBounded(usize),
    Approx(f64),
}

#[derive(Clone, Debug)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub weight: usize,
    pub cut: CutSet,
}

/// The triple (T, f, C): a weighted tree, a terminal embedding and a cut per
/// tree edge. Weight-0 edges carry empty cuts and join components of a
/// disconnected input.
#[derive(Clone, Debug)]
pub struct GHTree {
    pub kind: TreeKind,
    pub nodes: usize,
    pub edges: Vec<TreeEdge>,
    pub f: BTreeMap<Vertex, usize>,
}

impl GHTree {
    /// Minimum edge weight on the tree path between two nodes, with a
    /// witnessing edge index. `None` is the same-node sentinel.
    pub fn bottleneck(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        if a == b {
            return None;
        }
        let mut adj = vec![Vec::new(); self.nodes];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, i));
            adj[e.b].push((e.a, i));
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.nodes];
        let mut queue = std::collections::VecDeque::from([a]);
        let mut seen = vec![false; self.nodes];
        seen[a] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, i) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, i));
                    queue.push_back(y);
                }
            }
        }
        let mut best: Option<(usize, usize)> = None;
        let mut cur = b;
        while cur != a {
            let (p, i) = prev[cur].expect("tree is connected");
            let w = self.edges[i].weight;
            if best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, i));
            }
            cur = p;
        }
        best
    }
}

/// Tuning knobs for the recursion; the defaults match desk scale.
#[derive(Clone, Debug)]
pub struct GhConfig {
    /// λ-schedule period constant: λ raises every c_lambda·⌈log₂n⌉³ steps
    /// on the large branch.
    pub c_lambda: usize,
    /// Below this vertex count the true global minimum element connectivity
    /// is recomputed at every recursion node instead of scheduled.
    pub exact_lambda_max_n: usize,
    /// Hard recursion-depth cap factor; exceeding
    /// depth_cap_factor·c_lambda·⌈log₂n⌉³ aborts the build.
    pub depth_cap_factor: usize,
    /// Force the λ schedule even on small graphs (exercised by tests).
    pub force_schedule: bool,
}

impl Default for GhConfig {
    fn default() -> Self {
        GhConfig {
            c_lambda: 4,
            exact_lambda_max_n: 1000,
            depth_cap_factor: 64,
            force_schedule: false,
        }
    }
}

/// One level of the cut-threshold step.
#[derive(Clone, Debug)]
pub struct CutThresholdLevel {
    pub r: BTreeSet<Vertex>,
    pub r_sm: BTreeSet<Vertex>,
    pub sides: BTreeMap<Vertex, IsolatingCut>,
}

/// Output of [`cut_threshold_step`]: a random pivot and, per level j, the
/// sampled terminal set R^j, the qualifying subset R_sm^j and the isolating
/// sides of its members. Vertex ids refer to `graph`, which is the input
/// graph with subdivision vertices appended when the terminals were not
/// independent.
#[derive(Clone, Debug)]
pub struct CutThresholdOutput {
    pub graph: Graph,
    pub subdivision: SubdivisionMap,
    pub pivot: Vertex,
    pub levels: Vec<CutThresholdLevel>,
}

pub fn cut_threshold_step<R: Rng>(
    g: &Graph,
    u_set: &BTreeSet<Vertex>,
    f_in: &BTreeSet<Vertex>,
    w_threshold: usize,
    rng: &mut R,
) -> Result<CutThresholdOutput> {
    if u_set.len() < 2 {
        return Err(Error::InvalidArgument("cut_threshold_step: |U| < 2".into()));
    }
    let all: BTreeSet<Vertex> = u_set.union(f_in).copied().collect();
    let (work, subdivision) = g.subdivide_terminal_edges(&all);
    let (pivot, levels) = cut_threshold_levels(&work, u_set, f_in, w_threshold, rng)?;
    Ok(CutThresholdOutput { graph: work, subdivision, pivot, levels })
}

/// The step itself, assuming U ∪ F is already independent.
fn cut_threshold_levels<R: Rng>(
    g: &Graph,
    u_set: &BTreeSet<Vertex>,
    f_in: &BTreeSet<Vertex>,
    w_threshold: usize,
    rng: &mut R,
) -> Result<(Vertex, Vec<CutThresholdLevel>)> {
    let ordered: Vec<Vertex> = u_set.iter().copied().collect();
    let pivot = ordered[rng.gen_range(0..ordered.len())];
    let max_j = usize::BITS as usize - 1 - u_set.len().leading_zeros() as usize;
    let half = u_set.len(); // compare 2·|S∩U| ≤ |U| to avoid fractions

    let mut r: BTreeSet<Vertex> = u_set.clone();
    let mut levels = Vec::with_capacity(max_j + 1);
    for _j in 0..=max_j {
        let mut level = CutThresholdLevel {
            r: r.clone(),
            r_sm: BTreeSet::new(),
            sides: BTreeMap::new(),
        };
        if r.len() >= 2 {
            let f: BTreeSet<Vertex> = u_set.difference(&r).chain(f_in.iter()).copied().collect();
            let iso = isolating_cuts(g, &r, &f, w_threshold)?;
            for (&v, cut) in &iso.cuts {
                if v == pivot {
                    continue;
                }
                if let Some(cut) = cut {
                    let in_u = cut.side.intersection(u_set).count();
                    if 2 * in_u <= half && cut.size() <= w_threshold {
                        level.r_sm.insert(v);
                        level.sides.insert(v, cut.clone());
                    }
                }
            }
        }
        levels.push(level);
        r = r
            .iter()
            .filter(|&&v| v == pivot || rng.gen_bool(0.5))
            .copied()
            .collect();
    }
    Ok((pivot, levels))
}

/// A graph inside the recursion: vertex provenance maps back to the
/// subdivided base graph (`None` marks a contracted helper vertex), and the
/// terminal/forbidden sets use current ids.
#[derive(Clone, Debug)]
pub(crate) struct RecGraph {
    pub g: Graph,
    pub prov: Vec<Option<usize>>,
    pub u: BTreeSet<Vertex>,
    pub f: BTreeSet<Vertex>,
}

pub(crate) struct SmallChild {
    pub rec: RecGraph,
    /// the contracted outside-vertex, in child ids
    pub x: Vertex,
    pub side: BTreeSet<Vertex>,
    pub bound: BTreeSet<Vertex>,
    pub map: Vec<usize>,
}

pub(crate) struct Expansion {
    pub smalls: Vec<SmallChild>,
    pub large: RecGraph,
    pub large_map: Vec<usize>,
    /// per small child, the id of its contracted side inside `large`
    pub ys: Vec<Vertex>,
}

/// Runs one cut-threshold step at threshold `w` and materializes the
/// recursion children. `None` when no qualifying cut was found (the caller
/// retries with fresh randomness).
pub(crate) fn expand_step<R: Rng>(
    rec: &RecGraph,
    w: usize,
    rng: &mut R,
) -> Result<Option<Expansion>> {
    let (_pivot, levels) = cut_threshold_levels(&rec.g, &rec.u, &rec.f, w, rng)?;
    let mut best: Option<(usize, usize)> = None; // (covered, level)
    for (j, level) in levels.iter().enumerate() {
        let covered: BTreeSet<Vertex> = level
            .sides
            .values()
            .flat_map(|c| c.side.intersection(&rec.u).copied())
            .collect();
        if !covered.is_empty() && best.map_or(true, |(c, _)| covered.len() > c) {
            best = Some((covered.len(), j));
        }
    }
    let Some((_, i)) = best else {
        return Ok(None);
    };
    let level = &levels[i];

    let mut smalls = Vec::new();
    for cut in level.sides.values() {
        let keep: BTreeSet<Vertex> = cut.side.union(&cut.boundary).copied().collect();
        let contract_set: BTreeSet<Vertex> = (0..rec.g.n()).filter(|v| !keep.contains(v)).collect();
        let (child_g, map) = rec.g.contract(&contract_set)?;
        let x = child_g.n() - 1;
        let mut prov = vec![None; child_g.n()];
        for &v in &keep {
            prov[map[v]] = rec.prov[v];
        }
        let u: BTreeSet<Vertex> = cut.side.intersection(&rec.u).map(|&v| map[v]).collect();
        let mut f: BTreeSet<Vertex> =
            rec.f.iter().filter(|v| cut.side.contains(v)).map(|&v| map[v]).collect();
        f.insert(x);
        smalls.push(SmallChild {
            rec: RecGraph { g: child_g, prov, u, f },
            x,
            side: cut.side.clone(),
            bound: cut.boundary.clone(),
            map,
        });
    }

    // the large graph: contract every chosen side, one at a time
    let mut cur = rec.g.clone();
    let mut cur_prov = rec.prov.clone();
    let mut total: Vec<usize> = (0..rec.g.n()).collect();
    let mut ys: Vec<Vertex> = Vec::new();
    for child in &smalls {
        let img: BTreeSet<Vertex> = child.side.iter().map(|&v| total[v]).collect();
        let (next, m) = cur.contract(&img)?;
        let y = next.n() - 1;
        let mut prov = vec![None; next.n()];
        for v in 0..cur.n() {
            if !img.contains(&v) {
                prov[m[v]] = cur_prov[v];
            }
        }
        for t in total.iter_mut() {
            *t = m[*t];
        }
        for yv in ys.iter_mut() {
            *yv = m[*yv];
        }
        ys.push(y);
        cur = next;
        cur_prov = prov;
    }
    let in_side = |v: &Vertex| smalls.iter().any(|c| c.side.contains(v));
    let u_lg: BTreeSet<Vertex> =
        rec.u.iter().filter(|v| !in_side(v)).map(|&v| total[v]).collect();
    let mut f_lg: BTreeSet<Vertex> =
        rec.f.iter().filter(|v| !in_side(v)).map(|&v| total[v]).collect();
    f_lg.extend(ys.iter().copied());
    Ok(Some(Expansion {
        smalls,
        large: RecGraph { g: cur, prov: cur_prov, u: u_lg, f: f_lg },
        large_map: total,
        ys,
    }))
}

/// Tree-in-progress for one recursion subtree: local node ids, edges with
/// cuts in base-graph vertex ids, and the g-map over current graph vertices.
struct SubResult {
    nodes: usize,
    edges: Vec<(usize, usize, usize, BTreeSet<usize>)>,
    g_map: Vec<Option<usize>>,
}

struct Ctx<'a> {
    k: Option<usize>,
    eps_level: f64,
    cfg: &'a GhConfig,
    depth_cap: usize,
    lambda_period: usize,
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        1
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Exact minimum of κ'_{G,U∪F}(u,v) over pairs u,v ∈ U, clamped at
/// `limit`. Pairs through forbidden terminals are deliberately excluded:
/// their cuts isolate no U-terminal, so they neither bound the threshold
/// nor block the base case. A minimum cut over U-pairs separates any fixed
/// U-terminal from some other, so one fan of flows suffices.
fn exact_global_lambda(rec: &RecGraph, limit: Option<usize>) -> Result<usize> {
    let terms: BTreeSet<Vertex> = rec.u.union(&rec.f).copied().collect();
    let mut it = rec.u.iter();
    let p0 = *it.next().expect("terminals nonempty");
    let mut best = limit.unwrap_or(usize::MAX);
    for &q in it {
        let (val, _) = element_connectivity(&rec.g, &terms, p0, q, limit)?;
        best = best.min(val);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

fn build_rec<R: Rng>(
    rec: RecGraph,
    ctx: &Ctx,
    depth: usize,
    lg_depth: usize,
    rng: &mut R,
) -> Result<SubResult> {
    if depth > ctx.depth_cap {
        return Err(Error::Build(format!(
            "recursion depth cap {} exceeded; this indicates a correctness bug",
            ctx.depth_cap
        )));
    }
    if rec.u.len() == 1 {
        return Ok(SubResult {
            nodes: 1,
            edges: Vec::new(),
            g_map: vec![Some(0); rec.g.n()],
        });
    }

    let exact = !ctx.cfg.force_schedule && rec.g.n() <= ctx.cfg.exact_lambda_max_n;

    // a fruitless step is a large-branch step with G_lg = G: it advances
    // the λ schedule, which is what eventually raises the threshold
    let mut attempt_depth = depth;
    let mut attempt_lg = lg_depth;
    let exp = loop {
        let lambda: f64 = if exact {
            exact_global_lambda(&rec, ctx.k)? as f64
        } else {
            (1.0 + ctx.eps_level).powi((attempt_lg / ctx.lambda_period) as i32)
        };
        if let Some(k) = ctx.k {
            if lambda >= k as f64 {
                return Ok(SubResult {
                    nodes: 1,
                    edges: Vec::new(),
                    g_map: vec![Some(0); rec.g.n()],
                });
            }
        }
        let w = ((1.0 + ctx.eps_level) * lambda + 1e-9).floor() as usize;
        match expand_step(&rec, w, rng)? {
            Some(e) => break e,
            None => {
                attempt_depth += 1;
                attempt_lg += 1;
                if attempt_depth > ctx.depth_cap {
                    return Err(Error::Build(format!(
                        "no qualifying cut after repeated attempts (depth cap {})",
                        ctx.depth_cap
                    )));
                }
            }
        }
    };

    let large = build_rec(exp.large, ctx, attempt_depth + 1, attempt_lg + 1, rng)?;
    let mut child_results = Vec::new();
    for child in &exp.smalls {
        let r = build_rec(child.rec.clone(), ctx, attempt_depth + 1, attempt_lg, rng)?;
        child_results.push(r);
    }

    // combine: large nodes first, then each small subtree
    let mut nodes = large.nodes;
    let mut offsets = Vec::new();
    for r in &child_results {
        offsets.push(nodes);
        nodes += r.nodes;
    }
    let mut edges: Vec<(usize, usize, usize, BTreeSet<usize>)> = large.edges.clone();
    for (r, off) in child_results.iter().zip(&offsets) {
        for &(a, b, w, ref cut) in &r.edges {
            edges.push((a + off, b + off, w, cut.clone()));
        }
    }
    for ((child, r), (&y, &off)) in exp
        .smalls
        .iter()
        .zip(&child_results)
        .zip(exp.ys.iter().zip(&offsets))
    {
        let gx = r.g_map[child.x].expect("x_v is a forbidden terminal, never in a cut");
        let gy = large.g_map[y].expect("y_v is a forbidden terminal, never in a cut");
        let cut_base: BTreeSet<usize> = child
            .bound
            .iter()
            .map(|&v| rec.prov[v].expect("cut vertices are never helpers"))
            .collect();
        edges.push((gx + off, gy, child.bound.len(), cut_base));
    }

    let mut g_map = vec![None; rec.g.n()];
    'verts: for v in 0..rec.g.n() {
        for (child, (r, off)) in exp.smalls.iter().zip(child_results.iter().zip(&offsets)) {
            if child.bound.contains(&v) {
                g_map[v] = None; // doubly defined: in G_lg and in ≥1 small child
                continue 'verts;
            }
            if child.side.contains(&v) {
                g_map[v] = r.g_map[child.map[v]].map(|t| t + off);
                continue 'verts;
            }
        }
        g_map[v] = large.g_map[exp.large_map[v]];
    }
    Ok(SubResult { nodes, edges, g_map })
}

/// Maps a set of base-graph vertex ids to a [`CutSet`] over the original
/// graph: subdivision vertices turn back into their edges.
fn base_cut_to_cutset(base: &BTreeSet<usize>, n_orig: usize, sub: &SubdivisionMap) -> CutSet {
    let mut cut = CutSet::default();
    for &v in base {
        if v < n_orig {
            cut.vertices.insert(v);
        } else {
            cut.edges.insert(sub.inverse[&v]);
        }
    }
    cut
}

fn build_tree<R: Rng>(
    g: &Graph,
    u_set: &BTreeSet<Vertex>,
    f_set: &BTreeSet<Vertex>,
    kind: TreeKind,
    cfg: &GhConfig,
    rng: &mut R,
) -> Result<(GHTree, Vec<Option<usize>>)> {
    if u_set.is_empty() {
        return Err(Error::InvalidArgument("gh_tree: empty terminal set".into()));
    }
    if !u_set.is_disjoint(f_set) {
        return Err(Error::InvalidArgument("gh_tree: U and F overlap".into()));
    }
    if let Some(&v) = u_set.union(f_set).max() {
        if v >= g.n() {
            return Err(Error::InvalidArgument("gh_tree: terminal out of range".into()));
        }
    }
    let (k, eps0) = match kind {
        TreeKind::KBounded(k) => {
            if k < 1 {
                return Err(Error::InvalidArgument("gh_tree: k must be ≥ 1".into()));
            }
            (Some(k), 0.5 / k as f64)
        }
        TreeKind::Approx(e) => {
            if e <= 0.0 {
                return Err(Error::InvalidArgument("gh_tree: eps must be > 0".into()));
            }
            (None, e)
        }
    };

    let all_terms: BTreeSet<Vertex> = u_set.union(f_set).copied().collect();
    let (base, sub) = g.subdivide_terminal_edges(&all_terms);
    let n_orig = g.n();

    let comp = base.components();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let log_n = ceil_log2(base.n());
    let cfg_cap = cfg.depth_cap_factor * cfg.c_lambda * log_n * log_n * log_n;

    let mut tree = GHTree { kind, nodes: 0, edges: Vec::new(), f: BTreeMap::new() };
    let mut g_base: Vec<Option<usize>> = vec![None; base.n()];
    let mut comp_roots: Vec<usize> = Vec::new();

    for c in 0..ncomp {
        let verts: Vec<Vertex> = (0..base.n()).filter(|&v| comp[v] == c).collect();
        let u_c: BTreeSet<Vertex> = u_set.iter().filter(|&&v| comp[v] == c).copied().collect();
        if u_c.is_empty() {
            continue;
        }
        let mut id = vec![usize::MAX; base.n()];
        let mut cg = Graph::new(verts.len());
        for (i, &v) in verts.iter().enumerate() {
            id[v] = i;
        }
        for &(a, b) in base.edges() {
            if comp[a] == c {
                cg.add_edge(id[a], id[b]);
            }
        }
        let rec = RecGraph {
            g: cg,
            prov: verts.iter().map(|&v| Some(v)).collect(),
            u: u_c.iter().map(|&v| id[v]).collect(),
            f: f_set.iter().filter(|&&v| comp[v] == c).map(|&v| id[v]).collect(),
        };
        let eps_level = (1.0 + eps0).powf(1.0 / ceil_log2(rec.u.len()) as f64) - 1.0;
        let ctx = Ctx {
            k,
            eps_level,
            cfg,
            depth_cap: cfg_cap,
            lambda_period: (cfg.c_lambda * log_n * log_n * log_n).max(1),
        };
        let sr = build_rec(rec, &ctx, 0, 0, rng)?;

        let off = tree.nodes;
        tree.nodes += sr.nodes;
        comp_roots.push(off);
        let mut in_cut = vec![false; base.n()];
        for (a, b, w, cut) in sr.edges {
            for &v in &cut {
                in_cut[v] = true;
            }
            tree.edges.push(TreeEdge {
                a: a + off,
                b: b + off,
                weight: w,
                cut: base_cut_to_cutset(&cut, n_orig, &sub),
            });
        }
        for (i, &v) in verts.iter().enumerate() {
            g_base[v] = sr.g_map[i].map(|t| t + off);
            assert_eq!(
                g_base[v].is_none(),
                in_cut[v],
                "embedding is ⊥ exactly on cut vertices"
            );
        }
    }

    // join component trees with weight-0 edges carrying empty cuts
    for pair in comp_roots.windows(2) {
        tree.edges.push(TreeEdge { a: pair[0], b: pair[1], weight: 0, cut: CutSet::default() });
    }
    // vertices of terminal-free components join the first tree arbitrarily
    let root0 = comp_roots[0];
    for v in 0..base.n() {
        let c = comp[v];
        if !u_set.iter().any(|&u| comp[u] == c) {
            g_base[v] = Some(root0);
        }
    }

    for &v in u_set {
        let node = g_base[v].expect("terminals are never in cuts");
        tree.f.insert(v, node);
    }
    let g_orig: Vec<Option<usize>> = g_base[..n_orig].to_vec();
    Ok((tree, g_orig))
}

/// (1+ε₀)-approximate Gomory-Hu tree for element connectivity of (g, U∪F).
/// Returns the tree plus the partial embedding over the graph's vertices
/// (`None` exactly for vertices appearing in some stored cut).
pub fn approx_gh_tree<R: Rng>(
    g: &Graph,
    u_set: &BTreeSet<Vertex>,
    f_set: &BTreeSet<Vertex>,
    eps0: f64,
    cfg: &GhConfig,
    rng: &mut R,
) -> Result<(GHTree, Vec<Option<usize>>)> {
    build_tree(g, u_set, f_set, TreeKind::Approx(eps0), cfg, rng)
}

/// k-bounded Gomory-Hu tree: tree-path bottlenecks equal κ′ exactly below
/// k; pairs at or above k share a node.
pub fn k_gh_tree<R: Rng>(
    g: &Graph,
    u_set: &BTreeSet<Vertex>,
    k: usize,
    cfg: &GhConfig,
    rng: &mut R,
) -> Result<(GHTree, Vec<Option<usize>>)> {
    build_tree(g, u_set, &BTreeSet::new(), TreeKind::KBounded(k), cfg, rng)
}

/// Checks flow equivalency against brute element connectivity for every
/// terminal pair, and cut equivalency for every stored cut. Returns the
/// list of violations, empty when the tree is valid.
pub fn verify_gh_tree(g: &Graph, u_set: &BTreeSet<Vertex>, tree: &GHTree) -> Vec<String> {
    let mut bad = Vec::new();
    for &u in u_set {
        if !tree.f.contains_key(&u) {
            bad.push(format!("terminal {u} missing from the embedding"));
        }
    }
    if !bad.is_empty() {
        return bad;
    }
    let pairs: Vec<(Vertex, Vertex)> = u_set
        .iter()
        .flat_map(|&u| u_set.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
        .collect();
    for &(u, v) in &pairs {
        let limit = match tree.kind {
            TreeKind::KBounded(k) => Some(k),
            TreeKind::Approx(_) => None,
        };
        let truth = match element_connectivity(g, u_set, u, v, limit) {
            Ok((val, _)) => val,
            Err(e) => {
                bad.push(format!("brute oracle failed on ({u},{v}): {e}"));
                continue;
            }
        };
        let bn = tree.bottleneck(tree.f[&u], tree.f[&v]);
        match tree.kind {
            TreeKind::KBounded(k) => match bn {
                None => {
                    if truth < k {
                        bad.push(format!("pair ({u},{v}): same node but κ' = {truth} < k = {k}"));
                    }
                }
                Some((w, _)) => {
                    if w != truth {
                        bad.push(format!("pair ({u},{v}): bottleneck {w} ≠ κ' = {truth}"));
                    }
                }
            },
            TreeKind::Approx(eps0) => match bn {
                None => bad.push(format!("pair ({u},{v}): embedded at the same node")),
                Some((w, _)) => {
                    let lo = truth as f64;
                    let hi = (1.0 + eps0) * truth as f64 + 1e-9;
                    if (w as f64) < lo || (w as f64) > hi {
                        bad.push(format!(
                            "pair ({u},{v}): bottleneck {w} outside [{truth}, (1+{eps0})·{truth}]"
                        ));
                    }
                }
            },
        }
    }
    for (i, e) in tree.edges.iter().enumerate() {
        if e.cut.len() != e.weight {
            bad.push(format!("edge {i}: |C(e)| = {} ≠ w(e) = {}", e.cut.len(), e.weight));
        }
        if e.cut.vertices.iter().any(|v| u_set.contains(v)) {
            bad.push(format!("edge {i}: cut contains a terminal"));
        }
        for &(u, v) in &pairs {
            let straddles = {
                // e on the f(u)-f(v) path iff removing it separates the nodes
                let fu = tree.f[&u];
                let fv = tree.f[&v];
                fu != fv && edge_on_path(tree, i, fu, fv)
            };
            if straddles && g.connected_avoiding(u, v, &e.cut) {
                bad.push(format!("edge {i}: cut fails to disconnect straddling pair ({u},{v})"));
            }
        }
    }
    bad
}

fn edge_on_path(tree: &GHTree, edge: usize, a: usize, b: usize) -> bool {
    // walk from a to b avoiding `edge`; on a tree this fails iff edge is on
    // the path
    let mut adj = vec![Vec::new(); tree.nodes];
    for (i, e) in tree.edges.iter().enumerate() {
        if i != edge {
            adj[e.a].push((e.b, i));
            adj[e.b].push((e.a, i));
        }
    }
    let mut seen = vec![false; tree.nodes];
    seen[a] = true;
    let mut stack = vec![a];
    while let Some(x) = stack.pop() {
        for &(y, _) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    !seen[b]
}

/// Text serialization of a tree, cuts included.
pub fn tree_to_text(tree: &GHTree) -> String {
    let mut out = String::from("# ghtree v1\n");
    match tree.kind {
        TreeKind::KBounded(k) => out.push_str(&format!("mode k {k}\n")),
        TreeKind::Approx(e) => out.push_str(&format!("mode eps {e}\n")),
    }
    out.push_str(&format!("nodes {}\n", tree.nodes));
    out.push_str(&format!("edges {}\n", tree.edges.len()));
    for e in &tree.edges {
        out.push_str(&format!("{} {} {}\n", e.a, e.b, e.weight));
    }
    out.push_str(&format!("f {}\n", tree.f.len()));
    for (&v, &node) in &tree.f {
        out.push_str(&format!("{v} {node}\n"));
    }
    out.push_str(&format!("cuts {}\n", tree.edges.len()));
    for (i, e) in tree.edges.iter().enumerate() {
        out.push_str(&format!("cut {i} v"));
        for v in &e.cut.vertices {
            out.push_str(&format!(" {v}"));
        }
        out.push_str(" e");
        for ed in &e.cut.edges {
            out.push_str(&format!(" {ed}"));
        }
        out.push('\n');
    }
    out
}

pub fn tree_from_text(text: &str) -> Result<GHTree> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| -> Result<(usize, String)> {
        lines
            .next()
            .map(|(n, l)| (n, l.to_string()))
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.into() };

    let (ln, mode) = next("mode line")?;
    let toks: Vec<&str> = mode.split_whitespace().collect();
    let kind = match toks.as_slice() {
        ["mode", "k", k] => TreeKind::KBounded(k.parse().map_err(|_| err(ln, "bad k"))?),
        ["mode", "eps", e] => TreeKind::Approx(e.parse().map_err(|_| err(ln, "bad eps"))?),
        _ => return Err(err(ln, "expected 'mode k <int>' or 'mode eps <float>'")),
    };
    let parse_count = |line: (usize, String), tag: &str| -> Result<usize> {
        let toks: Vec<&str> = line.1.split_whitespace().collect();
        if toks.len() == 2 && toks[0] == tag {
            toks[1].parse().map_err(|_| err(line.0, "bad count"))
        } else {
            Err(err(line.0, &format!("expected '{tag} <count>'")))
        }
    };
    let nodes = parse_count(next("nodes line")?, "nodes")?;
    let ecount = parse_count(next("edges line")?, "edges")?;
    let mut edges = Vec::with_capacity(ecount);
    for _ in 0..ecount {
        let (ln, l) = next("edge line")?;
        let t: Vec<usize> = l
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| err(ln, "bad edge")))
            .collect::<Result<_>>()?;
        if t.len() != 3 || t[0] >= nodes || t[1] >= nodes {
            return Err(err(ln, "bad edge line"));
        }
        edges.push(TreeEdge { a: t[0], b: t[1], weight: t[2], cut: CutSet::default() });
    }
    let fcount = parse_count(next("f line")?, "f")?;
    let mut f = BTreeMap::new();
    for _ in 0..fcount {
        let (ln, l) = next("f entry")?;
        let t: Vec<usize> = l
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| err(ln, "bad f entry")))
            .collect::<Result<_>>()?;
        if t.len() != 2 || t[1] >= nodes {
            return Err(err(ln, "bad f entry"));
        }
        f.insert(t[0], t[1]);
    }
    let ccount = parse_count(next("cuts line")?, "cuts")?;
    if ccount != edges.len() && ccount != 0 {
        return Err(err(0, "cut count must equal edge count or be 0"));
    }
    for _ in 0..ccount {
        let (ln, l) = next("cut line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 4 || toks[0] != "cut" {
            return Err(err(ln, "bad cut line"));
        }
        let idx: usize = toks[1].parse().map_err(|_| err(ln, "bad cut index"))?;
        if idx >= edges.len() {
            return Err(err(ln, "cut index out of range"));
        }
        let vpos = toks.iter().position(|&t| t == "v").ok_or_else(|| err(ln, "missing v"))?;
        let epos = toks.iter().position(|&t| t == "e").ok_or_else(|| err(ln, "missing e"))?;
        let mut cut = CutSet::default();
        for t in &toks[vpos + 1..epos] {
            cut.vertices.insert(t.parse().map_err(|_| err(ln, "bad cut vertex"))?);
        }
        for t in &toks[epos + 1..] {
            cut.edges.insert(t.parse().map_err(|_| err(ln, "bad cut edge"))?);
        }
        edges[idx].cut = cut;
    }
    Ok(GHTree { kind, nodes, edges, f })
}
