//! The vertex-connectivity oracle: a terminal family, one k-bounded
//! Gomory-Hu tree per terminal set, and binary-lifting bottleneck indices,
//! answering min{κ(u,v), k} in O(log n) with optional stored cuts.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ghtree::{k_gh_tree, GHTree, GhConfig};
use crate::graph::{CutSet, Graph, Vertex};
use crate::maxflow::min_vertex_cut;
use crate::terminal_sets::{build_family, default_h_count, AffinePlaneFamily, HashFunction, SetId};

#[derive(Clone, Debug)]
pub struct OracleOpts {
    pub store_cuts: bool,
    pub sparsify_first: bool,
    pub h_count: Option<usize>,
    pub gh: GhConfig,
}

impl Default for OracleOpts {
    fn default() -> Self {
        OracleOpts { store_cuts: false, sparsify_first: true, h_count: None, gh: GhConfig::default() }
    }
}

/// Per-query instrumentation.
#[derive(Clone, Copy, Debug, Default)]
pub struct QueryStats {
    pub bottleneck_queries: usize,
    pub max_lift_steps: usize,
    /// no hash separated the pair's grid rows; the answer fell back to k
    pub capture_failure: bool,
}

/// Answer to a v-cut query.
#[derive(Clone, Debug, PartialEq)]
pub enum VCutAnswer<'a> {
    Cut(&'a CutSet),
    AtLeastK,
}

/// One terminal set's tree, rooted at node 0, with lifting tables carrying
/// (ancestor, path minimum, witness child node) per jump.
#[derive(Clone, Debug)]
struct OracleTree {
    set: SetId,
    parent: Vec<usize>,
    parent_w: Vec<usize>,
    depth: Vec<usize>,
    up: Vec<Vec<(usize, usize, usize)>>,
    f: BTreeMap<Vertex, usize>,
    cuts: Option<Vec<CutSet>>,
}

impl OracleTree {
    fn from_parts(
        set: SetId,
        parent: Vec<usize>,
        parent_w: Vec<usize>,
        f: BTreeMap<Vertex, usize>,
        cuts: Option<Vec<CutSet>>,
    ) -> Result<Self> {
        let n = parent.len();
        let mut depth = vec![usize::MAX; n];
        for v in 0..n {
            // walk up, then fill the path; total work stays linear
            let mut path = Vec::new();
            let mut x = v;
            while depth[x] == usize::MAX && parent[x] != usize::MAX {
                path.push(x);
                x = parent[x];
                if path.len() > n {
                    return Err(Error::Format("parent array has a cycle".into()));
                }
            }
            if depth[x] == usize::MAX {
                depth[x] = 0;
            }
            for &y in path.iter().rev() {
                depth[y] = depth[parent[y]] + 1;
            }
        }
        let levels = (usize::BITS - n.max(2).leading_zeros()) as usize;
        let mut up = Vec::with_capacity(levels);
        let base: Vec<(usize, usize, usize)> = (0..n)
            .map(|v| {
                if parent[v] == usize::MAX {
                    (v, usize::MAX, v)
                } else {
                    (parent[v], parent_w[v], v)
                }
            })
            .collect();
        up.push(base);
        for j in 1..levels {
            let prev = &up[j - 1];
            let next: Vec<(usize, usize, usize)> = (0..n)
                .map(|v| {
                    let (mid, w1, e1) = prev[v];
                    let (top, w2, e2) = prev[mid];
                    if w1 <= w2 {
                        (top, w1, e1)
                    } else {
                        (top, w2, e2)
                    }
                })
                .collect();
            up.push(next);
        }
        Ok(OracleTree { set, parent, parent_w, depth, up, f, cuts })
    }

    /// Path minimum between nodes with a witness child node; `None` is the
    /// same-node sentinel. Also returns the number of lifting steps taken.
    fn bottleneck(&self, a: usize, b: usize) -> (Option<(usize, usize)>, usize) {
        if a == b {
            return (None, 0);
        }
        let mut steps = 0;
        let mut best: Option<(usize, usize)> = None;
        let mut merge = |w: usize, e: usize| {
            if best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, e));
            }
        };
        let (mut x, mut y) = if self.depth[a] >= self.depth[b] { (a, b) } else { (b, a) };
        let mut diff = self.depth[x] - self.depth[y];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                let (anc, w, e) = self.up[j][x];
                merge(w, e);
                x = anc;
                steps += 1;
            }
            diff >>= 1;
            j += 1;
        }
        if x != y {
            for j in (0..self.up.len()).rev() {
                if self.up[j][x].0 != self.up[j][y].0 {
                    let (ax, wx, ex) = self.up[j][x];
                    let (ay, wy, ey) = self.up[j][y];
                    merge(wx, ex);
                    merge(wy, ey);
                    x = ax;
                    y = ay;
                    steps += 2;
                }
            }
            let (_, wx, ex) = self.up[0][x];
            let (_, wy, ey) = self.up[0][y];
            merge(wx, ex);
            merge(wy, ey);
            steps += 2;
        }
        (best, steps)
    }
}

/// All-pairs fallback for the degenerate regime where the affine grid has a
/// single row (2k within a constant of n) and no hash can separate any
/// pair. n² entries fit the O(kn) space budget there.
#[derive(Clone, Debug)]
struct DenseTable {
    vals: Vec<usize>,
    cuts: Option<Vec<CutSet>>,
}

impl DenseTable {
    fn idx(n: usize, u: Vertex, v: Vertex) -> usize {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a * n + b
    }
}

/// The assembled oracle. Immutable after build; queries are read-only.
#[derive(Clone, Debug)]
pub struct VConnOracle {
    pub k: usize,
    pub n: usize,
    pub m_at_build: usize,
    pub seed: u64,
    pub store_cuts: bool,
    pub sparsified: bool,
    pub graph_crc: u32,
    family: AffinePlaneFamily,
    component: Vec<usize>,
    trees: Vec<OracleTree>,
    tree_of_set: Vec<Option<usize>>,
    dense: Option<DenseTable>,
    empty_cut: CutSet,
}

fn flat_id(fam: &AffinePlaneFamily, id: SetId) -> usize {
    (id.hash as u64 * fam.p * fam.p + id.s * fam.p + id.j) as usize
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn graph_crc(g: &Graph) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&(g.n() as u64).to_le_bytes());
    for &(a, b) in g.edges() {
        h.update(&(a as u64).to_le_bytes());
        h.update(&(b as u64).to_le_bytes());
    }
    h.finalize()
}

/// Converts a GH tree into rooted parent arrays (the tree is connected by
/// construction, joined across components by weight-0 edges).
fn root_tree(tree: &GHTree) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = tree.nodes;
    let mut adj = vec![Vec::new(); n];
    for (i, e) in tree.edges.iter().enumerate() {
        adj[e.a].push((e.b, i));
        adj[e.b].push((e.a, i));
    }
    let mut parent = vec![usize::MAX; n];
    let mut parent_w = vec![0; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &(y, i) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                parent_w[y] = tree.edges[i].weight;
                parent_edge[y] = i;
                queue.push_back(y);
            }
        }
    }
    (parent, parent_w, parent_edge)
}

pub fn build_oracle(g: &Graph, k: usize, seed: u64, opts: &OracleOpts) -> Result<VConnOracle> {
    if k < 1 || k > g.n() {
        return Err(Error::InvalidArgument("build_oracle: need 1 ≤ k ≤ n".into()));
    }
    // stored cuts must be valid in the input graph, so sparsification is
    // disabled in v-cut mode
    let sparsify = opts.sparsify_first && !opts.store_cuts;
    let work = if sparsify { g.sparsify(k)? } else { g.clone() };
    let h_count = opts.h_count.unwrap_or_else(|| default_h_count(g.n()));
    let mut fam_rng = ChaCha8Rng::seed_from_u64(seed);
    let family = build_family(g.n(), k, h_count, &mut fam_rng)?;

    if family.r < 2 {
        // single grid row: no pair is ever captured; store answers densely
        let n = g.n();
        let pairs: Vec<(Vertex, Vertex)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let answers: Vec<(usize, Option<CutSet>)> = pairs
            .par_iter()
            .map(|&(u, v)| -> Result<(usize, Option<CutSet>)> {
                let (val, cut) = min_vertex_cut(g, u, v, Some(k))?;
                Ok((val, cut.map(|c| c.cut).filter(|_| opts.store_cuts)))
            })
            .collect::<Result<_>>()?;
        let mut vals = vec![0usize; n * n];
        let mut cuts = opts.store_cuts.then(|| vec![CutSet::default(); n * n]);
        for (&(u, v), (val, cut)) in pairs.iter().zip(answers) {
            let i = DenseTable::idx(n, u, v);
            vals[i] = val;
            if let (Some(cs), Some(c)) = (&mut cuts, cut) {
                cs[i] = c;
            }
        }
        return Ok(VConnOracle {
            k,
            n,
            m_at_build: g.m(),
            seed,
            store_cuts: opts.store_cuts,
            sparsified: false,
            graph_crc: graph_crc(g),
            family,
            component: g.components(),
            trees: Vec::new(),
            tree_of_set: Vec::new(),
            dense: Some(DenseTable { vals, cuts }),
            empty_cut: CutSet::default(),
        });
    }

    let ids: Vec<SetId> = family
        .all_ids()
        .filter(|&id| family.set_members(id).map_or(false, |m| m.len() >= 2))
        .collect();
    let trees: Vec<OracleTree> = ids
        .par_iter()
        .map(|&id| -> Result<OracleTree> {
            let u_set: BTreeSet<Vertex> =
                family.set_members(id)?.iter().copied().collect();
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ splitmix(flat_id(&family, id) as u64 + 1));
            let (tree, _) = k_gh_tree(&work, &u_set, k, &opts.gh, &mut rng)?;
            let (parent, parent_w, parent_edge) = root_tree(&tree);
            let cuts = opts.store_cuts.then(|| {
                (0..tree.nodes)
                    .map(|v| {
                        if parent_edge[v] == usize::MAX {
                            CutSet::default()
                        } else {
                            tree.edges[parent_edge[v]].cut.clone()
                        }
                    })
                    .collect()
            });
            OracleTree::from_parts(id, parent, parent_w, tree.f, cuts)
        })
        .collect::<Result<_>>()?;

    let mut tree_of_set = vec![None; family.set_count()];
    for (i, t) in trees.iter().enumerate() {
        tree_of_set[flat_id(&family, t.set)] = Some(i);
    }
    Ok(VConnOracle {
        k,
        n: g.n(),
        m_at_build: work.m(),
        seed,
        store_cuts: opts.store_cuts,
        sparsified: sparsify,
        graph_crc: graph_crc(g),
        family,
        component: g.components(),
        trees,
        tree_of_set,
        dense: None,
        empty_cut: CutSet::default(),
    })
}

impl VConnOracle {
    pub fn set_count(&self) -> usize {
        self.family.set_count()
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn h_count(&self) -> usize {
        self.family.h_count()
    }

    pub fn vconn(&self, u: Vertex, v: Vertex) -> Result<usize> {
        Ok(self.vconn_stats(u, v)?.0)
    }

    pub fn vconn_stats(&self, u: Vertex, v: Vertex) -> Result<(usize, QueryStats)> {
        Ok(self.query(u, v)?.0)
    }

    /// Core query: the estimate, instrumentation, and the witnessing
    /// (tree, child node) of the minimizing bottleneck edge if any.
    fn query(&self, u: Vertex, v: Vertex) -> Result<((usize, QueryStats), Option<(usize, usize)>)> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::InvalidArgument("query: need distinct in-range vertices".into()));
        }
        let mut stats = QueryStats::default();
        if self.component[u] != self.component[v] {
            return Ok(((0, stats), None));
        }
        if let Some(d) = &self.dense {
            return Ok(((d.vals[DenseTable::idx(self.n, u, v)], stats), None));
        }
        let ids = self.family.sets_for_pair(u, v)?;
        if ids.is_empty() {
            stats.capture_failure = true;
            return Ok(((self.k, stats), None));
        }
        let mut best = self.k;
        let mut witness = None;
        for id in ids {
            let Some(ti) = self.tree_of_set[flat_id(&self.family, id)] else {
                continue;
            };
            let t = &self.trees[ti];
            let (fu, fv) = (t.f[&u], t.f[&v]);
            stats.bottleneck_queries += 1;
            let (bn, steps) = t.bottleneck(fu, fv);
            stats.max_lift_steps = stats.max_lift_steps.max(steps);
            if let Some((w, e)) = bn {
                if w < best {
                    best = w;
                    witness = Some((ti, e));
                }
            }
        }
        Ok(((best, stats), witness))
    }

    pub fn vcut(&self, u: Vertex, v: Vertex) -> Result<VCutAnswer<'_>> {
        if !self.store_cuts {
            return Err(Error::InvalidState("vcut: oracle built without cut storage".into()));
        }
        let ((ans, _), witness) = self.query(u, v)?;
        if ans >= self.k {
            return Ok(VCutAnswer::AtLeastK);
        }
        if ans == 0 {
            return Ok(VCutAnswer::Cut(&self.empty_cut));
        }
        if let Some(d) = &self.dense {
            let cuts = d.cuts.as_ref().expect("store_cuts is set");
            return Ok(VCutAnswer::Cut(&cuts[DenseTable::idx(self.n, u, v)]));
        }
        let (ti, child) = witness.expect("answer below k implies a witnessing edge");
        let cuts = self.trees[ti].cuts.as_ref().expect("store_cuts is set");
        Ok(VCutAnswer::Cut(&cuts[child]))
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"VCO1");
        out.extend_from_slice(&1u32.to_le_bytes());
        let put = |out: &mut Vec<u8>, x: u64| out.extend_from_slice(&x.to_le_bytes());
        put(&mut out, self.n as u64);
        put(&mut out, self.m_at_build as u64);
        put(&mut out, self.k as u64);
        put(&mut out, self.seed);
        let flags = (self.store_cuts as u64)
            | ((self.sparsified as u64) << 1)
            | ((self.dense.is_some() as u64) << 2);
        put(&mut out, flags);
        put(&mut out, self.graph_crc as u64);
        put(&mut out, self.family.h_count() as u64);
        for h in &self.family.hashes {
            put(&mut out, h.a);
            put(&mut out, h.b);
            put(&mut out, h.c);
        }
        for &c in &self.component {
            put(&mut out, c as u64);
        }
        if let Some(d) = &self.dense {
            for &v in &d.vals {
                put(&mut out, v as u64);
            }
            if let Some(cuts) = &d.cuts {
                for c in cuts {
                    put(&mut out, c.vertices.len() as u64);
                    for &x in &c.vertices {
                        put(&mut out, x as u64);
                    }
                    put(&mut out, c.edges.len() as u64);
                    for &x in &c.edges {
                        put(&mut out, x as u64);
                    }
                }
            }
            let crc = crc32fast::hash(&out);
            out.extend_from_slice(&crc.to_le_bytes());
            return out;
        }
        put(&mut out, self.trees.len() as u64);
        for t in &self.trees {
            put(&mut out, t.set.hash as u64);
            put(&mut out, t.set.s);
            put(&mut out, t.set.j);
            put(&mut out, t.parent.len() as u64);
            for &p in &t.parent {
                put(&mut out, p as u64);
            }
            for &w in &t.parent_w {
                put(&mut out, w as u64);
            }
            put(&mut out, t.f.len() as u64);
            for (&vert, &node) in &t.f {
                put(&mut out, vert as u64);
                put(&mut out, node as u64);
            }
            if let Some(cuts) = &t.cuts {
                for c in cuts {
                    put(&mut out, c.vertices.len() as u64);
                    for &x in &c.vertices {
                        put(&mut out, x as u64);
                    }
                    put(&mut out, c.edges.len() as u64);
                    for &x in &c.edges {
                        put(&mut out, x as u64);
                    }
                }
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<VConnOracle> {
        let fmt = |msg: &str| Error::Format(msg.into());
        if bytes.len() < 12 {
            return Err(fmt("truncated file"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let want = u32::from_le_bytes(tail.try_into().unwrap());
        if crc32fast::hash(body) != want {
            return Err(fmt("checksum mismatch"));
        }
        if &body[..4] != b"VCO1" {
            return Err(fmt("bad magic"));
        }
        if u32::from_le_bytes(body[4..8].try_into().unwrap()) != 1 {
            return Err(fmt("unsupported version"));
        }
        let mut pos = 8;
        let mut take = |n: usize| -> Result<&[u8]> {
            if pos + n > body.len() {
                return Err(fmt("truncated file"));
            }
            let s = &body[pos..pos + n];
            pos += n;
            Ok(s)
        };
        macro_rules! u64s {
            () => {
                u64::from_le_bytes(take(8)?.try_into().unwrap())
            };
        }
        let n = u64s!() as usize;
        let m_at_build = u64s!() as usize;
        let k = u64s!() as usize;
        let seed = u64s!();
        let flags = u64s!();
        let crc_stored = u64s!() as u32;
        let h_count = u64s!() as usize;
        if n > (1 << 32) || k > n || h_count > (1 << 20) {
            return Err(fmt("header values out of range"));
        }
        let mut hashes = Vec::with_capacity(h_count);
        for _ in 0..h_count {
            hashes.push(HashFunction { a: u64s!(), b: u64s!(), c: u64s!() });
        }
        let family = AffinePlaneFamily::from_parts(n, k, hashes)?;
        let mut component = Vec::with_capacity(n);
        for _ in 0..n {
            component.push(u64s!() as usize);
        }
        let store_cuts = flags & 1 == 1;
        if flags & 4 == 4 {
            let mut vals = vec![0usize; n * n];
            for v in vals.iter_mut() {
                *v = u64s!() as usize;
            }
            let cuts = if store_cuts {
                let mut cs = Vec::with_capacity(n * n);
                for _ in 0..n * n {
                    let mut c = CutSet::default();
                    let vc = u64s!() as usize;
                    for _ in 0..vc.min(n) {
                        c.vertices.insert(u64s!() as usize);
                    }
                    let ec = u64s!() as usize;
                    for _ in 0..ec.min(body.len()) {
                        c.edges.insert(u64s!() as usize);
                    }
                    cs.push(c);
                }
                Some(cs)
            } else {
                None
            };
            if pos != body.len() {
                return Err(fmt("trailing bytes"));
            }
            return Ok(VConnOracle {
                k,
                n,
                m_at_build,
                seed,
                store_cuts,
                sparsified: flags & 2 == 2,
                graph_crc: crc_stored,
                family,
                component,
                trees: Vec::new(),
                tree_of_set: Vec::new(),
                dense: Some(DenseTable { vals, cuts }),
                empty_cut: CutSet::default(),
            });
        }
        let tree_count = u64s!() as usize;
        if tree_count > family.set_count() {
            return Err(fmt("tree count exceeds set count"));
        }
        let mut trees = Vec::with_capacity(tree_count);
        for _ in 0..tree_count {
            let set = SetId { hash: u64s!() as usize, s: u64s!(), j: u64s!() };
            if set.hash >= h_count || set.s >= family.p || set.j >= family.p {
                return Err(fmt("set id out of range"));
            }
            let nodes = u64s!() as usize;
            if nodes == 0 || nodes > n {
                return Err(fmt("node count out of range"));
            }
            let mut parent = Vec::with_capacity(nodes);
            for _ in 0..nodes {
                let p = u64s!() as usize;
                if p != usize::MAX && p >= nodes {
                    return Err(fmt("parent out of range"));
                }
                parent.push(p);
            }
            let mut parent_w = Vec::with_capacity(nodes);
            for _ in 0..nodes {
                parent_w.push(u64s!() as usize);
            }
            let fcount = u64s!() as usize;
            if fcount > n {
                return Err(fmt("embedding size out of range"));
            }
            let mut f = BTreeMap::new();
            for _ in 0..fcount {
                let vert = u64s!() as usize;
                let node = u64s!() as usize;
                if vert >= n || node >= nodes {
                    return Err(fmt("embedding entry out of range"));
                }
                f.insert(vert, node);
            }
            let cuts = if store_cuts {
                let mut cs = Vec::with_capacity(nodes);
                for _ in 0..nodes {
                    let mut c = CutSet::default();
                    let vc = u64s!() as usize;
                    for _ in 0..vc.min(n) {
                        c.vertices.insert(u64s!() as usize);
                    }
                    let ec = u64s!() as usize;
                    for _ in 0..ec.min(body.len()) {
                        c.edges.insert(u64s!() as usize);
                    }
                    cs.push(c);
                }
                Some(cs)
            } else {
                None
            };
            trees.push(OracleTree::from_parts(set, parent, parent_w, f, cuts)?);
        }
        if pos != body.len() {
            return Err(fmt("trailing bytes"));
        }
        let mut tree_of_set = vec![None; family.set_count()];
        for (i, t) in trees.iter().enumerate() {
            tree_of_set[flat_id(&family, t.set)] = Some(i);
        }
        Ok(VConnOracle {
            k,
            n,
            m_at_build,
            seed,
            store_cuts,
            sparsified: flags & 2 == 2,
            graph_crc: crc_stored,
            family,
            component,
            trees,
            tree_of_set,
            dense: None,
            empty_cut: CutSet::default(),
        })
    }
}
