//! Undirected multigraph with the transformations the rest of the crate
//! builds on: parsing, boundary computation, contraction, terminal-edge
//! subdivision and Nagamochi-Ibaraki style sparsification.
//!
//! Graphs are immutable after construction; every transformation returns a
//! new graph plus whatever mapping is needed to relate it to the input.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type EdgeId = usize;

/// Undirected multigraph. Parallel edges are first-class, self-loops are
/// rejected (contraction drops the ones it would create).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<EdgeId>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> EdgeId {
        assert!(u < self.n && v < self.n, "endpoint out of range");
        assert_ne!(u, v, "self-loop");
        let id = self.edges.len();
        self.edges.push((u, v));
        self.adj[u].push(id);
        self.adj[v].push(id);
        id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Incident edge ids of `v`.
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.adj[v]
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other(&self, e: EdgeId, v: Vertex) -> Vertex {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[v].iter().map(move |&e| self.other(e, v))
    }

    /// `∂A`: vertices adjacent to `a` but not in `a`.
    pub fn boundary(&self, a: &BTreeSet<Vertex>) -> BTreeSet<Vertex> {
        let mut out = BTreeSet::new();
        for &v in a {
            for w in self.neighbors(v) {
                if !a.contains(&w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// Contracts the nonempty vertex set `s` into a single new vertex.
    ///
    /// Kept vertices are re-packed densely preserving their relative order;
    /// the contracted vertex receives the next free id (the largest one).
    /// Edges inside `s` vanish; parallel edges produced by contraction are
    /// kept since they carry cut capacity. Returns the old-id -> new-id map.
    pub fn contract(&self, s: &BTreeSet<Vertex>) -> Result<(Graph, Vec<Vertex>)> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("contract: empty vertex set".into()));
        }
        let kept = self.n - s.len();
        let new_vertex = kept;
        let mut map = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if s.contains(&v) {
                map[v] = new_vertex;
            } else {
                map[v] = next;
                next += 1;
            }
        }
        let mut g = Graph::new(kept + 1);
        for &(u, v) in &self.edges {
            let (nu, nv) = (map[u], map[v]);
            if nu != nv {
                g.add_edge(nu, nv);
            }
        }
        Ok((g, map))
    }

    /// Subdivides every edge with both endpoints in `t`, making `t` an
    /// independent set. Fresh subdivision vertices are appended after the
    /// existing ids; the returned map records edge <-> new-vertex pairs
    /// keyed by edge ids of `self`.
    pub fn subdivide_terminal_edges(&self, t: &BTreeSet<Vertex>) -> (Graph, SubdivisionMap) {
        let inner: Vec<EdgeId> = (0..self.edges.len())
            .filter(|&e| {
                let (u, v) = self.edges[e];
                t.contains(&u) && t.contains(&v)
            })
            .collect();
        let mut g = Graph::new(self.n + inner.len());
        let mut map = SubdivisionMap::default();
        let mut fresh = self.n;
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if t.contains(&u) && t.contains(&v) {
                let w = fresh;
                fresh += 1;
                g.add_edge(u, w);
                g.add_edge(w, v);
                map.forward.insert(e, w);
                map.inverse.insert(w, e);
            } else {
                g.add_edge(u, v);
            }
        }
        (g, map)
    }

    /// Nagamochi-Ibaraki scan-first search sparsification: edges are labeled
    /// with forest indices while scanning vertices in decreasing-rank order,
    /// and the first `k` forests preserve `min{κ(u,v), k}` and
    /// `min{λ(u,v), k}` for every pair. Parallel edges are deduplicated to
    /// multiplicity ≤ k before the scan.
    pub fn sparsify(&self, k: usize) -> Result<Graph> {
        if k < 1 {
            return Err(Error::InvalidArgument("sparsify: k must be ≥ 1".into()));
        }
        let mut mult: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            let key = (u.min(v), u.max(v));
            let c = mult.entry(key).or_insert(0);
            if *c < k {
                *c += 1;
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut rank = vec![0usize; self.n];
        let mut scanned = vec![false; self.n];
        let mut g = Graph::new(self.n);
        for _ in 0..self.n {
            let x = (0..self.n)
                .filter(|&v| !scanned[v])
                .max_by_key(|&v| rank[v])
                .expect("unscanned vertex remains");
            scanned[x] = true;
            for &y in &adj[x] {
                if scanned[y] {
                    continue;
                }
                // the edge joins forest rank[y]+1; keep the first k forests
                if rank[y] < k {
                    g.add_edge(x, y);
                }
                rank[y] += 1;
            }
        }
        Ok(g)
    }

    /// Connected-component id per vertex, 0-based in order of discovery.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// True iff `u` and `v` are connected after removing the cut's vertices
    /// and edges.
    pub fn connected_avoiding(&self, u: Vertex, v: Vertex, cut: &CutSet) -> bool {
        if cut.vertices.contains(&u) || cut.vertices.contains(&v) {
            return false;
        }
        let mut seen = vec![false; self.n];
        seen[u] = true;
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if x == v {
                return true;
            }
            for &e in &self.adj[x] {
                if cut.edges.contains(&e) {
                    continue;
                }
                let y = self.other(e, x);
                if !seen[y] && !cut.vertices.contains(&y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }
}

/// Seeded G(n, p) instance.
pub fn random_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// A mixed cut: vertices plus edges whose removal disconnects a pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutSet {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<EdgeId>,
}

impl CutSet {
    pub fn len(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }
}

/// Edge <-> subdivision-vertex correspondence produced by
/// [`Graph::subdivide_terminal_edges`].
#[derive(Clone, Debug, Default)]
pub struct SubdivisionMap {
    /// original edge id -> subdivision vertex id
    pub forward: BTreeMap<EdgeId, Vertex>,
    /// subdivision vertex id -> original edge id
    pub inverse: BTreeMap<Vertex, EdgeId>,
}

/// Parses the edge-list text format: first line `n m`, then `m` lines `u v`
/// with 0-based ids; `#`-prefixed lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing header line".into() })?;
    let mut it = header.split_whitespace();
    let parse_num = |tok: Option<&str>, line: usize, what: &str| -> Result<usize> {
        tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?
            .parse::<usize>()
            .map_err(|_| Error::Parse { line, msg: format!("invalid {what}") })
    };
    let n = parse_num(it.next(), line_no, "vertex count")?;
    let m = parse_num(it.next(), line_no, "edge count")?;
    if it.next().is_some() {
        return Err(Error::Parse { line: line_no, msg: "trailing tokens in header".into() });
    }

    let mut g = Graph::new(n);
    for _ in 0..m {
        let (line_no, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("expected {m} edge lines, got {}", g.m()),
        })?;
        let mut it = line.split_whitespace();
        let u = parse_num(it.next(), line_no, "endpoint")?;
        let v = parse_num(it.next(), line_no, "endpoint")?;
        if it.next().is_some() {
            return Err(Error::Parse { line: line_no, msg: "trailing tokens".into() });
        }
        if u >= n || v >= n {
            return Err(Error::Parse { line: line_no, msg: format!("endpoint ≥ n = {n}") });
        }
        if u == v {
            return Err(Error::Parse { line: line_no, msg: "self-loop".into() });
        }
        g.add_edge(u, v);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse { line: line_no, msg: "unexpected extra line".into() });
    }
    Ok(g)
}
