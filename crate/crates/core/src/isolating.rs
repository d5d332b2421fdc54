//! Isolating cuts with forbidden terminals: for every v in an independent
//! terminal set I, the smallest minimum vertex cut separating v from the
//! rest of I whose boundary avoids I ∪ F, computed with ⌈log|I|⌉ global
//! flow phases plus one local finishing flow per terminal.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::maxflow::GraphNetwork;

/// One terminal's isolating cut: the source side and its vertex boundary.
#[derive(Clone, Debug)]
pub struct IsolatingCut {
    pub side: BTreeSet<Vertex>,
    pub boundary: BTreeSet<Vertex>,
}

impl IsolatingCut {
    pub fn size(&self) -> usize {
        self.boundary.len()
    }
}

/// Result map plus the number of max-flow invocations spent producing it.
/// `None` marks a terminal whose smallest isolating cut exceeds the limit.
#[derive(Clone, Debug)]
pub struct IsolatingCutsResult {
    pub cuts: BTreeMap<Vertex, Option<IsolatingCut>>,
    pub flow_calls: usize,
}

/// Computes, for each v ∈ `i_set`, the side S_v minimizing |∂S_v| subject to
/// S_v ∩ I = {v} and ∂S_v ∩ (I ∪ F) = ∅, and among those minimizing |S_v|.
///
/// Scheme: terminals get binary codes by sorted rank; each code bit induces
/// one global max flow between the two bit classes, with all terminals
/// uncuttable. Intersecting the per-phase source-minimal sides leaves each
/// terminal in a private region that provably contains its optimal side; one
/// local flow per terminal then extracts that side exactly.
pub fn isolating_cuts(
    g: &Graph,
    i_set: &BTreeSet<Vertex>,
    f_set: &BTreeSet<Vertex>,
    limit: usize,
) -> Result<IsolatingCutsResult> {
    if i_set.len() < 2 {
        return Err(Error::InvalidArgument("isolating_cuts: |I| < 2".into()));
    }
    if !i_set.is_disjoint(f_set) {
        return Err(Error::InvalidArgument("isolating_cuts: I and F overlap".into()));
    }
    let terminals: BTreeSet<Vertex> = i_set.union(f_set).copied().collect();
    if let Some(&v) = terminals.iter().max() {
        if v >= g.n() {
            return Err(Error::InvalidArgument("isolating_cuts: terminal out of range".into()));
        }
    }
    for &(u, v) in g.edges() {
        if terminals.contains(&u) && terminals.contains(&v) {
            return Err(Error::InvalidArgument(
                "isolating_cuts: I ∪ F must be independent (subdivide first)".into(),
            ));
        }
    }

    let ordered: Vec<Vertex> = i_set.iter().copied().collect();
    let bits = usize::BITS - (ordered.len() - 1).leading_zeros();
    let inf = (g.n() + 1) as i64;
    let mut flow_calls = 0;

    // phase b: separate terminals whose rank has bit b clear from the rest,
    // record the source-minimal side and its boundary
    let mut phase_side: Vec<Vec<bool>> = Vec::new();
    let mut phase_bound: Vec<Vec<bool>> = Vec::new();
    for b in 0..bits {
        let class0: Vec<Vertex> = ordered
            .iter()
            .enumerate()
            .filter(|(r, _)| r >> b & 1 == 0)
            .map(|(_, &v)| v)
            .collect();
        let class1: Vec<Vertex> = ordered
            .iter()
            .enumerate()
            .filter(|(r, _)| r >> b & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        // 2^(bits-1) < |I| guarantees both classes are populated
        assert!(!class0.is_empty() && !class1.is_empty());
        let mut gn = GraphNetwork::build(g, |w| !terminals.contains(&w), false, inf);
        let src = gn.net.add_node();
        let snk = gn.net.add_node();
        for &a in &class0 {
            gn.net.add_arc(src, gn.node_out(a), inf);
        }
        for &z in &class1 {
            gn.net.add_arc(gn.node_in(z), snk, inf);
        }
        gn.net.s = src;
        gn.net.t = snk;
        gn.net.max_flow(None);
        flow_calls += 1;
        gn.cancel_antiparallel();
        let reach = gn.net.residual_reachable();
        let mut side = vec![false; g.n()];
        for v in gn.source_side(&reach) {
            side[v] = true;
        }
        let mut bound = vec![false; g.n()];
        for v in gn.cut_set(&reach).vertices {
            bound[v] = true;
        }
        phase_side.push(side);
        phase_bound.push(bound);
    }

    let mut cuts = BTreeMap::new();
    for (rank, &v) in ordered.iter().enumerate() {
        // the private region: intersect the matching side of every phase
        let mut region = vec![true; g.n()];
        for (b, (side, bound)) in phase_side.iter().zip(&phase_bound).enumerate() {
            for w in 0..g.n() {
                region[w] &= if rank >> b & 1 == 0 {
                    side[w]
                } else {
                    !side[w] && !bound[w]
                };
            }
        }
        debug_assert!(region[v]);

        let mut gn = GraphNetwork::build(g, |w| !terminals.contains(&w), false, inf);
        let snk = gn.net.add_node();
        for w in 0..g.n() {
            if w == v || region[w] {
                continue;
            }
            if terminals.contains(&w) {
                gn.net.add_arc(gn.node_in(w), snk, inf);
            } else {
                gn.net.add_arc(gn.node_out(w), snk, inf);
            }
        }
        // other terminals inside the region cannot exist for I, but F ones
        // may; they are legitimate interior vertices. I-terminals outside
        // the region are wired to the sink above.
        gn.net.s = gn.node_out(v);
        gn.net.t = snk;
        let res = gn.net.max_flow(Some(limit as i64 + 1));
        flow_calls += 1;
        if res.clamped {
            cuts.insert(v, None);
            continue;
        }
        gn.cancel_antiparallel();
        let reach = gn.net.residual_reachable();
        let side = gn.source_side(&reach);
        let boundary = gn.cut_set(&reach).vertices;
        debug_assert_eq!(boundary.len() as i64, res.value);
        cuts.insert(v, Some(IsolatingCut { side, boundary }));
    }
    Ok(IsolatingCutsResult { cuts, flow_calls })
}
