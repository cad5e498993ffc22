//! Exact steepest-descent flow on a fixed realization.
//!
//! Water at a node continues to every neighbor of maximal non-negative slope;
//! ties split the flow. Slope-0 edges inside plateaus are included, so the
//! nodes of a local minimum point at each other and reachability spreads
//! through the whole minimum without a special case.

use crate::terrain::{ImpreciseTerrain, NodeId, NodeSet, Realization};
use crate::Error;

/// Directed successor lists of the steepest-descent relation (CSR).
#[derive(Debug, Clone)]
pub struct FlowGraph {
    off: Vec<u32>,
    succ: Vec<NodeId>,
}

impl FlowGraph {
    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.succ[self.off[v as usize] as usize..self.off[v as usize + 1] as usize]
    }

    pub fn node_count(&self) -> u32 {
        self.off.len() as u32 - 1
    }
}

/// Descent slope from `p` to `q`: positive when `p` is higher.
pub fn slope(
    terrain: &ImpreciseTerrain,
    r: &Realization,
    p: NodeId,
    q: NodeId,
) -> Result<f64, Error> {
    let len = terrain
        .edge_length(p, q)
        .ok_or(Error::NotAnEdge { p, q })?;
    Ok((r.elev(p) - r.elev(q)) / len)
}

/// Builds the steepest-descent flow graph of a realization.
///
/// `p -> q` exists iff `(p, q)` is an edge, the slope is non-negative, and no
/// neighbor of `p` is strictly steeper below it. A node whose every incident
/// slope is negative has no successors.
pub fn flow_graph(terrain: &ImpreciseTerrain, r: &Realization) -> FlowGraph {
    let n = terrain.node_count();
    let mut off = Vec::with_capacity(n as usize + 1);
    let mut succ = Vec::new();
    off.push(0u32);
    for p in 0..n {
        let zp = r.elev(p);
        let mut best = f64::NEG_INFINITY;
        for &(q, len) in terrain.neighbors(p) {
            let s = (zp - r.elev(q)) / len;
            if s > best {
                best = s;
            }
        }
        if best >= 0.0 {
            for &(q, len) in terrain.neighbors(p) {
                if (zp - r.elev(q)) / len == best {
                    succ.push(q);
                }
            }
        }
        off.push(succ.len() as u32);
    }
    FlowGraph { off, succ }
}

/// Maximal connected equal-elevation sets whose neighborhood is strictly
/// higher. Plateaus count; a whole component at uniform elevation is a
/// minimum (its neighborhood is empty, hence vacuously higher). Results are
/// ordered by smallest member id.
pub fn local_minima(terrain: &ImpreciseTerrain, r: &Realization) -> Vec<NodeSet> {
    let n = terrain.node_count();
    let mut seen = vec![false; n as usize];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for v in 0..n {
        if seen[v as usize] {
            continue;
        }
        let z = r.elev(v);
        seen[v as usize] = true;
        stack.push(v);
        let mut members = Vec::new();
        let mut is_min = true;
        while let Some(u) = stack.pop() {
            members.push(u);
            for &(w, _) in terrain.neighbors(u) {
                let zw = r.elev(w);
                if zw == z {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                } else if zw < z {
                    is_min = false;
                }
            }
        }
        if is_min {
            out.push(NodeSet::from_ids(n, members));
        }
    }
    out
}

/// Reverse reachability of `q` in the flow graph: every node whose water can
/// arrive at some node of `q`. Always contains `q` itself.
pub fn watershed(terrain: &ImpreciseTerrain, r: &Realization, q: &NodeSet) -> NodeSet {
    let fg = flow_graph(terrain, r);
    watershed_of_flow(&fg, q)
}

/// As [`watershed`], over a prebuilt flow graph.
pub fn watershed_of_flow(fg: &FlowGraph, q: &NodeSet) -> NodeSet {
    let n = fg.node_count();
    // Reverse CSR by counting sort.
    let mut indeg = vec![0u32; n as usize];
    for p in 0..n {
        for &s in fg.successors(p) {
            indeg[s as usize] += 1;
        }
    }
    let mut roff = Vec::with_capacity(n as usize + 1);
    let mut acc = 0u32;
    roff.push(0);
    for d in &indeg {
        acc += d;
        roff.push(acc);
    }
    let mut cursor: Vec<u32> = roff[..n as usize].to_vec();
    let mut pred = vec![0u32; acc as usize];
    for p in 0..n {
        for &s in fg.successors(p) {
            pred[cursor[s as usize] as usize] = p;
            cursor[s as usize] += 1;
        }
    }
    let mut out = NodeSet::new(n);
    let mut stack: Vec<NodeId> = q.iter().collect();
    for &v in &stack {
        out.insert(v);
    }
    while let Some(v) = stack.pop() {
        for &p in &pred[roff[v as usize] as usize..roff[v as usize + 1] as usize] {
            if out.insert(p) {
                stack.push(p);
            }
        }
    }
    out
}

/// Forward reachability of `q` in the flow graph: every node that water
/// starting anywhere in `q` can arrive at. Always contains `q` itself.
pub fn forward_reach(terrain: &ImpreciseTerrain, r: &Realization, q: &NodeSet) -> NodeSet {
    let fg = flow_graph(terrain, r);
    let mut out = NodeSet::new(fg.node_count());
    let mut stack: Vec<NodeId> = q.iter().collect();
    for &v in &stack {
        out.insert(v);
    }
    while let Some(v) = stack.pop() {
        for &s in fg.successors(v) {
            if out.insert(s) {
                stack.push(s);
            }
        }
    }
    out
}

/// Directed edges leaving the watershed of `q`: tail inside, head outside.
/// Sorted ascending for deterministic output.
pub fn crossing(
    terrain: &ImpreciseTerrain,
    r: &Realization,
    q: &NodeSet,
) -> Vec<(NodeId, NodeId)> {
    let ws = watershed(terrain, r, q);
    let mut out = Vec::new();
    for &(u, v) in terrain.edges() {
        match (ws.contains(u), ws.contains(v)) {
            (true, false) => out.push((u, v)),
            (false, true) => out.push((v, u)),
            _ => {}
        }
    }
    out.sort_unstable();
    out
}

/// Combines watersheds of several (realization, targets) pairs into one
/// realization: inside any of the watersheds a node takes the minimum of the
/// participating realizations' elevations, elsewhere its upper bound.
pub fn overlay(terrain: &ImpreciseTerrain, pairs: &[(Realization, NodeSet)]) -> Realization {
    let mut elev: Vec<f64> = (0..terrain.node_count()).map(|v| terrain.high(v)).collect();
    let mut touched = vec![false; elev.len()];
    for (r, q) in pairs {
        let ws = watershed(terrain, r, q);
        for v in ws.iter() {
            let z = r.elev(v);
            if !touched[v as usize] || z < elev[v as usize] {
                elev[v as usize] = z;
                touched[v as usize] = true;
            }
        }
    }
    Realization::new(elev)
}

// ── tests ──────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::ElevationInterval;

    fn path(elevs: &[f64]) -> (ImpreciseTerrain, Realization) {
        let n = elevs.len();
        let t = ImpreciseTerrain::new(
            (0..n).map(|i| (i as f64, 0.0)).collect(),
            elevs.iter().map(|&z| ElevationInterval::new(z, z)).collect(),
            (0..n as u32 - 1).map(|i| (i, i + 1)).collect(),
        );
        let r = t.lowermost();
        (t, r)
    }

    #[test]
    fn slope_formula() {
        let (t, r) = path(&[2.0, 0.0]);
        assert_eq!(slope(&t, &r, 0, 1).unwrap(), 2.0);
        assert_eq!(slope(&t, &r, 1, 0).unwrap(), -2.0);
    }

    #[test]
    fn slope_of_horizontal_edge_is_zero() {
        let (t, r) = path(&[1.0, 1.0]);
        assert_eq!(slope(&t, &r, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn slope_scales_with_distance() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (2.0, 0.0)],
            vec![ElevationInterval::new(0.0, 0.0), ElevationInterval::new(3.0, 3.0)],
            vec![(0, 1)],
        );
        let r = t.lowermost();
        assert_eq!(slope(&t, &r, 0, 1).unwrap(), -1.5);
    }

    #[test]
    fn slope_rejects_non_edges() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        assert!(slope(&t, &r, 0, 2).is_err());
    }

    #[test]
    fn descending_chain_flows_downhill() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        let fg = flow_graph(&t, &r);
        assert_eq!(fg.successors(0), &[1]);
        assert_eq!(fg.successors(1), &[2]);
        assert!(fg.successors(2).is_empty());
    }

    #[test]
    fn equal_slopes_tie() {
        // Center with two neighbors at the same positive slope.
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)],
            vec![
                ElevationInterval::new(2.0, 2.0),
                ElevationInterval::new(0.0, 0.0),
                ElevationInterval::new(0.0, 0.0),
            ],
            vec![(0, 1), (0, 2)],
        );
        let r = t.lowermost();
        assert_eq!(flow_graph(&t, &r).successors(0), &[1, 2]);
    }

    #[test]
    fn flat_pair_gets_mutual_edges() {
        // a(1)–b(1), both hemmed in by a higher neighbor of a.
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)],
            vec![
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(5.0, 5.0),
            ],
            vec![(0, 1), (0, 2)],
        );
        let r = t.lowermost();
        let fg = flow_graph(&t, &r);
        assert_eq!(fg.successors(0), &[1]);
        assert_eq!(fg.successors(1), &[0]);
        assert_eq!(fg.successors(2), &[0]);
    }

    #[test]
    fn steeper_neighbor_wins() {
        // From a, b is strictly steeper than c, so only b receives flow.
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            vec![
                ElevationInterval::new(2.0, 2.0),
                ElevationInterval::new(0.0, 0.0),
                ElevationInterval::new(1.0, 1.0),
            ],
            vec![(0, 1), (0, 2)],
        );
        let r = t.lowermost();
        assert_eq!(flow_graph(&t, &r).successors(0), &[1]);
        let ws = watershed(&t, &r, &NodeSet::from_ids(3, [2]));
        assert_eq!(ws.ids(), vec![2]);
    }

    #[test]
    fn chain_minima() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        let minima = local_minima(&t, &r);
        assert_eq!(minima.len(), 1);
        assert_eq!(minima[0].ids(), vec![2]);
    }

    #[test]
    fn plateau_minimum() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(5.0, 5.0),
            ],
            vec![(0, 1), (1, 2)],
        );
        let r = t.lowermost();
        let minima = local_minima(&t, &r);
        assert_eq!(minima.len(), 1);
        assert_eq!(minima[0].ids(), vec![0, 1]);
    }

    #[test]
    fn uniform_component_is_one_minimum() {
        let (t, r) = path(&[3.0, 3.0, 3.0]);
        let minima = local_minima(&t, &r);
        assert_eq!(minima.len(), 1);
        assert_eq!(minima[0].ids(), vec![0, 1, 2]);
    }

    #[test]
    fn watershed_of_chain_bottom_is_everything() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        let ws = watershed(&t, &r, &NodeSet::from_ids(3, [2]));
        assert_eq!(ws.ids(), vec![0, 1, 2]);
    }

    #[test]
    fn nothing_flows_uphill() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        let ws = watershed(&t, &r, &NodeSet::from_ids(3, [0]));
        assert_eq!(ws.ids(), vec![0]);
    }

    #[test]
    fn watershed_contains_targets() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        for v in 0..3 {
            assert!(watershed(&t, &r, &NodeSet::from_ids(3, [v])).contains(v));
        }
    }

    #[test]
    fn watershed_spreads_through_minimum_plateau() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(1.0, 1.0),
                ElevationInterval::new(5.0, 5.0),
            ],
            vec![(0, 1), (1, 2)],
        );
        let r = t.lowermost();
        // Water at b reaches a through the slope-0 edge, so a is in WS({b})
        // and the whole plateau is in the watershed of each plateau node.
        let ws = watershed(&t, &r, &NodeSet::from_ids(3, [0]));
        assert_eq!(ws.ids(), vec![0, 1, 2]);
    }

    #[test]
    fn forward_reach_follows_flow() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        let fr = forward_reach(&t, &r, &NodeSet::from_ids(3, [0]));
        assert_eq!(fr.ids(), vec![0, 1, 2]);
        let fr = forward_reach(&t, &r, &NodeSet::from_ids(3, [2]));
        assert_eq!(fr.ids(), vec![2]);
    }

    #[test]
    fn crossing_of_full_drainage_is_empty() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        assert!(crossing(&t, &r, &NodeSet::from_ids(3, [2])).is_empty());
    }

    #[test]
    fn crossing_of_middle_target() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        // WS({b}) = {a, b}; the only leaving edge is (b, c).
        assert_eq!(crossing(&t, &r, &NodeSet::from_ids(3, [1])), vec![(1, 2)]);
    }

    #[test]
    fn crossing_of_empty_target_is_empty() {
        let (t, r) = path(&[2.0, 1.0, 0.0]);
        assert!(crossing(&t, &r, &NodeSet::new(3)).is_empty());
    }

    #[test]
    fn overlay_single_pair_copies_watershed() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![
                ElevationInterval::new(0.0, 5.0),
                ElevationInterval::new(0.0, 4.0),
                ElevationInterval::new(0.0, 1.0),
            ],
            vec![(0, 1), (1, 2)],
        );
        let r = Realization::new(vec![3.0, 2.0, 0.5]);
        let q = NodeSet::from_ids(3, [2]);
        let over = overlay(&t, &[(r.clone(), q)]);
        // Whole chain drains to c, so the overlay copies r everywhere.
        assert_eq!(over.values(), &[3.0, 2.0, 0.5]);
    }

    #[test]
    fn overlay_takes_min_on_shared_nodes() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![
                ElevationInterval::new(0.0, 5.0),
                ElevationInterval::new(0.0, 5.0),
            ],
            vec![(0, 1)],
        );
        let r1 = Realization::new(vec![3.0, 1.0]);
        let r2 = Realization::new(vec![5.0, 4.0]);
        let q = NodeSet::from_ids(2, [1]);
        let over = overlay(&t, &[(r1, q.clone()), (r2, q)]);
        assert_eq!(over.values(), &[3.0, 1.0]);
    }

    #[test]
    fn overlay_keeps_high_outside() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![
                ElevationInterval::new(0.0, 5.0),
                ElevationInterval::new(0.0, 4.0),
                ElevationInterval::new(0.0, 1.0),
            ],
            vec![(0, 1), (1, 2)],
        );
        let r = Realization::new(vec![3.0, 2.0, 0.5]);
        // WS(r, {a}) = {a}: b drains onward to c.
        let q = NodeSet::from_ids(3, [0]);
        let over = overlay(&t, &[(r, q)]);
        assert_eq!(over.values(), &[3.0, 4.0, 1.0]);
    }
}
