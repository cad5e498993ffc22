//! Priority-sweep engines for potential watersheds and downstream areas.
//!
//! All four public operations share two engine loops. The upward engine pops
//! the lowest pending (elevation, node) pair, finalizes the node at that
//! elevation on first extraction, and relaxes each neighbor `p` with the
//! least elevation at which `p` still drains across the edge (everything not
//! yet finalized held at its upper bound, which is what the slope chains
//! encode). The downward engine runs the mirror image: it pops the highest
//! pending elevation and relaxes each neighbor with the highest elevation at
//! which it can still receive water.
//!
//! Entries are never deleted from the heap; stale ones are skipped when their
//! node is already finalized. Ties on equal elevation pop the smallest node
//! id, then the smallest tag, which makes every result deterministic. The
//! tagged variant can flip the id order to show that downstream consumers do
//! not depend on the choice.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::slope::{descent_value, max_recv_elev, min_send_elev, receive_candidates, Diagrams};
use crate::terrain::{ImpreciseTerrain, NodeId, NodeSet, Realization};
use crate::Error;

/// Which way a sweep walked the realization space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Min-priority sweep: elevations are the canonical (lowest draining)
    /// realization on members.
    Upward,
    /// Max-priority sweep: elevations are the highest at which each member
    /// still receives water.
    Downward,
}

/// Result of a reachability sweep: the member set, one elevation per member,
/// and (for tagged sweeps) the source that finalized each member.
#[derive(Debug, Clone)]
pub struct ReachResult {
    members: NodeSet,
    elevation: Vec<f64>,
    tag: Option<Vec<NodeId>>,
    direction: Direction,
    pub(crate) extractions: usize,
    pub(crate) insertions: usize,
}

impl ReachResult {
    pub fn members(&self) -> &NodeSet {
        &self.members
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Number of queue extractions the sweep performed (instrumentation).
    pub fn extraction_count(&self) -> usize {
        self.extractions
    }

    /// Number of queue insertions the sweep performed (instrumentation).
    pub fn insertion_count(&self) -> usize {
        self.insertions
    }

    /// Finalized elevation of a member; `None` for non-members.
    pub fn elevation(&self, v: NodeId) -> Option<f64> {
        if self.members.contains(v) {
            Some(self.elevation[v as usize])
        } else {
            None
        }
    }

    /// Source that finalized `v`, for tagged sweeps.
    pub fn tag(&self, v: NodeId) -> Option<NodeId> {
        let tags = self.tag.as_ref()?;
        if self.members.contains(v) {
            Some(tags[v as usize])
        } else {
            None
        }
    }

    #[cfg(test)]
    pub(crate) fn perturb_elevation(&mut self, v: NodeId, z: f64) {
        self.elevation[v as usize] = z;
    }

    #[cfg(test)]
    pub(crate) fn remove_member(&mut self, v: NodeId) {
        self.members.remove(v);
    }

    /// The realization witnessing an upward sweep: members at their
    /// finalized elevations, every other node at its upper bound.
    pub fn witness_realization(&self, terrain: &ImpreciseTerrain) -> Realization {
        let elev = (0..terrain.node_count())
            .map(|v| {
                if self.members.contains(v) {
                    self.elevation[v as usize]
                } else {
                    terrain.high(v)
                }
            })
            .collect();
        Realization::new(elev)
    }
}

/// Undirected edges whose endpoints carry different tags. Removing them from
/// the member-induced subgraph separates the members into per-tag groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorSet {
    edges: Vec<(NodeId, NodeId)>,
}

impl SeparatorSet {
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Tie order among equal elevations. Flipping it must not change any set
/// computed from tagged sweeps (only the tags themselves may move).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TieBreak {
    IdAscending,
    #[cfg_attr(not(test), allow(dead_code))]
    IdDescending,
}

impl TieBreak {
    fn mask(self) -> u32 {
        match self {
            TieBreak::IdAscending => 0,
            TieBreak::IdDescending => u32::MAX,
        }
    }
}

// Heap entry for the upward sweep; BinaryHeap is a max-heap, so `cmp` is
// reversed to pop the lowest (elevation, node, tag). Node and tag are stored
// pre-masked so the tie knob needs no per-comparison state.
struct MinEntry {
    z: f64,
    nk: u32,
    tk: u32,
}

impl PartialEq for MinEntry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for MinEntry {}
impl PartialOrd for MinEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for MinEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.z.total_cmp(&self.z)
            .then_with(|| o.nk.cmp(&self.nk))
            .then_with(|| o.tk.cmp(&self.tk))
    }
}

// Heap entry for the downward sweep: pop the highest elevation, ties by
// ascending node id.
struct MaxEntry {
    z: f64,
    node: u32,
}

impl PartialEq for MaxEntry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for MaxEntry {}
impl PartialOrd for MaxEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for MaxEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.z
            .total_cmp(&o.z)
            .then_with(|| o.node.cmp(&self.node))
    }
}

/// Upward sweep core. Seeds are (node, elevation, tag) triples. Extractions
/// of `avoid` nodes are discarded: the node is spent but joins neither the
/// members nor the frontier (it still competes inside every slope chain).
pub(crate) fn min_sweep(
    terrain: &ImpreciseTerrain,
    diagrams: &Diagrams,
    seeds: &[(NodeId, f64, NodeId)],
    avoid: Option<&NodeSet>,
    keep_tags: bool,
    tie: TieBreak,
) -> ReachResult {
    let n = terrain.node_count() as usize;
    let mask = tie.mask();
    let mut heap: BinaryHeap<MinEntry> = seeds
        .iter()
        .map(|&(v, z, t)| MinEntry {
            z,
            nk: v ^ mask,
            tk: t ^ mask,
        })
        .collect();
    let mut done = vec![false; n];
    let mut members = NodeSet::new(terrain.node_count());
    let mut elevation = vec![f64::NAN; n];
    let mut tags = if keep_tags {
        vec![u32::MAX; n]
    } else {
        Vec::new()
    };
    let mut extractions = 0usize;
    let mut insertions = seeds.len();
    while let Some(e) = heap.pop() {
        let v = e.nk ^ mask;
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        extractions += 1;
        if avoid.is_some_and(|a| a.contains(v)) {
            continue;
        }
        members.insert(v);
        elevation[v as usize] = e.z;
        let t = e.tk ^ mask;
        if keep_tags {
            tags[v as usize] = t;
        }
        for &(p, delta) in terrain.neighbors(v) {
            if done[p as usize] {
                continue;
            }
            if let Some(zp) = min_send_elev(terrain, diagrams.chain(p), p, v, delta, e.z) {
                heap.push(MinEntry {
                    z: zp,
                    nk: p ^ mask,
                    tk: t ^ mask,
                });
                insertions += 1;
            }
        }
    }
    ReachResult {
        members,
        elevation,
        tag: if keep_tags { Some(tags) } else { None },
        direction: Direction::Upward,
        extractions,
        insertions,
    }
}

/// Downward sweep core: seeds are (node, elevation) pairs; each extraction
/// offers every neighbor the highest elevation at which it can still receive
/// water released from the node anywhere in `[low(node), z]`.
pub(crate) fn max_sweep(
    terrain: &ImpreciseTerrain,
    diagrams: &Diagrams,
    seeds: &[(NodeId, f64)],
) -> ReachResult {
    let n = terrain.node_count() as usize;
    let mut heap: BinaryHeap<MaxEntry> =
        seeds.iter().map(|&(v, z)| MaxEntry { z, node: v }).collect();
    let mut done = vec![false; n];
    let mut members = NodeSet::new(terrain.node_count());
    let mut elevation = vec![f64::NAN; n];
    let mut extractions = 0usize;
    let mut insertions = seeds.len();
    let mut zs = Vec::new();
    let mut cands: Vec<(f64, f64)> = Vec::new();
    let mut order: Vec<(f64, f64)> = Vec::new();
    while let Some(e) = heap.pop() {
        let v = e.node;
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        extractions += 1;
        members.insert(v);
        elevation[v as usize] = e.z;
        let chain = diagrams.chain(v);
        if chain.is_empty() {
            continue;
        }
        receive_candidates(chain, diagrams.intercepts(v), terrain.low(v), e.z, &mut zs);
        cands.clear();
        cands.extend(zs.iter().map(|&z| (z, descent_value(chain, z))));
        for &(p, delta) in terrain.neighbors(v) {
            if done[p as usize] {
                continue;
            }
            if let Some(zp) = max_recv_elev(terrain, &cands, v, p, delta, &mut order) {
                heap.push(MaxEntry { z: zp, node: p });
                insertions += 1;
            }
        }
    }
    ReachResult {
        members,
        elevation,
        tag: None,
        direction: Direction::Downward,
        extractions,
        insertions,
    }
}

fn check_targets(terrain: &ImpreciseTerrain, q: &NodeSet) -> Result<(), Error> {
    if q.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for v in q.iter() {
        if v >= terrain.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                nodes: terrain.node_count(),
            });
        }
    }
    Ok(())
}

/// Set of nodes that drain into `q` in at least one realization, with the
/// canonical realization on members: the pointwise-lowest elevations under
/// which every member drains into `q`.
pub fn potential_watershed(terrain: &ImpreciseTerrain, q: &NodeSet) -> Result<ReachResult, Error> {
    check_targets(terrain, q)?;
    let diagrams = Diagrams::build(terrain);
    let seeds: Vec<(NodeId, f64, NodeId)> =
        q.iter().map(|v| (v, terrain.low(v), v)).collect();
    Ok(min_sweep(
        terrain,
        &diagrams,
        &seeds,
        None,
        false,
        TieBreak::IdAscending,
    ))
}

/// Nodes with a potential flow path into `s` that does not pass through
/// `avoid` before reaching `s`. Avoid-nodes still compete for steepness;
/// they are simply never expanded or reported.
pub fn avoiding_potential_watershed(
    terrain: &ImpreciseTerrain,
    avoid: &NodeSet,
    s: &NodeSet,
) -> Result<ReachResult, Error> {
    check_targets(terrain, s)?;
    for v in avoid.iter() {
        if v >= terrain.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                nodes: terrain.node_count(),
            });
        }
    }
    let diagrams = Diagrams::build(terrain);
    let seeds: Vec<(NodeId, f64, NodeId)> =
        s.iter().map(|v| (v, terrain.low(v), v)).collect();
    Ok(min_sweep(
        terrain,
        &diagrams,
        &seeds,
        Some(avoid),
        false,
        TieBreak::IdAscending,
    ))
}

/// Multi-source potential watershed where each member remembers which source
/// finalized it, plus the edges between differently-tagged members.
pub fn tagged_potential_watershed(
    terrain: &ImpreciseTerrain,
    sources: &[NodeId],
) -> Result<(ReachResult, SeparatorSet), Error> {
    tagged_potential_watershed_with_tie(terrain, sources, TieBreak::IdAscending)
}

pub(crate) fn tagged_potential_watershed_with_tie(
    terrain: &ImpreciseTerrain,
    sources: &[NodeId],
    tie: TieBreak,
) -> Result<(ReachResult, SeparatorSet), Error> {
    if sources.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let mut seen = NodeSet::new(terrain.node_count());
    for &v in sources {
        if v >= terrain.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                nodes: terrain.node_count(),
            });
        }
        if !seen.insert(v) {
            return Err(Error::DuplicateSource(v));
        }
    }
    let diagrams = Diagrams::build(terrain);
    let seeds: Vec<(NodeId, f64, NodeId)> =
        sources.iter().map(|&v| (v, terrain.low(v), v)).collect();
    let result = min_sweep(terrain, &diagrams, &seeds, None, true, tie);
    let mut edges = Vec::new();
    for &(u, v) in terrain.edges() {
        if result.members.contains(u)
            && result.members.contains(v)
            && result.tag(u) != result.tag(v)
        {
            edges.push((u, v));
        }
    }
    edges.dedup();
    Ok((result, SeparatorSet { edges }))
}

/// Set of nodes that receive water from `q` in at least one realization; the
/// elevation of each member is the highest at which it can still receive.
pub fn potential_downstream(terrain: &ImpreciseTerrain, q: &NodeSet) -> Result<ReachResult, Error> {
    check_targets(terrain, q)?;
    let diagrams = Diagrams::build(terrain);
    let seeds: Vec<(NodeId, f64)> = q.iter().map(|v| (v, terrain.high(v))).collect();
    Ok(max_sweep(terrain, &diagrams, &seeds))
}

// ── tests ──────────────────────────────────────────────────────────────────
