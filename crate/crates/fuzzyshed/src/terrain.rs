//! Imprecise terrains: geometric graphs with per-node elevation intervals.
//!
//! Node positions are fixed in the plane; only elevations are uncertain. A
//! `Realization` pins every node to a concrete elevation inside its interval.
//! All elevation and slope comparisons throughout the crate are exact on the
//! stored binary64 values; there is no tolerance, because slope ties are
//! meaningful (water splits between equally steep neighbors).

use crate::Error;

/// Dense node identifier, `0..n`. All set iteration is ascending by id.
pub type NodeId = u32;

/// Normalizes -0.0 to +0.0 so total-order comparisons agree with numeric ones.
#[inline]
pub(crate) fn canon_z(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z
    }
}

/// Closed elevation interval `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevationInterval {
    pub low: f64,
    pub high: f64,
}

impl ElevationInterval {
    pub fn new(low: f64, high: f64) -> Self {
        ElevationInterval {
            low: canon_z(low),
            high: canon_z(high),
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        self.low <= z && z <= self.high
    }
}

/// A single invariant breach found by [`ImpreciseTerrain::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Interval has low > high or a non-finite bound.
    BadInterval { node: NodeId, low: f64, high: f64 },
    /// A coordinate is not finite.
    BadCoordinate { node: NodeId },
    SelfLoop { node: NodeId },
    DuplicateEdge { u: NodeId, v: NodeId },
    /// Edge endpoints share the same (x, y) position.
    ZeroLengthEdge { u: NodeId, v: NodeId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BadInterval { node, low, high } => {
                write!(f, "node {node}: invalid interval [{low}, {high}]")
            }
            Violation::BadCoordinate { node } => write!(f, "node {node}: non-finite coordinate"),
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateEdge { u, v } => write!(f, "duplicate edge ({u}, {v})"),
            Violation::ZeroLengthEdge { u, v } => {
                write!(f, "edge ({u}, {v}) has zero length")
            }
        }
    }
}

/// Geometric graph with fixed node positions and elevation intervals.
///
/// Construction only enforces structural sanity (index ranges, matching
/// lengths); semantic invariants are reported by [`validate`](Self::validate)
/// so that parsers can surface every problem at once. The graph need not be
/// planar or connected.
#[derive(Debug, Clone)]
pub struct ImpreciseTerrain {
    positions: Vec<(f64, f64)>,
    intervals: Vec<ElevationInterval>,
    /// Canonical (min, max) pairs, sorted ascending, duplicates retained.
    edges: Vec<(NodeId, NodeId)>,
    /// CSR adjacency: neighbor ids ascending per node, with edge lengths.
    adj_off: Vec<u32>,
    adj: Vec<(NodeId, f64)>,
}

impl ImpreciseTerrain {
    /// Assembles a terrain with Euclidean edge lengths. Panics if an edge
    /// endpoint is out of range or the input vectors disagree in length;
    /// everything else is left to `validate`.
    pub fn new(
        positions: Vec<(f64, f64)>,
        intervals: Vec<ElevationInterval>,
        edges: Vec<(NodeId, NodeId)>,
    ) -> Self {
        let n = positions.len() as u32;
        let edges = edges
            .into_iter()
            .map(|(u, v)| {
                assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
                let (xu, yu) = positions[u as usize];
                let (xv, yv) = positions[v as usize];
                let len = ((xu - xv).powi(2) + (yu - yv).powi(2)).sqrt();
                (u, v, len)
            })
            .collect();
        Self::with_edge_lengths(positions, intervals, edges)
    }

    /// Assembles a terrain with caller-supplied planar edge lengths, for
    /// inputs whose lengths follow a convention rather than the coordinates
    /// (grid diagonals are pinned to binary64 √2·cellsize).
    pub fn with_edge_lengths(
        positions: Vec<(f64, f64)>,
        intervals: Vec<ElevationInterval>,
        edges: Vec<(NodeId, NodeId, f64)>,
    ) -> Self {
        assert_eq!(positions.len(), intervals.len(), "positions/intervals length mismatch");
        let n = positions.len() as u32;
        let mut edges: Vec<(NodeId, NodeId, f64)> = edges
            .into_iter()
            .map(|(u, v, len)| {
                assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
                (u.min(v), u.max(v), len)
            })
            .collect();
        edges.sort_unstable_by_key(|e| (e.0, e.1));

        let mut deg = vec![0u32; n as usize];
        for &(u, v, _) in &edges {
            deg[u as usize] += 1;
            if u != v {
                deg[v as usize] += 1;
            }
        }
        let mut adj_off = Vec::with_capacity(n as usize + 1);
        let mut acc = 0u32;
        adj_off.push(0);
        for d in &deg {
            acc += d;
            adj_off.push(acc);
        }
        let mut cursor: Vec<u32> = adj_off[..n as usize].to_vec();
        let mut adj = vec![(0u32, 0.0f64); acc as usize];
        let push = |cursor: &mut Vec<u32>, adj: &mut Vec<(NodeId, f64)>, a: u32, b: u32, len: f64| {
            adj[cursor[a as usize] as usize] = (b, len);
            cursor[a as usize] += 1;
        };
        for &(u, v, len) in &edges {
            push(&mut cursor, &mut adj, u, v, len);
            if u != v {
                push(&mut cursor, &mut adj, v, u, len);
            }
        }
        for v in 0..n as usize {
            adj[adj_off[v] as usize..adj_off[v + 1] as usize].sort_unstable_by_key(|e| e.0);
        }
        let pairs = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        ImpreciseTerrain {
            positions,
            intervals,
            edges: pairs,
            adj_off,
            adj,
        }
    }

    pub fn node_count(&self) -> u32 {
        self.positions.len() as u32
    }

    pub fn position(&self, v: NodeId) -> (f64, f64) {
        self.positions[v as usize]
    }

    pub fn interval(&self, v: NodeId) -> ElevationInterval {
        self.intervals[v as usize]
    }

    pub fn low(&self, v: NodeId) -> f64 {
        self.intervals[v as usize].low
    }

    pub fn high(&self, v: NodeId) -> f64 {
        self.intervals[v as usize].high
    }

    /// Undirected edges as canonical (min, max) pairs, ascending.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Neighbors of `v` ascending by id, each with the planar edge length.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.adj[self.adj_off[v as usize] as usize..self.adj_off[v as usize + 1] as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    /// Planar length of the edge (p, q), if the edge exists.
    pub fn edge_length(&self, p: NodeId, q: NodeId) -> Option<f64> {
        let nb = self.neighbors(p);
        nb.binary_search_by(|probe| probe.0.cmp(&q)).ok().map(|i| nb[i].1)
    }

    pub fn has_edge(&self, p: NodeId, q: NodeId) -> bool {
        self.edge_length(p, q).is_some()
    }

    /// Reports every invariant breach; an empty list means the terrain is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, &(x, y)) in self.positions.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                out.push(Violation::BadCoordinate { node: i as NodeId });
            }
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if !iv.low.is_finite() || !iv.high.is_finite() || iv.low > iv.high {
                out.push(Violation::BadInterval {
                    node: i as NodeId,
                    low: iv.low,
                    high: iv.high,
                });
            }
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if u == v {
                out.push(Violation::SelfLoop { node: u });
                continue;
            }
            if i > 0 && self.edges[i - 1] == (u, v) {
                out.push(Violation::DuplicateEdge { u, v });
            }
            let len = self.edge_length(u, v).expect("edge is in the adjacency");
            if len <= 0.0 || !len.is_finite() {
                out.push(Violation::ZeroLengthEdge { u, v });
            }
        }
        out
    }

    /// Nodes outside `p` adjacent to at least one node of `p`.
    pub fn neighborhood(&self, p: &NodeSet) -> NodeSet {
        let mut out = NodeSet::new(self.node_count());
        for v in p.iter() {
            for &(w, _) in self.neighbors(v) {
                if !p.contains(w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// The realization with every node at its lower bound.
    pub fn lowermost(&self) -> Realization {
        Realization::new(self.intervals.iter().map(|iv| iv.low).collect())
    }

    /// The realization with every node at its upper bound.
    pub fn uppermost(&self) -> Realization {
        Realization::new(self.intervals.iter().map(|iv| iv.high).collect())
    }
}

/// A concrete elevation per node, each inside its node's interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    elev: Vec<f64>,
}

impl Realization {
    pub fn new(elev: Vec<f64>) -> Self {
        Realization {
            elev: elev.into_iter().map(canon_z).collect(),
        }
    }

    pub fn elev(&self, v: NodeId) -> f64 {
        self.elev[v as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.elev
    }

    pub fn len(&self) -> usize {
        self.elev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elev.is_empty()
    }

    /// Checks node count and per-node interval membership.
    pub fn check_for(&self, terrain: &ImpreciseTerrain) -> Result<(), Error> {
        if self.elev.len() != terrain.node_count() as usize {
            return Err(Error::RealizationMismatch {
                nodes: terrain.node_count(),
                values: self.elev.len(),
            });
        }
        for (i, &z) in self.elev.iter().enumerate() {
            if !z.is_finite() || !terrain.interval(i as NodeId).contains(z) {
                return Err(Error::ElevationOutOfInterval {
                    node: i as NodeId,
                    value: z,
                });
            }
        }
        Ok(())
    }
}

/// Node set over a fixed universe `0..n`, iterated ascending by id.
#[derive(Clone, PartialEq, Eq)]
pub struct NodeSet {
    n: u32,
    words: Vec<u64>,
    len: u32,
}

impl NodeSet {
    pub fn new(n: u32) -> Self {
        NodeSet {
            n,
            words: vec![0; (n as usize).div_ceil(64)],
            len: 0,
        }
    }

    pub fn from_ids<I: IntoIterator<Item = NodeId>>(n: u32, ids: I) -> Self {
        let mut s = NodeSet::new(n);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn universe(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.n && self.words[v as usize / 64] >> (v % 64) & 1 == 1
    }

    /// Returns true if `v` was newly inserted.
    pub fn insert(&mut self, v: NodeId) -> bool {
        assert!(v < self.n, "node {v} outside universe of {}", self.n);
        let w = &mut self.words[v as usize / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        let w = &mut self.words[v as usize / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn complement(&self) -> NodeSet {
        let mut out = NodeSet::new(self.n);
        for (i, w) in self.words.iter().enumerate() {
            out.words[i] = !w;
        }
        // Mask tail bits beyond the universe.
        let tail = self.n as usize % 64;
        if tail != 0 {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out.len = self.n - self.len;
        out
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        assert_eq!(self.n, other.n);
        let mut len = 0u32;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
            len += a.count_ones();
        }
        self.len = len;
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.n == other.n && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros();
                    w &= w - 1;
                    Some(i as u32 * 64 + b)
                }
            })
        })
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl std::fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<NodeId> for NodeSet {
    /// Universe is one past the largest id; prefer `from_ids` when the
    /// terrain's node count is known.
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let ids: Vec<NodeId> = iter.into_iter().collect();
        let n = ids.iter().copied().max().map_or(0, |m| m + 1);
        NodeSet::from_ids(n, ids)
    }
}

// ── tests ──────────────────────────────────────────────────────────────────
