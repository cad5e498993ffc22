//! Imprecise minima, proxies, the regularization sweep, and regularity.
//!
//! A connected set `S` is an imprecise minimum when it traps water in every
//! realization: its lowest upper bound undercuts every neighbor's lower
//! bound (property i), and no proper subset already does so (property ii).
//! Both properties reduce to one flood test: let `m` minimize `high` over
//! `S`; then `S` qualifies iff the connected component of `m` inside
//! `{u : low(u) ≤ high(m)}` is exactly `S`. A terrain is regular when every
//! local minimum of its lowermost realization is an imprecise minimum.
//!
//! The regularization sweep processes interval endpoints in increasing
//! elevation (low before high on ties, then by node id) and maintains
//! pending components in a union-find. A node's low event makes it pending
//! and merges it with adjacent pending components; if the node also touches
//! a finalized node, the merged component finalizes at the event elevation.
//! A high event on a still-pending node reports that node as the proxy of an
//! imprecise minimum (its current component) and finalizes the component at
//! the maximum member low. The finalized elevations `M` form a realization;
//! raising each lower bound to `M` yields a regular terrain with the same
//! imprecise minima.

use crate::flow::local_minima;
use crate::terrain::{ElevationInterval, ImpreciseTerrain, NodeId, NodeSet, Realization};
use crate::Error;

/// Output of [`regularize_sweep`]: the imprecise minima with one proxy each,
/// plus the finalized elevations.
#[derive(Debug, Clone)]
pub struct MinimaReport {
    minima: Vec<NodeSet>,
    proxies: Vec<NodeId>,
    m: Realization,
}

impl MinimaReport {
    /// Imprecise minima, ascending by proxy id; pairwise disjoint.
    pub fn minima(&self) -> &[NodeSet] {
        &self.minima
    }

    /// One proxy per minimum, aligned with [`Self::minima`]; each proxy is a
    /// member of its minimum.
    pub fn proxies(&self) -> &[NodeId] {
        &self.proxies
    }

    /// The sweep's finalized elevations: a valid realization whose local
    /// minima are exactly the imprecise minima.
    pub fn m(&self) -> &Realization {
        &self.m
    }
}

fn check_set(terrain: &ImpreciseTerrain, s: &NodeSet) -> Result<(), Error> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    for v in s.iter() {
        if v >= terrain.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                nodes: terrain.node_count(),
            });
        }
    }
    Ok(())
}

/// Lowest upper bound over `s`: the elevation its lowest-capped node can
/// never exceed.
pub fn bar(terrain: &ImpreciseTerrain, s: &NodeSet) -> Result<f64, Error> {
    check_set(terrain, s)?;
    Ok(s.iter()
        .map(|v| terrain.high(v))
        .fold(f64::INFINITY, f64::min))
}

/// Connected component of `m` within `{u : low(u) ≤ high(m)}`.
fn flood_below_bar(terrain: &ImpreciseTerrain, m: NodeId) -> NodeSet {
    let cap = terrain.high(m);
    let mut seen = NodeSet::new(terrain.node_count());
    seen.insert(m);
    let mut stack = vec![m];
    while let Some(v) = stack.pop() {
        for &(w, _) in terrain.neighbors(v) {
            if !seen.contains(w) && terrain.low(w) <= cap {
                seen.insert(w);
                stack.push(w);
            }
        }
    }
    seen
}

fn is_connected(terrain: &ImpreciseTerrain, s: &NodeSet) -> bool {
    let Some(start) = s.iter().next() else {
        return false;
    };
    let mut seen = NodeSet::new(terrain.node_count());
    seen.insert(start);
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(w, _) in terrain.neighbors(v) {
            if s.contains(w) && !seen.contains(w) {
                seen.insert(w);
                stack.push(w);
                count += 1;
            }
        }
    }
    count == s.len()
}

/// Whether `s` traps water in every realization and is minimal with that
/// property. `s` must be connected and nonempty.
pub fn is_imprecise_minimum(terrain: &ImpreciseTerrain, s: &NodeSet) -> Result<bool, Error> {
    check_set(terrain, s)?;
    if !is_connected(terrain, s) {
        return Err(Error::DisconnectedSet);
    }
    let m = s
        .iter()
        .min_by(|&a, &b| {
            terrain
                .high(a)
                .total_cmp(&terrain.high(b))
                .then(a.cmp(&b))
        })
        .expect("nonempty");
    Ok(flood_below_bar(terrain, m) == *s)
}

/// Every imprecise minimum of the terrain, ascending by smallest member.
/// Quadratic reference implementation, intended for tests and small inputs.
pub fn all_imprecise_minima(terrain: &ImpreciseTerrain) -> Vec<NodeSet> {
    let mut found: Vec<NodeSet> = Vec::new();
    for v in 0..terrain.node_count() {
        let flood = flood_below_bar(terrain, v);
        let m = flood
            .iter()
            .min_by(|&a, &b| {
                terrain
                    .high(a)
                    .total_cmp(&terrain.high(b))
                    .then(a.cmp(&b))
            })
            .expect("flood contains v");
        if flood_below_bar(terrain, m) == flood && !found.contains(&flood) {
            found.push(flood);
        }
    }
    found.sort_by_key(|s| s.iter().next().expect("nonempty"));
    found
}

// Union-find over pending nodes; roots carry the member list and the
// maximum member low. Merges move the smaller list into the larger.
struct Pending {
    parent: Vec<u32>,
    members: Vec<Vec<u32>>,
    max_low: Vec<f64>,
}

impl Pending {
    fn new(n: usize) -> Self {
        Pending {
            parent: vec![u32::MAX; n],
            members: vec![Vec::new(); n],
            max_low: vec![f64::NAN; n],
        }
    }

    fn activate(&mut self, v: NodeId, low: f64) {
        self.parent[v as usize] = v;
        self.members[v as usize] = vec![v];
        self.max_low[v as usize] = low;
    }

    fn find(&mut self, v: NodeId) -> NodeId {
        let mut r = v;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = v;
        while self.parent[c as usize] != r {
            let next = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.members[ra as usize].len() >= self.members[rb as usize].len()
        {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        let moved = std::mem::take(&mut self.members[small as usize]);
        self.members[big as usize].extend(moved);
        self.max_low[big as usize] =
            self.max_low[big as usize].max(self.max_low[small as usize]);
        big
    }
}

#[derive(Clone, Copy, PartialEq)]
enum NodeState {
    Undiscovered,
    Pending,
    Final,
}

/// Runs the regularization sweep: reports each imprecise minimum with its
/// proxy and the finalized elevation surface `M`.
pub fn regularize_sweep(terrain: &ImpreciseTerrain) -> MinimaReport {
    let n = terrain.node_count() as usize;
    // (elevation, kind, id): low events (kind 0) before high events (kind 1)
    // at equal elevation, then ascending id.
    let mut events: Vec<(f64, u8, NodeId)> = Vec::with_capacity(2 * n);
    for v in 0..terrain.node_count() {
        events.push((terrain.low(v), 0, v));
        events.push((terrain.high(v), 1, v));
    }
    events.sort_unstable_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut state = vec![NodeState::Undiscovered; n];
    let mut pending = Pending::new(n);
    let mut m = vec![f64::NAN; n];
    let mut minima: Vec<NodeSet> = Vec::new();
    let mut proxies: Vec<NodeId> = Vec::new();

    let finalize = |pending: &mut Pending,
                        state: &mut Vec<NodeState>,
                        m: &mut Vec<f64>,
                        root: NodeId,
                        z: f64| {
        for &u in &pending.members[root as usize] {
            state[u as usize] = NodeState::Final;
            m[u as usize] = z;
        }
        pending.members[root as usize].clear();
    };

    for (z, kind, v) in events {
        match kind {
            0 => {
                debug_assert!(state[v as usize] == NodeState::Undiscovered);
                state[v as usize] = NodeState::Pending;
                pending.activate(v, z);
                let mut root = v;
                let mut final_neighbor = false;
                for &(w, _) in terrain.neighbors(v) {
                    match state[w as usize] {
                        NodeState::Pending => root = pending.union(root, w),
                        NodeState::Final => final_neighbor = true,
                        NodeState::Undiscovered => {}
                    }
                }
                if final_neighbor {
                    finalize(&mut pending, &mut state, &mut m, root, z);
                }
            }
            _ => {
                if state[v as usize] == NodeState::Final {
                    continue;
                }
                // A pending node at its high event heads an imprecise
                // minimum; a proxied component would already be final.
                debug_assert!(state[v as usize] == NodeState::Pending);
                let root = pending.find(v);
                let mut members = pending.members[root as usize].clone();
                members.sort_unstable();
                minima.push(NodeSet::from_ids(
                    terrain.node_count(),
                    members.iter().copied(),
                ));
                proxies.push(v);
                let z_final = pending.max_low[root as usize];
                finalize(&mut pending, &mut state, &mut m, root, z_final);
            }
        }
    }

    let mut order: Vec<usize> = (0..proxies.len()).collect();
    order.sort_unstable_by_key(|&i| proxies[i]);
    let minima = order.iter().map(|&i| minima[i].clone()).collect();
    let proxies = order.iter().map(|&i| proxies[i]).collect();
    MinimaReport {
        minima,
        proxies,
        m: Realization::new(m),
    }
}

/// The regularized terrain: lower bounds raised to the sweep's finalized
/// elevations, upper bounds unchanged. Regular, with the same imprecise
/// minima as the input.
pub fn regularized_terrain(terrain: &ImpreciseTerrain) -> ImpreciseTerrain {
    let report = regularize_sweep(terrain);
    let intervals = (0..terrain.node_count())
        .map(|v| ElevationInterval::new(report.m().elev(v), terrain.high(v)))
        .collect();
    let positions = (0..terrain.node_count())
        .map(|v| terrain.position(v))
        .collect();
    ImpreciseTerrain::new(positions, intervals, terrain.edges().to_vec())
}

/// Whether every local minimum of the lowermost realization is an imprecise
/// minimum.
pub fn is_regular(terrain: &ImpreciseTerrain) -> bool {
    check_regular(terrain).is_ok()
}

/// As [`is_regular`], returning the first offending lowermost-realization
/// minimum on failure.
pub fn check_regular(terrain: &ImpreciseTerrain) -> Result<(), Error> {
    let lowermost = terrain.lowermost();
    for min in local_minima(terrain, &lowermost) {
        if !is_imprecise_minimum(terrain, &min).expect("local minima are connected and nonempty")
        {
            return Err(Error::NotRegular {
                minimum: min.ids(),
            });
        }
    }
    Ok(())
}

// ── tests ──────────────────────────────────────────────────────────────────
