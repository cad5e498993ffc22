//! Persistent and core watersheds, composed from the sweeps.
//!
//! The persistent watershed of `Q` keeps exactly the nodes with no potential
//! escape: a node belongs iff no realization lets its water reach a node
//! outside the potential watershed of `Q` without first passing through `Q`.
//! The core watershed additionally treats every potential local minimum
//! outside `Q` as an escape destination (water may simply stop there); no
//! efficient algorithm is known for enumerating those, so that operation is
//! a guarded brute force intended for tests and small instances.

use crate::sweep::{avoiding_potential_watershed, potential_watershed};
use crate::terrain::{ImpreciseTerrain, NodeId, NodeSet};
use crate::Error;

/// Visit cap for the connected-subset enumeration backing
/// [`core_watershed_bruteforce`].
pub const SUBSET_ENUMERATION_GUARD: u64 = 5_000_000;

/// Nodes whose water is guaranteed to reach `q` in every realization:
/// the complement of the set that can drain to the complement of the
/// potential watershed of `q` while avoiding `q`.
pub fn persistent_watershed(terrain: &ImpreciseTerrain, q: &NodeSet) -> Result<NodeSet, Error> {
    let pows = potential_watershed(terrain, q)?;
    let escape = pows.members().complement();
    if escape.is_empty() {
        // Nowhere to escape to: everything drains to q in every realization.
        return Ok(NodeSet::new(terrain.node_count()).complement());
    }
    let reaches_escape = avoiding_potential_watershed(terrain, q, &escape)?;
    Ok(reaches_escape.members().complement())
}

/// Nodes whose water is guaranteed to reach `q` and cannot be trapped in any
/// potential local minimum on the way. Brute force over connected subsets of
/// size at most `max_subset_size`; refuses with a guard error when the
/// enumeration grows past [`SUBSET_ENUMERATION_GUARD`] visits.
pub fn core_watershed_bruteforce(
    terrain: &ImpreciseTerrain,
    q: &NodeSet,
    max_subset_size: u32,
) -> Result<NodeSet, Error> {
    let pows = potential_watershed(terrain, q)?;
    let mut escape = potential_minima_union(terrain, q, max_subset_size)?;
    escape.union_with(&pows.members().complement());
    if escape.is_empty() {
        return Ok(NodeSet::new(terrain.node_count()).complement());
    }
    let reaches_escape = avoiding_potential_watershed(terrain, q, &escape)?;
    Ok(reaches_escape.members().complement())
}

/// Union of all connected node sets `r` disjoint from `q`, of size at most
/// `max_subset_size`, that can form a local minimum in some realization:
/// there is an elevation `z` with `low(s) ≤ z ≤ high(s)` for every `s ∈ r`
/// that stays strictly below `high(t)` for every neighbor `t` of `r`.
fn potential_minima_union(
    terrain: &ImpreciseTerrain,
    q: &NodeSet,
    max_subset_size: u32,
) -> Result<NodeSet, Error> {
    let n = terrain.node_count();
    let mut walk = Walk {
        terrain,
        q,
        root: 0,
        max_size: max_subset_size as usize,
        cur: Vec::new(),
        in_cur: vec![false; n as usize],
        state: vec![Mark::Free; n as usize],
        max_low: 0.0,
        min_high: 0.0,
        visits: 0,
        result: NodeSet::new(n),
    };
    if max_subset_size == 0 {
        return Ok(walk.result);
    }
    for root in 0..n {
        if q.contains(root) {
            continue;
        }
        walk.state.iter_mut().for_each(|s| *s = Mark::Free);
        walk.root = root;
        walk.state[root as usize] = Mark::Queued;
        walk.in_cur[root as usize] = true;
        walk.cur.push(root);
        walk.max_low = terrain.low(root);
        walk.min_high = terrain.high(root);
        let ext: Vec<NodeId> = terrain
            .neighbors(root)
            .iter()
            .map(|&(w, _)| w)
            .filter(|&w| w > root && !q.contains(w))
            .collect();
        for &w in &ext {
            walk.state[w as usize] = Mark::Queued;
        }
        walk.rec(ext)?;
        walk.cur.pop();
        walk.in_cur[root as usize] = false;
    }
    Ok(walk.result)
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Free,
    Queued, // in the current subset or on some extension list
    Banned, // excluded for the rest of the enclosing branch
}

// Enumerates each connected induced subgraph exactly once, rooted at its
// smallest node: every extension candidate is first included (recursively)
// and then banned for the remaining candidates of the same branch.
struct Walk<'a> {
    terrain: &'a ImpreciseTerrain,
    q: &'a NodeSet,
    root: NodeId,
    max_size: usize,
    cur: Vec<NodeId>,
    in_cur: Vec<bool>,
    state: Vec<Mark>,
    max_low: f64,
    min_high: f64,
    visits: u64,
    result: NodeSet,
}

impl Walk<'_> {
    fn record_if_potential_minimum(&mut self) {
        let ml = self.max_low;
        for &s in &self.cur {
            for &(t, _) in self.terrain.neighbors(s) {
                if !self.in_cur[t as usize] && self.terrain.high(t) <= ml {
                    return;
                }
            }
        }
        for &s in &self.cur {
            self.result.insert(s);
        }
    }

    fn rec(&mut self, mut ext: Vec<NodeId>) -> Result<(), Error> {
        self.visits += 1;
        if self.visits > SUBSET_ENUMERATION_GUARD {
            return Err(Error::EnumerationGuard(
                u128::from(self.visits),
                u128::from(SUBSET_ENUMERATION_GUARD),
            ));
        }
        self.record_if_potential_minimum();
        if self.cur.len() < self.max_size {
            let mut banned: Vec<NodeId> = Vec::new();
            while let Some(v) = ext.pop() {
                let ml = self.max_low.max(self.terrain.low(v));
                let mh = self.min_high.min(self.terrain.high(v));
                // Supersets of an interval-infeasible set stay infeasible.
                if ml <= mh {
                    let (saved_ml, saved_mh) = (self.max_low, self.min_high);
                    self.max_low = ml;
                    self.min_high = mh;
                    let mut introduced: Vec<NodeId> = Vec::new();
                    for &(w, _) in self.terrain.neighbors(v) {
                        if w > self.root
                            && self.state[w as usize] == Mark::Free
                            && !self.q.contains(w)
                        {
                            self.state[w as usize] = Mark::Queued;
                            introduced.push(w);
                        }
                    }
                    let mut child_ext = ext.clone();
                    child_ext.extend_from_slice(&introduced);
                    self.cur.push(v);
                    self.in_cur[v as usize] = true;
                    self.rec(child_ext)?;
                    self.in_cur[v as usize] = false;
                    self.cur.pop();
                    for &w in &introduced {
                        self.state[w as usize] = Mark::Free;
                    }
                    self.max_low = saved_ml;
                    self.min_high = saved_mh;
                }
                self.state[v as usize] = Mark::Banned;
                banned.push(v);
            }
            // Restore: banned nodes were on the caller's extension lists.
            for &v in &banned {
                self.state[v as usize] = Mark::Queued;
            }
        }
        Ok(())
    }
}

// ── tests ──────────────────────────────────────────────────────────────────
