//! Brute-force reference implementations backing the test suite.
//!
//! The realization space of an imprecise terrain is continuous; these
//! oracles discretize it with a per-node candidate grid and enumerate every
//! combination. Unions of exact per-realization results are therefore
//! certified *lower bounds* of the potential sets; they reach equality
//! exactly when the grid contains the witnessing elevations, which is why
//! [`LevelGrid::add_canonical`] feeds an algorithm's own claimed elevations
//! back into the grid before comparing.
//!
//! The load-bearing check that needs no discretization at all is
//! [`verify_canonical_witness`]: a potential-watershed result claims that
//! its elevations, completed with upper bounds elsewhere, form a single
//! realization whose exact watershed is the whole member set.

use crate::flow::{forward_reach, watershed};
use crate::sweep::ReachResult;
use crate::terrain::{canon_z, ImpreciseTerrain, NodeId, NodeSet, Realization};
use crate::Error;

/// Cap on the number of enumerated realizations.
pub const REALIZATION_GUARD: u128 = 1_000_000;

/// Per-node finite candidate elevations, always containing both interval
/// endpoints and kept sorted and deduplicated.
#[derive(Debug, Clone)]
pub struct LevelGrid {
    candidates: Vec<Vec<f64>>,
}

impl LevelGrid {
    /// Interval endpoints only: `{low(v), high(v)}` per node.
    pub fn endpoints(terrain: &ImpreciseTerrain) -> LevelGrid {
        let candidates = (0..terrain.node_count())
            .map(|v| {
                let (low, high) = (terrain.low(v), terrain.high(v));
                if low == high {
                    vec![low]
                } else {
                    vec![low, high]
                }
            })
            .collect();
        LevelGrid { candidates }
    }

    /// Endpoints plus every other node's interval endpoints clipped into
    /// each node's own interval.
    pub fn with_cross_endpoints(terrain: &ImpreciseTerrain) -> LevelGrid {
        let mut grid = LevelGrid::endpoints(terrain);
        let mut all: Vec<f64> = Vec::with_capacity(2 * terrain.node_count() as usize);
        for v in 0..terrain.node_count() {
            all.push(terrain.low(v));
            all.push(terrain.high(v));
        }
        for v in 0..terrain.node_count() {
            for &e in &all {
                grid.add(terrain, v, e);
            }
        }
        grid
    }

    /// Adds `z` to `v`'s candidates when it lies inside `v`'s interval.
    pub fn add(&mut self, terrain: &ImpreciseTerrain, v: NodeId, z: f64) {
        if terrain.interval(v).contains(z) {
            let list = &mut self.candidates[v as usize];
            let z = canon_z(z);
            if let Err(pos) = list.binary_search_by(|c| c.total_cmp(&z)) {
                list.insert(pos, z);
            }
        }
    }

    /// Adds every member's claimed elevation to that member's own list.
    pub fn add_canonical(&mut self, terrain: &ImpreciseTerrain, result: &ReachResult) {
        for v in result.members().iter() {
            let z = result.elevation(v).expect("member has an elevation");
            self.add(terrain, v, z);
        }
    }

    pub fn candidates(&self, v: NodeId) -> &[f64] {
        &self.candidates[v as usize]
    }

    /// Number of realizations the grid spans.
    pub fn combination_count(&self) -> u128 {
        self.candidates
            .iter()
            .map(|c| c.len() as u128)
            .try_fold(1u128, u128::checked_mul)
            .unwrap_or(u128::MAX)
    }
}

/// Iterator over every grid realization, odometer order with the last node
/// varying fastest.
pub struct Realizations<'a> {
    grid: &'a LevelGrid,
    indices: Vec<usize>,
    done: bool,
}

impl Iterator for Realizations<'_> {
    type Item = Realization;

    fn next(&mut self) -> Option<Realization> {
        if self.done {
            return None;
        }
        let elev: Vec<f64> = self
            .indices
            .iter()
            .enumerate()
            .map(|(v, &i)| self.grid.candidates[v][i])
            .collect();
        // Advance the odometer.
        let mut pos = self.indices.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.indices[pos] += 1;
            if self.indices[pos] < self.grid.candidates[pos].len() {
                break;
            }
            self.indices[pos] = 0;
        }
        Some(Realization::new(elev))
    }
}

/// Every combination of grid candidates, exactly once. Refuses when the
/// combination count exceeds [`REALIZATION_GUARD`].
pub fn enumerate_realizations<'a>(
    terrain: &ImpreciseTerrain,
    grid: &'a LevelGrid,
) -> Result<Realizations<'a>, Error> {
    assert_eq!(grid.candidates.len(), terrain.node_count() as usize);
    let count = grid.combination_count();
    if count > REALIZATION_GUARD {
        return Err(Error::EnumerationGuard(count, REALIZATION_GUARD));
    }
    Ok(Realizations {
        grid,
        indices: vec![0; grid.candidates.len()],
        done: grid.candidates.iter().any(|c| c.is_empty()),
    })
}

/// Union of the exact watersheds of `q` over all grid realizations: a
/// certified subset of the potential watershed.
pub fn pows_lower_bound(
    terrain: &ImpreciseTerrain,
    q: &NodeSet,
    grid: &LevelGrid,
) -> Result<NodeSet, Error> {
    let mut union = NodeSet::new(terrain.node_count());
    for r in enumerate_realizations(terrain, grid)? {
        union.union_with(&watershed(terrain, &r, q));
    }
    Ok(union)
}

/// Union of exact forward reachability from `q` over all grid realizations:
/// a certified subset of the potential downstream area.
pub fn podel_lower_bound(
    terrain: &ImpreciseTerrain,
    q: &NodeSet,
    grid: &LevelGrid,
) -> Result<NodeSet, Error> {
    let mut union = NodeSet::new(terrain.node_count());
    for r in enumerate_realizations(terrain, grid)? {
        union.union_with(&forward_reach(terrain, &r, q));
    }
    Ok(union)
}

/// Union over grid realizations of the nodes that reach `s \ avoid` along
/// flow paths whose intermediate nodes all stay outside `avoid`: a certified
/// subset of the avoiding potential watershed.
pub fn avws_lower_bound(
    terrain: &ImpreciseTerrain,
    avoid: &NodeSet,
    s: &NodeSet,
    grid: &LevelGrid,
) -> Result<NodeSet, Error> {
    let n = terrain.node_count();
    let mut union = NodeSet::new(n);
    for r in enumerate_realizations(terrain, grid)? {
        let fg = crate::flow::flow_graph(terrain, &r);
        // Reverse-reach from the permitted targets without entering avoid.
        let mut reached = NodeSet::new(n);
        let mut stack: Vec<NodeId> = Vec::new();
        for v in s.iter() {
            if !avoid.contains(v) {
                reached.insert(v);
                stack.push(v);
            }
        }
        while let Some(v) = stack.pop() {
            for &(u, _) in terrain.neighbors(v) {
                if !reached.contains(u)
                    && !avoid.contains(u)
                    && fg.successors(u).contains(&v)
                {
                    reached.insert(u);
                    stack.push(u);
                }
            }
        }
        union.union_with(&reached);
    }
    Ok(union)
}

/// Checks a potential-watershed result against its own witness: members at
/// their canonical elevations and everything else at its upper bound must
/// form a valid realization whose exact watershed is precisely the member
/// set. Errors when the witness elevations leave their intervals.
pub fn verify_canonical_witness(
    terrain: &ImpreciseTerrain,
    q: &NodeSet,
    result: &ReachResult,
) -> Result<bool, Error> {
    let witness = result.witness_realization(terrain);
    witness.check_for(terrain)?;
    let ws = watershed(terrain, &witness, q);
    Ok(ws == *result.members())
}

// ── tests ──────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{potential_downstream, potential_watershed};
    use crate::terrain::ElevationInterval;

    fn set(t: &ImpreciseTerrain, ids: &[NodeId]) -> NodeSet {
        NodeSet::from_ids(t.node_count(), ids.iter().copied())
    }

    fn chain3() -> ImpreciseTerrain {
        ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![
                ElevationInterval::new(5.0, 5.0),
                ElevationInterval::new(2.0, 4.0),
                ElevationInterval::new(0.0, 1.0),
            ],
            vec![(0, 1), (1, 2)],
        )
    }

    fn w_chain() -> ImpreciseTerrain {
        ImpreciseTerrain::new(
            (0..5).map(|i| (f64::from(i), 0.0)).collect(),
            vec![
                ElevationInterval::new(8.0, 9.0),
                ElevationInterval::new(0.0, 1.0),
                ElevationInterval::new(5.0, 6.0),
                ElevationInterval::new(0.0, 2.0),
                ElevationInterval::new(8.0, 9.0),
            ],
            vec![(0, 1), (1, 2), (2, 3), (3, 4)],
        )
    }

    #[test]
    fn enumeration_is_the_cartesian_product() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![
                ElevationInterval::new(0.0, 1.0),
                ElevationInterval::new(2.0, 3.0),
            ],
            vec![(0, 1)],
        );
        let grid = LevelGrid::endpoints(&t);
        let all: Vec<Vec<f64>> = enumerate_realizations(&t, &grid)
            .unwrap()
            .map(|r| r.values().to_vec())
            .collect();
        assert_eq!(
            all,
            vec![
                vec![0.0, 2.0],
                vec![0.0, 3.0],
                vec![1.0, 2.0],
                vec![1.0, 3.0],
            ]
        );
    }

    #[test]
    fn fixed_nodes_contribute_one_candidate() {
        let t = chain3();
        let grid = LevelGrid::endpoints(&t);
        assert_eq!(grid.candidates(0), &[5.0]);
        assert_eq!(grid.combination_count(), 4);
    }

    #[test]
    fn guard_refuses_huge_grids() {
        let n = 30u32;
        let t = ImpreciseTerrain::new(
            (0..n).map(|i| (f64::from(i), 0.0)).collect(),
            vec![ElevationInterval::new(0.0, 1.0); n as usize],
            (0..n - 1).map(|i| (i, i + 1)).collect(),
        );
        let grid = LevelGrid::endpoints(&t);
        assert!(matches!(
            enumerate_realizations(&t, &grid),
            Err(Error::EnumerationGuard(_, _))
        ));
    }

    #[test]
    fn chain_lower_bound_is_everything() {
        let t = chain3();
        let grid = LevelGrid::endpoints(&t);
        let lb = pows_lower_bound(&t, &set(&t, &[2]), &grid).unwrap();
        assert_eq!(lb.ids(), vec![0, 1, 2]);
    }

    #[test]
    fn isolated_node_lower_bound() {
        let t = ImpreciseTerrain::new(
            vec![(0.0, 0.0), (5.0, 0.0)],
            vec![
                ElevationInterval::new(0.0, 1.0),
                ElevationInterval::new(0.0, 1.0),
            ],
            vec![],
        );
        let grid = LevelGrid::endpoints(&t);
        let lb = pows_lower_bound(&t, &set(&t, &[0]), &grid).unwrap();
        assert_eq!(lb.ids(), vec![0]);
    }

    #[test]
    fn canonical_augmented_grid_reaches_the_algorithm() {
        for t in [chain3(), w_chain()] {
            for v in 0..t.node_count() {
                let q = set(&t, &[v]);
                let result = potential_watershed(&t, &q).unwrap();
                let mut grid = LevelGrid::with_cross_endpoints(&t);
                grid.add_canonical(&t, &result);
                let lb = pows_lower_bound(&t, &q, &grid).unwrap();
                assert!(lb.is_subset_of(result.members()), "lower bound exceeded");
                assert_eq!(lb.ids(), result.members().ids(), "gap for q={v}");
            }
        }
    }

    #[test]
    fn downstream_lower_bound_is_sound() {
        let t = w_chain();
        for v in 0..t.node_count() {
            let q = set(&t, &[v]);
            let result = potential_downstream(&t, &q).unwrap();
            let grid = LevelGrid::with_cross_endpoints(&t);
            let lb = podel_lower_bound(&t, &q, &grid).unwrap();
            assert!(lb.is_subset_of(result.members()), "q={v}");
        }
    }

    #[test]
    fn avoiding_lower_bound_is_sound() {
        let t = w_chain();
        let avoid = set(&t, &[1]);
        let s = set(&t, &[3]);
        let exact =
            crate::sweep::avoiding_potential_watershed(&t, &avoid, &s).unwrap();
        let grid = LevelGrid::with_cross_endpoints(&t);
        let lb = avws_lower_bound(&t, &avoid, &s, &grid).unwrap();
        assert!(lb.is_subset_of(exact.members()));
    }

    #[test]
    fn witness_verifies_for_real_results() {
        for t in [chain3(), w_chain()] {
            for v in 0..t.node_count() {
                let q = set(&t, &[v]);
                let result = potential_watershed(&t, &q).unwrap();
                assert!(verify_canonical_witness(&t, &q, &result).unwrap());
            }
        }
    }

    #[test]
    fn witness_rejects_out_of_interval_elevation() {
        let t = chain3();
        let q = set(&t, &[2]);
        let mut result = potential_watershed(&t, &q).unwrap();
        result.perturb_elevation(1, 1.0); // below low(1) = 2
        assert!(verify_canonical_witness(&t, &q, &result).is_err());
    }

    #[test]
    fn witness_detects_missing_member() {
        let t = chain3();
        let q = set(&t, &[2]);
        let mut result = potential_watershed(&t, &q).unwrap();
        result.remove_member(0);
        assert!(!verify_canonical_witness(&t, &q, &result).unwrap());
    }
}
