//! Fuzzy watershed boundaries and the fuzzy ridge, on regular terrains.
//!
//! The fuzzy boundary of `Q` is the area that may or may not drain to `Q`
//! depending on the true elevations: the potential watershed minus the
//! persistent one. On a regular terrain it is computed with a single sweep
//! seeded from the edges where the lowermost realization's watershed of `Q`
//! ends, avoiding `Q` itself. The fuzzy ridge is the union of pairwise overlaps of the potential
//! watersheds of the imprecise minima; seeding from the separator edges of
//! one tagged sweep computes it without enumerating pairs.

use crate::flow::crossing;
use crate::regular::{check_regular, regularize_sweep};
use crate::slope::{min_send_elev, Diagrams};
use crate::sweep::{
    min_sweep, potential_watershed, tagged_potential_watershed_with_tie, ReachResult, TieBreak,
};
use crate::terrain::{ImpreciseTerrain, NodeId, NodeSet};
use crate::Error;

/// Nodes that drain to `q` in some realization but not in all of them:
/// the potential watershed minus the persistent watershed. The terrain must
/// be regular.
pub fn fuzzy_boundary_area(terrain: &ImpreciseTerrain, q: &NodeSet) -> Result<NodeSet, Error> {
    check_regular(terrain)?;
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
    let lowermost = terrain.lowermost();
    let diagrams = Diagrams::build(terrain);
    let mut seeds: Vec<(NodeId, f64, NodeId)> = Vec::new();
    for (u, v) in crossing(terrain, &lowermost, q) {
        // The inside endpoint seeds only when it is not a target: water that
        // has reached `q` has drained to it, so a target never escapes.
        if !q.contains(u) {
            push_edge_seed(terrain, &diagrams, u, v, terrain.low(v), &mut seeds);
        }
        push_edge_seed(terrain, &diagrams, v, u, terrain.low(u), &mut seeds);
    }
    // Avoiding `q` keeps the growth to escape routes: a node whose only path
    // to a seed passes through a target still drains to `q` on that path.
    let result = min_sweep(terrain, &diagrams, &seeds, Some(q), false, TieBreak::IdAscending);
    Ok(result.members().clone())
}

/// Seed `(u, z)` where `z` is the least elevation of `u` that sends water
/// across the edge to `v` held at `zv`; skipped when no elevation works.
fn push_edge_seed(
    terrain: &ImpreciseTerrain,
    diagrams: &Diagrams,
    u: NodeId,
    v: NodeId,
    zv: f64,
    seeds: &mut Vec<(NodeId, f64, NodeId)>,
) {
    let delta = terrain
        .edge_length(u, v)
        .expect("crossing and separator pairs are edges");
    if let Some(z) = min_send_elev(terrain, diagrams.chain(u), u, v, delta, zv) {
        seeds.push((u, z, u));
    }
}

/// Union over source pairs of the overlap of their potential watersheds.
/// Sources must be pairwise distinct and outside each other's potential
/// watershed (checked; one sweep per source).
pub fn pairwise_intersections(
    terrain: &ImpreciseTerrain,
    sources: &[NodeId],
) -> Result<NodeSet, Error> {
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
    if sources.len() < 2 {
        return Ok(NodeSet::new(terrain.node_count()));
    }
    for &j in sources {
        let pows =
            potential_watershed(terrain, &NodeSet::from_ids(terrain.node_count(), [j]))?;
        for &i in sources {
            if i != j && pows.members().contains(i) {
                return Err(Error::SourceInPotentialWatershed { contained: i, of: j });
            }
        }
    }
    pairwise_intersections_unchecked(terrain, sources, TieBreak::IdAscending)
}

/// The separator re-seeding pass, without the precondition sweeps. Exposed
/// within the crate for callers that already guarantee the precondition.
pub(crate) fn pairwise_intersections_unchecked(
    terrain: &ImpreciseTerrain,
    sources: &[NodeId],
    tie: TieBreak,
) -> Result<NodeSet, Error> {
    let (tagged, separator): (ReachResult, _) =
        tagged_potential_watershed_with_tie(terrain, sources, tie)?;
    let diagrams = Diagrams::build(terrain);
    let mut seeds: Vec<(NodeId, f64, NodeId)> = Vec::new();
    for &(u, v) in separator.edges() {
        let zu = tagged.elevation(u).expect("separator endpoints are members");
        let zv = tagged.elevation(v).expect("separator endpoints are members");
        push_edge_seed(terrain, &diagrams, u, v, zv, &mut seeds);
        push_edge_seed(terrain, &diagrams, v, u, zu, &mut seeds);
    }
    let result = min_sweep(terrain, &diagrams, &seeds, None, false, tie);
    Ok(result.members().clone())
}

/// Nodes whose destination minimum is uncertain: the union of the pairwise
/// overlaps of the potential watersheds of the imprecise minima, computed
/// through their proxies. The terrain must be regular; with fewer than two
/// minima the ridge is empty.
pub fn fuzzy_ridge(terrain: &ImpreciseTerrain) -> Result<NodeSet, Error> {
    check_regular(terrain)?;
    let report = regularize_sweep(terrain);
    if report.proxies().len() < 2 {
        return Ok(NodeSet::new(terrain.node_count()));
    }
    // Each proxy's persistent watershed contains the proxy itself, hence
    // proxies lie outside each other's potential watersheds and the
    // precondition sweeps can be skipped.
    pairwise_intersections_unchecked(terrain, report.proxies(), TieBreak::IdAscending)
}

// ── tests ──────────────────────────────────────────────────────────────────
