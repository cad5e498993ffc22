//! Per-node slope diagrams and the tangent queries behind the sweeps.
//!
//! The diagram of a node `p` plots every neighbor `w` at (distance, high(w)).
//! Only the lower-left convex chain of these points matters: a neighbor above
//! it can never be the unique steepest-descent target, because water leaving
//! `p` at elevation `z` follows the lower tangent from the axis point (0, z).
//! Chain vertices are kept in order of increasing distance with strictly
//! decreasing heights, and the z-axis intercepts of consecutive chain lines
//! form a strictly decreasing sequence used for winner lookups.
//!
//! Two query families are built on the chain:
//!
//! * *minimum sending elevation*: the least elevation of `p` at which the
//!   edge towards a neighbor held at a prescribed elevation is a
//!   steepest-descent edge (everything else at its upper bound);
//! * *maximum receivable elevation*: the greatest elevation of a neighbor at
//!   which water leaving `p` somewhere in a prescribed elevation range can
//!   still arrive there.
//!
//! Equal slopes count as flow (ties split), so every boundary case below is
//! inclusive. Comparisons are exact on binary64 values.
//!
//! Intercepts are exact in real arithmetic but carry a few roundings, so a
//! computed boundary elevation can land one step on the wrong side of a slope
//! tie. Every elevation handed to a sweep is therefore reconciled with the
//! division-based predicate the flow graph evaluates ([`sends_at`],
//! [`receives_at`]): nudged by single ulps until the predicate holds, within
//! a fixed budget. This keeps sweep members exactly reproducible from their
//! canonical realizations.

use crate::terrain::{canon_z, ImpreciseTerrain, NodeId};
use crate::Error;

/// Lower-left convex chain over a node's neighbors, with line intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeDiagram {
    owner: NodeId,
    points: Vec<(f64, f64)>,
    intercepts: Vec<f64>,
}

impl SlopeDiagram {
    pub fn owner(&self) -> NodeId {
        self.owner
    }

    /// Chain vertices as (distance, neighbor high), distance ascending.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Intercept `intercepts[i]` is where the line through points `i` and
    /// `i + 1` crosses the vertical axis; strictly decreasing.
    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }
}

/// Builds the slope diagram of `p`. Errors on isolated nodes.
pub fn build_diagram(terrain: &ImpreciseTerrain, p: NodeId) -> Result<SlopeDiagram, Error> {
    let mut pts: Vec<(f64, f64)> = terrain
        .neighbors(p)
        .iter()
        .map(|&(w, len)| (len, terrain.high(w)))
        .collect();
    if pts.is_empty() {
        return Err(Error::IsolatedNode(p));
    }
    let points = build_chain(&mut pts);
    let intercepts = intercepts_of(&points);
    Ok(SlopeDiagram {
        owner: p,
        points,
        intercepts,
    })
}

/// Lower-left convex chain of (distance, height) points: the vertices not
/// dominated towards the lower left, from the nearest to the lowest.
fn build_chain(pts: &mut Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|next, kept| next.0 == kept.0); // keep the lowest per distance
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &pt in pts.iter() {
        while chain.len() >= 2 {
            let o = chain[chain.len() - 2];
            let a = chain[chain.len() - 1];
            let cross = (a.0 - o.0) * (pt.1 - o.1) - (a.1 - o.1) * (pt.0 - o.0);
            if cross <= 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(pt);
    }
    // Points past the first global height minimum never win: same or greater
    // height at a greater distance.
    let mut best = 0;
    for (i, pt) in chain.iter().enumerate() {
        if pt.1 < chain[best].1 {
            best = i;
        }
    }
    chain.truncate(best + 1);
    chain
}

fn intercepts_of(chain: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(chain.len().saturating_sub(1));
    for w in chain.windows(2) {
        let (d0, h0) = w[0];
        let (d1, h1) = w[1];
        let z = h0 - d0 * (h1 - h0) / (d1 - d0);
        debug_assert!(
            out.last().is_none_or(|&prev| z < prev),
            "chain intercepts must decrease strictly"
        );
        out.push(z);
    }
    out
}

/// Intercept of the line through the query point `(delta, zq)` and a chain
/// vertex `(d, h)`. Shared by the linear and binary-search query paths so
/// both produce bit-identical results.
#[inline]
fn constraint_intercept(delta: f64, zq: f64, d: f64, h: f64) -> f64 {
    (zq * d - h * delta) / (d - delta)
}

/// Ulp budget for walking a boundary elevation onto the feasible side of the
/// flow predicate. Intercepts are a handful of roundings away from exact, so
/// a small budget suffices before falling back to coarser probes.
const SEED_WALK_ULPS: u32 = 64;

/// Absolute slack covering the compounded rounding error of intercept and
/// bound computations over operands of the given magnitudes. Rounding errors
/// scale with the operands, not with the result, so after cancellation a
/// bound can be off by far more than a few ulps of its own value.
fn rounding_slack(a: f64, b: f64) -> f64 {
    (a.abs() + b.abs() + 1.0) * (64.0 * f64::EPSILON)
}

/// True when the edge from `p` at `z` towards `q` (at distance `delta`, held
/// at `zq`) is a steepest-descent edge of `p`, every other neighbor of `p` at
/// its upper bound. Evaluated with the same subtraction/division sequence the
/// flow graph uses, so a sweep member passing this check is reproduced
/// exactly by the canonical realization.
// NaN-rejecting comparison on purpose: a non-finite slope never descends.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn sends_at(
    terrain: &ImpreciseTerrain,
    p: NodeId,
    q: NodeId,
    delta: f64,
    zq: f64,
    z: f64,
) -> bool {
    let sq = (z - zq) / delta;
    if !(sq >= 0.0) {
        return false;
    }
    for &(w, len) in terrain.neighbors(p) {
        if w != q && (z - terrain.high(w)) / len > sq {
            return false;
        }
    }
    true
}

/// True when the edge from `v` at `zv` towards `p` held at `zp` is a
/// steepest-descent edge of `v`, every other neighbor of `v` at its upper
/// bound. Mirror of [`sends_at`] for the downward sweep.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn receives_at(
    terrain: &ImpreciseTerrain,
    v: NodeId,
    p: NodeId,
    delta: f64,
    zv: f64,
    zp: f64,
) -> bool {
    let sp = (zv - zp) / delta;
    if !(sp >= 0.0) {
        return false;
    }
    for &(w, len) in terrain.neighbors(v) {
        if w != p && (zv - terrain.high(w)) / len > sp {
            return false;
        }
    }
    true
}

/// Least elevation of `p` (the chain's owner) at which [`sends_at`] holds for
/// the edge towards `q`, or `None`. The chain window estimates the feasible
/// range; the flow predicate itself is the authority. An anchor inside the
/// window is located by an ulp walk and coarse probes, then bisected down to
/// the least accepted elevation.
pub(crate) fn min_send_elev(
    terrain: &ImpreciseTerrain,
    chain: &[(f64, f64)],
    p: NodeId,
    q: NodeId,
    delta: f64,
    zq: f64,
) -> Option<f64> {
    let low_p = terrain.low(p);
    let high_p = terrain.high(p);
    if zq > high_p {
        return None;
    }
    let base = if zq > low_p { zq } else { low_p };
    let mut lower = base;
    let mut upper = high_p;
    for &(d, h) in chain {
        if d == delta {
            // A competitor at the same distance wins outright below zq.
            if zq > h {
                return None;
            }
        } else {
            let i = constraint_intercept(delta, zq, d, h);
            if d > delta {
                if i > lower {
                    lower = i;
                }
            } else if i < upper {
                upper = i;
            }
        }
    }
    let (wl, wh) = if lower <= upper {
        (lower, upper)
    } else if lower > upper + rounding_slack(lower, upper) {
        return None;
    } else {
        // The window closed by a rounding hair; retry between its crossed
        // estimates, clamped to the exact interval bounds.
        (
            if upper > base { upper } else { base },
            if lower < high_p { lower } else { high_p },
        )
    };
    // Anchor: the window's lower edge, walked up by ulps, then the window
    // midpoint and upper edge as coarse fallbacks for larger rounding drift.
    let mut anchor = None;
    let mut z = wl;
    for _ in 0..=SEED_WALK_ULPS {
        if sends_at(terrain, p, q, delta, zq, z) {
            anchor = Some(z);
            break;
        }
        if z >= high_p {
            break;
        }
        z = z.next_up();
    }
    if anchor.is_none() {
        let mid = wl + (wh - wl) / 2.0;
        for cand in [mid, wh] {
            if cand > z && sends_at(terrain, p, q, delta, zq, cand) {
                anchor = Some(cand);
                break;
            }
        }
    }
    let mut hi = anchor?;
    if hi > base {
        if sends_at(terrain, p, q, delta, zq, base) {
            hi = base;
        } else {
            // Bisect (infeasible, feasible) down to the boundary.
            let mut lo = base;
            loop {
                let mid = lo + (hi - lo) / 2.0;
                if mid <= lo || mid >= hi {
                    break;
                }
                if sends_at(terrain, p, q, delta, zq, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
    }
    Some(canon_z(hi))
}

/// Greatest elevation of `p` at which [`receives_at`] holds for water from
/// `v` released at one of `candidates` (pairs of sender elevation and descent
/// value), or `None`. For a fixed sender elevation the receive predicate is
/// down-closed in `zp` (the competitor slopes are constants and `(zv - zp) /
/// delta` is monotone), so each candidate's exact boundary is found by
/// endpoint tests and bisection; the estimate `z + delta * t` only orders the
/// candidates. `order` is caller-provided scratch.
pub(crate) fn max_recv_elev(
    terrain: &ImpreciseTerrain,
    candidates: &[(f64, f64)],
    v: NodeId,
    p: NodeId,
    delta: f64,
    order: &mut Vec<(f64, f64)>,
) -> Option<f64> {
    let low_p = terrain.low(p);
    let high_p = terrain.high(p);
    order.clear();
    order.extend(candidates.iter().map(|&(z, t)| {
        let reach = z + delta * t;
        (if z < reach { z } else { reach }, z)
    }));
    order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut best: Option<f64> = None;
    for &(g, zv) in order.iter() {
        // Upper bound on what this candidate can yield: the estimate plus
        // rounding slack, the sender elevation (the slope towards `p` must
        // stay non-negative) and the receiver's own interval.
        let mut ceiling = g + rounding_slack(g, zv);
        if zv < ceiling {
            ceiling = zv;
        }
        if high_p < ceiling {
            ceiling = high_p;
        }
        if ceiling < low_p || best.is_some_and(|b| ceiling <= b) {
            continue;
        }
        let hi0 = if zv < high_p { zv } else { high_p };
        if receives_at(terrain, v, p, delta, zv, hi0) {
            if best.is_none_or(|b| hi0 > b) {
                best = Some(hi0);
            }
            continue;
        }
        if !receives_at(terrain, v, p, delta, zv, low_p) {
            continue;
        }
        // Bisect (feasible, infeasible) up to the boundary.
        let (mut lo, mut hi) = (low_p, hi0);
        loop {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if receives_at(terrain, v, p, delta, zv, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if best.is_none_or(|b| lo > b) {
            best = Some(lo);
        }
    }
    best.map(canon_z)
}

/// Minimum elevation of the chain's owner at which the edge towards a
/// neighbor at distance `delta`, held at elevation `zq`, is a
/// steepest-descent edge (all other neighbors at their upper bounds).
/// Reference window computation, cross-checked against the binary variant;
/// production goes through [`min_send_elev`].
///
/// The owner at `z` sends water towards the query point iff every chain
/// vertex lies on or above the line through (0, z) and (delta, zq). Since
/// feasible `z` are at least `zq` (slope must be non-negative), that line
/// never rises to the right, which makes the chain vertices a complete set of
/// witnesses for all neighbors.
#[cfg(test)]
pub(crate) fn min_elev_query(
    chain: &[(f64, f64)],
    low_p: f64,
    high_p: f64,
    delta: f64,
    zq: f64,
) -> Option<f64> {
    let mut lower = if zq > low_p { zq } else { low_p };
    let mut upper = high_p;
    for &(d, h) in chain {
        if d == delta {
            // A competitor at the same distance wins outright below zq.
            if zq > h {
                return None;
            }
        } else {
            let i = constraint_intercept(delta, zq, d, h);
            if d > delta {
                if i > lower {
                    lower = i;
                }
            } else if i < upper {
                upper = i;
            }
        }
    }
    if lower <= upper {
        Some(canon_z(lower))
    } else {
        None
    }
}

/// As [`min_elev_query`], but locating the binding chain vertices by binary
/// search over the convex chain. Cross-checked against the linear scan.
#[cfg(test)]
pub(crate) fn min_elev_query_binary(
    chain: &[(f64, f64)],
    low_p: f64,
    high_p: f64,
    delta: f64,
    zq: f64,
) -> Option<f64> {
    let mut lower = if zq > low_p { zq } else { low_p };
    let mut upper = high_p;
    let split = chain.partition_point(|pt| pt.0 < delta);
    let mut right = split;
    if split < chain.len() && chain[split].0 == delta {
        if zq > chain[split].1 {
            return None;
        }
        right = split + 1;
    }
    // Constraint intercepts are single-peaked over the far part of the chain
    // and single-valleyed over the near part (convexity), so the binding one
    // is found by binary search. Plateaus are at most two wide: three chain
    // vertices collinear with the query point would mean three collinear
    // chain vertices.
    if right < chain.len() {
        let sub = &chain[right..];
        let f = |i: usize| constraint_intercept(delta, zq, sub[i].0, sub[i].1);
        let (mut lo, mut hi) = (0usize, sub.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if f(mid) >= f(mid + 1) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let i = f(lo);
        if i > lower {
            lower = i;
        }
    }
    if split > 0 {
        let sub = &chain[..split];
        let f = |i: usize| constraint_intercept(delta, zq, sub[i].0, sub[i].1);
        let (mut lo, mut hi) = (0usize, sub.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if f(mid) <= f(mid + 1) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let i = f(lo);
        if i < upper {
            upper = i;
        }
    }
    if lower <= upper {
        Some(canon_z(lower))
    } else {
        None
    }
}

/// Steepest descent offered to the chain's owner at elevation `z`, as the
/// minimum of `(h_i - z) / d_i` over chain vertices (negative when some
/// neighbor lies below `z`). Linear scan; the production path.
pub(crate) fn descent_value(chain: &[(f64, f64)], z: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &(d, h) in chain {
        let t = (h - z) / d;
        if t < best {
            best = t;
        }
    }
    best
}

/// As [`descent_value`], locating the winning vertex by binary search over
/// the intercept sequence. Cross-checked against the linear scan.
#[cfg(test)]
pub(crate) fn descent_value_binary(chain: &[(f64, f64)], intercepts: &[f64], z: f64) -> f64 {
    let idx = intercepts.partition_point(|&zi| zi > z);
    // Rounding can shift a tie to a neighboring vertex; take the local min.
    let lo = idx.saturating_sub(1);
    let hi = (idx + 1).min(chain.len() - 1);
    let mut best = f64::INFINITY;
    for &(d, h) in &chain[lo..=hi] {
        let t = (h - z) / d;
        if t < best {
            best = t;
        }
    }
    best
}

/// Candidate elevations where the receive envelope can attain its maximum
/// over `[z_min, z_max]`: the endpoints, the chain intercepts (where the
/// winning competitor changes) and the chain heights (where the envelope
/// meets the diagonal). Sorted ascending, deduplicated.
pub(crate) fn receive_candidates(
    chain: &[(f64, f64)],
    intercepts: &[f64],
    z_min: f64,
    z_max: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.push(z_min);
    for &z in intercepts {
        if z_min < z && z < z_max {
            out.push(z);
        }
    }
    for &(_, h) in chain {
        if z_min < h && h < z_max {
            out.push(h);
        }
    }
    if z_max > z_min {
        out.push(z_max);
    }
    out.sort_unstable_by(f64::total_cmp);
    out.dedup();
}

/// Minimum elevation of `p` in its interval such that, with `q` at `zq` and
/// all other neighbors of `p` at their upper bounds, edge `(p, q)` is a
/// steepest-descent edge of `p` with non-negative slope. `None` when no such
/// elevation exists below `high(p)`.
pub fn min_elev_for_edge_flow(
    terrain: &ImpreciseTerrain,
    p: NodeId,
    q: NodeId,
    zq: f64,
) -> Result<Option<f64>, Error> {
    let delta = terrain
        .edge_length(p, q)
        .ok_or(Error::NotAnEdge { p, q })?;
    let diagram = build_diagram(terrain, p)?;
    Ok(min_send_elev(terrain, diagram.points(), p, q, delta, zq))
}

/// For each neighbor `p` of `q`, the minimum elevation of `p` over all
/// realizations with `q` somewhere in `[z, high(q)]` in which water from `p`
/// flows across the edge to `q`. Neighbors without any feasible elevation
/// are omitted. Results ascend by neighbor id.
pub fn expand_pws(
    terrain: &ImpreciseTerrain,
    q: NodeId,
    z: f64,
) -> Result<Vec<(NodeId, f64)>, Error> {
    if !terrain.interval(q).contains(z) {
        return Err(Error::SeedOutOfInterval { node: q, value: z });
    }
    let mut out = Vec::new();
    for &(p, delta) in terrain.neighbors(q) {
        let diagram = build_diagram(terrain, p)?;
        if let Some(zp) = min_send_elev(terrain, diagram.points(), p, q, delta, z) {
            out.push((p, zp));
        }
    }
    Ok(out)
}

/// For each neighbor `p` of `q`, the maximum elevation of `p` in its interval
/// such that some realization with `q` in `[low(q), z]` (other neighbors of
/// `q` at their upper bounds) makes `p` a steepest-descent target of `q`.
/// Neighbors that stay unreachable even at `low(p)` are omitted. Results
/// ascend by neighbor id.
pub fn expand_down(
    terrain: &ImpreciseTerrain,
    q: NodeId,
    z: f64,
) -> Result<Vec<(NodeId, f64)>, Error> {
    if !terrain.interval(q).contains(z) {
        return Err(Error::SeedOutOfInterval { node: q, value: z });
    }
    let diagram = build_diagram(terrain, q)?;
    let mut cand = Vec::new();
    receive_candidates(
        diagram.points(),
        diagram.intercepts(),
        terrain.low(q),
        z,
        &mut cand,
    );
    let with_t: Vec<(f64, f64)> = cand
        .iter()
        .map(|&zq| (zq, descent_value(diagram.points(), zq)))
        .collect();
    let mut out = Vec::new();
    let mut order = Vec::new();
    for &(p, delta) in terrain.neighbors(q) {
        if let Some(zp) = max_recv_elev(terrain, &with_t, q, p, delta, &mut order) {
            out.push((p, zp));
        }
    }
    Ok(out)
}

// ── precomputed diagrams for the sweeps ────────────────────────────────────

/// Slope diagrams of every node, flattened. Built once per sweep; isolated
/// nodes get empty chains (they are never queried: expansion only reaches a
/// node through an edge).
pub(crate) struct Diagrams {
    pt_off: Vec<u32>,
    pts: Vec<(f64, f64)>,
    ic_off: Vec<u32>,
    ics: Vec<f64>,
}

impl Diagrams {
    pub(crate) fn build(terrain: &ImpreciseTerrain) -> Diagrams {
        let n = terrain.node_count() as usize;
        let mut pt_off = Vec::with_capacity(n + 1);
        let mut ic_off = Vec::with_capacity(n + 1);
        let mut pts = Vec::new();
        let mut ics = Vec::new();
        let mut scratch = Vec::new();
        pt_off.push(0u32);
        ic_off.push(0u32);
        for v in 0..terrain.node_count() {
            scratch.clear();
            scratch.extend(
                terrain
                    .neighbors(v)
                    .iter()
                    .map(|&(w, len)| (len, terrain.high(w))),
            );
            let chain = build_chain(&mut scratch);
            let ic = intercepts_of(&chain);
            pts.extend_from_slice(&chain);
            ics.extend_from_slice(&ic);
            pt_off.push(pts.len() as u32);
            ic_off.push(ics.len() as u32);
        }
        Diagrams {
            pt_off,
            pts,
            ic_off,
            ics,
        }
    }

    pub(crate) fn chain(&self, v: NodeId) -> &[(f64, f64)] {
        &self.pts[self.pt_off[v as usize] as usize..self.pt_off[v as usize + 1] as usize]
    }

    pub(crate) fn intercepts(&self, v: NodeId) -> &[f64] {
        &self.ics[self.ic_off[v as usize] as usize..self.ic_off[v as usize + 1] as usize]
    }
}

// ── tests ──────────────────────────────────────────────────────────────────
