//! Property tests over seeded random terrains: every run draws a fresh
//! terrain from the seed, so each property is checked on a broad family of
//! graphs, grids, plateaus and precise/imprecise interval mixes.

mod common;

use common::{
    random_grid_terrain, random_realization, random_subset, random_terrain, rng, set,
};
use fuzzyshed::flow::{flow_graph, forward_reach, watershed};
use fuzzyshed::fuzzy::{fuzzy_boundary_area, fuzzy_ridge, pairwise_intersections};
use fuzzyshed::io::{parse_grid, parse_itg, parse_realization, write_igr, write_itg, write_realization};
use fuzzyshed::oracle::verify_canonical_witness;
use fuzzyshed::regular::{
    all_imprecise_minima, is_imprecise_minimum, is_regular, regularize_sweep, regularized_terrain,
};
use fuzzyshed::sweep::{potential_downstream, potential_watershed};
use fuzzyshed::watershed::persistent_watershed;
use fuzzyshed::{ImpreciseTerrain, NodeId, NodeSet};
use proptest::prelude::*;
use rand::Rng as _;
use rand_chacha::ChaCha8Rng;

/// Terrain for a seed: alternate between general graphs and D8 grids.
fn terrain_for(rng: &mut ChaCha8Rng, seed: u64, max_nodes: u32) -> ImpreciseTerrain {
    if seed % 3 == 0 {
        random_grid_terrain(rng, 4, 4)
    } else {
        random_terrain(rng, max_nodes)
    }
}

fn is_connected_subset(t: &ImpreciseTerrain, s: &NodeSet) -> bool {
    let Some(start) = s.iter().next() else { return false };
    let mut seen = NodeSet::new(t.node_count());
    seen.insert(start);
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(w, _) in t.neighbors(v) {
            if s.contains(w) && !seen.contains(w) {
                seen.insert(w);
                stack.push(w);
                count += 1;
            }
        }
    }
    count == s.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// The canonical witness of every potential-watershed run reproduces the
    /// member set exactly, and every finalized elevation is feasible.
    #[test]
    fn canonical_witness_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 30);
        let q = random_subset(&mut r, &t, 0.2);
        let result = potential_watershed(&t, &q).unwrap();
        prop_assert!(verify_canonical_witness(&t, &q, &result).unwrap());
        prop_assert!(q.is_subset_of(result.members()));
    }

    /// Exact results on any single realization stay inside the potential
    /// sets, and no realization lets a persistent node reach the escape set
    /// (the potential watershed's complement) while avoiding the targets.
    #[test]
    fn realization_soundness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 24);
        let q = random_subset(&mut r, &t, 0.2);
        let pows = potential_watershed(&t, &q).unwrap();
        let podel = potential_downstream(&t, &q).unwrap();
        let psws = persistent_watershed(&t, &q).unwrap();
        prop_assert!(psws.is_subset_of(pows.members()));
        let escape = pows.members().complement();
        for _ in 0..10 {
            let real = random_realization(&mut r, &t);
            prop_assert!(watershed(&t, &real, &q).is_subset_of(pows.members()));
            prop_assert!(forward_reach(&t, &real, &q).is_subset_of(podel.members()));

            // Reverse reachability of the escape set, never expanding
            // through q: anything it reaches is not persistent.
            let fg = flow_graph(&t, &real);
            let mut reaches_escape = escape.clone();
            let mut changed = true;
            while changed {
                changed = false;
                for u in 0..t.node_count() {
                    if reaches_escape.contains(u) || q.contains(u) {
                        continue;
                    }
                    if fg.successors(u).iter().any(|&s| reaches_escape.contains(s)) {
                        reaches_escape.insert(u);
                        changed = true;
                    }
                }
            }
            for v in psws.iter() {
                prop_assert!(!reaches_escape.contains(v), "persistent node {} escapes", v);
            }
        }
    }

    /// p can reach q exactly when q can be reached from p: the downstream
    /// and watershed sweeps are dual.
    #[test]
    fn downstream_watershed_duality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 12);
        let n = t.node_count();
        let pows: Vec<NodeSet> = (0..n)
            .map(|v| potential_watershed(&t, &set(&t, &[v])).unwrap().members().clone())
            .collect();
        let podel: Vec<NodeSet> = (0..n)
            .map(|v| potential_downstream(&t, &set(&t, &[v])).unwrap().members().clone())
            .collect();
        for p in 0..n {
            for q in 0..n {
                prop_assert_eq!(
                    podel[q as usize].contains(p),
                    pows[p as usize].contains(q),
                    "pair ({}, {})", p, q
                );
            }
        }
    }

    /// Reaching a set is reaching one of its members: both sweeps decompose
    /// into unions over singletons.
    #[test]
    fn sweeps_decompose_over_targets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 16);
        let q = random_subset(&mut r, &t, 0.25);
        let mut pows_union = NodeSet::new(t.node_count());
        let mut podel_union = NodeSet::new(t.node_count());
        for v in q.iter() {
            pows_union.union_with(potential_watershed(&t, &set(&t, &[v])).unwrap().members());
            podel_union.union_with(potential_downstream(&t, &set(&t, &[v])).unwrap().members());
        }
        let pows = potential_watershed(&t, &q).unwrap();
        let podel = potential_downstream(&t, &q).unwrap();
        prop_assert_eq!(pows.members(), &pows_union);
        prop_assert_eq!(podel.members(), &podel_union);
    }

    /// Persistent watersheds of regularized terrains nest, and lowermost
    /// watershed containment plunges through the potential watershed.
    #[test]
    fn regular_terrain_lemmas(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 16);

        // Plunging holds on arbitrary terrains.
        let q = random_subset(&mut r, &t, 0.2);
        let ws_low = watershed(&t, &t.lowermost(), &q);
        let mut p = NodeSet::new(t.node_count());
        for v in ws_low.iter() {
            if r.gen_bool(0.4) {
                p.insert(v);
            }
        }
        if p.is_empty() {
            p.insert(ws_low.iter().next().unwrap());
        }
        let pows_p = potential_watershed(&t, &p).unwrap();
        let pows_q = potential_watershed(&t, &q).unwrap();
        prop_assert!(pows_p.members().is_subset_of(pows_q.members()));

        // Nesting holds on regularized terrains.
        let t2 = regularized_terrain(&t);
        let q2 = random_subset(&mut r, &t2, 0.2);
        let psws_q = persistent_watershed(&t2, &q2).unwrap();
        if !psws_q.is_empty() && psws_q.len() < t2.node_count() {
            let mut p2 = NodeSet::new(t2.node_count());
            for v in psws_q.iter() {
                if r.gen_bool(0.4) {
                    p2.insert(v);
                }
            }
            if p2.is_empty() {
                p2.insert(psws_q.iter().next().unwrap());
            }
            let psws_p = persistent_watershed(&t2, &p2).unwrap();
            prop_assert!(psws_p.is_subset_of(&psws_q));
        }
    }

    /// The regularization sweep agrees with the flood-fill definition of
    /// imprecise minima, lifts every spurious pit, and preserves minima.
    #[test]
    fn regularization_lemmas(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 12);
        let report = regularize_sweep(&t);

        report.m().check_for(&t).unwrap();
        let minima = all_imprecise_minima(&t);
        prop_assert_eq!(report.minima().len(), minima.len());
        for (proxy, members) in report.proxies().iter().zip(report.minima()) {
            prop_assert!(members.contains(*proxy), "proxy outside its minimum");
            prop_assert!(minima.contains(members));
        }

        let t2 = regularized_terrain(&t);
        prop_assert!(is_regular(&t2));
        let mut before: Vec<Vec<NodeId>> = minima.iter().map(NodeSet::ids).collect();
        let mut after: Vec<Vec<NodeId>> =
            all_imprecise_minima(&t2).iter().map(NodeSet::ids).collect();
        before.sort();
        after.sort();
        prop_assert_eq!(before, after);
    }

    /// Flood-fill classification of imprecise minima matches checking every
    /// connected subset directly.
    #[test]
    fn imprecise_minima_by_subset_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = terrain_for(&mut r, seed, 9);
        let n = t.node_count();
        let minima = all_imprecise_minima(&t);
        for mask in 1u32..(1 << n) {
            let s = NodeSet::from_ids(n, (0..n).filter(|v| mask >> v & 1 == 1));
            if !is_connected_subset(&t, &s) {
                continue;
            }
            let flagged = is_imprecise_minimum(&t, &s).unwrap();
            prop_assert_eq!(flagged, minima.contains(&s), "subset {:?}", s.ids());
        }
    }

    /// Fuzzy boundary and ridge identities on regularized terrains.
    #[test]
    fn fuzzy_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t2 = regularized_terrain(&terrain_for(&mut r, seed, 14));
        let n = t2.node_count();

        let q = random_subset(&mut r, &t2, 0.2);
        let boundary = fuzzy_boundary_area(&t2, &q).unwrap();
        let pows = potential_watershed(&t2, &q).unwrap();
        let psws = persistent_watershed(&t2, &q).unwrap();
        let mut expect = NodeSet::new(n);
        for v in pows.members().iter() {
            if !psws.contains(v) {
                expect.insert(v);
            }
        }
        prop_assert_eq!(&boundary, &expect);

        let report = regularize_sweep(&t2);
        let proxies = report.proxies().to_vec();
        let ridge = fuzzy_ridge(&t2).unwrap();
        if proxies.len() < 2 {
            prop_assert!(ridge.is_empty());
        } else {
            // Union of the per-basin boundary areas.
            let mut union = NodeSet::new(n);
            for &x in &proxies {
                union.union_with(&fuzzy_boundary_area(&t2, &set(&t2, &[x])).unwrap());
            }
            prop_assert_eq!(&ridge, &union);

            // Proxy identity: PsWS of one proxy is the complement of what
            // the other proxies can capture.
            for &x in &proxies {
                let mut others = NodeSet::new(n);
                for &y in &proxies {
                    if y != x {
                        others.union_with(potential_watershed(&t2, &set(&t2, &[y])).unwrap().members());
                    }
                }
                let psws_x = persistent_watershed(&t2, &set(&t2, &[x])).unwrap();
                prop_assert_eq!(&psws_x, &others.complement());
            }

            // Order of the sources does not change the intersection set.
            let mut reversed = proxies.clone();
            reversed.reverse();
            prop_assert_eq!(
                pairwise_intersections(&t2, &proxies).unwrap(),
                pairwise_intersections(&t2, &reversed).unwrap()
            );
        }
    }

    /// PsWS over every nonempty subset of a small imprecise minimum
    /// intersects to the proxy's own persistent watershed.
    #[test]
    fn proxy_intersection_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t2 = regularized_terrain(&terrain_for(&mut r, seed, 12));
        let report = regularize_sweep(&t2);
        for (proxy, members) in report.proxies().iter().zip(report.minima()) {
            let ids = members.ids();
            if ids.len() > 4 {
                continue;
            }
            let mut intersection = NodeSet::new(t2.node_count()).complement();
            for mask in 1u32..(1 << ids.len()) {
                let subset = NodeSet::from_ids(
                    t2.node_count(),
                    ids.iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &v)| v),
                );
                let psws = persistent_watershed(&t2, &subset).unwrap();
                let mut next = NodeSet::new(t2.node_count());
                for v in intersection.iter() {
                    if psws.contains(v) {
                        next.insert(v);
                    }
                }
                intersection = next;
            }
            let psws_proxy = persistent_watershed(&t2, &set(&t2, &[*proxy])).unwrap();
            prop_assert_eq!(&intersection, &psws_proxy);
        }
    }

    /// Serialization round-trips reproduce the structure exactly.
    #[test]
    fn format_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_terrain(&mut r, 20);
        let t2 = parse_itg(&write_itg(&t)).unwrap();
        prop_assert_eq!(t.node_count(), t2.node_count());
        prop_assert_eq!(t.edges(), t2.edges());
        for v in 0..t.node_count() {
            prop_assert_eq!(t.position(v), t2.position(v));
            prop_assert_eq!(t.interval(v), t2.interval(v));
        }
        prop_assert_eq!(write_itg(&t), write_itg(&t2));

        let real = random_realization(&mut r, &t);
        prop_assert_eq!(&parse_realization(&write_realization(&real)).unwrap(), &real);

        let g = random_grid_terrain(&mut r, 3, 3);
        let spec = fuzzyshed::io::GridSpec {
            ncols: 3,
            nrows: 3,
            cellsize: 1.0,
            low: (0..9).map(|v| g.low(v)).collect(),
            high: (0..9).map(|v| g.high(v)).collect(),
        };
        let spec2 = parse_grid(&write_igr(&spec)).unwrap();
        prop_assert_eq!(spec.ncols, spec2.ncols);
        prop_assert_eq!(spec.nrows, spec2.nrows);
        prop_assert_eq!(spec.cellsize, spec2.cellsize);
        prop_assert_eq!(spec.low, spec2.low);
        prop_assert_eq!(spec.high, spec2.high);
    }
}
