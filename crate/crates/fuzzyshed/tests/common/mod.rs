//! Shared helpers for the integration test suite: fixture loading and
//! seeded random terrain generation.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fuzzyshed::io::{self, GridSpec};
use fuzzyshed::{ElevationInterval, ImpreciseTerrain, NodeId, NodeSet, Realization};

/// Graph fixtures bundled under `tests/data`.
pub const ITG_FIXTURES: &[&str] = &[
    "chain_pit",
    "split_persistent",
    "nesting_violation",
    "oversampled_valley",
    "twin_pits",
];

/// Grid fixtures bundled under `tests/data`.
pub const IGR_FIXTURES: &[&str] = &["ridge_columns", "uncertain_saddle"];

pub fn fixture_path(name: &str) -> PathBuf {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.push("tests/data");
    path.push(name);
    path
}

/// Loads a bundled fixture by its file name (with extension).
pub fn fixture(file: &str) -> ImpreciseTerrain {
    let path = fixture_path(file);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if file.ends_with(".igr") {
        io::parse_igr(&text).expect("fixture parses")
    } else {
        io::parse_itg(&text).expect("fixture parses")
    }
}

/// Every bundled fixture, graph and grid, with its file name.
pub fn all_fixtures() -> Vec<(String, ImpreciseTerrain)> {
    let mut out = Vec::new();
    for name in ITG_FIXTURES {
        out.push((format!("{name}.itg"), fixture(&format!("{name}.itg"))));
    }
    for name in IGR_FIXTURES {
        out.push((format!("{name}.igr"), fixture(&format!("{name}.igr"))));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn set(terrain: &ImpreciseTerrain, ids: &[NodeId]) -> NodeSet {
    NodeSet::from_ids(terrain.node_count(), ids.iter().copied())
}

/// Quantized elevation in [0, limit): multiples of 0.25 generate the ties
/// and plateaus that stress the algorithms.
fn quantized(rng: &mut ChaCha8Rng, limit: f64) -> f64 {
    (rng.gen_range(0.0..limit) * 4.0).round() / 4.0
}

fn random_intervals(rng: &mut ChaCha8Rng, n: u32) -> Vec<ElevationInterval> {
    (0..n)
        .map(|_| {
            let low = quantized(rng, 10.0);
            let width = if rng.gen_bool(0.3) { 0.0 } else { quantized(rng, 3.0) };
            ElevationInterval::new(low, low + width)
        })
        .collect()
}

/// Random connected terrain with `2..=max_nodes` nodes: a random spanning
/// tree plus a few extra edges, quantized elevation intervals.
pub fn random_terrain(rng: &mut ChaCha8Rng, max_nodes: u32) -> ImpreciseTerrain {
    let n = rng.gen_range(2..=max_nodes);
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect();
    let intervals = random_intervals(rng, n);
    let mut edges: Vec<(NodeId, NodeId)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..rng.gen_range(0..=n) {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    ImpreciseTerrain::new(positions, intervals, edges)
}

/// Random D8 grid terrain with quantized elevation intervals.
pub fn random_grid_terrain(rng: &mut ChaCha8Rng, ncols: u32, nrows: u32) -> ImpreciseTerrain {
    let n = ncols * nrows;
    let intervals = random_intervals(rng, n);
    GridSpec {
        ncols,
        nrows,
        cellsize: 1.0,
        low: intervals.iter().map(|iv| iv.low).collect(),
        high: intervals.iter().map(|iv| iv.high).collect(),
    }
    .terrain()
}

/// Random realization; half the samples are quantized to hit exact ties.
pub fn random_realization(rng: &mut ChaCha8Rng, terrain: &ImpreciseTerrain) -> Realization {
    let elev = (0..terrain.node_count())
        .map(|v| {
            let (low, high) = (terrain.low(v), terrain.high(v));
            if low == high {
                low
            } else if rng.gen_bool(0.5) {
                let steps = ((high - low) * 4.0) as u32;
                low + f64::from(rng.gen_range(0..=steps)) * 0.25
            } else {
                rng.gen_range(low..=high)
            }
        })
        .collect();
    Realization::new(elev)
}

/// Random nonempty node set; each node joins with probability `p`.
pub fn random_subset(rng: &mut ChaCha8Rng, terrain: &ImpreciseTerrain, p: f64) -> NodeSet {
    let n = terrain.node_count();
    let mut s = NodeSet::new(n);
    for v in 0..n {
        if rng.gen_bool(p) {
            s.insert(v);
        }
    }
    if s.is_empty() {
        s.insert(rng.gen_range(0..n));
    }
    s
}
