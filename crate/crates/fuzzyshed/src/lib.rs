//! Watershed analysis on terrains with uncertain elevations.
//!
//! A terrain is a geometric graph whose nodes carry an elevation interval
//! instead of a single value. Water follows steepest-descent edges, so every
//! choice of concrete elevations (a *realization*) induces its own drainage
//! pattern. This crate computes the structures that summarize all of them:
//!
//! * [`flow`] — exact watersheds, local minima and boundary edges for one
//!   fixed realization;
//! * [`sweep`] — the potential watershed (everything that *can* drain to a
//!   target, with its canonical witness realization), the potential
//!   downstream area, and avoiding/tagged sweep variants;
//! * [`watershed`] — the persistent watershed (everything that cannot drain
//!   anywhere else) and a brute-force core watershed for small inputs;
//! * [`regular`] — imprecise minima, their proxy nodes, and the
//!   regularization sweep that lifts spurious pits;
//! * [`fuzzy`] — fuzzy watershed boundaries and the fuzzy ridge between
//!   basins of a regular terrain;
//! * [`oracle`] — brute-force enumeration references used by the test suite;
//! * [`io`] — the ITG graph / IGR grid text formats and deterministic result
//!   serialization;
//! * [`cli`] — the `fuzzyshed` command-line interface.
//!
//! All comparisons are exact on binary64 values and every set iterates in
//! ascending node order, so identical inputs produce identical outputs.

pub mod cli;
pub mod flow;
pub mod fuzzy;
pub mod io;
pub mod oracle;
pub mod regular;
pub mod slope;
pub mod sweep;
pub mod terrain;
pub mod watershed;

pub use terrain::{ElevationInterval, ImpreciseTerrain, NodeId, NodeSet, Realization, Violation};

/// Errors surfaced by parsing, validation and the analysis operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("terrain validation failed:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node id {node} out of range (terrain has {nodes} nodes)")]
    NodeOutOfRange { node: NodeId, nodes: u32 },
    #[error("realization has {values} values but terrain has {nodes} nodes")]
    RealizationMismatch { nodes: u32, values: usize },
    #[error("node {node}: elevation {value} lies outside its interval")]
    ElevationOutOfInterval { node: NodeId, value: f64 },
    #[error("({p}, {q}) is not an edge")]
    NotAnEdge { p: NodeId, q: NodeId },
    #[error("node {0} is isolated and has no slope diagram")]
    IsolatedNode(NodeId),
    #[error("elevation {value} outside the interval of node {node}")]
    SeedOutOfInterval { node: NodeId, value: f64 },
    #[error("target set is empty")]
    EmptyTargets,
    #[error("duplicate source node {0}")]
    DuplicateSource(NodeId),
    #[error("source {contained} lies in the potential watershed of source {of}")]
    SourceInPotentialWatershed { contained: NodeId, of: NodeId },
    #[error("node set is empty")]
    EmptySet,
    #[error("node set is not connected")]
    DisconnectedSet,
    #[error(
        "terrain is not regular: the lowermost realization has a local minimum {{{}}} that is not an imprecise minimum",
        format_ids(minimum)
    )]
    NotRegular { minimum: Vec<NodeId> },
    #[error("enumeration would visit {0} combinations, above the guard of {1}")]
    EnumerationGuard(u128, u128),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn format_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
