//! Command-line interface over the analysis library.
//!
//! One subcommand per operation; terrain files are loaded by extension or
//! `--format`, results go to stdout in the deterministic text formats, and
//! notices go to stderr. Exit codes: 0 success, 1 usage, 2 bad data,
//! 3 failed precondition.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::{self, GridSpec};
use crate::terrain::{ImpreciseTerrain, NodeId, NodeSet};
use crate::{flow, fuzzy, regular, sweep, watershed, Error};

/// Parses `args` (including the program name) and executes one subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

#[derive(Parser)]
#[command(name = "fuzzyshed", version, about = "Water-flow structures on imprecise terrains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    /// Node/edge list with elevation intervals
    Itg,
    /// Raster DEM pair expanded to a D8 grid
    Igr,
}

#[derive(Args)]
struct TerrainArg {
    /// Terrain file: .itg node/edge list or .igr raster pair
    #[arg(long, value_name = "FILE")]
    terrain: PathBuf,
    /// Input format when the file extension does not decide it
    #[arg(long, value_enum, value_name = "FMT")]
    format: Option<Format>,
}

#[derive(Args)]
struct MaskArg {
    /// Also write the result as a 0/1 raster mask (grid terrains only)
    #[arg(long, value_name = "FILE")]
    mask: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact watershed of target nodes on a fixed realization
    Flow {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Realization file in the `realization` output format
        #[arg(long, value_name = "FILE")]
        realization: PathBuf,
        /// Target node ids, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',', required = true)]
        targets: Vec<NodeId>,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Potential watershed of target nodes, optionally avoiding a node set
    Powershed {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Target node ids, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',', required = true)]
        targets: Vec<NodeId>,
        /// Node ids flow must not pass through, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',')]
        avoid: Option<Vec<NodeId>>,
        /// Write the canonical witness realization to this file
        #[arg(long, value_name = "FILE")]
        canonical: Option<PathBuf>,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Potential downstream area of source nodes
    Downstream {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Source node ids, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',', required = true)]
        sources: Vec<NodeId>,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Persistent watershed of target nodes
    Persistent {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Target node ids, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',', required = true)]
        targets: Vec<NodeId>,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Imprecise minima, their proxies, and the regularized lower bound
    Minima {
        #[command(flatten)]
        terrain: TerrainArg,
    },
    /// Write a regularized copy of the terrain
    Regularize {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Output terrain file, written in the input's format
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Fuzzy boundary area of target nodes
    Boundary {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Target node ids, comma separated
        #[arg(long, value_name = "IDS", value_delimiter = ',', required = true)]
        targets: Vec<NodeId>,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Fuzzy ridge between the basins of the imprecise minima
    Ridge {
        #[command(flatten)]
        terrain: TerrainArg,
        /// Regularize first instead of failing on a non-regular terrain
        #[arg(long)]
        auto_regularize: bool,
        #[command(flatten)]
        mask: MaskArg,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Lib(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Lib(e) => match e {
                Error::NotRegular { .. }
                | Error::SourceInPotentialWatershed { .. }
                | Error::EmptyTargets
                | Error::EmptySet
                | Error::DisconnectedSet => 3,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Data(msg) => f.write_str(msg),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Loaded {
    terrain: ImpreciseTerrain,
    grid: Option<GridSpec>,
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load(arg: &TerrainArg) -> Result<Loaded, Failure> {
    let format = match arg.format {
        Some(f) => f,
        None => match arg.terrain.extension().and_then(|e| e.to_str()) {
            Some("itg") => Format::Itg,
            Some("igr") => Format::Igr,
            _ => {
                return Err(Failure::Usage(format!(
                    "cannot infer the format of {}; pass --format itg|igr",
                    arg.terrain.display()
                )))
            }
        },
    };
    let text = read_file(&arg.terrain)?;
    match format {
        Format::Itg => Ok(Loaded { terrain: io::parse_itg(&text)?, grid: None }),
        Format::Igr => {
            let grid = io::parse_grid(&text)?;
            let terrain = io::validated(grid.terrain())?;
            Ok(Loaded { terrain, grid: Some(grid) })
        }
    }
}

fn node_set(terrain: &ImpreciseTerrain, ids: &[NodeId]) -> Result<NodeSet, Failure> {
    let n = terrain.node_count();
    let mut set = NodeSet::new(n);
    for &id in ids {
        if id >= n {
            return Err(Failure::Lib(Error::NodeOutOfRange { node: id, nodes: n }));
        }
        set.insert(id);
    }
    Ok(set)
}

fn check_mask(loaded: &Loaded, mask: &MaskArg) -> Result<(), Failure> {
    if mask.mask.is_some() && loaded.grid.is_none() {
        return Err(Failure::Usage("--mask requires a grid terrain".into()));
    }
    Ok(())
}

fn emit_set(loaded: &Loaded, set: &NodeSet, mask: &MaskArg) -> Result<(), Failure> {
    print!("{}", io::write_nodeset(set));
    if let Some(path) = &mask.mask {
        let grid = loaded.grid.as_ref().expect("mask checked against the input");
        write_file(path, &io::write_mask(grid.ncols, grid.nrows, set))?;
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Flow { terrain, realization, targets, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let r = io::parse_realization(&read_file(&realization)?)?;
            r.check_for(&loaded.terrain)?;
            let q = node_set(&loaded.terrain, &targets)?;
            let set = flow::watershed(&loaded.terrain, &r, &q);
            emit_set(&loaded, &set, &mask)
        }
        Command::Powershed { terrain, targets, avoid, canonical, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let q = node_set(&loaded.terrain, &targets)?;
            let result = match &avoid {
                Some(ids) => {
                    let avoid_set = node_set(&loaded.terrain, ids)?;
                    sweep::avoiding_potential_watershed(&loaded.terrain, &avoid_set, &q)?
                }
                None => sweep::potential_watershed(&loaded.terrain, &q)?,
            };
            if let Some(path) = &canonical {
                let witness = result.witness_realization(&loaded.terrain);
                write_file(path, &io::write_realization(&witness))?;
            }
            emit_set(&loaded, result.members(), &mask)
        }
        Command::Downstream { terrain, sources, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let q = node_set(&loaded.terrain, &sources)?;
            let result = sweep::potential_downstream(&loaded.terrain, &q)?;
            emit_set(&loaded, result.members(), &mask)
        }
        Command::Persistent { terrain, targets, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let q = node_set(&loaded.terrain, &targets)?;
            let set = watershed::persistent_watershed(&loaded.terrain, &q)?;
            emit_set(&loaded, &set, &mask)
        }
        Command::Minima { terrain } => {
            let loaded = load(&terrain)?;
            let report = regular::regularize_sweep(&loaded.terrain);
            print!("{}", io::write_minima(&report));
            print!("{}", io::write_realization(report.m()));
            Ok(())
        }
        Command::Regularize { terrain, out } => {
            let loaded = load(&terrain)?;
            let t2 = regular::regularized_terrain(&loaded.terrain);
            let text = match &loaded.grid {
                Some(grid) => {
                    let low = (0..t2.node_count()).map(|v| t2.low(v)).collect();
                    io::write_igr(&GridSpec { low, ..grid.clone() })
                }
                None => io::write_itg(&t2),
            };
            write_file(&out, &text)
        }
        Command::Boundary { terrain, targets, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let q = node_set(&loaded.terrain, &targets)?;
            let set = fuzzy::fuzzy_boundary_area(&loaded.terrain, &q)?;
            emit_set(&loaded, &set, &mask)
        }
        Command::Ridge { terrain, auto_regularize, mask } => {
            let loaded = load(&terrain)?;
            check_mask(&loaded, &mask)?;
            let regularized;
            let t = if auto_regularize {
                regularized = regular::regularized_terrain(&loaded.terrain);
                &regularized
            } else {
                &loaded.terrain
            };
            regular::check_regular(t)?;
            let minima = regular::regularize_sweep(t).minima().len();
            if minima < 2 {
                eprintln!("notice: terrain has {minima} imprecise minima; the fuzzy ridge is empty");
            }
            let set = fuzzy::fuzzy_ridge(t)?;
            emit_set(&loaded, &set, &mask)
        }
    }
}

// ── tests ──────────────────────────────────────────────────────────────────
