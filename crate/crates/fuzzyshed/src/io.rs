//! Terrain file formats and deterministic result serialization.
//!
//! Two input formats: `itg` is an explicit node/edge list, `igr` is a
//! raster DEM pair expanded into a D8 grid graph. Parsers are lenient about
//! whitespace and ordering; writers emit one canonical form (ASCII, single
//! spaces, LF endings, shortest round-trip decimals), so `write ∘ parse` is
//! idempotent and all outputs are byte-deterministic.

use std::fmt::Write as _;

use crate::regular::MinimaReport;
use crate::terrain::{ElevationInterval, ImpreciseTerrain, NodeSet, Realization};
use crate::Error;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Line reader tracking 1-based line numbers for error reporting.
struct Cursor<'a> {
    lines: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { lines: text.lines(), line: 0 }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, Error> {
        self.line += 1;
        self.lines
            .next()
            .ok_or_else(|| parse_err(self.line, format!("expected {what}, found end of input")))
    }

    fn expect_end(&mut self) -> Result<(), Error> {
        for rest in self.lines.by_ref() {
            self.line += 1;
            if !rest.trim().is_empty() {
                return Err(parse_err(self.line, "unexpected trailing content"));
            }
        }
        Ok(())
    }
}

fn parse_u32(cur: &Cursor, tok: &str, what: &str) -> Result<u32, Error> {
    tok.parse()
        .map_err(|_| parse_err(cur.line, format!("invalid {what} {tok:?}")))
}

fn parse_f64(cur: &Cursor, tok: &str, what: &str) -> Result<f64, Error> {
    tok.parse()
        .map_err(|_| parse_err(cur.line, format!("invalid {what} {tok:?}")))
}

pub(crate) fn validated(terrain: ImpreciseTerrain) -> Result<ImpreciseTerrain, Error> {
    let violations = terrain.validate();
    if violations.is_empty() {
        Ok(terrain)
    } else {
        Err(Error::Invalid(violations))
    }
}

// ── itg: node/edge list ────────────────────────────────────────────────────

/// Parses the node/edge-list terrain format and validates the result.
pub fn parse_itg(text: &str) -> Result<ImpreciseTerrain, Error> {
    let mut cur = Cursor::new(text);
    let header = cur.next("header")?;
    if header.trim() != "itg 1" {
        return Err(parse_err(cur.line, format!("expected \"itg 1\", found {header:?}")));
    }

    let line = cur.next("node count")?;
    let n: u32 = match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
        ["nodes", count] => parse_u32(&cur, count, "node count")?,
        _ => return Err(parse_err(cur.line, format!("expected \"nodes N\", found {line:?}"))),
    };

    let mut positions = vec![(0.0, 0.0); n as usize];
    let mut intervals = vec![ElevationInterval::new(0.0, 0.0); n as usize];
    let mut seen = vec![false; n as usize];
    for _ in 0..n {
        let line = cur.next("node line")?;
        let tok: Vec<&str> = line.split_ascii_whitespace().collect();
        if tok.len() != 5 {
            return Err(parse_err(cur.line, format!("expected \"id x y low high\", found {line:?}")));
        }
        let id = parse_u32(&cur, tok[0], "node id")?;
        if id >= n {
            return Err(parse_err(cur.line, format!("node id {id} out of range 0..{n}")));
        }
        if seen[id as usize] {
            return Err(parse_err(cur.line, format!("duplicate node id {id}")));
        }
        seen[id as usize] = true;
        let x = parse_f64(&cur, tok[1], "x coordinate")?;
        let y = parse_f64(&cur, tok[2], "y coordinate")?;
        let low = parse_f64(&cur, tok[3], "low elevation")?;
        let high = parse_f64(&cur, tok[4], "high elevation")?;
        positions[id as usize] = (x, y);
        intervals[id as usize] = ElevationInterval::new(low, high);
    }

    let line = cur.next("edge count")?;
    let m: u32 = match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
        ["edges", count] => parse_u32(&cur, count, "edge count")?,
        _ => return Err(parse_err(cur.line, format!("expected \"edges M\", found {line:?}"))),
    };

    let mut edges = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let line = cur.next("edge line")?;
        let tok: Vec<&str> = line.split_ascii_whitespace().collect();
        if tok.len() != 2 {
            return Err(parse_err(cur.line, format!("expected \"u v\", found {line:?}")));
        }
        let u = parse_u32(&cur, tok[0], "edge endpoint")?;
        let v = parse_u32(&cur, tok[1], "edge endpoint")?;
        if u >= n || v >= n {
            return Err(parse_err(cur.line, format!("edge ({u}, {v}) out of range 0..{n}")));
        }
        edges.push((u, v));
    }
    cur.expect_end()?;

    validated(ImpreciseTerrain::new(positions, intervals, edges))
}

/// Serializes a terrain in canonical node/edge-list form.
pub fn write_itg(terrain: &ImpreciseTerrain) -> String {
    let mut out = String::new();
    let n = terrain.node_count();
    let _ = writeln!(out, "itg 1");
    let _ = writeln!(out, "nodes {n}");
    for v in 0..n {
        let (x, y) = terrain.position(v);
        let _ = writeln!(out, "{v} {x} {y} {} {}", terrain.low(v), terrain.high(v));
    }
    let _ = writeln!(out, "edges {}", terrain.edges().len());
    for &(u, v) in terrain.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

// ── igr: raster DEM pair ───────────────────────────────────────────────────

/// A raster DEM pair: per-cell elevation bounds on a square grid, row-major
/// north to south. Cell (row, col) becomes node `row·ncols + col`.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub ncols: u32,
    pub nrows: u32,
    pub cellsize: f64,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl GridSpec {
    pub fn cells(&self) -> u32 {
        self.ncols * self.nrows
    }

    /// Expands the rasters into a D8 grid graph. Orthogonal edges have
    /// length cellsize, diagonal edges binary64 √2·cellsize.
    pub fn terrain(&self) -> ImpreciseTerrain {
        let (w, h, c) = (self.ncols, self.nrows, self.cellsize);
        let n = (w * h) as usize;
        let mut positions = Vec::with_capacity(n);
        let mut intervals = Vec::with_capacity(n);
        for row in 0..h {
            for col in 0..w {
                positions.push((f64::from(col) * c, f64::from(row) * c));
                let i = (row * w + col) as usize;
                intervals.push(ElevationInterval::new(self.low[i], self.high[i]));
            }
        }
        let diagonal = std::f64::consts::SQRT_2 * c;
        let mut edges = Vec::with_capacity(4 * n);
        for row in 0..h {
            for col in 0..w {
                let u = row * w + col;
                if col + 1 < w {
                    edges.push((u, u + 1, c));
                }
                if row + 1 < h {
                    if col > 0 {
                        edges.push((u, u + w - 1, diagonal));
                    }
                    edges.push((u, u + w, c));
                    if col + 1 < w {
                        edges.push((u, u + w + 1, diagonal));
                    }
                }
            }
        }
        ImpreciseTerrain::with_edge_lengths(positions, intervals, edges)
    }
}

fn parse_raster_rows(cur: &mut Cursor, w: u32, h: u32, which: &str) -> Result<Vec<f64>, Error> {
    let mut out = Vec::with_capacity((w * h) as usize);
    for _ in 0..h {
        let line = cur.next(&format!("{which} raster row"))?;
        let tok: Vec<&str> = line.split_ascii_whitespace().collect();
        if tok.len() != w as usize {
            return Err(parse_err(
                cur.line,
                format!("{which} raster row has {} values, expected {w}", tok.len()),
            ));
        }
        for t in tok {
            out.push(parse_f64(cur, t, "elevation")?);
        }
    }
    Ok(out)
}

/// Parses the raster DEM format into its grid description.
pub fn parse_grid(text: &str) -> Result<GridSpec, Error> {
    let mut cur = Cursor::new(text);
    let header = cur.next("header")?;
    if header.trim() != "igr 1" {
        return Err(parse_err(cur.line, format!("expected \"igr 1\", found {header:?}")));
    }

    let line = cur.next("grid dimensions")?;
    let (w, h, c) = match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
        ["ncols", w, "nrows", h, "cellsize", c] => (
            parse_u32(&cur, w, "column count")?,
            parse_u32(&cur, h, "row count")?,
            parse_f64(&cur, c, "cell size")?,
        ),
        _ => {
            return Err(parse_err(
                cur.line,
                format!("expected \"ncols W nrows H cellsize C\", found {line:?}"),
            ))
        }
    };
    if w == 0 || h == 0 {
        return Err(parse_err(cur.line, "grid dimensions must be positive"));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(parse_err(cur.line, format!("cell size must be positive, found {c}")));
    }

    let line = cur.next("\"low\" marker")?;
    if line.trim() != "low" {
        return Err(parse_err(cur.line, format!("expected \"low\", found {line:?}")));
    }
    let low = parse_raster_rows(&mut cur, w, h, "low")?;
    let line = cur.next("\"high\" marker")?;
    if line.trim() != "high" {
        return Err(parse_err(cur.line, format!("expected \"high\", found {line:?}")));
    }
    let high = parse_raster_rows(&mut cur, w, h, "high")?;
    cur.expect_end()?;

    Ok(GridSpec { ncols: w, nrows: h, cellsize: c, low, high })
}

/// Parses the raster DEM format, expands it to a D8 terrain and validates.
pub fn parse_igr(text: &str) -> Result<ImpreciseTerrain, Error> {
    validated(parse_grid(text)?.terrain())
}

/// Serializes a grid description in canonical raster form.
pub fn write_igr(grid: &GridSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "igr 1");
    let _ = writeln!(out, "ncols {} nrows {} cellsize {}", grid.ncols, grid.nrows, grid.cellsize);
    for (name, raster) in [("low", &grid.low), ("high", &grid.high)] {
        let _ = writeln!(out, "{name}");
        for row in 0..grid.nrows {
            for col in 0..grid.ncols {
                if col > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", raster[(row * grid.ncols + col) as usize]);
            }
            out.push('\n');
        }
    }
    out
}

// ── result serialization ───────────────────────────────────────────────────

/// `nodeset K` followed by K ids ascending, one per line.
pub fn write_nodeset(set: &NodeSet) -> String {
    let ids = set.ids();
    let mut out = format!("nodeset {}\n", ids.len());
    for id in ids {
        let _ = writeln!(out, "{id}");
    }
    out
}

/// `realization N` followed by `id elev` lines ascending.
pub fn write_realization(r: &Realization) -> String {
    let vals = r.values();
    let mut out = format!("realization {}\n", vals.len());
    for (id, z) in vals.iter().enumerate() {
        let _ = writeln!(out, "{id} {z}");
    }
    out
}

/// Parses the `realization` output format back into elevations.
pub fn parse_realization(text: &str) -> Result<Realization, Error> {
    let mut cur = Cursor::new(text);
    let line = cur.next("realization header")?;
    let n: u32 = match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
        ["realization", count] => parse_u32(&cur, count, "node count")?,
        _ => {
            return Err(parse_err(
                cur.line,
                format!("expected \"realization N\", found {line:?}"),
            ))
        }
    };
    let mut elev = vec![0.0; n as usize];
    let mut seen = vec![false; n as usize];
    for _ in 0..n {
        let line = cur.next("elevation line")?;
        let tok: Vec<&str> = line.split_ascii_whitespace().collect();
        if tok.len() != 2 {
            return Err(parse_err(cur.line, format!("expected \"id elev\", found {line:?}")));
        }
        let id = parse_u32(&cur, tok[0], "node id")?;
        if id >= n {
            return Err(parse_err(cur.line, format!("node id {id} out of range 0..{n}")));
        }
        if seen[id as usize] {
            return Err(parse_err(cur.line, format!("duplicate node id {id}")));
        }
        seen[id as usize] = true;
        elev[id as usize] = parse_f64(&cur, tok[1], "elevation")?;
    }
    cur.expect_end()?;
    Ok(Realization::new(elev))
}

/// `minima K` followed by one `proxy P : members id…` line per minimum,
/// ascending by proxy.
pub fn write_minima(report: &MinimaReport) -> String {
    let mut out = format!("minima {}\n", report.minima().len());
    for (proxy, members) in report.proxies().iter().zip(report.minima()) {
        let _ = write!(out, "proxy {proxy} : members");
        for id in members.ids() {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    out
}

/// `mask W H` followed by H rows of space-separated 0/1 cell flags.
pub fn write_mask(ncols: u32, nrows: u32, set: &NodeSet) -> String {
    let mut out = format!("mask {ncols} {nrows}\n");
    for row in 0..nrows {
        for col in 0..ncols {
            if col > 0 {
                out.push(' ');
            }
            out.push(if set.contains(row * ncols + col) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

// ── tests ──────────────────────────────────────────────────────────────────
