//! C ABI over the watershed-analysis library.
//!
//! Objects cross the boundary as opaque handles owned by this library and
//! are released with their matching `*_free` function. Fallible calls return
//! a status code and write their result through an out-pointer, which is
//! touched only on success; `fz_last_error` describes the most recent
//! failure on the calling thread. Panics never unwind across the boundary;
//! they surface as `FzStatus::Internal`.

// The pointer contract above covers every extern function; per-function
// `# Safety` sections would just repeat it.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fuzzyshed::flow::watershed;
use fuzzyshed::fuzzy::{fuzzy_boundary_area, fuzzy_ridge};
use fuzzyshed::io::{parse_igr, parse_itg, write_itg};
use fuzzyshed::regular::{is_regular, regularize_sweep, regularized_terrain, MinimaReport};
use fuzzyshed::sweep::{potential_downstream, potential_watershed};
use fuzzyshed::watershed::persistent_watershed;
use fuzzyshed::{Error, ImpreciseTerrain, NodeSet, Realization};

/// Outcome of a fuzzyshed call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FzStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// The input could not be parsed or failed validation.
    InvalidInput = 2,
    /// A precondition of the operation does not hold, such as a non-regular
    /// terrain or an empty node set.
    Precondition = 3,
    /// The operation tripped an enumeration guard.
    Guard = 4,
    /// The library failed internally.
    Internal = 5,
}

/// A geometric graph with one elevation interval per node (opaque).
pub struct FzTerrain(ImpreciseTerrain);

/// A set of node ids on a terrain of fixed size (opaque).
pub struct FzNodeSet(NodeSet);

/// The imprecise minima of a terrain, each with its proxy node, plus the
/// regularized elevation surface (opaque).
pub struct FzMinima(MinimaReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FzStatus, msg: &str) -> FzStatus {
    let bytes: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    let msg = CString::new(bytes).expect("nul bytes filtered");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn ok() -> FzStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
    FzStatus::Ok
}

fn lib_err(e: &Error) -> FzStatus {
    let status = match e {
        Error::NotRegular { .. }
        | Error::SourceInPotentialWatershed { .. }
        | Error::EmptyTargets
        | Error::EmptySet
        | Error::DisconnectedSet => FzStatus::Precondition,
        Error::EnumerationGuard(..) => FzStatus::Guard,
        _ => FzStatus::InvalidInput,
    };
    fail(status, &e.to_string())
}

/// Runs `f` with panics converted to an error status.
fn run<T>(f: impl FnOnce() -> Result<T, Error>) -> Result<T, FzStatus> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(lib_err(&e)),
        Err(_) => Err(fail(FzStatus::Internal, "panic inside the library")),
    }
}

fn raw<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn check_universe(t: &ImpreciseTerrain, s: &NodeSet, what: &str) -> Result<(), FzStatus> {
    if s.universe() == t.node_count() {
        Ok(())
    } else {
        Err(fail(
            FzStatus::InvalidInput,
            &format!(
                "{what}: node set was created for {} nodes, terrain has {}",
                s.universe(),
                t.node_count()
            ),
        ))
    }
}

// ── library level ────────────────────────────────────────────────────────────

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn fz_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the calling thread's most recent failure, empty after a
/// success. The pointer stays valid until the thread's next fuzzyshed call.
#[no_mangle]
pub extern "C" fn fz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ── terrain ──────────────────────────────────────────────────────────────────

/// Parses and validates a terrain from text in either supported format,
/// recognized by its header: an `itg 1` node/edge list or an `igr 1` raster
/// pair expanded to a D8 grid. On success stores a new handle in `out`; free
/// it with `fz_terrain_free`.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_parse(
    text: *const c_char,
    out: *mut *mut FzTerrain,
) -> FzStatus {
    if text.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_terrain_parse: null argument");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(FzStatus::InvalidInput, "terrain text is not valid UTF-8");
    };
    let parse = || {
        if text.trim_start().starts_with("igr") {
            parse_igr(text)
        } else {
            parse_itg(text)
        }
    };
    match run(parse) {
        Ok(t) => {
            *out = raw(FzTerrain(t));
            ok()
        }
        Err(s) => s,
    }
}

/// Frees a terrain handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_free(t: *mut FzTerrain) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_node_count(t: *const FzTerrain) -> u32 {
    if t.is_null() {
        return 0;
    }
    (*t).0.node_count()
}

/// Writes whether every lowermost local minimum of the terrain is an
/// imprecise minimum.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_is_regular(t: *const FzTerrain, out: *mut bool) -> FzStatus {
    if t.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_terrain_is_regular: null argument");
    }
    let terrain = &(*t).0;
    match run(|| Ok(is_regular(terrain))) {
        Ok(v) => {
            *out = v;
            ok()
        }
        Err(s) => s,
    }
}

/// Stores a regularized copy of the terrain in `out`: lower bounds raised so
/// the terrain becomes regular, upper bounds and imprecise minima unchanged.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_regularized(
    t: *const FzTerrain,
    out: *mut *mut FzTerrain,
) -> FzStatus {
    if t.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_terrain_regularized: null argument");
    }
    let terrain = &(*t).0;
    match run(|| Ok(regularized_terrain(terrain))) {
        Ok(t2) => {
            *out = raw(FzTerrain(t2));
            ok()
        }
        Err(s) => s,
    }
}

/// Serializes the terrain as an `itg 1` node/edge list. Returns null for a
/// null handle; free the result with `fz_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fz_terrain_to_itg(t: *const FzTerrain) -> *mut c_char {
    if t.is_null() {
        return std::ptr::null_mut();
    }
    let terrain = &(*t).0;
    match run(|| Ok(write_itg(terrain))) {
        Ok(text) => CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw),
        Err(_) => std::ptr::null_mut(),
    }
}

// ── node sets ────────────────────────────────────────────────────────────────

/// Creates a node set over `node_count` ids holding the `len` ids in `ids`
/// (which may be null when `len` is 0). Fails when an id is out of range.
/// Free the handle with `fz_nodeset_free`.
#[no_mangle]
pub unsafe extern "C" fn fz_nodeset_create(
    node_count: u32,
    ids: *const u32,
    len: usize,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    if out.is_null() || (ids.is_null() && len > 0) {
        return fail(FzStatus::NullArgument, "fz_nodeset_create: null argument");
    }
    let ids = if len == 0 { &[] } else { std::slice::from_raw_parts(ids, len) };
    let mut set = NodeSet::new(node_count);
    for &id in ids {
        if id >= node_count {
            return fail(
                FzStatus::InvalidInput,
                &format!("node id {id} out of range (set covers {node_count} nodes)"),
            );
        }
        set.insert(id);
    }
    *out = raw(FzNodeSet(set));
    ok()
}

/// Frees a node-set handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fz_nodeset_free(s: *mut FzNodeSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of members, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fz_nodeset_len(s: *const FzNodeSet) -> u32 {
    if s.is_null() {
        return 0;
    }
    (*s).0.len()
}

/// Whether `id` is a member; false for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fz_nodeset_contains(s: *const FzNodeSet, id: u32) -> bool {
    if s.is_null() {
        return false;
    }
    id < (*s).0.universe() && (*s).0.contains(id)
}

/// Copies up to `cap` member ids into `buf` in ascending order and returns
/// the total member count (which may exceed `cap`). A null `buf` is treated
/// as capacity 0, so `fz_nodeset_ids(s, NULL, 0)` sizes the buffer.
#[no_mangle]
pub unsafe extern "C" fn fz_nodeset_ids(s: *const FzNodeSet, buf: *mut u32, cap: usize) -> usize {
    if s.is_null() {
        return 0;
    }
    let set = &(*s).0;
    if !buf.is_null() {
        for (i, v) in set.iter().take(cap).enumerate() {
            *buf.add(i) = v;
        }
    }
    set.len() as usize
}

// ── analyses ─────────────────────────────────────────────────────────────────

/// Exact watershed of `targets` under the fixed elevations `elev` (one value
/// per node, inside each node's interval): the nodes whose water reaches a
/// target. Stores a new node set in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_watershed(
    t: *const FzTerrain,
    elev: *const f64,
    elev_len: usize,
    targets: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    if t.is_null() || elev.is_null() || targets.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_watershed: null argument");
    }
    let terrain = &(*t).0;
    let q = &(*targets).0;
    if let Err(s) = check_universe(terrain, q, "fz_watershed") {
        return s;
    }
    let elev = std::slice::from_raw_parts(elev, elev_len);
    let compute = || {
        let r = Realization::new(elev.to_vec());
        r.check_for(terrain)?;
        Ok(watershed(terrain, &r, q))
    };
    match run(compute) {
        Ok(set) => {
            *out = raw(FzNodeSet(set));
            ok()
        }
        Err(s) => s,
    }
}

/// The union over all realizations of the exact watershed of `targets`:
/// every node that can drain to a target. Stores a new node set in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_potential_watershed(
    t: *const FzTerrain,
    targets: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    reach_set(t, targets, out, "fz_potential_watershed", |terrain, q| {
        Ok(potential_watershed(terrain, q)?.members().clone())
    })
}

/// The union over all realizations of the nodes reachable downstream from
/// `sources`. Stores a new node set in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_potential_downstream(
    t: *const FzTerrain,
    sources: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    reach_set(t, sources, out, "fz_potential_downstream", |terrain, q| {
        Ok(potential_downstream(terrain, q)?.members().clone())
    })
}

/// The nodes that drain to `targets` in every realization. Stores a new node
/// set in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_persistent_watershed(
    t: *const FzTerrain,
    targets: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    reach_set(t, targets, out, "fz_persistent_watershed", persistent_watershed)
}

/// The nodes whose drainage to `targets` depends on the realization: the
/// potential watershed minus the persistent one. Stores a new node set in
/// `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_fuzzy_boundary(
    t: *const FzTerrain,
    targets: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    reach_set(t, targets, out, "fz_fuzzy_boundary", fuzzy_boundary_area)
}

/// The fuzzy ridge of a regular terrain: the nodes that can drain to more
/// than one imprecise minimum. Fails with `FzStatus::Precondition` when
/// the terrain is not regular. Stores a new node set in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_fuzzy_ridge(
    t: *const FzTerrain,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    if t.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_fuzzy_ridge: null argument");
    }
    let terrain = &(*t).0;
    match run(|| fuzzy_ridge(terrain)) {
        Ok(set) => {
            *out = raw(FzNodeSet(set));
            ok()
        }
        Err(s) => s,
    }
}

unsafe fn reach_set(
    t: *const FzTerrain,
    s: *const FzNodeSet,
    out: *mut *mut FzNodeSet,
    what: &str,
    f: impl FnOnce(&ImpreciseTerrain, &NodeSet) -> Result<NodeSet, Error>,
) -> FzStatus {
    if t.is_null() || s.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, &format!("{what}: null argument"));
    }
    let terrain = &(*t).0;
    let q = &(*s).0;
    if let Err(status) = check_universe(terrain, q, what) {
        return status;
    }
    match run(|| f(terrain, q)) {
        Ok(set) => {
            *out = raw(FzNodeSet(set));
            ok()
        }
        Err(status) => status,
    }
}

// ── imprecise minima ─────────────────────────────────────────────────────────

/// Computes the imprecise minima of the terrain with one proxy node each,
/// plus the regularized elevation surface. Free the handle with
/// `fz_minima_free`.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_compute(
    t: *const FzTerrain,
    out: *mut *mut FzMinima,
) -> FzStatus {
    if t.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_minima_compute: null argument");
    }
    let terrain = &(*t).0;
    match run(|| Ok(regularize_sweep(terrain))) {
        Ok(report) => {
            *out = raw(FzMinima(report));
            ok()
        }
        Err(s) => s,
    }
}

/// Frees a minima handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_free(m: *mut FzMinima) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of imprecise minima, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_count(m: *const FzMinima) -> usize {
    if m.is_null() {
        return 0;
    }
    (*m).0.minima().len()
}

/// Proxy node of the minimum at `index`, or `UINT32_MAX` when the handle is
/// null or the index is out of range.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_proxy(m: *const FzMinima, index: usize) -> u32 {
    if m.is_null() {
        return u32::MAX;
    }
    (*m).0.proxies().get(index).copied().unwrap_or(u32::MAX)
}

/// Stores the member set of the minimum at `index` in `out`.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_members(
    m: *const FzMinima,
    index: usize,
    out: *mut *mut FzNodeSet,
) -> FzStatus {
    if m.is_null() || out.is_null() {
        return fail(FzStatus::NullArgument, "fz_minima_members: null argument");
    }
    match (*m).0.minima().get(index) {
        Some(set) => {
            *out = raw(FzNodeSet(set.clone()));
            ok()
        }
        None => fail(
            FzStatus::InvalidInput,
            &format!("minimum index {index} out of range"),
        ),
    }
}

/// Copies up to `cap` values of the regularized elevation surface into `buf`
/// (one per node, ascending by id) and returns the node count. A null `buf`
/// is treated as capacity 0.
#[no_mangle]
pub unsafe extern "C" fn fz_minima_surface(
    m: *const FzMinima,
    buf: *mut f64,
    cap: usize,
) -> usize {
    if m.is_null() {
        return 0;
    }
    let values = (*m).0.m().values();
    if !buf.is_null() {
        for (i, &z) in values.iter().take(cap).enumerate() {
            *buf.add(i) = z;
        }
    }
    values.len()
}

// ── tests ──────────────────────────────────────────────────────────────────
