#ifndef FUZZYSHED_H
#define FUZZYSHED_H

/* Generated by cbindgen from fuzzyshed-ffi; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fuzzyshed call.
 */
typedef enum FzStatus {
  /**
   * The call succeeded.
   */
  FZ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FZ_STATUS_NULL_ARGUMENT = 1,
  /**
   * The input could not be parsed or failed validation.
   */
  FZ_STATUS_INVALID_INPUT = 2,
  /**
   * A precondition of the operation does not hold, such as a non-regular
   * terrain or an empty node set.
   */
  FZ_STATUS_PRECONDITION = 3,
  /**
   * The operation tripped an enumeration guard.
   */
  FZ_STATUS_GUARD = 4,
  /**
   * The library failed internally.
   */
  FZ_STATUS_INTERNAL = 5,
} FzStatus;

/**
 * The imprecise minima of a terrain, each with its proxy node, plus the
 * regularized elevation surface (opaque).
 */
typedef struct FzMinima FzMinima;

/**
 * A set of node ids on a terrain of fixed size (opaque).
 */
typedef struct FzNodeSet FzNodeSet;

/**
 * A geometric graph with one elevation interval per node (opaque).
 */
typedef struct FzTerrain FzTerrain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed by the caller.
 */
const char *fz_version(void);

/**
 * Message of the calling thread's most recent failure, empty after a
 * success. The pointer stays valid until the thread's next fuzzyshed call.
 */
const char *fz_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 */
void fz_string_free(char *s);

/**
 * Parses and validates a terrain from text in either supported format,
 * recognized by its header: an `itg 1` node/edge list or an `igr 1` raster
 * pair expanded to a D8 grid. On success stores a new handle in `out`; free
 * it with `fz_terrain_free`.
 */
enum FzStatus fz_terrain_parse(const char *text, struct FzTerrain **out);

/**
 * Frees a terrain handle. Null is ignored.
 */
void fz_terrain_free(struct FzTerrain *t);

/**
 * Number of nodes, or 0 for a null handle.
 */
uint32_t fz_terrain_node_count(const struct FzTerrain *t);

/**
 * Writes whether every lowermost local minimum of the terrain is an
 * imprecise minimum.
 */
enum FzStatus fz_terrain_is_regular(const struct FzTerrain *t, bool *out);

/**
 * Stores a regularized copy of the terrain in `out`: lower bounds raised so
 * the terrain becomes regular, upper bounds and imprecise minima unchanged.
 */
enum FzStatus fz_terrain_regularized(const struct FzTerrain *t, struct FzTerrain **out);

/**
 * Serializes the terrain as an `itg 1` node/edge list. Returns null for a
 * null handle; free the result with `fz_string_free`.
 */
char *fz_terrain_to_itg(const struct FzTerrain *t);

/**
 * Creates a node set over `node_count` ids holding the `len` ids in `ids`
 * (which may be null when `len` is 0). Fails when an id is out of range.
 * Free the handle with `fz_nodeset_free`.
 */
enum FzStatus fz_nodeset_create(uint32_t node_count,
                                const uint32_t *ids,
                                size_t len,
                                struct FzNodeSet **out);

/**
 * Frees a node-set handle. Null is ignored.
 */
void fz_nodeset_free(struct FzNodeSet *s);

/**
 * Number of members, or 0 for a null handle.
 */
uint32_t fz_nodeset_len(const struct FzNodeSet *s);

/**
 * Whether `id` is a member; false for a null handle.
 */
bool fz_nodeset_contains(const struct FzNodeSet *s, uint32_t id);

/**
 * Copies up to `cap` member ids into `buf` in ascending order and returns
 * the total member count (which may exceed `cap`). A null `buf` is treated
 * as capacity 0, so `fz_nodeset_ids(s, NULL, 0)` sizes the buffer.
 */
size_t fz_nodeset_ids(const struct FzNodeSet *s, uint32_t *buf, size_t cap);

/**
 * Exact watershed of `targets` under the fixed elevations `elev` (one value
 * per node, inside each node's interval): the nodes whose water reaches a
 * target. Stores a new node set in `out`.
 */
enum FzStatus fz_watershed(const struct FzTerrain *t,
                           const double *elev,
                           size_t elev_len,
                           const struct FzNodeSet *targets,
                           struct FzNodeSet **out);

/**
 * The union over all realizations of the exact watershed of `targets`:
 * every node that can drain to a target. Stores a new node set in `out`.
 */
enum FzStatus fz_potential_watershed(const struct FzTerrain *t,
                                     const struct FzNodeSet *targets,
                                     struct FzNodeSet **out);

/**
 * The union over all realizations of the nodes reachable downstream from
 * `sources`. Stores a new node set in `out`.
 */
enum FzStatus fz_potential_downstream(const struct FzTerrain *t,
                                      const struct FzNodeSet *sources,
                                      struct FzNodeSet **out);

/**
 * The nodes that drain to `targets` in every realization. Stores a new node
 * set in `out`.
 */
enum FzStatus fz_persistent_watershed(const struct FzTerrain *t,
                                      const struct FzNodeSet *targets,
                                      struct FzNodeSet **out);

/**
 * The nodes whose drainage to `targets` depends on the realization: the
 * potential watershed minus the persistent one. Stores a new node set in
 * `out`.
 */
enum FzStatus fz_fuzzy_boundary(const struct FzTerrain *t,
                                const struct FzNodeSet *targets,
                                struct FzNodeSet **out);

/**
 * The fuzzy ridge of a regular terrain: the nodes that can drain to more
 * than one imprecise minimum. Fails with `FzStatus::Precondition` when
 * the terrain is not regular. Stores a new node set in `out`.
 */
enum FzStatus fz_fuzzy_ridge(const struct FzTerrain *t, struct FzNodeSet **out);

/**
 * Computes the imprecise minima of the terrain with one proxy node each,
 * plus the regularized elevation surface. Free the handle with
 * `fz_minima_free`.
 */
enum FzStatus fz_minima_compute(const struct FzTerrain *t, struct FzMinima **out);

/**
 * Frees a minima handle. Null is ignored.
 */
void fz_minima_free(struct FzMinima *m);

/**
 * Number of imprecise minima, or 0 for a null handle.
 */
size_t fz_minima_count(const struct FzMinima *m);

/**
 * Proxy node of the minimum at `index`, or `UINT32_MAX` when the handle is
 * null or the index is out of range.
 */
uint32_t fz_minima_proxy(const struct FzMinima *m, size_t index);

/**
 * Stores the member set of the minimum at `index` in `out`.
 */
enum FzStatus fz_minima_members(const struct FzMinima *m, size_t index, struct FzNodeSet **out);

/**
 * Copies up to `cap` values of the regularized elevation surface into `buf`
 * (one per node, ascending by id) and returns the node count. A null `buf`
 * is treated as capacity 0.
 */
size_t fz_minima_surface(const struct FzMinima *m, double *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUZZYSHED_H */
