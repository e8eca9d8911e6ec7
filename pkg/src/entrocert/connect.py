"""Connection insertion: grow box paths between seed points across depths.

Paths are found at a coarse depth first; non-path boxes are discarded, the
survivors subdivided, and the search repeated one level deeper.  Box image
evaluations go through the shared cache, so the total number of distinct
enclosure calls stays near (depth span) x (pairs) x (path length) instead
of exploding with the grid.
"""

import math
from heapq import heappop, heappush
from typing import NamedTuple

from .combinat import ImageCache, _resolve, insert_onebox, transition_matrix
from .dynamics import SystemSpec, action_bound, action_h, wrap_point

__all__ = [
    "SkeletonPair",
    "NoConnectionError",
    "ActionWeights",
    "action_weights",
    "shortest_path",
    "find_connections",
    "ConnectionResult",
]


class SkeletonPair(NamedTuple):
    src: tuple
    dst: tuple
    label: str


class NoConnectionError(RuntimeError):
    def __init__(self, label, depth, expansions):
        super().__init__(
            f"no path for pair {label!r} at depth {depth} "
            f"after {expansions} one-box expansions"
        )
        self.label = label
        self.depth = depth


class ActionWeights:
    """Edge weights K + h(center_i.x, center_j.x); strictly positive."""

    def __init__(self, tree, sys, K):
        k_star = action_bound(sys)
        if K <= k_star:
            raise ValueError(f"K={K} must exceed the action bound K*={k_star}")
        self.K = K
        self.k_star = k_star
        self._sys = sys
        self._centers = [tree.box_rect(k).x.mid for k in tree.boxnums()]

    def __call__(self, i, j):
        return self.K + action_h(self._sys, self._centers[i], self._centers[j])


def action_weights(tree, T, sys, K=None):
    """Build the action-weighted edge map for the current numbering.

    K defaults to K* + 1; any K > K* keeps all weights positive.  Larger K
    biases the search toward fewer edges, smaller K toward low action.
    """
    if K is None:
        K = action_bound(sys) + 1.0
    return ActionWeights(tree, sys, K)


def shortest_path(T, src, dst, weights=None):
    """Cheapest path in the box digraph, or None when unreachable.

    Unweighted search is plain BFS; weighted uses Dijkstra.  Neighbors are
    scanned in ascending id so equal-cost searches are reproducible.
    """
    if src == dst:
        return [src]
    if weights is None:
        parent = {src: None}
        frontier = [src]
        while frontier:
            nxt = []
            for v in frontier:
                for w in sorted(T.column(v)):
                    if w not in parent:
                        parent[w] = v
                        if w == dst:
                            return _walk_back(parent, dst)
                        nxt.append(w)
            frontier = nxt
        return None
    dist = {src: 0.0}
    parent = {src: None}
    done = set()
    heap = [(0.0, src)]
    while heap:
        d, v = heappop(heap)
        if v in done:
            continue
        if v == dst:
            return _walk_back(parent, dst)
        done.add(v)
        for w in sorted(T.column(v)):
            if w in done:
                continue
            nd = d + weights(v, w)
            if nd < dist.get(w, math.inf):
                dist[w] = nd
                parent[w] = v
                heappush(heap, (nd, w))
    return None


def _walk_back(parent, dst):
    path = [dst]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


class ConnectionResult(NamedTuple):
    paths: dict              # label -> tuple of box ids in the final tree
    depth: int
    image_evals: int         # distinct enclosure evaluations in this call
    records: tuple           # per-pair dicts for the connection report


def find_connections(
    tree,
    dyn,
    pairs,
    d_start,
    d_end,
    cache=None,
    use_weights="auto",
    K=None,
    max_expansions=64,
    progress=None,
):
    """Algorithm: per depth, insert seeds, expand one-box rings until every
    pair is connected, keep only the path boxes, subdivide, repeat.

    `use_weights`: "auto" (action weights for the standard map), True, or
    False.  Returns paths valid in the final tree numbering.
    """
    fn, wrap = _resolve(dyn)
    if cache is None:
        cache = ImageCache()
    if d_start > d_end:
        raise ValueError("d_start must not exceed d_end")
    if tree.depth != d_start:
        raise ValueError(f"tree is at depth {tree.depth}, expected {d_start}")

    weighted = use_weights
    if use_weights == "auto":
        weighted = isinstance(dyn, SystemSpec) and dyn.kind == "standard"

    def seed_points():
        pts = []
        for p in pairs:
            pts.extend([p.src, p.dst])
        if wrap:
            pts = [wrap_point(q) for q in pts]
        return pts

    records = []
    paths = {}
    with cache.phase("connections") as ph:
        for depth in range(d_start, d_end + 1):
            tree.insert(seed_points())
            found = None
            for expansion in range(max_expansions + 1):
                T = transition_matrix(tree, (fn, wrap), cache=cache)
                wfn = None
                if weighted:
                    wfn = action_weights(tree, T, dyn, K)
                paths = {}
                missing = None
                for p in pairs:
                    src_pt = wrap_point(p.src) if wrap else p.src
                    dst_pt = wrap_point(p.dst) if wrap else p.dst
                    sid, did = tree.find([src_pt, dst_pt])
                    got = (
                        shortest_path(T, sid, did, wfn)
                        if sid is not None and did is not None
                        else None
                    )
                    if got is None:
                        missing = p.label
                        break
                    paths[p.label] = tuple(got)
                if missing is None:
                    found = expansion
                    break
                if expansion == max_expansions:
                    raise NoConnectionError(missing, depth, expansion)
                insert_onebox(tree, tree.boxnums(), wrap)
            if progress is not None:
                progress(depth, len(tree), found)
            for p in pairs:
                records.append(
                    {
                        "label": p.label,
                        "depth": depth,
                        "path_length": len(paths[p.label]),
                        "image_evals": len(ph.created),
                    }
                )
            if depth == d_end:
                break
            keep = set()
            for path in paths.values():
                keep.update(path)
            tree.delete(set(tree.boxnums()) - keep)
            tree.subdivide()
    return ConnectionResult(paths, tree.depth, len(ph.created), tuple(records))
