"""Combinatorial dynamics over the box grid.

The multivalued box map is stored column-wise: column i lists the boxes hit
by the rigorous image of box i.  Image computations are cached by lattice
cell (depth-qualified), so they survive renumbering and are shared between
the connection search and the neighborhood growing.  On the torus all cell
indices are wrapped; on plane domains out-of-root image cells are kept in
the cache (they witness escape) but are never inserted as live boxes.
"""

import math
from typing import NamedTuple

from .boxtree import BoxCoord, morton
from .dynamics import SystemSpec, enclosure_map
from .interval import Iv, iv_div, iv_mul, iv_sub

__all__ = [
    "AdjMatrix",
    "CombEnclosure",
    "ImageCache",
    "IndexPair",
    "IncompleteMapError",
    "CoverageError",
    "IsolationError",
    "adjacency_matrix",
    "transition_matrix",
    "onebox",
    "insert_onebox",
    "insert_image",
    "invariant_set",
    "grow_isolating",
    "grow_insert",
    "build_index_pair",
    "verify_index_pair",
    "component_split",
]


class IncompleteMapError(KeyError):
    pass


class CoverageError(RuntimeError):
    pass


class IsolationError(RuntimeError):
    pass


def _resolve(dyn):
    """Accept a SystemSpec, a rect->rects callable, or a (callable, wrap) pair."""
    if isinstance(dyn, SystemSpec):
        return enclosure_map(dyn), dyn.domain == "torus"
    if isinstance(dyn, tuple):
        return dyn
    return dyn, False


# -- image cache --------------------------------------------------------------


class ImageCache:
    """Persistent cell-image cache keyed by (depth, i, j).

    `request` returns the cached image cells or computes and stores them.
    Phases let callers account exactly which keys a pipeline stage asked
    for and which it had to compute.
    """

    def __init__(self):
        self.entries = {}
        self.misses = 0
        self.hits = 0
        self._phase = None
        self.phase_log = {}

    class _Phase:
        def __init__(self, cache, name):
            self.cache = cache
            self.name = name
            self.requested = set()
            self.created = set()

        def __enter__(self):
            self.cache._phase = self
            self.cache.phase_log[self.name] = self
            return self

        def __exit__(self, *exc):
            self.cache._phase = None
            return False

    def phase(self, name):
        return ImageCache._Phase(self, name)

    def request(self, coord, producer):
        coord = (coord[0], coord[1], coord[2])
        ph = self._phase
        if ph is not None:
            ph.requested.add(coord)
        got = self.entries.get(coord)
        if got is not None:
            self.hits += 1
            return got
        cells = tuple(sorted(set(producer())))
        self.entries[coord] = cells
        self.misses += 1
        if ph is not None:
            ph.created.add(coord)
        return cells

    def __contains__(self, coord):
        return coord in self.entries

    def __len__(self):
        return len(self.entries)

    def save(self, path):
        with open(path, "w") as fh:
            for (d, i, j) in sorted(self.entries):
                cells = self.entries[(d, i, j)]
                flat = " ".join(f"{a} {b}" for a, b in cells)
                fh.write(f"img {d} {i} {j} : {flat}\n".rstrip() + "\n")

    @classmethod
    def load(cls, path):
        cache = cls()
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                parts = line.split()
                if parts[0] != "img" or len(parts) < 5 or parts[4] != ":":
                    raise ValueError(f"cache line {lineno}: malformed entry {line!r}")
                d, i, j = int(parts[1]), int(parts[2]), int(parts[3])
                nums = parts[5:]
                if len(nums) % 2:
                    raise ValueError(f"cache line {lineno}: odd cell list")
                cells = tuple(
                    sorted(
                        (int(nums[k]), int(nums[k + 1])) for k in range(0, len(nums), 2)
                    )
                )
                cache.entries[(d, i, j)] = cells
        return cache


# -- geometry -> lattice cells -------------------------------------------------


def _axis_cell_range(lo, hi, root_lo, root_width, n):
    """Conservative [imin, imax] of cells whose closed realization meets
    [lo, hi]; computed with outward interval arithmetic so a touching cell
    is never missed whatever the root scaling."""
    t = iv_sub(Iv(lo), Iv(root_lo))
    u = iv_div(t, Iv(root_width))
    a = iv_mul(u, Iv(float(n))).lo
    t = iv_sub(Iv(hi), Iv(root_lo))
    u = iv_div(t, Iv(root_width))
    b = iv_mul(u, Iv(float(n))).hi
    return math.ceil(a) - 1, math.floor(b)


def enclosure_cells(tree, rects, wrap):
    """Lattice cells meeting any of the image rectangles.

    Torus: indices wrapped mod n.  Plane: raw indices, which may fall
    outside [0, n); such cells witness that the image leaves the root box.
    """
    n = tree.side
    rx, ry = tree.root.x, tree.root.y
    wx = rx.hi - rx.lo
    wy = ry.hi - ry.lo
    out = set()
    for r in rects:
        i0, i1 = _axis_cell_range(r.x.lo, r.x.hi, rx.lo, wx, n)
        j0, j1 = _axis_cell_range(r.y.lo, r.y.hi, ry.lo, wy, n)
        if wrap:
            if i1 - i0 >= n:
                irange = range(n)
            else:
                irange = [k % n for k in range(i0, i1 + 1)]
            if j1 - j0 >= n:
                jrange = range(n)
            else:
                jrange = [k % n for k in range(j0, j1 + 1)]
            for i in set(irange):
                for j in set(jrange):
                    out.add((i, j))
        else:
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    out.add((i, j))
    return out


def _image_cells(tree, fn, wrap, cache, i, j):
    coord = (tree.depth, i, j)
    producer = lambda: enclosure_cells(tree, fn(tree.cell_rect(i, j)), wrap)
    if cache is None:
        return tuple(sorted(producer()))
    return cache.request(coord, producer)


# -- adjacency ----------------------------------------------------------------

_OFFSETS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]


def _neighbor_cells(i, j, n, wrap):
    for di, dj in _OFFSETS:
        a, b = i + di, j + dj
        if wrap:
            yield a % n, b % n
        elif 0 <= a < n and 0 <= b < n:
            yield a, b


class AdjMatrix:
    """Symmetric box adjacency (closed realizations intersect)."""

    def __init__(self, neighbors, wrap):
        self._nb = neighbors
        self.wrap = wrap

    def neighbors(self, box_id):
        return self._nb[box_id]

    def adjacent(self, a, b):
        return b in self._nb[a]

    def __len__(self):
        return len(self._nb)


def adjacency_matrix(tree, wrap=False):
    n = tree.side
    nb = {}
    for k, coord in enumerate(tree.cells()):
        i, j = coord.i, coord.j
        row = set()
        for a, b in _neighbor_cells(i, j, n, wrap):
            other = tree.id_of_cell(a, b)
            if other is not None:
                row.add(other)
        row.add(k)
        nb[k] = row
    return AdjMatrix(nb, wrap)


def onebox(S, adj):
    """S together with every live box touching it."""
    out = set(S)
    for k in S:
        out |= adj.neighbors(k)
    return out


def onebox_lattice(tree, S, wrap):
    """Same as onebox but via direct lattice lookups (no AdjMatrix)."""
    n = tree.side
    out = set(S)
    for k in S:
        c = tree.cell_of(k)
        for a, b in _neighbor_cells(c.i, c.j, n, wrap):
            other = tree.id_of_cell(a, b)
            if other is not None:
                out.add(other)
    return out


def insert_onebox(tree, S, wrap=False):
    """Insert every lattice neighbor of S that is not yet live."""
    n = tree.side
    want = set()
    for k in S:
        c = tree.cell_of(k)
        for cell in _neighbor_cells(c.i, c.j, n, wrap):
            if not tree.has_cell(*cell):
                want.add(cell)
    return tree.insert_cells(want)


def insert_image(tree, dyn, S, cache=None, wrap=None):
    """Insert every in-root lattice cell met by the enclosure of S."""
    fn, wrap_dyn = _resolve(dyn)
    if wrap is None:
        wrap = wrap_dyn
    n = tree.side
    want = set()
    for k in S:
        c = tree.cell_of(k)
        for (a, b) in _image_cells(tree, fn, wrap, cache, c.i, c.j):
            if 0 <= a < n and 0 <= b < n and not tree.has_cell(a, b):
                want.add((a, b))
    return tree.insert_cells(want)


# -- the multivalued map -------------------------------------------------------


class CombEnclosure:
    """Columns of the box map over the current numbering.

    `columns[i]` holds live box ids; `cells[i]` the raw lattice cells, kept
    for cell-level index-pair checks (a cell may be absent from the tree).
    """

    def __init__(self, depth):
        self.depth = depth
        self.columns = {}
        self.cells = {}

    def available(self, ids):
        return all(k in self.columns for k in ids)

    def column(self, k):
        try:
            return self.columns[k]
        except KeyError:
            raise IncompleteMapError(f"no transition column for box {k}") from None


def transition_matrix(tree, dyn, subset=None, cache=None, base=None):
    """Compute (or extend) the box map columns for `subset`.

    Images come from the cache when present; `base` lets callers extend an
    existing CombEnclosure built over the same tree numbering.
    """
    fn, wrap = _resolve(dyn)
    enc = base if base is not None else CombEnclosure(tree.depth)
    ids = tree.boxnums() if subset is None else subset
    for k in ids:
        if k in enc.columns:
            continue
        c = tree.cell_of(k)
        cells = _image_cells(tree, fn, wrap, cache, c.i, c.j)
        enc.cells[k] = cells
        col = set()
        for cell in cells:
            other = tree.id_of_cell(*cell)
            if other is not None:
                col.add(other)
        enc.columns[k] = col
    return enc


def invariant_set(N, T):
    """Boxes of N through which a combinatorial trajectory stays in N.

    A box qualifies iff inside the subgraph on N it can reach a cycle and
    can be reached from one (strongly connected cores plus bidirectional
    reachability).
    """
    N = set(N)
    succ = {}
    for k in N:
        succ[k] = [m for m in T.column(k) if m in N]

    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    for root in N:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                elif w in on_stack:
                    if index[w] < low[v]:
                        low[v] = index[w]
            if not advanced:
                work.pop()
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    sccs.append(comp)

    cores = set()
    for comp in sccs:
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            cores.update(comp)
    if not cores:
        return set()

    fwd = set(cores)
    frontier = list(cores)
    while frontier:
        v = frontier.pop()
        for w in succ[v]:
            if w not in fwd:
                fwd.add(w)
                frontier.append(w)
    pred = {k: [] for k in N}
    for k in N:
        for m in succ[k]:
            pred[m].append(k)
    bwd = set(cores)
    frontier = list(cores)
    while frontier:
        v = frontier.pop()
        for w in pred[v]:
            if w not in bwd:
                bwd.add(w)
                frontier.append(w)
    return fwd & bwd


def grow_isolating(S, T, adj, max_iter=None):
    """Alternate invariant set and one-box growth until o(Inv(N)) <= N.

    Returns the isolating neighborhood o(I).  Every box the loop touches
    must already have a transition column; otherwise the caller should be
    using grow_insert.
    """
    S = set(S)
    cap = max_iter if max_iter is not None else 2 * len(adj._nb) + 8
    for _ in range(cap):
        try:
            I = invariant_set(S, T)
        except IncompleteMapError as e:
            raise CoverageError(
                f"expansion left the computed region: {e}"
            ) from None
        oI = onebox(I, adj)
        if oI <= S:
            return oI
        S = oI
    raise CoverageError("grow_isolating failed to stabilize within its cap")


class GrowStats(NamedTuple):
    iterations: int
    ever_in_s: frozenset          # (depth, i, j) codes ever in S
    requested_keys: frozenset     # cache keys requested during the run
    created_keys: frozenset       # cache keys computed during the run


def grow_insert(tree, dyn, cache=None, max_iter=10_000, progress=None):
    """Grow an isolating neighborhood bottom-up, inserting boxes lazily.

    The loop computes transition columns only for the working set S, grows
    S to the one-box neighborhood of its invariant set, and inserts the
    neighbors and image cells it will need next.  Terminates only when the
    isolation test passed and no box was inserted in the round.  Returns
    (S, T, stats) with T the final columns over the final numbering.
    """
    fn, wrap = _resolve(dyn)
    if cache is None:
        cache = ImageCache()
    S = set(tree.boxnums())
    ever = set()
    d = tree.depth
    with cache.phase("grow_insert") as ph:
        for it in range(1, max_iter + 1):
            ever.update((d, c.i, c.j) for c in map(tree.cell_of, S))
            T = transition_matrix(tree, dyn, sorted(S), cache)
            I = invariant_set(S, T)
            oI = onebox_lattice(tree, I, wrap)
            achieved = oI <= S
            S = oI
            m1 = insert_onebox(tree, I, wrap)
            S = m1.apply_set(S)
            m2 = insert_image(tree, dyn, S, cache, wrap)
            S = m2.apply_set(S)
            ever.update((d, c.i, c.j) for c in map(tree.cell_of, S))
            inserted = not (m1.is_identity and m2.is_identity)
            if progress is not None:
                progress(it, len(S), len(tree))
            if achieved and not inserted:
                T = transition_matrix(tree, dyn, sorted(S), cache)
                stats = GrowStats(
                    it,
                    frozenset(ever),
                    frozenset(ph.requested),
                    frozenset(ph.created),
                )
                return S, T, stats
    raise CoverageError(f"grow_insert did not stabilize in {max_iter} iterations")


# -- index pairs ---------------------------------------------------------------


class IndexPair(NamedTuple):
    p1: frozenset
    p0: frozenset


def build_index_pair(S, T, tree=None, wrap=False):
    """P1 = S union F(S), P0 = F(S) minus S; requires S isolating."""
    S = set(S)
    if tree is not None:
        inv = invariant_set(S, T)
        if not onebox_lattice(tree, inv, wrap) <= S:
            raise IsolationError("seed set is not a combinatorial isolating neighborhood")
    image = set()
    for k in S:
        image |= T.column(k)
    p1 = S | image
    p0 = image - S
    return IndexPair(frozenset(p1), frozenset(p0))


class PairReport(NamedTuple):
    ok: bool
    exit_in_p1: bool          # (a) P0 subset of P1
    image_in_p1: bool         # (b) F(P1\P0) subset of P1, cell level
    exit_absorbs: bool        # (c) F(P0) n P1 subset of P0, cell level
    isolated: bool            # (d) o(Inv(P1\P0)) subset of P1\P0
    violations: tuple

    def summary(self):
        names = ["exit_in_p1", "image_in_p1", "exit_absorbs", "isolated"]
        flags = [self.exit_in_p1, self.image_in_p1, self.exit_absorbs, self.isolated]
        return ", ".join(f"{n}={'ok' if f else 'FAIL'}" for n, f in zip(names, flags))


def verify_index_pair(pair, T, tree, wrap=False, max_violations=32):
    """Check the combinatorial index-pair conditions at the cell level.

    Image cells are compared against live boxes, so an image leaving the
    grid (plane domains) correctly fails condition (b) instead of being
    silently truncated.
    """
    p1, p0 = set(pair.p1), set(pair.p0)
    interior = p1 - p0
    violations = []

    ok_a = p0 <= p1
    if not ok_a:
        violations.extend(("exit_in_p1", k) for k in sorted(p0 - p1)[:max_violations])

    def cells_of(k):
        got = T.cells.get(k)
        if got is None:
            raise IncompleteMapError(f"no transition column for box {k}")
        return got

    ok_b = True
    for k in sorted(interior):
        for cell in cells_of(k):
            other = tree.id_of_cell(*cell)
            if other is None or other not in p1:
                ok_b = False
                if len(violations) < max_violations:
                    violations.append(("image_in_p1", k))
                break

    ok_c = True
    for k in sorted(p0):
        for cell in cells_of(k):
            other = tree.id_of_cell(*cell)
            if other is not None and other in p1 and other not in p0:
                ok_c = False
                if len(violations) < max_violations:
                    violations.append(("exit_absorbs", k))
                break

    inv = invariant_set(interior, T)
    ok_d = onebox_lattice(tree, inv, wrap) <= interior
    if not ok_d:
        extra = onebox_lattice(tree, inv, wrap) - interior
        violations.extend(("isolated", k) for k in sorted(extra)[:max_violations])

    return PairReport(
        ok_a and ok_b and ok_c and ok_d, ok_a, ok_b, ok_c, ok_d, tuple(violations)
    )


def component_split(ids, adj):
    """Connected components of a box set under closed adjacency."""
    ids = set(ids)
    comps = []
    seen = set()
    for start in sorted(ids):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        seen.add(start)
        while frontier:
            v = frontier.pop()
            for w in adj.neighbors(v):
                if w in ids and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    frontier.append(w)
        comps.append(frozenset(comp))
    return comps
