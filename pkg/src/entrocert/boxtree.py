"""Dyadic box grid with deterministic depth-first numbering.

All live boxes sit at one common depth d inside a root rectangle; a box is
the lattice cell (i, j) with 0 <= i, j < 2**d.  Box ids are the ranks of a
depth-first traversal of the subdivision tree with lexicographic child
order (x-half before y-half), which is exactly the numeric order of the
Morton code interleaving i above j.  Keeping the live set as a sorted list
of codes therefore makes insert/delete/subdivide renumber tracking a
linear merge instead of a per-box tree search.
"""

import math
from bisect import bisect_left, bisect_right
from typing import NamedTuple

from .interval import Iv, IvRect

__all__ = ["BoxCoord", "BoxTree", "RenumberMap", "load", "save"]


class BoxCoord(NamedTuple):
    depth: int
    i: int
    j: int


_SPREAD16 = [0] * 65536
for _v in range(65536):
    _s = 0
    _t = _v
    _b = 0
    while _t:
        if _t & 1:
            _s |= 1 << (2 * _b)
        _t >>= 1
        _b += 1
    _SPREAD16[_v] = _s


def _spread(v):
    out = 0
    shift = 0
    while v:
        out |= _SPREAD16[v & 0xFFFF] << shift
        v >>= 16
        shift += 32
    return out


def morton(i, j):
    """Interleave i (high bits) and j (low bits)."""
    return (_spread(i) << 1) | _spread(j)


def demorton(code):
    i = 0
    j = 0
    bit = 0
    while code:
        j |= (code & 1) << bit
        i |= ((code >> 1) & 1) << bit
        code >>= 2
        bit += 1
    return i, j


class RenumberMap:
    """Old-id to new-id correspondence after a tree mutation.

    `kind` is one of identity / remap / expand.  A remap drops ids that were
    deleted; an expand (from subdivide) sends id k to the block of
    `factor` consecutive child ids starting at factor*k.
    """

    __slots__ = ("kind", "mapping", "factor")

    def __init__(self, kind, mapping=None, factor=1):
        self.kind = kind
        self.mapping = mapping
        self.factor = factor

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def remap(cls, mapping):
        return cls("remap", mapping=mapping)

    @classmethod
    def expand(cls, factor):
        return cls("expand", factor=factor)

    def get(self, old):
        if self.kind == "identity":
            return old
        if self.kind == "expand":
            return self.factor * old
        return self.mapping.get(old)

    def apply_set(self, ids):
        if self.kind == "identity":
            return set(ids)
        if self.kind == "expand":
            f = self.factor
            return {f * k + r for k in ids for r in range(f)}
        m = self.mapping
        return {m[k] for k in ids if k in m}

    @property
    def is_identity(self):
        return self.kind == "identity"


class BoxTree:
    def __init__(self, root=None, depth=0):
        if root is None:
            root = IvRect(Iv(0.0, 1.0), Iv(0.0, 1.0))
        self.root = root
        self.depth = depth
        self._codes = []
        self._rank = {}

    # -- basic queries ----------------------------------------------------

    def __len__(self):
        return len(self._codes)

    @property
    def side(self):
        return 1 << self.depth

    def boxnums(self):
        return list(range(len(self._codes)))

    def code_of(self, box_id):
        return self._codes[box_id]

    def id_of_cell(self, i, j):
        n = self.side
        if not (0 <= i < n and 0 <= j < n):
            return None
        return self._rank.get(morton(i, j))

    def has_cell(self, i, j):
        n = self.side
        if not (0 <= i < n and 0 <= j < n):
            return False
        return morton(i, j) in self._rank

    def cell_of(self, box_id):
        i, j = demorton(self._codes[box_id])
        return BoxCoord(self.depth, i, j)

    def cells(self):
        d = self.depth
        return [BoxCoord(d, *demorton(c)) for c in self._codes]

    def point_cell(self, x, y):
        """Lattice cell containing (x, y) under half-open cells, or None."""
        n = self.side
        rx, ry = self.root.x, self.root.y
        if not (rx.lo <= x < rx.hi and ry.lo <= y < ry.hi):
            return None
        i = int(math.floor((x - rx.lo) / (rx.hi - rx.lo) * n))
        j = int(math.floor((y - ry.lo) / (ry.hi - ry.lo) * n))
        return min(i, n - 1), min(j, n - 1)

    def cell_rect(self, i, j):
        """Outward-rounded realization of cell (i, j)."""
        n = self.side
        rx, ry = self.root.x, self.root.y
        wx = rx.hi - rx.lo
        wy = ry.hi - ry.lo
        x0 = rx.lo + wx * (i / n)
        x1 = rx.lo + wx * ((i + 1) / n)
        y0 = ry.lo + wy * (j / n)
        y1 = ry.lo + wy * ((j + 1) / n)
        return IvRect(
            Iv(math.nextafter(x0, -math.inf), math.nextafter(x1, math.inf)),
            Iv(math.nextafter(y0, -math.inf), math.nextafter(y1, math.inf)),
        )

    def box_rect(self, box_id):
        i, j = demorton(self._codes[box_id])
        return self.cell_rect(i, j)

    def find(self, points):
        """Ids of live boxes covering each point; None where absent."""
        out = []
        for (x, y) in points:
            cell = self.point_cell(x, y)
            if cell is None:
                out.append(None)
            else:
                out.append(self._rank.get(morton(*cell)))
        return out

    # -- mutations ---------------------------------------------------------

    def _rebuild_rank(self):
        self._rank = {c: k for k, c in enumerate(self._codes)}

    def insert_cells(self, cells):
        """Make the given lattice cells live; returns the renumber map."""
        fresh = sorted(
            {morton(i, j) for (i, j) in cells if morton(i, j) not in self._rank}
        )
        if not fresh:
            return RenumberMap.identity()
        old = self._codes
        mapping = {}
        merged = []
        a = 0
        for code in fresh:
            pos = bisect_left(old, code, a)
            for k in range(a, pos):
                mapping[k] = len(merged)
                merged.append(old[k])
            merged.append(code)
            a = pos
        for k in range(a, len(old)):
            mapping[k] = len(merged)
            merged.append(old[k])
        self._codes = merged
        self._rebuild_rank()
        return RenumberMap.remap(mapping)

    def insert(self, points):
        cells = []
        for (x, y) in points:
            cell = self.point_cell(x, y)
            if cell is None:
                raise ValueError(f"point ({x}, {y}) lies outside the root box")
            cells.append(cell)
        return self.insert_cells(cells)

    def delete(self, ids):
        ids = set(ids)
        n = len(self._codes)
        for k in ids:
            if not (0 <= k < n):
                raise KeyError(f"box id {k} is not live")
        if not ids:
            return RenumberMap.identity()
        mapping = {}
        kept = []
        for k, code in enumerate(self._codes):
            if k not in ids:
                mapping[k] = len(kept)
                kept.append(code)
        self._codes = kept
        self._rebuild_rank()
        return RenumberMap.remap(mapping)

    def subdivide(self):
        """Replace every box by its 4 children one depth down."""
        self._codes = [c * 4 + r for c in self._codes for r in range(4)]
        self.depth += 1
        self._rebuild_rank()
        return RenumberMap.expand(4)

    def copy(self):
        t = BoxTree(self.root, self.depth)
        t._codes = list(self._codes)
        t._rank = dict(self._rank)
        return t


# -- persistence ------------------------------------------------------------


class TreeFormatError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def save(tree, path):
    rx, ry = tree.root.x, tree.root.y
    cx = 0.5 * (rx.lo + rx.hi)
    cy = 0.5 * (ry.lo + ry.hi)
    hx = 0.5 * (rx.hi - rx.lo)
    hy = 0.5 * (ry.hi - ry.lo)
    with open(path, "w") as fh:
        fh.write("CIPT 1\n")
        fh.write("dim 2\n")
        fh.write(f"depth {tree.depth}\n")
        fh.write(f"root {cx!r} {cy!r} {hx!r} {hy!r}\n")
        for code in tree._codes:
            i, j = demorton(code)
            fh.write(f"box {i} {j}\n")


def load(path):
    with open(path) as fh:
        lines = fh.read().splitlines()

    def fail(n, msg):
        raise TreeFormatError(n, msg)

    if len(lines) < 4:
        fail(len(lines) + 1, "truncated header")
    if lines[0].strip() != "CIPT 1":
        fail(1, f"bad magic {lines[0]!r}")
    if lines[1].strip() != "dim 2":
        fail(2, f"unsupported dimension line {lines[1]!r}")
    parts = lines[2].split()
    if len(parts) != 2 or parts[0] != "depth":
        fail(3, "expected 'depth <d>'")
    try:
        depth = int(parts[1])
    except ValueError:
        fail(3, f"bad depth {parts[1]!r}")
    if depth < 0:
        fail(3, "negative depth")
    parts = lines[3].split()
    if len(parts) != 5 or parts[0] != "root":
        fail(4, "expected 'root <cx> <cy> <rx> <ry>'")
    try:
        cx, cy, hx, hy = (float(p) for p in parts[1:])
    except ValueError:
        fail(4, "bad root numbers")
    if hx <= 0 or hy <= 0:
        fail(4, "root radii must be positive")
    tree = BoxTree(IvRect(Iv(cx - hx, cx + hx), Iv(cy - hy, cy + hy)), depth)
    n = tree.side
    codes = []
    prev = -1
    for lineno, line in enumerate(lines[4:], start=5):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "box":
            fail(lineno, f"expected 'box <i> <j>', got {line!r}")
        try:
            i, j = int(parts[1]), int(parts[2])
        except ValueError:
            fail(lineno, "bad box indices")
        if not (0 <= i < n and 0 <= j < n):
            fail(lineno, f"box ({i}, {j}) outside depth-{depth} lattice")
        code = morton(i, j)
        if code == prev:
            fail(lineno, f"duplicate box ({i}, {j})")
        if code < prev:
            fail(lineno, f"box ({i}, {j}) out of DFS order")
        codes.append(code)
        prev = code
    tree._codes = codes
    tree._rebuild_rank()
    return tree
