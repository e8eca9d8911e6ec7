"""Relative homology of index pairs and certified symbolic dynamics.

The induced map on H_*(P1, P0; Z) is built as a chain selector subordinate
to the acyclic carrier b -> F(b) n P1, evaluated lazily on the cells the
generator cycles actually touch.  Certification keeps a transition edge
only when a selected generator reproduces itself with a nonzero integer
coefficient and no contamination from other generators of the source
component; every cyclic composition of certified edges is then manifestly
non-nilpotent, which is what the Conley-index corollaries need.  Entropy
lower bounds come from exact-rational Collatz-Wielandt ratios.
"""

import math
from fractions import Fraction
from typing import NamedTuple

from .cubical import CellComplex, ChainHomology, cells_of_boxes
from .interval import log_frac_down
from .snf import mat_mul, mat_vec, smith_normal_form

__all__ = [
    "CubicalPair",
    "RelHomology",
    "GradedIntMatrix",
    "SymbolSystem",
    "AcyclicityError",
    "relative_homology",
    "acyclicity_check",
    "induced_map",
    "reduce_recurrent",
    "build_symbol_system",
    "verify_sft",
    "lefschetz",
    "entropy_lower_bound",
    "EntropyBound",
]


class AcyclicityError(RuntimeError):
    def __init__(self, boxes, message=None):
        self.boxes = tuple(sorted(boxes))
        super().__init__(
            message or f"{len(self.boxes)} boxes have non-acyclic image carriers"
        )


_OFF8 = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]


def _box_components(boxes, n, wrap):
    boxes = set(boxes)
    comps = []
    seen = set()
    for start in sorted(boxes):
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        frontier = [start]
        while frontier:
            i, j = frontier.pop()
            for a, b in _OFF8:
                q = ((i + a) % n, (j + b) % n) if wrap else (i + a, j + b)
                if q in boxes and q not in seen:
                    seen.add(q)
                    comp.add(q)
                    frontier.append(q)
        comps.append(frozenset(comp))
    return comps


class CubicalPair:
    """Cell data of an index pair: the relative complex split by the
    connected components of P1 minus P0."""

    def __init__(self, tree, pair, wrap):
        self.n = tree.side
        self.wrap = wrap
        self.p1_ids = frozenset(pair.p1)
        self.p0_ids = frozenset(pair.p0)
        cell_of = {k: (c.i, c.j) for k, c in zip(tree.boxnums(), tree.cells())}
        self.box_of_id = cell_of
        self.id_of_box = {v: k for k, v in cell_of.items()}
        self.p1_boxes = {cell_of[k] for k in self.p1_ids}
        self.p0_boxes = {cell_of[k] for k in self.p0_ids}
        self.k0 = cells_of_boxes(self.p0_boxes, self.n, self.wrap)
        interior = self.p1_boxes - self.p0_boxes
        self.components = _box_components(interior, self.n, self.wrap)
        self.comp_cells = []
        self.cell_comp = {}
        for ci, comp in enumerate(self.components):
            cells = cells_of_boxes(comp, self.n, self.wrap) - self.k0
            self.comp_cells.append(cells)
            for cell in cells:
                self.cell_comp[cell] = ci

    def complexes(self):
        return [
            CellComplex(cells, self.n, self.wrap) for cells in self.comp_cells
        ]


class RelHomology:
    """Per-component homology of the pair with a global generator index."""

    def __init__(self, pair_cx):
        self.pair = pair_cx
        self.homs = [ChainHomology(cx) for cx in pair_cx.complexes()]
        self.gen_index = []      # global H1 index -> (comp, local)
        for ci, h in enumerate(self.homs):
            for li in range(h.b1):
                self.gen_index.append((ci, li))
        self.h0_index = []
        for ci, h in enumerate(self.homs):
            for li in range(h.b0):
                self.h0_index.append((ci, li))
        self.b0 = sum(h.b0 for h in self.homs)
        self.b1 = sum(h.b1 for h in self.homs)
        self.b2 = sum(h.b2 for h in self.homs)
        self.h1_torsion = sorted(
            t for h in self.homs for t in h.h1_torsion
        )
        self.gen_component = tuple(ci for ci, _ in self.gen_index)

    @property
    def betti(self):
        return (self.b0, self.b1, self.b2)

    def h1_generator_cycles(self):
        cycles = []
        per_comp = [h.h1_generator_cycles() for h in self.homs]
        for ci, li in self.gen_index:
            cycles.append(per_comp[ci][li])
        return cycles

    def h0_generator_chains(self):
        chains = []
        per_comp = []
        for h in self.homs:
            gens = h.h0_generators()
            per_comp.append([h.morse.lift(g) for g in gens])
        for ci, li in self.h0_index:
            chains.append(per_comp[ci][li])
        return chains

    def _split(self, chain):
        parts = {}
        for cell, coeff in chain.items():
            if not coeff or cell in self.pair.k0:
                continue
            ci = self.pair.cell_comp.get(cell)
            if ci is None:
                raise ValueError(f"cell {cell} is outside the relative complex")
            parts.setdefault(ci, {})[cell] = coeff
        return parts

    def h1_class(self, chain):
        parts = self._split(chain)
        out = []
        for ci, li in self.gen_index:
            part = parts.get(ci)
            if part is None:
                out.append(0)
            else:
                out.append(None)  # filled below
        coords_by_comp = {}
        for ci, part in parts.items():
            coords_by_comp[ci] = self.homs[ci].class_of_cell_cycle(part, 1)
        for g, (ci, li) in enumerate(self.gen_index):
            if out[g] is None:
                out[g] = coords_by_comp[ci][li]
        return out

    def h0_class(self, chain):
        parts = self._split(chain)
        coords_by_comp = {
            ci: self.homs[ci].class_of_cell_cycle(part, 0)
            for ci, part in parts.items()
        }
        out = []
        for ci, li in self.h0_index:
            got = coords_by_comp.get(ci)
            out.append(0 if got is None else got[li])
        return out


def relative_homology(tree, pair, wrap):
    """Homology of (|P1|, |P0|) with explicit generator data."""
    return RelHomology(CubicalPair(tree, pair, wrap))


def _connected_boxes(boxes, n, wrap):
    return len(_box_components(boxes, n, wrap)) == 1 if boxes else False


def _box_complex_acyclic(boxes, n, wrap):
    """Cheap exact test for full box complexes: connected and chi == 1.

    Box complexes are closed subsurfaces of the (orientable) torus or
    plane, so H1 is free and b2 vanishes unless the set is the whole
    torus (chi 0); connected + chi == 1 is then equivalent to acyclicity.
    """
    if not boxes:
        return False
    if not _connected_boxes(boxes, n, wrap):
        return False
    cells = cells_of_boxes(boxes, n, wrap)
    chi = 0
    for (dim, *_r) in cells:
        chi += 1 if dim % 2 == 0 else -1
    return chi == 1


def acyclicity_check(boxes, n, wrap):
    """Full homological acyclicity of a box set's realization."""
    boxes = set(boxes)
    if not boxes:
        return False
    if not _connected_boxes(boxes, n, wrap):
        return False
    h = ChainHomology(CellComplex(cells_of_boxes(boxes, n, wrap), n, wrap))
    return h.b0 == 1 and h.b1 == 0 and h.b2 == 0 and not h.h1_torsion


class GradedIntMatrix(NamedTuple):
    m0: list
    m1: list
    m2: list
    betti: tuple
    h1_torsion: tuple
    gen_component: tuple      # component index per H1 generator
    h0_component: tuple       # component index per H0 generator
    components: tuple         # frozensets of box ids per component


class _Selector:
    """Chain selector subordinate to the carrier cell -> n F(boxes(cell)).

    Carriers are the full image cell sets, so the chain map lands in the
    extended pair (P1 u E, P0 u E) with E the image cells outside P1.
    Provided no E cell touches the pair interior, that pair has the same
    relative complex as (P1, P0) and the matrix is an endomorphism.
    """

    def __init__(self, pair_cx, T):
        self.pair = pair_cx
        self.n = pair_cx.n
        self.wrap = pair_cx.wrap
        self.id_of_box = pair_cx.id_of_box
        self.carrier_boxes = {}
        for k in pair_cx.p1_ids:
            cells = T.cells.get(k)
            if cells is None:
                raise KeyError(f"no transition column for box {k}")
            self.carrier_boxes[pair_cx.box_of_id[k]] = frozenset(cells)
        self._phi0 = {}
        self._phi1 = {}
        self._phi2 = {}
        self._carrier_memo = {}

    def check_extension(self):
        """No image cell outside P1 may touch an interior box."""
        interior = self.pair.p1_boxes - self.pair.p0_boxes
        bad = set()
        outside = set()
        for cells in self.carrier_boxes.values():
            outside.update(c for c in cells if c not in self.pair.p1_boxes)
        for (i, j) in outside:
            for a in (-1, 0, 1):
                for b in (-1, 0, 1):
                    q = (
                        ((i + a) % self.n, (j + b) % self.n)
                        if self.wrap
                        else (i + a, j + b)
                    )
                    if q in interior:
                        bad.add(self.id_of_box[q])
        if bad:
            raise AcyclicityError(
                bad,
                f"{len(bad)} interior boxes touch image cells outside P1; "
                "grow the pair or deepen the grid",
            )

    def _wrapc(self, i, j):
        if self.wrap:
            return i % self.n, j % self.n
        return i, j

    def _boxes_of_cell(self, cell):
        dim, i, j, t = cell
        if dim == 2:
            cands = [(i, j)]
        elif dim == 1:
            if t == 0:
                cands = [(i, j), self._wrapc(i, j - 1)]
            else:
                cands = [(i, j), self._wrapc(i - 1, j)]
        else:
            cands = [
                (i, j),
                self._wrapc(i - 1, j),
                self._wrapc(i, j - 1),
                self._wrapc(i - 1, j - 1),
            ]
        return [b for b in cands if b in self.carrier_boxes]

    def carrier(self, cell):
        got = self._carrier_memo.get(cell)
        if got is not None:
            return got
        owners = self._boxes_of_cell(cell)
        if not owners:
            raise AcyclicityError([], f"cell {cell} has no P1 owner")
        acc = self.carrier_boxes[owners[0]]
        for b in owners[1:]:
            acc = acc & self.carrier_boxes[b]
        self._carrier_memo[cell] = acc
        return acc

    def check_all_carriers(self):
        """Abort with the offending boxes unless every carrier the chain
        map can touch is acyclic: the relative cells plus their faces."""
        scope = set(self.pair.cell_comp)
        grow = list(scope)
        probe = CellComplex(set(), self.n, self.wrap)
        while grow:
            cell = grow.pop()
            for face, _coeff in probe._raw_boundary(cell):
                if face not in scope:
                    scope.add(face)
                    grow.append(face)
        bad = set()
        ok_memo = {}
        for cell in scope:
            car = self.carrier(cell)
            verdict = ok_memo.get(car)
            if verdict is None:
                verdict = _box_complex_acyclic(car, self.n, self.wrap)
                ok_memo[car] = verdict
            if not verdict:
                for b in self._boxes_of_cell(cell):
                    bad.add(self.id_of_box[b])
        if bad:
            raise AcyclicityError(bad)

    def phi0(self, vertex):
        got = self._phi0.get(vertex)
        if got is not None:
            return got
        car = self.carrier(vertex)
        cells = cells_of_boxes(car, self.n, self.wrap)
        target = min(c for c in cells if c[0] == 0)
        self._phi0[vertex] = target
        return target

    def phi1(self, edge):
        got = self._phi1.get(edge)
        if got is not None:
            return got
        dim, i, j, t = edge
        tail = (0, i, j, 0)
        if t == 0:
            head = (0, *self._wrapc(i + 1, j), 0)
        else:
            head = (0, *self._wrapc(i, j + 1), 0)
        a = self.phi0(tail)
        b = self.phi0(head)
        car = self.carrier(edge)
        chain = self._edge_path(car, a, b)
        self._phi1[edge] = chain
        return chain

    def _edge_path(self, carrier_boxes, a, b):
        """Signed edge chain from vertex a to vertex b inside the carrier."""
        if a == b:
            return {}
        cells = cells_of_boxes(carrier_boxes, self.n, self.wrap)
        cx = CellComplex(cells, self.n, self.wrap)
        parent = {a: None}
        frontier = [a]
        while frontier and b not in parent:
            nxt = []
            for v in frontier:
                for e in sorted(cx.cofaces(v)):
                    if e[0] != 1:
                        continue
                    for w, sign in cx.boundary(e):
                        if w != v and w not in parent:
                            parent[w] = (v, e)
                            nxt.append(w)
            frontier = nxt
        if b not in parent:
            raise AcyclicityError(
                [self.id_of_box[x] for x in carrier_boxes],
                "carrier is disconnected",
            )
        chain = {}
        v = b
        while parent[v] is not None:
            u, e = parent[v]
            # edge e runs tail->head with boundary head - tail
            faces = dict((c, s) for c, s in cx.boundary(e))
            sign = faces.get(v, 0)
            chain[e] = chain.get(e, 0) + sign
            v = u
        return {e: c for e, c in chain.items() if c}

    def phi2(self, square):
        got = self._phi2.get(square)
        if got is not None:
            return got
        own = CellComplex(
            cells_of_boxes([(square[1], square[2])], self.n, self.wrap),
            self.n,
            self.wrap,
        )
        z = {}
        for e, sign in own.boundary(square):
            for c, v in self.phi1(e).items():
                z[c] = z.get(c, 0) + sign * v
        z = {c: v for c, v in z.items() if v}
        car = self.carrier(square)
        cells = cells_of_boxes(car, self.n, self.wrap)
        cx = CellComplex(cells, self.n, self.wrap)
        squares = sorted(c for c in cells if c[0] == 2)
        edges = sorted(c for c in cells if c[0] == 1)
        eidx = {c: k for k, c in enumerate(edges)}
        mat = [[0] * len(squares) for _ in edges]
        for sj, sq in enumerate(squares):
            for c, v in cx.boundary(sq):
                mat[eidx[c]][sj] = v
        target = [0] * len(edges)
        for c, v in z.items():
            target[eidx[c]] = v
        s = smith_normal_form(mat)
        w = mat_vec(s.U, target)
        coeffs = [0] * len(squares)
        for i in range(s.rank):
            d = s.D[i][i]
            if w[i] % d:
                raise AcyclicityError(
                    [self.id_of_box[x] for x in car],
                    "edge cycle does not bound in its carrier",
                )
            coeffs[i] = w[i] // d
        if any(w[s.rank :]):
            raise AcyclicityError(
                [self.id_of_box[x] for x in car],
                "edge cycle does not bound in its carrier",
            )
        q = mat_vec(s.V, coeffs)
        chain = {squares[k]: v for k, v in enumerate(q) if v}
        self._phi2[square] = chain
        return chain

    def map_chain(self, chain, dim):
        out = {}
        fn = (self.phi0, self.phi1, self.phi2)[dim]
        for cell, coeff in chain.items():
            if not coeff:
                continue
            img = fn(cell)
            if dim == 0:
                img = {img: 1}
            for c, v in img.items():
                out[c] = out.get(c, 0) + coeff * v
        return {c: v for c, v in out.items() if v}


def induced_map(tree, pair, T, wrap, rel=None):
    """Integer matrices of the induced map on H_*(P1, P0).

    T supplies the box map cells over P1.  Raises AcyclicityError with
    the offending boxes when some image carrier is not acyclic or the
    image leaks next to the pair interior; callers deepen the grid and
    retry.
    """
    pair_cx = CubicalPair(tree, pair, wrap)
    if rel is None:
        rel = RelHomology(pair_cx)
    sel = _Selector(pair_cx, T)
    sel.check_extension()
    sel.check_all_carriers()

    if rel.b2:
        raise AcyclicityError(
            [], "H2 of the pair is nontrivial; deepen the grid"
        )

    def rel_part(chain):
        return {c: v for c, v in chain.items() if c in pair_cx.cell_comp}

    m1 = [[0] * rel.b1 for _ in range(rel.b1)]
    for j, cycle in enumerate(rel.h1_generator_cycles()):
        image = rel_part(sel.map_chain(cycle, 1))
        coords = rel.h1_class(image)
        for i, v in enumerate(coords):
            m1[i][j] = v

    m0 = [[0] * rel.b0 for _ in range(rel.b0)]
    if rel.b0:
        for j, chain in enumerate(rel.h0_generator_chains()):
            image = rel_part(sel.map_chain(chain, 0))
            coords = rel.h0_class(image)
            for i, v in enumerate(coords):
                m0[i][j] = v

    comp_ids = tuple(
        frozenset(pair_cx.id_of_box[b] for b in comp)
        for comp in pair_cx.components
    )
    return GradedIntMatrix(
        m0,
        m1,
        [],
        rel.betti,
        tuple(rel.h1_torsion),
        rel.gen_component,
        tuple(ci for ci, _ in rel.h0_index),
        comp_ids,
    )


# -- shift-equivalence reduction ------------------------------------------------


class ReducedEndo(NamedTuple):
    matrix: list       # r x r restriction to the eventual image
    include: list      # n x r: s
    project: list      # r x n: r
    power: int         # the shift-equivalence exponent k

    def verify(self, original):
        A = original
        R = self.matrix
        s = self.include
        r = self.project
        n = len(A)
        k = self.power
        Ak = identity_pow(A, k)
        Rk = identity_pow(R, k)
        if not R:
            # rank-0 reduction: s∘r is the zero endomorphism of Z^n
            zero = [[0] * n for _ in range(n)]
            return Ak == zero
        return (
            mat_mul(r, A) == mat_mul(R, r)
            and mat_mul(A, s) == mat_mul(s, R)
            and mat_mul(r, s) == Rk
            and mat_mul(s, r) == Ak
        )


def identity_pow(A, k):
    n = len(A)
    out = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(k):
        out = mat_mul(out, A)
    return out


def _reduce_endo(A):
    n = len(A)
    if n == 0:
        return ReducedEndo([], [], [], 0)
    E = identity_pow(A, n)
    s = smith_normal_form(E)
    r = s.rank
    # saturated basis of the eventual image: first r columns of Uinv
    B = [[s.Uinv[i][t] for t in range(r)] for i in range(n)]

    def coords(vec):
        w = mat_vec(s.U, vec)
        if any(w[r:]):
            raise ArithmeticError("vector escapes the eventual image")
        return w[:r]

    AB = mat_mul(A, B)
    R = [[0] * r for _ in range(r)]
    for j in range(r):
        col = coords([AB[i][j] for i in range(n)])
        for i in range(r):
            R[i][j] = col[i]
    proj = [[0] * n for _ in range(r)]
    for j in range(n):
        col = coords([E[i][j] for i in range(n)])
        for i in range(r):
            proj[i][j] = col[i]
    return ReducedEndo(R, B, proj, n)


def reduce_recurrent(M):
    """Shift-equivalent restriction of each degree to its eventual image.

    Returns (reduced GradedIntMatrix, witnesses); the witnesses carry the
    inclusion/projection maps and verify the four shift-equivalence
    identities exactly.
    """
    red0 = _reduce_endo(M.m0)
    red1 = _reduce_endo(M.m1)
    for red, mat in ((red0, M.m0), (red1, M.m1)):
        if len(mat) and not red.verify(mat):
            raise ArithmeticError("shift equivalence identities failed")
    reduced = GradedIntMatrix(
        red0.matrix,
        red1.matrix,
        [],
        (len(red0.matrix), len(red1.matrix), 0),
        (),
        None,
        None,
        M.components,
    )
    return reduced, (red0, red1)


# -- symbol systems and certification -------------------------------------------


class SymbolSystem(NamedTuple):
    symbols: tuple        # component indices (into components of M)
    matrix: tuple         # 0/1 rows: matrix[i][j] = 1 iff edge i -> j allowed
    gens: tuple           # per symbol: tuple of global H1 generator indices
    selection: tuple      # per symbol: the selected generator (or None)
    certified: tuple      # per-edge records ((i, j, gi, gj, entry)) or None
    components: tuple     # box-id frozensets, aligned with `symbols`


def _column_echelon_transform(B, k):
    """Unimodular E (k x k, with inverse) bringing B (n x k) to column
    echelon form by column operations only."""
    n = len(B)
    C = [list(row) for row in B]
    E = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    Einv = [[1 if i == j else 0 for j in range(k)] for i in range(k)]

    def col_add(dst, src, c):
        for i in range(n):
            if C[i][src]:
                C[i][dst] += c * C[i][src]
        for i in range(k):
            if E[i][src]:
                E[i][dst] += c * E[i][src]
        for j in range(k):
            if Einv[dst][j]:
                Einv[src][j] -= c * Einv[dst][j]

    def col_swap(a, b):
        if a == b:
            return
        for i in range(n):
            C[i][a], C[i][b] = C[i][b], C[i][a]
        for i in range(k):
            E[i][a], E[i][b] = E[i][b], E[i][a]
        Einv[a], Einv[b] = Einv[b], Einv[a]

    c0 = 0
    for row in range(n):
        if c0 >= k:
            break
        live = [j for j in range(c0, k) if C[row][j]]
        while len(live) > 1:
            live.sort(key=lambda j: abs(C[row][j]))
            piv = live[0]
            p = C[row][piv]
            rest = []
            for j in live[1:]:
                q = C[row][j] // p
                if q:
                    col_add(j, piv, -q)
                if C[row][j]:
                    rest.append(j)
            live = [piv] + rest
        if live:
            col_swap(c0, live[0])
            c0 += 1
    return E, Einv


def compact_components(M):
    """Unimodular per-component basis change concentrating each
    component's outgoing image into as few generators as possible.

    A pure basis choice: the returned matrix represents the same induced
    map with the same component tags, but zero columns appear wherever a
    component's generators had linearly dependent images, which both trims
    dead directions and removes the contamination that blocks edge
    certification.
    """
    n = len(M.m1)
    mat = [list(row) for row in M.m1]
    for comp in sorted(set(M.gen_component or ())):
        idx = [g for g in range(n) if M.gen_component[g] == comp]
        k = len(idx)
        if k <= 1:
            continue
        block = [[mat[i][j] for j in idx] for i in range(n)]
        E, Einv = _column_echelon_transform(block, k)
        # columns: mat[:, idx] <- mat[:, idx] . E
        for i in range(n):
            old = [mat[i][j] for j in idx]
            for a, j in enumerate(idx):
                mat[i][j] = sum(old[t] * E[t][a] for t in range(k))
        # rows: mat[idx, :] <- Einv . mat[idx, :]
        old_rows = [list(mat[j]) for j in idx]
        for a, j in enumerate(idx):
            for col in range(n):
                mat[j][col] = sum(Einv[a][t] * old_rows[t][col] for t in range(k))
    return M._replace(m1=mat)


def _trim_generators(m1, gen_component):
    """Drop generators with an all-zero row or column, iteratively."""
    alive = set(range(len(m1)))
    changed = True
    while changed:
        changed = False
        for g in sorted(alive):
            row_zero = all(m1[g][t] == 0 for t in alive)
            col_zero = all(m1[t][g] == 0 for t in alive)
            if row_zero or col_zero:
                alive.discard(g)
                changed = True
    return alive


def build_symbol_system(M):
    """Candidate symbol system: one symbol per component that kept a
    generator after trimming, edges wherever the block is nonzero."""
    alive = _trim_generators(M.m1, M.gen_component)
    comp_gens = {}
    for g in sorted(alive):
        comp_gens.setdefault(M.gen_component[g], []).append(g)
    symbols = tuple(sorted(comp_gens))
    k = len(symbols)
    mat = [[0] * k for _ in range(k)]
    for a, ca in enumerate(symbols):
        for b, cb in enumerate(symbols):
            block_nonzero = any(
                M.m1[gj][gi] != 0 for gi in comp_gens[ca] for gj in comp_gens[cb]
            )
            if block_nonzero:
                mat[a][b] = 1
    return SymbolSystem(
        symbols,
        tuple(tuple(r) for r in mat),
        tuple(tuple(comp_gens[c]) for c in symbols),
        tuple(None for _ in symbols),
        None,
        tuple(M.components[c] for c in symbols),
    )


def _retained_edges(M, sys_, selection):
    """Edges surviving the selection criterion, with their records."""
    out = []
    k = len(sys_.symbols)
    for a in range(k):
        ga = selection[a]
        for b in range(k):
            if not sys_.matrix[a][b]:
                continue
            gb = selection[b]
            entry = M.m1[gb][ga]
            if entry == 0:
                continue
            clean = all(
                M.m1[gb][g] == 0 for g in sys_.gens[a] if g != ga
            )
            if clean:
                out.append((a, b, ga, gb, entry))
    return out


def verify_sft(sys_, M, exhaustive_limit=4096):
    """Pick one generator per symbol and keep only certified edges.

    A kept edge i->j guarantees that in any composition of blocks along a
    path of kept edges, the (selected, selected) entry is the product of
    the per-edge integers, hence nonzero: every cyclic word composition is
    non-nilpotent.  The selection maximizes the number of kept edges, by
    exhaustive search when the product of generator counts is small and by
    greedy sweeps otherwise.
    """
    k = len(sys_.symbols)
    if k == 0:
        return sys_._replace(certified=())
    space = 1
    for gens in sys_.gens:
        space *= max(1, len(gens))
        if space > exhaustive_limit:
            break

    def score(selection):
        return len(_retained_edges(M, sys_, selection))

    if space <= exhaustive_limit:
        best = None
        best_score = -1

        def rec(idx, cur):
            nonlocal best, best_score
            if idx == k:
                sc = score(cur)
                if sc > best_score:
                    best_score = sc
                    best = list(cur)
                return
            for g in sys_.gens[idx]:
                cur.append(g)
                rec(idx + 1, cur)
                cur.pop()

        rec(0, [])
        selection = best
    else:
        selection = [gens[0] for gens in sys_.gens]
        improved = True
        sweeps = 0
        while improved and sweeps < 10:
            improved = False
            sweeps += 1
            for a in range(k):
                base = score(selection)
                best_g = selection[a]
                for g in sys_.gens[a]:
                    if g == best_g:
                        continue
                    trial = list(selection)
                    trial[a] = g
                    if score(trial) > base:
                        base = score(trial)
                        best_g = g
                        improved = True
                selection[a] = best_g

    edges = _retained_edges(M, sys_, selection)
    mat = [[0] * k for _ in range(k)]
    for (a, b, *_r) in edges:
        mat[a][b] = 1
    # drop symbols with no certified incident edge
    keep = [
        t
        for t in range(k)
        if any(mat[t][b] for b in range(k)) or any(mat[a][t] for a in range(k))
    ]
    remap = {t: i for i, t in enumerate(keep)}
    new_mat = tuple(
        tuple(mat[a][b] for b in keep) for a in keep
    )
    new_edges = tuple(
        (remap[a], remap[b], ga, gb, entry)
        for (a, b, ga, gb, entry) in edges
        if a in remap and b in remap
    )
    return SymbolSystem(
        tuple(sys_.symbols[t] for t in keep),
        new_mat,
        tuple(sys_.gens[t] for t in keep),
        tuple(selection[t] for t in keep),
        new_edges,
        tuple(sys_.components[t] for t in keep),
    )


def _block(M, gens_to, gens_from):
    return [[M.m1[i][j] for j in gens_from] for i in gens_to]


def lefschetz(M, sys_, word):
    """Lefschetz number of the block composition along a cyclic word.

    Traces over trimmed generator sets are exact for cyclic compositions:
    trimmed generators lie on no generator-level cycle, so their diagonal
    entries vanish in every composed power.
    """
    if not word:
        raise ValueError("empty word")
    for a, b in zip(word, list(word[1:]) + [word[0]]):
        if not sys_.matrix[a][b]:
            raise KeyError(f"edge {a}->{b} absent from the candidate matrix")

    def compose(mats, gens_of):
        prod = None
        for t in range(len(word)):
            a = word[t]
            b = word[(t + 1) % len(word)]
            blk = [[mats[i][j] for j in gens_of(a)] for i in gens_of(b)]
            prod = blk if prod is None else mat_mul(blk, prod)
        return sum(prod[i][i] for i in range(len(prod)))

    total = 0
    if M.m0 and M.h0_component is not None:
        def h0_gens(sym_idx):
            comp = sys_.symbols[sym_idx]
            return [g for g, c in enumerate(M.h0_component) if c == comp]

        if all(h0_gens(a) for a in word):
            total += compose(M.m0, h0_gens)
    if M.m1:
        total -= compose(M.m1, lambda a: list(sys_.gens[a]))
    return total


class EntropyBound(NamedTuple):
    value: float          # rigorous lower bound for log sp(A)
    achieved_at: int      # iteration index of the best ratio, or 0
    no_cycle: bool
    ratio: tuple          # (p, q) exact rational bound for sp(A)


def _trim_matrix(mat):
    n = len(mat)
    alive = list(range(n))
    changed = True
    while changed:
        changed = False
        keep = []
        for i in alive:
            row = any(mat[i][j] for j in alive)
            col = any(mat[j][i] for j in alive)
            if row and col:
                keep.append(i)
            else:
                changed = True
        alive = keep
    return alive


def entropy_lower_bound(sys_, maxpow=24):
    """Certified lower bound for log sp(A) via Collatz-Wielandt ratios.

    For any positive integer vector x, min_i (Ax)_i / x_i bounds sp(A)
    from below; power iteration with exact rationals makes the bound
    converge from below.  The logarithm is rounded down.
    """
    if maxpow < 1:
        raise ValueError("maxpow must be at least 1")
    mat = [list(r) for r in sys_.matrix]
    alive = _trim_matrix(mat)
    if not alive:
        return EntropyBound(0.0, 0, True, (1, 1))
    A = [[mat[i][j] for j in alive] for i in alive]
    n = len(A)
    x = [1] * n
    best = Fraction(0)
    best_k = 0
    for k in range(1, maxpow + 1):
        y = mat_vec(A, x)
        ratio = min(Fraction(yi, xi) for yi, xi in zip(y, x))
        if ratio > best:
            best = ratio
            best_k = k
        x = y
    if best <= 0:
        return EntropyBound(0.0, 0, True, (0, 1))
    if best <= 1:
        return EntropyBound(0.0, best_k, False, (best.numerator, best.denominator))
    value = log_frac_down(best.numerator, best.denominator)
    return EntropyBound(value, best_k, False, (best.numerator, best.denominator))
