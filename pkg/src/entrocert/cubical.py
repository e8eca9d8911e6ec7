"""Cubical 2-complexes over the box lattice and their exact homology.

Cells are tuples (dim, i, j, t): vertices (0,i,j,0), edges (1,i,j,t) with
t=0 for the horizontal edge from (i,j) to (i+1,j) and t=1 for the vertical
one, squares (2,i,j,0).  On the torus all indices live mod n and boundary
coefficients are accumulated, so degenerate identifications cancel
correctly.

Homology is computed by a coreduction-style discrete Morse reduction
followed by integer Smith normal form on the small critical complex.  The
reduction keeps enough structure to project arbitrary cycles onto the
homology basis (gradient flow) and to lift basis elements back to honest
cell chains.
"""

import heapq
from collections import deque

from .snf import mat_vec, smith_normal_form

__all__ = [
    "cells_of_box",
    "cells_of_boxes",
    "CellComplex",
    "MorseReduction",
    "ChainHomology",
]


def _w(k, n, wrap):
    return k % n if wrap else k


def cells_of_box(i, j, n, wrap):
    i1 = _w(i + 1, n, wrap)
    j1 = _w(j + 1, n, wrap)
    return [
        (2, i, j, 0),
        (1, i, j, 0),
        (1, i, j1, 0),
        (1, i, j, 1),
        (1, i1, j, 1),
        (0, i, j, 0),
        (0, i1, j, 0),
        (0, i, j1, 0),
        (0, i1, j1, 0),
    ]


def cells_of_boxes(boxes, n, wrap):
    out = set()
    for (i, j) in boxes:
        out.update(cells_of_box(i, j, n, wrap))
    return out


class CellComplex:
    """A set of cells with boundary/coboundary restricted to membership."""

    def __init__(self, cells, n, wrap):
        self.cells = set(cells)
        self.n = n
        self.wrap = wrap

    def __len__(self):
        return len(self.cells)

    def _raw_boundary(self, cell):
        dim, i, j, t = cell
        n, wrap = self.n, self.wrap
        if dim == 0:
            return []
        if dim == 1:
            if t == 0:
                return [((0, _w(i + 1, n, wrap), j, 0), 1), ((0, i, j, 0), -1)]
            return [((0, i, _w(j + 1, n, wrap), 0), 1), ((0, i, j, 0), -1)]
        i1 = _w(i + 1, n, wrap)
        j1 = _w(j + 1, n, wrap)
        return [
            ((1, i, j, 0), 1),
            ((1, i1, j, 1), 1),
            ((1, i, j1, 0), -1),
            ((1, i, j, 1), -1),
        ]

    def boundary(self, cell):
        acc = {}
        for c, coeff in self._raw_boundary(cell):
            acc[c] = acc.get(c, 0) + coeff
        return [(c, v) for c, v in acc.items() if v and c in self.cells]

    def _raw_cofaces(self, cell):
        dim, i, j, t = cell
        n, wrap = self.n, self.wrap
        im = _w(i - 1, n, wrap)
        jm = _w(j - 1, n, wrap)
        if dim == 0:
            return [
                (1, i, j, 0),
                (1, im, j, 0),
                (1, i, j, 1),
                (1, i, jm, 1),
            ]
        if dim == 1:
            if t == 0:
                return [(2, i, j, 0), (2, i, jm, 0)]
            return [(2, i, j, 0), (2, im, j, 0)]
        return []

    def cofaces(self, cell):
        out = []
        seen = set()
        for c in self._raw_cofaces(cell):
            if c in self.cells and c not in seen:
                seen.add(c)
                out.append(c)
        return out

    def boundary_of_chain(self, chain):
        acc = {}
        for cell, coeff in chain.items():
            if not coeff:
                continue
            for c, v in self.boundary(cell):
                acc[c] = acc.get(c, 0) + coeff * v
        return {c: v for c, v in acc.items() if v}

    def euler(self):
        chi = 0
        for (dim, *_rest) in self.cells:
            chi += 1 if dim % 2 == 0 else -1
        return chi


class MorseReduction:
    """Coreduction matching plus gradient flow over one cell complex."""

    def __init__(self, complex_):
        self.cx = complex_
        self.criticals = []
        self.pairs = []          # (lower, upper, u) in removal order
        self.partner = {}        # lower -> (upper, u, order)
        self.uppers = set()
        self.order = {}
        self._flow_memo = {}
        self._reduce()
        self.crit_index = {c: k for k, c in enumerate(self.criticals)}

    def _reduce(self):
        cx = self.cx
        remaining = set(cx.cells)
        heap = sorted(remaining)
        queue = deque()
        stamp = 0

        def remove(cell):
            nonlocal stamp
            remaining.discard(cell)
            self.order[cell] = stamp
            stamp += 1
            for cof in cx.cofaces(cell):
                if cof in remaining:
                    queue.append(cof)

        hpos = 0
        while remaining:
            matched = False
            while queue:
                sigma = queue.popleft()
                if sigma not in remaining:
                    continue
                faces = [
                    (c, v) for c, v in cx.boundary(sigma) if c in remaining
                ]
                if len(faces) == 1 and abs(faces[0][1]) == 1:
                    alpha, u = faces[0]
                    remove(alpha)
                    remove(sigma)
                    self.pairs.append((alpha, sigma, u))
                    self.partner[alpha] = (sigma, u)
                    self.uppers.add(sigma)
                    matched = True
                    break
            if matched:
                continue
            # no coreduction available: declare the smallest cell critical
            while hpos < len(heap) and heap[hpos] not in remaining:
                hpos += 1
            if hpos >= len(heap):
                break
            cell = heap[hpos]
            self.criticals.append(cell)
            remove(cell)

    # -- gradient flow: chains -> critical coordinates ----------------------

    def flow_cell(self, cell):
        memo = self._flow_memo
        got = memo.get(cell)
        if got is not None:
            return got
        stack = [cell]
        while stack:
            top = stack[-1]
            if top in memo:
                stack.pop()
                continue
            if top in self.crit_index:
                memo[top] = {top: 1}
                stack.pop()
                continue
            if top in self.uppers:
                memo[top] = {}
                stack.pop()
                continue
            sigma, u = self.partner[top]
            deps = [
                (c, v)
                for c, v in self.cx.boundary(sigma)
                if c != top
            ]
            todo = [c for c, _ in deps if c not in memo]
            if todo:
                stack.extend(todo)
                continue
            acc = {}
            for c, v in deps:
                for crit, coeff in memo[c].items():
                    acc[crit] = acc.get(crit, 0) - u * v * coeff
            memo[top] = {c: v for c, v in acc.items() if v}
            stack.pop()
        return memo[cell]

    def flow_chain(self, chain):
        acc = {}
        for cell, coeff in chain.items():
            if not coeff:
                continue
            for crit, v in self.flow_cell(cell).items():
                acc[crit] = acc.get(crit, 0) + coeff * v
        return {c: v for c, v in acc.items() if v}

    def morse_boundary(self, crit):
        return self.flow_chain(dict(self.cx.boundary(crit)))

    def lift(self, crit_chain):
        """Cell chain representing a Morse cycle; exact cycle on success."""
        x = {c: v for c, v in crit_chain.items() if v}
        dx = self.cx.boundary_of_chain(x)
        for alpha, sigma, u in reversed(self.pairs):
            c = dx.get(alpha)
            if c:
                x[sigma] = x.get(sigma, 0) - u * c
                for cell, v in self.cx.boundary(sigma):
                    dx[cell] = dx.get(cell, 0) - u * c * v
        dx = {c: v for c, v in dx.items() if v}
        if dx:
            raise ValueError("chain does not lift to a cycle")
        return {c: v for c, v in x.items() if v}


class ChainHomology:
    """Integer homology of one complex via Morse reduction + SNF.

    Exposes Betti numbers, torsion, free generators (as critical-cell
    chains and lifted cell chains) and the coordinates of arbitrary cycles
    in the chosen free basis.
    """

    def __init__(self, complex_):
        self.cx = complex_
        self.morse = MorseReduction(complex_)
        crits = self.morse.criticals
        self.crit_by_dim = {d: [c for c in crits if c[0] == d] for d in (0, 1, 2)}
        self.index_by_dim = {
            d: {c: k for k, c in enumerate(cells)}
            for d, cells in self.crit_by_dim.items()
        }
        self._dM = {}
        for d in (1, 2):
            rows = self.crit_by_dim[d - 1]
            cols = self.crit_by_dim[d]
            ridx = self.index_by_dim[d - 1]
            mat = [[0] * len(cols) for _ in rows]
            for cj, cell in enumerate(cols):
                for crit, v in self.morse.morse_boundary(cell).items():
                    mat[ridx[crit]][cj] = v
            self._dM[d] = mat
        self._solve()

    def _solve(self):
        n0 = len(self.crit_by_dim[0])
        n1 = len(self.crit_by_dim[1])
        n2 = len(self.crit_by_dim[2])
        d1 = self._dM[1]          # n0 x n1
        d2 = self._dM[2]          # n1 x n2

        s1 = smith_normal_form(d1) if n0 and n1 else None
        # kernel of d1 inside C1
        if n1 == 0:
            ker_idx = []
            self._K = []
            self._s1 = None
        elif n0 == 0 or s1 is None:
            ker_idx = list(range(n1))
            self._K = None        # kernel = everything; coordinates trivial
            self._s1 = None
        else:
            r = s1.rank
            ker_idx = list(range(r, n1))
            self._K = None
            self._s1 = s1
        self._ker_idx = ker_idx
        k = len(ker_idx)

        # express d2 columns in kernel coordinates
        B = [[0] * n2 for _ in range(k)]
        if n2:
            for j in range(n2):
                col = [d2[i][j] for i in range(n1)]
                coords = self._kernel_coords(col)
                for i, v in enumerate(coords):
                    B[i][j] = v
        self._B = B
        s2 = smith_normal_form(B) if k and n2 else None
        self._s2 = s2

        dvals = []
        for i in range(k):
            if s2 is not None and i < s2.rank:
                dvals.append(s2.factors[i])
            else:
                dvals.append(0)
        self.h1_free_idx = [i for i, d in enumerate(dvals) if d == 0]
        self.h1_torsion = [d for d in dvals if d not in (0, 1)]
        self.b1 = len(self.h1_free_idx)

        # H0: coker of d1
        if n0 == 0:
            self.b0 = 0
            self.h0_torsion = []
            self._h0_dvals = []
        else:
            dvals0 = []
            for i in range(n0):
                if s1 is not None and i < s1.rank:
                    dvals0.append(s1.factors[i])
                else:
                    dvals0.append(0)
            self.h0_free_idx = [i for i, d in enumerate(dvals0) if d == 0]
            self.h0_torsion = [d for d in dvals0 if d not in (0, 1)]
            self.b0 = len(self.h0_free_idx)
            self._h0_dvals = dvals0

        # H2: kernel of d2 (free)
        if n2 == 0:
            self.b2 = 0
            self._h2_idx = []
        else:
            if s2 is not None:
                self._h2_idx = list(range(s2.rank, n2))
            else:
                self._h2_idx = list(range(n2))
            self.b2 = len(self._h2_idx)

    # -- coordinate helpers ---------------------------------------------------

    def _kernel_coords(self, vec_c1):
        """Coordinates of a d1-kernel vector in the kernel basis."""
        if not self._ker_idx:
            if any(vec_c1):
                raise ValueError("vector outside the trivial kernel")
            return []
        if self._s1 is None:
            return list(vec_c1)
        w = mat_vec(self._s1.Vinv, vec_c1)
        r = self._s1.rank
        if any(w[:r]):
            raise ValueError("vector is not a cycle")
        return w[r:]

    def h1_class(self, crit_chain):
        """Free H1 coordinates of a Morse 1-cycle."""
        n1 = len(self.crit_by_dim[1])
        vec = [0] * n1
        idx = self.index_by_dim[1]
        for cell, v in crit_chain.items():
            vec[idx[cell]] = v
        coords = self._kernel_coords(vec)
        if self._s2 is None:
            y = coords
        else:
            y = mat_vec(self._s2.U, coords)
        out = []
        for i in self.h1_free_idx:
            out.append(y[i])
        # torsion-only components are legal; nonzero coordinates on
        # invariant factors must be divisible (sanity)
        if self._s2 is not None:
            for i in range(self._s2.rank):
                d = self._s2.factors[i]
                if d not in (0, 1) and y[i] % d:
                    # class has a torsion component; free part still valid
                    pass
        return tuple(out)

    def h0_class(self, crit_chain):
        n0 = len(self.crit_by_dim[0])
        vec = [0] * n0
        idx = self.index_by_dim[0]
        for cell, v in crit_chain.items():
            vec[idx[cell]] = v
        if self._s1 is None:
            y = vec
        else:
            y = mat_vec(self._s1.U, vec)
        return tuple(y[i] for i in self.h0_free_idx)

    def h1_generators(self):
        """Free H1 generators as Morse chains (dicts over critical cells)."""
        k = len(self._ker_idx)
        gens = []
        for i in self.h1_free_idx:
            if self._s2 is None:
                coeffs = [1 if t == i else 0 for t in range(k)]
            else:
                coeffs = [self._s2.Uinv[t][i] for t in range(k)]
            vec = self._from_kernel_coords(coeffs)
            chain = {}
            cells = self.crit_by_dim[1]
            for t, v in enumerate(vec):
                if v:
                    chain[cells[t]] = v
            gens.append(chain)
        return gens

    def h0_generators(self):
        gens = []
        cells = self.crit_by_dim[0]
        n0 = len(cells)
        for i in self.h0_free_idx:
            if self._s1 is None:
                coeffs = [1 if t == i else 0 for t in range(n0)]
            else:
                coeffs = [self._s1.Uinv[t][i] for t in range(n0)]
            chain = {cells[t]: v for t, v in enumerate(coeffs) if v}
            gens.append(chain)
        return gens

    def _from_kernel_coords(self, coeffs):
        n1 = len(self.crit_by_dim[1])
        vec = [0] * n1
        if self._s1 is None:
            for i, idx in enumerate(self._ker_idx):
                vec[idx] = coeffs[i]
            return vec
        V = self._s1.V
        for i, kidx in enumerate(self._ker_idx):
            c = coeffs[i]
            if c:
                for row in range(n1):
                    if V[row][kidx]:
                        vec[row] += c * V[row][kidx]
        return vec

    def h1_generator_cycles(self):
        """Free H1 generators lifted to honest edge chains."""
        return [self.morse.lift(g) for g in self.h1_generators()]

    def class_of_cell_cycle(self, chain, dim):
        """Free coordinates of a cell-level cycle via gradient flow."""
        flowed = self.morse.flow_chain(chain)
        if dim == 1:
            return self.h1_class(flowed)
        if dim == 0:
            return self.h0_class(flowed)
        raise ValueError("class_of_cell_cycle supports dims 0 and 1")
