import random

from entrocert.cubical import CellComplex, ChainHomology, cells_of_boxes
from entrocert.snf import integer_rank, smith_normal_form


def direct_homology(cx):
    """Betti numbers and H1 torsion straight from the full boundary
    matrices (no Morse reduction): the independent oracle."""
    cells = sorted(cx.cells)
    by_dim = {d: [c for c in cells if c[0] == d] for d in (0, 1, 2)}
    idx = {d: {c: k for k, c in enumerate(by_dim[d])} for d in (0, 1, 2)}
    n0, n1, n2 = len(by_dim[0]), len(by_dim[1]), len(by_dim[2])

    def bmat(d):
        rows = by_dim[d - 1]
        cols = by_dim[d]
        M = [[0] * len(cols) for _ in rows]
        for j, cell in enumerate(cols):
            for c, v in cx.boundary(cell):
                M[idx[d - 1][c]][j] = v
        return M

    d1 = bmat(1)
    d2 = bmat(2)
    r1 = integer_rank(d1) if n0 and n1 else 0
    r2 = integer_rank(d2) if n1 and n2 else 0
    b0 = n0 - r1
    b1 = n1 - r1 - r2
    b2 = n2 - r2
    torsion = []
    if n1 and n2:
        s = smith_normal_form(d2)
        torsion = [d for d in s.factors if d != 1]
    return b0, b1, b2, sorted(torsion)


def random_complex(rng):
    wrap = rng.random() < 0.5
    n = rng.choice([2, 3, 4]) if wrap else rng.choice([3, 4, 5])
    boxes = {
        (rng.randrange(n), rng.randrange(n))
        for _ in range(rng.randrange(1, n * n + 1))
    }
    cells = set(cells_of_boxes(boxes, n, wrap))
    # occasionally puncture: drop some squares (still a closed complex)
    for cell in list(cells):
        if cell[0] == 2 and rng.random() < 0.3:
            cells.discard(cell)
    # occasionally make it relative to a subcomplex
    if rng.random() < 0.5 and len(boxes) > 1:
        sub = {b for b in boxes if rng.random() < 0.4}
        cells -= cells_of_boxes(sub, n, wrap)
    return CellComplex(cells, n, wrap)


def test_morse_homology_matches_direct_snf():
    rng = random.Random(31)
    for trial in range(150):
        cx = random_complex(rng)
        h = ChainHomology(cx)
        b0, b1, b2, torsion = direct_homology(cx)
        assert (h.b0, h.b1, h.b2) == (b0, b1, b2), (trial, sorted(cx.cells))
        assert sorted(h.h1_torsion) == torsion, (trial, sorted(cx.cells))


def test_flow_is_a_chain_map():
    rng = random.Random(32)
    for _ in range(60):
        cx = random_complex(rng)
        h = ChainHomology(cx)
        edges = [c for c in cx.cells if c[0] == 1]
        squares = [c for c in cx.cells if c[0] == 2]
        for pool, dim in ((edges, 1), (squares, 2)):
            if not pool:
                continue
            chain = {
                c: rng.randrange(-2, 3)
                for c in rng.sample(pool, min(4, len(pool)))
            }
            lhs = h.morse.flow_chain(cx.boundary_of_chain(chain))
            flowed = h.morse.flow_chain(chain)
            rhs = {}
            for crit, coeff in flowed.items():
                for c, v in h.morse.morse_boundary(crit).items():
                    rhs[c] = rhs.get(c, 0) + coeff * v
            rhs = {c: v for c, v in rhs.items() if v}
            assert lhs == rhs


def test_generators_lift_to_cycles_with_unit_class():
    rng = random.Random(33)
    tried = 0
    for _ in range(120):
        cx = random_complex(rng)
        h = ChainHomology(cx)
        if h.b1 == 0:
            continue
        tried += 1
        cycles = h.h1_generator_cycles()
        for i, z in enumerate(cycles):
            assert not cx.boundary_of_chain(z)
            got = h.class_of_cell_cycle(z, 1)
            want = tuple(1 if t == i else 0 for t in range(h.b1))
            assert got == want
        if tried > 25:
            break
    assert tried >= 10


def test_annulus_absolute():
    n = 8
    boxes = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if 1 <= i <= 5 and 1 <= j <= 5 and not (2 <= i <= 4 and 2 <= j <= 4)
    ]
    cx = CellComplex(cells_of_boxes(boxes, n, False), n, False)
    h = ChainHomology(cx)
    assert (h.b0, h.b1, h.b2) == (1, 1, 0)
    assert h.h1_torsion == []


def test_full_torus():
    n = 4
    boxes = [(i, j) for i in range(n) for j in range(n)]
    cx = CellComplex(cells_of_boxes(boxes, n, True), n, True)
    h = ChainHomology(cx)
    assert (h.b0, h.b1, h.b2) == (1, 2, 1)


def test_strip_rel_ends():
    # horizontal strip with both end columns quotiented out: H1 = Z, H0 = 0
    n = 8
    strip = [(i, 3) for i in range(1, 7)]
    ends = [(1, 3), (6, 3)]
    k1 = cells_of_boxes(strip, n, False)
    k0 = cells_of_boxes(ends, n, False)
    cx = CellComplex(k1 - k0, n, False)
    h = ChainHomology(cx)
    assert (h.b0, h.b1, h.b2) == (0, 1, 0)
    assert h.h1_torsion == []
