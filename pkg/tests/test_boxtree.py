import random

import pytest
from hypothesis import given, settings, strategies as st

from entrocert.boxtree import BoxTree, RenumberMap, demorton, load, morton, save
from entrocert.interval import Iv, IvRect


def unit_tree(depth):
    return BoxTree(IvRect(Iv(0.0, 1.0), Iv(0.0, 1.0)), depth)


def full_tree(depth):
    t = unit_tree(depth)
    n = t.side
    t.insert_cells([(i, j) for i in range(n) for j in range(n)])
    return t


def fresh_numbering(tree):
    """Recompute ids from scratch: rank in sorted Morton order."""
    return {c: k for k, c in enumerate(sorted(tree._codes))}


def test_morton_roundtrip():
    for i, j in [(0, 0), (1, 2), (255, 1), (1023, 511)]:
        assert demorton(morton(i, j)) == (i, j)


def test_morton_is_dfs_rank():
    # lexicographic child order (x half, then y half) at every level
    order = sorted(
        ((i, j) for i in range(8) for j in range(8)),
        key=lambda c: [(c[0] >> (2 - l) & 1, c[1] >> (2 - l) & 1) for l in range(3)],
    )
    by_code = sorted(((i, j) for i in range(8) for j in range(8)),
                     key=lambda c: morton(*c))
    assert order == by_code


def test_find_center_and_absent():
    t = unit_tree(3)
    t.insert_cells([(2, 5)])
    rect = t.cell_rect(2, 5)
    cx, cy = rect.x.mid, rect.y.mid
    assert t.find([(cx, cy)]) == [0]
    assert t.find([(0.99, 0.99)]) == [None]


def test_find_matches_linear_scan():
    rng = random.Random(7)
    t = unit_tree(4)
    cells = {(rng.randrange(16), rng.randrange(16)) for _ in range(60)}
    t.insert_cells(cells)
    pts = [(rng.random(), rng.random()) for _ in range(1000)]
    got = t.find(pts)
    n = t.side
    for (x, y), fid in zip(pts, got):
        i = min(int(x * n), n - 1)
        j = min(int(y * n), n - 1)
        expect = None
        for k, code in enumerate(t._codes):
            if demorton(code) == (i, j):
                expect = k
                break
        assert fid == expect


def test_insert_existing_is_identity():
    t = unit_tree(3)
    t.insert_cells([(1, 1)])
    m = t.insert([(t.cell_rect(1, 1).x.mid, t.cell_rect(1, 1).y.mid)])
    assert m.is_identity


def test_insert_into_empty():
    t = unit_tree(3)
    m = t.insert([(0.9, 0.9)])
    assert len(t) == 1 and t.boxnums() == [0]
    assert not m.is_identity


def test_delete_all_and_none():
    t = full_tree(2)
    m = t.delete([])
    assert m.is_identity
    m = t.delete(t.boxnums())
    assert len(t) == 0
    assert m.apply_set({0, 1}) == set()


def test_delete_unknown_id():
    t = full_tree(1)
    with pytest.raises(KeyError):
        t.delete([99])


def test_subdivide_counts_and_union():
    t = unit_tree(2)
    t.insert_cells([(0, 0), (3, 2)])
    rects = [t.box_rect(k) for k in t.boxnums()]
    m = t.subdivide()
    assert len(t) == 8 and t.depth == 3
    assert m.apply_set({0}) == {0, 1, 2, 3}
    kids = [t.box_rect(k) for k in sorted(m.apply_set({0, 1}))]
    for parent in rects:
        assert any(parent.contains(kid) or parent.intersects(kid) for kid in kids)
    # children tile the parents: corners of each parent are covered
    for parent in rects:
        for px in (parent.x.lo + 1e-9, parent.x.hi - 1e-9):
            for py in (parent.y.lo + 1e-9, parent.y.hi - 1e-9):
                assert any(k.contains_point(px, py) for k in kids)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_tracked_numbering_matches_fresh_dfs(data):
    depth = data.draw(st.integers(min_value=2, max_value=5))
    t = unit_tree(depth)
    n = t.side
    # external set of tracked box codes
    tracked = {}
    for step in range(data.draw(st.integers(min_value=1, max_value=12))):
        action = data.draw(st.sampled_from(["insert", "delete", "subdivide"]))
        if action == "insert":
            cells = data.draw(
                st.lists(
                    st.tuples(
                        st.integers(min_value=0, max_value=t.side - 1),
                        st.integers(min_value=0, max_value=t.side - 1),
                    ),
                    max_size=12,
                )
            )
            m = t.insert_cells(cells)
        elif action == "delete" and len(t):
            ids = data.draw(
                st.sets(st.integers(min_value=0, max_value=len(t) - 1), max_size=8)
            )
            m = t.delete(ids)
        elif action == "subdivide" and t.depth < 8:
            m = t.subdivide()
        else:
            continue
        tracked = {m.get(k) for k in tracked if m.get(k) is not None}
        tracked.discard(None)
        fresh = fresh_numbering(t)
        assert [fresh[c] for c in t._codes] == t.boxnums()
        # tracked ids still name live boxes
        for k in tracked:
            assert 0 <= k < len(t)


def test_save_load_roundtrip(tmp_path):
    rng = random.Random(3)
    t = BoxTree(IvRect(Iv(-2.0, 2.0), Iv(-2.0, 2.0)), 5)
    t.insert_cells({(rng.randrange(32), rng.randrange(32)) for _ in range(100)})
    p = tmp_path / "tree.cipt"
    save(t, p)
    u = load(p)
    assert u.depth == t.depth
    assert u._codes == t._codes
    assert u.root.x.lo == t.root.x.lo and u.root.y.hi == t.root.y.hi


def test_empty_tree_roundtrip(tmp_path):
    t = unit_tree(4)
    p = tmp_path / "empty.cipt"
    save(t, p)
    u = load(p)
    assert len(u) == 0 and u.depth == 4


def test_load_rejects_duplicates(tmp_path):
    p = tmp_path / "dup.cipt"
    p.write_text("CIPT 1\ndim 2\ndepth 3\nroot 0.5 0.5 0.5 0.5\nbox 1 1\nbox 1 1\n")
    with pytest.raises(ValueError, match="line 6"):
        load(p)


def test_load_rejects_out_of_order(tmp_path):
    p = tmp_path / "ooo.cipt"
    p.write_text("CIPT 1\ndim 2\ndepth 3\nroot 0.5 0.5 0.5 0.5\nbox 1 1\nbox 0 0\n")
    with pytest.raises(ValueError, match="order"):
        load(p)


def test_renumber_map_identity_helpers():
    m = RenumberMap.identity()
    assert m.get(5) == 5 and m.apply_set({1, 2}) == {1, 2}
