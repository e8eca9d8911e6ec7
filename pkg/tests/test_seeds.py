import math

import pytest

from entrocert.dynamics import eval_point, henon_map, jacobian, standard_map
from entrocert.seeds import (
    ClassificationError,
    PeriodicOrbit,
    add_orbits_without_connections,
    build_skeleton,
    find_periodic_orbits,
    homoclinic_guess,
    horseshoe_skeleton,
    unstable_direction,
    _torus_dist,
)


def orbit_map(orbits):
    out = {}
    for o in orbits:
        out.setdefault((o.period, o.classification), []).append(o)
    return out


def test_period_one_fixed_points():
    sys = standard_map(1.2)
    orbits = find_periodic_orbits(sys, 1)
    pts = {(round(o.points[0].x, 6), round(o.points[0].y, 6)): o for o in orbits}
    assert (0.0, 0.0) in pts and pts[(0.0, 0.0)].classification == "hyperbolic"
    assert (0.5, 0.0) in pts and pts[(0.5, 0.0)].classification == "elliptic"


def test_eps2_period_3_and_4_counts():
    sys = standard_map(2.0)
    omap = orbit_map(find_periodic_orbits(sys, 4))
    assert len(omap[(3, "hyperbolic")]) == 4
    assert len(omap[(4, "hyperbolic")]) == 4


def test_orbits_verify_and_residue_consistency():
    sys = standard_map(1.7)
    for o in find_periodic_orbits(sys, 3):
        p = o.points[0]
        for _ in range(o.period):
            p = eval_point(sys, p)
        assert _torus_dist(p, o.points[0]) <= 1e-10
        # residue vs trace: hyperbolic iff |tr| > 2
        tr = 2.0 - 4.0 * o.residue
        assert (o.classification == "hyperbolic") == (abs(tr) > 2.0 + 1e-9)


def test_unstable_direction_eps2_fixed_point():
    sys = standard_map(2.0)
    fp = PeriodicOrbit(
        (eval_point(sys, (0.0, 0.0)),), 1, (2.0 - 4.0) / 4.0, "hyperbolic"
    )
    dirs, lam = unstable_direction(sys, fp)
    assert abs(lam - (2.0 + math.sqrt(3.0))) < 1e-12
    vx, vy = dirs[0]
    # eigenvector of [[3,1],[2,1]] for 2+sqrt(3): direction (1, sqrt(3)-1)
    want = (1.0, math.sqrt(3.0) - 1.0)
    norm = math.hypot(*want)
    want = (want[0] / norm, want[1] / norm)
    assert min(
        abs(vx - want[0]) + abs(vy - want[1]),
        abs(vx + want[0]) + abs(vy + want[1]),
    ) < 1e-12


def test_unstable_direction_eigenvalue_product_one():
    sys = standard_map(1.9)
    orbits = find_periodic_orbits(sys, 2)
    hyp = [o for o in orbits if o.classification == "hyperbolic"]
    for o in hyp:
        _, lam = unstable_direction(sys, o)
        tr = 2.0 - 4.0 * o.residue
        lam_other = tr - lam  # det = 1: eigenvalues multiply to 1
        assert abs(lam * lam_other - 1.0) < 1e-9


def test_unstable_direction_rejects_elliptic():
    sys = standard_map(0.5)
    orbits = find_periodic_orbits(sys, 1)
    ell = [o for o in orbits if o.classification == "elliptic"][0]
    with pytest.raises(ClassificationError):
        unstable_direction(sys, ell)


def test_homoclinic_guess_eps2():
    sys = standard_map(2.0)
    p_half, p_uv = homoclinic_guess(sys)
    assert p_half.x == 0.5
    q = eval_point(sys, p_half)
    assert abs(q.x - (0.5 + p_half.y) % 1.0) < 1e-9
    assert abs(q.y - p_half.y) < 1e-9
    # forward orbit falls into a small neighborhood of the fixed point
    p = p_half
    best = 1.0
    for _ in range(60):
        p = eval_point(sys, p)
        best = min(best, min(p.x, 1 - p.x) + min(p.y, 1 - p.y))
    assert best < 1e-3
    # (u, v) lies strictly between the crossing and its image
    assert 0.5 < p_uv.x < 0.5 + p_half.y


def test_homoclinic_symmetric_counterpart_on_stable_manifold():
    # (1/2, 1-y) is the mirror crossing: its forward orbit also approaches
    # the fixed point (it lies on the stable manifold by symmetry)
    sys = standard_map(2.0)
    p_half, _ = homoclinic_guess(sys)
    mirror = (0.5, 1.0 - p_half.y)
    p = mirror
    best = 1.0
    for _ in range(60):
        p = eval_point(sys, p)
        best = min(best, min(p.x, 1 - p.x) + min(p.y, 1 - p.y))
    assert best < 1e-3


def test_build_skeleton_homoclinic_counts():
    sk = build_skeleton(standard_map(2.0), "homoclinic")
    assert len(sk.points) == 5
    assert len(sk.pairs) == 20
    labels = {la for la, _ in sk.points}
    assert "fp" in labels
    for _, p in sk.points:
        assert 0.0 <= p.x < 1.0 and 0.0 <= p.y < 1.0


def test_build_skeleton_periodic_adds_hyperbolic_orbits():
    sk1 = build_skeleton(standard_map(2.0), "homoclinic")
    sk2 = build_skeleton(standard_map(2.0), "periodic", max_period=2)
    # period-1 hyperbolic (0,0) dedups against fp; period-2 hyperbolic adds 2
    assert len(sk2.points) == len(sk1.points) + 2
    assert len(sk2.pairs) == len(sk2.points) * (len(sk2.points) - 1)


def test_add_orbits_without_connections():
    sys = standard_map(2.0)
    sk = build_skeleton(sys, "periodic", max_period=2)
    extra = [
        o
        for o in find_periodic_orbits(sys, 4)
        if o.period in (3, 4) and o.classification == "hyperbolic"
    ]
    grown = add_orbits_without_connections(sk, extra)
    assert grown.pairs == sk.pairs
    assert len(grown.points) == len(sk.points) + 4 * 3 + 4 * 4
    assert add_orbits_without_connections(sk, []) == sk


def test_horseshoe_skeleton():
    sk = horseshoe_skeleton()
    assert len(sk.points) == 2 and len(sk.pairs) == 2
