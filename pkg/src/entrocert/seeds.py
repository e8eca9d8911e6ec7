"""Nonrigorous seeding: periodic orbits, manifolds, homoclinic points.

Everything here is floating-point guesswork that only steers where boxes
get inserted; the rigorous machinery downstream never assumes a seed lies
on a true invariant set.  Periodic orbits come from batched Newton
iteration on f^P - id over symmetry-line grids, classified by the Greene
residue R = (2 - tr Df^P)/4.
"""

import math
from typing import NamedTuple

import numpy as np

from .connect import SkeletonPair
from .dynamics import Point2, eps_mid, eval_point, jacobian

__all__ = [
    "PeriodicOrbit",
    "Skeleton",
    "ClassificationError",
    "SeedingError",
    "find_periodic_orbits",
    "unstable_direction",
    "homoclinic_guess",
    "build_skeleton",
    "add_orbits_without_connections",
    "horseshoe_skeleton",
]

NEWTON_TOL = 1e-12
NEWTON_ITERS = 50
LINE_SEEDS = 512
VERIFY_TOL = 1e-10
DEDUP_TOL = 1e-9


class ClassificationError(ValueError):
    pass


class SeedingError(RuntimeError):
    pass


class PeriodicOrbit(NamedTuple):
    points: tuple           # Point2 per orbit point, cyclic under the map
    period: int
    residue: float
    classification: str     # hyperbolic | elliptic | parabolic


class Skeleton(NamedTuple):
    points: tuple            # (label, Point2) pairs
    pairs: tuple             # SkeletonPair entries


def _wrap_half(d):
    return d - np.floor(d + 0.5)


def _torus_dist(p, q):
    dx = abs(p[0] - q[0])
    dy = abs(p[1] - q[1])
    return max(min(dx, 1 - dx), min(dy, 1 - dy))


def _newton_batch_standard(eps, xs, ys, period):
    """Batched Newton for f^period(p) = p on the torus; returns converged."""
    two_pi = 2.0 * math.pi
    x = np.asarray(xs, dtype=float) % 1.0
    y = np.asarray(ys, dtype=float) % 1.0
    alive = np.ones(x.shape, dtype=bool)
    for _ in range(NEWTON_ITERS):
        px, py = x.copy(), y.copy()
        ja = np.ones_like(x)
        jb = np.zeros_like(x)
        jc = np.zeros_like(x)
        jd = np.ones_like(x)
        for _ in range(period):
            c = eps * np.cos(two_pi * px)
            s = eps / two_pi * np.sin(two_pi * px)
            na = (1.0 + c) * ja + jc
            nb = (1.0 + c) * jb + jd
            nc = c * ja + jc
            nd = c * jb + jd
            ja, jb, jc, jd = na, nb, nc, nd
            px, py = (px + py + s) % 1.0, (py + s) % 1.0
        fx = _wrap_half(px - x)
        fy = _wrap_half(py - y)
        if np.max(np.abs(fx) + np.abs(fy), initial=0.0) < NEWTON_TOL:
            break
        a = ja - 1.0
        b = jb
        cc = jc
        d = jd - 1.0
        det = a * d - b * cc
        bad = np.abs(det) < 1e-14
        alive &= ~bad
        det = np.where(bad, 1.0, det)
        dx = (d * fx - b * fy) / det
        dy = (a * fy - cc * fx) / det
        step = np.clip(np.abs(dx) + np.abs(dy), 0.0, None)
        alive &= step < 0.75  # wild steps never recover on the torus
        x = np.where(alive, (x - dx) % 1.0, x)
        y = np.where(alive, (y - dy) % 1.0, y)
    return x[alive], y[alive]


def _orbit_from_point(sys, x, y, period):
    pts = []
    p = Point2(x % 1.0, y % 1.0)
    for _ in range(period):
        pts.append(p)
        p = eval_point(sys, p)
    err = _torus_dist(p, pts[0])
    if err > VERIFY_TOL:
        return None
    # minimal period: no earlier return; the flat channel around a
    # parabolic orbit passes the residual test with near-repeats up to
    # ~1e-5 apart, so the separation cut is deliberately coarse
    for k in range(1, period):
        if _torus_dist(pts[k], pts[0]) < 1e-4:
            return None
    return pts


def _monodromy(sys, pts):
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    for p in pts:
        (ja, jb), (jc, jd) = jacobian(sys, p)
        a, b, c, d = ja * a + jb * c, ja * b + jb * d, jc * a + jd * c, jc * b + jd * d
    return a, b, c, d


def _canonical_key(pts):
    rounded = [(round(p.x, 9) % 1.0, round(p.y, 9) % 1.0) for p in pts]
    shifts = [tuple(rounded[k:] + rounded[:k]) for k in range(len(rounded))]
    return min(shifts)


def find_periodic_orbits(sys, max_period):
    """All periodic orbits up to max_period from symmetry-line seeding.

    Newton non-convergence only shrinks the returned list; downstream
    rigor does not depend on completeness.
    """
    if sys.kind != "standard":
        raise ClassificationError("periodic-orbit seeding implemented for the standard map")
    eps = eps_mid(sys)
    s = (np.arange(LINE_SEEDS) + 0.5) / LINE_SEEDS
    zeros = np.zeros_like(s)
    lines = [
        (zeros, s),                  # x = 0
        (zeros + 0.5, s),            # x = 1/2
        (s, zeros),                  # y = 0
        (s, s),                      # y = x
        (0.5 * s, s),                # x = y/2
        ((0.5 * (s + 1.0)) % 1.0, s),  # x = (y+1)/2
    ]
    found = {}
    for period in range(1, max_period + 1):
        xs = np.concatenate([l[0] for l in lines])
        ys = np.concatenate([l[1] for l in lines])
        cx, cy = _newton_batch_standard(eps, xs, ys, period)
        for x, y in zip(cx, cy):
            pts = _orbit_from_point(sys, float(x), float(y), period)
            if pts is None:
                continue
            key = _canonical_key(pts)
            if key in found:
                continue
            a, b, c, d = _monodromy(sys, pts)
            tr = a + d
            residue = (2.0 - tr) / 4.0
            if residue < 0.0 or residue > 1.0:
                cls = "hyperbolic"
            elif abs(residue) <= 1e-9 or abs(residue - 1.0) <= 1e-9:
                cls = "parabolic"
            else:
                cls = "elliptic"
            found[key] = PeriodicOrbit(tuple(pts), period, residue, cls)
    return sorted(found.values(), key=lambda o: (o.period, _canonical_key(o.points)))


def _eig2(a, b, c, d, want_expanding=True):
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc <= 0.0:
        raise ClassificationError("no real eigenvalues: orbit is not hyperbolic")
    root = math.sqrt(disc)
    lam1 = 0.5 * (tr + root)
    lam2 = 0.5 * (tr - root)
    lam = lam1 if abs(lam1) > abs(lam2) else lam2
    if not want_expanding:
        lam = lam2 if abs(lam1) > abs(lam2) else lam1
    # eigenvector from the better-conditioned row
    if abs(b) > abs(c):
        v = (b, lam - a)
    elif abs(c) > 0:
        v = (lam - d, c)
    else:
        v = (1.0, 0.0) if abs(a - lam) < abs(d - lam) else (0.0, 1.0)
    norm = math.hypot(*v)
    return lam, (v[0] / norm, v[1] / norm)


def unstable_direction(sys, orbit):
    """Unit expanding eigenvector at each orbit point, propagated forward."""
    if orbit.classification != "hyperbolic":
        raise ClassificationError(
            f"unstable direction undefined for a {orbit.classification} orbit"
        )
    a, b, c, d = _monodromy(sys, orbit.points)
    lam, v = _eig2(a, b, c, d)
    out = [v]
    for p in orbit.points[:-1]:
        (ja, jb), (jc, jd) = jacobian(sys, p)
        w = (ja * out[-1][0] + jb * out[-1][1], jc * out[-1][0] + jd * out[-1][1])
        norm = math.hypot(*w)
        out.append((w[0] / norm, w[1] / norm))
    return out, lam


def _inverse_eval_standard(sys, p):
    X, Y = p
    x = (X - Y) % 1.0
    s = eps_mid(sys) / (2.0 * math.pi) * math.sin(2.0 * math.pi * x)
    return Point2(x, (Y - s) % 1.0)


class _Manifold:
    """Polyline approximation of a 1-D invariant manifold of (0, 0)."""

    def __init__(self, step, direction, delta=1e-7, coarse=400):
        self.step = step                      # one application of the map
        lam_gap = 4.0                          # seed covers one expansion gap
        ts = np.geomspace(delta, delta * lam_gap, coarse)
        self.params = list(ts)
        self.dir = direction
        self.iters = 0
        self.points = [self._from_seed(t, 0) for t in self.params]

    def _from_seed(self, t, iters):
        p = Point2((t * self.dir[0]) % 1.0, (t * self.dir[1]) % 1.0)
        for _ in range(iters):
            p = self.step(p)
        return p

    def advance(self, max_gap=2e-3, max_points=200_000):
        self.iters += 1
        self.points = [self.step(p) for p in self.points]
        # split parameter gaps whose images drifted apart
        k = 0
        while k < len(self.points) - 1 and len(self.points) < max_points:
            a, c = self.points[k], self.points[k + 1]
            if _torus_dist(a, c) > max_gap:
                tm = math.sqrt(self.params[k] * self.params[k + 1])
                if tm <= self.params[k] or tm >= self.params[k + 1]:
                    k += 1
                    continue
                self.params.insert(k + 1, tm)
                self.points.insert(k + 1, self._from_seed(tm, self.iters))
            else:
                k += 1

    def crossing_of_half_line(self):
        """First parameter interval whose segment crosses x = 1/2."""
        for k in range(len(self.points) - 1):
            a, c = self.points[k], self.points[k + 1]
            da = _signed_half(a.x)
            dc = _signed_half(c.x)
            if da == 0.0:
                return self.params[k], self.params[k]
            if da * dc < 0.0 and abs(a.x - c.x) < 0.25:
                return self.params[k], self.params[k + 1]
        return None

    def segments(self):
        return list(zip(self.points, self.points[1:]))


def _signed_half(x):
    return ((x - 0.5 + 0.5) % 1.0) - 0.5


def _seg_intersect(p1, p2, q1, q2):
    d1 = (p2[0] - p1[0], p2[1] - p1[1])
    d2 = (q2[0] - q1[0], q2[1] - q1[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(den) < 1e-18:
        return None
    rx = q1[0] - p1[0]
    ry = q1[1] - p1[1]
    t = (rx * d2[1] - ry * d2[0]) / den
    u = (rx * d1[1] - ry * d1[0]) / den
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return (p1[0] + t * d1[0], p1[1] + t * d1[1])
    return None


def homoclinic_guess(sys, max_iters=200):
    """Estimate (1/2, y_eps) and the next primary homoclinic point (u, v).

    Grows the unstable manifold of (0, 0) until it crosses x = 1/2, then
    bisects along the seed parameter.  The stable manifold is grown as the
    unstable manifold of the inverse map; (u, v) is taken from the polyline
    intersection inside the strip between (1/2, y) and its image.
    """
    if sys.kind != "standard":
        raise SeedingError("homoclinic seeding implemented for the standard map")
    (ja, jb), (jc, jd) = jacobian(sys, (0.0, 0.0))
    lam, u_dir = _eig2(ja, jb, jc, jd)
    if u_dir[0] < 0:
        u_dir = (-u_dir[0], -u_dir[1])
    unstable = _Manifold(lambda p: eval_point(sys, p), u_dir)
    hit = None
    for _ in range(max_iters):
        unstable.advance()
        hit = unstable.crossing_of_half_line()
        if hit is not None:
            break
    if hit is None:
        raise SeedingError("unstable manifold never crossed x = 1/2")

    iters = unstable.iters
    seed = unstable._from_seed

    def gx(t):
        return _signed_half(seed(t, iters).x)

    ta, tb = hit
    if gx(ta) * gx(tb) > 0:
        raise SeedingError("crossing bracket lost during refinement")
    for _ in range(80):
        tm = math.sqrt(ta * tb)
        if gx(ta) * gx(tm) <= 0:
            tb = tm
        else:
            ta = tm
    p_half = seed(0.5 * (ta + tb), iters)
    y_eps = p_half.y

    # stable side: unstable manifold of the inverse map
    det = ja * jd - jb * jc
    ia, ib, ic, id_ = jd / det, -jb / det, -jc / det, ja / det
    lam_s, s_dir = _eig2(ia, ib, ic, id_)
    if s_dir[0] > 0:
        s_dir = (-s_dir[0], -s_dir[1])  # approach x=1/2 from the right
    stable = _Manifold(lambda p: _inverse_eval_standard(sys, p), s_dir)
    # exclude the known crossings at the strip edges (x = 1/2 and its image)
    window = (0.5 + 0.02 * y_eps, 0.5 + 0.98 * y_eps)
    best = None
    for _ in range(max_iters):
        stable.advance()
        xs = [p.x for p in stable.points]
        if any(window[0] < x < window[1] for x in xs):
            cands = _polyline_intersections(unstable, stable, window)
            if cands:
                mid = 0.5 * (window[0] + window[1])
                best = min(cands, key=lambda q: abs(q[0] - mid))
                break
    if best is None:
        raise SeedingError("no homoclinic intersection found inside the strip")
    return Point2(0.5, y_eps), Point2(best[0] % 1.0, best[1] % 1.0)


def _polyline_intersections(man_a, man_b, window):
    lo, hi = window

    def keep(seg):
        (a, b) = seg
        if abs(a.x - b.x) > 0.25 or abs(a.y - b.y) > 0.25:
            return False  # wrap jump
        return max(a.x, b.x) >= lo and min(a.x, b.x) <= hi

    segs_a = [s for s in man_a.segments() if keep(s)]
    segs_b = [s for s in man_b.segments() if keep(s)]
    out = []
    for p1, p2 in segs_a:
        for q1, q2 in segs_b:
            got = _seg_intersect(p1, p2, q1, q2)
            if got is not None and lo < got[0] < hi:
                out.append(got)
    return out


def _dedup_points(items):
    out = []
    for label, p in items:
        if all(_torus_dist(p, q) > DEDUP_TOL for _, q in out):
            out.append((label, p))
    return out


def build_skeleton(sys, mode, max_period=1):
    """Assemble the seed points H and connection pairs X.

    homoclinic: the five homoclinic-tangle points of the fixed point.
    periodic: those plus all hyperbolic periodic orbits up to max_period.
    X is every ordered pair of distinct points.
    """
    if mode not in ("homoclinic", "periodic"):
        raise ValueError(f"unknown skeleton mode {mode!r}")
    p_half, p_uv = homoclinic_guess(sys)
    y = p_half.y
    pts = [
        ("h_half", p_half),
        ("h_half_m", Point2(0.5, (1.0 - y) % 1.0)),
        ("h_uv", p_uv),
        ("h_uv_m", Point2((1.0 - p_uv.x) % 1.0, (1.0 - p_uv.y) % 1.0)),
        ("fp", Point2(0.0, 0.0)),
    ]
    if mode == "periodic":
        for orbit in find_periodic_orbits(sys, max_period):
            if orbit.classification != "hyperbolic":
                continue
            for m, q in enumerate(orbit.points):
                pts.append((f"p{orbit.period}_{m}_{q.x:.6f}", q))
    pts = _dedup_points(pts)
    pairs = tuple(
        SkeletonPair(p, q, f"{la}->{lb}")
        for la, p in pts
        for lb, q in pts
        if la != lb
    )
    return Skeleton(tuple(pts), pairs)


def add_orbits_without_connections(skeleton, orbits):
    """Append orbit points to H, leaving the pair list X untouched."""
    pts = list(skeleton.points)
    for k, orbit in enumerate(orbits):
        for m, q in enumerate(orbit.points):
            pts.append((f"x{orbit.period}_{k}_{m}", q))
    return Skeleton(tuple(_dedup_points(pts)), skeleton.pairs)


def horseshoe_skeleton():
    """The two horseshoe saddles with both connecting pairs."""
    a = Point2(0.25, 0.25)
    b = Point2(0.625, 0.625)
    pts = (("fp_left", a), ("fp_right", b))
    pairs = (
        SkeletonPair(a, b, "fp_left->fp_right"),
        SkeletonPair(b, a, "fp_right->fp_left"),
    )
    return Skeleton(pts, pairs)
