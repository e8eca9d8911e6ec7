"""The planar systems under study and their rigorous box enclosures.

Three maps are provided: the standard map on the torus (the main object),
the Henon map on a plane rectangle, and a piecewise-affine horseshoe used
as a known-answer test system (entropy exactly log 2).  Point evaluation
is plain floating arithmetic; `eval_enclosure` returns interval rectangles
that provably contain the image of a rectangle for every parameter value
in the (interval-valued) parameter vector.
"""

import math
from typing import NamedTuple

from .interval import (
    TWO_PI,
    Iv,
    IvRect,
    iv_add,
    iv_div,
    iv_mul,
    iv_sin2pi,
    iv_sub,
    iv_wrap1,
)

__all__ = [
    "SystemSpec",
    "Point2",
    "standard_map",
    "henon_map",
    "horseshoe_map",
    "eval_point",
    "eval_enclosure",
    "enclosure_map",
    "jacobian",
    "action_h",
    "action_bound",
    "horseshoe_enclosure",
    "UnsupportedSystemError",
]


class UnsupportedSystemError(ValueError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class SystemSpec(NamedTuple):
    kind: str            # standard | henon | horseshoe
    params: tuple        # Iv entries; point parameters are degenerate
    domain: str          # torus | plane
    root: IvRect


def standard_map(eps_lo, eps_hi=None):
    if eps_hi is None:
        eps_hi = eps_lo
    eps = Iv(float(eps_lo), float(eps_hi))
    if eps.lo <= 0.0:
        raise ValueError("standard map needs eps > 0")
    return SystemSpec(
        "standard", (eps,), "torus", IvRect(Iv(0.0, 1.0), Iv(0.0, 1.0))
    )


def henon_map(a=1.4, b=0.3):
    return SystemSpec(
        "henon",
        (Iv(float(a)), Iv(float(b))),
        "plane",
        IvRect(Iv(-2.0, 2.0), Iv(-2.0, 2.0)),
    )


def horseshoe_map():
    return SystemSpec(
        "horseshoe", (), "plane", IvRect(Iv(0.0, 1.0), Iv(0.0, 1.0))
    )


def eps_mid(sys):
    e = sys.params[0]
    return 0.5 * (e.lo + e.hi)


def wrap_point(p):
    return Point2(p[0] % 1.0, p[1] % 1.0)


# -- horseshoe geometry -------------------------------------------------------
# Two expanding branches on the middle thirds of the core square
# [1/4, 3/4]^2; the fold between them pokes out of the unit square on the
# right so the maximal invariant set is the standard two-symbol Cantor set,
# strictly inside the root box.  The crossover between the contraction
# bands happens only while the fold is outside the square (u > 1), so the
# in-square part of any image is contained in the two branch bands.
# Saddle fixed points: (1/4, 1/4) and (5/8, 5/8).

_H_A0 = 0.25
_H_A1 = 5.0 / 12.0
_H_G1 = _H_A1 + 0.05
_H_MID = 0.5
_H_G2 = 7.0 / 12.0 - 0.05
_H_A2 = 7.0 / 12.0
_H_A3 = 0.75
_H_PEAK_SLOPE = 6.0


def _h_u(x):
    if x <= _H_A1:
        return _H_A0 + 3.0 * (x - _H_A0)
    if x <= _H_MID:
        return 0.75 + _H_PEAK_SLOPE * (x - _H_A1)
    if x <= _H_A2:
        return 0.75 + _H_PEAK_SLOPE * (_H_A2 - x)
    return _H_A0 + 3.0 * (_H_A3 - x)


def _h_v(x, y):
    vl = 0.25 + (y - 0.25) / 3.0
    vr = 0.75 - (y - 0.25) / 3.0
    if x <= _H_G1:
        return vl
    if x >= _H_G2:
        return vr
    s = (x - _H_G1) / (_H_G2 - _H_G1)
    return (1.0 - s) * vl + s * vr


def eval_point(sys, p):
    """Nonrigorous floating evaluation (interval params: midpoint)."""
    x, y = p
    if sys.kind == "standard":
        s = eps_mid(sys) / (2.0 * math.pi) * math.sin(2.0 * math.pi * x)
        return Point2((x + y + s) % 1.0, (y + s) % 1.0)
    if sys.kind == "henon":
        a = sys.params[0].mid
        b = sys.params[1].mid
        return Point2(1.0 - a * x * x + y, b * x)
    if sys.kind == "horseshoe":
        return Point2(_h_u(x), _h_v(x, y))
    raise UnsupportedSystemError(sys.kind)


def jacobian(sys, p):
    x, y = p
    if sys.kind == "standard":
        c = eps_mid(sys) * math.cos(2.0 * math.pi * x)
        return [[1.0 + c, 1.0], [c, 1.0]]
    if sys.kind == "henon":
        a = sys.params[0].mid
        b = sys.params[1].mid
        return [[-2.0 * a * x, 1.0], [b, 0.0]]
    if sys.kind == "horseshoe":
        if x < _H_A1:
            du = 3.0
        elif x < _H_MID:
            du = _H_PEAK_SLOPE
        elif x < _H_A2:
            du = -_H_PEAK_SLOPE
        else:
            du = -3.0
        if x <= _H_G1:
            return [[du, 0.0], [0.0, 1.0 / 3.0]]
        if x >= _H_G2:
            return [[du, 0.0], [0.0, -1.0 / 3.0]]
        s = (x - _H_G1) / (_H_G2 - _H_G1)
        vl = 0.25 + (y - 0.25) / 3.0
        vr = 0.75 - (y - 0.25) / 3.0
        dvdx = (vr - vl) / (_H_G2 - _H_G1)
        dvdy = (1.0 - s) / 3.0 - s / 3.0
        return [[du, 0.0], [dvdx, dvdy]]
    raise UnsupportedSystemError(sys.kind)


def _iv_affine(x_iv, slope, x0, c0):
    """Enclosure of c0 + slope*(x - x0) over an interval."""
    return iv_add(Iv(c0), iv_mul(Iv(slope), iv_sub(x_iv, Iv(x0))))


def horseshoe_enclosure(r):
    """Branchwise interval image of a rectangle under the horseshoe.

    One piece per affine x-segment the rectangle meets; pieces that
    overlap with positive area are merged into their hull.  A box inside
    one branch strip yields a single rectangle; a box meeting both strips
    yields exactly two rectangles inside the unit square plus the fold
    bridge, which lies outside it.
    """
    X, Y = r.x, r.y
    vl = _iv_affine(Y, 1.0 / 3.0, 0.25, 0.25)
    vr = _iv_affine(iv_mul(Iv(-1.0), Y), 1.0 / 3.0, -0.25, 0.75)

    def blend(xs):
        s = iv_mul(iv_sub(xs, Iv(_H_G1)), iv_div(Iv(1.0), Iv(_H_G2 - _H_G1)))
        s = Iv(max(s.lo, 0.0), min(s.hi, 1.0))
        return iv_add(iv_mul(iv_sub(Iv(1.0), s), vl), iv_mul(s, vr))

    pieces = []
    cuts = [
        (-math.inf, _H_A1),
        (_H_A1, _H_G1),
        (_H_G1, _H_MID),
        (_H_MID, _H_G2),
        (_H_G2, _H_A2),
        (_H_A2, math.inf),
    ]
    for k, (lo, hi) in enumerate(cuts):
        xlo = max(X.lo, lo)
        xhi = min(X.hi, hi)
        if xlo > xhi:
            continue
        xs = Iv(xlo, xhi)
        if k == 0:
            u = _iv_affine(xs, 3.0, _H_A0, _H_A0)
            v = vl
        elif k in (1, 2):
            u = _iv_affine(xs, _H_PEAK_SLOPE, _H_A1, 0.75)
            v = vl if k == 1 else blend(xs)
        elif k in (3, 4):
            u = _iv_affine(iv_mul(Iv(-1.0), xs), _H_PEAK_SLOPE, -_H_A2, 0.75)
            v = blend(xs) if k == 3 else vr
        else:
            u = _iv_affine(iv_mul(Iv(-1.0), xs), 3.0, -_H_A3, _H_A0)
            v = vr
        pieces.append(IvRect(u, v))
    return _coalesce(pieces)


def _mergeable(a, b):
    # outward rounding leaves ~ulp slivers at seams; require real overlap
    tol = 1e-9
    wx = min(a.x.hi, b.x.hi) - max(a.x.lo, b.x.lo)
    wy = min(a.y.hi, b.y.hi) - max(a.y.lo, b.y.lo)
    if wx > tol and wy > tol:
        return True
    # exact unions: same span on one axis, touching on the other
    if a.y == b.y and wx >= -tol:
        return True
    if a.x == b.x and wy >= -tol:
        return True
    return False


def _coalesce(rects):
    """Merge overlapping or exactly-abutting rectangles into hulls."""
    out = list(rects)
    changed = True
    while changed:
        changed = False
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                if _mergeable(out[i], out[j]):
                    out[i] = out[i].hull(out[j])
                    del out[j]
                    changed = True
                    break
            if changed:
                break
    return out


def eval_enclosure(sys, r):
    """Rectangles whose union contains f_p(q) for all q in r, p in params."""
    if sys.kind == "standard":
        eps = sys.params[0]
        s = iv_mul(iv_div(eps, TWO_PI), iv_sin2pi(r.x))
        y2 = iv_add(r.y, s)
        x2 = iv_add(iv_add(r.x, r.y), s)
        return [
            IvRect(px, py) for px in iv_wrap1(x2) for py in iv_wrap1(y2)
        ]
    if sys.kind == "henon":
        a, b = sys.params
        x2 = iv_add(iv_sub(Iv(1.0), iv_mul(a, iv_mul(r.x, r.x))), r.y)
        y2 = iv_mul(b, r.x)
        return [IvRect(x2, y2)]
    if sys.kind == "horseshoe":
        return horseshoe_enclosure(r)
    raise UnsupportedSystemError(sys.kind)


def enclosure_map(sys):
    """The rectangle-image callable used by the combinatorial layer."""
    return lambda rect: eval_enclosure(sys, rect)


def action_h(sys, x, x_next):
    """Twist-map generating function h(x, x') with the minimal lift.

    h(x, x') = (x'-x)^2/2 - (eps/4pi^2) cos(2 pi x) with the difference
    reduced to [-1/2, 1/2]; validated against the map via y' = dh/dx',
    y = -dh/dx.  Interval parameters use the midpoint: the action only
    steers path search.
    """
    if sys.kind != "standard":
        raise UnsupportedSystemError(
            f"action defined for the standard map only, not {sys.kind}"
        )
    d = x_next - x
    d -= math.floor(d + 0.5)
    e = eps_mid(sys)
    return 0.5 * d * d - e / (4.0 * math.pi * math.pi) * math.cos(2.0 * math.pi * x)


def action_bound(sys):
    """K* = max |h| over the torus with the minimal-lift convention."""
    if sys.kind != "standard":
        raise UnsupportedSystemError("action bound requires the standard map")
    return 0.125 + eps_mid(sys) / (4.0 * math.pi * math.pi)
