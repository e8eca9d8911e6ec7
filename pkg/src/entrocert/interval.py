"""Self-contained interval arithmetic with outward rounding.

Every enclosure in the package bottoms out here.  Endpoints are plain
doubles; directed rounding is realized by error-free transformations
(two-sum / Dekker two-product) so that exact operations stay exact and
inexact ones get bumped one representable step outward.  No FPU mode
switching, so everything is thread-safe.
"""

import math

__all__ = [
    "Iv",
    "IvRect",
    "iv",
    "iv_arith",
    "iv_add",
    "iv_sub",
    "iv_mul",
    "iv_div",
    "iv_sin2pi",
    "iv_wrap1",
    "TWO_PI",
    "log_down",
    "log_int_down",
]

_INF = math.inf

# Magnitudes outside this window skip the exactness analysis and get an
# unconditional 1-ulp pad (Dekker splitting can misbehave near overflow
# and for subnormal products).
_SAFE_LO = 2.0 ** -500
_SAFE_HI = 2.0 ** 500


def _down(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


def _two_sum(a, b):
    # Knuth two-sum: a + b = s + e exactly.
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


_SPLIT = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    # Dekker: a * b = p + e exactly (when no over/underflow occurs).
    p = a * b
    ah = a * _SPLIT
    ah = ah - (ah - a)
    al = a - ah
    bh = b * _SPLIT
    bh = bh - (bh - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _prod_unsafe(a, b):
    if a == 0.0 or b == 0.0:
        return False
    m = abs(a * b)
    return m < _SAFE_LO or m > _SAFE_HI or abs(a) > _SAFE_HI or abs(b) > _SAFE_HI


def _sum_lo(a, b):
    s, e = _two_sum(a, b)
    return _down(s) if e < 0.0 else s


def _sum_hi(a, b):
    s, e = _two_sum(a, b)
    return _up(s) if e > 0.0 else s


def _prod_lo(a, b):
    if _prod_unsafe(a, b):
        return _down(a * b)
    p, e = _two_prod(a, b)
    return _down(p) if e < 0.0 else p


def _prod_hi(a, b):
    if _prod_unsafe(a, b):
        return _up(a * b)
    p, e = _two_prod(a, b)
    return _up(p) if e > 0.0 else p


def _quot_err_sign(a, b, q):
    # sign of the residual a - q*b, computed exactly
    if _prod_unsafe(q, b):
        return None
    p, e = _two_prod(q, b)
    r1, r2 = _two_sum(a, -p)
    # r1 + r2 - e is exact enough to sign-test: |r2|,|e| << |r1| unless r1==0
    if r1 != 0.0:
        s = r1 + (r2 - e)
        return (s > 0.0) - (s < 0.0)
    s = r2 - e
    return (s > 0.0) - (s < 0.0)


def _quot_lo(a, b):
    q = a / b
    sgn = _quot_err_sign(a, b, q)
    if sgn is None:
        return _down(q)
    # residual r = a - q*b; true quotient = q + r/b
    if b > 0.0:
        return _down(q) if sgn < 0 else q
    return _down(q) if sgn > 0 else q


def _quot_hi(a, b):
    q = a / b
    sgn = _quot_err_sign(a, b, q)
    if sgn is None:
        return _up(q)
    if b > 0.0:
        return _up(q) if sgn > 0 else q
    return _up(q) if sgn < 0 else q


class Iv:
    """Closed interval [lo, hi] with finite double endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x):
        return self.lo <= x <= self.hi

    def contains_iv(self, other):
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other):
        return Iv(min(self.lo, other.lo), max(self.hi, other.hi))

    def __eq__(self, other):
        return isinstance(other, Iv) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Iv({self.lo!r}, {self.hi!r})"


def iv(lo, hi=None):
    return Iv(lo, hi)


class IvRect:
    """Axis-aligned rectangle given by two intervals."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y

    def contains_point(self, px, py):
        return self.x.contains(px) and self.y.contains(py)

    def contains(self, other):
        return self.x.contains_iv(other.x) and self.y.contains_iv(other.y)

    def intersects(self, other):
        return self.x.intersects(other.x) and self.y.intersects(other.y)

    def hull(self, other):
        return IvRect(self.x.hull(other.x), self.y.hull(other.y))

    def __eq__(self, other):
        return isinstance(other, IvRect) and self.x == other.x and self.y == other.y

    def __repr__(self):
        return f"IvRect({self.x!r}, {self.y!r})"


def iv_add(a, b):
    return Iv(_sum_lo(a.lo, b.lo), _sum_hi(a.hi, b.hi))


def iv_sub(a, b):
    return Iv(_sum_lo(a.lo, -b.hi), _sum_hi(a.hi, -b.lo))


def iv_neg(a):
    return Iv(-a.hi, -a.lo)


def iv_mul(a, b):
    cands = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    lo = min(_prod_lo(x, y) for x, y in cands)
    hi = max(_prod_hi(x, y) for x, y in cands)
    return Iv(lo, hi)


def iv_div(a, b):
    if b.lo <= 0.0 <= b.hi:
        raise ZeroDivisionError(
            f"interval division by [{b.lo}, {b.hi}] which contains zero"
        )
    cands = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    lo = min(_quot_lo(x, y) for x, y in cands)
    hi = max(_quot_hi(x, y) for x, y in cands)
    return Iv(lo, hi)


_OPS = {"add": iv_add, "sub": iv_sub, "mul": iv_mul, "div": iv_div}


def iv_arith(a, b, op):
    """Dispatching form of +,-,*,/; `op` is one of add/sub/mul/div."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown interval operation {op!r}") from None
    return fn(a, b)


def iv_scale(a, c):
    return iv_mul(a, Iv(c, c))


# 2*pi brackets: float(2*pi) is below the true value.
_TWO_PI_F = 6.283185307179586
TWO_PI = Iv(_TWO_PI_F, math.nextafter(_TWO_PI_F, _INF))

_LN2_F = 0.6931471805599453  # float(ln 2) is just below the true value


def _sin_point_down(x):
    # x is |x| <= pi/4 + slack; libm sin is good to ~1 ulp there
    return _down(_down(math.sin(x)))


def _sin_point_up(x):
    return _up(_up(math.sin(x)))


def _cos_point_down(x):
    return _down(_down(math.cos(x)))


def _cos_point_up(x):
    return _up(_up(math.cos(x)))


def _sin2pi_point(x):
    """Enclosure of sin(2*pi*x) for a single double x."""
    # nearest quarter period; r = x - k/4 is exact (both dyadic, |r| <= 1/8)
    k = math.floor(4.0 * x + 0.5)
    r = x - 0.25 * k
    m = k & 3
    if r == 0.0:
        v = (0.0, 1.0, 0.0, -1.0)[m]
        return v, v
    tlo = _prod_lo(TWO_PI.lo, r) if r > 0 else _prod_lo(TWO_PI.hi, r)
    thi = _prod_hi(TWO_PI.hi, r) if r > 0 else _prod_hi(TWO_PI.lo, r)
    if m == 0:
        return _sin_point_down(tlo), _sin_point_up(thi)
    if m == 2:
        return -_sin_point_up(thi), -_sin_point_down(tlo)
    # cos branches: decreasing in |t|; extremes at the endpoint farther from 0
    a = max(abs(tlo), abs(thi))
    b = 0.0 if tlo <= 0.0 <= thi else min(abs(tlo), abs(thi))
    if m == 1:
        return _cos_point_down(a), _cos_point_up(b)
    return -_cos_point_up(b), -_cos_point_down(a)


def iv_sin2pi(a):
    """Enclosure of {sin(2*pi*x) : x in a}, clamped to [-1, 1].

    Monotone-piece analysis: sin(2*pi*x) has its critical points at the
    quarter integers, so the range over [lo, hi] is spanned by the endpoint
    values plus -1/+1 whenever a minimizing/maximizing quarter lies inside.
    """
    if a.hi - a.lo >= 1.0 or abs(a.lo) > 2.0**40 or abs(a.hi) > 2.0**40:
        return Iv(-1.0, 1.0)
    lo1, hi1 = _sin2pi_point(a.lo)
    lo2, hi2 = _sin2pi_point(a.hi)
    lo = min(lo1, lo2)
    hi = max(hi1, hi2)
    kmin = math.ceil(4.0 * a.lo)
    kmax = math.floor(4.0 * a.hi)
    for k in range(kmin, kmax + 1):
        m = k & 3
        if m == 1:
            hi = 1.0
        elif m == 3:
            lo = -1.0
    return Iv(max(lo, -1.0), min(hi, 1.0))


def iv_wrap1(a):
    """Reduce an interval mod 1 into [0, 1]; returns 1 or 2 pieces.

    The union of the returned intervals contains {x mod 1 : x in a}.  A
    width >= 1 collapses to the full circle [0, 1].
    """
    if _sum_hi(a.hi, -a.lo) >= 1.0:
        return [Iv(0.0, 1.0)]
    f = math.floor(a.lo)
    lo = max(_sum_lo(a.lo, -f), 0.0)
    hi = _sum_hi(a.hi, -f)
    if hi <= 1.0:
        return [Iv(lo, hi)]
    tail = min(max(_sum_hi(a.hi, -(f + 1.0)), 0.0), 1.0)
    return [Iv(lo, 1.0), Iv(0.0, tail)]


def log_down(x):
    """Lower bound for log(x), x a positive float."""
    if x <= 0.0:
        raise ValueError("log_down needs a positive argument")
    return _down(_down(math.log(x)))


def log_int_down(n):
    """Lower bound for log(n) for a positive int, safe for huge n."""
    if n <= 0:
        raise ValueError("log_int_down needs a positive integer")
    if n.bit_length() <= 900:
        return log_down(float(n))
    # n = m * 2**e with m in [2**52, 2**53)
    e = n.bit_length() - 53
    m = n >> e
    # log n >= log m + e*log 2 (dropped bits only increase n)
    lo = _sum_lo(log_down(float(m)), _prod_lo(float(e), _LN2_F))
    return _down(lo)


def log_frac_down(p, q):
    """Lower bound for log(p/q) with positive integers p, q."""
    if q == 1:
        return log_int_down(p)
    # log p rounded down minus log q rounded up
    up_logq = _up(_up(math.log(q))) if q.bit_length() <= 900 else None
    if up_logq is None:
        e = q.bit_length() - 53
        m = (q >> e) + 1
        up_logq = _sum_hi(_up(_up(math.log(float(m)))), _prod_hi(float(e), _up(_LN2_F)))
    return _down(_sum_lo(log_int_down(p), -up_logq))
