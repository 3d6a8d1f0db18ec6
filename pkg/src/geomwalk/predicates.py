"""Exact 2-D orientation and in-circle predicates.

Each predicate evaluates a determinant in floating point first and accepts
the sign whenever it clears a forward error bound (the standard static filter
constants); otherwise it falls back to exact rational arithmetic on the
original coordinates, which Python Fractions represent without loss.
"""
from __future__ import annotations

from fractions import Fraction

_EPS = 2.220446049250313e-16  # 2**-52
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS
# below these magnitudes a product may have underflowed and lost its sign,
# so the float filter cannot be trusted at all
_CCW_UNDERFLOW = 1e-290
_ICC_UNDERFLOW = 1e-250


def orient2d(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> int:
    """Sign of the signed area of triangle abc: +1 counterclockwise, -1
    clockwise, 0 collinear."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if detsum < _CCW_UNDERFLOW:
        return _orient2d_exact(ax, ay, bx, by, cx, cy)
    if detleft > 0.0:
        if detright <= 0.0:
            return 1
    elif detleft < 0.0:
        if detright >= 0.0:
            return -1
    else:
        return _sign_float(-detright)
    if det >= _CCW_BOUND * detsum:
        return 1
    if -det >= _CCW_BOUND * detsum:
        return -1
    return _orient2d_exact(ax, ay, bx, by, cx, cy)


def incircle(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """Sign test for d against the circumcircle of counterclockwise (a, b, c):
    +1 strictly inside, -1 strictly outside, 0 cocircular."""
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    if permanent < _ICC_UNDERFLOW:
        return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)
    errbound = _ICC_BOUND * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def _sign_float(v: float) -> int:
    return (v > 0.0) - (v < 0.0)


def _sign_frac(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def _orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
    return _sign_frac((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = map(Fraction, (ax, ay, bx, by, cx, cy, dx, dy))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return _sign_frac(det)
