"""Exact areas of axis-aligned boxes clipped by discs centered at the origin.

Everything reduces to the cumulative function G(x, y) = area of
{(u, v) in unit disc : u <= x, v <= y}; a box area follows by
inclusion-exclusion.  Closed forms only, no quadrature, so grid weights can
be made bit-identical under the dihedral symmetries of the grid.
"""

from __future__ import annotations

import math


def _antideriv(u: float) -> float:
    """Antiderivative of sqrt(1 - u^2), zero at u = 0."""
    u = min(1.0, max(-1.0, u))
    return 0.5 * (u * math.sqrt(max(0.0, 1.0 - u * u)) + math.asin(u))


def _chord_integral(a: float, b: float) -> float:
    """Integral of sqrt(1 - u^2) over [a, b] (clamped to [-1, 1])."""
    return _antideriv(b) - _antideriv(a)


def disc_quadrant_cdf(x: float, y: float) -> float:
    """Area of the unit-disc region left of x and below y."""
    if x <= -1.0 or y <= -1.0:
        return 0.0
    x = min(x, 1.0)
    if y >= 1.0:
        # Full vertical extent: area under the circle up to x.
        return 2.0 * _chord_integral(-1.0, x)
    c = math.sqrt(max(0.0, 1.0 - y * y))
    if y >= 0.0:
        area = 2.0 * _chord_integral(-1.0, min(x, -c))
        if x > -c:
            b = min(x, c)
            area += _chord_integral(-c, b) + y * (b + c)
        if x > c:
            area += 2.0 * _chord_integral(c, x)
        return area
    # y < 0: only the lens |u| <= c contributes, with height y + sqrt(1-u^2).
    if x <= -c:
        return 0.0
    b = min(x, c)
    return _chord_integral(-c, b) + y * (b + c)


def box_disc_area(x0: float, x1: float, y0: float, y1: float, radius: float = 1.0) -> float:
    """Area of [x0,x1] x [y0,y1] intersected with the disc of given radius."""
    if radius <= 0.0 or x1 <= x0 or y1 <= y0:
        return 0.0
    sx0, sx1 = x0 / radius, x1 / radius
    sy0, sy1 = y0 / radius, y1 / radius
    area = (
        disc_quadrant_cdf(sx1, sy1)
        - disc_quadrant_cdf(sx0, sy1)
        - disc_quadrant_cdf(sx1, sy0)
        + disc_quadrant_cdf(sx0, sy0)
    )
    return radius * radius * max(0.0, area)


def cell_disc_area(cx: float, cy: float, half: float, radius: float = 1.0) -> float:
    """Clipped area of the square cell centered at (cx, cy) with half-width ``half``.

    The center is folded into the first octant before evaluating, so the
    result is bit-identical under reflections and axis swaps of the center.
    """
    ax, ay = abs(cx), abs(cy)
    if ax < ay:
        ax, ay = ay, ax
    return box_disc_area(ax - half, ax + half, ay - half, ay + half, radius)


def annulus_box_area(x0: float, x1: float, y0: float, y1: float, r_in: float, r_out: float) -> float:
    """Area of the box intersected with the annulus r_in <= r <= r_out."""
    outer = box_disc_area(x0, x1, y0, y1, r_out)
    inner = box_disc_area(x0, x1, y0, y1, r_in) if r_in > 0.0 else 0.0
    return max(0.0, outer - inner)


def annulus_annulus_area(a_in: float, a_out: float, b_in: float, b_out: float) -> float:
    """Area of the intersection of two concentric annuli."""
    lo = max(a_in, b_in)
    hi = min(a_out, b_out)
    if hi <= lo:
        return 0.0
    return math.pi * (hi * hi - lo * lo)
