"""Geometric kernel: balls, lifting, and exact-decision predicates.

Decisions (orient2d, power_test) use a floating-point filter with a
conservative error bound and fall back to exact rational arithmetic, so the
returned sign is always correct for representable inputs.  Constructions
(orthocenter, circumcenter) are plain double precision with a conditioning
guard on the 2x2 system determinant.

All functions here are pure; they can be called from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CollinearCenters, CollinearPoints

Point2 = tuple[float, float]

# Relative determinant threshold below which a 2x2 construction system is
# treated as singular (scaled by the square of the coordinate spread).
CONDITIONING_GUARD = 1e-14

_EPS = math.ulp(1.0) / 2  # unit roundoff, 2^-53
# Filter constants: safe overestimates of the relative rounding error of the
# straightforward determinant evaluations below.
_ORIENT_BOUND = 8 * _EPS
_POWER_BOUND = 64 * _EPS


@dataclass
class Ball:
    """A circle with optimization constraint flags."""

    center: Point2
    radius: float
    fix_center: bool = False
    fix_radius: bool = False
    alive: bool = True

    def __post_init__(self):
        x, y = self.center
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(self.radius)):
            raise ValueError("ball must have finite center and radius")
        if self.radius < 0:
            raise ValueError("ball radius must be >= 0")

    @property
    def fully_fixed(self) -> bool:
        return self.fix_center and self.fix_radius


@dataclass(frozen=True)
class LiftedPoint:
    """A ball center lifted to the paraboloid, offset by half its squared radius."""

    base: Point2
    height: float


def power(b: Ball, a: Point2) -> float:
    """Power of point ``a`` with respect to ``b``: |c - a|^2 - R^2."""
    dx = b.center[0] - a[0]
    dy = b.center[1] - a[1]
    return dx * dx + dy * dy - b.radius * b.radius


def lift(b: Ball) -> LiftedPoint:
    """Lift a ball to 3D: height (|c|^2 - R^2) / 2."""
    x, y = b.center
    return LiftedPoint(b.center, 0.5 * (x * x + y * y - b.radius * b.radius))


def paraboloid(p: Point2) -> float:
    """Height of the lifting paraboloid at ``p``: (x^2 + y^2) / 2."""
    return 0.5 * (p[0] * p[0] + p[1] * p[1])


def orient2d(a: Point2, b: Point2, c: Point2) -> int:
    """Sign of twice the signed area of triangle (a, b, c).

    +1 for counterclockwise, -1 for clockwise, 0 for collinear.  Exact.
    """
    detleft = (b[0] - a[0]) * (c[1] - a[1])
    detright = (b[1] - a[1]) * (c[0] - a[0])
    det = detleft - detright
    errbound = _ORIENT_BOUND * (abs(detleft) + abs(detright))
    if abs(det) > errbound:
        return 1 if det > 0 else -1
    return _orient2d_exact(a, b, c)


def _exact_ints(values):
    """Exact integer images of floats under a common power-of-two scaling.

    Floats are dyadic rationals, so this is lossless; the determinants below
    are homogeneous, so uniform scaling preserves their signs.
    """
    pairs = [v.as_integer_ratio() for v in values]
    shift = max(d.bit_length() - 1 for _, d in pairs)
    return [n << (shift - d.bit_length() + 1) for n, d in pairs]


def _orient2d_exact(a: Point2, b: Point2, c: Point2) -> int:
    ax, ay, bx, by, cx, cy = _exact_ints([a[0], a[1], b[0], b[1], c[0], c[1]])
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def _power_det_terms(b1: Ball, b2: Ball, b3: Ball, b4: Ball):
    """Rows of the weighted in-circle determinant relative to b4."""
    rows = []
    r4sq = b4.radius * b4.radius
    for b in (b1, b2, b3):
        ax = b.center[0] - b4.center[0]
        ay = b.center[1] - b4.center[1]
        z = ax * ax + ay * ay - b.radius * b.radius + r4sq
        zmag = ax * ax + ay * ay + b.radius * b.radius + r4sq
        rows.append((ax, ay, z, zmag))
    return rows


def power_test(b1: Ball, b2: Ball, b3: Ball, b4: Ball) -> int:
    """Regularity test of ball b4 against the triangle (b1, b2, b3).

    Returns the sign of tau_4(v) - tau_1(v) at the orthocenter v of the
    first three balls: +1 when b4 does not violate regularity of the
    triangle, -1 when it does, 0 for an exact tie.  Exact decision,
    implemented as the 3D orientation of the four lifted points.
    """
    orient = orient2d(b1.center, b2.center, b3.center)
    if orient == 0:
        raise CollinearCenters("power_test requires non-collinear centers")
    (a1, b1y, z1, m1), (a2, b2y, z2, m2), (a3, b3y, z3, m3) = _power_det_terms(
        b1, b2, b3, b4
    )
    c12 = a1 * b2y - a2 * b1y
    c23 = a2 * b3y - a3 * b2y
    c31 = a3 * b1y - a1 * b3y
    det = z1 * c23 + z2 * c31 + z3 * c12
    mag = (
        m1 * (abs(a2 * b3y) + abs(a3 * b2y))
        + m2 * (abs(a3 * b1y) + abs(a1 * b3y))
        + m3 * (abs(a1 * b2y) + abs(a2 * b1y))
    )
    errbound = _POWER_BOUND * mag
    if abs(det) > errbound:
        sign = 1 if det > 0 else -1
    else:
        sign = _power_test_exact(b1, b2, b3, b4)
    # det > 0 <=> b4 lifted below the face plane (in-circle for equal radii)
    return -sign * orient


def _power_test_exact(b1: Ball, b2: Ball, b3: Ball, b4: Ball) -> int:
    vals = []
    for b in (b1, b2, b3, b4):
        vals += [b.center[0], b.center[1], b.radius]
    x1, y1, r1, x2, y2, r2, x3, y3, r3, x4, y4, r4 = _exact_ints(vals)
    r4sq = r4 * r4
    rows = []
    for x, y, r in ((x1, y1, r1), (x2, y2, r2), (x3, y3, r3)):
        ax = x - x4
        ay = y - y4
        rows.append((ax, ay, ax * ax + ay * ay - r * r + r4sq))
    (a1, b1y, z1), (a2, b2y, z2), (a3, b3y, z3) = rows
    det = z1 * (a2 * b3y - a3 * b2y) + z2 * (a3 * b1y - a1 * b3y) + z3 * (a1 * b2y - a2 * b1y)
    return (det > 0) - (det < 0)


def _solve2x2(a11, a12, a21, a22, r1, r2, scale_sq, exc, what):
    det = a11 * a22 - a12 * a21
    if abs(det) <= CONDITIONING_GUARD * scale_sq:
        raise exc(what)
    x = (r1 * a22 - r2 * a12) / det
    y = (a11 * r2 - a21 * r1) / det
    return x, y


def orthocenter(b1: Ball, b2: Ball, b3: Ball) -> tuple[Point2, float]:
    """Point with equal power to three balls, and that common power value.

    Solves v . (c_i - c_1) = h_i - h_1 for i = 2, 3.  For equal radii this
    is the circumcenter of the three centers.
    """
    h1, h2, h3 = lift(b1).height, lift(b2).height, lift(b3).height
    c1, c2, c3 = b1.center, b2.center, b3.center
    a11, a12 = c2[0] - c1[0], c2[1] - c1[1]
    a21, a22 = c3[0] - c1[0], c3[1] - c1[1]
    scale_sq = max(a11 * a11 + a12 * a12, a21 * a21 + a22 * a22)
    vx, vy = _solve2x2(
        a11, a12, a21, a22, h2 - h1, h3 - h1, scale_sq,
        CollinearCenters, "orthocenter: centers are (nearly) collinear",
    )
    v = (vx, vy)
    tau = (power(b1, v) + power(b2, v) + power(b3, v)) / 3.0
    return v, tau


def circumcenter(p1: Point2, p2: Point2, p3: Point2) -> Point2:
    """Point equidistant from three non-collinear points."""
    a11, a12 = p2[0] - p1[0], p2[1] - p1[1]
    a21, a22 = p3[0] - p1[0], p3[1] - p1[1]
    scale_sq = max(a11 * a11 + a12 * a12, a21 * a21 + a22 * a22)
    r1 = 0.5 * (a11 * a11 + a12 * a12)
    r2 = 0.5 * (a21 * a21 + a22 * a22)
    ux, uy = _solve2x2(
        a11, a12, a21, a22, r1, r2, scale_sq,
        CollinearPoints, "circumcenter: points are (nearly) collinear",
    )
    return (p1[0] + ux, p1[1] + uy)


def triangle_area(p1: Point2, p2: Point2, p3: Point2) -> float:
    """Signed area of the triangle (positive if counterclockwise)."""
    return 0.5 * (
        (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0])
    )


def polygon_area(vertices) -> float:
    """Signed shoelace area of a polygon given as a vertex sequence."""
    area = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        area += x1 * y2 - x2 * y1
    return 0.5 * area
