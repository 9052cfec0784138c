"""Planar primitives for axis-aligned ray growth.

Points, axis marks, box domains, and the L1 "dependence regions" that bound
how far a single growth event can see. A dependence region for one half-ray
is a square with one corner at the seed and its diagonal running one horizon
along the growth direction; equivalently the closed L1 ball of radius t
centred at the diagonal midpoint. Two events whose regions do not intersect
are driven by disjoint parts of the seed process, which is what makes the
`independence_horizon` bound useful: below l1(u, v) / 4 no pairing of sides
can interact.

All region tests are exact arithmetic on the given coordinates; boundary
contact counts as intersection (regions are closed sets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Direction(Enum):
    """Axis mark of a seed: horizontal rays run along (1,0), vertical along (0,1)."""

    HORIZONTAL = "H"
    VERTICAL = "V"

    @property
    def vector(self) -> tuple[float, float]:
        return (1.0, 0.0) if self is Direction.HORIZONTAL else (0.0, 1.0)

    @property
    def orthogonal(self) -> "Direction":
        return Direction.VERTICAL if self is Direction.HORIZONTAL else Direction.HORIZONTAL


#: Valid ray sides. '+' grows toward +x (horizontal) or +y (vertical).
SIDES = ("+", "-")


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise ValueError(f"side must be '+' or '-', got {side!r}")


@dataclass(frozen=True)
class Point2:
    """A point in the plane with finite coordinates."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


def l1_distance(a: Point2, b: Point2) -> float:
    """L1 (taxicab) distance between two points."""
    return abs(a.x - b.x) + abs(a.y - b.y)


@dataclass(frozen=True)
class BoxDomain:
    """The square observation window [0, side] x [0, side]."""

    side: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.side) and self.side > 0):
            raise ValueError(f"box side must be positive and finite, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def contains(self, p: Point2) -> bool:
        """Closed containment test."""
        return 0.0 <= p.x <= self.side and 0.0 <= p.y <= self.side

    @property
    def corners(self) -> tuple[Point2, Point2, Point2, Point2]:
        s = self.side
        return (Point2(0.0, 0.0), Point2(s, 0.0), Point2(s, s), Point2(0.0, s))


@dataclass(frozen=True)
class DependenceRegion:
    """Square of influence for one half-ray grown up to a horizon.

    The square has one corner at the apex seed and its diagonal runs along the
    growth direction to apex + 2t*d for side '+' (apex - 2t*d for '-'), where
    t is the horizon. It is the closed L1 ball of radius t centred at
    apex +/- t*d, with area 2*t^2. The cone is the triangular half with apex
    at the seed (area t^2): the locus of seeds whose rays could reach this
    half-ray's path in time.
    """

    apex: Point2
    direction: Direction
    side: str
    horizon: float

    def __post_init__(self) -> None:
        _check_side(self.side)
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")

    @property
    def sign(self) -> float:
        return 1.0 if self.side == "+" else -1.0

    @property
    def center(self) -> Point2:
        """Midpoint of the diagonal: the L1-ball centre."""
        dx, dy = self.direction.vector
        s = self.sign * self.horizon
        return Point2(self.apex.x + s * dx, self.apex.y + s * dy)

    @property
    def far_corner(self) -> Point2:
        dx, dy = self.direction.vector
        s = self.sign * 2.0 * self.horizon
        return Point2(self.apex.x + s * dx, self.apex.y + s * dy)

    @property
    def square_corners(self) -> tuple[Point2, Point2, Point2, Point2]:
        """Apex, waist, far corner, waist (in order around the square)."""
        c = self.center
        t = self.horizon
        if self.direction is Direction.HORIZONTAL:
            waist_a = Point2(c.x, c.y - t)
            waist_b = Point2(c.x, c.y + t)
        else:
            waist_a = Point2(c.x - t, c.y)
            waist_b = Point2(c.x + t, c.y)
        return (self.apex, waist_a, self.far_corner, waist_b)

    @property
    def cone_corners(self) -> tuple[Point2, Point2, Point2]:
        """The triangular half of the square with apex at the seed."""
        corners = self.square_corners
        return (corners[0], corners[1], corners[3])

    @property
    def square_area(self) -> float:
        return 2.0 * self.horizon * self.horizon

    @property
    def cone_area(self) -> float:
        return self.horizon * self.horizon

    def contains(self, p: Point2) -> bool:
        """Closed membership test for the square (L1 ball around the centre)."""
        c = self.center
        return abs(p.x - c.x) + abs(p.y - c.y) <= self.horizon

    def rotated_bounds(self) -> tuple[float, float, float, float]:
        """Closed bounds (u_lo, u_hi, v_lo, v_hi) in u = x+y, v = x-y coordinates.

        In the rotated frame the L1 ball becomes an axis-aligned box, so
        intersection tests reduce to exact interval overlap.
        """
        c = self.center
        u = c.x + c.y
        v = c.x - c.y
        t = self.horizon
        return (u - t, u + t, v - t, v + t)


def regions_intersect(a: DependenceRegion, b: DependenceRegion) -> bool:
    """Whether two dependence squares of equal horizon share at least one point.

    Closed-set convention: touching boundaries intersect. Exact arithmetic via
    the rotated-frame interval test; no epsilon anywhere.
    """
    if a.horizon != b.horizon:
        raise ValueError(
            f"regions must share a horizon, got {a.horizon} and {b.horizon}"
        )
    au_lo, au_hi, av_lo, av_hi = a.rotated_bounds()
    bu_lo, bu_hi, bv_lo, bv_hi = b.rotated_bounds()
    return au_lo <= bu_hi and bu_lo <= au_hi and av_lo <= bv_hi and bv_lo <= av_hi


def independence_horizon(u: Point2, v: Point2) -> float:
    """Largest guaranteed-safe horizon for two distinct seeds: l1(u, v) / 4.

    Up to this horizon the dependence squares of u and v stay disjoint for
    every choice of marks and sides except possible boundary contact exactly
    at the bound.
    """
    if u.x == v.x and u.y == v.y:
        raise ValueError(f"seeds must be distinct, both at ({u.x}, {u.y})")
    return l1_distance(u, v) / 4.0
