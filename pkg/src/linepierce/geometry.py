"""Exact geometry of the doubly ruled surface z = x*y and rational lines.

The surface carries two families of straight lines: for a constant c the
line x = c, z = c*y (direction (0,1,c)) and for a constant b the line
y = b, z = b*x (direction (1,0,b)); these are the only lines contained in
the surface.  Any other line meets it in at most two points, whose
coordinates live in a quadratic extension of the rationals.

Bodies are sliced out of nearly-y-perpendicular planes y = q + eps*x; the
chart (u, w) = (x, z) identifies such a plane with R^2 and turns the
surface trace into the parabola w = q*u + eps*u^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactnum import QuadExt, RootSet, Scalar, solve_quadratic

X_RULING = "x-ruling"  # x = c, z = c*y: pierces a body iff c is in its support
Y_RULING = "y-ruling"  # y = b, z = b*x: constant-y line on the surface
GENERIC = "generic"


@dataclass(frozen=True)
class Point3:
    x: Scalar
    y: Scalar
    z: Scalar

    def is_rational(self) -> bool:
        return all(not isinstance(c, QuadExt) for c in (self.x, self.y, self.z))


@dataclass(frozen=True)
class Line3:
    """Parametric rational line base + s*dir."""

    base: Point3
    dir: tuple[Fraction, Fraction, Fraction]

    def __post_init__(self) -> None:
        if not self.base.is_rational():
            raise ValueError("line base must have rational coordinates")
        if any(isinstance(c, QuadExt) for c in self.dir):
            raise ValueError("line direction must have rational coordinates")
        if all(c == 0 for c in self.dir):
            raise ValueError("line direction must be nonzero")

    def at(self, s: Scalar) -> Point3:
        dx, dy, dz = self.dir
        return Point3(self.base.x + s * dx, self.base.y + s * dy, self.base.z + s * dz)


@dataclass(frozen=True)
class LineClass:
    kind: str  # X_RULING | Y_RULING | GENERIC
    param: Fraction | None = None


def ruling_line_x(c: Fraction) -> Line3:
    return Line3(Point3(Fraction(c), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(c)))


def ruling_line_y(b: Fraction) -> Line3:
    return Line3(Point3(Fraction(0), Fraction(b), Fraction(0)), (Fraction(1), Fraction(0), Fraction(b)))


def classify_line(line: Line3) -> LineClass:
    """Structural test for the two ruling families of z = x*y.

    Independent of ``line_surface_intersection``: this checks the line's
    shape directly, the other solves the substituted quadratic.  The two
    agree (ruling iff contained in the surface).
    """
    dx, dy, dz = line.dir
    b = line.base
    if dx == 0 and dy != 0:
        c = b.x
        if dz == c * dy and b.z == c * b.y:
            return LineClass(X_RULING, c)
    if dy == 0 and dx != 0:
        p = b.y
        if dz == p * dx and b.z == p * b.x:
            return LineClass(Y_RULING, p)
    return LineClass(GENERIC)


@dataclass(frozen=True)
class SurfaceIntersection:
    on_surface: bool
    points: tuple[Point3, ...] = ()


def line_surface_intersection(line: Line3) -> SurfaceIntersection:
    """Meet a rational line with z = x*y.

    Substituting base + s*dir gives A s^2 + B s + C with A = dx*dy,
    B = px*dy + py*dx - dz, C = px*py - pz.  Identically zero means the
    whole line lies on the surface; otherwise 0, 1 or 2 parameter roots,
    a tangency reported as a single point.
    """
    dx, dy, dz = line.dir
    p = line.base
    a = dx * dy
    bq = p.x * dy + p.y * dx - dz
    c = p.x * p.y - p.z
    if a == 0 and bq == 0 and c == 0:
        return SurfaceIntersection(on_surface=True)
    roots: RootSet = solve_quadratic(a, bq, c)
    return SurfaceIntersection(False, tuple(line.at(r) for r in roots.roots))


@dataclass(frozen=True)
class TiltedPlane:
    """The plane y = q + eps*x with a small positive tilt eps."""

    q: Fraction
    eps: Fraction

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError(f"tilt must be positive, got {self.eps}")

    def holds(self, pt: Point3) -> bool:
        return pt.y == self.q + pt.x * self.eps

    def chart(self, pt: Point3) -> tuple[Scalar, Scalar]:
        """Chart (u, w) = (x, z); only defined on the plane."""
        if not self.holds(pt):
            raise ValueError(f"point {pt} is not on the plane y = {self.q} + {self.eps}*x")
        return (pt.x, pt.z)

    def from_chart(self, u: Fraction, w: Fraction) -> Point3:
        return Point3(u, self.q + self.eps * u, w)


PLANE_HIT = "point"
PLANE_CONTAINED = "contained"
PLANE_PARALLEL = "parallel"


@dataclass(frozen=True)
class PlaneIntersection:
    kind: str  # PLANE_HIT | PLANE_CONTAINED | PLANE_PARALLEL
    point: Point3 | None = None


def line_plane_intersection(line: Line3, plane: TiltedPlane) -> PlaneIntersection:
    dx, dy, dz = line.dir
    denom = dy - plane.eps * dx
    if denom == 0:
        if plane.holds(line.base):
            return PlaneIntersection(PLANE_CONTAINED)
        return PlaneIntersection(PLANE_PARALLEL)
    s = (plane.q + plane.eps * line.base.x - line.base.y) / denom
    return PlaneIntersection(PLANE_HIT, line.at(s))


def plane_coords(plane: TiltedPlane, pt: Point3) -> tuple[Scalar, Scalar]:
    return plane.chart(pt)


def vertical_distance(pt: Point3) -> Scalar:
    """|z - x*y|: offset from the surface along the z-axis."""
    return abs(pt.z - pt.x * pt.y)


def line_to_record(line: Line3) -> dict:
    from .exactnum import format_rational as fr

    return {
        "base": [fr(line.base.x), fr(line.base.y), fr(line.base.z)],
        "dir": [fr(d) for d in line.dir],
    }


def line_from_record(record: dict) -> Line3:
    from .exactnum import parse_rational as pr

    try:
        base = record["base"]
        direction = record["dir"]
        if len(base) != 3 or len(direction) != 3:
            raise ValueError("base and dir must each have three entries")
        return Line3(
            Point3(pr(base[0]), pr(base[1]), pr(base[2])),
            (pr(direction[0]), pr(direction[1]), pr(direction[2])),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed line record: {exc}") from exc
