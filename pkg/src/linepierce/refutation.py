"""Exact piercing predicates, line covers, and the transversal refuter.

A line pierces a body iff it meets the body's plane inside the chart hull.
For a line crossing the plane this is a point-in-hull test with rational
inequalities; for a line inside the plane it is a one-dimensional
feasibility problem whose bounds may live in a quadratic extension.  The
refuter scans the family stream for a body missed by every line of a given
finite pool, using the support and plane-slab filters as accelerators and
the exact predicate as the final arbiter, and emits one re-verifiable
non-piercing certificate per line.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactnum import QuadExt, Scalar, format_rational, scalar_le, solve_quadratic
from .family import ConvexBody, FamilyStream
from .geometry import (
    GENERIC,
    PLANE_HIT,
    PLANE_PARALLEL,
    X_RULING,
    Y_RULING,
    Line3,
    LineClass,
    Point3,
    classify_line,
    line_plane_intersection,
    line_surface_intersection,
)


def max_vertical_distance(body: ConvexBody) -> Fraction:
    """Exact maximum of z - x*y over the body: eps*(span)^2 / 4.

    On the plane the offset from the surface at chart point (u, w) is
    w - (q*u + eps*u^2), maximized with w on the top chord at the chord
    midpoint. Never exceeds eps since the span is at most 1.
    """
    span = body.r_max - body.r_min
    return body.eps * span * span / 4


def pierce(line: Line3, body: ConvexBody) -> bool:
    hit = line_plane_intersection(line, body.plane)
    if hit.kind == PLANE_PARALLEL:
        return False
    if hit.kind == PLANE_HIT:
        u, w = body.plane.chart(hit.point)
        return body.contains_chart(u, w)
    return _pierce_within_plane(line, body)


def _chart_line(line: Line3) -> tuple[Fraction, Fraction] | None:
    """Chart image w = alpha + beta*u of an in-plane line; None if vertical."""
    dx, _, dz = line.dir
    if dx == 0:
        return None
    beta = dz / dx
    return (line.base.z - line.base.x * beta, beta)


def _pierce_within_plane(line: Line3, body: ConvexBody) -> bool:
    ab = _chart_line(line)
    if ab is None:
        # vertical chart line u = const sweeps all w
        return body.r_min <= line.base.x <= body.r_max
    alpha, beta = ab
    for kind, a, b in body.envelope_pieces():
        if _piece_feasible(body, kind, a, b, alpha, beta):
            return True
    return False


def _piece_feasible(
    body: ConvexBody,
    kind: str,
    a: Fraction,
    b: Fraction,
    alpha: Fraction,
    beta: Fraction,
) -> bool:
    """Is there u in [a, b] with envelope(u) <= alpha + beta*u <= top(u)?"""
    lowers: list[Scalar] = [a]
    uppers: list[Scalar] = [b]
    # below the top chord: alpha + beta*u <= t0 + t1*u
    t1 = body.chord_slope(body.r_min, body.r_max)
    t0 = body.parabola(body.r_min) - t1 * body.r_min
    if not _affine_halfline(beta - t1, alpha - t0, lowers, uppers, keep_below=True):
        return False
    if kind == "chord":
        # above the gap chord: alpha + beta*u >= e0 + e1*u
        e1 = body.chord_slope(a, b)
        e0 = body.parabola(a) - e1 * a
        if not _affine_halfline(beta - e1, alpha - e0, lowers, uppers, keep_below=False):
            return False
    else:
        # above the parabola: eps*u^2 + (q - beta)*u - alpha <= 0
        roots = solve_quadratic(body.eps, body.q - beta, -alpha)
        if roots.kind == "none":
            return False
        if roots.kind == "one":
            lowers.append(roots.roots[0])
            uppers.append(roots.roots[0])
        elif roots.kind == "two":
            lowers.append(roots.roots[0])
            uppers.append(roots.roots[1])
    return all(scalar_le(lo, up) for lo in lowers for up in uppers)


def _affine_halfline(
    coeff: Fraction,
    shift: Fraction,
    lowers: list[Scalar],
    uppers: list[Scalar],
    keep_below: bool,
) -> bool:
    """Fold coeff*u + shift <= 0 (or >= 0) into interval bounds.

    Returns False when the condition is unsatisfiable outright.
    """
    if not keep_below:
        coeff, shift = -coeff, -shift
    if coeff == 0:
        return shift <= 0
    bound = -shift / coeff
    if coeff > 0:
        uppers.append(bound)
    else:
        lowers.append(bound)
    return True


@dataclass(frozen=True)
class PiercingMatrix:
    """Row = body (family order), column = line (input order)."""

    entries: tuple[tuple[bool, ...], ...]

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0


def piercing_matrix(bodies: list[ConvexBody], lines: list[Line3]) -> PiercingMatrix:
    return PiercingMatrix(
        tuple(tuple(pierce(line, body) for line in lines) for body in bodies)
    )


class UncoverableError(Exception):
    """Some bodies are pierced by no candidate line; they refute the pool."""

    def __init__(self, rows: tuple[int, ...]):
        super().__init__(f"rows not pierced by any candidate line: {list(rows)}")
        self.rows = rows


@dataclass(frozen=True)
class CoverSolution:
    size: int
    columns: tuple[int, ...]
    exact: bool
    lower_bound: int


EXACT_COVER_LIMIT = 25


def min_line_cover(matrix: PiercingMatrix) -> CoverSolution:
    """Minimum set of columns covering every row.

    Exact branch and bound up to EXACT_COVER_LIMIT columns (branching on the
    lowest uncovered row, candidate columns in ascending order, first
    optimum kept); greedy with a reported lower bound beyond that.
    """
    rows, cols = matrix.n_rows, matrix.n_cols
    col_masks = [0] * cols
    for r, row in enumerate(matrix.entries):
        for c, hit in enumerate(row):
            if hit:
                col_masks[c] |= 1 << r
    uncoverable = tuple(
        r for r, row in enumerate(matrix.entries) if not any(row)
    )
    if uncoverable:
        raise UncoverableError(uncoverable)
    universe = (1 << rows) - 1
    if rows == 0:
        return CoverSolution(0, (), True, 0)

    greedy = _greedy_cover(col_masks, universe)
    if cols > EXACT_COVER_LIMIT:
        return CoverSolution(
            len(greedy), tuple(greedy), False, _disjoint_rows_bound(matrix)
        )

    best = list(greedy)
    max_cover = max(mask.bit_count() for mask in col_masks)

    def dfs(covered: int, chosen: list[int]) -> None:
        nonlocal best
        if covered == universe:
            if len(chosen) < len(best):
                best = chosen.copy()
            return
        missing = (universe & ~covered).bit_count()
        bound = -(-missing // max_cover)
        if len(chosen) + bound >= len(best):
            return
        first = (universe & ~covered)
        row = (first & -first).bit_length() - 1
        for c in range(cols):
            if col_masks[c] >> row & 1:
                chosen.append(c)
                dfs(covered | col_masks[c], chosen)
                chosen.pop()

    dfs(0, [])
    return CoverSolution(len(best), tuple(sorted(best)), True, len(best))


def _greedy_cover(col_masks: list[int], universe: int) -> list[int]:
    chosen: list[int] = []
    covered = 0
    while covered != universe:
        gain, pick = 0, -1
        for c, mask in enumerate(col_masks):
            g = (mask & ~covered).bit_count()
            if g > gain:
                gain, pick = g, c
        chosen.append(pick)
        covered |= col_masks[pick]
    return chosen


def _disjoint_rows_bound(matrix: PiercingMatrix) -> int:
    """Rows with pairwise disjoint column sets each need their own line."""
    used: set[int] = set()
    count = 0
    for row in matrix.entries:
        cols = {c for c, hit in enumerate(row) if hit}
        if cols and not (cols & used):
            used |= cols
            count += 1
    return count


@dataclass(frozen=True)
class Certificate:
    """One exact inequality witnessing that a line misses a body."""

    line_index: int
    case: str
    lhs: Fraction
    rel: str  # "<" | ">" | "!="
    rhs: Fraction

    def holds(self) -> bool:
        if self.rel == "<":
            return self.lhs < self.rhs
        if self.rel == ">":
            return self.lhs > self.rhs
        if self.rel == "!=":
            return self.lhs != self.rhs
        raise ValueError(f"unknown relation {self.rel!r}")

    def to_record(self) -> dict:
        return {
            "line": self.line_index,
            "case": self.case,
            "lhs": format_rational(self.lhs),
            "rel": self.rel,
            "rhs": format_rational(self.rhs),
        }


def non_piercing_certificate(
    line: Line3, body: ConvexBody, index: int = 0, cls: LineClass | None = None
) -> Certificate | None:
    """Certificate that the line misses the body, or None if it pierces."""
    if pierce(line, body):
        return None
    cls = cls or classify_line(line)
    if cls.kind == X_RULING:
        return _arc_point_certificate(cls.param, body, index, "support")
    if cls.kind == Y_RULING:
        b = cls.param
        y_lo, y_hi = body.y_range()
        if b < y_lo:
            return Certificate(index, "plane-slab-below", b, "<", y_lo)
        if b > y_hi:
            return Certificate(index, "plane-slab-above", b, ">", y_hi)
        # crossing point sits on the parabola at u = (b - q)/eps
        return _arc_point_certificate((b - body.q) / body.eps, body, index, "slab")
    return _generic_certificate(line, body, index)


def _arc_point_certificate(
    u: Fraction, body: ConvexBody, index: int, tag: str
) -> Certificate:
    if u < body.r_min:
        return Certificate(index, f"{tag}-below-range", u, "<", body.r_min)
    if u > body.r_max:
        return Certificate(index, f"{tag}-above-range", u, ">", body.r_max)
    # on-parabola point strictly under the gap chord
    return Certificate(
        index, f"{tag}-gap", body.parabola(u), "<", body.lower_envelope(u)
    )


def _generic_certificate(line: Line3, body: ConvexBody, index: int) -> Certificate:
    hit = line_plane_intersection(line, body.plane)
    if hit.kind == PLANE_PARALLEL:
        residual = line.base.y - body.q - body.eps * line.base.x
        return Certificate(index, "plane-parallel", residual, "!=", Fraction(0))
    if hit.kind == PLANE_HIT:
        u, w = body.plane.chart(hit.point)
        if u < body.r_min:
            return Certificate(index, "point-below-range", u, "<", body.r_min)
        if u > body.r_max:
            return Certificate(index, "point-above-range", u, ">", body.r_max)
        top = body.top_chord(u)
        if w > top:
            return Certificate(index, "point-above-top-chord", w, ">", top)
        return Certificate(index, "point-below-envelope", w, "<", body.lower_envelope(u))
    return _in_plane_certificate(line, body, index)


def _in_plane_certificate(line: Line3, body: ConvexBody, index: int) -> Certificate:
    ab = _chart_line(line)
    if ab is None:
        u = line.base.x
        if u < body.r_min:
            return Certificate(index, "inplane-below-range", u, "<", body.r_min)
        return Certificate(index, "inplane-above-range", u, ">", body.r_max)
    alpha, beta = ab

    def on_line(u: Fraction) -> Fraction:
        return alpha + beta * u

    # a disjoint in-plane line is entirely above the top chord or entirely
    # below the lower envelope over [r_min, r_max]
    top_slack = min(
        on_line(body.r_min) - body.top_chord(body.r_min),
        on_line(body.r_max) - body.top_chord(body.r_max),
    )
    if top_slack > 0:
        return Certificate(index, "inplane-above-top-chord", top_slack, ">", Fraction(0))
    env_slack = None
    for kind, a, b in body.envelope_pieces():
        if kind == "chord":
            local = min(body.lower_envelope(x) - on_line(x) for x in (a, b))
        else:
            # minimize the convex difference parabola(u) - line(u) on [a, b]
            vertex = (beta - body.q) / (2 * body.eps)
            pts = [a, b] + ([vertex] if a < vertex < b else [])
            local = min(body.parabola(x) - on_line(x) for x in pts)
        env_slack = local if env_slack is None else min(env_slack, local)
    if env_slack is None or env_slack <= 0:
        raise AssertionError("in-plane certificate requested for a piercing line")
    return Certificate(index, "inplane-below-envelope", env_slack, ">", Fraction(0))


def _scalar_str(x: Scalar) -> str:
    if isinstance(x, QuadExt):
        return format_rational(x.a) if x.is_rational else str(x)
    return format_rational(x)


def _point_record(pt: Point3) -> dict:
    return {"x": _scalar_str(pt.x), "y": _scalar_str(pt.y), "z": _scalar_str(pt.z)}


@dataclass(frozen=True)
class LineInfo:
    index: int
    cls: LineClass
    surface_points: tuple[Point3, ...]
    on_surface: bool

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "class": self.cls.kind,
            "param": None if self.cls.param is None else format_rational(self.cls.param),
            "on_surface": self.on_surface,
            "surface_points": [_point_record(p) for p in self.surface_points],
        }


def classify_pool(lines: list[Line3]) -> list[LineInfo]:
    infos = []
    for i, line in enumerate(lines):
        cls = classify_line(line)
        meet = line_surface_intersection(line)
        infos.append(LineInfo(i, cls, meet.points, meet.on_surface))
    return infos


@dataclass(frozen=True)
class RefutationReport:
    body: ConvexBody
    emission_index: int
    checked: int
    line_infos: tuple[LineInfo, ...]
    certificates: tuple[Certificate, ...]

    def to_record(self) -> dict:
        from .family import body_to_record

        return {
            "witness": body_to_record(self.body),
            "emission_index": self.emission_index,
            "checked": self.checked,
            "lines": [info.to_record() for info in self.line_infos],
            "certificates": [cert.to_record() for cert in self.certificates],
        }


@dataclass(frozen=True)
class RefutationOutcome:
    found: bool
    report: RefutationReport | None
    checked: int
    n_max: int


def refute(lines: list[Line3], stream: FamilyStream, n_max: int = 100_000) -> RefutationOutcome:
    """First family member missed by every line in the pool.

    The scan applies the exact support filter for constant-x ruling lines
    and the plane-slab filter for constant-y ruling lines, then the full
    pierce predicate for the rest; the winner is re-verified against every
    line before being reported.  Exhaustion only signals that the search
    budget ran out.
    """
    if n_max < 1:
        raise ValueError(f"search budget must be positive, got {n_max}")
    infos = classify_pool(lines)
    x_params = [i.cls.param for i in infos if i.cls.kind == X_RULING]
    y_params = [i.cls.param for i in infos if i.cls.kind == Y_RULING]
    generic = [i.index for i in infos if i.cls.kind == GENERIC]

    checked = 0
    for i in range(n_max):
        body = stream.body_at(i)
        checked = i + 1
        if any(body.support.contains(r) for r in x_params):
            continue
        y_lo, y_hi = body.y_range()
        if any(y_lo <= b <= y_hi for b in y_params):
            continue
        if any(pierce(lines[i], body) for i in generic):
            continue
        if any(pierce(line, body) for line in lines):  # independent re-check
            continue
        certs = []
        for info in infos:
            cert = non_piercing_certificate(lines[info.index], body, info.index, info.cls)
            if cert is None:
                raise AssertionError("witness re-verification failed")
            certs.append(cert)
        report = RefutationReport(
            body=body,
            emission_index=body.f_index,
            checked=checked,
            line_infos=tuple(infos),
            certificates=tuple(certs),
        )
        return RefutationOutcome(True, report, checked, n_max)
    return RefutationOutcome(False, None, checked, n_max)
