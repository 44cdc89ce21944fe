"""Command line surface: construct / witness / refute / cover / export-plot.

All core computation is exact; decimals appear only in plot exports.  Every
command writes deterministic artifacts (fixed key order, no timestamps), so
re-running with the same flags reproduces files byte for byte.  Exit codes:
0 success or witness found, 2 search/prefix exhausted, 3 input error,
4 uncoverable pool.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .exactnum import format_rational, parse_rational
from .family import (
    ConvexBody,
    FamilyStream,
    body_from_record,
    body_to_record,
    truncate_family,
)
from .geometry import Line3, line_from_record, line_to_record, ruling_line_x
from .intervals import deep_witness
from .refutation import (
    UncoverableError,
    min_line_cover,
    non_piercing_certificate,
    pierce,
    piercing_matrix,
    refute,
)

EXIT_OK = 0
EXIT_EXHAUSTED = 2
EXIT_INPUT = 3
EXIT_UNCOVERABLE = 4


class InputError(Exception):
    pass


def _parse_delta(text: str) -> Fraction:
    try:
        delta = parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {text!r}: {exc}") from exc
    if not (0 < delta < 1):
        raise InputError(f"delta must lie strictly between 0 and 1, got {text}")
    return delta


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _dump_jsonl(records) -> str:
    return "".join(
        json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records
    )


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def load_family(path: str) -> list[ConvexBody]:
    bodies = []
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read family file {path}: {exc}") from exc
    for ln, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            bodies.append(body_from_record(json.loads(line)))
        except (ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}:{ln}: {exc}") from exc
    if not bodies:
        raise InputError(f"family file {path} holds no bodies")
    return bodies


def load_lines(path: str) -> list[Line3]:
    out = []
    problems = []
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read line file {path}: {exc}") from exc
    for ln, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(line_from_record(json.loads(line)))
        except (ValueError, json.JSONDecodeError) as exc:
            problems.append(f"{path}:{ln}: {exc}")
    if problems:
        raise InputError("\n".join(problems))
    return out


def render_decimal(x: Fraction, precision: int) -> str:
    with localcontext() as ctx:
        ctx.prec = precision
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def cmd_construct(args) -> int:
    delta = _parse_delta(args.delta)
    if args.count < 1:
        raise InputError(f"count must be positive, got {args.count}")
    bodies = truncate_family(FamilyStream(delta), args.count)
    text = _dump_jsonl(body_to_record(b) for b in bodies)
    _write(args.out, text)
    if args.verify:
        reloaded = load_family(args.out)
        again = _dump_jsonl(body_to_record(b) for b in reloaded)
        if again != text:
            raise InputError("verification failed: reloaded family differs")
        if any(b.support.measure() < delta for b in reloaded):
            raise InputError("verification failed: support below delta")
        print(f"verified {len(reloaded)} bodies")
    print(f"wrote {len(bodies)} bodies to {args.out}")
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.t < 1:
        raise InputError(f"t must be positive, got {args.t}")
    bodies = load_family(args.family)
    found = deep_witness([b.support for b in bodies], args.t)
    if found is None:
        report = {"found": False, "t": args.t, "bodies_searched": len(bodies)}
        _write(args.out, _dump_json(report))
        print(f"no witness in prefix of {len(bodies)} bodies for t={args.t}")
        return EXIT_EXHAUSTED
    r, members = found
    line = ruling_line_x(r)
    pierced = []
    for i in members:
        if not pierce(line, bodies[i]):
            raise InputError(f"internal check failed: body {i} not pierced at r={r}")
        pierced.append({"index": i, "q": format_rational(bodies[i].q)})
    report = {
        "found": True,
        "t": args.t,
        "r": format_rational(r),
        "line": line_to_record(line),
        "pierced": pierced,
        "bodies_searched": len(bodies),
    }
    text = _dump_json(report)
    _write(args.out, text)
    if args.verify:
        data = json.loads(Path(args.out).read_text(encoding="utf-8"))
        again = load_family(args.family)
        rr = parse_rational(data["r"])
        for entry in data["pierced"]:
            body = again[entry["index"]]
            if not body.support.contains(rr):
                raise InputError("verification failed: r outside a reported support")
            if not pierce(ruling_line_x(rr), body):
                raise InputError("verification failed: reported body not pierced")
        print(f"verified {len(data['pierced'])} pierced bodies")
    print(f"witness r={r} piercing {len(members)} bodies -> {args.out}")
    return EXIT_OK


def cmd_refute(args) -> int:
    delta = _parse_delta(args.delta)
    if args.nmax < 1:
        raise InputError(f"nmax must be positive, got {args.nmax}")
    lines = load_lines(args.lines)
    outcome = refute(lines, FamilyStream(delta), args.nmax)
    if not outcome.found:
        report = {"found": False, "checked": outcome.checked, "n_max": outcome.n_max}
        _write(args.out, _dump_json(report))
        print(f"exhausted after {outcome.checked} bodies")
        return EXIT_EXHAUSTED
    record = outcome.report.to_record()
    record["found"] = True
    _write(args.out, _dump_json(record))
    if args.verify:
        verify_refutation(args.out, args.lines)
        print("verified refutation report")
    print(
        f"witness q={outcome.report.body.q} at emission {outcome.report.emission_index} "
        f"-> {args.out}"
    )
    return EXIT_OK


def verify_refutation(report_path: str, lines_path: str) -> None:
    data = json.loads(Path(report_path).read_text(encoding="utf-8"))
    if not data.get("found"):
        raise InputError("verification failed: report holds no witness")
    lines = load_lines(lines_path)
    body = body_from_record(data["witness"])
    for line in lines:
        if pierce(line, body):
            raise InputError("verification failed: a pool line pierces the witness")
    for cert in data["certificates"]:
        fresh = non_piercing_certificate(lines[cert["line"]], body, cert["line"])
        if fresh is None:
            raise InputError("verification failed: certificate line pierces")
        if not fresh.holds():
            raise InputError("verification failed: certificate inequality false")
        stated = (cert["lhs"], cert["rel"], cert["rhs"], cert["case"])
        rebuilt = (
            format_rational(fresh.lhs),
            fresh.rel,
            format_rational(fresh.rhs),
            fresh.case,
        )
        if stated != rebuilt:
            raise InputError("verification failed: certificate mismatch")


def cmd_cover(args) -> int:
    bodies = load_family(args.family)
    lines = load_lines(args.lines)
    matrix = piercing_matrix(bodies, lines)
    try:
        sol = min_line_cover(matrix)
    except UncoverableError as exc:
        report = {
            "uncoverable": True,
            "rows": list(exc.rows),
            "n_bodies": len(bodies),
            "n_lines": len(lines),
        }
        _write(args.out, _dump_json(report))
        print(f"uncoverable rows: {list(exc.rows)}")
        return EXIT_UNCOVERABLE
    report = {
        "uncoverable": False,
        "size": sol.size,
        "columns": list(sol.columns),
        "exact": sol.exact,
        "lower_bound": sol.lower_bound,
        "n_bodies": len(bodies),
        "n_lines": len(lines),
    }
    _write(args.out, _dump_json(report))
    if args.verify:
        chosen = [lines[c] for c in sol.columns]
        for i, body in enumerate(bodies):
            if not any(pierce(line, body) for line in chosen):
                raise InputError(f"verification failed: body {i} uncovered")
        print("verified cover")
    print(f"cover size {sol.size} (exact={sol.exact}) -> {args.out}")
    return EXIT_OK


def cmd_export_plot(args) -> int:
    if args.samples < 1:
        raise InputError(f"samples must be positive, got {args.samples}")
    if args.precision < 1:
        raise InputError(f"precision must be positive, got {args.precision}")
    bodies = load_family(args.family)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    def dec(x: Fraction) -> str:
        return render_decimal(x, args.precision)

    arc_rows = ["body,seq,u,w,x,y,z"]
    hull_rows = ["body,seq,u,w"]
    for bi, body in enumerate(bodies):
        span = body.r_max - body.r_min
        for k in range(args.samples):
            u = (
                body.r_min
                if args.samples == 1
                else body.r_min + span * k / (args.samples - 1)
            )
            w = body.parabola(u)
            pt = body.plane.from_chart(u, w)
            arc_rows.append(
                f"{bi},{k},{dec(u)},{dec(w)},{dec(pt.x)},{dec(pt.y)},{dec(pt.z)}"
            )
        seq = 0
        for kind, a, b in body.envelope_pieces():
            steps = 8 if kind == "arc" and a != b else 1
            for k in range(steps + 1):
                u = a + (b - a) * k / steps
                w = body.parabola(u) if kind == "arc" else body.lower_envelope(u)
                hull_rows.append(f"{bi},{seq},{dec(u)},{dec(w)}")
                seq += 1
        for u in (body.r_max, body.r_min):
            hull_rows.append(f"{bi},{seq},{dec(u)},{dec(body.top_chord(u))}")
            seq += 1

    surface_rows = ["x,y,z"]
    grid = [Fraction(k, 8) for k in range(17)]  # [0,2] in steps of 1/8
    for x in grid:
        for y in grid:
            surface_rows.append(f"{dec(x)},{dec(y)},{dec(x * y)}")

    (outdir / "arcs.csv").write_text("\n".join(arc_rows) + "\n", encoding="utf-8")
    (outdir / "hull.csv").write_text("\n".join(hull_rows) + "\n", encoding="utf-8")
    (outdir / "surface.csv").write_text("\n".join(surface_rows) + "\n", encoding="utf-8")
    if args.verify:
        tolerance = Decimal(10) ** (3 - args.precision)
        for row in arc_rows[1:]:
            _, _, _, _, xs, ys, zs = row.split(",")
            gap = abs(Decimal(zs) - Decimal(xs) * Decimal(ys))
            if gap > tolerance:
                raise InputError("verification failed: arc sample off the surface")
        print(f"verified {len(arc_rows) - 1} arc samples")
    print(f"wrote plot data for {len(bodies)} bodies to {outdir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linepierce",
        description="Exact construction and line-transversal refutation "
        "of families of thin convex bodies on the surface z = x*y.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write a family prefix as JSON lines")
    p.add_argument("--delta", required=True, help="support measure bound in (0,1), e.g. 1/2")
    p.add_argument("--count", "-N", type=int, required=True, help="number of bodies")
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("witness", help="find one line piercing t bodies of a family file")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("refute", help="find a family member missed by every pool line")
    p.add_argument("--delta", required=True)
    p.add_argument("--lines", required=True)
    p.add_argument("--nmax", type=int, default=100_000, help="stream search budget")
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("cover", help="minimum piercing line cover over a candidate pool")
    p.add_argument("--family", required=True)
    p.add_argument("--lines", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("export-plot", help="CSV samples of bodies and the surface")
    p.add_argument("--family", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--precision", type=int, default=12, help="significant digits")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_export_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
