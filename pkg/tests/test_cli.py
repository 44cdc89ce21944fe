import json
from decimal import Decimal
from fractions import Fraction as F

from linepierce.cli import main
from linepierce.family import FamilyStream
from linepierce.geometry import line_to_record, ruling_line_x, ruling_line_y
from linepierce.refutation import pierce


def write_lines(path, lines):
    path.write_text(
        "".join(json.dumps(line_to_record(l), sort_keys=True) + "\n" for l in lines),
        encoding="utf-8",
    )


def construct(tmp_path, delta="1/2", count=10, name="family.jsonl"):
    family = tmp_path / name
    assert main(["construct", "--delta", delta, "-N", str(count),
                 "--out", str(family)]) == 0
    return family


class TestConstruct:
    def test_writes_expected_records(self, tmp_path):
        family = construct(tmp_path, count=10)
        records = [json.loads(l) for l in family.read_text().splitlines()]
        assert len(records) == 10
        assert records[0]["q"] == "1/4"
        assert records[0]["f"] == 1
        for rec in records:
            total = sum(
                F(hi) - F(lo) for lo, hi in rec["support"]
            )
            assert total >= F(1, 2)

    def test_deterministic_bytes(self, tmp_path):
        a = construct(tmp_path, name="a.jsonl")
        b = construct(tmp_path, name="b.jsonl")
        assert a.read_bytes() == b.read_bytes()

    def test_verify_flag(self, tmp_path):
        family = tmp_path / "fam.jsonl"
        assert main(["construct", "--delta", "1/2", "-N", "5",
                     "--out", str(family), "--verify"]) == 0

    def test_bad_delta_is_input_error(self, tmp_path):
        out = tmp_path / "x.jsonl"
        assert main(["construct", "--delta", "0", "-N", "3", "--out", str(out)]) == 3
        assert main(["construct", "--delta", "7/5", "-N", "3", "--out", str(out)]) == 3
        assert main(["construct", "--delta", "1/2", "-N", "0", "--out", str(out)]) == 3


class TestWitness:
    def test_pair_overlap_high_delta(self, tmp_path):
        family = construct(tmp_path, delta="3/5", count=2)
        out = tmp_path / "w.json"
        assert main(["witness", "--t", "2", "--family", str(family),
                     "--out", str(out), "--verify"]) == 0
        data = json.loads(out.read_text())
        assert data["found"] and len(data["pierced"]) == 2

    def test_triple_among_five(self, tmp_path):
        family = construct(tmp_path, count=5)
        out = tmp_path / "w.json"
        assert main(["witness", "--t", "3", "--family", str(family),
                     "--out", str(out), "--verify"]) == 0
        data = json.loads(out.read_text())
        assert len(data["pierced"]) == 3
        bodies = FamilyStream(F(1, 2)).truncate(5)
        r = F(data["r"])
        for entry in data["pierced"]:
            assert pierce(ruling_line_x(r), bodies[entry["index"]])

    def test_single_body_gives_left_end(self, tmp_path):
        family = construct(tmp_path, count=1)
        out = tmp_path / "w.json"
        assert main(["witness", "--t", "1", "--family", str(family),
                     "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        body = FamilyStream(F(1, 2)).truncate(1)[0]
        assert F(data["r"]) == body.r_min
        assert data["pierced"] == [{"index": 0, "q": "1/4"}]

    def test_no_witness_is_exhausted(self, tmp_path):
        family = construct(tmp_path, count=2)
        out = tmp_path / "w.json"
        # the first two bodies share only the point 0... demand depth 3
        assert main(["witness", "--t", "3", "--family", str(family),
                     "--out", str(out)]) == 2
        assert json.loads(out.read_text())["found"] is False


class TestRefuteCommand:
    def test_single_ruling_line(self, tmp_path):
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, [ruling_line_x(F(1, 2))])
        out = tmp_path / "r.json"
        assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                     "--out", str(out), "--verify"]) == 0
        data = json.loads(out.read_text())
        assert data["found"] and data["emission_index"] == 7
        assert data["witness"]["q"] == "1/32"

    def test_mixed_pool_certificates(self, tmp_path):
        from linepierce.geometry import Line3, Point3

        pool = [
            ruling_line_x(F(1, 3)),
            ruling_line_x(F(5, 4)),  # out of range: classified, never pierces
            ruling_line_y(F(3, 7)),
            Line3(Point3(F(0), F(0), F(1)), (F(1), F(1), F(0))),
            Line3(Point3(F(1, 2), F(0), F(0)), (F(0), F(0), F(1))),
        ]
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, pool)
        out = tmp_path / "r.json"
        assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                     "--out", str(out), "--verify"]) == 0
        data = json.loads(out.read_text())
        assert len(data["certificates"]) == 5
        kinds = [e["class"] for e in data["lines"]]
        assert kinds == ["x-ruling", "x-ruling", "y-ruling", "generic", "generic"]

    def test_empty_pool_vacuous_report(self, tmp_path):
        lines = tmp_path / "lines.jsonl"
        lines.write_text("", encoding="utf-8")
        out = tmp_path / "r.json"
        assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                     "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["emission_index"] == 1
        assert data["certificates"] == []

    def test_malformed_records_reported_per_line(self, tmp_path, capsys):
        lines = tmp_path / "lines.jsonl"
        lines.write_text(
            '{"base":["0/1","0/1","0/1"],"dir":["0/1","1/1","0/1"]}\n'
            "not json\n"
            '{"base":["0/1","0/1"],"dir":["1/1","0/1","0/1"]}\n',
            encoding="utf-8",
        )
        out = tmp_path / "r.json"
        assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                     "--out", str(out)]) == 3
        err = capsys.readouterr().err
        assert ":2:" in err and ":3:" in err

    def test_exhausted_exit_code(self, tmp_path):
        pool = [ruling_line_x(F(k, 16)) for k in range(17)]
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, pool)
        out = tmp_path / "r.json"
        assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                     "--nmax", "5", "--out", str(out)]) == 2
        data = json.loads(out.read_text())
        assert data == {"found": False, "checked": 5, "n_max": 5}


class TestCoverCommand:
    def test_grid_pool_exact(self, tmp_path):
        family = construct(tmp_path, count=4)
        pool = [ruling_line_x(F(k, 8)) for k in range(9)]
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, pool)
        out = tmp_path / "c.json"
        assert main(["cover", "--family", str(family), "--lines", str(lines),
                     "--out", str(out), "--verify"]) == 0
        data = json.loads(out.read_text())
        assert data["exact"] is True
        bodies = FamilyStream(F(1, 2)).truncate(4)
        matrix = [[b.support.contains(F(k, 8)) for k in range(9)] for b in bodies]
        from itertools import combinations
        want = next(
            size for size in range(1, 10)
            if any(
                all(any(row[c] for c in chosen) for row in matrix)
                for chosen in combinations(range(9), size)
            )
        )
        assert data["size"] == want

    def test_all_bodies_share_a_line(self, tmp_path):
        family = construct(tmp_path, delta="3/5", count=3)
        bodies = FamilyStream(F(3, 5)).truncate(3)
        common = next(
            F(k, 64) for k in range(65)
            if all(b.support.contains(F(k, 64)) for b in bodies)
        )
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, [ruling_line_x(common)])
        out = tmp_path / "c.json"
        assert main(["cover", "--family", str(family), "--lines", str(lines),
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["size"] == 1

    def test_uncoverable_pool(self, tmp_path):
        family = construct(tmp_path, count=4)
        bodies = FamilyStream(F(1, 2)).truncate(4)
        target = 2  # drop every line piercing body 2
        pool = [
            ruling_line_x(F(k, 16)) for k in range(17)
            if not bodies[target].support.contains(F(k, 16))
        ]
        assert pool
        lines = tmp_path / "lines.jsonl"
        write_lines(lines, pool)
        out = tmp_path / "c.json"
        assert main(["cover", "--family", str(family), "--lines", str(lines),
                     "--out", str(out)]) == 4
        data = json.loads(out.read_text())
        assert data["uncoverable"] and target in data["rows"]


class TestExportPlot:
    def test_row_counts_and_residuals(self, tmp_path):
        family = construct(tmp_path, count=1)
        plots = tmp_path / "plots"
        assert main(["export-plot", "--family", str(family), "--out", str(plots),
                     "--samples", "64", "--verify"]) == 0
        arcs = (plots / "arcs.csv").read_text().splitlines()
        assert arcs[0] == "body,seq,u,w,x,y,z"
        assert len(arcs) == 1 + 64
        eps = F(1, 64)
        for row in arcs[1:]:
            _, _, _, _, x, y, z = row.split(",")
            assert abs(Decimal(z) - Decimal(x) * Decimal(y)) <= F(
                eps.numerator, eps.denominator
            )
        surface = (plots / "surface.csv").read_text().splitlines()
        assert surface[0] == "x,y,z"
        assert len(surface) == 1 + 17 * 17
        for row in surface[1:]:
            x, y, z = (Decimal(v) for v in row.split(","))
            assert abs(z - x * y) <= Decimal("1e-9")
        hull = (plots / "hull.csv").read_text().splitlines()
        assert hull[0] == "body,seq,u,w"
        assert len(hull) > 3

    def test_deterministic(self, tmp_path):
        family = construct(tmp_path, count=3)
        for name in ("p1", "p2"):
            assert main(["export-plot", "--family", str(family),
                         "--out", str(tmp_path / name)]) == 0
        for csv in ("arcs.csv", "hull.csv", "surface.csv"):
            assert (tmp_path / "p1" / csv).read_bytes() == (
                tmp_path / "p2" / csv
            ).read_bytes()


class TestPipelineDeterminism:
    def test_full_pipeline_reruns_identically(self, tmp_path):
        artifacts = []
        for tag in ("run1", "run2"):
            d = tmp_path / tag
            d.mkdir()
            family = d / "family.jsonl"
            assert main(["construct", "--delta", "1/2", "-N", "30",
                         "--out", str(family)]) == 0
            witness = d / "witness.json"
            assert main(["witness", "--t", "3", "--family", str(family),
                         "--out", str(witness)]) == 0
            lines = d / "lines.jsonl"
            write_lines(lines, [ruling_line_x(F(1, 2)), ruling_line_y(F(1, 3))])
            report = d / "refute.json"
            assert main(["refute", "--delta", "1/2", "--lines", str(lines),
                         "--out", str(report)]) == 0
            artifacts.append(
                (family.read_bytes(), witness.read_bytes(), report.read_bytes())
            )
        assert artifacts[0] == artifacts[1]
