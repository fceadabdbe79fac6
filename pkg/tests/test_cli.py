from __future__ import annotations

import csv
import io
import json

import pytest
from mpmath import mpf

from sbrjuno import cli
from sbrjuno.bounds import b_star


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestEval:
    def test_closed_form(self, capsys):
        code, out, _ = run(capsys, "eval", "--sigma", "2", "--point", "[0;(3)]")
        assert code == 0
        fields = dict(line.split("=", 1) for line in out.strip().splitlines())
        assert fields["method"] == "closed-form"
        assert fields["lo"].startswith("2.606555535598739")
        assert fields["lo"][:30] == fields["hi"][:30]

    def test_json(self, capsys):
        code, out, _ = run(capsys, "eval", "--sigma", "1", "--point", "[0; 1, (2)]", "--format", "json")
        assert code == 0 and json.loads(out)["method"] == "closed-form"

    def test_enclosure_with_depth(self, capsys):
        code, out, _ = run(capsys, "eval", "--sigma", "2", "--point", "[0;(3)]", "--depth", "30", "--max-quotient", "3", "--precision", "30")
        assert code == 0 and "method=enclosure" in out

    @pytest.mark.parametrize("point", ["[0; 2, , 3]", "[1; (2)]", "[0; (0)]"])
    def test_malformed_point(self, capsys, point):
        code, _, err = run(capsys, "eval", "--sigma", "2", "--point", point)
        assert code == 64 and "usage error" in err

    def test_rational_point(self, capsys):
        code, out, _ = run(capsys, "eval", "--sigma", "2", "--point", "[0; 2, 3]")
        assert code == 0 and "lo=inf" in out

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["eval", "--sigma", "2"])
        assert exc.value.code == 64

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 64

    def test_low_precision_rejected(self, capsys):
        code, _, _ = run(capsys, "eval", "--sigma", "2", "--point", "[0;(3)]", "--precision", "5")
        assert code == 64

    def test_env_precision(self, capsys, monkeypatch):
        monkeypatch.setenv("BRJUNO_PRECISION", "25")
        _, out, _ = run(capsys, "eval", "--sigma", "2", "--point", "[0;(3)]")
        lo = out.splitlines()[0].split("=")[1]
        assert len(lo.replace(".", "")) == 25


class TestTables:
    def test_sigma_star(self, capsys):
        code, out, _ = run(capsys, "sigma-star", "--n", "2", "--precision", "30")
        rows = read_csv(out)
        assert code == 0 and rows[0] == cli.SIGMA_STAR_COLUMNS
        assert rows[1][1].startswith("1.79951810")

    def test_graph_floor(self, capsys, tmp_path):
        path = tmp_path / "graph.csv"
        code, _, _ = run(capsys, "graph", "--sigma", "1.5", "--grid", "2000", "--depth", "40", "--out", str(path), "--precision", "20")
        rows = read_csv(path.read_text())
        assert code == 0 and rows[0] == cli.GRAPH_COLUMNS and len(rows) == 2001
        floor = b_star(mpf("1.5"), 20)
        assert all(mpf(r[2]) >= floor for r in rows[1:])

    def test_bounds(self, capsys):
        code, out, _ = run(capsys, "bounds", "--sigma", "2", "--grid", "20", "--precision", "20")
        rows = read_csv(out)
        assert code == 0 and rows[0] == cli.BOUNDS_COLUMNS and len(rows) == 21
        assert all(mpf(r[3]) >= mpf(r[1]) * (1 - mpf(10) ** -15) for r in rows[1:])

    def test_phase(self, capsys):
        code, out, _ = run(capsys, "phase", "--sigma-lo", "1", "--sigma-hi", "3", "--steps", "3", "--max-quotient", "8", "--net-points", "500", "--precision", "20")
        rows = read_csv(out)
        assert code == 0 and rows[0] == cli.PHASE_COLUMNS
        assert [r[1] for r in rows[1:]] == ["[0; (2)]", "[0; (3)]", "[0; (4)]"]

    def test_scaling(self, capsys, tmp_path):
        summary = tmp_path / "s.json"
        code, out, _ = run(capsys, "scaling", "--n", "2", "--steps", "12", "--summary", str(summary), "--precision", "30")
        rows = read_csv(out)
        assert code == 0 and rows[0] == cli.SCALING_COLUMNS and len(rows) == 13
        assert 0.45 <= json.loads(summary.read_text())["tau_hat"] <= 0.55

    def test_scaling_rational_inconclusive(self, capsys):
        code, _, err = run(capsys, "scaling", "--n", "2", "--mode", "rational", "--precision", "30")
        assert code == 2 and "tau_hat" in err


class TestCertificates:
    def test_localize(self, capsys):
        code, out, _ = run(capsys, "localize", "--n", "2", "--sigma", "2", "--precision", "30")
        assert code == 0 and json.loads(out)["passed"] is True

    def test_verify_contraction(self, capsys):
        code, out, _ = run(capsys, "verify", "contraction")
        assert code == 0 and json.loads(out)["status"] == "certified"

    def test_verify_contraction_limit_one(self, capsys):
        code, out, _ = run(capsys, "verify", "contraction", "--subdivision-limit", "1")
        assert code == 2 and json.loads(out)["status"] == "inconclusive"

    def test_verify_w_positive(self, capsys):
        code, out, _ = run(capsys, "verify", "w-positive", "--n-lo", "2", "--n-hi", "50")
        assert code == 0 and json.loads(out)["failures"] == []


class TestContract:
    def test_deterministic_across_threads(self, capsys):
        args = ["phase", "--sigma-lo", "0.9", "--sigma-hi", "2.1", "--steps", "5", "--max-quotient", "6", "--net-points", "300", "--precision", "25"]
        _, one, _ = run(capsys, *args, "--threads", "1")
        _, two, _ = run(capsys, *args, "--threads", "3")
        _, again, _ = run(capsys, *args, "--threads", "1")
        assert one == two == again

    @pytest.mark.parametrize(
        "command, columns, extra",
        [
            ("graph", cli.GRAPH_COLUMNS, ["--sigma", "2", "--grid", "3"]),
            ("bounds", cli.BOUNDS_COLUMNS, ["--sigma", "2", "--grid", "3"]),
            ("phase", cli.PHASE_COLUMNS, ["--steps", "2", "--max-quotient", "3", "--net-points", "0"]),
            ("sigma-star", cli.SIGMA_STAR_COLUMNS, ["--n", "3"]),
            ("scaling", cli.SCALING_COLUMNS, ["--n", "3"]),
        ],
    )
    def test_help_matches_header(self, capsys, command, columns, extra):
        with pytest.raises(SystemExit):
            cli.main([command, "--help"])
        help_text, _ = capsys.readouterr()
        assert ",".join(columns) in help_text.replace("\n", " ").replace(", ", ",")
        code, out, _ = run(capsys, command, *extra, "--precision", "20")
        assert code == 0
        assert read_csv(out)[0] == columns
