"""CLI: flags, table formats, exit codes."""

import json

import pytest

from uiptperco.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestProb:
    def test_threshold_value(self, capsys):
        code, out, _ = run_cli(capsys, "prob", "--p", "0.5")
        assert code == 0
        rows = [l for l in out.splitlines() if not l.startswith("#")]
        assert rows[0] == "p,P_infinite_closed"
        assert float(rows[1].split(",")[1]) == 0.0

    def test_full_occupation(self, capsys):
        code, out, _ = run_cli(capsys, "prob", "--p", "1.0")
        rows = [l for l in out.splitlines() if not l.startswith("#")]
        assert float(rows[1].split(",")[1]) == pytest.approx(1.0, abs=1e-12)

    def test_grid_sorted_and_headers(self, capsys):
        code, out, _ = run_cli(capsys, "prob", "--grid", "0.55:0.65:0.05")
        assert code == 0
        meta = [l for l in out.splitlines() if l.startswith("#")]
        assert any("precision_bits" in l for l in meta)
        assert any("series_order" in l for l in meta)
        assert any("quadrature_tol" in l for l in meta)
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        ps = [float(r.split(",")[0]) for r in rows]
        assert ps == sorted(ps)
        assert len(ps) == 3

    def test_json_schema(self, capsys):
        code, out, _ = run_cli(capsys, "--format", "json", "prob", "--p", "0.75")
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert "precision_bits" in doc["config"]
        assert doc["columns"][0] == "p"

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["prob"])
        assert err.value.code == 2

    def test_bad_range_exit_code(self, capsys):
        code, out, errtxt = run_cli(capsys, "prob", "--p", "1.5")
        assert code == 2


class TestCoeffs:
    def test_u_series(self, capsys):
        code, out, _ = run_cli(capsys, "coeffs", "--series", "U", "--order", "3")
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        values = [r.split(",")[1] for r in rows]
        assert values == ["0", "2", "12", "128"]

    def test_t1_series(self, capsys):
        code, out, _ = run_cli(capsys, "coeffs", "--series", "T1", "--order", "3",
                               "--p", "1.0")
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        assert [r.split(",")[1] for r in rows] == ["0", "2", "8", "64"]

    def test_byte_stable_output(self, capsys):
        _, out1, _ = run_cli(capsys, "coeffs", "--series", "Z", "--order", "6")
        _, out2, _ = run_cli(capsys, "coeffs", "--series", "Z", "--order", "6")
        assert out1 == out2


def test_expansions_table(capsys):
    code, out, _ = run_cli(capsys, "--precision-bits", "440", "expansions")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 10
    assert all(float(r.split(",")[4]) < 1e-4 for r in rows)
