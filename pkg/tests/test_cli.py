import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from errtradeoff import io as tio
from errtradeoff.cli import bundled, main
from errtradeoff.errors import NotHermitian, ParseError, ValidationError


def _csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestIO:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert float(tio.fmt_float(x)) == x

    def test_complex_entries(self):
        m = tio.parse_matrix([[0, [0, -1]], [[0, 1], 0]])
        assert np.array_equal(m, np.array([[0, -1j], [1j, 0]]))

    def test_observable_object_form(self):
        obs = tio.parse_observable({"dim": 2, "matrix": [[1, 0], [0, -1]]})
        assert obs.dim == 2

    def test_observable_dim_mismatch(self):
        with pytest.raises(ValidationError):
            tio.parse_observable({"dim": 3, "matrix": [[1, 0], [0, -1]]})

    def test_state_forms(self):
        assert tio.parse_state({"pure": [1, 0]}).is_pure
        assert not tio.parse_state({"density": [[0.5, 0], [0, 0.5]]}).is_pure
        with pytest.raises(ValidationError):
            tio.parse_state({"pure": [1, 0], "density": [[1, 0], [0, 0]]})

    def test_bad_entry(self):
        with pytest.raises(ValidationError):
            tio.parse_vector([1, "a"])

    def test_non_hermitian_names_file(self, tmp_path):
        p = tmp_path / "nh.json"
        p.write_text(json.dumps({"A": [[0, 1], [0, 0]], "B": [[1, 0], [0, -1]], "state": {"pure": [1, 0]}}))
        with pytest.raises(NotHermitian, match="nh.json"):
            tio.load_problem(p)

    def test_malformed_names_file(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(ParseError, match="broken.json"):
            tio.load_json(p)

    def test_dumps_uses_17_digits(self):
        text = tio.dumps({"x": 0.1, "z": 1 + 2j, "flag": True, "none": None})
        doc = json.loads(text)
        assert doc == {"x": 0.1, "z": [1, 2], "flag": True, "none": None}
        assert "0.10000000000000001" in text


class TestCommands:
    def test_analyze_axis_point(self, tmp_path, capsys):
        out = tmp_path / "a.json"
        assert main(["analyze", "--input", str(bundled("qubit_axis.json")), "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["verdicts"]["PNAS"]["saturated"] is True
        assert doc["verdicts"]["OZAWA"]["saturated"] is True
        assert set(doc["stats"]) == {"epsA", "epsB", "stdEstA", "stdEstB", "biasA", "biasB", "meanEstA", "meanEstB"}

    def test_analyze_relation_selection(self, capsys):
        assert main(["analyze", "--input", str(bundled("qubit_axis.json")), "--relation", "PNAS,HALL"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert list(doc["verdicts"]) == ["PNAS", "HALL"]

    def test_analyze_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"A": [[0, 1], [1, 0]]')
        assert main(["analyze", "--input", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "ParseError" in err and "bad.json" in err

    def test_missing_input(self, capsys):
        assert main(["analyze"]) == 2
        assert main(["scan", "--input", "/nonexistent/file.json"]) == 2

    def test_bad_tol(self, capsys):
        assert main(["qubit-example", "--tol", "0"]) == 2

    def test_unknown_relation(self, capsys):
        assert main(["analyze", "--input", str(bundled("qubit_axis.json")), "--relation", "NOPE"]) == 2

    def test_verify_bundled_suite(self, tmp_path):
        out = tmp_path / "v.csv"
        assert main(["verify", "--tol", "1e-9", "--output", str(out)]) == 0
        rows = _csv(out)
        assert rows[0] == ["kind", "phi_param", "side", "epsA", "epsB", "residual", "comm_norm", "max_target_err"]
        assert max(abs(float(r[5])) for r in rows[1:]) <= 1e-9

    def test_verify_reports_failure(self, tmp_path):
        # an absurdly small tolerance cannot be met by rounding-level residuals
        assert main(["verify", "--tol", "1e-30", "--samples", "1", "--phi-steps", "5", "--output", str(tmp_path / "v.csv")]) == 1

    def test_frontier_with_bounds(self, tmp_path):
        out = tmp_path / "f.csv"
        args = ["frontier", "--input", str(bundled("qutrit_random.json")), "--relation", "F", "--side", "upper"]
        assert main(args + ["--phi-steps", "9", "--output", str(out)]) == 0
        rows = _csv(out)
        assert rows[0] == ["phi_param", "uA", "uB", "epsA", "epsB", "residual"]
        assert len(rows) == 10
        assert all(abs(float(r[5])) <= 1e-9 for r in rows[1:])
        bounds = _csv(tmp_path / "f.bounds.csv")
        assert bounds[0] == ["epsA", "ozawa_epsB", "hall_epsB", "weston_epsB"]
        # the constructed points respect every historical bound
        for fr, br in zip(rows[1:], bounds[1:]):
            assert all(float(fr[4]) >= float(b) - 1e-9 for b in br[1:])

    def test_scan_csv(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["scan", "--input", str(bundled("qubit_f_targets.json")), "--samples", "50", "--seed", "3", "--output", str(out)]) == 0
        rows = _csv(out)
        assert rows[0] == ["source", "phi_param", "epsA", "epsB", "violation"]
        assert len(rows) == 51 and all(r[0] == "RANDOM_SCAN" for r in rows[1:])

    def test_mixed_csv(self, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["mixed", "--input", str(bundled("qubit_mixed.json")), "--output", str(out)]) == 0
        rows = _csv(out)
        assert rows[0] == ["source", "phi_param", "epsA", "epsB", "violation"]
        assert len(rows) == 722
        assert max(abs(float(r[2]) ** 2 + float(r[3]) ** 2 - 1) for r in rows[1:]) <= 1e-6

    def test_mixed_rejects_wrong_decomposition(self, tmp_path, capsys):
        doc = json.loads(bundled("qubit_mixed.json").read_text())
        doc["decomposition"]["weights"] = [0.9, 0.1]
        p = tmp_path / "wrong.json"
        p.write_text(json.dumps(doc))
        assert main(["mixed", "--input", str(p)]) == 2

    def test_qubit_example(self, capsys):
        assert main(["qubit-example"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["C_AB_ket0"] - 1) <= 1e-12
        assert doc["necessary_bound_only"] is True

    def test_bell_bundle(self, capsys):
        assert main(["analyze", "--input", str(bundled("bell_purification.json")), "--relation", "PNAS"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["stats"]["epsA"] <= 1e-12 and doc["stats"]["epsB"] <= 1e-12

    @pytest.mark.parametrize(
        "args",
        [
            ["scan", "--input", "@qubit_f_targets.json", "--samples", "30", "--seed", "5"],
            ["frontier", "--input", "@qutrit_random.json", "--phi-steps", "7"],
            ["mixed", "--input", "@qubit_biased_mixed.json", "--phi-steps", "31", "--lambda-steps", "21"],
        ],
    )
    def test_byte_identical_reruns(self, args, tmp_path):
        args = [str(bundled(a[1:])) if a.startswith("@") else a for a in args]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
