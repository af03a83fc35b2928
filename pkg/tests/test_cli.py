import io
import json

import pytest

from kleindouble.cli import RunConfig, UsageError, main, run
from kleindouble.matrix import Matrix
from kleindouble.surface import SurfaceSpec, complex_double
from kleindouble.words import Word


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_jacobian_g3(capsys):
    code, out, _ = call(capsys, "jacobian", "--genus", "3")
    assert code == 0
    assert json.loads(out)["component_count"] == 1


def test_jacobian_g4(capsys):
    code, out, _ = call(capsys, "jacobian", "--genus", "4")
    rep = json.loads(out)
    assert code == 0 and rep["component_count"] == 2


def test_torelli_reversing_g3(capsys):
    code, out, _ = call(capsys, "torelli", "--genus", "3", "--orientation", "-1")
    rep = json.loads(out)
    assert code == 0
    sigma = complex_double(SurfaceSpec(3)).sigma_matrix
    assert [Matrix.from_json(m) for m in rep["solutions"]] == [sigma]
    assert "trace" not in rep


def test_torelli_trace_and_oracle(capsys):
    code, out, _ = call(capsys, "torelli", "--genus", "3", "--trace", "--bound", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["oracle"]["agrees"] is True
    assert any(line.startswith("derived: ") for line in rep["trace"])


def test_torelli_text_proof_log(capsys):
    code, out, _ = call(capsys, "torelli", "--genus", "3", "--trace", "--format", "text")
    assert code == 0
    derived = [line for line in out.splitlines() if line.startswith("derived:")]
    assert derived and all(" => " in line for line in derived)


def test_double_round_trip(capsys):
    code, out, _ = call(capsys, "double", "--genus", "4", "--variant", "gamma-delta")
    rep = json.loads(out)
    cd = complex_double(SurfaceSpec(4, "gamma-delta"))
    assert code == 0
    assert Matrix.from_json(rep["sigma_matrix"]) == cd.sigma_matrix
    assert Matrix.from_json(rep["pi_matrix"]) == cd.pi_matrix
    assert Matrix.from_json(rep["intersection"]) == cd.intersection
    assert rep["basisBc"] == [str(s) for s in cd.basisBc]
    assert list(rep["sigma_words"]) == rep["basisBc"]
    for s in cd.basisBc:
        assert Word.from_json(rep["sigma_words"][str(s)]) == cd.sigma_words[s]
    assert Word.from_json(rep["double"]["relators"][0]) == cd.double.relators[0]


def test_output_is_deterministic(capsys):
    _, first, _ = call(capsys, "double", "--genus", "5")
    _, second, _ = call(capsys, "double", "--genus", "5")
    assert first == second


@pytest.mark.parametrize("g", range(3, 11))
def test_verify(capsys, g):
    code, out, _ = call(capsys, "verify", "--genus", str(g))
    rep = json.loads(out)
    assert code == 0
    assert all(c["passed"] for c in rep["checks"])


def test_verify_gamma_delta_text(capsys):
    code, out, _ = call(capsys, "verify", "--genus", "6", "--variant", "gamma-delta", "--format", "text")
    assert code == 0
    assert out.count("PASS") == len(out.strip().splitlines())


def test_matrix_files(tmp_path, capsys):
    a = tmp_path / "A.txt"
    y = tmp_path / "Y.txt"
    a.write_text("0 0\n0 0\n")
    y.write_text("2 1\n1 2\n")
    code, out, _ = call(capsys, "jacobian", "--genus", "3", "--A", str(a), "--Y", str(y))
    assert code == 0
    assert json.loads(out)["component_count"] == 4


def test_bad_y_is_usage_error(tmp_path, capsys):
    y = tmp_path / "Y.txt"
    y.write_text("1 2\n2 1\n")
    code, _, err = call(capsys, "jacobian", "--genus", "3", "--Y", str(y))
    assert code == 2 and "positive definite" in err


@pytest.mark.parametrize("argv", [
    ["verify", "--genus", "2"],
    ["jacobian"],
    ["nonsense", "--genus", "3"],
    ["torelli", "--genus", "3", "--orientation", "2"],
    ["torelli", "--genus", "3", "--bound", "0"],
    ["double", "--genus", "3", "--variant", "cc-dd"],
    ["jacobian", "--genus", "3", "--A", "/nonexistent/file"],
])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert err


def test_enumeration_cap(monkeypatch, capsys):
    monkeypatch.setenv("KD_MAX_ENUM", "5")
    code, _, err = call(capsys, "torelli", "--genus", "4", "--bound", "2")
    assert code == 1 and "exceeded" in err


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("verify", 3, bound=0)
    buf = io.StringIO()
    assert run(RunConfig("jacobian", 5, format="text"), out=buf) == 0
    assert "component_count: 1" in buf.getvalue()
