import json

import pytest
from typer.testing import CliRunner

from backend.exact_linalg import matrix_from_json, matrix_to_json, to_matrix
from backend.link_patterns import eolp_to_json
from backend.main import app

runner = CliRunner()


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _run(*args):
    return runner.invoke(app, list(args))


def test_orbits_lists_every_pattern():
    result = _run("orbits", "--blocks", "1,1,1")
    assert result.exit_code == 0
    rows = json.loads(result.stdout)
    assert len(rows) == 7
    assert {"pattern", "eolp", "dim"} <= set(rows[0])


def test_finiteness_names_witness():
    result = _run("finiteness", "--blocks", "1,1,1", "--nilpotency", "3")
    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["finite"] is False
    assert payload["witness"] == "D"


def test_leq_from_pattern_files(tmp_path, pattern, blocks21):
    a = _write(tmp_path, "a.json", eolp_to_json(pattern("U11 + V2", blocks21), blocks21))
    b = _write(tmp_path, "b.json", eolp_to_json(pattern("U12 + V1", blocks21), blocks21))
    result = _run("leq", "--blocks", "2,1", "--a", a, "--b", b)
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"leq": True}


def test_leq_rejects_foreign_blocks(tmp_path, pattern, blocks21):
    a = _write(tmp_path, "a.json", eolp_to_json(pattern("U11 + V2", blocks21), blocks21))
    result = _run("leq", "--blocks", "1,2", "--a", a, "--b", a)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "PreconditionError"


def test_hasse_dot():
    result = _run("hasse", "--blocks", "2,1", "--format", "dot")
    assert result.exit_code == 0
    assert result.stdout.count("[label=") == 4
    assert result.stdout.count(" -> ") == 3


def test_hasse_unknown_format():
    result = _run("hasse", "--blocks", "2,1", "--format", "svg")
    assert result.exit_code == 2


def test_error_payload_and_exit_code():
    result = _run("finiteness", "--blocks", "1,1", "--nilpotency", "5")
    assert result.exit_code == 1
    payload = json.loads(result.stdout)
    assert payload["error"] == "PreconditionError"
    assert "x=5" in payload["message"]


def test_bad_blocks_exit_code():
    result = _run("orbits", "--blocks", "1,x")
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "InvalidBlocksError"


def test_missing_option_is_usage_error():
    assert _run("orbits").exit_code == 2


def test_classify_and_normal_form(tmp_path):
    lower = _write(tmp_path, "n.json", matrix_to_json(to_matrix([[0, 0], [1, 0]])))
    result = _run("classify", "--blocks", "1,1", "--matrix", lower)
    assert result.exit_code == 0
    assert json.loads(result.stdout)["arrows"] == [{"from": 1, "to": 2, "mult": 1}]
    example = _write(tmp_path, "ex.json", matrix_to_json(to_matrix([[2, -4], [1, -2]])))
    result = _run("u-normal-form", "--matrix", example)
    assert result.exit_code == 0
    assert matrix_from_json(json.loads(result.stdout)["H"]) == to_matrix([[0, 0], [1, 0]])


def test_normal_form_rejects_non_generic(tmp_path):
    path = _write(tmp_path, "n.json", matrix_to_json(to_matrix([[0, 1], [0, 0]])))
    result = _run("normal-form", "--blocks", "1,1", "--matrix", path)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "NotGenericError"


def test_witness_command():
    result = _run("witness", "--kind", "D", "--n", "3", "--nilpotency", "3", "--lam", "2")
    assert result.exit_code == 0
    assert matrix_from_json(json.loads(result.stdout)) == to_matrix([[0, 0, 0], [1, 0, 0], [2, 1, 0]])
    assert _run("witness", "--kind", "Z", "--n", "3", "--nilpotency", "3").exit_code == 2


def test_invariant_weight_builtin(tmp_path):
    datum = _write(tmp_path, "d.json", {"builtin": "det_i", "n": 4, "indices": [2]})
    result = _run("invariant-weight", "--datum", datum)
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"weight": [-1, -1, 1, 1]}


def test_invariant_eval(tmp_path):
    datum = _write(tmp_path, "d.json", {"builtin": "utwo_f21", "n": 2})
    matrix = _write(tmp_path, "n.json", matrix_to_json(to_matrix([[2, -4], [1, -2]])))
    result = _run("invariant-eval", "--datum", datum, "--matrix", matrix)
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"value": "1"}


def test_explicit_datum_needs_size(tmp_path):
    datum = _write(tmp_path, "d.json", {"a": [1], "a_prime": [1], "polys": [[[0, 1]]]})
    result = _run("invariant-weight", "--datum", datum)
    assert result.exit_code == 1
    assert _run("invariant-weight", "--datum", datum, "--size", "3").exit_code == 0


def test_conjugate_test_command(tmp_path):
    a = _write(tmp_path, "a.json", matrix_to_json(to_matrix([[0, 1], [0, 0]])))
    b = _write(tmp_path, "b.json", matrix_to_json(to_matrix([[0, 0], [1, 0]])))
    result = _run("conjugate-test", "--blocks", "1,1", "--a", a, "--b", b)
    assert result.exit_code == 0
    assert json.loads(result.stdout)["answer"] == "no"


def test_minimality_command():
    result = _run("minimality", "--blocks", "2,1", "--d", "U21", "--d-prime", "U12", "--w", "V1")
    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["is_cover"] is False
    assert payload["hom_difference_criterion"] is False


@pytest.mark.parametrize("n", [3, 4])
def test_toric_check_command(tmp_path, n):
    datum = _write(tmp_path, "d.json", {"builtin": "f_i", "n": n, "indices": [1]})
    result = _run("toric-check", "--datum", datum, "--seed", "1", "--trials", "3")
    assert result.exit_code == 0
    payload = json.loads(result.stdout)
    assert payload["toric"] is True
    assert payload["exponents"]["matches"] is True


def test_selftest_passes():
    result = _run("selftest", "--seed", "0")
    assert result.exit_code == 0
    assert all(suite["failed"] == 0 for suite in json.loads(result.stdout)["suites"])


@pytest.mark.parametrize("entries", [[["abc", 0], [1, 0]], [["1/0", 0], [1, 0]], [[1.5, 0], [1, 0]]])
def test_classify_rejects_inexact_entries(tmp_path, entries):
    path = _write(tmp_path, "n.json", {"rows": 2, "cols": 2, "entries": entries})
    result = _run("classify", "--blocks", "1,1", "--matrix", path)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "ShapeError"


def test_classify_rejects_non_list_row(tmp_path):
    path = _write(tmp_path, "n.json", {"rows": 2, "cols": 1, "entries": [[5], 5]})
    result = _run("classify", "--blocks", "1,1", "--matrix", path)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "ShapeError"


def test_builtin_datum_with_bad_size(tmp_path):
    datum = _write(tmp_path, "d.json", {"builtin": "f_i", "n": "four", "indices": [1]})
    result = _run("invariant-weight", "--datum", datum)
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"] == "MalformedInputError"


def test_pretty_output_for_json_commands(tmp_path, pattern, blocks21):
    a = _write(tmp_path, "a.json", eolp_to_json(pattern("U11 + V2", blocks21), blocks21))
    n = _write(tmp_path, "n.json", matrix_to_json(to_matrix([[0, 0], [1, 0]])))
    for args in (["leq", "--blocks", "2,1", "--a", a, "--b", a],
                 ["hasse", "--blocks", "2,1"],
                 ["finiteness", "--blocks", "1,1,1", "--nilpotency", "3"],
                 ["conjugate-test", "--blocks", "1,1", "--a", n, "--b", n]):
        result = _run(*args, "--pretty")
        assert result.exit_code == 0, args
        assert result.stdout.strip()
