import json

import numpy as np
import pytest

from kronbound import catalog as cat
from kronbound.cli import main
from kronbound.fileio import read_tensor, write_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(text: str) -> str:
    return "\n".join(l for l in text.splitlines() if not l.startswith("wall_time"))


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0
    assert "cw" in out and "generic5" in out


def test_catalog_emit_parses_back(capsys):
    code, out, _ = run(capsys, "catalog", "emit", "cw", "--q", "3")
    assert code == 0
    tensor_text = out[out.index("tensor "):]
    T = read_tensor(tensor_text)
    assert T == cat.build("cw", q=3)


def test_omega_json(capsys):
    code, out, _ = run(capsys, "omega", "--q", "8", "--k", "1", "--br", "10", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["results"]["omega_bound"] == "2.40363226083287283308324715221"
    assert data["citations"] == ["cw-laser-bound"]


@pytest.mark.parametrize(
    "argv",
    [
        ("lowerbound", "--tensor", "cw", "--q", "5", "--p", "1", "--restriction", "phi2"),
        ("reproduce", "skew", "--q", "4"),
        ("power-lower", "--q", "5", "--N", "2"),
        ("symmetry", "--tensor", "cw", "--q", "3"),
    ],
)
def test_rerun_is_byte_identical(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert body(first) == body(second)
    assert first.rstrip().splitlines()[-1].startswith("wall_time:")


def test_lowerbound_from_restriction_file(capsys, tmp_path):
    P = cat.build_projection("phi2", 5, variant=1)
    f = tmp_path / "phi2.txt"
    f.write_text(write_matrix(P.entries), encoding="utf-8")
    _, named, _ = run(capsys, "lowerbound", "--tensor", "cw", "--q", "5", "--p", "1", "--restriction", "phi2")
    code, from_file, _ = run(capsys, "lowerbound", "--tensor", "cw", "--q", "5", "--p", "1", "--restriction", str(f))
    assert code == 0
    pick = lambda s: [l for l in s.splitlines() if l.startswith(("result.rank", "result.bound"))]
    assert pick(named) == pick(from_file)


def test_out_directory(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "emit", "det3", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "catalog.report").read_text() == out
    T = read_tensor((tmp_path / "catalog.out").read_text())
    assert T.dims == (9, 9, 9)


def test_verify_builtin_waring(capsys):
    code, out, _ = run(capsys, "verify-decomp", "--tensor", "det3", "--decomp", "published-waring18")
    assert code == 0
    assert "result.verified: True" in out


def test_reproduction_mismatch_exits_1(capsys):
    code, out, _ = run(capsys, "reproduce", "curve17")
    assert code == 1
    assert "status: FAIL" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("lowerbound", "--tensor", "nosuchtensor", "--p", "1"),
        ("lowerbound", "--tensor", "cw", "--q", "5", "--p", "2", "--restriction", "phi2"),
        ("omega", "--q", "8", "--k", "1", "--br", "not-a-number"),
    ],
)
def test_bad_input_exits_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("kronbound ")


def test_argparse_rejects_unknown_target(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "nothing"])
    assert exc.value.code == 2
