import json
import math

import pytest

from hingelab import jsonio
from hingelab.cli import run


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def ex15_path_payload():
    ident = {"rows": 2, "cols": 2, "data": [["1", "0"], ["0", "1"]]}
    return {"g1": ident, "lambda": ["1", "0"], "g2": ident}


def ex38_payload():
    return {
        "k": 1,
        "l": 8,
        "polys": [
            ["0", "0", "0", "2"], ["0", "0", "0", "1"],
            ["2", "1", "1"], ["1", "1", "1"], ["0", "1", "1"],
            ["0", "2"], ["0", "1"], ["0"],
        ],
    }


def incident_flags_payload():
    return {
        "p": {
            "velocity": {"n": 3, "mu": ["0"]},
            "flag": {"ambient": 3,
                     "subspaces": [{"ambient": 3, "basis": [["1", "2", "0"]]}]},
        },
        "q": {
            "velocity": {"n": 3, "mu": ["1"]},
            "flag": {"ambient": 3,
                     "subspaces": [{"ambient": 3,
                                    "basis": [["1", "2", "0"],
                                              ["0", "0", "1"]]}]},
        },
    }


def test_hinge_limit_example(tmp_path):
    path = write(tmp_path, "path.json", ex15_path_payload())
    code, out = run(["hinge", "limit", "--in", path])
    assert code == 0
    obj = json.loads(out)
    assert obj["n"] == 2
    assert obj["components"][0]["basis"] == [["1", "0", "1", "0"],
                                             ["0", "1", "0", "0"]]
    assert obj["components"][1]["basis"] == [["0", "1", "0", "1"],
                                             ["0", "0", "1", "0"]]


def test_velocity_karpelevich_example(tmp_path):
    path = write(tmp_path, "ex38.json", ex38_payload())
    code, out = run(["velocity", "karpelevich", "--in", path])
    assert code == 0
    obj = json.loads(out)
    root = obj["root"]
    assert root["interval"] == [1, 8]
    assert root["simplex"] == ["1", "1/2", "0"]
    sub = root["children"][2]
    assert sub["interval"] == [3, 8] and sub["simplex"] == ["1", "0"]
    assert sub["children"][0]["cone"] == ["2", "1", "0"]
    assert sub["children"][1]["simplex"] == ["1", "1/2", "0"]


def test_sky_tits_example(tmp_path):
    path = write(tmp_path, "flags.json", incident_flags_payload())
    code, out = run(["sky", "tits", "--in", path, "--format", "text"])
    assert code == 0
    assert out.strip() == "1.0471975512"
    code, out_json = run(["sky", "tits", "--in", path])
    assert json.loads(out_json)["distance"] == pytest.approx(math.pi / 3)


def test_cli_determinism(tmp_path):
    cases = [
        (["hinge", "limit"], write(tmp_path, "p.json", ex15_path_payload())),
        (["velocity", "karpelevich"], write(tmp_path, "e.json",
                                            ex38_payload())),
        (["sky", "tits"], write(tmp_path, "f.json",
                                incident_flags_payload())),
    ]
    for argv, path in cases:
        code1, out1 = run(argv + ["--in", path])
        code2, out2 = run(argv + ["--in", path])
        assert code1 == code2 == 0
        assert out1 == out2


def test_cli_output_roundtrips(tmp_path):
    path = write(tmp_path, "p.json", ex15_path_payload())
    _, out = run(["hinge", "limit", "--in", path])
    hinge_obj = json.loads(out)
    jsonio.decode_hinge(hinge_obj)            # parses and validates
    path38 = write(tmp_path, "e.json", ex38_payload())
    _, out38 = run(["velocity", "karpelevich", "--in", path38])
    jsonio.decode_karpelevich_point(json.loads(out38))


def test_cli_error_codes(tmp_path):
    # unknown action
    code, _ = run(["hinge", "frobnicate"])
    assert code == 2
    # schema error
    bad = write(tmp_path, "bad.json", {"nonsense": 1})
    code, _ = run(["hinge", "limit", "--in", bad])
    assert code == 2
    # domain error: condition failure surfaces as exit 1
    singular = write(tmp_path, "sing.json", {
        "n": 2,
        "components": [
            {"ambient": 4, "n": 2,
             "basis": [["1", "0", "1", "0"], ["0", "1", "0", "0"]]},
        ],
    })
    code, _ = run(["hinge", "validate", "--in", singular])
    assert code == 1
    # unreadable file
    code, _ = run(["hinge", "limit", "--in", str(tmp_path / "missing.json")])
    assert code == 2


def test_cli_named_condition(tmp_path, capsys):
    payload = {
        "n": 2,
        "components": [
            {"ambient": 4,
             "basis": [["1", "0", "0", "0"], ["0", "1", "0", "0"]]},
        ],
    }
    path = write(tmp_path, "q.json", payload)
    code, _ = run(["hinge", "validate", "--in", path])
    captured = capsys.readouterr()
    assert code == 1
    assert "hinge condition 0" in captured.err


def test_cli_exact_flag(tmp_path):
    floaty = write(tmp_path, "f.json", {
        "g1": {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 1.0]]},
        "lambda": ["1", "0"],
        "g2": {"rows": 2, "cols": 2, "data": [["1", "0"], ["0", "1"]]},
    })
    code, _ = run(["hinge", "limit", "--in", floaty, "--exact"])
    assert code == 2
    code, _ = run(["hinge", "limit", "--in", floaty])
    assert code == 0


def test_cli_out_file_and_formats(tmp_path):
    path = write(tmp_path, "p.json", ex15_path_payload())
    target = tmp_path / "out.json"
    code, out = run(["hinge", "limit", "--in", path, "--out", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["n"] == 2
    code, text = run(["hinge", "limit", "--in", path, "--format", "text"])
    assert code == 0 and "hinge" in text
    # dot only for graph actions
    code, _ = run(["hinge", "limit", "--in", path, "--format", "dot"])
    assert code == 2
    graph_in = write(tmp_path, "g.json", {"seed": 1, "n_lines": 3})
    code, dot = run(["sky", "graph", "--in", graph_in, "--format", "dot"])
    assert code == 0 and dot.startswith("graph incidence {")


def test_cli_env_tolerance(tmp_path, monkeypatch):
    monkeypatch.setenv("HINGELAB_TOL", "1e-7")
    path = write(tmp_path, "p.json", ex15_path_payload())
    code, _ = run(["hinge", "limit", "--in", path])
    assert code == 0


def test_cli_velocity_simple_bounded(tmp_path):
    bounded = write(tmp_path, "b.json",
                    {"k": 1, "l": 3, "polys": [["5"], ["3"], ["0"]]})
    code, out = run(["velocity", "simple", "--in", bounded])
    assert code == 0 and json.loads(out) == {"bounded": True}
