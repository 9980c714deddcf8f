import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_gbdt.cli import main, parse_grid
from dirac_gbdt.io import (
    CSV_HEADER,
    dumps_triple,
    load_triple,
    loads_triple,
    save_triple,
    triple_digest,
    write_csv_rows,
)
from dirac_gbdt.triples import Signature, SystemKind, generate


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_canonical_text(t1):
    text = dumps_triple(t1)
    assert text == ('{"kind":"self_adjoint","n":1,"m1":1,"m2":1,"A":[[[0.0,2.0]]],'
                    '"S0":[[[0.75,0.0]]],"Pi0":[[[2.0,0.0],[1.0,0.0]]]}\n')
    assert len(triple_digest(t1)) == 64


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(list(SystemKind)), n=st.integers(1, 5))
def test_json_roundtrip_is_byte_identical(seed, kind, n):
    t = generate(kind, n, Signature(1 + seed % 3, 1 + seed % 2), seed=seed)
    text = dumps_triple(t)
    u = loads_triple(text)
    assert dumps_triple(u) == text
    for name in ("A", "S0", "Pi0"):
        assert np.array_equal(getattr(u, name), getattr(t, name))


def test_file_roundtrip(tmp_path, t2):
    p = tmp_path / "t.json"
    save_triple(t2, p)
    q = tmp_path / "u.json"
    save_triple(load_triple(p), q)
    assert p.read_bytes() == q.read_bytes()


@pytest.mark.parametrize("text", [
    "{", "[]", '{"kind":"sa"}', '{"kind":"nope","n":1,"m1":1,"m2":1,"A":[],"S0":[],"Pi0":[]}',
    '{"kind":"skew","n":1,"m1":1,"m2":1,"A":[[[0,2]]],"S0":[[[1,0]]],"Pi0":[[[1,0]]]}',
])
def test_malformed_documents(text):
    with pytest.raises(ValueError):
        loads_triple(text)


def test_write_csv_rows_order():
    fh = io.StringIO()
    M = np.array([[1 + 2j, 3.0], [4.0, 5.0]])
    count = write_csv_rows(fh, [("x", 0, None, M), ("x", 1, 0.5 - 1j, M[:1, :1])])
    rows = list(csv.reader(io.StringIO(fh.getvalue())))
    assert count == 5
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1] == ["x", "0", "", "", "0", "0", "1.0", "2.0"]
    assert [r[4:6] for r in rows[1:5]] == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
    assert rows[5][1:4] == ["1", "0.5", "-1.0"]


def test_parse_grid():
    assert len(parse_grid("real:-5:5:101").points()) == 101
    pts = parse_grid("imag:2:10:9").points()
    assert pts[0] == 2j and pts[-1] == 10j
    pts = parse_grid("rect:-1:1:3:0:2:2").points()
    assert len(pts) == 6 and pts[0] == -1 + 0j and pts[-1] == 1 + 2j


@pytest.mark.parametrize("bad", ["real:1:0:5", "real:0:1:0", "circle:0:1:3", "real:a:1:3",
                                 "real:0:1:1"])
def test_parse_grid_rejects(tmp_path, t1, bad):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    assert main(["eval", str(p), "--what", "reflection", "--grid", bad, "-o",
                 str(tmp_path / "o.csv")]) == 2


def test_gen_and_verify(tmp_path, capsys):
    p = tmp_path / "t.json"
    assert main(["gen", "--kind", "sa", "--n", "2", "--m1", "1", "--m2", "1", "--seed", "7",
                 "-o", str(p)]) == 0
    r = tmp_path / "r.json"
    assert main(["verify", str(p), "--kmax", "40", "--tol", "1e-7", "-o", str(r)]) == 0
    report = json.loads(r.read_text())
    assert set(report) == {"version", "triple_sha256", "checks", "pass", "seconds"}
    assert report["pass"] is True
    assert report["pass"] == all(c["pass"] for c in report["checks"])
    assert report["triple_sha256"] == triple_digest(load_triple(p))
    assert capsys.readouterr().out == ""


def test_verify_fixtures(tmp_path, t1, t2):
    for name, t in (("t1", t1), ("t2", t2)):
        p = tmp_path / f"{name}.json"
        save_triple(t, p)
        r = tmp_path / f"{name}_report.json"
        assert main(["verify", str(p), "-o", str(r)]) == 0
        checks = {c["name"]: c for c in json.loads(r.read_text())["checks"]}
        assert checks["reflection_oracle_vs_closed"]["pass"]
        if name == "t2":
            assert checks["skew_reflection_corrected_form_matches_oracle"]["pass"]
            assert checks["skew_reflection_literal_form_gap"]["value"] > 1e-3


def test_verify_failure_exit_code(tmp_path, capsys):
    from dirac_gbdt.triples import ParameterTriple
    t = ParameterTriple(SystemKind.SELF_ADJOINT, Signature(1, 1), np.array([[1j]]),
                        np.array([[1.5]]), np.array([[2.0, 1.0]]))
    p = tmp_path / "t.json"
    save_triple(t, p)
    r = tmp_path / "r.json"
    assert main(["verify", str(p), "-o", str(r)]) == 1
    assert json.loads(r.read_text())["pass"] is False
    assert "strongly_admissible" in capsys.readouterr().err


def test_quiet_false_prints_progress(tmp_path, capsys, t1):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    assert main(["verify", str(p), "--quiet=false"]) == 0
    assert "reflection_oracle_vs_closed" in capsys.readouterr().out


def test_env_tolerance(tmp_path, monkeypatch, t1):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    r = tmp_path / "r.json"
    monkeypatch.setenv("DIRAC_GBDT_TOL", "1e-6")
    assert main(["verify", str(p), "-o", str(r)]) == 0
    checks = {c["name"]: c for c in json.loads(r.read_text())["checks"]}
    assert checks["reflection_oracle_vs_closed"]["tol"] == 1e-6
    monkeypatch.setenv("DIRAC_GBDT_TOL", "abc")
    assert main(["verify", str(p)]) == 2


def test_usage_and_io_errors(tmp_path):
    out = str(tmp_path / "x.json")
    assert main(["gen", "--kind", "sa", "--n", "0", "--m1", "1", "--m2", "1", "--seed", "1",
                 "-o", out]) == 2
    assert main(["gen", "--kind", "other", "--n", "1", "--m1", "1", "--m2", "1", "--seed", "1",
                 "-o", out]) == 2
    assert main(["gen", "--kind", "sa"]) == 2
    assert main([]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "self_adjoint", ')
    assert main(["verify", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    assert main(["gen", "--kind", "skew", "--n", "1", "--m1", "1", "--m2", "1", "--seed", "1",
                 "-o", str(tmp_path / "no" / "dir.json")]) == 2


def test_eval_reflection_row_count(tmp_path, t1):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    o = tmp_path / "o.csv"
    assert main(["eval", str(p), "--what", "reflection", "--grid", "real:-5:5:101", "-o", str(o)]) == 0
    rows = _csv(o)
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 101 * t1.sig.m1 * t1.sig.m2
    at_one = [r for r in rows[1:] if r[2] == "1.0"][0]
    assert complex(float(at_one[6]), float(at_one[7])) == pytest.approx((-80 - 24j) / 109, abs=1e-14)


def test_eval_potential_fixture(tmp_path, t1):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    o = tmp_path / "o.csv"
    assert main(["eval", str(p), "--what", "potential", "--k", "0", "-o", str(o)]) == 0
    rows = _csv(o)[1:]
    assert len(rows) == 4
    vals = np.array([float(r[6]) for r in rows]).reshape(2, 2)
    np.testing.assert_allclose(vals, np.array([[233, 208], [208, 233]]) / 105, atol=1e-12)


def test_eval_potential_all_steps_k_major(tmp_path, t2):
    p = tmp_path / "t.json"
    save_triple(t2, p)
    o = tmp_path / "o.csv"
    assert main(["eval", str(p), "--what", "potential", "--kmax", "3", "-o", str(o)]) == 0
    rows = _csv(o)[1:]
    assert len(rows) == 4 * 4
    keys = [(int(r[1]), int(r[4]), int(r[5])) for r in rows]
    assert keys == sorted(keys)


def test_eval_weyl_imaginary_grid(tmp_path, t2):
    p = tmp_path / "t.json"
    save_triple(t2, p)
    o = tmp_path / "o.csv"
    assert main(["eval", str(p), "--what", "weyl", "--grid", "imag:2:10:9", "-o", str(o)]) == 0
    rows = _csv(o)[1:]
    assert len(rows) == 9
    assert all(np.isfinite(float(r[6])) and np.isfinite(float(r[7])) for r in rows)


def test_eval_fundamental_ordering(tmp_path, t2):
    p = tmp_path / "t.json"
    save_triple(t2, p)
    o = tmp_path / "o.csv"
    # z = 0 is singular for the skew kind and is skipped
    assert main(["eval", str(p), "--what", "fundamental", "--grid", "real:-1:1:3", "--kmax", "2",
                 "-o", str(o)]) == 0
    rows = _csv(o)[1:]
    assert len(rows) == 3 * 2 * 4
    ks = [int(r[1]) for r in rows]
    assert ks == sorted(ks)
    assert main(["eval", str(p), "--what", "fundamental", "--grid", "real:0:0:1", "-o", str(o)]) == 1


def test_eval_requires_grid(tmp_path, t1):
    p = tmp_path / "t.json"
    save_triple(t1, p)
    assert main(["eval", str(p), "--what", "weyl", "-o", str(tmp_path / "o.csv")]) == 2
