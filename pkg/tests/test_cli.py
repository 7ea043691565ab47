import csv
import json

import numpy as np
import pytest

from oracles import badly_scaled_triple, common_null_triple, crandn, match_error

from kvadeig import QuadPencil, RankOptions, numerical_rank, qr_col_pivoted
from kvadeig.cli import RunConfig, build_report, emit_plot_data, main, run
from kvadeig.dense import EPS
from kvadeig.errors import DimensionMismatch, NonSquare, ParseError
from kvadeig.fixtures import mobile_manipulator
from kvadeig.mmio import (load_triple, read_bundle, read_matrix_market, write_bundle,
                          write_matrix_market)
from kvadeig.scaling import ScalingKind
from kvadeig.solver import SolveOptions, solve_qep


def _write_triple(tmp_path, p):
    paths = []
    for name, a in zip("MCK", p.triple()):
        path = tmp_path / f"{name}.mtx"
        write_matrix_market(path, a)
        paths.append(str(path))
    return paths


def test_load_one_by_one_array(tmp_path):
    paths = []
    for name in "MCK":
        path = tmp_path / f"{name}.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n1 1\n1\n")
        paths.append(path)
    p = load_triple(paths)
    assert p.n == 1 and p.m[0, 0] == 1


def test_symmetric_coordinate_expanded(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n% comment\n"
                    "3 3 4\n1 1 2.0\n2 1 -1.5\n3 2 4\n3 3 1e-3\n")
    a = read_matrix_market(path)
    assert np.array_equal(a, a.T)
    assert a[0, 1] == -1.5 and a[1, 2] == 4


def test_hermitian_and_skew(tmp_path):
    h = tmp_path / "h.mtx"
    h.write_text("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n")
    a = read_matrix_market(h)
    assert np.array_equal(a, a.conj().T)
    s = tmp_path / "k.mtx"
    s.write_text("%%MatrixMarket matrix array real skew-symmetric\n2 2\n3\n")
    b = read_matrix_market(s)
    assert np.array_equal(b, [[0, -3], [3, 0]])


def test_fixture_rank(tmp_path):
    p = load_triple(_write_triple(tmp_path, mobile_manipulator()))
    assert p.n == 5
    f = qr_col_pivoted(p.m)
    assert numerical_rank(f, RankOptions("abs-matrix-norm", 5 * EPS)) == 3


def test_matrix_market_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(70)
    p = QuadPencil(*(crandn(rng, 4, 4) * 10.0 ** rng.uniform(-200, 200) for _ in range(3)))
    q = load_triple(_write_triple(tmp_path, p))
    for x, y in zip(p.triple(), q.triple()):
        assert np.array_equal(x, y)


def test_bundle_round_trip(tmp_path):
    rng = np.random.default_rng(71)
    p = QuadPencil(*(crandn(rng, 3, 3) for _ in range(3)))
    path = tmp_path / "b.json"
    write_bundle(path, p)
    q = read_bundle(path)
    for x, y in zip(p.triple(), q.triple()):
        assert np.array_equal(x, y)


def test_bundle_real_rows(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"n": 2, "M": [[1, 0], [0, 1]], "C": [1, 0, 0, 1],
                                "K": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}))
    p = load_triple(bundle=path)
    assert np.array_equal(p.k, np.eye(2))


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\nxyz\n4\n")
    with pytest.raises(ParseError) as info:
        read_matrix_market(path)
    assert info.value.line == 5 and info.value.column == 1
    assert "bad.mtx:5:1" in str(info.value)


def test_parse_error_bad_json(tmp_path):
    path = tmp_path / "b.json"
    path.write_text('{"n": 2,\n "M": [1, }')
    with pytest.raises(ParseError) as info:
        read_bundle(path)
    assert info.value.line == 2


def test_shape_errors(tmp_path):
    rect = tmp_path / "r.mtx"
    rect.write_text("%%MatrixMarket matrix array real general\n2 1\n1\n2\n")
    sq = tmp_path / "s.mtx"
    sq.write_text("%%MatrixMarket matrix array real general\n1 1\n1\n")
    with pytest.raises(NonSquare):
        load_triple([rect, rect, rect])
    big = tmp_path / "b.mtx"
    write_matrix_market(big, np.eye(2))
    with pytest.raises(DimensionMismatch):
        load_triple([sq, big, sq])


def test_run_mobile_manipulator():
    rep = run(RunConfig(), mobile_manipulator())
    assert rep["counts"] == {"finite": 2, "zero": 0, "infinite": 8}
    assert len(rep["eigenpairs"]) == 10
    assert rep["ledger"]["r_M"] == 3


def test_run_identity_triple():
    n = 3
    rep = run(RunConfig(), QuadPencil(np.eye(n), np.eye(n), np.eye(n)))
    assert rep["counts"]["finite"] == 2 * n
    vals = [complex(r["re"], r["im"]) for r in rep["eigenpairs"]]
    w = np.sqrt(3) / 2
    assert match_error(vals, [-0.5 + 1j * w] * n + [-0.5 - 1j * w] * n) <= 1e-12
    assert all(r["eta_right"] <= 1e-12 for r in rep["eigenpairs"])


def test_preprocessing_changes_errors_not_values():
    rng = np.random.default_rng(72)
    p = QuadPencil(*badly_scaled_triple(rng, 6))
    plain = solve_qep(p, SolveOptions(scale=ScalingKind.NONE, balance=False))
    full = solve_qep(p)
    assert match_error(plain.values, full.values) <= 1e-6
    assert [pr.omega_right for pr in plain.pairs] != [pr.omega_right for pr in full.pairs]


def test_report_is_deterministic_and_json_safe():
    p = mobile_manipulator()
    a = json.dumps(run(RunConfig(), p), sort_keys=True, allow_nan=False)
    b = json.dumps(run(RunConfig(), p), sort_keys=True, allow_nan=False)
    assert a == b


def test_cli_bytes_identical(tmp_path, capsys):
    args = ["solve", "--fixture", "mobile_manipulator", "--backend", "reference", "--seed", "5"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_plot_data_clamp_and_sort(tmp_path):
    sol = solve_qep(QuadPencil([[1.0]], [[-3.0]], [[2.0]]))
    rep = build_report(sol)
    rep["eigenpairs"][0]["omega_right"] = 0.0
    path = tmp_path / "plot.csv"
    emit_plot_data(rep, path, sort_by_abs=True)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 2
    assert min(float(r["omega_right"]) for r in rows) >= EPS
    assert rep["eigenpairs"][0]["omega_right"] == 0.0
    path2 = tmp_path / "mm.csv"
    emit_plot_data(run(RunConfig(), mobile_manipulator()), path2, sort_by_abs=True)
    col = [float(r["abs_lambda"]) for r in csv.DictReader(path2.open())]
    assert col == sorted(col)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve", "--fixture", "mobile_manipulator", "-o", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["n"] == 5
    bad = tmp_path / "bad.mtx"
    bad.write_text("not a matrix\n")
    assert main(["solve", str(bad), str(bad), str(bad)]) == 1
    missing = str(tmp_path / "missing.mtx")
    assert main(["solve", missing, missing, missing]) == 1
    p = QuadPencil(*common_null_triple(np.random.default_rng(73), 4))
    paths = _write_triple(tmp_path, p)
    assert main(["solve", *paths]) == 2
    err = capsys.readouterr().err
    assert "kvadeig:" in err


def test_cli_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("KVADEIG_SEED", "17")
    assert main(["solve", "--fixture", "mobile_manipulator"]) == 0
    assert json.loads(capsys.readouterr().out)["options"]["seed"] == 17
    monkeypatch.setenv("KVADEIG_SEED", "oops")
    assert main(["solve", "--fixture", "mobile_manipulator"]) == 1


def test_cli_csv_and_flags(capsys):
    assert main(["solve", "--fixture", "mobile_manipulator", "--format", "csv", "--scale", "none",
                 "--balance", "false", "--alpha", "1,0.5,1", "--rank-strategy", "rel-diag",
                 "--tau", "1e-12"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 10
    assert sum(r["tag"] == "infinite" for r in rows) == 8


def test_cli_compare_and_timings(capsys):
    assert main(["solve", "--fixture", "mobile_manipulator", "--compare"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert set(table) == {"plain", "one_step", "full"}
    assert table["full"]["counts"]["infinite"] == 8
    assert main(["solve", "--fixture", "mobile_manipulator", "--timings"]) == 0
    assert "timings" in json.loads(capsys.readouterr().out)


def test_cli_export(tmp_path):
    assert main(["export", "mobile_manipulator", str(tmp_path)]) == 0
    p = load_triple([tmp_path / f"{x}.mtx" for x in "MCK"])
    for x, y in zip(p.triple(), mobile_manipulator().triple()):
        assert np.array_equal(x, y)
