import json

import pytest

from twosided.cli import main
from twosided.instance import load_instance, save_instance
from twosided.suites import counterexample_instance


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_gen_writes_valid_instance(tmp_path, capsys):
    out = tmp_path / "inst.json"
    code, _ = run_cli(capsys, "gen", "uniform-random", "3", "2", "--seed", "7", "--out", str(out))
    assert code == 0
    inst = load_instance(out)
    assert inst.n == 3 and inst.m == 2


def test_gen_deterministic(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert run_cli(capsys, "gen", "same-order-additive", "3", "2", "--seed", "5", "--out", str(a))[0] == 0
    assert run_cli(capsys, "gen", "same-order-additive", "3", "2", "--seed", "5", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_unknown_kind_usage_error(tmp_path, capsys):
    code = main(["gen", "bogus", "3", "2", "--seed", "1", "--out", str(tmp_path / "x.json")])
    capsys.readouterr()
    assert code == 1


def test_missing_seed_usage_error(tmp_path, capsys):
    code = main(["gen", "uniform-random", "3", "2", "--out", str(tmp_path / "x.json")])
    capsys.readouterr()
    assert code == 1


def test_solve_unit_instance(tmp_path, capsys, unit_instance):
    path = tmp_path / "unit.json"
    save_instance(unit_instance, path)
    report = tmp_path / "report.csv"
    solution = tmp_path / "solution.json"
    code, _ = run_cli(
        capsys, "solve", str(path), "--report", str(report), "--out", str(solution)
    )
    assert code == 0
    text = report.read_text()
    assert text.startswith("# command: solve")
    header, row = text.strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["objective"]) >= 0.25 - 1e-6
    doc = json.loads(solution.read_text())
    assert doc["n"] == 1 and doc["m"] == 1
    assert float(doc["objective_normalized"]) >= 0.25 - 1e-6


def test_solve_zero_revenue(tmp_path, capsys, zero_revenue_instance):
    path = tmp_path / "zero.json"
    save_instance(zero_revenue_instance, path)
    report = tmp_path / "report.csv"
    code, _ = run_cli(capsys, "solve", str(path), "--t-max", "2000", "--report", str(report))
    assert code == 0
    header, row = report.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert abs(float(fields["objective"])) <= 1e-9


def test_solve_ratio_vs_exact(tmp_path, capsys):
    inst_path = tmp_path / "i.json"
    assert run_cli(capsys, "gen", "uniform-random", "3", "2", "--seed", "2", "--out", str(inst_path))[0] == 0
    report = tmp_path / "report.csv"
    code, _ = run_cli(capsys, "solve", str(inst_path), "--t-max", "20000", "--report", str(report))
    assert code == 0
    header, row = report.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["ratio_vs_exact"]) >= 1.0 - 1e-4


def test_solve_dump_lp_and_trace(tmp_path, capsys, unit_instance):
    path = tmp_path / "unit.json"
    save_instance(unit_instance, path)
    dump = tmp_path / "lp.json"
    trace = tmp_path / "trace.jsonl"
    code, _ = run_cli(
        capsys, "solve", str(path), "--t-max", "200",
        "--dump-lp", str(dump), "--trace", str(trace), "--report", str(tmp_path / "r.csv"),
    )
    assert code == 0
    lp_doc = json.loads(dump.read_text())
    assert set(lp_doc) >= {"c", "a_eq", "b_eq", "a_ub", "b_ub", "maximize"}
    lines = trace.read_text().strip().splitlines()
    assert len(lines) == 200
    rec = json.loads(lines[0])
    assert set(rec) == {"t", "cut", "index", "obj", "incumbent_updated"}


def test_run_dp_unit_instance(tmp_path, capsys, unit_instance):
    path = tmp_path / "unit.json"
    save_instance(unit_instance, path)
    out = tmp_path / "rows.csv"
    code, _ = run_cli(capsys, "run", str(path), "--policy", "dp", "--out", str(out))
    assert code == 0
    header, row = out.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["exact_expected_revenue"]) == pytest.approx(0.25, abs=1e-9)
    assert float(fields["ratio_vs_dp"]) == pytest.approx(1.0, abs=1e-9)


def test_run_greedy_missing_certificate_exit_code(tmp_path, capsys):
    inst = counterexample_instance()
    # break the order: two suppliers ranking customers differently
    import numpy as np
    from twosided.instance import Instance

    broken = Instance(
        n=2, m=2, u=np.ones((2, 2)), w=np.ones((2, 2)), r=[[1.0, 0.0], [0.0, 1.0]]
    )
    path = tmp_path / "broken.json"
    save_instance(broken, path)
    code = main(["run", str(path), "--policy", "greedy"])
    capsys.readouterr()
    assert code == 3
    # escape hatch runs it as a heuristic
    out = tmp_path / "rows.csv"
    code, _ = run_cli(capsys, "run", str(path), "--policy", "greedy", "--force-order", "--out", str(out))
    assert code == 0
    assert "heuristic_order" in out.read_text()


def test_run_greedy_ratio(tmp_path, capsys):
    inst_path = tmp_path / "so.json"
    assert run_cli(capsys, "gen", "same-order-additive", "3", "3", "--seed", "4", "--out", str(inst_path))[0] == 0
    out = tmp_path / "rows.csv"
    code, _ = run_cli(capsys, "run", str(inst_path), "--policy", "greedy", "--out", str(out))
    assert code == 0
    header, row = out.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["ratio_vs_dp"]) >= 0.5 - 1e-9


def test_run_rand_static_guarantee(tmp_path, capsys):
    inst_path = tmp_path / "r.json"
    assert run_cli(capsys, "gen", "uniform-random", "3", "3", "--seed", "6", "--out", str(inst_path))[0] == 0
    out = tmp_path / "rows.csv"
    code, _ = run_cli(
        capsys, "run", str(inst_path), "--policy", "rand-static", "--seed", "1",
        "--t-max", "20000", "--out", str(out),
    )
    assert code == 0
    header, row = out.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["exact_expected_revenue"]) >= 0.5 * float(fields["lp_objective"]) - 1e-9


def test_run_rand_static_requires_seed(tmp_path, capsys):
    inst_path = tmp_path / "r.json"
    assert run_cli(capsys, "gen", "uniform-random", "2", "2", "--seed", "6", "--out", str(inst_path))[0] == 0
    code = main(["run", str(inst_path), "--policy", "rand-static"])
    capsys.readouterr()
    assert code == 1


def test_run_monte_carlo_rows(tmp_path, capsys):
    inst_path = tmp_path / "so.json"
    assert run_cli(capsys, "gen", "same-order-additive", "3", "2", "--seed", "9", "--out", str(inst_path))[0] == 0
    out = tmp_path / "rows.csv"
    code, _ = run_cli(
        capsys, "run", str(inst_path), "--policy", "greedy",
        "--trials", "500", "--seed", "3", "--out", str(out),
    )
    assert code == 0
    header, row = out.read_text().strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    exact = float(fields["exact_expected_revenue"])
    mean = float(fields["mc_mean"])
    stderr = float(fields["mc_stderr"])
    assert abs(mean - exact) <= 4.0 * max(stderr, 1e-12)


def test_verify_suite_passes(tmp_path, capsys):
    out = tmp_path / "verify.csv"
    code, _ = run_cli(capsys, "verify", "--suite", "appendix-a", "--seed", "0", "--out", str(out))
    assert code == 0
    assert "pass" in out.read_text()


def test_verify_chain_small(tmp_path, capsys, monkeypatch):
    import twosided.suites as suites

    monkeypatch.setitem(suites.SUITES, "chain", lambda seed: suites.suite_chain(seed, count=20))
    code, _ = run_cli(capsys, "verify", "--suite", "chain", "--seed", "3")
    assert code == 0


def test_verify_summary_format(capsys):
    code, out = run_cli(capsys, "verify", "--suite", "appendix-a", "--seed", "0", "--format", "summary")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "verify"
    assert all(row["status"] == "pass" for row in doc["rows"])


def test_missing_instance_file_usage_error(capsys):
    code = main(["solve", "/nonexistent/path.json"])
    capsys.readouterr()
    assert code == 1


def test_cli_outputs_byte_identical(tmp_path, capsys):
    inst_path = tmp_path / "i.json"
    assert run_cli(capsys, "gen", "uniform-random", "2", "2", "--seed", "11", "--out", str(inst_path))[0] == 0
    outs = []
    for tag in ("a", "b"):
        report = tmp_path / f"solve-{tag}.csv"
        rows = tmp_path / f"run-{tag}.csv"
        verify = tmp_path / f"verify-{tag}.csv"
        assert run_cli(capsys, "solve", str(inst_path), "--t-max", "3000", "--report", str(report))[0] == 0
        assert run_cli(
            capsys, "run", str(inst_path), "--policy", "rand-static", "--seed", "2",
            "--trials", "50", "--t-max", "3000", "--out", str(rows),
        )[0] == 0
        assert run_cli(capsys, "verify", "--suite", "appendix-a", "--seed", "1", "--out", str(verify))[0] == 0
        outs.append((report.read_bytes(), rows.read_bytes(), verify.read_bytes()))
    assert outs[0] == outs[1]


def test_verify_all_healthy_build(capsys, tmp_path):
    out = tmp_path / "all.csv"
    code, _ = run_cli(capsys, "verify", "--suite", "all", "--seed", "1", "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert all(",pass," in line or line.startswith("#") or line.startswith("report,") for line in lines)


def test_solve_size_limit_is_solver_failure(tmp_path, capsys):
    inst_path = tmp_path / "big.json"
    assert run_cli(capsys, "gen", "uniform-random", "21", "2", "--seed", "0", "--out", str(inst_path))[0] == 0
    code = main(["solve", str(inst_path), "--t-max", "10"])
    capsys.readouterr()
    assert code == 2


def test_verify_failure_exit_code(capsys, monkeypatch):
    import twosided.suites as suites
    from twosided.evaluate import PropertyReport

    def failing(seed):
        report = PropertyReport(name="forced", cases=1)
        report.record(kind="synthetic")
        return [report]

    monkeypatch.setitem(suites.SUITES, "gap", failing)
    code = main(["verify", "--suite", "gap", "--seed", "0"])
    capsys.readouterr()
    assert code == 4


def test_solve_summary_format(tmp_path, capsys, unit_instance):
    path = tmp_path / "unit.json"
    save_instance(unit_instance, path)
    code, out = run_cli(capsys, "solve", str(path), "--t-max", "1500", "--format", "summary")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "solve"
    assert float(doc["rows"][0]["objective"]) >= 0.25 - 1e-6


def test_solve_with_positive_delta(tmp_path, capsys):
    inst_path = tmp_path / "i.json"
    assert run_cli(capsys, "gen", "uniform-random", "3", "2", "--seed", "13", "--out", str(inst_path))[0] == 0
    report = tmp_path / "report.csv"
    code, _ = run_cli(
        capsys, "solve", str(inst_path), "--delta", "0.2", "--t-max", "20000", "--report", str(report)
    )
    assert code == 0
    text = report.read_text()
    assert "# delta: 0.2" in text
    assert "# guarantee_general: 0.4" in text
    header, row = text.strip().splitlines()[-2:]
    fields = dict(zip(header.split(","), row.split(",")))
    assert float(fields["ratio_vs_exact"]) >= (1.0 - 0.2) - 1e-6
    assert float(fields["ratio_vs_exact"]) <= 1.0 + 1e-9
