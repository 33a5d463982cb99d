import csv
import time

import pytest

from fdsecrecy import cli
from fdsecrecy.harness import derive_seed, gen_channels
from fdsecrecy.model import SystemConfig, energy_bound


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _feasible_seed(cfg=SystemConfig()):
    s = 0
    while energy_bound(gen_channels(cfg, derive_seed(s, 0)), cfg) < cfg.e_min:
        s += 1
    return s


def test_solve_deterministic(capsys):
    seed = str(_feasible_seed())
    code, a, _ = run(capsys, "solve", "--seed", seed)
    assert code == 0
    _, b, _ = run(capsys, "solve", "--seed", seed)
    assert a == b
    assert a.startswith("# fdsecrecy ") and "seed=" in a.splitlines()[0]
    fields = dict(line.split(" ", 1) for line in a.splitlines()[1:])
    assert float(fields["sum_secrecy_rate_bits"]) > 0
    assert float(fields["energy_margin_w"]) >= -1e-12


def test_solve_infeasible_exit_code(capsys):
    code, out, _ = run(capsys, "solve", "--set", "e_min=5")
    assert code == 2 and "infeasible" in out


def test_usage_errors(capsys):
    assert run(capsys, "solve", "--set", "colour=blue")[0] == 64
    assert run(capsys, "solve", "--set", "novalue")[0] == 64
    assert run(capsys, "solve", "--set", "n_tx=two")[0] == 64
    assert run(capsys, "sweep", "--out", "x.csv")[0] == 64
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 64


def test_config_file_and_override(tmp_path, capsys):
    path = tmp_path / "a.cfg"
    path.write_text("e_min = 5\n")
    assert run(capsys, "solve", "--config", str(path))[0] == 2
    seed = str(_feasible_seed())
    assert run(capsys, "solve", "--config", str(path), "--set", "e_min=0.0001", "--seed", seed)[0] == 0


def test_trace(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code, text, _ = run(capsys, "trace", "--seed", str(_feasible_seed()), "--out", str(out))
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    u = [float(r["u_bits"]) for r in rows]
    assert all(b >= a - 1e-7 for a, b in zip(u, u[1:]))
    assert [int(r["iteration"]) for r in rows] == list(range(1, len(rows) + 1))
    term = text.strip().splitlines()[-1]
    if term == "termination converged":
        assert float(rows[-1]["rel_improvement"]) < 1e-3
    else:
        assert len(rows) == 50


def test_sweep_smoke(tmp_path, capsys):
    out = tmp_path / "s.csv"
    t0 = time.perf_counter()
    code, text, _ = run(capsys, "sweep", "--param", "e_min_w", "--grid", "0.0002,0.001",
                        "--trials", "1", "--out", str(out))
    assert code == 0 and time.perf_counter() - t0 < 30
    lines = out.read_text().splitlines()
    assert lines[0] == "param,value,scheme,mean_rate_bits,stderr_bits,n_ok,n_infeasible,n_failed"
    assert len(lines) == 1 + 2 * 3
    assert "wrote" in text


def test_sweep_unwritable(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--param", "e_min_w", "--grid", "0.0002", "--trials", "1",
                       "--set", "schemes=half-duplex", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 1 and "cannot write" in err


def test_selftest_and_fault(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.count("PASS") == 4
    code, out, _ = run(capsys, "selftest", "--inject-fault", "g-sign")
    assert code == 1 and "FAIL conservative-bounds" in out
