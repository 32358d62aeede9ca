import csv
import io
import json

import pytest

from chipgames.cli import main, sweep_grid
from decimal import Decimal


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_value_json(capsys):
    code, out, _ = run(capsys, "value", "--game", "jm1", "-a", "1", "-h", "2", "-n", "75", "-q", "0.429056")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(4.050134694288943e-8, rel=1e-6)
    assert set(doc) == {"game", "a", "h", "n", "q", "value"}


def test_value_zero_cases(capsys):
    assert json.loads(run(capsys, "value", "--game", "jm3", "-n", "100", "-q", "0.4")[1])["value"] == 0.0
    assert json.loads(run(capsys, "value", "--game", "jm2", "-n", "0", "-q", "0.3")[1])["value"] == 0.0


def test_value_cross_checks(capsys):
    code, out, _ = run(capsys, "value", "--game", "jm2", "-a", "1", "-h", "0", "-n", "1", "-q", "0.3", "--check")
    doc = json.loads(out)
    assert code == 0 and doc["exact"] == "7/10" and doc["expectimax"] == pytest.approx(0.7)


@pytest.mark.parametrize(
    "argv",
    [
        ["value", "--game", "jm2", "-n", "5", "-q", "0.5"],
        ["value", "--game", "jm2", "-n", "5000", "-q", "0.3"],
        ["value", "--game", "jm2", "-q", "0.3"],
        ["value", "--game", "jm2", "-n", "25", "-q", "0.3", "--check"],
        ["threshold", "--game", "jm2", "--lo", "0.34", "--hi", "0.35", "--nmax", "100"],
    ],
)
def test_bad_parameters_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_unknown_game_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["value", "--game", "jm7", "-n", "2", "-q", "0.2"])
    assert exc.value.code == 2


def test_threshold_jm2(capsys):
    code, out, _ = run(capsys, "threshold", "--game", "jm2", "--start", "0,0", "--nmax", "150",
                       "--lo", "0.30", "--hi", "0.35", "--tol", "1e-6")
    doc = json.loads(out)
    assert code == 0
    assert {"game", "start", "n_max", "q_lo", "q_hi", "n_star", "value"} <= set(doc)
    assert 0.329392 <= doc["q_lo"] < doc["q_hi"] <= 0.329394


def test_threshold_jm3_none(capsys):
    code, out, _ = run(capsys, "threshold", "--game", "jm3", "--start", "0,0", "--nmax", "150",
                       "--lo", "0.0", "--hi", "0.49")
    assert code == 0 and json.loads(out)["bracket"] is None


def test_threshold_inconsistency_exit_3(capsys, monkeypatch):
    from chipgames import threshold
    from chipgames.threshold import BiasWitness

    monkeypatch.setattr(
        threshold, "bias_witness",
        lambda v, s, q, n=300: BiasWitness(1, 1.0) if (0.1 <= q < 0.2 or q >= 0.4) else None,
    )
    code, _, err = run(capsys, "threshold", "--game", "jm2", "--lo", "0", "--hi", "0.45", "--tol", "1e-3")
    assert code == 3 and "inconsistent" in err


def test_sweep_jm2(capsys):
    code, out, _ = run(capsys, "sweep", "--game", "jm2", "--start", "0,0", "-n", "146",
                       "--lo", "0.30", "--hi", "0.35", "--step", "0.01")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    for row in rows:
        q, v = float(row["q"]), float(row["value"])
        assert (v > 1e-9) == (q > 0.3294)


def test_sweep_jm3_and_order(capsys):
    code, out, _ = run(capsys, "sweep", "--game", "jm3", "-n", "60,20", "--lo", "0.1", "--hi", "0.4", "--step", "0.1")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["q", "n", "value"]
    keys = [(float(q), int(n)) for q, n, _ in rows[1:]]
    assert keys == sorted(keys) and len(keys) == 8
    assert all(abs(float(v)) <= 1e-9 for _, _, v in rows[1:])


def test_sweep_degenerate_grids(capsys):
    code, out, _ = run(capsys, "sweep", "--game", "jm2", "-n", "10", "--lo", "0.2", "--hi", "0.25", "--step", "0.1")
    assert code == 0 and len(out.strip().splitlines()) == 2
    assert run(capsys, "sweep", "--game", "jm2", "-n", "10", "--lo", "0.3", "--hi", "0.2", "--step", "0.1")[0] == 2
    assert sweep_grid(Decimal("0.1"), Decimal("0.2"), Decimal("0")) == []


def test_full_precision_csv(capsys):
    _, out, _ = run(capsys, "value", "--game", "jm2", "-n", "146", "-q", "0.329393", "--format", "csv")
    value = list(csv.DictReader(io.StringIO(out)))[0]["value"]
    assert float(value) == 4.4530581139179404e-08


def test_policy_dump(capsys):
    code, out, _ = run(capsys, "policy", "--game", "jm2", "-n", "4", "-q", "0.35")
    doc = json.loads(out)
    assert code == 0 and doc["n_max"] == 4
    assert [0, 0, 4, "abandon"] in doc["choice"] or [0, 0, 4, "toss"] in doc["choice"]


def test_simulate_schema(capsys):
    code, out, _ = run(capsys, "simulate", "--game", "jm2", "-n", "20", "-q", "0.4", "--trials", "500", "--seed", "3")
    doc = json.loads(out)
    assert code == 0 and set(doc) == {"trials", "mean", "stderr", "min", "max", "seed"}
    assert doc["seed"] == 3 and doc["trials"] == 500


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ngame = jm2\nn = 1\nq = 0.3\na = 1\n")
    code, out, _ = run(capsys, "value", "--config", str(cfg))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.7)
    code, out, _ = run(capsys, "value", "--config", str(cfg), "-a", "0", "-n", "0")
    assert json.loads(out)["value"] == 0.0 and json.loads(out)["a"] == 0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("game = jm2\ncolour = blue\n")
    assert run(capsys, "value", "--config", str(cfg), "-n", "1", "-q", "0.3")[0] == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "v.json"
    code, out, _ = run(capsys, "value", "--game", "jm2", "-n", "3", "-q", "0.3", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["n"] == 3


def test_verify_paper_numbers(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "paper-numbers")
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert code == 0 and len(lines) == 4 and all(l.startswith("PASS") for l in lines)


def test_verify_failure_exit_1(capsys, monkeypatch):
    from chipgames import verify

    monkeypatch.setitem(verify.SUITES, "fairness", [("broken", lambda: (False, "E(0,0,3,0.2) = 1.0"))])
    code, out, _ = run(capsys, "verify", "--suite", "fairness")
    assert code == 1 and "FAIL" in out and "E(0,0,3,0.2)" in out
