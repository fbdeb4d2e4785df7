import csv
import json

import pytest

from oracle_values import V2
from selfrepel import cli


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return meta, rows


def strip_timestamp(path):
    return [l for l in path.read_text().splitlines() if "timestamp" not in l]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_recursion_default(tmp_path):
    assert cli.main(["recursion", "--out", str(tmp_path)]) == 0
    meta, rows = read_csv(tmp_path / "recursion.csv")
    assert len(rows) == 10
    assert float(rows[1]["V"]) == pytest.approx(V2, rel=1e-15)
    assert {"n", "V", "y", "log_V"} <= set(rows[0])
    joined = "\n".join(meta)
    for key in ("selfrepel", "config_hash=", "seed=", "rng=", "timestamp="):
        assert key in joined
    assert sum("timestamp" in l for l in meta) == 1


def test_csv_cells_round_trip(tmp_path):
    cfg = write(tmp_path, "r.toml", "[recursion]\nalpha = 2.0\nc = 0.5\nn_max = 6\n")
    assert cli.main(["recursion", "--config", cfg, "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "recursion.csv")
    from selfrepel.multiscale import iterate_recursion

    for row, st in zip(rows, iterate_recursion(2.0, 0.5, 6)):
        assert float(row["V"]) == st.V and float(row["log_V"]) == st.log_V


@pytest.mark.parametrize(
    "body",
    [
        "[exact]\nspec = {d = 1, T = -4, alpha = 0.5, potential = {type = \"power\", gamma = 2, xi = 1.5}}\n",
        "[exact]\nspec = {d = 1, T = 30, alpha = 0.5, potential = {type = \"power\", gamma = 2, xi = 1.5}}\n",
        "[recursion]\nalpha = 1.0\nbogus = 3\n",
        "[recursion]\nalpha = -1.0\n",
        "this is not toml = = \n",
        "[phase_diagram]\ncs = [0.5, 0.99]\n",
        "[mcmc]\nspec = {T = 8, alpha = 0.1, potential = {type = \"table\", q = 2, coeffs = [[1, 2, 1.0]]}}\n"
        "sampler = {sweeps = 10, burnin = 20}\n",
    ],
)
def test_malformed_config_exits_2_without_output(tmp_path, capsys, body):
    kind = body.split("]")[0].strip("[").replace("_", "-") if body.startswith("[") else "recursion"
    out = tmp_path / "out"
    cfg = write(tmp_path, "bad.toml", body)
    assert cli.main([kind, "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    assert "invalid configuration" in capsys.readouterr().err


def test_gks_default_suite(tmp_path):
    assert cli.main(["gks-check", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "gks.jsonl").read_text().splitlines()
    assert "meta" in json.loads(lines[0]) and "timestamp" in json.loads(lines[1])
    recs = [json.loads(l) for l in lines[2:]]
    assert len(recs) == 500 + 200 + 14
    assert all(r["pass"] for r in recs)


def test_gks_failure_writes_replay(tmp_path, monkeypatch):
    monkeypatch.setattr(cli.gks, "check_gks_pair", lambda *a, **k: -1.0)
    assert cli.main(["gks-check", "--out", str(tmp_path)]) == 1
    lines = (tmp_path / "gks_replay.json").read_text().splitlines()
    assert "spec" in json.loads(lines[2])["replay"]


def test_acceptance_selector_errors():
    assert cli.main(["acceptance", "bogus"]) == 2


def test_acceptance_short_selection(capsys):
    assert cli.main(["acceptance", "1", "9"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]  1" in out and "[PASS]  9" in out and "2/2" in out


def test_bad_seed_is_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["recursion", "--seed", "-3"])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "kind,body,files",
    [
        ("exact", "[exact]\nspec = {T = 6, alpha = 0.3, potential = {type = \"power\", gamma = 2, xi = 1.5}}\n"
         "observables = [{type = \"endpoint_square\"}, {type = \"monomial\", factors = [[1, 1, 1], [4, 1, 1]]}]\n",
         ["exact.csv"]),
        ("transfer", "[transfer]\nalphas = [0.25, 0.5]\nhorizons = [4, 100]\n", ["transfer.csv"]),
        ("mcmc", "seed = 5\n[mcmc]\nspec = {T = 6, alpha = 0.2, potential = {type = \"power\", gamma = 2, xi = 1.5}}\n"
         "sampler = {sweeps = 500, burnin = 50, chains = 3}\ntraces = true\n", ["mcmc.csv", "mcmc_traces.csv"]),
        ("tilt", "", ["tilt.jsonl"]),
        ("phase-diagram", "[phase_diagram]\nalphas = {start = 0.2, stop = 4.0, num = 5}\ncs = [0.3, 0.7]\n",
         ["phase_diagram.csv"]),
        ("scaling-sweep", "[scaling_sweep]\nalpha = 0.0\nhorizons = [4, 8]\nsampler = {sweeps = 300, chains = 3}\n",
         ["scaling_sweep.csv", "scaling_sweep_fit.json"]),
    ],
)
def test_outputs_are_reproducible(tmp_path, kind, body, files):
    cfg = write(tmp_path, "c.toml", body)
    for run in ("a", "b"):
        assert cli.main([kind, "--config", cfg, "--out", str(tmp_path / run), "--workers", "2"]) == 0
    for f in files:
        assert strip_timestamp(tmp_path / "a" / f) == strip_timestamp(tmp_path / "b" / f)


def test_exact_values_and_json_config(tmp_path):
    cfg = tmp_path / "e.json"
    cfg.write_text(json.dumps({"exact": {"spec": {"T": 2, "alpha": 0.5, "potential": {
        "type": "table", "q": 2, "coeffs": [[1, 2, 1.0]]}}}}))
    assert cli.main(["exact", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "exact.csv")
    assert float(rows[0]["value"]) == pytest.approx(3.5231883119115298, abs=1e-12)
    assert rows[0]["config_count"] == "4"


def test_seed_changes_hash(tmp_path):
    cli.main(["recursion", "--out", str(tmp_path / "a"), "--seed", "1"])
    cli.main(["recursion", "--out", str(tmp_path / "b"), "--seed", "2"])
    ha = [l for l in strip_timestamp(tmp_path / "a" / "recursion.csv") if "config_hash" in l]
    hb = [l for l in strip_timestamp(tmp_path / "b" / "recursion.csv") if "config_hash" in l]
    assert ha != hb


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit):
        cli.main(["phase-diagram", "--help"])
    assert "alpha, c, classification" in capsys.readouterr().out
