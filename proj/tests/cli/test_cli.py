"""End-to-end checks of the lipuq command-line tool."""

import json
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest

ROOT = Path(os.environ.get("LIPUQ_SOURCE_DIR", Path(__file__).parents[2])).resolve()
BIN = str(Path(os.environ.get("LIPUQ_BIN", ROOT / "build" / "lipuq")).resolve())
SCHEMA = json.loads((ROOT / "schema" / "report.schema.json").read_text())
ONE_D = ROOT / "configs" / "one_d_a.toml"
ACTIVE = ROOT / "configs" / "active_set_1d.toml"


def lipuq(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("LIPUQ_SEED", None)
    full_env.update(env or {})
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True,
                          env=full_env, cwd=cwd, timeout=600)


def report(path):
    data = json.loads(Path(path).read_text())
    jsonschema.validate(data, SCHEMA)
    return data


def without_timing(r):
    r = dict(r)
    r.pop("wall_time_seconds", None)
    return r


SUBCOMMANDS = [
    ("validate", ONE_D, []),
    ("diameter", ONE_D, ["--restarts", "1"]),
    ("pof", ONE_D, ["--restarts", "1"]),
    ("pof-curve", ONE_D, ["--thetas", "0,0.25,0.5", "--restarts", "1"]),
    ("envelope", ONE_D, ["--at", "0.5", "--at", "0.9", "--grid", "5"]),
    ("markov", ONE_D, ["--theta", "0"]),
    ("active-set", ACTIVE, ["--restarts", "1"]),
    ("redundancy", ACTIVE, ["--region", "0:0.3"]),
    ("fit-lipschitz", ONE_D, ["--bounds", "0.1:5", "--restarts", "1"]),
    ("sweep", ONE_D, ["--scale-L", "1,2", "--restarts", "1"]),
]


@pytest.mark.parametrize("command,config,extra", SUBCOMMANDS, ids=[s[0] for s in SUBCOMMANDS])
def test_every_subcommand_writes_a_schema_valid_report(tmp_path, command, config, extra):
    out = tmp_path / "r.json"
    res = lipuq(command, "-c", config, "-o", out, *extra)
    assert res.returncode == 0, res.stderr
    r = report(out)
    assert r["command"] == command
    assert r["status"] == "ok"
    for name in r.get("trace_files", []):
        assert (tmp_path / name).read_text().startswith("generation,best_value,feasibility_residual")
    if "table_file" in r:
        assert (tmp_path / r["table_file"]).exists()


def test_pof_matches_the_closed_form(tmp_path):
    out = tmp_path / "pof.json"
    assert lipuq("pof", "-c", ONE_D, "-o", out).returncode == 0
    assert abs(report(out)["result"]["phat"] - 3 / 7) < 1e-3


def test_pof_curve_is_one_from_the_mean_up(tmp_path):
    out = tmp_path / "curve.json"
    res = lipuq("pof-curve", "-c", ONE_D, "--thetas", "0,0.5,0.75", "--restarts", "1", "-o", out)
    assert res.returncode == 0, res.stderr
    entries = report(out)["result"]["entries"]
    assert [e["phat"] for e in entries[1:]] == [1.0, 1.0]
    table = (tmp_path / report(out)["table_file"]).read_text().splitlines()
    assert table[0] == "theta,phat,markov_bound,gap"
    assert len(table) == 4


def test_validate_names_the_violating_pair(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("id,x,y\nleft,0,0\nright,1,2\n")
    out = tmp_path / "v.json"
    res = lipuq("validate", "-d", data, "--domain", "0:1", "-L", "1", "-o", out)
    assert res.returncode == 1
    r = report(out)
    assert r["status"] == "infeasible"
    pair = r["result"]["worst_pair"]
    assert {pair["first"], pair["second"]} == {"left", "right"}


def test_infeasible_problem_exits_one(tmp_path):
    out = tmp_path / "p.json"
    res = lipuq("pof", "-c", ONE_D, "-m", "5", "--restarts", "1", "-o", out)
    assert res.returncode == 1
    assert report(out)["status"] == "infeasible"


@pytest.mark.parametrize("args", [
    ["pof", "--no-such-flag"],
    ["pof", "-c", "/nonexistent.toml"],
    ["pof", "-c", str(ONE_D), "--domain", "0-1"],
    ["pof", "-c", str(ONE_D), "--collapse", "3"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(tmp_path, args):
    res = lipuq(*args, "-o", tmp_path / "x.json") if args[0] != "frobnicate" else lipuq(*args)
    assert res.returncode == 2
    assert res.stderr.strip()


def test_csv_errors_name_the_line(tmp_path):
    data = tmp_path / "broken.csv"
    data.write_text("x,y\n0.5,1\n0.7,oops\n")
    res = lipuq("validate", "-d", data, "--domain", "0:1", "-L", "1", "-o", tmp_path / "v.json")
    assert res.returncode == 2
    assert ":3:" in res.stderr and "oops" in res.stderr


def test_report_replays_bit_identically(tmp_path):
    first = tmp_path / "first.json"
    assert lipuq("pof", "-c", ONE_D, "-o", first).returncode == 0
    second = tmp_path / "second.json"
    res = lipuq("run", "-c", first, "-o", second)
    assert res.returncode == 0, res.stderr
    a, b = report(first), report(second)
    assert without_timing(a) | {"trace_files": None} == without_timing(b) | {"trace_files": None}
    for x, y in zip(a["trace_files"], b["trace_files"]):
        assert (tmp_path / x).read_bytes() == (tmp_path / y).read_bytes()


def test_toml_and_json_configs_agree(tmp_path):
    cfg = {"command": "pof", "dataset": str(ROOT / "data" / "one_d" / "case_a.csv"),
           "domain": [[0.0, 1.0]], "lipschitz": [1.0], "mean": 0.5, "theta": 0.0}
    as_json = tmp_path / "c.json"
    as_json.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert lipuq("run", "-c", ONE_D, "-o", a).returncode == 0
    assert lipuq("run", "-c", as_json, "-o", b).returncode == 0
    assert report(a)["result"] == report(b)["result"]


def test_seed_precedence(tmp_path):
    out = tmp_path / "s.json"
    assert lipuq("markov", "-c", ONE_D, "-o", out).returncode == 0
    assert report(out)["seed"] == 20120401
    assert lipuq("markov", "-c", ONE_D, "-o", out, env={"LIPUQ_SEED": "7"}).returncode == 0
    assert report(out)["seed"] == 7
    assert lipuq("markov", "-c", ONE_D, "--seed", "9", "-o", out,
                 env={"LIPUQ_SEED": "7"}).returncode == 0
    assert report(out)["seed"] == 9
    res = lipuq("markov", "-c", ONE_D, "-o", out, env={"LIPUQ_SEED": "x"})
    assert res.returncode == 2


def test_repeated_inputs_are_noted(tmp_path):
    data = tmp_path / "rep.csv"
    data.write_text("id,x,y\na,0.5,1\nb,0.5,1.1\n")
    out = tmp_path / "v.json"
    res = lipuq("validate", "-d", data, "--domain", "0:1", "-L", "1", "-T", "0.2", "-o", out)
    assert res.returncode == 0, res.stderr
    assert any("'a' and 'b'" in n for n in report(out)["notes"])


def test_stdout_output(tmp_path):
    res = lipuq("validate", "-c", ONE_D, "-o", "-", cwd=tmp_path)
    assert res.returncode == 0
    jsonschema.validate(json.loads(res.stdout), SCHEMA)
