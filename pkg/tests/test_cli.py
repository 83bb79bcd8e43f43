import csv
import json
import subprocess
import sys

import pytest

from fixlab.cli import build_parser, main


def run(*argv):
    return main(list(argv))


def payload(path):
    doc = json.loads(path.read_text())
    doc.pop("wall_time_ms")
    return doc


def test_iterate_quadratic_example(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("iterate", "--op", "if u < 1 then u^2/30 else 1/60", "--eta", "1", "--seeds", "1",
               "--json", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == "1" and doc["command"] == "iterate"
    assert abs(doc["results"]["fixed_point"]) < 1e-8 and doc["results"]["converged"]


def test_iterate_identity_and_runaway(capsys):
    assert run("iterate", "--op", "u", "--seeds", "0.5") == 0
    assert "0.5" in capsys.readouterr().out
    assert run("iterate", "--op", "u+1", "--seeds", "0", "--max-iter", "50") == 1


def test_iterate_trace(tmp_path):
    trace = tmp_path / "t.csv"
    assert run("iterate", "--op", "x1/4 + u/4", "--eta", "2", "--seeds", "1,1", "--trace",
               str(trace)) == 0
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["iteration", "value", "step_distance"] and float(rows[1][1]) == 0.5


def test_iterate_divergence_is_math_failure():
    assert run("iterate", "--op", "u*u + 2", "--seeds", "2") == 1


@pytest.mark.parametrize("argv", [
    ("iterate", "--op", "u @ 2"),
    ("iterate", "--op", "u", "--eta", "2", "--seeds", "1"),
    ("iterate", "--op", "u", "--catalog", "h-10-25"),
    ("iterate",),
    ("check", "--op", "u", "--alpha", "0.5", "--gamma", "0.5", "--delta", "0.5"),
    ("check", "--op", "u", "--kind", "kannan", "--c", "0.7"),
    ("volterra", "--kernel", "u", "--lambda", "0"),
    ("volterra", "--kernel", "u + t"),
    ("nonsense",),
    ("check", "--op", "u", "--samples", "0"),
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(*argv) == 2


def test_syntax_error_reports_offset(capsys):
    assert run("iterate", "--op", "u @ 2") == 2
    assert "offset 2" in capsys.readouterr().err


def test_check_commands(tmp_path, capsys):
    assert run("check", "--catalog", "h-10-25", "--kind", "gen-h", "--alpha", "0.5",
               "--beta-family", "const", "--beta-param", "0.25") == 0
    out = tmp_path / "c.json"
    assert run("check", "--op", "u", "--kind", "kannan", "--c", "0.49", "--samples", "500",
               "--json", str(out)) == 1
    doc = json.loads(out.read_text())
    assert not doc["results"]["passed"] and doc["results"]["violations"]
    assert "w=" in capsys.readouterr().out


def test_volterra_command(tmp_path, capsys):
    sol = tmp_path / "w.csv"
    assert run("volterra", "--kernel", "u+1", "--lambda", "1", "--a", "0", "--b", "1", "--n", "1000",
               "--out", str(sol)) == 0
    rows = list(csv.reader(sol.open()))
    assert rows[0] == ["node", "x", "w"] and len(rows) == 1002
    assert abs(float(rows[-1][2]) - 1.718282) <= 5e-6
    assert run("volterra", "--kernel", "0") == 0
    out = tmp_path / "v.json"
    assert run("volterra", "--kernel", "u", "--lambda", "3", "--json", str(out)) == 0
    assert abs(json.loads(out.read_text())["results"]["value_at_b"]) <= 1e-10


def test_volterra_divergence_exit_1():
    assert run("volterra", "--kernel", "exp(exp(u)) + 1", "--lambda", "50", "--n", "50") == 1


def test_functional_command(capsys):
    assert run("functional", "--op", "u/10", "--w", "0.5", "--v", "0", "--f-kind", "max",
               "--m-alpha", "0.25") == 0
    res = json.loads(capsys.readouterr().out)
    assert res["B"] == 0.5 and res["K"] == pytest.approx(0.45) and res["F"] == pytest.approx(0.55)
    assert res["M'"] == pytest.approx(0.5) and res["M"] == pytest.approx(0.525)
    assert res["L"] == pytest.approx(0.55)


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "kannan", "c": 0.49, "samples": 300}))
    out = tmp_path / "c.json"
    assert run("--config", str(cfg), "check", "--op", "u", "--json", str(out)) == 1
    doc = json.loads(out.read_text())
    assert doc["inputs"]["kind"] == {"kind": "kannan", "c": 0.49}
    assert doc["inputs"]["samples"] == 300
    # explicit flags win over the config
    assert run("--config", str(cfg), "check", "--op", "u/10", "--kind", "gen-c") == 0


def test_bad_config(tmp_path):
    assert run("--config", str(tmp_path / "missing.json"), "demo") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run("--config", str(bad), "demo") == 2


def test_check_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run("check", "--catalog", "c-30-60", "--eta", "3", "--samples", "800", "--prng-seed", "5",
            "--json", str(path))
    assert payload(a) == payload(b)
    assert payload(a)["inputs"]["prng_seed"] == 5


def test_demo_small(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run("demo", "--samples", "500", "--seed-count", "3", "--json", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["results"]["all_passed"] and len(doc["results"]["items"]) == 25
    assert "PASS" in capsys.readouterr().out


def test_help_lists_every_flag_with_default(capsys):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        text = sp.format_help()
        for action in sp._actions:
            if action.dest == "help":
                continue
            assert action.option_strings[0] in text
            word = "required" if action.required else "default"
            assert word in (action.help or ""), (name, action.dest)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fixlab", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "iterate" in res.stdout
