import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from covariant_weyl.cli import build_parser, main
from covariant_weyl.expr_lang.wsym import load
from covariant_weyl.tensor_core import canonicalize

ROOT = Path(__file__).resolve().parent.parent
A = str(ROOT / "fixtures" / "symbols" / "a.wsym")
B = str(ROOT / "fixtures" / "symbols" / "b.wsym")
WAVE = str(ROOT / "fixtures" / "catalog" / "wave.wsym")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, sub in action.choices.items():
                yield name, sub
                yield from subparsers(sub)


def test_help_documents_every_flag(capsys):
    assert run(capsys, "--help")[0] == 0
    for name, sub in subparsers(build_parser()):
        text = sub.format_help()
        for action in sub._actions:
            for flag in action.option_strings:
                assert flag in text, (name, flag)
            if action.option_strings and action.help is None:
                pytest.fail(f"{name} {action.option_strings} has no help text")


@pytest.mark.parametrize("argv", [[], ["nonsense"], ["star", "-a", A], ["star", "-a", A, "-b", B,
                                                                       "--order", "7"],
                                  ["star", "-a", "missing.wsym", "-b", B],
                                  ["parse-check", "--expr", "T[^a"],
                                  ["verify", "geometry", "--manifold", "torus", "--check", "geodesic"],
                                  ["verify", "geometry", "--manifold", "sphere2", "--check",
                                   "geodesic", "--point", "1,2,3"]])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_flat_star_of_fixture_symbols_is_deterministic(capsys):
    first = run(capsys, "star", "-a", A, "-b", B, "--order", "3", "--flat")
    second = run(capsys, "star", "-a", A, "-b", B, "--order", "3", "--flat")
    assert first[0] == 0 and first == second
    lines = first[1].splitlines()
    assert lines[0].startswith("# star {")
    assert [l.split(":")[0] for l in lines[1:5]] == [f"order {k}" for k in range(4)]
    assert "Riemann" not in first[1]


def test_json_output(capsys, tmp_path):
    out = tmp_path / "ab.wsym"
    code, text, _ = run(capsys, "bracket", "-a", A, "-b", B, "--format", "json", "-o", str(out))
    obj = json.loads(text)
    assert code == 0 and obj["command"] == "bracket" and obj["config"]["gamma"] == "symbolic"
    assert set(obj["config"]["tolerances"]) == {"tol_ode", "tol_bvp", "h_vv", "slope_tol"}
    assert out.exists()


def test_verify_catalog_wave_cites_both_routes(capsys):
    code, text, _ = run(capsys, "verify", "catalog", "--name", "wave", "--gamma", "1/2")
    assert code == 0 and "dequantize" in text and "star_route" in text


def test_verification_failure_exits_1(capsys):
    code, text, _ = run(capsys, "verify", "identities", "--check", "associativity-bundle")
    assert code == 1 and "FAIL" in text


def test_verify_geometry_and_moyal(capsys):
    assert run(capsys, "verify", "geometry", "--manifold", "flat2", "--check", "coincidence")[0] == 0
    assert run(capsys, "verify", "moyal", "--case", "hermiticity")[0] == 0


def test_quantize_dequantize_round_trip(capsys, tmp_path):
    op, back = tmp_path / "op.json", tmp_path / "back.wsym"
    assert run(capsys, "quantize", "-a", WAVE, "-o", str(op))[0] == 0
    assert run(capsys, "dequantize", "--operator", str(op), "-o", str(back))[0] == 0
    assert canonicalize(load(back).expr - load(WAVE).expr).is_zero()


def test_catalog_and_parse_check(capsys, tmp_path):
    code, text, _ = run(capsys, "catalog", "--list")
    assert code == 0 and "einstein_lin" in text
    assert run(capsys, "catalog", "--write-fixtures", str(tmp_path))[0] == 0
    for f in (ROOT / "fixtures" / "catalog").glob("*.wsym"):
        assert (tmp_path / f.name).read_text() == f.read_text()
    assert run(capsys, "parse-check", A, B, WAVE)[0] == 0
    assert run(capsys, "parse-check", "--declare", "T:2", "--expr", "T[^a _a]")[0] == 0


def _module(*argv, **env):
    return subprocess.run([sys.executable, "-m", "covariant_weyl", *argv], capture_output=True,
                          text=True, env={**os.environ, **env}, cwd=ROOT)


def test_environment_overrides():
    r = _module("verify", "moyal", "--case", "hermiticity", "--format", "json",
                COVARIANT_WEYL_SLOPE_TOL="0.25")
    assert r.returncode == 0
    assert json.loads(r.stdout)["config"]["tolerances"]["slope_tol"] == 0.25
    bad = _module("catalog", "--list", COVARIANT_WEYL_TOL_ODE="-1")
    assert bad.returncode == 2 and "TOL_ODE" in bad.stderr
