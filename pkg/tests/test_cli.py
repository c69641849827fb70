import json
import os
import re
import subprocess
import sys

import pytest

from surfacemmp.cli import main

from conftest import FIXTURES, ROOT, invalid_fixtures, valid_fixtures


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def expected_diagnostic(path):
    m = re.search(r"^# expect: (.+)$", path.read_text(), re.M)
    return m.group(1).strip()


@pytest.mark.parametrize("path", valid_fixtures(), ids=lambda p: p.stem)
def test_valid_fixtures_pass(capsys, path):
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0, out
    assert "valid" in out and "INVALID" not in out


@pytest.mark.parametrize("path", invalid_fixtures(), ids=lambda p: p.stem)
def test_invalid_fixtures_fail_with_diagnostic(capsys, path):
    code, out, err = run(capsys, "validate", str(path))
    assert code == 1
    assert expected_diagnostic(path) in out + err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "no/such/file")
    assert code == 2 and "no such model file" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["mmp-run"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "analyze", str(FIXTURES / "p2.toml"), "--divisor", "H")
    assert code == 2 and "NAME=p/q" in err


def test_extension_optional(capsys):
    code, out, _ = run(capsys, "mmp-run", str(FIXTURES / "blowup-p2"))
    assert code == 0 and "FanoRhoOne" in out


def test_env_override(capsys, tmp_path, monkeypatch):
    (tmp_path / "p2.toml").write_text((FIXTURES / "p1xp1.toml").read_text())
    monkeypatch.setenv("SURFACEMMP_FIXTURES", str(tmp_path))
    code, out, _ = run(capsys, "mmp-run", "fixtures/p2", "--json")
    assert code == 0
    assert json.loads(out)["run"]["end_state"]["kind"] == "MoriFiberOverCurve"


def test_mmp_json(capsys):
    code, out, _ = run(capsys, "mmp-run", str(FIXTURES / "blowup-p2.toml"), "--json")
    report = json.loads(out)["run"]
    assert code == 0
    assert report["steps"][0]["discrepancy"] == "1/1"
    assert report["final"]["pairing"][0][0] == "9/1"


def test_mmp_config_error(capsys):
    code, _, err = run(capsys, "mmp-run", str(FIXTURES / "blowup-p2-fp.toml"))
    assert code == 1 and "<= 1" in err
    code, out, _ = run(capsys, "mmp-run", str(FIXTURES / "blowup-p2-fp.toml"), "--mode", "fp")
    assert code == 0


def test_engine_error_json(capsys):
    code, out, _ = run(capsys, "mmp-run", str(FIXTURES / "blowup-p2-fp.toml"), "--json")
    assert code == 1
    assert json.loads(out)["error"]["code"]


def test_classify(capsys):
    code, out, _ = run(capsys, "classify-singularity", str(FIXTURES / "cusp-223.toml"))
    assert code == 0 and "lc, not klt" in out
    code, out, _ = run(capsys, "classify-singularity", str(FIXTURES / "du-val.toml"), "--graph", "E6", "--dot")
    assert "canonical" in out and "graph" in out
    code, _, err = run(capsys, "classify-singularity", str(FIXTURES / "du-val.toml"), "--graph", "E9")
    assert code == 1


def test_polytope(capsys):
    code, out, _ = run(capsys, "nef-polytope", str(FIXTURES / "nodal-cubic.toml"), "--curves", "E", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["polytope"]["vertices"] == [["1/2"], ["1/1"]]


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", str(FIXTURES / "p2.toml"), "--divisor", "H=1", "--json")
    report = json.loads(out)
    assert code == 0
    assert report["report"]["euler_char"] == "3/1"


def test_lc_structure(capsys):
    code, out, _ = run(capsys, "lc-structure", str(FIXTURES / "lc-germs.toml"), "--graph", "cusp-333")
    assert code == 0 and "case (b)" in out


def test_byte_identical_reports():
    cmd = [sys.executable, "-m", "surfacemmp", "mmp-run", "fixtures/blowup-p2-two-points.toml", "--json"]
    env = dict(os.environ, PYTHONHASHSEED="random")
    first = subprocess.run(cmd, cwd=ROOT, capture_output=True, env=env, check=True).stdout
    second = subprocess.run(cmd, cwd=ROOT, capture_output=True, env=env, check=True).stdout
    assert first == second and first
