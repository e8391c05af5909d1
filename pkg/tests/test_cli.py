import json

import pytest

from nbmlgd.cli import main
from nbmlgd.code import load_alist

TOML = """
seed = 5
snr_db = [3.0]
min_block_errors = 10
max_frames = 400
batch_size = 20
timing = false

[code]
N = 48
gamma = 3
rho = 6
r = 3
seed = 2

[[decoder]]
variant = "ISRB"
lam = 8

[[decoder]]
variant = "IISRB"
xi1 = 2
"""


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(TOML)
    return p


def test_run_and_compare(tmp_path, spec_file, capsys):
    out = tmp_path / "out"
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(out)]) == 0
    assert (out / "results.csv").exists() and (out / "results.json").exists()
    capsys.readouterr()
    assert main(["compare", str(out / "results.json"), "--a", "ISRB", "--b", "IISRB"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("snr_db,variant_a,variant_b")
    assert main(["compare", str(out / "results.json"), "--format", "json", "--out-dir", str(tmp_path / "c")]) == 1


def test_run_seed_override_and_determinism(tmp_path, spec_file):
    a, b, c = (tmp_path / x for x in "abc")
    main(["run", "--spec", str(spec_file), "--out-dir", str(a), "--seed", "9"])
    main(["run", "--spec", str(spec_file), "--out-dir", str(b), "--seed", "9"])
    main(["run", "--spec", str(spec_file), "--out-dir", str(c)])
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "results.csv").read_bytes() != (c / "results.csv").read_bytes()
    assert json.loads((a / "results.json").read_text())["spec"]["seed"] == 9


def test_run_json_and_trace(tmp_path, spec_file):
    out = tmp_path / "o"
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(out), "--format", "json", "--trace"]) == 0
    assert not (out / "results.csv").exists()
    assert (out / "traces.jsonl").exists()


def test_exit_code_truncated(tmp_path, spec_file):
    spec_file.write_text(TOML.replace("min_block_errors = 10", "min_block_errors = 100000"))
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(tmp_path / "o")]) == 3


def test_exit_code_config_errors(tmp_path, spec_file):
    assert main(["run", "--out-dir", str(tmp_path)]) == 1
    spec_file.write_text(TOML.replace('"ISRB"', '"BP"'))
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(tmp_path)]) == 1
    spec_file.write_text("snr_db = [\n")
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(tmp_path)]) == 1
    assert main(["predict", "--N", "10"]) == 1


def test_exit_code_io_errors(tmp_path, spec_file):
    assert main(["run", "--spec", str(tmp_path / "missing.toml")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--spec", str(spec_file), "--out-dir", str(blocker / "sub")]) == 2
    assert main(["compare", str(tmp_path / "nope.json")]) == 2


def test_predict_table(capsys):
    assert main(["predict", "--N", "255", "--M", "255", "--gamma", "16", "--rho", "16", "--r", "8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "variant,phase,fa,fm,ia,ic,im,id,floor"
    assert "RS-IISRB,iteration,7937,8176,8417,13515,0,0,0" in lines
    assert "ISRB,init,0,0,522240,696417750,65280,0,0" in lines


def test_predict_from_spec_json(spec_file, capsys):
    assert main(["predict", "--spec", str(spec_file), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["code"] == dict(N=48, M=24, gamma=3, rho=6, r=3)


def test_genmatrix(tmp_path, capsys):
    p = tmp_path / "H.alist"
    assert main(["genmatrix", "--N", "8", "--gamma", "2", "--rho", "4", "--r", "2", "--seed", "1", "-o", str(p)]) == 0
    H = load_alist(p)
    assert (H.M, H.N, H.regularity) == (4, 8, (2, 4))
    capsys.readouterr()
    assert main(["genmatrix", "--N", "8", "--gamma", "2", "--rho", "4", "--r", "2", "--seed", "1"]) == 0
    assert capsys.readouterr().out == p.read_text()
    assert main(["genmatrix", "--N", "9", "--gamma", "2", "--rho", "4", "--r", "2"]) == 1


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 8 and "FAIL" not in out
