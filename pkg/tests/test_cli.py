import csv
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from closedmems import ConfigError, CsvTable, parse_config
from closedmems.cli import main, run_command
from closedmems.cli_io import format_value

REF = "gamma = 0.5\np = 1\nn = 256\ndomain = interval 0 1\n"


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_sha256 = ")
    return list(csv.DictReader(lines[1:]))


def test_parse_happy_path():
    cfg = parse_config(REF)
    assert cfg.domain.extents == (1.0,) and cfg.origin == (0.0,)
    assert (cfg.gamma, cfg.p, cfg.n) == (0.5, 1.0, 256)


def test_parse_accepts_minimal_and_comments():
    cfg = parse_config("# nothing else\ngamma = 1.5   # large\np = 2\n")
    assert cfg.domain is None and cfg.gamma == 1.5


def test_parse_collects_all_errors():
    with pytest.raises(ConfigError) as exc:
        parse_config("p = -1\ncolour = red\nn = two\nrel_tol = 0.5\n")
    msgs = exc.value.errors
    assert len(msgs) == 5
    assert any("unknown key 'colour'" in m for m in msgs)
    assert any("'p' must be positive" in m for m in msgs)
    assert any("missing required key 'gamma'" in m for m in msgs)
    assert any("'n'" in m for m in msgs)
    assert any("rel_tol" in m for m in msgs)


def test_parse_rejects_duplicates_and_kappa():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("gamma = 0.5\ngamma = 0.6\np = 1\n")
    with pytest.raises(ConfigError, match="kappa"):
        parse_config("gamma = 0.5\np = 1\nkappa = 2\n")


def test_digest_ignores_formatting():
    a = parse_config(REF)
    b = parse_config("  p=1.0\n#x\ngamma=0.50\ndomain = interval 1\nn=256\n")
    assert a.digest == b.digest
    assert a.digest != parse_config(REF.replace("256", "512")).digest


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(format_value(x)) == x


def test_csv_quotes_and_column_count():
    t = CsvTable(["a", "b"])
    t.add(1, "x, y")
    assert t.render().splitlines()[1] == '1,"x, y"'
    with pytest.raises(ValueError):
        t.add(1)


def test_classify_output(tmp_path, capsys):
    assert main(["classify", "--config", write_cfg(tmp_path, "gamma = 0.5\np = 1\nN = 3\n"), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "classify.txt").read_text()
    assert "regime = ExistsMinimal" in text and "p_star = 3\n" in text
    assert "regime = ExistsMinimal" in capsys.readouterr().out


def test_classify_gamma_large(tmp_path):
    assert main(["classify", "--config", write_cfg(tmp_path, "gamma = 1.5\np = 2\n"), "--out", str(tmp_path)]) == 0
    assert "regime = NoSolutionGammaLarge" in (tmp_path / "classify.txt").read_text()


def test_validation_exit_code(tmp_path, capsys):
    assert main(["solve", "--config", write_cfg(tmp_path, "p = -1\n")]) == 1
    err = capsys.readouterr().err
    assert "must be positive" in err and "gamma" in err
    # missing command-specific key
    assert main(["solve", "--config", write_cfg(tmp_path, REF)]) == 1
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_solve_outputs_and_touchdown(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--config", write_cfg(tmp_path, REF + "lambda = 0.5\n"), "--out", str(out)]) == 0
    rows = read_csv(out / "solution.csv")
    assert len(rows) == 255 and set(rows[0]) == {"x", "rho", "a", "u", "gap"}
    assert read_csv(out / "summary.csv")[0]["status"] == "Converged"
    assert (out / "u_profile.dat").read_text().splitlines()[1].count(" ") == 1
    assert main(["solve", "--config", write_cfg(tmp_path, REF + "lambda = 2\n"), "--out", str(out)]) == 0
    assert read_csv(out / "summary.csv")[0]["status"] == "Touchdown"


def test_solver_failure_exit_code(tmp_path):
    assert main(["stability", "--config", write_cfg(tmp_path, REF + "lambda = 2\n"), "--out", str(tmp_path)]) == 2


def test_sweep_sorted_monotone(tmp_path):
    cfg = REF + "lambda_min = 0.05\nlambda_max = 0.9\nlambda_count = 7\n"
    assert main(["sweep", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    lams = [float(r["lambda"]) for r in rows]
    assert lams == sorted(lams)
    sups = [float(r["sup_norm_u"]) for r in rows if r["status"] == "Converged"]
    assert sups == sorted(sups) and len(sups) >= 5


@pytest.mark.parametrize("cmd,files", [
    ("pullin", ["pullin.csv"]),
    ("stability", ["stability.csv", "eigenfield.csv", "eigenfield.dat"]),
    ("decay", ["decay.csv"]),
    ("extremal", ["extremal.csv"]),
])
def test_commands_write_files(tmp_path, cmd, files):
    cfg = REF + "lambda = 0.3\n"
    assert main([cmd, "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    digest = parse_config(cfg).digest
    for name in files:
        assert (tmp_path / name).read_text().splitlines()[0] == f"# config_sha256 = {digest}"


def test_byte_identical_runs(tmp_path):
    cfg = parse_config(REF + "lambda = 0.4\n")
    for d in ("a", "b"):
        assert run_command("solve", cfg, tmp_path / d, log=lambda s: None) == 0
    for name in ("solution.csv", "summary.csv", "u_profile.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert b"\r" not in (tmp_path / "a" / "solution.csv").read_bytes()


def test_disk_solve(tmp_path):
    cfg = "gamma = 0.5\np = 1\nn = 24\ndomain = disk 1\nlambda = 0.3\n"
    assert main(["solve", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    assert set(read_csv(tmp_path / "solution.csv")[0]) == {"x", "y", "rho", "a", "u", "gap"}


def test_console_script_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "closedmems.cli", "classify", "--config",
                           write_cfg(tmp_path, "gamma = 1\np = 0.5\n"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "regime = ExistsMinimal" in proc.stdout
