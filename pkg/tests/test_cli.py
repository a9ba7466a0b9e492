import json
import os

import numpy as np
import pytest

from capstokes import config as cfgmod
from capstokes.cli import main, parse_rect
from capstokes.errors import ConfigError
from capstokes.grid import read_csv

COSINE = """\
# small cosine on the circle
grid.mode = periodic
grid.length = 6.283185307179586
grid.n = 64
params.sigma = 1
params.mu = 1
init.kind = cosine
init.amplitude = 1e-3
init.k = 2
time.t_end = 1
output.dir = {out}
"""

BUMP = """\
grid.mode = line
grid.length = 20
grid.n = 401
params.sigma = 1
params.mu = 1
init.kind = gaussian
init.amplitude = {amp}
output.dir = {out}
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_simulate_cosine_decays(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", _write(tmp_path, "c.cfg", COSINE.format(out=out))]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert all((out / f).exists() for f in man["outputs"])
    assert man["status"] == "completed" and len(man["input_hash"]) == 64
    diag = read_csv(out / "diagnostics.csv")
    amp = diag["max_abs_f"]
    rate = -np.polyfit(diag["t"], np.log(amp), 1)[0]
    assert rate == pytest.approx(0.5, rel=0.02)
    assert "completed" in capsys.readouterr().out


def test_simulate_flat_gaussian(tmp_path):
    out = tmp_path / "flat"
    text = BUMP.format(amp=0.0, out=out) + "time.t_end = 0.5\n"
    assert main(["simulate", _write(tmp_path, "b.cfg", text)]) == 0
    snaps = sorted(p for p in os.listdir(out) if p.startswith("snap_"))
    assert all(np.all(read_csv(out / s)["f"] == 0) for s in snaps)


def test_simulate_blow_up_exit_code(tmp_path):
    text = COSINE.format(out=tmp_path / "b").replace("init.k = 2", "init.k = 30")
    text += "time.dt = 1.0\n"
    text = text.replace("time.t_end = 1", "time.t_end = 40")
    assert main(["simulate", _write(tmp_path, "u.cfg", text)]) == 2


def test_missing_key_is_named(tmp_path, capsys):
    text = COSINE.format(out=tmp_path / "x").replace("params.mu = 1\n", "")
    assert main(["simulate", _write(tmp_path, "m.cfg", text)]) == 1
    assert "params.mu" in capsys.readouterr().err


def test_unknown_and_malformed_keys(tmp_path, capsys):
    assert main(["simulate", _write(tmp_path, "u.cfg", COSINE.format(out="o") + "grid.nn = 3\n")]) == 1
    assert "grid.nn" in capsys.readouterr().err
    assert main(["simulate", _write(tmp_path, "v.cfg", COSINE.format(out="o") + "just text\n")]) == 1
    assert main(["simulate", _write(tmp_path, "w.cfg", COSINE.format(out="o").replace("= 64", "= many"))]) == 1
    assert "grid.n" in capsys.readouterr().err


def test_output_dir_env_override(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(cfgmod.OUTPUT_ENV, str(target))
    path = _write(tmp_path, "c.cfg", COSINE.format(out=tmp_path / "ignored").replace("time.t_end = 1", "time.t_end = 0.2"))
    assert main(["simulate", path]) == 0
    assert (target / "summary.json").exists() and not (tmp_path / "ignored").exists()


def test_restart_from_snapshot(tmp_path):
    out = tmp_path / "a"
    assert main(["simulate", _write(tmp_path, "c.cfg", COSINE.format(out=out))]) == 0
    text = COSINE.format(out=tmp_path / "b").replace("init.kind = cosine", "init.kind = file")
    text += f"init.path = {out / 'snap_00000.csv'}\n"
    text = "\n".join(line for line in text.splitlines() if not line.startswith(("init.amplitude", "init.k ")))
    assert main(["simulate", _write(tmp_path, "r.cfg", text + "\n")]) == 0
    last = sorted(p for p in os.listdir(out) if p.startswith("snap_"))[-1]
    a = read_csv(out / last)["f"]
    b = read_csv(tmp_path / "b" / last)["f"]
    assert np.array_equal(a, b)


def test_simulate_outputs_are_deterministic(tmp_path):
    for name in ("one", "two"):
        main(["simulate", _write(tmp_path, f"{name}.cfg", COSINE.format(out=tmp_path / name))])
    for f in ("diagnostics.csv", "snap_00005.csv"):
        assert (tmp_path / "one" / f).read_bytes() == (tmp_path / "two" / f).read_bytes()


def test_field_command(tmp_path, capsys):
    out = tmp_path / "fld"
    cfg = _write(tmp_path, "f.cfg", BUMP.format(amp=0.3, out=out))
    assert main(["field", cfg, "--rect=-2:2:9,-1:1:9"]) == 0
    msg = capsys.readouterr().out
    assert "skipped" in msg
    d = read_csv(out / "field.csv")
    assert list(d) == ["x1", "x2", "v1", "v2", "q"]
    skipped = int(msg.split("skipped ")[1].split()[0])
    assert skipped > 0 and len(d["x1"]) + skipped == 81
    lookup = {(a, b): v for a, b, v in zip(d["x1"], d["x2"], d["v1"])}
    for (a, b), v in lookup.items():
        if (-a, b) in lookup:
            assert v == pytest.approx(-lookup[(-a, b)], abs=1e-10)
    man = json.loads((out / "manifest.json").read_text())
    assert man["skipped"] == skipped


def test_field_command_flat_profile(tmp_path):
    out = tmp_path / "flat"
    cfg = _write(tmp_path, "f.cfg", BUMP.format(amp=0.0, out=out))
    assert main(["field", cfg, "--rect=-1:1:3,0.5:1:2"]) == 0
    d = read_csv(out / "field.csv")
    assert len(d["v1"]) == 6
    assert all(np.all(d[c] == 0) for c in ("v1", "v2", "q"))


def test_parse_rect():
    x1, x2 = parse_rect("-1:1:3,0:2:5")
    assert list(x1) == [-1, 0, 1] and len(x2) == 5
    with pytest.raises(ConfigError, match="bad-rect"):
        parse_rect("1:2")


def test_linearize(capsys, tmp_path):
    assert main(["linearize", "--k", "1,2,4", "--out", str(tmp_path / "lin.csv")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,measured_symbol,exact_symbol"
    d = read_csv(tmp_path / "lin.csv")
    assert np.allclose(d["measured_symbol"], d["exact_symbol"], atol=1e-10)
    assert np.allclose(d["exact_symbol"], [-0.25, -0.5, -1.0])


def test_bench(capsys, tmp_path):
    assert main(["bench", "--n", ""]) == 1
    code = main(["bench", "--n", "256,512", "--thread-list", "1", "--repeat", "1", "--out", str(tmp_path / "b.csv")])
    assert code in (0, 3)
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,threads,seconds,nodes_per_sec" and len(out) == 3
    assert list(read_csv(tmp_path / "b.csv")) == ["n", "threads", "seconds", "nodes_per_sec"]


def test_validate_quick(capsys):
    assert main(["validate", "quick"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "5/5 checks passed" in out


def test_threads_flag(tmp_path):
    assert main(["--threads", "0", "linearize"]) == 1
    assert main(["--threads", "2", "linearize", "--k", "3"]) == 0
