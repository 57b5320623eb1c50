import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest
import yaml

from quadfloquet import cli
from quadfloquet.config import ConfigError, load_config, parse_grid
from quadfloquet.output import fmt, sha256_file


def write_cfg(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def run(cfg_path, command, out, *extra):
    return cli.main([command, "--config", str(cfg_path), "--out", str(out), *extra])


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


STATIC = {"lattice": {"L": 4, "J1": 0.35, "J2": 0.5, "F0": 0.04}}
SWEEP = {"lattice": {"L": 3, "J1": 1.0, "F0": 1.0},
         "drive": {"omega_grid": {"start": 1.0, "stop": 3.0, "step": 0.5}}}
EVOLVE = {"lattice": {"L": 3, "J1": 1.0, "J2": 1.2, "F0": 1.0},
          "drive": {"omega": 4.0},
          "dynamics": {"mode_indices": [2, 3, 4], "dt": 0.1, "t_max": 30.0}}
DISORDER = {"lattice": {"L": 3, "J1": 2.0, "F0": 1.0},
            "drive": {"omega": 5.0},
            "dynamics": {"mode_indices": [2, 3, 4]},
            "disorder": {"lambda_grid": [0.0, 0.5], "n_realizations": 2, "n_periods": 2},
            "seed": 11}


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, -2.5e-300, 1e300, 123456789.123456789):
        assert float(fmt(x)) == x
    assert fmt(3) == "3" and fmt(np.int64(4)) == "4"


def test_parse_grid():
    g = parse_grid({"start": 0.5, "stop": 1.0, "step": 0.1})
    assert g == (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    assert parse_grid([1, 2]) == (1.0, 2.0)
    with pytest.raises(ConfigError):
        parse_grid({"start": 1, "stop": 2})


def test_config_precedence_and_defaults(tmp_path):
    p = write_cfg(tmp_path, {**EVOLVE, "method": "sambe", "output_dir": "x"})
    cfg = load_config(p, command="evolve")
    assert cfg.lattice.boundary.value == "periodic" and cfg.method.value == "sambe"
    cfg = load_config(p, command="evolve", method="propagator", boundary="open", out="y")
    assert cfg.method.value == "propagator" and cfg.lattice.boundary.value == "open"
    assert str(cfg.output_dir) == "y"
    s = write_cfg(tmp_path, STATIC, "s.yaml")
    assert load_config(s, command="static-spectrum").lattice.boundary.value == "open"


@pytest.mark.parametrize("patch,msg", [
    ({"lattice": {"L": 3, "J1": 1.0}}, "missing"),
    ({"drive": {"omega": 1.0, "omega_grid": [1, 2]}}, "exactly one"),
    ({"drive": {}}, "exactly one"),
    ({"bogus": 1}, "unknown"),
    ({"dynamics": {"mode_indices": [1, 1]}}, "duplicate"),
    ({"dynamics": {"mode_indices": [1], "dt": 0.1, "t_max": 0.05}}, "t_max"),
    ({"drive": {"omega_grid": [2.0, 1.0]}}, "increasing"),
])
def test_config_errors(tmp_path, patch, msg):
    p = write_cfg(tmp_path, {**EVOLVE, **patch})
    with pytest.raises(ConfigError, match=msg):
        load_config(p, command="evolve")


def test_config_error_exit_code(tmp_path, capsys):
    p = write_cfg(tmp_path, {**EVOLVE, "dynamics": {"mode_indices": [0], "dt": 0.1, "t_max": 0.01}})
    assert run(p, "evolve", tmp_path / "o") == cli.EXIT_CONFIG
    assert "t_max" in capsys.readouterr().err
    assert not (tmp_path / "o" / "trace.csv").exists()


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    p = write_cfg(tmp_path, STATIC)
    assert run(p, "static-spectrum", blocker / "sub") == cli.EXIT_CONFIG


def test_static_spectrum_outputs(tmp_path):
    p = write_cfg(tmp_path, STATIC)
    out = tmp_path / "o"
    assert run(p, "static-spectrum", out) == 0
    ev = read_csv(out / "eigenvalues.csv")
    assert ev[0] == ["index", "re", "im"] and len(ev) == 10
    states = np.array(read_csv(out / "states.csv")[1:], dtype=float)
    np.testing.assert_allclose(states[:, 1:].sum(axis=0), 1.0, atol=1e-12)
    cl = read_csv(out / "classification.csv")
    assert cl[0] == ["index", "family", "mean_abs_site", "center_of_mass", "n_c"]
    assert {r[1] for r in cl[1:]} <= {"center", "edge"}
    man = json.loads((out / "manifest.json").read_text())
    for name, digest in man["checksums"].items():
        assert sha256_file(out / name) == digest
    assert set(man["checksums"]) == {"eigenvalues.csv", "states.csv", "classification.csv"}


def test_static_free_band_symmetric(tmp_path):
    p = write_cfg(tmp_path, {"lattice": {"L": 5, "J1": 1.0, "F0": 0.0}})
    out = tmp_path / "o"
    assert run(p, "static-spectrum", out) == 0
    e = np.array(read_csv(out / "eigenvalues.csv")[1:], dtype=float)[:, 1]
    np.testing.assert_allclose(np.sort(e), -np.sort(e)[::-1], atol=1e-12)


def test_sweep_outputs(tmp_path, capsys):
    p = write_cfg(tmp_path, SWEEP)
    out = tmp_path / "o"
    assert run(p, "sweep", out, "--plot") == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == ["omega", "delta", "mipr", "max_imag", "mean_spacing", "refined", "error"]
    grid_rows = [r for r in rows[1:] if r[5] == "0"]
    assert [float(r[0]) for r in grid_rows] == [1.0, 1.5, 2.0, 2.5, 3.0]
    assert len(read_csv(out / "ladder.csv")) == 8
    assert (out / "delta.svg").exists()
    assert "quasi-energies at omega_c" in capsys.readouterr().out


def test_single_point_sweep(tmp_path):
    p = write_cfg(tmp_path, {**SWEEP, "drive": {"omega_grid": [2.0]}})
    out = tmp_path / "o"
    assert run(p, "sweep", out) == 0
    assert len(read_csv(out / "sweep.csv")) == 2


def test_evolve_outputs(tmp_path, capsys):
    p = write_cfg(tmp_path, EVOLVE)
    out = tmp_path / "o"
    assert run(p, "evolve", out) == 0
    tr = read_csv(out / "trace.csv")
    assert tr[0] == ["t", "fidelity", "norm"] and len(tr) == 302
    sp = read_csv(out / "siteprob.csv")
    assert sp[0][:2] == ["t", "l=-3"] and len(sp[0]) == 8
    assert (out / "siteprob_raw.csv").exists()
    rep = json.loads((out / "revivals.json").read_text())
    assert {"peak_times", "peak_fidelities", "period_estimate", "predicted_period"} <= set(rep)
    assert "mode index" in capsys.readouterr().out


def test_evolve_short_trace_is_partial(tmp_path):
    p = write_cfg(tmp_path, {**EVOLVE, "dynamics": {"mode_indices": [2, 3], "t_max": 0.5}})
    out = tmp_path / "o"
    assert run(p, "evolve", out) == cli.EXIT_PARTIAL
    assert "error" in json.loads((out / "revivals.json").read_text())
    assert json.loads((out / "manifest.json").read_text())["status"] == "partial"


def test_evolve_numerical_failure(tmp_path):
    cfg = {"lattice": {"L": 3, "J1": 1.0, "J2": 3.0, "F0": 0.0}, "drive": {"omega": 5.0},
           "dynamics": {"mode_indices": [0, 3], "t_max": 200.0}}
    p = write_cfg(tmp_path, cfg)
    assert run(p, "evolve", tmp_path / "o") == cli.EXIT_NUMERIC


def test_disorder_outputs(tmp_path):
    p = write_cfg(tmp_path, DISORDER)
    out = tmp_path / "o"
    assert run(p, "disorder", out) == 0
    rows = read_csv(out / "disorder.csv")
    assert rows[0] == ["lambda", "mean_fmax", "std_fmax", "n_ok", "n_failed", "n_negative"]
    assert rows[1][2] == "0"  # no spread without disorder
    man = json.loads((out / "manifest.json").read_text())
    assert man["prng"].startswith("PCG64")
    side = json.loads((out / "disorder.json").read_text())
    assert side["master_seed"] == 11 and len(side["seeds"]) == 2


def test_seed_flag_overrides(tmp_path):
    p = write_cfg(tmp_path, DISORDER)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(p, "disorder", a) == 0
    assert run(p, "disorder", b, "--seed", "12") == 0
    assert json.loads((b / "disorder.json").read_text())["master_seed"] == 12
    assert (a / "disorder_realizations.csv").read_bytes() != (b / "disorder_realizations.csv").read_bytes()


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    p = write_cfg(tmp_path, STATIC)
    r = subprocess.run([sys.executable, "-m", "quadfloquet", "static-spectrum", "--config", str(p),
                        "--out", str(tmp_path / "o")], capture_output=True, text=True,
                       env={**os.environ})
    assert r.returncode == 0, r.stderr
    assert Path(tmp_path / "o" / "manifest.json").exists()


def test_shipped_configs_validate():
    root = Path(__file__).resolve().parent.parent / "configs"
    commands = {"static": "static-spectrum", "sweep": "sweep", "evolve": "evolve", "disorder": "disorder"}
    paths = sorted(root.glob("*.yaml"))
    assert paths
    for path in paths:
        load_config(path, command=commands[path.stem.split("_")[0]])
