import json

import jsonschema
import numpy as np
import pytest

from dunkl_tl.config import ConfigError, RunConfig, load_config, parse_config
from dunkl_tl.grid import GridMismatch
from dunkl_tl.io import load_function, render_report, save_coefficients, save_function, save_kernel
from dunkl_tl.littlewood_paley import analyze


def test_parse_config_values():
    cfg = parse_config("""
        # comment line
        kappa = 0.25   # trailing comment
        m = 256
        subspace = false
        test_window = (-1, 4)
    """)
    assert cfg.kappa == 0.25 and cfg.m == 256 and cfg.subspace is False
    assert cfg.test_window == (-1, 4)


def test_parse_config_roots():
    cfg = parse_config("roots = [[1, 0], [0, 1]]\nkappa = [0.5, 1.0]\nm = 16")
    assert cfg.dimension == 2 and cfg.preset is None and cfg.kappa == (0.5, 1.0)


@pytest.mark.parametrize(
    "text, match",
    [
        ("kapa = 1", "unknown key"),
        ("m = 64\nm = 128", "duplicate"),
        ("m 64", "key = value"),
        ("m = 63", "even"),
        ("L = -1", "positive"),
        ("k_min = 4\nk_max = 2", "below"),
        ("band_tol = 1.5", "band_tol"),
        ("preset = 'a2'", "unknown preset"),
    ],
)
def test_parse_config_rejects(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_load_config(tmp_path):
    assert load_config(None) == RunConfig()
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.cfg")
    path = tmp_path / "run.cfg"
    path.write_text("M = 3\n")
    assert load_config(path).M == 3


def test_defaults_resolved():
    cfg = RunConfig()
    assert cfg.m == 512 and cfg.test_window == (-2, 5)
    assert RunConfig(preset="z2xz2").m == 32


def test_function_round_trip_exact(tmp_path, small):
    f = small.bandlimited(11)
    path = tmp_path / "f.csv"
    save_function(path, f, small.grid)
    assert np.array_equal(load_function(path, small.grid), f)


def test_function_round_trip_2d(tmp_path, setting_2d):
    f = setting_2d.bandlimited(3)
    path = tmp_path / "f.csv"
    save_function(path, f, setting_2d.grid)
    assert path.read_text().splitlines()[0] == "x1,x2,value"
    assert np.array_equal(load_function(path, setting_2d.grid), f)


def test_wrong_resolution_names_row(tmp_path, small, setting):
    path = tmp_path / "f.csv"
    save_function(path, setting.bandlimited(0), setting.grid)
    with pytest.raises(GridMismatch, match="row 1:"):
        load_function(path, small.grid)


def test_truncated_file(tmp_path, small):
    path = tmp_path / "f.csv"
    save_function(path, np.zeros(small.grid.size), small.grid)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(GridMismatch, match=f"row {small.grid.size}"):
        load_function(path, small.grid)


def test_header_mismatch(tmp_path, small):
    path = tmp_path / "f.csv"
    path.write_text("x,value\n0,0\n")
    with pytest.raises(GridMismatch, match="header"):
        load_function(path, small.grid)


def test_non_finite_value(tmp_path, small):
    path = tmp_path / "f.csv"
    f = np.zeros(small.grid.size)
    save_function(path, f, small.grid)
    lines = path.read_text().splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0] + ",nan"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="row 3"):
        load_function(path, small.grid)


def test_save_function_shape(tmp_path, small):
    with pytest.raises(GridMismatch):
        save_function(tmp_path / "f.csv", np.zeros(3), small.grid)


def test_kernel_dump(tmp_path):
    k = np.arange(9.0).reshape(3, 3)
    path = tmp_path / "k.csv"
    save_kernel(path, 0.5, k)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape == (9, 4)
    assert np.array_equal(table[:, 3], k.ravel()) and np.all(table[:, 0] == 0.5)


def test_coefficient_dump(tmp_path, small):
    c = analyze(small.bandlimited(0), small.lp, windowed=True)
    path = tmp_path / "c.csv"
    save_coefficients(path, c)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,cube_index,center1,omega_Q,value,windowed"
    assert len(lines) - 1 == sum(len(v) for v in c.values.values())


def test_report_schema_and_determinism():
    rep = {"command": "x", "config": RunConfig().to_dict(), "summary": {"a": np.float64(1.5), "b": np.inf},
           "passed": True}
    text = render_report(rep)
    assert text == render_report(rep)
    doc = json.loads(text)
    assert doc["summary"]["b"] == "inf" and doc["config"]["test_window"] == [-2, 5]
    with pytest.raises(jsonschema.ValidationError):
        render_report({"command": "x"})
