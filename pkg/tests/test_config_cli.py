import copy
import json
from pathlib import Path

import pytest
from filelock import FileLock

from synthcavity import cli
from synthcavity.config import ConfigError, leaf_paths, load, schema_for, validate
from synthcavity.errors import IntegratorError

CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.toml"))

SMALL_PULSE = """
experiment = "pulse"
sites = [0, 1]

[chain]
j0 = 0.5
l_max = 5
step = 4
eta = [0.017]

[grid.t]
start = 0.0
stop = 10.0
points = 21
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_example_configs_validate(path):
    cfg, digest = load(path)
    assert cfg["experiment"] in cli.PIPELINES
    assert len(digest) == 64


def _schema_at(schema, path):
    for key in path:
        schema = schema["properties"][key]
    return schema


def _bad_value(leaf_schema, value):
    if "maximum" in leaf_schema:
        return leaf_schema["maximum"] * 2 + 1
    if "minimum" in leaf_schema:
        return leaf_schema["minimum"] - 1
    if "exclusiveMinimum" in leaf_schema:
        return leaf_schema["exclusiveMinimum"] - 1
    if leaf_schema.get("type") == "array":
        return [-1e9]
    return 12345 if isinstance(value, str) else "wrong"


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_single_key_mutation_fails(path):
    cfg, _ = load(path)
    schema = schema_for(cfg["experiment"])
    for leaf in leaf_paths(cfg):
        mutated = copy.deepcopy(cfg)
        node = mutated
        for key in leaf[:-1]:
            node = node[key]
        node[leaf[-1]] = _bad_value(_schema_at(schema, leaf), node[leaf[-1]])
        with pytest.raises(ConfigError):
            validate(mutated)


def test_unknown_key_is_named():
    raw = {"experiment": "sweep", "chain": {"jay0": 0.5}, "grid": {"j0": {"start": 0, "stop": 1, "points": 3}}}
    with pytest.raises(ConfigError, match="jay0"):
        validate(raw)


def test_range_error_names_key():
    with pytest.raises(ConfigError, match="optics.steps.0"):
        validate({"experiment": "optics-tables", "optics": {"steps": [0]}})
    with pytest.raises(ConfigError, match="chain.step"):
        validate({"experiment": "pulse", "chain": {"step": 0}, "grid": {"t": {"start": 0, "stop": 1, "points": 3}}})


def test_type_error_names_key():
    with pytest.raises(ConfigError, match="chain.j1.*number"):
        validate({"experiment": "pulse", "chain": {"j1": "one"}, "grid": {"t": {"start": 0, "stop": 1, "points": 3}}})


def test_empty_and_reversed_grids():
    base = {"experiment": "pulse", "chain": {}}
    with pytest.raises(ConfigError, match="grid.t.points"):
        validate({**base, "grid": {"t": {"start": 0, "stop": 1, "points": 0}}})
    with pytest.raises(ConfigError, match="grid.t"):
        validate({**base, "grid": {"t": {"start": 1, "stop": 1, "points": 5}}})


def test_defaults_and_soft_restriction():
    cfg = validate({"experiment": "floquet-bands", "grid": {"k": {"points": 64}}})
    assert cfg["drive"]["lam"] == 1.6 and cfg["seed"] == 0
    with pytest.raises(ConfigError, match="soft"):
        validate({"experiment": "pulse", "chain": {"boundary": "soft"}, "grid": {"t": {"start": 0, "stop": 1, "points": 3}}})


def test_unparsable_file(tmp_path):
    path = write(tmp_path, "experiment = [")
    with pytest.raises(ConfigError, match="cannot parse"):
        load(path)


def test_run_is_deterministic(tmp_path):
    path = write(tmp_path, SMALL_PULSE)
    assert cli.main(["pulse", "--config", str(path), "--output", str(tmp_path / "a")]) == 0
    assert cli.main(["pulse", "--config", str(path), "--output", str(tmp_path / "b"), "--threads", "3"]) == 0
    a = (tmp_path / "a" / "pulse_traces.csv").read_bytes()
    assert a == (tmp_path / "b" / "pulse_traces.csv").read_bytes()
    assert a.splitlines()[0] == b"t,site,N"
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["input_sha256"] == load(path)[1]
    assert set(manifest["versions"]) >= {"synthcavity", "numpy", "scipy"}
    assert "wall_time_s" in manifest
    recipe = json.loads((tmp_path / "a" / "plot_recipe.json").read_text())
    assert recipe["plots"]


def test_overwrite_refused_then_allowed(tmp_path, capsys):
    path = write(tmp_path, SMALL_PULSE)
    out = str(tmp_path / "out")
    assert cli.main(["pulse", "--config", str(path), "--output", out]) == 0
    before = (tmp_path / "out" / "pulse_traces.csv").stat().st_mtime_ns
    assert cli.main(["pulse", "--config", str(path), "--output", out]) == 4
    assert "overwrite" in capsys.readouterr().err
    assert (tmp_path / "out" / "pulse_traces.csv").stat().st_mtime_ns == before
    assert cli.main(["pulse", "--config", str(path), "--output", out, "--overwrite"]) == 0


def test_locked_directory(tmp_path):
    path = write(tmp_path, SMALL_PULSE)
    out = tmp_path / "out"
    out.mkdir()
    with FileLock(str(out / ".synthcavity.lock")):
        assert cli.main(["pulse", "--config", str(path), "--output", str(out)]) == 4
    assert not (out / "pulse_traces.csv").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path, SMALL_PULSE.replace("j0 = 0.5", "jay0 = 0.5"))
    assert cli.main(["pulse", "--config", str(bad), "--output", str(tmp_path / "o")]) == 2
    assert "jay0" in capsys.readouterr().err
    good = write(tmp_path, SMALL_PULSE, "good.toml")
    assert cli.main(["sweep", "--config", str(good), "--output", str(tmp_path / "o")]) == 2
    assert cli.main(["pulse", "--config", str(good)]) == 2
    assert not (tmp_path / "o").exists()


def test_missing_config_exit_4(tmp_path):
    assert cli.main(["pulse", "--config", str(tmp_path / "nope.toml"), "--output", str(tmp_path)]) == 4


def test_numeric_failure_exit_3(tmp_path, monkeypatch, capsys):
    def boom(cfg, out, threads):
        raise IntegratorError("sweep point J0'=0.7: step size underflow")

    monkeypatch.setitem(cli.PIPELINES, "pulse", boom)
    path = write(tmp_path, SMALL_PULSE)
    assert cli.main(["pulse", "--config", str(path), "--output", str(tmp_path / "o")]) == 3
    assert "J0'=0.7" in capsys.readouterr().err
    assert not list((tmp_path / "o").glob("*.csv"))


def test_csv_columns_declared():
    with pytest.raises(ValueError):
        cli.render_csv("edge_sweep.csv", [(1.0, 2.0, 3.0)])
    assert cli.render_csv("edge_sweep.csv", [(0.5, 1e-3)]).startswith(b"J0prime,N0_at_tstar\n")
