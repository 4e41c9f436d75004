"""Command-line runner: one subcommand per experiment, TOML in, CSV and JSON out.

    synthcavity static-spectrum --config configs/static_spectrum.toml --output out/ --threads 4

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 file-system failure (including refusing to overwrite).
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import os
import platform
import shutil
import sys
import tempfile
import time
from pathlib import Path
from typing import Callable

import numpy as np
import scipy
from filelock import FileLock, Timeout

from . import __version__
from .config import EXPERIMENTS, ConfigError, load
from .detect import find_jumps, midgap_report, transition_point
from .errors import SimulationError
from .floquet import (
    BlochDrive,
    DriveSpec,
    bloch_quasienergies,
    build_floquet_hamiltonian,
    drive_to_fourier,
    floquet_spectrum_response,
    winding_numbers,
)
from .lattice import SSHParams, build_ssh, build_total_chain, decay_profile, soft_boundary_chain
from .optics import OpticalSetup, eta_table
from .response import PulseSpec, edge_persistence_sweep, pulse_response, total_transmission

logger = logging.getLogger("synthcavity")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COLUMNS = {
    "pinhole_table.csv": ("n", "r_h_mm", "containment_l0", "j", "eta", "alpha"),
    "static_spectrum.csv": ("J0prime", "omega", "tau"),
    "pulse_traces.csv": ("t", "site", "N"),
    "edge_sweep.csv": ("J0prime", "N0_at_tstar"),
    "floquet_spectrum.csv": ("Omega", "omega", "T"),
    "floquet_bands.csv": ("k", "quasienergy_band1", "quasienergy_band2"),
    "winding.csv": ("Omega", "v0", "vplus", "T_at_0", "T_at_half"),
}


class Outputs:
    """Collected tables, summary and plot recipe of one run."""

    def __init__(self):
        self.tables: dict[str, list[tuple]] = {}
        self.summary: dict = {}
        self.plots: list[dict] = []

    def table(self, name: str, rows: list[tuple]) -> None:
        self.tables[name] = rows


def _grid(spec: dict) -> np.ndarray:
    return np.linspace(spec["start"], spec["stop"], spec["points"])


def _optics(cfg: dict, step: int) -> OpticalSetup:
    opt = cfg.get("optics", {})
    return OpticalSetup(
        focal_length=opt.get("focal_length", 100.0),
        wavelength=opt.get("wavelength", 0.885e-3),
        waist=opt.get("waist", 0.2),
        hopping_step=step,
    )


def _eta(cfg: dict, chain: dict) -> tuple[float, ...]:
    if chain.get("eta") is not None:
        return tuple(chain["eta"])
    if chain.get("boundary", "pinhole") != "pinhole":
        return ()
    j_max = cfg.get("optics", {}).get("j_max", 4)
    return tuple(eta_table(_optics(cfg, chain["step"]), j_max).eta)


def _static_model(cfg: dict, j0: float):
    chain = cfg["chain"]
    params = SSHParams(j0, chain["j1"], chain["phase"], chain["l_max"], chain["step"], _eta(cfg, chain))
    boundary = chain["boundary"]
    if boundary == "soft":
        return soft_boundary_chain(params, math.sqrt(chain["mirror_L"] / 2.0), gamma0=chain["gamma0"],
                                   loss_rate=chain["loss_rate"], l_extra=chain["l_extra"])
    if boundary == "ideal":
        n = 2 * (chain["l_max"] + 1)
        return build_ssh(params, decay_profile(n, chain["gamma0"], chain["decay_width"]))
    return build_total_chain(params, chain["l_extra"], gamma0=chain["gamma0"], width=chain["decay_width"])


def run_optics_tables(cfg: dict, out: Outputs, threads: int) -> None:
    rows, reports = [], []
    for n in cfg["optics"]["steps"]:
        report = eta_table(_optics(cfg, n), cfg["optics"]["j_max"])
        rows.extend(report.rows())
        reports.append(report.to_dict())
    out.table("pinhole_table.csv", rows)
    out.summary["reports"] = reports
    out.plots.append({"file": "pinhole_table.csv", "kind": "semilogy", "x": "j", "y": "eta", "group": "n"})


def run_static_spectrum(cfg: dict, out: Outputs, threads: int) -> None:
    omega = _grid(cfg["grid"]["omega"])
    chain = cfg["chain"]
    rows, features = [], []
    for j0 in _grid(cfg["grid"]["j0"]):
        model = _static_model(cfg, float(j0))
        spec = total_transmission(model, omega, workers=threads)
        rows.extend((float(j0), w, v) for w, v in spec.rows())
        edge = abs(chain["j1"] - j0 * math.cos(chain["phase"]))
        if edge > 0 and omega[0] <= -0.7 * edge and omega[-1] >= 0.7 * edge:
            rep = midgap_report(spec, edge)
            features.append({"J0prime": float(j0), "midgap_contrast": rep.contrast, "peaks": list(rep.peaks)})
    out.table("static_spectrum.csv", rows)
    out.summary["midgap"] = features
    out.plots.append({"file": "static_spectrum.csv", "kind": "map", "x": "omega", "y": "J0prime", "z": "tau"})


def _pulse(cfg: dict) -> PulseSpec:
    p = cfg.get("pulse", {})
    return PulseSpec(p.get("target_site", 0), p.get("center", 3.0), p.get("width", 2.0))


def run_pulse(cfg: dict, out: Outputs, threads: int) -> None:
    model = _static_model(cfg, cfg["chain"]["j0"])
    pulse = _pulse(cfg)
    sites = cfg.get("sites", [pulse.target_site])
    res = pulse_response(model, pulse, _grid(cfg["grid"]["t"]), sites=sites)
    out.table("pulse_traces.csv", res.rows())
    out.plots.append({"file": "pulse_traces.csv", "kind": "line", "x": "t", "y": "N", "group": "site"})


def run_sweep(cfg: dict, out: Outputs, threads: int) -> None:
    grid = _grid(cfg["grid"]["j0"])
    res = edge_persistence_sweep(lambda j0: _static_model(cfg, j0), grid, _pulse(cfg), cfg["t_star"], workers=threads)
    out.table("edge_sweep.csv", res.rows())
    out.summary["transition_J0prime"] = transition_point(res.j0_values, res.n0)
    out.plots.append({"file": "edge_sweep.csv", "kind": "line", "x": "J0prime", "y": "N0_at_tstar"})


def _drive_chain(cfg: dict) -> tuple[SSHParams, np.ndarray]:
    chain = dict(cfg.get("chain", {}))
    chain.setdefault("l_max", 49)
    chain.setdefault("step", 4)
    chain.setdefault("boundary", "pinhole")
    params = SSHParams(cfg["drive"]["j0"], cfg["drive"]["j1"], 0.0, chain["l_max"], chain["step"], _eta(cfg, chain))
    decay = decay_profile(2 * (chain["l_max"] + 1), chain.get("gamma0", 0.05), chain.get("decay_width", 5.0))
    return params, decay


def _floquet_op(cfg: dict, params: SSHParams, omega_drive: float):
    d = cfg["drive"]
    blocks = drive_to_fourier(DriveSpec(d["j0"], d["j1"], d["lam"], omega_drive), params)
    return build_floquet_hamiltonian(blocks, omega_drive, d["replica_cutoff"])


def run_floquet_spectrum(cfg: dict, out: Outputs, threads: int) -> None:
    params, decay = _drive_chain(cfg)
    g = cfg["grid"]["omega"]
    rows = []
    for big in _grid(cfg["grid"]["Omega"]):
        # the omega grid is given in units of the zone, (-1/2, 1/2]
        omega = np.linspace(g["start"], g["stop"], g["points"]) * big
        spec = floquet_spectrum_response(_floquet_op(cfg, params, float(big)), decay, omega, workers=threads)
        rows.extend((float(big), w, v) for w, v in spec.rows())
    out.table("floquet_spectrum.csv", rows)
    out.plots.append({"file": "floquet_spectrum.csv", "kind": "map", "x": "Omega", "y": "omega", "z": "T", "log_z": True})


def run_floquet_bands(cfg: dict, out: Outputs, threads: int) -> None:
    d = cfg["drive"]
    ks = np.linspace(-math.pi, math.pi, cfg["grid"]["k"]["points"])
    eps = bloch_quasienergies(ks, BlochDrive.ssh(d["j0"], d["j1"], d["lam"], d["omega"]), d["time_steps"])
    out.table("floquet_bands.csv", [(float(k), float(a), float(b)) for k, (a, b) in zip(ks, eps)])
    out.plots.append({"file": "floquet_bands.csv", "kind": "line", "x": "k", "y": ["quasienergy_band1", "quasienergy_band2"]})


def run_winding(cfg: dict, out: Outputs, threads: int) -> None:
    d = cfg["drive"]
    params, decay = _drive_chain(cfg)
    rows, t0, th = [], [], []
    grid = _grid(cfg["grid"]["Omega"])
    for big in grid:
        big = float(big)
        try:
            rep = winding_numbers(BlochDrive.ssh(d["j0"], d["j1"], d["lam"], big), d["k_points"], d["time_steps"])
            v0, vp = rep.v0, rep.v_plus
        except SimulationError as exc:
            logger.info("Omega=%.6g: %s", big, exc)
            v0 = vp = None
        spec = floquet_spectrum_response(_floquet_op(cfg, params, big), decay, [0.0, 0.5 * big * (1 - 1e-9)])
        t0.append(spec.values[0])
        th.append(spec.values[1])
        rows.append((big, v0, vp, float(spec.values[0]), float(spec.values[1])))
    out.table("winding.csv", rows)
    out.summary["jumps_T_at_0"] = [j.location for j in find_jumps(grid, np.array(t0))]
    out.summary["jumps_T_at_half"] = [j.location for j in find_jumps(grid, np.array(th))]
    out.plots.append({"file": "winding.csv", "kind": "step", "x": "Omega", "y": ["T_at_0", "T_at_half", "v0", "vplus"]})


PIPELINES: dict[str, Callable[[dict, Outputs, int], None]] = {
    "optics-tables": run_optics_tables,
    "static-spectrum": run_static_spectrum,
    "pulse": run_pulse,
    "sweep": run_sweep,
    "floquet-spectrum": run_floquet_spectrum,
    "floquet-bands": run_floquet_bands,
    "winding": run_winding,
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def render_csv(name: str, rows: list[tuple]) -> bytes:
    cols = COLUMNS[name]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in rows:
        if len(row) != len(cols):
            raise ValueError(f"{name}: row width {len(row)} does not match columns {cols}")
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue().encode()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def emit(out_dir: Path, files: dict[str, bytes], overwrite: bool) -> None:
    """Write every file or none: stage in a temp dir, then rename into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    clashes = [name for name in files if (out_dir / name).exists()]
    if clashes and not overwrite:
        raise FileExistsError(f"refusing to overwrite {', '.join(sorted(clashes))} in {out_dir} (pass --overwrite)")
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        for name, data in files.items():
            with open(stage / name, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
        for name in files:
            os.replace(stage / name, out_dir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def run(cfg: dict, out_dir: Path, *, input_hash: str, threads: int = 1, overwrite: bool = False) -> dict:
    """Execute a validated config and write its outputs; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(out_dir / ".synthcavity.lock"))
    with lock.acquire(timeout=0):
        start = time.perf_counter()
        outputs = Outputs()
        PIPELINES[cfg["experiment"]](cfg, outputs, threads)
        files = {name: render_csv(name, rows) for name, rows in outputs.tables.items()}
        recipe = {"plots": outputs.plots}
        files["plot_recipe.json"] = (json.dumps(recipe, indent=2, sort_keys=True) + "\n").encode()
        manifest = {
            "experiment": cfg["experiment"],
            "input_sha256": input_hash,
            "config": _jsonable(cfg),
            "versions": {
                "synthcavity": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "outputs": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(files.items())},
            "summary": _jsonable(outputs.summary),
            "wall_time_s": time.perf_counter() - start,
        }
        files["manifest.json"] = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
        emit(out_dir, files, overwrite)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--output", help="output directory (overrides output_dir in the config)")
        p.add_argument("--threads", type=int, help="worker threads for independent grid points")
        p.add_argument("--overwrite", action="store_true", help="replace existing output files")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, digest = load(args.config)
        if cfg["experiment"] != args.experiment:
            raise ConfigError(f"experiment: config is for {cfg['experiment']!r}, command is {args.experiment!r}")
        threads = args.threads if args.threads is not None else cfg.get("threads", 1)
        if threads < 1:
            raise ConfigError(f"--threads: expected a positive integer, got {threads}")
        out_dir = args.output or cfg.get("output_dir")
        if not out_dir:
            raise ConfigError("output_dir: no output directory given (set output_dir or pass --output)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        manifest = run(cfg, Path(out_dir), input_hash=digest, threads=threads, overwrite=args.overwrite)
    except (OSError, Timeout) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SimulationError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # parameter combinations the schema cannot see, e.g. an omega grid too short for the windows
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{cfg['experiment']}: wrote {len(manifest['outputs']) + 1} files to {out_dir} "
          f"in {manifest['wall_time_s']:.2f} s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
