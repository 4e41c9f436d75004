"""Input-output observables of the static cavity chain.

Intracavity amplitudes obey the classical Langevin equation

    d beta/dt = -i H beta - (Gamma / 2) beta - sqrt(Gamma) a_in(t),

and a monochromatic input ``a_in ~ exp(-i omega t)`` is scattered by

    T(omega) = -i sqrt(Gamma) (omega - H + i Gamma / 2)^-1 sqrt(Gamma),

so that ``sqrt(Gamma) beta = T a_in`` and ``a_out = (1 + T) a_in``.
The system is linear and driven coherently, so photon numbers are
``N_j = |beta_j|^2``.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from .errors import IntegratorError, NearSingularWarning
from .lattice import LatticeModel, dense_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    omega: np.ndarray
    values: np.ndarray
    tag: dict = field(default_factory=dict)

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if omega.shape != values.shape:
            raise ValueError("omega and values must have the same length")
        if omega.size > 1 and np.any(np.diff(omega) <= 0):
            raise ValueError("omega grid must increase strictly")
        if np.any(values < 0):
            raise ValueError("spectrum values must be non-negative")
        omega.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def at(self, omega: float) -> float:
        """Value at the grid point nearest to ``omega``."""
        return float(self.values[np.argmin(np.abs(self.omega - omega))])

    def rows(self) -> list[tuple[float, float]]:
        return [(float(w), float(v)) for w, v in zip(self.omega, self.values)]


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian input pulse ``amplitude * exp(-(t - center)^2 / (2 width^2))``.

    The defaults give ``exp(-(t-3)^2/8) / sqrt(2 sqrt(pi))`` on site 0.
    """

    target_site: int = 0
    center: float = 3.0
    width: float = 2.0
    amplitude: float = 1.0 / math.sqrt(2.0 * math.sqrt(math.pi))

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("pulse width must be positive")

    def envelope(self, t):
        return self.amplitude * np.exp(-((np.asarray(t) - self.center) ** 2) / (2.0 * self.width**2))

    @property
    def support_end(self) -> float:
        """Time after which the envelope is below 1e-16 of its peak."""
        return self.center + self.width * math.sqrt(2.0 * math.log(1e16))


@dataclass(frozen=True, eq=False)
class PulseResult:
    t: np.ndarray
    intensity: np.ndarray
    sites: tuple[int, ...]

    def trace(self, chain_index: int) -> np.ndarray:
        return self.intensity[:, self.sites.index(chain_index)]

    def rows(self) -> list[tuple[float, int, float]]:
        return [
            (float(t), site, float(self.intensity[i, k]))
            for i, t in enumerate(self.t)
            for k, site in enumerate(self.sites)
        ]


def _resolvent_columns(h: np.ndarray, gamma: np.ndarray, omega: float, cols: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    a = -h.astype(complex)
    a[np.diag_indices(n)] += omega + 0.5j * gamma
    rhs = np.zeros((n, cols.size), dtype=complex)
    rhs[cols, np.arange(cols.size)] = np.sqrt(gamma[cols])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu = linalg.lu_factor(a, check_finite=False)
    piv = np.abs(np.diag(lu[0]))
    if piv.min() <= 1e-13 * max(piv.max(), 1.0):
        cond = np.linalg.cond(a)
        warnings.warn(
            f"resolvent nearly singular at omega={omega:.6g} (condition ~{cond:.3g}); "
            "a mode without decay sits at this frequency",
            NearSingularWarning,
            stacklevel=3,
        )
        # a dark mode is invisible to the channels, so the minimum-norm solution is the physical one
        return np.linalg.lstsq(a, rhs, rcond=None)[0]
    return linalg.lu_solve(lu, rhs, check_finite=False)


def transmission_matrix(
    model: LatticeModel,
    omega: float,
    channels: Sequence[int] | None = None,
    *,
    _h: np.ndarray | None = None,
) -> np.ndarray:
    """Scattering block ``T(omega)`` between the given channel positions.

    ``channels`` are matrix positions of the model (all sites by default);
    the returned array is ``T[j, j']`` restricted to them.
    """
    gamma = np.asarray(model.decay, dtype=float)
    cols = np.arange(model.n_sites) if channels is None else np.asarray(channels, dtype=int)
    if not np.any(gamma > 0):
        return np.zeros((cols.size, cols.size), dtype=complex)
    h = dense_matrix(model) if _h is None else _h
    x = _resolvent_columns(h, gamma, float(omega), cols)
    return -1j * np.sqrt(gamma[cols])[:, None] * x[cols, :]


def default_channels(model: LatticeModel) -> np.ndarray:
    """Channels read out by default: the center block."""
    pos = model.block_positions("center")
    return pos if pos.size else np.arange(model.n_sites)


def total_transmission(
    model: LatticeModel,
    omega_grid: Sequence[float],
    channels: Sequence[int] | None = None,
    *,
    workers: int = 1,
    tag: dict | None = None,
) -> SpectrumResult:
    """Total transmission ``tau(omega) = sum_{j, j'} |T_jj'(omega)|^2``.

    The sum runs over ``channels`` (default: sites of the center block, the
    modes fed and detected in the experiment). Frequencies are independent
    and are spread over ``workers`` threads; results keep grid order.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size == 0:
        raise ValueError("omega grid is empty")
    cols = default_channels(model) if channels is None else np.asarray(channels, dtype=int)
    h = dense_matrix(model)

    def one(w):
        t = transmission_matrix(model, w, cols, _h=h)
        return float(np.sum(np.abs(t) ** 2))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, omega_grid))
    else:
        values = [one(w) for w in omega_grid]
    meta = {"model": model.digest(), "channels": int(cols.size)}
    meta.update(tag or {})
    return SpectrumResult(omega_grid, np.array(values), meta)


def _langevin_rhs(model: LatticeModel, drive: Callable[[float], np.ndarray]):
    h = dense_matrix(model)
    gamma = np.asarray(model.decay, dtype=float)
    a = -1j * h - 0.5 * np.diag(gamma)
    sg = np.sqrt(gamma)

    def rhs(t, beta):
        return a @ beta - sg * drive(t)

    return rhs


def _integrate(rhs, n, t_grid, rtol, atol, label):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-D array with at least two points")
    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        np.zeros(n, dtype=complex),
        method="DOP853",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegratorError(f"{label}: integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return sol.y.T


def pulse_response(
    model: LatticeModel,
    pulse: PulseSpec,
    t_grid: Sequence[float],
    sites: Sequence[int] | None = None,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-12,
) -> PulseResult:
    """Photon numbers ``N_j(t)`` after a Gaussian pulse enters one site.

    ``pulse.target_site`` and ``sites`` are chain indices (``2l`` or
    ``2l + 1``). The intracavity field starts empty at ``t_grid[0]``.
    """
    n = model.n_sites
    target = model.position(pulse.target_site)
    unit = np.zeros(n)
    unit[target] = 1.0

    def drive(t):
        return unit * pulse.envelope(t)

    beta = _integrate(_langevin_rhs(model, drive), n, t_grid, rtol, atol, f"pulse on site {pulse.target_site}")
    if sites is None:
        sites = [s.chain_index for s in model.sites]
    pos = [model.position(s) for s in sites]
    return PulseResult(np.asarray(t_grid, dtype=float), np.abs(beta[:, pos]) ** 2, tuple(int(s) for s in sites))


def driven_steady_state(
    model: LatticeModel,
    site: int,
    omega: float,
    amplitude: float,
    t_end: float,
    *,
    ramp: float | None = None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> np.ndarray:
    """Integrate a monochromatic drive and return ``sqrt(Gamma) beta`` at ``t_end``.

    The drive ``amplitude * exp(-i omega t)`` enters chain index ``site``
    behind a smooth switch-on of duration ``ramp``. Dividing the result by
    the drive phase at ``t_end`` gives the column ``T[:, site] * amplitude``
    once transients have died out.
    """
    n = model.n_sites
    pos = model.position(site)
    gamma = np.asarray(model.decay, dtype=float)
    if ramp is None:
        ramp = 0.2 * t_end
    unit = np.zeros(n, dtype=complex)
    unit[pos] = amplitude

    def drive(t):
        switch = 1.0 if t >= ramp else math.sin(0.5 * math.pi * t / ramp) ** 2
        return unit * switch * np.exp(-1j * omega * t)

    beta = _integrate(_langevin_rhs(model, drive), n, [0.0, t_end], rtol, atol, f"drive at omega={omega}")[-1]
    return np.sqrt(gamma) * beta * np.exp(1j * omega * t_end)


@dataclass(frozen=True, eq=False)
class SweepResult:
    j0_values: np.ndarray
    n0: np.ndarray
    t_star: float

    def rows(self) -> list[tuple[float, float]]:
        return [(float(j), float(v)) for j, v in zip(self.j0_values, self.n0)]


def edge_persistence_sweep(
    model_factory: Callable[[float], LatticeModel],
    j0_values: Sequence[float],
    pulse: PulseSpec,
    t_star: float = 15.0,
    *,
    workers: int = 1,
) -> SweepResult:
    """Photon number left on the pulsed site at ``t_star`` versus intracell hopping.

    ``model_factory(j0)`` builds the chain for each sweep point. Points are
    independent and may be evaluated on ``workers`` threads.
    """
    j0_values = np.asarray(j0_values, dtype=float)

    def one(j0):
        model = model_factory(float(j0))
        try:
            res = pulse_response(model, pulse, [0.0, t_star], sites=[pulse.target_site])
        except IntegratorError as exc:
            raise IntegratorError(f"sweep point J0'={j0:.6g}: {exc}") from exc
        return float(res.intensity[-1, 0])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            n0 = list(pool.map(one, j0_values))
    else:
        n0 = [one(j) for j in j0_values]
    return SweepResult(j0_values, np.array(n0), float(t_star))
