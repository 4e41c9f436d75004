"""Periodically driven chain: Floquet replicas, driven spectra and invariants.

The intracell bonds are modulated as ``J0 + lam cos(Omega t)``. Writing
``H(t) = sum_m H^(m) exp(-i m Omega t)`` the Floquet states solve the
time-independent problem on replica space

    (eps + m Omega) phi_m = sum_m' H^(m - m') phi_m',

so replica ``m`` carries ``H^(0) + m Omega`` on its diagonal and the block
``(m, m + 1)`` carries ``H^(-1)``. For the cosine drive ``H^(1) = H^(-1)`` is
real and the orientation does not change any spectrum.

Bulk invariants use the two-band Bloch form
``H(t, k) = [Bx(k) + lam cos(Omega t)] sigma_x + By(k) sigma_y`` with chiral
symmetry ``sigma_z H(t, k) sigma_z = -H(-t, k)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar
from scipy.special import jv

from .errors import ConvergenceWarning, GapClosedError, SpectralLeakageWarning, StepCountError
from .lattice import SSHParams, build_ssh, dense_matrix
from .response import SpectrumResult

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

DEFAULT_CUTOFF = 6


@dataclass(frozen=True)
class DriveSpec:
    """Bond drive ``J0 + lam cos(Omega t)`` on every intracell bond."""

    j0: float
    j1: float
    lam: float
    omega_drive: float
    phi0: float = 0.0
    alpha: float | None = None

    def __post_init__(self):
        if not self.omega_drive > 0:
            raise ValueError("omega_drive must be positive")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_drive

    @classmethod
    def from_phase_modulation(cls, j0: float, j1: float, alpha: float, omega_drive: float) -> "DriveSpec":
        """Drive produced by a phase delay ``alpha sin(Omega t / 2)`` at phi0 = 0.

        ``cos(alpha sin x) = j_0(alpha) + 2 j_2(alpha) cos 2x + 2 j_4(alpha) cos 4x + ...``,
        so the bond carries ``J0 j_0(alpha)`` plus ``2 J0 j_2(alpha) cos(Omega t)``.
        The dropped harmonics are bounded by :meth:`residual_bound`.
        """
        return cls(j0 * float(jv(0, alpha)), j1, 2 * j0 * float(jv(2, alpha)), omega_drive, 0.0, alpha)

    def residual_bound(self, j0_amplitude: float) -> float:
        """Size ``2 J0 |j_4(alpha)|`` of the leading neglected harmonic."""
        if self.alpha is None:
            return 0.0
        return 2 * abs(j0_amplitude) * abs(float(jv(4, self.alpha)))


def drive_to_fourier(drive: DriveSpec, chain: SSHParams) -> dict[int, np.ndarray]:
    """Fourier blocks ``{-1, 0, 1}`` of the driven chain.

    ``chain`` fixes the length and the pinhole corrections; its own
    intracell amplitude is replaced by ``drive.j0`` and its intercell
    amplitude by ``drive.j1``.
    """
    static = SSHParams(drive.j0, drive.j1, 0.0, chain.l_max, chain.step, chain.eta)
    h0 = dense_matrix(build_ssh(static)).real
    n = h0.shape[0]
    h1 = np.zeros((n, n))
    idx = np.arange(0, n, 2)
    h1[idx, idx + 1] = h1[idx + 1, idx] = 0.5 * drive.lam
    return {-1: h1.astype(complex), 0: h0.astype(complex), 1: h1.astype(complex)}


@dataclass(frozen=True, eq=False)
class FloquetOperator:
    """Replica-space Hamiltonian truncated to ``|m| <= replica_cutoff``.

    Rows are ordered replica-major, ``index = (m + M) * n_sites + j``.
    """

    blocks: dict
    omega_drive: float
    replica_cutoff: int

    def __post_init__(self):
        if self.replica_cutoff < 1:
            raise ValueError("replica cutoff must be at least 1")
        if not self.omega_drive > 0:
            raise ValueError("omega_drive must be positive")
        blocks = {int(m): np.asarray(b, dtype=complex) for m, b in self.blocks.items()}
        if 0 not in blocks:
            raise ValueError("the static block H^(0) is required")
        n = blocks[0].shape[0]
        for m, b in blocks.items():
            if b.shape != (n, n):
                raise ValueError(f"block {m} has shape {b.shape}, expected {(n, n)}")
            partner = blocks.get(-m)
            if partner is None or not np.allclose(partner, b.conj().T, atol=1e-12):
                raise ValueError(f"blocks {m} and {-m} are not Hermitian partners")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_sites(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def replicas(self) -> np.ndarray:
        return np.arange(-self.replica_cutoff, self.replica_cutoff + 1)

    @property
    def dim(self) -> int:
        return self.n_sites * self.replicas.size

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def _matrix(self) -> np.ndarray:
        n, reps = self.n_sites, self.replicas
        r = reps.size
        big = np.zeros((r * n, r * n), dtype=complex)
        for a, m in enumerate(reps):
            for b, mp in enumerate(reps):
                blk = self.blocks.get(int(m - mp))
                if blk is not None:
                    big[a * n:(a + 1) * n, b * n:(b + 1) * n] = blk
            big[a * n:(a + 1) * n, a * n:(a + 1) * n] += m * self.omega_drive * np.eye(n)
        return big

    def site_major(self) -> tuple[np.ndarray, int]:
        """Matrix reordered as ``index = j * (2M + 1) + (m + M)`` and its bandwidth."""
        n, r = self.n_sites, self.replicas.size
        perm = (np.arange(r)[None, :] * n + np.arange(n)[:, None]).reshape(-1)
        mat = self._matrix[np.ix_(perm, perm)]
        rows, cols = np.nonzero(mat)
        return mat, int(np.max(np.abs(rows - cols))) if rows.size else 0


def build_floquet_hamiltonian(blocks: dict, omega_drive: float, replica_cutoff: int = DEFAULT_CUTOFF) -> FloquetOperator:
    return FloquetOperator(blocks, float(omega_drive), int(replica_cutoff))


def fold(values, omega_drive: float) -> np.ndarray:
    """Map quasienergies into the first zone (-Omega/2, Omega/2]."""
    values = np.asarray(values, dtype=float)
    half = 0.5 * omega_drive
    out = half - np.mod(half - values, omega_drive)
    # values exactly on the lower edge belong to the upper one
    return np.where(np.isclose(out, -half, atol=1e-12, rtol=0), half, out)


@dataclass(frozen=True, eq=False)
class Quasienergies:
    values: np.ndarray
    m0_weight: np.ndarray
    ambiguous: bool
    omega_drive: float


def quasienergies(op: FloquetOperator, threshold: float | None = None) -> Quasienergies:
    """Physical quasienergies folded into the first zone.

    Every physical state appears once per replica; the copy whose
    eigenvector has the largest weight on replica ``m = 0`` represents it.
    By default the ``n_sites`` eigenvectors of largest m = 0 weight are kept;
    with ``threshold`` every eigenvector above that weight is kept instead.
    The result is flagged ambiguous when the last kept and first dropped
    weights differ by less than 1%; both are then reported.
    """
    vals, vecs = np.linalg.eigh(op.matrix)
    n, m_cut = op.n_sites, op.replica_cutoff
    w0 = np.sum(np.abs(vecs[m_cut * n:(m_cut + 1) * n, :]) ** 2, axis=0)
    order = np.argsort(-w0, kind="stable")
    if threshold is None:
        keep = n
    else:
        keep = int(np.count_nonzero(w0 >= threshold))
    ambiguous = False
    if 0 < keep < order.size and w0[order[keep - 1]] - w0[order[keep]] < 0.01:
        ambiguous = True
        keep += 1
    chosen = order[:keep]
    folded = fold(vals[chosen], op.omega_drive)
    idx = np.argsort(folded, kind="stable")
    return Quasienergies(folded[idx], w0[chosen][idx], ambiguous, op.omega_drive)


def ensure_converged(
    blocks: dict,
    omega_drive: float,
    replica_cutoff: int = DEFAULT_CUTOFF,
    *,
    tol: float = 1e-6,
    max_cutoff: int = 48,
) -> FloquetOperator:
    """Raise the replica cutoff until doubling it moves no quasienergy by ``tol``."""
    m = replica_cutoff
    while True:
        op = build_floquet_hamiltonian(blocks, omega_drive, m)
        ref = build_floquet_hamiltonian(blocks, omega_drive, 2 * m)
        a, b = quasienergies(op).values, quasienergies(ref).values
        if a.size == b.size:
            # compare on the circle so zone-edge states are not counted twice
            diff = np.abs(np.angle(np.exp(2j * np.pi * (a - b) / omega_drive))) * omega_drive / (2 * np.pi)
            if np.max(diff, initial=0.0) < tol:
                return op
        if 2 * m > max_cutoff:
            warnings.warn(
                f"quasienergies not converged to {tol} at replica cutoff {2 * m}; suggest M > {2 * m}",
                ConvergenceWarning,
                stacklevel=2,
            )
            return ref
        m *= 2


def _banded_from_dense(mat: np.ndarray, bw: int) -> np.ndarray:
    n = mat.shape[0]
    ab = np.zeros((2 * bw + 1, n), dtype=complex)
    for off in range(-bw, bw + 1):
        d = np.diagonal(mat, offset=off)
        if off >= 0:
            ab[bw - off, off:] = d
        else:
            ab[bw - off, : n + off] = d
    return ab


def floquet_spectrum_response(
    op: FloquetOperator,
    decay: Sequence[float],
    omega_grid: Sequence[float],
    initial_set: Sequence[tuple[int, int]] | None = None,
    *,
    workers: int = 1,
    tag: dict | None = None,
) -> SpectrumResult:
    """Total output spectrum of the driven lossy chain.

    For every initial replica state ``|m, j>`` the amplitudes
    ``c = -(omega + i Gamma/2 - H_F)^-1 |m, j> / sqrt(2 pi)`` are summed as
    ``T(omega) = sum |c|^2``. The default initial set is ``m = 0`` on every
    site. The replica matrix is banded in site-major order, so each
    frequency costs one banded solve.
    """
    decay = np.asarray(decay, dtype=float)
    n, r, m_cut = op.n_sites, op.replicas.size, op.replica_cutoff
    if decay.shape != (n,):
        raise ValueError(f"decay must have {n} entries")
    if not np.any(decay > 0):
        raise ValueError("at least one site needs a positive decay rate")
    if initial_set is None:
        initial_set = [(0, j) for j in range(n)]
    initial_set = list(initial_set)
    for m, j in initial_set:
        if abs(m) > m_cut or not 0 <= j < n:
            raise ValueError(f"initial state |{m}, {j}> outside the truncated space")
    mat, bw = op.site_major()
    gamma_f = np.repeat(decay, r)
    rhs = np.zeros((n * r, len(initial_set)), dtype=complex)
    for col, (m, j) in enumerate(initial_set):
        rhs[j * r + m + m_cut, col] = 1.0
    base = _banded_from_dense(-mat, bw)

    def one(w):
        ab = base.copy()
        ab[bw] += w + 0.5j * gamma_f
        x = linalg.solve_banded((bw, bw), ab, rhs, check_finite=False)
        return float(np.sum(np.abs(x) ** 2) / (2 * math.pi))

    grid = np.asarray(omega_grid, dtype=float)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, grid))
    else:
        values = [one(w) for w in grid]
    meta = {"Omega": op.omega_drive, "M": m_cut, "initial_states": len(initial_set)}
    meta.update(tag or {})
    return SpectrumResult(grid, np.array(values), meta)


def _slice_propagators(op: FloquetOperator, decay: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Non-unitary propagators from t = 0 to each slice start, and over one period."""
    n = op.n_sites
    dt = 2 * math.pi / op.omega_drive / steps
    damp = -0.5j * np.diag(decay)
    gauss = 0.5 / math.sqrt(3.0)
    us = np.empty((steps + 1, n, n), dtype=complex)
    us[0] = np.eye(n)
    for s in range(steps):
        # two-point Gauss rule for the slice average; the commutator term is dropped
        h = np.zeros((n, n), dtype=complex)
        for node in (0.5 - gauss, 0.5 + gauss):
            t = (s + node) * dt
            h += 0.5 * sum(b * np.exp(-1j * m * op.omega_drive * t) for m, b in op.blocks.items())
        us[s + 1] = linalg.expm(-1j * dt * (h + damp)) @ us[s]
    return us[:-1], us[-1]


def time_domain_spectrum(
    op: FloquetOperator,
    decay: Sequence[float],
    periods: int = 400,
    steps_per_period: int = 64,
    initial_sites: Sequence[int] | None = None,
    *,
    harmonics: int | None = None,
    tag: dict | None = None,
) -> SpectrumResult:
    """Output spectrum from integrated dynamics instead of the replica resolvent.

    Each initial site is excited at ``t = 0`` and the damped amplitudes
    ``d_j(t)`` are sampled over ``periods`` drive periods. Their transform
    ``d_j(omega) = (2 pi)^-1/2 int d_j(t) exp(i omega t) dt`` is read at
    ``omega + m Omega`` and summed over ``|m| <= harmonics`` to fold it into
    the first zone. The zone grid has spacing ``Omega / periods``.
    """
    decay = np.asarray(decay, dtype=float)
    n = op.n_sites
    if initial_sites is None:
        initial_sites = range(n)
    if harmonics is None:
        harmonics = op.replica_cutoff
    period = 2 * math.pi / op.omega_drive
    duration = periods * period
    slowest = decay[decay > 0].min() if np.any(decay > 0) else 0.0
    if slowest == 0.0 or duration < 10.0 / slowest:
        warnings.warn(
            f"duration {duration:.3g} shorter than 10 / min(gamma); the spectrum leaks",
            SpectralLeakageWarning,
            stacklevel=2,
        )
    us, u_period = _slice_propagators(op, decay, steps_per_period)
    dt = period / steps_per_period
    length = periods * steps_per_period
    weights = np.ones(length)
    weights[0] = 0.5
    zone_bins = np.arange(-(periods // 2), periods // 2 + 1)
    if periods % 2 == 0:
        zone_bins = zone_bins[1:]
    total = np.zeros(zone_bins.size)
    for j in initial_sites:
        state = np.zeros(n, dtype=complex)
        state[j] = 1.0
        starts = np.empty((periods, n), dtype=complex)
        for p in range(periods):
            starts[p] = state
            state = u_period @ state
        traces = np.einsum("sab,pb->psa", us, starts).reshape(length, n)
        spec = np.fft.ifft(traces * weights[:, None], axis=0) * length * dt / math.sqrt(2 * math.pi)
        power = np.sum(np.abs(spec) ** 2, axis=1)
        for m in range(-harmonics, harmonics + 1):
            total += power[(zone_bins + m * periods) % length]
    omega = zone_bins * op.omega_drive / periods
    meta = {"Omega": op.omega_drive, "periods": periods, "steps_per_period": steps_per_period}
    meta.update(tag or {})
    return SpectrumResult(omega, total, meta)


@dataclass(frozen=True)
class BlochDrive:
    bx: Callable[[float], float]
    by: Callable[[float], float]
    lam: float
    omega_drive: float

    @classmethod
    def ssh(cls, j0: float, j1: float, lam: float, omega_drive: float) -> "BlochDrive":
        """Bx = J0 + J1 cos k, By = J1 sin k, with the drive on the intracell bond."""
        return cls(lambda k: j0 + j1 * np.cos(k), lambda k: j1 * np.sin(k), lam, omega_drive)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_drive


def bloch_hamiltonian(k: float, t: float, bloch: BlochDrive) -> np.ndarray:
    bx = float(bloch.bx(k)) + bloch.lam * math.cos(bloch.omega_drive * t)
    by = float(bloch.by(k))
    return bx * SIGMA_X + by * SIGMA_Y


def _expm_traceless(a: np.ndarray) -> np.ndarray:
    """exp of a stack of traceless 2x2 matrices, exp(A) = cosh(s) + sinh(s)/s A with s^2 = -det A."""
    s2 = a[..., 0, 0] ** 2 + a[..., 0, 1] * a[..., 1, 0]
    s = np.sqrt(s2.astype(complex))
    small = np.abs(s) < 1e-8
    safe = np.where(small, 1.0, s)
    ratio = np.where(small, 1.0 + s2 / 6.0, np.sinh(safe) / safe)
    out = ratio[..., None, None] * a
    out[..., 0, 0] += np.cosh(s)
    out[..., 1, 1] += np.cosh(s)
    return out


def _propagate(ks: np.ndarray, bloch: BlochDrive, t0: float, t1: float, steps: int) -> np.ndarray:
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    bx = np.asarray(bloch.bx(ks), dtype=float) * np.ones_like(ks)
    by = np.asarray(bloch.by(ks), dtype=float) * np.ones_like(ks)
    dt = (t1 - t0) / steps
    c = 0.5 / math.sqrt(3.0)
    u = np.broadcast_to(np.eye(2, dtype=complex), ks.shape + (2, 2)).copy()
    for s in range(steps):
        ta = t0 + (s + 0.5 - c) * dt
        tb = t0 + (s + 0.5 + c) * dt
        xa = bx + bloch.lam * math.cos(bloch.omega_drive * ta)
        xb = bx + bloch.lam * math.cos(bloch.omega_drive * tb)
        # fourth-order Magnus step for y' = -i H y:
        # -i dt (Ha + Hb) / 2 + sqrt(3) dt^2 [Ha, Hb] / 12, and for
        # H = x sx + y sy the commutator is [Ha, Hb] = 2i (xa - xb) y sz
        gen = np.zeros(ks.shape + (2, 2), dtype=complex)
        xm = 0.5 * (xa + xb)
        gen[..., 0, 1] = -1j * dt * (xm - 1j * by)
        gen[..., 1, 0] = -1j * dt * (xm + 1j * by)
        corr = math.sqrt(3.0) / 12.0 * dt**2 * 2j * (xa - xb) * by
        gen[..., 0, 0] = corr
        gen[..., 1, 1] = -corr
        u = _expm_traceless(gen) @ u
    return u


def _check_unitary(u: np.ndarray, steps: int) -> None:
    err = np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(2)))
    if err > 1e-8:
        raise StepCountError(f"propagator drifted from unitarity by {err:.3g} with {steps} steps; increase steps")


def half_period_propagator(k, bloch: BlochDrive, steps: int = 512) -> np.ndarray:
    """Time-ordered ``F(k) = T exp(-i int_0^{T/2} H(t, k) dt)``.

    Accepts a scalar or an array of momenta. Each slice uses a fourth-order
    Magnus step with the exact 2x2 exponential.
    """
    if steps < 64:
        raise ValueError("use at least 64 time steps per half period")
    u = _propagate(k, bloch, 0.0, 0.5 * bloch.period, steps)
    _check_unitary(u, steps)
    return u[0] if np.ndim(k) == 0 else u


def second_half_propagator(k, bloch: BlochDrive, steps: int = 512) -> np.ndarray:
    """Directly integrated propagator over [T/2, T]."""
    u = _propagate(k, bloch, 0.5 * bloch.period, bloch.period, steps)
    _check_unitary(u, steps)
    return u[0] if np.ndim(k) == 0 else u


def chiral_partner(f: np.ndarray) -> np.ndarray:
    """Second-half propagator implied by chiral symmetry, ``sigma_z F^dagger sigma_z``."""
    return SIGMA_Z @ np.conj(np.swapaxes(f, -1, -2)) @ SIGMA_Z


def full_period_propagator(k, bloch: BlochDrive, steps: int = 512) -> np.ndarray:
    f = half_period_propagator(k, bloch, steps)
    return chiral_partner(f) @ f


def bloch_quasienergies(k, bloch: BlochDrive, steps: int = 512) -> np.ndarray:
    """Sorted quasienergy pair(s) in (-Omega/2, Omega/2] from the period propagator."""
    u = full_period_propagator(k, bloch, steps)
    phases = -np.angle(np.linalg.eigvals(u)) / bloch.period
    return np.sort(fold(phases, bloch.omega_drive), axis=-1)


def bulk_gaps(bloch: BlochDrive, k_points: int = 256, steps: int = 512) -> tuple[float, float]:
    """Smallest distance of the bands from quasienergy 0 and from Omega/2."""
    ks = np.linspace(-math.pi, math.pi, k_points, endpoint=False)
    eps = bloch_quasienergies(ks, bloch, steps)
    gap0 = float(np.min(np.abs(eps)))
    gap_half = float(np.min(0.5 * bloch.omega_drive - np.abs(eps)))
    return gap0, gap_half


def gap_closings(
    make: Callable[[float], BlochDrive],
    omega_grid: Sequence[float],
    *,
    k_points: int = 128,
    tol: float = 0.05,
) -> dict[str, list[float]]:
    """Drive frequencies at which the 0 or Omega/2 gap closes.

    Local minima of each gap along ``omega_grid`` below ``tol`` are refined
    by a bounded scalar minimization between the neighbouring grid points.
    """
    grid = np.asarray(omega_grid, dtype=float)
    gaps = np.array([bulk_gaps(make(w), k_points) for w in grid])
    out: dict[str, list[float]] = {"zero": [], "half": []}
    for col, key in ((0, "zero"), (1, "half")):
        g = gaps[:, col]
        for i in range(grid.size):
            lo_ok = i == 0 or g[i] <= g[i - 1]
            hi_ok = i == grid.size - 1 or g[i] <= g[i + 1]
            if not (lo_ok and hi_ok) or g[i] > tol:
                continue
            a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
            res = minimize_scalar(lambda w: bulk_gaps(make(w), k_points)[col], bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-4})
            out[key].append(float(res.x))
    return out


@dataclass(frozen=True)
class WindingReport:
    v0: int
    v_plus: int
    k_points: int
    phase_residual: float
    reliable: bool = True
    note: str = ""


def _winding(z: np.ndarray) -> tuple[float, float]:
    """Raw winding of a closed sampled curve and its largest phase step."""
    steps = np.angle(np.roll(z, -1) / z)
    return float(np.sum(steps) / (2 * math.pi)), float(np.max(np.abs(steps)))


def winding_numbers(bloch: BlochDrive, k_points: int = 256, steps: int = 512, *, check_gaps: bool = True) -> WindingReport:
    """Chiral winding numbers of the half-period propagator.

    In the chiral basis ``F(k) = [[a, b], [c, d]]``. ``v0`` counts the
    winding of ``b`` and ``v_plus`` that of ``d`` around the Brillouin
    zone. The orientation is fixed so that the static SSH chain with weak
    intracell hopping has ``v0 = +1``.
    """
    if check_gaps:
        gap0, gap_half = bulk_gaps(bloch, max(k_points, 64), steps)
        if min(gap0, gap_half) < 1e-6:
            raise GapClosedError(
                f"quasienergy gap closed (gap at 0: {gap0:.3g}, at Omega/2: {gap_half:.3g}); winding undefined"
            )
    ks = np.linspace(-math.pi, math.pi, k_points, endpoint=False)
    f = half_period_propagator(ks, bloch, steps)
    b, d = f[:, 0, 1], f[:, 1, 1]
    if np.min(np.abs(b)) < 1e-8 or np.min(np.abs(d)) < 1e-8:
        raise GapClosedError("propagator block vanishes on the k grid; winding undefined")
    raw_b, jump_b = _winding(b)
    raw_d, jump_d = _winding(d)
    raw_v0, raw_vp = -raw_b, raw_d
    v0, vp = int(round(raw_v0)), int(round(raw_vp))
    residual = max(abs(raw_v0 - v0), abs(raw_vp - vp))
    reliable = residual < 0.05 and max(jump_b, jump_d) < math.pi / 2
    note = "" if reliable else "phase under-resolved; refine the k grid"
    return WindingReport(v0, vp, k_points, residual, reliable, note)


def edge_mode_census(
    op: FloquetOperator,
    tolerance: float = 0.05,
    *,
    edge_fraction: float = 0.1,
    threshold: float = 0.6,
) -> tuple[int, int]:
    """Count edge-localized Floquet states at quasienergy 0 and Omega/2.

    An eigenvector of the replica matrix counts when its eigenvalue lies
    within ``tolerance`` of 0 (or of +Omega/2) and at least ``threshold`` of
    its weight, summed over replicas, sits on the outer ``edge_fraction`` of
    the sites (half at each end).
    """
    vals, vecs = np.linalg.eigh(op.matrix)
    n, r = op.n_sites, op.replicas.size
    site_weight = (np.abs(vecs) ** 2).reshape(r, n, -1).sum(axis=0)
    outer = max(1, int(round(0.5 * edge_fraction * n)))
    edge = site_weight[:outer].sum(axis=0) + site_weight[-outer:].sum(axis=0)
    localized = edge >= threshold
    at_zero = int(np.count_nonzero(localized & (np.abs(vals) < tolerance)))
    at_half = int(np.count_nonzero(localized & (np.abs(vals - 0.5 * op.omega_drive) < tolerance)))
    return at_zero, at_half
