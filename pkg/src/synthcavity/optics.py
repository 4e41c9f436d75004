"""Paraxial optics of the hollow beam splitters.

Fields are handled as radial profiles of azimuthal modes ``E(r) exp(i l theta)``.
All intensity integrals use the radial measure ``int r |E|^2 dr`` with the
``2 pi`` azimuthal factor absorbed, so a normalized field satisfies
``int_0^inf r |E(r)|^2 dr = 1``. Lengths are in millimetres.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import bisect
from scipy.special import jv

from .errors import (
    ExtrapolationError,
    GeometryError,
    ResolutionError,
    StabilityError,
    UnsupportedConfigurationError,
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 2049
DEFAULT_NODES = 192


@dataclass(frozen=True)
class OpticalSetup:
    """Cavity optics feeding the pinhole beam splitters.

    Defaults are the reference design: f = 100 mm mirrors, 885 nm light and
    a 0.2 mm Gaussian waist on the SLMs.
    """

    focal_length: float = 100.0
    wavelength: float = 0.885e-3
    waist: float = 0.2
    hopping_step: int = 1
    max_oam: int = 49
    mirror_radius: float | None = None

    def __post_init__(self):
        for name in ("focal_length", "wavelength", "waist"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.mirror_radius is not None and not self.mirror_radius > 0:
            raise ValueError("mirror_radius must be strictly positive")
        if int(self.hopping_step) != self.hopping_step or self.hopping_step < 1:
            raise ValueError("hopping_step must be an integer >= 1")
        if int(self.max_oam) != self.max_oam or self.max_oam < 1:
            raise ValueError("max_oam must be an integer >= 1")

    @property
    def fourier_waist(self) -> float:
        """Gaussian waist on the beam-splitter plane, lambda f / (pi w0)."""
        return self.wavelength * self.focal_length / (math.pi * self.waist)


@dataclass(frozen=True)
class RayMatrix:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValueError(f"ray matrix must have unit determinant, got {det!r}")

    @classmethod
    def fourier_lens(cls, focal_length: float) -> "RayMatrix":
        """Focal-plane to focal-plane map [[0, f], [-1/f, 0]]."""
        return cls(0.0, focal_length, -1.0 / focal_length, 0.0)

    @classmethod
    def identity(cls) -> "RayMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Sampled radial profile of an OAM-``l`` beam."""

    oam_order: int
    radii: np.ndarray
    amplitudes: np.ndarray
    wavelength: float

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if radii.ndim != 1 or radii.size < 2:
            raise ValueError("radii must be a 1-D grid with at least two samples")
        if radii[0] < 0 or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must start at or above 0 and increase strictly")
        if amplitudes.shape != radii.shape:
            raise ValueError("amplitudes and radii must have the same shape")
        radii.setflags(write=False)
        amplitudes.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @functools.cached_property
    def _antiderivative(self):
        # shape-preserving, so the cumulative integral never decreases
        return PchipInterpolator(self.radii, self.radii * self.intensity).antiderivative()

    def norm(self) -> float:
        """Radial power ``int r |E|^2 dr`` over the sampled range."""
        return float(self._antiderivative(self.radii[-1]))

    def tail_power(self) -> float:
        """Power beyond the last sample from the far-field intensity law.

        A vortex-phased input has a non-vanishing amplitude on axis, so its
        transform decays algebraically, ``|E|^2 ~ A / r^4 + B / r^6``. A and B
        are matched at the grid end and at half the grid extent; the tail
        beyond ``R`` is then ``A / (2 R^2) + B / (4 R^4)``.
        """
        r, inten = self.radii, self.intensity
        r2, i2 = float(r[-1]), float(inten[-1])
        k = int(np.searchsorted(r, r2 / 2))
        r1, i1 = float(r[k]), float(inten[k])
        if r1 <= 0 or r1 >= r2:
            return 0.5 * r2**2 * i2
        a, b = np.linalg.solve([[r1**-4, r1**-6], [r2**-4, r2**-6]], [i1, i2])
        tail = a / (2 * r2**2) + b / (4 * r2**4)
        # a tail fit that goes negative means the grid ends inside the near field
        return float(tail) if tail >= 0 else 0.5 * r2**2 * i2

    def normalized(self) -> "RadialField":
        total = self.norm()
        if total <= 0:
            raise ValueError("cannot normalize a field with zero power")
        return RadialField(self.oam_order, self.radii, self.amplitudes / math.sqrt(total), self.wavelength)

    def rms_width(self) -> float:
        """Gaussian-equivalent width sqrt(2 <r^2>); equals w for exp(-r^2/w^2)."""
        r = self.radii
        second = PchipInterpolator(r, r**3 * self.intensity).antiderivative()(r[-1])
        return math.sqrt(2.0 * second / self.norm())


def radial_grid(extent: float, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, extent, samples)


def mode_detuning(p: int, l: int, path_length_phase: float, round_trip: RayMatrix) -> float:
    """Round-trip phase defect of the LG_{p,l} mode, reduced to [0, 2 pi).

    Zero means the mode is resonant. With A = D = 1 every (p, l) shares the
    resonance of the fundamental mode.
    """
    half_trace = (round_trip.a + round_trip.d) / 2.0
    if abs(half_trace) > 1.0 + 1e-12:
        raise StabilityError(f"|A + D| / 2 = {abs(half_trace):.6g} > 1: cavity is not stable")
    gouy = math.acos(min(1.0, max(-1.0, half_trace)))
    defect = math.fmod(path_length_phase - (2 * p + abs(l) + 1) * gouy, 2 * math.pi)
    if defect < 0:
        defect += 2 * math.pi
    if math.isclose(defect, 2 * math.pi, abs_tol=1e-12) or abs(defect) < 1e-12:
        return 0.0
    return defect


def waist_field(l: int, setup: OpticalSetup, grid: np.ndarray | None = None) -> RadialField:
    """Field on the SLM plane after imprinting the vortex phase exp(i l theta).

    The SLM is phase-only, so every order shares the Gaussian radial amplitude
    exp(-r^2 / w0^2); the order only changes which Bessel kernel the
    propagator applies.
    """
    if grid is None:
        grid = radial_grid(6.0 * setup.waist)
    grid = np.asarray(grid, dtype=float)
    amplitudes = np.exp(-(grid**2) / setup.waist**2)
    return RadialField(int(l), grid, amplitudes, setup.wavelength).normalized()


def propagate_collins(
    field: RadialField,
    ray: RayMatrix,
    grid: np.ndarray | None = None,
    *,
    normalize: bool = True,
    nodes: int = DEFAULT_NODES,
) -> RadialField:
    """Propagate an azimuthal mode through a paraxial ABCD system.

    For the angular dependence exp(i l theta) the two-dimensional Collins
    integral collapses to an order-l Hankel transform::

        E1(r1) = (2 pi i^(l+1) / (lambda B)) exp(-i pi D r1^2 / (lambda B))
                 * int r0 E0(r0) exp(-i pi A r0^2 / (lambda B)) J_l(2 pi r0 r1 / (lambda B)) dr0

    The r0 integral is done by Gauss-Legendre quadrature over the sampled
    input support, with the input interpolated by a cubic spline.

    Args:
        field: input profile.
        ray: system matrix; ``b`` must be non-zero.
        grid: output radii. Defaults to ``(6 + sqrt|l|)`` output Gaussian
            widths with 2049 samples.
        normalize: rescale the result to unit power. With ``False`` the raw
            transform is returned, which conserves power.
        nodes: quadrature order in r0.

    Raises:
        UnsupportedConfigurationError: for ``b == 0`` (imaging systems).
        ResolutionError: when the Bessel kernel oscillates faster than the
            quadrature can follow.
    """
    if ray.b == 0:
        raise UnsupportedConfigurationError("B = 0 (imaging) is not supported by the Fourier-type propagator")
    lam = field.wavelength
    lb = lam * ray.b
    l = int(field.oam_order)
    if grid is None:
        w_out = lam * abs(ray.b) / (math.pi * field.rms_width())
        grid = radial_grid((6.0 + math.sqrt(abs(l))) * w_out)
    grid = np.asarray(grid, dtype=float)

    r_lo, r_hi = float(field.radii[0]), float(field.radii[-1])
    k_max = 2 * math.pi * grid[-1] / abs(lb) + 2 * math.pi * abs(ray.a) * r_hi / abs(lb)
    cycles = k_max * (r_hi - r_lo) / (2 * math.pi)
    if cycles > nodes / 4:
        raise ResolutionError(
            f"kernel has {cycles:.1f} oscillations over the input support; "
            f"{nodes} quadrature nodes resolve at most {nodes / 4:.0f}"
        )

    x, w = np.polynomial.legendre.leggauss(nodes)
    r0 = 0.5 * (r_hi - r_lo) * (x + 1.0) + r_lo
    w0 = 0.5 * (r_hi - r_lo) * w
    spline_re = CubicSpline(field.radii, field.amplitudes.real)
    spline_im = CubicSpline(field.radii, field.amplitudes.imag)
    e0 = spline_re(r0) + 1j * spline_im(r0)
    source = w0 * r0 * e0 * np.exp(-1j * math.pi * ray.a * r0**2 / lb)

    kernel = jv(l, 2 * math.pi * np.outer(grid, r0) / lb)
    prefactor = 2 * math.pi * (1j ** ((l + 1) % 4)) / lb
    out = prefactor * np.exp(-1j * math.pi * ray.d * grid**2 / lb) * (kernel @ source)
    result = RadialField(l, grid, out, lam)
    return result.normalized() if normalize else result


def containment_fraction(field: RadialField, radius: float) -> float:
    """Power ``int_0^radius r |E|^2 dr`` inside a centred disc.

    ``radius = inf`` integrates the whole sampled field plus its algebraic
    tail. The field is assumed to be normalized, in which case the result
    lies in [0, 1].
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if math.isinf(radius):
        return field.norm() + field.tail_power()
    if radius > field.radii[-1] * (1 + 1e-12):
        raise ExtrapolationError(f"radius {radius} mm beyond sampled range {field.radii[-1]} mm")
    if radius <= field.radii[0]:
        return 0.0
    return float(field._antiderivative(min(radius, field.radii[-1])))


@dataclass(frozen=True, eq=False)
class PinholeReport:
    """Pinhole radius, l = 0 transmission and hopping-reduction table.

    ``eta[j - 1]`` is the fraction of the OAM ``j * n`` mode falling inside
    the pinhole; ``alpha = 1 - eta`` is the surviving hopping factor.
    """

    hopping_step: int
    pinhole_radius: float
    containment_l0: float
    eta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if np.any((eta < 0) | (eta > 1)):
            raise ValueError("eta entries must lie in [0, 1]")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @property
    def alpha(self) -> np.ndarray:
        return 1.0 - self.eta

    def eta_at(self, j: int) -> float:
        """eta_j for 1-based site j; zero beyond the computed table."""
        if j < 1:
            raise ValueError("j is 1-based")
        return float(self.eta[j - 1]) if j <= self.eta.size else 0.0

    def to_dict(self) -> dict:
        return {
            "n": int(self.hopping_step),
            "r_h_mm": float(self.pinhole_radius),
            "containment_l0": float(self.containment_l0),
            "eta": [float(v) for v in self.eta],
            "alpha": [float(v) for v in self.alpha],
        }

    def rows(self) -> list[tuple]:
        """CSV rows ``(n, r_h_mm, containment_l0, j, eta, alpha)``."""
        return [
            (int(self.hopping_step), float(self.pinhole_radius), float(self.containment_l0), j + 1, float(e), float(1.0 - e))
            for j, e in enumerate(self.eta)
        ]


def beam_splitter_grid(setup: OpticalSetup, l_max: int, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return radial_grid((6.0 + math.sqrt(max(l_max, 0))) * setup.fourier_waist, samples)


@functools.lru_cache(maxsize=128)
def _cached_bs_field(focal, wavelength, waist, l, extent, samples, nodes):
    setup = OpticalSetup(focal_length=focal, wavelength=wavelength, waist=waist)
    slm = waist_field(l, setup)
    return propagate_collins(
        slm, RayMatrix.fourier_lens(focal), radial_grid(extent, samples), normalize=False, nodes=nodes
    )


def beam_splitter_field(setup: OpticalSetup, l: int, grid: np.ndarray | None = None) -> RadialField:
    """Order-l field on the beam splitters (one focal length from the SLM).

    The SLM field carries unit power and the transform is unitary, so the
    result is normalized over the whole plane. It is deliberately not
    renormalized over the finite grid: vortex modes keep a slowly decaying
    tail, and rescaling would inflate every enclosed fraction.
    """
    if grid is None:
        grid = beam_splitter_grid(setup, max(abs(l), setup.hopping_step))
    grid = np.asarray(grid, dtype=float)
    if grid[0] == 0.0 and np.allclose(np.diff(grid), grid[1] - grid[0]):
        return _cached_bs_field(
            setup.focal_length, setup.wavelength, setup.waist, int(l), float(grid[-1]), grid.size, DEFAULT_NODES
        )
    slm = waist_field(l, setup)
    return propagate_collins(slm, RayMatrix.fourier_lens(setup.focal_length), grid, normalize=False)


def pinhole_radius(setup: OpticalSetup, grid: np.ndarray | None = None, *, xtol: float = 1e-9) -> PinholeReport:
    """Solve for the hole radius balancing l = 0 transmission against l = n reflection.

    The radius satisfies ``int_0^rh r|E_0|^2 = int_rh^inf r|E_n|^2`` on the
    beam-splitter plane. The difference of the two sides is monotone in the
    radius, so bisection brackets the unique root.
    """
    n = setup.hopping_step
    if grid is None:
        grid = beam_splitter_grid(setup, n)
    e0 = beam_splitter_field(setup, 0, grid)
    en = beam_splitter_field(setup, n, grid)

    def balance(r):
        return containment_fraction(e0, r) - (1.0 - containment_fraction(en, r))

    lo, hi = float(grid[0]), float(grid[-1])
    if balance(lo) * balance(hi) > 0:
        raise GeometryError("containment balance does not change sign on the grid; extend the grid")
    r_h = bisect(balance, lo, hi, xtol=xtol)
    return PinholeReport(n, r_h, containment_fraction(e0, r_h))


def eta_table(
    setup: OpticalSetup,
    j_max: int = 4,
    grid: np.ndarray | None = None,
    *,
    radius: float | None = None,
) -> PinholeReport:
    """Fractions eta_j of the OAM ``j n`` modes passing through the pinhole.

    Pass ``radius`` to evaluate the table for a given hole instead of the
    balanced one.
    """
    n = setup.hopping_step
    if grid is None:
        grid = beam_splitter_grid(setup, n * j_max)
    if radius is None:
        report = pinhole_radius(setup, grid)
        r_h, contained = report.pinhole_radius, report.containment_l0
    else:
        r_h = float(radius)
        contained = containment_fraction(beam_splitter_field(setup, 0, grid), r_h)
    eta = np.array([containment_fraction(beam_splitter_field(setup, j * n, grid), r_h) for j in range(1, j_max + 1)])
    outside = (eta < 0) | (eta > 1)
    if np.any(outside):
        logger.info("clipping %d eta values outside [0, 1] (largest excursion %.3g)", outside.sum(),
                    np.max(np.abs(eta - np.clip(eta, 0, 1))))
    return PinholeReport(n, r_h, contained, np.clip(eta, 0.0, 1.0))


def lg_intensity_log(r: np.ndarray | float, l: float) -> np.ndarray:
    """log of the unnormalized LG_{p=0} intensity r^(2|l|) exp(-2 r^2) in mirror units."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return 2 * abs(l) * np.log(r) - 2 * r**2


def soft_boundary_loss(l: float, mirror_radius: float) -> float:
    """Fraction P(l) of an LG_{p=0} mode lying outside the mirror.

    Radii are in the dimensionless units where the mode profile is
    r^|l| exp(-r^2), so its intensity peaks at sqrt(|l| / 2). ``l`` may be
    non-integer, which gives a smooth interpolation between orders.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    if mirror_radius < 0:
        raise ValueError("mirror_radius must be non-negative")
    if mirror_radius == 0:
        return 1.0
    if math.isinf(mirror_radius):
        return 0.0
    peak = math.sqrt(max(2 * l + 1, 1e-12) / 4.0)
    shift = float(lg_intensity_log(peak, l)) + math.log(peak)

    def density(r):
        if r <= 0:
            return 0.0
        return math.exp(float(lg_intensity_log(r, l)) + math.log(r) - shift)

    spread = 3.0
    lo, hi = max(0.0, peak - 12 * spread), peak + 12 * spread
    total = sum(quad(density, a, b, epsabs=0, epsrel=1e-12, limit=200)[0] for a, b in ((lo, peak), (peak, hi)))
    if mirror_radius >= hi:
        return 0.0
    if mirror_radius <= lo:
        return 1.0
    outside = quad(density, mirror_radius, hi, epsabs=0, epsrel=1e-12, limit=200, points=[peak] if mirror_radius < peak else None)[0]
    return float(min(1.0, max(0.0, outside / total)))
