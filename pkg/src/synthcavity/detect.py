"""Feature detectors turning spectra and sweep curves into numbers.

All thresholds live here so the acceptance checks, the tests and the CLI
summaries share one definition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .response import SpectrumResult

MID_WINDOW = 0.2
BACKGROUND_WINDOW = (0.3, 0.7)
PEAK_CONTRAST = 5.0


@dataclass(frozen=True)
class MidgapReport:
    peak_value: float
    background: float
    band_max: float
    peaks: tuple[float, ...]

    @property
    def contrast(self) -> float:
        return self.peak_value / self.background if self.background > 0 else float("inf")

    @property
    def has_peak(self) -> bool:
        return self.contrast >= PEAK_CONTRAST


def midgap_report(spec: SpectrumResult, gap_edge: float, *, prominence: float = 0.05) -> MidgapReport:
    """Edge-mode signature inside the gap ``|omega| < gap_edge``.

    ``gap_edge`` is the distance from zero to the nearest bulk band,
    ``|J1 - J0'|`` for the SSH chain. Mid-gap peaks are looked for in
    ``|omega| < 0.2 gap_edge`` (a tenth of the full gap width) and compared with the largest value in the
    in-gap background ``0.3 gap_edge <= |omega| <= 0.7 gap_edge``. Resolved
    peaks are local maxima whose prominence is at least ``prominence``
    times their height.
    """
    w, v = spec.omega, spec.values
    aw = np.abs(w)
    mid = aw < MID_WINDOW * gap_edge
    bg = (aw >= BACKGROUND_WINDOW[0] * gap_edge) & (aw <= BACKGROUND_WINDOW[1] * gap_edge)
    if not mid.any() or not bg.any():
        raise ValueError("omega grid does not resolve the gap windows")
    idx, props = find_peaks(v, prominence=0.0)
    peaks = tuple(
        float(w[i]) for i, p in zip(idx, props["prominences"]) if mid[i] and p >= prominence * v[i]
    )
    return MidgapReport(float(v[mid].max()), float(v[bg].max()), float(v.max()), peaks)


@dataclass(frozen=True)
class Jump:
    location: float
    log_step: float


def find_jumps(x: np.ndarray, y: np.ndarray, *, threshold: float = 3.0) -> list[Jump]:
    """Abrupt changes of ``log10 y`` along ``x``.

    An interval is flagged when ``|d log10 y / dx|`` exceeds ``threshold``
    decades per unit of ``x``, which keeps the detector independent of the
    grid spacing. Neighbouring flagged intervals are grouped; each group
    reports the midpoint of its steepest interval and its net log change.
    """
    x = np.asarray(x, dtype=float)
    ly = np.log10(np.maximum(np.asarray(y, dtype=float), np.finfo(float).tiny))
    slope = np.abs(np.diff(ly) / np.diff(x))
    flagged = slope > threshold
    jumps, i = [], 0
    while i < slope.size:
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < slope.size and flagged[j + 1]:
            j += 1
        k = i + int(np.argmax(slope[i:j + 1]))
        jumps.append(Jump(0.5 * (x[k] + x[k + 1]), float(ly[j + 1] - ly[i])))
        i = j + 1
    return jumps


def transition_point(x: np.ndarray, y: np.ndarray) -> float:
    """Location of the steepest change of ``log y``.

    The persistence curve falls by orders of magnitude across the
    transition, so the slope is taken on a log scale. The estimate is the
    midpoint of the steepest grid interval.
    """
    x = np.asarray(x, dtype=float)
    ly = np.log(np.maximum(np.asarray(y, dtype=float), np.finfo(float).tiny))
    slope = np.abs(np.diff(ly) / np.diff(x))
    k = int(np.argmax(slope))
    return float(0.5 * (x[k] + x[k + 1]))


def oscillation_count(y: np.ndarray, *, rel_tol: float = 1e-3) -> int:
    """Number of interior extrema of a sampled curve.

    Differencing removes the overall trend, so a monotone curve scores zero
    and every wiggle adds its turning points. Steps smaller than ``rel_tol``
    of the curve range are treated as flat.
    """
    y = np.asarray(y, dtype=float)
    d = np.diff(y)
    scale = np.ptp(y)
    d = d[np.abs(d) > rel_tol * scale] if scale > 0 else d[:0]
    return int(np.count_nonzero(np.sign(d[1:]) != np.sign(d[:-1])))
