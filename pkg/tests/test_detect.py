import numpy as np
import pytest

from synthcavity.detect import find_jumps, midgap_report, oscillation_count, transition_point
from synthcavity.response import SpectrumResult


def lorentz(w, center, width):
    return 1.0 / ((w - center) ** 2 + width**2)


def test_midgap_single_peak():
    w = np.linspace(-3, 3, 801)
    spec = SpectrumResult(w, lorentz(w, 0, 0.02) + lorentz(w, 1.2, 0.05) + lorentz(w, -1.2, 0.05))
    rep = midgap_report(spec, 0.5)
    assert rep.peaks == (0.0,)
    assert rep.has_peak and rep.contrast > 5


def test_midgap_split_pair():
    w = np.linspace(-3, 3, 801)
    spec = SpectrumResult(w, lorentz(w, 0.06, 0.01) + lorentz(w, -0.06, 0.01) + 1.0)
    rep = midgap_report(spec, 0.5)
    assert len(rep.peaks) == 2
    assert rep.peaks[0] == pytest.approx(-rep.peaks[1])


def test_midgap_flat():
    w = np.linspace(-3, 3, 801)
    rep = midgap_report(SpectrumResult(w, np.ones_like(w)), 0.5)
    assert rep.peaks == () and not rep.has_peak


def test_midgap_needs_resolution():
    with pytest.raises(ValueError):
        midgap_report(SpectrumResult([-3.0, 3.0], [1.0, 1.0]), 0.5)


def test_jumps_ignore_grid_spacing():
    for points in (46, 181):
        x = np.linspace(3, 12, points)
        y = np.where(x < 6, 100.0, 1.0) * (1 + 0.01 * x)
        jumps = find_jumps(x, y)
        assert len(jumps) == 1
        assert jumps[0].location == pytest.approx(6.0, abs=0.2)
        assert jumps[0].log_step == pytest.approx(-2.0, abs=0.05)


def test_jumps_smooth_curve():
    x = np.linspace(0, 10, 101)
    assert find_jumps(x, np.exp(0.5 * x)) == []


def test_transition_point_log_scale():
    x = np.linspace(0.5, 1.5, 21)
    y = 10.0 ** (-3 * np.tanh((x - 1.0) / 0.05))
    assert transition_point(x, y) == pytest.approx(1.0, abs=0.05)


def test_oscillation_count():
    x = np.linspace(0, 1, 101)
    assert oscillation_count(np.exp(-3 * x)) == 0
    assert oscillation_count(np.exp(-3 * x) * (1 + 0.3 * np.cos(12 * x))) >= 2
    assert oscillation_count(np.ones(5)) == 0
