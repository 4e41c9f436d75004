"""Effective tight-binding models of the OAM cavity chain.

Each OAM order ``l`` carries two polarization modes which become the lattice
sites ``E_{l,H} -> 2l`` and ``E_{l,V} -> 2l + 1``. Polarization rotators give
the intracell bonds ``(2l, 2l+1)`` and the OAM-changing auxiliary circuit the
intercell bonds ``(2l+1, 2l+2)``. Leakage through the beam-splitter pinholes
reduces the intercell bond between OAM ``jn`` and ``(j+1)n`` by
``alpha_j = 1 - eta_j`` and weakly couples the designed chain to the OAM
orders beyond its ends.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaincc

from .optics import PinholeReport, soft_boundary_loss

BLOCK_TAGS = ("left", "center", "right")


class Polarization(enum.Enum):
    H = 0
    V = 1


@dataclass(frozen=True, order=True)
class SiteLabel:
    oam: int
    polarization: Polarization = Polarization.H

    @property
    def chain_index(self) -> int:
        return 2 * self.oam + self.polarization.value

    @classmethod
    def from_index(cls, index: int) -> "SiteLabel":
        oam, pol = divmod(int(index), 2)
        return cls(oam, Polarization(pol))


@dataclass(frozen=True)
class SSHParams:
    """Parameters of the pinhole-corrected SSH chain.

    ``eta`` is either a :class:`PinholeReport` or a sequence whose entry
    ``j - 1`` is eta_j; missing entries count as zero (ideal beam splitters).
    """

    j0: float
    j1: float = 1.0
    phase: float = 0.0
    l_max: int = 49
    step: int = 1
    eta: PinholeReport | Sequence[float] | None = None

    def __post_init__(self):
        if self.j0 < 0 or self.j1 < 0:
            raise ValueError("j0 and j1 must be non-negative")
        if int(self.l_max) != self.l_max or self.l_max < 1:
            raise ValueError("l_max must be an integer >= 1")
        if int(self.step) != self.step or self.step < 1:
            raise ValueError("step must be an integer >= 1")
        eta = self.eta
        if isinstance(eta, PinholeReport):
            eta = eta.eta
        eta = tuple(float(v) for v in (eta if eta is not None else ()))
        if any(not 0.0 <= v <= 1.0 for v in eta):
            raise ValueError("eta entries must lie in [0, 1]")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_effective(cls, j0_eff: float, **kwargs) -> "SSHParams":
        """Parameters with intracell amplitude ``j0_eff`` reached at zero phase."""
        return cls(j0=j0_eff, phase=0.0, **kwargs)

    @property
    def j0_eff(self) -> float:
        """Intracell amplitude J0 cos(phi) set by the polarization rotators."""
        return self.j0 * math.cos(self.phase)

    def eta_at(self, j: int) -> float:
        if j < 1:
            raise ValueError("j is 1-based")
        return self.eta[j - 1] if j <= len(self.eta) else 0.0

    def alpha_at(self, j: int) -> float:
        return 1.0 - self.eta_at(j)


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Site-labelled Hermitian hopping graph with per-site decay.

    Every hopping ``(a, b, t)`` stands for ``t |a><b| + conj(t) |b><a|``;
    ``a`` and ``b`` are positions in ``sites``.
    """

    sites: tuple[SiteLabel, ...]
    hoppings: tuple[tuple[int, int, complex], ...]
    decay: np.ndarray
    blocks: tuple[str, ...]
    onsite: np.ndarray | None = None

    def __post_init__(self):
        sites = tuple(self.sites)
        n = len(sites)
        if n == 0:
            raise ValueError("a lattice model needs at least one site")
        if len({s.chain_index for s in sites}) != n:
            raise ValueError("site chain indices must be unique")
        hops = tuple((int(a), int(b), complex(t)) for a, b, t in self.hoppings)
        for a, b, _ in hops:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"invalid hopping between positions {a} and {b}")
        decay = np.array(self.decay, dtype=float).reshape(-1)
        if decay.size != n:
            raise ValueError("decay vector length must match the number of sites")
        if np.any(decay < 0):
            raise ValueError("decay rates must be non-negative")
        blocks = tuple(self.blocks)
        if len(blocks) != n or any(tag not in BLOCK_TAGS for tag in blocks):
            raise ValueError(f"blocks must tag every site with one of {BLOCK_TAGS}")
        onsite = np.zeros(n) if self.onsite is None else np.array(self.onsite, dtype=float).reshape(-1)
        if onsite.size != n:
            raise ValueError("onsite vector length must match the number of sites")
        decay.setflags(write=False)
        onsite.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "hoppings", hops)
        object.__setattr__(self, "decay", decay)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "onsite", onsite)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def position(self, chain_index: int) -> int:
        """Matrix row of the site with the given chain index."""
        for pos, s in enumerate(self.sites):
            if s.chain_index == chain_index:
                return pos
        raise KeyError(f"no site with chain index {chain_index}")

    def block_positions(self, tag: str) -> np.ndarray:
        return np.array([i for i, b in enumerate(self.blocks) if b == tag], dtype=int)

    def with_decay(self, decay: Iterable[float]) -> "LatticeModel":
        return LatticeModel(self.sites, self.hoppings, np.asarray(list(decay), dtype=float), self.blocks, self.onsite)

    def to_dict(self) -> dict:
        return {
            "sites": [[s.oam, s.polarization.name, s.chain_index] for s in self.sites],
            "hoppings": [[a, b, t.real, t.imag] for a, b, t in self.hoppings],
            "decay": [float(g) for g in self.decay],
            "onsite": [float(e) for e in self.onsite],
            "blocks": list(self.blocks),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeModel":
        sites = tuple(SiteLabel(int(l), Polarization[p]) for l, p, _ in data["sites"])
        hops = tuple((int(a), int(b), complex(re, im)) for a, b, re, im in data["hoppings"])
        return cls(sites, hops, np.asarray(data["decay"], float), tuple(data["blocks"]), data.get("onsite"))

    @classmethod
    def from_json(cls, text: str) -> "LatticeModel":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """Short content hash used to tag results computed from this model."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def _chain_model(first_index: int, bonds: dict[tuple[int, int], complex], decay, blocks) -> LatticeModel:
    n = len(blocks)
    sites = tuple(SiteLabel.from_index(first_index + i) for i in range(n))
    hops = tuple((a - first_index, b - first_index, t) for (a, b), t in sorted(bonds.items()))
    return LatticeModel(sites, hops, np.asarray(decay, dtype=float), tuple(blocks))


def build_ring_chain(kappa: float, phi0: float, theta0: float, length: int, *, interference: bool = False) -> LatticeModel:
    """Plain OAM chain l = 0 .. length-1 of the single-polarization cavity.

    The bond ``l -> l+1`` picks up ``exp(i (phi0 + l theta0))`` from the
    beam rotators, giving amplitude ``-kappa exp(i(phi0 + l theta0))``.
    With ``interference`` the two auxiliary cavities add coherently and the
    bond becomes real, ``-kappa cos(phi0 + l theta0)``.

    Sites are labelled by OAM with H polarization; positions equal ``l``.
    """
    if length < 2:
        raise ValueError("a ring chain needs at least two sites")
    sites = tuple(SiteLabel(l) for l in range(length))
    hops = []
    for l in range(length - 1):
        phase = phi0 + l * theta0
        amp = -kappa * math.cos(phase) if interference else -kappa * complex(math.cos(phase), math.sin(phase))
        hops.append((l, l + 1, complex(amp)))
    return LatticeModel(sites, tuple(hops), np.zeros(length), ("center",) * length)


def decay_profile(n_sites: int, gamma0: float, width: float, j_last: int | None = None) -> np.ndarray:
    """Decay rates gamma0 (1 + exp(-j/width) + exp(-|j - j_last|/width)).

    Modes near either end of the chain couple out faster. ``j_last``
    defaults to the last site index ``n_sites - 1``.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    if gamma0 < 0:
        raise ValueError("gamma0 must be non-negative")
    if j_last is None:
        j_last = n_sites - 1
    j = np.arange(n_sites, dtype=float)
    return gamma0 * (1.0 + np.exp(-j / width) + np.exp(-np.abs(j - j_last) / width))


def _side_decay(distance: np.ndarray, gamma0: float, width: float) -> np.ndarray:
    # the outer chains feel only the junction end; their far ends are not measured
    return gamma0 * (1.0 + np.exp(-distance / width))


def _ssh_bonds(params: SSHParams) -> dict[tuple[int, int], complex]:
    bonds = {}
    for l in range(params.l_max + 1):
        bonds[(2 * l, 2 * l + 1)] = params.j0_eff
    for l in range(params.l_max):
        bonds[(2 * l + 1, 2 * l + 2)] = params.j1 * params.alpha_at(l + 1)
    return bonds


def build_ssh(params: SSHParams, decay: np.ndarray | None = None) -> LatticeModel:
    """Center chain of OAM 0 .. l_max with pinhole-reduced intercell bonds.

    Intracell bonds carry J0 cos(phi); the intercell bond between OAM ``l``
    and ``l + 1`` carries ``J1 alpha_{l+1}``. Decay defaults to zero.
    """
    n = 2 * (params.l_max + 1)
    if decay is None:
        decay = np.zeros(n)
    return _chain_model(0, _ssh_bonds(params), decay, ("center",) * n)


def build_total_chain(
    params: SSHParams,
    l_extra: int = 25,
    *,
    gamma0: float = 0.0,
    width: float = 5.0,
) -> LatticeModel:
    """Designed chain plus the OAM orders beyond its ends.

    The left block holds OAM ``-l_extra .. -1`` and the right block
    ``l_max + 1 .. l_max + l_extra``. They repeat the SSH pattern mirrored
    about the junction, with ``alpha_j`` counted from the nearest end. The
    only links to the center block are the leakage bonds ``eta_1 J1`` on
    ``(-1, 0)`` and ``(2 l_max + 1, 2 l_max + 2)``.

    With ``gamma0 > 0`` the center block gets :func:`decay_profile` and each
    side block a decay that rises towards its junction end.
    """
    if l_extra < 0:
        raise ValueError("l_extra must be non-negative")
    lm = params.l_max
    j_last = 2 * lm + 1
    bonds = _ssh_bonds(params)
    for i in range(l_extra):
        left, right = -1 - i, lm + 1 + i
        bonds[(2 * left, 2 * left + 1)] = params.j0_eff
        bonds[(2 * right, 2 * right + 1)] = params.j0_eff
        if i < l_extra - 1:
            bonds[(2 * left - 1, 2 * left)] = params.j1 * params.alpha_at(i + 1)
            bonds[(2 * right + 1, 2 * right + 2)] = params.j1 * params.alpha_at(i + 1)
    if l_extra > 0:
        leak = params.eta_at(1) * params.j1
        if leak != 0.0:
            bonds[(-1, 0)] = leak
            bonds[(j_last, j_last + 1)] = leak

    first = -2 * l_extra
    n = 2 * (lm + 1) + 4 * l_extra
    index = np.arange(first, first + n)
    blocks = tuple("left" if j < 0 else "right" if j > j_last else "center" for j in index)
    decay = np.zeros(n)
    if gamma0 > 0:
        center = (index >= 0) & (index <= j_last)
        decay[center] = decay_profile(j_last + 1, gamma0, width, j_last)
        decay[index < 0] = _side_decay(-1.0 - index[index < 0], gamma0, width)
        decay[index > j_last] = _side_decay(index[index > j_last] - j_last - 1.0, gamma0, width)
    return _chain_model(first, bonds, decay, blocks)


def lg_loss(l: np.ndarray | int, mirror_radius: float) -> np.ndarray:
    """Vectorized P(l) for integer OAM orders.

    For the LG_{p=0} profile r^l exp(-r^2) the outside fraction is the
    regularized upper incomplete gamma function Q(l + 1, 2 R^2).
    """
    l = np.abs(np.asarray(l, dtype=float))
    if math.isinf(mirror_radius):
        return np.zeros_like(l)
    return gammaincc(l + 1.0, 2.0 * mirror_radius**2)


def soft_boundary_chain(
    params: SSHParams,
    mirror_radius: float,
    *,
    l_extra: int = 10,
    gamma0: float = 0.05,
    loss_rate: float = 10.0,
    exact_loss: bool = False,
) -> LatticeModel:
    """Prolonged uniform SSH chain whose ends are set by mirror losses.

    Without pinholes nothing truncates the chain at the designed OAM range,
    so the chain runs ``l_extra`` orders past each nominal end. The decay of
    a mode grows with its distance ``|l - l_c|`` from the chain centre as
    ``gamma0 + loss_rate * P(|l - l_c|)``, where P is the fraction of the
    LG mode falling outside the mirror.

    ``exact_loss`` evaluates P by adaptive quadrature instead of the
    closed form; both agree to rounding.
    """
    lm = params.l_max
    uniform = SSHParams(params.j0, params.j1, params.phase, params.l_max, params.step)
    cells = lm + 1 + 2 * l_extra
    bonds = {}
    for c in range(cells):
        bonds[(2 * c, 2 * c + 1)] = uniform.j0_eff
        if c < cells - 1:
            bonds[(2 * c + 1, 2 * c + 2)] = uniform.j1
    first = -2 * l_extra
    bonds = {(a + first, b + first): t for (a, b), t in bonds.items()}
    dist = np.abs(np.repeat(np.arange(cells), 2) - (cells - 1) / 2.0)
    if exact_loss:
        loss = np.array([soft_boundary_loss(d, mirror_radius) for d in dist])
    else:
        loss = lg_loss(dist, mirror_radius)
    decay = gamma0 + loss_rate * loss
    index = np.arange(first, first + 2 * cells)
    blocks = tuple("left" if j < 0 else "right" if j > 2 * lm + 1 else "center" for j in index)
    return _chain_model(first, bonds, decay, blocks)


def dense_matrix(model: LatticeModel) -> np.ndarray:
    """Hermitian matrix of the model; row ``i`` is ``model.sites[i]``."""
    h = np.diag(np.asarray(model.onsite, dtype=complex))
    for a, b, t in model.hoppings:
        h[a, b] += t
        h[b, a] += np.conj(t)
    return h


def spectrum(model: LatticeModel) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    h = dense_matrix(model)
    try:
        if np.all(h.imag == 0):
            vals, vecs = np.linalg.eigh(h.real)
        else:
            vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed for model {model.digest()} ({model.n_sites} sites): {exc}") from exc
    return vals, vecs


def block_spectrum(model: LatticeModel, tag: str) -> np.ndarray:
    """Eigenvalues of the sub-Hamiltonian restricted to one block."""
    pos = model.block_positions(tag)
    h = dense_matrix(model)[np.ix_(pos, pos)]
    return np.linalg.eigvalsh(h)


def midgap_count(eigenvalues: np.ndarray, half_width: float) -> int:
    return int(np.count_nonzero(np.abs(eigenvalues) < half_width))
