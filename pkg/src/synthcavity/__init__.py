"""Simulator for a degenerate optical cavity used as a synthetic OAM lattice.

Modules:
    optics    pinhole beam-splitter geometry and hopping corrections
    lattice   SSH chains built from the cavity modes
    response  transmission spectra and pulse dynamics
    floquet   driven chain, quasienergies and winding numbers
    cli       configuration-driven experiment runner
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import SimulationError  # noqa: E402

__all__ = ["SimulationError", "__version__"]
