"""Time-dispersive, dissipative systems as conservative systems coupled to a hidden string.

Submodules load on first attribute access so that thread settings made by
the command line take effect before numpy starts.
"""

import importlib

_EXPORTS = {
    "errors": None,
    "linalg": None,
    "susceptibility": None,
    "coupling": None,
    "extension": None,
    "reduced": None,
    "analysis": None,
    "models": None,
    "drives": None,
    "Markov": "susceptibility",
    "Debye": "susceptibility",
    "Lorentz": "susceptibility",
    "PowerLaw": "susceptibility",
    "Zero": "susceptibility",
    "Sum": "susceptibility",
    "check_pdc": "susceptibility",
    "build_coupling": "coupling",
    "SystemSpec": "extension",
    "build_extension": "extension",
    "simulate": "extension",
    "solve_lossless": "reduced",
    "solve_volterra": "reduced",
    "friction_work": "reduced",
    "demodulate": "analysis",
    "time_average": "analysis",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    if name not in _EXPORTS:
        raise AttributeError(f"module 'tddstring' has no attribute {name!r}")
    home = _EXPORTS[name]
    if home is None:
        return importlib.import_module(f".{name}", __name__)
    return getattr(importlib.import_module(f".{home}", __name__), name)
