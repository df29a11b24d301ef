"""
Precondition checks shared by the numerical modules
"""

import logging
from typing import Iterable, Sequence

import numpy as np

from errors import InvalidArgument, DegenerateSpectrum

logger = logging.getLogger(__name__)

def require_positive(value: float, name: str) -> float:
    """Return value as float, raising InvalidArgument unless it is finite and > 0"""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgument(f"{name} must be a real number, got {value!r}")
    if not (np.isfinite(value) and value > 0):
        raise InvalidArgument(f"{name} must be positive, got {value}")
    return value

def require_positive_int(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidArgument(f"{name} must be a positive integer, got {value}")
    return int(value)

def require_nonzero(u: complex, name: str = "u") -> complex:
    u = complex(u)
    if u == 0:
        raise InvalidArgument(f"{name} must be nonzero")
    if not (np.isfinite(u.real) and np.isfinite(u.imag)):
        raise InvalidArgument(f"{name} must be finite, got {u}")
    return u

def require_right_half_plane(u: complex, name: str = "u") -> complex:
    u = complex(u)
    if not u.real > 0:
        raise InvalidArgument(f"Re {name} must be positive, got {u}")
    return u

def require_positive_atoms(atoms: Iterable[float]) -> np.ndarray:
    atoms = np.asarray(atoms, dtype=float)
    if not np.all(atoms > 0):
        raise InvalidArgument("all atoms must be strictly positive")
    return atoms

def require_distinct(atoms: Sequence[float]) -> np.ndarray:
    """Sorted atoms, raising DegenerateSpectrum if two of them coincide"""
    atoms = np.sort(np.asarray(atoms, dtype=float))
    if atoms.size > 1 and np.any(np.diff(atoms) == 0):
        raise DegenerateSpectrum("atoms must be pairwise distinct")
    return atoms

def require_eta(eta: float) -> float:
    eta = float(eta)
    if not 0 < eta < 1:
        raise InvalidArgument(f"eta must lie in (0, 1), got {eta}")
    return eta

def require_away_from_support(z_grid: Iterable[complex], lo: float, hi: float, min_distance: float = 0.5) -> list:
    """Grid points as complex numbers, each at distance >= min_distance from the segment [lo, hi]"""
    points = [complex(z) for z in z_grid]
    if not points:
        raise InvalidArgument("z grid must not be empty")
    for z in points:
        nearest = min(max(z.real, lo), hi)
        if abs(z - nearest) < min_distance:
            raise InvalidArgument(f"grid point {z} is too close to the support [{lo}, {hi}] (distance < {min_distance})")
    return points

def require_moment_order(n_max: int, cap: int = 24, warn_above: int = 20) -> int:
    n_max = require_positive_int(n_max, "n_max")
    if n_max > cap:
        raise InvalidArgument(f"n_max must not exceed {cap}, got {n_max}")
    if n_max > warn_above:
        logger.warning(f"Moment recursion of order {n_max} is ill-conditioned in floating point")
    return n_max
