"""
Discrete probability measures on the real line and their functionals
"""

import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix

from errors import InvalidArgument, InvalidMeasure, NumericalError, SingularEvaluation
from schemas import DiscreteMeasure, MomentVector, ROTATIONS
from validators import require_eta, require_positive, require_positive_int

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, np.ndarray]

def make_measure(atoms: Sequence[float], weights: Optional[Sequence[float]] = None) -> DiscreteMeasure:
    """
    Build a normalized, sorted, duplicate-merged measure

    Args:
        atoms: Support points in any order; exact duplicates are merged
        weights: Nonnegative weights (uniform when omitted)

    Returns:
        DiscreteMeasure whose weights sum to one; zero-weight atoms are dropped
    """
    atoms = np.asarray(atoms, dtype=float).ravel()
    if atoms.size == 0:
        raise InvalidMeasure("a measure needs at least one atom")
    if not np.all(np.isfinite(atoms)):
        raise InvalidMeasure("atoms must be finite")

    if weights is None:
        weights = np.full(atoms.size, 1.0 / atoms.size)
    else:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size != atoms.size:
            raise InvalidMeasure(f"got {atoms.size} atoms but {weights.size} weights")
        if not np.all(np.isfinite(weights)):
            raise InvalidMeasure("weights must be finite")
        if np.any(weights < 0):
            raise InvalidMeasure("weights must be nonnegative")
        if not weights.sum() > 0:
            raise InvalidMeasure("weights must not all be zero")

    support, inverse = np.unique(atoms, return_inverse=True)
    merged = np.bincount(inverse, weights=weights, minlength=support.size)
    keep = merged > 0
    support, merged = support[keep], merged[keep]
    return DiscreteMeasure(atoms=support, weights=merged / merged.sum())

def truncate(rho: DiscreteMeasure, M: float) -> DiscreteMeasure:
    """Move mass below -M to -M and mass above M to M"""
    M = require_positive(M, "M")
    return make_measure(np.clip(rho.atoms, -M, M), rho.weights)

_ELEMENT_BUDGET = 1 << 21

def _atom_sum(rho: DiscreteMeasure, z: np.ndarray, kernel: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """sum_j w_j kernel(z - a_j), accumulated over blocks of atoms to bound memory"""
    total = np.zeros(z.shape, dtype=complex)
    block = max(1, _ELEMENT_BUDGET // max(z.size, 1))
    for start in range(0, rho.size, block):
        atoms = rho.atoms[start:start + block]
        shifted = z[..., None] - atoms
        if np.any(shifted == 0):
            bad = z[np.any(shifted == 0, axis=-1)].ravel()[0]
            raise SingularEvaluation(f"z = {complex(bad)} coincides with an atom")
        total += kernel(shifted) @ rho.weights[start:start + block]
    return total

def g_function(rho: DiscreteMeasure, z: ComplexLike, rotation: complex = 1) -> ComplexLike:
    """
    Log-potential sum_j w_j Log((z - a_j) / rotation), principal branch per atom

    With rotation 1 this is g_rho(z) = int log(z - s) rho(ds). A rotation r in
    {1, -1, i, -i} moves each branch cut to a_j + r*(-inf, 0].
    """
    rotation = complex(rotation)
    if rotation not in ROTATIONS:
        raise InvalidArgument(f"rotation must be one of 1, -1, i, -i, got {rotation}")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if rotation == 1:
        value = _atom_sum(rho, z, np.log)
    else:
        value = _atom_sum(rho, z, lambda shifted: np.log(shifted / rotation))
    return complex(value) if scalar else value

def stieltjes(rho: DiscreteMeasure, z: ComplexLike) -> ComplexLike:
    """G_rho(z) = sum_j w_j / (z - a_j)"""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    value = _atom_sum(rho, z, np.reciprocal)
    return complex(value) if scalar else value

def moments(rho: DiscreteMeasure, n_max: int) -> MomentVector:
    """Power moments m_1..m_n_max"""
    n_max = require_positive_int(n_max, "n_max")
    powers = rho.atoms[None, :] ** np.arange(1, n_max + 1)[:, None]
    return MomentVector(order=n_max, values=powers @ rho.weights)

def hankel_min_eigenvalue(m: MomentVector) -> float:
    return m.hankel_min_eigenvalue()

def in_class_V(rho: DiscreteMeasure) -> float:
    """int log(1 + x^2) rho(dx)"""
    return float(np.log1p(rho.atoms ** 2) @ rho.weights)

def tail_moment(rho: DiscreteMeasure, phi: Callable[[np.ndarray], np.ndarray]) -> float:
    """int phi(x) rho(dx) for a vectorized phi"""
    return float(np.asarray(phi(rho.atoms), dtype=float) @ rho.weights)

def eta_cost(distance: np.ndarray, eta: float) -> np.ndarray:
    """min(t, t^eta), the ground metric of the extended eta-Wasserstein distance"""
    distance = np.asarray(distance, dtype=float)
    return np.minimum(distance, distance ** eta)

def _joint_support(mu: DiscreteMeasure, nu: DiscreteMeasure):
    support = np.union1d(mu.atoms, nu.atoms)
    diff = np.zeros(support.size)
    diff[np.searchsorted(support, mu.atoms)] += mu.weights
    diff[np.searchsorted(support, nu.atoms)] -= nu.weights
    return support, diff

def eta_wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure, eta: float) -> float:
    """
    Extended eta-Wasserstein distance between two discrete measures

    Maximizes sum h (mu - nu) over potentials h on the joint support with
    |h(x) - h(y)| <= min(|x-y|, |x-y|^eta).

    Args:
        mu: First measure
        nu: Second measure
        eta: Exponent in (0, 1)

    Returns:
        Nonnegative distance
    """
    eta = require_eta(eta)
    support, diff = _joint_support(mu, nu)
    n = support.size
    if n == 1 or not np.any(np.abs(diff) > 0):
        return 0.0

    # Diameter <= 1: cost is |x - y|, the value is the L1 distance of the CDFs
    if support[-1] - support[0] <= 1.0:
        cdf_gap = np.cumsum(diff)[:-1]
        return float(np.abs(cdf_gap) @ np.diff(support))

    return _eta_wasserstein_lp(support, diff, eta)

def _eta_wasserstein_lp(support: np.ndarray, diff: np.ndarray, eta: float) -> float:
    n = support.size
    distance = np.abs(support[:, None] - support[None, :])

    # Neighbour constraints imply every pair closer than 1; longer pairs are listed explicitly
    far_i, far_j = np.nonzero(np.triu(distance > 1.0, k=1))
    near_i = np.arange(n - 1)
    pairs_i = np.concatenate((near_i, far_i))
    pairs_j = np.concatenate((near_i + 1, far_j))
    costs = eta_cost(distance[pairs_i, pairs_j], eta)

    n_pairs = pairs_i.size
    rows = np.repeat(np.arange(2 * n_pairs), 2)
    cols = np.column_stack((
        np.concatenate((pairs_i, pairs_j)),
        np.concatenate((pairs_j, pairs_i)),
    )).ravel()
    values = np.tile([1.0, -1.0], 2 * n_pairs)
    A_ub = csc_matrix((values, (rows, cols)), shape=(2 * n_pairs, n))
    b_ub = np.concatenate((costs, costs))

    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(-diff, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    logger.debug(f"eta-Wasserstein LP on {n} points, {2 * n_pairs} constraints: {res.message}")
    if res.status != 0:
        raise NumericalError(f"eta-Wasserstein LP failed: {res.message}")
    return float(max(-res.fun, 0.0))
