"""
Rank-one Heckman-Opdam hypergeometric function by Hankel-contour quadrature
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.special import loggamma

from config import Config
from contour import ContourIntegrator, mellin_loop
from schemas import HOQuery, QuadratureResult
from utils.logging_setup import log_timing
from validators import require_distinct, require_positive_atoms, require_right_half_plane

class HeckmanOpdamEvaluator:
    """Evaluates F_{log a}(u; N, theta) for positive points a_1 <= ... <= a_N"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.integrator = ContourIntegrator(config)

    def query(self, points: Sequence[float], u: complex, theta: float, tol: Optional[float] = None) -> HOQuery:
        return HOQuery(points=points, u=u, theta=theta, tol=tol if tol is not None else self.config.quad_tol)

    @log_timing("ho_rank_one")
    def ho_rank_one(self, q: HOQuery) -> QuadratureResult:
        """
        Gamma(theta N) Gamma(u+1) / Gamma(u + theta N) * (1/2 pi i) int e^{us} prod_j (1 - a_j e^{-s})^-theta ds

        The loop encloses (-inf, log a_N] and keeps |Im s| <= pi, where
        1 - a_j e^{-s} vanishes only at s = log a_j. Distances along the loop scale as 1/|u|.
        """
        support, multiplicity = np.unique(q.points, return_counts=True)
        loop = mellin_loop(support, q.u, self.config.tail_length)

        try:
            result = self.integrator.integrate_loop(loop, q.theta * multiplicity, q.theta * q.n, q.tol)
        except Exception as e:
            self.logger.error(f"Heckman-Opdam evaluation failed for N={q.n}, u={q.u}, theta={q.theta}: {e}")
            raise
        self.logger.debug(f"F(u={q.u}; N={q.n}, theta={q.theta}) = {result.value} ({result.n_evals} evaluations)")
        if q.u.imag == 0 and abs(result.value.imag) <= 10 * q.tol:
            result = QuadratureResult(
                value=complex(result.value.real, 0.0),
                abs_error_estimate=result.abs_error_estimate,
                n_evals=result.n_evals,
                truncation_bound=result.truncation_bound,
            )
        return result


def ho_theta_one(points: Sequence[float], u: complex) -> complex:
    """
    Residue-sum closed form at theta = 1

    Gamma(N) Gamma(u+1) / Gamma(u+N) * sum_j a_j^u prod_{k != j} (1 - a_k / a_j)^-1
    """
    u = require_right_half_plane(u)
    atoms = require_distinct(require_positive_atoms(points))
    n = atoms.size
    ratios = 1.0 - atoms[None, :] / atoms[:, None]
    np.fill_diagonal(ratios, 1.0)
    terms = np.exp(u * np.log(atoms)) / np.prod(ratios, axis=1)
    prefactor = np.exp(loggamma(n) + loggamma(u + 1.0) - loggamma(u + n))
    return complex(prefactor * np.sum(terms))
