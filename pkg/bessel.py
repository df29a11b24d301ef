"""
Rank-one multivariate Bessel function by Hankel-contour quadrature
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from config import Config
from contour import ContourIntegrator, power_loop
from schemas import BesselQuery, QuadratureResult
from utils.logging_setup import log_timing
from validators import require_distinct, require_nonzero

class BesselEvaluator:
    """Evaluates B_a(u; N, theta) for a point configuration a_1 <= ... <= a_N"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.integrator = ContourIntegrator(config)

    def query(self, points: Sequence[float], u: complex, theta: float, tol: Optional[float] = None) -> BesselQuery:
        return BesselQuery(points=points, u=u, theta=theta, tol=tol if tol is not None else self.config.quad_tol)

    @log_timing("bessel_rank_one")
    def bessel_rank_one(self, q: BesselQuery) -> QuadratureResult:
        """
        Gamma(theta N) / u^(theta N - 1) * (1/2 pi i) int e^{uz} prod_j (z - a_j)^-theta dz

        The loop is rotated by sgn(u); each power uses Log((z - a_j)/r), which fixes
        the branch of u^(theta N - 1) as q^(theta N - 1) r^-1 with q = u r. The loop is
        drawn in units of 1/|u| around the outermost point, where e^{uz} has unit size.

        Args:
            q: Points, argument, theta and tolerance

        Returns:
            QuadratureResult; for real u the value is real up to the reported diagnostic
        """
        # coincident points contribute one higher-order factor
        support, multiplicity = np.unique(q.points, return_counts=True)
        loop = power_loop(support, q.u, self.config.tail_length)

        try:
            result = self.integrator.integrate_loop(loop, q.theta * multiplicity, q.theta * q.n, q.tol)
        except Exception as e:
            self.logger.error(f"Bessel evaluation failed for N={q.n}, u={q.u}, theta={q.theta}: {e}")
            raise
        self.logger.debug(f"B(u={q.u}; N={q.n}, theta={q.theta}) = {result.value} ({result.n_evals} evaluations)")
        return self._enforce_real(result, q.u, q.tol)

    def _enforce_real(self, result: QuadratureResult, u: complex, tol: float) -> QuadratureResult:
        """Drop a negligible imaginary part for real u"""
        if u.imag != 0 or result.value.imag == 0:
            return result
        if abs(result.value.imag) <= 10 * tol:
            self.logger.debug(f"Discarded imaginary part {result.value.imag:.3e} for real u={u.real}")
            return QuadratureResult(
                value=complex(result.value.real, 0.0),
                abs_error_estimate=result.abs_error_estimate,
                n_evals=result.n_evals,
                truncation_bound=result.truncation_bound,
            )
        self.logger.warning(f"Imaginary part {result.value.imag:.3e} exceeds 10*tol for real u={u.real}")
        return result


def bessel_theta_one(points: Sequence[float], u: complex) -> complex:
    """
    Residue-sum closed form at theta = 1

    Gamma(N) u^(1-N) sum_j e^{u a_j} / prod_{k != j} (a_j - a_k), for pairwise distinct points.
    """
    u = require_nonzero(u)
    atoms = require_distinct(points)
    n = atoms.size
    gaps = atoms[:, None] - atoms[None, :]
    np.fill_diagonal(gaps, 1.0)
    # shifting by the largest atom keeps the exponentials bounded for Re u > 0
    shift = atoms[-1] if u.real >= 0 else atoms[0]
    terms = np.exp(u * (atoms - shift)) / np.prod(gaps, axis=1)
    scale = np.exp(gammaln(n) + (1 - n) * np.log(u) + u * shift)
    return complex(scale * np.sum(terms))
