"""
Markov-Krein correspondence checks, moment recursions, c-cumulants and the positivity probe
"""

import logging
from math import factorial
from typing import Any, Dict, Iterable, Optional

import numpy as np
from scipy.special import comb

from config import Config
from dirichlet import DirichletProcess, empirical_transform
from errors import InvalidArgument
from measures import g_function, moments
from schemas import CCumulantVector, ConjectureReport, DiscreteMeasure, EmpiricalSample, MKReport, MomentVector
from validators import require_away_from_support, require_moment_order, require_positive

logger = logging.getLogger(__name__)

CONSISTENT = "consistent"
CANDIDATE = "candidate counterexample"
ILL_CONDITIONED_ABOVE = 16

def _rising_binomials(c: float, n_max: int) -> np.ndarray:
    """binom(c+n-1, n) for n = 0..n_max by the rising-factorial recurrence"""
    out = np.ones(n_max + 1)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * (c + n - 1) / n
    return out

def _exp_series(m: np.ndarray, c: float, n_max: int) -> np.ndarray:
    """Coefficients b_n of exp(c sum_k m_k w^k / k) from n b_n = c sum_{k=1}^n m_k b_{n-k}"""
    b = np.zeros(n_max + 1)
    b[0] = 1.0
    for n in range(1, n_max + 1):
        b[n] = c / n * np.dot(m[1:n + 1], b[n - 1::-1])
    return b

def mk_moments(m: MomentVector, c: float, n_max: Optional[int] = None) -> MomentVector:
    """
    Moments of rho^(c) from the moments of rho

    Matches z^-n coefficients in sum_n binom(c+n-1, n) m'_n z^-n = exp(c sum_k m_k z^-k / k).

    Args:
        m: Moments m_1.. of rho
        c: Concentration
        n_max: Order of the result (at most m.order)

    Returns:
        MomentVector of rho^(c)
    """
    c = require_positive(c, "c")
    n_max = require_moment_order(n_max if n_max is not None else m.order)
    if n_max > m.order:
        raise InvalidArgument(f"n_max={n_max} exceeds the {m.order} available moments")
    full = m.with_zeroth()
    b = _exp_series(full, c, n_max)
    return MomentVector(order=n_max, values=b[1:] / _rising_binomials(c, n_max)[1:])

def mk_inverse_moments(m_prime: MomentVector, c: float, n_max: Optional[int] = None) -> MomentVector:
    """Moments of rho from those of rho^(c): c m_n = n b_n - c sum_{k<n} m_k b_{n-k}"""
    c = require_positive(c, "c")
    n_max = require_moment_order(n_max if n_max is not None else m_prime.order)
    b = np.concatenate(([1.0], m_prime.values[:n_max])) * _rising_binomials(c, n_max)
    m = np.zeros(n_max + 1)
    m[0] = 1.0
    for n in range(1, n_max + 1):
        m[n] = (n * b[n] - c * np.dot(m[1:n], b[n - 1:0:-1])) / c
    return MomentVector(order=n_max, values=m[1:])

def c_cumulants(m_prime: MomentVector) -> CCumulantVector:
    """Classical cumulants kappa~_l of rho^(c) and the c-cumulants kappa_l = kappa~_l / (l-1)!"""
    n_max = require_moment_order(m_prime.order)
    m = m_prime.with_zeroth()
    kappa_tilde = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        k = np.arange(1, n)
        kappa_tilde[n] = m[n] - np.sum(comb(n - 1, k - 1) * kappa_tilde[k] * m[n - k])
    kappa_tilde = kappa_tilde[1:]
    kappa = kappa_tilde / np.array([factorial(l - 1) for l in range(1, n_max + 1)], dtype=float)
    return CCumulantVector(order=n_max, kappa=kappa, kappa_tilde=kappa_tilde)

def cumulants_to_moments(cumulants: CCumulantVector) -> MomentVector:
    """Inverse of c_cumulants: m_n = sum_k binom(n-1, k-1) kappa~_k m_{n-k}"""
    n_max = cumulants.order
    kt = np.concatenate(([0.0], cumulants.kappa_tilde))
    m = np.zeros(n_max + 1)
    m[0] = 1.0
    for n in range(1, n_max + 1):
        k = np.arange(1, n + 1)
        m[n] = np.sum(comb(n - 1, k - 1) * kt[k] * m[n - k])
    return MomentVector(order=n_max, values=m[1:])

def add_cumulants(first: CCumulantVector, second: CCumulantVector) -> CCumulantVector:
    if first.order != second.order:
        raise InvalidArgument(f"cumulant orders differ: {first.order} vs {second.order}")
    return CCumulantVector(
        order=first.order,
        kappa=first.kappa + second.kappa,
        kappa_tilde=first.kappa_tilde + second.kappa_tilde,
    )


class MarkovKreinChecker:
    """Numerical checks of int (z-x)^-c rho^(c)(dx) = exp(-c g_rho(z)) and its moment expansion"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)

    def mk_residual(self, rho: DiscreteMeasure, c: float, mean_samples: EmpiricalSample,
                    z_grid: Iterable[complex]) -> MKReport:
        """
        Pointwise |MC mean of (z - X)^-c - exp(-c g_rho(z))|

        Args:
            rho: Base measure
            c: Concentration used to draw mean_samples
            mean_samples: Random means of D_{c rho}
            z_grid: Points at distance >= 0.5 from [a_1, a_n]

        Returns:
            MKReport with per-point residuals and Monte Carlo standard errors
        """
        c = require_positive(c, "c")
        if mean_samples.concentration is not None and not np.isclose(mean_samples.concentration, c):
            raise InvalidArgument(f"samples were drawn with c={mean_samples.concentration}, not c={c}")
        points = require_away_from_support(z_grid, rho.support_min, rho.support_max)

        residuals, sigmas = [], []
        for z in points:
            left = np.exp(-c * np.log(z - mean_samples.values))
            mc = complex(np.mean(left))
            sigma = float(np.sqrt(np.mean(np.abs(left - mc) ** 2) / mean_samples.size))
            right = complex(np.exp(-c * g_function(rho, z)))
            residuals.append(float(abs(mc - right)))
            sigmas.append(sigma)
            self.logger.debug(f"MK at z={z}: MC {mc} +- {sigma:.2e}, closed form {right}")

        report = MKReport(z_grid=points, per_point=residuals, sigma=sigmas, max_residual=max(residuals))
        self.logger.info(f"Markov-Krein residual over {len(points)} points: max {report.max_residual:.3e}")
        return report

    def conjecture_probe(self, rho1: DiscreteMeasure, rho2: DiscreteMeasure, c: float, n_max: int) -> ConjectureReport:
        """
        Add the c-cumulants of rho1 and rho2 and test whether the resulting moments form a moment sequence

        Args:
            rho1: First measure
            rho2: Second measure
            c: Concentration
            n_max: Even moment order

        Returns:
            ConjectureReport labelled "consistent" or "candidate counterexample"
        """
        c = require_positive(c, "c")
        n_max = require_moment_order(n_max)
        if n_max % 2:
            raise InvalidArgument(f"n_max must be even, got {n_max}")
        ill_conditioned = n_max > ILL_CONDITIONED_ABOVE
        if ill_conditioned:
            self.logger.warning(f"Moment inversion of order {n_max} is ill-conditioned; treat the eigenvalue with care")

        kappa = add_cumulants(
            c_cumulants(mk_moments(moments(rho1, n_max), c)),
            c_cumulants(mk_moments(moments(rho2, n_max), c)),
        )
        mu_moments = mk_inverse_moments(cumulants_to_moments(kappa), c)
        min_eig = mu_moments.hankel_min_eigenvalue()
        label = CONSISTENT if min_eig >= -1e-6 else CANDIDATE
        self.logger.info(f"Conjecture probe (c={c}, n_max={n_max}): min Hankel eigenvalue {min_eig:.3e}, {label}")
        return ConjectureReport(mu_moments=mu_moments, hankel_min_eig=min_eig, label=label,
                                ill_conditioned=ill_conditioned)

    def three_paths(self, rho: DiscreteMeasure, c: float, u: float, sample: EmpiricalSample,
                    n_terms: int = 12, tol: Optional[float] = None) -> Dict[str, Any]:
        """int e^{ux} rho^(c)(dx) by contour quadrature, by the moment series and by Monte Carlo"""
        contour_value = DirichletProcess(self.config).fourier_rho_c(rho, c, u, tol).value
        m_prime = mk_moments(moments(rho, n_terms), c)
        series = 1.0 + sum(m_prime.values[n - 1] * u ** n / factorial(n) for n in range(1, n_terms + 1))
        mc, sigma = empirical_transform(sample, u)
        return {"contour": contour_value, "series": complex(series), "mc": mc, "mc_sigma": sigma}
