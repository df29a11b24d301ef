"""
Dirichlet-process random means: Monte Carlo sampling and contour transforms
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import ks_2samp

from config import Config
from contour import ContourIntegrator, mellin_loop, power_loop, power_prefactor, sgn_rotation
from errors import InvalidArgument, NumericalError
from measures import g_function, tail_moment
from schemas import DiscreteMeasure, DPConfig, EmpiricalSample, QuadratureResult
from utils.logging_setup import log_timing
from validators import require_nonzero, require_positive, require_positive_atoms, require_right_half_plane

_ELEMENTS_PER_DRAW = 1 << 20

def _log_gamma_variates(rng: np.random.Generator, alpha: np.ndarray, rows: int) -> np.ndarray:
    """log of Gamma(alpha) variates, boosted for alpha < 1 as log G(alpha+1) + log(U)/alpha"""
    small = alpha < 1.0
    shape = np.where(small, alpha + 1.0, alpha)
    log_g = np.log(rng.standard_gamma(shape, size=(rows, alpha.size)))
    if np.any(small):
        log_u = np.log(rng.uniform(size=(rows, int(small.sum()))))
        log_g[:, small] += log_u / alpha[small]
    return log_g

def sample_dirichlet_weights(alpha: Sequence[float], rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Dir(alpha) draws via normalized Gamma variates, computed in log space

    Args:
        alpha: Positive concentration parameters
        rng: numpy Generator
        size: Number of draws; a single vector when omitted

    Returns:
        Nonnegative weights summing to one along the last axis
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.size == 0 or not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
        raise InvalidArgument("Dirichlet parameters must be positive")
    rows = 1 if size is None else int(size)
    log_g = _log_gamma_variates(rng, alpha, rows)
    weights = np.exp(log_g - logsumexp(log_g, axis=1, keepdims=True))
    weights /= weights.sum(axis=1, keepdims=True)
    return weights[0] if size is None else weights

def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent Philox substream for one fixed-size block of draws"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


class DirichletProcess:
    """Random means of D_{c rho} for discrete rho, and the transforms of their law rho^(c)"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.integrator = ContourIntegrator(config)

    def _sample_block(self, cfg: DPConfig, block: int) -> np.ndarray:
        """Random means for one block; a pure function of (seed, block index)"""
        start = block * self.config.block_size
        rows = min(self.config.block_size, cfg.n_samples - start)
        rng = block_generator(cfg.seed, block)
        alpha = cfg.concentration * cfg.base.weights
        chunk = max(1, _ELEMENTS_PER_DRAW // cfg.base.size)
        means = []
        for offset in range(0, rows, chunk):
            weights = sample_dirichlet_weights(alpha, rng, size=min(chunk, rows - offset))
            means.append(weights @ cfg.base.atoms)
        return np.concatenate(means)

    @log_timing("random_mean_samples")
    def random_mean_samples(self, cfg: DPConfig) -> EmpiricalSample:
        """
        Draw n_samples values of sum_j a_j sigma_j with sigma ~ Dir(c w_1, ..., c w_n)

        Blocks of draws are spread round-robin over shards and reassembled in block
        order, so the output depends on the seed only.

        Args:
            cfg: Base measure, concentration, sample count, seed and shard count

        Returns:
            EmpiricalSample whose values lie in [a_1, a_n]
        """
        base = cfg.base
        if base.size == 1:
            values = np.full(cfg.n_samples, base.atoms[0])
            return EmpiricalSample(values=values, seed_used=cfg.seed, shards_used=cfg.shards,
                                   concentration=cfg.concentration)

        n_blocks = -(-cfg.n_samples // self.config.block_size)
        shard_blocks = [list(range(s, n_blocks, cfg.shards)) for s in range(cfg.shards)]

        def run_shard(blocks: List[int]) -> Dict[int, np.ndarray]:
            return {b: self._sample_block(cfg, b) for b in blocks}

        workers = max(1, min(cfg.shards, self.config.threads))
        try:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                shard_results = list(pool.map(run_shard, shard_blocks))
        except Exception as e:
            self.logger.error(f"Random-mean sampling failed: {e}")
            raise

        by_block: Dict[int, np.ndarray] = {}
        for result in shard_results:
            by_block.update(result)
        values = np.concatenate([by_block[b] for b in range(n_blocks)])
        # the random mean lies in the convex hull of the support
        slack = 1e-12 * max(base.support_max - base.support_min, abs(base.support_min), abs(base.support_max))
        outside = (values < base.support_min - slack) | (values > base.support_max + slack)
        if np.any(outside):
            self.logger.error(f"{int(outside.sum())} random means outside [{base.support_min}, {base.support_max}]")
            raise NumericalError(
                f"random means fall outside the convex hull [{base.support_min}, {base.support_max}] "
                f"of the support (first: {values[outside][0]})"
            )
        self.logger.info(
            f"Drew {values.size} random means (c={cfg.concentration}, {base.size} atoms, "
            f"{cfg.shards} shards, {workers} workers)"
        )
        return EmpiricalSample(values=values, seed_used=cfg.seed, shards_used=cfg.shards,
                               concentration=cfg.concentration)

    def fourier_rho_c(
        self,
        rho: DiscreteMeasure,
        c: float,
        u: complex,
        tol: Optional[float] = None,
        contour: str = "hankel",
        delta: Optional[float] = None,
    ) -> QuadratureResult:
        """
        int e^{ux} rho^(c)(dx) = Gamma(c)/u^(c-1) * (1/2 pi i) int e^{uz - c g_rho(z)} dz

        Args:
            rho: Discrete base measure
            c: Concentration
            u: Nonzero argument
            tol: Absolute tolerance
            contour: "hankel" (rotated loop) or "line" (R - i delta sgn t, for u = it and c > 1)
            delta: Line offset

        Returns:
            QuadratureResult
        """
        c = require_positive(c, "c")
        u = require_nonzero(u)
        tol = tol if tol is not None else self.config.quad_tol
        rotation = sgn_rotation(u)

        try:
            if contour == "hankel":
                loop = power_loop(rho.atoms, u, self.config.tail_length)
                result = self.integrator.integrate_loop(loop, c * rho.weights, c, tol)
            elif contour == "line":
                if u.real != 0:
                    raise InvalidArgument("the line contour needs a purely imaginary u")
                if not c > 1:
                    raise InvalidArgument(f"the line contour needs c > 1, got c={c}")

                def envelope(z):
                    return complex(np.exp(-c * g_function(rho, z, rotation)))

                prefactor = power_prefactor(c, u)
                result = self.integrator.integrate_line(envelope, u.imag, tol / abs(prefactor), delta).scaled(prefactor)
            else:
                raise InvalidArgument(f"unknown contour {contour!r} (expected hankel or line)")
        except Exception as e:
            self.logger.error(f"Fourier transform of rho^(c) failed (c={c}, u={u}, contour={contour}): {e}")
            raise

        if u.imag == 0 and abs(result.value.imag) > 0:
            if abs(result.value.imag) <= 10 * tol:
                result = QuadratureResult(complex(result.value.real, 0.0), result.abs_error_estimate,
                                          result.n_evals, result.truncation_bound)
            else:
                self.logger.warning(f"Imaginary part {result.value.imag:.3e} exceeds 10*tol for real u={u.real}")
        return result

    def mellin_rho_c(self, rho: DiscreteMeasure, c: float, u: complex, tol: Optional[float] = None) -> QuadratureResult:
        """int x^u rho^(c)(dx) = Gamma(c)Gamma(u+1)/Gamma(u+c) * (1/2 pi i) int exp(us - c int log(1 - x e^{-s}) rho(dx)) ds"""
        c = require_positive(c, "c")
        u = require_right_half_plane(u)
        require_positive_atoms(rho.atoms)
        tol = tol if tol is not None else self.config.quad_tol
        loop = mellin_loop(rho.atoms, u, self.config.tail_length)

        try:
            result = self.integrator.integrate_loop(loop, c * rho.weights, c, tol)
        except Exception as e:
            self.logger.error(f"Mellin transform of rho^(c) failed (c={c}, u={u}): {e}")
            raise
        if u.imag == 0 and abs(result.value.imag) <= 10 * tol:
            result = QuadratureResult(complex(result.value.real, 0.0), result.abs_error_estimate,
                                      result.n_evals, result.truncation_bound)
        return result


def empirical_transform(sample: EmpiricalSample, u: complex):
    """Monte Carlo mean of e^{uX} and its standard error"""
    values = np.exp(complex(u) * sample.values)
    mean = complex(np.mean(values))
    sigma = float(np.sqrt(np.mean(np.abs(values - mean) ** 2) / sample.size))
    return mean, sigma

def empirical_mellin(sample: EmpiricalSample, u: complex):
    """Monte Carlo mean of X^u for positive samples and its standard error"""
    values = np.exp(complex(u) * np.log(sample.values))
    mean = complex(np.mean(values))
    sigma = float(np.sqrt(np.mean(np.abs(values - mean) ** 2) / sample.size))
    return mean, sigma

def lauricella_check(rho: DiscreteMeasure, c: float, z: complex, sample: EmpiricalSample) -> Dict[str, Any]:
    """
    Compare the Dirichlet average of (z - sum_j a_j sigma_j)^-c with prod_j (z - a_j)^(-c w_j)

    The random means in `sample` are the values sum_j a_j sigma_j, so the Monte Carlo side
    is the sample mean of (z - X)^-c.
    """
    c = require_positive(c, "c")
    z = complex(z)
    if z.imag == 0:
        raise InvalidArgument("z must lie off the real axis")
    values = np.exp(-c * np.log(z - sample.values))
    mc = complex(np.mean(values))
    sigma = float(np.sqrt(np.mean(np.abs(values - mc) ** 2) / sample.size))
    exact = complex(np.exp(-c * g_function(rho, z)))
    return {"z": z, "mc": mc, "exact": exact, "sigma": sigma, "residual": abs(mc - exact)}

def tail_inequality(
    rho: DiscreteMeasure,
    sample: EmpiricalSample,
    alphas: Sequence[float] = (1.0, 2.0, 3.0),
    phi: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
) -> List[Dict[str, Any]]:
    """
    Check E_{rho^(c)} phi(X) <= E_rho phi(X) for convex phi, with a 3-sigma Monte Carlo allowance

    The bound with an extra 1/c factor is reported alongside; it is not asserted.

    Args:
        rho: Base measure
        sample: Random means of D_{c rho}; must carry its concentration
        alphas: Parameters of phi
        phi: phi(x, alpha); defaults to |x|^alpha

    Returns:
        One record per alpha
    """
    if sample.concentration is None:
        raise InvalidArgument("the sample must record its concentration")
    c = sample.concentration
    phi = phi or (lambda x, a: np.abs(x) ** a)
    records = []
    for alpha in alphas:
        values = phi(sample.values, alpha)
        mc = float(np.mean(values))
        sigma = float(np.std(values) / np.sqrt(sample.size))
        base = tail_moment(rho, lambda x: phi(x, alpha))
        records.append({
            "alpha": float(alpha),
            "mc": mc,
            "sigma": sigma,
            "base": base,
            "holds": mc <= base + 3.0 * sigma,
            "base_over_c": base / c,
            "holds_with_1_over_c": mc <= base / c + 3.0 * sigma,
        })
    return records

def exponential_tail(rho: DiscreteMeasure, sample: EmpiricalSample, rates: Sequence[float] = (0.5, 1.0)) -> List[Dict[str, Any]]:
    """tail_inequality for phi(x) = exp(a |x|)"""
    return tail_inequality(rho, sample, rates, phi=lambda x, a: np.exp(a * np.abs(x)))

def ks_distance(first: EmpiricalSample, second: EmpiricalSample) -> float:
    """Two-sample Kolmogorov-Smirnov statistic"""
    return float(ks_2samp(first.values, second.values).statistic)
