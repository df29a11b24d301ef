"""
Experiment harness for the classical and high-temperature limits of the rank-one functions
"""

import logging
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from tqdm import tqdm

from bessel import BesselEvaluator
from config import Config
from dirichlet import DirichletProcess, empirical_mellin, empirical_transform
from errors import InvalidArgument
from heckman_opdam import HeckmanOpdamEvaluator
from measures import eta_wasserstein, make_measure
from schemas import DiscreteMeasure, DPConfig, RegimeSchedule, SweepReport, SweepRow
from utils.logging_setup import log_timing
from validators import require_positive, require_positive_int

TARGET_NAMES = ("uniform", "semicircle", "two_point", "beta")

class TargetDistribution:
    """Named limit distribution: uniform:a,b | semicircle:r | two_point:p[,lo,hi] | beta:alpha,beta"""

    def __init__(self, name: str, params: Sequence[float]):
        self.name = name
        self.params = tuple(float(p) for p in params)
        self._dist = None
        if name == "uniform":
            self._expect_params(2, 2)
            a, b = self.params
            if not b > a:
                raise InvalidArgument(f"uniform needs a < b, got {a}, {b}")
            self._dist = stats.uniform(loc=a, scale=b - a)
        elif name == "semicircle":
            self._expect_params(1, 1)
            self._dist = stats.semicircular(scale=require_positive(self.params[0], "r"))
        elif name == "two_point":
            self._expect_params(1, 3)
            p = self.params[0]
            if not 0 < p < 1:
                raise InvalidArgument(f"two_point needs 0 < p < 1, got {p}")
            lo, hi = self.params[1:] if len(self.params) == 3 else (0.0, 1.0)
            if not hi > lo:
                raise InvalidArgument(f"two_point needs lo < hi, got {lo}, {hi}")
            self.p, self.lo, self.hi = p, lo, hi
        elif name == "beta":
            self._expect_params(2, 2)
            self._dist = stats.beta(require_positive(self.params[0], "alpha"), require_positive(self.params[1], "beta"))
        else:
            raise InvalidArgument(f"unsupported distribution {name!r}; expected one of {', '.join(TARGET_NAMES)}")

    def _expect_params(self, low: int, high: int):
        if not low <= len(self.params) <= high:
            raise InvalidArgument(f"{self.name} takes {low}..{high} parameters, got {len(self.params)}")

    @classmethod
    def parse(cls, text: str) -> "TargetDistribution":
        """Parse `name:p1,p2,...`"""
        name, _, rest = str(text).strip().partition(":")
        try:
            params = [float(v) for v in rest.split(",") if v.strip()]
        except ValueError:
            raise InvalidArgument(f"cannot parse distribution parameters in {text!r}")
        return cls(name.strip().lower(), params)

    def __repr__(self) -> str:
        return f"{self.name}:{','.join(f'{p:g}' for p in self.params)}"

    @property
    def support(self) -> Tuple[float, float]:
        if self._dist is None:
            return self.lo, self.hi
        return tuple(float(v) for v in self._dist.support())

    def ppf(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self._dist is None:
            return np.where(q <= 1.0 - self.p, self.lo, self.hi)
        return self._dist.ppf(q)

    def quantile_points(self, n: int) -> np.ndarray:
        """Midpoint quantiles ppf((j - 1/2)/N), j = 1..N"""
        n = require_positive_int(n, "N")
        return self.ppf((np.arange(1, n + 1) - 0.5) / n)

    def _expect_complex(self, func: Callable[[float], complex]) -> complex:
        if self._dist is None:
            return (1.0 - self.p) * func(self.lo) + self.p * func(self.hi)
        options = dict(epsabs=1e-12, epsrel=1e-12, limit=200)
        real = self._dist.expect(lambda x: func(x).real, **options)
        imag = self._dist.expect(lambda x: func(x).imag, **options)
        return complex(real, imag)

    def fourier(self, u: complex) -> complex:
        """int e^{ux} rho(dx)"""
        u = complex(u)
        return self._expect_complex(lambda x: complex(np.exp(u * x)))

    def mellin(self, u: complex) -> complex:
        """int x^u rho(dx) for positive support"""
        if not self.support[0] > 0:
            raise InvalidArgument(f"{self!r} is not supported on the positive half-line")
        u = complex(u)
        return self._expect_complex(lambda x: complex(np.exp(u * np.log(x))))


def quantile_discretize(target: TargetDistribution, n: int) -> DiscreteMeasure:
    """rho_N with atoms at the midpoint quantiles and weights 1/N (duplicates merged)"""
    return make_measure(target.quantile_points(n))


class LimitExperiment:
    """Runs finite-N sweeps and measures the distance to the predicted limit transforms"""

    def __init__(self, config: Config, show_progress: bool = False):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.show_progress = show_progress
        self.bessel = BesselEvaluator(config)
        self.ho = HeckmanOpdamEvaluator(config)
        self.dp = DirichletProcess(config)
        self._cache: Dict[Tuple, complex] = {}
        self._lock = threading.Lock()

    def discretization_error(self, target: TargetDistribution, n: int, eta: float = 0.5, factor: int = 10) -> float:
        """eta-Wasserstein distance from rho_N to the reference discretization at factor*N atoms"""
        return eta_wasserstein(quantile_discretize(target, n), quantile_discretize(target, factor * n), eta)

    def _cached(self, kind: str, points: np.ndarray, u: complex, theta: float) -> complex:
        key = (kind, tuple(points.tolist()), complex(u), float(theta))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        if kind == "bessel":
            value = self.bessel.bessel_rank_one(self.bessel.query(points, u, theta)).value
        else:
            value = self.ho.ho_rank_one(self.ho.query(points, u, theta)).value
        with self._lock:
            self._cache[key] = value
        return value

    def _run_cells(self, kind: str, target: TargetDistribution, u_grid: Sequence[complex],
                   n_list: Sequence[int], schedule: RegimeSchedule) -> List[Tuple[int, complex, complex]]:
        cells = [(n, complex(u)) for n in n_list for u in u_grid]
        points = {n: target.quantile_points(n) for n in n_list}

        def evaluate(cell):
            n, u = cell
            return self._cached(kind, points[n], u, schedule.theta(n))

        values: List[Optional[complex]] = [None] * len(cells)
        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            futures = {pool.submit(evaluate, cell): i for i, cell in enumerate(cells)}
            with tqdm(total=len(cells), desc=f"{kind} sweep", file=sys.stderr,
                      disable=not self.show_progress) as progress:
                for future in futures:
                    values[futures[future]] = future.result()
                    progress.update(1)
        return [(n, u, v) for (n, u), v in zip(cells, values)]

    def _trend(self, report_rows: List[SweepRow], u_grid: Sequence[complex], n_list: Sequence[int]) -> Dict[str, Dict[str, Any]]:
        trend = {}
        order = np.argsort(n_list)
        for u in u_grid:
            by_n = {row.n: row.abs_err for row in report_rows if row.u == complex(u)}
            errors = [by_n[n_list[i]] for i in order]
            ns = [n_list[i] for i in order]
            rho = float(stats.spearmanr(ns, errors).statistic) if len(set(ns)) > 1 else float("nan")
            trend[_u_label(u)] = {
                "spearman": rho,
                "improved": bool(errors[-1] < errors[0]),
                "final_error": float(errors[-1]),
            }
        return trend

    def _check_schedule(self, schedule: RegimeSchedule, expected: str):
        if schedule.regime == "free":
            raise InvalidArgument("the free regime has no implemented limit; use classical or high_temperature")
        if schedule.regime != expected:
            raise InvalidArgument(f"expected a {expected} schedule, got {schedule.regime}")

    def _high_temp_reference(self, target: TargetDistribution) -> DiscreteMeasure:
        return quantile_discretize(target, self.config.reference_atoms)

    def _mc_reference(self, reference: DiscreteMeasure, c: float):
        cfg = DPConfig(base=reference, concentration=c, n_samples=self.config.mc_samples,
                       seed=self.config.seed, shards=self.config.threads)
        return self.dp.random_mean_samples(cfg)

    @log_timing("classical_sweep")
    def classical_sweep(self, target: TargetDistribution, u_grid: Sequence[complex], n_list: Sequence[int],
                        schedule: Optional[RegimeSchedule] = None) -> SweepReport:
        """
        B_{a(N)}(u; N, beta_N/2) against int e^{ux} rho(dx) for beta_N = o(1/N)

        Args:
            target: Limit distribution rho
            u_grid: Arguments
            n_list: Sizes N
            schedule: Classical schedule (beta_N = 1/N^2 by default)

        Returns:
            SweepReport of kind fourier_rho
        """
        schedule = schedule or RegimeSchedule("classical")
        self._check_schedule(schedule, "classical")
        targets = {complex(u): target.fourier(u) for u in u_grid}
        cells = self._run_cells("bessel", target, u_grid, n_list, schedule)
        rows = [SweepRow(n=n, u=u, value=v, target=targets[u]) for n, u, v in cells]
        return self._report("fourier_rho", n_list, u_grid, rows)

    @log_timing("high_temp_sweep")
    def high_temp_sweep(self, target: TargetDistribution, u_grid: Sequence[complex], n_list: Sequence[int],
                        c: float, with_mc: bool = True) -> SweepReport:
        """
        B_{a(N)}(u; N, c/N) against int e^{ux} rho^(c)(dx)

        The reference is the contour transform of a high-resolution discretization of rho,
        with Monte Carlo random means as a second, independent reference.
        """
        c = require_positive(c, "c")
        schedule = RegimeSchedule("high_temperature", c_target=c)
        reference = self._high_temp_reference(target)
        targets = {
            complex(u): self.dp.fourier_rho_c(reference, c, u, tol=self.config.reference_tol).value
            for u in u_grid
        }
        mc = {}
        if with_mc:
            sample = self._mc_reference(reference, c)
            mc = {complex(u): empirical_transform(sample, u) for u in u_grid}
        cells = self._run_cells("bessel", target, u_grid, n_list, schedule)
        rows = [
            SweepRow(n=n, u=u, value=v, target=targets[u],
                     mc_value=mc[u][0] if mc else None, mc_band=3.0 * mc[u][1] if mc else None)
            for n, u, v in cells
        ]
        return self._report("fourier_rho_c", n_list, u_grid, rows)

    @log_timing("mellin_sweep")
    def mellin_sweep(self, target: TargetDistribution, u_grid: Sequence[complex], n_list: Sequence[int],
                     schedule: RegimeSchedule, with_mc: bool = True) -> SweepReport:
        """
        F_{log a(N)}(u; N, beta_N/2) against int x^u rho(dx) (classical) or int x^u rho^(c)(dx) (high temperature)
        """
        if schedule.regime == "free":
            raise InvalidArgument("the free regime has no implemented limit; use classical or high_temperature")
        if not target.support[0] > 0:
            raise InvalidArgument(f"{target!r} is not supported on the positive half-line")
        for u in u_grid:
            if not complex(u).real > 0:
                raise InvalidArgument(f"Re u must be positive, got {u}")
            if schedule.regime == "high_temperature" and complex(u).real < 1:
                raise InvalidArgument(f"the high-temperature Mellin limit needs Re u >= 1, got {u}")

        mc = {}
        if schedule.regime == "classical":
            kind = "mellin_rho"
            targets = {complex(u): target.mellin(u) for u in u_grid}
        else:
            kind = "mellin_rho_c"
            c = schedule.c_target
            reference = self._high_temp_reference(target)
            targets = {
                complex(u): self.dp.mellin_rho_c(reference, c, u, tol=self.config.reference_tol).value
                for u in u_grid
            }
            if with_mc:
                sample = self._mc_reference(reference, c)
                mc = {complex(u): empirical_mellin(sample, u) for u in u_grid}
        cells = self._run_cells("ho", target, u_grid, n_list, schedule)
        rows = [
            SweepRow(n=n, u=u, value=v, target=targets[u],
                     mc_value=mc[u][0] if mc else None, mc_band=3.0 * mc[u][1] if mc else None)
            for n, u, v in cells
        ]
        return self._report(kind, n_list, u_grid, rows)

    def _report(self, kind: str, n_list, u_grid, rows: List[SweepRow]) -> SweepReport:
        n_values = [int(n) for n in n_list]
        u_values = [complex(u) for u in u_grid]
        report = SweepReport(target_kind=kind, n_values=n_values, u_grid=u_values, rows=rows,
                             trend=self._trend(rows, u_values, n_values))
        for label, stats_u in report.trend.items():
            self.logger.info(
                f"{kind} u={label}: final error {stats_u['final_error']:.3e}, "
                f"Spearman {stats_u['spearman']:.3f}, improved={stats_u['improved']}"
            )
        return report


def _u_label(u: complex) -> str:
    u = complex(u)
    if u.imag == 0:
        return f"{u.real:g}"
    return f"{u.real:g}{u.imag:+g}i"
