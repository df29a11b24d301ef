"""
Data schemas for measures, contours, quadrature results and reports
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Any, List, Optional, Tuple

import numpy as np

from errors import InvalidArgument

ROTATIONS = (1 + 0j, -1 + 0j, 1j, -1j)
REGIMES = ("classical", "high_temperature", "free")
TARGET_KINDS = ("fourier_rho", "fourier_rho_c", "mellin_rho", "mellin_rho_c")


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


def _complex_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure: sorted atoms and their weights"""
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", _frozen_array(self.atoms))
        object.__setattr__(self, "weights", _frozen_array(self.weights))

    @property
    def size(self) -> int:
        return int(self.atoms.size)

    @property
    def support_min(self) -> float:
        return float(self.atoms[0])

    @property
    def support_max(self) -> float:
        return float(self.atoms[-1])

    def same_as(self, other: "DiscreteMeasure", atol: float = 1e-12) -> bool:
        if self.size != other.size:
            return False
        return bool(
            np.allclose(self.atoms, other.atoms, rtol=0.0, atol=atol)
            and np.allclose(self.weights, other.weights, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Power moments m_1..m_n of a measure (m_0 = 1 is implicit)"""
    order: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.order < 1 or self.values.size != self.order:
            raise InvalidArgument(
                f"moment vector of order {self.order} needs {self.order} values, got {self.values.size}"
            )

    def with_zeroth(self) -> np.ndarray:
        return np.concatenate(([1.0], self.values))

    def hankel_matrix(self) -> np.ndarray:
        """[m_{i+j}] for 0 <= i, j <= floor(n/2)"""
        full = self.with_zeroth()
        k = self.order // 2
        index = np.add.outer(np.arange(k + 1), np.arange(k + 1))
        return full[index]

    def hankel_min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.hankel_matrix())[0])

    def is_positive_semidefinite(self, threshold: float = -1e-9) -> bool:
        return self.hankel_min_eigenvalue() >= threshold

    def to_dict(self) -> Dict[str, Any]:
        return {"order": self.order, "values": self.values.tolist()}


@dataclass(frozen=True)
class HankelContour:
    """Square-shouldered Hankel loop, rotated as a whole by `rotation`

    In the unrotated frame the loop runs from -tail_length - i*half_height to
    stem_x - i*half_height, up the stem to stem_x + i*half_height and back
    to -tail_length + i*half_height (counter-clockwise around the cut).
    """
    stem_x: float
    half_height: float
    tail_length: float
    rotation: complex = 1 + 0j
    decay_rate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rotation", complex(self.rotation))
        if self.rotation not in ROTATIONS:
            raise InvalidArgument(f"rotation must be one of 1, -1, i, -i, got {self.rotation}")
        if not self.half_height > 0:
            raise InvalidArgument(f"half_height must be positive, got {self.half_height}")
        if not self.tail_length > self.stem_x:
            raise InvalidArgument(
                f"tail_length ({self.tail_length}) must exceed stem_x ({self.stem_x})"
            )
        if not self.decay_rate > 0:
            raise InvalidArgument(f"decay_rate must be positive, got {self.decay_rate}")

    def segments(self) -> List[Tuple[complex, complex]]:
        """Oriented (start, end) pairs in the rotated plane"""
        m, h, tail, r = self.stem_x, self.half_height, self.tail_length, self.rotation
        corners = [
            complex(-tail, -h),
            complex(m, -h),
            complex(m, h),
            complex(-tail, h),
        ]
        rotated = [r * c for c in corners]
        return [(rotated[0], rotated[1]), (rotated[1], rotated[2]), (rotated[2], rotated[3])]

    def tail_points(self) -> Tuple[complex, complex]:
        """Far ends of the two rays in the rotated plane"""
        r = self.rotation
        return r * complex(-self.tail_length, -self.half_height), r * complex(-self.tail_length, self.half_height)

    def with_tail(self, tail_length: float) -> "HankelContour":
        return replace(self, tail_length=float(tail_length))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stem_x": self.stem_x,
            "half_height": self.half_height,
            "tail_length": self.tail_length,
            "rotation": _complex_pair(self.rotation),
            "decay_rate": self.decay_rate,
        }


@dataclass(frozen=True)
class QuadratureResult:
    """Complex value of a contour integral with its error bookkeeping"""
    value: complex
    abs_error_estimate: float
    n_evals: int
    truncation_bound: float = 0.0

    def __post_init__(self):
        for name in ("abs_error_estimate", "truncation_bound"):
            bound = getattr(self, name)
            if not (np.isfinite(bound) and bound >= 0):
                raise InvalidArgument(f"{name} must be finite and nonnegative, got {bound}")

    def scaled(self, factor: complex) -> "QuadratureResult":
        """Result multiplied by a constant prefactor"""
        scale = abs(factor)
        return QuadratureResult(
            value=complex(factor * self.value),
            abs_error_estimate=self.abs_error_estimate * scale,
            n_evals=self.n_evals,
            truncation_bound=self.truncation_bound * scale,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": _complex_pair(self.value),
            "abs_error_estimate": self.abs_error_estimate,
            "n_evals": self.n_evals,
            "truncation_bound": self.truncation_bound,
        }


@dataclass(frozen=True, eq=False)
class BesselQuery:
    """Arguments of the rank-one multivariate Bessel function"""
    points: np.ndarray
    u: complex
    theta: float
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(np.sort(np.asarray(self.points, dtype=float))))
        object.__setattr__(self, "u", complex(self.u))
        if self.points.size < 1:
            raise InvalidArgument("at least one point is required")
        if not np.all(np.isfinite(self.points)):
            raise InvalidArgument("points must be finite")
        if not self.theta > 0:
            raise InvalidArgument(f"theta must be positive, got {self.theta}")
        if self.u == 0:
            raise InvalidArgument("u must be nonzero")
        if not self.tol > 0:
            raise InvalidArgument(f"tol must be positive, got {self.tol}")

    @property
    def n(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True, eq=False)
class HOQuery:
    """Arguments of the rank-one Heckman-Opdam hypergeometric function"""
    points: np.ndarray
    u: complex
    theta: float
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(np.sort(np.asarray(self.points, dtype=float))))
        object.__setattr__(self, "u", complex(self.u))
        if self.points.size < 1:
            raise InvalidArgument("at least one point is required")
        if not np.all(self.points > 0):
            raise InvalidArgument("all points must be strictly positive")
        if not self.u.real > 0:
            raise InvalidArgument(f"Re u must be positive, got {self.u}")
        if not self.theta > 0:
            raise InvalidArgument(f"theta must be positive, got {self.theta}")
        if not self.tol > 0:
            raise InvalidArgument(f"tol must be positive, got {self.tol}")

    @property
    def n(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class DPConfig:
    """Dirichlet process D_{c rho} sampling request"""
    base: DiscreteMeasure
    concentration: float
    n_samples: int
    seed: int = 42
    shards: int = 1

    def __post_init__(self):
        if not self.concentration > 0:
            raise InvalidArgument(f"concentration must be positive, got {self.concentration}")
        if self.n_samples < 1:
            raise InvalidArgument(f"n_samples must be at least 1, got {self.n_samples}")
        if self.shards < 1:
            raise InvalidArgument(f"shards must be at least 1, got {self.shards}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Monte Carlo draws of the random mean of D_{c rho}"""
    values: np.ndarray
    seed_used: int
    shards_used: int
    concentration: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))

    @property
    def size(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_samples": self.size,
            "seed_used": self.seed_used,
            "shards_used": self.shards_used,
            "concentration": self.concentration,
        }


@dataclass(frozen=True)
class MKReport:
    """Pointwise residuals of the Markov-Krein identity"""
    z_grid: List[complex]
    per_point: List[float]
    sigma: List[float]
    max_residual: float

    @property
    def within_band(self) -> bool:
        """Every residual inside its 3-sigma Monte Carlo band (or roundoff)"""
        return all(r <= 3.0 * s + 1e-12 for r, s in zip(self.per_point, self.sigma))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_residual": self.max_residual,
            "per_point": list(self.per_point),
            "sigma": list(self.sigma),
            "within_band": self.within_band,
            "z_grid": [_complex_pair(z) for z in self.z_grid],
        }


@dataclass(frozen=True, eq=False)
class CCumulantVector:
    """c-cumulants kappa_l and the classical cumulants (l-1)! kappa_l"""
    order: int
    kappa: np.ndarray
    kappa_tilde: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kappa", _frozen_array(self.kappa))
        object.__setattr__(self, "kappa_tilde", _frozen_array(self.kappa_tilde))

    def to_dict(self) -> Dict[str, Any]:
        return {"order": self.order, "kappa": self.kappa.tolist(), "kappa_tilde": self.kappa_tilde.tolist()}


@dataclass(frozen=True)
class ConjectureReport:
    """Outcome of the additive positivity probe"""
    mu_moments: MomentVector
    hankel_min_eig: float
    label: str
    ill_conditioned: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hankel_min_eig": self.hankel_min_eig,
            "ill_conditioned": self.ill_conditioned,
            "label": self.label,
            "mu_moments": self.mu_moments.values.tolist(),
        }


@dataclass(frozen=True)
class RegimeSchedule:
    """Rule N -> beta_N for one of the three temperature regimes"""
    regime: str
    c_target: float = 1.0
    beta_scale: float = 1.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidArgument(f"regime must be one of {', '.join(REGIMES)}, got {self.regime}")
        if self.regime == "high_temperature" and not self.c_target > 0:
            raise InvalidArgument(f"c_target must be positive, got {self.c_target}")

    def beta(self, n: int) -> float:
        if self.regime == "classical":
            return self.beta_scale / n ** 2
        if self.regime == "high_temperature":
            return 2.0 * self.c_target / n
        return 2.0 * self.beta_scale

    def theta(self, n: int) -> float:
        return self.beta(n) / 2.0

    def c_of(self, n: int) -> float:
        """c_N = N beta_N / 2"""
        return n * self.beta(n) / 2.0


@dataclass(frozen=True)
class SweepRow:
    """One (N, u) cell of a convergence sweep"""
    n: int
    u: complex
    value: complex
    target: complex
    mc_value: Optional[complex] = None
    mc_band: Optional[float] = None

    @property
    def abs_err(self) -> float:
        return abs(self.value - self.target)


@dataclass(frozen=True)
class SweepReport:
    """Per-(N, u) deviations of finite-N values from a limit target"""
    target_kind: str
    n_values: List[int]
    u_grid: List[complex]
    rows: List[SweepRow] = field(default_factory=list)
    trend: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self):
        if self.target_kind not in TARGET_KINDS:
            raise InvalidArgument(f"unknown target kind {self.target_kind}")
        for row in self.rows:
            if not np.isfinite(row.abs_err):
                raise InvalidArgument(f"non-finite deviation at N={row.n}, u={row.u}")

    @property
    def errors(self) -> Dict[Tuple[int, complex], float]:
        return {(row.n, row.u): row.abs_err for row in self.rows}

    def errors_for(self, u: complex) -> List[float]:
        """Deviations ordered by N for one argument"""
        by_n = {row.n: row.abs_err for row in self.rows if row.u == u}
        return [by_n[n] for n in self.n_values]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_values": list(self.n_values),
            "target_kind": self.target_kind,
            "trend": dict(self.trend),
            "u_grid": [_complex_pair(u) for u in self.u_grid],
        }
