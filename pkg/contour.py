"""
Hankel contours, adaptive complex quadrature along them, and contour self-tests
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import loggamma, rgamma

from config import Config
from errors import InvalidArgument, NonConvergence, NonFiniteSample
from schemas import HankelContour, QuadratureResult
from validators import require_nonzero, require_positive, require_positive_atoms, require_right_half_plane

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

# Gauss-Kronrod 7-15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate((-_XGK[:7], [0.0], _XGK[6::-1]))
KRONROD_WEIGHTS = np.concatenate((_WGK[:7], [_WGK[7]], _WGK[6::-1]))
GAUSS_INDEX = np.array([1, 3, 5, 7, 9, 11, 13])
GAUSS_WEIGHTS = np.concatenate((_WG, _WG[2::-1]))

TAIL_CAP = 1e7
_ROUNDOFF = 50 * np.finfo(float).eps
_LARGE_EXPONENT = 30.0
_ELEMENT_BUDGET = 1 << 21

def sgn_rotation(u: complex) -> complex:
    """1 if Re u > 0, -1 if Re u < 0, -i if u is on the positive imaginary axis, +i on the negative one"""
    u = require_nonzero(u)
    if u.real > 0:
        return 1 + 0j
    if u.real < 0:
        return -1 + 0j
    return -1j if u.imag > 0 else 1j

def build_contour(
    cut_end: float,
    u: complex,
    tail_length: float,
    half_height: Optional[float] = None,
) -> HankelContour:
    """
    Square-shouldered Hankel loop around (-inf, cut_end] in the unrotated frame

    Args:
        cut_end: Right end of the branch cut, measured in the unrotated frame
        u: Transform argument; selects the rotation and the decay rate
        tail_length: Initial ray length L toward -inf
        half_height: Distance of the rays from the axis (defaults to the stem abscissa)

    Returns:
        HankelContour with stem at max(|cut_end| + 1, 1)
    """
    rotation = sgn_rotation(u)
    cut_end = float(cut_end)
    stem_x = max(abs(cut_end) + 1.0, 1.0)
    if not tail_length > abs(cut_end) + 1.0:
        raise InvalidArgument(f"tail_length must exceed |cut_end| + 1 = {abs(cut_end) + 1.0}, got {tail_length}")
    height = stem_x if half_height is None else require_positive(half_height, "half_height")
    return HankelContour(
        stem_x=stem_x,
        half_height=height,
        tail_length=float(tail_length),
        rotation=rotation,
        decay_rate=float((complex(u) * rotation).real),
    )

def _gauss_kronrod(f: Integrand, start: np.ndarray, step: np.ndarray):
    """K15 values, |K15 - G7| estimates and K15 of |f| for panels z = start + step * t, t in [0, 1]"""
    half = step / 2.0
    nodes = (start + half)[:, None] + half[:, None] * NODES[None, :]
    values = np.asarray(f(nodes), dtype=complex)
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values)][0]
        raise NonFiniteSample(f"integrand is not finite at z = {complex(bad)}")
    kronrod = half * (values @ KRONROD_WEIGHTS)
    gauss = half * (values[:, GAUSS_INDEX] @ GAUSS_WEIGHTS)
    magnitude = np.abs(half) * (np.abs(values) @ KRONROD_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss), magnitude

def _extend_tails(f: Integrand, contour: HankelContour, tol: float):
    """Double the rays until the discarded tail mass is below tol / 10"""
    evaluations = 0
    while True:
        ends = np.array(contour.tail_points())
        envelope = np.abs(np.asarray(f(ends), dtype=complex))
        evaluations += 2
        if not np.all(np.isfinite(envelope)):
            raise NonFiniteSample(f"integrand is not finite at the tail ends {ends.tolist()}")
        bound = float(envelope.sum() / (2.0 * np.pi * contour.decay_rate))
        if bound <= tol / 10.0 or contour.tail_length >= TAIL_CAP:
            if bound > tol / 10.0:
                logger.warning(f"Tail bound {bound:.3e} still above tol/10 at tail length {contour.tail_length:.3g}")
            return contour, bound, evaluations
        contour = contour.with_tail(2.0 * contour.tail_length)
        logger.debug(f"Extended contour tails to {contour.tail_length:.3g} (bound {bound:.3e})")

def integrate(
    f: Integrand,
    contour: HankelContour,
    tol: float,
    max_evals: int = 2_000_000,
    initial_panels: int = 8,
) -> QuadratureResult:
    """
    (1/2 pi i) times the integral of f along the contour

    Panels are bisected until each satisfies |K15 - G7| <= tol * (panel length / contour length),
    or the error is at roundoff level. Accepted panels are summed in (segment, position) order.
    A summed error estimate above tol raises NonConvergence carrying the partial value.

    Args:
        f: Vectorized integrand, called on complex arrays of any shape
        contour: Hankel loop; its rays are extended automatically
        tol: Absolute tolerance on the returned value
        max_evals: Evaluation budget
        initial_panels: Panels per segment before refinement

    Returns:
        QuadratureResult with error estimate, evaluation count and tail bound
    """
    tol = require_positive(tol, "tol")
    contour, truncation_bound, n_evals = _extend_tails(f, contour, tol)

    segments = contour.segments()
    seg_start = np.array([a for a, _ in segments])
    seg_step = np.array([b - a for a, b in segments])
    lengths = np.abs(seg_step)
    total_length = float(lengths.sum())
    # panel tolerances are on the raw integral; the result carries the 1/(2 pi) factor
    raw_tol = 2.0 * np.pi * tol

    grid = np.linspace(0.0, 1.0, initial_panels + 1)
    seg_idx = np.repeat(np.arange(len(segments)), initial_panels)
    lo = np.tile(grid[:-1], len(segments))
    hi = np.tile(grid[1:], len(segments))

    done_seg, done_lo, done_val, done_err = [], [], [], []
    while seg_idx.size:
        if n_evals + NODES.size * seg_idx.size > max_evals:
            partial = complex(np.sum(np.concatenate(done_val + [np.zeros(1)]))) / (2j * np.pi)
            raise NonConvergence(
                f"quadrature exceeded {max_evals} evaluations with {seg_idx.size} panels unresolved",
                partial_value=partial,
                abs_error_estimate=float(np.sum(np.concatenate(done_err + [np.zeros(1)]))) / (2 * np.pi),
            )
        start = seg_start[seg_idx] + seg_step[seg_idx] * lo
        step = seg_step[seg_idx] * (hi - lo)
        value, error, magnitude = _gauss_kronrod(f, start, step)
        n_evals += NODES.size * seg_idx.size

        panel_tol = raw_tol * np.abs(step) / total_length
        tiny = np.abs(step) <= 1e-13 * (1.0 + np.abs(start))
        ok = (error <= panel_tol) | (error <= _ROUNDOFF * magnitude) | tiny
        if np.any(tiny & ~((error <= panel_tol) | (error <= _ROUNDOFF * magnitude))):
            logger.warning("Accepted unresolved panels at minimum width")

        done_seg.append(seg_idx[ok])
        done_lo.append(lo[ok])
        done_val.append(value[ok])
        done_err.append(error[ok])

        mid = (lo[~ok] + hi[~ok]) / 2.0
        seg_idx = np.repeat(seg_idx[~ok], 2)
        lo, hi = np.column_stack((lo[~ok], mid)).ravel(), np.column_stack((mid, hi[~ok])).ravel()

    order = np.lexsort((np.concatenate(done_lo), np.concatenate(done_seg)))
    values = np.concatenate(done_val)[order]
    errors = np.concatenate(done_err)[order]
    value = complex(np.sum(values)) / (2j * np.pi)
    total_error = float(np.sum(errors)) / (2.0 * np.pi)
    logger.debug(f"Contour quadrature: {values.size} panels, {n_evals} evaluations")
    # panels accepted at roundoff level may still add up to more than tol
    if total_error > tol:
        raise NonConvergence(
            f"quadrature error estimate {total_error:.3e} exceeds tol {tol:.3e} "
            f"(cancellation along the contour)",
            partial_value=value,
            abs_error_estimate=total_error,
        )
    return QuadratureResult(
        value=value,
        abs_error_estimate=total_error,
        n_evals=int(n_evals),
        truncation_bound=truncation_bound,
    )

def _fourier_half_line(h: Callable[[float], complex], omega: float, sign: float, tol: float, counter: list):
    """int_0^inf exp(i * sign * omega * y) h(y) dy via QAWF, one call per real/imaginary part"""
    def part(getter):
        def wrapped(y):
            counter[0] += 1
            return getter(h(y))
        return wrapped

    re, im = part(lambda v: v.real), part(lambda v: v.imag)
    results = {}
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            for name, func, weight in (("cr", re, "cos"), ("ci", im, "cos"), ("sr", re, "sin"), ("si", im, "sin")):
                results[name] = quad(func, 0.0, np.inf, weight=weight, wvar=omega, epsabs=tol / 4.0, limlst=100)
        except IntegrationWarning as e:
            raise NonConvergence(f"line-contour quadrature did not converge: {e}")
    value = complex(
        results["cr"][0] - sign * results["si"][0],
        results["ci"][0] + sign * results["sr"][0],
    )
    error = sum(r[1] for r in results.values())
    return value, error

def integrate_line(
    g: Callable[[complex], complex],
    t: float,
    delta: float,
    tol: float,
) -> QuadratureResult:
    """
    (1/2 pi i) times the integral of exp(i t z) g(z) over the Hankel loop, deformed onto R - i*delta*sgn(t)

    The deformation needs g(x) = O(|x|^-c) with c > 1 along the line.

    Args:
        g: Non-oscillatory factor of the integrand, called on scalars
        t: Real frequency, nonzero
        delta: Distance of the line from the real axis
        tol: Absolute tolerance on the returned value
    """
    t = float(t)
    if t == 0:
        raise InvalidArgument("u must be nonzero")
    delta = require_positive(delta, "delta")
    tol = require_positive(tol, "tol")
    sign = 1.0 if t > 0 else -1.0
    omega = abs(t)
    # |exp(i t z)| on the line
    lift = np.exp(omega * delta)
    shift = -1j * delta * sign

    counter = [0]
    raw_tol = 2.0 * np.pi * tol / 2.0
    right, err_right = _fourier_half_line(lambda y: lift * g(y + shift), omega, sign, raw_tol, counter)
    left, err_left = _fourier_half_line(lambda y: lift * g(-y + shift), omega, -sign, raw_tol, counter)
    logger.debug(f"Line-contour quadrature: {counter[0]} evaluations")
    return QuadratureResult(
        value=sign * (right + left) / (2j * np.pi),
        abs_error_estimate=(err_right + err_left) / (2.0 * np.pi),
        n_evals=counter[0],
        truncation_bound=0.0,
    )

def power_prefactor(c: float, u: complex) -> complex:
    """Gamma(c) q^(1-c) / r with r = sgn_rotation(u) and q = u r, the normalization of the rotated Hankel formula"""
    rotation = sgn_rotation(u)
    q = complex(u) * rotation
    return complex(np.exp(loggamma(c) + (1.0 - c) * np.log(q))) / rotation

def _branch_sum(w: np.ndarray, kernel, points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """sum_j e_j kernel(w, p_j), accumulated over blocks of points to bound memory"""
    total = np.zeros(np.shape(w), dtype=complex)
    block = max(1, _ELEMENT_BUDGET // max(np.size(w), 1))
    for start in range(0, points.size, block):
        total += kernel(w[..., None], points[start:start + block]) @ exponents[start:start + block]
    return total

def _log_one_minus_exp(x: np.ndarray) -> np.ndarray:
    """Principal Log(1 - e^x), split as Log(-e^x) + Log(1 - e^-x) where e^x would overflow"""
    large = x.real > _LARGE_EXPONENT
    value = np.log(1.0 - np.exp(np.where(large, 0.0, x)))
    if np.any(large):
        far = np.where(large, x, _LARGE_EXPONENT)
        turned = np.where(far.imag > 0, far.imag - np.pi, far.imag + np.pi)
        value = np.where(large, far.real + 1j * turned + np.log1p(-np.exp(-far)), value)
    return value


@dataclass(frozen=True, eq=False)
class PowerLoop:
    """
    Hankel loop for (1/2 pi i) int e^{uz} prod_j ((z - a_j)/r)^-e_j dz, in the variable w = |q| (z/r - center)

    With q = u r the integral equals e^{q center} r |q|^(c-1) (1/2 pi i) int e^{(q/|q|) w} prod_j (w - p_j)^-e_j dw,
    where p_j = |q| (a_j/r - center) and c = sum_j e_j. The stem sits at w = 1, so e^{(q/|q|) w}
    stays of unit size on the loop for any |u|.
    """
    contour: HankelContour
    direction: complex
    poles: np.ndarray
    shift: complex

    def integrand(self, exponents: np.ndarray) -> Integrand:
        direction, poles = self.direction, self.poles
        exponents = np.asarray(exponents, dtype=float)

        def f(w):
            return np.exp(direction * w - _branch_sum(w, lambda x, p: np.log(x - p), poles, exponents))

        return f

    def prefactor(self, c: float) -> complex:
        """Gamma(c) q^(1-c)/r times the factors pulled out of the integral: Gamma(c) (q/|q|)^(1-c) e^{q center}"""
        return complex(np.exp(loggamma(c) + (1.0 - c) * np.log(self.direction) + self.shift))


@dataclass(frozen=True, eq=False)
class MellinLoop:
    """
    Hankel loop for (1/2 pi i) int e^{us} prod_j (1 - a_j e^{-s})^-e_j ds, in the variable w = |u| (s - log a_max)

    The loop stays inside |Im s| < pi, where 1 - a_j e^{-s} vanishes only at s = log a_j.
    """
    contour: HankelContour
    direction: complex
    log_ratios: np.ndarray
    scale: float
    u: complex
    shift: complex

    def integrand(self, exponents: np.ndarray) -> Integrand:
        direction, log_ratios, scale = self.direction, self.log_ratios, self.scale
        exponents = np.asarray(exponents, dtype=float)

        def f(w):
            logs = _branch_sum(w, lambda x, r: _log_one_minus_exp(r - x / scale), log_ratios, exponents)
            return np.exp(direction * w - logs)

        return f

    def prefactor(self, c: float) -> complex:
        """Gamma(c)Gamma(u+1)/Gamma(u+c) times a_max^u / |u| from the change of variable"""
        u = self.u
        return complex(np.exp(loggamma(c) + loggamma(u + 1.0) - loggamma(u + c) + self.shift - np.log(self.scale)))


def power_loop(points: np.ndarray, u: complex, tail_length: float) -> PowerLoop:
    """
    Scaled loop enclosing every cut a_j + r(-inf, 0], r = sgn_rotation(u)

    Args:
        points: Branch points a_j
        u: Nonzero argument
        tail_length: Initial ray length in the scaled variable

    Returns:
        PowerLoop with rays at distance 1 beyond the outermost branch point
    """
    u = require_nonzero(u)
    rotation = sgn_rotation(u)
    q = u * rotation
    scale = abs(q)
    frame = np.asarray(points, dtype=float) / rotation
    center = complex(np.max(frame.real), (np.max(frame.imag) + np.min(frame.imag)) / 2.0)
    poles = scale * (frame - center)
    height = float(np.max(np.abs(poles.imag))) + 1.0
    direction = q / scale
    contour = build_contour(0.0, direction, max(tail_length, 2.0), height)
    return PowerLoop(contour=contour, direction=direction, poles=poles, shift=q * center)

def mellin_loop(points: np.ndarray, u: complex, tail_length: float) -> MellinLoop:
    """Scaled loop around (-inf, log a_max] for Re u > 0 and positive points"""
    u = require_right_half_plane(u)
    atoms = require_positive_atoms(points)
    top = float(np.max(atoms))
    scale = abs(u)
    direction = u / scale
    contour = build_contour(0.0, direction, max(tail_length, 2.0), half_height=min(1.0, np.pi * scale))
    return MellinLoop(contour=contour, direction=direction, log_ratios=np.log(atoms / top),
                      scale=scale, u=u, shift=u * np.log(top))


class ContourIntegrator:
    """Contour quadrature bound to the configured tolerance, budget and tail defaults"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)

    def integrate(self, f: Integrand, contour: HankelContour, tol: Optional[float] = None) -> QuadratureResult:
        return integrate(
            f,
            contour,
            tol if tol is not None else self.config.quad_tol,
            max_evals=self.config.max_evals,
            initial_panels=self.config.initial_panels,
        )

    def integrate_line(self, g: Callable[[complex], complex], t: float, tol: Optional[float] = None,
                       delta: Optional[float] = None) -> QuadratureResult:
        return integrate_line(
            g,
            t,
            delta if delta is not None else self.config.line_delta,
            tol if tol is not None else self.config.quad_tol,
        )

    def integrate_loop(self, loop, exponents, c: float, tol: Optional[float] = None) -> QuadratureResult:
        """
        Integrate a PowerLoop or MellinLoop integrand and apply the loop's prefactor

        Args:
            loop: Scaled loop from power_loop or mellin_loop
            exponents: Power e_j on each branch factor
            c: Sum of the exponents, which fixes the Gamma normalization
            tol: Absolute tolerance on the scaled value

        Returns:
            QuadratureResult of the normalized transform
        """
        tol = tol if tol is not None else self.config.quad_tol
        prefactor = loop.prefactor(c)
        return self.integrate(loop.integrand(exponents), loop.contour, tol / abs(prefactor)).scaled(prefactor)

    def reciprocal_gamma_check(self, c: float, tol: Optional[float] = None) -> QuadratureResult:
        """Hankel's formula (1/2 pi i) int e^z z^-c dz = 1/Gamma(c)"""
        c = require_positive(c, "c")
        contour = build_contour(0.0, 1.0, self.config.tail_length)
        result = self.integrate(lambda z: np.exp(z - c * np.log(z)), contour, tol)
        self.logger.debug(f"1/Gamma({c}) by contour: {result.value} vs {rgamma(c)}")
        return result

    def gamma_identity_check(self, c: float, u: complex, x: float, tol: Optional[float] = None) -> complex:
        """
        Right side of the Hankel representation of e^{ux}

        Args:
            c: Power on (z - x), positive
            u: Nonzero argument; contour rotated by sgn_rotation(u)
            x: Branch point
            tol: Absolute tolerance on the returned value

        Returns:
            Gamma(c) q^(1-c)/r * (1/2 pi i) int e^{uz} ((z - x)/r)^-c dz, which equals e^{ux}
        """
        c = require_positive(c, "c")
        u = require_nonzero(u)
        tol = tol if tol is not None else self.config.quad_tol
        loop = power_loop(np.array([float(x)]), u, self.config.tail_length)
        return self.integrate_loop(loop, [c], c, tol).value

    def beta_identity_check(self, c: float, u: complex, x: float, tol: Optional[float] = None) -> complex:
        """Gamma(c)Gamma(u+1)/Gamma(u+c) * (1/2 pi i) int e^{us} (1 - x e^{-s})^-c ds over the loop around (-inf, log x]; equals x^u"""
        c = require_positive(c, "c")
        u = require_right_half_plane(u)
        x = require_positive(x, "x")
        tol = tol if tol is not None else self.config.quad_tol
        loop = mellin_loop(np.array([x]), u, self.config.tail_length)
        return self.integrate_loop(loop, [c], c, tol).value
