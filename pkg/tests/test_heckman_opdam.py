import numpy as np
import pytest

from bessel import BesselEvaluator
from conftest import assert_complex_close
from dirichlet import DirichletProcess
from errors import DegenerateSpectrum, InvalidArgument
from heckman_opdam import HeckmanOpdamEvaluator, ho_theta_one
from measures import make_measure

@pytest.fixture
def evaluator(config):
    return HeckmanOpdamEvaluator(config)

def evaluate(evaluator, points, u, theta, tol=None):
    return evaluator.ho_rank_one(evaluator.query(points, u, theta, tol)).value


class TestHORankOne:

    @pytest.mark.parametrize("u", [1.3, 1 + 1j, 0.4])
    def test_single_point(self, evaluator, u):
        assert_complex_close(evaluate(evaluator, [2.5], u, 0.7), 2.5 ** complex(u), 1e-7)

    def test_uniform_on_one_two(self, evaluator):
        assert_complex_close(evaluate(evaluator, [1, 2], 1, 1.0), 1.5, 1e-7)
        assert_complex_close(evaluate(evaluator, [1, 2], 2, 1.0), 7 / 3, 1e-7)

    @pytest.mark.parametrize("points", [[1, 2, 3, 5], [0.3, 0.6, 0.9], [0.5, 1.5]])
    @pytest.mark.parametrize("u", [1, 2, 1.5 + 0.5j])
    def test_theta_one_oracle(self, evaluator, points, u):
        value = evaluate(evaluator, points, u, 1.0, tol=1e-10)
        assert_complex_close(value, ho_theta_one(points, u), 1e-8)

    def test_homogeneity(self, evaluator):
        points = np.array([0.7, 1.1, 2.0])
        lam, u = 2.0, 1.5 + 0.3j
        scaled = evaluate(evaluator, lam * points, u, 0.8)
        assert_complex_close(scaled, lam ** u * evaluate(evaluator, points, u, 0.8), 1e-7)

    def test_real_argument_gives_real_value(self, evaluator):
        assert evaluate(evaluator, [1, 3], 1.7, 0.4).imag == 0.0

    @pytest.mark.parametrize("kwargs", [
        dict(points=[0, 1], u=1, theta=1.0),
        dict(points=[-1, 1], u=1, theta=1.0),
        dict(points=[1, 2], u=-1, theta=1.0),
        dict(points=[1, 2], u=2j, theta=1.0),
        dict(points=[1, 2], u=1, theta=-0.5),
    ])
    def test_invalid_query(self, evaluator, kwargs):
        with pytest.raises(InvalidArgument):
            evaluator.query(**kwargs)


class TestMasterIdentity:

    @pytest.mark.parametrize("n", [2, 4, 6])
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 3.5])
    @pytest.mark.parametrize("u", [1, 2])
    def test_matches_mellin_of_random_mean(self, evaluator, config, n, c, u):
        points = np.arange(1, n + 1, dtype=float)
        ho = evaluate(evaluator, points, u, c / n)
        mellin = DirichletProcess(config).mellin_rho_c(make_measure(points), c, u).value
        assert abs(ho - mellin) <= 2e-6


class TestThetaOneOracle:

    def test_single_point(self):
        assert_complex_close(ho_theta_one([3.0], 1.5), 3.0 ** 1.5, 1e-13)

    def test_two_points(self):
        assert_complex_close(ho_theta_one([1, 2], 1), 1.5, 1e-14)

    def test_three_points(self):
        assert_complex_close(ho_theta_one([1, 2, 4], 1), 7 / 3, 1e-13)

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrum):
            ho_theta_one([1, 2, 2], 1)

    def test_nonpositive(self):
        with pytest.raises(InvalidArgument):
            ho_theta_one([0, 2], 1)


class TestLargeArguments:

    @pytest.mark.parametrize("u, expected", [
        (30, (2 - 0.5 ** 30) / 31),
        (60, (2 - 0.5 ** 60) / 61),
        (300, 2 / 301),
    ])
    def test_two_points(self, evaluator, u, expected):
        value = evaluate(evaluator, [0.5, 1.0], u, 1.0, tol=1e-12)
        assert value.real == pytest.approx(expected, rel=1e-8)
        assert_complex_close(value, ho_theta_one([0.5, 1.0], u), 1e-10)

    @pytest.mark.parametrize("u", [100, 40 + 30j, 1000])
    def test_theta_one_oracle(self, evaluator, u):
        points = [0.3, 0.6, 0.9]
        expected = ho_theta_one(points, u)
        value = evaluate(evaluator, points, u, 1.0, tol=1e-10 * abs(expected))
        assert abs(value - expected) <= 1e-7 * abs(expected)


class TestBesselConsistency:

    @pytest.mark.parametrize("v", [1.0, 2.0, 1 + 1j])
    def test_close_points_large_argument(self, evaluator, config, v):
        # F_{e^{eps b}}(v / eps) tends to B_b(v) as eps -> 0
        eps, theta = 1e-3, 0.8
        base = np.array([0.0, 0.5, 1.0])
        ho = evaluate(evaluator, np.exp(eps * base), v / eps, theta)
        bessel_evaluator = BesselEvaluator(config)
        bessel = bessel_evaluator.bessel_rank_one(bessel_evaluator.query(base, v, theta)).value
        assert abs(ho - bessel) <= 1e-2 * abs(bessel)
