import numpy as np
import pytest

from bessel import BesselEvaluator, bessel_theta_one
from conftest import assert_complex_close
from dirichlet import DirichletProcess
from errors import DegenerateSpectrum, InvalidArgument
from measures import make_measure

@pytest.fixture
def evaluator(config):
    return BesselEvaluator(config)

def evaluate(evaluator, points, u, theta, tol=None):
    return evaluator.bessel_rank_one(evaluator.query(points, u, theta, tol)).value


class TestBesselRankOne:

    @pytest.mark.parametrize("u", [1.5, -2.0, 2j, -1j, 1 - 1j])
    def test_single_point(self, evaluator, u):
        assert_complex_close(evaluate(evaluator, [0.3], u, 0.7), np.exp(u * 0.3), 1e-7)

    def test_uniform_on_unit_interval(self, evaluator):
        value = evaluate(evaluator, [0, 1], 1.0, 1.0)
        assert_complex_close(value, np.e - 1, 1e-7)
        assert value.imag == 0.0

    def test_imaginary_argument(self, evaluator):
        expected = (np.exp(2j) - 1) / 2j
        assert_complex_close(evaluate(evaluator, [0, 1], 2j, 1.0), expected, 1e-7)

    @pytest.mark.parametrize("n", range(2, 9))
    @pytest.mark.parametrize("u", [1, -2, 3j, -3j, 1 + 2j])
    def test_theta_one_oracle(self, evaluator, n, u):
        points = np.arange(n, dtype=float)
        value = evaluate(evaluator, points, u, 1.0, tol=1e-10)
        expected = bessel_theta_one(points, u)
        assert abs(value - expected) <= 1e-6 * abs(expected)

    def test_unsorted_points(self, evaluator):
        assert_complex_close(evaluate(evaluator, [2, 0, 1], 1.0, 1.0), bessel_theta_one([0, 1, 2], 1.0), 1e-7)

    def test_coincident_points(self, evaluator, config):
        value = evaluate(evaluator, [0, 0, 1], 1.0, 0.5)
        expected = DirichletProcess(config).fourier_rho_c(make_measure([0, 0, 1]), 1.5, 1.0).value
        assert_complex_close(value, expected, 1e-7)

    def test_near_zero_argument(self, evaluator):
        points = [0.2, 0.5, 0.9]
        eps = 1e-3
        value = evaluate(evaluator, points, eps, 0.25)
        assert abs(value - (1 + eps * np.mean(points))) <= 1e-4

    @pytest.mark.parametrize("kwargs", [
        dict(points=[0, 1], u=0, theta=1.0),
        dict(points=[0, 1], u=1, theta=0.0),
        dict(points=[], u=1, theta=1.0),
    ])
    def test_invalid_query(self, evaluator, kwargs):
        with pytest.raises(InvalidArgument):
            evaluator.query(**kwargs)

    def test_zero_argument_message(self, evaluator):
        with pytest.raises(InvalidArgument, match="u must be nonzero"):
            evaluator.query([0, 1], 0, 1.0)


class TestMasterIdentity:

    @pytest.mark.parametrize("n", [2, 4, 6])
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 3.5])
    @pytest.mark.parametrize("u", [1, 2j])
    def test_matches_transform_of_random_mean(self, evaluator, config, n, c, u):
        points = np.linspace(-1.0, 1.0, n)
        bessel = evaluate(evaluator, points, u, c / n)
        transform = DirichletProcess(config).fourier_rho_c(make_measure(points), c, u).value
        assert abs(bessel - transform) <= 2e-6


class TestThetaOneOracle:

    def test_single_point(self):
        assert_complex_close(bessel_theta_one([0.4], 2.0), np.exp(0.8), 1e-14)

    def test_two_points(self):
        assert_complex_close(bessel_theta_one([0, 1], 1.0), np.e - 1, 1e-14)

    def test_three_points(self):
        assert_complex_close(bessel_theta_one([0, 1, 2], 1.0), (np.e - 1) ** 2, 1e-12)
        assert bessel_theta_one([0, 1, 2], 1.0).real == pytest.approx(2.952492, abs=1e-6)

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrum):
            bessel_theta_one([0, 1, 1], 1.0)

    def test_zero_argument(self):
        with pytest.raises(InvalidArgument):
            bessel_theta_one([0, 1], 0)


class TestLargeArguments:

    @pytest.mark.parametrize("u", [30, 60, -60, 100j, -100j, 30 + 40j])
    def test_theta_one_oracle(self, evaluator, u):
        points = [0.0, 1.0, 2.0]
        expected = bessel_theta_one(points, u)
        value = evaluate(evaluator, points, u, 1.0, tol=1e-10 * abs(expected))
        assert abs(value - expected) <= 1e-7 * abs(expected)

    def test_negative_argument_value(self, evaluator):
        # only the residue at the smallest point survives: Gamma(3) u^-2 / 2
        value = evaluate(evaluator, [0, 1, 2], -60, 1.0, tol=1e-14)
        assert value.real == pytest.approx(1 / 3600, rel=1e-7)

    def test_imaginary_argument_value(self, evaluator):
        u = 100j
        expected = 2 / u ** 2 * (0.5 - np.exp(u) + 0.5 * np.exp(2 * u))
        value = evaluate(evaluator, [0, 1, 2], u, 1.0, tol=1e-14)
        assert abs(value - expected) <= 1e-7 * abs(expected)


class TestCovariance:

    POINTS = np.array([-0.4, 0.3, 1.1])

    @pytest.mark.parametrize("u", [1.2, -0.8, 1.5j, -2j])
    def test_translation(self, evaluator, u):
        t = 0.75
        shifted = evaluate(evaluator, self.POINTS + t, u, 0.6, tol=1e-10)
        base = evaluate(evaluator, self.POINTS, u, 0.6, tol=1e-10)
        assert_complex_close(shifted, np.exp(u * t) * base, 1e-7)

    @pytest.mark.parametrize("lam", [1.7, -0.6])
    @pytest.mark.parametrize("u", [1.2, -0.8, 1.5j, -2j])
    def test_scaling(self, evaluator, lam, u):
        scaled = evaluate(evaluator, lam * self.POINTS, u, 0.6, tol=1e-10)
        assert_complex_close(scaled, evaluate(evaluator, self.POINTS, lam * u, 0.6, tol=1e-10), 1e-7)
