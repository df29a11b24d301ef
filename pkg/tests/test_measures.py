import numpy as np
import pytest
from scipy.optimize import linprog

from errors import InvalidArgument, InvalidMeasure, SingularEvaluation
from measures import (
    eta_cost,
    eta_wasserstein,
    g_function,
    in_class_V,
    make_measure,
    moments,
    stieltjes,
    truncate,
)

def brute_force_eta(mu, nu, eta):
    """Dual LP over every pair of the joint support"""
    support = np.union1d(mu.atoms, nu.atoms)
    diff = np.zeros(support.size)
    diff[np.searchsorted(support, mu.atoms)] += mu.weights
    diff[np.searchsorted(support, nu.atoms)] -= nu.weights
    n = support.size
    rows, bounds_ub = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                row = np.zeros(n)
                row[i], row[j] = 1.0, -1.0
                rows.append(row)
                bounds_ub.append(float(eta_cost(abs(support[i] - support[j]), eta)))
    res = linprog(-diff, A_ub=np.array(rows), b_ub=np.array(bounds_ub),
                  bounds=[(0.0, 0.0)] + [(None, None)] * (n - 1), method="highs")
    return -res.fun

def random_measure(rng, k=3, scale=3.0):
    return make_measure(rng.uniform(-scale, scale, size=k), rng.dirichlet(np.ones(k)))


class TestMakeMeasure:

    def test_uniform_default(self):
        rho = make_measure([0, 1])
        np.testing.assert_array_equal(rho.atoms, [0.0, 1.0])
        np.testing.assert_allclose(rho.weights, [0.5, 0.5])

    def test_duplicates_merged(self):
        rho = make_measure([1, 1, 2])
        np.testing.assert_array_equal(rho.atoms, [1.0, 2.0])
        np.testing.assert_allclose(rho.weights, [2 / 3, 1 / 3], atol=1e-15)

    def test_renormalization(self):
        rho = make_measure([3], [7])
        assert rho.weights.tolist() == [1.0]

    def test_sorted_and_normalized(self, rng):
        atoms = rng.normal(size=50)
        rho = make_measure(atoms, rng.uniform(size=50))
        assert np.all(np.diff(rho.atoms) > 0)
        assert abs(rho.weights.sum() - 1.0) <= 1e-12

    def test_zero_weight_atoms_dropped(self):
        rho = make_measure([0, 1, 2], [1, 0, 1])
        np.testing.assert_array_equal(rho.atoms, [0.0, 2.0])

    @pytest.mark.parametrize("atoms, weights", [
        ([], None),
        ([0, 1], [1, -1]),
        ([0, 1], [0, 0]),
        ([0, 1], [1]),
        ([0, np.inf], None),
    ])
    def test_invalid(self, atoms, weights):
        with pytest.raises(InvalidMeasure):
            make_measure(atoms, weights)

    def test_arrays_are_read_only(self):
        rho = make_measure([0, 1])
        with pytest.raises(ValueError):
            rho.atoms[0] = 5.0


class TestTruncate:

    def test_clamps_outer_mass(self):
        rho = truncate(make_measure([-2, 0, 2]), 1)
        np.testing.assert_array_equal(rho.atoms, [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(rho.weights, [1 / 3] * 3)

    def test_point_mass_unchanged(self):
        rho = truncate(make_measure([0]), 0.5)
        assert rho.same_as(make_measure([0]))

    def test_four_atoms(self):
        rho = truncate(make_measure([-3, -1, 1, 3]), 2)
        np.testing.assert_array_equal(rho.atoms, [-2.0, -1.0, 1.0, 2.0])
        np.testing.assert_allclose(rho.weights, [0.25] * 4)

    def test_first_moment_inside(self, rng):
        rho = truncate(random_measure(rng, k=10, scale=10.0), 2.5)
        assert -2.5 <= moments(rho, 1).values[0] <= 2.5

    def test_nonpositive_level(self):
        with pytest.raises(InvalidArgument):
            truncate(make_measure([0, 1]), 0)


class TestLogPotential:

    def test_point_mass_real(self):
        assert g_function(make_measure([0]), 2.0) == pytest.approx(np.log(2.0))

    def test_point_mass_imaginary(self):
        value = g_function(make_measure([0]), 1j)
        assert value.real == pytest.approx(0.0, abs=1e-15)
        assert value.imag == pytest.approx(np.pi / 2)

    def test_two_atoms(self):
        z = 2j
        expected = 0.5 * (np.log(z + 1) + np.log(z - 1))
        assert abs(g_function(make_measure([-1, 1]), z) - expected) < 1e-14

    def test_vectorized(self, rng):
        rho = random_measure(rng, k=5)
        z = np.array([[1 + 1j, -2 + 0.5j], [3j, 4.0 + 0j]])
        values = g_function(rho, z)
        assert values.shape == z.shape
        assert abs(values[0, 1] - g_function(rho, -2 + 0.5j)) < 1e-14

    def test_rotated_branch(self):
        rho = make_measure([0, 1])
        z = 0.5 - 1j
        expected = 0.5 * (np.log(z / 1j) + np.log((z - 1) / 1j))
        assert abs(g_function(rho, z, rotation=1j) - expected) < 1e-14

    def test_at_atom(self):
        with pytest.raises(SingularEvaluation):
            g_function(make_measure([0, 1]), 1.0)

    def test_invalid_rotation(self):
        with pytest.raises(InvalidArgument):
            g_function(make_measure([0]), 1j, rotation=2)


class TestStieltjes:

    def test_point_mass(self):
        assert stieltjes(make_measure([0]), 2.0) == pytest.approx(0.5)

    def test_symmetric_pair(self):
        assert abs(stieltjes(make_measure([-1, 1]), 1j) - (-0.5j)) < 1e-15

    def test_large_argument(self, rng):
        rho = random_measure(rng, k=4)
        z = 1e6 * np.exp(0.3j)
        expected = 1 / z + moments(rho, 1).values[0] / z ** 2
        assert abs(stieltjes(rho, z) - expected) <= 1e-10 * abs(expected)

    @pytest.mark.parametrize("z", [1 + 0.5j, -2 - 1j, 0.3 + 2j, 4 - 0.5j])
    def test_derivative_of_log_potential(self, rng, z):
        rho = random_measure(rng, k=5)
        h = 1e-6 * (1 + abs(z))
        numerical = (g_function(rho, z + h) - g_function(rho, z - h)) / (2 * h)
        analytical = stieltjes(rho, z)
        assert abs(numerical - analytical) <= 1e-6 * abs(analytical)

    def test_at_atom(self):
        with pytest.raises(SingularEvaluation):
            stieltjes(make_measure([0, 1]), 0.0)


class TestMoments:

    def test_two_point(self):
        np.testing.assert_allclose(moments(make_measure([0, 1]), 6).values, [0.5] * 6)

    def test_point_mass(self):
        np.testing.assert_allclose(moments(make_measure([1.5]), 5).values, 1.5 ** np.arange(1, 6))

    def test_three_atoms(self):
        m = moments(make_measure([-1, 0, 1]), 2).values
        assert m[0] == pytest.approx(0.0, abs=1e-15)
        assert m[1] == pytest.approx(2 / 3)

    def test_permutation_invariant(self, rng):
        atoms = rng.normal(size=7)
        weights = rng.uniform(size=7)
        order = rng.permutation(7)
        first = moments(make_measure(atoms, weights), 8).values
        second = moments(make_measure(atoms[order], weights[order]), 8).values
        np.testing.assert_allclose(first, second, rtol=1e-13)

    def test_hankel_positive(self, rng):
        assert moments(random_measure(rng, k=6), 10).is_positive_semidefinite()


class TestClassV:

    @pytest.mark.parametrize("atoms, expected", [
        ([0], 0.0),
        ([1], np.log(2)),
        ([0, 3], 0.5 * np.log(10)),
    ])
    def test_values(self, atoms, expected):
        assert in_class_V(make_measure(atoms)) == pytest.approx(expected)


class TestEtaWasserstein:

    def test_identical(self):
        rho = make_measure([0, 1, 5])
        assert eta_wasserstein(rho, rho, 0.5) == 0.0

    @pytest.mark.parametrize("t", [0.25, 1.0, 4.0, 9.0])
    def test_two_points(self, t):
        value = eta_wasserstein(make_measure([0]), make_measure([t]), 0.5)
        assert value == pytest.approx(min(t, t ** 0.5), abs=1e-9)

    def test_against_brute_force_small(self):
        mu, nu = make_measure([0, 1]), make_measure([0.5])
        assert eta_wasserstein(mu, nu, 0.5) == pytest.approx(brute_force_eta(mu, nu, 0.5), abs=1e-9)
        assert eta_wasserstein(mu, nu, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_against_brute_force_wide(self, rng):
        for _ in range(10):
            mu, nu = random_measure(rng, k=4, scale=5.0), random_measure(rng, k=4, scale=5.0)
            eta = rng.uniform(0.1, 0.9)
            assert eta_wasserstein(mu, nu, eta) == pytest.approx(brute_force_eta(mu, nu, eta), abs=1e-8)

    def test_metric_properties(self, rng):
        for _ in range(20):
            a, b, c = (random_measure(rng) for _ in range(3))
            ab, ba = eta_wasserstein(a, b, 0.5), eta_wasserstein(b, a, 0.5)
            assert ab >= 0
            assert ab == pytest.approx(ba, abs=1e-9)
            assert ab <= eta_wasserstein(a, c, 0.5) + eta_wasserstein(c, b, 0.5) + 1e-9

    @pytest.mark.parametrize("eta", [0.0, 1.0, -0.5])
    def test_invalid_eta(self, eta):
        with pytest.raises(InvalidArgument):
            eta_wasserstein(make_measure([0]), make_measure([1]), eta)

