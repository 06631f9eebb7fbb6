import logging
from math import factorial

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from qfwalk.algebra import covariance, make_amplitude
from qfwalk.errors import InvalidInputError
from qfwalk.fock import (
    DoubleFockSpace,
    FockSpace,
    SimpleIntegrand,
    SlicedFock,
    StepFunction,
    coherent_vector,
    exponential_vector,
    ladder,
    qs_integral_operator,
    quasifree_characteristic,
    quasifree_ladder,
    truncation_tail,
    weyl,
    weyl_sigma,
)
from qfwalk.qsc import fock_matrix_element, integral_element
from qfwalk.sampling import random_complex


class TestFockSpace:
    """Tests for the truncated Fock space and its ladder operators."""

    def test_dimension(self):
        """Test that two modes at cutoff 3 have (3 + 2 choose 2) basis states."""
        assert FockSpace(2, 3).dim == 10
        assert FockSpace(2, 3).basis[0] == (0, 0)

    def test_zero_ladder(self):
        """Test that x = 0 gives zero creation and annihilation operators."""
        plus, minus = ladder(FockSpace(2, 2), [0.0, 0.0])
        assert not plus.any()
        assert not minus.any()

    def test_single_mode_annihilator(self):
        """Test the superdiagonal sqrt(1), sqrt(2), sqrt(3) of a(1) at cutoff 3."""
        _, minus = ladder(FockSpace(1, 3), [1.0])
        assert_allclose(np.diag(minus, 1), np.sqrt([1.0, 2.0, 3.0]))

    def test_commutation_relation(self, rng):
        """Test ||a+(x) xi||^2 - ||a-(x) xi||^2 = ||x||^2 ||xi||^2 below the cutoff."""
        space = FockSpace(2, 4)
        x = random_complex(rng, 2)
        xi = random_complex(rng, space.dim)
        xi[[sum(occ) == space.cutoff for occ in space.basis]] = 0.0
        plus, minus = ladder(space, x)
        lhs = np.linalg.norm(plus @ xi) ** 2 - np.linalg.norm(minus @ xi) ** 2
        assert lhs == pytest.approx(np.vdot(x, x).real * np.linalg.norm(xi) ** 2, abs=1e-12)

    def test_negative_cutoff_rejected(self):
        """Test that a negative cutoff is rejected."""
        with pytest.raises(InvalidInputError, match="Cutoff"):
            FockSpace(1, -1)


class TestExponentialVectors:
    """Tests for exponential vectors and truncation tails."""

    def test_zero_is_vacuum(self):
        """Test that e(0) is the vacuum."""
        space = FockSpace(2, 3)
        assert_allclose(exponential_vector(space, [0.0, 0.0]), space.vacuum())

    def test_inner_product(self, rng):
        """Test <e(x), e(y)> = exp<x, y> up to the tail."""
        space = FockSpace(2, 12)
        x, y = random_complex(rng, 2, scale=0.4), random_complex(rng, 2, scale=0.4)
        inner = np.vdot(exponential_vector(space, x), exponential_vector(space, y))
        tail = truncation_tail(np.vdot(x, x).real, 12) * truncation_tail(np.vdot(y, y).real, 12)
        assert abs(inner - np.exp(np.vdot(x, y))) <= tail + 1e-14

    def test_linear_independence(self):
        """Test that three distinct exponential vectors have a full-rank Gram matrix."""
        space = FockSpace(1, 10)
        vectors = np.array([exponential_vector(space, [x]) for x in (0.1, 0.3j, -0.2)])
        assert np.linalg.matrix_rank(vectors @ vectors.conj().T) == 3

    def test_tail_matches_series(self):
        """Test the tail against the truncated series sum_{n > N} s^n / n!."""
        s, cutoff = 0.5, 3
        expected = np.sqrt(sum(s**n / factorial(n) for n in range(cutoff + 1, 40)))
        assert truncation_tail(s, cutoff) == pytest.approx(expected, rel=1e-10)
        assert truncation_tail(0.0, cutoff) == 0.0

    def test_cutoff_past_int64_factorials(self):
        """Test that levels with n! beyond int64 are computed as floats."""
        space = FockSpace(1, 30)
        vector = exponential_vector(space, [1.5])
        assert np.all(np.isfinite(vector))
        expected = sum(2.25**n / factorial(n) for n in range(31))
        assert np.vdot(vector, vector).real == pytest.approx(expected, rel=1e-12)
        assert np.linalg.norm(coherent_vector(FockSpace(1, 24), [0.8])) == pytest.approx(1.0, abs=1e-12)

    def test_coherent_vector_is_normalised(self, rng):
        """Test that coherent vectors have unit norm well inside the cutoff."""
        x = random_complex(rng, 2, scale=0.3)
        assert np.linalg.norm(coherent_vector(FockSpace(2, 16), x)) == pytest.approx(1.0, abs=1e-12)


class TestWeyl:
    """Tests for Weyl operators on one and two Fock spaces."""

    def test_weyl_zero_is_identity(self):
        """Test that W(0) = I."""
        space = FockSpace(2, 3)
        assert_allclose(weyl(space, [0.0, 0.0]).matrix, np.eye(space.dim), atol=1e-15)

    def test_vacuum_expectation(self, rng):
        """Test <Omega, W(x) Omega> = exp(-||x||^2 / 2) for ||x|| <= 1 at cutoff 24."""
        space = FockSpace(1, 24)
        vac = space.vacuum()
        for _ in range(5):
            x = random_complex(rng, 1)
            x = rng.random() * x / np.linalg.norm(x)
            value = np.vdot(vac, weyl(space, x).matrix @ vac)
            assert abs(value - np.exp(-0.5 * np.vdot(x, x).real)) <= 1e-8

    def test_weyl_relation_on_coherent_vectors(self, rng):
        """Test W(x) varpi(y) = exp(-i Im<x, y>) varpi(x + y) for ||x||, ||y|| <= 0.5."""
        space = FockSpace(1, 24)
        x, y = np.array([0.3 - 0.2j]), np.array([-0.1 + 0.4j])
        lhs = weyl(space, x).matrix @ coherent_vector(space, y)
        rhs = np.exp(-1j * np.vdot(x, y).imag) * coherent_vector(space, x + y)
        assert np.linalg.norm(lhs - rhs) <= 1e-7

    def test_tail_warning(self, caplog):
        """Test that a truncation tail above the tolerance is logged."""
        with caplog.at_level(logging.WARNING, logger="qfwalk.fock"):
            op = weyl(FockSpace(1, 2), [2.0], tol=1e-8)
        assert op.truncated
        assert "truncation tail" in caplog.text

    def test_quasifree_characteristic(self, rng):
        """Test <Omega, W_Sigma(x) Omega> = exp(-<x, cosh(2A) x> / 2)."""
        sigma = make_amplitude([[0.5]])
        space = DoubleFockSpace(1, 20)
        x = np.array([0.4 + 0.3j])
        expected = np.exp(-0.5 * covariance(sigma, x))
        assert abs(quasifree_characteristic(sigma, space, x) - expected) <= 1e-6

    def test_quasifree_ladder_generates_weyl(self):
        """Test exp(a+_Sigma(x) - a-_Sigma(x)) = W_Sigma(x) on the truncated space."""
        sigma = make_amplitude([[0.4]])
        space = DoubleFockSpace(1, 6)
        x = np.array([0.2 - 0.3j])
        plus, minus = quasifree_ladder(sigma, space, x)
        assert_allclose(linalg.expm(plus - minus), weyl_sigma(sigma, space, x).matrix, atol=1e-10)

    def test_mismatched_double_space(self):
        """Test that the amplitude must live on the same one-particle space."""
        with pytest.raises(InvalidInputError, match="does not match"):
            DoubleFockSpace(2, 3).split(make_amplitude([[0.1]]), [1.0])


class TestStepFunction:
    """Tests for piecewise-constant test functions."""

    def test_inner_product(self):
        """Test the integral of <f, g> over overlapping segments."""
        f = StepFunction((1.0, 1.0), np.array([[1.0], [2.0]]))
        g = StepFunction((0.5, 2.0), np.array([[1j], [3.0]]))
        assert f.inner(g) == pytest.approx(0.5 * 1j + 0.5 * 3.0 + 1.0 * 6.0)
        assert f.inner(g, start=1.0) == pytest.approx(6.0)
        assert f.l2_norm() == pytest.approx(np.sqrt(5.0))

    def test_value_at(self):
        """Test that segments are closed on the left and the function vanishes past its support."""
        f = StepFunction((1.0, 1.0), np.array([[1.0], [2.0]]))
        assert f.value_at(1.0)[0] == 2.0
        assert f.value_at(0.999)[0] == 1.0
        assert f.value_at(5.0)[0] == 0.0

    def test_resample(self):
        """Test left-endpoint resampling onto a uniform grid."""
        f = StepFunction((0.3, 0.7), np.array([[1.0], [2.0]]))
        grid = f.resample(0.25, 4)
        assert_allclose(grid.values[:, 0], [1.0, 1.0, 2.0, 2.0])
        assert grid.is_aligned(0.25)
        assert not f.is_aligned(0.25)

    def test_shift_and_concat(self):
        """Test shifting and concatenation."""
        f = StepFunction.constant([1.0], 1.0)
        g = StepFunction.constant([2.0], 0.5)
        assert f.shifted(0.5).value_at(0.25)[0] == 0.0
        joined = f.concat(g, 1.5)
        assert joined.value_at(1.25)[0] == 0.0
        assert joined.value_at(1.75)[0] == 2.0
        assert joined.support_end == pytest.approx(2.0)

    def test_invalid_durations(self):
        """Test that non-positive durations are rejected."""
        with pytest.raises(InvalidInputError, match="positive"):
            StepFunction((1.0, 0.0), np.zeros((2, 1)))


class TestSlicedIntegral:
    """Tests for the sliced-Fock matrix of a stochastic integral."""

    def test_time_part_only(self, rng):
        """Test that a constant time part K gives (t K) (x) I."""
        k = random_complex(rng, 2, 2)
        value = np.zeros((4, 4), dtype=complex)
        value[:2, :2] = k
        slicing = SlicedFock((0.5, 0.5), 1, 3)
        op = qs_integral_operator(SimpleIntegrand.constant(value, 1.0, 1), slicing, 1.0)
        assert_allclose(op, np.kron(k, np.eye(slicing.dim)), atol=1e-14)

    def test_creation_on_vacuum(self, rng):
        """Test that a creation part puts one particle in each slot with weight sqrt(dt)."""
        l_mat = random_complex(rng, 2, 2)
        value = np.zeros((4, 4), dtype=complex)
        value[2:, :2] = l_mat
        slicing = SlicedFock((0.25, 0.75), 1, 2)
        u = random_complex(rng, 2)
        op = qs_integral_operator(SimpleIntegrand.constant(value, 1.0, 1), slicing, 1.0)
        creation = slicing.slot.annihilators[0].conj().T
        particles = sum(np.sqrt(w) * slicing.embed(creation, j) @ slicing.vacuum() for j, w in enumerate(slicing.durations))
        assert_allclose(op @ np.kron(u, slicing.vacuum()), np.kron(l_mat @ u, particles), atol=1e-14)

    def test_matches_first_fundamental_formula(self, rng):
        """Test sliced-Fock matrix elements against the direct integral at cutoff 12."""
        integrand = SimpleIntegrand((0.5, 0.5), random_complex(rng, 2, 4, 4, scale=0.5), 1)
        slicing = SlicedFock((0.5, 0.5), 1, 12)
        f, g = (StepFunction((0.5, 0.5), random_complex(rng, 2, 1, scale=0.5)) for _ in range(2))
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        direct = integral_element(integrand, f, g, u, v, 1.0)
        assert abs(fock_matrix_element(integrand, slicing, f, g, u, v, 1.0) - direct) <= 1e-6

    def test_adjoint_integrand(self, rng):
        """Test that Lambda(F*) matrix elements are conjugates of those of Lambda(F)."""
        integrand = SimpleIntegrand((0.5,), random_complex(rng, 1, 4, 4), 1)
        slicing = SlicedFock((0.5,), 1, 6)
        f, g = (StepFunction((0.5,), random_complex(rng, 1, 1, scale=0.5)) for _ in range(2))
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        forward = fock_matrix_element(integrand, slicing, f, g, u, v, 0.5)
        backward = fock_matrix_element(integrand.adjoint(), slicing, g, f, v, u, 0.5)
        assert backward == pytest.approx(np.conj(forward), abs=1e-12)

    def test_misaligned_time_rejected(self):
        """Test that t must be a slot boundary."""
        slicing = SlicedFock((0.5, 0.5), 1, 2)
        with pytest.raises(InvalidInputError, match="slot boundary"):
            qs_integral_operator(SimpleIntegrand.constant(np.eye(4), 1.0, 1), slicing, 0.7)
