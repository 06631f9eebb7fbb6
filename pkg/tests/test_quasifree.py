import numpy as np
import pytest
from numpy.testing import assert_allclose

from qfwalk.algebra import SymplecticTriple, covariance, dagger, make_amplitude, noise_conjugate
from qfwalk.errors import InvalidGeneratorError, InvalidInputError
from qfwalk.fock import StepFunction
from qfwalk.qsc import hp_generator, integral_element, ito_product_element, same_flow, theta
from qfwalk.quasifree import (
    QFIntegrand,
    amplitude_set,
    change_of_variables,
    change_of_variables_residual,
    compress_integrand,
    forcing_map_margin,
    ito_correction,
    lift_process,
    lifted_ito_correction,
    qf_flow_generator,
    qf_generator,
    qf_generator_from_blocks,
    qf_integral_element,
    qf_ito_product_element,
    qf_product_with_noise,
    qf_pure_noise,
    recognize_quasifree,
    same_flow_qf,
    sigma_lift,
    transform_generator,
    zlxq_residual,
)
from qfwalk.sampling import (
    random_amplitude,
    random_complex,
    random_hermitian,
    random_qf_generator,
    random_triple,
)


@pytest.fixture
def sigma(rng):
    return make_amplitude(random_amplitude(rng, 2))


def steps(rng, dim, durations=(0.5, 0.75), scale=0.4):
    return StepFunction(durations, random_complex(rng, len(durations), dim, scale=scale))


class TestQFGenerator:
    """Tests for quasifree generators and their structure relation."""

    def test_zero_generator(self, sigma):
        """Test that H = 0 and Q = 0 give G = 0."""
        gen = qf_generator(np.zeros((2, 2)), np.zeros((4, 2)), sigma)
        assert not gen.integrand().box().any()

    def test_structure_relation(self, rng, sigma):
        """Test K + K* + L*L = 0 for random data."""
        assert random_qf_generator(rng, sigma, 2).structure_residual() <= 1e-12

    def test_pure_noise(self, sigma):
        """Test G = [[i alpha - ||Sigma iota(x)||^2 / 2, -<x|], [|x>, 0]]."""
        x = np.array([0.3 + 0.1j, -0.5])
        gen = qf_pure_noise(0.25, x, sigma)
        integrand = gen.integrand()
        assert integrand.K[0, 0] == pytest.approx(0.25j - 0.5 * covariance(sigma, x))
        assert_allclose(integrand.Q[:, 0], x)
        assert_allclose(integrand.R[0], -np.conj(x))

    def test_shape_validation(self, sigma):
        """Test that Q must lie in B(h; k (x) h)."""
        with pytest.raises(InvalidInputError, match="is not in B"):
            qf_generator(np.zeros((2, 2)), np.zeros((3, 2)), sigma)

    def test_blocks_must_satisfy_r_equals_minus_q_star(self, rng, sigma):
        """Test that (K, Q, R) with Q + R* != 0 is rejected."""
        gen = random_qf_generator(rng, sigma, 2)
        with pytest.raises(InvalidGeneratorError, match="Q \\+ R\\*"):
            qf_generator_from_blocks(gen.K, gen.Q, dagger(gen.Q), sigma)
        rebuilt = qf_generator_from_blocks(gen.K, gen.Q, -dagger(gen.Q), sigma)
        assert_allclose(rebuilt.H, gen.H, atol=1e-12)


class TestSigmaLift:
    """Tests for the Sigma-lift to HP generators and its recognition."""

    def test_zero_amplitude_lift(self, rng):
        """Test that A = 0 lifts to [[K, -Q*, 0], [Q, 0, 0], [0, 0, 0]]."""
        gen = random_qf_generator(rng, make_amplitude(np.zeros((1, 1))), 2)
        matrix = sigma_lift(gen).matrix
        assert_allclose(matrix[:2, :2], gen.K, atol=1e-13)
        assert_allclose(matrix[2:4, :2], gen.Q, atol=1e-13)
        assert_allclose(matrix[:2, 2:4], -dagger(gen.Q), atol=1e-13)
        assert_allclose(matrix[4:, :], np.zeros((2, 6)), atol=1e-13)
        assert_allclose(matrix[:, 4:], np.zeros((6, 2)), atol=1e-13)

    def test_creation_block(self, rng, sigma):
        """Test that the lifted L is (Sigma (x) I)[Q; -Q^c]."""
        gen = random_qf_generator(rng, sigma, 2)
        expected = np.kron(sigma.blocks, np.eye(2)) @ np.vstack([gen.Q, -noise_conjugate(gen.Q, 2)])
        assert_allclose(sigma_lift(gen).matrix[2:, :2], expected, atol=1e-13)
        assert max(sigma_lift(gen).structure_residuals()) <= 1e-12

    def test_lift_of_integrand_matches_generator(self, rng, sigma):
        """Test that lifting the integrand (K, Q, -Q*) gives the HP generator matrix."""
        gen = random_qf_generator(rng, sigma, 2)
        assert_allclose(gen.integrand().lift(sigma), sigma_lift(gen).matrix, atol=1e-12)

    def test_recognition(self, rng, sigma):
        """Test that recognition recovers Q from the lift."""
        gen = random_qf_generator(rng, sigma, 2)
        assert_allclose(recognize_quasifree(sigma_lift(gen), sigma), gen.Q, atol=1e-12)

    def test_zero_amplitude_needs_vanishing_second_block(self, rng):
        """Test that for A = 0 a generator is quasifree iff L2 = 0."""
        sigma0 = make_amplitude(np.zeros((1, 1)))
        l1 = random_complex(rng, 2, 2)
        h = random_hermitian(rng, 2)
        assert recognize_quasifree(hp_generator(h, np.vstack([l1, np.zeros((2, 2))])), sigma0) is not None
        assert recognize_quasifree(hp_generator(h, np.vstack([l1, random_complex(rng, 2, 2)])), sigma0) is None

    def test_perturbed_generator_rejected(self, rng, sigma):
        """Test that perturbing L2 breaks recognition."""
        gen = random_qf_generator(rng, sigma, 2)
        lifted = sigma_lift(gen)
        perturbed = lifted.L.copy()
        perturbed[4:] += 1e-3 * random_complex(rng, 4, 2)
        assert recognize_quasifree(hp_generator(lifted.H, perturbed), sigma) is None

    def test_non_gaussian_returns_none(self, rng, sigma):
        """Test that a generator with W != I is never quasifree."""
        gen = sigma_lift(random_qf_generator(rng, sigma, 1))
        w = np.diag(np.exp(1j * np.array([0.1, 0.2, 0.3, 0.4])))
        assert recognize_quasifree(hp_generator(gen.H, gen.L, w), sigma) is None

    def test_squeezed_amplitude_rejected(self, rng, sigma):
        """Test that recognition needs a gauge-invariant amplitude."""
        squeezed = make_amplitude(sigma.amplitude, random_triple(rng, 2))
        lifted = sigma_lift(random_qf_generator(rng, sigma, 2))
        with pytest.raises(InvalidInputError, match="gauge-invariant"):
            recognize_quasifree(lifted, squeezed)

    def test_zlxq(self, rng, sigma):
        """Test (<x|(x)I)Q - Q*(|x>(x)I) = (<z|(x)I)L - L*(|z>(x)I) with z = Sigma iota(x)."""
        gen = random_qf_generator(rng, sigma, 3)
        assert zlxq_residual(gen, random_complex(rng, 2)) <= 1e-12

    def test_flow_generator(self, rng, sigma):
        """Test that the lift of psi(a) is theta(a) of the lifted generator."""
        gen = random_qf_generator(rng, sigma, 2)
        a = random_hermitian(rng, 2)
        assert_allclose(qf_flow_generator(gen, a).lift(sigma), theta(sigma_lift(gen), a), atol=1e-12)


class TestChangeOfVariables:
    """Tests for re-expressing integrands under squeezed amplitudes."""

    def test_identity_triple(self, rng, sigma):
        """Test that the identity squeeze leaves Q and R unchanged."""
        integrand = random_qf_generator(rng, sigma, 2).integrand()
        changed, _ = change_of_variables(integrand, sigma, SymplecticTriple.identity(2))
        assert_allclose(changed.Q, integrand.Q, atol=1e-14)
        assert_allclose(changed.R, integrand.R, atol=1e-14)

    def test_doubled_stack_identity(self, rng, sigma):
        """Test the doubled-stack identity for an integrand with independent Q and R."""
        integrand = QFIntegrand(random_complex(rng, 2, 2), random_complex(rng, 4, 2), random_complex(rng, 2, 4), 2)
        assert change_of_variables_residual(integrand, sigma, random_triple(rng, 2)) <= 1e-12

    def test_same_lifted_generator(self, rng, sigma):
        """Test that the transformed generator lifts to the same HP generator."""
        gen = random_qf_generator(rng, sigma, 2)
        moved = transform_generator(gen, random_triple(rng, 2))
        assert not moved.sigma.gauge_invariant
        assert_allclose(sigma_lift(moved).matrix, sigma_lift(gen).matrix, atol=1e-12)

    def test_forcing_map_is_injective(self, rng, sigma):
        """Test that X -> (Sigma (x) I)[X; X^c] has trivial kernel for a squeezed amplitude."""
        assert forcing_map_margin(sigma.squeezed(random_triple(rng, 2)), 2) > 1e-10


class TestAmplitudeSet:
    """Tests for the set of amplitudes making a cocycle quasifree."""

    def test_independent_slices_give_singleton(self, rng, sigma):
        """Test that k^L1 = {0} leaves only the reference amplitude."""
        gen = random_qf_generator(rng, sigma, 2)
        candidates = amplitude_set(sigma_lift(gen), sigma.amplitude)
        assert candidates.is_singleton
        assert candidates.consistent
        assert candidates.admits(sigma.amplitude)
        assert not candidates.admits(sigma.amplitude + 0.1 * np.eye(2))

    def test_zero_q_admits_everything(self, rng, sigma):
        """Test that Q = 0 admits every non-negative amplitude."""
        gen = qf_generator(random_hermitian(rng, 2), np.zeros((4, 2)), sigma)
        candidates = amplitude_set(sigma_lift(gen), sigma.amplitude)
        assert candidates.degeneracy.shape == (2, 2)
        assert candidates.admits(random_amplitude(rng, 2))
        assert not candidates.admits(-np.eye(2))

    def test_one_dimensional_degeneracy(self, rng):
        """Test that perturbing tanh A along k^L1 keeps the generator quasifree."""
        a1, a2, eps = 0.4, 0.3, 0.1
        sigma0 = make_amplitude(np.diag([a1, a2]))
        q = np.vstack([random_complex(rng, 2, 2), np.zeros((2, 2))])
        lifted = sigma_lift(qf_generator(random_hermitian(rng, 2), q, sigma0))
        candidates = amplitude_set(lifted, sigma0.amplitude)
        assert candidates.degeneracy.shape == (2, 1)
        assert abs(candidates.degeneracy[1, 0]) == pytest.approx(1.0)

        along = np.diag([a1, np.arctanh(np.tanh(a2) + eps)])
        assert candidates.admits(along)
        assert recognize_quasifree(lifted, make_amplitude(along)) is not None

        across = np.diag([np.arctanh(np.tanh(a1) + eps), a2])
        assert not candidates.admits(across)
        assert recognize_quasifree(lifted, make_amplitude(across)) is None

    def test_unrecognised_generator(self, rng, sigma):
        """Test that the reference amplitude must make the generator quasifree."""
        lifted = sigma_lift(random_qf_generator(rng, sigma, 2))
        with pytest.raises(InvalidInputError, match="not quasifree"):
            amplitude_set(lifted, sigma.amplitude + 0.2 * np.eye(2))


class TestSameFlowQF:
    """Tests for identifying quasifree generators of the same flow."""

    def test_same_generator(self, rng, sigma):
        """Test that a generator matches itself with x = 0 and alpha = 0."""
        gen = random_qf_generator(rng, sigma, 2)
        found = same_flow_qf(gen, gen)
        assert found is not None
        assert_allclose(found.x, np.zeros(2), atol=1e-12)
        assert found.alpha == pytest.approx(0.0, abs=1e-12)

    def test_recovers_noise(self, rng, sigma):
        """Test that (x, alpha) is recovered and agrees with the lifted comparison."""
        gen = random_qf_generator(rng, sigma, 2)
        x, alpha = random_complex(rng, 2), -0.35
        other = qf_product_with_noise(gen, x, alpha)
        found = same_flow_qf(gen, other)
        assert found is not None
        assert_allclose(found.x, x, atol=1e-10)
        assert found.alpha == pytest.approx(alpha, abs=1e-10)

        lifted = same_flow(sigma_lift(gen), sigma_lift(other))
        assert lifted is not None
        assert_allclose(lifted.z, sigma.sigma_iota(x), atol=1e-10)
        assert_allclose(lifted.w, np.eye(4), atol=1e-10)
        assert lifted.alpha == pytest.approx(alpha, abs=1e-10)

    def test_different_flows(self, rng, sigma):
        """Test that unrelated generators give None."""
        assert same_flow_qf(random_qf_generator(rng, sigma, 2), random_qf_generator(rng, sigma, 2)) is None


class TestQuasifreeIntegrals:
    """Tests for quasifree stochastic integrals evaluated from the box matrix."""

    def test_first_fundamental_formula(self, rng, sigma):
        """Test the box evaluation against the integral of the lifted process."""
        segments = [(0.5, random_qf_generator(rng, sigma, 2).integrand()), (0.75, random_qf_generator(rng, sigma, 2).integrand())]
        f, g = steps(rng, 4), steps(rng, 4, (0.3, 1.2))
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        lifted = integral_element(lift_process(segments, sigma), f, g, u, v, 1.25)
        assert qf_integral_element(segments, sigma, f, g, u, v, 1.25) == pytest.approx(lifted, abs=1e-10)

    def test_ito_product(self, rng, sigma):
        """Test the quasifree Ito product formula against the lifted one."""
        first = [(0.6, random_qf_generator(rng, sigma, 2).integrand())]
        second = [(0.3, random_qf_generator(rng, sigma, 2).integrand()), (0.3, random_qf_generator(rng, sigma, 2).integrand())]
        x0, y0 = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
        f, g = steps(rng, 4, (0.2, 0.4)), steps(rng, 4, (0.6,))
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        expected = ito_product_element(lift_process(first, sigma), lift_process(second, sigma), x0, y0, f, g, u, v, 0.6)
        value = qf_ito_product_element(first, second, sigma, x0, y0, f, g, u, v, 0.6)
        assert value == pytest.approx(expected, abs=1e-10)

    def test_ito_correction(self, rng, sigma):
        """Test that the quasifree Ito correction equals the lifted one."""
        first = random_qf_generator(rng, sigma, 2).integrand()
        second = QFIntegrand(random_complex(rng, 2, 2), random_complex(rng, 4, 2), random_complex(rng, 2, 4), 2)
        assert_allclose(ito_correction(first, second, sigma), lifted_ito_correction(first, second, sigma), atol=1e-12)

    def test_compression_to_kernel(self, rng):
        """Test that k0-valued test data see only the compressed integrand."""
        sigma0 = make_amplitude(np.diag([0.0, 0.5]))
        segments = [(1.0, random_qf_generator(rng, sigma0, 2).integrand())]
        compressed = compress_integrand(segments, sigma0)
        assert compressed.basis.shape == (2, 1)
        f, g = steps(rng, 1, (1.0,)), steps(rng, 1, (1.0,))
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        direct = integral_element(compressed.integrand, f, g, u, v, 1.0)
        boxed = qf_integral_element(segments, sigma0, compressed.embed(f), compressed.embed(g), u, v, 1.0)
        assert boxed == pytest.approx(direct, abs=1e-12)

    def test_compression_needs_kernel(self, rng, sigma):
        """Test that an amplitude with trivial kernel cannot be compressed."""
        segments = [(1.0, random_qf_generator(rng, sigma, 2).integrand())]
        with pytest.raises(InvalidInputError, match="trivial kernel"):
            compress_integrand(segments, make_amplitude(np.diag([0.2, 0.5])))
