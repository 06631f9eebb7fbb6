"""Quasifree stochastic generators and their lifts to Hudson-Parthasarathy generators.

A quasifree integrand ``G = (K, Q, R)`` with amplitude ``Sigma`` on ``k (+) conj(k)`` is integrated as the
standard integrand ``G^Sigma = Sigma^ G^box Sigma^*``, where ``Sigma^ = diag(1, Sigma (x) I)`` and

    G^box = [[K, R, Q^c*], [Q, 0, 0], [R*^c, 0, 0]]

on ``(C (+) k (+) conj(k)) (x) h``. The noise space of the lift is ``k (+) conj(k)`` with ``k`` first.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .algebra import (
    DEFAULT_TOL,
    RANK_TOL,
    AWAmplitude,
    SymplecticTriple,
    as_matrix,
    as_vector,
    dagger,
    degeneracy_space,
    hermitian_function,
    hermitian_residual,
    make_amplitude,
    noise_conjugate,
)
from .errors import InvalidGeneratorError, InvalidInputError
from .fock import TIME_TOL, SimpleIntegrand, StepFunction, block_slice, common_cells
from .qsc import HPGenerator, bra_noise, hp_generator, ito_projection, ket_noise, lindbladian

logger = logging.getLogger(__name__)


def sigma_hat(sigma: AWAmplitude, dim_h: int) -> np.ndarray:
    """``diag(I_h, Sigma (x) I_h)``."""
    return linalg.block_diag(np.eye(dim_h), np.kron(sigma.blocks, np.eye(dim_h)))


@dataclass(frozen=True, eq=False)
class QFIntegrand:
    """Blocks ``(K, Q, R)`` of a quasifree integrand with ``Q`` in ``B(h; k (x) h)`` and ``R`` in ``B(k (x) h; h)``."""

    K: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    dim_k: int

    def __post_init__(self):
        k = as_matrix(self.K, "K", square=True)
        dh = k.shape[0]
        q, r = as_matrix(self.Q, "Q"), as_matrix(self.R, "R")
        if q.shape != (self.dim_k * dh, dh) or r.shape != (dh, self.dim_k * dh):
            raise InvalidInputError(f"Q {q.shape} and R {r.shape} do not fit dim k = {self.dim_k}, dim h = {dh}")
        object.__setattr__(self, "K", k)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "R", r)

    @property
    def dim_h(self) -> int:
        return self.K.shape[0]

    @cached_property
    def q_conj(self) -> np.ndarray:
        return noise_conjugate(self.Q, self.dim_k)

    @cached_property
    def r_star_conj(self) -> np.ndarray:
        return noise_conjugate(dagger(self.R), self.dim_k)

    def box(self) -> np.ndarray:
        zero = np.zeros((self.dim_k * self.dim_h, self.dim_k * self.dim_h), dtype=complex)
        return np.block(
            [
                [self.K, self.R, dagger(self.q_conj)],
                [self.Q, zero, zero],
                [self.r_star_conj, zero, zero],
            ]
        )

    def column(self, sigma: AWAmplitude) -> np.ndarray:
        """``(Sigma (x) I)[Q; R*^c]``, the creation block of the lift."""
        return np.kron(sigma.blocks, np.eye(self.dim_h)) @ np.vstack([self.Q, self.r_star_conj])

    def lift(self, sigma: AWAmplitude) -> np.ndarray:
        if sigma.dim_k != self.dim_k:
            raise InvalidInputError(f"Amplitude on C^{sigma.dim_k} does not match integrand dim k = {self.dim_k}")
        hat = sigma_hat(sigma, self.dim_h)
        return hat @ self.box() @ dagger(hat)


@dataclass(frozen=True, eq=False)
class QFGenerator:
    """Quasifree generator ``G = [[K, -Q*], [Q, 0]]`` with ``K = iH - L*L/2`` and ``L = (Sigma (x) I)[Q; -Q^c]``."""

    H: np.ndarray
    Q: np.ndarray
    sigma: AWAmplitude

    @property
    def dim_k(self) -> int:
        return self.sigma.dim_k

    @property
    def dim_h(self) -> int:
        return self.H.shape[0]

    @cached_property
    def L(self) -> np.ndarray:
        stacked = np.vstack([self.Q, -noise_conjugate(self.Q, self.dim_k)])
        return np.kron(self.sigma.blocks, np.eye(self.dim_h)) @ stacked

    @property
    def K(self) -> np.ndarray:
        return 1j * self.H - 0.5 * dagger(self.L) @ self.L

    def integrand(self) -> QFIntegrand:
        return QFIntegrand(self.K, self.Q, -dagger(self.Q), self.dim_k)

    def structure_residual(self) -> float:
        """``||K + K* + L*L||``."""
        return float(np.linalg.norm(self.K + dagger(self.K) + dagger(self.L) @ self.L, 2))


def qf_generator(H, Q, sigma: AWAmplitude, tol: float = DEFAULT_TOL) -> QFGenerator:
    h = as_matrix(H, "H", square=True)
    q = as_matrix(Q, "Q")
    dh = h.shape[0]
    if q.shape != (sigma.dim_k * dh, dh):
        raise InvalidInputError(f"Q of shape {q.shape} is not in B(h; k (x) h) for dim k = {sigma.dim_k}, dim h = {dh}")
    if hermitian_residual(h) > tol * max(1.0, float(np.linalg.norm(h, 2))):
        raise InvalidInputError(f"H is not self-adjoint (residual {hermitian_residual(h):.3e})")
    return QFGenerator((h + dagger(h)) / 2, q, sigma)


def qf_generator_from_blocks(K, Q, R, sigma: AWAmplitude, tol: float = DEFAULT_TOL) -> QFGenerator:
    """Validate integrand blocks ``(K, Q, R)`` as a quasifree generator."""
    blocks = QFIntegrand(K, Q, R, sigma.dim_k)
    scale = max(1.0, float(np.linalg.norm(blocks.Q, 2)), float(np.linalg.norm(blocks.K, 2)))
    mismatch = float(np.linalg.norm(blocks.Q + dagger(blocks.R), 2))
    if mismatch > tol * scale:
        raise InvalidGeneratorError(f"Q + R* must vanish for a quasifree generator (residual {mismatch:.3e})")
    gen = qf_generator((blocks.K - dagger(blocks.K)) / 2j, blocks.Q, sigma, tol)
    drift = float(np.linalg.norm(gen.K - blocks.K, 2))
    if drift > tol * scale**2:
        raise InvalidGeneratorError(f"K + K* + L*L does not vanish (residual {drift:.3e})")
    return gen


def qf_pure_noise(alpha: float, x, sigma: AWAmplitude) -> QFGenerator:
    """Pure-noise generator ``[[i alpha - ||Sigma iota(x)||^2 / 2, -<x|], [|x>, 0]]`` on ``h = C``."""
    x = as_vector(x, "x", sigma.dim_k)
    return qf_generator(np.array([[alpha]], dtype=complex), x[:, None], sigma)


def sigma_lift(gen: QFGenerator) -> HPGenerator:
    """The Gaussian HP generator ``G^Sigma``."""
    return hp_generator(gen.H, gen.L)


def zlxq_residual(gen: QFGenerator, x) -> float:
    """Defect of ``(<x|(x)I)Q - Q*(|x>(x)I) = (<z|(x)I)L - L*(|z>(x)I)`` with ``z = Sigma iota(x)``."""
    x = as_vector(x, "x", gen.dim_k)
    z = gen.sigma.sigma_iota(x)
    lhs = bra_noise(x, gen.Q, gen.dim_k) - dagger(gen.Q) @ ket_noise(x, gen.dim_h)
    rhs = bra_noise(z, gen.L, 2 * gen.dim_k) - dagger(gen.L) @ ket_noise(z, gen.dim_h)
    return float(np.linalg.norm(lhs - rhs, 2))


def recognize_quasifree(F: HPGenerator, sigma: AWAmplitude, tol: float = DEFAULT_TOL) -> Optional[np.ndarray]:
    """Return ``Q`` when ``F`` is the lift of a quasifree generator for ``Sigma_A``, else ``None``."""
    if not sigma.gauge_invariant:
        raise InvalidInputError("Recognition needs a gauge-invariant amplitude")
    dk, dh = sigma.dim_k, F.dim_h
    if F.dim_k != 2 * dk:
        raise InvalidInputError(f"Generator noise dimension {F.dim_k} is not 2 * dim k = {2 * dk}")
    if not F.is_gaussian(tol):
        return None
    l1, l2 = F.L[: dk * dh], F.L[dk * dh :]
    l1c = noise_conjugate(l1, dk)
    residual = float(np.linalg.norm(l2 + np.kron(np.conj(sigma.tanh_a), np.eye(dh)) @ l1c, 2))
    logger.debug(f"Quasifree recognition residual {residual:.3e}")
    if residual > tol * max(1.0, float(np.linalg.norm(F.L, 2))):
        return None
    return np.kron(linalg.inv(sigma.cosh_a), np.eye(dh)) @ l1


def _doubled_stack(integrand: QFIntegrand) -> np.ndarray:
    """``[[Q, R*], [R*^c, Q^c]]`` on ``h (+) h`` into ``(k (+) conj(k)) (x) h``."""
    return np.block([[integrand.Q, dagger(integrand.R)], [integrand.r_star_conj, integrand.q_conj]])


class ChangedVariables(NamedTuple):
    integrand: QFIntegrand
    sigma: AWAmplitude


def change_of_variables(integrand: QFIntegrand, sigma: AWAmplitude, triple: SymplecticTriple) -> ChangedVariables:
    """Re-express a ``Sigma``-integrand for the squeezed amplitude ``Sigma M_B``.

    With ``c = cosh P`` and ``s = sinh P``:
    ``Q~ = (c V* (x) I) Q - (s C V^T (x) I) R*^c`` and ``R~* = (c V* (x) I) R* - (s C V^T (x) I) Q^c``.
    """
    dh = integrand.dim_h
    first = np.kron(triple.cosh_p @ dagger(triple.V), np.eye(dh))
    second = np.kron(triple.sinh_p @ triple.C.matrix @ triple.V.T, np.eye(dh))
    q_new = first @ integrand.Q - second @ integrand.r_star_conj
    r_star_new = first @ dagger(integrand.R) - second @ integrand.q_conj
    changed = QFIntegrand(integrand.K, q_new, dagger(r_star_new), integrand.dim_k)
    return ChangedVariables(changed, sigma.squeezed(triple))


def change_of_variables_residual(integrand: QFIntegrand, sigma: AWAmplitude, triple: SymplecticTriple) -> float:
    """Defect of ``(Sigma~ (x) I) T~ = (Sigma (x) I) T`` for the doubled stacks ``T``."""
    changed, sigma_new = change_of_variables(integrand, sigma, triple)
    eye = np.eye(integrand.dim_h)
    lhs = np.kron(sigma_new.blocks, eye) @ _doubled_stack(changed)
    rhs = np.kron(sigma.blocks, eye) @ _doubled_stack(integrand)
    return float(np.linalg.norm(lhs - rhs, 2))


def transform_generator(gen: QFGenerator, triple: SymplecticTriple, tol: float = DEFAULT_TOL) -> QFGenerator:
    """The same cocycle written as a ``Sigma M_B``-quasifree generator."""
    changed, sigma_new = change_of_variables(gen.integrand(), gen.sigma, triple)
    return qf_generator_from_blocks(changed.K, changed.Q, changed.R, sigma_new, tol)


@dataclass(frozen=True, eq=False)
class AmplitudeSet:
    """The gauge-invariant amplitudes for which a cocycle is quasifree.

    ``A~`` belongs to the set iff ``A~ >= 0`` and ``Ran(tanh A~ - tanh A0)`` lies in ``k^{L1}``.
    """

    a0: np.ndarray
    degeneracy: np.ndarray
    q_degeneracy: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def is_singleton(self) -> bool:
        return self.degeneracy.shape[1] == 0

    @property
    def consistent(self) -> bool:
        """``k^{L1} = {0}`` exactly when ``k^Q = {0}``."""
        return (self.degeneracy.shape[1] == 0) == (self.q_degeneracy.shape[1] == 0)

    def admits(self, a_tilde) -> bool:
        a_tilde = as_matrix(a_tilde, "A~", square=True)
        if a_tilde.shape != self.a0.shape or hermitian_residual(a_tilde) > self.tol:
            return False
        if linalg.eigvalsh((a_tilde + dagger(a_tilde)) / 2)[0] < -self.tol:
            return False
        diff = hermitian_function(a_tilde, np.tanh) - hermitian_function(self.a0, np.tanh)
        outside = np.eye(self.a0.shape[0]) - self.degeneracy @ dagger(self.degeneracy)
        return float(np.linalg.norm(outside @ diff, 2)) <= self.tol


def amplitude_set(F: HPGenerator, a0, tol: float = DEFAULT_TOL) -> AmplitudeSet:
    sigma0 = make_amplitude(a0)
    q = recognize_quasifree(F, sigma0, tol)
    if q is None:
        raise InvalidInputError("Generator is not quasifree for the reference amplitude")
    dk, dh = sigma0.dim_k, F.dim_h
    basis = degeneracy_space(F.L[: dk * dh], dk)
    q_basis = degeneracy_space(q, dk)
    logger.debug(f"Amplitude set: dim k^L1 = {basis.shape[1]}, dim k^Q = {q_basis.shape[1]}")
    return AmplitudeSet(sigma0.amplitude, basis, q_basis, tol)


@dataclass(frozen=True, eq=False)
class QFNoise:
    """Data ``(x, alpha)`` relating two quasifree generators of the same flow."""

    x: np.ndarray
    alpha: float


def qf_product_with_noise(gen: QFGenerator, x, alpha: float) -> QFGenerator:
    """``Q~ = Q + |x> (x) I`` and ``H~ = H + (i/2)((<x| (x) I)Q - Q*(|x> (x) I)) + alpha I``."""
    x = as_vector(x, "x", gen.dim_k)
    dh = gen.dim_h
    ket = ket_noise(x, dh)
    h_new = gen.H + 0.5j * (bra_noise(x, gen.Q, gen.dim_k) - dagger(gen.Q) @ ket) + alpha * np.eye(dh)
    return qf_generator(h_new, gen.Q + ket, gen.sigma)


def same_flow_qf(gen1: QFGenerator, gen2: QFGenerator, tol: float = DEFAULT_TOL) -> Optional[QFNoise]:
    if (gen1.dim_k, gen1.dim_h) != (gen2.dim_k, gen2.dim_h):
        raise InvalidInputError("Generators act on different spaces")
    if float(np.linalg.norm(gen1.sigma.blocks - gen2.sigma.blocks, 2)) > tol:
        raise InvalidInputError("Generators use different amplitudes")
    dk, dh = gen1.dim_k, gen1.dim_h
    scale = max(1.0, float(np.linalg.norm(gen1.Q, 2)), float(np.linalg.norm(gen2.Q, 2)))
    diff = gen2.Q - gen1.Q
    x = np.trace(diff.reshape(dk, dh, dh), axis1=1, axis2=2) / dh
    residual_x = float(np.linalg.norm(diff - ket_noise(x, dh), 2))
    d = gen2.H - gen1.H - 0.5j * (bra_noise(x, gen1.Q, dk) - dagger(gen1.Q) @ ket_noise(x, dh))
    alpha = np.trace(d) / dh
    residual_alpha = float(np.linalg.norm(d - alpha * np.eye(dh), 2)) + abs(alpha.imag)
    if max(residual_x, residual_alpha) > tol * scale**2:
        return None
    return QFNoise(x, float(alpha.real))


def qf_flow_generator(gen: QFGenerator, a) -> QFIntegrand:
    """The quasifree integrand ``psi(a)`` whose lift is ``theta(a)`` of the lifted generator."""
    a = as_matrix(a, "a", square=True)
    ia = np.kron(np.eye(gen.dim_k), a)
    q = gen.Q
    return QFIntegrand(lindbladian(sigma_lift(gen), a), ia @ q - q @ a, dagger(q) @ ia - a @ dagger(q), gen.dim_k)


def lift_process(segments: Sequence[Tuple[float, QFIntegrand]], sigma: AWAmplitude) -> SimpleIntegrand:
    """A piecewise-constant quasifree integrand as a standard simple integrand."""
    durations = tuple(d for d, _ in segments)
    return SimpleIntegrand(durations, np.array([part.lift(sigma) for _, part in segments]), 2 * sigma.dim_k)


def _segments_step(segments: Sequence[Tuple[float, QFIntegrand]]) -> StepFunction:
    return StepFunction(tuple(d for d, _ in segments), np.ones((len(segments), 1)))


def _segment_at(segments: Sequence[Tuple[float, QFIntegrand]], t: float) -> Optional[QFIntegrand]:
    start = 0.0
    for duration, part in segments:
        if start - TIME_TOL <= t < start + duration - TIME_TOL:
            return part
        start += duration
    return None


def _box_slice(part: Optional[QFIntegrand], sigma: AWAmplitude, x, y, dim_h: int) -> np.ndarray:
    if part is None:
        return np.zeros((dim_h, dim_h), dtype=complex)
    sh = dagger(sigma.blocks)
    return block_slice(part.box(), dim_h, sh @ x, sh @ y)


def qf_integral_element(
    segments: Sequence[Tuple[float, QFIntegrand]],
    sigma: AWAmplitude,
    f: StepFunction,
    g: StepFunction,
    u,
    v,
    t: float,
) -> complex:
    """``<u e(f), Lambda^Sigma(G)_t v e(g)>`` computed from ``G^box`` with ``Sigma*``-transformed test values."""
    dh = segments[0][1].dim_h
    u, v = as_vector(u, "u", dh), as_vector(v, "v", dh)
    total = 0j
    for left, width in common_cells([_segments_step(segments), f, g], 0.0, t):
        block = _box_slice(_segment_at(segments, left), sigma, f.value_at(left), g.value_at(left), dh)
        total += width * np.vdot(u, block @ v)
    return complex(total * np.exp(f.inner(g)))


def qf_ito_product_element(
    first: Sequence[Tuple[float, QFIntegrand]],
    second: Sequence[Tuple[float, QFIntegrand]],
    sigma: AWAmplitude,
    X0,
    Y0,
    f: StepFunction,
    g: StepFunction,
    u,
    v,
    t: float,
) -> complex:
    """Quasifree Ito product formula; the Ito correction is ``<(Sigma (x) I)[Q; R*^c] u, (Sigma (x) I)[S; T*^c] v>``."""
    dh = first[0][1].dim_h
    X0, Y0 = as_matrix(X0, "X0", square=True), as_matrix(Y0, "Y0", square=True)
    u, v = as_vector(u, "u", dh), as_vector(v, "v", dh)
    overlap = np.exp(f.inner(g))
    steps = [_segments_step(first), _segments_step(second)]
    total = np.vdot(X0 @ u, Y0 @ v) * overlap
    for left, width in common_cells(steps + [f, g], 0.0, t):
        mid = left + width / 2
        x, y = f.value_at(left), g.value_at(left)
        part_f, part_g = _segment_at(first, left), _segment_at(second, left)
        g_slice = _box_slice(part_g, sigma, x, y, dh) @ v
        term1 = np.vdot(X0 @ u, g_slice) * overlap + np.conj(qf_integral_element(first, sigma, g, f, g_slice, u, mid))
        f_slice = _box_slice(part_f, sigma, y, x, dh) @ u
        term2 = np.vdot(f_slice, Y0 @ v) * overlap + qf_integral_element(second, sigma, f, g, f_slice, v, mid)
        term3 = 0j
        if part_f is not None and part_g is not None:
            term3 = np.vdot(part_f.column(sigma) @ u, part_g.column(sigma) @ v) * overlap
        total += width * (term1 + term2 + term3)
    return complex(total)


class Compression(NamedTuple):
    """A quasifree integrand compressed to ``k0 = ker A``."""

    integrand: SimpleIntegrand
    basis: np.ndarray

    def embed(self, f: StepFunction) -> StepFunction:
        """Map ``k0``-valued test data into ``k (+) conj(k)``."""
        return f.map(np.vstack([self.basis, np.zeros_like(self.basis)]))


def compress_integrand(
    segments: Sequence[Tuple[float, QFIntegrand]], sigma: AWAmplitude, tol: float = RANK_TOL
) -> Compression:
    """Standard integrand ``[[K, R (V0 (x) I)], [(V0* (x) I) Q, 0]]`` for the isometry ``V0`` onto ``ker A``."""
    if not sigma.gauge_invariant:
        raise InvalidInputError("Compression needs a gauge-invariant amplitude")
    w, vecs = linalg.eigh(sigma.amplitude)
    basis = vecs[:, np.abs(w) <= tol * max(1.0, float(np.max(np.abs(w), initial=0.0)))]
    if basis.shape[1] == 0:
        raise InvalidInputError("Amplitude has trivial kernel; nothing to compress onto")
    values = []
    for _, part in segments:
        iso = np.kron(basis, np.eye(part.dim_h))
        zero = np.zeros((iso.shape[1], iso.shape[1]), dtype=complex)
        values.append(np.block([[part.K, part.R @ iso], [dagger(iso) @ part.Q, zero]]))
    durations = tuple(d for d, _ in segments)
    return Compression(SimpleIntegrand(durations, np.array(values), basis.shape[1]), basis)


def forcing_map_margin(sigma: AWAmplitude, dim_h: int) -> float:
    """Smallest singular value of the realified map ``X -> (Sigma (x) I)[X; X^c]`` on ``B(h; k (x) h)``."""
    dk = sigma.dim_k
    shape = (dk * dim_h, dim_h)
    amp = np.kron(sigma.blocks, np.eye(dim_h))
    columns = []
    for index in range(shape[0] * shape[1]):
        for unit in (1.0, 1j):
            x = np.zeros(shape[0] * shape[1], dtype=complex)
            x[index] = unit
            x = x.reshape(shape)
            image = (amp @ np.vstack([x, noise_conjugate(x, dk)])).reshape(-1)
            columns.append(np.concatenate([image.real, image.imag]))
    return float(linalg.svdvals(np.column_stack(columns))[-1])


def ito_correction(first: QFIntegrand, second: QFIntegrand, sigma: AWAmplitude) -> np.ndarray:
    """Operator form of the quasifree Ito correction, checked against ``Delta`` of the lifts."""
    return dagger(first.column(sigma)) @ second.column(sigma)


def lifted_ito_correction(first: QFIntegrand, second: QFIntegrand, sigma: AWAmplitude) -> np.ndarray:
    """Upper-left block of ``F^Sigma* Delta G^Sigma``."""
    dh = first.dim_h
    delta = ito_projection(2 * sigma.dim_k, dh)
    return (dagger(first.lift(sigma)) @ delta @ second.lift(sigma))[:dh, :dh]
