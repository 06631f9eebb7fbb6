"""Hudson-Parthasarathy cocycles and Evans-Hudson flows at the level of matrix elements.

Cocycles are never built as operators on a truncated Fock space. Their matrix elements between
exponential vectors of step functions solve ordinary linear equations on the initial space, so they
are computed exactly as time-ordered products of matrix exponentials.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .algebra import DEFAULT_TOL, RANK_TOL, as_matrix, as_vector, dagger, hermitian_residual, unitary_residual
from .errors import InvalidInputError
from .fock import SimpleIntegrand, SlicedFock, StepFunction, block_slice, common_cells, qs_integral_operator

logger = logging.getLogger(__name__)


def ito_projection(dim_k: int, dim_h: int) -> np.ndarray:
    """``Delta = diag(0, I_{K (x) h})`` on ``K^ (x) h``."""
    return np.diag(np.concatenate([np.zeros(dim_h), np.ones(dim_k * dim_h)])).astype(complex)


def noise_slices(x: np.ndarray, dim_k: int) -> np.ndarray:
    """``X_i = (<e_i| (x) I) X`` for ``X`` in ``B(h; k (x) h)``, stacked along the first axis."""
    return x.reshape(dim_k, x.shape[0] // dim_k, x.shape[1])


def bra_noise(z, x: np.ndarray, dim_k: int) -> np.ndarray:
    """``(<z| (x) I) X``."""
    return np.tensordot(np.conj(as_vector(z, "z", dim_k)), noise_slices(x, dim_k), axes=1)


def ket_noise(z, dim_h: int) -> np.ndarray:
    """``|z> (x) I_h``."""
    return np.kron(as_vector(z, "z")[:, None], np.eye(dim_h))


@dataclass(frozen=True, eq=False)
class HPGenerator:
    """Stochastic generator ``F = [[iH - L*L/2, -L*W], [L, W - I]]`` on ``K^ (x) h``."""

    H: np.ndarray
    L: np.ndarray
    W: np.ndarray
    dim_k: int

    @property
    def dim_h(self) -> int:
        return self.H.shape[0]

    @property
    def K(self) -> np.ndarray:
        return 1j * self.H - 0.5 * dagger(self.L) @ self.L

    @cached_property
    def matrix(self) -> np.ndarray:
        eye = np.eye(self.dim_k * self.dim_h)
        return np.block([[self.K, -dagger(self.L) @ self.W], [self.L, self.W - eye]])

    @property
    def delta(self) -> np.ndarray:
        return ito_projection(self.dim_k, self.dim_h)

    def structure_residuals(self) -> Tuple[float, float]:
        """``||F* + F + F* Delta F||`` and ``||F + F* + F Delta F*||``."""
        f, fh, delta = self.matrix, dagger(self.matrix), self.delta
        return float(np.linalg.norm(fh + f + fh @ delta @ f, 2)), float(np.linalg.norm(f + fh + f @ delta @ fh, 2))

    def is_gaussian(self, tol: float = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm(self.W - np.eye(self.W.shape[0]), 2)) <= tol

    def adjoint_generator(self) -> "HPGenerator":
        """Generator ``(-H, -W*L, W*)``; its matrix is ``F*`` when the initial space is C."""
        wh = dagger(self.W)
        return HPGenerator(-self.H, -wh @ self.L, wh, self.dim_k)

    def slice(self, x, y) -> np.ndarray:
        """``F^x_y = (<x^| (x) I) F (|y^> (x) I)``."""
        return block_slice(self.matrix, self.dim_h, x, y)

    def as_integrand(self, duration: float) -> SimpleIntegrand:
        return SimpleIntegrand.constant(self.matrix, duration, self.dim_k)


def hp_generator(H, L=None, W=None, dim_k: Optional[int] = None, tol: float = DEFAULT_TOL) -> HPGenerator:
    """Validate ``(H, L, W)`` and assemble the stochastic generator."""
    h = as_matrix(H, "H", square=True)
    dim_h = h.shape[0]
    if L is None:
        dim_k = 1 if dim_k is None else dim_k
        l_mat = np.zeros((dim_k * dim_h, dim_h), dtype=complex)
    else:
        l_mat = as_matrix(L, "L")
        if l_mat.shape[1] != dim_h or l_mat.shape[0] % dim_h:
            raise InvalidInputError(f"L of shape {l_mat.shape} is not in B(h; K (x) h) for dim h = {dim_h}")
        if dim_k is not None and l_mat.shape[0] != dim_k * dim_h:
            raise InvalidInputError(f"L of shape {l_mat.shape} does not match dim K = {dim_k}")
        dim_k = l_mat.shape[0] // dim_h
    w = np.eye(dim_k * dim_h, dtype=complex) if W is None else as_matrix(W, "W", square=True)
    if w.shape[0] != dim_k * dim_h:
        raise InvalidInputError(f"W of shape {w.shape} does not act on K (x) h of dimension {dim_k * dim_h}")
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    if hermitian_residual(h) > tol * scale:
        raise InvalidInputError(f"H is not self-adjoint (residual {hermitian_residual(h):.3e})")
    if unitary_residual(w) > tol:
        raise InvalidInputError(f"W is not unitary (residual {unitary_residual(w):.3e})")
    gen = HPGenerator((h + dagger(h)) / 2, l_mat, w, dim_k)
    logger.debug(f"HP generator on dim K = {dim_k}, dim h = {dim_h}, residuals {gen.structure_residuals()}")
    return gen


@dataclass(frozen=True, eq=False)
class PureNoise:
    """Data ``(alpha, z, w)`` of a pure-noise cocycle."""

    alpha: float
    z: np.ndarray
    w: np.ndarray

    @classmethod
    def trivial(cls, dim_k: int) -> "PureNoise":
        return cls(0.0, np.zeros(dim_k, dtype=complex), np.eye(dim_k, dtype=complex))

    @property
    def dim_k(self) -> int:
        return self.z.shape[0]

    def generator(self) -> HPGenerator:
        return pure_noise_generator(self.alpha, self.z, self.w)

    def inverse(self) -> "PureNoise":
        """Data of the inverse cocycle ``u*``."""
        wh = dagger(self.w)
        return PureNoise(-self.alpha, -wh @ self.z, wh)

    def distance(self, other: "PureNoise") -> float:
        return max(
            abs(self.alpha - other.alpha),
            float(np.linalg.norm(self.z - other.z)),
            float(np.linalg.norm(self.w - other.w, 2)),
        )


def pure_noise_generator(alpha: float, z, w=None) -> HPGenerator:
    """Generator on the one-dimensional initial space: ``[[i alpha - ||z||^2 / 2, -<z|w], [|z>, w - I]]``."""
    z = as_vector(z, "z")
    return hp_generator(np.array([[alpha]], dtype=complex), z[:, None], w)


def product_with_noise(gen: HPGenerator, noise: PureNoise) -> HPGenerator:
    """Generator of ``(I (x) u_t) U_t`` for the pure-noise cocycle ``u`` of ``noise``."""
    if noise.dim_k != gen.dim_k:
        raise InvalidInputError(f"Noise on C^{noise.dim_k} does not match generator noise dimension {gen.dim_k}")
    dh = gen.dim_h
    w_amp = np.kron(noise.w, np.eye(dh))
    wz = dagger(noise.w) @ noise.z
    ket = ket_noise(wz, dh)
    h_new = gen.H + 0.5j * (bra_noise(wz, gen.L, gen.dim_k) - dagger(gen.L) @ ket) + noise.alpha * np.eye(dh)
    l_new = w_amp @ gen.L + ket_noise(noise.z, dh)
    return hp_generator(h_new, l_new, w_amp @ gen.W)


def same_flow(gen1: HPGenerator, gen2: HPGenerator, tol: float = DEFAULT_TOL) -> Optional[PureNoise]:
    """Pure-noise data relating two generators of the same flow, or ``None``.

    Returns ``(alpha, z, w)`` with ``W2 = (w (x) I) W1``, ``L2 = (w (x) I) L1 + |z> (x) I`` and
    ``H2 = H1 + (i/2)((<w*z| (x) I) L1 - L1* (|w*z> (x) I)) + alpha I``.
    """
    if (gen1.dim_k, gen1.dim_h) != (gen2.dim_k, gen2.dim_h):
        raise InvalidInputError("Generators act on different spaces")
    dk, dh = gen1.dim_k, gen1.dim_h
    scale = max(1.0, float(np.linalg.norm(gen1.matrix, 2)), float(np.linalg.norm(gen2.matrix, 2)))

    y = gen2.W @ dagger(gen1.W)
    w = np.trace(y.reshape(dk, dh, dk, dh), axis1=1, axis2=3) / dh
    w_amp = np.kron(w, np.eye(dh))
    residual_w = float(np.linalg.norm(y - w_amp, 2))

    diff = gen2.L - w_amp @ gen1.L
    z = np.trace(noise_slices(diff, dk), axis1=1, axis2=2) / dh
    residual_z = float(np.linalg.norm(diff - ket_noise(z, dh), 2))

    wz = dagger(w) @ z
    d = gen2.H - gen1.H - 0.5j * (bra_noise(wz, gen1.L, dk) - dagger(gen1.L) @ ket_noise(wz, dh))
    alpha = np.trace(d) / dh
    residual_alpha = float(np.linalg.norm(d - alpha * np.eye(dh), 2)) + abs(alpha.imag)

    worst = max(residual_w, residual_z, residual_alpha)
    logger.debug(f"same_flow residuals w={residual_w:.3e} z={residual_z:.3e} alpha={residual_alpha:.3e}")
    if worst > tol * scale:
        return None
    return PureNoise(float(alpha.real), z, w)


def _minimality_matrix(L: np.ndarray, dim_k: int) -> np.ndarray:
    dim_h = L.shape[1]
    columns = [s.reshape(-1) for s in noise_slices(as_matrix(L, "L"), dim_k)]
    columns.append(-np.eye(dim_h).reshape(-1))
    return np.column_stack(columns)


def minimality_margin(L, dim_k: int) -> float:
    """Smallest singular value of ``(z, lambda) -> (<z| (x) I) L - lambda I``."""
    m = _minimality_matrix(as_matrix(L, "L"), dim_k)
    if m.shape[0] < m.shape[1]:
        return 0.0
    return float(linalg.svdvals(m)[-1])


def minimality_check(L, dim_k: int, tol: float = RANK_TOL) -> bool:
    """True iff no ``(<z| (x) I) L`` with ``z != 0`` is a scalar multiple of the identity."""
    L = as_matrix(L, "L")
    return minimality_margin(L, dim_k) > tol * max(1.0, float(np.linalg.norm(L, 2)))


def integral_element(integrand: SimpleIntegrand, f: StepFunction, g: StepFunction, u, v, t: float) -> complex:
    """``<u e(f), Lambda(F)_t v e(g)>`` for a deterministic simple integrand."""
    dh = integrand.dim_h
    u, v = as_vector(u, "u", dh), as_vector(v, "v", dh)
    total = 0j
    for left, width in common_cells([integrand.as_step(), f, g], 0.0, t):
        block = block_slice(integrand.value_at(left), dh, f.value_at(left), g.value_at(left))
        total += width * np.vdot(u, block @ v)
    return complex(total * np.exp(f.inner(g)))


def integral_norm_bound(integrand: SimpleIntegrand, g: StepFunction, v, r: float, t: float) -> float:
    """Upper bound for ``||(Lambda(F)_t - Lambda(F)_r) v e(g)||``."""
    dk, dh = integrand.dim_k, integrand.dim_h
    v = as_vector(v, "v", dh)
    drift, diffusion = 0.0, 0.0
    for left, width in common_cells([integrand.as_step(), g], r, t):
        f = integrand.value_at(left)
        lifted = ket_noise(g.value_at(left), dh)
        drift += width * float(np.linalg.norm((f[:dh, :dh] + f[:dh, dh:] @ lifted) @ v))
        diffusion += width * float(np.linalg.norm((f[dh:, :dh] + f[dh:, dh:] @ lifted) @ v) ** 2)
    g_norm = g.l2_norm()
    c_g = g_norm + np.sqrt(1 + g_norm**2)
    return float(np.exp(0.5 * g_norm**2) * (drift + c_g * np.sqrt(diffusion)))


def cocycle_propagator(gen: HPGenerator, f: StepFunction, g: StepFunction, start: float, stop: float) -> np.ndarray:
    """Time-ordered product of ``exp(dt (F^x_y + <x, y>))`` over the cells of [start, stop)."""
    out = np.eye(gen.dim_h, dtype=complex)
    for left, width in common_cells([f, g], start, stop):
        x, y = f.value_at(left), g.value_at(left)
        out = linalg.expm(width * (gen.slice(x, y) + np.vdot(x, y) * np.eye(gen.dim_h))) @ out
    return out


def cocycle_element(gen: HPGenerator, f: StepFunction, g: StepFunction, u, v, t: float) -> complex:
    """``<u e(f), U_t v e(g)>`` for the HP cocycle generated by ``gen``."""
    u, v = as_vector(u, "u", gen.dim_h), as_vector(v, "v", gen.dim_h)
    tail = np.exp(f.inner(g, start=t))
    return complex(np.vdot(u, cocycle_propagator(gen, f, g, 0.0, t) @ v) * tail)


def theta(gen: HPGenerator, a) -> np.ndarray:
    """``F* iota(a) + iota(a) F + F* Delta iota(a) Delta F`` with ``iota(a) = I (x) a``."""
    a = as_matrix(a, "a", square=True)
    ia = np.kron(np.eye(gen.dim_k + 1), a)
    f, fh, delta = gen.matrix, dagger(gen.matrix), gen.delta
    return fh @ ia + ia @ f + fh @ delta @ ia @ delta @ f


def lindbladian(gen: HPGenerator, a) -> np.ndarray:
    """``-i[H, a] - {L*L, a}/2 + L* (I (x) a) L``."""
    dh = gen.dim_h
    return theta(gen, a)[:dh, :dh]


def _superoperator(gen: HPGenerator, x, y) -> np.ndarray:
    """Matrix of ``b -> Theta^x_y(b)`` on row-major vectorised operators."""
    dh = gen.dim_h
    columns = []
    for k in range(dh * dh):
        basis = np.zeros(dh * dh, dtype=complex)
        basis[k] = 1.0
        columns.append(block_slice(theta(gen, basis.reshape(dh, dh)), dh, x, y).reshape(-1))
    return np.column_stack(columns)


def lindblad_superoperator(gen: HPGenerator) -> np.ndarray:
    zero = np.zeros(gen.dim_k, dtype=complex)
    return _superoperator(gen, zero, zero)


def flow_propagator(gen: HPGenerator, f: StepFunction, g: StepFunction, start: float, stop: float) -> np.ndarray:
    """Superoperator ``exp(dt_0 Theta_0) ... exp(dt_{n-1} Theta_{n-1})`` over [start, stop)."""
    dim = gen.dim_h**2
    out = np.eye(dim, dtype=complex)
    for left, width in common_cells([f, g], start, stop):
        x, y = f.value_at(left), g.value_at(left)
        out = out @ linalg.expm(width * (_superoperator(gen, x, y) + np.vdot(x, y) * np.eye(dim)))
    return out


def flow_element(gen: HPGenerator, a, f: StepFunction, g: StepFunction, u, v, t: float) -> complex:
    """``<u e(f), j_t(a) v e(g)>`` for the flow ``j_t(a) = U_t* (a (x) I) U_t``."""
    a = as_matrix(a, "a", square=True)
    u, v = as_vector(u, "u", gen.dim_h), as_vector(v, "v", gen.dim_h)
    phi = (flow_propagator(gen, f, g, 0.0, t) @ a.reshape(-1)).reshape(a.shape)
    return complex(np.vdot(u, phi @ v) * np.exp(f.inner(g, start=t)))


def ito_product_element(
    F: SimpleIntegrand,
    G: SimpleIntegrand,
    X0,
    Y0,
    f: StepFunction,
    g: StepFunction,
    u,
    v,
    t: float,
) -> complex:
    """Right-hand side of the quantum Ito product formula for ``X = X0 + Lambda(F)``, ``Y = Y0 + Lambda(G)``.

    Within a cell the integrand is affine in time, so the midpoint rule is exact.
    """
    dh = F.dim_h
    if (G.dim_h, G.dim_k) != (dh, F.dim_k):
        raise InvalidInputError("Integrands act on different spaces")
    X0, Y0 = as_matrix(X0, "X0", square=True), as_matrix(Y0, "Y0", square=True)
    u, v = as_vector(u, "u", dh), as_vector(v, "v", dh)
    overlap = np.exp(f.inner(g))
    delta = ito_projection(F.dim_k, dh)
    total = np.vdot(X0 @ u, Y0 @ v) * overlap
    for left, width in common_cells([F.as_step(), G.as_step(), f, g], 0.0, t):
        mid = left + width / 2
        x, y = f.value_at(left), g.value_at(left)
        f_val, g_val = F.value_at(left), G.value_at(left)
        g_slice = block_slice(g_val, dh, x, y) @ v
        first = np.vdot(X0 @ u, g_slice) * overlap + np.conj(integral_element(F, g, f, g_slice, u, mid))
        f_slice = block_slice(f_val, dh, y, x) @ u
        second = np.vdot(f_slice, Y0 @ v) * overlap + integral_element(G, f, g, f_slice, v, mid)
        x_col = f_val @ np.kron(np.concatenate([[1.0], x])[:, None], np.eye(dh))
        y_col = g_val @ np.kron(np.concatenate([[1.0], y])[:, None], np.eye(dh))
        third = np.vdot(x_col @ u, delta @ y_col @ v) * overlap
        total += width * (first + second + third)
    return complex(total)


def ito_product_fock(
    F: SimpleIntegrand,
    G: SimpleIntegrand,
    X0,
    Y0,
    f: StepFunction,
    g: StepFunction,
    u,
    v,
    slicing: SlicedFock,
    t: float,
) -> complex:
    """Left-hand side ``<X_t u e(f), Y_t v e(g)>`` computed on a sliced Fock space."""
    dh = F.dim_h
    eye = np.eye(slicing.dim)
    x_t = np.kron(as_matrix(X0, "X0"), eye) + qs_integral_operator(F, slicing, t)
    y_t = np.kron(as_matrix(Y0, "Y0"), eye) + qs_integral_operator(G, slicing, t)
    left = np.kron(as_vector(u, "u", dh), slicing.exponential_vector(f))
    right = np.kron(as_vector(v, "v", dh), slicing.exponential_vector(g))
    return complex(np.vdot(x_t @ left, y_t @ right))


def fock_matrix_element(
    integrand: SimpleIntegrand, slicing: SlicedFock, f: StepFunction, g: StepFunction, u, v, t: float
) -> complex:
    """``<u e(f), Lambda(F)_t v e(g)>`` on a sliced Fock space."""
    dh = integrand.dim_h
    left = np.kron(as_vector(u, "u", dh), slicing.exponential_vector(f))
    right = np.kron(as_vector(v, "v", dh), slicing.exponential_vector(g))
    return complex(np.vdot(left, qs_integral_operator(integrand, slicing, t) @ right))
