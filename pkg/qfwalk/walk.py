"""Repeated-interaction quantum random walks and their quasifree limits.

A particle with state ``rho`` on ``p = C^d`` interacts for time ``tau`` with a system ``h``. The GNS space of
``rho`` is realised on Hilbert-Schmidt operators ``HS(p)``, vectorised row-major, and described in the model
basis ``[omega | k | conj(k) | K0]``. Here ``omega = rho^{1/2}``. The space ``k`` is spanned by the blocks
``|e^a_i><e^b_j|`` with ``a > b``, ``conj(k)`` by their adjoints, and ``K0`` is the rest of the diagonal blocks.
Clusters are ordered by decreasing eigenvalue, so ``a > b`` means ``gamma_a < gamma_b``.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property, reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from .algebra import (
    DEFAULT_TOL,
    RANK_TOL,
    AWAmplitude,
    as_matrix,
    as_vector,
    dagger,
    degeneracy_margin,
    degeneracy_space,
    hermitian_residual,
    make_amplitude,
)
from .errors import ClusteringError, HypothesisError, InvalidInputError, NotFaithfulError
from .fock import SlicedFock, StepFunction, block_slice
from .qsc import HPGenerator, cocycle_element, hp_generator
from .quasifree import QFGenerator, qf_generator

logger = logging.getLogger(__name__)

# Relative gap below which eigenvalues of rho share a cluster
CLUSTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class WalkModel:
    """Hamiltonians of one interaction step; ``H_I`` acts on ``p (x) h`` with the particle first."""

    H_S: np.ndarray
    H_P: np.ndarray
    H_I: np.ndarray
    tau: float = 1.0

    @property
    def dim_p(self) -> int:
        return self.H_P.shape[0]

    @property
    def dim_h(self) -> int:
        return self.H_S.shape[0]

    def with_tau(self, tau: float) -> "WalkModel":
        return replace(self, tau=tau)


def walk_model(H_S, H_P, H_I, tau: float = 1.0, tol: float = DEFAULT_TOL) -> WalkModel:
    hs, hp, hi = (as_matrix(m, name, square=True) for m, name in ((H_S, "H_S"), (H_P, "H_P"), (H_I, "H_I")))
    if hi.shape[0] != hs.shape[0] * hp.shape[0]:
        raise InvalidInputError(f"H_I of size {hi.shape[0]} does not act on p (x) h of size {hs.shape[0] * hp.shape[0]}")
    for m, name in ((hs, "H_S"), (hp, "H_P"), (hi, "H_I")):
        if hermitian_residual(m) > tol * max(1.0, float(np.linalg.norm(m, 2))):
            raise InvalidInputError(f"{name} is not self-adjoint (residual {hermitian_residual(m):.3e})")
    if not tau > 0:
        raise InvalidInputError(f"Step size must be positive, got {tau}")
    return WalkModel(hs, hp, hi, float(tau))


def _pi_tilde_standard(a: np.ndarray, dim_p: int) -> np.ndarray:
    """``A (x)`` left multiplication on ``HS(p) (x) h``, in the row-major standard basis."""
    dim_h = a.shape[0] // dim_p
    a4 = a.reshape(dim_p, dim_h, dim_p, dim_h)
    full = np.einsum("imjn,ab->iamjbn", a4, np.eye(dim_p))
    return full.reshape(dim_p * dim_p * dim_h, dim_p * dim_p * dim_h)


@dataclass(frozen=True, eq=False)
class GNSModel:
    """GNS data of a faithful density matrix."""

    rho: np.ndarray
    gammas: Tuple[float, ...]
    eigenvectors: Tuple[np.ndarray, ...]
    labels: Tuple[Tuple[int, int, int, int], ...]
    basis: np.ndarray

    @property
    def dim_p(self) -> int:
        return self.rho.shape[0]

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(vecs.shape[1] for vecs in self.eigenvectors)

    @property
    def dim_k(self) -> int:
        return len(self.labels)

    @property
    def dim_k0(self) -> int:
        return self.dim_p**2 - 1 - 2 * self.dim_k

    @cached_property
    def omega(self) -> np.ndarray:
        return sum(np.sqrt(g) * vecs @ dagger(vecs) for g, vecs in zip(self.gammas, self.eigenvectors))

    @property
    def m_rho(self) -> float:
        """``inf gamma_a / gamma_{a+1}``; infinite for a single cluster."""
        ratios = [a / b for a, b in zip(self.gammas, self.gammas[1:])]
        return min(ratios) if ratios else math.inf

    def projection(self, alpha: int) -> np.ndarray:
        vecs = self.eigenvectors[alpha]
        return vecs @ dagger(vecs)

    def unit(self, alpha: int, i: int, beta: int, j: int) -> np.ndarray:
        """The matrix unit ``|e^alpha_i><e^beta_j|``."""
        return np.outer(self.eigenvectors[alpha][:, i], np.conj(self.eigenvectors[beta][:, j]))

    @property
    def isometry(self) -> np.ndarray:
        """``J: k (+) conj(k) -> HS(p)`` as vectorised columns."""
        return self.basis[:, 1 : 1 + 2 * self.dim_k]

    def eta(self, y) -> np.ndarray:
        """``eta(Y) = Y omega`` in model coordinates."""
        y = as_matrix(y, "Y", square=True)
        return dagger(self.basis) @ (y @ self.omega).reshape(-1)

    def pi(self, x) -> np.ndarray:
        """Left multiplication by ``X`` in model coordinates."""
        x = as_matrix(x, "X", square=True)
        return dagger(self.basis) @ np.kron(x, np.eye(self.dim_p)) @ self.basis

    def pi_tilde(self, a) -> np.ndarray:
        """``pi (x) id`` applied to ``A`` on ``p (x) h``, in model coordinates on ``K^ (x) h``."""
        a = as_matrix(a, "A", square=True)
        if a.shape[0] % self.dim_p:
            raise InvalidInputError(f"Operator of size {a.shape[0]} does not act on p (x) h with dim p = {self.dim_p}")
        bh = np.kron(self.basis, np.eye(a.shape[0] // self.dim_p))
        return dagger(bh) @ _pi_tilde_standard(a, self.dim_p) @ bh

    def partial_expectation(self, a) -> np.ndarray:
        """``rho~(A) = tr_p((rho (x) I) A)``."""
        a = as_matrix(a, "A", square=True)
        dh = a.shape[0] // self.dim_p
        return np.einsum("ij,jmin->mn", self.rho, a.reshape(self.dim_p, dh, self.dim_p, dh))

    def identity_residual(self, x, y, z) -> float:
        """``|<eta(Z), pi(X) eta(Y)> - rho(Z* X Y)|``."""
        x, y, z = (as_matrix(m, square=True) for m in (x, y, z))
        lhs = np.vdot(self.eta(z), self.pi(x) @ self.eta(y))
        return float(abs(lhs - np.trace(self.rho @ dagger(z) @ x @ y)))


def _clusters(values: np.ndarray, tol: float) -> List[List[int]]:
    """Group indices of descending ``values`` whose consecutive relative gap is at most ``tol``."""
    groups = [[0]]
    for idx in range(1, len(values)):
        if values[idx - 1] - values[idx] <= tol * values[idx - 1]:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def gns_build(rho, tol: float = CLUSTER_TOL) -> GNSModel:
    """Cluster the spectrum of ``rho`` and assemble the model basis of its GNS space."""
    rho = as_matrix(rho, "rho", square=True)
    d = rho.shape[0]
    if hermitian_residual(rho) > tol:
        raise InvalidInputError(f"rho is not self-adjoint (residual {hermitian_residual(rho):.3e})")
    rho = (rho + dagger(rho)) / 2
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidInputError(f"rho must have unit trace, got {np.trace(rho).real:.12g}")
    w, vecs = linalg.eigh(rho)
    w, vecs = w[::-1], vecs[:, ::-1]
    if w[-1] < -tol:
        raise InvalidInputError(f"rho is not positive, smallest eigenvalue {w[-1]:.3e}")
    if w[-1] <= tol:
        raise NotFaithfulError(f"rho is singular, smallest eigenvalue {w[-1]:.3e}")

    groups = _clusters(w, tol)
    gammas, eigenvectors = [], []
    for group in groups:
        spread = (w[group[0]] - w[group[-1]]) / w[group[0]]
        if spread > 10 * tol:
            raise ClusteringError(f"Eigenvalues {w[group]} chain into one cluster with relative spread {spread:.3e}")
        if spread > tol:
            logger.warning(f"Cluster {len(gammas)} has relative spread {spread:.3e} above {tol:.1e}")
        gammas.append(float(np.mean(w[group])))
        eigenvectors.append(vecs[:, group])
    logger.debug(f"rho clusters: gammas {gammas}, multiplicities {[len(g) for g in groups]}")

    partial = GNSModel(rho, tuple(gammas), tuple(eigenvectors), (), np.eye(d * d, dtype=complex))
    labels = [
        (alpha, i, beta, j)
        for alpha in range(len(gammas))
        for beta in range(alpha)
        for i in range(eigenvectors[alpha].shape[1])
        for j in range(eigenvectors[beta].shape[1])
    ]
    k_cols = [partial.unit(*lab).reshape(-1) for lab in labels]
    kbar_cols = [dagger(partial.unit(*lab)).reshape(-1) for lab in labels]
    diagonal = np.column_stack(
        [
            partial.unit(alpha, i, alpha, j).reshape(-1)
            for alpha in range(len(gammas))
            for i in range(eigenvectors[alpha].shape[1])
            for j in range(eigenvectors[alpha].shape[1])
        ]
    )
    omega = partial.omega.reshape(-1)
    coefficients = dagger(diagonal) @ omega
    k0 = diagonal @ linalg.null_space(coefficients[None, :])
    columns = [omega[:, None]] + ([np.column_stack(k_cols + kbar_cols)] if labels else []) + [k0]
    basis = np.hstack(columns)
    model = GNSModel(rho, tuple(gammas), tuple(eigenvectors), tuple(labels), basis)
    if model.m_rho < 1 + 1e-6:
        logger.warning(f"m_rho = {model.m_rho:.9g} is close to 1")
    logger.debug(f"GNS space: dim k = {model.dim_k}, dim K0 = {model.dim_k0}, m_rho = {model.m_rho:.6g}")
    return model


def rho_blocks(gns: GNSModel) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonals of ``C(rho)`` and ``S(rho)`` in the ``k`` basis."""
    g = gns.gammas
    s = np.array([np.sqrt(g[a] / (g[b] - g[a])) for a, _, b, _ in gns.labels])
    c = np.array([np.sqrt(g[b] / (g[b] - g[a])) for a, _, b, _ in gns.labels])
    return c, s


def sigma_rho(gns: GNSModel) -> AWAmplitude:
    """The gauge-invariant amplitude ``diag(C(rho), conj(S(rho)))`` with ``A = arcsinh S(rho)``."""
    if gns.dim_k == 0:
        raise InvalidInputError("rho has a single eigenvalue cluster, so k = {0}")
    _, s = rho_blocks(gns)
    return make_amplitude(np.diag(np.arcsinh(s)))


def phi_rho(gns: GNSModel, a) -> Tuple[np.ndarray, np.ndarray]:
    """``(phi(A), phi_bar(A))`` in ``B(h; k (x) h)`` and ``B(h; conj(k) (x) h)``.

    Slot ``(alpha, i, beta, j)`` of ``phi(A)`` is ``sqrt(gamma_b - gamma_a) (<e^a_i| (x) I) A (|e^b_j> (x) I)``.
    The conjugate slot swaps the two eigenvectors.
    """
    a = as_matrix(a, "A", square=True)
    d = gns.dim_p
    if a.shape[0] % d:
        raise InvalidInputError(f"Operator of size {a.shape[0]} does not act on p (x) h with dim p = {d}")
    dh = a.shape[0] // d
    a4 = a.reshape(d, dh, d, dh)

    def slot(left: np.ndarray, right: np.ndarray) -> np.ndarray:
        return np.einsum("i,imjn,j->mn", np.conj(left), a4, right)

    q_hat, q_bar = [], []
    for alpha, i, beta, j in gns.labels:
        weight = np.sqrt(gns.gammas[beta] - gns.gammas[alpha])
        e_a, e_b = gns.eigenvectors[alpha][:, i], gns.eigenvectors[beta][:, j]
        q_hat.append(weight * slot(e_a, e_b))
        q_bar.append(weight * slot(e_b, e_a))
    empty = np.zeros((0, dh), dtype=complex)
    return (np.vstack(q_hat) if q_hat else empty), (np.vstack(q_bar) if q_bar else empty)


def scaling_map(x: np.ndarray, dim_h: int, tau: float) -> np.ndarray:
    """``s_tau``: scale the ``00`` block by ``1/tau``, the off-diagonal blocks by ``tau^{-1/2}``."""
    out = np.array(x, dtype=complex)
    root = 1.0 / np.sqrt(tau)
    out[:dim_h, :dim_h] /= tau
    out[:dim_h, dim_h:] *= root
    out[dim_h:, :dim_h] *= root
    return out


@dataclass(frozen=True, eq=False)
class InteractionStep:
    unitary: np.ndarray
    scaled_residual: np.ndarray


def total_hamiltonian(model: WalkModel, gns: Optional[GNSModel] = None) -> np.ndarray:
    """``I (x) H_S + H_P (x) I + tau^{-1/2} H_I`` on ``K^ (x) h``.

    Without GNS data the particle space itself is ``K^`` and its first basis vector is the vacuum.
    """
    dh = model.dim_h
    coupling = model.H_I / np.sqrt(model.tau)
    if gns is None:
        return np.kron(np.eye(model.dim_p), model.H_S) + np.kron(model.H_P, np.eye(dh)) + coupling
    if gns.dim_p != model.dim_p:
        raise InvalidInputError(f"GNS data for dim p = {gns.dim_p} does not match the model's {model.dim_p}")
    hat = gns.dim_p**2
    return np.kron(np.eye(hat), model.H_S) + gns.pi_tilde(np.kron(model.H_P, np.eye(dh))) + gns.pi_tilde(coupling)


def interaction_generator(model: WalkModel, gns: Optional[GNSModel] = None) -> InteractionStep:
    """The step unitary ``exp(i tau H_T(tau))`` and ``s_tau`` of its deviation from the identity."""
    h_t = total_hamiltonian(model, gns)
    unitary = linalg.expm(1j * model.tau * h_t)
    scaled = scaling_map(unitary - np.eye(unitary.shape[0]), model.dim_h, model.tau)
    return InteractionStep(unitary, scaled)


def _slot_count(f: StepFunction, g: StepFunction, tau: float) -> int:
    return int(math.ceil(max(f.support_end, g.support_end) / tau - 1e-9))


def _check_aligned(f: StepFunction, g: StepFunction, tau: float):
    for fn, name in ((f, "f"), (g, "g")):
        if not fn.is_aligned(tau):
            raise InvalidInputError(f"Test function {name} with breakpoints {fn.breakpoints} is not aligned to tau = {tau}")


def walk_propagator(G, f: StepFunction, g: StepFunction, n: int, tau: float, dim_h: int) -> np.ndarray:
    """``A_{n-1} ... A_0`` with ``A_j = (<(1, sqrt(tau) f_j)| (x) I) G (|(1, sqrt(tau) g_j)> (x) I)``."""
    G = as_matrix(G, "G", square=True)
    _check_aligned(f, g, tau)
    root = np.sqrt(tau)
    out = np.eye(dim_h, dtype=complex)
    for j in range(n):
        out = block_slice(G, dim_h, root * f.value_at(j * tau), root * g.value_at(j * tau)) @ out
    return out


def walk_element(G, f: StepFunction, g: StepFunction, u, v, n: int, tau: float, dim_h: int) -> complex:
    """``<u e(f), (I (x) D) U_n (I (x) D*) v e(g)>`` for slot-aligned test functions."""
    u, v = as_vector(u, "u", dim_h), as_vector(v, "v", dim_h)
    propagated = np.vdot(u, walk_propagator(G, f, g, n, tau, dim_h) @ v)
    tail = 1.0 + 0j
    for j in range(n, _slot_count(f, g, tau)):
        tail *= 1.0 + tau * np.vdot(f.value_at(j * tau), g.value_at(j * tau))
    return complex(propagated * tail)


def toy_exponential(f: StepFunction, tau: float, slot_count: int) -> np.ndarray:
    """``(x)_j (1, sqrt(tau) f_j)`` on ``K^^(x) slot_count``."""
    root = np.sqrt(tau)
    return reduce(np.kron, [np.concatenate([[1.0], root * f.value_at(j * tau)]) for j in range(slot_count)])


def toy_embedding(slicing: SlicedFock) -> np.ndarray:
    """Matrix of ``D``: slot basis vector ``e_0`` goes to the slot vacuum and ``e_i`` to one particle in mode i."""
    slot = slicing.slot
    local = np.zeros((slot.dim, slicing.dim_k + 1), dtype=complex)
    local[0, 0] = 1.0
    for mode in range(slicing.dim_k):
        local[slot.one_particle(mode), mode + 1] = 1.0
    return reduce(np.kron, [local] * slicing.slot_count)


def dense_walk_operator(G, dim_h: int, slot_count: int) -> np.ndarray:
    """``U_n = G_{n-1} ... G_0`` on ``h (x) K^^(x) n``, with ``G_j`` acting on ``h`` and slot j."""
    G = as_matrix(G, "G", square=True)
    hat = G.shape[0] // dim_h
    g_h = G.reshape(hat, dim_h, hat, dim_h).transpose(1, 0, 3, 2).reshape(dim_h * hat, dim_h * hat)
    total = dim_h * hat**slot_count
    state = np.eye(total, dtype=complex).reshape((dim_h,) + (hat,) * slot_count + (total,))
    for j in range(slot_count):
        moved = np.moveaxis(state, j + 1, 1)
        shape = moved.shape
        moved = (g_h @ moved.reshape(dim_h * hat, -1)).reshape(shape)
        state = np.moveaxis(moved, 1, j + 1)
    return state.reshape(total, total)


@dataclass(frozen=True, eq=False)
class LimitGenerator:
    """Limit of the scaled walk generators and its quasifree structure."""

    extended: HPGenerator
    reduced: Optional[HPGenerator]
    quasifree: Optional[QFGenerator]
    dilation_residual: float
    orthogonality: float
    gram_residual: float
    degeneracy: np.ndarray
    independence_margin: float
    q_independence_margin: float

    @property
    def unique(self) -> bool:
        """True iff ``k^{L1} = {0}``, so ``Sigma(rho)`` is the only admissible amplitude."""
        return self.quasifree is not None and self.degeneracy.shape[1] == 0


def check_off_diagonal(model: WalkModel, gns: GNSModel, tol: float = DEFAULT_TOL):
    """Raise unless ``(P_alpha (x) I) H_I (P_alpha (x) I) = 0`` for every cluster."""
    eye = np.eye(model.dim_h)
    scale = max(1.0, float(np.linalg.norm(model.H_I, 2)))
    for alpha in range(len(gns.gammas)):
        proj = np.kron(gns.projection(alpha), eye)
        block = float(np.linalg.norm(proj @ model.H_I @ proj, 2))
        if block > tol * scale:
            logger.error(f"H_I has a diagonal block of norm {block:.3e} on cluster {alpha}")
            raise HypothesisError(f"H_I is not off-diagonal on eigenspace {alpha} (block norm {block:.3e})", alpha=alpha)


def limit_generator(model: WalkModel, gns: GNSModel, tol: float = DEFAULT_TOL) -> LimitGenerator:
    """Limit generator ``F~ = F (+) 0`` of the walk and its ``Sigma(rho)``-quasifree generator."""
    check_off_diagonal(model, gns, tol)
    dh, nk = model.dim_h, gns.dim_k
    column = 1j * gns.pi_tilde(model.H_I)[:, :dh]
    l_full = column[dh:]
    outside = np.concatenate([column[:dh], l_full[2 * nk * dh :]])
    orthogonality = float(np.linalg.norm(outside, 2)) if outside.size else 0.0
    l_mat = l_full[: 2 * nk * dh]
    h = model.H_S + np.trace(gns.rho @ model.H_P).real * np.eye(dh)
    gram = gns.partial_expectation(model.H_I @ model.H_I)
    l_ext = np.vstack([l_mat, np.zeros((gns.dim_k0 * dh, dh))])
    extended = hp_generator(h, l_ext, dim_k=gns.dim_p**2 - 1)
    gram_residual = float(np.linalg.norm(dagger(l_mat) @ l_mat - gram, 2))
    if nk == 0:
        logger.debug("Single eigenvalue cluster: the limit has no quasifree part")
        return LimitGenerator(extended, None, None, 0.0, orthogonality, gram_residual, np.zeros((0, 0)), 0.0, 0.0)

    q_hat, _ = phi_rho(gns, model.H_I)
    quasifree = qf_generator(h, 1j * q_hat, sigma_rho(gns))
    reduced = hp_generator(h, l_mat)
    dilation = float(np.linalg.norm(l_mat - quasifree.L, 2))
    l1 = l_mat[: nk * dh]
    basis = degeneracy_space(l1, nk, RANK_TOL)
    result = LimitGenerator(
        extended,
        reduced,
        quasifree,
        dilation,
        orthogonality,
        gram_residual,
        basis,
        degeneracy_margin(l1, nk),
        degeneracy_margin(quasifree.Q, nk),
    )
    logger.debug(f"Limit generator: dilation residual {dilation:.3e}, dim k^L1 = {basis.shape[1]}")
    return result


def vector_state_limit(model: WalkModel, tol: float = DEFAULT_TOL) -> HPGenerator:
    """Limit generator when the particle state is the vector state of the first basis vector."""
    dh = model.dim_h
    column = model.H_I[:, :dh]
    diagonal = float(np.linalg.norm(column[:dh], 2))
    if diagonal > tol * max(1.0, float(np.linalg.norm(model.H_I, 2))):
        logger.error(f"<omega|H_I|omega> has norm {diagonal:.3e}")
        raise HypothesisError(f"<omega|H_I|omega> does not vanish (norm {diagonal:.3e})", alpha=0)
    h = model.H_S + model.H_P[0, 0].real * np.eye(dh)
    return hp_generator(h, 1j * column[dh:])


@dataclass(frozen=True, eq=False)
class ConvergenceStudy:
    frame: pd.DataFrame
    slope: float
    monotone: bool


def _walk_error(model: WalkModel, gns: GNSModel, f, g, u, v, T: float, n: int, reference: complex) -> float:
    tau = T / n
    step = interaction_generator(model.with_tau(tau), gns)
    # slots past T carry the noise-only factor prod (1 + tau <f_j, g_j>)
    slots = max(n, _slot_count(f, g, tau))
    value = walk_element(step.unitary, f.resample(tau, slots), g.resample(tau, slots), u, v, n, tau, model.dim_h)
    logger.debug(f"n = {n}: walk element {value:.12g}")
    return abs(value - reference)


def convergence_study(
    model: WalkModel,
    gns: GNSModel,
    f: StepFunction,
    g: StepFunction,
    u,
    v,
    T: float,
    n_list: Sequence[int],
    workers: Optional[int] = None,
) -> ConvergenceStudy:
    """Errors ``|walk_element - cocycle_element|`` of the walk against its limit cocycle at time ``T``."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or not n_list or n_list[0] < 1:
        raise InvalidInputError(f"nList must be strictly increasing positive integers, got {n_list}")
    limit = limit_generator(model, gns)
    reference = cocycle_element(limit.extended, f, g, u, v, T)
    logger.info(f"Convergence study over n = {n_list}, reference {reference:.12g}")

    with ThreadPoolExecutor(max_workers=workers) as pool:
        errors = list(pool.map(lambda n: _walk_error(model, gns, f, g, u, v, T, n, reference), n_list))

    ratios = [np.nan] + [prev / cur if cur > 0 else np.inf for prev, cur in zip(errors, errors[1:])]
    frame = pd.DataFrame({"n": n_list, "tau": [T / n for n in n_list], "abs_error": errors, "ratio": ratios})
    positive = np.array(errors) > 0
    slope = math.nan
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(frame["tau"][positive]), np.log(frame["abs_error"][positive]), 1)[0])
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    return ConvergenceStudy(frame, slope, monotone)
