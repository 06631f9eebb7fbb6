"""Dense complex linear algebra for the quasifree workbench.

Conjugate spaces are represented by the same coordinates as the original space, with entrywise
conjugation in the standard basis playing the role of the canonical anti-unitary map. A real-linear map
``x -> L x + A conj(x)`` is stored as its two matrices ``(L, A)``. An anti-linear operator is stored by
the matrix of ``A`` in that formula.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import InvalidInputError, InvalidTripleError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
RANK_TOL = 1e-10
# Tolerance for validating constructor arguments, relative to the operator scale
_CHECK_TOL = 1e-8


def as_matrix(value, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Coerce ``value`` to a finite complex 2d array."""
    arr = np.asarray(value, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2d matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def as_vector(value, name: str = "vector", dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``value`` to a finite complex 1d array, optionally of a fixed length."""
    arr = np.asarray(value, dtype=complex).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise InvalidInputError(f"{name} must have length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def hermitian_residual(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - dagger(m), 2)) if m.size else 0.0


def unitary_residual(m: np.ndarray) -> float:
    if not m.size:
        return 0.0
    return float(np.linalg.norm(dagger(m) @ m - np.eye(m.shape[1]), 2))


def hermitian_function(m: np.ndarray, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``func`` to the spectrum of the Hermitian part of ``m``."""
    w, v = linalg.eigh((m + dagger(m)) / 2)
    return (v * func(w)) @ dagger(v)


def _scale(*mats: np.ndarray) -> float:
    return max([1.0] + [float(np.linalg.norm(m, 2)) for m in mats if m.size])


def _real_basis(dim: int) -> np.ndarray:
    """The real basis ``{e_j, i e_j}`` of C^dim as columns."""
    eye = np.eye(dim, dtype=complex)
    return np.hstack([eye, 1j * eye])


def _im_gram_residual(images: np.ndarray, basis: np.ndarray) -> float:
    gram = np.imag(dagger(images) @ images)
    gram0 = np.imag(dagger(basis) @ basis)
    return float(np.max(np.abs(gram - gram0))) if gram.size else 0.0


@dataclass(frozen=True, eq=False)
class RealLinearOp:
    """A real-linear map ``x -> linear @ x + conj_linear @ conj(x)`` on C^d."""

    linear: np.ndarray
    conj_linear: np.ndarray

    def __post_init__(self):
        lin = as_matrix(self.linear, "linear part", square=True)
        conj = as_matrix(self.conj_linear, "conjugate-linear part", square=True)
        if lin.shape != conj.shape:
            raise InvalidInputError(f"Linear part {lin.shape} and conjugate-linear part {conj.shape} differ in shape")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "conj_linear", conj)

    @classmethod
    def identity(cls, dim: int) -> "RealLinearOp":
        return cls(np.eye(dim, dtype=complex), np.zeros((dim, dim), dtype=complex))

    @classmethod
    def from_linear(cls, m) -> "RealLinearOp":
        m = as_matrix(m, square=True)
        return cls(m, np.zeros_like(m))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, x) -> np.ndarray:
        x = as_vector(x, dim=self.dim)
        return self.linear @ x + self.conj_linear @ np.conj(x)

    def compose(self, other: "RealLinearOp") -> "RealLinearOp":
        """Return ``self o other``."""
        if other.dim != self.dim:
            raise InvalidInputError(f"Cannot compose maps on C^{self.dim} and C^{other.dim}")
        lin = self.linear @ other.linear + self.conj_linear @ np.conj(other.conj_linear)
        conj = self.linear @ other.conj_linear + self.conj_linear @ np.conj(other.linear)
        return RealLinearOp(lin, conj)

    __matmul__ = compose

    def adjoint(self) -> "RealLinearOp":
        """Adjoint for the real inner product ``Re<x, y>``."""
        return RealLinearOp(dagger(self.linear), self.conj_linear.T)

    def symplectic_inverse(self) -> "RealLinearOp":
        """``(L*, -A*)``; equal to the inverse exactly when the map is symplectic."""
        return RealLinearOp(dagger(self.linear), -self.conj_linear.T)

    def realify(self) -> np.ndarray:
        """The 2d x 2d real matrix acting on ``(Re x, Im x)``."""
        lin, conj = self.linear, self.conj_linear
        top = np.hstack([lin.real + conj.real, -lin.imag + conj.imag])
        bottom = np.hstack([lin.imag + conj.imag, lin.real - conj.real])
        return np.vstack([top, bottom])

    def norm(self) -> float:
        """Operator norm as a real-linear map."""
        return float(np.linalg.norm(self.realify(), 2))

    def distance(self, other: "RealLinearOp") -> float:
        return RealLinearOp(self.linear - other.linear, self.conj_linear - other.conj_linear).norm()


def split_parts(real_matrix) -> RealLinearOp:
    """Split a real-linear map given on the realified space into linear and conjugate-linear parts."""
    m = np.asarray(real_matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise InvalidInputError(f"Expected a 2d x 2d real matrix, got shape {m.shape}")
    if np.iscomplexobj(m) and np.any(np.abs(np.imag(m)) > 0):
        raise InvalidInputError("Realified matrix must have real entries")
    m = np.real(m).astype(float)
    d = m.shape[0] // 2
    # images of e_j and i e_j
    c = m[:d, :d] + 1j * m[d:, :d]
    c_prime = m[:d, d:] + 1j * m[d:, d:]
    return RealLinearOp((c - 1j * c_prime) / 2, (c + 1j * c_prime) / 2)


def symplectic_residual(z: RealLinearOp) -> float:
    basis = _real_basis(z.dim)
    images = z.linear @ basis + z.conj_linear @ np.conj(basis)
    return _im_gram_residual(images, basis)


def is_symplectic(z: RealLinearOp, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``z`` preserves ``Im<x, y>`` to within ``tol`` on the real basis."""
    return symplectic_residual(z) <= tol


@dataclass(frozen=True, eq=False)
class Conjugation:
    """A conjugation ``x -> matrix @ conj(x)``; the matrix is unitary and symmetric."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "conjugation", square=True)
        if unitary_residual(m) > _CHECK_TOL:
            raise InvalidInputError(f"Conjugation matrix is not unitary (residual {unitary_residual(m):.3e})")
        asym = float(np.linalg.norm(m - m.T, 2))
        if asym > _CHECK_TOL:
            raise InvalidInputError(f"Conjugation matrix is not symmetric (residual {asym:.3e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def standard(cls, dim: int) -> "Conjugation":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.conj(as_vector(x, dim=self.dim))

    def distance_on(self, other: "Conjugation", subspace: np.ndarray) -> float:
        """Largest disagreement of two conjugations on the columns of ``subspace``."""
        if subspace.size == 0:
            return 0.0
        return float(np.linalg.norm((self.matrix - other.matrix) @ np.conj(subspace), 2))


@dataclass(frozen=True, eq=False)
class SymplecticTriple:
    """Data ``(V, C, P)`` of the symplectic operator ``V (cosh P - C sinh P)``."""

    V: np.ndarray
    C: Conjugation
    P: np.ndarray

    def __post_init__(self):
        v = as_matrix(self.V, "V", square=True)
        p = as_matrix(self.P, "P", square=True)
        if v.shape != p.shape or self.C.dim != v.shape[0]:
            raise InvalidTripleError(f"Triple dimensions disagree: V {v.shape}, P {p.shape}, C {self.C.dim}")
        if unitary_residual(v) > _CHECK_TOL:
            raise InvalidTripleError(f"V is not unitary (residual {unitary_residual(v):.3e})")
        scale = _scale(p)
        if hermitian_residual(p) > _CHECK_TOL * scale:
            raise InvalidTripleError(f"P is not self-adjoint (residual {hermitian_residual(p):.3e})")
        if p.size and linalg.eigvalsh((p + dagger(p)) / 2)[0] < -_CHECK_TOL * scale:
            raise InvalidTripleError("P is not non-negative")
        commutator = float(np.linalg.norm(self.C.matrix @ np.conj(p) - p @ self.C.matrix, 2))
        if commutator > _CHECK_TOL * scale:
            raise InvalidTripleError(f"C and P do not commute (residual {commutator:.3e})")
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "P", p)

    @classmethod
    def identity(cls, dim: int) -> "SymplecticTriple":
        return cls(np.eye(dim, dtype=complex), Conjugation.standard(dim), np.zeros((dim, dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    @property
    def cosh_p(self) -> np.ndarray:
        return hermitian_function(self.P, np.cosh)

    @property
    def sinh_p(self) -> np.ndarray:
        return hermitian_function(self.P, np.sinh)

    def range_basis(self, tol: float = RANK_TOL) -> np.ndarray:
        """Orthonormal basis of Ran P."""
        w, v = linalg.eigh((self.P + dagger(self.P)) / 2)
        return v[:, w > tol * max(1.0, float(np.max(np.abs(w), initial=0.0)))]


def build_symplectic(triple: SymplecticTriple) -> RealLinearOp:
    """``B = V cosh P - V C sinh P``."""
    return RealLinearOp(triple.V @ triple.cosh_p, -triple.V @ triple.C.matrix @ np.conj(triple.sinh_p))


def build_symplectic_inverse(triple: SymplecticTriple) -> RealLinearOp:
    """``B^-1 = (cosh P + C sinh P) V*``."""
    vh = dagger(triple.V)
    return RealLinearOp(triple.cosh_p @ vh, triple.C.matrix @ np.conj(triple.sinh_p) @ triple.V.T)


def decompose_symplectic(b: RealLinearOp, tol: float = DEFAULT_TOL) -> SymplecticTriple:
    """Recover ``(V, C, P)`` from a symplectic automorphism.

    Polar decompositions ``L = V|L|`` and ``A = W|A|`` give ``V`` and ``W``. ``P`` is read off from
    ``|A| = sinh P``, which shares its spectral projections with ``|L| = cosh P``. On ``ker|A|`` the
    conjugation is fixed as entrywise conjugation in the computed null-space basis; off the kernel it is
    ``-V* W``. Only the action on Ran P is determined by ``b``.
    """
    scale = _scale(b.linear, b.conj_linear) ** 2
    residual = symplectic_residual(b)
    if residual > tol * scale:
        raise InvalidInputError(f"Operator is not symplectic (residual {residual:.3e})")
    smallest = linalg.svdvals(b.realify())[-1]
    if smallest <= tol:
        raise InvalidInputError(f"Operator is singular (smallest singular value {smallest:.3e})")

    v, _ = linalg.polar(b.linear)
    w_mat, abs_a_mat = linalg.polar(b.conj_linear)
    # modulus of the anti-linear part as a linear operator
    abs_a = np.conj(abs_a_mat)
    w, eig = linalg.eigh((abs_a + dagger(abs_a)) / 2)
    w = np.clip(w, 0.0, None)
    p = (eig * np.arcsinh(w)) @ dagger(eig)

    kernel = eig[:, w <= RANK_TOL * max(1.0, float(w[-1]) if w.size else 0.0)]
    perp = np.eye(b.dim, dtype=complex) - kernel @ dagger(kernel)
    c_hat = -(kernel @ kernel.T + dagger(v) @ w_mat @ np.conj(perp))
    logger.debug(f"Decomposed symplectic operator on C^{b.dim}: kernel of |A| has dimension {kernel.shape[1]}")
    try:
        return SymplecticTriple(v, Conjugation(c_hat), p)
    except InvalidInputError as exc:
        raise InvalidInputError(f"Decomposition produced an invalid conjugation: {exc}") from exc


class PartialConjugate(NamedTuple):
    matrix: np.ndarray
    norm: float


def partial_conjugate(y, dims: Tuple[int, int, int]) -> PartialConjugate:
    """Partial conjugate of ``Y`` in ``B(h1; h (x) h2)`` for ``dims = (dim h, dim h1, dim h2)``.

    The result lies in ``B(h2; conj(h) (x) h1)`` and satisfies ``(<conj(y)| (x) I) Y^c = Y* (|y> (x) I)``.
    Its operator norm is ``c(Y)``.
    """
    y = as_matrix(y, "Y")
    dh, dh1, dh2 = dims
    if min(dims) < 1 or y.shape != (dh * dh2, dh1):
        raise InvalidInputError(f"Y of shape {y.shape} does not match dims {dims}")
    yc = np.conj(y.reshape(dh, dh2, dh1).transpose(0, 2, 1)).reshape(dh * dh1, dh2)
    return PartialConjugate(yc, float(np.linalg.norm(yc, 2)))


def noise_conjugate(y: np.ndarray, dim_k: int) -> np.ndarray:
    """Partial conjugate of ``Y`` in ``B(h; k (x) h)``."""
    dim_h = y.shape[1]
    return partial_conjugate(y, (dim_k, dim_h, dim_h)).matrix


def _slice_matrix(x: np.ndarray, dim_k: int) -> np.ndarray:
    """Columns ``vec((<e_i| (x) I) X)``."""
    x = as_matrix(x, "X")
    if x.shape[0] % dim_k:
        raise InvalidInputError(f"X with {x.shape[0]} rows is not in B(h; k (x) h) for dim k = {dim_k}")
    dim_h = x.shape[0] // dim_k
    return x.reshape(dim_k, dim_h * x.shape[1]).T


def degeneracy_space(x, dim_k: int, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{z : (<z| (x) I) X = 0}``."""
    slices = _slice_matrix(x, dim_k)
    # the map z -> sum conj(z_i) X_i is anti-linear in z
    return np.conj(linalg.null_space(slices, rcond=tol))


def degeneracy_margin(x, dim_k: int) -> float:
    """Smallest singular value of ``z -> (<z| (x) I) X``."""
    slices = _slice_matrix(x, dim_k)
    if slices.shape[0] < dim_k:
        return 0.0
    return float(linalg.svdvals(slices)[-1])


def doubling(x) -> np.ndarray:
    """The doubling map ``x -> (x, -conj(x))``."""
    x = as_vector(x)
    return np.concatenate([x, -np.conj(x)])


def squeezing_matrix(b: RealLinearOp) -> np.ndarray:
    """``M_B`` on k (+) conj(k), satisfying ``M_B iota(x) = iota(B x)``."""
    lin, conj = b.linear, b.conj_linear
    return np.block([[lin, -conj], [-np.conj(conj), np.conj(lin)]])


@dataclass(frozen=True, eq=False)
class AWAmplitude:
    """An Araki-Woods amplitude ``Sigma_{A,B} = Sigma_A M_B`` on k (+) conj(k)."""

    amplitude: np.ndarray
    squeeze: Optional[SymplecticTriple] = None
    blocks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = as_matrix(self.amplitude, "A", square=True)
        scale = _scale(a)
        if hermitian_residual(a) > _CHECK_TOL * scale:
            raise InvalidInputError(f"A is not self-adjoint (residual {hermitian_residual(a):.3e})")
        if a.size and linalg.eigvalsh((a + dagger(a)) / 2)[0] < -_CHECK_TOL * scale:
            raise InvalidInputError("A is not non-negative")
        if self.squeeze is not None and self.squeeze.dim != a.shape[0]:
            raise InvalidInputError(f"Squeeze acts on C^{self.squeeze.dim} but A acts on C^{a.shape[0]}")
        a = (a + dagger(a)) / 2
        object.__setattr__(self, "amplitude", a)
        gauge = np.block(
            [
                [hermitian_function(a, np.cosh), np.zeros_like(a)],
                [np.zeros_like(a), np.conj(hermitian_function(a, np.sinh))],
            ]
        )
        if self.squeeze is not None:
            gauge = gauge @ squeezing_matrix(build_symplectic(self.squeeze))
        object.__setattr__(self, "blocks", gauge)

    @property
    def dim_k(self) -> int:
        return self.amplitude.shape[0]

    @property
    def gauge_invariant(self) -> bool:
        return self.squeeze is None

    def block(self, row: int, col: int) -> np.ndarray:
        d = self.dim_k
        return self.blocks[row * d : (row + 1) * d, col * d : (col + 1) * d]

    @property
    def cosh_a(self) -> np.ndarray:
        return hermitian_function(self.amplitude, np.cosh)

    @property
    def sinh_a(self) -> np.ndarray:
        return hermitian_function(self.amplitude, np.sinh)

    @property
    def tanh_a(self) -> np.ndarray:
        return hermitian_function(self.amplitude, np.tanh)

    def sigma_iota(self, x) -> np.ndarray:
        """``Sigma iota(x)``."""
        return self.blocks @ doubling(as_vector(x, dim=self.dim_k))

    def squeezed(self, triple: SymplecticTriple) -> "AWAmplitude":
        """``Sigma M_B'`` for the symplectic operator B' of ``triple``."""
        total = build_symplectic(triple)
        if self.squeeze is not None:
            total = build_symplectic(self.squeeze) @ total
        return AWAmplitude(self.amplitude, decompose_symplectic(total))


def make_amplitude(a, squeeze: Optional[SymplecticTriple] = None) -> AWAmplitude:
    return AWAmplitude(as_matrix(a, "A", square=True), squeeze)


def amplitude_symplectic_residual(sigma: AWAmplitude) -> float:
    """How far ``Sigma o iota`` is from preserving ``Im<x, y>``."""
    basis = _real_basis(sigma.dim_k)
    images = np.column_stack([sigma.sigma_iota(col) for col in basis.T])
    return _im_gram_residual(images, basis)


def covariance(sigma: AWAmplitude, x) -> float:
    """``||Sigma iota(x)||^2``."""
    return float(np.linalg.norm(sigma.sigma_iota(x)) ** 2)


def covariance_to_amplitude(r, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve ``cosh(2A) = R`` for ``A >= 0``."""
    r = as_matrix(r, "R", square=True)
    scale = _scale(r)
    if hermitian_residual(r) > tol * scale:
        raise InvalidInputError(f"R is not self-adjoint (residual {hermitian_residual(r):.3e})")
    w = linalg.eigvalsh((r + dagger(r)) / 2)
    if w.size and w[0] < 1 - tol * scale:
        raise InvalidInputError(f"R must dominate the identity, smallest eigenvalue {w[0]:.6g}")
    return hermitian_function(r, lambda ev: 0.5 * np.arccosh(np.maximum(ev, 1.0)))
