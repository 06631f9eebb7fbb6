"""Truncated Boson Fock spaces, Weyl operators and sliced-Fock stochastic integrals.

Truncation is by total particle number. Every approximate construction carries the norm of the discarded
tail of the exponential vectors involved, so callers can compare results against a computable tolerance.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from .algebra import AWAmplitude, as_matrix, as_vector, dagger
from .errors import InvalidInputError

logger = logging.getLogger(__name__)

# Breakpoints closer than this are treated as equal
TIME_TOL = 1e-12


def _compositions(total: int, parts: int) -> Iterable[Tuple[int, ...]]:
    """Occupation vectors of the given total, in lexicographically decreasing order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class FockSpace:
    """Symmetric Fock space over C^mode_count truncated at ``cutoff`` particles."""

    mode_count: int
    cutoff: int

    def __post_init__(self):
        if self.mode_count < 1:
            raise InvalidInputError(f"Fock space needs at least one mode, got {self.mode_count}")
        if self.cutoff < 0:
            raise InvalidInputError(f"Cutoff must be non-negative, got {self.cutoff}")

    @cached_property
    def basis(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(occ for total in range(self.cutoff + 1) for occ in _compositions(total, self.mode_count))

    @cached_property
    def index(self) -> dict:
        return {occ: i for i, occ in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vacuum(self) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[0] = 1.0
        return vec

    def one_particle(self, mode: int) -> int:
        """Basis index of the state with a single particle in ``mode``."""
        occ = [0] * self.mode_count
        occ[mode] = 1
        return self.index[tuple(occ)]

    @cached_property
    def annihilators(self) -> Tuple[np.ndarray, ...]:
        ops = []
        for mode in range(self.mode_count):
            op = np.zeros((self.dim, self.dim), dtype=complex)
            for col, occ in enumerate(self.basis):
                if occ[mode]:
                    lowered = occ[:mode] + (occ[mode] - 1,) + occ[mode + 1 :]
                    op[self.index[lowered], col] = np.sqrt(occ[mode])
            ops.append(op)
        return tuple(ops)

    def number_operator(self) -> np.ndarray:
        return np.diag([float(sum(occ)) for occ in self.basis]).astype(complex)

    def second_quantize(self, matrix) -> np.ndarray:
        """Differential second quantization ``sum_ik m_ik a_i^+ a_k`` of a one-particle operator."""
        m = as_matrix(matrix, "one-particle operator", square=True)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, k in itertools.product(range(self.mode_count), repeat=2):
            if m[i, k] != 0:
                out += m[i, k] * dagger(self.annihilators[i]) @ self.annihilators[k]
        return out


def truncation_tail(norm_squared: float, cutoff: int) -> float:
    """Norm of the levels above ``cutoff`` of an exponential vector with ``||x||^2 = norm_squared``."""
    if norm_squared <= 0:
        return 0.0
    # sum_{n > N} s^n / n! = e^s * P(N + 1, s)
    return float(np.sqrt(np.exp(norm_squared) * special.gammainc(cutoff + 1, norm_squared)))


def ladder(space: FockSpace, x) -> Tuple[np.ndarray, np.ndarray]:
    """Creation and annihilation operators ``(a+(x), a-(x))``."""
    x = as_vector(x, "x", space.mode_count)
    minus = sum((np.conj(xi) * op for xi, op in zip(x, space.annihilators)), np.zeros((space.dim, space.dim), dtype=complex))
    return dagger(minus), minus


def exponential_vector(space: FockSpace, x) -> np.ndarray:
    """Components ``prod_i x_i^{n_i} / sqrt(n_i!)`` of ``e(x)`` up to the cutoff."""
    x = as_vector(x, "x", space.mode_count)
    return np.array(
        [np.prod([xi**n * np.exp(-0.5 * special.gammaln(n + 1)) for xi, n in zip(x, occ)]) for occ in space.basis],
        dtype=complex,
    )


def coherent_vector(space: FockSpace, x) -> np.ndarray:
    """Normalised exponential vector ``exp(-||x||^2 / 2) e(x)``."""
    x = as_vector(x, "x", space.mode_count)
    return np.exp(-0.5 * np.vdot(x, x).real) * exponential_vector(space, x)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """A truncated operator together with the tail bound of its construction."""

    matrix: np.ndarray
    tail: float
    tolerance: Optional[float] = None

    @property
    def truncated(self) -> bool:
        return self.tolerance is not None and self.tail > self.tolerance


def weyl(space: FockSpace, x, tol: Optional[float] = None) -> FockOperator:
    """``W(x) = exp(a+(x) - a-(x))``."""
    x = as_vector(x, "x", space.mode_count)
    plus, minus = ladder(space, x)
    tail = truncation_tail(float(np.vdot(x, x).real), space.cutoff)
    if tol is not None and tail > tol:
        logger.warning(f"Weyl operator truncation tail {tail:.3e} exceeds tolerance {tol:.3e} at cutoff {space.cutoff}")
    return FockOperator(linalg.expm(plus - minus), tail, tol)


@dataclass(frozen=True)
class DoubleFockSpace:
    """``Gamma(k) (x) Gamma(conj(k))`` with a common per-factor cutoff."""

    dim_k: int
    cutoff: int

    @cached_property
    def factor(self) -> FockSpace:
        return FockSpace(self.dim_k, self.cutoff)

    @property
    def dim(self) -> int:
        return self.factor.dim**2

    def vacuum(self) -> np.ndarray:
        return np.kron(self.factor.vacuum(), self.factor.vacuum())

    def split(self, sigma: AWAmplitude, x) -> Tuple[np.ndarray, np.ndarray]:
        """The factor arguments ``(Sigma00 x - Sigma01 conj(x), Sigma10 x - Sigma11 conj(x))``."""
        if sigma.dim_k != self.dim_k:
            raise InvalidInputError(f"Amplitude on C^{sigma.dim_k} does not match double Fock space over C^{self.dim_k}")
        image = sigma.sigma_iota(as_vector(x, "x", self.dim_k))
        return image[: self.dim_k], image[self.dim_k :]


def weyl_sigma(sigma: AWAmplitude, space: DoubleFockSpace, x, tol: Optional[float] = None) -> FockOperator:
    """Quasifree Weyl operator ``W(u) (x) W(w)`` with ``(u, w) = Sigma iota(x)``."""
    u, w = space.split(sigma, x)
    first, second = weyl(space.factor, u, tol), weyl(space.factor, w, tol)
    return FockOperator(np.kron(first.matrix, second.matrix), first.tail + second.tail, tol)


def quasifree_ladder(sigma: AWAmplitude, space: DoubleFockSpace, x) -> Tuple[np.ndarray, np.ndarray]:
    """Creation and annihilation operators of the quasifree representation.

    ``a+_Sigma(x) = a+(Sigma00 x, Sigma10 x) + a-(Sigma01 conj(x), Sigma11 conj(x))`` and the annihilator
    is its adjoint. Here ``a(u, w) = a(u) (x) I + I (x) a(w)``.
    """
    x = as_vector(x, "x", space.dim_k)
    eye = np.eye(space.factor.dim)

    def pair(first, second, which):
        a1 = ladder(space.factor, first)[which]
        a2 = ladder(space.factor, second)[which]
        return np.kron(a1, eye) + np.kron(eye, a2)

    s00, s01, s10, s11 = sigma.block(0, 0), sigma.block(0, 1), sigma.block(1, 0), sigma.block(1, 1)
    plus = pair(s00 @ x, s10 @ x, 0) + pair(s01 @ np.conj(x), s11 @ np.conj(x), 1)
    return plus, dagger(plus)


def quasifree_characteristic(sigma: AWAmplitude, space: DoubleFockSpace, x) -> complex:
    """Vacuum expectation of ``W_Sigma(x)``."""
    vac = space.vacuum()
    return complex(np.vdot(vac, weyl_sigma(sigma, space, x).matrix @ vac))


def _merge_points(points: Iterable[float]) -> List[float]:
    merged: List[float] = []
    for point in sorted(points):
        if not merged or point - merged[-1] > TIME_TOL * max(1.0, abs(point)):
            merged.append(float(point))
    return merged


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A compactly supported right-continuous step function on [0, inf) with values in C^dim."""

    durations: Tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        durations = tuple(float(d) for d in self.durations)
        values = np.atleast_2d(np.asarray(self.values, dtype=complex))
        if any(d <= 0 or not np.isfinite(d) for d in durations):
            raise InvalidInputError(f"Segment durations must be positive and finite, got {durations}")
        if values.shape[0] != len(durations):
            raise InvalidInputError(f"{len(durations)} durations but {values.shape[0]} values")
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_segments(cls, segments: Sequence[Tuple[float, Sequence[complex]]], dim: Optional[int] = None) -> "StepFunction":
        if not segments:
            if dim is None:
                raise InvalidInputError("An empty step function needs an explicit dimension")
            return cls.zero(dim)
        durations = [d for d, _ in segments]
        values = np.array([as_vector(v, "segment value", dim) for _, v in segments])
        return cls(tuple(durations), values)

    @classmethod
    def zero(cls, dim: int) -> "StepFunction":
        return cls((), np.zeros((0, dim), dtype=complex))

    @classmethod
    def constant(cls, value, duration: float) -> "StepFunction":
        return cls((duration,), as_vector(value)[None, :])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def breakpoints(self) -> List[float]:
        return [0.0] + list(np.cumsum(self.durations))

    @property
    def support_end(self) -> float:
        return self.breakpoints[-1]

    def value_at(self, t: float) -> np.ndarray:
        """Value on the segment containing ``t`` (segments are closed on the left)."""
        points = self.breakpoints
        for j in range(len(self.durations)):
            if points[j] - TIME_TOL <= t < points[j + 1] - TIME_TOL:
                return self.values[j]
        return np.zeros(self.dim, dtype=complex)

    def inner(self, other: "StepFunction", start: float = 0.0, stop: float = np.inf) -> complex:
        """``int_start^stop <self(s), other(s)> ds``."""
        total = 0j
        for left, width in common_cells([self, other], start, stop):
            total += width * np.vdot(self.value_at(left), other.value_at(left))
        return complex(total)

    def l2_norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def map(self, matrix) -> "StepFunction":
        """Pointwise image under a linear map."""
        m = as_matrix(matrix)
        return StepFunction(self.durations, self.values @ m.T)

    def shifted(self, offset: float) -> "StepFunction":
        """``s -> f(s - offset)``."""
        if offset < 0:
            raise InvalidInputError(f"Shift must be non-negative, got {offset}")
        if offset == 0:
            return self
        return StepFunction((offset,) + self.durations, np.vstack([np.zeros((1, self.dim)), self.values]))

    def concat(self, other: "StepFunction", at: float) -> "StepFunction":
        """``self`` on [0, at) followed by ``other`` shifted to start at ``at``."""
        head = self.restricted(at)
        pad = at - head.support_end
        durations = list(head.durations) + ([pad] if pad > TIME_TOL else []) + list(other.durations)
        values = [*head.values, *([np.zeros(self.dim)] if pad > TIME_TOL else []), *other.values]
        return StepFunction(tuple(durations), np.array(values, dtype=complex).reshape(len(durations), self.dim))

    def restricted(self, stop: float) -> "StepFunction":
        """``self`` times the indicator of [0, stop)."""
        cells = [(left, width) for left, width in common_cells([self], 0.0, stop)]
        if not cells:
            return StepFunction.zero(self.dim)
        return StepFunction(tuple(w for _, w in cells), np.array([self.value_at(left) for left, _ in cells]))

    def resample(self, step: float, count: int) -> "StepFunction":
        """Left-endpoint samples on the grid ``j * step`` for ``j < count``."""
        if step <= 0 or count < 1:
            raise InvalidInputError(f"Resampling needs a positive step and count, got {step}, {count}")
        return StepFunction((step,) * count, np.array([self.value_at(j * step) for j in range(count)]))

    def is_aligned(self, step: float) -> bool:
        """True iff every breakpoint is a multiple of ``step``."""
        return all(abs(p / step - round(p / step)) <= 1e-9 * max(1.0, p / step) for p in self.breakpoints)


def common_cells(functions: Sequence[StepFunction], start: float = 0.0, stop: float = np.inf) -> List[Tuple[float, float]]:
    """Cells ``(left, width)`` of the common refinement of ``functions`` inside [start, stop)."""
    points = [start]
    for fn in functions:
        points.extend(p for p in fn.breakpoints if start < p < stop)
    end = max([fn.support_end for fn in functions] + [start])
    if np.isfinite(stop):
        points.append(stop)
    elif end > start:
        points.append(end)
    points = _merge_points(points)
    return [(left, right - left) for left, right in zip(points, points[1:])]


@dataclass(frozen=True, eq=False)
class SimpleIntegrand:
    """Deterministic piecewise-constant integrand with values in ``B(K^ (x) h)``, ``K^ = C (+) K``."""

    durations: Tuple[float, ...]
    values: np.ndarray
    dim_k: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 2:
            values = values[None, :, :]
        durations = tuple(float(d) for d in self.durations)
        if values.ndim != 3 or values.shape[0] != len(durations) or values.shape[1] != values.shape[2]:
            raise InvalidInputError(f"Integrand values of shape {values.shape} do not match {len(durations)} durations")
        if any(d <= 0 for d in durations):
            raise InvalidInputError(f"Segment durations must be positive, got {durations}")
        if values.shape[1] % (self.dim_k + 1):
            raise InvalidInputError(f"Integrand of size {values.shape[1]} is not on (C + C^{self.dim_k}) (x) h")
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, matrix, duration: float, dim_k: int) -> "SimpleIntegrand":
        return cls((duration,), as_matrix(matrix, square=True)[None, :, :], dim_k)

    @property
    def dim_h(self) -> int:
        return self.values.shape[1] // (self.dim_k + 1)

    @property
    def breakpoints(self) -> List[float]:
        return [0.0] + list(np.cumsum(self.durations))

    def value_at(self, t: float) -> np.ndarray:
        points = self.breakpoints
        for j in range(len(self.durations)):
            if points[j] - TIME_TOL <= t < points[j + 1] - TIME_TOL:
                return self.values[j]
        return np.zeros(self.values.shape[1:], dtype=complex)

    def adjoint(self) -> "SimpleIntegrand":
        return SimpleIntegrand(self.durations, np.conj(self.values.transpose(0, 2, 1)), self.dim_k)

    def as_step(self) -> StepFunction:
        """A scalar step function with the same breakpoints, for building common refinements."""
        return StepFunction(self.durations, np.ones((len(self.durations), 1)))


def block_slice(matrix: np.ndarray, dim_h: int, x, y) -> np.ndarray:
    """``(<x^| (x) I) F (|y^> (x) I)`` with ``x^ = (1, x)``."""
    x_hat = np.concatenate([[1.0], as_vector(x)])
    y_hat = np.concatenate([[1.0], as_vector(y)])
    n = x_hat.shape[0]
    blocks = matrix.reshape(n, dim_h, n, dim_h)
    return np.einsum("i,iajb,j->ab", np.conj(x_hat), blocks, y_hat)


@dataclass(frozen=True, eq=False)
class SlicedFock:
    """Fock space over ``L^2([0, t); K)`` restricted to functions constant on each slot."""

    durations: Tuple[float, ...]
    dim_k: int
    cutoff: int

    def __post_init__(self):
        durations = tuple(float(d) for d in self.durations)
        if not durations or any(d <= 0 for d in durations):
            raise InvalidInputError(f"Slot durations must be positive, got {durations}")
        object.__setattr__(self, "durations", durations)

    @cached_property
    def slot(self) -> FockSpace:
        return FockSpace(self.dim_k, self.cutoff)

    @property
    def slot_count(self) -> int:
        return len(self.durations)

    @property
    def dim(self) -> int:
        return self.slot.dim**self.slot_count

    @property
    def breakpoints(self) -> List[float]:
        return [0.0] + list(np.cumsum(self.durations))

    def embed(self, op: np.ndarray, slot: int) -> np.ndarray:
        """``op`` acting on one slot, identity elsewhere."""
        eye = np.eye(self.slot.dim)
        return reduce(np.kron, [op if j == slot else eye for j in range(self.slot_count)])

    def exponential_vector(self, f: StepFunction) -> np.ndarray:
        """Product of slot vectors ``e(sqrt(dt_j) f_j)`` in the normalised slot modes."""
        points = self.breakpoints
        vectors = [
            exponential_vector(self.slot, np.sqrt(width) * f.value_at(points[j])) for j, width in enumerate(self.durations)
        ]
        return reduce(np.kron, vectors)

    def vacuum(self) -> np.ndarray:
        return reduce(np.kron, [self.slot.vacuum()] * self.slot_count)

    def tail(self, f: StepFunction) -> float:
        """Worst slot truncation tail of ``e(f)``."""
        points = self.breakpoints
        return max(
            truncation_tail(width * float(np.vdot(f.value_at(points[j]), f.value_at(points[j])).real), self.cutoff)
            for j, width in enumerate(self.durations)
        )


def qs_integral_operator(integrand: SimpleIntegrand, slicing: SlicedFock, t: float) -> np.ndarray:
    """Matrix of ``Lambda(F)_t`` on ``h (x) sliced Fock``.

    Time, creation, annihilation and preservation parts are assembled slot by slot. On slot j with
    normalised mode operators ``b_i``, ``A+`` contributes ``L^i sqrt(dt) b_i^+``, ``A-`` contributes
    ``M_i sqrt(dt) b_i`` and ``A^x`` contributes ``N_ik b_i^+ b_k``.
    """
    if integrand.dim_k != slicing.dim_k:
        raise InvalidInputError(f"Integrand noise dimension {integrand.dim_k} differs from slicing {slicing.dim_k}")
    points = slicing.breakpoints
    if not any(abs(p - t) <= TIME_TOL * max(1.0, t) for p in points):
        raise InvalidInputError(f"t = {t} is not a slot boundary of {points}")
    for p in integrand.breakpoints:
        if p < t - TIME_TOL and not any(abs(p - q) <= TIME_TOL * max(1.0, p) for q in points):
            raise InvalidInputError(f"Integrand breakpoint {p} is not a slot boundary")

    dk, dh = integrand.dim_k, integrand.dim_h
    slot_ops = slicing.slot.annihilators
    out = np.zeros((dh * slicing.dim, dh * slicing.dim), dtype=complex)
    for j, width in enumerate(slicing.durations):
        if points[j] >= t - TIME_TOL:
            break
        f = integrand.value_at(points[j]).reshape(dk + 1, dh, dk + 1, dh)
        b = [slicing.embed(op, j) for op in slot_ops]
        bd = [dagger(op) for op in b]
        out += np.kron(width * f[0, :, 0, :], np.eye(slicing.dim))
        for i in range(dk):
            out += np.kron(f[1 + i, :, 0, :], np.sqrt(width) * bd[i])
            out += np.kron(f[0, :, 1 + i, :], np.sqrt(width) * b[i])
            for k in range(dk):
                if np.any(f[1 + i, :, 1 + k, :]):
                    out += np.kron(f[1 + i, :, 1 + k, :], bd[i] @ b[k])
    logger.debug(f"Assembled sliced-Fock integral on {slicing.slot_count} slots, dimension {out.shape[0]}")
    return out
