"""Seeded random constructors for the verification suites and tests."""

from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from .algebra import AWAmplitude, Conjugation, SymplecticTriple, dagger
from .qsc import HPGenerator, hp_generator
from .quasifree import QFGenerator, qf_generator


def random_complex(rng: np.random.Generator, *shape: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.exp(2j * np.pi * rng.random((1, 1)))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    m = random_complex(rng, dim, dim)
    return scale * (m + dagger(m)) / 2


def random_positive(rng: np.random.Generator, dim: int, spectrum: Optional[Sequence[float]] = None) -> np.ndarray:
    """Random non-negative matrix; the spectrum defaults to uniform draws in [0.1, 1.5]."""
    values = rng.uniform(0.1, 1.5, dim) if spectrum is None else np.asarray(spectrum, dtype=float)
    u = random_unitary(rng, dim)
    return (u * values) @ dagger(u)


def random_triple(rng: np.random.Generator, dim: int, kernel_dim: int = 0) -> SymplecticTriple:
    """Random ``(V, C, P)`` with ``C`` and ``P`` diagonal in a common basis.

    ``kernel_dim`` eigenvalues of ``P`` are exactly zero.
    """
    values = rng.uniform(0.05, 1.5, dim)
    values[:kernel_dim] = 0.0
    u = random_unitary(rng, dim)
    phases = np.exp(2j * np.pi * rng.random(dim))
    p = (u * values) @ dagger(u)
    c_hat = (u * phases) @ u.T
    return SymplecticTriple(random_unitary(rng, dim), Conjugation(c_hat), (p + dagger(p)) / 2)


def random_density(rng: np.random.Generator, spectrum: Sequence[float]) -> np.ndarray:
    """Density matrix with the given spectrum in a random eigenbasis."""
    return random_positive(rng, len(spectrum), spectrum)


def random_amplitude(rng: np.random.Generator, dim: int, high: float = 1.2) -> np.ndarray:
    """Random amplitude ``A >= 0`` with spectrum in [0, high]."""
    return random_positive(rng, dim, rng.uniform(0.0, high, dim))


def random_hp_generator(
    rng: np.random.Generator, dim_k: int, dim_h: int, gaussian: bool = True, scale: float = 1.0
) -> HPGenerator:
    """Random generator ``(H, L, W)``; ``W = I`` unless ``gaussian`` is false."""
    w = None if gaussian else random_unitary(rng, dim_k * dim_h)
    return hp_generator(random_hermitian(rng, dim_h, scale), random_complex(rng, dim_k * dim_h, dim_h, scale=scale), w)


def random_qf_generator(rng: np.random.Generator, sigma: AWAmplitude, dim_h: int, scale: float = 1.0) -> QFGenerator:
    q = random_complex(rng, sigma.dim_k * dim_h, dim_h, scale=scale)
    return qf_generator(random_hermitian(rng, dim_h, scale), q, sigma)
