"""Experiment configuration: JSON parsing, validation and model presets.

Complex numbers are written as ``[re, im]`` pairs, matrices as nested row-major lists. Test functions are lists
of ``[duration, vector]`` segments.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .algebra import DEFAULT_TOL, hermitian_residual
from .errors import ConfigError
from .fock import StepFunction
from .walk import WalkModel

logger = logging.getLogger(__name__)

MODES = ("verify", "converge", "dilate", "uniqueness")
SUITES = ("all", "algebra", "fock", "qsc", "quasifree", "walk")

DEFAULT_CUTOFF = 24
DEFAULT_SEED = 20240101
DEFAULT_N_LIST = (16, 64, 256, 1024, 4096)
DEFAULT_T = 1.0


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A validated experiment description."""

    mode: str
    model: WalkModel
    rho: np.ndarray
    n_list: Tuple[int, ...] = DEFAULT_N_LIST
    T: float = DEFAULT_T
    f: Optional[StepFunction] = None
    g: Optional[StepFunction] = None
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    tol: float = DEFAULT_TOL
    cutoff: int = DEFAULT_CUTOFF
    seed: int = DEFAULT_SEED
    workers: Optional[int] = None
    output: Optional[str] = None
    suite: str = "all"
    preset: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        _check_options(self.mode, self.suite, self.tol, self.cutoff, self.seed, self.workers)

    @property
    def taus(self) -> Tuple[float, ...]:
        return tuple(self.T / n for n in self.n_list)

    @property
    def noise_dim(self) -> int:
        """Dimension of ``K^ (-) C omega`` for the model's particle space."""
        return self.model.dim_p**2 - 1


def _fail(message: str, name: Optional[str]) -> ConfigError:
    logger.error(f"Configuration error in {name or 'document'}: {message}")
    return ConfigError(message, field=name)


def _check_options(mode: Any, suite: Any, tol: Any, cutoff: Any, seed: Any, workers: Any):
    if mode not in MODES:
        raise _fail(f"unknown mode {mode!r}, expected one of {MODES}", "mode")
    if suite not in SUITES:
        raise _fail(f"unknown suite {suite!r}, expected one of {SUITES}", "suite")
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise _fail(f"must be a positive number, got {tol!r}", "tol")
    for value, name in ((cutoff, "cutoff"), (seed, "seed")):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise _fail(f"must be a non-negative integer, got {value!r}", name)
    if workers is not None and (not isinstance(workers, int) or isinstance(workers, bool) or workers < 1):
        raise _fail(f"must be a positive integer, got {workers!r}", "workers")


def _parse_scalar(value: Any, name: str) -> complex:
    if isinstance(value, bool):
        raise _fail(f"expected a number, got {value!r}", name)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(p, (int, float)) for p in value):
        return complex(value[0], value[1])
    raise _fail(f"expected a number or [re, im] pair, got {value!r}", name)


def parse_vector(value: Any, name: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise _fail("expected a non-empty list", name)
    return np.array([_parse_scalar(entry, name) for entry in value], dtype=complex)


def parse_matrix(value: Any, name: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise _fail("expected a non-empty list of rows", name)
    rows = [[_parse_scalar(entry, name) for entry in row] for row in value]
    if len({len(row) for row in rows}) != 1:
        raise _fail("rows have different lengths", name)
    return np.array(rows, dtype=complex)


def _parse_step(value: Any, name: str, dim: int) -> StepFunction:
    if not isinstance(value, list):
        raise _fail("expected a list of [duration, vector] segments", name)
    segments = []
    for segment in value:
        if not isinstance(segment, list) or len(segment) != 2 or not isinstance(segment[0], (int, float)):
            raise _fail(f"malformed segment {segment!r}", name)
        vector = parse_vector(segment[1], name)
        if vector.shape[0] != dim:
            raise _fail(f"segment vector has dimension {vector.shape[0]}, expected {dim}", name)
        if segment[0] <= 0:
            raise _fail(f"segment duration must be positive, got {segment[0]}", name)
        segments.append((float(segment[0]), vector))
    return StepFunction.from_segments(segments, dim)


def _self_adjoint(m: np.ndarray, name: str, tol: float) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise _fail(f"matrix of shape {m.shape} is not square", name)
    residual = hermitian_residual(m)
    if residual > tol * max(1.0, float(np.linalg.norm(m, 2))):
        raise _fail(f"matrix is not self-adjoint (residual {residual:.3e})", name)
    return (m + m.conj().T) / 2


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def _thermal_model(gammas: Sequence[float], params: Dict[str, Any]) -> Tuple[np.ndarray, WalkModel]:
    """Thermal particle with ``H_I = coupling * X_p (x) (a + a*)``, ``X_p`` the all-ones off-diagonal matrix."""
    system_dim = params.get("systemDim", 2)
    if not isinstance(system_dim, int) or system_dim < 2:
        raise _fail(f"systemDim must be an integer >= 2, got {system_dim!r}", "model.systemDim")
    coupling = float(params.get("coupling", 1.0))
    omega_s = float(params.get("omegaS", 1.0))
    omega_p = float(params.get("omegaP", 1.0))
    d = len(gammas)
    a = _ladder(system_dim)
    off_diagonal = np.ones((d, d)) - np.eye(d)
    h_s = omega_s * a.conj().T @ a
    h_p = omega_p * np.diag(np.arange(d)).astype(complex)
    h_i = coupling * np.kron(off_diagonal, a + a.conj().T)
    return np.diag(gammas).astype(complex), WalkModel(h_s, h_p, h_i)


def _check_gammas(gammas: Any, name: str) -> Tuple[float, ...]:
    if not isinstance(gammas, list) or len(gammas) < 2 or not all(isinstance(g, (int, float)) for g in gammas):
        raise _fail("expected a list of at least two probabilities", name)
    if any(g <= 0 for g in gammas) or abs(sum(gammas) - 1.0) > 1e-12:
        raise _fail(f"probabilities must be positive and sum to one, got {gammas}", name)
    return tuple(float(g) for g in gammas)


def preset_model(name: str, params: Dict[str, Any]) -> Tuple[np.ndarray, WalkModel]:
    """Expand a named preset into ``(rho, model)``."""
    if name == "thermal_qubit":
        gamma0 = params.get("gamma0", 0.8)
        if not isinstance(gamma0, (int, float)) or not 0 < gamma0 < 1:
            raise _fail(f"gamma0 must lie in (0, 1), got {gamma0!r}", "model.gamma0")
        return _thermal_model([float(gamma0), 1.0 - float(gamma0)], params)
    if name == "thermal_qutrit":
        return _thermal_model(_check_gammas(params.get("gammas", [0.7, 0.2, 0.1]), "model.gammas"), params)
    raise _fail(f"unknown preset {name!r}", "model.preset")


def _explicit_model(model_doc: Dict[str, Any], tol: float) -> Tuple[np.ndarray, WalkModel]:
    for key in ("rho", "H_S", "H_P", "H_I"):
        if key not in model_doc:
            raise _fail("missing matrix", key)
    rho = _self_adjoint(parse_matrix(model_doc["rho"], "rho"), "rho", tol)
    h_s = _self_adjoint(parse_matrix(model_doc["H_S"], "H_S"), "H_S", tol)
    h_p = _self_adjoint(parse_matrix(model_doc["H_P"], "H_P"), "H_P", tol)
    h_i = _self_adjoint(parse_matrix(model_doc["H_I"], "H_I"), "H_I", tol)
    if rho.shape != h_p.shape:
        raise _fail(f"rho of shape {rho.shape} does not match H_P of shape {h_p.shape}", "rho")
    if h_i.shape[0] != h_p.shape[0] * h_s.shape[0]:
        raise _fail(f"H_I of size {h_i.shape[0]} does not act on p (x) h of size {h_p.shape[0] * h_s.shape[0]}", "H_I")
    return rho, WalkModel(h_s, h_p, h_i)


def _default_steps(dim: int, T: float) -> Tuple[StepFunction, StepFunction]:
    """Two-segment test functions on [0, T] with values in the first two noise coordinates."""
    first, second = np.zeros(dim, dtype=complex), np.zeros(dim, dtype=complex)
    first[0], second[1 % dim] = 1.0, 1.0
    half = T / 2
    f = StepFunction((half, half), np.array([0.4 * first, 0.25j * second]))
    g = StepFunction((half, half), np.array([0.3 * second, -0.2 * first]))
    return f, g


def _parse_int_list(value: Any, name: str) -> Tuple[int, ...]:
    if not isinstance(value, list) or not value or not all(isinstance(n, int) and not isinstance(n, bool) for n in value):
        raise _fail("expected a non-empty list of integers", name)
    if value[0] < 1 or any(b <= a for a, b in zip(value, value[1:])):
        raise _fail(f"must be strictly increasing positive integers, got {value}", name)
    return tuple(value)


def parse_config(text: Union[str, bytes]) -> ExperimentConfig:
    """Parse and validate a JSON experiment description, applying defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(f"malformed JSON: {exc}", None) from exc
    if not isinstance(doc, dict):
        raise _fail("top level must be an object", None)

    mode = doc.get("mode", "verify")
    suite = doc.get("suite", "all")
    tol = doc.get("tol", DEFAULT_TOL)
    cutoff = doc.get("cutoff", DEFAULT_CUTOFF)
    seed = doc.get("seed", DEFAULT_SEED)
    workers = doc.get("workers")
    _check_options(mode, suite, tol, cutoff, seed, workers)

    model_doc = doc.get("model", {"preset": "thermal_qubit"})
    if not isinstance(model_doc, dict):
        raise _fail("expected an object", "model")
    preset = model_doc.get("preset")
    params = {key: value for key, value in model_doc.items() if key != "preset"}
    rho, model = preset_model(preset, params) if preset is not None else _explicit_model(model_doc, float(tol))

    grid = doc.get("grid", {})
    n_list = _parse_int_list(grid.get("nList", list(DEFAULT_N_LIST)), "grid.nList")
    T = grid.get("T", DEFAULT_T)
    if not isinstance(T, (int, float)) or not T > 0:
        raise _fail(f"must be a positive number, got {T!r}", "grid.T")
    T = float(T)

    noise_dim = model.dim_p**2 - 1
    test = doc.get("test", {})
    default_f, default_g = _default_steps(noise_dim, T)
    f = _parse_step(test["f"], "test.f", noise_dim) if "f" in test else default_f
    g = _parse_step(test["g"], "test.g", noise_dim) if "g" in test else default_g
    dh = model.dim_h
    u = parse_vector(test["u"], "test.u") if "u" in test else np.eye(dh, dtype=complex)[0]
    v = parse_vector(test["v"], "test.v") if "v" in test else np.ones(dh, dtype=complex) / np.sqrt(dh)
    for vec, name in ((u, "test.u"), (v, "test.v")):
        if vec.shape[0] != dh:
            raise _fail(f"vector has dimension {vec.shape[0]}, expected dim h = {dh}", name)

    model = model.with_tau(T / n_list[0])
    config = ExperimentConfig(
        mode=mode,
        model=model,
        rho=rho,
        n_list=n_list,
        T=T,
        f=f,
        g=g,
        u=u,
        v=v,
        tol=float(tol),
        cutoff=cutoff,
        seed=seed,
        workers=workers,
        output=doc.get("output"),
        suite=suite,
        preset=preset,
        params=params,
    )
    logger.debug(f"Parsed {mode} config: preset {preset}, dim p = {model.dim_p}, dim h = {dh}, nList {n_list}")
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}", None) from exc
    return parse_config(text)


def default_config(mode: str = "verify", **overrides: Any) -> ExperimentConfig:
    """The configuration used when no file is given."""
    doc: Dict[str, Any] = {"mode": mode}
    doc.update(overrides)
    return parse_config(json.dumps(doc))
