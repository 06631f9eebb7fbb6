"""qfwalk: quasifree stochastic cocycles and their repeated-interaction approximations, in finite dimensions."""

try:
    from ._version import version as __version__
except ImportError:
    __version__ = "0.1.0"

# Symplectic and amplitude algebra
from .algebra import (
    AWAmplitude,
    RealLinearOp,
    SymplecticTriple,
    build_symplectic,
    decompose_symplectic,
    make_amplitude,
    partial_conjugate,
)

# Configuration and front end
from .cli import run_suite
from .config import ExperimentConfig, parse_config

# Errors
from .errors import (
    ClusteringError,
    ConfigError,
    HypothesisError,
    InvalidGeneratorError,
    InvalidInputError,
    InvalidTripleError,
    NotFaithfulError,
    QfwalkError,
)

# Fock space models
from .fock import DoubleFockSpace, FockSpace, SimpleIntegrand, SlicedFock, StepFunction, weyl

# Hudson-Parthasarathy calculus
from .qsc import HPGenerator, cocycle_element, flow_element, hp_generator, integral_element, same_flow

# Quasifree calculus
from .quasifree import QFGenerator, amplitude_set, qf_generator, recognize_quasifree, same_flow_qf, transform_generator

# Reports
from .tables import ReportRow, ReportTable
from .walk import WalkModel, convergence_study, gns_build, limit_generator, walk_element
from .workbook import ReportWorkbook

__all__ = [
    "AWAmplitude",
    "RealLinearOp",
    "SymplecticTriple",
    "build_symplectic",
    "decompose_symplectic",
    "make_amplitude",
    "partial_conjugate",
    "FockSpace",
    "DoubleFockSpace",
    "StepFunction",
    "SimpleIntegrand",
    "SlicedFock",
    "weyl",
    "HPGenerator",
    "hp_generator",
    "integral_element",
    "cocycle_element",
    "flow_element",
    "same_flow",
    "QFGenerator",
    "qf_generator",
    "recognize_quasifree",
    "transform_generator",
    "amplitude_set",
    "same_flow_qf",
    "WalkModel",
    "gns_build",
    "limit_generator",
    "walk_element",
    "convergence_study",
    "ExperimentConfig",
    "parse_config",
    "run_suite",
    "ReportRow",
    "ReportTable",
    "ReportWorkbook",
    "QfwalkError",
    "InvalidInputError",
    "InvalidTripleError",
    "InvalidGeneratorError",
    "NotFaithfulError",
    "ClusteringError",
    "HypothesisError",
    "ConfigError",
]
