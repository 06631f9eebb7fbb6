"""Verification suites: seeded invariant checks per module, reported as rows.

Each suite takes a seeded generator and the structure tolerance and returns report rows. The remaining
tolerances are fixed per check. Suites never raise on a failed check; the row records the failure.
"""

import logging
from typing import Callable, Dict, List

import numpy as np
from scipy import linalg

from .algebra import (
    amplitude_symplectic_residual,
    build_symplectic,
    build_symplectic_inverse,
    covariance,
    dagger,
    decompose_symplectic,
    make_amplitude,
    noise_conjugate,
    partial_conjugate,
)
from .errors import InvalidInputError
from .fock import DoubleFockSpace, FockSpace, SimpleIntegrand, SlicedFock, StepFunction, quasifree_characteristic, weyl
from .qsc import (
    PureNoise,
    cocycle_element,
    cocycle_propagator,
    flow_element,
    flow_propagator,
    fock_matrix_element,
    integral_element,
    minimality_check,
    product_with_noise,
    same_flow,
    theta,
)
from .quasifree import (
    amplitude_set,
    change_of_variables_residual,
    forcing_map_margin,
    lift_process,
    qf_flow_generator,
    qf_integral_element,
    qf_product_with_noise,
    recognize_quasifree,
    same_flow_qf,
    sigma_lift,
    transform_generator,
    zlxq_residual,
)
from .sampling import (
    random_amplitude,
    random_complex,
    random_hermitian,
    random_hp_generator,
    random_qf_generator,
    random_triple,
)
from .tables import ReportRow, bound, check, exceeds, flag
from .walk import (
    WalkModel,
    convergence_study,
    dense_walk_operator,
    gns_build,
    interaction_generator,
    limit_generator,
    phi_rho,
    rho_blocks,
    toy_embedding,
    toy_exponential,
    walk_element,
)

logger = logging.getLogger(__name__)

SuiteRunner = Callable[[np.random.Generator, float], List[ReportRow]]


def _random_step(rng: np.random.Generator, dim: int, durations=(0.5, 0.75), scale: float = 0.4) -> StepFunction:
    return StepFunction(tuple(durations), random_complex(rng, len(durations), dim, scale=scale))


def _lindblad_kron(gen) -> np.ndarray:
    """Lindblad superoperator on row-major vectors, assembled from Kronecker products."""
    dh = gen.dim_h
    eye = np.eye(dh)
    gram = dagger(gen.L) @ gen.L
    out = -1j * (np.kron(gen.H, eye) - np.kron(eye, gen.H.T)) - 0.5 * (np.kron(gram, eye) + np.kron(eye, gram.T))
    for i in range(gen.dim_k):
        li = gen.L[i * dh : (i + 1) * dh]
        out += np.kron(dagger(li), li.T)
    return out


def algebra_suite(rng: np.random.Generator, tol: float) -> List[ReportRow]:
    rows = []
    worst_round, worst_v, worst_p, worst_c, worst_inv = 0.0, 0.0, 0.0, 0.0, 0.0
    for _ in range(200):
        dim = int(rng.integers(2, 7))
        triple = random_triple(rng, dim, kernel_dim=int(rng.integers(0, dim)))
        b = build_symplectic(triple)
        recovered = decompose_symplectic(b)
        worst_round = max(worst_round, b.distance(build_symplectic(recovered)))
        worst_v = max(worst_v, float(np.linalg.norm(triple.V - recovered.V, 2)))
        worst_p = max(worst_p, float(np.linalg.norm(triple.P - recovered.P, 2)))
        worst_c = max(worst_c, triple.C.distance_on(recovered.C, triple.range_basis()))
        worst_inv = max(worst_inv, (b @ build_symplectic_inverse(triple)).distance(b.identity(dim)))
    rows.append(bound("symplectic", "max ||B - build(decompose(B))||", worst_round, tol))
    rows.append(bound("symplectic", "max ||V - V'||", worst_v, tol))
    rows.append(bound("symplectic", "max ||P - P'||", worst_p, tol))
    rows.append(bound("symplectic", "max ||(C - C') on Ran P||", worst_c, tol))
    rows.append(bound("symplectic", "max ||B B^-1 - I||", worst_inv, tol))

    worst = dict.fromkeys(("involution", "defining", "norm", "left", "right", "noise"), 0.0)
    for _ in range(200):
        dh, dh1, dh2 = (int(n) for n in rng.integers(1, 4, 3))
        y = random_complex(rng, dh * dh2, dh1)
        yc = partial_conjugate(y, (dh, dh1, dh2))
        ycc = partial_conjugate(yc.matrix, (dh, dh2, dh1)).matrix
        worst["involution"] = max(worst["involution"], float(np.linalg.norm(ycc - y)))
        vec = random_complex(rng, dh)
        lhs = np.tensordot(vec, yc.matrix.reshape(dh, dh1, dh2), axes=1)
        rhs = dagger(y) @ np.kron(vec[:, None], np.eye(dh2))
        worst["defining"] = max(worst["defining"], float(np.linalg.norm(lhs - rhs)))
        worst["norm"] = max(worst["norm"], abs(yc.norm - float(np.linalg.norm(yc.matrix, 2))))
        b = random_complex(rng, dh1, dh1)
        right = partial_conjugate(y @ b, (dh, dh1, dh2)).matrix
        worst["right"] = max(worst["right"], float(np.linalg.norm(right - np.kron(np.eye(dh), dagger(b)) @ yc.matrix)))
        c = random_complex(rng, dh2, dh2)
        left = partial_conjugate(np.kron(np.eye(dh), c) @ y, (dh, dh1, dh2)).matrix
        worst["left"] = max(worst["left"], float(np.linalg.norm(left - yc.matrix @ dagger(c))))
        a = random_complex(rng, dh, dh)
        noise = partial_conjugate(np.kron(a, np.eye(dh2)) @ y, (dh, dh1, dh2)).matrix
        worst["noise"] = max(worst["noise"], float(np.linalg.norm(noise - np.kron(np.conj(a), np.eye(dh1)) @ yc.matrix)))
    for name, value in worst.items():
        rows.append(bound("partial conjugation", f"max {name} residual", value, 1e-12))

    sigma = make_amplitude(random_amplitude(rng, 3), random_triple(rng, 3))
    rows.append(bound("amplitude", "Sigma iota symplectic residual", amplitude_symplectic_residual(sigma), tol))
    return rows


def fock_suite(rng: np.random.Generator, tol: float) -> List[ReportRow]:
    rows = []
    space = FockSpace(1, 24)
    vac = space.vacuum()
    worst_vac, worst_weyl = 0.0, 0.0
    for _ in range(10):
        x, y = (random_complex(rng, 1) for _ in range(2))
        x, y = 0.5 * rng.random() * x / np.linalg.norm(x), 0.5 * rng.random() * y / np.linalg.norm(y)
        wx, wy, wxy = weyl(space, x).matrix, weyl(space, y).matrix, weyl(space, x + y).matrix
        expected = np.exp(-0.5 * np.vdot(x, x).real)
        worst_vac = max(worst_vac, abs(np.vdot(vac, wx @ vac) - expected))
        phase = np.exp(-1j * np.vdot(x, y).imag)
        worst_weyl = max(worst_weyl, float(np.linalg.norm(wx @ wy @ vac - phase * wxy @ vac)))
    rows.append(bound("weyl", "max |<W(x)> - exp(-|x|^2/2)|", worst_vac, 1e-8))
    rows.append(bound("weyl", "max Weyl relation defect on vacuum", worst_weyl, 1e-7))

    sigma = make_amplitude(np.array([[0.5]]))
    double = DoubleFockSpace(1, 20)
    worst_char = 0.0
    for _ in range(10):
        x = random_complex(rng, 1)
        x = 0.75 * rng.random() * x / np.linalg.norm(x)
        worst_char = max(worst_char, abs(quasifree_characteristic(sigma, double, x) - np.exp(-0.5 * covariance(sigma, x))))
    rows.append(bound("quasifree state", "max |phi(x) - exp(-<x, cosh(2A) x>/2)|", worst_char, 1e-6))

    dk, dh = 1, 2
    values = []
    for _ in range(2):
        f_val = random_complex(rng, (dk + 1) * dh, (dk + 1) * dh, scale=0.5)
        values.append(f_val)
    integrand = SimpleIntegrand((0.5, 0.5), np.array(values), dk)
    slicing = SlicedFock((0.5, 0.5), dk, 12)
    f, g = (StepFunction((0.5, 0.5), random_complex(rng, 2, dk, scale=0.5)) for _ in range(2))
    u, v = random_complex(rng, dh), random_complex(rng, dh)
    direct = integral_element(integrand, f, g, u, v, 1.0)
    sliced = fock_matrix_element(integrand, slicing, f, g, u, v, 1.0)
    rows.append(check("sliced Fock", "<u e(f), Lambda(F)_1 v e(g)>", sliced, direct, 1e-6))
    return rows


def qsc_suite(rng: np.random.Generator, tol: float) -> List[ReportRow]:
    rows = []
    worst = dict.fromkeys(("structure", "vacuum", "unital", "lindblad"), 0.0)
    for _ in range(20):
        gen = random_hp_generator(rng, 2, 2, scale=0.5)
        worst["structure"] = max(worst["structure"], *gen.structure_residuals())
        t = 0.1 + 1.9 * rng.random()
        zero = StepFunction.zero(2)
        propagated = cocycle_propagator(gen, zero, zero, 0.0, t)
        worst["vacuum"] = max(worst["vacuum"], float(np.linalg.norm(propagated - linalg.expm(t * gen.K), 2)))
        f, g = _random_step(rng, 2), _random_step(rng, 2)
        u, v = random_complex(rng, 2), random_complex(rng, 2)
        unital = flow_element(gen, np.eye(2), f, g, u, v, t)
        worst["unital"] = max(worst["unital"], abs(unital - np.vdot(u, v) * np.exp(f.inner(g))))
        semigroup = flow_propagator(gen, zero, zero, 0.0, t)
        worst["lindblad"] = max(worst["lindblad"], float(np.linalg.norm(semigroup - linalg.expm(t * _lindblad_kron(gen)), 2)))
    rows.append(bound("HP generator", "max structure residual", worst["structure"], 1e-13))
    rows.append(bound("HP cocycle", "max ||vacuum propagator - exp(tK)||", worst["vacuum"], tol))
    rows.append(bound("EH flow", "max unitality defect", worst["unital"], 1e-8))
    rows.append(bound("EH flow", "max ||vacuum flow - exp(t Lindblad)||", worst["lindblad"], 1e-8))

    worst_noise = 0.0
    for _ in range(10):
        alpha, z = float(rng.normal()), random_complex(rng, 2, scale=0.7)
        noise = PureNoise(alpha, z, np.eye(2, dtype=complex))
        t = 0.1 + 1.9 * rng.random()
        f, g = _random_step(rng, 2, (0.6, 0.9)), _random_step(rng, 2, (1.1, 0.4))
        h = StepFunction.constant(z, t)
        expected = np.exp(1j * alpha * t - 0.5 * np.vdot(z, z).real * t - h.inner(g) + f.inner(h) + f.inner(g))
        worst_noise = max(worst_noise, abs(cocycle_element(noise.generator(), f, g, [1.0], [1.0], t) - expected))
    rows.append(bound("pure noise", "max |cocycle - Weyl formula|", worst_noise, tol))

    gen = random_hp_generator(rng, 2, 2)
    noise = PureNoise(0.3, random_complex(rng, 2), np.eye(2, dtype=complex))
    found = same_flow(gen, product_with_noise(gen, noise))
    rows.append(flag("same flow", "pure-noise data recovered", found is not None, True))
    if found is not None:
        rows.append(bound("same flow", "distance to the applied noise", found.distance(noise), 1e-8))
    rows.append(flag("minimality", "random L is minimal", minimality_check(gen.L, 2), True))
    return rows


def quasifree_suite(rng: np.random.Generator, tol: float) -> List[ReportRow]:
    rows = []
    worst = dict.fromkeys(("structure", "lift", "recognition", "zlxq", "flow", "cov", "lifted"), 0.0)
    for _ in range(50):
        sigma = make_amplitude(random_amplitude(rng, 2))
        gen = random_qf_generator(rng, sigma, 2, scale=0.5)
        worst["structure"] = max(worst["structure"], gen.structure_residual())
        worst["lift"] = max(worst["lift"], *sigma_lift(gen).structure_residuals())
        q = recognize_quasifree(sigma_lift(gen), sigma)
        worst["recognition"] = max(worst["recognition"], np.inf if q is None else float(np.linalg.norm(q - gen.Q, 2)))
        worst["zlxq"] = max(worst["zlxq"], zlxq_residual(gen, random_complex(rng, 2)))
        a = random_hermitian(rng, 2)
        psi = qf_flow_generator(gen, a)
        lifted_theta = theta(sigma_lift(gen), a)
        worst["flow"] = max(worst["flow"], float(np.linalg.norm(psi.lift(sigma) - lifted_theta, 2)))

        triple = random_triple(rng, 2)
        worst["cov"] = max(worst["cov"], change_of_variables_residual(gen.integrand(), sigma, triple))
        moved = transform_generator(gen, triple)
        worst["lifted"] = max(worst["lifted"], float(np.linalg.norm(sigma_lift(moved).matrix - sigma_lift(gen).matrix, 2)))
    rows.append(bound("QF generator", "max K + K* + L*L", worst["structure"], 1e-13))
    rows.append(bound("QF generator", "max lifted structure residual", worst["lift"], 1e-12))
    rows.append(bound("recognition", "max ||Q - recognised Q||", worst["recognition"], 1e-12))
    rows.append(bound("recognition", "max zLxQ residual", worst["zlxq"], 1e-12))
    rows.append(bound("flow generator", "max ||lift(psi(a)) - theta(a)||", worst["flow"], 1e-12))
    rows.append(bound("change of variables", "max doubled-stack identity residual", worst["cov"], 1e-12))
    rows.append(bound("change of variables", "max lifted generator difference", worst["lifted"], 1e-12))

    minimal, singleton_ok = 0, True
    for _ in range(10):
        sigma = make_amplitude(random_amplitude(rng, 2))
        lifted = sigma_lift(random_qf_generator(rng, sigma, 3, scale=0.5))
        if minimality_check(lifted.L, 4):
            minimal += 1
            singleton_ok &= amplitude_set(lifted, sigma.amplitude).is_singleton
    rows.append(exceeds("uniqueness", "minimal lifted generators drawn", minimal, 0))
    rows.append(flag("uniqueness", "minimal implies singleton", singleton_ok, True))

    squeezed = make_amplitude(random_amplitude(rng, 2), random_triple(rng, 2))
    rows.append(exceeds("forcing map", "smallest singular value", forcing_map_margin(squeezed, 2), 1e-10))

    sigma = make_amplitude(random_amplitude(rng, 2))
    gen = random_qf_generator(rng, sigma, 2)
    x, alpha = random_complex(rng, 2), 0.4
    found = same_flow_qf(gen, qf_product_with_noise(gen, x, alpha))
    error = np.inf if found is None else float(np.linalg.norm(found.x - x)) + abs(found.alpha - alpha)
    rows.append(bound("same flow", "recovered (x, alpha) error", error, 1e-8))

    segments = [(0.5, random_qf_generator(rng, sigma, 2).integrand()), (0.75, gen.integrand())]
    f, g = _random_step(rng, 4), _random_step(rng, 4)
    u, v = random_complex(rng, 2), random_complex(rng, 2)
    lifted = integral_element(lift_process(segments, sigma), f, g, u, v, 1.25)
    boxed = qf_integral_element(segments, sigma, f, g, u, v, 1.25)
    rows.append(check("first fundamental formula", "lifted vs box evaluation", lifted, boxed, 1e-10))
    return rows


def thermal_qubit_model(rng: np.random.Generator, dim_h: int = 2) -> WalkModel:
    """Thermal qubit particle with a random off-diagonal interaction."""
    b = random_complex(rng, dim_h, dim_h, scale=0.7)
    lower = np.array([[0.0, 0.0], [1.0, 0.0]])
    h_i = np.kron(lower, b) + np.kron(lower.T, dagger(b))
    return WalkModel(random_hermitian(rng, dim_h, 0.5), np.diag([0.0, 1.0]).astype(complex), h_i)


def walk_suite(rng: np.random.Generator, tol: float) -> List[ReportRow]:
    rows = []
    gns = gns_build(np.diag([0.8, 0.2]).astype(complex))
    x, y, z = (random_complex(rng, 2, 2) for _ in range(3))
    rows.append(bound("GNS", "<eta(Z), pi(X) eta(Y)> - rho(Z* X Y)", gns.identity_residual(x, y, z), 1e-10))
    c, s = rho_blocks(gns)
    rows.append(check("Sigma(rho)", "S on k", float(s[0]), float(np.sqrt(1 / 3)), 1e-12))
    rows.append(check("Sigma(rho)", "C on k", float(c[0]), float(np.sqrt(4 / 3)), 1e-12))
    rows.append(bound("Sigma(rho)", "||C^2 - S^2 - I||", float(np.max(np.abs(c**2 - s**2 - 1))), 1e-12))

    a = random_hermitian(rng, 4)
    q_hat, q_bar = phi_rho(gns, a)
    conjugate_defect = float(np.linalg.norm(noise_conjugate(q_hat, gns.dim_k) - q_bar, 2))
    rows.append(bound("phi_rho", "||phi(A)^c - phi_bar(A)||", conjugate_defect, 1e-12))

    model = thermal_qubit_model(rng)
    limit = limit_generator(model, gns)
    rows.append(bound("limit generator", "||L - (Sigma(rho) (x) I)[Q; -Q^c]||", limit.dilation_residual, 1e-12))
    rows.append(bound("limit generator", "vacuum and K0 components of L", limit.orthogonality, 1e-12))
    rows.append(bound("limit generator", "||L*L - rho~(H_I^2)||", limit.gram_residual, 1e-12))
    if limit.q_independence_margin > 1e-8:
        rows.append(flag("limit generator", "Sigma(rho) unique", limit.unique, True))
        rows.append(exceeds("limit generator", "k^L1 independence margin", limit.independence_margin, 1e-8))

    tau = 0.05
    step = interaction_generator(model.with_tau(tau), gns)
    unitarity = float(np.linalg.norm(dagger(step.unitary) @ step.unitary - np.eye(step.unitary.shape[0]), 2))
    rows.append(bound("walk", "step unitarity defect", unitarity, 1e-12))
    f, g = (StepFunction((tau, tau), random_complex(rng, 2, 3, scale=0.5)) for _ in range(2))
    u, v = random_complex(rng, 2), random_complex(rng, 2)
    dense = dense_walk_operator(step.unitary, 2, 2)
    oracle = np.vdot(np.kron(u, toy_exponential(f, tau, 2)), dense @ np.kron(v, toy_exponential(g, tau, 2)))
    walked = walk_element(step.unitary, f, g, u, v, 2, tau, 2)
    rows.append(check("walk", "walk element vs dense two-slot walk", walked, oracle, 1e-12))

    slicing = SlicedFock((tau, tau), 3, 2)
    xi = random_complex(rng, 16)
    embedded = np.vdot(toy_embedding(slicing) @ xi, slicing.exponential_vector(f))
    rows.append(check("walk", "<D xi, e(f)> vs <xi, toy e(f)>", embedded, np.vdot(xi, toy_exponential(f, tau, 2)), 1e-13))

    f, g = (StepFunction((0.5, 0.5), random_complex(rng, 2, 3, scale=0.3)) for _ in range(2))
    study = convergence_study(model, gns, f, g, u / np.linalg.norm(u), v / np.linalg.norm(v), 1.0, [16, 64, 256])
    rows.append(flag("convergence", "error strictly decreasing", study.monotone, True))
    return rows


SUITES: Dict[str, SuiteRunner] = {
    "algebra": algebra_suite,
    "fock": fock_suite,
    "qsc": qsc_suite,
    "quasifree": quasifree_suite,
    "walk": walk_suite,
}


def run_suites(name: str, seed: int, tol: float) -> List[ReportRow]:
    """Run one suite, or all of them in a fixed order, from a single seeded generator."""
    if name != "all" and name not in SUITES:
        raise InvalidInputError(f"Unknown suite {name!r}, expected one of {['all', *SUITES]}")
    names = list(SUITES) if name == "all" else [name]
    rng = np.random.default_rng(seed)
    rows: List[ReportRow] = []
    for suite in names:
        logger.info(f"Running {suite} suite")
        rows.extend(SUITES[suite](rng, tol))
    return rows
