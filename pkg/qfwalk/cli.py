"""Command-line front end: ``qfwalk verify|converge|dilate|uniqueness``."""

import argparse
import dataclasses
import logging
import sys
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from .config import DEFAULT_SEED, SUITES, ExperimentConfig, default_config, load_config
from .errors import QfwalkError
from .qsc import minimality_check
from .quasifree import amplitude_set
from .suites import run_suites
from .tables import ReportRow, ReportTable, bound, check, exceeds, flag, note
from .walk import convergence_study, gns_build, limit_generator, rho_blocks, sigma_rho
from .workbook import ReportWorkbook

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "tau", "abs_error", "ratio"]


class SuiteResult(NamedTuple):
    exit_status: int
    rows: List[ReportRow]
    csv: Optional[str] = None
    frame: Optional[pd.DataFrame] = None


def convergence_csv(frame: pd.DataFrame) -> str:
    """``n,tau,abs_error,ratio`` with 17 significant digits and an empty first ratio."""
    return frame[CSV_COLUMNS].to_csv(index=False, float_format="%.17g", na_rep="", lineterminator="\n")


def _converge(config: ExperimentConfig) -> SuiteResult:
    gns = gns_build(config.rho)
    study = convergence_study(
        config.model, gns, config.f, config.g, config.u, config.v, config.T, config.n_list, workers=config.workers
    )
    rows = [
        flag("convergence", "abs_error strictly decreasing", study.monotone, True),
        note("convergence", "log-log slope of abs_error in tau", study.slope),
    ]
    return SuiteResult(0, rows, convergence_csv(study.frame), study.frame)


def _dilate(config: ExperimentConfig) -> List[ReportRow]:
    gns = gns_build(config.rho)
    limit = limit_generator(config.model, gns, config.tol)
    rows = [
        note("dilate", "||L||", float(np.linalg.norm(limit.extended.L, 2))),
        bound("dilate", "vacuum and K0 components of L", limit.orthogonality, config.tol),
        bound("dilate", "||L*L - rho~(H_I^2)||", limit.gram_residual, config.tol),
    ]
    if limit.quasifree is None:
        rows.append(note("dilate", "quasifree part", "none: rho has a single eigenvalue cluster"))
        return rows
    c, s = rho_blocks(gns)
    sigma = sigma_rho(gns)
    for i, (c_i, s_i) in enumerate(zip(c, s)):
        label = "(alpha={}, i={}, beta={}, j={})".format(*gns.labels[i])
        rows.append(check("Sigma(rho)", f"C {label}", float(c_i), float(sigma.cosh_a[i, i].real), config.tol))
        rows.append(check("Sigma(rho)", f"S {label}", float(s_i), float(sigma.sinh_a[i, i].real), config.tol))
    rows.append(bound("dilate", "||L - (Sigma(rho) (x) I)[Q; -Q^c]||", limit.dilation_residual, config.tol))
    dim = limit.degeneracy.shape[1]
    if dim == gns.dim_k:
        verdict = "all amplitudes admissible"
    elif dim == 0:
        verdict = "singleton"
    else:
        verdict = f"{dim}-dimensional family"
    rows.append(note("dilate", "admissible amplitudes", verdict))
    return rows


def _uniqueness(config: ExperimentConfig) -> List[ReportRow]:
    gns = gns_build(config.rho)
    limit = limit_generator(config.model, gns, config.tol)
    if limit.quasifree is None:
        return [note("uniqueness", "quasifree part", "none: rho has a single eigenvalue cluster")]
    sigma = sigma_rho(gns)
    minimal = minimality_check(limit.reduced.L, 2 * gns.dim_k, config.tol)
    candidates = amplitude_set(limit.reduced, sigma.amplitude, config.tol)
    rows = [
        note("uniqueness", "limit generator minimal", minimal),
        note("uniqueness", "dim k^L1", candidates.degeneracy.shape[1]),
        note("uniqueness", "dim k^Q", candidates.q_degeneracy.shape[1]),
        flag("uniqueness", "k^L1 = {0} iff k^Q = {0}", candidates.consistent, True),
        flag("uniqueness", "Sigma(rho) admitted", candidates.admits(sigma.amplitude), True),
        flag("uniqueness", "singleton agrees with limit", candidates.is_singleton, limit.unique),
    ]
    if minimal:
        rows.append(flag("uniqueness", "minimal implies singleton", candidates.is_singleton, True))
    if candidates.is_singleton:
        rows.append(exceeds("uniqueness", "k^L1 independence margin", limit.independence_margin, config.tol))
    return rows


def run_suite(config: ExperimentConfig) -> SuiteResult:
    """Run the experiment of ``config.mode``; the exit status is 1 iff a row failed."""
    logger.info(f"Running {config.mode} with seed {config.seed} and tol {config.tol:.1e}")
    if config.mode == "verify":
        result = SuiteResult(0, run_suites(config.suite, config.seed, config.tol))
    elif config.mode == "converge":
        result = _converge(config)
    elif config.mode == "dilate":
        result = SuiteResult(0, _dilate(config))
    else:
        result = SuiteResult(0, _uniqueness(config))
    status = 0 if all(row.passed for row in result.rows) else 1
    return result._replace(exit_status=status)


def _header(config: ExperimentConfig) -> List[str]:
    lines = [f"qfwalk {config.mode}", f"seed = {config.seed}", f"tol = {config.tol:.3e}"]
    if config.mode == "verify":
        lines.append(f"suite = {config.suite}")
    else:
        lines.append(f"model = {config.preset or 'explicit'}, dim p = {config.model.dim_p}, dim h = {config.model.dim_h}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment description")
    common.add_argument("--tol", type=float, help="Structure tolerance (default 1e-10)")
    common.add_argument("--seed", type=int, help=f"Seed for randomized checks (default {DEFAULT_SEED})")
    common.add_argument("--xlsx", help="Also write the report to this .xlsx workbook")
    common.add_argument("--workers", type=int, help="Threads for the convergence grid")
    common.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level")

    parser = argparse.ArgumentParser(prog="qfwalk", description="Quasifree stochastic cocycles and repeated interactions.")
    sub = parser.add_subparsers(dest="mode", required=True)
    verify = sub.add_parser("verify", parents=[common], help="Run the invariant suites")
    verify.add_argument("--suite", choices=SUITES, help="Suite to run (default all)")
    converge = sub.add_parser("converge", parents=[common], help="Walk-to-cocycle convergence study")
    converge.add_argument("--out", help="CSV output path (default stdout)")
    sub.add_parser("dilate", parents=[common], help="Sigma(rho) blocks and the dilation residual")
    sub.add_parser("uniqueness", parents=[common], help="Minimality and the set of admissible amplitudes")
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config) if args.config else default_config(args.mode)
    overrides = {"mode": args.mode}
    for name in ("tol", "seed", "workers", "suite"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "out", None):
        overrides["output"] = args.out
    return dataclasses.replace(config, **overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _resolve(args)
        result = run_suite(config)
    except QfwalkError as exc:
        print(f"qfwalk: error: {exc}", file=sys.stderr)
        return 2

    header = _header(config)
    table = ReportTable(rows=result.rows)
    print("\n".join(header))
    print(table.to_text())
    if config.mode == "verify":
        print("\nworst residual per experiment")
        print(table.worst().to_string(index=False))
    if result.csv is not None:
        if config.output:
            with open(config.output, "w", newline="") as handle:
                handle.write(result.csv)
            logger.info(f"Wrote {len(result.frame)} rows to {config.output}")
        else:
            print(result.csv, end="")
    if args.xlsx:
        with ReportWorkbook(args.xlsx) as workbook:
            workbook.write_report(table, config.mode, header)
            if result.frame is not None:
                workbook.write_frame(result.frame, "convergence")
    if result.exit_status:
        logger.warning(f"{len(table.failures)} of {len(table.rows)} rows failed")
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
