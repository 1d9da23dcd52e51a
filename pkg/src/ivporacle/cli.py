"""Experiment driver: parameter sweeps, CSV emission, slope estimation.

A sweep runs the solver over the cross product of problems, modes,
smoothness pairs, grid sizes and seeds, recording one CSV row per cell.
Rows are emitted in a fixed deterministic order and, with timing disabled
(the default), reruns of the same configuration produce byte-identical
output.  ``estimate_order`` and ``estimate_cost_exponent`` fit log-log
slopes to the recorded errors and costs; both aggregate over seeds by the
median so single outlier runs of the probabilistic modes cannot tilt the
fit.

Configuration comes from an INI file (section ``[experiment]``, optional
``[problem]`` overrides) with command-line flags taking precedence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import math
import sys
import time
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractViolationError, DivergenceError, UnknownProblemError
from .problem import catalog, catalog_names
from .solver import BOOSTED_MODES, MODES, SolveConfig, solve, sup_error

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "run_sweep",
    "rows_to_csv",
    "estimate_order",
    "estimate_cost_exponent",
    "main",
]


class ConfigError(ValueError):
    """Malformed experiment configuration or config file."""


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Cross product defining one sweep, plus output options."""

    problems: tuple[str, ...] = ("scalar-exponential",)
    modes: tuple[str, ...] = ("det_exact",)
    r_values: tuple[int, ...] = (0,)
    rho_values: tuple[float, ...] = (1.0,)
    n_values: tuple[int, ...] = (8, 16, 32, 64)
    delta: float = 0.1
    seeds: tuple[int, ...] = (0,)
    samples_per_step: int = 8
    out: str = "-"
    timing: bool = False
    cost_constant: float = 4.0
    c: float = 3.0
    eta: Optional[float] = None
    interval: Optional[tuple[float, float]] = None

    def __post_init__(self):
        for mode in self.modes:
            if mode not in MODES:
                raise ConfigError(f"unknown mode {mode!r}; valid: {', '.join(MODES)}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n grid must list positive integers")
        if not 0.0 < self.delta < 0.5:
            raise ConfigError(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.samples_per_step < 2:
            raise ConfigError("samples_per_step must be at least 2")
        if not self.problems:
            raise ConfigError("at least one problem required")
        if not self.seeds:
            raise ConfigError("at least one seed required")


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """One sweep cell; fields double as the CSV column order."""

    problem: str
    mode: str
    r: int
    rho: float
    n: int
    h: float
    seed: int
    sup_error: float
    classical_evals: int
    oracle_queries: int
    repetitions: int
    wall_time: float
    error: str = ""


CSV_COLUMNS = tuple(f.name for f in dataclasses.fields(SweepRow))


def run_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Run every sweep cell; divergence becomes a flagged row, not a crash."""
    rows = []
    for problem_name, mode, r, rho, n, seed in product(
            config.problems, config.modes, config.r_values, config.rho_values,
            config.n_values, config.seeds):
        problem = catalog(problem_name, r=r, rho=rho, eta=config.eta, interval=config.interval)
        a, b = problem.interval
        h = (b - a) / n
        scfg = SolveConfig(n=n, mode=mode, delta=config.delta, seed=seed,
                           cost_constant=config.cost_constant, c=config.c)
        start = time.perf_counter()
        err_flag = ""
        err_value = math.nan
        ledger = None
        try:
            traj = solve(problem, scfg)
            ledger = traj.ledger
            if problem.reference is not None:
                err_value = sup_error(traj, problem.reference, config.samples_per_step)
            else:
                err_flag = "no-reference"
        except DivergenceError as exc:
            err_flag = f"divergence:step={exc.step}"
        wall = time.perf_counter() - start if config.timing else 0.0
        rows.append(SweepRow(
            problem=problem_name, mode=mode, r=r, rho=rho, n=n, h=h, seed=seed,
            sup_error=err_value,
            classical_evals=ledger.classical_evals if ledger else 0,
            oracle_queries=ledger.oracle_queries if ledger else 0,
            repetitions=ledger.repetitions if ledger else 0,
            wall_time=wall, error=err_flag,
        ))
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    """Serialize rows with a header; '.' decimals, repr floats, LF endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(getattr(row, name)) for name in CSV_COLUMNS])
    return buf.getvalue()


def _median_by_n(rows: Sequence[SweepRow], value) -> tuple[np.ndarray, np.ndarray]:
    by_n: dict[int, list[float]] = {}
    for row in rows:
        v = value(row)
        if math.isfinite(v):
            by_n.setdefault(row.n, []).append(v)
    ns = sorted(by_n)
    return np.array(ns, dtype=float), np.array([float(np.median(by_n[n])) for n in ns])


def estimate_order(rows: Sequence[SweepRow]) -> float:
    """Empirical convergence order from a single-group sweep.

    Fits ``log2(sup_error)`` against ``log2(h)`` by least squares after
    taking the per-``n`` median over seeds; the slope is the order.  Needs
    at least three distinct grid sizes with finite positive errors.
    """
    ns, errs = _median_by_n(rows, lambda row: row.sup_error)
    keep = errs > 0
    ns, errs = ns[keep], errs[keep]
    if len(ns) < 3:
        raise ContractViolationError("estimate_order needs at least 3 distinct n values")
    hs = np.array([next(r.h for r in rows if r.n == n) for n in ns])
    slope = np.polyfit(np.log2(hs), np.log2(errs), 1)[0]
    return float(slope)


def estimate_cost_exponent(rows: Sequence[SweepRow], delta: float = 0.1) -> float:
    """Empirical cost-vs-n exponent from a single-group sweep.

    Total cost is ``classical_evals + oracle_queries`` (median over seeds).
    For the boosted modes the cost is divided by ``log2(n) + log2(1/delta)``
    first, removing the repetition factor so the slope isolates the power
    law.
    """
    if not rows:
        raise ContractViolationError("estimate_cost_exponent needs rows")
    mode = rows[0].mode
    ns, costs = _median_by_n(rows, lambda row: float(row.classical_evals + row.oracle_queries))
    if len(ns) < 3:
        raise ContractViolationError("estimate_cost_exponent needs at least 3 distinct n values")
    if mode in BOOSTED_MODES:
        costs = costs / (np.log2(ns) + math.log2(1.0 / delta))
    slope = np.polyfit(np.log2(ns), np.log2(costs), 1)[0]
    return float(slope)


# --------------------------------------------------------------------------
# configuration plumbing


def _parse_list(text: str, convert):
    items = [part.strip() for part in text.split(",") if part.strip()]
    return tuple(convert(item) for item in items)


def _config_from_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    values: dict = {}
    if parser.has_section("experiment"):
        section = parser["experiment"]
        try:
            if "problems" in section:
                values["problems"] = _parse_list(section["problems"], str)
            if "modes" in section:
                values["modes"] = _parse_list(section["modes"], str)
            if "r" in section:
                values["r_values"] = _parse_list(section["r"], int)
            if "rho" in section:
                values["rho_values"] = _parse_list(section["rho"], float)
            if "n" in section:
                values["n_values"] = _parse_list(section["n"], int)
            if "delta" in section:
                values["delta"] = float(section["delta"])
            if "seeds" in section:
                values["seeds"] = _parse_list(section["seeds"], int)
            if "samples_per_step" in section:
                values["samples_per_step"] = int(section["samples_per_step"])
            if "out" in section:
                values["out"] = section["out"]
            if "timing" in section:
                values["timing"] = section.getboolean("timing")
            if "cost_constant" in section:
                values["cost_constant"] = float(section["cost_constant"])
            if "c" in section:
                values["c"] = float(section["c"])
        except ValueError as exc:
            raise ConfigError(f"bad value in [experiment]: {exc}") from exc
    if parser.has_section("problem"):
        section = parser["problem"]
        try:
            if "eta" in section:
                values["eta"] = float(section["eta"])
            if "interval" in section:
                iv = _parse_list(section["interval"], float)
                if len(iv) != 2:
                    raise ConfigError("interval must be two numbers")
                values["interval"] = iv
        except ValueError as exc:
            raise ConfigError(f"bad value in [problem]: {exc}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ivporacle",
        description="Sweep the oracle-corrected Taylor solver over problems, modes and grids; "
                    "emit one CSV row per (problem, mode, r, rho, n, seed) cell.",
    )
    parser.add_argument("--config", metavar="FILE", help="INI config file; flags override its values")
    parser.add_argument("--problem", metavar="NAMES",
                        help=f"comma-separated problem names (known: {', '.join(catalog_names())})")
    parser.add_argument("--mode", metavar="MODES",
                        help=f"comma-separated solver modes ({', '.join(MODES)})")
    parser.add_argument("--r", metavar="LIST", help="comma-separated derivative orders, e.g. 0,1,2")
    parser.add_argument("--rho", metavar="LIST", help="comma-separated Holder exponents, e.g. 1.0")
    parser.add_argument("--n-grid", metavar="LIST", help="comma-separated step counts, e.g. 8,16,32")
    parser.add_argument("--delta", type=float, help="overall failure budget in (0, 1/2)")
    parser.add_argument("--seeds", metavar="LIST", help="comma-separated seeds, e.g. 0,1,2")
    parser.add_argument("--samples-per-step", type=int, help="error-grid density per piece (>= 2)")
    parser.add_argument("--out", metavar="PATH", help="CSV output path, '-' for stdout")
    parser.add_argument("--timing", action="store_true",
                        help="record wall times (breaks byte-for-byte reproducibility)")
    parser.add_argument("--report", choices=("order", "cost"),
                        help="after the sweep, print a per-group slope estimate to stderr")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(_config_from_file(args.config))
    try:
        if args.problem:
            values["problems"] = _parse_list(args.problem, str)
        if args.mode:
            values["modes"] = _parse_list(args.mode, str)
        if args.r is not None:
            values["r_values"] = _parse_list(args.r, int)
        if args.rho is not None:
            values["rho_values"] = _parse_list(args.rho, float)
        if args.n_grid:
            values["n_values"] = _parse_list(args.n_grid, int)
        if args.delta is not None:
            values["delta"] = args.delta
        if args.seeds:
            values["seeds"] = _parse_list(args.seeds, int)
        if args.samples_per_step is not None:
            values["samples_per_step"] = args.samples_per_step
        if args.out:
            values["out"] = args.out
        if args.timing:
            values["timing"] = True
    except ValueError as exc:
        raise ConfigError(f"bad flag value: {exc}") from exc
    return ExperimentConfig(**values)


def _print_report(rows: list[SweepRow], kind: str, delta: float) -> None:
    groups: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.problem, row.mode, row.r, row.rho), []).append(row)
    for (problem, mode, r, rho), group in groups.items():
        try:
            if kind == "order":
                value = estimate_order(group)
            else:
                value = estimate_cost_exponent(group, delta=delta)
        except ContractViolationError as exc:
            print(f"# {kind} problem={problem} mode={mode} r={r} rho={rho}: {exc}", file=sys.stderr)
            continue
        print(f"# {kind} problem={problem} mode={mode} r={r} rho={rho} slope={value:.4f}",
              file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        rows = run_sweep(config)
    except (ConfigError, ContractViolationError, UnknownProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rows_to_csv(rows)
    if config.out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(config.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    if args.report:
        _print_report(rows, args.report, config.delta)
    return 0


if __name__ == "__main__":
    sys.exit(main())
