"""Command-line runner: ``recweno run|study|reference <config> [key=value ...]``.

Outputs go under ``$RECWENO_OUTPUT`` (default ``./recweno-out``) in
``output.dir`` (default: the problem name). Every invocation that gets past
argument parsing leaves a ``manifest.json`` there, failures included.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from . import output as out
from .config import ConfigError, RunConfig, echo, parse_config
from .euler import NonPhysicalState
from .problems import (
    ConfigurationMismatch,
    Snapshot,
    convergence_study,
    error_norms,
    exact_advect_sine,
    init_problem,
    reference_solution,
)
from .riemann import VacuumFormation
from .solver import advance

log = logging.getLogger("recweno")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
OUTPUT_ENV = "RECWENO_OUTPUT"


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    status: str = "running"
    exit_code: Optional[int] = None
    wall_time: float = 0.0
    steps: int = 0
    final_time: Optional[float] = None
    initial_totals: Optional[list] = None
    final_totals: Optional[list] = None
    fallbacks: Optional[list] = None
    errors: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    failure: Optional[dict] = None

    def write(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "recweno-out"))


def run_directory(config: RunConfig) -> Path:
    return output_root() / (config.output_dir or config.problem)


def _emit(fld, spec, config: RunConfig, directory: Path, tag: str) -> list:
    written = []
    gas = spec.gas
    stem = f"{config.problem}_{tag}"
    if "csv" in config.formats and spec.dim == 1:
        written.append(out.write_profile_csv(fld, gas, directory / f"{stem}.csv"))
    if "vtk" in config.formats and spec.dim == 2:
        title = f"{config.problem} t={fld.time:.17g}"
        written.append(out.write_vtk(fld, gas, directory / f"{stem}.vtk", title))
    if "slice" in config.formats and spec.dim == 2:
        written.append(out.write_slice_csv(fld, gas, directory / f"{stem}_slice.csv"))
    if "snapshot" in config.formats:
        label = config.discretization().label
        written.append(Snapshot.from_field(spec, fld, label).save(directory / f"{stem}.snap"))
    return [str(p) for p in written]


def do_run(config: RunConfig, manifest: RunManifest, directory: Path):
    spec = config.problem_spec()
    disc = config.discretization()
    controls = config.time_controls(spec)
    fld = init_problem(spec, spec.grid())
    observers = []
    if config.every > 0:
        def scheduled(f, step):
            if step % config.every == 0:
                manifest.outputs += _emit(f, spec, config, directory, f"step{step:06d}")

        observers.append(scheduled)
    try:
        fld, steplog = advance(fld, controls, spec.bc, disc, spec.gas, spec.source, observers)
    except NonPhysicalState as exc:
        exc.problem = spec.name
        raise
    manifest.steps = steplog.steps
    manifest.final_time = fld.time
    manifest.initial_totals = [float(v) for v in steplog.initial_totals]
    manifest.final_totals = [float(v) for v in steplog.final_totals]
    manifest.fallbacks = [int(v) for v in steplog.fallbacks]
    if spec.name == "advect_sine":
        l1, linf = error_norms(fld, exact_advect_sine)
        manifest.errors = {"density_L1": l1, "density_Linf": linf}
    manifest.outputs += _emit(fld, spec, config, directory, "final")


def do_study(config: RunConfig, manifest: RunManifest, directory: Path):
    spec = config.problem_spec()
    schemes = {w: config.discretization(w) for w in config.schemes}
    reports = convergence_study(
        spec, schemes, config.resolutions, config.dt_law,
        spec.cfl if config.cfl is None else config.cfl, config.workers, config.mesh,
    )
    manifest.errors = {label: {"resolutions": r.resolutions, "L1": r.l1, "Linf": r.linf, "orders": r.orders}
                       for label, r in reports.items()}
    path = out.write_convergence_csv(reports, directory / f"{config.problem}_convergence.csv")
    manifest.outputs.append(str(path))


def do_reference(config: RunConfig, manifest: RunManifest, directory: Path):
    spec = config.problem_spec()
    n_ref = config.n_ref or spec.n
    snap = reference_solution(spec, n_ref, config.discretization(), cache_dir=directory / "cache",
                              cfl=config.cfl)
    manifest.final_time = snap.time
    manifest.outputs.append(str(directory / "cache"))


COMMANDS = {"run": do_run, "study": do_study, "reference": do_reference}


def _failure(exc, kind):
    info = {"kind": kind, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("index", "time", "stage", "problem", "key", "line"):
        value = getattr(exc, attr, None)
        if value is not None:
            info[attr] = list(value) if isinstance(value, tuple) else value
    return info


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recweno", description="WENO finite-volume Euler solver")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "advance one problem and write its fields"),
        ("study", "convergence table on the smooth advection problem"),
        ("reference", "compute (or reuse) a cached fine-grid reference"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="config file (section.key = value lines)")
        p.add_argument("overrides", nargs="*", metavar="key=value")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = parse_config(args.config, args.overrides)
    except ConfigError as exc:
        # no resolved config, but a manifest still records the attempt
        manifest = RunManifest(args.command, {"source": args.config, "overrides": list(args.overrides)})
        manifest.status, manifest.exit_code = "config-error", EXIT_CONFIG
        manifest.failure = _failure(exc, "config")
        manifest.write(output_root() / "failed-config")
        print(f"recweno: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    directory = run_directory(config)
    manifest = RunManifest(args.command, config.as_dict())
    start = time.perf_counter()
    code = EXIT_OK
    try:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "config.echo").write_text(echo(config))
        COMMANDS[args.command](config, manifest, directory)
        manifest.status = "ok"
    except (ConfigError, ConfigurationMismatch, ValueError) as exc:
        code = EXIT_CONFIG
        manifest.status, manifest.failure = "config-error", _failure(exc, "config")
        print(f"recweno: configuration error: {exc}", file=sys.stderr)
    except (NonPhysicalState, VacuumFormation, FloatingPointError) as exc:
        code = EXIT_NUMERICAL
        manifest.status, manifest.failure = "numerical-failure", _failure(exc, "numerical")
        print(f"recweno: numerical failure in {config.problem}: {exc}", file=sys.stderr)
    except Exception as exc:  # keep the manifest promise for anything else
        code = 1
        manifest.status, manifest.failure = "error", _failure(exc, "internal")
        manifest.failure["traceback"] = traceback.format_exc()
        print(f"recweno: {type(exc).__name__}: {exc}", file=sys.stderr)
    manifest.exit_code = code
    manifest.wall_time = time.perf_counter() - start
    manifest.write(directory)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

__all__ = ["RunManifest", "main", "build_parser", "output_root"]
