"""Benchmark problems, reference solutions, error norms and convergence studies."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import reconstruction as rc
from .euler import GasModel, prim_to_cons
from .solver import (
    DMR_POST,
    DMR_PRE,
    DMR_X0,
    SQRT3,
    Boundary,
    BoundarySpec,
    ConservedField,
    Discretization,
    Grid,
    SourceSpec,
    TimeControls,
    advance,
)

log = logging.getLogger(__name__)

# 5-point Gauss-Legendre on [-1/2, 1/2]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
_GL_NODES = 0.5 * _GL_NODES
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


class ConfigurationMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """A named benchmark: domain, default resolution, gas, end time, BCs, IC.

    1D initial data are ``pieces``: ``(a, b, prim(x))`` intervals that are
    integrated separately, so jumps inside a cell are averaged by volume
    fraction. 2D initial data are a pointwise ``prim2d(x, y)``.
    """

    name: str
    lower: tuple
    upper: tuple
    n: tuple
    gamma: float
    t_end: float
    bc: BoundarySpec
    source: SourceSpec = SourceSpec()
    pieces: tuple = ()
    prim2d: Optional[Callable] = None
    cfl: float = 0.5

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def gas(self) -> GasModel:
        return GasModel(self.gamma)

    def grid(self, n=None) -> Grid:
        n = self.n if n is None else tuple(np.atleast_1d(n))
        if len(n) == 1 and self.dim == 2:
            # a single count means square cells along x
            lx = self.upper[0] - self.lower[0]
            ly = self.upper[1] - self.lower[1]
            n = (n[0], int(round(n[0] * ly / lx)))
        return Grid(self.lower, self.upper, n)


def _const(*state):
    state = np.asarray(state, dtype=float)

    def prim(x):
        return np.broadcast_to(state[:, None], (state.size, np.size(x))).copy()

    return prim


def _advect_sine_prim(x, t=0.0):
    x = np.asarray(x, dtype=float)
    return np.stack([1.0 + 0.2 * np.sin(np.pi * (x - t)), np.ones_like(x), np.ones_like(x)])


def exact_advect_sine(x, t):
    """Analytic solution of the density-advection problem (period 2, unit speed)."""
    return _advect_sine_prim(x, t)


def _shu_osher_wave(x):
    x = np.asarray(x, dtype=float)
    return np.stack([1.0 + 0.2 * np.sin(5.0 * x), np.zeros_like(x), np.ones_like(x)])


def _titarev_toro_wave(x):
    x = np.asarray(x, dtype=float)
    return np.stack([1.0 + 0.1 * np.sin(20.0 * np.pi * x), np.zeros_like(x), np.ones_like(x)])


def _quadrants(split, states):
    s1, s2, s3, s4 = (np.asarray(s, dtype=float) for s in states)

    def prim(x, y):
        right = x > split
        top = y > split
        out = np.where(top & right, s1[:, None, None], 0.0)
        out = np.where(top & ~right, s2[:, None, None], out)
        out = np.where(~top & ~right, s3[:, None, None], out)
        return np.where(~top & right, s4[:, None, None], out)

    return prim


def _dmr_prim(x, y):
    behind = x < DMR_X0 + y / SQRT3
    return np.where(behind, np.array(DMR_POST)[:, None, None], np.array(DMR_PRE)[:, None, None])


def _rayleigh_taylor(gamma):
    def prim(x, y):
        heavy = y <= 0.5
        rho = np.where(heavy, 2.0, 1.0)
        p = np.where(heavy, 2.0 * y + 1.0, y + 1.5)
        c = np.sqrt(gamma * p / rho)
        v = -0.025 * c * np.cos(8.0 * np.pi * x)
        return np.stack([rho, np.zeros_like(rho), v, p])

    return prim


def _outflow(dim):
    return BoundarySpec.uniform("outflow", dim)


PROBLEMS = {
    "advect_sine": ProblemSpec(
        "advect_sine", (0.0,), (2.0,), (20,), 1.4, 2.0,
        BoundarySpec.uniform("periodic"), pieces=((0.0, 2.0, _advect_sine_prim),), cfl=0.2,
    ),
    "blast_wave": ProblemSpec(
        "blast_wave", (0.0,), (100.0,), (400,), 1.4, 3.8,
        BoundarySpec.uniform("reflective"),
        pieces=((0.0, 10.0, _const(1, 0, 1000)), (10.0, 90.0, _const(1, 0, 0.01)), (90.0, 100.0, _const(1, 0, 100))),
    ),
    "shu_osher": ProblemSpec(
        "shu_osher", (-5.0,), (5.0,), (400,), 1.4, 1.8, _outflow(1),
        pieces=((-5.0, -4.0, _const(3.857134, 2.629369, 10.33333)), (-4.0, 5.0, _shu_osher_wave)),
    ),
    "titarev_toro": ProblemSpec(
        "titarev_toro", (-5.0,), (5.0,), (1000,), 1.4, 5.0, _outflow(1),
        pieces=((-5.0, -4.5, _const(1.515695, 0.523346, 1.805)), (-4.5, 5.0, _titarev_toro_wave)),
    ),
    "double_mach": ProblemSpec(
        "double_mach", (0.0, 0.0), (4.0, 1.0), (480, 120), 1.4, 0.2,
        BoundarySpec(Boundary("fixed", DMR_POST), Boundary("outflow"), Boundary("dmr_bottom"), Boundary("dmr_top")),
        prim2d=_dmr_prim,
    ),
    "riemann2d_shocks": ProblemSpec(
        "riemann2d_shocks", (0.0, 0.0), (1.0, 1.0), (500, 500), 1.4, 0.6, _outflow(2),
        prim2d=_quadrants(0.7, [(1.5, 0, 0, 1.5), (0.5323, 1.206, 0, 0.3), (0.138, 1.206, 1.206, 0.029), (0.5323, 0, 1.206, 0.3)]),
    ),
    "riemann2d_contacts": ProblemSpec(
        "riemann2d_contacts", (0.0, 0.0), (1.0, 1.0), (1500, 1500), 1.4, 0.35, _outflow(2),
        prim2d=_quadrants(0.5, [(1, 0.75, -0.5, 1), (2, 0.75, 0.5, 1), (1, -0.75, 0.5, 1), (3, -0.75, -0.5, 1)]),
    ),
    "rayleigh_taylor": ProblemSpec(
        "rayleigh_taylor", (0.0, 0.0), (0.25, 1.0), (100, 400), 5.0 / 3.0, 2.25,
        BoundarySpec(
            Boundary("reflective"), Boundary("reflective"),
            Boundary("fixed", (2.0, 0.0, 0.0, 1.0)), Boundary("fixed", (1.0, 0.0, 0.0, 2.5)),
        ),
        source=SourceSpec("rt_gravity"), prim2d=_rayleigh_taylor(5.0 / 3.0),
    ),
}


def get_problem(name: str, **overrides) -> ProblemSpec:
    try:
        spec = PROBLEMS[name]
    except KeyError:
        raise ConfigurationMismatch(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    if "gamma" in overrides and spec.name == "rayleigh_taylor":
        overrides.setdefault("prim2d", _rayleigh_taylor(overrides["gamma"]))
    if "n" in overrides:
        overrides["n"] = tuple(np.atleast_1d(overrides["n"]))
    return replace(spec, **overrides)


def _cell_averages_1d(spec, grid):
    edges = grid.edges(0)
    gas = spec.gas
    out = np.zeros((3, grid.n[0]))
    for a, b, prim in spec.pieces:
        lo = np.clip(edges[:-1], a, b)
        hi = np.clip(edges[1:], a, b)
        width = hi - lo
        active = width > 0
        if not np.any(active):
            continue
        mid = 0.5 * (lo + hi)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            x = mid[active] + node * width[active]
            out[:, active] += weight * width[active] * prim_to_cons(prim(x), gas)
    return out / grid.dx[0]


def _cell_averages_2d(spec, grid):
    xc = grid.centers(0)
    yc = grid.centers(1)
    dx, dy = grid.dx
    gas = spec.gas
    out = np.zeros((4,) + grid.n)
    for nx_, wx in zip(_GL_NODES, _GL_WEIGHTS):
        for ny_, wy in zip(_GL_NODES, _GL_WEIGHTS):
            x, y = np.meshgrid(xc + nx_ * dx, yc + ny_ * dy, indexing="ij")
            out += wx * wy * prim_to_cons(spec.prim2d(x, y), gas)
    return out


def init_problem(spec: ProblemSpec, grid: Optional[Grid] = None) -> ConservedField:
    """Cell averages of the initial data (5-point Gauss-Legendre per cell/piece)."""
    grid = grid or spec.grid()
    if grid.dim != spec.dim or any(
        not math.isclose(a, b) for a, b in zip(grid.lower + grid.upper, spec.lower + spec.upper)
    ):
        raise ConfigurationMismatch(f"grid does not match the {spec.name} domain")
    fld = ConservedField.zeros(grid)
    avg = _cell_averages_1d(spec, grid) if spec.dim == 1 else _cell_averages_2d(spec, grid)
    fld.data[grid.interior] = avg
    return fld


def solve(
    spec: ProblemSpec,
    n=None,
    disc: Discretization = Discretization(),
    cfl: Optional[float] = None,
    dt_law: str = "cfl",
    t_end: Optional[float] = None,
    observers: Sequence[Callable] = (),
):
    """Initialise and advance one problem; returns ``(field, StepLog)``."""
    grid = spec.grid(n)
    fld = init_problem(spec, grid)
    controls = TimeControls(
        t_end=spec.t_end if t_end is None else t_end, cfl=spec.cfl if cfl is None else cfl, dt_law=dt_law
    )
    return advance(fld, controls, spec.bc, disc, spec.gas, spec.source, observers)


# Snapshots -----------------------------------------------------------------

SNAPSHOT_MAGIC = b"RECWENO-SNAPSHOT 1\n"


@dataclass
class Snapshot:
    """Interior conserved data of a finished run.

    On disk: the magic line ``RECWENO-SNAPSHOT 1``, one line of JSON header
    (problem, n, scheme, time, lower, upper, ncomp, dtype ``<f8``), then the
    array ``(component, x[, y])`` in C (row-major) order as little-endian
    64-bit floats.
    """

    problem: str
    n: tuple
    scheme: str
    time: float
    data: np.ndarray
    lower: tuple = ()
    upper: tuple = ()

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "problem": self.problem,
            "n": list(self.n),
            "scheme": self.scheme,
            "time": self.time,
            "lower": list(self.lower),
            "upper": list(self.upper),
            "ncomp": int(self.data.shape[0]),
            "dtype": "<f8",
        }
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(np.ascontiguousarray(self.data, dtype="<f8").tobytes())
        return path

    @classmethod
    def load(cls, path) -> "Snapshot":
        with open(path, "rb") as fh:
            if fh.readline() != SNAPSHOT_MAGIC:
                raise ValueError(f"{path} is not a snapshot file")
            header = json.loads(fh.readline())
            raw = fh.read()
        shape = (header["ncomp"],) + tuple(header["n"])
        data = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float)
        return cls(
            header["problem"], tuple(header["n"]), header["scheme"], header["time"], data,
            tuple(header.get("lower", ())), tuple(header.get("upper", ())),
        )

    @classmethod
    def from_field(cls, spec: ProblemSpec, fld: ConservedField, scheme: str) -> "Snapshot":
        g = fld.grid
        return cls(spec.name, g.n, scheme, fld.time, fld.interior.copy(), g.lower, g.upper)


# WENO6-Z cannot start the blast wave (pressure ratio 1e5) without dropping a
# handful of interface states to first order; on smooth data the fallback
# never fires, so it leaves those references bit-identical
REFERENCE_DISC = Discretization(6, rc.Z, fallback=True)


def _cache_key(spec, n_ref, disc, cfl):
    parts = [spec.name, str(tuple(np.atleast_1d(n_ref))), disc.label, disc.flux, disc.variables,
             repr(disc.fallback), repr(spec.t_end), repr(spec.gamma), repr(cfl), repr(disc.weights)]
    return hashlib.sha1("|".join(parts).encode()).hexdigest()[:16]


def default_cache_dir() -> Path:
    return Path(os.environ.get("RECWENO_CACHE", Path.home() / ".cache" / "recweno"))


def reference_solution(
    spec: ProblemSpec,
    n_ref,
    disc: Discretization = REFERENCE_DISC,
    cache_dir=None,
    cfl: Optional[float] = None,
) -> Snapshot:
    """Fine-grid self-converged reference, cached on disk by configuration."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cfl = spec.cfl if cfl is None else cfl
    path = cache_dir / f"{spec.name}-{_cache_key(spec, n_ref, disc, cfl)}.snap"
    if path.exists():
        return Snapshot.load(path)
    log.info("computing %s reference at n=%s", spec.name, n_ref)
    fld, _ = solve(spec, n_ref, disc, cfl=cfl)
    snap = Snapshot.from_field(spec, fld, disc.label)
    # write-then-rename keeps concurrent readers from seeing partial files
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    snap.save(tmp)
    os.replace(tmp, path)
    return snap


# Error norms ---------------------------------------------------------------


def _block_average(data, factors):
    out = data
    for axis, f in enumerate(factors, start=1):
        shape = list(out.shape)
        shape[axis : axis + 1] = [shape[axis] // f, f]
        out = out.reshape(shape).mean(axis=axis + 1)
    return out


def error_norms(fld: ConservedField, reference, component: int = 0):
    """(L1, Linf) of one conserved component against a reference.

    ``reference`` is either a callable ``prim(x, t)`` (1D exact solution,
    cell-averaged with 5-point Gauss-Legendre) or a :class:`Snapshot` whose
    resolution is an integer multiple of the field's (block-averaged down).
    """
    grid = fld.grid
    values = fld.interior[component]
    if isinstance(reference, Snapshot):
        factors = []
        for n_ref, n in zip(reference.n, grid.n):
            if n_ref % n:
                raise ConfigurationMismatch(f"reference resolution {reference.n} is not a multiple of {grid.n}")
            factors.append(n_ref // n)
        ref = _block_average(reference.data, factors)[component]
    else:
        if grid.dim != 1:
            raise ConfigurationMismatch("callable references are 1D only")
        xc = grid.centers(0)
        dx = grid.dx[0]
        ref = np.zeros_like(xc)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            ref += weight * _component_of(reference(xc + node * dx, fld.time), component)
    diff = np.abs(values - ref)
    return float(diff.sum() * np.prod(grid.dx)), float(diff.max())


def _component_of(prim, component):
    # density is the only component shared by primitive and conserved sets
    if component != 0:
        raise ConfigurationMismatch("callable references compare density only")
    return prim[0]


@dataclass
class ErrorReport:
    label: str
    resolutions: list = field(default_factory=list)
    l1: list = field(default_factory=list)
    linf: list = field(default_factory=list)

    @property
    def orders(self) -> list:
        """log2(e_N / e_2N) between successive rows; None where N does not double."""
        out = [None]
        for k in range(1, len(self.l1)):
            if self.resolutions[k] != 2 * self.resolutions[k - 1]:
                out.append(None)
            else:
                out.append(convergence_order(self.l1[k - 1], self.l1[k]))
        return out


def convergence_order(coarse_error: float, fine_error: float) -> float:
    return math.log2(coarse_error / fine_error)


MESH_LABELS = ("cells", "inverse_dx")


def mesh_cells(spec: ProblemSpec, label: int, mesh: str = "cells") -> int:
    """Cell count for a mesh label: the label itself, or ``label`` cells per unit length."""
    if mesh == "cells":
        return int(label)
    if mesh == "inverse_dx":
        return int(round(label * (spec.upper[0] - spec.lower[0])))
    raise ConfigurationMismatch(f"unknown mesh label convention {mesh!r}; choose from {MESH_LABELS}")


def _study_case(args):
    spec, n, disc, dt_law, cfl = args
    fld, _ = solve(spec, n, disc, cfl=cfl, dt_law=dt_law)
    return error_norms(fld, exact_advect_sine)


def convergence_study(
    spec: ProblemSpec,
    schemes: dict,
    resolutions: Sequence[int],
    dt_law: str = "dt_equals_dx_squared",
    cfl: float = 0.2,
    workers: int = 1,
    mesh: str = "cells",
) -> dict:
    """Run every (scheme, N) case on the smooth advection problem.

    ``schemes`` maps a label to a :class:`Discretization`. Returns a dict of
    :class:`ErrorReport` keyed by the same labels. Cases are independent, so
    ``workers > 1`` farms them out to processes with identical results.
    ``mesh="inverse_dx"`` reads each N as dx = 1/N rather than N cells; the
    reports keep N as the row label either way.
    """
    if spec.name != "advect_sine":
        raise ConfigurationMismatch("convergence studies need the exact advect_sine solution")
    resolutions = list(resolutions)
    if any(b != 2 * a for a, b in zip(resolutions, resolutions[1:])):
        raise ConfigurationMismatch("resolutions must double from row to row")
    cases = [(spec, mesh_cells(spec, n, mesh), disc, dt_law, cfl) for disc in schemes.values() for n in resolutions]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_study_case, cases))
    else:
        results = [_study_case(c) for c in cases]
    reports = {}
    it = iter(results)
    for label in schemes:
        rep = ErrorReport(label)
        for n in resolutions:
            l1, linf = next(it)
            rep.resolutions.append(n)
            rep.l1.append(l1)
            rep.linf.append(linf)
        reports[label] = rep
    return reports
