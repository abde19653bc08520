"""Uniform-grid finite-volume solver: ghost cells, WENO fluxes, TVD RK3.

Arrays are laid out as ``(component, x[, y])`` and include ``grid.ghost``
ghost layers on every side. In 2D the y-sweep reuses the x-sweep on the
transposed array (with momentum components swapped), so both directions go
through identical arithmetic.
"""

from __future__ import annotations

import logging
import math
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from . import _kernels as kern
from . import reconstruction as rc
from .euler import (
    NUMERICAL_FLUXES,
    GasModel,
    NonPhysicalState,
    char_basis,
    cons_to_prim,
    max_wave_speed,
    prim_to_cons,
)

log = logging.getLogger(__name__)

GHOST = 3
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Grid:
    lower: tuple
    upper: tuple
    n: tuple
    ghost: int = GHOST

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in np.atleast_1d(self.lower)))
        object.__setattr__(self, "upper", tuple(float(v) for v in np.atleast_1d(self.upper)))
        object.__setattr__(self, "n", tuple(int(v) for v in np.atleast_1d(self.n)))
        if not (len(self.lower) == len(self.upper) == len(self.n)) or self.dim not in (1, 2):
            raise ValueError("grid must be 1D or 2D with matching extents")
        if any(u <= l for l, u in zip(self.lower, self.upper)) or any(n < 1 for n in self.n):
            raise ValueError("grid extents must be increasing and cell counts positive")
        if self.ghost < 3:
            raise ValueError("the six-cell window needs at least 3 ghost layers")

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple:
        return tuple((u - l) / n for l, u, n in zip(self.lower, self.upper, self.n))

    @property
    def padded_shape(self) -> tuple:
        return tuple(n + 2 * self.ghost for n in self.n)

    @property
    def interior(self) -> tuple:
        g = self.ghost
        return (slice(None),) + tuple(slice(g, g + n) for n in self.n)

    def edges(self, axis: int = 0) -> np.ndarray:
        return self.lower[axis] + np.arange(self.n[axis] + 1) * self.dx[axis]

    def centers(self, axis: int = 0, ghosts: bool = False) -> np.ndarray:
        g = self.ghost if ghosts else 0
        idx = np.arange(-g, self.n[axis] + g)
        return self.lower[axis] + (idx + 0.5) * self.dx[axis]


@dataclass
class ConservedField:
    grid: Grid
    data: np.ndarray
    time: float = 0.0

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "ConservedField":
        return cls(grid, np.zeros((grid.dim + 2,) + grid.padded_shape), t)

    @property
    def interior(self) -> np.ndarray:
        return self.data[self.grid.interior]

    def copy(self) -> "ConservedField":
        return ConservedField(self.grid, self.data.copy(), self.time)

    def primitive(self, gas: GasModel) -> np.ndarray:
        return cons_to_prim(self.interior, gas)


# Boundary conditions -------------------------------------------------------

BoundaryKind = Literal["periodic", "reflective", "outflow", "fixed", "dmr_bottom", "dmr_top"]

DMR_X0 = 1.0 / 6.0
DMR_POST = (8.0, 4.125 * SQRT3, -4.125, 116.5)
DMR_PRE = (1.4, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Boundary:
    kind: BoundaryKind
    state: Optional[tuple] = None  # primitive state, "fixed" only

    def __post_init__(self):
        if self.kind not in ("periodic", "reflective", "outflow", "fixed", "dmr_bottom", "dmr_top"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "fixed" and self.state is None:
            raise ValueError("fixed boundary needs a primitive state")


@dataclass(frozen=True)
class BoundarySpec:
    x_lo: Boundary
    x_hi: Boundary
    y_lo: Optional[Boundary] = None
    y_hi: Optional[Boundary] = None

    def __post_init__(self):
        for lo, hi in ((self.x_lo, self.x_hi), (self.y_lo, self.y_hi)):
            if lo is None and hi is None:
                continue
            if (lo is None) != (hi is None):
                raise ValueError("both sides of an axis need a boundary")
            if (lo.kind == "periodic") != (hi.kind == "periodic"):
                raise ValueError("periodic boundaries must be paired on opposite sides")

    @classmethod
    def uniform(cls, kind: BoundaryKind, dim: int = 1) -> "BoundarySpec":
        b = Boundary(kind)
        return cls(b, b, b if dim == 2 else None, b if dim == 2 else None)

    def sides(self, axis: int):
        return (self.x_lo, self.x_hi) if axis == 0 else (self.y_lo, self.y_hi)


def _take(a, axis, idx):
    sl = [slice(None)] * a.ndim
    sl[axis] = idx
    return tuple(sl)


def fill_ghosts(
    fld: ConservedField, bc: BoundarySpec, t: Optional[float] = None, gas: GasModel = GasModel()
) -> ConservedField:
    """Populate ghost layers in place; x first, then y so corners are filled."""
    t = fld.time if t is None else t
    _fill_ghost_array(fld.data, fld.grid, bc, t, gas)
    return fld


def _fill_ghost_array(u, grid, bc, t, gas):
    g = grid.ghost
    for axis in range(grid.dim):
        lo, hi = bc.sides(axis)
        if lo is None:
            raise ValueError(f"no boundary given for axis {axis}")
        n = grid.n[axis]
        ax = axis + 1
        if lo.kind == "periodic":
            u[_take(u, ax, slice(0, g))] = u[_take(u, ax, slice(n, n + g))]
            u[_take(u, ax, slice(n + g, n + 2 * g))] = u[_take(u, ax, slice(g, 2 * g))]
            continue
        for side, b in (("lo", lo), ("hi", hi)):
            if side == "lo":
                ghost_idx = np.arange(g - 1, -1, -1)
                mirror_idx = np.arange(g, 2 * g)
                edge_idx = np.full(g, g)
            else:
                ghost_idx = np.arange(n + g, n + 2 * g)
                mirror_idx = np.arange(n + g - 1, n - 1, -1)
                edge_idx = np.full(g, n + g - 1)
            _apply_boundary(u, grid, b, axis, ghost_idx, mirror_idx, edge_idx, t, gas)


def _reflect(u, ax, axis, ghost_idx, mirror_idx):
    u[_take(u, ax, ghost_idx)] = u[_take(u, ax, mirror_idx)]
    sl = list(_take(u, ax, ghost_idx))
    sl[0] = 1 + axis
    u[tuple(sl)] *= -1.0


def _apply_boundary(u, grid, b, axis, ghost_idx, mirror_idx, edge_idx, t, gas):
    ax = axis + 1
    kind = b.kind
    if kind == "reflective":
        _reflect(u, ax, axis, ghost_idx, mirror_idx)
    elif kind == "outflow":
        u[_take(u, ax, ghost_idx)] = u[_take(u, ax, edge_idx)]
    elif kind == "fixed":
        state = prim_to_cons(np.asarray(b.state, dtype=float), gas)
        u[_take(u, ax, ghost_idx)] = state.reshape((-1,) + (1,) * (u.ndim - 1))
    elif kind in ("dmr_bottom", "dmr_top"):
        if axis != 1:
            raise ValueError("double-Mach boundaries apply to the y axis only")
        post = prim_to_cons(np.array(DMR_POST), gas)
        pre = prim_to_cons(np.array(DMR_PRE), gas)
        x = grid.centers(0, ghosts=True)
        if kind == "dmr_bottom":
            _reflect(u, ax, axis, ghost_idx, mirror_idx)
            cols = x < DMR_X0
            for j in ghost_idx:
                u[:, cols, j] = post[:, None]
        else:
            y_top = grid.upper[1]
            shock_x = DMR_X0 + (y_top + 20.0 * t) / SQRT3
            behind = x < shock_x
            for j in ghost_idx:
                u[:, :, j] = np.where(behind[None, :], post[:, None], pre[:, None])




# Spatial discretisation ----------------------------------------------------


@dataclass(frozen=True)
class Discretization:
    """Reconstruction and flux choices for the semi-discrete operator."""

    order: Literal[5, 6] = 6
    weights: rc.WeightScheme = rc.JS
    flux: Literal["hllc", "llf"] = "hllc"
    variables: Literal["characteristic", "component"] = "characteristic"
    # "compiled" runs the numba loops; "array" the plain numpy reference path
    backend: Literal["compiled", "array"] = "compiled"
    # opt-in: drop a non-physical reconstructed interface state to first
    # order instead of aborting; cell averages themselves are never touched
    fallback: bool = False

    def __post_init__(self):
        if self.order not in (5, 6):
            raise ValueError("order must be 5 or 6")
        if self.flux not in NUMERICAL_FLUXES:
            raise ValueError(f"unknown flux {self.flux!r}")
        if self.variables not in ("characteristic", "component"):
            raise ValueError(f"unknown reconstruction variables {self.variables!r}")
        if self.backend not in ("compiled", "array"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def label(self) -> str:
        return f"weno{self.order}-{self.weights.kind}"


@dataclass(frozen=True)
class SourceSpec:
    kind: Literal["none", "rt_gravity"] = "none"

    def __post_init__(self):
        if self.kind not in ("none", "rt_gravity"):
            raise ValueError(f"unknown source {self.kind!r}")


NO_SOURCE = SourceSpec()


def _reconstruct_interfaces(a, n, disc: Discretization, gas: GasModel, stats=None):
    """Left/right conserved states at the n+1 interfaces along the last axis.

    ``a`` has shape ``(m, ..., n + 6)``; interface f sits between padded cells
    f+2 and f+3 and reads cells f..f+5.
    """
    if disc.backend == "compiled":
        left, right = _reconstruct_compiled(a, n, disc, gas)
    else:
        left, right = _reconstruct_array(a, n, disc, gas)
    if disc.fallback:
        bad = ~(_admissible(left, gas) & _admissible(right, gas))
        if bad.any():
            left[:, bad] = a[:, ..., 2 : n + 3][:, bad]
            right[:, bad] = a[:, ..., 3 : n + 4][:, bad]
            if stats is not None:
                stats[0] += int(bad.sum())
    return left, right


def _admissible(u, gas):
    """Mask of states with positive density and pressure (False on NaN)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = u[0]
        kinetic = 0.5 * (u[1:-1] ** 2).sum(axis=0) / rho
        p = (gas.gamma - 1.0) * (u[-1] - kinetic)
        return (rho > 0) & (p > 0)


def _reconstruct_array(a, n, disc, gas):
    windows = np.stack([a[..., k : k + n + 1] for k in range(6)])
    if disc.variables == "characteristic":
        basis = char_basis(windows[2], windows[3], 0, gas)
        windows = np.einsum("...ij,kj...->ki...", basis.left, windows)
    if disc.order == 6:
        pair = rc.reconstruct6(windows, disc.weights)
        left, right = pair.left, pair.right
    else:
        left = rc.reconstruct5(windows[0:5], disc.weights).right
        right = rc.reconstruct5(windows[1:6], disc.weights).left
    if disc.variables == "characteristic":
        left = np.einsum("...ij,j...->i...", basis.right, left)
        right = np.einsum("...ij,j...->i...", basis.right, right)
    return left, right


def _scheme_args(w: rc.WeightScheme):
    return kern.KIND_CODES[w.kind], int(w.p), int(w.q), float(w.epsilon)


def _reconstruct_compiled(a, n, disc, gas):
    m = a.shape[0]
    batch = a.shape[1:-1]
    flat = np.ascontiguousarray(a.reshape(m, -1, a.shape[-1]))
    left = np.empty((m, flat.shape[1], n + 1))
    right = np.empty_like(left)
    kind, p, q, eps = _scheme_args(disc.weights)
    status = kern.reconstruct_lines(
        flat, n, disc.order, kind, p, q, eps, disc.variables == "characteristic", gas.gamma, left, right
    )
    if status:
        raise NonPhysicalState("Roe average has non-positive sound speed")
    shape = (m,) + batch + (n + 1,)
    return left.reshape(shape), right.reshape(shape)


def _interface_flux(ul, ur, disc, gas):
    if disc.backend == "compiled" and ul.ndim == 2:
        out = np.empty_like(ul)
        if kern.fluxes_1d(ul, ur, kern.FLUX_CODES[disc.flux], gas.gamma, out):
            raise NonPhysicalState("non-positive density or pressure at an interface")
        return out
    wl = cons_to_prim(ul, gas)
    wr = cons_to_prim(ur, gas)
    with np.errstate(divide="ignore", invalid="ignore"):
        return NUMERICAL_FLUXES[disc.flux](wl, wr, 0, gas)


def rhs_1d(u: np.ndarray, grid: Grid, disc: Discretization, gas: GasModel, stats=None) -> np.ndarray:
    """Semi-discrete rate -(F_{i+1/2} - F_{i-1/2}) / dx on interior cells.

    ``stats`` (optional int array) accumulates fallback counts.
    """
    n = grid.n[0]
    g = grid.ghost
    left, right = _reconstruct_interfaces(u[:, g - 3 : g + n + 3], n, disc, gas, stats)
    flux = _interface_flux(left, right, disc, gas)
    return -(flux[:, 1:] - flux[:, :-1]) / grid.dx[0]


_SWAP = [0, 2, 1, 3]


def _node_tuple(xi):
    # nonzero candidate coefficients row by row, then the linear weights
    coeffs, d = rc._GAUSS2_TABLE[xi]
    return tuple(float(coeffs[k, k + s]) for k in range(3) for s in range(3)) + tuple(map(float, d))


_GAUSS_NODES = tuple(_node_tuple(xi) for xi in rc.GAUSS2_NODES)


def _sweep_x(u, nx, ny, g, disc, gas, stats=None):
    """Gauss-averaged x-fluxes on the (nx+1, ny) interior interfaces."""
    # tangential stencil needs 2 extra rows each side, the normal window 3 columns
    rows = u[:, g - 3 : g + nx + 3, g - 2 : g + ny + 2]
    a = np.moveaxis(rows, 1, -1)  # (m, ny+4, nx+6)
    left, right = _reconstruct_interfaces(a, nx, disc, gas, stats)  # (m, ny+4, nx+1)
    if disc.backend == "compiled":
        out = np.empty((a.shape[0], ny, nx + 1))
        counter = np.zeros(1, dtype=np.int64)
        kind, p, q, eps = _scheme_args(disc.weights)
        status = kern.gauss_fluxes(
            left, right, ny, *_GAUSS_NODES, kind, p, q, eps,
            kern.FLUX_CODES[disc.flux], gas.gamma, disc.fallback, counter, out,
        )
        if status:
            raise NonPhysicalState("non-positive density or pressure at an interface")
        if stats is not None:
            stats[1] += int(counter[0])
        return np.moveaxis(out, -1, 1)
    centre = (left[:, 2 : ny + 2], right[:, 2 : ny + 2])
    total = None
    for xi in rc.GAUSS2_NODES:
        pts = []
        for states in (left, right):
            window = np.stack([states[:, k : k + ny] for k in range(5)])
            pts.append(rc.interpolate5(window, xi, disc.weights))
        if disc.fallback:
            bad = ~(_admissible(pts[0], gas) & _admissible(pts[1], gas))
            if bad.any():
                for v, c in zip(pts, centre):
                    v[:, bad] = c[:, bad]
                if stats is not None:
                    stats[1] += int(bad.sum())
        f = _interface_flux(pts[0], pts[1], disc, gas)
        total = f if total is None else total + f
    return np.moveaxis(0.5 * total, -1, 1)  # (m, nx+1, ny)


def rhs_2d(
    u: np.ndarray,
    grid: Grid,
    disc: Discretization,
    gas: GasModel,
    source: SourceSpec = NO_SOURCE,
    stats=None,
) -> np.ndarray:
    """Dimension-by-dimension rate with 2-point Gauss tangential quadrature."""
    nx, ny = grid.n
    g = grid.ghost
    fx = _sweep_x(u, nx, ny, g, disc, gas, stats)
    ut = np.ascontiguousarray(np.swapaxes(u[_SWAP], 1, 2))
    fy = np.swapaxes(_sweep_x(ut, ny, nx, g, disc, gas, stats), 1, 2)[_SWAP]
    rate = -(fx[:, 1:, :] - fx[:, :-1, :]) / grid.dx[0] - (fy[:, :, 1:] - fy[:, :, :-1]) / grid.dx[1]
    if source.kind == "rt_gravity":
        interior = u[grid.interior]
        rate[2] += interior[0]
        rate[3] += interior[2]
    return rate


def make_rhs(grid: Grid, bc: BoundarySpec, disc: Discretization, gas: GasModel, source=NO_SOURCE, stats=None):
    """Closure ``rhs(u, t)`` that refreshes ghosts, then evaluates the rate.

    ``stats`` is an optional length-2 int array counting normal and
    tangential interface fallbacks.
    """
    if source.kind != "none" and grid.dim != 2:
        raise ValueError("rt_gravity source is only defined in 2D")

    def rhs(u, t):
        _fill_ghost_array(u, grid, bc, t, gas)
        if grid.dim == 1:
            return rhs_1d(u, grid, disc, gas, stats)
        return rhs_2d(u, grid, disc, gas, source, stats)

    return rhs


# Time integration ----------------------------------------------------------


def rk3_step(u, dt: float, rhs: Callable, t: float = 0.0, interior=Ellipsis, check=None):
    """Three-stage TVD Runge-Kutta step; ``rhs(u, t)`` returns the interior rate.

    ``check(u, stage)`` (optional) runs after every stage. A
    :class:`NonPhysicalState` raised inside ``rhs`` is tagged with the stage
    whose rate was being evaluated.
    """

    def rate(v, stage_time, stage):
        try:
            return rhs(v, stage_time)
        except NonPhysicalState as exc:
            if exc.stage is None:
                exc.stage = stage
            raise

    u0 = np.array(u, dtype=float, copy=True)
    u1 = u0.copy()
    u1[interior] = u0[interior] + dt * rate(u0, t, 1)
    if check:
        check(u1, 1)
    u2 = u0.copy()
    u2[interior] = 0.75 * u0[interior] + 0.25 * u1[interior] + 0.25 * dt * rate(u1, t + dt, 2)
    if check:
        check(u2, 2)
    u3 = u0.copy()
    u3[interior] = (
        u0[interior] / 3.0 + 2.0 / 3.0 * u2[interior] + 2.0 / 3.0 * dt * rate(u2, t + 0.5 * dt, 3)
    )
    if check:
        check(u3, 3)
    return u3


@dataclass(frozen=True)
class TimeControls:
    t_end: float
    cfl: float = 0.5
    dt_law: Literal["cfl", "dt_equals_c_dx", "dt_equals_dx_squared"] = "cfl"

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.dt_law not in ("cfl", "dt_equals_c_dx", "dt_equals_dx_squared"):
            raise ValueError(f"unknown dt law {self.dt_law!r}")


def compute_dt(fld: ConservedField, controls: TimeControls, gas: GasModel) -> float:
    dx = fld.grid.dx
    if controls.dt_law == "cfl":
        speeds = max_wave_speed(fld.interior, gas)
        dt = controls.cfl * min(h / s for h, s in zip(dx, speeds))
    elif controls.dt_law == "dt_equals_c_dx":
        dt = controls.cfl * min(dx)
    else:
        dt = min(dx) ** 2
    remaining = controls.t_end - fld.time
    if dt >= remaining * (1.0 - 1e-10):
        dt = remaining
    return dt


@dataclass
class StepLog:
    steps: int = 0
    dts: list = field(default_factory=list)
    wall_time: float = 0.0
    initial_totals: Optional[np.ndarray] = None
    final_totals: Optional[np.ndarray] = None
    # interface states dropped to first order: (normal, tangential)
    fallbacks: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))


def domain_totals(fld: ConservedField) -> np.ndarray:
    """Integral of each conserved component over the interior."""
    cell = float(np.prod(fld.grid.dx))
    axes = tuple(range(1, fld.grid.dim + 1))
    return fld.interior.sum(axis=axes) * cell


def _state_check(grid, gas, t):
    def check(u, stage):
        interior = u[grid.interior]
        if not np.all(np.isfinite(interior)):
            bad = np.argwhere(~np.isfinite(interior))[0]
            raise NonPhysicalState("non-finite state", index=tuple(int(v) for v in bad[1:]), time=t, stage=stage)
        try:
            cons_to_prim(interior, gas)
        except NonPhysicalState as exc:
            raise NonPhysicalState("non-positive density or pressure", index=exc.index, time=t, stage=stage) from None

    return check


def advance(
    fld: ConservedField,
    controls: TimeControls,
    bc: BoundarySpec,
    disc: Discretization,
    gas: GasModel,
    source: SourceSpec = NO_SOURCE,
    observers: Sequence[Callable] = (),
    max_steps: Optional[int] = None,
):
    """March ``fld`` to ``controls.t_end``; returns ``(field, StepLog)``.

    Observers are called as ``observer(field, step)`` on the initial state and
    after every step; they decide their own cadence.
    """
    fld = fld.copy()
    grid = fld.grid
    steplog = StepLog(initial_totals=domain_totals(fld))
    rhs = make_rhs(grid, bc, disc, gas, source, steplog.fallbacks)
    start = _time.perf_counter()
    fill_ghosts(fld, bc, gas=gas)
    for obs in observers:
        obs(fld, 0)
    while fld.time < controls.t_end:
        if max_steps is not None and steplog.steps >= max_steps:
            break
        try:
            dt = compute_dt(fld, controls, gas)
        except NonPhysicalState as exc:
            raise NonPhysicalState(exc.args[0], index=exc.index, time=fld.time, stage=0) from None
        check = _state_check(grid, gas, fld.time)
        try:
            fld.data = rk3_step(fld.data, dt, rhs, fld.time, grid.interior, check)
        except NonPhysicalState as exc:
            raise NonPhysicalState(
                exc.args[0], index=exc.index, time=fld.time, stage=exc.stage
            ) from None
        steplog.steps += 1
        steplog.dts.append(dt)
        fld.time = controls.t_end if dt == controls.t_end - fld.time else fld.time + dt
        for obs in observers:
            obs(fld, steplog.steps)
    fill_ghosts(fld, bc, gas=gas)
    steplog.wall_time = _time.perf_counter() - start
    steplog.final_totals = domain_totals(fld)
    log.debug("advance: %d steps in %.2fs", steplog.steps, steplog.wall_time)
    return fld, steplog


def every(k: int, fn: Callable) -> Callable:
    """Observer wrapper firing on step 0 and every ``k`` steps."""

    def observer(fld, step):
        if step % k == 0:
            fn(fld, step)

    return observer
