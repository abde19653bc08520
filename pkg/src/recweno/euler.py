"""Ideal-gas Euler equations: state conversions, fluxes and characteristic bases.

State arrays carry the component index on the leading axis:

* conserved, 1D: ``(rho, rho*u, E)``; 2D: ``(rho, rho*u, rho*v, E)``
* primitive, 1D: ``(rho, u, p)``;     2D: ``(rho, u, v, p)``

Any trailing axes are treated elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class NonPhysicalState(ArithmeticError):
    """Non-positive density or pressure (or non-finite values) were produced."""

    def __init__(self, message, index=None, time=None, stage=None):
        super().__init__(message)
        self.index = index
        self.time = time
        self.stage = stage

    def __str__(self):
        parts = [self.args[0]]
        if self.index is not None:
            parts.append(f"cell={self.index}")
        if self.time is not None:
            parts.append(f"t={self.time:.17g}")
        if self.stage is not None:
            parts.append(f"stage={self.stage}")
        return ", ".join(parts)


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    vel: Sequence[float]
    p: float

    def __post_init__(self):
        if len(self.vel) not in (1, 2):
            raise ValueError("velocity needs 1 or 2 components")
        if not (self.rho > 0 and self.p > 0):
            raise NonPhysicalState(f"primitive state needs rho > 0 and p > 0, got rho={self.rho}, p={self.p}")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.rho, *self.vel, self.p], dtype=dtype or float)

    def sound_speed(self, gas: GasModel) -> float:
        return float(np.sqrt(gas.gamma * self.p / self.rho))

    @classmethod
    def from_array(cls, w) -> "PrimitiveState":
        w = np.asarray(w, dtype=float)
        return cls(float(w[0]), tuple(float(v) for v in w[1:-1]), float(w[-1]))


@dataclass(frozen=True)
class ConservedState:
    rho: float
    mom: Sequence[float]
    E: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.rho, *self.mom, self.E], dtype=dtype or float)

    @classmethod
    def from_array(cls, u) -> "ConservedState":
        u = np.asarray(u, dtype=float)
        return cls(float(u[0]), tuple(float(v) for v in u[1:-1]), float(u[-1]))


def _first_bad(mask):
    flat = np.flatnonzero(mask)
    return None if flat.size == 0 else np.unravel_index(flat[0], mask.shape)


def cons_to_prim(u, gas: GasModel, check: bool = True) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    rho = u[0]
    vel = u[1:-1] / rho
    kinetic = 0.5 * np.sum(u[1:-1] * vel, axis=0)
    p = (gas.gamma - 1.0) * (u[-1] - kinetic)
    if check:
        bad = ~((rho > 0) & (p > 0))
        if np.any(bad):
            idx = _first_bad(np.atleast_1d(bad))
            raise NonPhysicalState("non-positive density or pressure", index=idx)
    return np.concatenate([rho[None], vel, p[None]])


def prim_to_cons(w, gas: GasModel) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    rho, vel, p = w[0], w[1:-1], w[-1]
    mom = rho * vel
    energy = p / (gas.gamma - 1.0) + 0.5 * np.sum(mom * vel, axis=0)
    return np.concatenate([rho[None], mom, energy[None]])


def sound_speed(w, gas: GasModel) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.sqrt(gas.gamma * w[-1] / w[0])


def physical_flux(w, axis: int, gas: GasModel) -> np.ndarray:
    """Flux along ``axis`` (0 = x, 1 = y) of primitive state(s) ``w``."""
    w = np.asarray(w, dtype=float)
    rho, vel, p = w[0], w[1:-1], w[-1]
    un = vel[axis]
    u = prim_to_cons(w, gas)
    flux = u * un
    flux[1 + axis] += p
    flux[-1] += p * un
    return flux


def _roe_average(wl, wr, gas):
    sl, sr = np.sqrt(wl[0]), np.sqrt(wr[0])
    hl = _enthalpy(wl, gas)
    hr = _enthalpy(wr, gas)
    vel = (sl * wl[1:-1] + sr * wr[1:-1]) / (sl + sr)
    h = (sl * hl + sr * hr) / (sl + sr)
    c2 = (gas.gamma - 1.0) * (h - 0.5 * np.sum(vel * vel, axis=0))
    return vel, h, c2


def _enthalpy(w, gas):
    return gas.gamma / (gas.gamma - 1.0) * w[-1] / w[0] + 0.5 * np.sum(w[1:-1] ** 2, axis=0)


def hllc_flux(wl, wr, axis: int, gas: GasModel) -> np.ndarray:
    """HLLC flux with Einfeldt (Roe-average) wave-speed bounds."""
    wl = np.asarray(wl, dtype=float)
    wr = np.asarray(wr, dtype=float)
    rl, rr = wl[0], wr[0]
    ul, ur = wl[1 + axis], wr[1 + axis]
    pl, pr = wl[-1], wr[-1]
    cl, cr = sound_speed(wl, gas), sound_speed(wr, gas)
    vel, _, c2 = _roe_average(wl, wr, gas)
    ut = vel[axis]
    ct = np.sqrt(np.maximum(c2, 0.0))
    s_l = np.minimum(ul - cl, ut - ct)
    s_r = np.maximum(ur + cr, ut + ct)
    ml = rl * (s_l - ul)
    mr = rr * (s_r - ur)
    s_star = (pr - pl + ml * ul - mr * ur) / (ml - mr)

    Ul, Ur = prim_to_cons(wl, gas), prim_to_cons(wr, gas)
    Fl, Fr = physical_flux(wl, axis, gas), physical_flux(wr, axis, gas)

    def star_flux(w, U, F, s, m, un, p):
        factor = m / (s - s_star)
        u_star = factor * U / w[0]
        u_star[1 + axis] = factor * s_star
        u_star[-1] = factor * (U[-1] / w[0] + (s_star - un) * (s_star + p / m))
        return F + s * (u_star - U)

    fl_star = star_flux(wl, Ul, Fl, s_l, ml, ul, pl)
    fr_star = star_flux(wr, Ur, Fr, s_r, mr, ur, pr)
    return np.where(
        s_l >= 0.0, Fl, np.where(s_star >= 0.0, fl_star, np.where(s_r > 0.0, fr_star, Fr))
    )


def llf_flux(wl, wr, axis: int, gas: GasModel) -> np.ndarray:
    wl = np.asarray(wl, dtype=float)
    wr = np.asarray(wr, dtype=float)
    s_max = np.maximum(
        np.abs(wl[1 + axis]) + sound_speed(wl, gas), np.abs(wr[1 + axis]) + sound_speed(wr, gas)
    )
    Fl, Fr = physical_flux(wl, axis, gas), physical_flux(wr, axis, gas)
    return 0.5 * (Fl + Fr) - 0.5 * s_max * (prim_to_cons(wr, gas) - prim_to_cons(wl, gas))


NUMERICAL_FLUXES = {"hllc": hllc_flux, "llf": llf_flux}


@dataclass
class CharBasis:
    """Eigen-decomposition of the flux Jacobian; matrices on the last two axes."""

    left: np.ndarray
    right: np.ndarray
    eigenvalues: np.ndarray


def char_basis(ul, ur, axis: int, gas: GasModel) -> CharBasis:
    """Roe-averaged characteristic basis between conserved states ``ul``, ``ur``.

    Trailing axes of the inputs become leading axes of the returned matrices,
    i.e. ``left`` has shape ``batch + (m, m)``.
    """
    wl = cons_to_prim(ul, gas)
    wr = cons_to_prim(ur, gas)
    vel, h, c2 = _roe_average(wl, wr, gas)
    if np.any(~(c2 > 0)):
        raise NonPhysicalState("Roe average has non-positive sound speed", index=_first_bad(~(c2 > 0)))
    c = np.sqrt(c2)
    g1 = gas.gamma - 1.0
    dim = vel.shape[0]
    m = dim + 2
    batch = c.shape
    R = np.zeros(batch + (m, m))
    L = np.zeros(batch + (m, m))
    un = vel[axis]
    q2 = np.sum(vel * vel, axis=0)
    b1 = g1 / c2
    b2 = 0.5 * q2 * b1
    n = 1 + axis

    # columns: u-c, u, [shear], u+c
    R[..., 0, 0] = 1.0
    R[..., 0, 1] = 1.0
    R[..., 0, m - 1] = 1.0
    for k in range(dim):
        R[..., 1 + k, 0] = vel[k]
        R[..., 1 + k, 1] = vel[k]
        R[..., 1 + k, m - 1] = vel[k]
    R[..., n, 0] -= c
    R[..., n, m - 1] += c
    R[..., m - 1, 0] = h - un * c
    R[..., m - 1, 1] = 0.5 * q2
    R[..., m - 1, m - 1] = h + un * c

    L[..., 0, 0] = 0.5 * (b2 + un / c)
    L[..., 1, 0] = 1.0 - b2
    L[..., m - 1, 0] = 0.5 * (b2 - un / c)
    for k in range(dim):
        L[..., 0, 1 + k] = -0.5 * b1 * vel[k]
        L[..., 1, 1 + k] = b1 * vel[k]
        L[..., m - 1, 1 + k] = -0.5 * b1 * vel[k]
    L[..., 0, n] -= 0.5 / c
    L[..., m - 1, n] += 0.5 / c
    L[..., 0, m - 1] = 0.5 * b1
    L[..., 1, m - 1] = -b1
    L[..., m - 1, m - 1] = 0.5 * b1

    eig = [un - c, un]
    if dim == 2:
        t = 2 - axis
        vt = vel[1 - axis]
        R[..., t, 2] = 1.0
        R[..., m - 1, 2] = vt
        L[..., 2, 0] = -vt
        L[..., 2, t] = 1.0
        eig.append(un)
    eig.append(un + c)
    return CharBasis(left=L, right=R, eigenvalues=np.stack(eig, axis=-1))


def flux_jacobian(u, axis: int, gas: GasModel) -> np.ndarray:
    """Analytic flux Jacobian dF/dU for a single conserved state (testing aid)."""
    w = cons_to_prim(u, gas)
    dim = w.shape[0] - 2
    vel = w[1:-1]
    g1 = gas.gamma - 1.0
    q2 = float(np.sum(vel * vel))
    h = float(_enthalpy(w, gas))
    un = vel[axis]
    m = dim + 2
    A = np.zeros((m, m))
    A[0, 1 + axis] = 1.0
    for k in range(dim):
        # momentum row k: d(rho v_k u_n + p delta_kn)/dU
        A[1 + k, 0] = -vel[k] * un + (0.5 * g1 * q2 if k == axis else 0.0)
        for j in range(dim):
            A[1 + k, 1 + j] = (un if j == k else 0.0) + (vel[k] if j == axis else 0.0)
            if k == axis:
                A[1 + k, 1 + j] -= g1 * vel[j]
        A[1 + k, m - 1] = g1 if k == axis else 0.0
    A[m - 1, 0] = un * (0.5 * g1 * q2 - h)
    for j in range(dim):
        A[m - 1, 1 + j] = (h if j == axis else 0.0) - g1 * vel[j] * un
    A[m - 1, m - 1] = gas.gamma * un
    return A


def max_wave_speed(u, gas: GasModel) -> np.ndarray:
    """Largest |u_n| + c over all cells, one entry per axis.

    ``u`` is a conserved array with the component axis first.
    """
    w = cons_to_prim(u, gas)
    c = sound_speed(w, gas)
    dim = w.shape[0] - 2
    return np.array([float(np.max(np.abs(w[1 + a]) + c)) for a in range(dim)])
