"""Exact Riemann solver for the 1D ideal-gas Euler equations.

Used as a test oracle (HLLC checks, star-state values) and to sample exact
self-similar solutions. States are primitive ``(rho, u, p)`` triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .euler import GasModel


class VacuumFormation(ArithmeticError):
    """The initial data generate a vacuum; the pressure function has no root."""


@dataclass(frozen=True)
class StarState:
    p: float
    u: float
    rho_left: float
    rho_right: float


def _pressure_function(p, rho, pk, ck, g):
    """Toro's f_K(p) and its derivative for one side."""
    if p > pk:
        a = 2.0 / ((g + 1.0) * rho)
        b = (g - 1.0) / (g + 1.0) * pk
        root = math.sqrt(a / (p + b))
        f = (p - pk) * root
        df = root * (1.0 - 0.5 * (p - pk) / (b + p))
    else:
        ratio = p / pk
        f = 2.0 * ck / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = ratio ** (-(g + 1.0) / (2.0 * g)) / (rho * ck)
    return f, df


def star_state(wl, wr, gas: GasModel, tol: float = 1e-12, max_iter: int = 100) -> StarState:
    """Pressure and velocity in the star region, by Newton iteration on p."""
    rl, ul, pl = (float(v) for v in wl)
    rr, ur, pr = (float(v) for v in wr)
    g = gas.gamma
    cl = math.sqrt(g * pl / rl)
    cr = math.sqrt(g * pr / rr)
    du = ur - ul
    if 2.0 * (cl + cr) / (g - 1.0) <= du:
        raise VacuumFormation("pressure positivity condition violated")

    def phi(p):
        fl, dfl = _pressure_function(p, rl, pl, cl, g)
        fr, dfr = _pressure_function(p, rr, pr, cr, g)
        return fl + fr + du, dfl + dfr

    # two-rarefaction guess
    z = (g - 1.0) / (2.0 * g)
    p = ((cl + cr - 0.5 * (g - 1.0) * du) / (cl / pl**z + cr / pr**z)) ** (1.0 / z)
    p = max(p, 1e-14 * min(pl, pr))

    lo, hi = 0.0, None
    converged = False
    for _ in range(max_iter):
        f, df = phi(p)
        if f > 0:
            hi = p if hi is None else min(hi, p)
        else:
            lo = max(lo, p)
        p_new = p - f / df
        if not (p_new > lo and (hi is None or p_new < hi)):
            # Newton left the bracket; bisect instead
            if hi is None:
                p_new = 2.0 * p
            else:
                p_new = 0.5 * (lo + hi)
        change = abs(p_new - p) / (0.5 * (p_new + p))
        p = p_new
        if change < tol:
            converged = True
            break
    if not converged:
        raise RuntimeError("exact Riemann solver did not converge")

    fl, _ = _pressure_function(p, rl, pl, cl, g)
    fr, _ = _pressure_function(p, rr, pr, cr, g)
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    return StarState(p=p, u=u, rho_left=_star_density(p, rl, pl, g), rho_right=_star_density(p, rr, pr, g))


def _star_density(p, rho, pk, g):
    if p > pk:
        ratio = p / pk
        gm = (g - 1.0) / (g + 1.0)
        return rho * (ratio + gm) / (gm * ratio + 1.0)
    return rho * (p / pk) ** (1.0 / g)


def exact_riemann(wl, wr, gas: GasModel, xi: float, star: StarState | None = None) -> np.ndarray:
    """Primitive state of the exact solution at similarity coordinate ``xi = x/t``."""
    star = star or star_state(wl, wr, gas)
    g = gas.gamma
    if xi <= star.u:
        rho, u, p = (float(v) for v in wl)
        sign = 1.0
        rho_star = star.rho_left
    else:
        # mirror the right side onto the left-side formulas
        rho, u, p = (float(v) for v in wr)
        u, xi = -u, -xi
        sign = -1.0
        rho_star = star.rho_right
    us = sign * star.u
    c = math.sqrt(g * p / rho)
    if star.p > p:
        shock = u - c * math.sqrt((g + 1.0) / (2.0 * g) * star.p / p + (g - 1.0) / (2.0 * g))
        out = (rho, u, p) if xi <= shock else (rho_star, us, star.p)
    else:
        c_star = c * (star.p / p) ** ((g - 1.0) / (2.0 * g))
        head, tail = u - c, us - c_star
        if xi <= head:
            out = (rho, u, p)
        elif xi >= tail:
            out = (rho_star, us, star.p)
        else:
            factor = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (u - xi)
            out = (
                rho * factor ** (2.0 / (g - 1.0)),
                2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u + xi),
                p * factor ** (2.0 * g / (g - 1.0)),
            )
    return np.array([out[0], sign * out[1], out[2]])


def wave_speeds(wl, wr, gas: GasModel, star: StarState | None = None) -> dict:
    """Speeds of the left wave, contact and right wave (shock speed or head/tail)."""
    star = star or star_state(wl, wr, gas)
    g = gas.gamma
    out = {"contact": star.u}
    for side, w, sign in (("left", wl, 1.0), ("right", wr, -1.0)):
        rho, u, p = (float(v) for v in w)
        u = sign * u
        us = sign * star.u
        c = math.sqrt(g * p / rho)
        if star.p > p:
            s = u - c * math.sqrt((g + 1.0) / (2.0 * g) * star.p / p + (g - 1.0) / (2.0 * g))
            out[side] = ("shock", sign * s)
        else:
            c_star = c * (star.p / p) ** ((g - 1.0) / (2.0 * g))
            out[side] = ("rarefaction", (sign * (u - c), sign * (us - c_star)))
    return out
