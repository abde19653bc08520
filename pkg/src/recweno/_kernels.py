"""Compiled per-interface loops for the semi-discrete operator.

These are point-by-point transcriptions of the array code in
:mod:`recweno.reconstruction`, :mod:`recweno.euler` and
:mod:`recweno.solver`; the tests hold the two paths together to round-off.
The compiled path is what the solver uses by default. Every kernel reads and
writes the same layouts as the array path: components first, then the row
axis, then the sweep axis.

Helpers work on scalars where they can. Passing arrays into non-inlined
numba calls costs reference-count traffic that dominated the run time.

Failure is reported through a returned status instead of an exception:
``0`` ok, ``1`` non-positive Roe sound speed, ``2`` non-physical interface
state. The caller turns a non-zero status into ``NonPhysicalState``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_LINEAR, KIND_JS, KIND_Z = 0, 1, 2
KIND_CODES = {"linear": KIND_LINEAR, "js": KIND_JS, "z": KIND_Z}
FLUX_CODES = {"hllc": 0, "llf": 1}

_jit = njit(cache=True, error_model="numpy")


@_jit
def _ipow(x, n):
    # repeated multiplication; n = 2 gives exactly x * x like numpy's square
    out = x
    for _ in range(n - 1):
        out = out * x
    return out


@_jit
def _alpha(d, beta, tau, kind, p, q, eps):
    if kind == KIND_JS:
        return d / _ipow(beta + eps, p)
    return d * (1.0 + _ipow(abs(tau) / (beta + eps), q))


@_jit
def _side6(v0, v1, v2, v3, v4, v5, kind, p, q, eps):
    """Left-side sixth-order value at x_{i+1/2} from W_{i-2}..W_{i+3}."""
    d0, d1, d2, d3 = 1 / 20, 3 / 20, 3 / 5, 1 / 5
    w0 = 2 / 6 * v0 + -7 / 6 * v1 + 11 / 6 * v2
    w1 = -1 / 6 * v1 + 5 / 6 * v2 + 2 / 6 * v3
    w2 = -1 / 12 * v1 + 7 / 12 * v2 + 7 / 12 * v3 + -1 / 12 * v4
    w3 = 3 / 12 * v2 + 13 / 12 * v3 + -5 / 12 * v4 + 1 / 12 * v5
    if kind == KIND_LINEAR:
        return d0 * w0 + d1 * w1 + d2 * w2 + d3 * w3
    b0 = 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2 + 13.0 / 12.0 * (v0 - 2.0 * v1 + v2) ** 2
    second = v1 - 2.0 * v2 + v3
    g1 = v0 - 6.0 * v1 + 3.0 * v2 + 2.0 * v3
    g3 = -v0 + 3.0 * v1 - 3.0 * v2 + v3
    b1 = g1 * g1 / 36.0 + 13.0 / 12.0 * second * second + 781.0 / 720.0 * g3 * g3
    g1 = -2.0 * v1 - 3.0 * v2 + 6.0 * v3 - v4
    g3 = -v1 + 3.0 * v2 - 3.0 * v3 + v4
    b2 = g1 * g1 / 36.0 + 13.0 / 12.0 * second * second + 781.0 / 720.0 * g3 * g3
    g1 = -11.0 * v2 + 18.0 * v3 - 9.0 * v4 + 2.0 * v5
    g2 = 2.0 * v2 - 5.0 * v3 + 4.0 * v4 - v5
    g3 = -v2 + 3.0 * v3 - 3.0 * v4 + v5
    b3 = g1 * g1 / 36.0 + 13.0 / 12.0 * g2 * g2 + 781.0 / 720.0 * g3 * g3
    tau = (-3.0 * b1 + 2.0 * b2 + b3) / 6.0
    a0 = _alpha(d0, b0, tau, kind, p, q, eps)
    a1 = _alpha(d1, b1, tau, kind, p, q, eps)
    a2 = _alpha(d2, b2, tau, kind, p, q, eps)
    a3 = _alpha(d3, b3, tau, kind, p, q, eps)
    total = a0 + a1 + a2 + a3
    return a0 / total * w0 + a1 / total * w1 + a2 / total * w2 + a3 / total * w3


@_jit
def _blend5(w0, w1, w2, d0, d1, d2, v0, v1, v2, v3, v4, kind, p, q, eps):
    if kind == KIND_LINEAR:
        return d0 * w0 + d1 * w1 + d2 * w2
    c = 13.0 / 12.0
    b0 = c * (v0 - 2.0 * v1 + v2) ** 2 + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2
    b1 = c * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - v3) ** 2
    b2 = c * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (3.0 * v2 - 4.0 * v3 + v4) ** 2
    tau = abs(b0 - b2)
    a0 = _alpha(d0, b0, tau, kind, p, q, eps)
    a1 = _alpha(d1, b1, tau, kind, p, q, eps)
    a2 = _alpha(d2, b2, tau, kind, p, q, eps)
    total = a0 + a1 + a2
    return a0 / total * w0 + a1 / total * w1 + a2 / total * w2


@_jit
def _right_end5(v0, v1, v2, v3, v4, kind, p, q, eps):
    w0 = 2 / 6 * v0 + -7 / 6 * v1 + 11 / 6 * v2
    w1 = -1 / 6 * v1 + 5 / 6 * v2 + 2 / 6 * v3
    w2 = 2 / 6 * v2 + 5 / 6 * v3 + -1 / 6 * v4
    return _blend5(w0, w1, w2, 1 / 10, 3 / 5, 3 / 10, v0, v1, v2, v3, v4, kind, p, q, eps)


@_jit
def _left_end5(v0, v1, v2, v3, v4, kind, p, q, eps):
    # mirrored right-end formulas, stencils kept in left-to-right order
    w2 = 2 / 6 * v4 + -7 / 6 * v3 + 11 / 6 * v2
    w1 = -1 / 6 * v3 + 5 / 6 * v2 + 2 / 6 * v1
    w0 = 2 / 6 * v2 + 5 / 6 * v1 + -1 / 6 * v0
    return _blend5(w0, w1, w2, 3 / 10, 3 / 5, 1 / 10, v0, v1, v2, v3, v4, kind, p, q, eps)


@_jit
def _roe_average(r_a, mx_a, my_a, e_a, r_b, mx_b, my_b, e_b, gamma):
    """Roe-averaged (vx, vy, h, c2) between two conserved states."""
    g1 = gamma - 1.0
    sl = np.sqrt(r_a)
    sr = np.sqrt(r_b)
    vxa = mx_a / r_a
    vxb = mx_b / r_b
    vya = my_a / r_a
    vyb = my_b / r_b
    kin_a = mx_a * vxa + my_a * vya
    kin_b = mx_b * vxb + my_b * vyb
    vx = (sl * vxa + sr * vxb) / (sl + sr)
    vy = (sl * vya + sr * vyb) / (sl + sr)
    ha = gamma / g1 * (g1 * (e_a - 0.5 * kin_a)) / r_a + 0.5 * kin_a / r_a
    hb = gamma / g1 * (g1 * (e_b - 0.5 * kin_b)) / r_b + 0.5 * kin_b / r_b
    h = (sl * ha + sr * hb) / (sl + sr)
    c2 = g1 * (h - 0.5 * (vx * vx + vy * vy))
    return vx, vy, h, c2


@_jit
def reconstruct_lines(a, n, order, kind, p, q, eps, characteristic, gamma, left, right):
    """Interface states along the last axis of ``a`` (shape (m, rows, n + 6)).

    In 1D the tangential momentum slot is absent and treated as zero.
    """
    m = a.shape[0]
    dim = m - 2
    rows = a.shape[1]
    g1 = gamma - 1.0
    L = np.zeros((m, m))
    R = np.zeros((m, m))
    cw = np.empty((6, m))
    lo = np.empty(m)
    hi = np.empty(m)
    for r in range(rows):
        for f in range(n + 1):
            if characteristic:
                fa = f + 2
                fb = f + 3
                my_a = a[2, r, fa] if dim == 2 else 0.0
                my_b = a[2, r, fb] if dim == 2 else 0.0
                vx, vy, h, c2 = _roe_average(
                    a[0, r, fa], a[1, r, fa], my_a, a[m - 1, r, fa],
                    a[0, r, fb], a[1, r, fb], my_b, a[m - 1, r, fb], gamma,
                )
                if not c2 > 0.0:
                    return 1
                c = np.sqrt(c2)
                q2 = vx * vx + vy * vy
                b1 = g1 / c2
                b2 = 0.5 * q2 * b1
                # columns: u-c, u, [shear], u+c (same layout as euler.char_basis)
                R[0, 0] = 1.0
                R[0, 1] = 1.0
                R[0, m - 1] = 1.0
                R[1, 0] = vx - c
                R[1, 1] = vx
                R[1, m - 1] = vx + c
                R[m - 1, 0] = h - vx * c
                R[m - 1, 1] = 0.5 * q2
                R[m - 1, m - 1] = h + vx * c
                L[0, 0] = 0.5 * (b2 + vx / c)
                L[1, 0] = 1.0 - b2
                L[m - 1, 0] = 0.5 * (b2 - vx / c)
                L[0, 1] = -0.5 * b1 * vx - 0.5 / c
                L[1, 1] = b1 * vx
                L[m - 1, 1] = -0.5 * b1 * vx + 0.5 / c
                L[0, m - 1] = 0.5 * b1
                L[1, m - 1] = -b1
                L[m - 1, m - 1] = 0.5 * b1
                if dim == 2:
                    R[2, 0] = vy
                    R[2, 1] = vy
                    R[2, 3] = vy
                    R[2, 2] = 1.0
                    R[3, 2] = vy
                    R[0, 2] = 0.0
                    R[1, 2] = 0.0
                    L[0, 2] = -0.5 * b1 * vy
                    L[1, 2] = b1 * vy
                    L[3, 2] = -0.5 * b1 * vy
                    L[2, 0] = -vy
                    L[2, 1] = 0.0
                    L[2, 2] = 1.0
                    L[2, 3] = 0.0
                for s in range(6):
                    for i in range(m):
                        acc = L[i, 0] * a[0, r, f + s]
                        for j in range(1, m):
                            acc = acc + L[i, j] * a[j, r, f + s]
                        cw[s, i] = acc
            else:
                for s in range(6):
                    for i in range(m):
                        cw[s, i] = a[i, r, f + s]
            for i in range(m):
                v0 = cw[0, i]
                v1 = cw[1, i]
                v2 = cw[2, i]
                v3 = cw[3, i]
                v4 = cw[4, i]
                v5 = cw[5, i]
                if order == 6:
                    lo[i] = _side6(v0, v1, v2, v3, v4, v5, kind, p, q, eps)
                    hi[i] = _side6(v5, v4, v3, v2, v1, v0, kind, p, q, eps)
                else:
                    lo[i] = _right_end5(v0, v1, v2, v3, v4, kind, p, q, eps)
                    hi[i] = _left_end5(v1, v2, v3, v4, v5, kind, p, q, eps)
            for i in range(m):
                if characteristic:
                    al = R[i, 0] * lo[0]
                    ar = R[i, 0] * hi[0]
                    for j in range(1, m):
                        al = al + R[i, j] * lo[j]
                        ar = ar + R[i, j] * hi[j]
                    left[i, r, f] = al
                    right[i, r, f] = ar
                else:
                    left[i, r, f] = lo[i]
                    right[i, r, f] = hi[i]
    return 0


@_jit
def _flux(rl, mxl, myl, el, rr, mxr, myr, er, flux_kind, gamma):
    """Numerical x-flux between two conserved states (my = 0 in 1D).

    Returns ``(ok, f_rho, f_mx, f_my, f_E)``; ``ok`` is False on a bad state.
    """
    g1 = gamma - 1.0
    ul_n = mxl / rl
    ur_n = mxr / rr
    kl = mxl * ul_n + myl * (myl / rl)
    kr = mxr * ur_n + myr * (myr / rr)
    pl = g1 * (el - 0.5 * kl)
    pr = g1 * (er - 0.5 * kr)
    if not (rl > 0.0 and rr > 0.0 and pl > 0.0 and pr > 0.0):
        return False, 0.0, 0.0, 0.0, 0.0
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    if flux_kind == 1:
        s = max(abs(ul_n) + cl, abs(ur_n) + cr)
        return (
            True,
            0.5 * (rl * ul_n + rr * ur_n) - 0.5 * s * (rr - rl),
            0.5 * ((mxl * ul_n + pl) + (mxr * ur_n + pr)) - 0.5 * s * (mxr - mxl),
            0.5 * (myl * ul_n + myr * ur_n) - 0.5 * s * (myr - myl),
            0.5 * ((el * ul_n + pl * ul_n) + (er * ur_n + pr * ur_n)) - 0.5 * s * (er - el),
        )
    # HLLC with Einfeldt bounds
    sl_ = np.sqrt(rl)
    sr_ = np.sqrt(rr)
    ut = (sl_ * ul_n + sr_ * ur_n) / (sl_ + sr_)
    vt = (sl_ * (myl / rl) + sr_ * (myr / rr)) / (sl_ + sr_)
    hl = gamma / g1 * pl / rl + 0.5 * kl / rl
    hr = gamma / g1 * pr / rr + 0.5 * kr / rr
    h = (sl_ * hl + sr_ * hr) / (sl_ + sr_)
    ct = np.sqrt(max(g1 * (h - 0.5 * (ut * ut + vt * vt)), 0.0))
    s_l = min(ul_n - cl, ut - ct)
    s_r = max(ur_n + cr, ut + ct)
    ml = rl * (s_l - ul_n)
    mr = rr * (s_r - ur_n)
    s_star = (pr - pl + ml * ul_n - mr * ur_n) / (ml - mr)
    if s_l >= 0.0 or s_star >= 0.0:
        rho, mx, my, e, un, p, s, mk, upwind = rl, mxl, myl, el, ul_n, pl, s_l, ml, s_l >= 0.0
    else:
        rho, mx, my, e, un, p, s, mk, upwind = rr, mxr, myr, er, ur_n, pr, s_r, mr, not s_r > 0.0
    f0 = rho * un
    f1 = mx * un + p
    f2 = my * un
    f3 = e * un + p * un
    if upwind:
        return True, f0, f1, f2, f3
    factor = mk / (s - s_star)
    return (
        True,
        f0 + s * (factor * rho / rho - rho),
        f1 + s * (factor * s_star - mx),
        f2 + s * (factor * my / rho - my),
        f3 + s * (factor * (e / rho + (s_star - un) * (s_star + p / mk)) - e),
    )


@_jit
def fluxes_1d(left, right, flux_kind, gamma, out):
    """``left``/``right`` have shape (3, n+1); ``out`` receives the fluxes."""
    for j in range(left.shape[1]):
        ok, f0, f1, _, f3 = _flux(
            left[0, j], left[1, j], 0.0, left[2, j],
            right[0, j], right[1, j], 0.0, right[2, j], flux_kind, gamma,
        )
        if not ok:
            return 2
        out[0, j] = f0
        out[1, j] = f1
        out[2, j] = f3
    return 0


@_jit
def _point5(v0, v1, v2, v3, v4, c, kind, p, q, eps):
    """Tangential WENO5 value at a Gauss node; ``c`` holds 9 coefficients and 3 weights."""
    w0 = c[0] * v0 + c[1] * v1 + c[2] * v2
    w1 = c[3] * v1 + c[4] * v2 + c[5] * v3
    w2 = c[6] * v2 + c[7] * v3 + c[8] * v4
    return _blend5(w0, w1, w2, c[9], c[10], c[11], v0, v1, v2, v3, v4, kind, p, q, eps)


@_jit
def gauss_fluxes(left, right, ny, node0, node1, kind, p, q, eps, flux_kind, gamma, fallback, counter, out):
    """Tangential WENO5 at the two Gauss nodes, then the averaged x-flux.

    ``left``/``right`` have shape (4, ny+4, nf); ``node0``/``node1`` are
    12-tuples of candidate coefficients and linear weights. ``out`` is
    (4, ny, nf). With ``fallback`` a non-physical Gauss-point pair is
    replaced by the row's own interface states and ``counter[0]`` is bumped.
    """
    nf = left.shape[2]
    ul = np.empty(4)
    ur = np.empty(4)
    for j in range(ny):
        for i in range(nf):
            for g in range(2):
                node = node0 if g == 0 else node1
                for k in range(4):
                    ul[k] = _point5(
                        left[k, j, i], left[k, j + 1, i], left[k, j + 2, i], left[k, j + 3, i],
                        left[k, j + 4, i], node, kind, p, q, eps,
                    )
                    ur[k] = _point5(
                        right[k, j, i], right[k, j + 1, i], right[k, j + 2, i], right[k, j + 3, i],
                        right[k, j + 4, i], node, kind, p, q, eps,
                    )
                ok, f0, f1, f2, f3 = _flux(
                    ul[0], ul[1], ul[2], ul[3], ur[0], ur[1], ur[2], ur[3], flux_kind, gamma
                )
                if not ok:
                    if not fallback:
                        return 2
                    counter[0] += 1
                    ok, f0, f1, f2, f3 = _flux(
                        left[0, j + 2, i], left[1, j + 2, i], left[2, j + 2, i], left[3, j + 2, i],
                        right[0, j + 2, i], right[1, j + 2, i], right[2, j + 2, i], right[3, j + 2, i],
                        flux_kind, gamma,
                    )
                    if not ok:
                        return 2
                if g == 0:
                    out[0, j, i] = f0
                    out[1, j, i] = f1
                    out[2, j, i] = f2
                    out[3, j, i] = f3
                else:
                    out[0, j, i] = 0.5 * (out[0, j, i] + f0)
                    out[1, j, i] = 0.5 * (out[1, j, i] + f1)
                    out[2, j, i] = 0.5 * (out[2, j, i] + f2)
                    out[3, j, i] = 0.5 * (out[3, j, i] + f3)
    return 0
