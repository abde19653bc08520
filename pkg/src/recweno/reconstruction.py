"""Stencil-level WENO reconstruction kernels.

Two reconstructions live here:

* the sixth-order recursive scheme, which reconstructs both sides of the
  interface x_{i+1/2} from the symmetric six-cell window W_{i-2}..W_{i+3}
  with two quadratic and two cubic candidates, and
* the classical fifth-order WENO scheme (Jiang-Shu / Borges weights), which
  reconstructs the two ends of the centre cell of a five-cell window.

All kernels take the stencil on the *leading* axis, so a single window is an
array of shape ``(6,)`` and a batch of windows is ``(6, ...)``. Every trailing
axis is carried through elementwise, which is how the solver calls them.

The smoothness indicators are written in terms of three grouped stencils
``G1, G2, G3`` per candidate (scaled first, second and third derivatives of
the candidate polynomial), using the exact value of the integral definition::

    quadratic:  beta = G1**2 / 4  + 13/12 G2**2
    cubic:      beta = G1**2 / 36 + 13/12 G2**2 + 781/720 G3**2

The cubic form has no G1*G3 cross term; the 781/720 coefficient already
absorbs it (the plain 1043/960 form needs a G1*G3/72 cross term instead).
``smoothness_oracle`` evaluates the integral directly and the tests hold the
closed forms to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional

import numpy as np
from numpy.polynomial import Polynomial

Side = Literal["left", "right"]

LINEAR_WEIGHTS6 = np.array([1 / 20, 3 / 20, 3 / 5, 1 / 5])
# Left-to-right stencil order: {i-2..i}, {i-1..i+1}, {i..i+2}.
LINEAR_WEIGHTS5_RIGHT_END = np.array([1 / 10, 3 / 5, 3 / 10])
LINEAR_WEIGHTS5_LEFT_END = np.array([3 / 10, 3 / 5, 1 / 10])

# Rows: candidate k; columns: W_{i-2}..W_{i+3}. Values at x_{i+1/2}, left side.
_CAND6_LEFT = np.array(
    [
        [2 / 6, -7 / 6, 11 / 6, 0.0, 0.0, 0.0],
        [0.0, -1 / 6, 5 / 6, 2 / 6, 0.0, 0.0],
        [0.0, -1 / 12, 7 / 12, 7 / 12, -1 / 12, 0.0],
        [0.0, 0.0, 3 / 12, 13 / 12, -5 / 12, 1 / 12],
    ]
)
_OPT6 = np.array([1, -8, 37, 37, -8, 1]) / 60.0


class NonFiniteWindow(ValueError):
    """Raised when a stencil window carries NaN or Inf."""


@dataclass(frozen=True)
class StencilWindow:
    """Six consecutive cell averages W_{i-2}..W_{i+3} around x_{i+1/2}."""

    values: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[:1] != (6,):
            raise ValueError(f"StencilWindow needs 6 values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteWindow("window contains non-finite values")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def reversed(self) -> "StencilWindow":
        return StencilWindow(self.values[::-1], self.spacing)


@dataclass(frozen=True)
class Window5:
    """Five cell averages W_{i-2}..W_{i+2} centred on cell i."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[:1] != (5,):
            raise ValueError(f"Window5 needs 5 values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteWindow("window contains non-finite values")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class WeightScheme:
    """Weight configuration: ``linear``, ``js`` (exponent p) or ``z`` (exponent q)."""

    kind: Literal["linear", "js", "z"] = "js"
    p: int = 2
    q: int = 2
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("linear", "js", "z"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError("q must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


LINEAR = WeightScheme("linear")
JS = WeightScheme("js")
Z = WeightScheme("z")


@dataclass
class CandidateSet6:
    w: np.ndarray
    d: np.ndarray
    side: Side
    beta: Optional[np.ndarray] = None


@dataclass
class CandidateSet5:
    w: np.ndarray
    d: np.ndarray
    side: Side
    beta: Optional[np.ndarray] = None


@dataclass
class ReconstructionPair:
    left: np.ndarray | float
    right: np.ndarray | float


def _stack(window, n):
    values = np.asarray(window, dtype=float)
    if values.shape[:1] != (n,):
        raise ValueError(f"expected {n} values on the leading axis, got {values.shape}")
    return values


def _apply(coeffs, values):
    # explicit sum in index order: keeps results independent of array position
    out = []
    for row in coeffs:
        acc = None
        for c, v in zip(row, values):
            if c == 0.0:
                continue
            acc = c * v if acc is None else acc + c * v
        out.append(acc)
    return np.stack(out)


def _check_side(side):
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def candidates6(window, side: Side = "left") -> CandidateSet6:
    """Four candidate values at x_{i+1/2} for one side of the interface.

    The right side is the left side applied to the reversed window.
    """
    _check_side(side)
    values = _stack(window, 6)
    if side == "right":
        values = values[::-1]
    return CandidateSet6(w=_apply(_CAND6_LEFT, values), d=LINEAR_WEIGHTS6.copy(), side=side)


def optimal6(window) -> np.ndarray | float:
    """Six-point optimal interface value, shared by both sides."""
    values = _stack(window, 6)
    # symmetric pairing so reversal gives bit-identical results
    return (
        (values[0] + values[5]) - 8.0 * (values[1] + values[4]) + 37.0 * (values[2] + values[3])
    ) / 60.0


def _smoothness6_left(v):
    wm2, wm1, w0, wp1, wp2, wp3 = v
    beta0 = 0.25 * (wm2 - 4.0 * wm1 + 3.0 * w0) ** 2 + 13.0 / 12.0 * (wm2 - 2.0 * wm1 + w0) ** 2

    def cubic(g1, g2, g3):
        return g1 * g1 / 36.0 + 13.0 / 12.0 * g2 * g2 + 781.0 / 720.0 * g3 * g3

    second = wm1 - 2.0 * w0 + wp1
    beta1 = cubic(wm2 - 6.0 * wm1 + 3.0 * w0 + 2.0 * wp1, second, -wm2 + 3.0 * wm1 - 3.0 * w0 + wp1)
    beta2 = cubic(-2.0 * wm1 - 3.0 * w0 + 6.0 * wp1 - wp2, second, -wm1 + 3.0 * w0 - 3.0 * wp1 + wp2)
    beta3 = cubic(
        -11.0 * w0 + 18.0 * wp1 - 9.0 * wp2 + 2.0 * wp3,
        2.0 * w0 - 5.0 * wp1 + 4.0 * wp2 - wp3,
        -w0 + 3.0 * wp1 - 3.0 * wp2 + wp3,
    )
    return np.stack([beta0, beta1, beta2, beta3])


def smoothness6(window, side: Side = "left") -> np.ndarray:
    """Smoothness indicators (beta_0..beta_3) of the sixth-order candidates.

    beta_1 is taken from the cubic on {I_{i-2}..I_{i+1}} rather than the
    quadratic candidate, so that a jump at x_{i-3/2} also suppresses it.
    """
    _check_side(side)
    values = _stack(window, 6)
    if side == "right":
        values = values[::-1]
    return _smoothness6_left(values)


def tau6(beta) -> np.ndarray | float:
    """Reference indicator (-3 beta_1 + 2 beta_2 + beta_3) / 6 (can be negative)."""
    beta = np.asarray(beta, dtype=float)
    return (-3.0 * beta[1] + 2.0 * beta[2] + beta[3]) / 6.0


def nonlinear_weights(d, beta, tau=None, scheme: WeightScheme = JS) -> np.ndarray:
    """Normalised nonlinear weights for candidates with linear weights ``d``.

    ``beta`` has the candidate index on the leading axis. ``tau`` is required
    for Z weights and enters as ``|tau|``.
    """
    beta = np.asarray(beta, dtype=float)
    d = np.asarray(d, dtype=float).reshape((-1,) + (1,) * (beta.ndim - 1))
    if scheme.kind == "linear":
        return np.broadcast_to(d, beta.shape).copy()
    eps = scheme.epsilon
    if scheme.kind == "js":
        alpha = d / (beta + eps) ** scheme.p
    else:
        if tau is None:
            raise ValueError("Z weights need a reference indicator tau")
        alpha = d * (1.0 + (np.abs(tau) / (beta + eps)) ** scheme.q)
    total = alpha[0]
    for a in alpha[1:]:
        total = total + a
    return alpha / total


def _blend(weights, w):
    acc = weights[0] * w[0]
    for k in range(1, len(w)):
        acc = acc + weights[k] * w[k]
    return acc


def _side6(values, scheme):
    cand = _apply(_CAND6_LEFT, values)
    if scheme.kind == "linear":
        return _blend(LINEAR_WEIGHTS6, cand)
    beta = _smoothness6_left(values)
    tau = tau6(beta) if scheme.kind == "z" else None
    return _blend(nonlinear_weights(LINEAR_WEIGHTS6, beta, tau, scheme), cand)


def reconstruct6(window, scheme: WeightScheme = JS) -> ReconstructionPair:
    """Sixth-order recursive WENO values on both sides of x_{i+1/2}."""
    values = _stack(window, 6)
    return ReconstructionPair(left=_side6(values, scheme), right=_side6(values[::-1], scheme))


# Classical fifth-order WENO ------------------------------------------------

_CAND5_RIGHT_END = np.array(
    [
        [2 / 6, -7 / 6, 11 / 6, 0.0, 0.0],
        [0.0, -1 / 6, 5 / 6, 2 / 6, 0.0],
        [0.0, 0.0, 2 / 6, 5 / 6, -1 / 6],
    ]
)


def smoothness5(window) -> np.ndarray:
    """Jiang-Shu indicators of the three quadratic sub-stencils, left to right."""
    wm2, wm1, w0, wp1, wp2 = _stack(window, 5)
    c = 13.0 / 12.0
    return np.stack(
        [
            c * (wm2 - 2.0 * wm1 + w0) ** 2 + 0.25 * (wm2 - 4.0 * wm1 + 3.0 * w0) ** 2,
            c * (wm1 - 2.0 * w0 + wp1) ** 2 + 0.25 * (wm1 - wp1) ** 2,
            c * (w0 - 2.0 * wp1 + wp2) ** 2 + 0.25 * (3.0 * w0 - 4.0 * wp1 + wp2) ** 2,
        ]
    )


def candidates5(window, side: Side) -> CandidateSet5:
    """Candidate values at the ``side`` end of the centre cell."""
    _check_side(side)
    values = _stack(window, 5)
    if side == "right":
        return CandidateSet5(_apply(_CAND5_RIGHT_END, values), LINEAR_WEIGHTS5_RIGHT_END.copy(), side)
    # left end = right end of the mirrored window, with the stencil order flipped back
    w = _apply(_CAND5_RIGHT_END, values[::-1])[::-1]
    return CandidateSet5(w, LINEAR_WEIGHTS5_LEFT_END.copy(), side)


def _weights5(d, beta, scheme):
    tau = np.abs(beta[0] - beta[2]) if scheme.kind == "z" else None
    return nonlinear_weights(d, beta, tau, scheme)


def reconstruct5(window, scheme: WeightScheme = JS) -> ReconstructionPair:
    """Fifth-order WENO values at the left and right ends of the centre cell.

    Note the convention differs from :func:`reconstruct6`: ``left`` is the
    value at x_{i-1/2} and ``right`` the value at x_{i+1/2}, both inside cell i.
    """
    values = _stack(window, 5)
    beta = smoothness5(values) if scheme.kind != "linear" else None
    out = {}
    for side in ("left", "right"):
        cand = candidates5(values, side)
        weights = cand.d if beta is None else _weights5(cand.d, beta, scheme)
        out[side] = _blend(weights, cand.w)
    return ReconstructionPair(**out)


def _average_matrix(offsets, degree):
    """Cell averages of the monomials t**k over unit cells centred at ``offsets``."""
    offsets = np.asarray(offsets, dtype=float)
    k = np.arange(degree + 1)
    return ((offsets[:, None] + 0.5) ** (k + 1) - (offsets[:, None] - 0.5) ** (k + 1)) / (k + 1)


def point_weights5(xi: float):
    """Candidate coefficients and linear weights for a point value at offset ``xi``.

    ``xi`` is measured from the centre of cell i in cell widths. Returns
    ``(coeffs, d)`` with ``coeffs`` of shape (3, 5) over W_{i-2}..W_{i+2}.
    """
    point = xi ** np.arange(5)
    coeffs = np.zeros((3, 5))
    for k in range(3):
        offsets = np.arange(k - 2, k + 1)
        coeffs[k, k : k + 3] = point[:3] @ np.linalg.inv(_average_matrix(offsets, 2))
    full = point @ np.linalg.inv(_average_matrix(np.arange(-2, 3), 4))
    d, *_ = np.linalg.lstsq(coeffs.T, full, rcond=None)
    return coeffs, d


GAUSS2_NODES = (-0.5 / np.sqrt(3.0), 0.5 / np.sqrt(3.0))
_GAUSS2_TABLE = {xi: point_weights5(xi) for xi in GAUSS2_NODES}


def interpolate5(window, xi: float, scheme: WeightScheme = JS) -> np.ndarray | float:
    """WENO5 point value inside cell i at offset ``xi`` (cell widths from centre).

    The linear weights depend on ``xi``; they must be positive, which holds at
    the two Gauss-Legendre nodes used for tangential flux quadrature.
    """
    values = _stack(window, 5)
    coeffs, d = _GAUSS2_TABLE[xi] if xi in _GAUSS2_TABLE else point_weights5(xi)
    if np.any(d <= 0):
        raise ValueError(f"linear weights not positive at xi={xi}: {d}")
    cand = _apply(coeffs, values)
    if scheme.kind == "linear":
        return _blend(d, cand)
    return _blend(_weights5(d, smoothness5(values), scheme), cand)


def smoothness_oracle(cell_averages, degree: int, target: int) -> float:
    """Smoothness indicator straight from its integral definition.

    Fits the polynomial of ``degree`` whose unit-cell averages match
    ``cell_averages`` (exact rational solve), then returns
    sum_{p>=1} int_target (d^p P / dx^p)^2 dx over the cell at index
    ``target`` of the stencil. Only used to check the closed forms.
    """
    if degree not in (2, 3, 4):
        raise ValueError("degree must be 2, 3 or 4")
    values = [Fraction(v) for v in np.asarray(cell_averages, dtype=float)]
    if len(values) != degree + 1:
        raise ValueError(f"degree {degree} needs {degree + 1} cell averages")
    offsets = [j - target for j in range(degree + 1)]
    half = Fraction(1, 2)
    rows = [
        [((o + half) ** (k + 1) - (o - half) ** (k + 1)) / (k + 1) for k in range(degree + 1)]
        for o in offsets
    ]
    coeffs = _solve_rational(rows, values)
    poly = Polynomial([float(c) for c in coeffs])
    total = 0.0
    for p in range(1, degree + 1):
        sq = poly.deriv(p) ** 2
        antider = sq.integ()
        total += antider(0.5) - antider(-0.5)
    return float(total)


def _solve_rational(rows, rhs):
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]
