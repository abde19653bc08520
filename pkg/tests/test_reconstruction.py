from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from recweno import reconstruction as rc

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
window6 = arrays(np.float64, 6, elements=finite)
window5 = arrays(np.float64, 5, elements=finite)
schemes = st.sampled_from([rc.LINEAR, rc.JS, rc.Z])

LINEAR_DATA = np.array([-2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
STEP = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])


def poly_averages(coeffs, offsets):
    """Unit-cell averages of sum c_k t^k over cells centred at ``offsets``."""
    offsets = np.asarray(offsets, dtype=float)
    out = np.zeros_like(offsets)
    for k, c in enumerate(coeffs):
        out += c * ((offsets + 0.5) ** (k + 1) - (offsets - 0.5) ** (k + 1)) / (k + 1)
    return out


# candidates6 / optimal6 ----------------------------------------------------


def test_candidates_reproduce_constants():
    np.testing.assert_allclose(rc.candidates6(np.ones(6)).w, np.ones(4), rtol=0, atol=1e-15)


def test_candidates_on_linear_data():
    np.testing.assert_allclose(rc.candidates6(LINEAR_DATA, "left").w, [0.5] * 4, atol=1e-15)


def test_candidates_on_unit_step():
    np.testing.assert_allclose(rc.candidates6(STEP, "left").w, [0, 1 / 3, 1 / 2, 3 / 4], atol=1e-15)


def test_linear_weights_are_fixed_for_both_sides():
    for side in ("left", "right"):
        d = rc.candidates6(STEP, side).d
        np.testing.assert_array_equal(d, [1 / 20, 3 / 20, 3 / 5, 1 / 5])
        assert d.sum() == pytest.approx(1.0, abs=1e-15)


def test_optimal_constant_and_linear():
    assert rc.optimal6(np.full(6, 3.7)) == pytest.approx(3.7, rel=1e-15)
    assert rc.optimal6(LINEAR_DATA) == pytest.approx(0.5, abs=1e-15)


def test_optimal_on_quintic_averages():
    j = np.arange(-2, 4)
    a = ((j + 0.5) ** 6 - (j - 0.5) ** 6) / 6
    assert rc.optimal6(a) == pytest.approx(0.03125, abs=1e-13)


def test_bad_side_and_shape_rejected():
    with pytest.raises(ValueError):
        rc.candidates6(STEP, "middle")
    with pytest.raises(ValueError):
        rc.candidates6(np.ones(5))
    with pytest.raises(rc.NonFiniteWindow):
        rc.StencilWindow([0, 1, np.nan, 0, 0, 0])


# smoothness ----------------------------------------------------------------


def test_smoothness_constant_is_zero():
    np.testing.assert_allclose(rc.smoothness6(np.full(6, 2.0)), 0, atol=1e-14)


def test_beta0_on_squares():
    assert rc.smoothness6(np.array([4.0, 1, 0, 1, 4, 9]))[0] == pytest.approx(13 / 3, rel=1e-14)


def test_smoothness_on_step():
    beta = rc.smoothness6(STEP)
    assert beta[0] == 0
    assert np.all(beta[1:] > 0)


def test_oracle_examples():
    assert rc.smoothness_oracle([2, 2, 2], 2, 1) == 0
    assert rc.smoothness_oracle([5, 5, 5, 5], 3, 0) == 0
    assert rc.smoothness_oracle([0, 1, 2], 2, 1) == pytest.approx(1.0, rel=1e-14)
    assert rc.smoothness_oracle([4, 1, 0], 2, 2) == pytest.approx(13 / 3, rel=1e-14)


def test_oracle_rejects_bad_degree():
    with pytest.raises(ValueError):
        rc.smoothness_oracle([1, 2], 1, 0)
    with pytest.raises(ValueError):
        rc.smoothness_oracle([1, 2, 3], 3, 0)


# the integral-definition oracle on each candidate's own stencil and target cell
ORACLE_LAYOUT = [(slice(0, 3), 2, 2), (slice(0, 4), 3, 2), (slice(1, 5), 3, 1), (slice(2, 6), 3, 0)]


def test_closed_forms_match_oracle_on_1000_windows(rng):
    worst = 0.0
    for _ in range(1000):
        v = rng.normal(size=6) * rng.choice([1e-2, 1.0, 1e2])
        beta = rc.smoothness6(v)
        for k, (sl, degree, target) in enumerate(ORACLE_LAYOUT):
            ref = rc.smoothness_oracle(v[sl], degree, target)
            worst = max(worst, abs(beta[k] - ref) / max(abs(ref), 1e-300))
    assert worst < 1e-12


def _printed_cubic(g1, g2, g3):
    # the printed form: 1043/960 on the third group plus a 1/432 cross term
    return g1**2 / 36 + 13 / 12 * g2**2 + 1043 / 960 * g3**2 + g1 * g3 / 432


def test_printed_cubic_forms_are_not_the_integral(rng):
    """Documented typo terms: the printed cubic indicators miss the integral.

    The quadratic beta_0 is printed exactly. For beta_1..beta_3 the printed
    1043/960 coefficient with a 1/432 cross term is not the integral for any
    cross coefficient; the exact form is 781/720 with no cross term. beta_3
    also carries +W_{i+3} where the second difference needs -W_{i+3}.
    """
    a, b, c, d, e, f = rng.normal(size=6)
    printed = [
        _printed_cubic(a - 6 * b + 3 * c + 2 * d, b - 2 * c + d, -a + 3 * b - 3 * c + d),
        _printed_cubic(-2 * b - 3 * c + 6 * d - e, b - 2 * c + d, -b + 3 * c - 3 * d + e),
        _printed_cubic(-11 * c + 18 * d - 9 * e + 2 * f, 2 * c - 5 * d + 4 * e + f, -c + 3 * d - 3 * e + f),
    ]
    v = np.array([a, b, c, d, e, f])
    for k, value in enumerate(printed, start=1):
        sl, degree, target = ORACLE_LAYOUT[k]
        ref = rc.smoothness_oracle(v[sl], degree, target)
        assert abs(value - ref) > 1e-6 * abs(ref)
    beta0_printed = 0.25 * (a - 4 * b + 3 * c) ** 2 + 13 / 12 * (a - 2 * b + c) ** 2
    assert beta0_printed == pytest.approx(rc.smoothness_oracle(v[:3], 2, 2), rel=1e-12)


def test_tau_examples():
    assert rc.tau6([7.0, 2.5, 2.5, 2.5]) == 0
    assert rc.tau6([0.0, 1.0, 2.0, 3.0]) == pytest.approx(2 / 3, rel=1e-15)


# nonlinear weights ---------------------------------------------------------


def test_equal_betas_give_linear_weights():
    d = rc.LINEAR_WEIGHTS6
    np.testing.assert_allclose(rc.nonlinear_weights(d, np.full(4, 0.3), scheme=rc.JS), d, rtol=1e-15)


def test_step_at_interface_selects_candidate0():
    beta = rc.smoothness6(STEP, "left")
    w = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, beta, scheme=rc.JS)
    assert w[0] > 0.999
    assert np.all(w[1:] < 1e-3)


def test_linear_scheme_returns_d():
    d = rc.LINEAR_WEIGHTS6
    np.testing.assert_array_equal(rc.nonlinear_weights(d, [1.0, 5.0, 0.0, 2.0], scheme=rc.LINEAR), d)


def test_z_requires_tau():
    with pytest.raises(ValueError):
        rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, np.ones(4), scheme=rc.Z)


def test_weight_scheme_validation():
    for bad in (dict(kind="m"), dict(p=0), dict(q=0), dict(epsilon=0.0), dict(p=1.5)):
        with pytest.raises(ValueError):
            rc.WeightScheme(**bad)


# 'discontinuity at' -> flagged candidates; the jump sits just right of the named face
SUPPRESSION = {
    "i-3/2": (1, (0, 1)),
    "i-1/2": (2, (0, 1, 2)),
    "i+1/2": (3, (1, 2, 3)),
    "i+3/2": (4, (2, 3)),
    "i+5/2": (5, (3,)),
}


@pytest.mark.parametrize("face", list(SUPPRESSION))
@pytest.mark.parametrize("up", [True, False])
def test_suppression_table(face, up):
    first_high, flagged = SUPPRESSION[face]
    v = np.zeros(6)
    v[first_high:] = 1.0
    if not up:
        v = 1.0 - v
    w = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, rc.smoothness6(v, "left"), scheme=rc.JS)
    assert np.all(w[list(flagged)] < 1e-3)
    # the right side sees the mirrored table
    wr = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, rc.smoothness6(v[::-1], "right"), scheme=rc.JS)
    np.testing.assert_allclose(wr, w, rtol=1e-14)


# reconstruct6 --------------------------------------------------------------


@pytest.mark.parametrize("scheme", [rc.LINEAR, rc.JS, rc.Z])
def test_constant_window_all_schemes(scheme):
    pair = rc.reconstruct6(np.full(6, -4.25), scheme)
    assert pair.left == pytest.approx(-4.25, rel=1e-15)
    assert pair.right == pytest.approx(-4.25, rel=1e-15)


def test_linear_reconstruction_of_linear_data():
    pair = rc.reconstruct6(LINEAR_DATA, rc.LINEAR)
    assert (pair.left, pair.right) == (pytest.approx(0.5, abs=1e-15), pytest.approx(0.5, abs=1e-15))


def test_step_is_kept_sharp():
    pair = rc.reconstruct6(STEP, rc.JS)
    assert abs(pair.left) < 1e-3
    assert abs(pair.right - 1) < 1e-3


def test_batched_windows_match_single_calls(rng):
    batch = rng.normal(size=(6, 7, 3))
    out = rc.reconstruct6(batch, rc.Z)
    for i in range(7):
        for j in range(3):
            single = rc.reconstruct6(batch[:, i, j], rc.Z)
            assert out.left[i, j] == single.left
            assert out.right[i, j] == single.right


# reconstruct5 / interpolate5 -----------------------------------------------


def test_weno5_constant_and_linear():
    pair = rc.reconstruct5(np.full(5, 2.0), rc.JS)
    assert pair.left == pytest.approx(2.0) and pair.right == pytest.approx(2.0)
    pair = rc.reconstruct5(np.array([-2.0, -1, 0, 1, 2]), rc.LINEAR)
    assert pair.left == pytest.approx(-0.5, abs=1e-15)
    assert pair.right == pytest.approx(0.5, abs=1e-15)


def test_weno5_step_right_end():
    assert abs(rc.reconstruct5(np.array([0.0, 0, 0, 1, 1]), rc.JS).right) < 1e-3


def test_weno5_linear_weights():
    np.testing.assert_array_equal(rc.candidates5(np.zeros(5), "right").d, [0.1, 0.6, 0.3])
    np.testing.assert_array_equal(rc.candidates5(np.zeros(5), "left").d, [0.3, 0.6, 0.1])


def test_weno5_reproduces_quartic_ends():
    coeffs = [0.3, -1.1, 0.7, 0.25, -0.4]
    w = poly_averages(coeffs, np.arange(-2, 3))
    exact = lambda t: sum(c * t**k for k, c in enumerate(coeffs))  # noqa: E731
    pair = rc.reconstruct5(w, rc.LINEAR)
    assert pair.right == pytest.approx(exact(0.5), abs=1e-13)
    assert pair.left == pytest.approx(exact(-0.5), abs=1e-13)


@pytest.mark.parametrize("xi", rc.GAUSS2_NODES)
def test_gauss_point_weights_positive_and_exact(xi):
    coeffs, d = rc.point_weights5(xi)
    assert np.all(d > 0)
    assert d.sum() == pytest.approx(1.0, abs=1e-14)
    quartic = [1.0, -0.5, 2.0, 0.75, -1.25]
    w = poly_averages(quartic, np.arange(-2, 3))
    exact = sum(c * xi**k for k, c in enumerate(quartic))
    assert rc.interpolate5(w, xi, rc.LINEAR) == pytest.approx(exact, abs=1e-13)
    # each candidate reproduces quadratics
    quad = poly_averages([0.2, 1.0, -3.0], np.arange(-2, 3))
    np.testing.assert_allclose(coeffs @ quad, 0.2 + xi - 3 * xi**2, atol=1e-13)


def test_midpoint_weights_are_not_all_positive():
    _, d = rc.point_weights5(0.0)
    assert np.any(d <= 0)
    with pytest.raises(ValueError):
        rc.interpolate5(np.zeros(5), 0.0)


# invariants (property tests) -----------------------------------------------


@given(window6)
def test_convex_combination_identity(v):
    scale = max(1.0, np.abs(v).max())
    for side in ("left", "right"):
        cand = rc.candidates6(v, side)
        combined = float(np.dot(cand.d, cand.w))
        assert abs(combined - rc.optimal6(v)) <= 1e-13 * scale


@given(window6)
def test_linear_reconstruction_equals_optimal(v):
    pair = rc.reconstruct6(v, rc.LINEAR)
    scale = max(1.0, np.abs(v).max())
    assert abs(pair.left - rc.optimal6(v)) <= 1e-13 * scale
    assert abs(pair.right - rc.optimal6(v)) <= 1e-13 * scale


@given(arrays(np.float64, 6, elements=st.floats(-2, 2)), st.floats(-0.5, 0.5))
def test_polynomial_reproduction_degree5(coeffs, shift):
    offsets = np.arange(-2, 4) + shift
    w = poly_averages(coeffs, offsets)
    # interface x_{i+1/2} sits at t = 0.5 + shift in these coordinates
    t = 0.5 + shift
    exact = sum(c * t**k for k, c in enumerate(coeffs))
    pair = rc.reconstruct6(w, rc.LINEAR)
    scale = max(1.0, np.abs(w).max())
    assert abs(pair.left - exact) <= 1e-12 * scale
    assert abs(pair.right - exact) <= 1e-12 * scale


@given(arrays(np.float64, 4, elements=st.floats(-2, 2)))
def test_candidate_reproduction_degrees(coeffs):
    w = poly_averages(coeffs, np.arange(-2, 4))
    exact = sum(c * 0.5**k for k, c in enumerate(coeffs))
    cand = rc.candidates6(w, "left").w
    scale = max(1.0, np.abs(w).max())
    assert np.all(np.abs(cand[2:] - exact) <= 1e-12 * scale)
    quad = poly_averages(coeffs[:3], np.arange(-2, 4))
    exact2 = sum(c * 0.5**k for k, c in enumerate(coeffs[:3]))
    assert np.all(np.abs(rc.candidates6(quad, "left").w[:2] - exact2) <= 1e-12 * scale)


@given(window6, schemes)
def test_mirror_symmetry(v, scheme):
    a = rc.reconstruct6(v, scheme)
    b = rc.reconstruct6(v[::-1].copy(), scheme)
    scale = max(1.0, np.abs(v).max())
    assert abs(a.left - b.right) <= 1e-14 * scale
    assert abs(a.right - b.left) <= 1e-14 * scale
    np.testing.assert_array_equal(rc.candidates6(v, "right").w, rc.candidates6(v[::-1].copy(), "left").w)
    np.testing.assert_array_equal(rc.smoothness6(v, "right"), rc.smoothness6(v[::-1].copy(), "left"))


@given(window6, st.sampled_from([rc.JS, rc.Z, rc.WeightScheme("z", q=1), rc.WeightScheme("js", p=1)]))
def test_weight_normalization(v, scheme):
    for side in ("left", "right"):
        beta = rc.smoothness6(v, side)
        assert np.all(beta >= 0)
        w = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, beta, rc.tau6(beta), scheme)
        assert np.all((w >= 0) & (w <= 1))
        assert abs(w.sum() - 1.0) <= 1e-14


@given(window5, schemes)
def test_weno5_mirror(v, scheme):
    a = rc.reconstruct5(v, scheme)
    b = rc.reconstruct5(v[::-1].copy(), scheme)
    scale = max(1.0, np.abs(v).max())
    assert abs(a.left - b.right) <= 1e-13 * scale
    assert abs(a.right - b.left) <= 1e-13 * scale


@given(
    arrays(np.float64, 6, elements=st.floats(-1, 1)),
    st.integers(0, 5),
    st.floats(1.0, 10.0),
    st.floats(1.0, 1e6),
)
def test_argmax_weight_is_scale_invariant(noise, jump_at, jump, s):
    v = 0.01 * noise
    v[jump_at:] += jump
    if jump_at == 0:
        v[0] -= jump
    beta = rc.smoothness6(v)
    base = np.argmax(rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, beta, scheme=rc.JS))
    scaled = np.argmax(rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, rc.smoothness6(s * v), scheme=rc.JS))
    assert base == scaled


@given(window6)
def test_nonfinite_inputs_propagate(v):
    v = v.copy()
    v[3] = np.nan
    assert np.isnan(rc.reconstruct6(v, rc.JS).left)
