"""Turning points, action integrals, and the decay-rate selector."""

import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest

from lzlab.errors import ConfigError, DomainError
from lzlab.geometry import (
    action_A,
    action_R,
    action_R0,
    action_infinity,
    alpha_and_K,
    build_geometry,
    integral_V,
    turning_point,
)
from lzlab.potentials import eval_potential, preset, rational_pair, tanh_scaled


# ---------------------------------------------------------------------------
# turning points
# ---------------------------------------------------------------------------

def test_turning_point_is_a_root_in_the_upper_half_plane(two_zero_pot):
    for eps in (0.02, 0.05, 0.3):
        for k in (1, 2):
            z = turning_point(two_zero_pot, k, eps)
            assert z.imag > 0.0
            res = eval_potential(two_zero_pot, z) ** 2 + eps * eps
            assert abs(res) <= 1e-12 * eps * eps


def test_turning_point_frozen_values(tanh_pot, two_zero_pot):
    # independently computed: atanh(i eps) = i atan(eps) for tanh
    assert turning_point(tanh_pot, 1, 0.01) == pytest.approx(
        1j * math.atan(0.01), abs=1e-14)
    assert turning_point(two_zero_pot, 1, 0.05) == pytest.approx(
        0.9987523388778446746981 + 0.04993761694389223373491j, abs=1e-12)
    assert turning_point(two_zero_pot, 1, 0.02) == pytest.approx(
        0.9998000599800069974809 + 0.01999600119960013994962j, abs=1e-12)


def test_turning_point_small_coupling_linear_model(two_zero_pot):
    # |zeta_k - t_k| -> eps/v_k as eps -> 0
    pots = [(preset("tanh"), 1, 1.0), (two_zero_pot, 2, 1.0),
            (tanh_scaled(2.0), 1, 2.0)]
    for pot, k, v in pots:
        eps = 1e-3
        z = turning_point(pot, k, eps)
        assert abs(z - pot.zeros[k - 1]) * v / eps == pytest.approx(1.0, rel=0.01)


def test_conjugate_turning_point_is_also_a_root(tanh_pot):
    eps = 0.2
    z = turning_point(tanh_pot, 1, eps)
    res = eval_potential(tanh_pot, np.conj(z)) ** 2 + eps * eps
    assert abs(res) <= 1e-12 * eps * eps


def test_turning_point_domain_errors(tanh_pot):
    with pytest.raises(DomainError):
        turning_point(tanh_pot, 2, 0.1)
    with pytest.raises(DomainError):
        turning_point(tanh_pot, 1, 0.0)


# ---------------------------------------------------------------------------
# crossing actions A_k
# ---------------------------------------------------------------------------

def test_action_A_frozen_values(tanh_pot, two_zero_pot):
    assert action_A(tanh_pot, 1, 0.01) == pytest.approx(
        0.0001570757058850099445436j, abs=1e-15)
    assert action_A(tanh_pot, 1, 0.35) == pytest.approx(
        0.1868650884016542247814j, rel=1e-12)
    assert action_A(two_zero_pot, 1, 0.05) == pytest.approx(
        -0.00008320855611447717998743 + 0.003923315005058675998747j, rel=1e-10)


def test_action_A_vanishes_without_coupling(tanh_pot):
    assert action_A(tanh_pot, 1, 0.0) == 0.0


def test_action_A_small_coupling_quadratic_law():
    # Im A_k / eps^2 -> pi/(2 v_k)
    for pot, k, v in [(preset("tanh"), 1, 1.0), (tanh_scaled(2.0), 1, 2.0),
                      (preset("two_zero"), 2, 1.0)]:
        a = action_A(pot, k, 1e-2)
        assert a.imag / 1e-4 == pytest.approx(math.pi / (2.0 * v), rel=0.01)


def test_action_A_imaginary_part_monotone_in_eps(two_zero_pot):
    grid = np.logspace(-4, -1, 7)
    vals = [action_A(two_zero_pot, 1, e).imag for e in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_action_A_quadrature_refinement_stable(two_zero_pot):
    a = action_A(two_zero_pot, 1, 0.05, rel_tol=1e-12)
    b = action_A(two_zero_pot, 1, 0.05, rel_tol=1e-13)
    assert abs(a - b) <= 1e-10 * abs(b)


# ---------------------------------------------------------------------------
# inter-crossing actions R_j
# ---------------------------------------------------------------------------

def test_gap_action_closed_form_limit(two_zero_pot):
    # 2 * |int_{-1}^{1} (t^2-1)/(t^2+1) dt| = 2(pi - 2)
    assert action_R(two_zero_pot, 1, 0.0) == pytest.approx(
        2.0 * (math.pi - 2.0), rel=1e-12)
    assert action_R0(two_zero_pot, 1) == pytest.approx(
        2.0 * (math.pi - 2.0), rel=1e-12)


def test_gap_action_frozen_value_and_ordering(two_zero_pot):
    r = action_R(two_zero_pot, 1, 0.05)
    assert r == pytest.approx(2.30274641810447414155, rel=1e-12)
    # coupling only increases sqrt(V^2 + eps^2) over the gap
    assert r > action_R0(two_zero_pot, 1)


def test_gap_action_excess_scaling(two_zero_pot):
    # sqrt(V^2+eps^2) - |V| integrates to (eps^2/2) sum_j 1/v_j * log(1/eps)
    # plus an analytic eps^2 term: the excess over eps^2 grows by
    # ln(2) * (1/v_1 + 1/v_2) per halving of eps
    r0 = action_R0(two_zero_pot, 1)
    ratios = [(action_R(two_zero_pot, 1, e) - r0) / (e * e)
              for e in (0.02, 0.01, 0.005)]
    inv_slope_sum = 2.0  # both crossings have unit slope
    for lo, hi in zip(ratios, ratios[1:]):
        assert hi - lo == pytest.approx(math.log(2.0) * inv_slope_sum, rel=0.03)


# ---------------------------------------------------------------------------
# tail actions and plain integrals
# ---------------------------------------------------------------------------

def test_tail_action_closed_form_and_frozen(tanh_pot, two_zero_pot):
    assert action_infinity(tanh_pot, "right", 0.0) == pytest.approx(
        -2.0 * math.log(2.0), rel=1e-12)
    assert action_infinity(tanh_pot, "right", 0.1) == pytest.approx(
        -1.358307183522157832818, rel=1e-11)
    assert action_infinity(two_zero_pot, "right", 0.05) == pytest.approx(
        -3.129480075789499787741, rel=1e-11)


def test_tail_action_symmetric_presets(tanh_pot, two_zero_pot):
    for pot in (tanh_pot, two_zero_pot):
        assert action_infinity(pot, "left", 0.07) == pytest.approx(
            action_infinity(pot, "right", 0.07), rel=1e-11)


def test_tail_action_rejects_bad_side(tanh_pot):
    with pytest.raises(ConfigError):
        action_infinity(tanh_pot, "sideways", 0.1)


def test_integral_V_against_independent_quadrature(two_zero_pot):
    got = integral_V(two_zero_pot, -1.0, 1.0)
    mp.mp.dps = 30
    want = mp.quad(lambda s: (s * s - 1) / (s * s + 1), [-1, 1])
    assert got == pytest.approx(float(want), rel=1e-12)
    assert got == pytest.approx(2.0 - math.pi, rel=1e-12)


# ---------------------------------------------------------------------------
# assembled geometry and the decay-rate selector
# ---------------------------------------------------------------------------

def test_build_geometry_collects_consistent_pieces(two_zero_pot):
    g = build_geometry(two_zero_pot, 0.05)
    assert g.epsilon == 0.05
    assert g.zeros == two_zero_pot.zeros
    assert len(g.turning_points) == len(g.actions_A) == 2
    assert len(g.actions_R) == 1
    assert g.lambda_right == pytest.approx(math.hypot(1.0, 0.05), rel=1e-14)
    assert g.actions_A[0] == pytest.approx(action_A(two_zero_pot, 1, 0.05),
                                           rel=1e-12)
    d = g.as_dict()
    assert set(d) == {"epsilon", "turning_points", "A", "R", "R0",
                      "A_r", "A_l", "alpha", "K"}


def test_alpha_selector_symmetric_tie(two_zero_pot):
    g = build_geometry(two_zero_pot, 0.3)
    alpha, dominant = alpha_and_K(g)
    assert alpha == pytest.approx(g.actions_A[0].imag, rel=1e-12)
    assert dominant == (1, 2)


def test_alpha_selector_strict_minimum():
    # (t^2-1)(t^2-4)/(t^2+1)^2: inner crossings are steeper, so they
    # carry the smaller Im A and win the minimum
    pot = rational_pair([-2.0, -1.0, 1.0, 2.0])
    g = build_geometry(pot, 0.2)
    alpha, dominant = alpha_and_K(g)
    assert dominant == (2, 3)
    assert alpha == pytest.approx(min(a.imag for a in g.actions_A), rel=1e-12)


def test_alpha_selector_tolerance_window(two_zero_pot):
    # the dominant set ties on the slopes: crossings within the relative
    # tie tolerance of the steepest one are all kept
    g = build_geometry(two_zero_pot, 0.3)
    nudged = dataclasses.replace(g, slopes=(1.0, 1.0 - 1e-12))
    assert alpha_and_K(nudged)[1] == (1, 2)
    lowered = dataclasses.replace(g, slopes=(1.0, 0.9))
    assert alpha_and_K(lowered)[1] == (1,)
    assert alpha_and_K(lowered)[0] == pytest.approx(g.actions_A[0].imag,
                                                    rel=1e-12)
