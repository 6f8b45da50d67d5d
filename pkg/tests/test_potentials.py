"""Potential families: evaluation, zero/slope detection, assumption checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lzlab.errors import ConfigError, DegenerateZeroError, DomainError
from lzlab.potentials import (
    PRESETS,
    complex_step_derivative,
    eval_derivative,
    eval_potential,
    preset,
    rational,
    rational_pair,
    tanh_product,
    tanh_scaled,
    validate_assumptions,
)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_tanh_real_and_imaginary_axis_values(tanh_pot):
    assert eval_potential(tanh_pot, 0.0) == 0.0
    assert eval_potential(tanh_pot, 1.3) == pytest.approx(math.tanh(1.3), abs=1e-15)
    # tanh(i y) = i tan(y): purely imaginary on the imaginary axis
    got = eval_potential(tanh_pot, 0.5j)
    assert got == pytest.approx(1j * math.tan(0.5), abs=1e-14)


def test_two_zero_midpoint_value(two_zero_pot):
    # (t^2-1)/(t^2+1) at t=0
    assert eval_potential(two_zero_pot, 0.0) == -1.0
    assert eval_potential(two_zero_pot, 3.0) == pytest.approx(8.0 / 10.0, abs=1e-15)


def test_vectorized_evaluation_matches_scalars(two_zero_pot):
    pts = np.array([0.3, -1.7, 0.2 + 0.1j, 4.0 - 0.5j])
    vec = eval_potential(two_zero_pot, pts)
    for p, v in zip(pts, vec):
        assert v == eval_potential(two_zero_pot, complex(p))


@given(x=st.floats(min_value=-20.0, max_value=20.0),
       y=st.floats(min_value=-0.4, max_value=0.4))
@settings(max_examples=60, deadline=None)
def test_schwarz_reflection(x, y):
    # real coefficients force V(conj t) = conj V(t) throughout the sector
    pot = preset("two_zero")
    t = complex(x, y * (0.5 + abs(x) / 2.0))  # stay inside the sector wedge
    assert eval_potential(pot, np.conj(t)) == pytest.approx(
        np.conj(eval_potential(pot, t)), rel=1e-14, abs=1e-14)


def test_real_axis_values_are_real(tanh_pot, two_zero_pot):
    ts = np.linspace(-8.0, 8.0, 41)
    for pot in (tanh_pot, two_zero_pot):
        assert np.max(np.abs(np.imag(eval_potential(pot, ts + 0j)))) == 0.0


def test_sector_guard_raises_outside_wedge(tanh_pot):
    with pytest.raises(DomainError):
        eval_potential(tanh_pot, 3.0 + 3.0j)
    with pytest.raises(DomainError):
        eval_derivative(tanh_pot, 0.0 + 2.0j)


# ---------------------------------------------------------------------------
# zeros and slopes
# ---------------------------------------------------------------------------

def test_preset_zero_layout(tanh_pot, two_zero_pot):
    assert tanh_pot.zeros == (0.0,)
    assert tanh_pot.slopes == (1.0,)
    # crossings are ordered right to left: t_1 is the rightmost
    assert two_zero_pot.zeros == (1.0, -1.0)
    assert two_zero_pot.slopes == (1.0, 1.0)


def test_zeros_are_actual_roots_with_verified_slopes():
    pots = [preset(name) for name in PRESETS] + [
        rational([-1.0, 0.5, 1.0], [1.0, 0.0, 1.0]),
        tanh_product([-0.7, 0.0, 0.7]),
        rational_pair([-1.05, 1.0]),
    ]
    for pot in pots:
        assert all(z1 > z2 for z1, z2 in zip(pot.zeros, pot.zeros[1:]))
        for tk, vk in zip(pot.zeros, pot.slopes):
            assert abs(eval_potential(pot, tk)) <= 1e-12
            assert vk > 0.0
            assert vk == pytest.approx(
                abs(complex_step_derivative(pot, tk)), rel=1e-10)


def test_tanh_product_pair_slopes():
    # d/dt [tanh(t-a) tanh(t+a)] at t = a is tanh(2a)
    pot = tanh_product([-0.7, 0.7])
    assert pot.zeros == (0.7, -0.7)
    for v in pot.slopes:
        assert v == pytest.approx(math.tanh(1.4), abs=1e-12)


def test_scaled_tanh_slope_tracks_parameter():
    pot = tanh_scaled(2.5)
    assert pot.zeros == (0.0,)
    assert pot.slopes[0] == pytest.approx(2.5, rel=1e-12)


def test_flat_crossing_is_rejected():
    # t^3/(t^2+4)^2 changes sign at 0 with V'(0) = 0
    with pytest.raises(DegenerateZeroError):
        rational([0.0, 0.0, 0.0, 1.0], [16.0, 0.0, 8.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# constructor guards
# ---------------------------------------------------------------------------

def test_constructor_rejections():
    with pytest.raises(ConfigError):
        tanh_scaled(-1.0)
    with pytest.raises(ConfigError):
        rational([0.0, 0.0, 1.0], [1.0, 1.0])  # unbounded: deg num > deg den
    with pytest.raises(ConfigError):
        rational_pair([1.0])  # odd zero count cannot stay real
    with pytest.raises(ConfigError):
        preset("no_such_preset")
    with pytest.raises(ConfigError):
        # denominator root inside the analyticity sector
        rational([0.0, 1.0], [1.0, 0.0, 0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# assumption validation
# ---------------------------------------------------------------------------

def test_validate_presets_all_pass():
    for name in PRESETS:
        rep = validate_assumptions(preset(name))
        assert rep.all_passed, rep.checks
        assert set(rep.checks) == {"simple_zeros", "nonzero_limits",
                                   "tail_decay", "real_on_axis", "orientation"}


def test_validate_two_zero_tail_exponent(two_zero_pot):
    # V + 1 ~ 2/t^2: fitted decay exponent should sit at the degree gap
    rep = validate_assumptions(two_zero_pot)
    assert rep.fitted_decay == pytest.approx(2.0, abs=0.1)


def test_validate_flags_vanishing_limits():
    # t/(t^2+1) -> 0 at both ends: the nonzero-limit requirement fails
    rep = validate_assumptions(rational([0.0, 1.0], [1.0, 0.0, 1.0]))
    assert not rep.all_passed
    assert rep.checks["nonzero_limits"][0] is False
    assert rep.checks["real_on_axis"][0] is True


def test_validation_report_is_serializable(tanh_pot):
    d = validate_assumptions(tanh_pot).as_dict()
    assert d["all_passed"] is True
    assert set(d["checks"]) == {"simple_zeros", "nonzero_limits",
                                "tail_decay", "real_on_axis", "orientation"}
