"""Direct ODE route: propagation, Jost matching, S-matrix invariants."""

import math

import numpy as np
import pytest

from conftest import fit_exponent
from lzlab.errors import (
    BudgetExceededError,
    ConfigError,
    GuardViolationError,
    NumericalError,
    TDependenceError,
)
from lzlab.geometry import integral_V
from lzlab.potentials import tanh_product
from lzlab.propagator import (
    RegimeParams,
    default_truncation,
    jost_vector,
    propagate,
    scattering_matrix,
    transition_probability,
)


# ---------------------------------------------------------------- regimes

def test_regime_classification():
    assert RegimeParams(0.01, 0.01).regime == "nonadiabatic"   # mu = 0.01
    assert RegimeParams(0.5, 0.02).regime == "adiabatic"       # h/eps^2 = 0.08
    assert RegimeParams(0.2, 0.1).regime == "critical"
    assert RegimeParams(0.1, 0.1).mu == pytest.approx(0.1)
    # boundary points belong to the limiting regimes, not to critical
    # (0.0625/0.625 rounds to exactly 0.1 in binary floating point)
    assert RegimeParams(0.25, 0.625).regime == "nonadiabatic"


def test_regime_params_validation():
    with pytest.raises(ConfigError):
        RegimeParams(-0.1, 0.01)
    with pytest.raises(ConfigError):
        RegimeParams(0.1, 0.0)


# ------------------------------------------------------- pure propagation

def test_zero_coupling_is_scalar_phase(tanh_pot):
    # eps = 0 decouples the components; the first evolves by the eikonal
    # phase exp(-i/h integral V) and the second stays exactly zero.
    h = 0.05
    rp = RegimeParams(epsilon=0.0, h=h)
    psi = propagate(tanh_pot, rp, -3.0, 7.0, np.array([1.0, 0.0]), tol=1e-12)
    target = np.exp(-1j * integral_V(tanh_pot, -3.0, 7.0) / h)
    assert abs(psi[0] - target) < 1e-9
    assert psi[1] == 0.0


def test_integral_V_tanh_closed_form(tanh_pot):
    # integral of tanh is log cosh
    want = math.log(math.cosh(7.0)) - math.log(math.cosh(3.0))
    assert integral_V(tanh_pot, -3.0, 7.0) == pytest.approx(want, abs=1e-12)


def test_norm_conservation_random_states(tanh_pot, rng):
    rp = RegimeParams(epsilon=0.25, h=0.04)
    for _ in range(6):
        v = rng.normal(size=4)
        psi0 = v[:2] + 1j * v[2:]
        psi0 /= np.linalg.norm(psi0)
        out = propagate(tanh_pot, rp, -2.0, 2.0, psi0, tol=1e-12)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_tolerance_refinement_agreement(tanh_pot):
    rp = RegimeParams(epsilon=0.3, h=0.05)
    psi0 = np.array([0.6, 0.8j])
    a = propagate(tanh_pot, rp, -2.0, 2.0, psi0, tol=1e-10)
    b = propagate(tanh_pot, rp, -2.0, 2.0, psi0, tol=1e-12)
    assert np.max(np.abs(a - b)) < 1e-8


def test_propagate_rejects_too_small_tol(tanh_pot):
    with pytest.raises(ConfigError):
        propagate(tanh_pot, RegimeParams(0.1, 0.05), -1.0, 1.0,
                  np.array([1.0, 0.0]), tol=1e-14)


# ------------------------------------------------------------ Jost basis

def test_jost_pair_is_orthonormal(tanh_pot):
    rp = RegimeParams(epsilon=0.3, h=0.05)
    for side, t in (("right", 6.0), ("left", -6.0)):
        basis = np.column_stack([
            jost_vector(tanh_pot, rp, side, "+", t),
            jost_vector(tanh_pot, rp, side, "-", t),
        ])
        defect = np.max(np.abs(basis.conj().T @ basis - np.eye(2)))
        assert defect < 1e-12


def test_jost_guard_rejects_interaction_region(tanh_pot):
    rp = RegimeParams(epsilon=0.3, h=0.05)
    with pytest.raises(GuardViolationError):
        jost_vector(tanh_pot, rp, "right", "+", 0.5)


def test_jost_argument_validation(tanh_pot):
    rp = RegimeParams(epsilon=0.3, h=0.05)
    with pytest.raises(ConfigError):
        jost_vector(tanh_pot, rp, "up", "+", 6.0)
    with pytest.raises(ConfigError):
        jost_vector(tanh_pot, rp, "right", "x", 6.0)


def test_jost_small_coupling_limits(tanh_pot):
    # As eps -> 0 the rotation angle theta goes to 0 (E > 0) or pi/2
    # (E < 0), so each Jost vector collapses onto a coordinate axis.
    rp = RegimeParams(epsilon=1e-6, h=0.05)
    mags = {
        (side, sign): np.abs(jost_vector(tanh_pot, rp, side, sign, t))
        for side, t in (("right", 12.0), ("left", -12.0))
        for sign in ("+", "-")
    }
    np.testing.assert_allclose(mags[("right", "+")], [0.0, 1.0], atol=1e-5)
    np.testing.assert_allclose(mags[("right", "-")], [1.0, 0.0], atol=1e-5)
    np.testing.assert_allclose(mags[("left", "+")], [1.0, 0.0], atol=1e-5)
    np.testing.assert_allclose(mags[("left", "-")], [0.0, 1.0], atol=1e-5)


# ----------------------------------------------------------- S-matrix

def test_unitarity_and_symmetry(two_zero_pot, ode):
    res = ode(two_zero_pot, 0.05, 0.02)
    S = res.s_matrix
    assert res.unitarity_defect < 1e-9
    assert np.max(np.abs(S.conj().T @ S - np.eye(2))) < 1e-9
    # time-reversal structure: s11 = conj(s22), s12 = -conj(s21)
    assert abs(S[0, 0] - S[1, 1].conjugate()) < 1e-9
    assert abs(S[0, 1] + S[1, 0].conjugate()) < 1e-9
    assert res.integrator_stats["symmetry_defect"] < 1e-9


def test_probability_in_unit_interval(two_zero_pot, ode):
    res = ode(two_zero_pot, 0.05, 0.02)
    assert 0.0 <= res.probability <= 1.0
    assert res.probability == pytest.approx(abs(res.s_matrix[1, 0]) ** 2, abs=1e-15)


def test_probability_tolerance_invariance(tanh_pot, ode):
    a = ode(tanh_pot, 0.1, 0.02, tol=1e-10)
    b = ode(tanh_pot, 0.1, 0.02, tol=1e-12)
    assert abs(a.probability - b.probability) < 1e-8


def test_probability_truncation_invariance(tanh_pot, ode):
    res = ode(tanh_pot, 0.1, 0.02)
    # the control run at 1.5 T is part of every checked evaluation
    assert res.integrator_stats["t_independence_defect"] < 1e-6
    bigger = ode(tanh_pot, 0.1, 0.02, T=2.0 * res.truncation_T)
    assert abs(bigger.probability - res.probability) < 1e-8


def test_direction_reversal_inverts_S(tanh_pot):
    # propagating the right basis backwards must produce S^{-1}
    rp = RegimeParams(epsilon=0.3, h=0.05)
    res = scattering_matrix(tanh_pot, rp, tol=1e-12)
    T = res.truncation_T
    y0 = np.column_stack([
        jost_vector(tanh_pot, rp, "right", "+", T),
        jost_vector(tanh_pot, rp, "right", "-", T),
    ])
    cols = [propagate(tanh_pot, rp, T, -T, y0[:, j], tol=1e-12) for j in range(2)]
    basis = np.column_stack([
        jost_vector(tanh_pot, rp, "left", "+", -T),
        jost_vector(tanh_pot, rp, "left", "-", -T),
    ])
    S_back = np.linalg.solve(basis, np.column_stack(cols))
    assert np.max(np.abs(S_back - np.linalg.inv(res.s_matrix))) < 1e-9
    assert abs(abs(S_back[1, 0]) - abs(res.s_matrix[1, 0])) < 1e-9


def test_zero_coupling_probabilities(tanh_pot):
    # Odd limits (E_l = -E_r): the adiabatic labels cross, P = 1.
    res = scattering_matrix(tanh_pot, RegimeParams(0.0, 0.05), tol=1e-12)
    assert abs(res.probability - 1.0) < 1e-9
    # Even limits (E_l = E_r): the labels reconnect, P = 0 identically.
    even = tanh_product([-0.7, 0.7])
    res2 = scattering_matrix(even, RegimeParams(0.0, 0.05), tol=1e-12)
    assert res2.probability < 1e-12


def test_single_crossing_regression(tanh_pot, ode):
    # mu = 0.05 at h = 0.01; unit slope makes the exact single-crossing
    # answer exp(-pi mu) available as an independent check.
    mu, h = 0.05, 0.01
    res = ode(tanh_pot, math.sqrt(mu * h), h)
    assert res.probability == pytest.approx(0.854653, abs=5e-6)
    assert res.probability == pytest.approx(math.exp(-math.pi * mu), abs=1e-4)


def test_two_crossing_regression(two_zero_pot, ode):
    res = ode(two_zero_pot, math.sqrt(0.02 * 0.01), 0.01)
    assert res.probability == pytest.approx(0.204990, abs=5e-6)


def test_adiabatic_decay_regression(tanh_pot, ode):
    # deep adiabatic corner: P matches exp(-2 Im A / h) to leading order
    res = ode(tanh_pot, 0.4, 0.012)
    assert res.probability == pytest.approx(3.0409e-18, rel=5e-3)


# ----------------------------------------------------------- guard rails

def test_budget_exceeded(tanh_pot):
    with pytest.raises(BudgetExceededError):
        scattering_matrix(tanh_pot, RegimeParams(0.1, 0.02), budget=100)


def test_scattering_rejects_too_small_tol(tanh_pot):
    with pytest.raises(ConfigError):
        scattering_matrix(tanh_pot, RegimeParams(0.1, 0.02), tol=1e-14)


def test_under_truncation_is_detected(tanh_pot):
    # T = 3.6 satisfies the matching guard for eps = 0.15 but the tail
    # still moves P by ~1e-6 between T and 1.5 T, well above the 1e-8
    # contract, so the control run must flag it.
    with pytest.raises(TDependenceError):
        scattering_matrix(tanh_pot, RegimeParams(0.15, 0.02), T=3.6, tol=1e-12)
    assert issubclass(TDependenceError, NumericalError)


def test_check_T_false_skips_control_run(tanh_pot):
    res = scattering_matrix(tanh_pot, RegimeParams(0.15, 0.02), T=3.6,
                            tol=1e-12, check_T=False)
    assert "t_independence_defect" not in res.integrator_stats
    assert 0.0 <= res.probability <= 1.0


def test_default_truncation_clears_zeros(tanh_pot, two_zero_pot):
    for pot in (tanh_pot, two_zero_pot):
        T = default_truncation(pot, RegimeParams(0.05, 0.02))
        assert T > max(abs(z) for z in pot.zeros)
        # the chosen radius must itself sit inside the Jost guard
        jost_vector(pot, RegimeParams(0.05, 0.02), "right", "+", T)
        jost_vector(pot, RegimeParams(0.05, 0.02), "left", "-", -T)


def test_stats_contents(tanh_pot, ode):
    res = ode(tanh_pot, 0.1, 0.02)
    stats = res.integrator_stats
    for key in ("steps", "rejected", "tolerance", "symmetry_defect",
                "t_independence_defect"):
        assert key in stats
    assert stats["steps"] > 0
    assert stats["tolerance"] == 1e-12
    assert res.truncation_T > 0.0


def test_transition_probability_wrapper(tanh_pot):
    res = transition_probability(tanh_pot, RegimeParams(0.3, 0.05), tol=1e-10)
    assert 0.0 <= res.probability <= 1.0
    assert res.unitarity_defect < 1e-8
