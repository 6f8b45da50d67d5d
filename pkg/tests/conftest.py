"""Shared fixtures: preset potentials and a session-scoped ODE cache.

The scattering runs are the expensive part of the suite, and several test
modules probe the same (potential, epsilon, h) corners.  ``ode_probability``
memoizes full ScatteringResult objects per session so each corner is
integrated once.
"""

import math

import numpy as np
import pytest

from lzlab.potentials import Potential, preset
from lzlab.propagator import RegimeParams, ScatteringResult, scattering_matrix

_ODE_CACHE: dict = {}


@pytest.fixture(scope="session")
def tanh_pot() -> Potential:
    return preset("tanh")


@pytest.fixture(scope="session")
def two_zero_pot() -> Potential:
    return preset("two_zero")


@pytest.fixture(scope="session")
def ode():
    """Memoized scattering runs keyed by the full parameter tuple."""

    def run(pot: Potential, eps: float, h: float, tol: float = 1e-12,
            T: float | None = None) -> ScatteringResult:
        key = (id(pot), float(eps), float(h), float(tol), T)
        if key not in _ODE_CACHE:
            rp = RegimeParams(epsilon=float(eps), h=float(h))
            _ODE_CACHE[key] = scattering_matrix(pot, rp, T=T, tol=tol)
        return _ODE_CACHE[key]

    return run


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)


def fit_exponent(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])
