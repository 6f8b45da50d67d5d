"""Gauss-Legendre quadrature helpers.

All integrals in the geometry and asymptotics modules reduce to composite
32-node Gauss-Legendre panels over straight segments (real or complex),
refined adaptively by panel bisection until successive refinements agree,
plus a dyadic-panel scheme for improper integrals with decaying tails.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NonConvergenceError

__all__ = ["gl_nodes", "segment", "adaptive", "improper_tail"]

GL_ORDER = 32


@lru_cache(maxsize=8)
def gl_nodes(n: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def segment(f: Callable[[np.ndarray], np.ndarray], a: complex, b: complex,
            n: int = GL_ORDER) -> complex:
    """One Gauss-Legendre panel of f over the straight segment [a, b].

    ``f`` must accept a numpy array of (possibly complex) points.
    """
    x, w = gl_nodes(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * np.sum(w * np.asarray(f(mid + half * x)))


def adaptive(f: Callable[[np.ndarray], np.ndarray], a: complex, b: complex,
             rel_tol: float = 1e-12, abs_floor: float = 1e-300,
             max_depth: int = 40) -> complex:
    """Adaptive panel-bisection Gauss-Legendre over [a, b].

    A panel is accepted when its value agrees with the sum over its two
    halves to ``rel_tol`` (relative to the running whole-integral scale).
    """
    scale = abs(segment(f, a, b)) + abs_floor

    def recurse(lo, hi, whole, depth):
        mid = 0.5 * (lo + hi)
        left = segment(f, lo, mid)
        right = segment(f, mid, hi)
        if abs(left + right - whole) <= rel_tol * max(scale, abs(left + right)):
            return left + right
        if depth >= max_depth:
            raise NonConvergenceError(
                f"adaptive quadrature stalled on [{lo}, {hi}] at depth {depth}")
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(a, b, segment(f, a, b), 0)


def improper_tail(f: Callable[[np.ndarray], np.ndarray], a: float, direction: float,
                  rel_tol: float = 1e-14, first_span: float = 1.0,
                  max_panels: int = 60) -> float:
    """Integral of f from a to +/-infinity by dyadically growing panels.

    Panels [a, a+s], [a+s, a+3s], ... double in width; accumulation stops
    once a panel contributes below ``rel_tol`` of the running total *and*
    the integrand at the far end is below 1e-14 of its initial scale.
    Intended for monotonically decaying tails (exponential or power-law
    with exponent > 1); power-law tails that decay too slowly fail the
    panel-count budget and raise.
    """
    s = 1.0 if direction > 0 else -1.0
    total = 0.0
    lo = a
    width = first_span
    f0 = abs(float(np.asarray(f(np.array([a + s * 0.5 * first_span])))[0])) + 1e-300
    for _ in range(max_panels):
        hi = lo + s * width
        piece = segment(f, lo, hi).real
        total += piece
        ftail = abs(float(np.asarray(f(np.array([hi])))[0]))
        if abs(piece) <= rel_tol * max(abs(total), 1e-300) and ftail <= 1e-14 * f0:
            return total
        lo = hi
        width *= 2.0
    raise NonConvergenceError(
        "improper integral did not converge within the panel budget "
        f"(last panel width {width:g}); tail decays too slowly")
