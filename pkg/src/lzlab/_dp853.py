"""Compiled adaptive Dormand-Prince 8(5,3) propagation kernel.

Integrates i h dpsi/dt = H(t) psi for one or more column vectors at once,
with H = [[V(t), eps], [eps, -V(t)]].  The stepper follows the classic
DOP853 design: 12 stages, 8th-order solution, blended 5th/3rd-order error
estimate, PI-free step control with safety 0.9 and exponent -1/8.

Everything here is nopython/nogil so sweep workers can run in threads.
Status codes: 0 = reached the end, 1 = step underflow, 2 = step budget
exhausted.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._dp853_tableau import A, B, C, E3, E5

N_STAGES = 12

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERROR_EXPONENT = -1.0 / 8.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_BUDGET = 2


@njit(cache=True, nogil=True)
def v_real(kind, par1, par2, t):
    """V(t) on the real axis for the three potential families."""
    if kind == 0:
        return math.tanh(par1[0] * t)
    if kind == 1:
        num = par1[par1.shape[0] - 1]
        for i in range(par1.shape[0] - 2, -1, -1):
            num = num * t + par1[i]
        den = par2[par2.shape[0] - 1]
        for i in range(par2.shape[0] - 2, -1, -1):
            den = den * t + par2[i]
        return num / den
    v = 1.0
    for i in range(par1.shape[0]):
        v *= math.tanh(t - par1[i])
    return v


@njit(cache=True, nogil=True)
def _rhs(kind, par1, par2, eps, hbar, t, y, out):
    v = v_real(kind, par1, par2, t)
    c = -1j / hbar
    for j in range(y.shape[1]):
        out[0, j] = c * (v * y[0, j] + eps * y[1, j])
        out[1, j] = c * (eps * y[0, j] - v * y[1, j])


@njit(cache=True, nogil=True)
def _error_norm(K, dt, y, y_new, rtol, atol):
    # blended 5th/3rd order estimate in an RMS norm, as in classic DOP853
    n = 2 * y.shape[1]
    err5_2 = 0.0
    err3_2 = 0.0
    for r in range(2):
        for j in range(y.shape[1]):
            e5 = 0.0 + 0.0j
            e3 = 0.0 + 0.0j
            for s in range(N_STAGES + 1):
                e5 += E5[s] * K[s, r, j]
                e3 += E3[s] * K[s, r, j]
            scale = atol + rtol * max(abs(y[r, j]), abs(y_new[r, j]))
            err5_2 += abs(e5 / scale) ** 2
            err3_2 += abs(e3 / scale) ** 2
    if err5_2 == 0.0 and err3_2 == 0.0:
        return 0.0
    denom = err5_2 + 0.01 * err3_2
    return abs(dt) * err5_2 / math.sqrt(denom * n)


@njit(cache=True, nogil=True)
def _initial_step(kind, par1, par2, eps, hbar, t0, direction, y, f0, rtol, atol):
    n = 2 * y.shape[1]
    d0 = 0.0
    d1 = 0.0
    for r in range(2):
        for j in range(y.shape[1]):
            scale = atol + rtol * abs(y[r, j])
            d0 += abs(y[r, j] / scale) ** 2
            d1 += abs(f0[r, j] / scale) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y + h0 * direction * f0
    f1 = np.empty_like(f0)
    _rhs(kind, par1, par2, eps, hbar, t0 + h0 * direction, y1, f1)
    d2 = 0.0
    for r in range(2):
        for j in range(y.shape[1]):
            scale = atol + rtol * abs(y[r, j])
            d2 += abs((f1[r, j] - f0[r, j]) / scale) ** 2
    d2 = math.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1)


@njit(cache=True, nogil=True)
def propagate_dp853(kind, par1, par2, eps, hbar, t0, t1, y0, rtol, atol, max_steps):
    """Adaptive propagation of the columns of y0 from t0 to t1.

    Returns (y, status, n_accepted, n_rejected).
    """
    m = y0.shape[1]
    y = y0.copy()
    t = t0
    span = abs(t1 - t0)
    if span == 0.0:
        return y, STATUS_OK, 0, 0
    direction = 1.0 if t1 > t0 else -1.0

    K = np.empty((N_STAGES + 1, 2, m), dtype=np.complex128)
    y_stage = np.empty((2, m), dtype=np.complex128)
    y_new = np.empty((2, m), dtype=np.complex128)
    f = np.empty((2, m), dtype=np.complex128)

    _rhs(kind, par1, par2, eps, hbar, t, y, f)
    K[0] = f
    dt = _initial_step(kind, par1, par2, eps, hbar, t, direction, y, f, rtol, atol)
    dt = min(dt, span)

    n_acc = 0
    n_rej = 0
    min_step = 1e-15 * span
    while (t1 - t) * direction > 0.0:
        if dt < min_step:
            return y, STATUS_STEP_UNDERFLOW, n_acc, n_rej
        if n_acc + n_rej >= max_steps:
            return y, STATUS_BUDGET, n_acc, n_rej
        if (t + dt * direction - t1) * direction > 0.0:
            dt = abs(t1 - t)
        h_signed = dt * direction

        for s in range(1, N_STAGES):
            for r in range(2):
                for j in range(m):
                    acc = 0.0 + 0.0j
                    for q in range(s):
                        acc += A[s, q] * K[q, r, j]
                    y_stage[r, j] = y[r, j] + h_signed * acc
            _rhs(kind, par1, par2, eps, hbar, t + C[s] * h_signed, y_stage, f)
            K[s] = f
        for r in range(2):
            for j in range(m):
                acc = 0.0 + 0.0j
                for s in range(N_STAGES):
                    acc += B[s] * K[s, r, j]
                y_new[r, j] = y[r, j] + h_signed * acc
        _rhs(kind, par1, par2, eps, hbar, t + h_signed, y_new, f)
        K[N_STAGES] = f

        err = _error_norm(K, h_signed, y, y_new, rtol, atol)
        if err < 1.0:
            t = t1 if dt == abs(t1 - t) else t + h_signed
            for r in range(2):
                for j in range(m):
                    y[r, j] = y_new[r, j]
            K[0] = K[N_STAGES]  # first-same-as-last reuse
            n_acc += 1
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** _ERROR_EXPONENT))
            dt = min(dt * factor, span)
        else:
            n_rej += 1
            dt *= max(_MIN_FACTOR, _SAFETY * err ** _ERROR_EXPONENT)
    return y, STATUS_OK, n_acc, n_rej
