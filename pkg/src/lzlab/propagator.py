"""Direct scattering computation: ODE propagation and Jost-basis matching.

The system is i h dpsi/dt = H(t) psi with H = [[V, eps], [eps, -V]].
Jost solutions are fixed by their plane-wave asymptotics

    J_+ ~ e^{+(i/h) lambda t} (-sin theta, cos theta),
    J_- ~ e^{-(i/h) lambda t} ( cos theta, sin theta),

with tan 2theta = eps/E on each side (2theta in (0, pi)).  Matching at a
finite truncation time T uses the residual-phase-corrected forms: the
plane-wave phase lambda*t is replaced by the eikonal integral of
sqrt(V^2+eps^2) anchored at infinity, and the constant rotation angle by
theta(t) = atan2(eps, V(t))/2, i.e. the instantaneous eigenbasis.  Both
corrections vanish at infinity but make S(T) converge like the adiabatic
coupling h*theta'(T) instead of like the tail |V(T) - E|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _dp853 as kernel
from .errors import (
    BudgetExceededError,
    ConfigError,
    GuardViolationError,
    NumericalError,
    StepUnderflowError,
    TDependenceError,
)
from .geometry import tail_phase
from .potentials import Potential, eval_derivative, eval_potential, tail_difference

__all__ = [
    "RegimeParams",
    "ScatteringResult",
    "propagate",
    "jost_vector",
    "scattering_matrix",
    "transition_probability",
    "default_truncation",
]

DEFAULT_TOL = 1e-12
MIN_TOL = 1e-13
STEP_BUDGET = int(5e7)

# regime thresholds (mu <= MU0 nonadiabatic, h/eps^2 <= ADB0 adiabatic)
MU_THRESHOLD = 0.1
ADIABATIC_THRESHOLD = 0.1


@dataclass(frozen=True)
class RegimeParams:
    """One (eps, h) point with its derived ratio and regime tag."""

    epsilon: float
    h: float
    mu_threshold: float = MU_THRESHOLD
    adiabatic_threshold: float = ADIABATIC_THRESHOLD

    def __post_init__(self):
        if self.epsilon < 0.0 or self.h <= 0.0:
            raise ConfigError("RegimeParams needs epsilon >= 0 and h > 0")

    @property
    def mu(self) -> float:
        return self.epsilon ** 2 / self.h

    @property
    def regime(self) -> str:
        if self.mu <= self.mu_threshold:
            return "nonadiabatic"
        if self.h / self.epsilon ** 2 <= self.adiabatic_threshold:
            return "adiabatic"
        return "critical"


@dataclass
class ScatteringResult:
    s_matrix: np.ndarray
    probability: float
    unitarity_defect: float
    truncation_T: float
    integrator_stats: dict = field(default_factory=dict)


def _run_kernel(pot: Potential, rp: RegimeParams, t_from: float, t_to: float,
                y0: np.ndarray, tol: float, max_steps: int) -> tuple[np.ndarray, int, int]:
    y, status, n_acc, n_rej = kernel.propagate_dp853(
        pot.kind, pot.par1, pot.par2, rp.epsilon, rp.h,
        float(t_from), float(t_to), np.ascontiguousarray(y0, dtype=np.complex128),
        tol, tol, max_steps)
    if status == kernel.STATUS_STEP_UNDERFLOW:
        raise StepUnderflowError(
            f"required step fell below 1e-15*span at (eps={rp.epsilon}, h={rp.h}); "
            "h is too small for direct integration")
    if status == kernel.STATUS_BUDGET:
        raise BudgetExceededError(
            f"step budget {max_steps} exhausted at (eps={rp.epsilon}, h={rp.h})")
    return y, n_acc, n_rej


def propagate(pot: Potential, rp: RegimeParams, t_from: float, t_to: float,
              psi0: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve the initial value problem from t_from to t_to for one vector."""
    if tol < MIN_TOL:
        raise ConfigError(f"tol must be >= {MIN_TOL:g}")
    y0 = np.asarray(psi0, dtype=np.complex128).reshape(2, 1)
    y, _, _ = _run_kernel(pot, rp, t_from, t_to, y0, tol, STEP_BUDGET)
    return y[:, 0]


def _theta(eps: float, e_val: float) -> float:
    # half-angle with tan(2 theta) = eps/E and 2 theta in (0, pi)
    return 0.5 * math.atan2(eps, e_val)


def jost_vector(pot: Potential, rp: RegimeParams, side: str, sign: str,
                t: float) -> np.ndarray:
    """Residual-phase-corrected Jost solution of the given side/sign at t.

    Valid where the tail guard |V(t) - E_side| < 0.01 max(eps, 1e-3|E|)
    holds (the asymptotic region); raises GuardViolationError otherwise.
    """
    if side not in ("right", "left"):
        raise ConfigError("side must be 'right' or 'left'")
    if sign not in ("+", "-"):
        raise ConfigError("sign must be '+' or '-'")
    eps = rp.epsilon
    e_val = pot.e_right if side == "right" else pot.e_left
    guard = 0.01 * (eps if eps > 0.0 else abs(e_val))
    if abs(tail_difference(pot, t, side)) >= guard:
        raise GuardViolationError(
            f"|V({t:g}) - E_{side}| >= {guard:.2e}: outside the asymptotic region")
    lam = math.hypot(e_val, eps)
    phase = (lam * t - tail_phase(pot, side, eps, t)) / rp.h
    th = _theta(eps, float(eval_potential(pot, t)))
    if sign == "+":
        return np.exp(1j * phase) * np.array([-math.sin(th), math.cos(th)], dtype=complex)
    return np.exp(-1j * phase) * np.array([math.cos(th), math.sin(th)], dtype=complex)


def default_truncation(pot: Potential, rp: RegimeParams, tol: float = DEFAULT_TOL) -> float:
    """Smallest T with |V(+-T) - E| < 1e-3 eps on both sides, doubled.

    For power-law tails the doubled guard radius may still leave a matching
    error that matters, so T keeps doubling until the estimated adiabatic
    coupling h*eps*|V'(T)|/(2 lambda^2) drops below max(100 tol, 1e-9) --
    comfortably inside the 1e-8 T-independence contract on P without
    inflating the integration span (every extra factor of 2 in T costs
    steps, and the accumulated local error eventually dominates the very
    truncation error being suppressed).
    """
    eps = rp.epsilon
    edge = max(abs(z) for z in pot.zeros) if pot.zeros else 1.0
    T = edge + 1.0
    for _ in range(200):
        ok = True
        for side, s in (("right", 1.0), ("left", -1.0)):
            e_val = pot.e_right if side == "right" else pot.e_left
            thr = 1e-3 * (eps if eps > 0.0 else abs(e_val))
            if abs(tail_difference(pot, s * T, side)) >= thr:
                ok = False
        if ok:
            break
        T *= 2.0
    else:
        raise NumericalError("could not find a truncation radius satisfying the tail guard")
    T *= 2.0
    target = max(100.0 * tol, 1e-9)
    for _ in range(60):
        err = 0.0
        for side, s in (("right", 1.0), ("left", -1.0)):
            e_val = pot.e_right if side == "right" else pot.e_left
            lam2 = e_val * e_val + eps * eps
            err = max(err, rp.h * eps * abs(float(eval_derivative(pot, s * T))) / (2.0 * lam2))
        if err <= target:
            return T
        T *= 2.0
    return T


def _estimate_steps(pot: Potential, rp: RegimeParams, span: float) -> int:
    ts = np.linspace(pot.window[0], pot.window[1], 257)
    vmax = max(float(np.max(np.abs(eval_potential(pot, ts)))),
               abs(pot.e_right), abs(pot.e_left))
    lam_max = math.hypot(vmax, rp.epsilon)
    return int(6.0 * span * lam_max / rp.h) + 1000


def _extract_S(pot: Potential, rp: RegimeParams, T: float, tol: float,
               budget: int) -> tuple[np.ndarray, float, int, int]:
    y0 = np.column_stack([
        jost_vector(pot, rp, "left", "+", -T),
        jost_vector(pot, rp, "left", "-", -T),
    ])
    y, n_acc, n_rej = _run_kernel(pot, rp, -T, T, y0, tol, budget)
    basis = np.column_stack([
        jost_vector(pot, rp, "right", "+", T),
        jost_vector(pot, rp, "right", "-", T),
    ])
    S = np.linalg.solve(basis, y)
    defect = float(np.max(np.abs(S.conj().T @ S - np.eye(2))))
    return S, defect, n_acc, n_rej


def scattering_matrix(pot: Potential, rp: RegimeParams, T: float | None = None,
                      tol: float = DEFAULT_TOL, check_T: bool = True,
                      budget: int = STEP_BUDGET) -> ScatteringResult:
    """Assemble S by propagating the left Jost basis across the crossings.

    Both left Jost solutions start at -T, are propagated to +T and expanded
    in the right Jost basis there.  A control run at 1.5 T must reproduce
    the probability |s21|^2 within max(10 tol max(1, 3T), 1e-8), otherwise
    a TDependenceError is raised; the max-entry drift of S itself is kept
    as the t_independence_defect diagnostic.
    """
    if tol < MIN_TOL:
        raise ConfigError(f"tol must be >= {MIN_TOL:g}")
    if T is None:
        T = default_truncation(pot, rp, tol)
    est = _estimate_steps(pot, rp, 2.0 * T * (2.5 if check_T else 1.0))
    if est > budget:
        raise BudgetExceededError(
            f"estimated {est:.2e} steps exceeds the budget {budget:.0e} "
            f"(span {2 * T:g}, h={rp.h:g})")
    S, defect, n_acc, n_rej = _extract_S(pot, rp, T, tol, budget)
    stats = {
        "steps": n_acc,
        "rejected": n_rej,
        "tolerance": tol,
        "symmetry_defect": float(max(abs(S[0, 0] - S[1, 1].conjugate()),
                                     abs(S[0, 1] + S[1, 0].conjugate()))),
    }
    if check_T:
        S2, defect2, n2, _ = _extract_S(pot, rp, 1.5 * T, tol, budget)
        drift = float(np.max(np.abs(S2 - S)))
        stats["steps"] += n2
        stats["t_independence_defect"] = drift
        # the longer control integration accumulates more local error, so
        # its defect is kept as a separate diagnostic rather than folded
        # into the reported unitarity_defect of the primary run
        stats["control_unitarity_defect"] = defect2
        # The raw S entries accumulate tol-scaled phase error linearly over
        # long tail integrations, so the entry drift is recorded only as a
        # diagnostic; the hard trigger bounds the drift of the observable P,
        # whose contract is <= 1e-8 under T -> 1.5T at default tolerance.
        p_drift = float(abs(abs(S2[1, 0]) ** 2 - abs(S[1, 0]) ** 2))
        threshold = max(10.0 * tol * max(1.0, 3.0 * T), 1e-8)
        if p_drift > threshold:
            raise TDependenceError(
                f"P changed by {p_drift:.2e} (> {threshold:.2e}) when T grew "
                f"from {T:g} to {1.5 * T:g}")
        defect = max(defect, defect2)
    prob = float(abs(S[1, 0]) ** 2)
    return ScatteringResult(
        s_matrix=S, probability=min(max(prob, 0.0), 1.0),
        unitarity_defect=defect, truncation_T=float(T), integrator_stats=stats)


def transition_probability(pot: Potential, rp: RegimeParams,
                           tol: float = DEFAULT_TOL, T: float | None = None,
                           check_T: bool = True) -> ScatteringResult:
    """P(eps, h) = |s21|^2 with diagnostics attached."""
    return scattering_matrix(pot, rp, T=T, tol=tol, check_T=check_T)
