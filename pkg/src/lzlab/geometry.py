"""Complex turning points and action integrals.

For each crossing t_k the turning point zeta_k is the root of
V(t)^2 + eps^2 = 0 in the upper half plane near t_k.  The associated
actions are

* A_k   = 2 * integral over the straight segment t_k -> zeta_k of
          sqrt(V^2 + eps^2), branch fixed to +eps at t_k and continued,
* R_j   = 2 * integral over [t_{j+1}, t_j] of sqrt(V^2 + eps^2)  (real),
* R0_j  = the eps = 0 limit, integrand |V|,
* A_r/A_l = 2 * integral from the outermost crossing to +-infinity of
          (sqrt(V^2 + eps^2) - lambda), lambda = sqrt(E^2 + eps^2).
          Both integrals are oriented from the crossing toward their
          infinity, so A_l = -A_r for even-symmetric |V|.

Square roots along complex segments are branch-tracked node to node; a
candidate further than pi/2 in argument from its predecessor forces panel
subdivision rather than a silent sheet jump.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .errors import (
    BranchAmbiguityError,
    ConfigError,
    DomainError,
    EscapedBasinError,
    NonConvergenceError,
)
from .potentials import (
    KIND_RATIONAL,
    Potential,
    check_sector,
    eval_derivative,
    eval_potential,
    reciprocal_tail_values,
    tail_difference,
)

__all__ = [
    "CrossingGeometry",
    "turning_point",
    "action_A",
    "action_R",
    "action_R0",
    "action_infinity",
    "tail_phase",
    "integral_V",
    "build_geometry",
    "alpha_and_K",
    "integrate_sqrt_tracked",
]

# relative agreement demanded between successive panel refinements
REL_TOL = 1e-12
_MACHEPS = float(np.finfo(float).eps)
# geometric shrink toward the turning point: ratio 1/2, this many levels
SHRINK_LEVELS = 20
# |cos angle(candidate, predecessor)| below this counts as ambiguous
_AMBIGUITY_COS = 0.05


# ---------------------------------------------------------------------------
# branch-tracked sqrt(V^2 + eps^2) along straight segments
# ---------------------------------------------------------------------------

def _track(candidates: np.ndarray, w_start: complex) -> np.ndarray:
    """Continue a square-root branch through an ordered value sequence."""
    out = np.empty_like(candidates)
    prev = w_start
    for i, r in enumerate(candidates):
        dot = (r * prev.conjugate()).real
        c = r if dot >= 0.0 else -r
        mags = abs(c) * abs(prev)
        if mags > 0.0 and abs(dot) <= _AMBIGUITY_COS * mags:
            raise BranchAmbiguityError(
                "square-root continuation ambiguous (candidates nearly "
                "perpendicular to predecessor); panel must be subdivided")
        out[i] = c
        prev = c
    return out


def _panel_tracked(pot: Potential, eps: float, a: complex, b: complex,
                   w_start: complex) -> tuple[complex, complex]:
    """One tracked Gauss-Legendre panel; returns (integral, branch at b)."""
    x, w = quad.gl_nodes()
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = np.append(mid + half * x, b)
    v = eval_potential(pot, pts.astype(complex))
    vals = _track(np.sqrt(v * v + eps * eps), w_start)
    return half * np.sum(w * vals[:-1]), complex(vals[-1])


def _panel_tracked_open(pot: Potential, eps: float, a: complex, b: complex,
                        w_start: complex) -> complex:
    """Tracked panel that never evaluates at b (for vanishing endpoints)."""
    x, w = quad.gl_nodes()
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    v = eval_potential(pot, (mid + half * x).astype(complex))
    vals = _track(np.sqrt(v * v + eps * eps), w_start)
    return half * np.sum(w * vals)


def integrate_sqrt_tracked(pot: Potential, eps: float, a: complex, b: complex,
                           w_start: complex, rel_tol: float = REL_TOL,
                           scale: float | None = None, _depth: int = 0,
                           ) -> tuple[complex, complex]:
    """Adaptive tracked integral of sqrt(V^2+eps^2) over the segment [a, b].

    Returns (integral, branch value at b).  Subdivides on both accuracy
    mismatch and branch ambiguity.
    """
    if _depth > 48:
        raise NonConvergenceError(
            f"tracked quadrature exhausted subdivision depth on [{a}, {b}]")
    if scale is None:
        scale = abs(b - a) * (abs(w_start) + eps) + 1e-300
    mid = 0.5 * (a + b)
    try:
        whole, _ = _panel_tracked(pot, eps, a, b, w_start)
        i1, w_mid = _panel_tracked(pot, eps, a, mid, w_start)
        i2, w_end = _panel_tracked(pot, eps, mid, b, w_mid)
        if abs(i1 + i2 - whole) <= rel_tol * (abs(i1 + i2) + 0.01 * scale):
            return i1 + i2, w_end
    except BranchAmbiguityError:
        pass
    i1, w_mid = integrate_sqrt_tracked(pot, eps, a, mid, w_start, rel_tol, scale, _depth + 1)
    i2, w_end = integrate_sqrt_tracked(pot, eps, mid, b, w_mid, rel_tol, scale, _depth + 1)
    return i1 + i2, w_end


# ---------------------------------------------------------------------------
# turning points
# ---------------------------------------------------------------------------

def turning_point(pot: Potential, k: int, eps: float,
                  residual_tol: float = 1e-13, max_steps: int = 50) -> complex:
    """Root of V(zeta) = i sgn(V'(t_k)) eps in the upper half plane near t_k.

    ``k`` is 1-based following the descending ordering t_1 > ... > t_n.
    Newton iteration from the first-order seed t_k + i eps/V'(t_k); the
    iterate must stay within half the distance to the nearest other zero.
    """
    if not 1 <= k <= pot.n_crossings:
        raise DomainError(f"crossing index {k} out of range 1..{pot.n_crossings}")
    if eps <= 0.0:
        raise DomainError("turning points need eps > 0")
    tk = pot.zeros[k - 1]
    dk = float(eval_derivative(pot, tk))
    target = 1j * math.copysign(1.0, dk) * eps
    others = [z for z in pot.zeros if z != tk]
    basin = 0.5 * min(abs(tk - z) for z in others) if others else math.inf
    z = tk + target / dk
    for _ in range(max_steps):
        f = eval_potential(pot, z) - target
        if abs(f) <= residual_tol * eps:
            break
        step = f / eval_derivative(pot, z)
        z = z - step
        if abs(z - tk) > basin:
            raise EscapedBasinError(
                f"turning-point iteration for crossing {k} escaped its basin "
                f"(|zeta - t_k| = {abs(z - tk):.3g} > {basin:.3g})")
        if abs(step) <= 8.0 * _MACHEPS * max(1.0, abs(z)):
            # the iterate stopped moving at float resolution: for very small
            # eps the residual target residual_tol*eps sits below the
            # cancellation floor of evaluating V near t_k and cannot be met
            break
    else:
        raise NonConvergenceError(
            f"turning point for crossing {k} did not converge in {max_steps} steps")
    if z.imag <= 0.0:
        raise NonConvergenceError(f"turning point for crossing {k} left the upper half plane")
    check_sector(pot, z)
    return complex(z)


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------

def action_A(pot: Potential, k: int, eps: float, rel_tol: float = REL_TOL,
             shrink_levels: int = SHRINK_LEVELS) -> complex:
    """A_k(eps) = 2 * tracked integral of sqrt(V^2+eps^2) from t_k to zeta_k.

    The square root vanishes like a half power at zeta_k, so the last
    stretch is covered by geometrically shrinking panels (ratio 1/2)
    before the terminal scrap.
    """
    if eps == 0.0:
        return 0.0 + 0.0j
    tk = complex(pot.zeros[k - 1])
    zk = turning_point(pot, k, eps)
    seg = zk - tk
    total = 0.0 + 0.0j
    w = complex(eps)  # branch at the crossing point
    scale = abs(seg) * eps
    lo = tk
    for j in range(1, shrink_levels + 1):
        hi = zk - seg * 0.5 ** j
        piece, w = integrate_sqrt_tracked(pot, eps, lo, hi, w, rel_tol, scale)
        total += piece
        lo = hi
    scrap = _panel_tracked_open(pot, eps, lo, zk, w)
    return 2.0 * (total + scrap)


def action_R(pot: Potential, j: int, eps: float, rel_tol: float = REL_TOL) -> float:
    """R_j(eps) = 2 * integral over [t_{j+1}, t_j] of sqrt(V^2 + eps^2)."""
    if not 1 <= j <= pot.n_crossings - 1:
        raise DomainError(f"gap index {j} out of range 1..{pot.n_crossings - 1}")
    hi, lo = pot.zeros[j - 1], pot.zeros[j]

    def f(t):
        v = eval_potential(pot, t)
        return np.sqrt(v * v + eps * eps)

    return 2.0 * quad.adaptive(f, lo, hi, rel_tol).real


def action_R0(pot: Potential, j: int, rel_tol: float = REL_TOL) -> float:
    """R0_j = 2 * integral of |V| between consecutive crossings.

    V keeps one sign strictly between consecutive simple zeros, so this
    is just |2 * integral of V| evaluated with an analytic integrand.
    """
    if not 1 <= j <= pot.n_crossings - 1:
        raise DomainError(f"gap index {j} out of range 1..{pot.n_crossings - 1}")
    hi, lo = pot.zeros[j - 1], pot.zeros[j]
    return abs(2.0 * quad.adaptive(lambda t: eval_potential(pot, t), lo, hi, rel_tol).real)


def _tail_integrand(pot: Potential, eps: float, side: str):
    """(sqrt(V^2+eps^2) - lambda) without cancellation, as an array function."""
    e = pot.e_right if side == "right" else pot.e_left
    lam = math.hypot(e, eps)

    def f(t):
        vm = tail_difference(pot, t, side)
        v = vm + e
        return vm * (vm + 2.0 * e) / (np.sqrt(v * v + eps * eps) + lam)

    return f


def _tail_integrand_reciprocal(pot: Potential, eps: float, side: str):
    """Same integrand at t = +-1/u, times the 1/u^2 Jacobian (rational only)."""
    e = pot.e_right if side == "right" else pot.e_left
    lam = math.hypot(e, eps)

    def g(u):
        vm, v = reciprocal_tail_values(pot, u, side)
        return vm * (vm + 2.0 * e) / (np.sqrt(v * v + eps * eps) + lam) / (u * u)

    return g


def tail_phase(pot: Potential, side: str, eps: float, t_from: float,
               rel_tol: float = REL_TOL) -> float:
    """Integral of (sqrt(V^2+eps^2) - lambda_side) from t_from out to +-infinity.

    Oriented from t_from toward the infinity of the given side, so
    A_r = 2*tail_phase(..., 'right', t_1) and A_l = 2*tail_phase(..., 'left', t_n).
    Exponential tails use dyadically growing panels; power-law tails are
    mapped to a finite interval by u = 1/|t| and integrated exactly there.
    """
    f = _tail_integrand(pot, eps, side)
    sgn = 1.0 if side == "right" else -1.0
    if pot.kind == KIND_RATIONAL:
        edge = max(abs(z) for z in pot.zeros) if pot.zeros else 1.0
        t_cut = sgn * max(2.0 * edge + 2.0, abs(t_from) + 1.0, 5.0)
        body = quad.adaptive(f, t_from, t_cut, rel_tol).real
        g = _tail_integrand_reciprocal(pot, eps, side)
        # d t = -sgn du/u^2: both orientations give +integral over (0, 1/|t_cut|]
        tail = sgn * quad.adaptive(g, 0.0, 1.0 / abs(t_cut), rel_tol).real
        return body + tail
    scale = pot.par1[0] if pot.kind == 0 else 1.0
    return quad.improper_tail(f, t_from, sgn, first_span=max(1.0, 2.0 / scale))


def action_infinity(pot: Potential, side: str, eps: float, rel_tol: float = REL_TOL) -> float:
    """A_r or A_l: 2 * tail integral of sqrt(V^2+eps^2) - lambda.

    Both sides are oriented with increasing t (A_l integrates over
    (-inf, t_n], A_r over [t_1, inf)), so mirror-symmetric potentials
    have A_l = A_r.  tail_phase, by contrast, is oriented outward from
    the crossing, which is what the scattering normalization consumes.
    """
    if side not in ("right", "left"):
        raise ConfigError("side must be 'right' or 'left'")
    if pot.decay_exponent <= 1.0:
        raise DomainError("tail decays too slowly for convergent actions (delta <= 1)")
    if side == "right":
        return 2.0 * tail_phase(pot, "right", eps, pot.zeros[0], rel_tol)
    return -2.0 * tail_phase(pot, "left", eps, pot.zeros[-1], rel_tol)


def integral_V(pot: Potential, a: float, b: float, rel_tol: float = REL_TOL) -> float:
    """Plain integral of V over the real interval [a, b]."""
    return quad.adaptive(lambda t: eval_potential(pot, t), a, b, rel_tol).real


# ---------------------------------------------------------------------------
# assembled geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingGeometry:
    """All turning points and actions of one potential at one coupling."""

    epsilon: float
    turning_points: tuple[complex, ...]
    actions_A: tuple[complex, ...]
    actions_R: tuple[float, ...]
    actions_R0: tuple[float, ...]
    action_right: float
    action_left: float
    lambda_right: float
    lambda_left: float
    slopes: tuple[float, ...]
    zeros: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.turning_points)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "turning_points": [[z.real, z.imag] for z in self.turning_points],
            "A": [[a.real, a.imag] for a in self.actions_A],
            "R": list(self.actions_R),
            "R0": list(self.actions_R0),
            "A_r": self.action_right,
            "A_l": self.action_left,
            "alpha": alpha_and_K(self)[0],
            "K": list(alpha_and_K(self)[1]),
        }


def build_geometry(pot: Potential, eps: float, rel_tol: float = REL_TOL) -> CrossingGeometry:
    """Compute every geometric quantity needed by the predictors."""
    n = pot.n_crossings
    zetas = tuple(turning_point(pot, k, eps) for k in range(1, n + 1))
    acts = tuple(action_A(pot, k, eps, rel_tol) for k in range(1, n + 1))
    for k, a in enumerate(acts, start=1):
        if eps > 0.0 and a.imag <= 0.0:
            raise NonConvergenceError(f"Im A_{k} = {a.imag:.3e} is not positive")
    return CrossingGeometry(
        epsilon=eps,
        turning_points=zetas,
        actions_A=acts,
        actions_R=tuple(action_R(pot, j, eps, rel_tol) for j in range(1, n)),
        actions_R0=tuple(action_R0(pot, j, rel_tol) for j in range(1, n)),
        action_right=action_infinity(pot, "right", eps, rel_tol),
        action_left=action_infinity(pot, "left", eps, rel_tol),
        lambda_right=math.hypot(pot.e_right, eps),
        lambda_left=math.hypot(pot.e_left, eps),
        slopes=pot.slopes,
        zeros=pot.zeros,
    )


def alpha_and_K(geom: CrossingGeometry, tie_rel_tol: float = 1e-9,
                ) -> tuple[float, tuple[int, ...]]:
    """Dominant-crossing index set and decay rate.

    K collects the (1-based) crossings attaining max v_k within a relative
    tie tolerance; alpha is the smallest Im A_k over K.
    """
    vmax = max(geom.slopes)
    K = tuple(k for k, v in enumerate(geom.slopes, start=1)
              if v >= vmax * (1.0 - tie_rel_tol))
    alpha = min(geom.actions_A[k - 1].imag for k in K)
    return float(alpha), K
