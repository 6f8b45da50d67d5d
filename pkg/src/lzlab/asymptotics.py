"""Closed-form probability predictors.

The oscillatory prefactor C_n(h) and the small-coupling expansion of the
transition probability, the coherent-sum formula for the adiabatic
regime, the Landau-Zener exponential, and root finding for the h values
where C_n(h) vanishes (a Bohr-Sommerfeld-type quantization condition).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, RegimeError
from .geometry import CrossingGeometry, action_R0, alpha_and_K
from .potentials import Potential
from .propagator import ADIABATIC_THRESHOLD, MU_THRESHOLD

__all__ = [
    "AsymptoticPrediction",
    "BohrSommerfeldRoots",
    "prefactor_Cn",
    "predict_nonadiabatic",
    "predict_adiabatic",
    "landau_zener_exact",
    "bohr_sommerfeld_roots",
]

# slope ratio within which the closed-form quantization rule applies
EQUAL_SLOPE_RTOL = 1e-6
# relative tolerance of refined C_n roots
ROOT_RTOL = 1e-12
# warn when a subdominant slope comes this close to the maximum
NEAR_TIE_FRACTION = 0.10


@dataclass(frozen=True)
class AsymptoticPrediction:
    """One closed-form probability prediction with its declared accuracy."""

    regime: str
    value: float
    prefactor: float
    error_orders: tuple[str, ...]
    epsilon: float
    h: float
    mu: float
    alpha: float | None = None
    dominant: tuple[int, ...] | None = None
    order_degenerate: bool = False
    near_tie: bool = False

    def as_dict(self) -> dict:
        out = {
            "regime": self.regime,
            "value": self.value,
            "prefactor": self.prefactor,
            "error_orders": list(self.error_orders),
            "epsilon": self.epsilon,
            "h": self.h,
            "mu": self.mu,
            "order_degenerate": self.order_degenerate,
            "near_tie": self.near_tie,
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.dominant is not None:
            out["dominant"] = list(self.dominant)
        return out


_GAP_CACHE: dict[tuple, tuple[float, ...]] = {}


def _gap_actions(pot: Potential) -> tuple[float, ...]:
    """All zero-coupling gap actions (2 * integral of |V| per gap), memoized."""
    key = (pot.family, pot.kind, pot.par1.tobytes(), pot.par2.tobytes(), pot.zeros)
    try:
        return _GAP_CACHE[key]
    except KeyError:
        value = tuple(action_R0(pot, j) for j in range(1, pot.n_crossings))
        if len(_GAP_CACHE) > 256:
            _GAP_CACHE.clear()
        _GAP_CACHE[key] = value
        return value


def prefactor_Cn(pot: Potential, h: float) -> float:
    """Oscillatory prefactor C_n(h) of the small-coupling expansion.

    C_1 = 1/v_1.  For n >= 2,

        C_n(h) = sum_k 1/v_k
               + 2 sum_{j<k} (v_j v_k)^{-1/2}
                   cos[ S_{j,k}/h - kappa_{k-j} pi/2 ],

    where S_{j,k} = sum_{l=0}^{k-1-j} (-1)^l RR_{j+l} alternates the gap
    actions RR_m = 2 * integral of |V| over gap m, and
    kappa_l = (1 - (-1)^l)/2 is the parity shift (pi/2 for odd
    separation, none for even).

    The shift enters with a minus sign: equal-slope two-crossing systems
    then read C_2 = (2/v)(1 + sin(RR_1/h)), whose zeros coincide with the
    measured transmission dips of the Schrodinger propagator (the
    opposite shift sign puts the zeros on the measured peaks; see the
    decision record in the repository notes).
    """
    if h <= 0.0:
        raise DomainError("prefactor needs h > 0")
    v = pot.slopes
    n = len(v)
    if n == 0:
        raise DomainError("potential has no crossings")
    total = sum(1.0 / vk for vk in v)
    if n == 1:
        return total
    rr = _gap_actions(pot)
    for j in range(1, n):
        s = 0.0
        sign = 1.0
        for k in range(j + 1, n + 1):
            # S_{j,k} accumulates one more alternating gap action per k
            s += sign * rr[k - 2]
            sign = -sign
            kappa = (1 - (-1) ** (k - j)) // 2
            total += (
                2.0
                / math.sqrt(v[j - 1] * v[k - 1])
                * math.cos(s / h - kappa * 0.5 * math.pi)
            )
    return total


def predict_nonadiabatic(
    pot: Potential, eps: float, h: float, mu_max: float = MU_THRESHOLD
) -> AsymptoticPrediction:
    """Leading-order transition probability for small mu = eps^2/h.

    Odd number of crossings: P = 1 - pi C_n(h) mu; even: P = pi C_n(h) mu;
    both clipped to [0, 1].  When C_n(h) vanishes at an even-n point the
    expansion has no leading term and the prediction is flagged
    order-degenerate instead of being extrapolated.
    """
    if h <= 0.0:
        raise DomainError("prediction needs h > 0")
    mu = eps * eps / h
    if mu > mu_max:
        raise RegimeError(f"mu={mu:g} above non-adiabatic threshold {mu_max:g}")
    n = pot.n_crossings
    c_n = prefactor_Cn(pot, h)
    raw = 1.0 - math.pi * c_n * mu if n % 2 else math.pi * c_n * mu
    scale = sum(1.0 / vk for vk in pot.slopes)
    degenerate = n % 2 == 0 and abs(c_n) <= 1e-12 * scale
    return AsymptoticPrediction(
        regime="nonadiabatic",
        value=min(1.0, max(0.0, raw)),
        prefactor=c_n,
        error_orders=("O(sqrt(h) mu)", "O(mu^(3/2))"),
        epsilon=eps,
        h=h,
        mu=mu,
        order_degenerate=degenerate,
    )


def predict_adiabatic(
    geom: CrossingGeometry, h: float, threshold: float = ADIABATIC_THRESHOLD
) -> AsymptoticPrediction:
    """Coherent-sum transition probability for small h/eps^2.

    P = |sum_{k in K} (-1)^k e^{(i/h)(A_k + Re A_k - sum_{j<k} R_j)}|^2,
    where K holds the crossings of maximal slope; each term has modulus
    e^{-Im A_k/h}, so P <= |K|^2 e^{-2 alpha/h} with
    alpha = min_{k in K} Im A_k.  Slopes outside K within 10% of the
    maximum trigger a near-tie warning: the dropped remainder decays with
    a rate too close to alpha for the leading term to dominate cleanly.
    """
    if h <= 0.0:
        raise DomainError("prediction needs h > 0")
    eps = geom.epsilon
    ratio = h / (eps * eps)
    if ratio > threshold:
        raise RegimeError(f"h/eps^2={ratio:g} above adiabatic threshold {threshold:g}")
    alpha, dominant = alpha_and_K(geom)
    vmax = max(geom.slopes)
    near = any(
        k not in dominant and vk >= (1.0 - NEAR_TIE_FRACTION) * vmax
        for k, vk in enumerate(geom.slopes, start=1)
    )
    if near:
        warnings.warn(
            "subdominant slope within 10% of the maximum; the dropped "
            "remainder may rival the leading coherent sum",
            stacklevel=2,
        )
    total = 0j
    for k in dominant:
        a_k = geom.actions_A[k - 1]
        phase = (a_k + a_k.real - sum(geom.actions_R[: k - 1])) / h
        total += (-1.0) ** k * cmath.exp(1j * phase)
    value = abs(total) ** 2
    return AsymptoticPrediction(
        regime="adiabatic",
        value=value,
        prefactor=value,
        error_orders=("O((h/eps^2) exp(-2 alpha/h))",),
        epsilon=eps,
        h=h,
        mu=eps * eps / h,
        alpha=alpha,
        dominant=dominant,
        near_tie=near,
    )


def landau_zener_exact(v: float, eps: float, h: float) -> float:
    """Landau-Zener closed form e^{-(pi/v)(eps^2/h)} for one linear crossing."""
    if v <= 0.0:
        raise DomainError("slope must be positive")
    if h <= 0.0:
        raise DomainError("h must be positive")
    return math.exp(-(math.pi / v) * eps * eps / h)


@dataclass(frozen=True)
class BohrSommerfeldRoots:
    """Roots of C_n(h) on a range, or the evidence there are none.

    Iterating the object yields the roots; ``method`` says whether they
    came from the equal-slope closed form or from grid bisection.  When
    no root exists, ``roots`` is empty and ``min_C``/``argmin_h`` record
    how close C_n came to zero on the range.
    """

    roots: tuple[float, ...]
    method: str
    min_C: float
    argmin_h: float

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    def as_dict(self) -> dict:
        return {
            "roots": list(self.roots),
            "method": self.method,
            "min_C": self.min_C,
            "argmin_h": self.argmin_h,
        }


def bohr_sommerfeld_roots(
    pot: Potential, h_range: tuple[float, float]
) -> BohrSommerfeldRoots:
    """All h in [h_min, h_max] with C_n(h) = 0.

    Two-crossing systems with equal slopes vanish exactly where
    sin(RR_1/h) = -1, i.e. at h_N = (RR_1/2) / ((N - 1/4) pi) for integer
    N -- the quantization rule |integral of V between the zeros| =
    (N - 1/4) pi h.  Those roots are enumerated in closed form.

    Everything else is handled numerically.  C_n is algebraically a
    squared modulus of a coherent slope sum (checked in the tests), so it
    never changes sign and its zeros are tangential: the finder locates
    local minima of C_n on a grid of x = 1/h dense enough to resolve the
    fastest oscillation (steps of pi/4 in the total gap-action phase),
    refines each bracketed minimum to 1e-12 relative, and accepts those
    with C_n below 1e-10 * sum 1/v_k as roots.  Unequal-slope
    two-crossing systems have min C_2 = (1/sqrt(v_1) - 1/sqrt(v_2))^2 > 0
    and always produce the no-root outcome.
    """
    h_min, h_max = float(h_range[0]), float(h_range[1])
    if not 0.0 < h_min < h_max:
        raise DomainError("h_range must satisfy 0 < h_min < h_max")
    n = pot.n_crossings
    if n < 2:
        # C_1 = 1/v_1 never vanishes
        return BohrSommerfeldRoots(
            roots=(), method="constant", min_C=prefactor_Cn(pot, h_min), argmin_h=h_min
        )

    v = pot.slopes
    if n == 2 and abs(v[0] - v[1]) <= EQUAL_SLOPE_RTOL * max(v):
        half_gap = 0.5 * _gap_actions(pot)[0]  # |integral of V| between zeros
        n_lo = math.ceil(half_gap / (math.pi * h_max) + 0.25)
        n_hi = math.floor(half_gap / (math.pi * h_min) + 0.25)
        roots = tuple(
            half_gap / ((big_n - 0.25) * math.pi) for big_n in range(n_lo, n_hi + 1)
        )
        if roots:
            best = min(roots, key=lambda r: abs(prefactor_Cn(pot, r)))
            return BohrSommerfeldRoots(
                roots=roots,
                method="closed-form",
                min_C=prefactor_Cn(pot, best),
                argmin_h=best,
            )
        # fall through to report how close C_2 comes on the range
        return _grid_roots(pot, h_min, h_max)
    return _grid_roots(pot, h_min, h_max)


def _grid_roots(pot: Potential, h_min: float, h_max: float) -> BohrSommerfeldRoots:
    """Minimum refinement of the nonnegative C_n on a dense 1/h grid."""
    from scipy.optimize import minimize_scalar

    s_total = sum(_gap_actions(pot))
    x_lo, x_hi = 1.0 / h_max, 1.0 / h_min
    # the fastest cosine runs at rate S_total in x = 1/h; pi/4 steps of its
    # argument guarantee every dip spans several grid nodes
    step = math.pi / (4.0 * s_total)
    m = max(8, int(math.ceil((x_hi - x_lo) / step)))
    xs = [x_lo + (x_hi - x_lo) * i / m for i in range(m + 1)]
    vals = [prefactor_Cn(pot, 1.0 / x) for x in xs]
    zero_tol = 1e-10 * sum(1.0 / vk for vk in pot.slopes)

    roots: list[float] = []
    min_c, argmin_x = math.inf, xs[0]
    for i in range(len(xs)):
        if vals[i] < min_c:
            min_c, argmin_x = vals[i], xs[i]
        interior_dip = 0 < i < len(xs) - 1 and vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]
        if not interior_dip:
            continue
        res = minimize_scalar(
            lambda x: prefactor_Cn(pot, 1.0 / x),
            bounds=(xs[i - 1], xs[i + 1]),
            method="bounded",
            options={"xatol": ROOT_RTOL * xs[i]},
        )
        c_ref = float(res.fun)
        if c_ref < min_c:
            min_c, argmin_x = c_ref, float(res.x)
        if c_ref <= zero_tol:
            roots.append(1.0 / float(res.x))
    roots_h = tuple(sorted(roots))
    return BohrSommerfeldRoots(
        roots=roots_h,
        method="minimum-refinement",
        min_C=min_c,
        argmin_h=1.0 / argmin_x,
    )
