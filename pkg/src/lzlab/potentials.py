"""Analytic potential families for the two-level crossing problem.

A potential V is a real-analytic function of t with nonzero real limits
E_r, E_l at +/-infinity, finitely many simple real zeros t_1 > ... > t_n
(the avoided crossings) and analytic continuation to the sector
|Im t| < tan(theta_0) * sqrt(1 + (Re t)^2).

Three families are provided:

* ``tanh_scaled(a)``      -- V(t) = tanh(a t), one crossing
* ``rational(num, den)``  -- real-coefficient rational function (also the
  only form accepted for custom potentials, so complex evaluation is exact)
* ``tanh_product(offsets)`` -- V(t) = prod_j tanh(t - o_j)

plus a small preset table used throughout the test-suite and CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, DegenerateZeroError, DomainError, NonConvergenceError

__all__ = [
    "Potential",
    "ValidationReport",
    "tanh_scaled",
    "rational",
    "rational_pair",
    "tanh_product",
    "preset",
    "PRESETS",
    "eval_potential",
    "eval_derivative",
    "complex_step_derivative",
    "find_zeros_and_slopes",
    "validate_assumptions",
    "tail_difference",
]

# integer family tags shared with the compiled propagator kernels
KIND_TANH = 0
KIND_RATIONAL = 1
KIND_TANH_PRODUCT = 2

_DEFAULT_SECTOR_ANGLE = math.pi / 6
_DEFAULT_WINDOW = (-10.0, 10.0)
_DEGENERATE_SLOPE = 1e-6


@dataclass(frozen=True)
class Potential:
    """Immutable descriptor of one potential.

    ``par1``/``par2`` hold the family parameters in the flat layout the
    compiled kernels expect (tanh scale, polynomial coefficients in
    ascending order, or product offsets).
    """

    family: str
    kind: int
    par1: np.ndarray
    par2: np.ndarray
    e_right: float
    e_left: float
    decay_exponent: float
    sector_angle: float = _DEFAULT_SECTOR_ANGLE
    window: tuple[float, float] = _DEFAULT_WINDOW
    zeros: tuple[float, ...] = field(default=())
    slopes: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "par1", np.ascontiguousarray(self.par1, dtype=np.float64))
        object.__setattr__(self, "par2", np.ascontiguousarray(self.par2, dtype=np.float64))
        if not 0.0 < self.sector_angle < math.pi / 2:
            raise ConfigError("sector_angle must lie in (0, pi/2)")
        if self.zeros:
            if any(a <= b for a, b in zip(self.zeros, self.zeros[1:])):
                raise ConfigError("zeros must be strictly decreasing")
            if len(self.slopes) != len(self.zeros):
                raise ConfigError("slopes and zeros must have equal length")
            if any(s <= 0.0 for s in self.slopes):
                raise ConfigError("all slopes must be positive")

    @property
    def n_crossings(self) -> int:
        return len(self.zeros)

    def __call__(self, t):
        return eval_potential(self, t)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def tanh_scaled(a: float = 1.0, sector_angle: float = _DEFAULT_SECTOR_ANGLE,
                window: tuple[float, float] | None = None) -> Potential:
    """V(t) = tanh(a t) with a > 0: one crossing at 0, slope a."""
    if a <= 0.0:
        raise ConfigError("tanh_scaled requires a > 0")
    window = window or (min(_DEFAULT_WINDOW[0], -10.0 / a), max(_DEFAULT_WINDOW[1], 10.0 / a))
    pot = Potential(
        family=f"tanh_scaled(a={a:g})", kind=KIND_TANH,
        par1=np.array([a]), par2=np.zeros(0),
        e_right=1.0, e_left=-1.0, decay_exponent=math.inf,
        sector_angle=sector_angle, window=window,
    )
    return _with_zeros(pot)


def rational(num: Sequence[float], den: Sequence[float],
             sector_angle: float = _DEFAULT_SECTOR_ANGLE,
             window: tuple[float, float] = _DEFAULT_WINDOW) -> Potential:
    """V(t) = num(t)/den(t), coefficients in ascending order.

    The denominator must not vanish inside the sector over the window
    closure; this is checked on construction by locating its complex roots.
    """
    num = np.asarray(np.trim_zeros(np.asarray(num, dtype=np.float64), "b"))
    den = np.asarray(np.trim_zeros(np.asarray(den, dtype=np.float64), "b"))
    if num.size == 0 or den.size == 0:
        raise ConfigError("numerator and denominator must be nonzero polynomials")
    dn, dd = num.size - 1, den.size - 1
    if dn > dd:
        raise ConfigError("numerator degree must not exceed denominator degree (bounded V)")
    e_inf = num[-1] / den[-1] if dn == dd else 0.0
    # decay exponent: degree drop of V - E_inf
    diff = num.copy()
    if dn == dd:
        diff = diff - e_inf * den
    diff = np.trim_zeros(diff, "b")
    delta = float(dd - (diff.size - 1)) if diff.size else math.inf
    pot = Potential(
        family="rational", kind=KIND_RATIONAL,
        par1=num, par2=den,
        e_right=float(e_inf), e_left=float(e_inf), decay_exponent=delta,
        sector_angle=sector_angle, window=window,
    )
    _check_denominator_roots(pot)
    return _with_zeros(pot)


def rational_pair(zeros: Iterable[float], scale: float = 1.0,
                  sector_angle: float = _DEFAULT_SECTOR_ANGLE,
                  window: tuple[float, float] | None = None) -> Potential:
    """Rational potential prod_k (t - r_k) / (t^2 + c^2)^(n/2).

    The crossing count n must be even so the denominator is a polynomial;
    the limits are E_r = E_l = 1.
    """
    roots = sorted(float(r) for r in zeros)
    if len(roots) % 2 != 0:
        raise ConfigError(
            "rational_pair needs an even number of zeros: a real rational "
            "function with equal nonzero limits changes sign an even number of times")
    if scale <= 0.0:
        raise ConfigError("scale must be positive")
    num = npoly.polyfromroots(roots).real
    base = np.array([scale * scale, 0.0, 1.0])
    den = np.array([1.0])
    for _ in range(len(roots) // 2):
        den = npoly.polymul(den, base)
    lo, hi = (roots[0] - 5.0, roots[-1] + 5.0)
    window = window or (min(lo, _DEFAULT_WINDOW[0]), max(hi, _DEFAULT_WINDOW[1]))
    return rational(num, den, sector_angle=sector_angle, window=window)


def tanh_product(offsets: Iterable[float],
                 sector_angle: float = _DEFAULT_SECTOR_ANGLE,
                 window: tuple[float, float] | None = None) -> Potential:
    """V(t) = prod_j tanh(t - o_j): one crossing per offset."""
    offs = np.array(sorted(float(o) for o in offsets), dtype=np.float64)
    if offs.size == 0:
        raise ConfigError("tanh_product needs at least one offset")
    e_left = 1.0 if offs.size % 2 == 0 else -1.0
    window = window or (min(offs[0] - 10.0, _DEFAULT_WINDOW[0]),
                        max(offs[-1] + 10.0, _DEFAULT_WINDOW[1]))
    pot = Potential(
        family="tanh_product", kind=KIND_TANH_PRODUCT,
        par1=offs, par2=np.zeros(0),
        e_right=1.0, e_left=e_left, decay_exponent=math.inf,
        sector_angle=sector_angle, window=window,
    )
    return _with_zeros(pot)


PRESETS = {
    # single crossing at 0, slope 1; the workhorse odd-n example
    "tanh": lambda: tanh_scaled(1.0),
    # V = (t^2-1)/(t^2+1): crossings +-1, slopes 1, the even-n example
    "two_zero": lambda: rational_pair([-1.0, 1.0], scale=1.0),
    # two crossings +-1 with exponential tails
    "tanh_pair": lambda: tanh_product([-1.0, 1.0]),
}


def preset(name: str) -> Potential:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def check_sector(pot: Potential, t) -> None:
    """Raise DomainError unless |Im t| < tan(theta_0) * sqrt(1 + (Re t)^2)."""
    t = np.asarray(t)
    im = np.abs(t.imag) if np.iscomplexobj(t) else 0.0
    bound = math.tan(pot.sector_angle) * np.sqrt(1.0 + np.asarray(t).real ** 2)
    if np.any(im >= bound):
        raise DomainError(
            f"point outside the analyticity sector (|Im t| >= tan(theta_0)<Re t>): t={t}")


def _eval_raw(pot: Potential, t):
    """Family dispatch without the sector guard. Accepts scalars or arrays."""
    if pot.kind == KIND_TANH:
        return np.tanh(pot.par1[0] * t)
    if pot.kind == KIND_RATIONAL:
        return npoly.polyval(t, pot.par1) / npoly.polyval(t, pot.par2)
    # tanh product
    v = None
    for o in pot.par1:
        f = np.tanh(t - o)
        v = f if v is None else v * f
    return v


def eval_potential(pot: Potential, t):
    """Evaluate V(t) for real or complex t inside the sector.

    Real input returns a real float (Schwarz reflection makes V real on
    the real axis); complex input is validated against the sector.
    """
    arr = np.asarray(t)
    if np.iscomplexobj(arr):
        check_sector(pot, arr)
        out = _eval_raw(pot, arr if arr.shape else complex(arr))
        return out if arr.shape else complex(out)
    out = _eval_raw(pot, arr if arr.shape else float(arr))
    return out if arr.shape else float(out)


def eval_derivative(pot: Potential, t):
    """Analytic V'(t) per family (real or complex t inside the sector)."""
    arr = np.asarray(t)
    if np.iscomplexobj(arr):
        check_sector(pot, arr)
    if pot.kind == KIND_TANH:
        a = pot.par1[0]
        return a * (1.0 - np.tanh(a * t) ** 2)
    if pot.kind == KIND_RATIONAL:
        num, den = pot.par1, pot.par2
        dnum, dden = npoly.polyder(num), npoly.polyder(den)
        d = npoly.polyval(t, den)
        return (npoly.polyval(t, dnum) * d - npoly.polyval(t, num) * npoly.polyval(t, dden)) / d ** 2
    offs = pot.par1
    tt = np.asarray(t)
    vals = np.stack([np.tanh(tt - o) for o in offs])
    sech2 = 1.0 - vals ** 2
    total = np.zeros_like(tt, dtype=vals.dtype)
    for j in range(len(offs)):
        term = sech2[j]
        for m in range(len(offs)):
            if m != j:
                term = term * vals[m]
        total = total + term
    return total if tt.shape else total[()]


def complex_step_derivative(pot: Potential, t: float) -> float:
    """V'(t) at real t by a complex step: Im V(t + i eta)/eta.

    The step is an imaginary perturbation of 1e-20 times the local scale,
    so there is no subtractive cancellation.
    """
    eta = 1e-20 * max(1.0, abs(t))
    return _eval_raw(pot, complex(t, eta)).imag / eta


# ---------------------------------------------------------------------------
# zeros, slopes, validation
# ---------------------------------------------------------------------------

def find_zeros_and_slopes(pot: Potential, window: tuple[float, float] | None = None,
                          grid_spacing: float = 0.05,
                          degenerate_threshold: float = _DEGENERATE_SLOPE,
                          ) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Locate all real zeros in the window and return (zeros, slopes).

    Zeros are bracketed on a uniform grid, refined by bisection and then
    Newton to residual 1e-14; returned in descending order with slopes
    v_k = |V'(t_k)|.
    """
    lo, hi = window or pot.window
    m = int(math.ceil((hi - lo) / grid_spacing)) + 1
    ts = np.linspace(lo, hi, m)
    vs = _eval_raw(pot, ts)
    zeros: list[float] = []
    for i in range(m - 1):
        a, b, fa, fb = ts[i], ts[i + 1], vs[i], vs[i + 1]
        if fa == 0.0:
            zeros.append(float(a))
            continue
        if fa * fb < 0.0:
            zeros.append(_refine_zero(pot, a, b))
    if vs[-1] == 0.0:
        zeros.append(float(ts[-1]))
    # dedupe (grid-point zeros can re-bracket) and sort descending
    zeros.sort()
    dedup: list[float] = []
    for z in zeros:
        if not dedup or z - dedup[-1] > 10 * grid_spacing * 1e-9 + 1e-12:
            dedup.append(z)
    dedup.reverse()
    slopes = []
    for z in dedup:
        s = abs(float(eval_derivative(pot, z)))
        if s < degenerate_threshold:
            raise DegenerateZeroError(
                f"zero at t={z:.6g} has |V'|={s:.3e} < {degenerate_threshold:.0e}; "
                "crossings must be simple")
        slopes.append(s)
    return tuple(dedup), tuple(slopes)


def _refine_zero(pot: Potential, a: float, b: float) -> float:
    fa = _eval_raw(pot, a)
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm = _eval_raw(pot, mid)
        if fm == 0.0 or (b - a) < 1e-9:
            break
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    t = 0.5 * (a + b)
    for _ in range(60):
        f = _eval_raw(pot, t)
        df = float(eval_derivative(pot, t))
        if df == 0.0:
            break
        step = f / df
        t -= step
        if abs(step) <= 1e-14 * max(1.0, abs(t)):
            break
    else:
        raise NonConvergenceError(f"zero refinement stalled near t={t:.6g}")
    return float(t)


def _with_zeros(pot: Potential) -> Potential:
    zeros, slopes = find_zeros_and_slopes(pot)
    object.__setattr__(pot, "zeros", zeros)
    object.__setattr__(pot, "slopes", slopes)
    return pot


def _check_denominator_roots(pot: Potential) -> None:
    den = pot.par2
    if den.size <= 1:
        return
    roots = npoly.polyroots(den)
    for r in roots:
        im, re = abs(r.imag), r.real
        if im < math.tan(pot.sector_angle) * math.sqrt(1.0 + re * re):
            raise ConfigError(
                f"denominator root {complex(r):.6g} lies inside the analyticity sector")


@dataclass
class ValidationReport:
    """Pass/fail summary of the structural assumptions."""

    checks: dict[str, tuple[bool, str]]
    fitted_decay: float

    @property
    def all_passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def as_dict(self) -> dict:
        return {
            "checks": {k: {"passed": ok, "detail": msg} for k, (ok, msg) in self.checks.items()},
            "fitted_decay_exponent": self.fitted_decay,
            "all_passed": self.all_passed,
        }


def _fit_tail_exponent(pot: Potential, side: str) -> float:
    """Log-log slope of |V - E| on a dyadic ray; inf for sub-power tails."""
    sign = 1.0 if side == "right" else -1.0
    ts = sign * np.array([2.0 ** k for k in range(3, 10)]) * max(1.0, np.abs(pot.zeros).max() if pot.zeros else 1.0)
    diffs = np.abs(np.array([tail_difference(pot, float(t), side) for t in ts]))
    if np.any(diffs < 1e-250):
        return math.inf
    slope, _ = np.polyfit(np.log(np.abs(ts)), np.log(diffs), 1)
    fitted = -float(slope)
    return math.inf if fitted > 40.0 else fitted


def validate_assumptions(pot: Potential, slope_threshold: float = _DEGENERATE_SLOPE,
                         realness_tol: float = 1e-12) -> ValidationReport:
    """Check A1-A3 numerically and the sign convention V'(t_1) > 0."""
    checks: dict[str, tuple[bool, str]] = {}

    ok = len(pot.zeros) > 0 and all(s > slope_threshold for s in pot.slopes)
    checks["simple_zeros"] = (ok, f"zeros={pot.zeros}, slopes={pot.slopes}")

    ok = pot.e_right != 0.0 and pot.e_left != 0.0
    checks["nonzero_limits"] = (ok, f"E_r={pot.e_right}, E_l={pot.e_left}")

    if ok:
        fit_r = _fit_tail_exponent(pot, "right")
        fit_l = _fit_tail_exponent(pot, "left")
        fitted = min(fit_r, fit_l)
        if math.isinf(pot.decay_exponent):
            decay_ok = math.isinf(fitted)
            detail = "exponential tail (classified as decay exponent = inf)"
        else:
            decay_ok = fitted >= pot.decay_exponent - 0.1
            detail = f"fitted exponent {fitted:.3f} vs algebraic {pot.decay_exponent:g}"
        checks["tail_decay"] = (decay_ok and pot.decay_exponent > 1.0, detail)
    else:
        fitted = math.nan
        checks["tail_decay"] = (False, "skipped: a limit vanishes")

    ts = np.linspace(pot.window[0], pot.window[1], 401)
    vals = _eval_raw(pot, ts.astype(complex))
    ok = float(np.max(np.abs(vals.imag))) <= realness_tol
    checks["real_on_axis"] = (ok, f"max |Im V| on the real grid = {np.max(np.abs(vals.imag)):.2e}")

    if pot.zeros:
        d1 = float(eval_derivative(pot, pot.zeros[0]))
        checks["orientation"] = (d1 > 0.0, f"V'(t_1) = {d1:.6g} (convention wants > 0)")
    else:
        checks["orientation"] = (False, "no zeros found")

    return ValidationReport(checks=checks, fitted_decay=fitted)


# ---------------------------------------------------------------------------
# stable tail difference V(t) - E_side
# ---------------------------------------------------------------------------

def _tanh_minus_one(x):
    # tanh x - 1 = -2 / (e^{2x} + 1), stable for x -> +inf
    # (the argument cap only flattens values already below 1e-300)
    return -2.0 / (np.exp(2.0 * np.minimum(x, 350.0)) + 1.0)


def tail_difference(pot: Potential, t, side: str):
    """V(t) - E_side computed without cancellation (real t, |t| large or not)."""
    if side not in ("right", "left"):
        raise ConfigError("side must be 'right' or 'left'")
    t = np.asarray(t, dtype=np.float64)
    if pot.kind == KIND_TANH:
        a = pot.par1[0]
        out = _tanh_minus_one(a * t) if side == "right" else -_tanh_minus_one(-a * t)
    elif pot.kind == KIND_RATIONAL:
        e = pot.e_right if side == "right" else pot.e_left
        diff = npoly.polysub(pot.par1, e * np.asarray(pot.par2))
        out = npoly.polyval(t, diff) / npoly.polyval(t, pot.par2)
    else:
        # prod tanh(t - o_j) - E via expm1 of summed log1p terms
        offs = pot.par1
        if side == "right":
            small = np.sum([np.log1p(_tanh_minus_one(t - o)) for o in offs], axis=0)
            e = 1.0
        else:
            small = np.sum([np.log1p(_tanh_minus_one(o - t)) for o in offs], axis=0)
            e = pot.e_left
        out = e * np.expm1(small)
    return out if t.shape else float(out)


def reciprocal_tail_values(pot: Potential, u, side: str):
    """(V(t) - E, V(t)) at t = +-1/u for small u > 0, for rational families.

    Substituting u = 1/|t| maps the power-law tail onto a finite interval;
    evaluating through reversed (degree-mirrored) coefficient arrays avoids
    both overflow at huge |t| and the cancellation in V - E.
    """
    if pot.kind != KIND_RATIONAL:
        raise ConfigError("reciprocal tail evaluation only applies to rational potentials")
    s = 1.0 if side == "right" else -1.0
    e = pot.e_right if side == "right" else pot.e_left
    den = pot.par2
    dd = den.size - 1
    num = np.zeros(dd + 1)
    num[: pot.par1.size] = pot.par1
    diff = num - e * den
    # p(s/u) = u^{-dd} * polyval(u, rev) with rev[j] = p_{dd-j} s^{dd-j}
    signs = s ** np.arange(dd, -1, -1)
    num_r = num[::-1] * signs
    den_r = den[::-1] * signs
    diff_r = diff[::-1] * signs
    d = npoly.polyval(u, den_r)
    return npoly.polyval(u, diff_r) / d, npoly.polyval(u, num_r) / d
