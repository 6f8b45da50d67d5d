"""Grid sweeps over (epsilon, h): parallel evaluation, caching, row isolation.

``run_sweep`` evaluates one :class:`SweepRow` per grid point.  A row never
kills the sweep: any failure inside the numerics is recorded in the row's
``error`` field and the numeric columns degrade to NaN.  Results are cached
in ``<output_dir>/cache/<config-hash>.json`` and reloaded on identical
configs unless ``force`` is set, which is also what makes rerun artifacts
bit-identical.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .asymptotics import predict_adiabatic, predict_nonadiabatic, prefactor_Cn
from .config import ExperimentConfig, config_hash
from .errors import LzlabError, RegimeError
from .geometry import CrossingGeometry, alpha_and_K, build_geometry
from .potentials import Potential
from .propagator import RegimeParams, transition_probability

log = logging.getLogger(__name__)

ARTIFACT_VERSION = "0.1.0"

_NAN = float("nan")


@dataclass(frozen=True)
class SweepRow:
    """One grid point: measured probability, predictions, diagnostics."""

    epsilon: float
    h: float
    mu: float
    p_ode: float
    p_nonadiabatic: float
    p_adiabatic: float
    c_n: float
    alpha: float
    unitarity_defect: float
    runtime_s: float
    error: str | None = None

    def as_dict(self) -> dict:
        def num(x: float):
            return None if math.isnan(x) else x

        return {
            "epsilon": self.epsilon,
            "h": self.h,
            "mu": self.mu,
            "P_ode": num(self.p_ode),
            "P_nonadiabatic": num(self.p_nonadiabatic),
            "P_adiabatic": num(self.p_adiabatic),
            "C_n": num(self.c_n),
            "alpha": num(self.alpha),
            "unitarity_defect": num(self.unitarity_defect),
            "runtime_s": self.runtime_s,
            "error": self.error,
        }

    @staticmethod
    def from_dict(d: dict) -> "SweepRow":
        def num(x) -> float:
            return _NAN if x is None else float(x)

        return SweepRow(
            epsilon=float(d["epsilon"]),
            h=float(d["h"]),
            mu=float(d["mu"]),
            p_ode=num(d["P_ode"]),
            p_nonadiabatic=num(d["P_nonadiabatic"]),
            p_adiabatic=num(d["P_adiabatic"]),
            c_n=num(d["C_n"]),
            alpha=num(d["alpha"]),
            unitarity_defect=num(d["unitarity_defect"]),
            runtime_s=float(d["runtime_s"]),
            error=d.get("error"),
        )


@dataclass(frozen=True)
class SweepResult:
    """All rows of one sweep plus provenance."""

    rows: tuple[SweepRow, ...]
    config_hash: str
    artifact_version: str = ARTIFACT_VERSION

    def as_dict(self) -> dict:
        return {
            "artifact_version": self.artifact_version,
            "config_hash": self.config_hash,
            "rows": [r.as_dict() for r in self.rows],
        }

    @staticmethod
    def from_dict(d: dict) -> "SweepResult":
        return SweepResult(
            rows=tuple(SweepRow.from_dict(r) for r in d["rows"]),
            config_hash=str(d["config_hash"]),
            artifact_version=str(d["artifact_version"]),
        )


class _GeometryMemo:
    """Per-sweep cache of crossing geometries, one per distinct epsilon."""

    def __init__(self, pot: Potential, rel_tol: float):
        self._pot = pot
        self._rel_tol = rel_tol
        self._lock = threading.Lock()
        self._cache: dict[float, CrossingGeometry | LzlabError] = {}

    def get(self, eps: float) -> CrossingGeometry:
        with self._lock:
            hit = self._cache.get(eps)
        if hit is None:
            try:
                hit = build_geometry(self._pot, eps, rel_tol=self._rel_tol)
            except LzlabError as exc:
                hit = exc
            with self._lock:
                hit = self._cache.setdefault(eps, hit)
        if isinstance(hit, LzlabError):
            raise hit
        return hit


def evaluate_point(
    pot: Potential,
    eps: float,
    h: float,
    ode_rel_tol: float = 1e-12,
    regime: str = "auto",
    geometries: _GeometryMemo | None = None,
) -> SweepRow:
    """One grid point; failures are folded into the row, not raised.

    ``regime`` "auto" computes each prediction only inside its validity
    window; an explicit override forces that prediction regardless of where
    (eps, h) sits, leaving the other one NaN.
    """
    start = time.perf_counter()
    mu = eps * eps / h
    failures: list[str] = []

    p_ode = defect = _NAN
    try:
        res = transition_probability(pot, RegimeParams(eps, h), tol=ode_rel_tol)
        p_ode, defect = res.probability, res.unitarity_defect
    except LzlabError as exc:
        failures.append(f"ode: {exc}")

    c_n = _NAN
    try:
        c_n = prefactor_Cn(pot, h)
    except LzlabError as exc:
        failures.append(f"prefactor: {exc}")

    p_na = _NAN
    if regime in ("auto", "nonadiabatic"):
        mu_max = math.inf if regime == "nonadiabatic" else 0.1
        try:
            p_na = predict_nonadiabatic(pot, eps, h, mu_max=mu_max).value
        except RegimeError:
            pass
        except LzlabError as exc:
            failures.append(f"nonadiabatic: {exc}")

    alpha = p_ad = _NAN
    if eps > 0.0:
        geom = None
        try:
            if geometries is not None:
                geom = geometries.get(eps)
            else:
                geom = build_geometry(pot, eps, rel_tol=ode_rel_tol)
            alpha, _ = alpha_and_K(geom)
        except LzlabError as exc:
            failures.append(f"geometry: {exc}")
        if geom is not None and regime in ("auto", "adiabatic"):
            threshold = math.inf if regime == "adiabatic" else 0.1
            try:
                p_ad = predict_adiabatic(geom, h, threshold=threshold).value
            except RegimeError:
                pass
            except LzlabError as exc:
                failures.append(f"adiabatic: {exc}")

    return SweepRow(
        epsilon=eps,
        h=h,
        mu=mu,
        p_ode=p_ode,
        p_nonadiabatic=p_na,
        p_adiabatic=p_ad,
        c_n=c_n,
        alpha=alpha,
        unitarity_defect=defect,
        runtime_s=time.perf_counter() - start,
        error="; ".join(failures) if failures else None,
    )


def cache_path(config: ExperimentConfig, digest: str | None = None) -> str:
    digest = digest or config_hash(config)
    return os.path.join(config.output_dir, "cache", digest + ".json")


def _load_cache(path: str, digest: str) -> SweepResult | None:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        result = SweepResult.from_dict(data)
    except (OSError, ValueError, KeyError) as exc:
        log.warning("ignoring unreadable cache %s: %s", path, exc)
        return None
    if result.config_hash != digest:
        log.warning("cache %s has mismatched hash; recomputing", path)
        return None
    return result


def run_sweep(
    config: ExperimentConfig,
    threads: int | None = None,
    force: bool = False,
) -> SweepResult:
    """Evaluate the config's grid, reusing the on-disk cache when allowed."""
    digest = config_hash(config)
    path = cache_path(config, digest)
    if not force and os.path.exists(path):
        cached = _load_cache(path, digest)
        if cached is not None:
            log.info("cache hit: %s (%d rows)", path, len(cached.rows))
            return cached

    grid = config.grid
    if threads is None:
        threads = min(8, os.cpu_count() or 1, len(grid))
    threads = max(1, threads)
    log.info("sweeping %d grid points on %d thread(s)", len(grid), threads)

    memo = _GeometryMemo(config.potential, config.ode_rel_tol)

    def one(point: tuple[float, float]) -> SweepRow:
        eps, h = point
        row = evaluate_point(
            config.potential, eps, h,
            ode_rel_tol=config.ode_rel_tol,
            regime=config.regime,
            geometries=memo,
        )
        if row.error:
            log.warning("row (eps=%g, h=%g): %s", eps, h, row.error)
        return row

    if threads == 1:
        rows = tuple(one(p) for p in grid)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(one, grid))

    result = SweepResult(rows=rows, config_hash=digest)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(result.as_dict(), fh, indent=1, allow_nan=False)
        fh.write("\n")
    os.replace(tmp, path)
    log.info("cached %d rows at %s", len(rows), path)
    return result
