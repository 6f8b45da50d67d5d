"""Experiment configuration: YAML schema, validation, canonical hashing.

A config file is a small YAML tree::

    potential:
      preset: two_zero          # or family: tanh | rational | rational_pair
                                #           | tanh_product  plus its parameters
    sweep:
      epsilon: [0.01, 0.02]     # explicit list, or {min, max, count, log}
      h: {min: 0.005, max: 0.04, count: 4, log: true}
    regime: auto                # auto | nonadiabatic | adiabatic
    tolerances:
      ode_rel_tol: 1.0e-12
    output:
      directory: out
      formats: [csv, json, svg]
    seed: 0
    budget: 2000

Every omitted key takes the default shown by ``config_from_mapping``.  The
config hash covers exactly the fields that influence computed numbers
(potential, grid, regime, tolerance, seed), so cosmetic changes to the
output block do not invalidate cached sweeps.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import yaml

from .errors import BudgetExceededError, ConfigError
from .potentials import (
    Potential,
    preset,
    rational,
    rational_pair,
    tanh_product,
    tanh_scaled,
)

DEFAULT_BUDGET = 2000
DEFAULT_ODE_TOL = 1e-12
DEFAULT_FORMATS = ("csv", "json", "svg")
REGIMES = ("auto", "nonadiabatic", "adiabatic")
FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep description plus output/caching knobs."""

    potential: Potential
    potential_spec: dict = field(compare=False)
    epsilons: tuple[float, ...] = ()
    hs: tuple[float, ...] = ()
    regime: str = "auto"
    ode_rel_tol: float = DEFAULT_ODE_TOL
    output_dir: str = "out"
    formats: tuple[str, ...] = DEFAULT_FORMATS
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.epsilons or not self.hs:
            raise ConfigError("sweep needs at least one epsilon and one h")
        if any(e < 0.0 or not math.isfinite(e) for e in self.epsilons):
            raise ConfigError("epsilon values must be finite and >= 0")
        if any(h <= 0.0 or not math.isfinite(h) for h in self.hs):
            raise ConfigError("h values must be finite and > 0")
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats {bad}; available: {FORMATS}")
        if not 0.0 < self.ode_rel_tol < 1.0:
            raise ConfigError("ode_rel_tol must lie in (0, 1)")
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        n = len(self.epsilons) * len(self.hs)
        if n > self.budget:
            raise BudgetExceededError(
                f"sweep has {n} grid points, budget is {self.budget}")

    @property
    def grid(self) -> tuple[tuple[float, float], ...]:
        """Row order of the sweep: epsilon-major, h-minor."""
        return tuple((e, h) for e in self.epsilons for h in self.hs)


def _axis(node, name: str) -> tuple[float, ...]:
    """One sweep axis: scalar, list, or {min, max, count, log} range."""
    if isinstance(node, (int, float)):
        return (float(node),)
    if isinstance(node, str):
        raise ConfigError(f"sweep.{name} must be numeric, got a string")
    if isinstance(node, Sequence):
        if not node:
            raise ConfigError(f"sweep.{name} list is empty")
        return tuple(float(x) for x in node)
    if isinstance(node, dict):
        extra = set(node) - {"min", "max", "count", "log"}
        if extra:
            raise ConfigError(f"sweep.{name} has unknown keys {sorted(extra)}")
        try:
            lo, hi = float(node["min"]), float(node["max"])
            count = int(node["count"])
        except KeyError as exc:
            raise ConfigError(f"sweep.{name} range needs min, max, count") from exc
        if count < 1:
            raise ConfigError(f"sweep.{name}.count must be >= 1")
        if count == 1:
            return (lo,)
        if node.get("log", False):
            if lo <= 0.0 or hi <= 0.0:
                raise ConfigError(f"log-spaced sweep.{name} needs positive endpoints")
            r = (hi / lo) ** (1.0 / (count - 1))
            return tuple(lo * r**i for i in range(count))
        step = (hi - lo) / (count - 1)
        return tuple(lo + step * i for i in range(count))
    raise ConfigError(f"sweep.{name} must be a number, list, or range mapping")


def _build_potential(node) -> tuple[Potential, dict]:
    """Construct the potential and a normalized descriptor for hashing."""
    if node is None:
        node = {"preset": "tanh"}
    if not isinstance(node, dict):
        raise ConfigError("potential must be a mapping")
    if "preset" in node:
        extra = set(node) - {"preset"}
        if extra:
            raise ConfigError(f"potential.preset takes no other keys, got {sorted(extra)}")
        name = str(node["preset"])
        return preset(name), {"preset": name}

    window = None
    if "window" in node:
        try:
            lo, hi = (float(x) for x in node["window"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("potential.window must be [t_min, t_max]") from exc
        if not lo < hi:
            raise ConfigError("potential.window needs t_min < t_max")
        window = (lo, hi)
    kw = {} if window is None else {"window": window}

    def described(spec: dict) -> dict:
        if window is not None:
            spec["window"] = [window[0], window[1]]
        return spec

    family = node.get("family")
    allowed = {
        "tanh": {"family", "window", "a"},
        "rational": {"family", "window", "numerator", "denominator"},
        "rational_pair": {"family", "window", "zeros", "scale"},
        "tanh_product": {"family", "window", "offsets"},
    }
    if family in allowed:
        extra = set(node) - allowed[family]
        if extra:
            raise ConfigError(f"potential family {family!r} has unknown keys {sorted(extra)}")
    if family == "tanh":
        a = float(node.get("a", 1.0))
        return tanh_scaled(a, **kw), described({"family": "tanh", "a": a})
    if family == "rational":
        try:
            num = [float(c) for c in node["numerator"]]
            den = [float(c) for c in node["denominator"]]
        except KeyError as exc:
            raise ConfigError("rational potential needs numerator and denominator") from exc
        return (rational(num, den, **kw),
                described({"family": "rational", "numerator": num, "denominator": den}))
    if family == "rational_pair":
        try:
            zeros = [float(z) for z in node["zeros"]]
        except KeyError as exc:
            raise ConfigError("rational_pair potential needs zeros") from exc
        scale = float(node.get("scale", 1.0))
        return (rational_pair(zeros, scale=scale, **kw),
                described({"family": "rational_pair", "zeros": zeros, "scale": scale}))
    if family == "tanh_product":
        try:
            offsets = [float(o) for o in node["offsets"]]
        except KeyError as exc:
            raise ConfigError("tanh_product potential needs offsets") from exc
        return (tanh_product(offsets, **kw),
                described({"family": "tanh_product", "offsets": offsets}))
    raise ConfigError(
        "potential needs either preset: <name> or family: "
        "tanh | rational | rational_pair | tanh_product")


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Validate a parsed mapping and build the config."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {"potential", "sweep", "regime", "tolerances", "output", "seed", "budget"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}; known: {sorted(known)}")

    pot, spec = _build_potential(data.get("potential"))

    sweep = data.get("sweep")
    if not isinstance(sweep, dict) or "epsilon" not in sweep or "h" not in sweep:
        raise ConfigError("config needs sweep: {epsilon: ..., h: ...}")
    extra = set(sweep) - {"epsilon", "h"}
    if extra:
        raise ConfigError(f"sweep has unknown keys {sorted(extra)}")
    epsilons = _axis(sweep["epsilon"], "epsilon")
    hs = _axis(sweep["h"], "h")

    tol_node = data.get("tolerances") or {}
    if not isinstance(tol_node, dict):
        raise ConfigError("tolerances must be a mapping")
    extra = set(tol_node) - {"ode_rel_tol"}
    if extra:
        raise ConfigError(f"tolerances has unknown keys {sorted(extra)}")

    out_node = data.get("output") or {}
    if not isinstance(out_node, dict):
        raise ConfigError("output must be a mapping")
    extra = set(out_node) - {"directory", "formats"}
    if extra:
        raise ConfigError(f"output has unknown keys {sorted(extra)}")
    formats = out_node.get("formats", list(DEFAULT_FORMATS))
    if isinstance(formats, str):
        formats = [formats]

    return ExperimentConfig(
        potential=pot,
        potential_spec=spec,
        epsilons=epsilons,
        hs=hs,
        regime=str(data.get("regime", "auto")),
        ode_rel_tol=float(tol_node.get("ode_rel_tol", DEFAULT_ODE_TOL)),
        output_dir=str(out_node.get("directory", "out")),
        formats=tuple(str(f) for f in formats),
        seed=int(data.get("seed", 0)),
        budget=int(data.get("budget", DEFAULT_BUDGET)),
    )


def load_config(path: str) -> ExperimentConfig:
    """Parse a YAML config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config {path} is empty")
    return config_from_mapping(data)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 over the fields that determine the numbers.

    Floats are serialized by shortest round-trip repr, so two configs hash
    equal exactly when they produce bit-identical grids.
    """
    payload = {
        "potential": cfg.potential_spec,
        "epsilon": list(cfg.epsilons),
        "h": list(cfg.hs),
        "regime": cfg.regime,
        "ode_rel_tol": cfg.ode_rel_tol,
        "seed": cfg.seed,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
