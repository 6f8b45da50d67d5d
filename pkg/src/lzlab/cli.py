"""Command-line driver.

Subcommands::

    probability     one-point transition probability from the ODE
    sweep           run the (epsilon, h) grid of a config file
    actions         crossing geometry: turning points and action integrals
    asymptote       closed-form predictions and regime classification
    bs-roots        quantization roots of the prefactor C_n(h)
    chain           transfer-matrix chain and its predicted probability
    wkb-wronskian   Wronskian of the exact WKB pair along a contour
    validate        structural assumption report for a potential

Global flags (``--config``, ``--out``, ``--force``, ``--threads``,
``--log-level``) are accepted both before and after the subcommand.  Exit
codes: 0 success, 2 configuration error, 3 numerical failure, 4 budget
exceeded.
"""

from __future__ import annotations

import argparse
import cmath
import dataclasses
import json
import logging
import math
import sys

from .asymptotics import (
    bohr_sommerfeld_roots,
    predict_adiabatic,
    predict_nonadiabatic,
    prefactor_Cn,
)
from .config import load_config
from .errors import BudgetExceededError, ConfigError, LzlabError
from .geometry import alpha_and_K, build_geometry
from .potentials import PRESETS, preset, validate_assumptions
from .propagator import RegimeParams, transition_probability
from .reports import emit_reports
from .sweep import run_sweep
from .transfer import assemble_chain, chain_product
from .wkb import (
    NODES_PER_UNIT,
    PolylinePath,
    WKBSpec,
    _auto_nodes,
    crossing_polyline,
    wronskian_report,
)

log = logging.getLogger(__name__)

_LOG_LEVELS = ("debug", "info", "warning", "error")


# ---------------------------------------------------------------------------
# parser construction
# ---------------------------------------------------------------------------

def _add_global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    """Install the shared flags.

    On subparsers the defaults are SUPPRESS so values parsed before the
    subcommand survive (argparse otherwise overwrites them with defaults).
    """
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--config", metavar="PATH", default=d(None),
                   help="YAML experiment config")
    p.add_argument("--out", metavar="DIR", default=d(None),
                   help="output directory (overrides the config)")
    p.add_argument("--force", action="store_true", default=d(False),
                   help="recompute even when a cached result exists")
    p.add_argument("--threads", type=int, metavar="N", default=d(None),
                   help="worker threads for sweeps")
    p.add_argument("--log-level", choices=_LOG_LEVELS, default=d("warning"),
                   help="logging verbosity")


def _add_potential_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="named potential (wins over the config's)")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="lzlab",
        description="scattering laboratory for two-level avoided crossings")
    _add_global_flags(root, suppress=False)
    sub = root.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name: str, helptext: str, handler) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=helptext)
        _add_global_flags(p, suppress=True)
        p.set_defaults(handler=handler)
        return p

    p = cmd("probability", "one-point ODE transition probability", _cmd_probability)
    p.add_argument("--potential", metavar="NAME|CONFIG",
                   help="preset name or a YAML config whose potential to use")
    p.add_argument("--epsilon", type=float, required=True, help="gap parameter")
    p.add_argument("--h", type=float, required=True, help="semiclassical parameter")
    p.add_argument("--tol", type=float, default=1e-12, help="integrator tolerance")
    p.add_argument("--T", type=float, default=None,
                   help="matching time override (default: from tail decay)")

    cmd("sweep", "run the config's (epsilon, h) grid and emit artifacts", _cmd_sweep)

    p = cmd("actions", "turning points and action integrals", _cmd_actions)
    _add_potential_flag(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--rel-tol", type=float, default=1e-12)

    p = cmd("asymptote", "closed-form predictions at one point", _cmd_asymptote)
    _add_potential_flag(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--h", type=float, required=True)

    p = cmd("bs-roots", "quantization roots of C_n on an h-range", _cmd_bs_roots)
    _add_potential_flag(p)
    p.add_argument("--h-min", type=float, required=True)
    p.add_argument("--h-max", type=float, required=True)

    p = cmd("chain", "transfer-matrix chain and predicted probability", _cmd_chain)
    _add_potential_flag(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--regime", choices=("nonadiabatic", "adiabatic"),
                   help="chain flavor (default: classify from mu and h/eps^2)")
    p.add_argument("--compare", action="store_true",
                   help="also integrate the ODE and print the gap")

    p = cmd("wkb-wronskian", "exact-WKB Wronskian along a contour", _cmd_wronskian)
    _add_potential_flag(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--h-list", required=True, metavar="H1,H2,...",
                   help="comma-separated h values")
    p.add_argument("--crossing", type=int, default=1, metavar="K",
                   help="crossing index anchoring the branch (1 = rightmost)")
    p.add_argument("--path", default="auto-offset",
                   help="waypoints 're,im re,im ...' or 'auto-offset [c]' for the "
                        "descending contour around the crossing at offset c")
    p.add_argument("--span", type=float, default=None,
                   help="horizontal half-extent of the auto contour")
    p.add_argument("--k-max", type=int, default=None,
                   help="symbol pairs to resum (default: module setting)")
    p.add_argument("--exclusion", type=float, default=None,
                   help="reject waypoints within this distance of a turning point")

    p = cmd("validate", "structural assumption report", _cmd_validate)
    _add_potential_flag(p)

    return root


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _resolve_potential(args):
    name_or_path = getattr(args, "potential", None)
    if name_or_path:
        if name_or_path in PRESETS:
            return preset(name_or_path)
        import os
        if os.path.exists(name_or_path):
            return load_config(name_or_path).potential
        raise ConfigError(
            f"--potential {name_or_path!r} is neither a preset "
            f"({sorted(PRESETS)}) nor a config file")
    if getattr(args, "preset", None):
        return preset(args.preset)
    if args.config:
        return load_config(args.config).potential
    return preset("tanh")


def _write_json(args, name: str, payload: dict) -> None:
    if not args.out:
        return
    import os
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")
    print(f"wrote {path}")


def _cfmt(z: complex) -> str:
    return f"{z.real:+.12g}{z.imag:+.12g}i"


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------

def _cmd_probability(args) -> int:
    pot = _resolve_potential(args)
    rp = RegimeParams(args.epsilon, args.h)
    res = transition_probability(pot, rp, tol=args.tol, T=args.T)
    print(f"P = {res.probability:.12g}")
    print(f"mu = {rp.mu:.6g}  regime = {rp.regime}")
    print(f"unitarity defect = {res.unitarity_defect:.3e}  "
          f"truncation T = {res.truncation_T:.6g}")
    _write_json(args, "probability.json", {
        "epsilon": args.epsilon, "h": args.h, "mu": rp.mu,
        "P": res.probability, "unitarity_defect": res.unitarity_defect,
        "T": res.truncation_T, "steps": res.integrator_stats.get("steps"),
    })
    return 0


def _cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep needs --config <file>")
    cfg = load_config(args.config)
    if args.out:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    result = run_sweep(cfg, threads=args.threads, force=args.force)
    paths = emit_reports(result, cfg.output_dir, cfg.formats, potential=cfg.potential)
    print(f"{len(result.rows)} rows -> {cfg.output_dir} ({len(paths)} artifacts)")
    failed = sum(1 for r in result.rows if r.error)
    if failed:
        print(f"{failed} rows recorded failures; see the 'error' fields in the JSON")
    return 0


def _cmd_actions(args) -> int:
    pot = _resolve_potential(args)
    geom = build_geometry(pot, args.epsilon, rel_tol=args.rel_tol)
    alpha, dominant = alpha_and_K(geom)
    for k in range(1, geom.n + 1):
        line = (f"k={k}  zeta_k = {_cfmt(geom.turning_points[k-1])}  "
                f"A_k = {_cfmt(geom.actions_A[k-1])}")
        if k <= geom.n - 1:
            line += f"  R_k = {geom.actions_R[k-1]:+.12g}"
        print(line)
    print(f"A_r = {geom.action_right:+.12g}  A_l = {geom.action_left:+.12g}  "
          f"lambda_r = {geom.lambda_right:+.6g}  lambda_l = {geom.lambda_left:+.6g}")
    print(f"alpha = {alpha:.12g}  dominant crossings = {list(dominant)}")
    _write_json(args, "actions.json", geom.as_dict())
    return 0


def _cmd_asymptote(args) -> int:
    pot = _resolve_potential(args)
    rp = RegimeParams(args.epsilon, args.h)
    c_n = prefactor_Cn(pot, args.h)
    print(f"regime = {rp.regime}  mu = {rp.mu:.6g}  C_n(h) = {c_n:.12g}")
    payload: dict = {"epsilon": args.epsilon, "h": args.h, "mu": rp.mu,
                     "regime": rp.regime, "C_n": c_n}
    if rp.regime == "nonadiabatic":
        pred = predict_nonadiabatic(pot, args.epsilon, args.h)
        print(f"P_nonadiabatic = {pred.value:.12g}  "
              f"errors {', '.join(pred.error_orders)}")
        if pred.order_degenerate:
            print("note: C_n vanishes here (quantization root); the leading "
                  "term is degenerate")
        payload["nonadiabatic"] = pred.as_dict()
    elif rp.regime == "adiabatic":
        geom = build_geometry(pot, args.epsilon)
        pred = predict_adiabatic(geom, args.h)
        print(f"P_adiabatic = {pred.value:.12g}  alpha = {pred.alpha:.12g}  "
              f"errors {', '.join(pred.error_orders)}")
        payload["adiabatic"] = pred.as_dict()
    else:
        print("no closed-form prediction applies in the critical window")
    _write_json(args, "asymptote.json", payload)
    return 0


def _cmd_bs_roots(args) -> int:
    pot = _resolve_potential(args)
    roots = bohr_sommerfeld_roots(pot, (args.h_min, args.h_max))
    print(f"method = {roots.method}")
    if len(roots):
        for r in roots:
            print(f"h = {r:.12g}  C_n = {prefactor_Cn(pot, r):.3e}")
    else:
        print(f"no roots on [{args.h_min:g}, {args.h_max:g}]; "
              f"min C_n = {roots.min_C:.6g} at h = {roots.argmin_h:.12g}")
    _write_json(args, "bs_roots.json", roots.as_dict())
    return 0


def _cmd_chain(args) -> int:
    pot = _resolve_potential(args)
    rp = RegimeParams(args.epsilon, args.h)
    regime = args.regime or rp.regime
    if regime == "critical":
        raise ConfigError(
            f"(eps={args.epsilon:g}, h={args.h:g}) sits in the critical window "
            "(mu and h/eps^2 both above 0.1); pass --regime explicitly")
    geom = build_geometry(pot, args.epsilon)
    chain = assemble_chain(pot, geom, args.h, regime)
    s, p_pred = chain_product(chain)
    print("chain:", " ".join(chain.labels))
    print(f"S = [[{_cfmt(s[0, 0])}, {_cfmt(s[0, 1])}],")
    print(f"     [{_cfmt(s[1, 0])}, {_cfmt(s[1, 1])}]]")
    print(f"P_pred = |S_21|^2 = {p_pred:.12g}  ({regime} chain, "
          f"errors {', '.join(chain.error_orders)})")
    payload = chain.as_dict()
    payload["P_pred"] = p_pred
    if args.compare:
        res = transition_probability(pot, rp)
        print(f"P_ode = {res.probability:.12g}  "
              f"|P_pred - P_ode| = {abs(p_pred - res.probability):.3e}")
        payload["P_ode"] = res.probability
    _write_json(args, "chain.json", payload)
    return 0


def _parse_h_list(text: str) -> list[float]:
    try:
        hs = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad --h-list {text!r}: {exc}") from exc
    if not hs:
        raise ConfigError("--h-list is empty")
    return hs


def _parse_waypoints(text: str) -> tuple[complex, ...]:
    wps = []
    for tok in text.replace(";", " ").split():
        try:
            re_s, im_s = tok.split(",")
            wps.append(complex(float(re_s), float(im_s)))
        except ValueError as exc:
            raise ConfigError(f"bad waypoint {tok!r}; expected 're,im'") from exc
    if len(wps) < 2:
        raise ConfigError("--path needs at least two 're,im' waypoints")
    return tuple(wps)


def _cmd_wronskian(args) -> int:
    pot = _resolve_potential(args)
    hs = _parse_h_list(args.h_list)
    k = args.crossing
    if not 1 <= k <= pot.n_crossings:
        raise ConfigError(f"--crossing {k} out of range 1..{pot.n_crossings}")
    kw = {} if args.k_max is None else {"k_max": args.k_max}

    spec_text = args.path.strip()
    auto = spec_text.startswith("auto-offset")
    if auto:
        rest = spec_text[len("auto-offset"):].strip(" =:")
        offset = float(rest) if rest else None
    else:
        waypoints = _parse_waypoints(spec_text)

    lines = ["h,re_w,im_w,defect,dist"]
    base = pot.zeros[k - 1]
    for h in hs:
        if auto:
            path = crossing_polyline(pot, args.epsilon, h, k=k, offset=offset,
                                     span=args.span,
                                     exclusion_radius=args.exclusion)
        else:
            path = PolylinePath(waypoints, _auto_nodes(waypoints, NODES_PER_UNIT),
                                exclusion_radius=args.exclusion)
        sp = WKBSpec(pot, args.epsilon, complex(base), path.waypoints[0], +1,
                     branch_anchor=k)
        sm = WKBSpec(pot, args.epsilon, complex(base), path.waypoints[-1], -1,
                     branch_anchor=k)
        rep = wronskian_report(sp, sm, path, h, **kw)
        lines.append(",".join("%.17g" % x for x in (
            h, rep.value.real, rep.value.imag, rep.defect,
            rep.min_turning_distance)))
    text = "\n".join(lines) + "\n"
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        path_out = os.path.join(args.out, "wronskian.csv")
        with open(path_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {path_out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_validate(args) -> int:
    pot = _resolve_potential(args)
    report = validate_assumptions(pot)
    for name, (ok, detail) in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    print(f"fitted decay exponent: {report.fitted_decay:g}")
    _write_json(args, "validate.json", report.as_dict())
    return 0 if report.all_passed else 2


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LzlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
