"""Artifact emission: CSV/JSON tables and static SVG/PNG figures.

The CSV column order and float formatting are part of the artifact
contract: the header line is exactly :data:`CSV_HEADER` and every number is
printed with ``%.17g`` so a round trip through the file preserves the bits.
SVG figures are assembled with the standard-library ElementTree (no
renderer dependency); whenever the delimited table is emitted, the same
figures are also rendered as PNG through matplotlib for quick viewing.
"""

from __future__ import annotations

import json
import logging
import math
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .asymptotics import bohr_sommerfeld_roots
from .errors import LzlabError
from .potentials import Potential
from .sweep import SweepResult

log = logging.getLogger(__name__)

CSV_HEADER = ("epsilon,h,mu,P_ode,P_nonadiabatic,P_adiabatic,"
              "C_n,alpha,unitarity_defect,runtime_s")

_COLORS = ("#1f6fb2", "#c5521b", "#2e8540", "#7c4ea3")

_W, _H = 640.0, 440.0
_ML, _MR, _MT, _MB = 72.0, 18.0, 42.0, 52.0


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_csv(result: SweepResult, path: str) -> str:
    lines = [CSV_HEADER]
    for r in result.rows:
        lines.append(",".join(_fmt(x) for x in (
            r.epsilon, r.h, r.mu, r.p_ode, r.p_nonadiabatic, r.p_adiabatic,
            r.c_n, r.alpha, r.unitarity_defect, r.runtime_s)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(result: SweepResult, path: str) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.as_dict(), fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Series:
    label: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class FigureData:
    name: str
    title: str
    xlabel: str
    ylabel: str
    series: tuple[Series, ...]
    vmarks: tuple[float, ...] = ()
    logx: bool = False


def _finite_sorted(pairs, positive_x=False):
    pts = [(x, y) for x, y in pairs
           if math.isfinite(x) and math.isfinite(y) and (x > 0.0 or not positive_x)]
    return tuple(sorted(pts))


def figure_data(result: SweepResult, potential: Potential | None = None
                ) -> tuple[FigureData, ...]:
    """The three standard sweep figures as plain data."""
    rows = result.rows

    prob = FigureData(
        name="probability_vs_mu",
        title="transition probability vs mu",
        xlabel="mu = eps^2 / h",
        ylabel="P",
        logx=True,
        series=tuple(s for s in (
            Series("P_ode", _finite_sorted(((r.mu, r.p_ode) for r in rows), True)),
            Series("P_nonadiabatic",
                   _finite_sorted(((r.mu, r.p_nonadiabatic) for r in rows), True)),
            Series("P_adiabatic",
                   _finite_sorted(((r.mu, r.p_adiabatic) for r in rows), True)),
        ) if s.points),
    )

    by_h: dict[float, float] = {}
    for r in rows:
        if math.isfinite(r.c_n):
            by_h.setdefault(r.h, r.c_n)
    marks: tuple[float, ...] = ()
    if potential is not None and len(by_h) >= 1:
        lo, hi = min(by_h), max(by_h)
        if lo < hi:
            try:
                marks = tuple(bohr_sommerfeld_roots(potential, (lo, hi)))
            except LzlabError as exc:
                log.warning("skipping BS-root marks: %s", exc)
    pref = FigureData(
        name="prefactor_vs_h",
        title="prefactor C_n vs h (dashes: quantization roots)",
        xlabel="h",
        ylabel="C_n",
        series=(Series("C_n", _finite_sorted(by_h.items())),) if by_h else (),
        vmarks=marks,
    )

    decay_pts = [(1.0 / r.h, r) for r in rows if math.isfinite(r.p_adiabatic)]
    adia = FigureData(
        name="adiabatic_decay",
        title="adiabatic log-probability vs 1/h",
        xlabel="1 / h",
        ylabel="log10 P",
        series=tuple(s for s in (
            Series("log10 P_ode", _finite_sorted(
                (x, math.log10(r.p_ode)) for x, r in decay_pts
                if math.isfinite(r.p_ode) and r.p_ode > 0.0)),
            Series("log10 P_adiabatic", _finite_sorted(
                (x, math.log10(r.p_adiabatic)) for x, r in decay_pts
                if r.p_adiabatic > 0.0)),
        ) if s.points),
    )
    return prob, pref, adia


# ---------------------------------------------------------------------------
# SVG rendering (stdlib only)
# ---------------------------------------------------------------------------

def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not lo < hi:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + step * i for i in range(n)]


def _tick_text(v: float, logscale: bool) -> str:
    return "%.3g" % (10.0**v if logscale else v)


def write_svg(fig: FigureData, path: str) -> str:
    """Render one figure to a standalone SVG file."""
    series = [
        Series(s.label, tuple(
            (math.log10(x), y) for x, y in s.points) if fig.logx else s.points)
        for s in fig.series
    ]
    marks = tuple(math.log10(x) if fig.logx else x
                  for x in fig.vmarks if not fig.logx or x > 0.0)
    xs = [x for s in series for x, _ in s.points] + list(marks)
    ys = [y for s in series for _, y in s.points]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if xlo == xhi:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if ylo == yhi:
        ylo, yhi = ylo - 0.5, yhi + 0.5

    def px(x: float) -> float:
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def py(y: float) -> float:
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     width=str(int(_W)), height=str(int(_H)),
                     viewBox=f"0 0 {int(_W)} {int(_H)}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(int(_W)),
                  height=str(int(_H)), fill="white")
    ET.SubElement(svg, "rect", x=str(_ML), y=str(_MT),
                  width=str(_W - _ML - _MR), height=str(_H - _MT - _MB),
                  fill="none", stroke="#444444")
    title = ET.SubElement(svg, "text", x=str(_W / 2), y="24",
                          **{"text-anchor": "middle", "font-size": "15"})
    title.text = fig.title

    for xv in _ticks(xlo, xhi):
        ET.SubElement(svg, "line", x1=f"{px(xv):.2f}", y1=str(_H - _MB),
                      x2=f"{px(xv):.2f}", y2=str(_H - _MB + 5), stroke="#444444")
        lab = ET.SubElement(svg, "text", x=f"{px(xv):.2f}", y=str(_H - _MB + 18),
                            **{"text-anchor": "middle", "font-size": "11"})
        lab.text = _tick_text(xv, fig.logx)
    for yv in _ticks(ylo, yhi):
        ET.SubElement(svg, "line", x1=str(_ML - 5), y1=f"{py(yv):.2f}",
                      x2=str(_ML), y2=f"{py(yv):.2f}", stroke="#444444")
        lab = ET.SubElement(svg, "text", x=str(_ML - 8), y=f"{py(yv) + 4:.2f}",
                            **{"text-anchor": "end", "font-size": "11"})
        lab.text = _tick_text(yv, False)

    xl = ET.SubElement(svg, "text", x=str(_W / 2), y=str(_H - 12),
                       **{"text-anchor": "middle", "font-size": "12"})
    xl.text = fig.xlabel
    yl = ET.SubElement(svg, "text", x="16", y=str(_H / 2),
                       transform=f"rotate(-90 16 {_H / 2})",
                       **{"text-anchor": "middle", "font-size": "12"})
    yl.text = fig.ylabel

    for m in marks:
        ET.SubElement(svg, "line", x1=f"{px(m):.2f}", y1=str(_MT),
                      x2=f"{px(m):.2f}", y2=str(_H - _MB),
                      stroke="#888888", **{"stroke-dasharray": "4 3"})

    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in s.points)
        ET.SubElement(svg, "polyline", points=pts, fill="none",
                      stroke=color, **{"stroke-width": "1.6"})
        leg = ET.SubElement(svg, "text", x=str(_W - _MR - 6),
                            y=str(_MT + 16 + 15 * i), fill=color,
                            **{"text-anchor": "end", "font-size": "12"})
        leg.text = s.label

    ET.ElementTree(svg).write(path, encoding="unicode", xml_declaration=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# PNG rendering (matplotlib, loaded lazily)
# ---------------------------------------------------------------------------

def write_png(fig: FigureData, path: str) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    f, ax = plt.subplots(figsize=(6.4, 4.4), dpi=110)
    for s in fig.series:
        xs = [x for x, _ in s.points]
        ys = [y for _, y in s.points]
        ax.plot(xs, ys, marker=".", label=s.label)
    for m in fig.vmarks:
        ax.axvline(m, color="0.5", linestyle="--", linewidth=0.9)
    if fig.logx:
        ax.set_xscale("log")
    ax.set_title(fig.title)
    ax.set_xlabel(fig.xlabel)
    ax.set_ylabel(fig.ylabel)
    if fig.series:
        ax.legend(fontsize=9)
    f.tight_layout()
    f.savefig(path)
    plt.close(f)
    return path


def emit_reports(
    result: SweepResult,
    outdir: str,
    formats: tuple[str, ...],
    potential: Potential | None = None,
    basename: str = "sweep",
) -> list[str]:
    """Write the requested artifacts; returns the created paths.

    ``csv`` also renders the figures as PNG next to the table, so the
    delimited output always ships with viewable plots.
    """
    os.makedirs(outdir, exist_ok=True)
    paths: list[str] = []
    figures = None
    if "csv" in formats or "svg" in formats:
        figures = figure_data(result, potential)
    if "csv" in formats:
        paths.append(write_csv(result, os.path.join(outdir, basename + ".csv")))
    if "json" in formats:
        paths.append(write_json(result, os.path.join(outdir, basename + ".json")))
    if "svg" in formats and figures is not None:
        for fig in figures:
            paths.append(write_svg(fig, os.path.join(outdir, fig.name + ".svg")))
    if "csv" in formats and figures is not None:
        for fig in figures:
            paths.append(write_png(fig, os.path.join(outdir, fig.name + ".png")))
    for p in paths:
        log.info("wrote %s", p)
    return paths
