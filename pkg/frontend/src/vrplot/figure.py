"""Render sweep CSVs as SINR-vs-region-size figures.

One panel per mask normalization; within a panel, one curve family per
(scenario, precoder, estimator).  Monte Carlo cells are drawn as points
with error bars, analytic estimators as lines, and stationary cells as
horizontal reference lines.  Cells flagged singular or infeasible carry
no value and are simply left out, so e.g. the worst-case ZF curve begins
at the first region size where the channel has full rank.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import NoDataError
from .reader import SweepRow, read_sweep

NORMALIZATION_ORDER = ("trace-m", "trace-d")
ESTIMATOR_ORDER = ("monte-carlo", "det-equiv", "closed-form", "link-level")
SCENARIO_ORDER = ("worst", "best", "random")
PRECODER_ORDER = ("cb", "zf")

_LINESTYLE = {"det-equiv": "--", "closed-form": "-", "link-level": ":"}
_MARKER = {"cb": "o", "zf": "s"}
_CURVE_COLOR = {
    ("worst", "cb"): "tab:red",
    ("worst", "zf"): "tab:orange",
    ("best", "cb"): "tab:blue",
    ("best", "zf"): "tab:cyan",
    ("random", "cb"): "tab:purple",
    ("random", "zf"): "tab:brown",
}
_STATIONARY_COLOR = {"cb": "dimgray", "zf": "black"}


@dataclass(frozen=True)
class PlotSpec:
    """What to read, what to write, and which slice to show."""

    csv_path: Path
    out_path: Path
    normalization: Optional[str] = None      # None = every one present
    estimators: Optional[Tuple[str, ...]] = None  # None = every one present
    dpi: int = 150


@dataclass(frozen=True)
class Series:
    """One plotted curve family, sorted by region size."""

    scenario: str
    precoder: str
    estimator: str
    D: Tuple[int, ...]
    sinr_db: Tuple[float, ...]
    stderr: Tuple[Optional[float], ...]

    @property
    def label(self) -> str:
        return f"{self.scenario} {self.precoder.upper()} {self.estimator}"


@dataclass(frozen=True)
class RenderResult:
    """Where the image went and what ended up in it."""

    out_path: Path
    panels: Tuple[str, ...]
    families: Dict[str, int]  # normalization -> non-stationary family count


def _order(seq, value):
    """Sort key that respects the canonical orders but tolerates strangers."""
    try:
        return (0, seq.index(value))
    except ValueError:
        return (1, value)


def build_series(rows, normalization, estimators=None):
    """Assemble the plotted data for one panel.

    Returns (curves, references): curves is a list of Series over D for
    the non-stationary scenarios; references maps (precoder, estimator)
    to the stationary SINR level.  Only cells that carry a value are
    used, so the output is exactly what gets drawn.  Deterministic: the
    same rows always produce the same structures in the same order.
    """
    picked = [r for r in rows
              if r.normalization == normalization and r.plottable
              and (estimators is None or r.estimator in estimators)]
    picked.sort(key=lambda r: (_order(SCENARIO_ORDER, r.scenario),
                               _order(PRECODER_ORDER, r.precoder),
                               _order(ESTIMATOR_ORDER, r.estimator),
                               r.D))
    references = {}
    grouped: Dict[Tuple[str, str, str], list] = {}
    for r in picked:
        if r.scenario == "stationary":
            references[(r.precoder, r.estimator)] = r.sinr_db
        else:
            grouped.setdefault((r.scenario, r.precoder, r.estimator),
                               []).append(r)
    curves = [Series(scenario=sc, precoder=pc, estimator=est,
                     D=tuple(r.D for r in cells),
                     sinr_db=tuple(r.sinr_db for r in cells),
                     stderr=tuple(r.sinr_db_stderr for r in cells))
              for (sc, pc, est), cells in grouped.items()]
    return curves, references


def _draw_panel(ax, curves, references, normalization, context):
    for curve in curves:
        color = _CURVE_COLOR.get((curve.scenario, curve.precoder), "tab:gray")
        if curve.estimator == "monte-carlo":
            yerr = [e if e is not None else 0.0 for e in curve.stderr]
            ax.errorbar(curve.D, curve.sinr_db, yerr=yerr, color=color,
                        marker=_MARKER.get(curve.precoder, "x"),
                        linestyle="none", markersize=4, capsize=2,
                        label=curve.label)
        else:
            ax.plot(curve.D, curve.sinr_db, color=color,
                    linestyle=_LINESTYLE.get(curve.estimator, "-."),
                    linewidth=1.2, label=curve.label)
    for (precoder, estimator), level in sorted(references.items()):
        ax.axhline(level, color=_STATIONARY_COLOR.get(precoder, "gray"),
                   linestyle=_LINESTYLE.get(estimator, "-"), linewidth=0.9,
                   alpha=0.7,
                   label=f"stationary {precoder.upper()} {estimator}")
    title = f"normalization {normalization}"
    if len(context) == 1:
        M, K, rho_db = next(iter(context))
        title += f"   (M={M}, K={K}, SNR={rho_db:g} dB)"
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("region size D (visible antennas)")
    ax.set_ylabel("mean SINR (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=6, ncol=2, loc="lower right")


def render(spec: PlotSpec) -> RenderResult:
    """Read the CSV, draw one panel per selected normalization, save."""
    rows = read_sweep(spec.csv_path)
    if spec.normalization is not None:
        panels = (spec.normalization,)
    else:
        present = {r.normalization for r in rows}
        panels = tuple(n for n in NORMALIZATION_ORDER if n in present)
        panels += tuple(sorted(present - set(NORMALIZATION_ORDER)))
    if not panels:
        raise NoDataError(f"{spec.csv_path}: no rows to plot")

    fig, axes = plt.subplots(1, len(panels),
                             figsize=(6.4 * len(panels), 4.8), squeeze=False)
    families = {}
    try:
        for ax, norm in zip(axes[0], panels):
            curves, references = build_series(rows, norm, spec.estimators)
            if not curves and not references:
                raise NoDataError(
                    f"{spec.csv_path}: no plottable rows for "
                    f"normalization {norm!r}"
                    + (f" with estimators {spec.estimators}"
                       if spec.estimators else ""))
            context = {(r.M, r.K, r.rho_db) for r in rows
                       if r.normalization == norm and r.plottable}
            _draw_panel(ax, curves, references, norm, context)
            families[norm] = len(curves)
        fig.tight_layout()
        out = Path(spec.out_path)
        fig.savefig(out, dpi=spec.dpi)
    finally:
        plt.close(fig)
    return RenderResult(out_path=out, panels=panels, families=families)
