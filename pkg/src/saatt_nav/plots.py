"""SVG trajectory overlays with generator-refresh annotations, and radar summaries."""

from __future__ import annotations

import logging
import math
import textwrap
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .baselines import MethodKind  # noqa: E402
from .metrics import METRIC_NAMES, layout_bubble  # noqa: E402
from .planner import PlannerConfig  # noqa: E402
from .report import analyze  # noqa: E402
from .scenarios import Layout  # noqa: E402

log = logging.getLogger(__name__)

COLORS = {"saatt": "tab:green", "ablation": "tab:purple", "astar": "tab:red", "sfm": "tab:blue"}
METHOD_ORDER = tuple(m.value for m in MethodKind)

# Reproducible SVG bytes: fixed id salt, no timestamp.
plt.rcParams["svg.hashsalt"] = "saatt-nav"
_SVG_META = {"Date": None, "Creator": None}


def _snippet(text: str, width: int = 48) -> str:
    return textwrap.shorten(text, width=width, placeholder="...")


def overlay(records: Sequence, path: Path, planner: PlannerConfig = PlannerConfig(),
            arena: tuple[float, float] = (10.0, 10.0), annotate: bool = True) -> Path:
    """One layout, every method's path; SAATT refresh points marked and captioned."""
    layout = Layout.from_dict(records[0].layout)
    fig, ax = plt.subplots(figsize=(6.5, 6.5))
    ax.set_xlim(0, arena[0])
    ax.set_ylim(0, arena[1])
    ax.set_aspect("equal")
    ax.set_title(f"Scenario {layout.kind}, seed {layout.seed}")

    bubble = layout_bubble(layout.pedestrians, planner)
    if bubble is not None:
        ax.add_patch(Circle((bubble.center.x, bubble.center.y), bubble.radius, fill=True,
                            alpha=0.15, color="orange", label="social bubble"))
    for ped in layout.pedestrians:
        ax.add_patch(Circle((ped.position.x, ped.position.y), ped.radius, color="dimgray"))
        if ped.script.kind == "crossing":
            track = [p[ped.id] for p in records[0].pedestrian_positions]
            ax.plot([q[0] for q in track], [q[1] for q in track], ":", color="dimgray", lw=1)

    for rec in sorted(records, key=lambda r: METHOD_ORDER.index(r.method)):
        xs = [s[0] for s in rec.states]
        ys = [s[1] for s in rec.states]
        ax.plot(xs, ys, color=COLORS[rec.method], lw=1.8, label=MethodKind.parse(rec.method).label)
        if rec.method == "saatt" and annotate:
            for i, e in enumerate(rec.events):
                x, y = e["position"]
                ax.plot([x], [y], marker="D", ms=5, color="black", zorder=5, gid=f"saatt-event-{i}")
                ax.annotate(_snippet(e["rationale"]), (x, y), xytext=(6, 6 + 9 * (i % 3)),
                            textcoords="offset points", fontsize=6)

    ax.plot([layout.start.x], [layout.start.y], "ks", ms=7, label="start")
    ax.plot([layout.goal.x], [layout.goal.y], "k*", ms=11, label="goal")
    ax.legend(loc="upper right", fontsize=7)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def radar(report: dict, path: Path) -> Path:
    kinds = list(report["radar"])
    fig, axes = plt.subplots(1, len(kinds), subplot_kw={"projection": "polar"},
                             figsize=(4.5 * len(kinds), 4.5), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        table = report["radar"][kind]
        metrics = [m for m in METRIC_NAMES if m in table]
        if not metrics:
            ax.set_title(f"Scenario {kind} (no data)")
            continue
        angles = [2 * math.pi * i / len(metrics) for i in range(len(metrics))]
        methods = list(table[metrics[0]])
        for label in methods:
            vals = [table[m][label] for m in metrics]
            key = MethodKind.parse(label).value
            ax.plot(angles + angles[:1], vals + vals[:1], color=COLORS[key], label=label)
            ax.fill(angles + angles[:1], vals + vals[:1], color=COLORS[key], alpha=0.08)
        ax.set_xticks(angles)
        ax.set_xticklabels([m.replace("_", "\n") for m in metrics], fontsize=6)
        ax.set_ylim(0, 1.05)
        ax.set_title(f"Scenario {kind}")
    axes[0][-1].legend(loc="lower right", fontsize=7, bbox_to_anchor=(1.3, -0.1))
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def emit_plots(records: Sequence, out_dir: str | Path, planner: PlannerConfig = PlannerConfig(),
               arena: tuple[float, float] = (10.0, 10.0)) -> list[Path]:
    """Overlay per (scenario, seed) plus a radar summary; nothing is written for no records."""
    if not records:
        log.warning("no records given; nothing to plot")
        return []
    out = Path(out_dir)
    groups = defaultdict(list)
    for r in records:
        groups[(r.kind, r.seed)].append(r)
    written = [
        overlay(groups[key], out / f"overlay_{key[0]}_seed{key[1]:03d}.svg", planner, arena)
        for key in sorted(groups)
    ]
    methods = {r.method for r in records}
    if len(methods) > 1:
        seeds_ok = all(
            len({r.seed for r in records if r.kind == k and r.method == m}) > 1
            for k in {r.kind for r in records} for m in methods
        )
        if seeds_ok:
            written.append(radar(analyze(records), out / "radar.svg"))
    return written
