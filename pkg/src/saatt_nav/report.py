"""Per-scenario, per-metric paired statistics in the ranking-table layout, plus radar summaries."""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .baselines import MethodKind
from .metrics import HIGHER_IS_BETTER, METRIC_NAMES, minmax_normalize
from .stats import cochran_q, conover_posthoc

METHOD_ORDER = tuple(m.value for m in MethodKind)


class AnalysisError(RuntimeError):
    pass


def _label(method: str) -> str:
    return MethodKind.parse(method).label


def paired_matrix(records: Sequence, kind: str, metric: str) -> tuple[np.ndarray | None, list[str], list[int]]:
    """Seeds x methods matrix for one scenario; ``None`` if the metric is undefined there."""
    by_method: dict[str, dict[int, Any]] = defaultdict(dict)
    for r in records:
        if r.kind == kind:
            by_method[r.method][r.seed] = r.metrics[metric]
    methods = sorted(by_method, key=METHOD_ORDER.index)
    seed_sets = [set(by_method[m]) for m in methods]
    if not methods:
        return None, [], []
    if any(s != seed_sets[0] for s in seed_sets):
        raise AnalysisError(f"scenario {kind}: methods were not run on the same seeds")
    seeds = sorted(seed_sets[0])
    values = [[by_method[m][s] for m in methods] for s in seeds]
    if any(v is None for row in values for v in row):
        return None, methods, seeds
    return np.asarray(values, dtype=float), methods, seeds


def analyze(records: Sequence, alpha: float = 0.05) -> dict[str, Any]:
    if not records:
        raise AnalysisError("no records to analyse")
    kinds = sorted({r.kind for r in records})
    tables: dict[str, dict[str, Any]] = {}
    radar: dict[str, Any] = {}
    for kind in kinds:
        rows: dict[str, Any] = {}
        means: dict[str, dict[str, float]] = {}
        for metric in METRIC_NAMES:
            matrix, methods, seeds = paired_matrix(records, kind, metric)
            labels = [_label(m) for m in methods]
            if matrix is None:
                rows[metric] = {"cell": "n/a", "test": None}
                continue
            means[metric] = {lab: float(v) for lab, v in zip(labels, matrix.mean(axis=0))}
            if len(methods) < 2 or len(seeds) < 2:
                rows[metric] = {"cell": "n/a", "test": None, "means": means[metric]}
                continue
            if metric == "success":
                res = cochran_q(matrix.astype(int))
                cell = "n.s."
                if not res.calculable:
                    cell = "identical"
                elif res.p_value < alpha:
                    cell = conover_posthoc(matrix, labels, alpha, higher_is_better=True).formatted()
                rows[metric] = {
                    "cell": cell,
                    "test": "cochran",
                    "statistic": None if not res.calculable else res.statistic,
                    "p_value": res.p_value,
                    "means": means[metric],
                }
                continue
            post = conover_posthoc(matrix, labels, alpha, higher_is_better=metric in HIGHER_IS_BETTER)
            significant = post.omnibus.p_value < alpha
            rows[metric] = {
                "cell": post.formatted() if significant else "n.s.",
                "test": "friedman",
                "statistic": post.omnibus.statistic,
                "p_value": post.omnibus.p_value,
                "rank_sums": dict(zip(labels, post.rank_sums)),
                "groups": [list(g) for g in post.groups],
                "pairwise_p": {
                    f"{a} vs {b}": post.p(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]
                },
                "means": means[metric],
            }
        tables[kind] = rows
        radar[kind] = radar_summary(means)
    return {"alpha": alpha, "n_records": len(records), "tables": tables, "radar": radar}


def radar_summary(means: dict[str, dict[str, float]]) -> dict[str, dict[str, float]]:
    """Min-max normalised per-metric means; 1 is best on every axis."""
    out: dict[str, dict[str, float]] = {}
    for metric, per_method in means.items():
        labels = list(per_method)
        scaled = minmax_normalize([per_method[m] for m in labels], lower_is_better=metric not in HIGHER_IS_BETTER)
        out[metric] = dict(zip(labels, scaled))
    return out


def markdown_table(report: dict[str, Any]) -> str:
    kinds = list(report["tables"])
    lines = [
        "| Metric | " + " | ".join(kinds) + " |",
        "|---|" + "---|" * len(kinds),
    ]
    for metric in METRIC_NAMES:
        cells = []
        for kind in kinds:
            row = report["tables"][kind][metric]
            cell = row["cell"]
            if row.get("p_value") is not None:
                cell += f" (p={row['p_value']:.3g})"
            cells.append(cell)
        lines.append(f"| {metric} | " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("Cells list methods best first; '/' joins methods that are not significantly different.")
    return "\n".join(lines) + "\n"


def write_report(report: dict[str, Any], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    js = out / "analysis.json"
    js.write_text(json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    md = out / "analysis.md"
    md.write_text(markdown_table(report), encoding="utf-8")
    return [js, md]
