"""Paired nonparametric tests: Friedman omnibus, Conover post-hoc, Cochran's Q."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special
from scipy.stats import rankdata


class FriedmanResult(NamedTuple):
    statistic: float
    p_value: float


class CochranResult(NamedTuple):
    statistic: float
    p_value: float | None  # None: incalculable (no variation anywhere)

    @property
    def calculable(self) -> bool:
        return self.p_value is not None


@dataclass(frozen=True)
class ConoverResult:
    labels: tuple[str, ...]
    rank_sums: tuple[float, ...]
    p_values: np.ndarray
    order: tuple[str, ...]
    groups: tuple[tuple[str, ...], ...]
    omnibus: FriedmanResult

    def formatted(self) -> str:
        """Ranking in table form: best first, '/' joins indistinguishable methods."""
        return ", ".join("/".join(g) for g in self.groups)

    def p(self, a: str, b: str) -> float:
        return float(self.p_values[self.labels.index(a), self.labels.index(b)])


def chi2_sf(x: float, df: float) -> float:
    """Upper tail of the chi-square distribution (regularised upper incomplete gamma)."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def t_two_sided(t: float, df: float) -> float:
    return float(min(1.0, 2.0 * special.stdtr(df, -abs(t))))


def _as_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D (blocks x treatments) matrix")
    n, k = m.shape
    if n < 2 or k < 2:
        raise ValueError("need at least two blocks and two treatments")
    if not np.all(np.isfinite(m)):
        raise ValueError("paired matrix has missing or non-finite cells")
    return m


def row_ranks(matrix, higher_is_better: bool = False) -> np.ndarray:
    """Within-row mid-ranks; rank 1 is the best value."""
    m = _as_matrix(matrix)
    return rankdata(-m if higher_is_better else m, method="average", axis=1)


def friedman(matrix) -> FriedmanResult:
    """Tie-corrected Friedman statistic with chi-square (k-1 dof) p-value."""
    ranks = row_ranks(matrix)
    n, k = ranks.shape
    rank_sums = ranks.sum(axis=0)
    a = float((ranks**2).sum())
    c = n * k * (k + 1) ** 2 / 4.0
    if a - c <= 1e-12 * c:
        return FriedmanResult(0.0, 1.0)
    stat = (k - 1) * (float((rank_sums**2).sum()) - n * c) / (a - c)
    stat = max(stat, 0.0)
    return FriedmanResult(stat, chi2_sf(stat, k - 1))


def conover_posthoc(
    matrix,
    labels: Sequence[str] | None = None,
    alpha: float = 0.05,
    higher_is_better: bool = False,
) -> ConoverResult:
    """Conover pairwise comparisons of Friedman rank sums (unadjusted, t with (n-1)(k-1) dof).

    When the Friedman test is not significant every method lands in one group.
    """
    ranks = row_ranks(matrix, higher_is_better)
    n, k = ranks.shape
    labels = tuple(labels) if labels is not None else tuple(str(j) for j in range(k))
    if len(labels) != k or len(set(labels)) != k:
        raise ValueError("need one distinct label per column")
    rank_sums = ranks.sum(axis=0)
    a2 = float((ranks**2).sum())
    b2 = float((rank_sums**2).sum()) / n
    dof = (n - 1) * (k - 1)
    var = 2.0 * n * (a2 - b2) / dof

    pvals = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            diff = abs(rank_sums[i] - rank_sums[j])
            if var <= 1e-12:
                p = 1.0 if diff == 0 else 0.0
            else:
                p = t_two_sided(diff / np.sqrt(var), dof)
            pvals[i, j] = pvals[j, i] = p

    omnibus = friedman(matrix)
    order = sorted(range(k), key=lambda j: (rank_sums[j], labels[j]))
    groups: list[list[int]] = []
    for j in order:
        if omnibus.p_value < alpha and groups and all(pvals[j, g] >= alpha for g in groups[-1]):
            groups[-1].append(j)
        elif omnibus.p_value >= alpha and groups:
            groups[-1].append(j)
        else:
            groups.append([j])
    return ConoverResult(
        labels=labels,
        rank_sums=tuple(float(r) for r in rank_sums),
        p_values=pvals,
        order=tuple(labels[j] for j in order),
        groups=tuple(tuple(labels[j] for j in g) for g in groups),
        omnibus=omnibus,
    )


def cochran_q(binary_matrix) -> CochranResult:
    m = np.asarray(binary_matrix)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError("need a (blocks x treatments) matrix with at least 2 x 2 cells")
    if not np.all((m == 0) | (m == 1)):
        raise ValueError("Cochran's Q needs binary cells")
    m = m.astype(int)
    k = m.shape[1]
    col = m.sum(axis=0)
    row = m.sum(axis=1)
    total = int(m.sum())
    denom = k * total - int((row**2).sum())
    if denom == 0:
        if np.all(m == m.flat[0]):
            return CochranResult(float("nan"), None)
        # Every row is constant but rows differ: column totals coincide.
        return CochranResult(0.0, 1.0)
    q = (k - 1) * (k * int((col**2).sum()) - total**2) / denom
    return CochranResult(float(q), chi2_sf(q, k - 1))
