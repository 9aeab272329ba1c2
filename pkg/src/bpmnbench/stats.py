"""Rank tests over (sample, run) blocks: Skillings-Mack, Wilcoxon, Bonferroni."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import gammaincc
from scipy.stats import rankdata

EXACT_MAX_N = 25
PINV_RTOL = 1e-10

DIMENSION_KEYS = {"syntactic": ("syn", "q_syn"), "pragmatic": ("prag", "q_prag"), "semantic": ("sem", "q_sem")}


class DegenerateDesign(ValueError):
    pass


class TooFewPairs(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: Optional[int] = None
    n_pairs: Optional[int] = None

    __test__ = False  # not a pytest class


def chi2_sf(x: float, df: int) -> float:
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# -- Skillings-Mack ----------------------------------------------------------


def _connected(k: int, cooccur: np.ndarray) -> bool:
    seen, stack = {0}, [0]
    while stack:
        s = stack.pop()
        for t in range(k):
            if t not in seen and cooccur[s, t] > 0:
                seen.add(t)
                stack.append(t)
    return len(seen) == k


def skillings_mack(matrix: Sequence[Sequence[Optional[float]]]) -> TestResult:
    """Rank test for blocks x treatments with missing cells (None or NaN).

    On complete data the statistic equals Friedman's (no tie correction).
    """
    data = np.array([[np.nan if v is None else float(v) for v in row] for row in matrix], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise DegenerateDesign("need at least two treatments")
    k = data.shape[1]
    adjusted = np.zeros(k)
    cooccur = np.zeros((k, k))
    for row in data:
        seen = ~np.isnan(row)
        k_i = int(seen.sum())
        if k_i < 2:
            continue
        ranks = rankdata(row[seen])
        adjusted[seen] += math.sqrt(12.0 / (k_i + 1)) * (ranks - (k_i + 1) / 2.0)
        idx = np.flatnonzero(seen)
        cooccur[np.ix_(idx, idx)] += 1
    np.fill_diagonal(cooccur, 0)
    if not _connected(k, cooccur):
        raise DegenerateDesign("some treatments are never ranked against the rest")
    cov = -cooccur
    np.fill_diagonal(cov, cooccur.sum(axis=1))
    vals, vecs = np.linalg.eigh(cov)
    keep = vals > PINV_RTOL * vals.max()
    pinv = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T
    t = float(adjusted @ pinv @ adjusted)
    t = max(t, 0.0)
    df = int(keep.sum())
    return TestResult(statistic=t, p_value=chi2_sf(t, df), df=df)


# -- Wilcoxon signed-rank ----------------------------------------------------


def _exact_lower_tail(doubled_ranks: Sequence[int], w_doubled: int) -> float:
    """P(S <= w) where S sums a random sign-subset of the ranks."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    reach = 0
    for r in doubled_ranks:
        for s in range(reach, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
        reach += r
    return sum(counts[: w_doubled + 1]) / 2 ** len(doubled_ranks)


def wilcoxon_signed_rank(pairs: Iterable[tuple[float, float]], method: str = "auto",
                         zero_method: str = "wilcox") -> TestResult:
    """Two-sided paired test.

    ``zero_method="wilcox"`` drops zero differences before ranking;
    ``"pratt"`` ranks them with the rest and then discards their ranks.
    """
    if zero_method not in ("wilcox", "pratt"):
        raise ValueError(f"unknown zero_method {zero_method!r}")
    d = np.array([x - y for x, y in pairs], dtype=float)
    if zero_method == "wilcox":
        d = d[d != 0]
    ranks = rankdata(np.abs(d))
    keep = d != 0
    d, ranks = d[keep], ranks[keep]
    n = len(d)
    if n < 1:
        raise TooFewPairs("no non-zero differences")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if method == "exact":
        doubled = [int(round(2 * r)) for r in ranks]
        p = 2 * _exact_lower_tail(doubled, int(round(2 * w)))
    elif method == "normal":
        # null moments of a random-sign rank sum hold for any rank vector
        mean = float(ranks.sum()) / 2.0
        var = float((ranks ** 2).sum()) / 4.0
        z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var) if var > 0 else 0.0
        p = 2 * normal_sf(z)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TestResult(statistic=w, p_value=min(1.0, p), n_pairs=n)


def bonferroni(p_values: Sequence[float], m: Optional[int] = None) -> list[float]:
    m = len(p_values) if m is None else m
    if m < len(p_values):
        raise ValueError("m must cover every p-value")
    return [min(m * p, 1.0) for p in p_values]


# -- record-level helpers ----------------------------------------------------

Key = tuple[str, int]


def dimension_scores(records: Iterable[Mapping], dimension: str) -> dict[str, dict[Key, Optional[float]]]:
    """llm -> (sample_id, run_index) -> dimension score (None when invalid)."""
    group, name = DIMENSION_KEYS[dimension]
    out: dict[str, dict[Key, Optional[float]]] = {}
    for r in records:
        scores = r.get("scores")
        value = scores[group][name] if scores else None
        out.setdefault(r["llm"], {})[(r["sample_id"], int(r["run_index"]))] = value
    return out


def score_matrix(scores: Mapping[str, Mapping[Key, Optional[float]]], llms: Sequence[str]):
    keys = sorted({k for llm in llms for k, v in scores[llm].items() if v is not None})
    return keys, [[scores[llm].get(k) for llm in llms] for k in keys]


@dataclass(frozen=True)
class Contrast:
    better: str
    worse: str
    statistic: Optional[float]
    n_pairs: int
    p_value: float
    p_adj: float
    significant: bool


def pairwise_contrasts(scores: Mapping[str, Mapping[Key, Optional[float]]], alpha: float = 0.05,
                       zero_method: str = "wilcox") -> list[Contrast]:
    """Wilcoxon test for every pair of generators sharing at least one valid (sample, run)."""
    llms = sorted(scores)
    raw = []
    for a, b in combinations(llms, 2):
        common = sorted(k for k, v in scores[a].items()
                        if v is not None and scores[b].get(k) is not None)
        if not common:
            continue
        xs = [scores[a][k] for k in common]
        ys = [scores[b][k] for k in common]
        better, worse = (a, b) if math.fsum(xs) >= math.fsum(ys) else (b, a)
        try:
            res = wilcoxon_signed_rank(zip(xs, ys), zero_method=zero_method)
            raw.append((better, worse, res.statistic, len(common), res.p_value))
        except TooFewPairs:
            raw.append((better, worse, None, len(common), 1.0))
    adj = bonferroni([r[4] for r in raw], len(raw))
    rows = [Contrast(b, w, s, n, p, pa, pa <= alpha) for (b, w, s, n, p), pa in zip(raw, adj)]
    return sorted(rows, key=lambda c: (c.p_adj, c.better, c.worse))


CONTRAST_COLUMNS = ("better", "worse", "W", "n_pairs", "p", "p_adj", "result")


def _row(c: Contrast) -> list[str]:
    return [c.better, c.worse, "" if c.statistic is None else f"{c.statistic:g}", str(c.n_pairs),
            f"{c.p_value:.4g}", f"{c.p_adj:.4g}", "sig." if c.significant else "n.s."]


def contrasts_csv(rows: Sequence[Contrast]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CONTRAST_COLUMNS)
    w.writerows(_row(c) for c in rows)
    return buf.getvalue()


def contrasts_markdown(rows: Sequence[Contrast]) -> str:
    lines = ["| " + " | ".join(CONTRAST_COLUMNS) + " |", "|" + "---|" * len(CONTRAST_COLUMNS)]
    lines += ["| " + " | ".join(_row(c)) + " |" for c in rows]
    return "\n".join(lines) + "\n"
