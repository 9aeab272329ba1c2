"""Maximum-weight one-to-one matching between two node lists."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

# tie-break weights stay below any realistic gap between distinct similarity totals
_TIE_SCALE = 1e-7
# keeps equal-total matchings from differing in size between orientations
_PAIR_BONUS = 1e-10


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[str, str], ...]
    sims: tuple[float, ...]

    @property
    def score(self) -> float:
        return math.fsum(self.sims)

    def forward(self) -> dict[str, str]:
        return dict(self.pairs)

    def backward(self) -> dict[str, str]:
        return {b: a for a, b in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)


EMPTY = Matching((), ())


def assign(weights: np.ndarray) -> list[tuple[int, int]]:
    """Row/column pairs of a maximum-weight assignment; zero-weight pairs dropped."""
    if weights.size == 0:
        return []
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return [(int(r), int(c)) for r, c in zip(rows, cols) if weights[r, c] > 0]


def optimal_matching(
    left: Sequence[str],
    right: Sequence[str],
    sim: Callable[[str, str], float],
    cutoff: float = 0.0,
    tiebreak: Optional[Callable[[str, str], float]] = None,
) -> Matching:
    """Best one-to-one pairing of ``left`` with ``right`` under ``sim``.

    Pairs scoring below ``cutoff`` or exactly 0 are never matched. The optional
    ``tiebreak`` (values in [0, 1]) only decides between matchings whose total
    similarity is equal.
    """
    left, right = list(left), list(right)
    if not left or not right:
        return EMPTY
    s = np.zeros((len(left), len(right)))
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            v = sim(a, b)
            if v >= cutoff and v > 0:
                s[i, j] = v
    w = s.copy()
    eligible = s > 0
    w[eligible] += _PAIR_BONUS
    if tiebreak is not None:
        eps = _TIE_SCALE / (min(len(left), len(right)) + 1)
        for i, a in enumerate(left):
            for j, b in enumerate(right):
                if eligible[i, j]:
                    w[i, j] += eps * tiebreak(a, b)
    picked = sorted(assign(w))
    return Matching(
        tuple((left[i], right[j]) for i, j in picked),
        tuple(float(s[i, j]) for i, j in picked),
    )


def matching_total(matrix: np.ndarray, cutoff: float = 0.0) -> float:
    """Optimal total for a raw similarity matrix."""
    s = np.where((matrix >= cutoff) & (matrix > 0), matrix, 0.0)
    return math.fsum(float(s[i, j]) for i, j in assign(s))
