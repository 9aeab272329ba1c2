"""Aggregation of dimension scores, per record and per generator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

DEFAULT_RUNS = 5
DEFAULT_MIN_AVBM = 30.0


class WrongRunCount(ValueError):
    pass


def q_qual(q_syn: float, q_prag: float, q_sem: float) -> float:
    return (q_syn + q_prag + q_sem) / 3


def q_total(q_syn: float, q_prag: float, q_sem: float, q_val: float) -> float:
    return (q_syn + q_prag + q_sem + q_val) / 4


def avbm(valid_counts_per_run: Sequence[int], runs: int = DEFAULT_RUNS) -> float:
    """Average number of valid models per run."""
    if len(valid_counts_per_run) != runs:
        raise WrongRunCount(f"expected {runs} per-run counts, got {len(valid_counts_per_run)}")
    return math.fsum(valid_counts_per_run) / runs


@dataclass(frozen=True)
class SampleEvaluation:
    q_val: float
    q_syn: Optional[float] = None
    q_prag: Optional[float] = None
    q_sem: Optional[float] = None

    def __post_init__(self):
        present = [x is not None for x in (self.q_syn, self.q_prag, self.q_sem)]
        if self.q_val not in (0.0, 1.0):
            raise ValueError(f"q_val must be 0 or 1, got {self.q_val}")
        if self.q_val == 0 and any(present):
            raise ValueError("invalid models carry no quality scores")
        if self.q_val == 1 and not all(present):
            raise ValueError("valid models need all three quality scores")

    @property
    def q_qual(self) -> Optional[float]:
        if self.q_val == 0:
            return None
        return q_qual(self.q_syn, self.q_prag, self.q_sem)

    @property
    def q_total(self) -> Optional[float]:
        if self.q_val == 0:
            return None
        return q_total(self.q_syn, self.q_prag, self.q_sem, self.q_val)


@dataclass(frozen=True)
class MeanScores:
    n_attempts: int
    n_valid: int
    q_val: float
    avbm: Optional[float]
    q_syn: Optional[float]
    q_prag: Optional[float]
    q_sem: Optional[float]
    q_qual: Optional[float]
    q_total: Optional[float]
    excluded: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean(xs: list[float]) -> Optional[float]:
    return math.fsum(xs) / len(xs) if xs else None


def mean_scores(
    evaluations: Iterable[SampleEvaluation],
    valid_counts_per_run: Optional[Sequence[int]] = None,
    runs: int = DEFAULT_RUNS,
    min_avbm: float = DEFAULT_MIN_AVBM,
) -> MeanScores:
    """Means for one generator.

    Validity is averaged over every attempt, the quality dimensions over
    valid attempts only. The qualitative and total means combine the
    dimension means, so a row of the result table is self-consistent.
    """
    evs = list(evaluations)
    valid = [e for e in evs if e.q_val == 1]
    q_val = _mean([e.q_val for e in evs]) or 0.0
    syn = _mean([e.q_syn for e in valid])
    prag = _mean([e.q_prag for e in valid])
    sem = _mean([e.q_sem for e in valid])
    a = avbm(valid_counts_per_run, runs) if valid_counts_per_run is not None else None
    qq = q_qual(syn, prag, sem) if valid else None
    qt = q_total(syn, prag, sem, q_val) if valid else None
    return MeanScores(
        n_attempts=len(evs), n_valid=len(valid), q_val=q_val, avbm=a,
        q_syn=syn, q_prag=prag, q_sem=sem, q_qual=qq, q_total=qt,
        excluded=a is not None and a < min_avbm,
    )
