"""Understandability metrics graded into five groups by four thresholds."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .graph import acyclic_successors, articulation_points, diameter_nodes, gateway_roles, topological_order
from .model import Kind, ProcessModel

METRIC_NAMES: dict[str, str] = {
    "P1": "TNN",
    "P2": "TNG",
    "P3": "TNSF",
    "P4": "TNMF",
    "P5": "Diameter",
    "P6": "Density",
    "P7": "AGD",
    "P8": "CNC",
    "P9": "GH",
    "P10": "CFC",
    "P11": "CC",
    "P12": "Sequentiality",
    "P13": "Separability",
    "P14": "Depth",
    "P15": "TS",
}
METRIC_IDS = tuple(METRIC_NAMES)
RAW_METRICS = frozenset({"P12"})


class Direction(str, enum.Enum):
    LOWER_IS_BETTER = "LowerIsBetter"
    HIGHER_IS_BETTER = "HigherIsBetter"


class UnknownMetric(KeyError):
    pass


class ThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class Thresholds:
    t: tuple[float, float, float, float]
    direction: Direction

    def __post_init__(self):
        t = self.t
        ok = all(a < b for a, b in zip(t, t[1:])) if self.direction is Direction.LOWER_IS_BETTER \
            else all(a > b for a, b in zip(t, t[1:]))
        if not ok:
            raise ThresholdError(f"thresholds {t} are not strictly monotone for {self.direction.value}")

    def grade(self, x: float) -> float:
        t1, t2, t3, t4 = self.t
        if self.direction is Direction.LOWER_IS_BETTER:
            if x < t1:
                return 1.0
            if x < t2:
                return 0.75
            if x < t3:
                return 0.5
            if x < t4:
                return 0.25
            return 0.0
        if x >= t1:
            return 1.0
        if x >= t2:
            return 0.75
        if x >= t3:
            return 0.5
        if x >= t4:
            return 0.25
        return 0.0


class ThresholdTable(dict):
    """metric id -> :class:`Thresholds`."""

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "ThresholdTable":
        if path is None:
            text = (resources.files("bpmnbench") / "data" / "thresholds.tsv").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        table = cls()
        for row in csv.DictReader(lines, delimiter="\t"):
            try:
                t = tuple(float(row[k]) for k in ("t1", "t2", "t3", "t4"))
                direction = Direction(row["direction"].strip())
            except (KeyError, ValueError, TypeError) as exc:
                raise ThresholdError(f"bad threshold row {row!r}: {exc}") from exc
            table[row["id"].strip()] = Thresholds(t, direction)  # type: ignore[arg-type]
        return table


_DEFAULT: Optional[ThresholdTable] = None


def default_thresholds() -> ThresholdTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ThresholdTable.load()
    return _DEFAULT


def normalize(x: float, metric_id: str, table: Optional[ThresholdTable] = None) -> float:
    table = default_thresholds() if table is None else table
    try:
        th = table[metric_id]
    except KeyError:
        raise UnknownMetric(metric_id) from None
    return th.grade(x)


# -- raw metrics ------------------------------------------------------------


def size_metrics(model: ProcessModel) -> dict[str, float]:
    return {
        "P1": len(model.flow_objects),
        "P2": len(model.gateways),
        "P3": len(model.sequence_flows),
        "P4": len(model.message_flows),
        "P5": diameter_nodes(model),
    }


def density_metrics(model: ProcessModel) -> dict[str, Optional[float]]:
    n = len(model.flow_objects)
    n_seq = len(model.sequence_flows)
    gws = model.gateways
    agd = None
    if gws:
        agd = sum(len(model.predecessors[g.id]) + len(model.successors[g.id]) for g in gws) / len(gws)
    return {
        "P6": n_seq / (n * (n - 1)) if n >= 2 else None,
        "P7": agd,
        "P8": n_seq / n if n else None,
    }


def gateway_heterogeneity(model: ProcessModel) -> Optional[float]:
    gws = model.gateways
    if not gws:
        return None
    h = 0.0
    for kind in (Kind.AND, Kind.XOR, Kind.OR):
        p = sum(1 for g in gws if g.kind is kind) / len(gws)
        if p > 0:
            h -= p * math.log(p, 3)
    return h + 0.0


def control_flow_complexity(model: ProcessModel) -> int:
    total = 0
    for r in gateway_roles(model):
        if not r.is_split:
            continue
        kind = model.flow_objects[r.gateway_id].kind
        out = len(model.successors[r.gateway_id])
        if kind is Kind.AND:
            total += 1
        elif kind is Kind.XOR:
            total += out
        elif kind is Kind.OR:
            total += 2 ** out - 1
    return total


def node_weight(model: ProcessModel, node_id: str) -> float:
    """Connector weight used by cross-connectivity; 1 for tasks and events."""
    kind = model.flow_objects[node_id].kind
    if not kind.is_gateway or kind is Kind.AND:
        return 1.0
    d = max(1, len(model.predecessors[node_id]) + len(model.successors[node_id]))
    if kind is Kind.OR:
        c = 2 ** d - 1
        return 1.0 / c + ((c - 1) / c) * (1.0 / d)
    return 1.0 / d


def connection_values(model: ProcessModel) -> tuple[list[str], np.ndarray]:
    """Strongest-path values V[a, b] by max-product closure over arc weights."""
    nodes = sorted(model.flow_objects)
    idx = {n: i for i, n in enumerate(nodes)}
    w = np.array([node_weight(model, n) for n in nodes])
    v = np.zeros((len(nodes), len(nodes)))
    for f in model.node_flows:
        a, b = idx[f.source], idx[f.target]
        v[a, b] = max(v[a, b], w[a] * w[b])
    for k in range(len(nodes)):
        v = np.maximum(v, np.outer(v[:, k], v[k, :]))
    return nodes, v


def cross_connectivity(model: ProcessModel) -> Optional[float]:
    n = len(model.flow_objects)
    if n < 2:
        return None
    _, v = connection_values(model)
    return float((v.sum() - np.trace(v)) / (n * (n - 1)))


def connector_metrics(model: ProcessModel) -> dict[str, Optional[float]]:
    return {
        "P9": gateway_heterogeneity(model),
        "P10": control_flow_complexity(model),
        "P11": cross_connectivity(model),
    }


def sequentiality(model: ProcessModel) -> float:
    seq = model.sequence_flows
    if not seq:
        return 1.0
    gw = {g.id for g in model.gateways}
    return sum(1 for f in seq if f.source not in gw and f.target not in gw) / len(seq)


def cut_vertices(model: ProcessModel) -> set[str]:
    return articulation_points(
        sorted(model.flow_objects), [(f.source, f.target) for f in model.node_flows]
    )


def separability(model: ProcessModel) -> Optional[float]:
    n = len(model.flow_objects)
    if n <= 2:
        return None
    return len(cut_vertices(model)) / (n - 2)


def nesting_depth(model: ProcessModel) -> int:
    """Deepest split/join nesting over all nodes, after cycle breaking."""
    dag = acyclic_successors(model)
    order = topological_order(dag)
    pred: dict[str, list[str]] = {n: [] for n in dag}
    for u, vs in dag.items():
        for v in vs:
            pred[v].append(u)
    step: dict[str, int] = {}
    for g in model.gateways:
        n_in, n_out = len(model.predecessors[g.id]), len(model.successors[g.id])
        step[g.id] = (n_out > 1) - (n_in > 1)  # +1 split, -1 join, 0 both/neither

    depth_in: dict[str, int] = {fo.id: 0 for fo in model.of_kind(Kind.START)}
    for u in order:
        if u not in depth_in:
            continue
        for v in dag[u]:
            cand = depth_in[u] + step.get(u, 0)
            if v not in depth_in or cand > depth_in[v]:
                depth_in[v] = cand
    depth_out: dict[str, int] = {fo.id: 0 for fo in model.of_kind(Kind.END)}
    for v in reversed(order):
        if v not in depth_out:
            continue
        for u in pred[v]:
            cand = depth_out[v] - step.get(v, 0)
            if u not in depth_out or cand > depth_out[u]:
                depth_out[u] = cand
    best = 0
    for n in dag:
        if n in depth_in and n in depth_out:
            best = max(best, min(depth_in[n], depth_out[n]))
    return best


def partitionability_metrics(model: ProcessModel) -> dict[str, Optional[float]]:
    return {
        "P12": sequentiality(model),
        "P13": separability(model),
        "P14": nesting_depth(model),
    }


def concurrency_metric(model: ProcessModel) -> dict[str, int]:
    ts = 0
    for r in gateway_roles(model):
        if r.is_split and model.flow_objects[r.gateway_id].kind in (Kind.AND, Kind.OR):
            ts += max(0, len(model.successors[r.gateway_id]) - 1)
    return {"P15": ts}


@dataclass(frozen=True)
class PragmaticScores:
    raw: dict[str, Optional[float]]
    normalized: dict[str, float]

    @property
    def q_prag(self) -> float:
        return sum(self.normalized[k] for k in METRIC_IDS) / len(METRIC_IDS)

    def to_dict(self) -> dict[str, float]:
        return {**{k: self.normalized[k] for k in METRIC_IDS}, "q_prag": self.q_prag}


def pragmatic_dimension(model: ProcessModel, thresholds: Optional[ThresholdTable] = None) -> PragmaticScores:
    table = default_thresholds() if thresholds is None else thresholds
    raw: dict[str, Optional[float]] = {}
    raw.update(size_metrics(model))
    raw.update(density_metrics(model))
    raw.update(connector_metrics(model))
    raw.update(partitionability_metrics(model))
    raw.update(concurrency_metric(model))
    normalized: dict[str, float] = {}
    for k in METRIC_IDS:
        x = raw[k]
        if k in RAW_METRICS:
            normalized[k] = float(x)
        elif x is None:
            # nothing to measure: no gateways, or too few nodes for a ratio
            normalized[k] = 1.0
        else:
            normalized[k] = normalize(x, k, table)
    return PragmaticScores({k: raw[k] for k in METRIC_IDS}, normalized)
