"""Sixteen modeling-rule metrics and their mean, ``q_syn``.

Counting metrics are the conforming fraction of the elements a rule covers;
a rule that covers nothing scores 1.0.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graph import degrees, find_matching_join, gateway_roles
from .model import Kind, ProcessModel

METRIC_NAMES: dict[str, str] = {
    "S1": "Existence of a start event",
    "S2": "Existence of an end event",
    "S3": "One start event per process",
    "S4": "One end event per process",
    "S5": "Sequence-flow connection rules",
    "S6": "Message-flow connection rules",
    "S7": "Start event: in=0, out=1",
    "S8": "End event: in=1, out=0",
    "S9": "Split gateway has matching join gateway",
    "S10": "Exactly one process per pool",
    "S11": "Each observable task has a label",
    "S12": "Task: in=1, out=1",
    "S13": "Non-exception intermediate event: in=1, out=1",
    "S14": "Exception event: in=0, out=1",
    "S15": "Split gateway: in=1, out>1",
    "S16": "Join gateway: in>1, out=1",
}
METRIC_IDS = tuple(METRIC_NAMES)


def _fraction(hits: int, total: int) -> float:
    return 1.0 if total == 0 else hits / total


@dataclass(frozen=True)
class SyntacticScores:
    scores: dict[str, float]

    @property
    def q_syn(self) -> float:
        return sum(self.scores[k] for k in METRIC_IDS) / len(METRIC_IDS)

    def to_dict(self) -> dict[str, float]:
        return {**{k: self.scores[k] for k in METRIC_IDS}, "q_syn": self.q_syn}


def event_existence_metrics(model: ProcessModel) -> dict[str, float]:
    fos = model.flow_objects
    has_start = {fos[n].process_id for n in fos if fos[n].kind is Kind.START}
    has_end = {fos[n].process_id for n in fos if fos[n].kind is Kind.END}
    n_proc = len(model.processes)
    return {
        "S1": 1.0 if has_start else 0.0,
        "S2": 1.0 if has_end else 0.0,
        "S3": _fraction(len(has_start), n_proc),
        "S4": _fraction(len(has_end), n_proc),
    }


_SEQ_SOURCES = frozenset({Kind.START, Kind.INTERMEDIATE, Kind.TASK, Kind.SUBPROCESS,
                          Kind.XOR, Kind.AND, Kind.OR, Kind.EVENT_GATEWAY})
_SEQ_TARGETS = frozenset({Kind.END, Kind.INTERMEDIATE, Kind.TASK, Kind.SUBPROCESS,
                          Kind.XOR, Kind.AND, Kind.OR, Kind.EVENT_GATEWAY})


def flow_rule_metrics(model: ProcessModel) -> dict[str, float]:
    fos = model.flow_objects
    seq = model.sequence_flows
    ok_seq = sum(
        1 for f in seq
        if f.source in fos and fos[f.source].kind in _SEQ_SOURCES
        and f.target in fos and fos[f.target].kind in _SEQ_TARGETS
    )

    def msg_end_ok(ref: str, throwing: bool) -> bool:
        if ref in model.pool_ids:
            return True
        fo = fos[ref]
        if fo.kind.is_activity:
            return True
        if not fo.is_message:
            return False
        allowed = (Kind.END, Kind.INTERMEDIATE) if throwing else (Kind.START, Kind.INTERMEDIATE)
        return fo.kind in allowed

    msg = model.message_flows
    ok_msg = sum(1 for f in msg if msg_end_ok(f.source, True) and msg_end_ok(f.target, False))
    return {"S5": _fraction(ok_seq, len(seq)), "S6": _fraction(ok_msg, len(msg))}


def _degree_fraction(model: ProcessModel, nodes, want) -> float:
    hits = sum(1 for n in nodes if want(*degrees(model, n)))
    return _fraction(hits, len(nodes))


def degree_metrics(model: ProcessModel) -> dict[str, float]:
    ids = lambda kind: [fo.id for fo in model.of_kind(kind)]  # noqa: E731
    intermediates = model.of_kind(Kind.INTERMEDIATE)
    plain = [fo.id for fo in intermediates if fo.attached_to is None]
    attached = [fo.id for fo in intermediates if fo.attached_to is not None]
    roles = gateway_roles(model)
    split_ids = [r.gateway_id for r in roles if r.is_split]
    join_ids = [r.gateway_id for r in roles if r.is_join]
    return {
        "S7": _degree_fraction(model, ids(Kind.START), lambda i, o: i == 0 and o == 1),
        "S8": _degree_fraction(model, ids(Kind.END), lambda i, o: i == 1 and o == 0),
        "S12": _degree_fraction(model, ids(Kind.TASK), lambda i, o: i == 1 and o == 1),
        "S13": _degree_fraction(model, plain, lambda i, o: i == 1 and o == 1),
        "S14": _degree_fraction(model, attached, lambda i, o: i == 0 and o == 1),
        "S15": _degree_fraction(model, split_ids, lambda i, o: i == 1 and o > 1),
        "S16": _degree_fraction(model, join_ids, lambda i, o: i > 1 and o == 1),
    }


def gateway_matching_metric(model: ProcessModel) -> dict[str, float]:
    split_ids = [r.gateway_id for r in gateway_roles(model) if r.is_split]
    matched = sum(1 for g in split_ids if find_matching_join(model, g) is not None)
    return {"S9": _fraction(matched, len(split_ids))}


def pool_and_label_metrics(model: ProcessModel) -> dict[str, float]:
    single = sum(1 for p in model.pools if len(p.process_ids) == 1)
    tasks = model.of_kind(Kind.TASK)
    labelled = sum(1 for t in tasks if t.has_label)
    return {"S10": _fraction(single, len(model.pools)), "S11": _fraction(labelled, len(tasks))}


def syntactic_dimension(model: ProcessModel) -> SyntacticScores:
    scores: dict[str, float] = {}
    scores.update(event_existence_metrics(model))
    scores.update(flow_rule_metrics(model))
    scores.update(degree_metrics(model))
    scores.update(gateway_matching_metric(model))
    scores.update(pool_and_label_metrics(model))
    return SyntacticScores({k: scores[k] for k in METRIC_IDS})
