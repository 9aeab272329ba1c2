"""Random BPMN documents and small brute-force oracles shared by the tests."""
from __future__ import annotations

import itertools
import random
from pathlib import Path
from xml.sax.saxutils import quoteattr

from bpmnbench.model import FlowKind, Kind, ProcessModel
from bpmnbench.parser import parse_model

FIXTURES = Path(__file__).parent / "fixtures"

NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

KIND_TAGS = {
    Kind.START: "startEvent",
    Kind.END: "endEvent",
    Kind.INTERMEDIATE: "intermediateThrowEvent",
    Kind.TASK: "task",
    Kind.SUBPROCESS: "subProcess",
    Kind.XOR: "exclusiveGateway",
    Kind.AND: "parallelGateway",
    Kind.OR: "inclusiveGateway",
    Kind.EVENT_GATEWAY: "eventBasedGateway",
}

VOCAB = [
    "check order", "send invoice", "ship goods", "approve request", "reject request",
    "receive payment", "notify customer", "archive order", "check stock", "prepare offer",
]


def load_fixture(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def fixture_model(name: str) -> ProcessModel:
    return parse_model(load_fixture(name))


def to_xml(model: ProcessModel) -> str:
    """Serialise a model built by :func:`random_model` back into BPMN XML."""
    out = [f'<?xml version="1.0" encoding="UTF-8"?>\n<definitions xmlns="{NS}" id="defs" '
           'targetNamespace="http://example.org/bpmn">']
    if model.pools or model.message_flows:
        out.append('  <collaboration id="collab">')
        for p in model.pools:
            attrs = f' id="{p.id}"'
            if p.label:
                attrs += f" name={quoteattr(p.label)}"
            if p.process_ids:
                attrs += f' processRef="{p.process_ids[0]}"'
            out.append(f"    <participant{attrs}/>")
        for f in model.message_flows:
            out.append(f'    <messageFlow id="{f.id}" sourceRef="{f.source}" targetRef="{f.target}"/>')
        out.append("  </collaboration>")
    fos = model.flow_objects
    for pid in sorted(model.processes):
        out.append(f'  <process id="{pid}" isExecutable="false">')
        for nid in sorted(model.processes[pid]):
            fo = fos[nid]
            tag = KIND_TAGS[fo.kind]
            attrs = f' id="{fo.id}"'
            if fo.label is not None:
                attrs += f" name={quoteattr(fo.label)}"
            if fo.attached_to is not None:
                tag = "boundaryEvent"
                attrs += f' attachedToRef="{fo.attached_to}"'
            if fo.is_message:
                out.append(f"    <{tag}{attrs}><messageEventDefinition/></{tag}>")
            else:
                out.append(f"    <{tag}{attrs}/>")
        for f in model.sequence_flows:
            owner = fos[f.source].process_id if f.source in fos else fos[f.target].process_id
            if owner == pid:
                out.append(f'    <sequenceFlow id="{f.id}" sourceRef="{f.source}" targetRef="{f.target}"/>')
        out.append("  </process>")
    out.append("</definitions>\n")
    return "\n".join(out)


def random_xml(rng: random.Random, n_min: int = 3, n_max: int = 12, extras: bool = True) -> str:
    """A schema-valid document with ``n_min``..``n_max`` flow objects.

    Node kinds, labels (duplicates and blanks included) and sequence flows
    are random; with ``extras`` it may also add a second process, pools,
    message flows and boundary events.
    """
    from bpmnbench.model import Flow, FlowObject, Pool

    n = rng.randint(n_min, n_max)
    kinds = [Kind.START] + [
        rng.choices(
            [Kind.TASK, Kind.XOR, Kind.AND, Kind.OR, Kind.EVENT_GATEWAY, Kind.INTERMEDIATE,
             Kind.SUBPROCESS, Kind.START, Kind.END],
            weights=[30, 12, 10, 5, 2, 8, 4, 5, 12],
        )[0]
        for _ in range(n - 2)
    ] + [Kind.END]
    two_procs = extras and n >= 6 and rng.random() < 0.25
    split = rng.randint(3, n - 2) if two_procs else n
    fos = []
    for i, k in enumerate(kinds):
        if k.is_gateway:
            label = rng.choice([None, None, None, "ok?"])
        else:
            label = rng.choice(VOCAB + [None, "", VOCAB[0], VOCAB[1]])
        pid = "p1" if i < split else "p2"
        fos.append(FlowObject(f"n{i}", k, pid, label or None,
                              is_message=k.is_event and k is not Kind.END and rng.random() < 0.1))
    ids = [fo.id for fo in fos]
    flows = []
    fid = itertools.count(1)
    for i in range(1, n):
        lo = 0 if i < split else split
        if i == lo:
            continue
        if rng.random() < 0.9:
            src = rng.randrange(lo, i)
            flows.append(Flow(f"f{next(fid)}", ids[src], ids[i]))
    for _ in range(rng.randint(0, n // 2)):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b and (a < split) == (b < split):
            flows.append(Flow(f"f{next(fid)}", ids[a], ids[b]))
    pools = []
    if extras and (two_procs or rng.random() < 0.2):
        pools.append(Pool("pool1", rng.choice(["shop", None]), process_ids=("p1",)))
        if two_procs:
            pools.append(Pool("pool2", "customer", process_ids=("p2",)))
        elif rng.random() < 0.5:
            pools.append(Pool("pool2", "supplier"))
        for _ in range(rng.randint(0, 2)):
            a = rng.choice(ids + [p.id for p in pools])
            b = rng.choice(ids + [p.id for p in pools])
            if a != b:
                flows.append(Flow(f"m{next(fid)}", a, b, FlowKind.MESSAGE))
    if extras and rng.random() < 0.15:
        acts = [fo for fo in fos if fo.kind.is_activity]
        if acts:
            host = rng.choice(acts)
            fos.append(FlowObject("b1", Kind.INTERMEDIATE, host.process_id, None, attached_to=host.id))
            if rng.random() < 0.7:
                tgt = rng.choice([fo.id for fo in fos if fo.process_id == host.process_id and fo.id != "b1"])
                flows.append(Flow(f"f{next(fid)}", "b1", tgt))
    return to_xml(ProcessModel.build(fos, flows, pools))


def random_model(rng: random.Random, n_min: int = 3, n_max: int = 12, extras: bool = True) -> ProcessModel:
    return parse_model(random_xml(rng, n_min, n_max, extras))


# -- brute-force oracles -------------------------------------------------------


def simple_paths(succ: dict, src: str, dst: str):
    stack = [(src, [src])]
    while stack:
        node, path = stack.pop()
        if node == dst:
            yield path
            continue
        for nxt in succ.get(node, ()):
            if nxt not in path:
                stack.append((nxt, path + [nxt]))


def components(nodes: set, edges) -> int:
    adj = {n: set() for n in nodes}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen, count = set(), 0
    for n in nodes:
        if n in seen:
            continue
        count += 1
        stack = [n]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(adj[u] - seen)
    return count


def cut_vertices_by_removal(nodes, edges) -> set:
    nodes = set(nodes)
    base = components(nodes, edges)
    return {v for v in nodes if components(nodes - {v}, [e for e in edges if v not in e]) > base}


def best_assignment_total(matrix, cutoff: float = 0.0) -> float:
    """Exhaustive search over every partial one-to-one assignment."""
    import math

    rows, cols = len(matrix), len(matrix[0]) if matrix else 0
    best = 0.0
    if rows <= cols:
        for perm in itertools.permutations(range(cols), rows):
            vals = [matrix[i][perm[i]] for i in range(rows)]
            best = max(best, math.fsum(v for v in vals if v >= cutoff and v > 0))
    else:
        for perm in itertools.permutations(range(rows), cols):
            vals = [matrix[perm[j]][j] for j in range(cols)]
            best = max(best, math.fsum(v for v in vals if v >= cutoff and v > 0))
    return best


def average_ranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for t in range(i, j + 1):
            ranks[order[t]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def friedman_statistic(matrix) -> float:
    """Textbook Friedman chi-square without tie correction."""
    b, k = len(matrix), len(matrix[0])
    sums = [0.0] * k
    for row in matrix:
        for j, r in enumerate(average_ranks(row)):
            sums[j] += r
    return 12.0 / (b * k * (k + 1)) * sum(s * s for s in sums) - 3.0 * b * (k + 1)


def wilcoxon_enumerated_p(diffs, pratt: bool = False) -> float:
    """Two-sided p by listing all 2^n sign patterns."""
    if pratt:
        all_ranks = average_ranks([abs(x) for x in diffs])
        pairs = [(r, x) for r, x in zip(all_ranks, diffs) if x != 0]
        ranks, d = [r for r, _ in pairs], [x for _, x in pairs]
    else:
        d = [x for x in diffs if x != 0]
        ranks = average_ranks([abs(x) for x in d])
    w_plus = sum(r for r, x in zip(ranks, d) if x > 0)
    w = min(w_plus, sum(ranks) - w_plus)
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        s = sum(r for r, on in zip(ranks, signs) if on)
        if s <= w + 1e-9:
            hits += 1
    return min(1.0, 2 * hits / 2 ** len(d))
