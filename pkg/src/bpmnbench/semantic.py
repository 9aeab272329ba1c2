"""Similarity of a candidate model to a ground-truth model.

Seven scores in [0, 1]:

* SEM1-SEM3 label similarity (edit distance, word bags with synonyms,
  neighbourhood context), each from its own optimal node matching
* SEM4 graph-edit similarity, SEM5 common nodes and edges
* SEM6 causal-closure overlap, SEM7 direct-dependency overlap

Label similarity only ever pairs non-gateway nodes. Structural and
behavioural scores additionally need to know which gateway and which pool of
one model stands for which of the other; gateways are paired by the overlap of
their (already matched) neighbourhoods, pools by label.

Everything is computed with the two models in a canonical order, so every
score is exactly symmetric in its arguments.
"""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

from .graph import acyclic_successors, reachability
from .matching import Matching, optimal_matching
from .model import FlowKind, Kind, ProcessModel
from .text import SynonymLexicon, Tokenizer, label_sim_semantic, label_sim_syntactic

METRIC_NAMES: dict[str, str] = {
    "SEM1": "Syntactic label similarity",
    "SEM2": "Semantic label similarity",
    "SEM3": "Context similarity",
    "SEM4": "Graph-edit similarity",
    "SEM5": "Common nodes and edges",
    "SEM6": "Causal-footprint overlap",
    "SEM7": "Dependency-graph overlap",
}
METRIC_IDS = tuple(METRIC_NAMES)

_UNMATCHED = "\x00unmatched:"


@dataclass(frozen=True)
class SemanticConfig:
    w_i: float = 1.0
    w_s: float = 0.75
    tau_syntactic: float = 0.0
    tau_semantic: float = 0.0
    tau_context_match: float = 0.0
    tau_ctx: float = 0.75
    tau_ged: float = 0.5
    tau_match: float = 0.75
    tau_gateway: float = 0.5
    lexicon: SynonymLexicon = field(default_factory=SynonymLexicon.load)
    tokenizer: Tokenizer = field(default_factory=Tokenizer)


_DEFAULT_CONFIG: Optional[SemanticConfig] = None


def default_config() -> SemanticConfig:
    global _DEFAULT_CONFIG
    if _DEFAULT_CONFIG is None:
        _DEFAULT_CONFIG = SemanticConfig()
    return _DEFAULT_CONFIG


@dataclass(frozen=True)
class SemanticScores:
    scores: dict[str, float]

    @property
    def q_sem(self) -> float:
        return sum(self.scores[k] for k in METRIC_IDS) / len(METRIC_IDS)

    def to_dict(self) -> dict[str, float]:
        return {**{k: self.scores[k] for k in METRIC_IDS}, "q_sem": self.q_sem}


# -- per-model views ---------------------------------------------------------


def _digest(*parts) -> str:
    return hashlib.sha1(repr(parts).encode("utf-8")).hexdigest()


class ModelView:
    """Derived data about one model that the similarity scores share."""

    ROUNDS = 4

    def __init__(self, model: ProcessModel, tokenizer: Tokenizer):
        self.model = model
        self.tokenizer = tokenizer

    @cached_property
    def labels(self) -> dict[str, str]:
        m = self.model
        out = {n: m.flow_objects[n].label or "" for n in m.flow_objects}
        out.update({p.id: p.label or "" for p in m.pools})
        return out

    @cached_property
    def bags(self) -> dict[str, frozenset[str]]:
        return {n: self.tokenizer.bag(self.labels[n]) for n in self.model.flow_objects}

    @cached_property
    def gateway_ids(self) -> list[str]:
        return [g.id for g in self.model.gateways]

    @cached_property
    def node_ids(self) -> list[str]:
        return [fo.id for fo in self.model.non_gateways]

    @cached_property
    def pool_ids(self) -> list[str]:
        return sorted(p.id for p in self.model.pools)

    def _context(self, start: str, step: dict[str, tuple[str, ...]]) -> frozenset[str]:
        fos = self.model.flow_objects
        seen, found = {start}, set()
        stack = list(step[start])
        while stack:
            n = stack.pop()
            if fos[n].kind.is_gateway:
                if n not in seen:
                    seen.add(n)
                    stack.extend(step[n])
            else:
                found.add(n)
        return frozenset(found)

    @cached_property
    def in_context(self) -> dict[str, frozenset[str]]:
        """Non-gateway nodes reaching each node through gateways only."""
        return {n: self._context(n, self.model.predecessors) for n in self.model.flow_objects}

    @cached_property
    def out_context(self) -> dict[str, frozenset[str]]:
        return {n: self._context(n, self.model.successors) for n in self.model.flow_objects}

    @cached_property
    def dependencies(self) -> frozenset[tuple[str, str]]:
        return frozenset((a, b) for a in self.node_ids for b in self.out_context[a])

    @cached_property
    def causal_closure(self) -> frozenset[tuple[str, str]]:
        reach = reachability(acyclic_successors(self.model))
        fos = self.model.flow_objects
        return frozenset(
            (a, b) for a in self.node_ids for b in reach[a]
            if b != a and not fos[b].kind.is_gateway
        )

    @cached_property
    def flows(self) -> Counter:
        return Counter((f.source, f.target, f.kind) for f in self.model.flows)

    @cached_property
    def colours(self) -> dict[str, tuple[str, ...]]:
        """Iterated neighbourhood colours over flow objects and pools.

        Colours are content hashes, so they are comparable across models;
        nodes of two identical models in corresponding positions agree on
        every round.
        """
        m = self.model
        base: dict[str, str] = {}
        for fo in m.flow_objects.values():
            base[fo.id] = _digest("fo", fo.kind.value, fo.label or "", fo.is_message, fo.attached_to is not None)
        for p in m.pools:
            base[p.id] = _digest("pool", p.label or "")
        nbr_in: dict[str, list] = {n: [] for n in base}
        nbr_out: dict[str, list] = {n: [] for n in base}
        for f in m.flows:
            nbr_out[f.source].append((f.kind.value, f.target))
            nbr_in[f.target].append((f.kind.value, f.source))
        for fo in m.flow_objects.values():
            if fo.attached_to is not None:
                nbr_in[fo.id].append(("attached", fo.attached_to))
                nbr_out[fo.attached_to].append(("boundary", fo.id))
        for p in m.pools:
            for pid in p.process_ids:
                for n in sorted(m.processes.get(pid, ())):
                    nbr_out[p.id].append(("contains", n))
                    nbr_in[n].append(("contained", p.id))
        history = {n: [c] for n, c in base.items()}
        cur = base
        for _ in range(self.ROUNDS):
            cur = {
                n: _digest(cur[n],
                           sorted((k, cur[x]) for k, x in nbr_in[n]),
                           sorted((k, cur[x]) for k, x in nbr_out[n]))
                for n in cur
            }
            for n, c in cur.items():
                history[n].append(c)
        return {n: tuple(h) for n, h in history.items()}

    @cached_property
    def key(self) -> str:
        m = self.model
        return _digest(
            sorted((fo.id, fo.kind.value, fo.label or "", fo.process_id, fo.is_message, fo.attached_to or "")
                   for fo in m.flow_objects.values()),
            sorted((f.id, f.source, f.target, f.kind.value) for f in m.flows),
            sorted((p.id, p.label or "", p.process_ids) for p in m.pools),
        )


def _colour_agreement(a: tuple[str, ...], b: tuple[str, ...]) -> float:
    same = 0
    for x, y in zip(a, b):
        if x != y:
            break
        same += 1
    return same / len(a)


def _tiebreak(vc: ModelView, vg: ModelView) -> Callable[[str, str], float]:
    cc, cg = vc.colours, vg.colours
    return lambda a, b: _colour_agreement(cc[a], cg[b])


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


# -- label similarity --------------------------------------------------------


def node_context_sim(vc: ModelView, vg: ModelView, nc: str, ng: str, tau_ctx: float = 0.75) -> float:
    """Share of neighbours on each side that pair up by label similarity."""

    def side(xs: frozenset[str], ys: frozenset[str]) -> float:
        if not xs and not ys:
            return 0.5
        if not xs or not ys:
            return 0.0
        m = optimal_matching(
            sorted(xs), sorted(ys),
            lambda a, b: label_sim_syntactic(vc.labels[a], vg.labels[b]), tau_ctx,
        )
        return len(m) / (2 * math.sqrt(len(xs) * len(ys)))

    return side(vc.in_context[nc], vg.in_context[ng]) + side(vc.out_context[nc], vg.out_context[ng])


def _whole_graph(vc: ModelView, vg: ModelView, m: Matching) -> float:
    total = len(vc.node_ids) + len(vg.node_ids)
    if total == 0:
        return 1.0
    return min(1.0, 2 * m.score / total)


def whole_graph_label_scores(vc: ModelView, vg: ModelView, cfg: SemanticConfig) -> dict[str, float]:
    tb = _tiebreak(vc, vg)
    syn = optimal_matching(
        vc.node_ids, vg.node_ids,
        lambda a, b: label_sim_syntactic(vc.labels[a], vg.labels[b]), cfg.tau_syntactic, tb)
    sem = optimal_matching(
        vc.node_ids, vg.node_ids,
        lambda a, b: label_sim_semantic(vc.bags[a], vg.bags[b], cfg.lexicon, cfg.w_i, cfg.w_s),
        cfg.tau_semantic, tb)
    ctx = optimal_matching(
        vc.node_ids, vg.node_ids,
        lambda a, b: node_context_sim(vc, vg, a, b, cfg.tau_ctx), cfg.tau_context_match, tb)
    return {"SEM1": _whole_graph(vc, vg, syn), "SEM2": _whole_graph(vc, vg, sem), "SEM3": _whole_graph(vc, vg, ctx)}


# -- correspondence ----------------------------------------------------------


@dataclass(frozen=True)
class Correspondence:
    """Which element of the candidate stands for which of the truth model."""

    nodes: Matching
    gateways: Matching
    pools: Matching

    @cached_property
    def forward(self) -> dict[str, str]:
        out = self.nodes.forward()
        out.update(self.gateways.forward())
        out.update(self.pools.forward())
        return out

    @property
    def flow_object_pairs(self) -> int:
        return len(self.nodes) + len(self.gateways)


def _compatible(a: Kind, b: Kind) -> bool:
    return a is b or (a.is_activity and b.is_activity)


def correspondence(vc: ModelView, vg: ModelView, node_sim: Callable[[str, str], float],
                   cutoff: float, cfg: SemanticConfig) -> Correspondence:
    tb = _tiebreak(vc, vg)
    nodes = optimal_matching(vc.node_ids, vg.node_ids, node_sim, cutoff, tb)
    fwd = nodes.forward()

    def mapped(xs: frozenset[str]) -> frozenset[str]:
        return frozenset(fwd.get(x, _UNMATCHED + x) for x in xs)

    fc, fg = vc.model.flow_objects, vg.model.flow_objects

    def gateway_sim(a: str, b: str) -> float:
        if fc[a].kind is not fg[b].kind:
            return 0.0
        return 0.5 * _jaccard(mapped(vc.in_context[a]), vg.in_context[b]) + \
            0.5 * _jaccard(mapped(vc.out_context[a]), vg.out_context[b])

    gateways = optimal_matching(vc.gateway_ids, vg.gateway_ids, gateway_sim, cfg.tau_gateway, tb)
    pools = optimal_matching(
        vc.pool_ids, vg.pool_ids,
        lambda a, b: label_sim_syntactic(vc.labels[a], vg.labels[b]), cfg.tau_match, tb)
    return Correspondence(nodes, gateways, pools)


def _common_flows(vc: ModelView, vg: ModelView, corr: Correspondence) -> int:
    fwd = corr.forward
    mapped: Counter = Counter()
    for (s, t, k), n in vc.flows.items():
        if s in fwd and t in fwd:
            mapped[(fwd[s], fwd[t], k)] += n
    return sum(min(n, vg.flows.get(key, 0)) for key, n in mapped.items())


# -- structural and behavioural scores ---------------------------------------


def ged_similarity(vc: ModelView, vg: ModelView, corr: Correspondence) -> float:
    n_nodes = len(vc.model.flow_objects) + len(vg.model.flow_objects)
    n_flows = sum(vc.flows.values()) + sum(vg.flows.values())
    pairs = corr.flow_object_pairs
    skipped = n_nodes - 2 * pairs
    unmatched_flows = n_flows - 2 * _common_flows(vc, vg, corr)
    s_nv = skipped / n_nodes if n_nodes else 0.0
    s_ev = unmatched_flows / n_flows if n_flows else 0.0
    relabel = math.fsum(1.0 - s for s in corr.nodes.sims)
    relabel += math.fsum(
        1.0 - label_sim_syntactic(vc.labels[a], vg.labels[b]) for a, b in corr.gateways.pairs)
    s_bv = 2 * relabel / (n_nodes - skipped) if n_nodes - skipped else 0.0
    return 1.0 - (s_nv + s_ev + s_bv) / 3


def common_nodes_edges(vc: ModelView, vg: ModelView, corr: Correspondence) -> float:
    n_nodes = len(vc.model.flow_objects) + len(vg.model.flow_objects)
    n_flows = sum(vc.flows.values()) + sum(vg.flows.values())
    total = n_nodes + n_flows
    if total == 0:
        return 1.0
    differing = (n_nodes - 2 * corr.flow_object_pairs) + (n_flows - 2 * _common_flows(vc, vg, corr))
    return 1.0 - differing / total


def _relation_overlap(rel_c: frozenset, rel_g: frozenset, corr: Correspondence) -> float:
    fwd = corr.nodes.forward()
    mapped = frozenset((fwd.get(a, _UNMATCHED + a), fwd.get(b, _UNMATCHED + b)) for a, b in rel_c)
    return _jaccard(mapped, rel_g)


def causal_footprint_sim(vc: ModelView, vg: ModelView, corr: Correspondence) -> float:
    return _relation_overlap(vc.causal_closure, vg.causal_closure, corr)


def dependency_graph_sim(vc: ModelView, vg: ModelView, corr: Correspondence) -> float:
    return _relation_overlap(vc.dependencies, vg.dependencies, corr)


def _label_only(vc: ModelView, vg: ModelView) -> Callable[[str, str], float]:
    return lambda a, b: label_sim_syntactic(vc.labels[a], vg.labels[b])


def _kind_and_label(vc: ModelView, vg: ModelView) -> Callable[[str, str], float]:
    fc, fg = vc.model.flow_objects, vg.model.flow_objects

    def sim(a: str, b: str) -> float:
        if not _compatible(fc[a].kind, fg[b].kind):
            return 0.0
        return label_sim_syntactic(vc.labels[a], vg.labels[b])

    return sim


def semantic_dimension(candidate: ProcessModel, truth: ProcessModel,
                       config: Optional[SemanticConfig] = None) -> SemanticScores:
    cfg = default_config() if config is None else config
    vc, vg = ModelView(candidate, cfg.tokenizer), ModelView(truth, cfg.tokenizer)
    if vg.key < vc.key:
        # every score below is symmetric; fixing the order makes ties resolve identically
        vc, vg = vg, vc
    scores = whole_graph_label_scores(vc, vg, cfg)
    ged = correspondence(vc, vg, _label_only(vc, vg), cfg.tau_ged, cfg)
    scores["SEM4"] = ged_similarity(vc, vg, ged)
    corr = correspondence(vc, vg, _kind_and_label(vc, vg), cfg.tau_match, cfg)
    scores["SEM5"] = common_nodes_edges(vc, vg, corr)
    scores["SEM6"] = causal_footprint_sim(vc, vg, corr)
    scores["SEM7"] = dependency_graph_sim(vc, vg, corr)
    return SemanticScores({k: min(1.0, max(0.0, scores[k])) for k in METRIC_IDS})
