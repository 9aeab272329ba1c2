"""Structural queries over a :class:`ProcessModel`.

Only sequence flows between flow objects count as graph edges here; message
flows and flows attached to pools are ignored.
"""
from __future__ import annotations

from collections import deque
from typing import Optional

from .model import GATEWAY_KINDS, GatewayRole, Kind, ModelError, ProcessModel, UnknownId


class NotASplit(ModelError):
    def __init__(self, id_: str):
        self.id = id_
        super().__init__(f"{id_!r} is not a split gateway")


def degrees(model: ProcessModel, node_id: str) -> tuple[int, int]:
    if node_id not in model.flow_objects:
        raise UnknownId(node_id)
    return len(model.predecessors[node_id]), len(model.successors[node_id])


def _role(model: ProcessModel, gid: str) -> GatewayRole:
    n_in, n_out = degrees(model, gid)
    is_join = n_in > 1
    # in<=1 and out<=1 is degenerate: counted as a split so the split rule judges it
    is_split = n_out > 1 or (n_in <= 1 and n_out <= 1)
    return GatewayRole(gid, is_split, is_join)


def gateway_roles(model: ProcessModel) -> list[GatewayRole]:
    return [_role(model, g.id) for g in model.gateways]


def splits(model: ProcessModel) -> list[str]:
    return [r.gateway_id for r in gateway_roles(model) if r.is_split]


def joins(model: ProcessModel) -> list[str]:
    return [r.gateway_id for r in gateway_roles(model) if r.is_join]


def _bfs_distances(model: ProcessModel, start: str) -> dict[str, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in model.successors[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def find_matching_join(model: ProcessModel, split_id: str) -> Optional[str]:
    """Join gateway of the split's logic kind that every outgoing branch reaches.

    Among several candidates the one with the smallest worst-branch distance
    wins, ties broken by id. Returns None when no candidate exists.
    """
    fo = model.flow_objects.get(split_id)
    if fo is None or not fo.kind.is_gateway or not _role(model, split_id).is_split:
        raise NotASplit(split_id)
    branches = model.successors[split_id]
    if not branches:
        return None
    per_branch = [_bfs_distances(model, b) for b in branches]
    best: Optional[tuple[int, str]] = None
    for r in gateway_roles(model):
        gid = r.gateway_id
        if not r.is_join or gid == split_id or model.flow_objects[gid].kind is not fo.kind:
            continue
        if all(gid in d for d in per_branch):
            key = (max(d[gid] for d in per_branch) + 1, gid)
            if best is None or key < best:
                best = key
    return best[1] if best else None


def acyclic_successors(model: ProcessModel) -> dict[str, tuple[str, ...]]:
    """Successor lists with DFS back edges removed.

    DFS runs from each start event in id order, then from any node not yet
    visited, always expanding successors in id order.
    """
    cache = model.__dict__
    if "_acyclic" not in cache:
        cache["_acyclic"] = _acyclic(model)
    return cache["_acyclic"]


def _acyclic(model: ProcessModel) -> dict[str, tuple[str, ...]]:
    succ = model.successors
    starts = [fo.id for fo in model.of_kind(Kind.START)]
    roots = starts + [n for n in sorted(succ) if n not in set(starts)]
    state: dict[str, int] = {}  # 1 on stack, 2 done
    back: set[tuple[str, str]] = set()
    for root in roots:
        if root in state:
            continue
        state[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                continue
            s = state.get(nxt)
            if s == 1:
                back.add((node, nxt))
            elif s is None:
                state[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
    return {n: tuple(v for v in vs if (n, v) not in back) for n, vs in succ.items()}


def topological_order(dag: dict[str, tuple[str, ...]]) -> list[str]:
    indeg = {n: 0 for n in dag}
    for vs in dag.values():
        for v in vs:
            indeg[v] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    queue = deque(ready)
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in dag[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(order) != len(dag):
        raise ModelError("graph still contains a cycle")
    return order


def diameter_nodes(model: ProcessModel) -> int:
    """Node count of the longest start-to-end path once cycles are broken."""
    dag = acyclic_successors(model)
    order = topological_order(dag)
    ends = {fo.id for fo in model.of_kind(Kind.END)}
    longest: dict[str, int] = {}
    for fo in model.of_kind(Kind.START):
        longest[fo.id] = 1
    best = 0
    for u in order:
        if u not in longest:
            continue
        if u in ends:
            best = max(best, longest[u])
        for v in dag[u]:
            if longest.get(v, 0) < longest[u] + 1:
                longest[v] = longest[u] + 1
    return best


def reachability(dag: dict[str, tuple[str, ...]]) -> dict[str, frozenset[str]]:
    """Strict descendants of every node in a DAG."""
    reach: dict[str, frozenset[str]] = {}
    for u in reversed(topological_order(dag)):
        acc: set[str] = set()
        for v in dag[u]:
            acc.add(v)
            acc |= reach[v]
        reach[u] = frozenset(acc)
    return reach


def articulation_points(nodes: list[str], edges: list[tuple[str, str]]) -> set[str]:
    """Cut vertices of an undirected graph (iterative Hopcroft-Tarjan)."""
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    cut: set[str] = set()
    counter = 0
    for root in sorted(adj):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        stack = [(root, None, iter(sorted(adj[root])))]
        while stack:
            node, parent, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                if parent is not None:
                    low[parent] = min(low[parent], low[node])
                    if parent != root and low[node] >= disc[parent]:
                        cut.add(parent)
                continue
            if nxt == parent:
                continue
            if nxt in disc:
                low[node] = min(low[node], disc[nxt])
            else:
                disc[nxt] = low[nxt] = counter
                counter += 1
                if node == root:
                    root_children += 1
                stack.append((nxt, node, iter(sorted(adj[nxt]))))
        if root_children > 1:
            cut.add(root)
    return cut


def is_gateway(model: ProcessModel, node_id: str) -> bool:
    fo = model.flow_objects.get(node_id)
    return fo is not None and fo.kind in GATEWAY_KINDS
