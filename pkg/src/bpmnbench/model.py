"""Typed process graph for BPMN 2.0 models.

A :class:`ProcessModel` is immutable once built. Derived adjacency is cached
lazily on first access, which is safe because the underlying data never
changes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional


class Kind(str, enum.Enum):
    START = "StartEvent"
    INTERMEDIATE = "IntermediateEvent"
    END = "EndEvent"
    TASK = "Task"
    SUBPROCESS = "SubProcess"
    XOR = "GatewayXOR"
    AND = "GatewayAND"
    OR = "GatewayOR"
    EVENT_GATEWAY = "GatewayEvent"

    @property
    def is_gateway(self) -> bool:
        return self in GATEWAY_KINDS

    @property
    def is_event(self) -> bool:
        return self in (Kind.START, Kind.INTERMEDIATE, Kind.END)

    @property
    def is_activity(self) -> bool:
        return self in (Kind.TASK, Kind.SUBPROCESS)


GATEWAY_KINDS = frozenset({Kind.XOR, Kind.AND, Kind.OR, Kind.EVENT_GATEWAY})


class FlowKind(str, enum.Enum):
    SEQUENCE = "Sequence"
    MESSAGE = "Message"


class ModelError(ValueError):
    """Base class for structural problems found while building a model."""


class UnresolvedReference(ModelError):
    def __init__(self, ref: str, where: str = ""):
        self.ref = ref
        self.where = where
        super().__init__(f"unresolved reference {ref!r}" + (f" in {where}" if where else ""))


class DuplicateId(ModelError):
    def __init__(self, id_: str):
        self.id = id_
        super().__init__(f"duplicate id {id_!r}")


class UnsupportedRoot(ModelError):
    def __init__(self, element: str):
        self.element = element
        super().__init__(f"unsupported root element {element!r}")


class UnknownId(ModelError, KeyError):
    def __init__(self, id_: str):
        self.id = id_
        ModelError.__init__(self, f"unknown flow object {id_!r}")

    __str__ = ModelError.__str__


@dataclass(frozen=True)
class FlowObject:
    id: str
    kind: Kind
    process_id: str
    label: Optional[str] = None
    is_message: bool = False
    attached_to: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ModelError("flow object id must be non-empty")
        if self.attached_to is not None and self.kind is not Kind.INTERMEDIATE:
            raise ModelError(f"{self.id}: only intermediate events can be attached")
        if self.is_message and not self.kind.is_event:
            raise ModelError(f"{self.id}: only events carry message definitions")

    @property
    def has_label(self) -> bool:
        return bool(self.label and self.label.strip())


@dataclass(frozen=True)
class Flow:
    id: str
    source: str
    target: str
    kind: FlowKind = FlowKind.SEQUENCE


@dataclass(frozen=True)
class Lane:
    id: str
    label: Optional[str] = None
    flow_node_refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Pool:
    id: str
    label: Optional[str] = None
    lanes: tuple[Lane, ...] = ()
    process_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class GatewayRole:
    gateway_id: str
    is_split: bool
    is_join: bool


@dataclass(frozen=True)
class ProcessModel:
    flow_objects: dict[str, FlowObject]
    flows: tuple[Flow, ...] = ()
    processes: dict[str, frozenset[str]] = field(default_factory=dict)
    pools: tuple[Pool, ...] = ()

    def __post_init__(self):
        owner: dict[str, str] = {}
        for pid, members in self.processes.items():
            for m in members:
                if m in owner:
                    raise ModelError(f"{m} belongs to processes {owner[m]} and {pid}")
                owner[m] = pid
        for fo in self.flow_objects.values():
            if owner.get(fo.id) != fo.process_id:
                raise ModelError(f"{fo.id} is not a member of its process {fo.process_id}")
        seen: dict[str, str] = {}
        for pool in self.pools:
            for pid in pool.process_ids:
                if pid in seen:
                    raise ModelError(f"process {pid} is in pools {seen[pid]} and {pool.id}")
                seen[pid] = pool.id
        endpoints = set(self.flow_objects) | {p.id for p in self.pools}
        for f in self.flows:
            for ref in (f.source, f.target):
                if ref not in endpoints:
                    raise UnresolvedReference(ref, f.id)

    @classmethod
    def build(
        cls,
        flow_objects: Iterable[FlowObject],
        flows: Iterable[Flow] = (),
        pools: Iterable[Pool] = (),
        processes: Optional[dict[str, Iterable[str]]] = None,
    ) -> "ProcessModel":
        """Assemble a model, deriving process membership from ``process_id``."""
        fos: dict[str, FlowObject] = {}
        for fo in flow_objects:
            if fo.id in fos:
                raise DuplicateId(fo.id)
            fos[fo.id] = fo
        procs: dict[str, set[str]] = {k: set(v) for k, v in (processes or {}).items()}
        for fo in fos.values():
            procs.setdefault(fo.process_id, set()).add(fo.id)
        return cls(
            flow_objects=fos,
            flows=tuple(flows),
            processes={k: frozenset(v) for k, v in procs.items()},
            pools=tuple(pools),
        )

    # -- cached views -------------------------------------------------------

    @cached_property
    def pool_ids(self) -> frozenset[str]:
        return frozenset(p.id for p in self.pools)

    @cached_property
    def sequence_flows(self) -> tuple[Flow, ...]:
        return tuple(f for f in self.flows if f.kind is FlowKind.SEQUENCE)

    @cached_property
    def message_flows(self) -> tuple[Flow, ...]:
        return tuple(f for f in self.flows if f.kind is FlowKind.MESSAGE)

    @cached_property
    def node_flows(self) -> tuple[Flow, ...]:
        """Sequence flows whose endpoints are both flow objects."""
        fo = self.flow_objects
        return tuple(f for f in self.sequence_flows if f.source in fo and f.target in fo)

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        succ: dict[str, list[str]] = {n: [] for n in sorted(self.flow_objects)}
        for f in self.node_flows:
            succ[f.source].append(f.target)
        return {n: tuple(sorted(v)) for n, v in succ.items()}

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        pred: dict[str, list[str]] = {n: [] for n in sorted(self.flow_objects)}
        for f in self.node_flows:
            pred[f.target].append(f.source)
        return {n: tuple(sorted(v)) for n, v in pred.items()}

    def of_kind(self, *kinds: Kind) -> list[FlowObject]:
        return [fo for _, fo in sorted(self.flow_objects.items()) if fo.kind in kinds]

    @property
    def gateways(self) -> list[FlowObject]:
        return self.of_kind(*GATEWAY_KINDS)

    @property
    def non_gateways(self) -> list[FlowObject]:
        return [fo for _, fo in sorted(self.flow_objects.items()) if not fo.kind.is_gateway]

    def label(self, node_id: str) -> str:
        fo = self.flow_objects.get(node_id)
        if fo is not None:
            return fo.label or ""
        for pool in self.pools:
            if pool.id == node_id:
                return pool.label or ""
        raise UnknownId(node_id)
