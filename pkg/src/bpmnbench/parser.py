"""BPMN 2.0 XML to :class:`~bpmnbench.model.ProcessModel`."""
from __future__ import annotations

from typing import Optional, Union

from lxml import etree

from .model import (
    DuplicateId,
    Flow,
    FlowKind,
    FlowObject,
    Kind,
    Lane,
    ModelError,
    Pool,
    ProcessModel,
    UnresolvedReference,
    UnsupportedRoot,
)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
IMPLICIT_PROCESS = "__implicit__"

TAG_KINDS: dict[str, Kind] = {
    "startEvent": Kind.START,
    "endEvent": Kind.END,
    "intermediateCatchEvent": Kind.INTERMEDIATE,
    "intermediateThrowEvent": Kind.INTERMEDIATE,
    "boundaryEvent": Kind.INTERMEDIATE,
    "task": Kind.TASK,
    "userTask": Kind.TASK,
    "serviceTask": Kind.TASK,
    "sendTask": Kind.TASK,
    "receiveTask": Kind.TASK,
    "manualTask": Kind.TASK,
    "scriptTask": Kind.TASK,
    "businessRuleTask": Kind.TASK,
    "subProcess": Kind.SUBPROCESS,
    "adHocSubProcess": Kind.SUBPROCESS,
    "transaction": Kind.SUBPROCESS,
    "callActivity": Kind.SUBPROCESS,
    "exclusiveGateway": Kind.XOR,
    "parallelGateway": Kind.AND,
    "inclusiveGateway": Kind.OR,
    "complexGateway": Kind.OR,
    "eventBasedGateway": Kind.EVENT_GATEWAY,
}

SUBPROCESS_TAGS = frozenset({"subProcess", "adHocSubProcess", "transaction"})


def make_parser() -> etree.XMLParser:
    return etree.XMLParser(
        resolve_entities=False, no_network=True, load_dtd=False, huge_tree=False,
        remove_comments=True, remove_pis=True,
    )


def _local(el) -> Optional[str]:
    if not isinstance(el.tag, str):
        return None
    q = etree.QName(el)
    return q.localname if q.namespace in (BPMN_NS, None) else None


def _strip_prefix(ref: Optional[str]) -> Optional[str]:
    if ref is None:
        return None
    ref = ref.strip()
    return ref.split(":", 1)[1] if ":" in ref else ref


def _label(el) -> Optional[str]:
    name = el.get("name")
    if name is None:
        return None
    name = " ".join(name.split())
    return name or None


def _has_message_definition(el) -> bool:
    for child in el:
        if _local(child) == "messageEventDefinition":
            return True
    return False


def parse_model(xml_text: Union[str, bytes]) -> ProcessModel:
    """Parse BPMN 2.0 interchange XML into a process graph.

    Sub-processes are kept as single opaque activities; their contents are
    not added to the graph. Diagram interchange, data objects, associations
    and annotations are ignored.
    """
    data = xml_text.encode("utf-8") if isinstance(xml_text, str) else xml_text
    root = etree.fromstring(data, make_parser())
    if _local(root) != "definitions" or etree.QName(root).namespace not in (BPMN_NS, None):
        raise UnsupportedRoot(root.tag if isinstance(root.tag, str) else str(root.tag))

    ids: set[str] = set()
    for el in root.iter():
        if not isinstance(el.tag, str):
            continue
        i = el.get("id")
        if i is not None:
            if i in ids:
                raise DuplicateId(i)
            ids.add(i)

    flow_objects: list[FlowObject] = []
    seq_raw: list[tuple[str, str, str]] = []
    # ids nested inside opaque sub-processes resolve to the outermost one
    nested_owner: dict[str, str] = {}
    lanes_by_process: dict[str, list[Lane]] = {}
    process_ids: list[str] = []

    def collect_nested(sub, owner_id: str) -> None:
        for el in sub.iter():
            if el is sub or not isinstance(el.tag, str):
                continue
            i = el.get("id")
            if i is not None:
                nested_owner[i] = owner_id

    def read_container(container, process_id: str) -> None:
        for el in container:
            tag = _local(el)
            if tag is None:
                continue
            if tag in TAG_KINDS:
                kind = TAG_KINDS[tag]
                fid = el.get("id")
                if not fid:
                    raise ModelError(f"<{tag}> without id")
                attached = _strip_prefix(el.get("attachedToRef")) if tag == "boundaryEvent" else None
                flow_objects.append(FlowObject(
                    id=fid, kind=kind, process_id=process_id, label=_label(el),
                    is_message=kind.is_event and _has_message_definition(el),
                    attached_to=attached,
                ))
                if tag in SUBPROCESS_TAGS:
                    collect_nested(el, fid)
            elif tag == "sequenceFlow":
                seq_raw.append((el.get("id") or "", el.get("sourceRef") or "", el.get("targetRef") or ""))
            elif tag == "laneSet":
                lanes_by_process.setdefault(process_id, []).extend(_read_lanes(el))

    implicit = False
    for el in root:
        tag = _local(el)
        if tag == "process":
            pid = el.get("id")
            if not pid:
                raise ModelError("<process> without id")
            process_ids.append(pid)
            read_container(el, pid)
        elif tag in TAG_KINDS or tag == "sequenceFlow":
            implicit = True
    if implicit:
        process_ids.append(IMPLICIT_PROCESS)
        read_container(root, IMPLICIT_PROCESS)

    fo_ids = {fo.id for fo in flow_objects}
    for fo in flow_objects:
        if fo.attached_to is not None and fo.attached_to not in fo_ids:
            raise UnresolvedReference(fo.attached_to, fo.id)

    pools: list[Pool] = []
    msg_raw: list[tuple[str, str, str]] = []
    known_processes = set(process_ids)
    for collab in root:
        if _local(collab) != "collaboration":
            continue
        for el in collab:
            tag = _local(el)
            if tag == "participant":
                proc = _strip_prefix(el.get("processRef"))
                if proc is not None and proc not in known_processes:
                    raise UnresolvedReference(proc, el.get("id") or "participant")
                procs = (proc,) if proc else ()
                lanes = tuple(l for p in procs for l in lanes_by_process.get(p, ()))
                pools.append(Pool(id=el.get("id") or "", label=_label(el), lanes=lanes, process_ids=procs))
            elif tag == "messageFlow":
                msg_raw.append((el.get("id") or "",
                                _strip_prefix(el.get("sourceRef")) or "",
                                _strip_prefix(el.get("targetRef")) or ""))

    pool_ids = {p.id for p in pools}
    flows: list[Flow] = []
    for fid, src, tgt in seq_raw:
        for ref in (src, tgt):
            if ref not in fo_ids and ref not in pool_ids:
                raise UnresolvedReference(ref, fid)
        flows.append(Flow(fid, src, tgt, FlowKind.SEQUENCE))
    for fid, src, tgt in msg_raw:
        ends = []
        for ref in (src, tgt):
            ref = nested_owner.get(ref, ref)
            if ref not in fo_ids and ref not in pool_ids:
                raise UnresolvedReference(ref, fid)
            ends.append(ref)
        flows.append(Flow(fid, ends[0], ends[1], FlowKind.MESSAGE))

    lane_nodes = {r for ls in lanes_by_process.values() for l in ls for r in l.flow_node_refs}
    for r in sorted(lane_nodes):
        if r not in fo_ids and r not in nested_owner:
            raise UnresolvedReference(r, "lane")

    return ProcessModel.build(
        flow_objects, flows, pools, processes={p: () for p in process_ids},
    )


def _read_lanes(lane_set) -> list[Lane]:
    lanes = []
    for el in lane_set.iter():
        if _local(el) != "lane":
            continue
        refs = tuple(
            (c.text or "").strip() for c in el if _local(c) == "flowNodeRef" and (c.text or "").strip()
        )
        lanes.append(Lane(id=el.get("id") or "", label=_label(el), flow_node_refs=refs))
    return lanes
