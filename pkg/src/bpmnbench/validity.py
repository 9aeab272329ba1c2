"""Validity checking of candidate BPMN-XML text.

Checks run in stages and stop at the first stage that reports anything:

1. XML well-formedness
2. root ``definitions`` element in the BPMN 2.0 model namespace
3. conformance to the vendored BPMN 2.0 XSD set
4. id uniqueness
5. reference integrity
6. at least two flow objects

Error messages are single-line and start with the error code; they are
pasted verbatim into refinement prompts, so their format is part of the API.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Union

from lxml import etree

from .model import ModelError
from .parser import BPMN_NS, TAG_KINDS, make_parser, parse_model

MIN_FLOW_OBJECTS = 2


class ErrorCode(str, enum.Enum):
    MALFORMED = "Malformed"
    WRONG_NAMESPACE = "WrongNamespace"
    SCHEMA_VIOLATION = "SchemaViolation"
    DUPLICATE_ID = "DuplicateId"
    DANGLING_REF = "DanglingRef"
    TOO_FEW_NODES = "TooFewNodes"


@dataclass(frozen=True)
class ValidationError:
    code: ErrorCode
    location: str
    message: str

    def line(self) -> str:
        return f"{self.code.value}: {self.message}"

    def to_dict(self) -> dict:
        return {"code": self.code.value, "location": self.location, "message": self.line()}


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationError, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.errors

    def lines(self) -> list[str]:
        return [e.line() for e in self.errors]

    def to_dict(self) -> dict:
        return {"valid": self.valid, "errors": [e.to_dict() for e in self.errors]}


def validity_score(report: ValidationReport) -> float:
    return 1.0 if report.valid else 0.0


def invalid_report(code: ErrorCode, location: str, message: str) -> ValidationReport:
    """Report for attempts that never produced checkable XML (timeouts, transport errors)."""
    return ValidationReport((ValidationError(code, location, _one_line(message)),))


@lru_cache(maxsize=1)
def bpmn_schema() -> etree.XMLSchema:
    root = resources.files("bpmnbench") / "schemas" / "bpmn20"
    with resources.as_file(root) as path:
        doc = etree.parse(str(path / "BPMN20.xsd"))
        return etree.XMLSchema(doc)


_NS_RE = re.compile(r"\{http://www\.omg\.org/spec/BPMN/20100524/MODEL\}")
_DI_NS_RE = re.compile(r"\{http://www\.omg\.org/spec/(?:BPMN|DD)/20100524/(DI|DC)\}")
_NCNAME = re.compile(r"^[A-Za-z_][\w.\-]*$")
_DUP_ID_MSG = re.compile(r"attribute 'id': '([^']*)' is not a valid value of the atomic type 'xs:ID'")


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def _short(msg: str) -> str:
    msg = _NS_RE.sub("bpmn:", msg)
    msg = _DI_NS_RE.sub(lambda m: m.group(1).lower() + ":", msg)
    return _one_line(msg)


def _local(el) -> str:
    return etree.QName(el).localname if isinstance(el.tag, str) else ""


def _strip_prefix(ref: str) -> str:
    ref = ref.strip()
    return ref.split(":", 1)[1] if ":" in ref else ref


def validate(xml_text: Union[str, bytes]) -> ValidationReport:
    data = xml_text.encode("utf-8") if isinstance(xml_text, str) else bytes(xml_text)

    # (1) well-formedness
    parser = make_parser()
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as exc:
        errors = [
            ValidationError(ErrorCode.MALFORMED, f"line {e.line}:{e.column}",
                            f"line {e.line}, column {e.column}: {_one_line(e.message)}")
            for e in parser.error_log.filter_from_errors()
        ] or [ValidationError(ErrorCode.MALFORMED, "document", _one_line(str(exc) or "not well-formed XML"))]
        return ValidationReport(tuple(errors))
    if root is None:
        return invalid_report(ErrorCode.MALFORMED, "document", "document is empty")

    # (2) root element
    q = etree.QName(root)
    if q.localname != "definitions" or q.namespace != BPMN_NS:
        return invalid_report(
            ErrorCode.WRONG_NAMESPACE, q.localname,
            f"root element must be definitions in namespace {BPMN_NS}, found "
            f"{q.localname} in namespace {q.namespace or '(none)'}",
        )

    ids: dict[str, list] = {}
    for el in root.iter():
        if isinstance(el.tag, str) and el.get("id") is not None:
            ids.setdefault(el.get("id"), []).append(el)
    duplicated = {i for i, els in ids.items() if len(els) > 1}

    # (3) schema; ID uniqueness is left to stage 4 so it gets its own code
    schema = bpmn_schema()
    schema.validate(etree.ElementTree(root))
    errors = []
    for e in schema.error_log:
        m = _DUP_ID_MSG.search(e.message)
        if m and m.group(1) in duplicated and _NCNAME.match(m.group(1)):
            continue
        errors.append(ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"line {e.line} {_short(e.path or '')}".strip(),
            f"line {e.line}: {_short(e.message)}",
        ))
    if errors:
        return ValidationReport(tuple(errors))

    # (4) ids
    if duplicated:
        return ValidationReport(tuple(
            ValidationError(ErrorCode.DUPLICATE_ID, i,
                            f"id {i} is used by {len(ids[i])} elements "
                            f"({', '.join(_local(el) for el in ids[i])})")
            for i in sorted(duplicated)
        ))

    # (5) references
    errors = list(_reference_errors(root, ids))
    if errors:
        return ValidationReport(tuple(errors))

    # (6) size; parse_model must accept everything that got this far
    try:
        model = parse_model(data)
    except ModelError as exc:
        return invalid_report(ErrorCode.DANGLING_REF, "document", str(exc))
    n = len(model.flow_objects)
    if n < MIN_FLOW_OBJECTS:
        return invalid_report(
            ErrorCode.TOO_FEW_NODES, "definitions",
            f"model has {n} flow object(s); at least {MIN_FLOW_OBJECTS} are required",
        )
    return ValidationReport()


_FLOW_NODE_TAGS = frozenset(TAG_KINDS)
_ACTIVITY_TAGS = frozenset(t for t, k in TAG_KINDS.items() if k.is_activity)


def _reference_errors(root, ids: dict[str, list]):
    def target(ref: str):
        els = ids.get(ref)
        return els[0] if els else None

    for el in root.iter():
        if not isinstance(el.tag, str) or etree.QName(el).namespace != BPMN_NS:
            continue
        tag = _local(el)
        eid = el.get("id") or tag
        checks = []
        if tag == "sequenceFlow":
            checks = [("sourceRef", _FLOW_NODE_TAGS | {"participant"}, "a flow node"),
                      ("targetRef", _FLOW_NODE_TAGS | {"participant"}, "a flow node")]
        elif tag == "messageFlow":
            checks = [("sourceRef", None, None), ("targetRef", None, None)]
        elif tag == "participant":
            checks = [("processRef", {"process"}, "a process")]
        elif tag == "boundaryEvent":
            checks = [("attachedToRef", _ACTIVITY_TAGS, "an activity")]
        elif el.get("default") is not None:
            checks = [("default", {"sequenceFlow"}, "a sequence flow")]
        for attr, allowed, noun in checks:
            raw = el.get(attr)
            if raw is None:
                continue
            ref = _strip_prefix(raw)
            hit = target(ref)
            if hit is None:
                yield ValidationError(
                    ErrorCode.DANGLING_REF, eid,
                    f"missing {attr} for {tag} {eid} (no element with id {ref})")
            elif allowed is not None and _local(hit) not in allowed:
                yield ValidationError(
                    ErrorCode.DANGLING_REF, eid,
                    f"invalid {attr} for {tag} {eid} ({ref} is of type {_local(hit)}, expected {noun})")
