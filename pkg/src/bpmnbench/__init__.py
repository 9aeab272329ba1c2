"""Quality scoring of BPMN 2.0 models and a text-to-BPMN benchmark harness."""
from __future__ import annotations

from .evaluation import Evaluation, evaluate_xml
from .model import FlowObject, Kind, ProcessModel
from .parser import parse_model
from .validity import ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "Evaluation", "FlowObject", "Kind", "ProcessModel", "ValidationReport",
    "evaluate_xml", "parse_model", "validate",
]
