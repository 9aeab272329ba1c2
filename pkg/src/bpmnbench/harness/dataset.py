"""Sample directories: ``<id>/description.txt`` and ``<id>/ground_truth.bpmn``."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

from ..model import ProcessModel
from ..parser import parse_model
from ..validity import validate

MIN_TRUTH_FLOW_OBJECTS = 3


class MissingFile(FileNotFoundError):
    pass


class InvalidGroundTruth(ValueError):
    def __init__(self, sample_id: str, errors: list[str]):
        self.sample_id = sample_id
        self.errors = errors
        super().__init__(f"{sample_id}: " + "; ".join(errors))


@dataclass(frozen=True)
class Sample:
    id: str
    description: str
    ground_truth: ProcessModel
    source_tag: str = ""


def load_sample(directory: Union[str, Path]) -> Sample:
    d = Path(directory)
    desc_path, truth_path = d / "description.txt", d / "ground_truth.bpmn"
    for p in (desc_path, truth_path):
        if not p.is_file():
            raise MissingFile(str(p))
    data = truth_path.read_bytes()
    report = validate(data)
    if not report.valid:
        raise InvalidGroundTruth(d.name, report.lines())
    model = parse_model(data)
    if len(model.flow_objects) < MIN_TRUTH_FLOW_OBJECTS:
        raise InvalidGroundTruth(
            d.name, [f"ground truth has {len(model.flow_objects)} flow objects; more than 2 are required"])
    source = d / "source.txt"
    tag = source.read_text("utf-8").strip() if source.is_file() else ""
    return Sample(d.name, desc_path.read_text("utf-8"), model, tag)


def load_dataset(root: Union[str, Path]) -> list[Sample]:
    root = Path(root)
    if not root.is_dir():
        raise MissingFile(str(root))
    return [load_sample(d) for d in sorted(p for p in root.iterdir() if p.is_dir())]
