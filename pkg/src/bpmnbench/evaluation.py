"""One candidate file through all four dimensions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .model import ProcessModel
from .parser import parse_model
from .pragmatic import PragmaticScores, ThresholdTable, pragmatic_dimension
from .scoring import q_qual, q_total
from .semantic import SemanticConfig, SemanticScores, semantic_dimension
from .syntactic import SyntacticScores, syntactic_dimension
from .validity import ValidationReport, validate, validity_score


@dataclass(frozen=True)
class Evaluation:
    report: ValidationReport
    syntactic: Optional[SyntacticScores] = None
    pragmatic: Optional[PragmaticScores] = None
    semantic: Optional[SemanticScores] = None

    @property
    def q_val(self) -> float:
        return validity_score(self.report)

    @property
    def q_qual(self) -> Optional[float]:
        if self.semantic is None or self.syntactic is None:
            return None
        return q_qual(self.syntactic.q_syn, self.pragmatic.q_prag, self.semantic.q_sem)

    @property
    def q_total(self) -> Optional[float]:
        if self.semantic is None or self.syntactic is None:
            return None
        return q_total(self.syntactic.q_syn, self.pragmatic.q_prag, self.semantic.q_sem, self.q_val)

    def scores_dict(self) -> Optional[dict]:
        """Score block of a run record; None for invalid candidates."""
        if self.syntactic is None:
            return None
        return {
            "syn": self.syntactic.to_dict(),
            "prag": self.pragmatic.to_dict(),
            "sem": self.semantic.to_dict() if self.semantic is not None else None,
            "q_qual": self.q_qual,
            "q_total": self.q_total,
        }


def evaluate_xml(
    xml_text: Union[str, bytes],
    truth: Optional[ProcessModel] = None,
    thresholds: Optional[ThresholdTable] = None,
    semantic_config: Optional[SemanticConfig] = None,
    report: Optional[ValidationReport] = None,
) -> Evaluation:
    report = validate(xml_text) if report is None else report
    if not report.valid:
        return Evaluation(report)
    model = parse_model(xml_text)
    sem = semantic_dimension(model, truth, semantic_config) if truth is not None else None
    return Evaluation(report, syntactic_dimension(model), pragmatic_dimension(model, thresholds), sem)
