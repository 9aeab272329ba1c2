"""Generation with one refinement round, and the benchmark loop around it."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator, Optional, Sequence

from ..evaluation import evaluate_xml
from ..pragmatic import ThresholdTable
from ..semantic import SemanticConfig
from ..validity import ErrorCode, ValidationReport, invalid_report, validate
from .client import ChatClient, GenerationConfig, RequestTimeout, TransportError, chat_with_deadline
from .dataset import Sample
from .extract import extract_xml
from .prompts import PromptSet
from .store import RecordStore

log = logging.getLogger(__name__)


@dataclass
class GenerationOutcome:
    xml_text: Optional[str]
    report: ValidationReport
    refinement_used: bool = False
    timed_out: bool = False
    requests: int = 0
    generate_ms: float = 0.0
    refine_ms: float = 0.0
    transport_errors: list[str] = field(default_factory=list)


def _failed_report(exc: TransportError, timeout: float) -> ValidationReport:
    if isinstance(exc, RequestTimeout):
        msg = f"no response within {timeout:g} s (treated as invalid)"
    else:
        msg = f"transport error: {exc} (treated as invalid)"
    return invalid_report(ErrorCode.MALFORMED, "response", msg)


def generate_with_refinement(client: ChatClient, config: GenerationConfig, sample: Sample,
                             prompts: Optional[PromptSet] = None) -> GenerationOutcome:
    prompts = prompts or PromptSet.load()
    messages = [
        {"role": "system", "content": prompts.system},
        {"role": "user", "content": prompts.render_modeling(sample.description)},
    ]
    out = GenerationOutcome(None, ValidationReport())
    t0 = time.perf_counter()
    try:
        out.requests += 1
        answer = chat_with_deadline(client, messages, config.timeout)
    except TransportError as exc:
        out.generate_ms = (time.perf_counter() - t0) * 1000
        out.timed_out = isinstance(exc, RequestTimeout)
        out.transport_errors.append(str(exc))
        out.report = _failed_report(exc, config.timeout)
        return out
    out.generate_ms = (time.perf_counter() - t0) * 1000
    out.xml_text = extract_xml(answer)
    out.report = validate(out.xml_text)

    rounds = 0
    while not out.report.valid and rounds < config.max_refinements:
        rounds += 1
        out.refinement_used = True
        messages = messages + [
            {"role": "assistant", "content": answer},
            {"role": "user", "content": prompts.render_refinement(out.report.lines())},
        ]
        t1 = time.perf_counter()
        try:
            out.requests += 1
            answer = chat_with_deadline(client, messages, config.timeout)
        except TransportError as exc:
            out.refine_ms += (time.perf_counter() - t1) * 1000
            out.timed_out = isinstance(exc, RequestTimeout)
            out.transport_errors.append(str(exc))
            out.xml_text = None
            out.report = _failed_report(exc, config.timeout)
            return out
        out.refine_ms += (time.perf_counter() - t1) * 1000
        out.xml_text = extract_xml(answer)
        out.report = validate(out.xml_text)
    return out


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def build_record(llm: str, sample: Sample, run_index: int, outcome: GenerationOutcome,
                 thresholds: Optional[ThresholdTable] = None,
                 semantic_config: Optional[SemanticConfig] = None) -> dict:
    t0 = time.perf_counter()
    scores = None
    if outcome.report.valid and outcome.xml_text is not None:
        ev = evaluate_xml(outcome.xml_text, sample.ground_truth, thresholds, semantic_config, outcome.report)
        scores = ev.scores_dict()
    evaluate_ms = (time.perf_counter() - t0) * 1000
    return {
        "llm": llm,
        "sample_id": sample.id,
        "run_index": run_index,
        "timestamp_utc": _now(),
        "q_val": 1.0 if outcome.report.valid else 0.0,
        "refinement_used": outcome.refinement_used,
        "timed_out": outcome.timed_out,
        "scores": scores,
        "durations_ms": {
            "generate": round(outcome.generate_ms, 3),
            "refine": round(outcome.refine_ms, 3),
            "evaluate": round(evaluate_ms, 3),
        },
        "errors": outcome.report.lines(),
    }


def run_benchmark(config: GenerationConfig, dataset: Sequence[Sample], client: ChatClient,
                  store: Optional[RecordStore] = None, prompts: Optional[PromptSet] = None,
                  thresholds: Optional[ThresholdTable] = None,
                  semantic_config: Optional[SemanticConfig] = None,
                  llm: Optional[str] = None) -> Iterator[dict]:
    """Yield one record per (sample, run) not yet in ``store``, appending as it goes."""
    prompts = prompts or PromptSet.load()
    llm = llm or config.model_name
    todo = [(sample, run_index) for run_index in range(1, config.runs + 1) for sample in dataset
            if store is None or (llm, sample.id, run_index) not in store]

    def one(sample: Sample, run_index: int) -> dict:
        outcome = generate_with_refinement(client, config, sample, prompts)
        return build_record(llm, sample, run_index, outcome, thresholds, semantic_config)

    def finish(record: dict) -> dict:
        log.info("%s %s run %d: q_val=%s refinement=%s", llm, record["sample_id"], record["run_index"],
                 record["q_val"], record["refinement_used"])
        if store is not None:
            store.append(record)
        return record

    if config.concurrency == 1:
        for sample, run_index in todo:
            yield finish(one(sample, run_index))
        return
    # records come back in completion order; each is persisted as soon as it is done
    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        futures = [pool.submit(one, sample, run_index) for sample, run_index in todo]
        for fut in as_completed(futures):
            yield finish(fut.result())
