"""Prompting, generation, refinement and record keeping for benchmark runs."""
from __future__ import annotations

from .client import GenerationConfig, HttpChatClient, RequestTimeout, TransportError
from .dataset import InvalidGroundTruth, MissingFile, Sample, load_dataset
from .extract import extract_xml
from .prompts import PromptSet, TemplateMissing
from .runner import generate_with_refinement, run_benchmark
from .store import DuplicateRecord, RecordStore, read_records

__all__ = [
    "DuplicateRecord", "GenerationConfig", "HttpChatClient", "InvalidGroundTruth", "MissingFile", "PromptSet",
    "RecordStore", "RequestTimeout", "Sample", "TemplateMissing", "TransportError",
    "extract_xml", "generate_with_refinement", "load_dataset", "read_records", "run_benchmark",
]
