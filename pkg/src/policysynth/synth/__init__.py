"""Prompt construction, synthesis backends and policy extraction."""

from .backends import (
    ConstantBackend,
    DenyDroppingBackend,
    HttpBackend,
    OracleBackend,
    RateLimited,
    RecordingBackend,
    ReplayBackend,
    allow_all_backend,
    backend_from_spec,
)
from .extract import ExtractionFailure, FailureKind, extract_policy
from .prompts import Prompt, PromptKind, build_prompt
from .records import JsonlSink, SynthesisRecord, read_transcript, synthesize, synthesize_many

__all__ = [
    "ConstantBackend",
    "DenyDroppingBackend",
    "ExtractionFailure",
    "FailureKind",
    "HttpBackend",
    "JsonlSink",
    "OracleBackend",
    "Prompt",
    "PromptKind",
    "RateLimited",
    "RecordingBackend",
    "ReplayBackend",
    "SynthesisRecord",
    "allow_all_backend",
    "backend_from_spec",
    "build_prompt",
    "extract_policy",
    "read_transcript",
    "synthesize",
    "synthesize_many",
]
