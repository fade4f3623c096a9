"""Opinion backends: the deterministic mock and the chat-completions client."""

from .base import (
    FULL_PIPELINE,
    AblationFlags,
    OpinionBackend,
    OpinionDraft,
    Pipeline,
    apply_ablation,
)
from .llm import LlmBackend, LlmBackendConfig, parse_opinion_reply
from .mock import MockBackend, MockBackendConfig, mock_form_opinion, mock_summarize

__all__ = [
    "FULL_PIPELINE",
    "AblationFlags",
    "LlmBackend",
    "LlmBackendConfig",
    "MockBackend",
    "MockBackendConfig",
    "OpinionBackend",
    "OpinionDraft",
    "Pipeline",
    "apply_ablation",
    "mock_form_opinion",
    "mock_summarize",
    "parse_opinion_reply",
]
