"""LLM-driven annotation: prompt templates, transports, batch driver."""

from prescribe.llm.annotate import (
    BatchSummary,
    LlmConfig,
    LlmRunRecord,
    annotate_batch,
    annotate_unit,
)
from prescribe.llm.templates import (
    PromptKind,
    PromptTemplate,
    TemplateSet,
    build_prompt,
    fingerprint,
    load_templates,
)
from prescribe.llm.transport import (
    LiveTransport,
    MockTransport,
    RateLimiter,
    RecordingTransport,
    ReplayTransport,
    TransportError,
)

__all__ = [
    "BatchSummary",
    "LlmConfig",
    "LlmRunRecord",
    "annotate_batch",
    "annotate_unit",
    "PromptKind",
    "PromptTemplate",
    "TemplateSet",
    "build_prompt",
    "fingerprint",
    "load_templates",
    "LiveTransport",
    "MockTransport",
    "RateLimiter",
    "RecordingTransport",
    "ReplayTransport",
    "TransportError",
]
