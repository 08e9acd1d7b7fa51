"""Prompt kinds, editable templates, and deterministic payload building.

Prescriptive annotation asks three questions per unit, in order: intent
direction, language-use assessment, then aggression scoring (the
two-section split keeps numeric answers clean). Descriptive annotation
asks the single toxicity question with no examples. Templates are
editable JSON files; the hash of the template set is recorded with
every run so annotations stay attributable to exact wording.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from prescribe.text import TextUnit

TEXT_SLOT = "{text}"
USAGE_SLOT = "{usage}"


class PromptKind(Enum):
    DESCRIPTIVE = "descriptive"
    PRESCRIPTIVE_DI = "prescriptive_di"
    PRESCRIPTIVE_AG_USAGE = "prescriptive_ag_usage"
    PRESCRIPTIVE_AG_SCORING = "prescriptive_ag_scoring"


PRESCRIPTIVE_SEQUENCE = (
    PromptKind.PRESCRIPTIVE_DI,
    PromptKind.PRESCRIPTIVE_AG_USAGE,
    PromptKind.PRESCRIPTIVE_AG_SCORING,
)


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    kind: PromptKind
    system_text: str
    user_template: str
    few_shots: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.user_template.count(TEXT_SLOT) != 1:
            raise TemplateError(
                f"{self.kind.value}: user template must contain {TEXT_SLOT} exactly once"
            )
        if self.kind == PromptKind.DESCRIPTIVE and self.few_shots:
            raise TemplateError("descriptive template takes no few-shot examples")


class TemplateSet:
    def __init__(self, templates: dict[PromptKind, PromptTemplate]):
        self.templates = dict(templates)
        digest = hashlib.sha256()
        for kind in PromptKind:
            t = self.templates.get(kind)
            if t is None:
                continue
            digest.update(kind.value.encode())
            digest.update(t.system_text.encode())
            digest.update(t.user_template.encode())
            for example, answer in t.few_shots:
                digest.update(example.encode())
                digest.update(answer.encode())
        self.hash = digest.hexdigest()

    def get(self, kind: PromptKind) -> PromptTemplate:
        template = self.templates.get(kind)
        if template is None:
            raise TemplateError(f"no template loaded for kind {kind.value!r}")
        return template


def default_templates_dir() -> Path:
    return Path(str(resources.files("prescribe").joinpath("data/templates")))


def load_templates(directory: str | Path | None = None) -> TemplateSet:
    """Load all template JSON files from a directory (default: packaged)."""
    directory = Path(directory) if directory else default_templates_dir()
    if not directory.is_dir():
        raise TemplateError(f"template directory not found: {directory}")
    templates: dict[PromptKind, PromptTemplate] = {}
    for path in sorted(directory.glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        try:
            kind = PromptKind(data["kind"])
        except (KeyError, ValueError):
            raise TemplateError(f"{path}: missing or unknown template kind") from None
        templates[kind] = PromptTemplate(
            kind=kind,
            system_text=data.get("system", ""),
            user_template=data["user"],
            few_shots=tuple((ex, ans) for ex, ans in data.get("few_shots", [])),
        )
    return TemplateSet(templates)


def build_prompt(
    unit: TextUnit,
    kind: PromptKind,
    templates: TemplateSet,
    model: str,
    temperature: float = 0.0,
    usage_answer: str | None = None,
) -> dict:
    """Deterministic chat payload for one unit and prompt kind.

    The text slot is substituted exactly once (literal replacement, so
    braces inside tweets are inert); few-shot exchanges precede the
    target text. The scoring prompt additionally receives the usage
    answer from the preceding prompt of its pair.
    """
    template = templates.get(kind)
    messages = []
    if template.system_text:
        messages.append({"role": "system", "content": template.system_text})
    for example, answer in template.few_shots:
        messages.append(
            {"role": "user", "content": _fill(template.user_template, example, "")}
        )
        messages.append({"role": "assistant", "content": answer})
    messages.append(
        {
            "role": "user",
            "content": _fill(template.user_template, unit.raw, usage_answer or ""),
        }
    )
    return {
        "model": model,
        "temperature": temperature,
        "messages": messages,
        "metadata": {"kind": kind.value, "template_set": templates.hash},
    }


def _fill(template: str, text: str, usage: str) -> str:
    filled = template.replace(TEXT_SLOT, text)
    return filled.replace(USAGE_SLOT, usage)


def fingerprint(payload: dict) -> str:
    """Stable identity of a request: hash of the canonical JSON body."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
