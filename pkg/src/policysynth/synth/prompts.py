"""Zero-shot prompt construction for the three specification styles."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Any

from ..errors import KindSourceMismatch
from ..fgdsl import FgSpec, parse_fgspec, render_fgspec
from ..policy import Request
from ..specgen import CorpusEntry, RequestSpec

CONCRETE_HEADER = (
    "Create an AWS IAM policy that incorporates all of the following requests. "
    "Return only the JSON policy, nothing else:"
)
DESCRIPTION_HEADER = "Create an AWS IAM policy based on this description. Return only the JSON policy, nothing else:"
ACCOUNT_NOTE = "*Note: Use ACCOUNT_ID as placeholder in ARNs"

ALLOWED_LABEL = "Allowed requests:"
DENIED_LABEL = "Denied requests:"


class PromptKind(enum.Enum):
    CONCRETE_REQUEST = "concrete"
    COARSE_GRAINED = "coarse"
    FINE_GRAINED_SYNTAX = "fine"

    @property
    def header(self) -> str:
        return CONCRETE_HEADER if self is PromptKind.CONCRETE_REQUEST else DESCRIPTION_HEADER


@dataclass(frozen=True)
class Prompt:
    kind: PromptKind
    text: str
    source_id: str

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    @property
    def body(self) -> str:
        return self.text[len(self.kind.header) + 1:]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "source_id": self.source_id, "text": self.text}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Prompt:
        return cls(PromptKind(data["kind"]), data["text"], data["source_id"])


def render_request(r: Request) -> str:
    """One request in the multi-line JSON layout used in concrete-request prompts."""
    p, a, res = (json.dumps(v, ensure_ascii=False) for v in (r.principal, r.action, r.resource))
    return f'{{"principal": {p},\n "action": {a},\n "resource": {res}\n}}'


def _concrete_body(spec: RequestSpec) -> str:
    parts = [ALLOWED_LABEL]
    parts += [render_request(r) for r in spec.allowed]
    parts.append(DENIED_LABEL)
    parts += [render_request(r) for r in spec.denied]
    return "\n".join(parts) + "\n"


def build_prompt(kind: PromptKind, source: Any) -> Prompt:
    """Build the prompt of *kind* from a matching source.

    concrete: a RequestSpec; coarse: a CorpusEntry (or the description text);
    fine: a CorpusEntry (or an FgSpec).
    """
    if kind is PromptKind.CONCRETE_REQUEST:
        if not isinstance(source, RequestSpec):
            raise KindSourceMismatch("concrete-request prompts are built from a RequestSpec")
        return Prompt(kind, f"{kind.header}\n{_concrete_body(source)}", source.spec_id)
    if kind is PromptKind.COARSE_GRAINED:
        if isinstance(source, CorpusEntry):
            text, sid = source.coarse_description, source.id
        elif isinstance(source, str):
            text, sid = source, "inline"
        else:
            raise KindSourceMismatch("coarse-grained prompts are built from a corpus entry")
        return Prompt(kind, f"{kind.header}\n{text.strip()}\n", sid)
    if kind is PromptKind.FINE_GRAINED_SYNTAX:
        if isinstance(source, CorpusEntry):
            spec, sid = source.fg_spec, source.id
        elif isinstance(source, FgSpec):
            spec, sid = source, "inline"
        else:
            raise KindSourceMismatch("fine-grained prompts are built from a corpus entry or FgSpec")
        return Prompt(kind, f"{kind.header}\n{render_fgspec(spec)}{ACCOUNT_NOTE}\n", sid)
    raise KindSourceMismatch(f"unknown prompt kind {kind!r}")


def parse_concrete_prompt(prompt: Prompt) -> tuple[list[Request], list[Request]]:
    """Recover the allowed and denied request lists from a concrete-request prompt."""
    body = prompt.body
    head, sep, tail = body.partition(DENIED_LABEL)
    if not sep or not head.startswith(ALLOWED_LABEL):
        raise ValueError("not a concrete-request prompt body")
    return _requests_in(head[len(ALLOWED_LABEL):]), _requests_in(tail)


def _requests_in(text: str) -> list[Request]:
    decoder = json.JSONDecoder()
    out = []
    i = text.find("{")
    while i >= 0:
        obj, end = decoder.raw_decode(text, i)
        out.append(Request.from_dict(obj))
        i = text.find("{", end)
    return out


def parse_fine_prompt(prompt: Prompt) -> FgSpec:
    body = prompt.body
    if body.rstrip("\n").endswith(ACCOUNT_NOTE):
        body = body.rstrip("\n")[: -len(ACCOUNT_NOTE)]
    return parse_fgspec(body)
