"""Pull a policy document out of a free-form model response."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass

from ..errors import InvalidPolicy, UnsupportedFeature
from ..policy import Policy, policy_from_obj

log = logging.getLogger(__name__)


class FailureKind(enum.Enum):
    NO_JSON_FOUND = "NoJsonFound"
    MALFORMED_JSON = "MalformedJson"
    UNSUPPORTED_FEATURE = "UnsupportedFeature"
    INVALID_POLICY = "InvalidPolicy"


@dataclass(frozen=True)
class ExtractionFailure:
    kind: FailureKind
    message: str = ""

    def to_dict(self) -> dict[str, str]:
        return {"failure": self.kind.value, "message": self.message}


def _object_spans(text: str) -> tuple[list[tuple[int, int]], bool]:
    """Top-level balanced ``{...}`` spans, and whether an object was left unclosed."""
    spans = []
    depth = 0
    start = -1
    in_str = False
    escape = False
    for i, ch in enumerate(text):
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"' and depth > 0:
            in_str = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                spans.append((start, i + 1))
    return spans, depth > 0


def extract_policy(raw: str) -> Policy | ExtractionFailure:
    """First JSON object with a ``Statement`` key, parsed into a Policy.

    Prose and code fences around the object are ignored. Failures are
    returned, not raised.
    """
    spans, unclosed = _object_spans(raw)
    policies = []
    broken = None
    for start, end in spans:
        chunk = raw[start:end]
        try:
            obj = json.loads(chunk)
        except json.JSONDecodeError as exc:
            if '"Statement"' in chunk and broken is None:
                broken = str(exc)
            continue
        if isinstance(obj, dict) and "Statement" in obj:
            policies.append(obj)
    if policies:
        if len(policies) > 1:
            log.info("response contains %d policy documents; using the first", len(policies))
        try:
            return policy_from_obj(policies[0])
        except UnsupportedFeature as exc:
            return ExtractionFailure(FailureKind.UNSUPPORTED_FEATURE, str(exc))
        except InvalidPolicy as exc:
            return ExtractionFailure(FailureKind.INVALID_POLICY, str(exc))
    if broken is not None:
        return ExtractionFailure(FailureKind.MALFORMED_JSON, broken)
    if unclosed and '"Statement"' in raw:
        return ExtractionFailure(FailureKind.MALFORMED_JSON, "policy object is not closed")
    return ExtractionFailure(FailureKind.NO_JSON_FOUND, "no JSON object with a Statement key")
