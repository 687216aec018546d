"""Policy and request data model, IAM JSON codec, and deny-overrides evaluation.

Only a subset of the IAM policy language is understood: ``Version``,
``Statement`` (object or list), and per statement ``Sid``, ``Effect``,
``Principal``/``NotPrincipal``, ``Action``/``NotAction`` and
``Resource``/``NotResource``. ``Condition`` and any other key raise
:class:`UnsupportedFeature`.
"""

from __future__ import annotations

import enum
import functools
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import InvalidPolicy, InvalidRequest, MalformedJson, UnsupportedFeature

METACHARS = frozenset("*?")
DEFAULT_VERSION = "2012-10-17"
FIELDS = ("principal", "action", "resource")


class Effect(enum.Enum):
    ALLOW = "Allow"
    DENY = "Deny"


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATED = "negated"


class Decision(enum.Enum):
    EXPLICIT_DENY = "ExplicitDeny"
    ALLOWED = "Allowed"
    IMPLICIT_DENY = "ImplicitDeny"

    @property
    def denied(self) -> bool:
        return self is not Decision.ALLOWED


def normalize_field(kind: str, value: str) -> str:
    """Case normalization applied before any matching.

    Actions are case-insensitive, principals and resources are not. Every
    matcher (the regex path here and the automata path in the analyzer) goes
    through this function so the two cannot disagree.
    """
    if kind == "action":
        return value.lower()
    return value


@functools.lru_cache(maxsize=8192)
def _glob_regex(pattern: str) -> re.Pattern[str]:
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def glob_match(pattern: str, value: str, kind: str = "resource") -> bool:
    """IAM-style wildcard match.

    ``*`` matches any run of characters (including ``/`` and ``:``), ``?``
    exactly one character. *kind* selects the case rule (see
    :func:`normalize_field`).

    >>> glob_match("file?.txt", "file8.txt")
    True
    >>> glob_match("s3:getobject", "s3:GetObject", kind="action")
    True
    """
    pattern = normalize_field(kind, pattern)
    value = normalize_field(kind, value)
    return _glob_regex(pattern).fullmatch(value) is not None


@dataclass(frozen=True)
class Request:
    principal: str
    action: str
    resource: str

    def __post_init__(self) -> None:
        for name in FIELDS:
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise InvalidRequest(f"request {name} must be a non-empty string")
            if METACHARS.intersection(value):
                raise InvalidRequest(f"request {name} {value!r} contains a wildcard")
        service, sep, op = self.action.partition(":")
        if not sep or not service or not op or ":" in op:
            raise InvalidRequest(
                f"action {self.action!r} must be 'service:Operation' with exactly one ':'"
            )

    def to_dict(self) -> dict[str, str]:
        return {"principal": self.principal, "action": self.action, "resource": self.resource}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Request:
        try:
            return cls(data["principal"], data["action"], data["resource"])
        except KeyError as exc:
            raise InvalidRequest(f"request is missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class Matcher:
    patterns: tuple[str, ...]
    polarity: Polarity = Polarity.POSITIVE

    def __post_init__(self) -> None:
        if not self.patterns:
            raise InvalidPolicy("matcher needs at least one pattern")
        object.__setattr__(self, "patterns", tuple(self.patterns))

    @classmethod
    def any(cls) -> Matcher:
        return cls(("*",))

    @property
    def negated(self) -> bool:
        return self.polarity is Polarity.NEGATED

    def matches(self, value: str, kind: str) -> bool:
        hit = any(glob_match(p, value, kind) for p in self.patterns)
        return hit != self.negated


@dataclass(frozen=True)
class Statement:
    effect: Effect
    principal: Matcher = field(default_factory=Matcher.any)
    action: Matcher = field(default_factory=Matcher.any)
    resource: Matcher = field(default_factory=Matcher.any)
    sid: str | None = None

    def matcher(self, kind: str) -> Matcher:
        return getattr(self, kind)

    def matches(self, principal: str, action: str, resource: str) -> bool:
        return (
            self.principal.matches(principal, "principal")
            and self.action.matches(action, "action")
            and self.resource.matches(resource, "resource")
        )

    def literals(self) -> Iterable[tuple[str, str]]:
        """Yield ``(kind, pattern)`` for every pattern of the statement."""
        for kind in FIELDS:
            for pattern in self.matcher(kind).patterns:
                yield kind, pattern


@dataclass(frozen=True)
class Policy:
    statements: tuple[Statement, ...] = ()
    version: str = DEFAULT_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "statements", tuple(self.statements))

    def literals(self) -> Iterable[tuple[str, str]]:
        for st in self.statements:
            yield from st.literals()


def decide(policy: Policy, principal: str, action: str, resource: str) -> Decision:
    """Deny-overrides decision for raw field strings (no request validation)."""
    allowed = False
    for st in policy.statements:
        if st.effect is Effect.DENY:
            if st.matches(principal, action, resource):
                return Decision.EXPLICIT_DENY
        elif not allowed and st.matches(principal, action, resource):
            allowed = True
    return Decision.ALLOWED if allowed else Decision.IMPLICIT_DENY


def evaluate(policy: Policy, request: Request) -> Decision:
    """Evaluate a concrete request: explicit deny beats allow beats implicit deny."""
    return decide(policy, request.principal, request.action, request.resource)


# -- JSON codec -------------------------------------------------------------

_STATEMENT_KEYS = {
    "Sid", "Effect", "Principal", "NotPrincipal", "Action", "NotAction", "Resource", "NotResource",
}
_TOP_KEYS = {"Version", "Statement"}
_PRINCIPAL_MAP_KEYS = {"AWS", "Service"}


def _string_list(value: Any, where: str) -> tuple[str, ...]:
    if isinstance(value, str):
        items = [value]
    elif isinstance(value, list):
        items = value
    else:
        raise InvalidPolicy(f"{where} must be a string or a list of strings")
    if not items:
        raise InvalidPolicy(f"{where} must not be empty")
    for item in items:
        if not isinstance(item, str) or not item:
            raise InvalidPolicy(f"{where} entries must be non-empty strings")
    return tuple(items)


def _principal_patterns(value: Any, where: str) -> tuple[str, ...]:
    if isinstance(value, dict):
        unknown = set(value) - _PRINCIPAL_MAP_KEYS
        if unknown:
            raise UnsupportedFeature(f"{where} key(s) {sorted(unknown)} not supported")
        if not value:
            raise InvalidPolicy(f"{where} map is empty")
        out: list[str] = []
        for key in sorted(value):
            out.extend(_string_list(value[key], f"{where}.{key}"))
        return tuple(out)
    return _string_list(value, where)


def _matcher(raw: dict[str, Any], name: str, required: bool) -> Matcher:
    neg = "Not" + name
    if name in raw and neg in raw:
        raise InvalidPolicy(f"statement has both {name} and {neg}")
    convert = _principal_patterns if name == "Principal" else _string_list
    if name in raw:
        return Matcher(convert(raw[name], name), Polarity.POSITIVE)
    if neg in raw:
        return Matcher(convert(raw[neg], neg), Polarity.NEGATED)
    if required:
        raise InvalidPolicy(f"statement is missing {name}/{neg}")
    return Matcher.any()


def _statement(raw: Any) -> Statement:
    if not isinstance(raw, dict):
        raise InvalidPolicy("each statement must be a JSON object")
    if "Condition" in raw:
        raise UnsupportedFeature("Condition blocks are not supported")
    unknown = set(raw) - _STATEMENT_KEYS
    if unknown:
        raise UnsupportedFeature(f"unsupported statement key(s): {sorted(unknown)}")
    try:
        effect = Effect(raw.get("Effect"))
    except ValueError:
        raise InvalidPolicy(f"Effect must be 'Allow' or 'Deny', got {raw.get('Effect')!r}") from None
    sid = raw.get("Sid")
    if sid is not None and not isinstance(sid, str):
        raise InvalidPolicy("Sid must be a string")
    return Statement(
        effect=effect,
        principal=_matcher(raw, "Principal", required=False),
        action=_matcher(raw, "Action", required=True),
        resource=_matcher(raw, "Resource", required=True),
        sid=sid,
    )


def policy_from_obj(doc: Any) -> Policy:
    if not isinstance(doc, dict):
        raise InvalidPolicy("policy document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise UnsupportedFeature(f"unsupported top-level key(s): {sorted(unknown)}")
    version = doc.get("Version", DEFAULT_VERSION)
    if not isinstance(version, str):
        raise InvalidPolicy("Version must be a string")
    if "Statement" not in doc:
        raise InvalidPolicy("policy has no Statement")
    raw = doc["Statement"]
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list):
        raise InvalidPolicy("Statement must be an object or a list")
    return Policy(tuple(_statement(s) for s in raw), version)


def parse_policy(text: str | bytes) -> Policy:
    """Parse IAM policy JSON into a normalized :class:`Policy`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(str(exc)) from None
    return policy_from_obj(doc)


def _emit_matcher(out: dict[str, Any], name: str, m: Matcher) -> None:
    key = ("Not" + name) if m.negated else name
    if name == "Principal" and m.patterns == ("*",):
        out[key] = "*"
    elif name == "Principal":
        out[key] = {"AWS": list(m.patterns)}
    else:
        out[key] = list(m.patterns)


def policy_to_obj(policy: Policy) -> dict[str, Any]:
    statements = []
    for st in policy.statements:
        obj: dict[str, Any] = {}
        if st.sid is not None:
            obj["Sid"] = st.sid
        obj["Effect"] = st.effect.value
        _emit_matcher(obj, "Principal", st.principal)
        _emit_matcher(obj, "Action", st.action)
        _emit_matcher(obj, "Resource", st.resource)
        statements.append(obj)
    return {"Version": policy.version, "Statement": statements}


def serialize_policy(policy: Policy, indent: int | None = None) -> str:
    """Canonical JSON text; compact unless *indent* is given."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(policy_to_obj(policy), indent=indent, separators=separators, ensure_ascii=False)
