"""Fine-grained request specification language and its compiler to policies.

One rule per line::

    ALLOW user:alice READ bucket:public-bucket/
    DENY any WRITE *               # comments run to end of line
    ALLOW role:ops ec2:StartInstances arn:aws:ec2:us-east-1:ACCOUNT_ID:instance/*

Grammar (keywords case-insensitive, names case-preserving)::

    spec    := { line } ;
    line    := effect SP subject SP verb SP object [comment] NL ;
    effect  := "ALLOW" | "DENY" ;
    subject := ("user:"|"role:"|"service:"|"account:") name | "any" ;
    verb    := "READ"|"WRITE"|"DELETE"|"LIST"|"ACL" | literal-action ;
    object  := "bucket:" name ["/" keyglob] | arn | "*" ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FgSyntaxError, InvalidRequest, UnknownSubjectKind, UnknownVerb
from .policy import Effect, Matcher, Policy, Request, Statement, serialize_policy

ACCOUNT_PLACEHOLDER = "ACCOUNT_ID"

VERB_ACTIONS: dict[str, tuple[str, ...]] = {
    "READ": ("s3:GetObject", "s3:GetObjectVersion"),
    "WRITE": ("s3:PutObject",),
    "DELETE": ("s3:DeleteObject",),
    "LIST": ("s3:ListBucket",),
    "ACL": ("s3:GetObjectAcl", "s3:PutObjectAcl"),
}
SUBJECT_KINDS = ("user", "role", "service", "account")
_BUCKET_RE = re.compile(r"[a-z0-9.-]+\Z")


@dataclass(frozen=True)
class Subject:
    kind: str  # user | role | service | account | any
    name: str = ""

    def render(self) -> str:
        return "any" if self.kind == "any" else f"{self.kind}:{self.name}"


@dataclass(frozen=True)
class BucketObject:
    bucket: str
    key: str | None = None  # as written: None (no slash), "" (trailing slash), or a glob

    @property
    def key_glob(self) -> str:
        if not self.key:
            return "*"
        if self.key.endswith("/"):
            return self.key + "*"
        return self.key

    def render(self) -> str:
        return f"bucket:{self.bucket}" if self.key is None else f"bucket:{self.bucket}/{self.key}"


@dataclass(frozen=True)
class LiteralObject:
    value: str  # an ARN or "*"

    def render(self) -> str:
        return self.value


@dataclass(frozen=True)
class FgLine:
    effect: Effect
    subject: Subject
    verb: str  # a VERB_ACTIONS key or a literal service:Action
    object: BucketObject | LiteralObject

    @property
    def actions(self) -> tuple[str, ...]:
        return VERB_ACTIONS.get(self.verb, (self.verb,))

    def render(self) -> str:
        return " ".join((self.effect.value.upper(), self.subject.render(), self.verb, self.object.render()))


@dataclass(frozen=True)
class FgSpec:
    lines: tuple[FgLine, ...]
    account_id: str = ACCOUNT_PLACEHOLDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise ValueError("a specification needs at least one line")


def _strip_comment(text: str) -> str:
    i = text.find("#")
    return text if i < 0 else text[:i]


def _tokens(text: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]


def _parse_subject(tok: str, lineno: int, col: int) -> Subject:
    if tok.lower() == "any":
        return Subject("any")
    kind, sep, name = tok.partition(":")
    if not sep:
        raise FgSyntaxError(f"expected 'kind:name' or 'any' for subject, got {tok!r}", lineno, col)
    if kind.lower() not in SUBJECT_KINDS:
        raise UnknownSubjectKind(f"unknown subject kind {kind!r}", lineno, col)
    if not name:
        raise FgSyntaxError("subject name is empty", lineno, col + len(kind) + 1)
    return Subject(kind.lower(), name)


def _parse_verb(tok: str, lineno: int, col: int) -> str:
    if tok.upper() in VERB_ACTIONS:
        return tok.upper()
    if ":" not in tok:
        raise UnknownVerb(f"unknown verb {tok!r}", lineno, col)
    try:
        Request("x", tok, "x")
    except InvalidRequest as exc:
        raise FgSyntaxError(f"invalid literal action {tok!r}: {exc}", lineno, col) from None
    return tok


def _parse_object(tok: str, lineno: int, col: int) -> BucketObject | LiteralObject:
    if tok == "*":
        return LiteralObject("*")
    if tok.lower().startswith("bucket:"):
        rest = tok[len("bucket:"):]
        bucket, slash, key = rest.partition("/")
        if not _BUCKET_RE.match(bucket):
            raise FgSyntaxError(f"invalid bucket name {bucket!r}", lineno, col + len("bucket:"))
        return BucketObject(bucket, key if slash else None)
    if tok.startswith("arn:"):
        return LiteralObject(tok)
    raise FgSyntaxError(f"expected 'bucket:<name>', an ARN or '*', got {tok!r}", lineno, col)


def parse_fgspec(text: str, account_id: str = ACCOUNT_PLACEHOLDER) -> FgSpec:
    """Parse fine-grained specification text; raises FgParseError subclasses with positions."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(_strip_comment(raw))
        if not toks:
            continue
        if len(toks) != 4:
            col = toks[4][1] if len(toks) > 4 else len(raw.rstrip()) + 1
            raise FgSyntaxError(f"expected 4 fields (effect subject verb object), got {len(toks)}", lineno, col)
        (eff, c1), (subj, c2), (verb, c3), (obj, c4) = toks
        if eff.upper() not in ("ALLOW", "DENY"):
            raise FgSyntaxError(f"expected ALLOW or DENY, got {eff!r}", lineno, c1)
        effect = Effect.ALLOW if eff.upper() == "ALLOW" else Effect.DENY
        lines.append(
            FgLine(effect, _parse_subject(subj, lineno, c2), _parse_verb(verb, lineno, c3), _parse_object(obj, lineno, c4))
        )
    if not lines:
        raise FgSyntaxError("specification is empty", 1, 1)
    return FgSpec(tuple(lines), account_id)


def render_fgspec(spec: FgSpec) -> str:
    return "".join(line.render() + "\n" for line in spec.lines)


def _principal(subject: Subject, account_id: str) -> str:
    if subject.kind == "any":
        return "*"
    if subject.kind == "service":
        return subject.name
    if subject.kind == "account":
        return f"arn:aws:iam::{subject.name}:root"
    return f"arn:aws:iam::{account_id}:{subject.kind}/{subject.name}"


def _resource(line: FgLine) -> str:
    obj = line.object
    if isinstance(obj, LiteralObject):
        return obj.value
    if line.verb == "LIST":
        return f"arn:aws:s3:::{obj.bucket}"
    return f"arn:aws:s3:::{obj.bucket}/{obj.key_glob}"


def compile_line(line: FgLine, account_id: str = ACCOUNT_PLACEHOLDER) -> Statement:
    return Statement(
        effect=line.effect,
        principal=Matcher((_principal(line.subject, account_id),)),
        action=Matcher(line.actions),
        resource=Matcher((_resource(line),)),
    )


def compile_fgspec(spec: FgSpec, account_id: str | None = None) -> Policy:
    """One statement per line, in line order."""
    account = account_id or spec.account_id
    return Policy(tuple(compile_line(line, account) for line in spec.lines))


def compile_text(text: str, account_id: str = ACCOUNT_PLACEHOLDER) -> str:
    return serialize_policy(compile_fgspec(parse_fgspec(text, account_id)), indent=2)
