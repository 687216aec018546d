"""Symbolic request sets, policy denotation and permissiveness comparison.

A :class:`RequestSet` is a finite union of *cubes*; a cube is a triple of
per-field automata ``(principal, action, resource)`` and stands for their
Cartesian product. Cubes are clipped to the universe of well-formed requests:
non-empty principal and resource, and an action of the form
``service:operation`` written in lower case (actions match case-insensitively,
so the lower-case spelling is the representative of each action).
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .automata import Alphabet, CountResult, Dfa
from .automata import dfa as fa
from .errors import AlphabetMismatch, BoundTooSmall, CharOutsideAlphabet, EmptySpecification
from .policy import FIELDS, Decision, Effect, Matcher, Policy, Request, evaluate, normalize_field

Cube = tuple[Dfa, Dfa, Dfa]

_and = functools.lru_cache(maxsize=65536)(fa.intersect)
_minus = functools.lru_cache(maxsize=65536)(fa.difference)


@functools.lru_cache(maxsize=65536)
def _count(d: Dfa, k: int) -> int:
    return fa.count_upto(d, k).count


@functools.lru_cache(maxsize=256)
def field_universe(kind: str, alphabet: Alphabet) -> Dfa:
    """Strings that can appear in field *kind* of a well-formed request."""
    if kind != "action":
        return fa.compile_glob("?*", alphabet)
    if ":" not in alphabet:
        return fa.nothing(alphabet)
    folded = np.zeros((2, len(alphabet)), dtype=np.int32)
    for i, ch in enumerate(alphabet.symbols):
        folded[0, i] = 0 if ch.lower() == ch else 1
        folded[1, i] = 1
    lower = Dfa(alphabet, folded, np.array([1, 0], dtype=np.uint8))
    one_colon = _minus(fa.compile_glob("?*:?*", alphabet), fa.compile_glob("*:*:*", alphabet))
    return _and(one_colon, lower)


@functools.lru_cache(maxsize=65536)
def _matcher_dfa(kind: str, patterns: tuple[str, ...], negated: bool, alphabet: Alphabet) -> Dfa:
    d = fa.compile_globs([normalize_field(kind, p) for p in patterns], alphabet)
    if negated:
        d = fa.complement(d)
    return _and(d, field_universe(kind, alphabet))


def matcher_dfa(m: Matcher, kind: str, alphabet: Alphabet) -> Dfa:
    return _matcher_dfa(kind, m.patterns, m.negated, alphabet)


def _cube_minus(c: Cube, d: Cube) -> list[Cube]:
    """``c - d`` as a list of pairwise disjoint cubes."""
    inter = [_and(c[i], d[i]) for i in range(3)]
    if any(fa.is_empty(x) for x in inter):
        return [c]
    pieces: list[Cube] = []
    prefix = list(c)
    for i in range(3):
        rest = _minus(c[i], d[i])
        if not fa.is_empty(rest):
            piece = list(prefix)
            piece[i] = rest
            pieces.append(tuple(piece))  # type: ignore[arg-type]
        prefix[i] = inter[i]
    return pieces


def _nonempty(c: Cube) -> bool:
    return not any(fa.is_empty(x) for x in c)


@dataclass(frozen=True)
class RequestSet:
    """A set of requests as a union of per-field automaton cubes."""

    alphabet: Alphabet
    cubes: tuple[Cube, ...] = ()

    def __post_init__(self) -> None:
        cubes = tuple(c for c in self.cubes if _nonempty(c))
        for c in cubes:
            if any(x.alphabet != self.alphabet for x in c):
                raise ValueError("cube built over a different alphabet")
        object.__setattr__(self, "cubes", cubes)

    @classmethod
    def empty(cls, alphabet: Alphabet) -> RequestSet:
        return cls(alphabet)

    @classmethod
    def universe(cls, alphabet: Alphabet) -> RequestSet:
        return cls(alphabet, (tuple(field_universe(k, alphabet) for k in FIELDS),))  # type: ignore[arg-type]

    def _check(self, other: RequestSet) -> None:
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("request sets use different alphabets")

    def union(self, other: RequestSet) -> RequestSet:
        self._check(other)
        return RequestSet(self.alphabet, self.cubes + other.cubes)

    def intersect(self, other: RequestSet) -> RequestSet:
        self._check(other)
        out = []
        for c in self.cubes:
            for d in other.cubes:
                out.append(tuple(_and(c[i], d[i]) for i in range(3)))
        return RequestSet(self.alphabet, tuple(out))

    def difference(self, other: RequestSet) -> RequestSet:
        self._check(other)
        cubes = list(self.cubes)
        for d in other.cubes:
            nxt: list[Cube] = []
            for c in cubes:
                nxt.extend(_cube_minus(c, d))
            cubes = nxt
            if not cubes:
                break
        return RequestSet(self.alphabet, tuple(cubes))

    def complement(self) -> RequestSet:
        return RequestSet.universe(self.alphabet).difference(self)

    def is_empty(self) -> bool:
        # empty cubes are dropped on construction
        return not self.cubes

    def contains(self, principal: str, action: str, resource: str) -> bool:
        values = (principal, normalize_field("action", action), resource)
        if any(self.alphabet.missing(v) or "*" in v or "?" in v for v in values):
            return False
        return any(all(c[i].accepts(values[i]) for i in range(3)) for c in self.cubes)

    def __contains__(self, request: Request) -> bool:
        return self.contains(request.principal, request.action, request.resource)

    def disjoint_cubes(self) -> list[Cube]:
        out: list[Cube] = []
        for c in self.cubes:
            pieces = [c]
            for d in out:
                pieces = [p for q in pieces for p in _cube_minus(q, d)]
                if not pieces:
                    break
            out.extend(pieces)
        return out

    def count(self, k: int) -> CountResult:
        """Number of member requests whose three fields each have length <= *k*."""
        if k < 0:
            raise ValueError("length bound must be non-negative")
        total = 0
        for c in self.disjoint_cubes():
            total += _count(c[0], k) * _count(c[1], k) * _count(c[2], k)
        return CountResult(total, k)

    def witness(self) -> tuple[str, str, str] | None:
        """Some member request (shortest per field), or None when empty."""
        if not self.cubes:
            return None
        c = self.cubes[0]
        return tuple(fa.shortest_accepted(x) for x in c)  # type: ignore[return-value]

    def shortest_witness_length(self) -> int | None:
        """Smallest achievable max field length over members (the bound needed to count one)."""
        best = None
        for c in self.cubes:
            longest = max(len(fa.shortest_accepted(x)) for x in c)  # type: ignore[arg-type]
            best = longest if best is None else min(best, longest)
        return best


# -- policies ---------------------------------------------------------------


def policy_chars(*policies: Policy) -> str:
    chars = set()
    for p in policies:
        for kind, pattern in p.literals():
            chars.update(normalize_field(kind, pattern))
    chars.discard("*")
    chars.discard("?")
    return "".join(sorted(chars))


def alphabet_for(*policies: Policy, base: Alphabet | None = None) -> Alphabet:
    """Default alphabet extended with every literal character of *policies*."""
    return (base or Alphabet.default()).extended(policy_chars(*policies))


def longest_literal(*policies: Policy) -> int:
    """Length of the shortest string matching the longest pattern, over all patterns."""
    best = 0
    for p in policies:
        for _, pattern in p.literals():
            best = max(best, len(pattern) - pattern.count("*"))
    return best


def default_bound(*policies: Policy) -> int:
    return longest_literal(*policies) + 5


def _statement_cube(st, alphabet: Alphabet) -> Cube:
    return tuple(matcher_dfa(st.matcher(k), k, alphabet) for k in FIELDS)  # type: ignore[return-value]


def denote(policy: Policy, alphabet: Alphabet | None = None) -> RequestSet:
    """The set of requests *policy* allows: allowed cubes minus denied cubes."""
    alphabet = alphabet or alphabet_for(policy)
    for kind, pattern in policy.literals():
        bad = alphabet.missing(normalize_field(kind, pattern))
        if bad:
            raise CharOutsideAlphabet(bad, pattern)
    allow = RequestSet(
        alphabet, tuple(_statement_cube(s, alphabet) for s in policy.statements if s.effect is Effect.ALLOW)
    )
    deny = RequestSet(
        alphabet, tuple(_statement_cube(s, alphabet) for s in policy.statements if s.effect is Effect.DENY)
    )
    return allow.difference(deny)


class Relation(enum.Enum):
    EQUIVALENT = "Equivalent"
    FIRST_STRICTLY_MORE = "FirstStrictlyMore"
    SECOND_STRICTLY_MORE = "SecondStrictlyMore"
    INCOMPARABLE = "Incomparable"

    def mirrored(self) -> Relation:
        if self is Relation.FIRST_STRICTLY_MORE:
            return Relation.SECOND_STRICTLY_MORE
        if self is Relation.SECOND_STRICTLY_MORE:
            return Relation.FIRST_STRICTLY_MORE
        return self


def relation_from(first_nonempty: bool, second_nonempty: bool) -> Relation:
    if first_nonempty and second_nonempty:
        return Relation.INCOMPARABLE
    if first_nonempty:
        return Relation.FIRST_STRICTLY_MORE
    if second_nonempty:
        return Relation.SECOND_STRICTLY_MORE
    return Relation.EQUIVALENT


@dataclass(frozen=True)
class ComparisonVerdict:
    relation: Relation
    only_in_first: CountResult
    only_in_second: CountResult
    alphabet: Alphabet
    witness_first: tuple[str, str, str] | None = field(default=None, compare=False)
    witness_second: tuple[str, str, str] | None = field(default=None, compare=False)

    @property
    def bound(self) -> int:
        return self.only_in_first.length_bound

    def to_dict(self) -> dict[str, object]:
        return {
            "relation": self.relation.value,
            "only_in_first": str(self.only_in_first.count),
            "only_in_second": str(self.only_in_second.count),
            "bound": self.bound,
            "alphabet": self.alphabet.ident,
        }


def compare(
    p1: Policy,
    p2: Policy,
    alphabet: Alphabet | None = None,
    bound: int | None = None,
) -> ComparisonVerdict:
    """Four-way permissiveness relation of *p1* versus *p2* plus difference counts.

    The relation is decided by emptiness over unbounded strings. Counts only
    cover requests whose fields are at most *bound* long; a bound that would
    report zero for a non-empty difference is rejected with BoundTooSmall.
    """
    alphabet = alphabet or alphabet_for(p1, p2)
    need = longest_literal(p1, p2)
    if bound is None:
        bound = need + 5
    if bound < need:
        raise BoundTooSmall(f"bound {bound} is shorter than a literal of length {need}")
    s1 = denote(p1, alphabet)
    s2 = denote(p2, alphabet)
    d1 = s1.difference(s2)
    d2 = s2.difference(s1)
    c1 = d1.count(bound)
    c2 = d2.count(bound)
    for d, c in ((d1, c1), (d2, c2)):
        if not d.is_empty() and c.count == 0:
            raise BoundTooSmall(
                f"difference is non-empty but has no member within bound {bound}; "
                f"needs at least {d.shortest_witness_length()}"
            )
    return ComparisonVerdict(
        relation=relation_from(not d1.is_empty(), not d2.is_empty()),
        only_in_first=c1,
        only_in_second=c2,
        alphabet=alphabet,
        witness_first=d1.witness(),
        witness_second=d2.witness(),
    )


def permissiveness(policy: Policy, bound: int | None = None, alphabet: Alphabet | None = None) -> CountResult:
    """Number of requests *policy* allows within the field-length bound."""
    alphabet = alphabet or alphabet_for(policy)
    need = longest_literal(policy)
    if bound is None:
        bound = need + 5
    if bound < need:
        raise BoundTooSmall(f"bound {bound} is shorter than a literal of length {need}")
    return denote(policy, alphabet).count(bound)


# -- request classification ------------------------------------------------


@dataclass(frozen=True)
class ClassifiedRequest:
    request: Request
    expected_allowed: bool
    decision: Decision

    @property
    def correct(self) -> bool:
        return (self.decision is Decision.ALLOWED) == self.expected_allowed

    def to_dict(self) -> dict[str, object]:
        return {
            **self.request.to_dict(),
            "expected": "allow" if self.expected_allowed else "deny",
            "decision": self.decision.value,
            "correct": self.correct,
        }


@dataclass(frozen=True)
class Classification:
    rows: tuple[ClassifiedRequest, ...]

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def correct(self) -> int:
        return sum(r.correct for r in self.rows)

    @property
    def misclassified(self) -> int:
        return self.total - self.correct

    @property
    def rate(self) -> Fraction:
        return Fraction(self.correct, self.total)

    @property
    def rate_decimal(self) -> str:
        return format_rate(self.rate)

    def failures(self) -> list[ClassifiedRequest]:
        return [r for r in self.rows if not r.correct]

    def to_dict(self) -> dict[str, object]:
        return {
            "total": self.total,
            "correct": self.correct,
            "rate": f"{self.rate.numerator}/{self.rate.denominator}",
            "rate_decimal": self.rate_decimal,
            "rows": [r.to_dict() for r in self.rows],
        }


def format_rate(rate: Fraction, places: int = 6) -> str:
    value = Decimal(rate.numerator) / Decimal(rate.denominator)
    return f"{value:.{places}f}"


def classify_requests(policy: Policy, allowed: Sequence[Request], denied: Sequence[Request]) -> Classification:
    """Check each request of a concrete specification against *policy*."""
    if not allowed and not denied:
        raise EmptySpecification("specification has no requests")
    overlap = set(allowed) & set(denied)
    if overlap:
        raise ValueError(f"requests listed as both allowed and denied: {sorted(overlap, key=str)[:3]}")
    rows = [ClassifiedRequest(r, True, evaluate(policy, r)) for r in allowed]
    rows += [ClassifiedRequest(r, False, evaluate(policy, r)) for r in denied]
    return Classification(tuple(rows))

