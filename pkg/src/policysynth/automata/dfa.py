"""Minimal DFAs over a finite alphabet: glob compilation, boolean algebra, counting.

Every :class:`Dfa` is kept minimal and canonically numbered (breadth-first
from the start state, symbols in alphabet order), so two automata accept the
same language exactly when their tables are identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import AlphabetMismatch
from . import kernels
from .alphabet import Alphabet


@dataclass(frozen=True)
class CountResult:
    count: int
    length_bound: int

    def __int__(self) -> int:
        return self.count


class Dfa:
    """Immutable complete DFA with start state 0."""

    __slots__ = ("alphabet", "table", "accepting", "_key")

    def __init__(self, alphabet: Alphabet, table: np.ndarray, accepting: np.ndarray, *, minimal: bool = False):
        table = np.ascontiguousarray(table, dtype=np.int32)
        accepting = np.ascontiguousarray(accepting, dtype=np.uint8)
        if table.ndim != 2 or table.shape[1] != len(alphabet):
            raise ValueError("transition table must have one column per alphabet symbol")
        if accepting.shape != (table.shape[0],):
            raise ValueError("accepting flags must have one entry per state")
        if not minimal:
            table, accepting = kernels.minimize(table, accepting)
        table.setflags(write=False)
        accepting.setflags(write=False)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "accepting", accepting)
        object.__setattr__(self, "_key", (alphabet.symbols, table.shape, table.tobytes(), accepting.tobytes()))

    def __setattr__(self, name, value):
        raise AttributeError("Dfa is immutable")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dfa):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Dfa(states={self.num_states}, accepting={int(self.accepting.sum())}, alphabet={self.alphabet.ident})"

    @property
    def num_states(self) -> int:
        return self.table.shape[0]

    def accepts(self, text: str) -> bool:
        state = 0
        table = self.table
        for code in self.alphabet.encode(text):
            state = table[state, code]
        return bool(self.accepting[state])

    def accepts_many(self, texts: Iterable[str]) -> np.ndarray:
        texts = list(texts)
        codes = [self.alphabet.encode(t) for t in texts]
        offsets = np.zeros(len(codes) + 1, dtype=np.int64)
        if codes:
            offsets[1:] = np.cumsum([len(c) for c in codes])
            flat = np.concatenate(codes).astype(np.int32) if offsets[-1] else np.zeros(0, dtype=np.int32)
        else:
            flat = np.zeros(0, dtype=np.int32)
        return kernels.run_batch(self.table, self.accepting, flat, offsets).astype(bool)

    def to_dot(self, name: str = "dfa") -> str:
        """Graphviz rendering, merging parallel edges into one label."""
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  start [shape=point];', "  start -> s0;"]
        for s in range(self.num_states):
            shape = "doublecircle" if self.accepting[s] else "circle"
            lines.append(f"  s{s} [shape={shape}];")
        for s in range(self.num_states):
            edges: dict[int, list[str]] = {}
            for i, ch in enumerate(self.alphabet.symbols):
                edges.setdefault(int(self.table[s, i]), []).append(ch)
            for t, chars in edges.items():
                label = "".join(chars) if len(chars) < len(self.alphabet) else "Σ"
                label = label.replace("\\", "\\\\").replace('"', '\\"')
                lines.append(f'  s{s} -> s{t} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _constant(alphabet: Alphabet, accept: bool) -> Dfa:
    table = np.zeros((1, len(alphabet)), dtype=np.int32)
    return Dfa(alphabet, table, np.array([1 if accept else 0], dtype=np.uint8), minimal=True)


def all_strings(alphabet: Alphabet) -> Dfa:
    return _constant(alphabet, True)


def nothing(alphabet: Alphabet) -> Dfa:
    return _constant(alphabet, False)


def compile_glob(pattern: str, alphabet: Alphabet) -> Dfa:
    """DFA accepting exactly the strings over *alphabet* that *pattern* matches.

    Subset construction over the positions of the pattern. Symbols that do
    not occur literally in the pattern all behave alike, so transitions are
    computed once per distinct literal plus once for "anything else".
    """
    alphabet.check(pattern, pattern)
    n = len(pattern)
    star = [ch == "*" for ch in pattern]
    final = 1 << n

    def close(mask: int) -> int:
        for i in range(n):
            if star[i] and mask >> i & 1:
                mask |= 1 << (i + 1)
        return mask

    def step(mask: int, ch: str | None) -> int:
        out = 0
        for i in range(n):
            if mask >> i & 1:
                tok = pattern[i]
                if tok == "*":
                    out |= 1 << i
                elif tok == "?" or tok == ch:
                    out |= 1 << (i + 1)
        return close(out)

    literals = sorted({ch for ch in pattern if ch not in "*?"})
    sym_class = [ch if ch in literals else None for ch in alphabet.symbols]
    classes: list[str | None] = list(literals)
    if any(c is None for c in sym_class):
        classes.append(None)

    start = close(1)
    index = {start: 0}
    todo = [start]
    rows: list[list[int]] = []
    acc: list[int] = []
    while todo:
        mask = todo.pop(0)
        by_class = {}
        for cls in classes:
            nxt = step(mask, cls)
            if nxt not in index:
                index[nxt] = len(index)
                todo.append(nxt)
            by_class[cls] = index[nxt]
        rows.append([by_class[c] for c in sym_class])
        acc.append(1 if mask & final else 0)
    return Dfa(alphabet, np.asarray(rows, dtype=np.int32), np.asarray(acc, dtype=np.uint8))


def compile_globs(patterns: Iterable[str], alphabet: Alphabet) -> Dfa:
    """Union of several glob patterns."""
    out = nothing(alphabet)
    for p in patterns:
        out = union(out, compile_glob(p, alphabet))
    return out


def _binary(x: Dfa, y: Dfa, op: int) -> Dfa:
    if x.alphabet != y.alphabet:
        raise AlphabetMismatch(f"alphabets differ: {x.alphabet.ident} vs {y.alphabet.ident}")
    table, acc = kernels.product(x.table, x.accepting, y.table, y.accepting, op)
    return Dfa(x.alphabet, table, acc)


def union(x: Dfa, y: Dfa) -> Dfa:
    return _binary(x, y, kernels.OP_OR)


def intersect(x: Dfa, y: Dfa) -> Dfa:
    return _binary(x, y, kernels.OP_AND)


def difference(x: Dfa, y: Dfa) -> Dfa:
    return _binary(x, y, kernels.OP_DIFF)


def complement(x: Dfa) -> Dfa:
    acc = (1 - x.accepting).astype(np.uint8)
    return Dfa(x.alphabet, x.table.copy(), acc, minimal=True)


def is_empty(x: Dfa) -> bool:
    # minimal automata keep only reachable states
    return not bool(x.accepting.any())


def is_universal(x: Dfa) -> bool:
    return bool(x.accepting.all())


def equivalent(x: Dfa, y: Dfa) -> bool:
    return x == y


def counts_by_length(x: Dfa, k: int) -> list[int]:
    if k < 0:
        raise ValueError("length bound must be non-negative")
    return kernels.count_by_length(x.table, x.accepting, k)


def count_upto(x: Dfa, k: int) -> CountResult:
    """Exact number of accepted strings of length at most *k*."""
    return CountResult(sum(counts_by_length(x, k)), k)


def shortest_accepted(x: Dfa) -> str | None:
    """A shortest accepted string (alphabet-first order), or None if empty."""
    if is_empty(x):
        return None
    parent: dict[int, tuple[int, int]] = {}
    seen = {0}
    frontier = [0]
    while frontier:
        nxt_frontier = []
        for s in frontier:
            if x.accepting[s]:
                out = []
                while s in parent:
                    s, c = parent[s]
                    out.append(x.alphabet.symbols[c])
                return "".join(reversed(out))
            for c in range(len(x.alphabet)):
                t = int(x.table[s, c])
                if t not in seen:
                    seen.add(t)
                    parent[t] = (s, c)
                    nxt_frontier.append(t)
        frontier = nxt_frontier
    return None


def shortest_length(x: Dfa) -> int | None:
    w = shortest_accepted(x)
    return None if w is None else len(w)
