from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import CharOutsideAlphabet

DEFAULT_SYMBOLS = "abcdefghijklmnopqrstuvwxyz0123456789/:-_.,"
METACHARS = frozenset("*?")


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of characters that every automaton is built over."""

    symbols: str

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("alphabet must not be empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet has duplicate symbols")
        if METACHARS.intersection(self.symbols):
            raise ValueError("alphabet must not contain '*' or '?'")

    @classmethod
    def default(cls) -> Alphabet:
        return cls(DEFAULT_SYMBOLS)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, ch: str) -> bool:
        return ch in self._index

    def __iter__(self):
        return iter(self.symbols)

    @functools.cached_property
    def _index(self) -> dict[str, int]:
        return {ch: i for i, ch in enumerate(self.symbols)}

    @functools.cached_property
    def ident(self) -> str:
        digest = hashlib.sha256(self.symbols.encode("utf-8")).hexdigest()[:12]
        return f"{len(self.symbols)}:{digest}"

    def index(self, ch: str) -> int:
        return self._index[ch]

    def missing(self, text: str) -> str:
        """Characters of *text* (wildcards excluded) that are not in the alphabet."""
        seen = []
        for ch in text:
            if ch not in self._index and ch not in METACHARS and ch not in seen:
                seen.append(ch)
        return "".join(seen)

    def check(self, text: str, where: str = "") -> None:
        bad = self.missing(text)
        if bad:
            raise CharOutsideAlphabet(bad, where or text)

    def encode(self, text: str) -> np.ndarray:
        self.check(text)
        idx = self._index
        return np.fromiter((idx[ch] for ch in text), dtype=np.int32, count=len(text))

    def extended(self, chars: Iterable[str]) -> Alphabet:
        """This alphabet plus any new non-wildcard characters, appended in sorted order."""
        extra = sorted({ch for ch in "".join(chars) if ch not in self._index and ch not in METACHARS})
        if not extra:
            return self
        return Alphabet(self.symbols + "".join(extra))

    def to_dict(self) -> dict[str, object]:
        return {"id": self.ident, "size": len(self.symbols), "symbols": self.symbols}
