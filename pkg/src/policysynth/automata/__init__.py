"""Glob-to-DFA compilation, DFA boolean algebra and bounded model counting."""

from .alphabet import DEFAULT_SYMBOLS, Alphabet
from .dfa import (
    CountResult,
    Dfa,
    all_strings,
    complement,
    compile_glob,
    compile_globs,
    count_upto,
    counts_by_length,
    difference,
    equivalent,
    intersect,
    is_empty,
    is_universal,
    nothing,
    shortest_accepted,
    union,
)
from .kernels import BACKEND

__all__ = [
    "Alphabet",
    "BACKEND",
    "CountResult",
    "DEFAULT_SYMBOLS",
    "Dfa",
    "all_strings",
    "complement",
    "compile_glob",
    "compile_globs",
    "count_upto",
    "counts_by_length",
    "difference",
    "equivalent",
    "intersect",
    "is_empty",
    "is_universal",
    "nothing",
    "shortest_accepted",
    "union",
]
