"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``POLICYSYNTH_PURE_PYTHON=1`` is set, the numpy implementation is used.
"""

from __future__ import annotations

import os

from . import _pykernels

python = _pykernels
compiled = None

if os.environ.get("POLICYSYNTH_PURE_PYTHON", "") not in ("", "0"):
    active = _pykernels
else:
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:
        active = _pykernels
    else:
        active = compiled

BACKEND = "compiled" if active is compiled else "python"

OP_AND = _pykernels.OP_AND
OP_OR = _pykernels.OP_OR
OP_DIFF = _pykernels.OP_DIFF
OP_XOR = _pykernels.OP_XOR


def use(name: str) -> None:
    """Switch the active backend at runtime (``"compiled"`` or ``"python"``)."""
    global active, BACKEND
    if name == "python":
        active = _pykernels
    elif name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available in this build")
        active = compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name


def product(t1, a1, t2, a2, op):
    return active.product(t1, a1, t2, a2, op)


def minimize(table, acc):
    return active.minimize(table, acc)


def count_by_length(table, acc, k):
    return active.count_by_length(table, acc, k)


def run_batch(table, acc, codes, offsets):
    return active.run_batch(table, acc, codes, offsets)
