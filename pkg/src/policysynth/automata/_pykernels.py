"""Pure-Python/numpy implementation of the automaton kernels.

Mirrors ``_ckernels.pyx`` function for function. Tables are ``int32`` arrays
of shape ``(n_states, n_symbols)``, accepting flags ``uint8`` arrays, and the
start state is always 0.
"""

from __future__ import annotations

from collections import deque

import numpy as np

OP_AND = 0
OP_OR = 1
OP_DIFF = 2
OP_XOR = 3


def _combine(op: int, x: bool, y: bool) -> bool:
    if op == OP_AND:
        return x and y
    if op == OP_OR:
        return x or y
    if op == OP_DIFF:
        return x and not y
    return x != y


def product(t1, a1, t2, a2, op):
    """Reachable part of the product automaton, BFS-numbered from (0, 0)."""
    m = t1.shape[1]
    rows1 = t1.tolist()
    rows2 = t2.tolist()
    acc1 = a1.tolist()
    acc2 = a2.tolist()
    index = {(0, 0): 0}
    queue = deque([(0, 0)])
    rows: list[list[int]] = []
    acc: list[int] = []
    while queue:
        p, q = queue.popleft()
        r1, r2 = rows1[p], rows2[q]
        row = [0] * m
        for c in range(m):
            key = (r1[c], r2[c])
            nxt = index.get(key)
            if nxt is None:
                nxt = index[key] = len(index)
                queue.append(key)
            row[c] = nxt
        rows.append(row)
        acc.append(1 if _combine(op, bool(acc1[p]), bool(acc2[q])) else 0)
    return np.asarray(rows, dtype=np.int32).reshape(len(rows), m), np.asarray(acc, dtype=np.uint8)


def _bfs_order(table, start):
    order = [start]
    seen = {start}
    i = 0
    rows = table.tolist()
    while i < len(order):
        for nxt in rows[order[i]]:
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
        i += 1
    return order


def minimize(table, acc):
    """Minimal complete DFA in canonical (BFS from start, symbol order) numbering."""
    order = _bfs_order(table, 0)
    remap = np.full(table.shape[0], -1, dtype=np.int64)
    remap[order] = np.arange(len(order))
    t = remap[table[order]]
    a = acc[order].astype(np.int64)

    cls = a.copy()
    n_cls = len(np.unique(cls))
    while True:
        sig = np.column_stack([cls, cls[t]])
        _, new = np.unique(sig, axis=0, return_inverse=True)
        new = new.reshape(-1)
        n_new = int(new.max()) + 1
        cls = new
        if n_new == n_cls:
            break
        n_cls = n_new

    reps = np.zeros(n_cls, dtype=np.int64)
    reps[cls[::-1]] = np.arange(len(cls))[::-1]
    qt = cls[t[reps]]
    qa = a[reps]
    order = _bfs_order(qt, int(cls[0]))
    remap = np.full(n_cls, -1, dtype=np.int64)
    remap[order] = np.arange(len(order))
    out_t = remap[qt[order]].astype(np.int32)
    out_a = qa[order].astype(np.uint8)
    return np.ascontiguousarray(out_t), out_a


def count_by_length(table, acc, k):
    """Number of accepted strings of each exact length 0..k (Python ints)."""
    n = table.shape[0]
    moves: list[list[tuple[int, int]]] = []
    for row in table.tolist():
        mult: dict[int, int] = {}
        for nxt in row:
            mult[nxt] = mult.get(nxt, 0) + 1
        moves.append(list(mult.items()))
    accepting = [s for s in range(n) if acc[s]]
    cur = [0] * n
    cur[0] = 1
    out = []
    for length in range(k + 1):
        out.append(sum(cur[s] for s in accepting))
        if length == k:
            break
        nxt_counts = [0] * n
        for s in range(n):
            c = cur[s]
            if c:
                for t, m in moves[s]:
                    nxt_counts[t] += c * m
        cur = nxt_counts
    return out


def run_batch(table, acc, codes, offsets):
    """Acceptance of many encoded strings; string i is ``codes[offsets[i]:offsets[i+1]]``."""
    rows = table.tolist()
    codes = codes.tolist()
    offsets = offsets.tolist()
    out = np.zeros(len(offsets) - 1, dtype=np.uint8)
    for i in range(len(offsets) - 1):
        s = 0
        for j in range(offsets[i], offsets[i + 1]):
            s = rows[s][codes[j]]
        out[i] = acc[s]
    return out
