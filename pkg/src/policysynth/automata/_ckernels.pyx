# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled automaton kernels. Same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t i32
ctypedef cnp.uint8_t u8


cdef inline bint _combine(int op, bint x, bint y) nogil:
    if op == 0:
        return x and y
    if op == 1:
        return x or y
    if op == 2:
        return x and not y
    return x != y


def product(const i32[:, ::1] t1, const u8[::1] a1, const i32[:, ::1] t2, const u8[::1] a2, int op):
    cdef Py_ssize_t n1 = t1.shape[0], n2 = t2.shape[0], m = t1.shape[1]
    cdef cnp.ndarray[i32, ndim=1] index_arr = np.full(n1 * n2, -1, dtype=np.int32)
    cdef i32[::1] index = index_arr
    cdef cnp.ndarray[i32, ndim=1] qp_arr = np.empty(n1 * n2, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] qq_arr = np.empty(n1 * n2, dtype=np.int32)
    cdef i32[::1] qp = qp_arr
    cdef i32[::1] qq = qq_arr
    cdef cnp.ndarray[i32, ndim=2] out_arr = np.empty((n1 * n2, m), dtype=np.int32)
    cdef i32[:, ::1] out = out_arr
    cdef cnp.ndarray[u8, ndim=1] acc_arr = np.empty(n1 * n2, dtype=np.uint8)
    cdef u8[::1] acc = acc_arr
    cdef Py_ssize_t head = 0, tail = 1, c
    cdef i32 p, q, key, nxt
    index[0] = 0
    qp[0] = 0
    qq[0] = 0
    with nogil:
        while head < tail:
            p = qp[head]
            q = qq[head]
            for c in range(m):
                key = t1[p, c] * <i32>n2 + t2[q, c]
                nxt = index[key]
                if nxt < 0:
                    nxt = <i32>tail
                    index[key] = nxt
                    qp[tail] = t1[p, c]
                    qq[tail] = t2[q, c]
                    tail += 1
                out[head, c] = nxt
            acc[head] = 1 if _combine(op, a1[p] != 0, a2[q] != 0) else 0
            head += 1
    return np.ascontiguousarray(out_arr[:tail]), acc_arr[:tail].copy()


cdef Py_ssize_t _bfs(const i32[:, ::1] t, i32 start, i32[::1] order, i32[::1] remap) nogil:
    cdef Py_ssize_t n = t.shape[0], m = t.shape[1], head = 0, tail = 1, c
    cdef i32 s, nxt
    for c in range(n):
        remap[c] = -1
    order[0] = start
    remap[start] = 0
    while head < tail:
        s = order[head]
        for c in range(m):
            nxt = t[s, c]
            if remap[nxt] < 0:
                remap[nxt] = <i32>tail
                order[tail] = nxt
                tail += 1
        head += 1
    return tail


cdef Py_ssize_t _refine(i32[::1] cls, i32[::1] key, Py_ssize_t n, Py_ssize_t k,
                        i32[::1] count, i32[::1] buf, i32[::1] order, i32[::1] out) nogil:
    """Relabel states by the pair (cls, key); both take values in [0, k)."""
    cdef Py_ssize_t i, j, total, nid
    cdef i32 v
    # stable counting sort by key, then by cls
    for j in range(k + 1):
        count[j] = 0
    for i in range(n):
        count[key[i] + 1] += 1
    for j in range(k):
        count[j + 1] += count[j]
    for i in range(n):
        v = key[i]
        buf[count[v]] = <i32>i
        count[v] += 1
    for j in range(k + 1):
        count[j] = 0
    for i in range(n):
        count[cls[i] + 1] += 1
    for j in range(k):
        count[j + 1] += count[j]
    for j in range(n):
        i = buf[j]
        v = cls[i]
        order[count[v]] = <i32>i
        count[v] += 1
    nid = -1
    for j in range(n):
        i = order[j]
        if j == 0 or cls[i] != cls[order[j - 1]] or key[i] != key[order[j - 1]]:
            nid += 1
        out[i] = <i32>nid
    return nid + 1


def minimize(const i32[:, ::1] table, const u8[::1] acc):
    cdef Py_ssize_t n0 = table.shape[0], m = table.shape[1], n, i, c, n_cls, prev, n_new
    cdef cnp.ndarray[i32, ndim=1] order_arr = np.empty(n0, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] remap_arr = np.empty(n0, dtype=np.int32)
    cdef i32[::1] order = order_arr
    cdef i32[::1] remap = remap_arr
    n = _bfs(table, 0, order, remap)

    cdef cnp.ndarray[i32, ndim=2] t_arr = np.empty((n, m), dtype=np.int32)
    cdef i32[:, ::1] t = t_arr
    cdef cnp.ndarray[i32, ndim=1] cls_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] cls = cls_arr
    cdef cnp.ndarray[i32, ndim=1] key_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] key = key_arr
    cdef cnp.ndarray[i32, ndim=1] tmp_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] tmp = tmp_arr
    cdef i32[::1] count = np.empty(n + 2, dtype=np.int32)
    cdef i32[::1] buf = np.empty(n, dtype=np.int32)
    cdef i32[::1] order2 = np.empty(n, dtype=np.int32)
    cdef bint has_acc = False, has_rej = False

    with nogil:
        for i in range(n):
            for c in range(m):
                t[i, c] = remap[table[order[i], c]]
            cls[i] = 1 if acc[order[i]] else 0
            if cls[i]:
                has_acc = True
            else:
                has_rej = True
        n_cls = (1 if has_acc else 0) + (1 if has_rej else 0)
        if not has_rej:
            for i in range(n):
                cls[i] = 0
        while True:
            prev = n_cls
            for c in range(m):
                for i in range(n):
                    key[i] = cls[t[i, c]]
                n_new = _refine(cls, key, n, n_cls, count, buf, order2, tmp)
                for i in range(n):
                    cls[i] = tmp[i]
                n_cls = n_new
            if n_cls == prev:
                break

    # quotient
    cdef cnp.ndarray[i32, ndim=2] qt_arr = np.empty((n_cls, m), dtype=np.int32)
    cdef i32[:, ::1] qt = qt_arr
    cdef cnp.ndarray[u8, ndim=1] qa_arr = np.empty(n_cls, dtype=np.uint8)
    cdef u8[::1] qa = qa_arr
    with nogil:
        for i in range(n - 1, -1, -1):
            for c in range(m):
                qt[cls[i], c] = cls[t[i, c]]
            qa[cls[i]] = acc[order[i]]

    cdef cnp.ndarray[i32, ndim=1] o3_arr = np.empty(n_cls, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] r3_arr = np.empty(n_cls, dtype=np.int32)
    cdef i32[::1] o3 = o3_arr
    cdef i32[::1] r3 = r3_arr
    cdef cnp.ndarray[i32, ndim=2] out_arr = np.empty((n_cls, m), dtype=np.int32)
    cdef i32[:, ::1] out = out_arr
    cdef cnp.ndarray[u8, ndim=1] oa_arr = np.empty(n_cls, dtype=np.uint8)
    cdef u8[::1] oa = oa_arr
    with nogil:
        _bfs(qt, cls[0], o3, r3)
        for i in range(n_cls):
            for c in range(m):
                out[i, c] = r3[qt[o3[i], c]]
            oa[i] = qa[o3[i]]
    return out_arr, oa_arr


def count_by_length(const i32[:, ::1] table, const u8[::1] acc, Py_ssize_t k):
    cdef Py_ssize_t n = table.shape[0], m = table.shape[1], s, c, j, length
    cdef list succ = []
    cdef list mult = []
    cdef dict d
    for s in range(n):
        d = {}
        for c in range(m):
            j = table[s, c]
            d[j] = d.get(j, 0) + 1
        succ.append(list(d.keys()))
        mult.append(list(d.values()))
    cdef list cur = [0] * n
    cdef list nxt
    cdef list out = []
    cdef list ss, mm
    cdef object total, cnt
    cur[0] = 1
    for length in range(k + 1):
        total = 0
        for s in range(n):
            if acc[s]:
                total += cur[s]
        out.append(total)
        if length == k:
            break
        nxt = [0] * n
        for s in range(n):
            cnt = cur[s]
            if cnt:
                ss = succ[s]
                mm = mult[s]
                for j in range(len(ss)):
                    nxt[ss[j]] += cnt * mm[j]
        cur = nxt
    return out


def run_batch(const i32[:, ::1] table, const u8[::1] acc, const i32[::1] codes, const cnp.int64_t[::1] offsets):
    cdef Py_ssize_t n = offsets.shape[0] - 1, i, j
    cdef i32 s
    cdef cnp.ndarray[u8, ndim=1] out_arr = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] out = out_arr
    with nogil:
        for i in range(n):
            s = 0
            for j in range(offsets[i], offsets[i + 1]):
                s = table[s, codes[j]]
            out[i] = acc[s]
    return out_arr
