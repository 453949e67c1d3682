# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled max-plus kernels; same contract as ``_kernels_py``."""


def maxplus(list a, Py_ssize_t alo, list b, Py_ssize_t blo, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t na = len(a), nb = len(b)
    cdef Py_ssize_t ahi = alo + na - 1, bhi = blo + nb - 1
    cdef Py_ssize_t i, ip, p, q, arg
    cdef object best, x, y, s
    cdef list vals = [], splits = []
    for i in range(lo, hi + 1):
        p = alo if alo > i - bhi else i - bhi
        q = ahi if ahi < i - blo else i - blo
        best = None
        arg = -1
        for ip in range(p, q + 1):
            x = a[ip - alo]
            if x is None:
                continue
            y = b[i - ip - blo]
            if y is None:
                continue
            s = x + y
            if best is None or s > best:
                best = s
                arg = ip
        vals.append(best)
        splits.append(None if best is None else arg)
    return vals, splits


def window_max(object c, Py_ssize_t clo, Py_ssize_t chi, list b, Py_ssize_t blo, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t nb = len(b)
    cdef Py_ssize_t bhi = blo + nb - 1
    cdef Py_ssize_t i, jlo, jhi, j, nxt = blo, head = 0
    cdef list dq = []
    cdef list vals = [], splits = []
    cdef object x
    for i in range(lo, hi + 1):
        jlo = blo if blo > i - chi else i - chi
        jhi = bhi if bhi < i - clo else i - clo
        while nxt <= jhi:
            x = b[nxt - blo]
            if x is not None:
                while len(dq) > head and b[<Py_ssize_t>dq[len(dq) - 1] - blo] <= x:
                    dq.pop()
                dq.append(nxt)
            nxt += 1
        while len(dq) > head and <Py_ssize_t>dq[head] < jlo:
            head += 1
        if len(dq) > head and jlo <= jhi:
            j = dq[head]
            vals.append(c + b[j - blo])
            splits.append(i - j)
        else:
            vals.append(None)
            splits.append(None)
    return vals, splits
