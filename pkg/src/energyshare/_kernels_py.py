"""Pure-Python max-plus kernels (fallback for the compiled ``_kernels``).

Tables are plain lists indexed from their lower balance bound; ``None``
stands for an unattainable entry.  Values may be any ordered exact
number type (``Fraction`` or ``gmpy2.mpq``).
"""
from collections import deque


def maxplus(a, alo, b, blo, lo, hi):
    """``out[i] = max_{i'+i''=i} a[i'] + b[i'']`` for i in [lo, hi].

    Returns ``(values, splits)`` where ``splits[i - lo]`` is the winning
    ``i'`` (smallest on ties) or ``None``.
    """
    na, nb = len(a), len(b)
    ahi, bhi = alo + na - 1, blo + nb - 1
    vals = []
    splits = []
    for i in range(lo, hi + 1):
        p = max(alo, i - bhi)
        q = min(ahi, i - blo)
        best = None
        arg = None
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
        splits.append(arg)
    return vals, splits


def window_max(c, clo, chi, b, blo, lo, hi):
    """``out[i] = c + max_{i' in [clo, chi]} b[i - i']`` for i in [lo, hi].

    Used when one child table is the constant ``c`` over [clo, chi]; the
    maximum over a sliding window is kept in a monotone deque, so the
    whole pass is linear.  ``splits`` holds the winning constant-side
    ``i'`` (largest index of ``b`` on ties, i.e. smallest ``i'``).
    """
    nb = len(b)
    bhi = blo + nb - 1
    vals = []
    splits = []
    dq = deque()  # indices j of b, values decreasing
    nxt = blo     # next b index to push
    for i in range(lo, hi + 1):
        jlo = max(blo, i - chi)
        jhi = min(bhi, i - clo)
        while nxt <= jhi:
            x = b[nxt - blo]
            if x is not None:
                while dq and b[dq[-1] - blo] <= x:
                    dq.pop()
                dq.append(nxt)
            nxt += 1
        while dq and dq[0] < jlo:
            dq.popleft()
        if dq and jlo <= jhi:
            j = dq[0]
            vals.append(c + b[j - blo])
            splits.append(i - j)
        else:
            vals.append(None)
            splits.append(None)
    return vals, splits
