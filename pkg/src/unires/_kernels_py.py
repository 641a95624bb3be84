"""Pure-Python elimination kernels over a prime field.

Reference implementations of the two hot primitives: dense and sparse rank
computation mod p.  The compiled extension (``unires._kernels``) provides
the same two functions with identical signatures and results; whichever is
available gets picked in :mod:`unires.kernels`.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def rank_mod_p_dense(a, p):
    """Rank of an int64 2-D array over F_p.  ``a`` is consumed."""
    a = np.ascontiguousarray(a, dtype=np.int64) % p
    m, n = a.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, c:] = (a[r, c:] * inv) % p
        col = a[r + 1 :, c]
        hit = np.nonzero(col)[0]
        if hit.size:
            a[r + 1 + hit, c:] = (
                a[r + 1 + hit, c:] - np.outer(col[hit], a[r, c:])
            ) % p
        r += 1
    return r


def rank_mod_p_sparse(n_rows, n_cols, rows, cols, vals, p):
    """Rank over F_p of a matrix given in triplet arrays.

    Markowitz-flavoured sparse Gaussian elimination on dict-of-rows; pivot
    candidates are drawn from a few shortest active rows and scored by
    fill-in estimate.
    """
    rowdata = {}
    for r, c, v in zip(rows, cols, vals):
        v = int(v) % p
        if v:
            row = rowdata.setdefault(int(r), {})
            c = int(c)
            w = (row.get(c, 0) + v) % p
            if w:
                row[c] = w
            else:
                del row[c]
    rowdata = {r: row for r, row in rowdata.items() if row}
    colrows = {}
    for r, row in rowdata.items():
        for c in row:
            colrows.setdefault(c, set()).add(r)

    rank = 0
    while rowdata:
        # pivot selection: scan the shortest few rows, pick the entry with
        # the smallest (row_nnz - 1) * (col_nnz - 1)
        by_len = sorted(rowdata, key=lambda r: len(rowdata[r]))[:8]
        best = None
        for r in by_len:
            rl = len(rowdata[r]) - 1
            for c in rowdata[r]:
                score = rl * (len(colrows[c]) - 1)
                if best is None or score < best[0]:
                    best = (score, r, c)
            if best is not None and best[0] == 0:
                break
        _, pr, pc = best
        prow = rowdata.pop(pr)
        pval = prow[pc]
        pinv = pow(pval, p - 2, p)
        for c in prow:
            colrows[c].discard(pr)
        for r2 in list(colrows[pc]):
            row2 = rowdata[r2]
            factor = (row2[pc] * pinv) % p
            for c, v in prow.items():
                w = (row2.get(c, 0) - factor * v) % p
                if w:
                    if c not in row2:
                        colrows[c].add(r2)
                    row2[c] = w
                elif c in row2:
                    del row2[c]
                    colrows[c].discard(r2)
            if not row2:
                del rowdata[r2]
        del colrows[pc]
        rank += 1
    return rank
