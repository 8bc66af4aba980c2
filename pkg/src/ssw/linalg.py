"""Exact linear algebra over the coefficient fields (dense and sparse)."""

from __future__ import annotations


def rank(matrix, field):
    """Rank of a dense matrix (list of rows of scalars) by Gauss elimination."""
    if not matrix:
        return 0
    rows = [list(r) for r in matrix]
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        prow = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c] / pv
                ri = rows[i]
                for j in range(c, ncols):
                    if prow[j]:
                        ri[j] = ri[j] - f * prow[j]
        r += 1
        if r == len(rows):
            break
    return r


def sparse_rank(rows, field):
    """Rank of a sparse matrix given as a list of {col: coeff} dicts.

    Forward elimination keyed on the least live column of each row.
    """
    r = 0
    pivots = {}  # column -> normalized pivot row
    for row0 in rows:
        row = dict(row0)
        while row:
            c = min(row)
            prow = pivots.get(c)
            if prow is None:
                pv = row[c]
                pivots[c] = {k: v / pv for k, v in row.items()}
                r += 1
                break
            f = row[c]
            for k, v in prow.items():
                nv = row.get(k)
                nv = -f * v if nv is None else nv - f * v
                if nv:
                    row[k] = nv
                elif k in row:
                    del row[k]
    return r


def homology_dims(mats, dims, field):
    """Homology dimensions of ... -> V_k -d_k-> V_{k+1} -> ...

    mats maps degree k to the matrix of d_k (rows = source basis of V_k as
    {col: coeff} dicts over the target basis).  dims maps degree to dim V_k.
    Returns {degree: dim ker d_k - rank d_{k-1}}.
    """
    ranks = {k: sparse_rank(m, field) for k, m in mats.items()}
    out = {}
    for k, n in dims.items():
        rk = ranks.get(k, 0)
        rk_prev = ranks.get(k - 1, 0)
        out[k] = n - rk - rk_prev
    return out
