"""Pure-Python tableau kernels.

Same interface as the compiled ``_kernels`` module. A tableau is a list of
rows; each row is a list of exact numbers whose last entry is the rhs.
"""


def pivot(rows, obj_rows, r, c):
    prow = rows[r]
    piv = prow[c]
    if piv != 1:
        prow = [v / piv if v else v for v in prow]
        rows[r] = prow
    nz = [k for k, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for k in nz:
                row[k] -= f * prow[k]
    for row in obj_rows:
        f = row[c]
        if f:
            for k in nz:
                row[k] -= f * prow[k]


def entering(obj, limit):
    for j in range(limit):
        if obj[j] < 0:
            return j
    return -1


def leaving(rows, c, basis):
    best = -1
    best_ratio = None
    for i, row in enumerate(rows):
        a = row[c]
        if a > 0:
            ratio = row[-1] / a
            if (best < 0 or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[best])):
                best = i
                best_ratio = ratio
    return best
