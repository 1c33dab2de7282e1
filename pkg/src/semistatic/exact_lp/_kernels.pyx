# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled tableau kernels.

Entries are gmpy2 ``mpq`` objects; the loops run without interpreter
overhead while the arithmetic stays exact.
"""


def pivot(list rows, list obj_rows, Py_ssize_t r, Py_ssize_t c):
    cdef list prow = rows[r]
    cdef list row
    cdef list nz = []
    cdef Py_ssize_t i, k, n, m, nnz, t
    cdef object piv = prow[c]
    cdef object f, v
    n = len(prow)
    if piv != 1:
        for k in range(n):
            v = prow[k]
            if v:
                prow[k] = v / piv
    for k in range(n):
        if prow[k]:
            nz.append(k)
    nnz = len(nz)
    m = len(rows)
    for i in range(m):
        if i == r:
            continue
        row = rows[i]
        f = row[c]
        if f:
            for t in range(nnz):
                k = nz[t]
                row[k] = row[k] - f * prow[k]
    for i in range(len(obj_rows)):
        row = obj_rows[i]
        f = row[c]
        if f:
            for t in range(nnz):
                k = nz[t]
                row[k] = row[k] - f * prow[k]


def entering(list obj, Py_ssize_t limit):
    cdef Py_ssize_t j
    for j in range(limit):
        if obj[j] < 0:
            return j
    return -1


def leaving(list rows, Py_ssize_t c, list basis):
    cdef Py_ssize_t i, best = -1
    cdef object best_ratio = None
    cdef object a, ratio
    cdef list row
    for i in range(len(rows)):
        row = rows[i]
        a = row[c]
        if a > 0:
            ratio = row[len(row) - 1] / a
            if best < 0 or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[best]):
                best = i
                best_ratio = ratio
    return best
