# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. See ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()


def bilinear_rows(a, m, b):
    # explicit real arithmetic: avoids the NaN-safe complex multiply helper
    cdef const double[:, ::1] ar = np.ascontiguousarray(a, dtype=np.complex128).view(np.float64)
    cdef const double[:, ::1] br = np.ascontiguousarray(b, dtype=np.complex128).view(np.float64)
    cdef const double[:, ::1] mr = np.ascontiguousarray(m, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t t, d, e, nt = ar.shape[0], nd = mr.shape[0]
    cdef double acc_re, acc_im, row_re, row_im, mre, mim, bre, bim
    out = np.empty(nt, dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64).reshape(nt, 2)
    with nogil:
        for t in range(nt):
            acc_re = 0.0
            acc_im = 0.0
            for d in range(nd):
                row_re = 0.0
                row_im = 0.0
                for e in range(nd):
                    mre = mr[d, 2 * e]
                    mim = mr[d, 2 * e + 1]
                    bre = br[t, 2 * e]
                    bim = br[t, 2 * e + 1]
                    row_re = row_re + mre * bre - mim * bim
                    row_im = row_im + mre * bim + mim * bre
                # conj(a) * row
                acc_re = acc_re + ar[t, 2 * d] * row_re + ar[t, 2 * d + 1] * row_im
                acc_im = acc_im + ar[t, 2 * d] * row_im - ar[t, 2 * d + 1] * row_re
            o[t, 0] = acc_re
            o[t, 1] = acc_im
    return out


cdef double _grouped_auc(const long[::1] group, const unsigned char[::1] label,
                         const double[::1] weight) noexcept nogil:
    cdef Py_ssize_t k = 0, n = group.shape[0]
    cdef long g
    cdef double below = 0.0, tot_pos = 0.0, acc = 0.0, gp, gn
    while k < n:
        g = group[k]
        gp = 0.0
        gn = 0.0
        while k < n and group[k] == g:
            if label[k]:
                gp = gp + weight[k]
            else:
                gn = gn + weight[k]
            k = k + 1
        acc = acc + gp * (below + 0.5 * gn)
        below = below + gn
        tot_pos = tot_pos + gp
    if tot_pos == 0.0 or below == 0.0:
        return NAN
    return acc / (tot_pos * below)


def grouped_auc(group, label, weight):
    cdef const long[::1] g = np.ascontiguousarray(group, dtype=np.int_)
    cdef const unsigned char[::1] lab = np.ascontiguousarray(label, dtype=np.uint8)
    cdef const double[::1] w = np.ascontiguousarray(weight, dtype=np.float64)
    return _grouped_auc(g, lab, w)


def bootstrap_auc(group, label, counts):
    cdef const long[::1] g = np.ascontiguousarray(group, dtype=np.int_)
    cdef const unsigned char[::1] lab = np.ascontiguousarray(label, dtype=np.uint8)
    cw = np.ascontiguousarray(counts, dtype=np.float64)
    cdef const double[:, ::1] w = cw
    cdef Py_ssize_t k, nb = w.shape[0]
    out = np.empty(nb, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(nb):
            o[k] = _grouped_auc(g, lab, w[k])
    return out
