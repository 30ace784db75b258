# cython: language_level=3
"""Hot kernels: complex tridiagonal LU with partial pivoting.

Same interface as `_kernels_py`; selected at import time by `kernels`.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()


def factor(cnp.ndarray[cnp.complex128_t, ndim=1] dl,
           cnp.ndarray[cnp.complex128_t, ndim=1] d,
           cnp.ndarray[cnp.complex128_t, ndim=1] du):
    """LU-factor a complex tridiagonal matrix with partial pivoting.

    Row swaps introduce one extra superdiagonal (du2).  Inputs are
    overwritten; pass copies.  Returns (dl, d, du, du2, ipiv) where dl
    holds the multipliers and ipiv[i] is the pivot row chosen at step i.
    Raises ZeroDivisionError on an exactly-zero pivot.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] du2 = np.zeros(max(n - 2, 0), dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ipiv = np.arange(n, dtype=np.int64)
    cdef Py_ssize_t i
    cdef double complex fact, temp

    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0:
                raise ZeroDivisionError("zero pivot at row %d" % i)
            fact = dl[i] / d[i]
            dl[i] = fact
            d[i + 1] = d[i + 1] - fact * du[i]
            if i < n - 2:
                du2[i] = 0
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            ipiv[i] = i + 1
    if d[n - 1] == 0:
        raise ZeroDivisionError("zero pivot at row %d" % (n - 1))
    return dl, d, du, du2, ipiv


def solve(cnp.ndarray[cnp.complex128_t, ndim=1] dl,
          cnp.ndarray[cnp.complex128_t, ndim=1] d,
          cnp.ndarray[cnp.complex128_t, ndim=1] du,
          cnp.ndarray[cnp.complex128_t, ndim=1] du2,
          cnp.ndarray[cnp.int64_t, ndim=1] ipiv,
          cnp.ndarray[cnp.complex128_t, ndim=1] b):
    """Back-solve a system factored by `factor`.  Returns a new array."""
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] x = b.copy()
    cdef Py_ssize_t i
    cdef double complex temp

    for i in range(n - 1):
        if ipiv[i] == i:
            x[i + 1] = x[i + 1] - dl[i] * x[i]
        else:
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - dl[i] * x[i]

    x[n - 1] = x[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x
