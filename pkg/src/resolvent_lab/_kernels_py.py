"""Pure-Python fallback for the tridiagonal kernels.

Identical algorithm and interface as the compiled `_kernels` extension
(LU with partial pivoting, one superdiagonal of fill-in).  Orders of
magnitude slower; used when the extension is unavailable or when the
RESOLVENT_LAB_PURE environment variable forces it.
"""

import numpy as np


def factor(dl, d, du):
    """LU-factor a complex tridiagonal matrix with partial pivoting.

    Inputs are overwritten; pass copies.  Returns (dl, d, du, du2, ipiv).
    Raises ZeroDivisionError on an exactly-zero pivot.
    """
    n = d.shape[0]
    du2 = np.zeros(max(n - 2, 0), dtype=np.complex128)
    ipiv = np.arange(n, dtype=np.int64)
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


def solve(dl, d, du, du2, ipiv, b):
    """Back-solve a system factored by `factor`.  Returns a new array."""
    n = d.shape[0]
    x = b.copy()
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
