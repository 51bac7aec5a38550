"""Symmetric tridiagonal eigensolvers.

``tql2`` is the implicit-shift QL algorithm (EISPACK lineage) with eigenvector
accumulation, compiled with numba. ``bisect_eigenvalues`` is an independent
Sturm-sequence bisection used as a fallback for eigenvalues and as the test
oracle for ``tql2``.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .errors import ConvergenceError

MAX_ITER_PER_EIGENVALUE = 30


@numba.njit(cache=True, nogil=True)
def _tql2_kernel(d, e, z, max_iter):
    # d: diagonal (n,), e: sub-diagonal in e[1:], z: identity on entry.
    # z is stored transposed (row k is eigenvector k) for contiguous updates.
    # Returns -1 on success, else the index that failed to converge.
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0

    f = 0.0
    tst1 = 0.0
    eps = 2.0 ** -52
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n:
            if abs(e[m]) <= eps * tst1:
                break
            m += 1

        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    return l
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h

                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = z[i + 1, k]
                        z[i + 1, k] = s * z[i, k] + c * h
                        z[i, k] = c * z[i, k] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= eps * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return -1


def tql2(diagonal, off_diagonal, max_iter: int = MAX_ITER_PER_EIGENVALUE):
    """Eigen-decompose a symmetric tridiagonal matrix.

    Returns ``(energies, vectors)`` with energies ascending and
    ``vectors[:, m]`` the unit eigenvector for ``energies[m]``.

    Raises ConvergenceError (never a partial spectrum) if any eigenvalue
    needs more than ``max_iter`` QL sweeps.
    """
    d = np.array(diagonal, dtype=np.float64)
    n = d.shape[0]
    off = np.asarray(off_diagonal, dtype=np.float64)
    if off.shape != (max(n - 1, 0),):
        raise ValueError(f"off-diagonal must have length {n - 1}, got {off.shape}")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    e = np.zeros(n)
    e[1:] = off
    z = np.eye(n)
    failed = _tql2_kernel(d, e, z, max_iter)
    if failed >= 0:
        raise ConvergenceError(int(failed), max_iter)
    order = np.argsort(d, kind="stable")
    return d[order], np.ascontiguousarray(z[order].T)


def sturm_count(diagonal, off_diagonal, x: float) -> int:
    """Number of eigenvalues strictly below ``x`` (LDL^T pivot signs)."""
    count = 0
    q = 1.0
    # pivot floor scaled by the largest coupling so the division cannot overflow
    pivmin = np.finfo(float).tiny * max(1.0, max((float(b) ** 2 for b in off_diagonal), default=0.0))
    prev_off_sq = 0.0
    for i, a in enumerate(diagonal):
        q = (a - x) - (prev_off_sq / q if i else 0.0)
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
        if i < len(off_diagonal):
            prev_off_sq = float(off_diagonal[i]) ** 2
    return count


def bisect_eigenvalues(diagonal, off_diagonal, tol: float = 1e-13):
    """All eigenvalues, ascending, by bisection on the Sturm count.

    Gershgorin discs bound the search interval. Each eigenvalue is
    bracketed independently, so this shares no arithmetic with ``tql2``.
    """
    diagonal = [float(a) for a in diagonal]
    off = [float(b) for b in off_diagonal]
    n = len(diagonal)
    radius = [0.0] * n
    for i, b in enumerate(off):
        radius[i] += abs(b)
        radius[i + 1] += abs(b)
    lo = min(a - r for a, r in zip(diagonal, radius))
    hi = max(a + r for a, r in zip(diagonal, radius))
    span = max(hi - lo, 1.0)
    lo -= 1e-3 * span
    hi += 1e-3 * span

    out = np.empty(n)
    for k in range(n):
        a, b = lo, hi
        # invariant: count(a) <= k < count(b)
        while b - a > tol * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if mid in (a, b):
                break
            if sturm_count(diagonal, off, mid) <= k:
                a = mid
            else:
                b = mid
        out[k] = 0.5 * (a + b)
    return out
