"""Pure-Python (numpy) twin of the compiled Jacobi rotation kernel.

Same cyclic rotation order and convergence rule as ``_jacobi_cy``; used
when the extension is unavailable or ``DIARKIT_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_sweeps(
    a: np.ndarray, v: np.ndarray, with_vectors: bool, tol: float, max_sweeps: int
) -> int:
    n = a.shape[0]
    iu = np.triu_indices(n, k=1)
    for sweep in range(max_sweeps):
        if n < 2 or np.max(np.abs(a[iu])) < tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                if abs(apq) < 1e-300:  # rotation would be the identity
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = float(a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e154:  # theta**2 would overflow
                    t = 1.0 / (2.0 * theta)
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if with_vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    return max_sweeps
