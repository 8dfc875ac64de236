# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cyclic Jacobi rotation sweeps for symmetric eigendecomposition.

Compiled twin of ``_jacobi_py``; both run the same rotation order so the
backends agree to rounding error.
"""

from libc.math cimport fabs, sqrt


def jacobi_sweeps(double[:, ::1] a, double[:, ::1] v, bint with_vectors,
                  double tol, int max_sweeps):
    """Diagonalize `a` in place; accumulate rotations into `v` if asked.

    Returns the number of sweeps performed. Convergence is reached when
    every off-diagonal magnitude drops below `tol`.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, j
    cdef int sweep
    cdef double apq, theta, t, c, s, akp, akq, off

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                if fabs(a[p, q]) > off:
                    off = fabs(a[p, q])
        if off < tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                if fabs(apq) < 1e-300:  # rotation would be the identity
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e154:  # theta**2 would overflow
                    t = 1.0 / (2.0 * theta)
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for j in range(n):
                    akp = a[j, p]
                    akq = a[j, q]
                    a[j, p] = c * akp - s * akq
                    a[j, q] = s * akp + c * akq
                for j in range(n):
                    akp = a[p, j]
                    akq = a[q, j]
                    a[p, j] = c * akp - s * akq
                    a[q, j] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if with_vectors:
                    for j in range(n):
                        akp = v[j, p]
                        akq = v[j, q]
                        v[j, p] = c * akp - s * akq
                        v[j, q] = s * akp + c * akq
    return max_sweeps
