"""Symmetric eigendecomposition by cyclic Jacobi rotations.

The rotation sweeps are the hot kernel of the whole pipeline (the
speaker-count search below decomposes one Laplacian per candidate
threshold), so they live in a compiled extension with a pure-Python twin.
The backend is selected once at import; set ``DIARKIT_PURE_PYTHON=1`` to
force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

if os.environ.get("DIARKIT_PURE_PYTHON"):
    from . import _jacobi_py as _kernel

    HAVE_COMPILED_KERNEL = False
else:
    try:
        from . import _jacobi_cy as _kernel  # type: ignore[no-redef]

        HAVE_COMPILED_KERNEL = True
    except ImportError:
        from . import _jacobi_py as _kernel  # type: ignore[no-redef]

        HAVE_COMPILED_KERNEL = False

SYMMETRY_TOL = 1e-9
CONVERGENCE_TOL = 1e-10
MAX_SWEEPS = 100


def kernel_name() -> str:
    return "compiled" if HAVE_COMPILED_KERNEL else "python"


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with aligned orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("empty matrix")
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric within 1e-9")
    return a


def jacobi_eigh(m: np.ndarray) -> EigenSystem:
    """Full spectrum of a symmetric matrix, eigenvalues ascending.

    Runs cyclic Jacobi sweeps until every off-diagonal magnitude is below
    1e-10 or 100 sweeps have been spent. Eigenvector signs are fixed so
    the largest-magnitude component of each column is positive.
    """
    a = _check_symmetric(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.float64)
    _kernel.jacobi_sweeps(a, v, True, CONVERGENCE_TOL, MAX_SWEEPS)
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = v[:, order]
    # deterministic sign convention
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(n)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    return EigenSystem(values, vectors)


def jacobi_eigvals(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues only; skips eigenvector accumulation."""
    a = _check_symmetric(m).copy()
    n = a.shape[0]
    dummy = np.empty((1, 1), dtype=np.float64) if n else None
    _kernel.jacobi_sweeps(a, dummy, False, CONVERGENCE_TOL, MAX_SWEEPS)
    return np.sort(np.diag(a).copy())
