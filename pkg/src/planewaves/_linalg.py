"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import SymmetryError


def sym(a):
    """Symmetric part."""
    return 0.5 * (a + a.swapaxes(-1, -2))


def skw(a):
    """Skew part."""
    return 0.5 * (a - a.swapaxes(-1, -2))


def fro(a):
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def maxabs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def check_symmetric(m, tol=1e-9, what="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SymmetryError(f"{what} must be square, got shape {m.shape}")
    if maxabs(m - m.T) > tol * (1.0 + maxabs(m)):
        raise SymmetryError(f"{what} is not symmetric within tolerance {tol}")
    return sym(m)


def check_skew(m, tol=1e-9, what="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SymmetryError(f"{what} must be square, got shape {m.shape}")
    if maxabs(m + m.T) > tol * (1.0 + maxabs(m)):
        raise SymmetryError(f"{what} is not skew within tolerance {tol}")
    return skw(m)


def skew_basis(n):
    """Basis E_ab = e_a e_bᵀ − e_b e_aᵀ (a<b) of the n×n skew matrices."""
    basis = []
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n))
            e[a, b] = 1.0
            e[b, a] = -1.0
            basis.append(e)
    return basis


def skew_from_coords(coords, n):
    w = np.zeros((n, n))
    k = 0
    for a in range(n):
        for b in range(a + 1, n):
            w[a, b] = coords[k]
            w[b, a] = -coords[k]
            k += 1
    return w


def skew_to_coords(w):
    n = w.shape[0]
    return np.array([w[a, b] for a in range(n) for b in range(a + 1, n)])


def nullspace(a, rel_tol=1e-8):
    """Orthonormal nullspace basis (columns); singular values < rel_tol·σmax count as zero.

    A zero (or empty) map returns the full identity basis.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[1] == 0:
        return np.zeros((0, 0))
    if a.shape[0] == 0 or maxabs(a) == 0.0:
        return np.eye(a.shape[1])
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    tol = rel_tol * s[0]
    rank = int(np.sum(s > tol))
    return vh[rank:].T


def min_norm_lstsq(a, b):
    """Minimum-norm least-squares solution of a x = b, with residual norm."""
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    res = maxabs(a @ x - b)
    return x, res


def sym_sqrt(m, tol=1e-12):
    """Principal (symmetric positive) square root of a symmetric PD matrix."""
    m = check_symmetric(m, what="sqrt input")
    w, v = np.linalg.eigh(m)
    if np.min(w) <= tol * max(1.0, np.max(np.abs(w))):
        from .errors import SingularityError

        raise SingularityError("matrix is not positive definite")
    return (v * np.sqrt(w)) @ v.T


def is_orthogonal(g, tol=1e-9):
    return maxabs(g.T @ g - np.eye(g.shape[0])) <= tol
