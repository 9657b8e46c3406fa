"""Reference computations that share no code path with the package."""
from __future__ import annotations

import math

import numpy as np


def jacobi_eigvals(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations on a real symmetric matrix; eigenvalues descending."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * max(1.0, np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rp, rq = a[p].copy(), a[q].copy()
                a[p], a[q] = c * rp - s * rq, s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * cp - s * cq, s * cp + c * cq
    return np.sort(np.diag(a))[::-1]


def hermitian_jacobi_eigvals(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix via its real 2m x 2m embedding.

    Every eigenvalue appears twice in the embedding; one of each pair is kept.
    """
    emb = np.block([[a.real, -a.imag], [a.imag, a.real]])
    return jacobi_eigvals(emb)[::2]


def sinc_kernel_gl(length: float, halfwidth: float, n: int = 96) -> np.ndarray:
    """Gauss-Legendre Nystrom eigenvalues of ``sin(a (x - y)) / (pi (x - y))`` on ``[0, length]``."""
    u, wu = np.polynomial.legendre.leggauss(n)
    x = length * (u + 1) / 2
    w = length * wu / 2
    d = x[:, None] - x[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(d == 0, halfwidth / math.pi, np.sin(halfwidth * d) / (math.pi * d))
    sw = np.sqrt(w)
    return np.sort(np.linalg.eigvalsh(sw[:, None] * k * sw[None, :]))[::-1]


def gabor_disk_eigenvalue(k: int, R: float) -> float:
    """Closed form for the Gaussian window on a centered disk: ``P(k + 1, pi R^2)``.

    The regularised lower incomplete gamma function, written as a finite sum
    so that no special-function library is involved.
    """
    x = math.pi * R * R
    term, total = 1.0, 1.0
    for j in range(1, k + 1):
        term *= x / j
        total += term
    return 1.0 - math.exp(-x) * total


def dpss_extremes_mp(N: int, W, dps: int = 60):
    """Smallest and largest DPSS eigenvalues in multiprecision arithmetic."""
    import mpmath

    with mpmath.workdps(dps):
        W = mpmath.mpf(W)
        m = mpmath.matrix(N, N)
        for i in range(N):
            for j in range(N):
                m[i, j] = 2 * W if i == j else mpmath.sin(2 * mpmath.pi * W * (i - j)) / (mpmath.pi * (i - j))
        ev = mpmath.eigsy(m, eigvals_only=True)
        vals = sorted(ev[i] for i in range(N))
        return vals[0], vals[-1]
