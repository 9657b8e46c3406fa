"""Orthonormal families of epsilon-localized vectors built from a spectrum.

Eigenvectors with eigenvalue above ``1 - sigma`` are grouped in blocks of
``n``.  Each block, together with one unit vector from the operator kernel,
is rotated into ``n + 1`` orthonormal vectors that share the kernel vector
equally.  Every vector then satisfies ``||P phi - phi||^2 <= eps``, and the
family is a factor ``(n + 1) / n`` larger than the eigenvector set it
started from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import dumps_17g, write_csv
from .spectral import Spectrum
from .timeband import DiscreteOperator, apply

GRAM_TOL = 1e-8
RESIDUAL_SLACK = 1e-6


@dataclass(frozen=True)
class FamilyParams:
    """Localization level ``epsilon`` and the derived construction constants.

    ``gamma`` solves ``sigma2 + (1 - sigma2) gamma = epsilon`` and ``n`` is
    the integer with ``n <= 1/gamma <= n + 1``.
    """

    epsilon: float
    sigma2: float
    gamma: float
    n: int

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def threshold(self) -> float:
        """Eigenvalues strictly above this enter the construction."""
        return 1.0 - self.sigma

    @property
    def multiplier(self) -> float:
        return (self.n + 1) / self.n

    @property
    def residual_bound(self) -> float:
        """Guaranteed ``||P phi - phi||^2`` ceiling, at most ``epsilon``."""
        return self.sigma2 + (1 - self.sigma2) / (self.n + 1)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "sigma2": self.sigma2,
            "gamma": self.gamma,
            "n": self.n,
            "multiplier": self.multiplier,
        }


def select_parameters(epsilon: float, sigma2: float | None = None) -> FamilyParams:
    """Derive ``gamma`` and ``n`` from ``epsilon`` and ``sigma^2``.

    ``sigma2`` defaults to ``epsilon / 10``.  Requires
    ``0 < sigma2 < epsilon < 1/2``.
    """
    if sigma2 is None:
        sigma2 = epsilon / 10
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not 0 < sigma2 < epsilon:
        raise ValueError(f"need 0 < sigma^2 < epsilon, got sigma^2={sigma2}, epsilon={epsilon}")
    gamma = (epsilon - sigma2) / (1 - sigma2)
    inv = 1 / gamma
    n = math.floor(inv)
    # 1/gamma that is an integer up to rounding
    if math.isclose(inv, n + 1, rel_tol=1e-12):
        n += 1
    return FamilyParams(float(epsilon), float(sigma2), gamma, n)


def flat_completion(m: int) -> np.ndarray:
    """Symmetric orthogonal ``m x m`` matrix whose first column is flat.

    The Householder reflector exchanging ``e_1`` and
    ``v_0 = (1, ..., 1) / sqrt(m)``.
    """
    if m < 2:
        raise ValueError("flat completion needs m >= 2")
    v0 = np.full(m, 1 / math.sqrt(m))
    u = -v0
    u[0] += 1.0
    return np.eye(m) - 2 * np.outer(u, u) / (u @ u)


def _gram(v: np.ndarray) -> np.ndarray:
    return v.conj().T @ v


def build_block(eigvecs: np.ndarray, h: np.ndarray, Q: np.ndarray | None = None):
    """Spread ``n`` orthonormal eigenvectors and a kernel vector over ``n + 1``.

    Parameters
    ----------
    eigvecs : ndarray, shape (ambient, n)
        Orthonormal columns.
    h : ndarray, shape (ambient,)
        Unit vector orthogonal to every column of ``eigvecs``.
    Q : ndarray, optional
        ``flat_completion(n + 1)``; built when omitted.

    Returns
    -------
    phi : ndarray, shape (ambient, n + 1)
        Orthonormal columns ``psi_j + h / sqrt(n + 1)``.
    psi : ndarray, shape (ambient, n + 1)
        The eigenvector combinations, with Gram matrix ``I - J / (n + 1)``.
    """
    eigvecs = np.asarray(eigvecs)
    if eigvecs.ndim == 1:
        eigvecs = eigvecs[:, None]
    n = eigvecs.shape[1]
    if Q is None:
        Q = flat_completion(n + 1)
    if Q.shape != (n + 1, n + 1):
        raise ValueError(f"Q must be {(n + 1, n + 1)}, got {Q.shape}")
    stacked = np.column_stack([eigvecs, h])
    if np.max(np.abs(_gram(stacked) - np.eye(n + 1))) > GRAM_TOL:
        raise ValueError("eigenvectors and kernel vector must be orthonormal")
    trimmed = Q[:, 1:]  # rows u'_j of Q without the first column
    psi = eigvecs @ trimmed.T
    phi = psi + np.asarray(h)[:, None] / math.sqrt(n + 1)
    return phi, psi


@dataclass(frozen=True)
class LocalizedFamily:
    """Output of ``construct_family``; columns of ``vectors`` are the family."""

    vectors: np.ndarray
    params: FamilyParams
    block_count: int
    source_count: int
    residual_count: int
    residuals: np.ndarray
    kernel_indices: np.ndarray
    diagnostic: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.size else 0.0

    def summary(self) -> str:
        return (
            f"blocks={self.block_count} n={self.params.n} size={self.size} "
            f"max_residual={self.max_residual:.17g}"
        )

    def manifest(self) -> dict:
        return {
            "params": self.params.to_json(),
            "block_count": self.block_count,
            "source_count": self.source_count,
            "residual_count": self.residual_count,
            "size": self.size,
            "max_residual": self.max_residual,
            "mean_residual": float(self.residuals.mean()) if self.size else 0.0,
            "residual_ceiling": self.params.residual_bound,
            "kernel_indices": self.kernel_indices.tolist(),
            "diagnostic": self.diagnostic,
            **self.meta,
        }

    def save(self, stem: str | Path, csv: bool = False, **meta) -> list[Path]:
        """Write ``<stem>.npy`` (columns = vectors), optional CSV, and a manifest."""
        stem = Path(stem)
        paths = [stem.with_suffix(".npy")]
        np.save(paths[0], self.vectors)
        if csv:
            path = stem.with_suffix(".csv")
            if np.iscomplexobj(self.vectors):
                header = [f"phi{k}_{part}" for k in range(self.size) for part in ("re", "im")]
                cols = np.empty((self.vectors.shape[0], 2 * self.size))
                cols[:, 0::2], cols[:, 1::2] = self.vectors.real, self.vectors.imag
            else:
                header = [f"phi{k}" for k in range(self.size)]
                cols = self.vectors
            write_csv(path, header, cols.tolist())
            paths.append(path)
        path = stem.with_suffix(".json")
        path.write_text(dumps_17g({**self.manifest(), **meta}))
        paths.append(path)
        return paths


def construct_family(spec: Spectrum, op: DiscreteOperator, params: FamilyParams) -> LocalizedFamily:
    """Build the epsilon-localized orthonormal family of ``op``.

    Eigenvectors with ``lam > 1 - sigma`` (taken in nonincreasing order)
    form consecutive blocks of ``n``; the last ``#F mod n`` stay unused.
    Block ``i`` is paired with the ``i``-th off-set coordinate vector, which
    ``op`` annihilates.  Orthonormality, the residual ceiling and the size
    count are all verified before returning.
    """
    n = params.n
    source = int(np.sum(spec.eigenvalues > params.threshold))
    blocks = source // n
    leftover = source - blocks * n
    dtype = np.result_type(spec.vectors.dtype, float)
    if blocks == 0:
        empty = np.zeros((op.ambient_dim, 0), dtype=dtype)
        msg = f"only {source} eigenvalues above {params.threshold:.6g}; a block needs n={n}"
        return LocalizedFamily(empty, params, 0, source, source, np.zeros(0), np.zeros(0, int), msg)
    if op.kernel_capacity < blocks:
        raise ValueError(
            f"need {blocks} kernel coordinates, operator offers {op.kernel_capacity}; "
            "enlarge the ambient padding or grid margin"
        )
    kernel_idx = op.off_set_indices[:blocks]
    Q = flat_completion(n + 1)
    eig = spec.ambient(slice(0, blocks * n))
    out = np.empty((op.ambient_dim, blocks * (n + 1)), dtype=dtype)
    for i in range(blocks):
        h = np.zeros(op.ambient_dim)
        h[kernel_idx[i]] = 1.0
        if np.any(apply(op, h) != 0):
            raise ValueError("kernel coordinate is not annihilated by the operator")
        phi, psi = build_block(eig[:, i * n:(i + 1) * n], h, Q)
        target = np.eye(n + 1) - 1 / (n + 1)
        if np.max(np.abs(_gram(psi) - target)) > GRAM_TOL:
            raise ValueError(f"block {i}: psi Gram deviates from I - J/(n+1)")
        out[:, i * (n + 1):(i + 1) * (n + 1)] = phi
    gram_err = np.max(np.abs(_gram(out) - np.eye(out.shape[1])))
    if gram_err > GRAM_TOL:
        raise ValueError(f"family is not orthonormal (max Gram error {gram_err:.3e})")
    residuals = np.linalg.norm(apply(op, out) - out, axis=0) ** 2
    if residuals.max() > params.epsilon + RESIDUAL_SLACK:
        raise ValueError(f"residual {residuals.max():.6g} exceeds epsilon={params.epsilon}")
    return LocalizedFamily(out, params, blocks, source, leftover, residuals, kernel_idx)


@dataclass(frozen=True)
class FamilyDensity:
    """Family size per unit scale compared with the localized density targets."""

    size: int
    scale: float
    density: float
    reference_density: float
    target: float
    ratio: float
    ok: bool
    lower: float
    upper: float


def family_density(
    fam: LocalizedFamily,
    scale: float,
    d: int,
    ref_density: float,
    slack: float = 0.1,
) -> FamilyDensity:
    """``|fam| / scale^d`` against ``(1 + gamma) * ref_density``.

    ``lower`` and ``upper`` are the asymptotic brackets
    ``(1 + eps) ref`` and ``ref / (1 - 2 eps)``; ``ok`` flags
    ``ratio >= 1 - slack``.
    """
    density = fam.size / scale**d
    target = (1 + fam.params.gamma) * ref_density
    ratio = density / target
    eps = fam.params.epsilon
    return FamilyDensity(
        fam.size,
        float(scale),
        density,
        ref_density,
        target,
        ratio,
        ratio >= 1 - slack,
        (1 + eps) * ref_density,
        ref_density / (1 - 2 * eps),
    )
