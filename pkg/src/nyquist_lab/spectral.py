"""Eigendecomposition contract, localization residuals and concentration checks."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .setgeom import Grid, SetSpec, dilate, select_nodes
from .timeband import BandSpec, DiscreteOperator, apply

ORTHO_TOL = 1e-8
RESIDUAL_TOL = 1e-8
UNIT_TOL = 1e-10


class EigensolverError(RuntimeError):
    """The dense eigensolver returned pairs that fail their certificate."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of an operator's set block, eigenvalues nonincreasing.

    ``vectors[:, k]`` pairs with ``eigenvalues[k]`` and lives on the set
    coordinates; ``ambient`` embeds columns into the ambient space.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    set_indices: np.ndarray
    ambient_dim: int
    residual_bound: float

    def __len__(self):
        return len(self.eigenvalues)

    def ambient(self, cols=None) -> np.ndarray:
        """Ambient-space eigenvectors (zeros off the set)."""
        v = self.vectors if cols is None else self.vectors[:, cols]
        out = np.zeros((self.ambient_dim,) + v.shape[1:], dtype=v.dtype)
        out[self.set_indices] = v
        return out

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def squared_trace(self) -> float:
        return float(np.sum(self.eigenvalues**2))

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        lines = ["index,eigenvalue"]
        lines += [f"{k},{lam:.17g}" for k, lam in enumerate(self.eigenvalues)]
        path.write_text("\n".join(lines) + "\n")
        return path

    def to_json(self, path: str | Path, **meta) -> Path:
        from ._io import dumps_17g

        doc = {
            "count": len(self),
            "eigenvalues": self.eigenvalues.tolist(),
            "residual_bound": self.residual_bound,
            "trace": self.trace,
            "squared_trace": self.squared_trace,
            **meta,
        }
        path = Path(path)
        path.write_text(dumps_17g(doc))
        return path


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-magnitude coordinate (first one on ties) made real positive
    idx = np.argmax(np.abs(v), axis=0)
    pivot = v[idx, np.arange(v.shape[1])]
    phase = pivot / np.abs(pivot)
    return v / phase


def eigendecompose(op: DiscreteOperator) -> Spectrum:
    """Full dense decomposition of the set block (LAPACK ``*syevr/*heevr``).

    Eigenvalues are returned nonincreasing, eigenvectors phase-normalised so
    their largest coordinate is real and positive.  The decomposition is
    certified before it is returned: residuals ``|M v - lam v|`` must stay
    below ``1e-8 (1 + |lam_0|)`` and the basis must be orthonormal to
    ``1e-8``; otherwise ``EigensolverError`` is raised.
    """
    block = op.block
    if block.size and np.max(np.abs(block - block.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(block))):
        raise ValueError("operator block is not self-adjoint")
    lam, vec = scipy.linalg.eigh(block, driver="evr")
    lam = lam[::-1].copy()
    vec = _fix_phase(vec[:, ::-1])
    if len(lam) == 0:
        return Spectrum(lam, vec, op.set_indices, op.ambient_dim, 0.0)
    resid = np.linalg.norm(block @ vec - vec * lam, axis=0)
    bound = float(resid.max())
    scale = 1.0 + abs(lam[0])
    if bound > RESIDUAL_TOL * scale:
        raise EigensolverError(f"eigen-residual {bound:.3e} exceeds {RESIDUAL_TOL * scale:.3e}")
    gram_err = np.max(np.abs(vec.conj().T @ vec - np.eye(len(lam))))
    if gram_err > ORTHO_TOL:
        raise EigensolverError(f"eigenvectors lose orthonormality ({gram_err:.3e})")
    return Spectrum(lam, vec, op.set_indices, op.ambient_dim, bound)


def _check_unit(f: np.ndarray):
    nrm = np.linalg.norm(f)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise ValueError(f"vector must have unit norm, got {nrm!r}")


def localization_residual(op: DiscreteOperator, f: np.ndarray) -> float:
    """``||op f - f||^2`` for a unit ambient vector ``f``."""
    _check_unit(f)
    return float(np.linalg.norm(apply(op, f) - f) ** 2)


def pseudo_eigen_check(op: DiscreteOperator, f, lam: float, eps: float, atol: float = 1e-12) -> bool:
    """Whether ``f`` is an ``eps``-approximate eigenvector for ``lam``.

    Tests ``||op f - lam f|| <= eps``; ``atol`` absorbs rounding when ``eps``
    is itself a computed quantity such as ``1 - lam_k``.
    """
    _check_unit(f)
    return bool(np.linalg.norm(apply(op, f) - lam * f) <= eps + atol)


@dataclass(frozen=True)
class ConcentrationReport:
    """Time defect, band defect and localization residual (plain norms)."""

    eps_T: float
    eps_Omega: float
    residual: float

    @property
    def bound(self) -> float:
        return 2 * self.eps_T + self.eps_Omega

    @property
    def slack(self) -> float:
        return self.bound - self.residual

    @property
    def holds(self) -> bool:
        return self.slack >= -1e-8


def band_limiter(band: BandSpec, grid: Grid) -> np.ndarray:
    """Discretized ``B_Omega`` on every node of ``grid`` (coordinate form)."""
    pts = grid.nodes
    mat = grid.weight * band.kernel(pts[:, None, :] - pts[None, :, :])
    mat = np.real_if_close(mat) if band.symmetric else mat
    return (mat + mat.conj().T) / 2


def donoho_stark_check(
    T: SetSpec,
    band: BandSpec | SetSpec,
    grid: Grid,
    f: np.ndarray,
    r: float = 1.0,
    B: np.ndarray | None = None,
) -> ConcentrationReport:
    """Measure ``||D_T f - f||``, ``||B f - f||`` and ``||D_T B D_T f - f||``.

    ``B`` is the band-limiter on the full grid; pass a precomputed one when
    checking many vectors.  Raises ``AssertionError`` if the triangle chain
    ``residual <= 2 eps_T + eps_Omega`` fails by more than ``1e-8``.
    """
    if isinstance(band, SetSpec):
        band = BandSpec(band)
    f = np.asarray(f)
    if f.shape != (grid.size,):
        raise ValueError("f must be a vector on the full grid")
    _check_unit(f)
    if B is None:
        B = band_limiter(band, grid)
    inside, _ = select_nodes(dilate(T, r), grid)
    mask = np.zeros(grid.size, dtype=bool)
    mask[inside] = True
    Df = np.where(mask, f, 0)
    eps_T = np.linalg.norm(Df - f)
    eps_Omega = np.linalg.norm(B @ f - f)
    Pf = np.where(mask, B @ Df, 0)
    report = ConcentrationReport(float(eps_T), float(eps_Omega), float(np.linalg.norm(Pf - f)))
    if not report.holds:
        raise AssertionError(f"concentration chain violated: {report}")
    return report
