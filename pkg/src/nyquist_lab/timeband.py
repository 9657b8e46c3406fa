"""Time- and band-limiting operators ``D_T B_Omega D_T``.

Two discretizations are provided.  ``build_nystrom`` samples the sinc-type
convolution kernel of ``B_Omega`` on a midpoint grid (continuum model).
``build_dpss`` is the classical discrete prolate matrix
``sin(2 pi W (m - n)) / (pi (m - n))``, exact and quadrature-free.

Operators keep only their set-restricted block; the ambient matrix is zero
outside ``set_indices`` and is materialised on demand.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .setgeom import Grid, SetSpec, dilate, measure, select_nodes


@dataclass(frozen=True)
class DiscreteOperator:
    """Self-adjoint operator on an ambient coordinate space.

    Attributes
    ----------
    block : ndarray
        Hermitian ``m x m`` restriction to the set coordinates.
    set_indices : ndarray
        Ambient positions of the ``m`` set coordinates (sorted).
    ambient_dim : int
        Dimension of the ambient space; every other row/column is zero.
    analytic_trace : float
        Continuum value the trace should approach.
    backend : str
        ``"nystrom"``, ``"dpss"`` or ``"gabor"``.
    grid : Grid or None
        Carrier grid (absent for the DPSS model).
    meta : dict
        JSON-serialisable description (sets, band, window, scale).
    """

    block: np.ndarray
    set_indices: np.ndarray
    ambient_dim: int
    analytic_trace: float
    backend: str
    grid: Grid | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = len(self.set_indices)
        if self.block.shape != (m, m):
            raise ValueError("block shape does not match set_indices")
        if m and (self.set_indices.min() < 0 or self.set_indices.max() >= self.ambient_dim):
            raise ValueError("set index outside the ambient space")
        if np.any(np.diff(self.set_indices) <= 0):
            raise ValueError("set_indices must be strictly increasing")

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.block)

    @property
    def numeric_trace(self) -> float:
        return float(np.trace(self.block).real)

    @property
    def kernel_capacity(self) -> int:
        """Number of off-set coordinates (each one spans part of the kernel)."""
        return self.ambient_dim - len(self.set_indices)

    @property
    def off_set_indices(self) -> np.ndarray:
        mask = np.ones(self.ambient_dim, dtype=bool)
        mask[self.set_indices] = False
        return np.flatnonzero(mask)

    @property
    def matrix(self) -> np.ndarray:
        full = np.zeros((self.ambient_dim,) * 2, dtype=self.block.dtype)
        full[np.ix_(self.set_indices, self.set_indices)] = self.block
        return full


def apply(op: DiscreteOperator, f: np.ndarray) -> np.ndarray:
    """Matrix-vector product in ambient coordinates (Euclidean inner product)."""
    f = np.asarray(f)
    if f.shape[0] != op.ambient_dim:
        raise ValueError(f"vector of length {f.shape[0]}, expected {op.ambient_dim}")
    dtype = np.result_type(op.block, f)
    out = np.zeros(f.shape, dtype=dtype)
    out[op.set_indices] = op.block @ f[op.set_indices]
    return out


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


# ---------------------------------------------------------------------------
# band kernels


@dataclass(frozen=True)
class BandSpec:
    """Frequency set ``Omega`` (a box union) with its convolution kernel.

    The kernel ``k`` satisfies ``B_Omega f = k * f`` under the unitary
    Fourier transform with ``exp(-i xi t)``.  A box ``[c - a, c + a]``
    contributes ``exp(i c x) sin(a x) / (pi x)`` per axis, equal to ``a/pi``
    at ``x = 0``.
    """

    omega: SetSpec

    def __post_init__(self):
        if self.omega.has_disks:
            raise ValueError("frequency sets must be box unions")

    @classmethod
    def interval(cls, a: float, b: float | None = None) -> "BandSpec":
        """``[-a, a]``, or ``[a, b]`` when two endpoints are given."""
        lo, hi = (-a, a) if b is None else (a, b)
        return cls(SetSpec.interval(lo, hi))

    @property
    def dim(self) -> int:
        return self.omega.dim

    @property
    def symmetric(self) -> bool:
        mine = sorted(p.bounds for p in self.omega.parts)
        refl = sorted(p.bounds for p in self.omega.reflected().parts)
        return len(mine) == len(refl) and all(
            np.allclose(np.array(x), np.array(y), rtol=0, atol=1e-12)
            for x, y in zip(mine, refl)
        )

    @property
    def max_frequency(self) -> np.ndarray:
        lo, hi = self.omega.bounding_box()
        return np.maximum(np.abs(lo), np.abs(hi))

    def kernel(self, x: np.ndarray) -> np.ndarray:
        """Kernel values at displacements ``x`` of shape ``(..., dim)``.

        Complex in general; real when ``Omega = -Omega``.
        """
        x = np.asarray(x, dtype=float)
        total = 0.0
        for box in self.omega.parts:
            term = 1.0
            for a, (lo, hi) in enumerate(box.bounds):
                c, half = (lo + hi) / 2, (hi - lo) / 2
                xa = x[..., a]
                # np.sinc evaluates the removable singularity exactly
                axis_k = (half / np.pi) * np.sinc(half * xa / np.pi)
                if c != 0.0:
                    axis_k = axis_k * np.exp(1j * c * xa)
                term = term * axis_k
            total = total + term
        return total


def build_nystrom(
    T: SetSpec,
    band: BandSpec | SetSpec,
    grid: Grid,
    r: float = 1.0,
) -> DiscreteOperator:
    """Midpoint-rule discretization of ``D_{rT} B_Omega D_{rT}``.

    Entry ``(i, j)`` is ``w k(x_i - x_j)`` for nodes ``x_i, x_j`` in ``rT``;
    ``w`` is the cell volume.  ``Omega`` must be symmetric about the origin
    so the matrix is real symmetric, and must lie within the grid's Nyquist
    band ``|xi| <= pi / h`` so the discrete band-limiter stays a contraction.
    """
    if isinstance(band, SetSpec):
        band = BandSpec(band)
    if T.has_disks:
        raise ValueError("time sets must be box unions")
    if T.dim != band.dim or T.dim != grid.dim:
        raise ValueError("time set, band and grid dimensions disagree")
    if T.dim > 2:
        raise ValueError("only dimensions 1 and 2 are supported")
    if not band.symmetric:
        raise ValueError("band must be symmetric about the origin (real kernel)")
    if np.any(band.max_frequency > np.pi / np.array(grid.step) + 1e-12):
        raise ValueError("band exceeds the grid Nyquist frequency pi/h")
    rT = dilate(T, r)
    inside, _ = select_nodes(rT, grid)
    pts = grid.nodes[inside]
    diff = pts[:, None, :] - pts[None, :, :]
    block = grid.weight * np.real(band.kernel(diff))
    block = _hermitize(block)
    d = T.dim
    trace = measure(rT) * measure(band.omega) / (2 * np.pi) ** d
    meta = {"T": T.to_json(), "Omega": band.omega.to_json(), "r": float(r)}
    return DiscreteOperator(block, inside, grid.size, trace, "nystrom", grid, meta)


def dpss_block(N: int, W: float) -> np.ndarray:
    m = np.arange(N)
    d = (m[:, None] - m[None, :]).astype(float)
    return 2 * W * np.sinc(2 * W * d)


def build_dpss(N: int, W: float, ambient_dim: int | None = None) -> DiscreteOperator:
    """The ``N x N`` prolate matrix embedded in a padded ambient space.

    Padding defaults to ``max(32, ceil(N / 2))`` extra coordinates, enough
    kernel directions for any family built from the spectrum (each block of
    at least two eigenvectors consumes one).
    """
    if not 0 < W < 0.5:
        raise ValueError(f"W must lie in (0, 1/2), got {W}")
    if N < 1:
        raise ValueError("N must be positive")
    if ambient_dim is None:
        ambient_dim = N + max(32, math.ceil(N / 2))
    if ambient_dim < N:
        raise ValueError("ambient dimension smaller than N")
    block = _hermitize(dpss_block(N, W))
    meta = {"N": int(N), "W": float(W)}
    return DiscreteOperator(block, np.arange(N), int(ambient_dim), 2 * N * W, "dpss", None, meta)


@dataclass(frozen=True)
class DpssSetup:
    """Scale family ``N -> build_dpss(N, W)`` for sweeps."""

    W: float
    padding: int | None = None

    scale_exponent = 1

    @property
    def reference_density(self) -> float:
        return 2 * self.W

    def build(self, N) -> DiscreteOperator:
        if N != int(N):
            raise ValueError(f"DPSS scale must be an integer, got {N}")
        ambient = None if self.padding is None else int(N) + self.padding
        return build_dpss(int(N), self.W, ambient)


@dataclass(frozen=True)
class NystromSetup:
    """Scale family ``r -> build_nystrom(T, Omega, grid(r), r)``.

    The step ``h`` stays fixed as ``r`` grows (constant resolution per unit
    length); only the grid extent follows ``rT``.
    """

    T: SetSpec
    band: BandSpec
    h: float
    margin: float | None = None

    @property
    def scale_exponent(self) -> int:
        return self.T.dim

    @property
    def reference_density(self) -> float:
        return measure(self.T) * measure(self.band.omega) / (2 * np.pi) ** self.T.dim

    def grid(self, r: float) -> Grid:
        margin = self.margin if self.margin is not None else 32 * self.h
        return Grid.covering(dilate(self.T, r), self.h, margin)

    def build(self, r) -> DiscreteOperator:
        return build_nystrom(self.T, self.band, self.grid(r), r)


# ---------------------------------------------------------------------------
# dump / load


def save_operator(op: DiscreteOperator, stem: str | Path, fmt: str = "npy") -> list[Path]:
    """Write the set block (``.npy`` or ``.csv``) plus a JSON sidecar.

    Only the set block is stored; the ambient matrix is zero elsewhere and
    the sidecar records where the block lives.
    """
    stem = Path(stem)
    if fmt == "npy":
        data_path = stem.with_suffix(".npy")
        np.save(data_path, op.block)
    elif fmt == "csv":
        data_path = stem.with_suffix(".csv")
        if op.is_complex:
            raise ValueError("complex operators can only be stored as .npy")
        np.savetxt(data_path, op.block, delimiter=",", fmt="%.17g")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    sidecar = {
        "backend": op.backend,
        "ambient_dim": op.ambient_dim,
        "analytic_trace": op.analytic_trace,
        "set_indices": op.set_indices.tolist(),
        "grid": op.grid.to_json() if op.grid is not None else None,
        "matrix_file": data_path.name,
        "dtype": str(op.block.dtype),
        "meta": op.meta,
    }
    json_path = stem.with_suffix(".json")
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return [data_path, json_path]


def load_operator(stem: str | Path) -> DiscreteOperator:
    stem = Path(stem)
    sidecar = json.loads(stem.with_suffix(".json").read_text())
    data_path = stem.parent / sidecar["matrix_file"]
    if data_path.suffix == ".npy":
        block = np.load(data_path)
    else:
        block = np.loadtxt(data_path, delimiter=",", ndmin=2)
    grid = Grid.from_json(sidecar["grid"]) if sidecar["grid"] else None
    return DiscreteOperator(
        block,
        np.asarray(sidecar["set_indices"], dtype=np.intp),
        int(sidecar["ambient_dim"]),
        float(sidecar["analytic_trace"]),
        sidecar["backend"],
        grid,
        sidecar["meta"],
    )
