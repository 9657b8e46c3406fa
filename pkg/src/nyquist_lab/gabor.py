"""Gabor localization operators on the time-frequency plane (d = 1).

The window is the unit-norm Gaussian ``g(t) = 2^(1/4) exp(-pi t^2)``, whose
time-frequency shifts ``pi_z g(t) = exp(2 pi i xi t) g(t - x)`` have the
closed-form inner product

    K(z, w) = exp(-pi |z - w|^2 / 2) * exp(i pi (xi - eta)(x + y))

for ``z = (x, xi)`` and ``w = (y, eta)``.  ``D_S P_g D_S`` is discretized on a
midpoint grid of the plane exactly like the Nystrom time-band operator.

The eigenvalues for a centered disk have an independent characterisation:
the Hermite functions are the eigenfunctions, so the ``k``-th eigenvalue is
the energy of ``V_g h_k`` inside the disk.  ``hermite_oracle`` evaluates that
energy by quadrature without assembling any matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import SweepResult, run_sweep, upper_bound_certificate
from .family import FamilyDensity, LocalizedFamily, construct_family, family_density, select_parameters
from .setgeom import Disk, Grid, SetSpec, dilate, measure, select_nodes
from .spectral import Spectrum, eigendecompose
from .timeband import DiscreteOperator

__all__ = [
    "GaussianWindow",
    "gabor_kernel",
    "stft",
    "build_gabor_operator",
    "hermite_functions",
    "hermite_oracle",
    "GaborSetup",
    "gabor_family",
    "gabor_sweep",
    "upper_bound_certificate",
]


@dataclass(frozen=True)
class GaussianWindow:
    """``g(t) = 2^(1/4) exp(-pi t^2)``; unit L2 norm."""

    def __call__(self, t):
        return 2**0.25 * np.exp(-np.pi * np.asarray(t, dtype=float) ** 2)

    def to_json(self) -> dict:
        return {"window": "gaussian", "formula": "2^(1/4) exp(-pi t^2)"}


def gabor_kernel(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``<pi_z g, pi_w g>`` for the Gaussian window (broadcasting over points)."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    dx = z[..., 0] - w[..., 0]
    dxi = z[..., 1] - w[..., 1]
    modulus = np.exp(-np.pi * (dx**2 + dxi**2) / 2)
    return modulus * np.exp(1j * np.pi * dxi * (z[..., 0] + w[..., 0]))


def stft(f: np.ndarray, time_grid: Grid, tf: Grid, window=None, norm_tol: float = 1e-8) -> np.ndarray:
    """Short-time Fourier transform of samples ``f`` on ``time_grid``.

    ``V f(x, xi) = w_t * sum_t f(t) conj(g(t - x)) exp(-2 pi i xi t)``,
    returned flattened in ``tf`` node order (``x`` slow, ``xi`` fast).  The
    window must have unit norm on the time grid to within ``norm_tol``.
    """
    window = GaussianWindow() if window is None else window
    if time_grid.dim != 1 or tf.dim != 2:
        raise ValueError("stft needs a 1-d time grid and a 2-d time-frequency grid")
    t = time_grid.axis(0)
    w_t = time_grid.weight
    g_norm = math.sqrt(w_t * np.sum(np.abs(window(t)) ** 2))
    if abs(g_norm - 1) > norm_tol:
        raise ValueError(f"window norm on the time grid is {g_norm!r}, expected 1")
    f = np.asarray(f)
    if f.shape != t.shape:
        raise ValueError("f must be sampled on the time grid")
    x, xi = tf.axis(0), tf.axis(1)
    shifted = np.conj(window(t[None, :] - x[:, None]))  # (x, t)
    modes = np.exp(-2j * np.pi * xi[:, None] * t[None, :])  # (xi, t)
    V = w_t * (shifted * f[None, :]) @ modes.T
    return V.ravel()


def build_gabor_operator(S: SetSpec, tf: Grid, r: float = 1.0) -> DiscreteOperator:
    """Discretized ``D_{rS} P_g D_{rS}`` with entries ``w conj(K(z_i, z_j))``.

    Complex Hermitian; ``analytic_trace`` is ``|rS|`` because ``K(z, z) = 1``.
    """
    if S.dim != 2 or tf.dim != 2:
        raise ValueError("Gabor regions live in the plane (d = 1)")
    rS = dilate(S, r)
    inside, _ = select_nodes(rS, tf)
    z = tf.nodes[inside]
    block = tf.weight * np.conj(gabor_kernel(z[:, None, :], z[None, :, :]))
    block = (block + block.conj().T) / 2
    meta = {"S": S.to_json(), "r": float(r), **GaussianWindow().to_json()}
    return DiscreteOperator(block, inside, tf.size, measure(rS), "gabor", tf, meta)


def hermite_functions(kmax: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions ``psi_0 .. psi_kmax`` at ``x``.

    Three-term recurrence on the normalised functions themselves, which
    stays finite where the polynomials ``H_k`` would overflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if kmax >= 1:
        out[1] = math.sqrt(2) * x * out[0]
    for k in range(1, kmax):
        out[k + 1] = math.sqrt(2 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _window_hermite(k: int, t: np.ndarray) -> np.ndarray:
    # h_k(t) = (2 pi)^(1/4) psi_k(sqrt(2 pi) t): h_0 is the window itself
    s = math.sqrt(2 * math.pi) * t
    return (2 * math.pi) ** 0.25 * hermite_functions(k, s)[k]


def hermite_oracle(k: int, S: SetSpec, n_radial: int = 160, n_time: int = 240) -> float:
    """Energy of ``V_g h_k`` inside a centered disk, by nested quadrature.

    ``|V_g h_k|`` is radial, so the energy is ``int_0^R |V(rho, 0)|^2 2 pi rho
    d rho``.  Both the radial integral and the inner time integral
    ``V(rho, 0) = int h_k(t) g(t - rho) dt`` use Gauss-Legendre rules.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if len(S.parts) != 1 or not isinstance(S.parts[0], Disk):
        raise ValueError("the Hermite oracle needs a single disk")
    disk = S.parts[0]
    if disk.center != (0.0, 0.0):
        raise ValueError("the Hermite oracle needs a disk centered at the origin")
    R = disk.radius
    g = GaussianWindow()
    u, wu = np.polynomial.legendre.leggauss(n_radial)
    rho = R * (u + 1) / 2
    w_rho = R / 2 * wu
    # inner integrand is localized around t = rho/2 with width ~ 1/sqrt(2 pi)
    half = 8.0 + math.sqrt(k + 1)
    v, wv = np.polynomial.legendre.leggauss(n_time)
    t = rho[:, None] / 2 + half * v[None, :]
    V = half * np.sum(wv[None, :] * _window_hermite(k, t) * g(t - rho[:, None]), axis=1)
    return float(np.sum(w_rho * 2 * np.pi * rho * V**2))


@dataclass(frozen=True)
class GaborSetup:
    """Scale family ``r -> build_gabor_operator(S, grid, r)`` on a fixed grid."""

    S: SetSpec
    h: float
    extent: float

    scale_exponent = 2

    @property
    def reference_density(self) -> float:
        return measure(self.S)

    @property
    def grid(self) -> Grid:
        return Grid.uniform(self.extent, self.h, 2)

    def build(self, r) -> DiscreteOperator:
        return build_gabor_operator(self.S, self.grid, r)


def gabor_family(
    S: SetSpec,
    tf: Grid,
    r: float,
    epsilon: float,
    sigma2: float | None = None,
) -> tuple[DiscreteOperator, Spectrum, LocalizedFamily, FamilyDensity]:
    """Localized family of the Gabor operator on ``rS`` with its density report."""
    op = build_gabor_operator(S, tf, r)
    spec = eigendecompose(op)
    fam = construct_family(spec, op, select_parameters(epsilon, sigma2))
    return op, spec, fam, family_density(fam, r, 2, measure(S))


def gabor_sweep(
    S: SetSpec,
    scales,
    h: float,
    extent: float,
    gamma: float = 0.5,
    delta: float = 0.1,
    epsilon: float | None = None,
    sigma2: float | None = None,
) -> SweepResult:
    return run_sweep(GaborSetup(S, h, extent), scales, gamma, delta, epsilon, sigma2)
