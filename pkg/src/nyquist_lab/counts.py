"""Eigenvalue counts, plunge widths, scale sweeps and the family-size ceiling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ._io import dumps_17g, write_csv
from .family import construct_family, family_density, select_parameters
from .spectral import EigensolverError, Spectrum, eigendecompose
from .timeband import DiscreteOperator

TRACE_RTOL = 1e-9


def _eigs(spec) -> np.ndarray:
    return spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec)


def count_above(spec, gamma: float) -> int:
    """``#{k : lam_k >= gamma}`` (inclusive threshold)."""
    return int(np.sum(_eigs(spec) >= gamma))


def plunge_width(spec, delta: float) -> int:
    """``#{k : delta < lam_k < 1 - delta}``."""
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    lam = _eigs(spec)
    return int(np.sum((lam > delta) & (lam < 1 - delta)))


def upper_bound_certificate(spec, epsilon: float, delta: float) -> float:
    """Ceiling on the size of any orthonormal epsilon-localized set.

    ``trace / (1 - 2 eps) + plunge / delta``: at most ``plunge / delta``
    members can carry weight ``delta`` on the plunge eigenspace, and each of
    the rest contributes at least ``1 - 2 eps`` to the trace.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    lam = _eigs(spec)
    return float(np.sum(lam)) / (1 - 2 * epsilon) + plunge_width(lam, delta) / delta


class Setup(Protocol):
    """A scale-indexed family of operators (see ``DpssSetup`` and friends)."""

    scale_exponent: int
    reference_density: float

    def build(self, scale) -> DiscreteOperator: ...


@dataclass
class SweepEntry:
    scale: float
    count_above: int
    plunge: int
    trace: float
    analytic_trace: float
    density: float
    squared_trace: float
    trace_matches: bool
    family_size: int | None = None
    source_count: int | None = None
    certificate: float | None = None
    sandwich: bool | None = None
    family_ratio: float | None = None
    max_residual: float | None = None


@dataclass
class SweepResult:
    """Per-scale counts plus a least-squares fit ``plunge ~ a + b log(scale)``."""

    entries: list[SweepEntry]
    fitted_log_coefficient: float
    fitted_intercept: float
    fit_relative_residual: float
    reference_density: float
    gamma: float
    delta: float
    checks: dict = field(default_factory=dict)
    family: dict | None = None

    @property
    def scales(self) -> np.ndarray:
        return np.array([e.scale for e in self.entries])

    @property
    def densities(self) -> np.ndarray:
        return np.array([e.density for e in self.entries])

    @property
    def plunges(self) -> np.ndarray:
        return np.array([e.plunge for e in self.entries])

    CSV_BASE = ["scale", "count_above", "plunge", "trace", "density"]
    CSV_FAMILY = ["family_size", "certificate", "sandwich"]

    def to_csv(self, path) -> None:
        header = list(self.CSV_BASE)
        with_family = self.family is not None
        if with_family:
            header += self.CSV_FAMILY
        rows = []
        for e in self.entries:
            row = [e.scale, e.count_above, e.plunge, e.trace, e.density]
            if with_family:
                row += [e.family_size, e.certificate, "pass" if e.sandwich else "fail"]
            rows.append(row)
        write_csv(path, header, rows)

    def to_dict(self) -> dict:
        return {
            "entries": [vars(e) for e in self.entries],
            "fitted_log_coefficient": self.fitted_log_coefficient,
            "fitted_intercept": self.fitted_intercept,
            "fit_relative_residual": self.fit_relative_residual,
            "reference_density": self.reference_density,
            "gamma": self.gamma,
            "delta": self.delta,
            "checks": self.checks,
            "family": self.family,
        }

    def to_json(self, path, **meta) -> None:
        with open(path, "w") as fh:
            fh.write(dumps_17g({**self.to_dict(), **meta}))


def fit_log(scales, values) -> tuple[float, float, float]:
    """Ordinary least squares of ``values`` on ``log(scales)``.

    Returns ``(slope, intercept, relative_residual)`` where the residual is
    ``||values - fit|| / ||values||``.
    """
    x = np.log(np.asarray(scales, dtype=float))
    y = np.asarray(values, dtype=float)
    A = np.column_stack([np.ones_like(x), x])
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a + b * x)
    norm = np.linalg.norm(y)
    rel = float(np.linalg.norm(resid) / norm) if norm > 0 else 0.0
    return float(b), float(a), rel


def run_sweep(
    setup: Setup,
    scales: Sequence[float],
    gamma: float = 0.5,
    delta: float = 0.1,
    epsilon: float | None = None,
    sigma2: float | None = None,
) -> SweepResult:
    """Build, decompose and count at every scale.

    When ``epsilon`` is given the localized family is also constructed at
    each scale and compared with ``upper_bound_certificate`` (the sandwich
    check).  Scales must be strictly increasing, at least three of them.
    """
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise ValueError("a sweep needs at least three scales")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly increasing")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    params = select_parameters(epsilon, sigma2) if epsilon is not None else None
    d = setup.scale_exponent
    ref = setup.reference_density
    entries = []
    for s in scales:
        try:
            op = setup.build(int(s) if s.is_integer() else s)
            spec = eigendecompose(op)
        except EigensolverError as exc:
            raise EigensolverError(f"scale {s:g}: {exc}") from exc
        trace = spec.trace
        matches = abs(trace - op.numeric_trace) <= TRACE_RTOL * max(abs(op.numeric_trace), 1.0)
        entry = SweepEntry(
            scale=s,
            count_above=count_above(spec, gamma),
            plunge=plunge_width(spec, delta),
            trace=trace,
            analytic_trace=op.analytic_trace,
            density=count_above(spec, gamma) / s**d,
            squared_trace=spec.squared_trace,
            trace_matches=bool(matches),
        )
        if params is not None:
            fam = construct_family(spec, op, params)
            cert = upper_bound_certificate(spec, params.epsilon, delta)
            dens = family_density(fam, s, d, ref)
            entry.family_size = fam.size
            entry.source_count = fam.source_count
            entry.certificate = cert
            entry.sandwich = fam.size <= cert
            entry.family_ratio = dens.ratio
            entry.max_residual = fam.max_residual
        entries.append(entry)

    slope, intercept, rel = fit_log(scales, [e.plunge for e in entries])
    dens = np.array([e.density for e in entries])
    plunge = np.array([e.plunge for e in entries], dtype=float)
    per_scale = plunge / np.array(scales) ** d
    checks = {
        "densities_converge": bool(abs(dens[-1] - ref) <= abs(dens[0] - ref)),
        "plunge_nondecreasing": bool(np.all(np.diff(plunge) >= 0)),
        "plunge_sublinear": bool(np.all(np.diff(per_scale) <= 0) and per_scale[-1] < per_scale[0]),
        "trace_matches": all(e.trace_matches for e in entries),
    }
    family = None
    if params is not None:
        checks["sandwich"] = all(e.sandwich for e in entries)
        eps = params.epsilon
        family = {
            **params.to_json(),
            "lower_density": (1 + eps) * ref,
            "upper_density": ref / (1 - 2 * eps),
            "target_density": (1 + params.gamma) * ref,
        }
    return SweepResult(entries, slope, intercept, rel, ref, gamma, delta, checks, family)
