"""``nyquist-lab``: configuration-driven spectra, families and sweeps.

    nyquist-lab <spectrum|family|sweep> --config run.json [--out DIR]
                [--format csv,json] [--seed N]

Exit codes: 0 success, 2 invalid configuration, 3 numeric or I/O failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import config_hash
from .counts import count_above, plunge_width, run_sweep, upper_bound_certificate
from .family import construct_family, family_density, select_parameters
from .gabor import GaborSetup
from .setgeom import SetSpec
from .spectral import EigensolverError, eigendecompose
from .timeband import BandSpec, DpssSetup, NystromSetup

BACKENDS = ("nystrom", "dpss", "gabor")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """One JSON document describing a run; unknown keys are rejected.

    ``dpss`` needs ``W`` (and ``N`` outside sweeps); ``nystrom`` needs
    ``T``, ``Omega`` and ``h``; ``gabor`` needs ``S``, ``h`` and ``extent``.
    Sweeps read ``scales`` (``N`` values for dpss, dilations otherwise).
    """

    backend: str
    N: int | None = None
    W: float | None = None
    padding: int | None = None
    T: dict | None = None
    Omega: dict | None = None
    S: dict | None = None
    h: float | None = None
    extent: float | None = None
    margin: float | None = None
    r: float = 1.0
    scales: list | None = None
    epsilon: float = 0.2
    sigma2: float | None = None
    gamma: float = 0.5
    delta: float = 0.1
    out: str | None = None
    formats: list = field(default_factory=lambda: list(FORMATS))
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "backend" not in raw:
            raise ConfigError("missing required key 'backend'")
        try:
            cfg = cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate_common()
        return cfg

    def require(self, *keys):
        missing = [k for k in keys if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"missing required key(s) for backend {self.backend!r}: {missing}")

    def validate_common(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if isinstance(self.formats, str):
            self.formats = self.formats.split(",")
        bad = set(self.formats) - set(FORMATS)
        if bad or not self.formats:
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}")
        if not 0 < self.epsilon < 0.5:
            raise ConfigError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        sigma2 = self.epsilon / 10 if self.sigma2 is None else self.sigma2
        if not 0 < sigma2 < self.epsilon:
            raise ConfigError(f"need 0 < sigma2 < epsilon, got {sigma2}")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0 < self.delta < 0.5:
            raise ConfigError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not self.r > 0:
            raise ConfigError("r must be positive")
        if self.backend == "dpss":
            self.require("W")
            if not 0 < self.W < 0.5:
                raise ConfigError(f"W must lie in (0, 1/2), got {self.W}")
        elif self.backend == "nystrom":
            self.require("T", "Omega", "h")
        else:
            self.require("S", "h", "extent")

    def setup(self):
        try:
            if self.backend == "dpss":
                return DpssSetup(self.W, self.padding)
            if self.backend == "nystrom":
                return NystromSetup(
                    SetSpec.from_json(self.T), BandSpec(SetSpec.from_json(self.Omega)), self.h, self.margin
                )
            return GaborSetup(SetSpec.from_json(self.S), self.h, self.extent)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid set specification: {exc}") from exc

    def build_single(self):
        setup = self.setup()
        if self.backend == "dpss":
            self.require("N")
            if int(self.N) != self.N or self.N < 1:
                raise ConfigError("N must be a positive integer")
            return setup, setup.build(int(self.N)), int(self.N)
        try:
            return setup, setup.build(self.r), self.r
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_scales(self) -> list:
        self.require("scales")
        s = list(self.scales)
        if len(s) < 3:
            raise ConfigError("a sweep needs at least three scales")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError("scales must be strictly increasing")
        if self.backend == "dpss" and any(int(x) != x or x < 1 for x in s):
            raise ConfigError("dpss scales are matrix sizes N (positive integers)")
        return s


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.out or cfg.out or ".")


def _prepare(out: Path):
    out.mkdir(parents=True, exist_ok=True)


def _meta(cfg: RunConfig, raw: dict, command: str) -> dict:
    return {
        "command": command,
        "backend": cfg.backend,
        "config_hash": config_hash(raw),
        "seed": cfg.seed,
    }


def cmd_spectrum(cfg: RunConfig, raw: dict, out: Path) -> int:
    setup, op, scale = cfg.build_single()
    spec = eigendecompose(op)
    _prepare(out)
    if "csv" in cfg.formats:
        spec.to_csv(out / "spectrum.csv")
    if "json" in cfg.formats:
        spec.to_json(
            out / "spectrum.json",
            analytic_trace=op.analytic_trace,
            numeric_trace=op.numeric_trace,
            scale=scale,
            count_above=count_above(spec, cfg.gamma),
            plunge=plunge_width(spec, cfg.delta),
            gamma=cfg.gamma,
            delta=cfg.delta,
            **_meta(cfg, raw, "spectrum"),
        )
    print(f"eigenvalues={len(spec)} trace={spec.trace:.17g} residual_bound={spec.residual_bound:.3e}")
    return 0


def cmd_family(cfg: RunConfig, raw: dict, out: Path) -> int:
    try:
        params = select_parameters(cfg.epsilon, cfg.sigma2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    setup, op, scale = cfg.build_single()
    spec = eigendecompose(op)
    fam = construct_family(spec, op, params)
    dens = family_density(fam, scale, setup.scale_exponent, setup.reference_density)
    _prepare(out)
    fam.save(
        out / "family",
        csv="csv" in cfg.formats,
        density=dataclasses.asdict(dens),
        certificate=upper_bound_certificate(spec, cfg.epsilon, cfg.delta),
        scale=scale,
        **_meta(cfg, raw, "family"),
    )
    print(fam.summary())
    if fam.diagnostic:
        print(fam.diagnostic, file=sys.stderr)
    return 0


def cmd_sweep(cfg: RunConfig, raw: dict, out: Path) -> int:
    scales = cfg.sweep_scales()
    setup = cfg.setup()
    try:
        result = run_sweep(setup, scales, cfg.gamma, cfg.delta, cfg.epsilon, cfg.sigma2)
    except EigensolverError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _prepare(out)
    if "csv" in cfg.formats:
        result.to_csv(out / "sweep.csv")
    if "json" in cfg.formats:
        result.to_json(out / "sweep.json", **_meta(cfg, raw, "sweep"))
    for e in result.entries:
        status = "pass" if e.sandwich else "FAIL"
        print(
            f"scale={e.scale:g} count={e.count_above} plunge={e.plunge} "
            f"family={e.family_size} certificate={e.certificate:.6g} sandwich={status}"
        )
    if result.family is not None:
        f = result.family
        print(
            f"density bracket: lower={f['lower_density']:.6g} "
            f"target={f['target_density']:.6g} upper={f['upper_density']:.6g}"
        )
    return 0


COMMANDS = {"spectrum": cmd_spectrum, "family": cmd_family, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nyquist-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides config 'out')")
    p.add_argument("--format", help="comma-separated subset of csv,json")
    p.add_argument("--seed", type=int, help="seed recorded with the outputs")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if args.format is not None:
            raw = {**raw, "formats": args.format.split(",")}
        if args.seed is not None:
            raw = {**raw, "seed": args.seed}
        cfg = RunConfig.from_dict(raw)
        np.random.seed(cfg.seed % 2**32)
        return COMMANDS[args.command](cfg, raw, _out_dir(args, cfg))
    except ConfigError as exc:
        print(f"nyquist-lab: config error: {exc}", file=sys.stderr)
        return 2
    except (EigensolverError, OSError, ArithmeticError, ValueError) as exc:
        print(f"nyquist-lab: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
