"""Regions in time, frequency and the time-frequency plane.

A region is a finite union of axis-aligned boxes, or (in the plane only) a
union of disks and rectangles.  Grids use the midpoint convention: the nodes
of an axis with half-extent ``L`` and step ``h`` sit at ``-L + h/2 + k h``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Box:
    """Product of closed intervals ``bounds[a] = (lo, hi)``."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("box needs at least one axis")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"interval [{lo}, {hi}] is empty or reversed")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.bounds)

    def scaled(self, r: float) -> "Box":
        return Box(tuple((r * lo, r * hi) for lo, hi in self.bounds))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        inside = np.ones(len(pts), dtype=bool)
        for a, (lo, hi) in enumerate(self.bounds):
            inside &= (pts[:, a] >= lo) & (pts[:, a] <= hi)
        return inside

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        b = np.array(self.bounds)
        return b[:, 0], b[:, 1]


@dataclass(frozen=True)
class Disk:
    """Closed disk in the plane."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        if len(center) != 2:
            raise ValueError("disks are planar: center needs two coordinates")
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    dim = 2

    @property
    def volume(self) -> float:
        return math.pi * self.radius**2

    def scaled(self, r: float) -> "Disk":
        return Disk((r * self.center[0], r * self.center[1]), r * self.radius)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d2 = (pts[:, 0] - self.center[0]) ** 2 + (pts[:, 1] - self.center[1]) ** 2
        return d2 <= self.radius**2

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.array(self.center)
        return c - self.radius, c + self.radius


def _overlap_positive(p: Box | Disk, q: Box | Disk) -> bool:
    if isinstance(p, Box) and isinstance(q, Box):
        return all(
            min(hi1, hi2) - max(lo1, lo2) > 0
            for (lo1, hi1), (lo2, hi2) in zip(p.bounds, q.bounds)
        )
    if isinstance(p, Disk) and isinstance(q, Disk):
        return math.dist(p.center, q.center) < p.radius + q.radius
    box, disk = (p, q) if isinstance(p, Box) else (q, p)
    # nearest point of the box to the disk center
    nearest = [min(max(c, lo), hi) for c, (lo, hi) in zip(disk.center, box.bounds)]
    return math.dist(nearest, disk.center) < disk.radius


@dataclass(frozen=True)
class SetSpec:
    """A finite union of boxes (any dimension) or disks/rectangles (plane).

    Parts may touch along their boundaries but must not overlap on a set of
    positive measure; the construction rejects such unions.
    """

    dim: int
    parts: tuple[Box | Disk, ...]
    label: str = ""

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not parts:
            raise ValueError("a set needs at least one part")
        for p in parts:
            if p.dim != self.dim:
                raise ValueError(f"part of dimension {p.dim} in a {self.dim}-d set")
            if isinstance(p, Disk) and self.dim != 2:
                raise ValueError("disks are only allowed in the plane")
        for p, q in itertools.combinations(parts, 2):
            if _overlap_positive(p, q):
                raise ValueError(f"parts {p} and {q} overlap on positive measure")

    @classmethod
    def interval(cls, lo: float, hi: float, label: str = "") -> "SetSpec":
        return cls(1, (Box(((lo, hi),)),), label)

    @classmethod
    def intervals(cls, *pairs: tuple[float, float], label: str = "") -> "SetSpec":
        return cls(1, tuple(Box((p,)) for p in pairs), label)

    @classmethod
    def box(cls, *bounds: tuple[float, float], label: str = "") -> "SetSpec":
        return cls(len(bounds), (Box(tuple(bounds)),), label)

    @classmethod
    def disk(cls, radius: float, center=(0.0, 0.0), label: str = "") -> "SetSpec":
        return cls(2, (Disk(tuple(center), radius),), label)

    @property
    def has_disks(self) -> bool:
        return any(isinstance(p, Disk) for p in self.parts)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            pts = pts.reshape(-1, self.dim)
        inside = np.zeros(len(pts), dtype=bool)
        for p in self.parts:
            inside |= p.contains(pts)
        return inside

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lows, highs = zip(*(p.bounding_box() for p in self.parts))
        return np.min(lows, axis=0), np.max(highs, axis=0)

    def reflected(self) -> "SetSpec":
        """The set ``-s``."""
        parts = []
        for p in self.parts:
            if isinstance(p, Box):
                parts.append(Box(tuple((-hi, -lo) for lo, hi in p.bounds)))
            else:
                parts.append(Disk((-p.center[0], -p.center[1]), p.radius))
        return SetSpec(self.dim, tuple(parts), self.label)

    def to_json(self) -> dict:
        parts = []
        for p in self.parts:
            if isinstance(p, Box):
                parts.append({"box": [list(b) for b in p.bounds]})
            else:
                parts.append({"disk": {"center": list(p.center), "radius": p.radius}})
        out = {"dim": self.dim, "parts": parts}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SetSpec":
        """Parse ``{"dim": 1, "parts": [{"box": [[0, 1]]}]}``-style documents."""
        if not isinstance(obj, dict):
            raise ValueError("set specification must be a JSON object")
        unknown = set(obj) - {"dim", "parts", "label"}
        if unknown:
            raise ValueError(f"unknown set keys: {sorted(unknown)}")
        if "dim" not in obj or "parts" not in obj:
            raise ValueError("set specification needs 'dim' and 'parts'")
        parts = []
        for item in obj["parts"]:
            if not isinstance(item, dict) or len(item) != 1:
                raise ValueError(f"malformed set part: {item!r}")
            (kind, val), = item.items()
            if kind == "box":
                parts.append(Box(tuple(tuple(b) for b in val)))
            elif kind == "disk":
                parts.append(Disk(tuple(val["center"]), val["radius"]))
            else:
                raise ValueError(f"unknown part kind {kind!r}")
        return cls(int(obj["dim"]), tuple(parts), obj.get("label", ""))


def measure(s: SetSpec) -> float:
    """Lebesgue measure: the sum of the part volumes (parts never overlap)."""
    return math.fsum(p.volume for p in s.parts)


def dilate(s: SetSpec, r: float) -> SetSpec:
    """The set ``r s``; every endpoint, center and radius is scaled by ``r``."""
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    return SetSpec(s.dim, tuple(p.scaled(r) for p in s.parts), s.label)


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on ``prod_a [-L_a, L_a]``.

    Node vectors are flattened row-major (last axis fastest).  Functions on
    the grid are carried as coordinates ``c = sqrt(w) * samples`` so that the
    weighted inner product ``w * sum(f * conj(g))`` becomes the Euclidean one.
    """

    extent: tuple[float, ...]
    step: tuple[float, ...]
    shape: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        extent = tuple(float(x) for x in np.atleast_1d(self.extent))
        step = tuple(float(x) for x in np.atleast_1d(self.step))
        if len(step) == 1 and len(extent) > 1:
            step = step * len(extent)
        if len(step) != len(extent):
            raise ValueError("extent and step disagree on the dimension")
        shape = []
        for L, h in zip(extent, step):
            if not (L > 0 and h > 0):
                raise ValueError("grid extent and step must be positive")
            n = 2 * L / h
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise ValueError(f"2L/h = {n} is not an integer")
            shape.append(int(round(n)))
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "shape", tuple(shape))

    @classmethod
    def uniform(cls, L: float, h: float, dim: int = 1) -> "Grid":
        return cls((L,) * dim, (h,) * dim)

    @classmethod
    def covering(cls, s: SetSpec, h: float, margin: float | None = None) -> "Grid":
        """Smallest symmetric grid with step ``h`` holding ``s`` plus ``margin``.

        The half-extent is a multiple of ``h``, so set endpoints that are
        multiples of ``h`` fall on cell faces and node counts are exact.
        """
        if margin is None:
            margin = 4 * h
        lo, hi = s.bounding_box()
        reach = np.maximum(np.abs(lo), np.abs(hi)) + max(margin, h)
        extent = tuple(math.ceil(x / h - 1e-9) * h for x in reach)
        return cls(extent, (h,) * s.dim)

    @property
    def dim(self) -> int:
        return len(self.extent)

    @property
    def weight(self) -> float:
        return math.prod(self.step)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def axis(self, a: int) -> np.ndarray:
        L, h, n = self.extent[a], self.step[a], self.shape[a]
        return -L + h / 2 + h * np.arange(n)

    @property
    def nodes(self) -> np.ndarray:
        axes = np.meshgrid(*(self.axis(a) for a in range(self.dim)), indexing="ij")
        return np.stack([x.ravel() for x in axes], axis=1)

    def to_coords(self, samples: np.ndarray) -> np.ndarray:
        return np.sqrt(self.weight) * np.asarray(samples)

    def to_samples(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords) / np.sqrt(self.weight)

    def to_json(self) -> dict:
        return {"extent": list(self.extent), "step": list(self.step)}

    @classmethod
    def from_json(cls, obj: dict) -> "Grid":
        return cls(tuple(obj["extent"]), tuple(obj["step"]))


def select_nodes(s: SetSpec, g: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Indices of grid nodes inside ``s`` and of those outside it.

    ``s`` must sit inside the grid with at least one node spacing to spare on
    every side, so that off-set nodes exist (they carry the kernel vectors of
    the localization operators).  Nodes on an interval endpoint count as
    inside.
    """
    if s.dim != g.dim:
        raise ValueError(f"{s.dim}-d set on a {g.dim}-d grid")
    lo, hi = s.bounding_box()
    ext = np.array(g.extent) - np.array(g.step)
    if np.any(lo < -ext - 1e-12) or np.any(hi > ext + 1e-12):
        raise ValueError("set does not fit inside the grid with one-node margin")
    mask = s.contains(g.nodes)
    inside = np.flatnonzero(mask)
    if inside.size == 0:
        raise ValueError("no grid node falls inside the set")
    return inside, np.flatnonzero(~mask)
