"""Band regions in the dual of the center, Plancherel quadrature, lattice partitions.

The dual of the center is identified with ``R^{n-2d}``.  The Plancherel measure is
``dμ(λ) = |det B(λ)| dλ`` and it is integrated by the midpoint rule on a uniform
grid.  A cell belongs to a region iff its center does; the boundaries involved
(region edges, the zero locus of ``det B``) are null sets.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import AlgebraSpec, ConfigError, b_matrix

__all__ = [
    "LambdaGrid",
    "LatticePartition",
    "Region",
    "abs_det",
    "check_congruence",
    "in_E",
    "make_grid",
    "parse_region",
    "partition_by_lattice",
    "plancherel_measure",
]

REGION_KINDS = ("box", "disk", "E_cap_box", "E_cap_disk", "mask")


def abs_det(spec: AlgebraSpec, lam) -> np.ndarray:
    """``|det B(λ)|`` for one point or a batch of points."""
    return np.abs(np.linalg.det(b_matrix(spec, lam)))


def in_E(spec: AlgebraSpec, lam):
    """Membership in ``E = {λ : 0 < |det B(λ)| <= 1}`` (vectorized over batches)."""
    det = abs_det(spec, lam)
    out = (det > 0) & (det <= 1.0 + 1e-12)
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class Region:
    """Bounded band region; ``E_cap_*`` kinds intersect the shape with ``E``.

    ``mask`` regions carry a boolean array over a uniform grid of ``[lo, hi)``.
    """

    kind: str
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None
    center: tuple[float, ...] | None = None
    radius: float | None = None
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ConfigError(f"unknown region kind {self.kind!r}; expected one of {REGION_KINDS}")
        if self.kind in ("box", "E_cap_box", "mask"):
            if self.lo is None or self.hi is None or len(self.lo) != len(self.hi):
                raise ConfigError(f"{self.kind} region needs lo and hi of equal length")
            object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
            object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
            if any(h < l for l, h in zip(self.lo, self.hi)):
                raise ConfigError("region has hi < lo")
        else:
            if self.center is None or self.radius is None:
                raise ConfigError(f"{self.kind} region needs center and radius")
            if self.radius < 0:
                raise ConfigError("disk radius must be non-negative")
            object.__setattr__(self, "center", tuple(float(v) for v in self.center))
            object.__setattr__(self, "radius", float(self.radius))
        if self.kind == "mask":
            if self.mask is None or self.mask.ndim != len(self.lo):
                raise ConfigError("mask region needs a boolean array with one axis per dimension")

    @classmethod
    def box(cls, lo, hi, cap_E: bool = False) -> "Region":
        return cls("E_cap_box" if cap_E else "box", lo=tuple(lo), hi=tuple(hi))

    @classmethod
    def disk(cls, center, radius, cap_E: bool = False) -> "Region":
        return cls("E_cap_disk" if cap_E else "disk", center=tuple(center), radius=radius)

    @property
    def dim(self) -> int:
        return len(self.lo) if self.lo is not None else len(self.center)

    @property
    def uses_E(self) -> bool:
        return self.kind.startswith("E_cap")

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self.lo is not None:
            return np.array(self.lo), np.array(self.hi)
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains(self, spec: AlgebraSpec | None, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points must have {self.dim} coordinates")
        if self.kind in ("box", "E_cap_box"):
            inside = np.all((pts >= np.array(self.lo)) & (pts <= np.array(self.hi)), axis=-1)
        elif self.kind == "mask":
            lo, hi = self.bbox()
            shape = np.array(self.mask.shape)
            with np.errstate(divide="ignore", invalid="ignore"):
                idx = np.floor((pts - lo) / (hi - lo) * shape).astype(int)
            ok = np.all((idx >= 0) & (idx < shape), axis=-1)
            inside = np.zeros(len(pts), dtype=bool)
            inside[ok] = self.mask[tuple(idx[ok].T)]
        else:
            r2 = np.sum((pts - np.array(self.center)) ** 2, axis=-1)
            inside = r2 <= self.radius**2 * (1 + 1e-12)
        if self.uses_E:
            if spec is None:
                raise ValueError("E-capped regions need the algebra to decide membership")
            inside = inside & in_E(spec, pts)
        return inside

    def to_dict(self) -> dict:
        if self.lo is not None:
            out: dict[str, Any] = {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi)}
            if self.mask is not None:
                out["mask_shape"] = list(self.mask.shape)
            return out
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}


def parse_region(value: str | Mapping[str, Any], dim: int | None = None) -> Region:
    """Region from a config table or a short CLI string.

    Strings look like ``"E_cap_box [-0.9,0.9]"`` (the interval is repeated on every
    axis), ``"box [-1,1]x[0,2]"`` or ``"E_cap_disk 0.89"`` (centered at the origin).
    """
    if isinstance(value, Mapping):
        kind = value.get("kind")
        if kind in ("box", "E_cap_box"):
            return Region(kind, lo=tuple(value["lo"]), hi=tuple(value["hi"]))
        if kind in ("disk", "E_cap_disk"):
            center = value.get("center")
            if center is None:
                if dim is None:
                    raise ConfigError("disk region needs a center")
                center = [0.0] * dim
            return Region(kind, center=tuple(center), radius=float(value["radius"]))
        raise ConfigError(f"unsupported region table: {dict(value)!r}")
    text = value.strip()
    match = re.match(r"([A-Za-z_]+)\s*(.*)$", text)
    if match is None:
        raise ConfigError(f"unknown region kind in {value!r}")
    kind, rest = match.group(1), match.group(2).strip()
    if kind in ("box", "E_cap_box"):
        intervals = re.findall(r"\[([^\]]+)\]", rest)
        if not intervals:
            raise ConfigError(f"cannot parse box bounds from {value!r}")
        pairs = []
        for item in intervals:
            try:
                lo, hi = (float(v.replace("−", "-")) for v in item.split(","))
            except ValueError as exc:
                raise ConfigError(f"bad interval [{item}]") from exc
            pairs.append((lo, hi))
        if len(pairs) == 1 and dim is not None:
            pairs = pairs * dim
        return Region(kind, lo=tuple(p[0] for p in pairs), hi=tuple(p[1] for p in pairs))
    if kind in ("disk", "E_cap_disk"):
        if dim is None:
            raise ConfigError("disk regions given as strings need the dimension")
        try:
            radius = float(json.loads(rest)) if rest else None
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad disk radius in {value!r}") from exc
        if radius is None:
            raise ConfigError("disk region needs a radius")
        return Region(kind, center=(0.0,) * dim, radius=radius)
    raise ConfigError(f"unknown region kind in {value!r}")


@dataclass(frozen=True, eq=False)
class LambdaGrid:
    """Midpoint quadrature nodes for ``dλ`` on a region (``|det B|`` applied per node)."""

    nodes: np.ndarray
    weights: np.ndarray
    resolution: int
    cell: np.ndarray
    region: Region | None = None

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(nodes) != len(weights):
            raise ValueError("one weight per node is required")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "cell", np.asarray(self.cell, dtype=float))

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def subset(self, index) -> "LambdaGrid":
        return LambdaGrid(self.nodes[index], self.weights[index], self.resolution, self.cell, self.region)


def make_grid(spec: AlgebraSpec | None, region: Region, resolution: int) -> LambdaGrid:
    """Cell centers of a ``resolution``-per-axis grid over the region's bounding box."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    lo, hi = region.bbox()
    width = (hi - lo) / resolution
    if np.any(width <= 0):
        return LambdaGrid(np.zeros((0, region.dim)), np.zeros(0), resolution, width, region)
    axes = [lo[i] + (np.arange(resolution) + 0.5) * width[i] for i in range(region.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    inside = region.contains(spec, pts)
    pts = pts[inside]
    return LambdaGrid(pts, np.full(len(pts), float(np.prod(width))), resolution, width, region)


def plancherel_measure(spec: AlgebraSpec, region: Region, resolution: int) -> float:
    """Midpoint estimate of ``∫_region |det B(λ)| dλ``; zero for degenerate regions."""
    grid = make_grid(spec, region, resolution)
    if len(grid) == 0:
        return 0.0
    return float(np.sum(grid.weights * abs_det(spec, grid.nodes)))


@dataclass(frozen=True, eq=False)
class LatticePartition:
    """Pieces ``A_j = (Λ + offset_j) ∩ E°`` with ``Λ = [0, 1)^{n-2d}``.

    ``labels[i]`` is the piece of grid node ``i``; ``measures[j] = μ(A_j)``.
    """

    grid: LambdaGrid
    offsets: tuple[tuple[int, ...], ...]
    labels: np.ndarray
    measures: tuple[float, ...]

    def piece(self, j: int) -> LambdaGrid:
        return self.grid.subset(self.labels == j)

    def to_dict(self) -> dict:
        return {
            "S": [list(o) for o in self.offsets],
            "piece_mu": list(self.measures),
            "mu": float(sum(self.measures)),
        }


def partition_by_lattice(spec: AlgebraSpec, region: Region, resolution: int) -> LatticePartition:
    """Split ``E°`` along the integer lattice; keeps offsets with at least one cell."""
    grid = make_grid(spec, region, resolution)
    if len(grid) == 0:
        raise ValueError("region is empty at this resolution")
    cells = np.floor(grid.nodes).astype(int)
    offsets, labels = np.unique(cells, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    dens = grid.weights * abs_det(spec, grid.nodes)
    measures = tuple(float(dens[labels == j].sum()) for j in range(len(offsets)))
    return LatticePartition(
        grid=grid,
        offsets=tuple(tuple(int(v) for v in o) for o in offsets),
        labels=labels,
        measures=measures,
    )


def check_congruence(
    spec: AlgebraSpec | None,
    region: Region,
    offsets: Sequence[Sequence[int]],
    cells_per_unit: int,
) -> float:
    """Pixel-measured ``m(E° Δ ∪_j (Λ + offset_j))``.

    Zero means ``E°`` is, up to null sets, a disjoint union of integer translates
    of the unit cube ``Λ``.
    """
    offsets = np.atleast_2d(np.asarray(offsets, dtype=int))
    lo, hi = region.bbox()
    if len(offsets) and offsets.shape[1]:
        lo = np.minimum(lo, offsets.min(axis=0))
        hi = np.maximum(hi, offsets.max(axis=0) + 1)
    lo = np.floor(lo)
    hi = np.ceil(hi)
    counts = np.maximum(((hi - lo) * cells_per_unit).astype(int), 1)
    width = (hi - lo) / counts
    axes = [lo[i] + (np.arange(counts[i]) + 0.5) * width[i] for i in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    in_region = region.contains(spec, pts)
    floor = np.floor(pts).astype(int)
    in_cubes = np.zeros(len(pts), dtype=bool)
    for off in offsets:
        in_cubes |= np.all(floor == off, axis=-1)
    return float(np.count_nonzero(in_region ^ in_cubes) * np.prod(width))
