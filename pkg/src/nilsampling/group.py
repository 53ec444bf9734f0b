"""Group law in canonical coordinates of the second kind and the sampling set Γ.

A point ``(z, y, x)`` stands for ``exp(z·Z) exp(y·Y) exp(x·X)``.  Because the
commutator ideal is central, moving ``exp(x·X)`` past ``exp(y'·Y)`` costs exactly
one central factor ``exp([x·X, y'·Y])``, which gives the closed-form product

    (z, y, x)(z', y', x') = (z + z' + w(x, y'), y + y', x + x'),
    w_k(x, y') = sum_{i,j} x_i c[i][j][k] y'_j.

Batched versions work on arrays of shape (N, n) laid out as ``[z | y | x]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .algebra import AlgebraSpec

__all__ = [
    "GammaWindow",
    "GroupElement",
    "enumerate_gamma",
    "identity",
    "inverse",
    "inverse_array",
    "iter_gamma",
    "multiply",
    "multiply_array",
]


@dataclass(frozen=True)
class GroupElement:
    z: tuple[float, ...]
    y: tuple[float, ...]
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.y) != len(self.x):
            raise ValueError("y and x blocks must have the same length")

    @classmethod
    def from_array(cls, spec: AlgebraSpec, coords) -> "GroupElement":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (spec.n,):
            raise ValueError(f"expected {spec.n} coordinates, got shape {coords.shape}")
        k, d = spec.center_dim, spec.d
        return cls(coords[:k], coords[k : k + d], coords[k + d :])

    def as_array(self) -> np.ndarray:
        return np.array(self.z + self.y + self.x, dtype=float)

    def check(self, spec: AlgebraSpec) -> None:
        if len(self.z) != spec.center_dim or len(self.y) != spec.d:
            raise ValueError(
                f"element has blocks ({len(self.z)}, {len(self.y)}, {len(self.x)}), "
                f"algebra expects ({spec.center_dim}, {spec.d}, {spec.d})"
            )


def identity(spec: AlgebraSpec) -> GroupElement:
    return GroupElement((0.0,) * spec.center_dim, (0.0,) * spec.d, (0.0,) * spec.d)


def _split(spec: AlgebraSpec, arr: np.ndarray):
    k, d = spec.center_dim, spec.d
    return arr[..., :k], arr[..., k : k + d], arr[..., k + d :]


def _central_term(spec: AlgebraSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("...i,ijk,...j->...k", x, spec.structure, y)


def multiply_array(spec: AlgebraSpec, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Batched product of coordinate arrays (broadcasting over leading axes)."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if g.shape[-1] != spec.n or h.shape[-1] != spec.n:
        raise ValueError(f"coordinate arrays must have trailing length {spec.n}")
    gz, gy, gx = _split(spec, g)
    hz, hy, hx = _split(spec, h)
    z = gz + hz + _central_term(spec, gx, hy)
    z, y, x = np.broadcast_arrays(z, gy + hy, gx + hx)
    return np.concatenate([z, y, x], axis=-1)


def inverse_array(spec: AlgebraSpec, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    gz, gy, gx = _split(spec, g)
    return np.concatenate([-gz + _central_term(spec, gx, gy), -gy, -gx], axis=-1)


def multiply(spec: AlgebraSpec, g: GroupElement, h: GroupElement) -> GroupElement:
    g.check(spec)
    h.check(spec)
    return GroupElement.from_array(spec, multiply_array(spec, g.as_array(), h.as_array()))


def inverse(spec: AlgebraSpec, g: GroupElement) -> GroupElement:
    g.check(spec)
    return GroupElement.from_array(spec, inverse_array(spec, g.as_array()))


@dataclass(frozen=True)
class GammaWindow:
    """Finite box of integer Malcev coordinates, one inclusive range per block."""

    z_range: tuple[int, int]
    y_range: tuple[int, int]
    x_range: tuple[int, int]

    def __post_init__(self):
        for name in ("z_range", "y_range", "x_range"):
            lo, hi = getattr(self, name)
            if int(lo) != lo or int(hi) != hi:
                raise ValueError(f"{name} bounds must be integers")
            if lo > hi:
                raise ValueError(f"empty window: {name} = {(lo, hi)}")
            object.__setattr__(self, name, (int(lo), int(hi)))

    @classmethod
    def radius(cls, r: int) -> "GammaWindow":
        return cls((-r, r), (-r, r), (-r, r))

    def size(self, spec: AlgebraSpec) -> int:
        count = 1
        for (lo, hi), dim in zip(
            (self.z_range, self.y_range, self.x_range), (spec.center_dim, spec.d, spec.d)
        ):
            count *= (hi - lo + 1) ** dim
        return count

    def contains(self, spec: AlgebraSpec, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(coords)
        z, y, x = _split(spec, coords)
        ok = np.ones(coords.shape[0], dtype=bool)
        for block, (lo, hi) in ((z, self.z_range), (y, self.y_range), (x, self.x_range)):
            ok &= np.all((block >= lo) & (block <= hi), axis=-1)
        return ok


def enumerate_gamma(spec: AlgebraSpec, window: GammaWindow) -> np.ndarray:
    """Integer coordinates ``(m, p, q)`` of ``exp(m·Z) exp(p·Y) exp(q·X)`` in the window.

    Rows are in lexicographic order over ``[z | y | x]``.  Γ is in general not a
    subgroup, so nothing here assumes closure.
    """
    axes = (
        [range(window.z_range[0], window.z_range[1] + 1)] * spec.center_dim
        + [range(window.y_range[0], window.y_range[1] + 1)] * spec.d
        + [range(window.x_range[0], window.x_range[1] + 1)] * spec.d
    )
    grids = np.meshgrid(*[np.arange(a.start, a.stop) for a in axes], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1).astype(float)


def iter_gamma(spec: AlgebraSpec, window: GammaWindow) -> Iterator[GroupElement]:
    for row in enumerate_gamma(spec, window):
        yield GroupElement.from_array(spec, row)
