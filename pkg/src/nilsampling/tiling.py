"""Pixelized sets that tile ``R^d`` by ``Z^d`` and pack by ``B^{-T} Z^d``.

A :class:`PixelSet` at resolution ``M`` is a list of cubes
``(base + [0, 1)^d) / M + offset`` with ``base ∈ {0..M-1}^d`` and ``offset ∈ Z^d``.
Every base cell appearing exactly once is the same as the ``Z^d``-translates of
the set tiling space, so tiling is checked combinatorially.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .algebra import AlgebraSpec, b_matrix

__all__ = [
    "BudgetExhausted",
    "LemmaBlReport",
    "PackingReport",
    "PixelSet",
    "TilingReport",
    "check_lemma_bl",
    "construct_tiling_set",
    "integer_offsets",
    "verify_packing",
    "verify_tiling",
]


class BudgetExhausted(RuntimeError):
    """Greedy reassignment ran out of integer shifts."""

    def __init__(self, unresolved: int, budget: int):
        super().__init__(f"{unresolved} pixel(s) still collide after trying shifts up to |k|_inf <= {budget}")
        self.unresolved = unresolved
        self.budget = budget


@dataclass(frozen=True, eq=False)
class PixelSet:
    M: int
    bases: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        bases = np.asarray(self.bases, dtype=np.int64)
        offsets = np.asarray(self.offsets, dtype=np.int64)
        if bases.ndim != 2 or bases.shape != offsets.shape:
            raise ValueError("bases and offsets must be (N, d) arrays of the same shape")
        if self.M < 1:
            raise ValueError("resolution must be positive")
        if np.any(bases < 0) or np.any(bases >= self.M):
            raise ValueError("base cell indices must lie in {0..M-1}")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def unit_cube(cls, d: int, M: int) -> "PixelSet":
        grids = np.meshgrid(*[np.arange(M)] * d, indexing="ij")
        bases = np.stack([g.ravel() for g in grids], axis=-1)
        return cls(M, bases, np.zeros_like(bases))

    @property
    def d(self) -> int:
        return self.bases.shape[1]

    def __len__(self) -> int:
        return len(self.bases)

    @property
    def volume(self) -> float:
        return len(self) / float(self.M) ** self.d

    def cells(self) -> np.ndarray:
        """Global integer cell index ``base + M·offset`` of each pixel."""
        return self.bases + self.M * self.offsets

    def centers(self) -> np.ndarray:
        return (self.bases + 0.5) / self.M + self.offsets

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box ``[lo, hi)`` of the union of cubes."""
        cells = self.cells()
        return cells.min(axis=0) / self.M, (cells.max(axis=0) + 1) / self.M

    def with_offset(self, index: int, offset: Sequence[int]) -> "PixelSet":
        offsets = self.offsets.copy()
        offsets[index] = offset
        return PixelSet(self.M, self.bases, offsets)

    def without(self, index: int) -> "PixelSet":
        keep = np.ones(len(self), dtype=bool)
        keep[index] = False
        return PixelSet(self.M, self.bases[keep], self.offsets[keep])

    def to_csv(self) -> str:
        d = self.d
        header = [f"base{i + 1}" for i in range(d)] + [f"offset{i + 1}" for i in range(d)]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for b, o in zip(self.bases, self.offsets):
            buf.write(",".join(str(int(v)) for v in (*b, *o)) + "\n")
        return buf.getvalue()

    def to_pbm(self) -> str:
        """Plain PBM mask over the bounding box (rows are the last axis, top row largest)."""
        if self.d not in (1, 2):
            raise ValueError("bitmap export supports d = 1 or 2")
        cells = self.cells()
        lo = cells.min(axis=0)
        span = cells.max(axis=0) - lo + 1
        if self.d == 1:
            grid = np.zeros((1, span[0]), dtype=np.uint8)
            grid[0, cells[:, 0] - lo[0]] = 1
        else:
            grid = np.zeros((span[1], span[0]), dtype=np.uint8)
            grid[span[1] - 1 - (cells[:, 1] - lo[1]), cells[:, 0] - lo[0]] = 1
        lines = ["P1", f"{grid.shape[1]} {grid.shape[0]}"]
        lines += [" ".join(str(v) for v in row) for row in grid]
        return "\n".join(lines) + "\n"


def integer_offsets(d: int, radius: int) -> np.ndarray:
    """Integer vectors with ``|k|_inf <= radius``, by Euclidean norm then lexicographically."""
    pts = np.array(list(itertools.product(range(-radius, radius + 1), repeat=d)), dtype=np.int64)
    norms = np.sum(pts.astype(float) ** 2, axis=1)
    order = np.lexsort(tuple(pts[:, i] for i in reversed(range(d))) + (norms,))
    return pts[order]


def _check_matrix(Bmat) -> np.ndarray:
    B = np.atleast_2d(np.asarray(Bmat, dtype=float))
    if B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    det = np.linalg.det(B)
    if not np.isfinite(det) or abs(det) < 1e-14:
        raise ValueError("B is singular")
    return B


def _image_shifts(basis: np.ndarray, B: np.ndarray, sep: float) -> np.ndarray:
    d = len(B)
    # congruent points in the reduced parallelepiped differ by lattice coefficients
    # below 1 + |B^T|·sep in size
    reach = 1 + int(np.floor(np.abs(B.T).sum(axis=1).max() * sep))
    coeffs = np.array(list(itertools.product(range(-reach, reach + 1), repeat=d)), dtype=float)
    return coeffs @ basis.T


def _reduce(points: np.ndarray, B: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # lattice L = basis Z^d with basis = B^{-T}; coefficients of p are B^T p
    coeffs = points @ B
    return points - np.floor(coeffs) @ basis.T


def _greedy(B: np.ndarray, M: int, budget: int, sep: float) -> PixelSet:
    d = len(B)
    cube = PixelSet.unit_cube(d, M)
    basis = np.linalg.inv(B).T
    shifts = _image_shifts(basis, B, sep)
    zero_shift = int(np.flatnonzero(np.all(shifts == 0, axis=1))[0])
    offsets_list = integer_offsets(d, budget)
    radius = sep * (1 - 1e-9)

    centers = (cube.bases + 0.5) / M
    choice = np.zeros(len(cube), dtype=np.int64)
    placed = []
    pending = np.arange(len(cube))
    while len(pending):
        exhausted = choice[pending] >= len(offsets_list)
        if exhausted.any():
            raise BudgetExhausted(int(np.count_nonzero(exhausted)), budget)
        cand = _reduce(centers[pending] + offsets_list[choice[pending]], B, basis)
        nc = len(cand)
        images = (cand[None, :, :] + shifts[:, None, :]).reshape(-1, d)
        blocked = np.zeros(nc, dtype=bool)
        if placed:
            dist, _ = cKDTree(np.concatenate(placed)).query(
                images, k=1, p=np.inf, distance_upper_bound=radius
            )
            blocked = np.isfinite(dist).reshape(len(shifts), nc).any(axis=0)
        # conflicts among this round's unblocked candidates, settled in pixel order
        free = np.flatnonzero(~blocked)
        accepted = np.zeros(nc, dtype=bool)
        if len(free):
            sub = cand[free]
            nsub = len(sub)
            sub_images = (sub[None, :, :] + shifts[:, None, :]).reshape(-1, d)
            pairs = cKDTree(sub_images).sparse_distance_matrix(
                cKDTree(sub), radius, p=np.inf, output_type="ndarray"
            )
            rows = pairs["i"].astype(np.int64)
            cols = pairs["j"].astype(np.int64)
            src = rows % nsub
            self_hit = (src == cols) & (rows // nsub != zero_shift)
            if self_hit.any():
                raise ValueError("lattice B^{-T}Z^d has a vector shorter than one pixel; raise M")
            keep = src != cols
            src, cols = src[keep], cols[keep]
            taken = np.ones(nsub, dtype=bool)
            if len(src):
                # only candidates that actually conflict need the sequential pass
                involved = np.unique(np.concatenate([src, cols]))
                taken[involved] = False
                order = np.argsort(src, kind="stable")
                src, cols = src[order], cols[order]
                starts = np.searchsorted(src, involved)
                stops = np.searchsorted(src, involved, side="right")
                for node, a, b in zip(involved, starts, stops):
                    if not taken[cols[a:b]].any():
                        taken[node] = True
            accepted[free[taken]] = True
        placed.append(cand[accepted])
        losers = pending[~accepted]
        choice[losers] += 1
        pending = losers
    return PixelSet(M, cube.bases, offsets_list[choice])


def construct_tiling_set(Bmat, M: int = 256, offset_budget: int = 4) -> PixelSet:
    """Pixel set that tiles by ``Z^d`` and packs by ``B^{-T} Z^d``.

    Starts from ``[0, 1)^d`` and moves colliding pixels by integer shifts (nearest
    first) until no two cubes overlap modulo ``B^{-T} Z^d``.  A full-pixel
    separation is attempted first and half-pixel separation is the fallback.
    """
    B = _check_matrix(Bmat)
    if abs(np.linalg.det(B)) > 1 + 1e-12:
        raise ValueError(f"|det B| = {abs(np.linalg.det(B)):.6g} > 1: no packing set exists")
    cube = PixelSet.unit_cube(len(B), M)
    if verify_packing(cube, B).passed:
        return cube
    try:
        return _greedy(B, M, offset_budget, 1.0 / M)
    except BudgetExhausted:
        return _greedy(B, M, offset_budget, 0.5 / M)


@dataclass(frozen=True)
class TilingReport:
    passed: bool
    missing: int
    duplicated: int

    def to_dict(self) -> dict:
        return {"pass": self.passed, "missing": self.missing, "duplicated": self.duplicated}


def verify_tiling(E: PixelSet) -> TilingReport:
    """Exact check that the base cells enumerate ``{0..M-1}^d`` once each."""
    flat = np.ravel_multi_index(tuple(E.bases.T), (E.M,) * E.d) if len(E) else np.zeros(0, int)
    counts = np.bincount(flat, minlength=E.M**E.d)
    missing = int(np.count_nonzero(counts == 0))
    duplicated = int(np.sum(np.maximum(counts - 1, 0)))
    return TilingReport(missing == 0 and duplicated == 0, missing, duplicated)


@dataclass(frozen=True)
class PackingReport:
    passed: bool
    collisions: int
    lattice_vectors_checked: int
    duplicates: int

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "collisions": self.collisions,
            "lattice_vectors_checked": self.lattice_vectors_checked,
            "duplicates": self.duplicates,
        }


def _cell_keys(cells: np.ndarray, lo: np.ndarray, span: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inside = np.all((cells >= lo) & (cells < lo + span), axis=-1)
    keys = np.full(len(cells), -1, dtype=np.int64)
    if inside.any():
        keys[inside] = np.ravel_multi_index(tuple((cells[inside] - lo).T), tuple(span))
    return keys, inside


def verify_packing(E: PixelSet, Bmat) -> PackingReport:
    """Check that no pixel center lands in another pixel after a nonzero lattice shift.

    Landing inside a pixel cell is the same as being within half a pixel (sup
    norm) of its center.  Every nonzero ``ℓ ∈ B^{-T} Z^d`` that can connect two
    pixels is enumerated explicitly.
    """
    B = _check_matrix(Bmat)
    d = E.d
    if B.shape != (d, d):
        raise ValueError("B and the pixel set disagree on d")
    cells = E.cells()
    lo = cells.min(axis=0)
    span = cells.max(axis=0) - lo + 1
    own, _ = _cell_keys(cells, lo, span)
    duplicates = len(own) - len(np.unique(own))

    reach = span / E.M + 1.0 / E.M
    corners = np.array(list(itertools.product(*[(-r, r) for r in reach])))
    coeff = corners @ B
    amin = np.floor(coeff.min(axis=0)).astype(int)
    amax = np.ceil(coeff.max(axis=0)).astype(int)
    basis = np.linalg.inv(B).T
    centers = E.centers()
    collisions = 0
    checked = 0
    for a in itertools.product(*[range(lo_, hi_ + 1) for lo_, hi_ in zip(amin, amax)]):
        if not any(a):
            continue
        ell = basis @ np.array(a, dtype=float)
        if np.any(np.abs(ell) > reach):
            continue
        checked += 1
        moved = np.floor((centers - ell) * E.M).astype(np.int64)
        keys, inside = _cell_keys(moved, lo, span)
        if inside.any():
            collisions += int(np.count_nonzero(np.isin(keys[inside], own)))
    return PackingReport(collisions == 0 and duplicates == 0, collisions, checked, duplicates)


@dataclass
class LemmaBlReport:
    passed: bool
    tolerance: float
    worst_cross_overlap: float
    worst_self_overlap: float
    box_containment: bool
    cases: int
    offenders: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "tolerance": self.tolerance,
            "worst_cross_overlap": self.worst_cross_overlap,
            "worst_self_overlap": self.worst_self_overlap,
            "box_containment": self.box_containment,
            "cases": self.cases,
            "offenders": self.offenders,
        }


def _torus_multiplicity(
    Bt: np.ndarray, E: PixelSet, m: np.ndarray, sigma: np.ndarray
) -> np.ndarray:
    """How many points of ``B^T(E + m) ∩ (σ + Z^d)`` there are for each torus point σ."""
    d = E.d
    lo, hi = E.bounds()
    corners = np.array(list(itertools.product(*zip(lo + m, hi + m))))
    image = corners @ Bt.T
    nmin = np.floor(image.min(axis=0)).astype(int) - 1
    nmax = np.ceil(image.max(axis=0)).astype(int) + 1
    inv = np.linalg.inv(Bt)
    cells = E.cells()
    clo = cells.min(axis=0)
    span = cells.max(axis=0) - clo + 1
    own, _ = _cell_keys(cells, clo, span)
    counts = np.zeros(len(sigma), dtype=np.int64)
    for n in itertools.product(*[range(a, b + 1) for a, b in zip(nmin, nmax)]):
        t = (sigma + np.array(n, dtype=float)) @ inv.T - m
        keys, inside = _cell_keys(np.floor(t * E.M).astype(np.int64), clo, span)
        hit = np.zeros(len(sigma), dtype=bool)
        hit[inside] = np.isin(keys[inside], own)
        counts += hit
    return counts


def check_lemma_bl(
    spec: AlgebraSpec,
    offsets: Sequence[Sequence[int]],
    tilings: Mapping[tuple, Callable[[np.ndarray], PixelSet]] | Callable[[np.ndarray], PixelSet],
    lambda_samples: Iterable[Sequence[float]],
    m_range: Iterable[Sequence[int]],
    samples_per_axis: int = 128,
    tolerance: float | None = None,
) -> LemmaBlReport:
    """Check that ``∪_s B(λ+κ_s)^T (E(λ+κ_s) + m)`` meets each ``Z^d``-coset at most once.

    The union is tested on a grid of torus points; overlap is the fraction of the
    torus covered more than once, split into overlap between different pieces
    and overlap of a piece with itself.  ``box_containment`` additionally records
    whether every union fits in ``[0, 1)^d`` after one common integer shift.
    """
    offsets = [tuple(int(v) for v in o) for o in offsets]
    d = spec.d
    G = samples_per_axis
    axes = [(np.arange(G) + 0.5) / G] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    sigma = np.stack([g.ravel() for g in mesh], axis=-1)
    worst_cross = worst_self = 0.0
    box_ok = True
    offenders = []
    cases = 0
    resolution = None
    for lam in lambda_samples:
        lam = np.asarray(lam, dtype=float)
        for m in m_range:
            m = np.asarray(m, dtype=float)
            total = np.zeros(len(sigma), dtype=np.int64)
            self_bad = np.zeros(len(sigma), dtype=bool)
            lows, highs = [], []
            for off in offsets:
                param = lam + np.array(off, dtype=float)
                builder = tilings[off] if isinstance(tilings, Mapping) else tilings
                E = builder(param)
                resolution = E.M if resolution is None else min(resolution, E.M)
                Bt = b_matrix(spec, param).T
                mult = _torus_multiplicity(Bt, E, m, sigma)
                total += mult
                self_bad |= mult > 1
                lo, hi = E.bounds()
                corners = np.array(list(itertools.product(*zip(lo + m, hi + m)))) @ Bt.T
                lows.append(corners.min(axis=0))
                highs.append(corners.max(axis=0))
            cross = float(np.mean((total > 1) & ~self_bad))
            selfo = float(np.mean(self_bad))
            span_lo = np.min(lows, axis=0)
            span_hi = np.max(highs, axis=0)
            fits = bool(np.all(np.floor(span_lo + 1e-12) >= np.ceil(span_hi - 1e-12) - 1))
            box_ok &= fits
            cases += 1
            if cross > worst_cross or selfo > worst_self:
                offenders.append({"lambda": lam.tolist(), "m": m.tolist(), "cross": cross, "self": selfo})
            worst_cross = max(worst_cross, cross)
            worst_self = max(worst_self, selfo)
    if cases == 0:
        raise ValueError("no (λ, m) cases to check")
    tol = tolerance if tolerance is not None else 0.5 / (resolution or 1)
    offenders.sort(key=lambda item: -(item["cross"] + item["self"]))
    return LemmaBlReport(
        passed=worst_cross <= tol and worst_self <= tol,
        tolerance=tol,
        worst_cross_overlap=worst_cross,
        worst_self_overlap=worst_self,
        box_containment=box_ok,
        cases=cases,
        offenders=offenders[:5],
    )
