"""Grid functions on ``R^d``, the representations ``π_λ`` and Gabor Parseval checks.

A :class:`GridFunction` samples a function at the cell centers
``t_k = (k + 1/2)/M - T`` of ``[-T, T)^d``; inner products use the midpoint rule
with weight ``h^d``, ``h = 1/M``.  Translations must be multiples of ``h`` so that
they act by exact index shifts.

For ``g = (z, y, x)`` the representation is

    (π_λ(g) f)(t) = e^{2πi⟨λ, z⟩} e^{-2πi⟨B(λ) y, t⟩} f(t - x).
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraSpec, b_matrix
from .tiling import PixelSet

__all__ = [
    "DensityReport",
    "GaborLattice",
    "GridFunction",
    "constant_probe",
    "density_check",
    "gabor_coefficients",
    "grid_shift",
    "make_window",
    "modulated_overlap",
    "parseval_defect",
    "rep_apply",
    "smooth_bumps",
]

# bound on the number of complex entries of one temporary in the kernel
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class GridFunction:
    T: float
    M: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        n = self.T * self.M * 2
        if self.M < 1 or self.T <= 0 or abs(n - round(n)) > 1e-9:
            raise ValueError("need M >= 1, T > 0 and 2·T·M an integer")
        n = int(round(n))
        if values.ndim < 1 or any(s != n for s in values.shape):
            raise ValueError(f"values must have shape ({n},)*d for T={self.T}, M={self.M}")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, d: int, T: float, M: int) -> "GridFunction":
        n = int(round(2 * T * M))
        return cls(T, M, np.zeros((n,) * d, dtype=complex))

    @classmethod
    def from_callable(cls, fn: Callable[..., np.ndarray], d: int, T: float, M: int) -> "GridFunction":
        """Sample ``fn(t_1, ..., t_d)`` (broadcasting) at the cell centers."""
        g = cls.zeros(d, T, M)
        mesh = np.meshgrid(*[g.axis()] * d, indexing="ij")
        return cls(T, M, np.broadcast_to(fn(*mesh), g.values.shape).astype(complex))

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.M

    @property
    def origin(self) -> int:
        """Array index of the cell ``[0, h)^d`` along each axis."""
        return int(round(self.T * self.M))

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.M - self.T

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.h**self.d)

    def inner(self, other: "GridFunction") -> complex:
        """``⟨self, other⟩``, linear in the first slot."""
        _same_grid(self, other)
        return complex(np.vdot(other.values, self.values) * self.h**self.d)

    def scaled(self, factor: complex) -> "GridFunction":
        return GridFunction(self.T, self.M, self.values * factor)

    def support_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Index bounds ``[lo, hi)`` of the nonzero samples, or None if zero."""
        nz = np.argwhere(self.values != 0)
        if not len(nz):
            return None
        return nz.min(axis=0), nz.max(axis=0) + 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = [f"t{i + 1}" for i in range(self.d)] + ["re", "im"]
        buf.write(",".join(cols) + "\n")
        mesh = np.meshgrid(*[self.axis()] * self.d, indexing="ij")
        flat = [m.ravel() for m in mesh]
        vals = self.values.ravel()
        for idx in range(vals.size):
            row = [f"{f[idx]:.10g}" for f in flat] + [f"{vals[idx].real:.12g}", f"{vals[idx].imag:.12g}"]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _same_grid(a: GridFunction, b: GridFunction) -> None:
    if a.M != b.M or a.n != b.n or a.d != b.d:
        raise ValueError("grid functions live on different grids")


def grid_shift(x, M: int) -> np.ndarray:
    """Index shift ``x·M`` for a translation that must be grid aligned."""
    cells = np.asarray(x, dtype=float) * M
    rounded = np.round(cells)
    if np.any(np.abs(cells - rounded) > 1e-9):
        raise ValueError(f"translation {x} is not a multiple of the grid step 1/{M}")
    return rounded.astype(np.int64)


def _translate(f: GridFunction, shift: np.ndarray) -> GridFunction:
    box = f.support_box()
    out = np.zeros_like(f.values)
    if box is None:
        return GridFunction(f.T, f.M, out)
    lo, hi = box
    if np.any(lo + shift < 0) or np.any(hi + shift > f.n):
        raise ValueError(
            f"translation by {shift / f.M} moves the support outside [-{f.T}, {f.T})^{f.d}; enlarge T"
        )
    src = tuple(slice(a, b) for a, b in zip(lo, hi))
    dst = tuple(slice(a + s, b + s) for a, b, s in zip(lo, hi, shift))
    out[dst] = f.values[src]
    return GridFunction(f.T, f.M, out)


def rep_apply(spec: AlgebraSpec, lam, g, f: GridFunction) -> GridFunction:
    """``π_λ(g) f`` on the grid; unitary because translations are index shifts."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (spec.center_dim,):
        raise ValueError(f"λ must have {spec.center_dim} components")
    z, y, x = (np.asarray(v, dtype=float) for v in (g.z, g.y, g.x))
    if len(x) != f.d or spec.d != f.d:
        raise ValueError("grid function dimension does not match the algebra")
    moved = _translate(f, grid_shift(x, f.M))
    xi = b_matrix(spec, lam) @ y
    phase = np.exp(2j * np.pi * float(lam @ z))
    values = moved.values * phase
    for axis_index, t in enumerate(moved.axis() for _ in range(f.d)):
        shape = [1] * f.d
        shape[axis_index] = -1
        values = values * np.exp(-2j * np.pi * xi[axis_index] * t).reshape(shape)
    return GridFunction(f.T, f.M, values)


def _overlap(w: GridFunction, u: GridFunction, shift: np.ndarray):
    """``w(t)·conj(u(t - x))`` cropped to where both factors can be nonzero."""
    n = w.n
    lo = np.maximum(0, shift)
    hi = np.minimum(n, n + shift)
    if np.any(hi <= lo):
        return None, None
    wbox = tuple(slice(a, b) for a, b in zip(lo, hi))
    ubox = tuple(slice(a - s, b - s) for a, b, s in zip(lo, hi, shift))
    prod = w.values[wbox] * np.conj(u.values[ubox])
    nz = np.argwhere(prod != 0)
    if not len(nz):
        return None, None
    plo, phi = nz.min(axis=0), nz.max(axis=0) + 1
    prod = prod[tuple(slice(a, b) for a, b in zip(plo, phi))]
    axis = w.axis()
    axes = [axis[lo[i] + plo[i] : lo[i] + phi[i]] for i in range(w.d)]
    return prod, axes


def modulated_overlap(w: GridFunction, u: GridFunction, shift, xis) -> np.ndarray:
    """``Σ_t w(t) conj(u(t - x)) e^{2πi⟨ξ, t⟩} h^d`` for a batch of frequencies ``ξ``.

    ``shift`` is the translation in grid cells; ``xis`` has shape (P, d).  The
    exponential factorizes over axes, so the sum is contracted one axis at a
    time.  When the batch repeats few distinct values per axis the contraction
    runs over the product of those values and is gathered afterwards.
    """
    _same_grid(w, u)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    shift = np.asarray(shift, dtype=np.int64).reshape(w.d)
    out = np.zeros(len(xis), dtype=complex)
    prod, axes = _overlap(w, u, shift)
    if prod is None or not len(xis):
        return out
    weight = w.h**w.d
    uniq, inverse = zip(*(np.unique(xis[:, i], return_inverse=True) for i in range(w.d)))
    table = [np.exp(2j * np.pi * np.outer(vals, ax)) for vals, ax in zip(uniq, axes)]
    sizes = [len(v) for v in uniq]
    grid_cost = sum(
        int(np.prod(sizes[: i + 1])) * int(np.prod(prod.shape[i:])) for i in range(w.d)
    )
    point_cost = len(xis) * prod.size
    if int(np.prod(sizes)) <= _CHUNK_ENTRIES and grid_cost <= point_cost:
        res = prod
        for i in range(w.d):
            # contract the leading spatial axis; frequency axes accumulate at the end
            res = np.tensordot(res, table[i], axes=([0], [1]))
        return res[tuple(inv.reshape(-1) for inv in inverse)] * weight
    width = max(1, int(np.prod(prod.shape[1:])))
    step = max(1, _CHUNK_ENTRIES // width)
    for start in range(0, len(xis), step):
        stop = start + step
        res = np.tensordot(table[0][inverse[0].reshape(-1)[start:stop]], prod, axes=(1, 0))
        for i in range(1, w.d):
            res = np.einsum("pa...,pa->p...", res, table[i][inverse[i].reshape(-1)[start:stop]])
        out[start:stop] = res * weight
    return out


@dataclass(frozen=True)
class DensityReport:
    volume: float
    passed: bool

    def to_dict(self) -> dict:
        return {"volume": self.volume, "pass": self.passed}


def density_check(transA, modB) -> DensityReport:
    """Lattice volume ``|det A det B|`` and whether it is at most one."""
    A = np.atleast_2d(np.asarray(transA, dtype=float))
    B = np.atleast_2d(np.asarray(modB, dtype=float))
    vol = float(abs(np.linalg.det(A) * np.linalg.det(B)))
    return DensityReport(vol, vol <= 1 + 1e-12)


@dataclass(frozen=True)
class GaborLattice:
    """Truncation of ``Z^d × B Z^d``: ``|x|_inf <= radius_x``, ``|y|_inf <= radius_y``."""

    B: np.ndarray
    radius_y: int
    radius_x: int

    @classmethod
    def square(cls, B, radius: int) -> "GaborLattice":
        return cls(np.atleast_2d(np.asarray(B, dtype=float)), radius, radius)

    @property
    def d(self) -> int:
        return len(self.B)

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if abs(np.linalg.det(B)) < 1e-14:
            raise ValueError("modulation matrix is singular")
        object.__setattr__(self, "B", B)

    def points(self, radius: int) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(-radius, radius + 1)] * self.d, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)


def gabor_coefficients(w: GridFunction, u: GridFunction, lattice: GaborLattice) -> np.ndarray:
    """``⟨w, π(0, y, x) u⟩`` for every truncated ``(x, y)``; shape (num_x, num_y)."""
    ys = lattice.points(lattice.radius_y)
    xs = lattice.points(lattice.radius_x)
    xis = ys @ lattice.B.T
    out = np.zeros((len(xs), len(ys)), dtype=complex)
    for row, x in enumerate(xs):
        out[row] = modulated_overlap(w, u, grid_shift(x, w.M), xis)
    return out


def make_window(Bmat, E: PixelSet, T: float, M: int) -> GridFunction:
    """``|det B|^{1/2} χ_E`` on the grid; needs ``M`` to be a multiple of ``E.M``."""
    if len(E) == 0:
        raise ValueError("empty pixel set")
    if M % E.M:
        raise ValueError(f"grid resolution {M} is not a multiple of the pixel resolution {E.M}")
    B = np.atleast_2d(np.asarray(Bmat, dtype=float))
    d = E.d
    r = M // E.M
    g = GridFunction.zeros(d, T, M)
    sub = np.stack([s.ravel() for s in np.meshgrid(*[np.arange(r)] * d, indexing="ij")], axis=-1)
    idx = (E.cells()[:, None, :] * r + sub[None, :, :]).reshape(-1, d) + g.origin
    if np.any(idx < 0) or np.any(idx >= g.n):
        raise ValueError(f"pixel set does not fit in [-{T}, {T})^{d}")
    values = g.values.copy()
    values[tuple(idx.T)] = np.sqrt(abs(np.linalg.det(B)))
    return GridFunction(T, M, values)


def parseval_defect(
    w_list: Sequence[GridFunction], u: GridFunction, lattice: GaborLattice
) -> float:
    """``max_w |Σ |⟨w, π(γ₁) u⟩|² - ‖w‖²| / ‖w‖²`` over the truncated lattice."""
    if not len(w_list):
        raise ValueError("need at least one probe")
    worst = 0.0
    for w in w_list:
        norm = w.norm2()
        if norm == 0:
            raise ValueError("probe functions must be nonzero")
        energy = float(np.sum(np.abs(gabor_coefficients(w, u, lattice)) ** 2))
        worst = max(worst, abs(energy - norm) / norm)
    return worst


def constant_probe(E: PixelSet, T: float, M: int) -> GridFunction:
    """Indicator of ``E`` (unit height) on the grid."""
    window = make_window(np.eye(E.d), E, T, M)
    return window


def smooth_bumps(
    d: int, T: float, M: int, count: int, seed: int = 0, lo: float = 0.05, hi: float = 0.95
) -> list[GridFunction]:
    """Seeded ``sin²`` bumps inside ``[lo, hi]^d`` with a slow random modulation.

    Each bump is ``C¹`` and vanishes outside its box, which keeps the frame
    coefficients decaying quickly.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        width = rng.uniform(0.5, 1.0, size=d) * (hi - lo)
        start = lo + rng.uniform(0, 1, size=d) * (hi - lo - width)
        freq = rng.uniform(-1.5, 1.5, size=d)
        amp = rng.normal() + 1j * rng.normal()

        def fn(*t, start=start, width=width, freq=freq, amp=amp):
            val = np.full(np.broadcast(*t).shape, amp, dtype=complex)
            for i, ti in enumerate(t):
                s = (ti - start[i]) / width[i]
                val = val * np.where((s > 0) & (s < 1), np.sin(np.pi * s) ** 2, 0.0)
                val = val * np.exp(2j * np.pi * freq[i] * ti)
            return val

        out.append(GridFunction.from_callable(fn, d, T, M))
    return out
