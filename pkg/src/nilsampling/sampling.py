"""Bandlimited fields in the Plancherel domain, sampling on Γ and reconstruction.

A vector ``ψ`` of a multiplicity-free band-limited space is stored through its
Plancherel coefficients: one grid function ``w_λ`` per λ-node.  Inner products
are λ-quadratures,

    ⟨ψ, L(g)φ⟩ = Σ_n weight_n |det B(λ_n)| ⟨w^ψ_{λ_n}, π_{λ_n}(g) w^φ_{λ_n}⟩,

and no integral over the group itself is ever formed.  Each ``w_λ`` is a linear
combination of a few shared atoms so that equal functions at different nodes
share their kernel evaluations.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import AlgebraSpec, b_matrix
from .gabor import GaborLattice, GridFunction, gabor_coefficients, grid_shift, make_window, modulated_overlap
from .group import GammaWindow, GroupElement, enumerate_gamma, inverse_array, multiply_array
from .spectral import LambdaGrid, abs_det
from .tiling import PixelSet, construct_tiling_set, verify_packing, verify_tiling

__all__ = [
    "OrthogonalityReport",
    "SampleSet",
    "SincFunction",
    "SpectralField",
    "build_phi",
    "gram_matrix",
    "probe_field",
    "reconstruct",
    "restriction_isometry_defect",
    "sample",
    "sequence_orthogonality_check",
    "translate",
    "wavelet_transform",
    "wavelet_transform_many",
]

_CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True, eq=False)
class SpectralField:
    """``w_λn = π_λn(shift) Σ_k coef[n, k] · atoms[index[n, k]]`` on the nodes of ``grid``."""

    spec: AlgebraSpec
    grid: LambdaGrid
    atoms: tuple
    index: np.ndarray
    coef: np.ndarray
    shift: GroupElement | None = None

    def __post_init__(self):
        index = np.asarray(self.index, dtype=np.int64)
        coef = np.asarray(self.coef, dtype=complex)
        if index.ndim == 1:
            index = index[:, None]
        if coef.ndim == 1:
            coef = coef[:, None]
        if index.shape != coef.shape or index.shape[0] != len(self.grid):
            raise ValueError("index and coef must be (nodes, terms) arrays matching the grid")
        if not self.atoms:
            raise ValueError("a field needs at least one atom")
        if np.any(index < 0) or np.any(index >= len(self.atoms)):
            raise ValueError("atom index out of range")
        first = self.atoms[0]
        for atom in self.atoms:
            if (atom.M, atom.n, atom.d) != (first.M, first.n, first.d):
                raise ValueError("all atoms must share one spatial grid")
        if first.d != self.spec.d:
            raise ValueError("atom dimension does not match the algebra")
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "coef", coef)

    @property
    def M(self) -> int:
        return self.atoms[0].M

    def density(self) -> np.ndarray:
        """Quadrature weight times ``|det B(λ_n)|`` per node."""
        return self.grid.weights * abs_det(self.spec, self.grid.nodes)

    def atom_gram(self) -> np.ndarray:
        K = len(self.atoms)
        out = np.zeros((K, K), dtype=complex)
        for a in range(K):
            for b in range(a, K):
                out[a, b] = self.atoms[a].inner(self.atoms[b])
                out[b, a] = np.conj(out[a, b])
        return out

    def node_norms(self) -> np.ndarray:
        gram = self.atom_gram()
        total = np.zeros(len(self.grid))
        for i in range(self.index.shape[1]):
            for j in range(self.index.shape[1]):
                total += np.real(
                    self.coef[:, i] * np.conj(self.coef[:, j]) * gram[self.index[:, i], self.index[:, j]]
                )
        return total

    def norm2(self) -> float:
        return float(np.sum(self.density() * self.node_norms()))

    def node_function(self, n: int) -> GridFunction:
        """Materialize ``w_λn`` (applying the shift, which must keep it in the window)."""
        values = sum(c * self.atoms[k].values for c, k in zip(self.coef[n], self.index[n]))
        f = GridFunction(self.atoms[0].T, self.M, values)
        if self.shift is not None:
            from .gabor import rep_apply

            f = rep_apply(self.spec, self.grid.nodes[n], self.shift, f)
        return f

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.spec, self.grid, self.atoms, self.index, self.coef * factor, self.shift)


def _check_pair(psi: SpectralField, phi: SpectralField) -> None:
    if psi.grid is not phi.grid and not (
        psi.grid.nodes.shape == phi.grid.nodes.shape
        and np.array_equal(psi.grid.nodes, phi.grid.nodes)
        and np.array_equal(psi.grid.weights, phi.grid.weights)
    ):
        raise ValueError("fields live on different λ-grids")
    if psi.spec is not phi.spec and psi.spec.to_dict() != phi.spec.to_dict():
        raise ValueError("fields belong to different algebras")
    if psi.M != phi.M or psi.atoms[0].n != phi.atoms[0].n:
        raise ValueError("fields use different spatial grids")


def translate(field: SpectralField, g) -> SpectralField:
    """Coefficients of ``L(g)ψ``: ``π_λ(g) ∘ Pψ(λ)`` at every node."""
    spec = field.spec
    g_arr = g.as_array() if hasattr(g, "as_array") else np.asarray(g, dtype=float)
    if field.shift is not None:
        g_arr = multiply_array(spec, g_arr, field.shift.as_array())
    grid_shift(GroupElement.from_array(spec, g_arr).x, field.M)
    return SpectralField(
        spec, field.grid, field.atoms, field.index, field.coef, GroupElement.from_array(spec, g_arr)
    )


def _field_kernel(psi: SpectralField, phi: SpectralField, ys: np.ndarray, x) -> np.ndarray:
    """``⟨w^ψ_n, π_n(0, y, x) w^φ_n⟩`` before shifts, shape (nodes, len(ys))."""
    spec = psi.spec
    d = spec.d
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    N = len(psi.grid)
    out = np.zeros((N, len(ys)), dtype=complex)
    cells = grid_shift(x, psi.M)
    Bn = b_matrix(spec, psi.grid.nodes)
    xis = np.einsum("nij,uj->nui", Bn, ys)
    for i in range(psi.index.shape[1]):
        for j in range(phi.index.shape[1]):
            weight = psi.coef[:, i] * np.conj(phi.coef[:, j])
            live = np.flatnonzero(weight != 0)
            if not len(live):
                continue
            pairs = np.stack([psi.index[live, i], phi.index[live, j]], axis=-1)
            uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            for p, (a, b) in enumerate(uniq):
                nodes = live[inv == p]
                vals = modulated_overlap(psi.atoms[a], phi.atoms[b], cells, xis[nodes].reshape(-1, d))
                if vals.any():
                    out[nodes] += weight[nodes, None] * vals.reshape(len(nodes), len(ys))
    return out


def _effective_points(psi: SpectralField, phi: SpectralField, pts: np.ndarray) -> np.ndarray:
    """``s_ψ^{-1} g s_φ`` so that ``⟨ψ, L(g)φ⟩`` reduces to unshifted coefficients."""
    spec = psi.spec
    h = pts
    if psi.shift is not None:
        h = multiply_array(spec, inverse_array(spec, psi.shift.as_array()), h)
    if phi.shift is not None:
        h = multiply_array(spec, h, phi.shift.as_array())
    return h


def wavelet_transform_many(psi: SpectralField, phi: SpectralField, pts) -> np.ndarray:
    """``W_φψ(g) = ⟨ψ, L(g)φ⟩`` for every row of ``pts`` (Malcev coordinates)."""
    _check_pair(psi, phi)
    spec = psi.spec
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != spec.n:
        raise ValueError(f"points need {spec.n} coordinates")
    h = _effective_points(psi, phi, pts)
    k, d = spec.center_dim, spec.d
    zs, ys, xs = h[:, :k], h[:, k : k + d], h[:, k + d :]
    dens = psi.density()
    lam = psi.grid.nodes
    values = np.zeros(len(h), dtype=complex)
    ux, xinv = np.unique(xs, axis=0, return_inverse=True)
    xinv = xinv.reshape(-1)
    for gi, x in enumerate(ux):
        members = np.flatnonzero(xinv == gi)
        uy, yinv = np.unique(ys[members], axis=0, return_inverse=True)
        yinv = yinv.reshape(-1)
        kern = _field_kernel(psi, phi, uy, x)
        if not kern.any():
            continue
        kern = kern * dens[:, None]
        step = max(1, _CHUNK_ENTRIES // max(1, len(lam)))
        for start in range(0, len(members), step):
            sel = members[start : start + step]
            phase = np.exp(-2j * np.pi * (zs[sel] @ lam.T))
            values[sel] = np.sum(phase * kern[:, yinv[start : start + step]].T, axis=1)
    return values


def wavelet_transform(psi: SpectralField, phi: SpectralField, pt) -> complex:
    arr = pt.as_array() if hasattr(pt, "as_array") else np.asarray(pt, dtype=float)
    return complex(wavelet_transform_many(psi, phi, arr[None, :])[0])


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Values ``f(γ)`` on the integer points of a Γ-window, in enumeration order."""

    spec: AlgebraSpec
    window: GammaWindow
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(pts) != len(vals):
            raise ValueError("one value per point is required")
        if not np.all(self.window.contains(self.spec, pts)):
            raise ValueError("sample points must lie in the declared window")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def lookup(self, pts) -> np.ndarray:
        """Values at given integer points; NaN where a point is outside the set."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        table = {tuple(p): v for p, v in zip(self.points.astype(np.int64).tolist(), self.values)}
        return np.array(
            [table.get(tuple(p), np.nan) for p in np.round(pts).astype(np.int64).tolist()], dtype=complex
        )

    def to_csv(self) -> str:
        spec = self.spec
        k, d = spec.center_dim, spec.d
        cols = [f"m{i + 1}" for i in range(k)] + [f"p{i + 1}" for i in range(d)]
        cols += [f"q{i + 1}" for i in range(d)] + ["re", "im"]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for p, v in zip(self.points.astype(np.int64), self.values):
            buf.write(",".join(str(int(c)) for c in p) + f",{v.real:.12g},{v.imag:.12g}\n")
        return buf.getvalue()


def sample(psi: SpectralField, phi: SpectralField, window: GammaWindow) -> SampleSet:
    """``f(γ) = W_φψ(γ)`` on the window."""
    pts = enumerate_gamma(psi.spec, window)
    return SampleSet(psi.spec, window, pts, wavelet_transform_many(psi, phi, pts))


class SincFunction:
    """``S = W_φφ``, evaluated through the Plancherel domain."""

    def __init__(self, phi: SpectralField):
        self.phi = phi

    def __call__(self, pts) -> np.ndarray:
        return wavelet_transform_many(self.phi, self.phi, pts)


def _reconstruct_spectral(samples: SampleSet, phi: SpectralField, pts: np.ndarray) -> np.ndarray:
    # Σ_m f(m,p,q) S(γ^{-1}x) only depends on m through e^{2πi⟨λ, m⟩}, so the
    # m-sum is done once per (p, q) as a function of λ.
    spec = phi.spec
    k, d = spec.center_dim, spec.d
    lam = phi.grid.nodes
    dens = phi.density()
    C = spec.structure
    live = samples.values != 0
    spts, svals = samples.points[live], samples.values[live]
    out = np.zeros(len(pts), dtype=complex)
    if not len(svals):
        return out
    pq, inv = np.unique(spts[:, k:], axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    spectra = np.zeros((len(pq), len(lam)), dtype=complex)
    for g in range(len(pq)):
        sel = inv == g
        spectra[g] = np.exp(2j * np.pi * (lam @ spts[sel, :k].T)) @ svals[sel]
    p, q = pq[:, :d], pq[:, d:]
    wqp = np.einsum("gi,ijk,gj->gk", q, C, p)
    for idx, x in enumerate(pts):
        zx, yx, xx = x[:k], x[k : k + d], x[k + d :]
        zc = zx[None, :] + wqp - np.einsum("gi,ijk,j->gk", q, C, yx)
        yh = yx[None, :] - p
        xh = xx[None, :] - q
        ux, xinv = np.unique(xh, axis=0, return_inverse=True)
        xinv = xinv.reshape(-1)
        total = 0j
        for gi, xv in enumerate(ux):
            members = np.flatnonzero(xinv == gi)
            uy, yinv = np.unique(yh[members], axis=0, return_inverse=True)
            kern = _field_kernel(phi, phi, uy, xv)
            if not kern.any():
                continue
            phase = np.exp(-2j * np.pi * (zc[members] @ lam.T))
            total += np.sum(dens[None, :] * phase * kern[:, yinv.reshape(-1)].T * spectra[members])
        out[idx] = total
    return out


def reconstruct(samples: SampleSet, S: Callable, pts) -> np.ndarray:
    """``Σ_γ f(γ) S(γ^{-1} x)`` at each point ``x`` (rows of Malcev coordinates)."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    spec = samples.spec
    pts = np.atleast_2d(np.asarray([p.as_array() if hasattr(p, "as_array") else p for p in pts], dtype=float))
    if isinstance(S, SincFunction) and S.phi.shift is None:
        return _reconstruct_spectral(samples, S.phi, pts)
    inv_g = inverse_array(spec, samples.points)
    out = np.zeros(len(pts), dtype=complex)
    for idx, x in enumerate(pts):
        out[idx] = np.sum(samples.values * S(multiply_array(spec, inv_g, x[None, :])))
    return out


def restriction_isometry_defect(psi: SpectralField, phi: SpectralField, window: GammaWindow) -> float:
    """``|Σ_window |W_φψ(γ)|² - ‖ψ‖²| / ‖ψ‖²``."""
    norm = psi.norm2()
    if norm == 0:
        raise ValueError("ψ must be nonzero")
    return abs(sample(psi, phi, window).energy() - norm) / norm


def gram_matrix(phi: SpectralField, window: GammaWindow) -> np.ndarray:
    """``G[a, b] = ⟨L(γ_a)φ, L(γ_b)φ⟩ = W_φφ(γ_a^{-1} γ_b)`` over the window."""
    spec = phi.spec
    pts = enumerate_gamma(spec, window)
    rel = multiply_array(spec, inverse_array(spec, pts)[:, None, :], pts[None, :, :]).reshape(-1, spec.n)
    uniq, inv = np.unique(np.round(rel, 12), axis=0, return_inverse=True)
    vals = wavelet_transform_many(phi, phi, uniq)
    return vals[inv.reshape(-1)].reshape(len(pts), len(pts))


def _atom_key(E: PixelSet) -> bytes:
    return E.cells().tobytes() + bytes([E.d])


def build_phi(
    spec: AlgebraSpec,
    grid: LambdaGrid,
    tilings: PixelSet | Callable[[np.ndarray], PixelSet] | None = None,
    T: float = 2.0,
    M: int = 64,
    pixel_M: int | None = None,
) -> SpectralField:
    """The generator with ``Pφ(λ) = χ_{E(λ)}`` at every node (``u_λ / √|det B(λ)|``).

    ``tilings`` is one pixel set for all nodes, a callable ``λ ↦ E(λ)``, or None to
    construct ``E(λ)`` per node at resolution ``pixel_M`` (default ``M``).  Every
    distinct set is checked for tiling and packing before it is used.
    """
    if len(grid) == 0:
        raise ValueError("empty λ-grid")
    atoms: list[GridFunction] = []
    keys: dict[bytes, int] = {}
    index = np.zeros(len(grid), dtype=np.int64)
    Bn = b_matrix(spec, grid.nodes)
    for n, lam in enumerate(grid.nodes):
        if isinstance(tilings, PixelSet):
            E = tilings
        elif tilings is None:
            E = construct_tiling_set(Bn[n], pixel_M or M)
        else:
            E = tilings(lam)
        key = _atom_key(E)
        if key not in keys:
            if not verify_tiling(E).passed:
                raise ValueError(f"E(λ) at λ={lam.tolist()} does not tile by Z^d")
            keys[key] = len(atoms)
            atoms.append(make_window(np.eye(spec.d), E, T, M))
        if not verify_packing(E, Bn[n]).passed:
            raise ValueError(f"E(λ) at λ={lam.tolist()} does not pack by B(λ)^(-T) Z^d")
        index[n] = keys[key]
    return SpectralField(spec, grid, tuple(atoms), index, np.ones(len(grid), dtype=complex))


def _bump_atom(d: int, T: float, M: int, cell: np.ndarray) -> GridFunction:
    # sin^2 bump filling one integer cell: C^1, zero on the cell walls and with
    # a narrow spectrum, so the frame coefficients decay fast in every direction
    def fn(*t):
        val = np.ones(np.broadcast(*t).shape, dtype=complex)
        for i, ti in enumerate(t):
            s = ti - cell[i]
            val = val * np.where((s > 0) & (s < 1), np.sin(np.pi * s) ** 2, 0.0)
        return val

    return GridFunction.from_callable(fn, d, T, M)


def band_window(grid: LambdaGrid) -> np.ndarray:
    """Smooth weight on the nodes that vanishes on the region boundary and on integer hyperplanes."""
    lam = grid.nodes
    region = grid.region
    lo, hi = region.bbox() if region is not None else (lam.min(axis=0), lam.max(axis=0))
    if region is not None and region.kind in ("disk", "E_cap_disk"):
        rho2 = np.sum((lam - np.array(region.center)) ** 2, axis=1) / region.radius**2
        edge = np.clip(1 - rho2, 0, None) ** 2
    else:
        edge = np.prod(np.sin(np.pi * (lam - lo) / (hi - lo)) ** 2, axis=1)
    return edge * np.prod(np.sin(np.pi * lam) ** 2, axis=1)


def probe_field(
    spec: AlgebraSpec, grid: LambdaGrid, seed: int = 0, T: float = 2.0, M: int = 64
) -> SpectralField:
    """Seeded band-limited test vector.

    ``w_λ = Σ_k c_k · window(λ) · e^{2πi⟨τ_k, λ⟩} · b_k`` where ``b_k`` is a
    ``sin²`` bump on the k-th unit cell of ``[-1, 1)^d``, ``window`` comes from
    :func:`band_window` and the amplitudes ``c_k`` and central shifts ``τ_k`` are
    random.  Both smoothness choices keep the Γ-tails short.
    """
    rng = np.random.default_rng(seed)
    d = spec.d
    cells = np.stack(
        [g.ravel() for g in np.meshgrid(*[np.array([-1, 0])] * d, indexing="ij")], axis=-1
    )
    atoms = tuple(_bump_atom(d, T, M, cell) for cell in cells)
    K = len(atoms)
    amps = rng.normal(size=K) + 1j * rng.normal(size=K)
    taus = rng.uniform(-0.5, 0.5, size=(K, spec.center_dim))
    window = band_window(grid)
    coef = window[:, None] * amps[None, :] * np.exp(2j * np.pi * grid.nodes @ taus.T)
    index = np.broadcast_to(np.arange(K), coef.shape)
    return SpectralField(spec, grid, atoms, index, coef)


@dataclass
class OrthogonalityReport:
    value: float
    vacuous: bool
    radius: int
    worst: dict | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "vacuous": self.vacuous, "radius": self.radius, "worst": self.worst}


def sequence_orthogonality_check(
    spec: AlgebraSpec,
    offsets: Sequence[Sequence[int]],
    tilings: Mapping[tuple, Callable] | Callable[[np.ndarray], PixelSet],
    lambda_samples,
    probe_pairs: Sequence[tuple[GridFunction, GridFunction]],
    trunc: int,
) -> OrthogonalityReport:
    """Largest normalized ``|Σ_γ₁ ⟨f, π_{λ+κ_j}(γ₁)u_{λ+κ_j}⟩ conj⟨g, π_{λ+κ_j'}(γ₁)u_{λ+κ_j'}⟩|``.

    Pieces ``j ≠ j'`` of the partition are compared; coefficient sequences over
    ``|y|, |x| <= trunc`` should be orthogonal.
    """
    offsets = [tuple(int(v) for v in o) for o in offsets]
    if len(offsets) < 2:
        return OrthogonalityReport(0.0, True, trunc)
    if not probe_pairs:
        raise ValueError("need at least one probe pair")
    T, M = probe_pairs[0][0].T, probe_pairs[0][0].M
    worst = 0.0
    where = None
    for lam in lambda_samples:
        lam = np.asarray(lam, dtype=float)
        coeffs = {}
        for off in offsets:
            param = lam + np.array(off, dtype=float)
            B = b_matrix(spec, param)
            builder = tilings[off] if isinstance(tilings, Mapping) else tilings
            u = make_window(B, builder(param), T, M)
            lattice = GaborLattice.square(B, trunc)
            coeffs[off] = [
                (gabor_coefficients(f, u, lattice), gabor_coefficients(g, u, lattice))
                for f, g in probe_pairs
            ]
        for a in range(len(offsets)):
            for b in range(len(offsets)):
                if a == b:
                    continue
                for pi, (f, g) in enumerate(probe_pairs):
                    cf = coeffs[offsets[a]][pi][0]
                    cg = coeffs[offsets[b]][pi][1]
                    val = abs(np.vdot(cg, cf)) / np.sqrt(f.norm2() * g.norm2())
                    if val > worst:
                        worst = val
                        where = {"lambda": lam.tolist(), "pieces": [offsets[a], offsets[b]], "probe": pi}
    return OrthogonalityReport(float(worst), False, trunc, where)
