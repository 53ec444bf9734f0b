"""Two-step nilpotent Lie algebras ``n = a + b + z`` with ``[a, b] ⊆ z``.

Only the brackets ``[X_i, Y_j] = sum_k c[i][j][k] Z_k`` are stored.  Every other
bracket vanishes by construction (``a``, ``b``, ``z`` abelian, ``z`` central), so
the Jacobi identity needs no separate check.

Structure constants are exact rationals.  An optional real ``scale`` multiplies
every bracket; it exists for algebras such as the rotation example with an
irrational coupling ``alpha``, and never enters the exact (symbolic) paths.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "AlgebraSpec",
    "ConditionReport",
    "ConfigError",
    "DetPolynomial",
    "b_matrix",
    "b_matrix_exact",
    "det_exact",
    "det_polynomial",
    "faithful_rep",
    "load_algebra",
    "validate_condition",
]


class ConfigError(ValueError):
    """Raised for malformed algebra or run configuration documents."""


def _rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"not a rational number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"not a rational number: {value!r}") from exc
    raise ConfigError(f"rationals must be integers or 'p/q' strings, got {value!r}")


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """Dimensions and structure constants of the Lie algebra.

    ``c[i][j][k]`` (0-based) is the coefficient of ``Z_k`` in ``[X_i, Y_j]``.
    """

    n: int
    d: int
    c: tuple
    scale: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.d, int):
            raise ConfigError("n and d must be integers")
        if self.d < 1:
            raise ConfigError(f"d must be positive, got {self.d}")
        if self.n - 2 * self.d < 1:
            raise ConfigError(f"the center must be nontrivial: n - 2d = {self.n - 2 * self.d}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigError(f"scale must be a positive finite number, got {self.scale}")
        k = self.n - 2 * self.d
        if len(self.c) != self.d or any(len(row) != self.d for row in self.c):
            raise ConfigError("structure tensor must have shape d x d x (n - 2d)")
        if any(len(entry) != k for row in self.c for entry in row):
            raise ConfigError("structure tensor must have shape d x d x (n - 2d)")

    @classmethod
    def from_brackets(
        cls,
        n: int,
        d: int,
        brackets: Iterable[tuple[int, int, Sequence[Any]]],
        scale: float = 1.0,
        name: str = "",
    ) -> "AlgebraSpec":
        """Build from 1-based ``(i, j, z_coeffs)`` triples; missing brackets are zero."""
        k = n - 2 * d
        if d < 1 or k < 1:
            raise ConfigError(f"invalid dimensions n={n}, d={d}")
        table = [[[Fraction(0)] * k for _ in range(d)] for _ in range(d)]
        seen = set()
        for i, j, coeffs in brackets:
            if not (1 <= i <= d and 1 <= j <= d):
                raise ConfigError(f"bracket index out of range: [X{i}, Y{j}] with d={d}")
            if (i, j) in seen:
                raise ConfigError(f"bracket [X{i}, Y{j}] given twice")
            seen.add((i, j))
            coeffs = list(coeffs)
            if len(coeffs) != k:
                raise ConfigError(f"[X{i}, Y{j}] needs {k} z_coeffs, got {len(coeffs)}")
            table[i - 1][j - 1] = [_rational(v) for v in coeffs]
        c = tuple(tuple(tuple(entry) for entry in row) for row in table)
        return cls(n=n, d=d, c=c, scale=float(scale), name=name)

    @property
    def center_dim(self) -> int:
        return self.n - 2 * self.d

    @cached_property
    def structure(self) -> np.ndarray:
        """Float structure tensor ``scale * c`` with shape (d, d, n - 2d)."""
        arr = np.array([[[float(v) for v in e] for e in row] for row in self.c])
        return self.scale * arr.reshape(self.d, self.d, self.center_dim)

    def brackets(self) -> list[tuple[int, int, list[Fraction]]]:
        """Nonzero brackets as 1-based ``(i, j, coeffs)`` triples."""
        out = []
        for i, row in enumerate(self.c):
            for j, entry in enumerate(row):
                if any(entry):
                    out.append((i + 1, j + 1, list(entry)))
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "d": self.d,
            "scale": self.scale,
            "brackets": [
                {"i": i, "j": j, "z_coeffs": [str(v) for v in coeffs]}
                for i, j, coeffs in self.brackets()
            ],
        }


def load_algebra(text: str | Mapping[str, Any]) -> AlgebraSpec:
    """Parse an algebra document (TOML or JSON text, or an already-parsed mapping).

    Expected keys: ``n``, ``d``, ``brackets = [{i, j, z_coeffs}, ...]`` and the
    optional ``scale`` and ``name``.
    """
    if isinstance(text, Mapping):
        doc = dict(text)
    else:
        stripped = text.lstrip()
        try:
            doc = json.loads(text) if stripped.startswith("{") else tomllib.loads(text)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse algebra document: {exc}") from exc
    if "algebra" in doc and isinstance(doc["algebra"], Mapping):
        doc = dict(doc["algebra"])
    for key in ("n", "d"):
        if key not in doc:
            raise ConfigError(f"algebra document is missing '{key}'")
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise ConfigError(f"'{key}' must be an integer")
    raw = doc.get("brackets", [])
    if not isinstance(raw, list):
        raise ConfigError("'brackets' must be a list of tables")
    triples = []
    for entry in raw:
        if not isinstance(entry, Mapping) or not {"i", "j", "z_coeffs"} <= set(entry):
            raise ConfigError(f"bracket entries need i, j and z_coeffs: {entry!r}")
        triples.append((entry["i"], entry["j"], entry["z_coeffs"]))
    scale = doc.get("scale", 1.0)
    if isinstance(scale, str) or isinstance(scale, bool):
        raise ConfigError("'scale' must be a number")
    return AlgebraSpec.from_brackets(
        doc["n"], doc["d"], triples, scale=float(scale), name=str(doc.get("name", ""))
    )


def b_matrix(spec: AlgebraSpec, lam) -> np.ndarray:
    """Return ``B(λ)`` with entries ``λ([X_i, Y_j])``.

    ``lam`` may carry leading batch axes: shape (..., n - 2d) gives (..., d, d).
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1:] != (spec.center_dim,):
        raise ValueError(f"λ must have trailing length {spec.center_dim}, got shape {lam.shape}")
    return np.einsum("ijk,...k->...ij", spec.structure, lam)


def b_matrix_exact(spec: AlgebraSpec, lam: Sequence[Fraction]) -> list[list[Fraction]]:
    """Rational part of ``B(λ)`` (the ``scale`` factor is left out)."""
    if len(lam) != spec.center_dim:
        raise ValueError(f"λ must have length {spec.center_dim}")
    lam = [Fraction(v) for v in lam]
    return [[sum((a * b for a, b in zip(entry, lam)), Fraction(0)) for entry in row] for row in spec.c]


def det_exact(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = [[Fraction(v) for v in row] for row in matrix]
    size = len(a)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, size):
            factor = a[r][col] / a[col][col]
            if factor:
                for c in range(col, size):
                    a[r][c] -= factor * a[col][c]
    return det


Monomial = tuple[int, ...]


@dataclass(frozen=True)
class DetPolynomial:
    """Homogeneous polynomial ``det B(λ) = scale**degree * sum coeff * λ**exponent``."""

    nvars: int
    degree: int
    coeffs: Mapping[Monomial, Fraction] = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self):
        for exps, value in self.coeffs.items():
            if len(exps) != self.nvars:
                raise ValueError(f"monomial {exps} does not have {self.nvars} exponents")
            if sum(exps) != self.degree:
                raise ValueError(f"monomial {exps} is not of degree {self.degree}")
            if value == 0:
                raise ValueError("zero coefficients must not be stored")

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate_exact(self, lam: Sequence[Fraction]) -> Fraction:
        """Rational part at a rational point (multiply by ``scale**degree`` for det B)."""
        lam = [Fraction(v) for v in lam]
        total = Fraction(0)
        for exps, coeff in self.coeffs.items():
            term = coeff
            for v, e in zip(lam, exps):
                term *= v**e
            total += term
        return total

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape[:-1])
        for exps, coeff in self.coeffs.items():
            out = out + float(coeff) * np.prod(lam ** np.array(exps), axis=-1)
        return self.scale**self.degree * out

    def format(self, var: str = "λ") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for exps in sorted(self.coeffs, reverse=True):
            coeff = self.coeffs[exps]
            factors = []
            for idx, e in enumerate(exps, start=1):
                if e == 1:
                    factors.append(f"{var}{idx}")
                elif e > 1:
                    factors.append(f"{var}{idx}^{e}")
            mono = "*".join(factors)
            mag = abs(coeff)
            body = mono if mag == 1 and mono else (f"{mag}*{mono}" if mono else f"{mag}")
            sign = "-" if coeff < 0 else "+"
            parts.append((sign, body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        if self.scale != 1.0:
            text = f"{self.scale!r}^{self.degree} * ({text})"
        return text

    def __str__(self) -> str:
        return self.format()

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "scale": self.scale,
            "terms": [
                {"exponents": list(exps), "coeff": str(self.coeffs[exps])}
                for exps in sorted(self.coeffs, reverse=True)
            ],
            "text": self.format(),
        }


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            e = tuple(a + b for a, b in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: v for e, v in out.items() if v}


def det_polynomial(spec: AlgebraSpec) -> DetPolynomial:
    """Exact ``det B(λ)`` by cofactor expansion over ``Q[λ_1, ..., λ_{n-2d}]``."""
    k, d = spec.center_dim, spec.d
    units = [tuple(int(a == b) for a in range(k)) for b in range(k)]
    entries = [
        [{units[idx]: v for idx, v in enumerate(entry) if v} for entry in row] for row in spec.c
    ]

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple[int, ...]) -> tuple:
        if row == d:
            return ((tuple([0] * k), Fraction(1)),)
        total: dict = {}
        for pos, col in enumerate(cols):
            entry = entries[row][col]
            if not entry:
                continue
            sub = dict(minor(row + 1, cols[:pos] + cols[pos + 1 :]))
            sign = -1 if pos % 2 else 1
            for e, v in _poly_mul(entry, sub).items():
                total[e] = total.get(e, 0) + sign * v
        return tuple((e, v) for e, v in total.items() if v)

    coeffs = dict(minor(0, tuple(range(d))))
    return DetPolynomial(nvars=k, degree=d, coeffs=coeffs, scale=spec.scale)


@dataclass(frozen=True)
class ConditionReport:
    nonvanishing: bool
    homogeneous: bool
    degree: int
    polynomial: DetPolynomial

    @property
    def ok(self) -> bool:
        return self.nonvanishing and self.homogeneous

    def to_dict(self) -> dict:
        return {
            "nonvanishing": self.nonvanishing,
            "homogeneous": self.homogeneous,
            "degree": self.degree,
            "det_polynomial": self.polynomial.to_dict(),
        }


def validate_condition(spec: AlgebraSpec) -> ConditionReport:
    """Decide whether ``det[[X_i, Y_j]]`` is a non-vanishing homogeneous polynomial.

    The verdict comes from the exact coefficients, never from sampled values.
    Homogeneity holds structurally (every entry of B is a linear form) and is
    re-checked on the stored monomials for transparency.
    """
    poly = det_polynomial(spec)
    homogeneous = all(sum(e) == spec.d for e in poly.coeffs)
    return ConditionReport(
        nonvanishing=not poly.is_zero, homogeneous=homogeneous, degree=spec.d, polynomial=poly
    )


def _coords(spec: AlgebraSpec, g) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if hasattr(g, "z"):
        return (np.asarray(g.z, float), np.asarray(g.y, float), np.asarray(g.x, float))
    flat = np.asarray(g, dtype=float)
    k, d = spec.center_dim, spec.d
    if flat.shape != (spec.n,):
        raise ValueError(f"group coordinates must have length {spec.n}")
    return flat[:k], flat[k : k + d], flat[k + d :]


def _nilpotent_exp(mat: np.ndarray) -> np.ndarray:
    out = np.eye(mat.shape[0])
    term = np.eye(mat.shape[0])
    for power in range(1, mat.shape[0] + 1):
        term = term @ mat / power
        if not term.any():
            break
        out = out + term
    return out


def _derived_projector(spec: AlgebraSpec) -> np.ndarray:
    # orthogonal projector (in Z-coordinates) onto the derived algebra [n, n]
    vectors = spec.structure.reshape(-1, spec.center_dim)
    u, s, _ = np.linalg.svd(vectors.T, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
    basis = u[:, :rank]
    return basis @ basis.T


def faithful_rep(spec: AlgebraSpec, alpha: float, g) -> np.ndarray:
    """Matrix of ``g`` in the faithful (n+1)-dimensional representation.

    The algebra is extended by a derivation ``A`` with ``[A, U] = ln(alpha) U`` on
    ``a + b + (z ⊖ [n, n])`` and ``[A, Z] = 2 ln(alpha) Z`` on ``[n, n]``; ``g`` acts
    through ``exp(ad(z·Z)) exp(ad(y·Y)) exp(ad(x·X))`` on the basis
    ``(Z_1..Z_{n-2d}, Y_1..Y_d, X_1..X_d, A)``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        raise ValueError("alpha = 1 gives a trivial derivation and an unfaithful representation")
    z, y, x = _coords(spec, g)
    k, d = spec.center_dim, spec.d
    size = spec.n + 1
    ln = math.log(alpha)
    proj = _derived_projector(spec)
    deriv_z = ln * (np.eye(k) - proj) + 2 * ln * proj
    C = spec.structure
    iz, iy, ix, ia = slice(0, k), slice(k, k + d), slice(k + d, k + 2 * d), k + 2 * d

    def ad_z(zv):
        m = np.zeros((size, size))
        m[iz, ia] = -deriv_z @ zv
        return m

    def ad_y(yv):
        m = np.zeros((size, size))
        # [y·Y, X_i] = -sum_j y_j [X_i, Y_j]
        m[iz, ix] = -np.einsum("ijk,j->ki", C, yv)
        m[iy, ia] = -ln * yv
        return m

    def ad_x(xv):
        m = np.zeros((size, size))
        # [x·X, Y_j] = sum_i x_i [X_i, Y_j]
        m[iz, iy] = np.einsum("ijk,i->kj", C, xv)
        m[ix, ia] = -ln * xv
        return m

    return _nilpotent_exp(ad_z(z)) @ _nilpotent_exp(ad_y(y)) @ _nilpotent_exp(ad_x(x))
