"""Shipped algebras and their default run settings."""
from __future__ import annotations

import math

from .algebra import AlgebraSpec, ConfigError
from .spectral import Region

__all__ = ["PRESETS", "get_preset", "preset_region", "ROTATION_ALPHA"]

ROTATION_ALPHA = (math.pi / 2) ** 0.25


def _heisenberg() -> AlgebraSpec:
    return AlgebraSpec.from_brackets(3, 1, [(1, 1, [1])], name="heisenberg")


def _heisenberg_product() -> AlgebraSpec:
    return AlgebraSpec.from_brackets(
        6, 2, [(1, 1, [1, 0]), (2, 2, [0, 1])], name="heisenberg_product"
    )


def _rotation6d() -> AlgebraSpec:
    return AlgebraSpec.from_brackets(
        6,
        2,
        [(1, 1, [1, 0]), (2, 1, [0, -1]), (1, 2, [0, 1]), (2, 2, [1, 0])],
        name="rotation6d",
    )


def _rotation_alpha() -> AlgebraSpec:
    # [X1,Y1] = αZ1, [X1,Y2] = -αZ2, [X2,Y1] = αZ2, [X2,Y2] = αZ1
    return AlgebraSpec.from_brackets(
        6,
        2,
        [(1, 1, [1, 0]), (1, 2, [0, -1]), (2, 1, [0, 1]), (2, 2, [1, 0])],
        scale=ROTATION_ALPHA,
        name="rotation_alpha",
    )


PRESETS = {
    "heisenberg": (_heisenberg, lambda: Region.box((-1.0,), (1.0,), cap_E=True)),
    "heisenberg_product": (
        _heisenberg_product,
        lambda: Region.box((-1.0, -1.0), (1.0, 1.0), cap_E=True),
    ),
    "rotation6d": (_rotation6d, lambda: Region.disk((0.0, 0.0), 1.0, cap_E=True)),
    "rotation_alpha": (
        _rotation_alpha,
        lambda: Region.disk((0.0, 0.0), 1.0 / ROTATION_ALPHA, cap_E=True),
    ),
}


def get_preset(name: str) -> AlgebraSpec:
    try:
        return PRESETS[name][0]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_region(name: str) -> Region:
    """Default band region ``E ∩ R`` for a preset."""
    try:
        return PRESETS[name][1]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
