import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nilsampling import (
    ConfigError,
    Region,
    check_congruence,
    get_preset,
    in_E,
    make_grid,
    parse_region,
    partition_by_lattice,
    plancherel_measure,
    preset_region,
)
from nilsampling.presets import ROTATION_ALPHA
from nilsampling.spectral import abs_det


def quad_measure(spec, lo, hi):
    """Adaptive quadrature of |det B| on a 1D or 2D box (independent of the grid code)."""
    if spec.center_dim == 1:
        f = lambda a: abs_det(spec, [a])
        return integrate.quad(f, lo[0], hi[0], points=[0.0], limit=200)[0]
    f = lambda b, a: abs_det(spec, [a, b])
    return integrate.dblquad(f, lo[0], hi[0], lo[1], hi[1], epsabs=1e-10)[0]


def test_in_E_boundary():
    spec = get_preset("heisenberg")
    assert in_E(spec, [1.0]) and in_E(spec, [-0.3])
    assert not in_E(spec, [0.0]) and not in_E(spec, [1.01])
    np.testing.assert_array_equal(in_E(spec, [[0.5], [2.0]]), [True, False])


@pytest.mark.parametrize(
    "name, lo, hi",
    [("heisenberg", [-1.0], [1.0]), ("heisenberg", [-0.9], [0.9]), ("heisenberg_product", [-1, -1], [1, 1])],
)
def test_measure_matches_adaptive_quadrature(name, lo, hi):
    spec = get_preset(name)
    region = Region.box(lo, hi, cap_E=True)
    oracle = quad_measure(spec, lo, hi)
    assert plancherel_measure(spec, region, 256) == pytest.approx(oracle, abs=1e-4)


def test_heisenberg_closed_forms():
    spec = get_preset("heisenberg")
    assert plancherel_measure(spec, Region.box([-1], [1], cap_E=True), 256) == pytest.approx(1.0, abs=1e-12)
    assert plancherel_measure(spec, Region.box([-0.9], [0.9], cap_E=True), 256) == pytest.approx(0.81, abs=1e-5)


def test_E_cap_clips_where_det_exceeds_one():
    # on [-2, 2] only |λ| <= 1 survives, so the measure is still 1
    spec = get_preset("heisenberg")
    assert plancherel_measure(spec, Region.box([-2], [2], cap_E=True), 400) == pytest.approx(1.0, abs=1e-3)
    assert plancherel_measure(spec, Region.box([-2], [2]), 400) == pytest.approx(4.0, abs=1e-3)


def test_product_E_cap_with_hyperbola():
    spec = get_preset("heisenberg_product")
    region = Region.box([0.5, 0.5], [3, 3], cap_E=True)
    # integrate λ1 λ2 up to the curve λ1 λ2 = 1
    top = lambda a: max(0.5, min(3.0, 1.0 / a))
    oracle = integrate.dblquad(lambda b, a: a * b, 0.5, 3.0, 0.5, top)[0]
    assert plancherel_measure(spec, region, 512) == pytest.approx(oracle, abs=5e-3)


def test_rotation_disk_measure():
    # ∫ r^2 · r dr dθ over the unit disk
    spec = get_preset("rotation6d")
    assert plancherel_measure(spec, preset_region("rotation6d"), 512) == pytest.approx(math.pi / 2, abs=2e-3)


def test_rotation_alpha_measure_is_sqrt_half_pi():
    # α^2 ∫ r^3 dr dθ on r <= 1/α gives (π/2) α^{-2} = sqrt(π/2)
    spec = get_preset("rotation_alpha")
    oracle = (math.pi / 2) * ROTATION_ALPHA**2 / ROTATION_ALPHA**4
    assert oracle == pytest.approx(math.sqrt(math.pi / 2))
    assert plancherel_measure(spec, preset_region("rotation_alpha"), 512) == pytest.approx(oracle, abs=1e-3)


def test_empty_region_has_zero_measure():
    spec = get_preset("heisenberg")
    assert plancherel_measure(spec, Region.box([0.3], [0.3]), 64) == 0.0


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-1, 1), w=st.floats(0.05, 1))
def test_measure_is_additive(a, w):
    spec = get_preset("heisenberg")
    left = plancherel_measure(spec, Region.box([a], [a + w]), 2000)
    right = plancherel_measure(spec, Region.box([a + w], [a + 2 * w]), 2000)
    whole = plancherel_measure(spec, Region.box([a], [a + 2 * w]), 4000)
    assert left + right == pytest.approx(whole, abs=1e-5)


def test_grid_nodes_lie_in_region():
    spec = get_preset("rotation_alpha")
    region = preset_region("rotation_alpha")
    grid = make_grid(spec, region, 64)
    assert np.all(region.contains(spec, grid.nodes))
    assert grid.volume == pytest.approx(math.pi / ROTATION_ALPHA**2, rel=2e-2)


# --- lattice partition -----------------------------------------------------------


def test_partition_heisenberg():
    spec = get_preset("heisenberg")
    part = partition_by_lattice(spec, Region.box([-1], [1], cap_E=True), 256)
    assert part.offsets == ((-1,), (0,))
    np.testing.assert_allclose(part.measures, [0.5, 0.5], atol=1e-10)


def test_partition_product_example():
    spec = get_preset("heisenberg_product")
    part = partition_by_lattice(spec, Region.box([-1, -1], [1, 1], cap_E=True), 256)
    assert part.offsets == ((-1, -1), (-1, 0), (0, -1), (0, 0))
    np.testing.assert_allclose(part.measures, 0.25, atol=1e-10)
    assert part.to_dict()["mu"] == pytest.approx(1.0)
    assert check_congruence(spec, part.grid.region, part.offsets, 256) == 0.0


def test_partition_pieces_cover_grid():
    spec = get_preset("rotation_alpha")
    part = partition_by_lattice(spec, preset_region("rotation_alpha"), 64)
    assert sum(len(part.piece(j)) for j in range(len(part.offsets))) == len(part.grid)
    for j, off in enumerate(part.offsets):
        assert np.all(np.floor(part.piece(j).nodes) == off)


def test_congruence_detects_disk():
    spec = get_preset("rotation_alpha")
    region = preset_region("rotation_alpha")
    part = partition_by_lattice(spec, region, 64)
    # the disk has area π/α^2 but the four unit squares have area 4
    assert check_congruence(spec, region, part.offsets, 128) == pytest.approx(4 - math.pi / ROTATION_ALPHA**2, abs=0.05)


# --- region parsing ----------------------------------------------------------------


@pytest.mark.parametrize(
    "text, kind, lo, hi",
    [
        ("E_cap_box [-0.9,0.9]", "E_cap_box", (-0.9, -0.9), (0.9, 0.9)),
        ("E_cap_box[-1,1]", "E_cap_box", (-1.0, -1.0), (1.0, 1.0)),
        ("box [-1,1]x[0,2]", "box", (-1.0, 0.0), (1.0, 2.0)),
        ("box [−1, 1]", "box", (-1.0, -1.0), (1.0, 1.0)),
    ],
)
def test_parse_box_strings(text, kind, lo, hi):
    region = parse_region(text, 2)
    assert (region.kind, region.lo, region.hi) == (kind, lo, hi)


def test_parse_disk_string_and_table():
    region = parse_region("E_cap_disk 0.5", 2)
    assert region.kind == "E_cap_disk" and region.radius == 0.5 and region.center == (0.0, 0.0)
    table = parse_region({"kind": "disk", "center": [1, 2], "radius": 3})
    assert table.center == (1.0, 2.0) and table.radius == 3.0


@pytest.mark.parametrize("bad", ["hexagon [0,1]", "box", "box [a,b]", "E_cap_disk", "E_cap_disk x", {"kind": "blob"}])
def test_parse_region_errors(bad):
    with pytest.raises(ConfigError):
        parse_region(bad, 2)


def test_region_validation():
    with pytest.raises(ConfigError):
        Region.box([1.0], [0.0])
    with pytest.raises(ConfigError):
        Region.disk([0.0], -1.0)
    with pytest.raises(ValueError):
        Region.box([0], [1], cap_E=True).contains(None, [[0.5]])
