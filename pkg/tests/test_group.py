import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nilsampling import GammaWindow, GroupElement, enumerate_gamma, faithful_rep, get_preset, inverse, multiply
from nilsampling.group import identity, inverse_array, iter_gamma, multiply_array

PRESET_NAMES = ["heisenberg", "heisenberg_product", "rotation6d", "rotation_alpha"]


def coords(n):
    return arrays(np.float64, (n,), elements=st.floats(-10, 10))


def test_heisenberg_product_of_generators():
    spec = get_preset("heisenberg")
    g = GroupElement((0,), (0,), (1,))
    h = GroupElement((0,), (1,), (0,))
    assert multiply(spec, g, h) == GroupElement((1,), (1,), (1,))
    # the other order has no central correction
    assert multiply(spec, h, g) == GroupElement((0,), (1,), (1,))


def test_heisenberg_product_agrees_with_matrices():
    spec = get_preset("heisenberg")
    g, h = np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0])
    lhs = faithful_rep(spec, math.exp(-1), multiply_array(spec, g, h))
    rhs = faithful_rep(spec, math.exp(-1), g) @ faithful_rep(spec, math.exp(-1), h)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_heisenberg_inverse_example():
    spec = get_preset("heisenberg")
    assert inverse(spec, GroupElement((1,), (1,), (1,))) == GroupElement((0,), (-1,), (-1,))


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_identity_is_neutral(name):
    spec = get_preset(name)
    e = identity(spec)
    g = GroupElement.from_array(spec, np.arange(spec.n) - 1.5)
    assert multiply(spec, e, g) == g == multiply(spec, g, e)
    assert inverse(spec, e) == e


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_group_axioms_batched(name):
    spec = get_preset(name)
    g, h, k = np.random.default_rng(1).uniform(-5, 5, size=(3, 500, spec.n))
    left = multiply_array(spec, multiply_array(spec, g, h), k)
    right = multiply_array(spec, g, multiply_array(spec, h, k))
    assert np.max(np.abs(left - right)) <= 1e-12 * 100
    assert np.max(np.abs(multiply_array(spec, g, inverse_array(spec, g)))) <= 1e-12 * 10
    assert np.max(np.abs(multiply_array(spec, inverse_array(spec, g), g))) <= 1e-12 * 10


@settings(max_examples=80, deadline=None)
@given(g=coords(6), h=coords(6), k=coords(6))
def test_associativity_property(g, h, k):
    spec = get_preset("rotation6d")
    left = multiply_array(spec, multiply_array(spec, g, h), k)
    right = multiply_array(spec, g, multiply_array(spec, h, k))
    np.testing.assert_allclose(left, right, rtol=1e-12, atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(g=coords(3))
def test_inverse_property(g):
    spec = get_preset("heisenberg")
    np.testing.assert_allclose(multiply_array(spec, inverse_array(spec, g), g), 0, atol=1e-12)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_faithful_rep_consistency(name):
    spec = get_preset(name)
    g, h = np.random.default_rng(2).uniform(-1, 1, size=(2, 100, spec.n))
    for a, b in zip(g, h):
        lhs = faithful_rep(spec, math.exp(-1), multiply_array(spec, a, b))
        rhs = faithful_rep(spec, math.exp(-1), a) @ faithful_rep(spec, math.exp(-1), b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_dimension_mismatch():
    spec = get_preset("heisenberg_product")
    with pytest.raises(ValueError):
        multiply(spec, GroupElement((0,), (0,), (0,)), identity(spec))
    with pytest.raises(ValueError):
        multiply_array(spec, np.zeros(3), np.zeros(6))
    with pytest.raises(ValueError):
        GroupElement((0,), (0, 0), (0,))


# --- Γ ---------------------------------------------------------------------------


def test_heisenberg_unit_window_has_27_points():
    spec = get_preset("heisenberg")
    pts = enumerate_gamma(spec, GammaWindow.radius(1))
    assert pts.shape == (27, 3)
    assert len(np.unique(pts, axis=0)) == 27


def test_enumeration_is_lexicographic():
    spec = get_preset("heisenberg_product")
    pts = enumerate_gamma(spec, GammaWindow((-1, 0), (0, 1), (-1, 1)))
    order = np.lexsort(pts.T[::-1])
    np.testing.assert_array_equal(order, np.arange(len(pts)))
    assert len(pts) == GammaWindow((-1, 0), (0, 1), (-1, 1)).size(spec) == 2**2 * 2**2 * 3**2


def test_pure_x_shifts():
    spec = get_preset("heisenberg_product")
    pts = enumerate_gamma(spec, GammaWindow((0, 0), (0, 0), (0, 1)))
    assert len(pts) == 4
    assert np.all(pts[:, :4] == 0)


def test_window_elements_are_distinct_group_points():
    spec = get_preset("heisenberg")
    pts = enumerate_gamma(spec, GammaWindow.radius(1))
    rel = multiply_array(spec, inverse_array(spec, pts)[:, None, :], pts[None, :, :])
    is_identity = np.all(np.abs(rel) < 1e-12, axis=-1)
    np.testing.assert_array_equal(is_identity, np.eye(len(pts), dtype=bool))


def test_gamma_is_not_closed_for_irrational_brackets():
    spec = get_preset("rotation_alpha")
    pts = enumerate_gamma(spec, GammaWindow.radius(1))
    prods = multiply_array(spec, pts[:, None, :], pts[None, :, :]).reshape(-1, spec.n)
    off_lattice = np.any(np.abs(prods - np.round(prods)) > 1e-9, axis=1)
    assert off_lattice.any()


def test_iter_gamma_matches_array():
    spec = get_preset("heisenberg")
    window = GammaWindow((0, 1), (-1, 0), (0, 0))
    items = list(iter_gamma(spec, window))
    np.testing.assert_array_equal([g.as_array() for g in items], enumerate_gamma(spec, window))


@pytest.mark.parametrize("bad", [((1, 0), (0, 0), (0, 0)), ((0, 0), (0.5, 1), (0, 0))])
def test_bad_windows(bad):
    with pytest.raises(ValueError):
        GammaWindow(*bad)
